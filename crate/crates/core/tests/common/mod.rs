//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use ratrec_core::algebra::{FieldTag, Monomial, Polynomial, RationalFunction, Scalar};
use ratrec_core::circuit::{Circuit, CircuitBuilder};
use ratrec_core::qbf::BoolExpr;
use ratrec_core::recsys::{InitialCondition, RecSystem, SymbolicTrace, Update};

pub const Q: FieldTag = FieldTag::Rationals;

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::from(1), |acc, i| acc * BigInt::from(i))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::from(1), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

pub fn int(field: FieldTag, v: &BigInt) -> Scalar {
    field.from_bigint(v)
}

/// A random monomial of total degree exactly `deg`.
fn random_monomial(rng: &mut ChaCha8Rng, nvars: usize, deg: u32) -> Monomial {
    let mut e = vec![0u32; nvars];
    for _ in 0..deg {
        e[rng.gen_range(0..nvars)] += 1;
    }
    Monomial::from_exponents(e)
}

fn random_coeff(rng: &mut ChaCha8Rng, field: FieldTag) -> Scalar {
    loop {
        let c = field.from_i64(rng.gen_range(-3..=3));
        if !c.is_zero() {
            return c;
        }
    }
}

/// Sparse polynomial: one to three terms, biased towards few terms, with
/// degree at most `max_deg` and at least one term of positive degree when
/// `max_deg > 0`.
pub fn random_poly(rng: &mut ChaCha8Rng, field: FieldTag, nvars: usize, max_deg: u32) -> Polynomial {
    let nterms = match rng.gen_range(0..20) {
        0..=9 => 1,
        10..=16 => 2,
        _ => 3,
    };
    let mut terms = Vec::new();
    for t in 0..nterms {
        let lo = u32::from(t == 0 && max_deg > 0);
        let deg = rng.gen_range(lo..=max_deg);
        terms.push((random_monomial(rng, nvars, deg), random_coeff(rng, field)));
    }
    let p = Polynomial::from_terms(field, nvars, terms);
    if p.is_zero() {
        Polynomial::var(field, nvars, 0)
    } else {
        p
    }
}

/// A standard system with `k` sequences and updates of degree at most `d`.
/// With `rational`, some updates get a monomial denominator.
pub fn random_system(rng: &mut ChaCha8Rng, field: FieldTag, k: usize, d: u32, rational: bool) -> RecSystem {
    let names: Vec<String> = (1..=k).map(|i| format!("u{i}")).collect();
    let updates = (0..k)
        .map(|_| {
            let num = random_poly(rng, field, k, d);
            let f = if rational && rng.gen_bool(0.25) {
                let dd = rng.gen_range(1..=d);
                let den = Polynomial::monomial(field.one(), random_monomial(rng, k, dd));
                RationalFunction::new(num, den).expect("monomial denominator")
            } else {
                RationalFunction::from_polynomial(num)
            };
            Update::Rational(f)
        })
        .collect();
    RecSystem::new(field, names, updates, false, 0).expect("well-formed")
}

/// Symbolic trace from the canonical start, or `None` as soon as an entry
/// has more than `budget` terms or a denominator vanishes identically.
pub fn bounded_trace(sys: &RecSystem, steps: usize, budget: usize) -> Option<SymbolicTrace> {
    let mut trace = sys.symbolic_evaluate(&InitialCondition::Symbolic, 0).ok()?;
    for _ in 0..steps {
        let last = trace.rows.last().unwrap();
        if last.iter().any(|f| f.numerator().len() > budget || f.denominator().len() > budget) {
            return None;
        }
        let init = InitialCondition::SymbolicCustom { params: trace.params.clone(), values: last.clone() };
        let next = sys.symbolic_evaluate(&init, 1).ok()?;
        trace.rows.push(next.rows[1].clone());
    }
    Some(trace)
}

/// A random polynomial circuit reading the given labels.
pub fn random_circuit(rng: &mut ChaCha8Rng, field: FieldTag, labels: &[String], gates: usize) -> Circuit {
    let mut b = CircuitBuilder::new(field);
    let mut ids: Vec<usize> = Vec::new();
    let first = b.input(&labels[rng.gen_range(0..labels.len())]);
    ids.push(first);
    for _ in 0..gates {
        let id = match rng.gen_range(0..10) {
            0..=2 => b.input(&labels[rng.gen_range(0..labels.len())]),
            3 => b.constant(random_coeff(rng, field)),
            4..=6 => {
                let (l, r) = (ids[rng.gen_range(0..ids.len())], ids[rng.gen_range(0..ids.len())]);
                b.add(l, r)
            }
            _ => {
                let (l, r) = (ids[rng.gen_range(0..ids.len())], ids[rng.gen_range(0..ids.len())]);
                b.mul(l, r)
            }
        };
        ids.push(id);
    }
    b.finish(vec![*ids.last().unwrap()])
}

/// An extended system of dimension `k`; equation `i` may read `z1..z_{i-1}`.
/// With `circuits` every update is a circuit, otherwise a polynomial.
pub fn random_extended_system(rng: &mut ChaCha8Rng, field: FieldTag, k: usize, circuits: bool) -> RecSystem {
    let names: Vec<String> = (1..=k).map(|i| format!("s{i}")).collect();
    let updates = (0..k)
        .map(|i| {
            let mut labels = names.clone();
            labels.extend((1..=i).map(|j| format!("z{j}")));
            if circuits {
                let gates = rng.gen_range(1..6);
                Update::Circuit(random_circuit(rng, field, &labels, gates))
            } else {
                // a polynomial over 2k variables that only mentions z_j for j <= i
                let p = random_poly(rng, field, k + i, 2);
                let map: Vec<usize> = (0..k + i).collect();
                Update::Rational(RationalFunction::from_polynomial(p.embed(2 * k, &map)))
            }
        })
        .collect();
    RecSystem::new(field, names, updates, true, 0).expect("well-formed")
}

pub fn random_scalars(rng: &mut ChaCha8Rng, field: FieldTag, n: usize) -> Vec<Scalar> {
    (0..n).map(|_| field.from_i64(rng.gen_range(-3..=3))).collect()
}

pub fn random_bool_expr(rng: &mut ChaCha8Rng, vars: &[String], depth: usize) -> BoolExpr {
    if depth == 0 || rng.gen_bool(0.25) {
        return BoolExpr::var(&vars[rng.gen_range(0..vars.len())]);
    }
    match rng.gen_range(0..5) {
        0 => BoolExpr::not(random_bool_expr(rng, vars, depth - 1)),
        1 | 2 => BoolExpr::and(random_bool_expr(rng, vars, depth - 1), random_bool_expr(rng, vars, depth - 1)),
        _ => BoolExpr::or(random_bool_expr(rng, vars, depth - 1), random_bool_expr(rng, vars, depth - 1)),
    }
}

/// Monomials in `n` variables of total degree `1..=max_deg`, plus 1.
fn monomials_up_to(n: usize, max_deg: u32) -> Vec<Monomial> {
    let mut out = vec![Monomial::one(n)];
    let mut frontier = vec![Monomial::one(n)];
    for _ in 0..max_deg {
        let mut next = Vec::new();
        for m in &frontier {
            for v in 0..n {
                let mm = m.mul(&Monomial::var(n, v));
                if !next.contains(&mm) {
                    next.push(mm);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn nullspace(rows: Vec<Vec<Scalar>>, cols: usize, field: FieldTag) -> Vec<Vec<Scalar>> {
    let mut m = rows;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].inv().unwrap();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x = &*x - &(&f * p);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![field.zero(); cols];
            v[free] = field.one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -&m[row][free];
            }
            v
        })
        .collect()
}

/// Polynomial relations `Z` of degree at most `max_deg` with
/// `Z(gens) = 0`, found by interpolation at random points and then checked
/// exactly.
pub fn discover_relations(
    rng: &mut ChaCha8Rng,
    gens: &[RationalFunction],
    max_deg: u32,
) -> Vec<Polynomial> {
    let n = gens.len();
    let nx = gens[0].nvars();
    let monos = monomials_up_to(n, max_deg);
    let mut rows = Vec::new();
    while rows.len() < monos.len() + 8 {
        let point: Vec<Scalar> = (0..nx).map(|_| Q.from_i64(rng.gen_range(-50..=50))).collect();
        let Ok(vals) = gens.iter().map(|g| g.eval(&point)).collect::<Result<Vec<_>, _>>() else {
            continue;
        };
        let row = monos
            .iter()
            .map(|m| {
                m.exponents().iter().zip(&vals).fold(Q.one(), |acc, (&e, v)| &acc * &v.pow(u64::from(e)))
            })
            .collect();
        rows.push(row);
    }
    nullspace(rows, monos.len(), Q)
        .into_iter()
        .map(|v| Polynomial::from_terms(Q, n, monos.iter().cloned().zip(v)))
        .filter(|z| !z.is_zero())
        .filter(|z| RationalFunction::from_polynomial(z.clone()).substitute(gens).is_ok_and(|r| r.is_zero()))
        .collect()
}
