//! Flattening a mutual recursion into a simple one.
//!
//! The generators `F_0, F_1, ...` of the main sequence span a growing chain
//! of subfields of `Q(x)`. At the first `m` with `F_{m+1} ∈ Q(F_0..F_m)` the
//! witness `R` gives `F_{n+m+1} = R(F_n..F_{n+m})` for every `n`.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::{
    buchberger_with, AlgebraError, FieldTag, GroebnerConfig, Monomial, MonomialOrder, Polynomial, RationalFunction,
    Scalar,
};
use crate::recsys::{InitialCondition, RecSystem, SystemError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlattenError {
    #[error("flattening requires the rationals as coefficient field")]
    UnsupportedField,
    #[error("no stabilization up to depth {bound} (k = {k}, D = {d}); a stabilizing chain must appear by then")]
    BoundExceeded { bound: u64, k: u64, d: u64, trdegs: Vec<usize> },
    #[error("no stabilization up to the depth limit {limit}")]
    DepthLimit { limit: usize, trdegs: Vec<usize> },
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("cancelled")]
    Cancelled,
    #[error(transparent)]
    System(#[from] SystemError),
}

impl From<AlgebraError> for FlattenError {
    fn from(e: AlgebraError) -> Self {
        match e {
            AlgebraError::ResourceLimit(s) => FlattenError::Resource(s),
            AlgebraError::Cancelled => FlattenError::Cancelled,
            AlgebraError::UnsupportedField(_) => FlattenError::UnsupportedField,
            e => FlattenError::System(SystemError::Algebra(e)),
        }
    }
}

/// The chain `Q(F_0) ⊆ Q(F_0, F_1) ⊆ ...` and its transcendence degrees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldChain {
    pub generators: Vec<RationalFunction>,
    pub trdegs: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlattenResult {
    pub m: usize,
    /// Over `y0..ym`.
    pub r: RationalFunction,
    /// `y_{m+1}·den(R) - num(R)` over `y0..y_{m+1}`.
    pub cancelling: Polynomial,
    /// The identity was checked exactly at `n = 0` and `n = 1`.
    pub verified: bool,
    /// Transcendence degrees of `Q(F_0..F_n)` for `n = 0..=m`.
    pub trdegs: Vec<usize>,
    /// The depth guard that was in force.
    pub bound: u64,
}

impl FlattenResult {
    pub fn variable_names(&self) -> Vec<String> {
        (0..=self.m + 1).map(|i| format!("y{i}")).collect()
    }
}

#[derive(Clone, Debug)]
pub struct FlattenOptions {
    /// Depth limit for non-canonical starts, or when `D` is unknown.
    pub depth_limit: usize,
    /// Overrides the canonical guard when set.
    pub bound_override: Option<u64>,
    pub seed: u64,
    pub groebner: GroebnerConfig,
}

impl Default for FlattenOptions {
    fn default() -> Self {
        FlattenOptions { depth_limit: 12, bound_override: None, seed: 0x5eed, groebner: GroebnerConfig::default() }
    }
}

impl FlattenOptions {
    pub fn cancel_flag(&self) -> Option<&Arc<AtomicBool>> {
        self.groebner.cancel.as_ref()
    }
}

/// `k + k^3·⌈log2(k·D)⌉`.
pub fn stabilization_bound(k: u64, d: u64) -> u64 {
    let kd = (k * d).max(1);
    let log = 64 - (kd - 1).leading_zeros() as u64;
    let log = if kd == 1 { 0 } else { log };
    k + k.pow(3) * log
}

fn check_q(gens: &[RationalFunction]) -> Result<(), FlattenError> {
    if gens.iter().any(|g| !g.field().is_rationals()) {
        return Err(FlattenError::UnsupportedField);
    }
    Ok(())
}

/// Transcendence degree of `Q(gens)`, the rank of the Jacobian over `Q(x)`.
pub fn transcendence_degree(gens: &[RationalFunction]) -> Result<usize, FlattenError> {
    transcendence_degree_seeded(gens, 0x5eed)
}

pub fn transcendence_degree_seeded(gens: &[RationalFunction], seed: u64) -> Result<usize, FlattenError> {
    check_q(gens)?;
    let Some(first) = gens.first() else {
        return Ok(0);
    };
    let n = first.nvars();
    if gens.iter().any(|g| g.nvars() != n) {
        return Err(AlgebraError::FieldMismatch.into());
    }
    // rows cleared of denominators: d(a/b) = (a'b - ab')/b^2, so scale by b^2
    let mut rows: Vec<Vec<Polynomial>> = Vec::with_capacity(gens.len());
    for g in gens {
        let (a, b) = (g.numerator(), g.denominator());
        let row = (0..n)
            .map(|v| {
                if b.is_constant() {
                    a.derivative(v)
                } else {
                    &(&a.derivative(v) * b) - &(a * &b.derivative(v))
                }
            })
            .collect();
        rows.push(row);
    }
    let full = gens.len().min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // a point rank is a lower bound; when it is already maximal it is exact
    let point: Vec<Scalar> = (0..n).map(|_| FieldTag::Rationals.from_i64(rng.gen_range(-997..=997))).collect();
    let numeric: Vec<Vec<Scalar>> = rows.iter().map(|r| r.iter().map(|p| p.eval(&point)).collect()).collect();
    if scalar_rank(numeric) == full {
        return Ok(full);
    }
    Ok(polynomial_rank(rows))
}

fn scalar_rank(mut m: Vec<Vec<Scalar>>) -> usize {
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let inv = m[rank][c].inv().expect("nonzero pivot");
        let (top, below) = m.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in below {
            if row[c].is_zero() {
                continue;
            }
            let f = &row[c] * &inv;
            for (x, p) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                *x = &*x - &(&f * p);
            }
        }
        rank += 1;
    }
    rank
}

/// Fraction-free (Bareiss) rank over the polynomial ring.
fn polynomial_rank(mut m: Vec<Vec<Polynomial>>) -> usize {
    let cols = m.first().map_or(0, Vec::len);
    let Some(one) = m.first().and_then(|r| r.first()).map(|p| Polynomial::one(p.field(), p.nvars())) else {
        return 0;
    };
    let mut prev = one;
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][c].clone();
        let (top, below) = m.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in below {
            let a = row[c].clone();
            for (x, p) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                let t = &(&pivot * &*x) - &(&a * p);
                *x = t.div_exact(&prev).unwrap_or(t);
            }
        }
        prev = pivot;
        rank += 1;
    }
    rank
}

/// Looks for `R` with `f = R(gens)`; `R` lives over `y1..ym`, one variable
/// per generator. Every returned `R` has been verified by substitution.
pub fn subfield_membership(
    f: &RationalFunction,
    gens: &[RationalFunction],
) -> Result<Option<RationalFunction>, FlattenError> {
    subfield_membership_with(f, gens, &GroebnerConfig::default())
}

pub fn subfield_membership_with(
    f: &RationalFunction,
    gens: &[RationalFunction],
    cfg: &GroebnerConfig,
) -> Result<Option<RationalFunction>, FlattenError> {
    check_q(std::slice::from_ref(f))?;
    check_q(gens)?;
    let q = FieldTag::Rationals;
    let m = gens.len();
    let nx = f.nvars();
    if gens.iter().any(|g| g.nvars() != nx) {
        return Err(AlgebraError::FieldMismatch.into());
    }
    if f.is_constant() {
        return Ok(Some(RationalFunction::constant(f.numerator().constant_term().clone(), m)
            .scale(&f.denominator().constant_term().inv().expect("nonzero denominator"))));
    }
    if let Some(i) = gens.iter().position(|g| g == f) {
        return Ok(Some(RationalFunction::var(q, m, i)));
    }
    if m == 0 {
        return Ok(None);
    }
    let mut all = gens.to_vec();
    all.push(f.clone());
    if transcendence_degree(&all)? > transcendence_degree(gens)? {
        return Ok(None);
    }

    // ring layout: x (nx), y (m), z, then w when some denominator is not constant
    let yi = |i: usize| nx + i;
    let z = nx + m;
    let needs_w = all.iter().any(|g| !g.denominator().is_constant());
    let nvars = nx + m + 1 + usize::from(needs_w);
    let x_map: Vec<usize> = (0..nx).collect();
    let lift = |p: &Polynomial| p.embed(nvars, &x_map);
    let mut ideal = Vec::with_capacity(m + 2);
    for (i, g) in all.iter().enumerate() {
        let tag = if i < m { yi(i) } else { z };
        let t = Polynomial::var(q, nvars, tag);
        ideal.push(&(&t * &lift(g.denominator())) - &lift(g.numerator()));
    }
    let mut eliminated: Vec<usize> = (0..nx).collect();
    if needs_w {
        let w = nvars - 1;
        let mut delta = Polynomial::one(q, nvars);
        for g in &all {
            delta = &delta * &lift(g.denominator());
        }
        ideal.push(&(&Polynomial::var(q, nvars, w) * &delta) - &Polynomial::one(q, nvars));
        eliminated.push(w);
    }
    // z dominating the y-block makes a relation linear in z surface whenever
    // f lies in the subfield
    let order = MonomialOrder::Block(vec![eliminated, vec![z], (0..m).map(yi).collect()]);
    let basis = buchberger_with(&ideal, &order, cfg)?;

    let to_y = |p: &Polynomial| -> Polynomial {
        let terms = p.terms().map(|(mono, c)| {
            let e = mono.exponents();
            (Monomial::from_exponents((0..m).map(|i| e[yi(i)]).collect()), c.clone())
        });
        Polynomial::from_terms(q, m, terms)
    };
    let mut candidates: Vec<(Polynomial, Polynomial)> = basis
        .iter()
        .filter(|g| g.degree_in(z) == 1 && (0..nx).all(|v| g.degree_in(v) == 0))
        .filter(|g| !needs_w || g.degree_in(nvars - 1) == 0)
        .map(|g| {
            let c = g.coefficients_in(z);
            (to_y(&c[1]), to_y(&c[0]))
        })
        .collect();
    candidates.sort_by(|a, b| a.0.degree().cmp(&b.0.degree()).then_with(|| a.0.to_string().cmp(&b.0.to_string())));

    let gens_at = |p: &Polynomial| RationalFunction::from_polynomial(p.clone()).substitute(gens);
    for (b, c0) in candidates {
        match gens_at(&b) {
            Ok(v) if !v.is_zero() => {}
            _ => continue,
        }
        let r = RationalFunction::new(c0.scale(&q.from_i64(-1)), b)?;
        let image = r.substitute(gens).map_err(|_| FlattenError::Internal("witness denominator vanishes".into()))?;
        if &image != f {
            return Err(FlattenError::Internal("membership witness failed verification".into()));
        }
        return Ok(Some(r));
    }
    Ok(None)
}

/// Generators `F_n` of the main sequence and the transcendence degree of
/// each prefix.
pub fn chain_report(generators: &[RationalFunction]) -> Result<FieldChain, FlattenError> {
    let mut trdegs = Vec::with_capacity(generators.len());
    for n in 1..=generators.len() {
        trdegs.push(transcendence_degree(&generators[..n])?);
    }
    Ok(FieldChain { generators: generators.to_vec(), trdegs })
}

fn check_cancelled(opts: &FlattenOptions) -> Result<(), FlattenError> {
    match opts.cancel_flag() {
        Some(flag) if flag.load(Ordering::Relaxed) => Err(FlattenError::Cancelled),
        _ => Ok(()),
    }
}

/// Runs the chain until the first membership `F_{m+1} ∈ Q(F_0..F_m)`.
pub fn flatten(sys: &RecSystem, init: &InitialCondition, opts: &FlattenOptions) -> Result<FlattenResult, FlattenError> {
    if !sys.field().is_rationals() {
        return Err(FlattenError::UnsupportedField);
    }
    let k = sys.k() as u64;
    let canonical_d = if init.is_canonical() { sys.degree() } else { None };
    let (limit, bound) = match (opts.bound_override, canonical_d) {
        (Some(b), _) => (b as usize, b),
        (None, Some(d)) => {
            let b = stabilization_bound(k, d.max(1));
            (b as usize, b)
        }
        (None, None) => (opts.depth_limit, opts.depth_limit as u64),
    };
    let main = sys.main();
    let mut trace = sys.symbolic_evaluate(init, 1)?;
    let mut gens: Vec<RationalFunction> = trace.column(main);
    let mut trdegs = vec![transcendence_degree_seeded(&gens[..1], opts.seed)?];
    let mut n = 0usize;
    let (m, r) = loop {
        check_cancelled(opts)?;
        let next_trdeg = transcendence_degree_seeded(&gens[..n + 2], opts.seed)?;
        if next_trdeg == trdegs[n] {
            if let Some(r) = subfield_membership_with(&gens[n + 1], &gens[..=n], &opts.groebner)? {
                break (n, r);
            }
        }
        trdegs.push(next_trdeg);
        n += 1;
        if n > limit {
            return Err(match canonical_d {
                Some(d) if opts.bound_override.is_none() => FlattenError::BoundExceeded { bound, k, d, trdegs },
                _ => FlattenError::DepthLimit { limit, trdegs },
            });
        }
        trace = extend(sys, trace)?;
        gens.push(trace.rows.last().unwrap()[main].clone());
    };

    // one more generator gives the n = 1 instance of the identity
    trace = extend(sys, trace)?;
    gens.push(trace.rows.last().unwrap()[main].clone());
    let verified = (0..=1).all(|s| r.substitute(&gens[s..=s + m]).is_ok_and(|v| v == gens[s + m + 1]));

    let q = FieldTag::Rationals;
    let width = m + 2;
    let map: Vec<usize> = (0..=m).collect();
    let top = Polynomial::var(q, width, m + 1);
    let cancelling = &(&top * &r.denominator().embed(width, &map)) - &r.numerator().embed(width, &map);
    Ok(FlattenResult { m, r, cancelling, verified, trdegs, bound })
}

fn extend(
    sys: &RecSystem,
    mut trace: crate::recsys::SymbolicTrace,
) -> Result<crate::recsys::SymbolicTrace, FlattenError> {
    let images = sys.symbolic_evaluate(
        &InitialCondition::SymbolicCustom { params: trace.params.clone(), values: trace.rows.last().unwrap().clone() },
        1,
    )?;
    trace.rows.push(images.rows[1].clone());
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_expr;

    const Q: FieldTag = FieldTag::Rationals;

    fn xs(s: &str) -> RationalFunction {
        parse_expr(s, &["x1", "x2"], Q).unwrap()
    }

    fn ys(s: &str, m: usize) -> RationalFunction {
        let names: Vec<String> = (1..=m).map(|i| format!("y{i}")).collect();
        parse_expr(s, &names, Q).unwrap()
    }

    #[test]
    fn bounds() {
        assert_eq!(stabilization_bound(2, 2), 18);
        assert_eq!(stabilization_bound(1, 1), 1);
        assert_eq!(stabilization_bound(2, 3), 26);
        assert_eq!(stabilization_bound(1, 2), 2);
        assert_eq!(stabilization_bound(3, 3), 3 + 27 * 4);
    }

    #[test]
    fn transcendence_degrees() {
        assert_eq!(transcendence_degree(&[xs("x1"), xs("x1^2+x2^2")]).unwrap(), 2);
        assert_eq!(transcendence_degree(&[]).unwrap(), 0);
        assert_eq!(transcendence_degree(&[xs("x1"), xs("x1^2")]).unwrap(), 1);
        assert_eq!(transcendence_degree(&[xs("x1+x2"), xs("x1*x2"), xs("x1^2+x2^2")]).unwrap(), 2);
        assert_eq!(transcendence_degree(&[xs("x1/x2"), xs("x2/x1")]).unwrap(), 1);
        assert_eq!(transcendence_degree(&[xs("3")]).unwrap(), 0);
    }

    #[test]
    fn exact_rank_agrees_with_point_rank() {
        let gens = [xs("x1+x2"), xs("(x1+x2)^3-1/(x1+x2)")];
        assert_eq!(transcendence_degree(&gens).unwrap(), 1);
    }

    #[test]
    fn membership_examples() {
        assert_eq!(subfield_membership(&xs("x1*x2"), &[xs("x1"), xs("x2^2")]).unwrap(), None);
        assert_eq!(subfield_membership(&xs("x1^2"), &[xs("x1")]).unwrap(), Some(ys("y1^2", 1)));
        assert_eq!(
            subfield_membership(&xs("x2^2"), &[xs("x1"), xs("x1^2+x2^2")]).unwrap(),
            Some(ys("y2-y1^2", 2))
        );
    }

    #[test]
    fn membership_with_denominators() {
        let gens = [xs("x1+x2"), xs("x1*x2")];
        let r = subfield_membership(&xs("1/x1+1/x2"), &gens).unwrap().unwrap();
        assert_eq!(r, ys("y1/y2", 2));
        let r = subfield_membership(&xs("x1/(x1+1)"), &[xs("1/x1")]).unwrap().unwrap();
        assert_eq!(r.substitute(&[xs("1/x1")]).unwrap(), xs("x1/(x1+1)"));
    }

    #[test]
    fn membership_needs_more_than_trdeg() {
        // x1 is algebraic over Q(x1^2) but not in it
        assert_eq!(subfield_membership(&xs("x1"), &[xs("x1^2")]).unwrap(), None);
    }

    fn chain_system() -> RecSystem {
        RecSystem::from_exprs(Q, &["u1", "u2"], &["u1^2+u2^2", "u1+u2"], false, 0).unwrap()
    }

    #[test]
    fn chain_profile() {
        let t = chain_system().symbolic_evaluate(&InitialCondition::Symbolic, 2).unwrap();
        assert_eq!(chain_report(&t.column(0)).unwrap().trdegs, [1, 2, 2]);
        let catalan = RecSystem::from_exprs(Q, &["u", "v"], &["2*(2*v+1)/(v+2)*u", "v+1"], false, 0).unwrap();
        let t = catalan.symbolic_evaluate(&InitialCondition::Symbolic, 2).unwrap();
        assert_eq!(chain_report(&t.column(0)).unwrap().trdegs, [1, 2, 2]);
    }

    #[test]
    fn flatten_chain_system() {
        let res = flatten(&chain_system(), &InitialCondition::Symbolic, &FlattenOptions::default()).unwrap();
        assert_eq!(res.m, 2);
        assert_eq!(res.trdegs, [1, 2, 2]);
        assert_eq!(res.bound, 18);
        assert!(res.verified);
    }

    #[test]
    fn flatten_constant_system() {
        let sys = RecSystem::from_exprs(Q, &["u"], &["u"], false, 0).unwrap();
        let res = flatten(&sys, &InitialCondition::Symbolic, &FlattenOptions::default()).unwrap();
        assert_eq!(res.m, 0);
        assert_eq!(res.r, parse_expr("y0", &["y0"], Q).unwrap());
        assert_eq!(res.cancelling.to_string_with(&res.variable_names()), "-y0 + y1");
    }

    #[test]
    fn flatten_custom_start() {
        let sys = RecSystem::from_exprs(Q, &["u", "v"], &["(v+1)*v*(v-1)", "v+1"], false, 0).unwrap();
        let x = |s: &str| parse_expr(s, &["x"], Q).unwrap();
        let init = InitialCondition::SymbolicCustom { params: vec!["x".into()], values: vec![x("x*(x-1)*(x-2)"), x("x")] };
        let res = flatten(&sys, &init, &FlattenOptions::default()).unwrap();
        assert_eq!(res.m, 1);
        assert!(res.verified);
        let expected = parse_expr("y1*(4*y1-y0)/(y1+2*y0)", &["y0", "y1"], Q).unwrap();
        let t = sys.symbolic_evaluate(&init, 4).unwrap().column(0);
        for n in 0..3 {
            assert_eq!(expected.substitute(&t[n..n + 2]).unwrap(), t[n + 2]);
            assert_eq!(res.r.substitute(&t[n..n + 2]).unwrap(), t[n + 2]);
        }
    }

    #[test]
    fn flatten_rejects_prime_fields() {
        let sys = RecSystem::from_exprs(FieldTag::prime(5).unwrap(), &["u"], &["u"], false, 0).unwrap();
        let err = flatten(&sys, &InitialCondition::Symbolic, &FlattenOptions::default()).unwrap_err();
        assert_eq!(err, FlattenError::UnsupportedField);
    }
}
