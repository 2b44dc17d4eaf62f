//! Modular multivariate GCD over Q: images modulo word-sized primes are
//! computed by evaluation and interpolation (dense, one variable at a time),
//! lifted by Chinese remaindering and rational reconstruction, and accepted
//! only after exact trial division.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::{Monomial, Polynomial};
use super::scalar::{FieldTag, Scalar};

type Exp = Vec<u32>;

/// Sparse polynomial over `F_p`; the map order is lex with `x1 > x2 > ...`,
/// so the leading term is the last entry.
#[derive(Clone, Debug, PartialEq)]
struct ModPoly {
    terms: BTreeMap<Exp, u64>,
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + b as u128) % p as u128) as u64
}

fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    add_mod(a, p - b % p, p)
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut e, mut base, mut acc) = (p - 2, a % p, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        e >>= 1;
    }
    acc
}

// ---- dense univariate helpers, coefficient `i` multiplies `y^i` ----

fn trim(mut u: Vec<u64>) -> Vec<u64> {
    while u.last() == Some(&0) {
        u.pop();
    }
    u
}

fn deg(u: &[u64]) -> usize {
    u.len().saturating_sub(1)
}

fn uni_eval(u: &[u64], t: u64, p: u64) -> u64 {
    u.iter().rev().fold(0, |acc, &c| add_mod(mul_mod(acc, t, p), c, p))
}

fn uni_monic(u: Vec<u64>, p: u64) -> Vec<u64> {
    match u.last() {
        Some(&lc) if lc != 1 => {
            let inv = inv_mod(lc, p);
            u.into_iter().map(|c| mul_mod(c, inv, p)).collect()
        }
        _ => u,
    }
}

fn uni_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let inv = inv_mod(*b.last().unwrap(), p);
    while r.len() >= b.len() {
        let q = mul_mod(*r.last().unwrap(), inv, p);
        let shift = r.len() - b.len();
        for (i, &c) in b.iter().enumerate() {
            r[shift + i] = sub_mod(r[shift + i], mul_mod(q, c, p), p);
        }
        r = trim(r);
        if r.is_empty() {
            break;
        }
    }
    r
}

fn uni_divmod(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let mut r = a.to_vec();
    if r.len() < b.len() {
        return (Vec::new(), trim(r));
    }
    let mut q = vec![0; r.len() - b.len() + 1];
    let inv = inv_mod(*b.last().unwrap(), p);
    while r.len() >= b.len() && !r.is_empty() {
        let c = mul_mod(*r.last().unwrap(), inv, p);
        let shift = r.len() - b.len();
        q[shift] = c;
        for (i, &bc) in b.iter().enumerate() {
            r[shift + i] = sub_mod(r[shift + i], mul_mod(c, bc, p), p);
        }
        r = trim(r);
    }
    (q, r)
}

fn uni_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = uni_rem(&a, &b, p);
        a = b;
        b = r;
    }
    uni_monic(a, p)
}

fn uni_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = add_mod(out[i + j], mul_mod(x, y, p), p);
        }
    }
    out
}

/// Newton interpolation through `(ts[i], vs[i])`.
fn interpolate(ts: &[u64], vs: &[u64], p: u64) -> Vec<u64> {
    let mut result: Vec<u64> = Vec::new();
    let mut basis = vec![1u64]; // prod (y - t_j) over processed points
    for (i, (&t, &v)) in ts.iter().zip(vs).enumerate() {
        let current = uni_eval(&result, t, p);
        let scale = uni_eval(&basis, t, p);
        let c = mul_mod(sub_mod(v, current, p), inv_mod(scale, p), p);
        if result.len() < basis.len() {
            result.resize(basis.len(), 0);
        }
        for (k, &b) in basis.iter().enumerate() {
            result[k] = add_mod(result[k], mul_mod(c, b, p), p);
        }
        if i + 1 < ts.len() {
            basis = uni_mul(&basis, &[p - t % p, 1], p);
        }
    }
    trim(result)
}

// ---- multivariate pieces ----

impl ModPoly {
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn lead(&self) -> Option<(&Exp, u64)> {
        self.terms.iter().next_back().map(|(e, &c)| (e, c))
    }

    fn monic(self, p: u64) -> ModPoly {
        let Some((_, lc)) = self.lead() else { return self };
        let inv = inv_mod(lc, p);
        ModPoly { terms: self.terms.into_iter().map(|(e, c)| (e, mul_mod(c, inv, p))).collect() }
    }

    fn scale(self, c: u64, p: u64) -> ModPoly {
        if c == 0 {
            return ModPoly { terms: BTreeMap::new() };
        }
        ModPoly { terms: self.terms.into_iter().map(|(e, x)| (e, mul_mod(x, c, p))).collect() }
    }

    fn eval_var(&self, y: usize, t: u64, p: u64) -> ModPoly {
        let mut out: BTreeMap<Exp, u64> = BTreeMap::new();
        for (e, &c) in &self.terms {
            let mut key = e.clone();
            let k = key[y];
            key[y] = 0;
            let v = mul_mod(c, pow_mod(t, k as u64, p), p);
            let slot = out.entry(key).or_insert(0);
            *slot = add_mod(*slot, v, p);
        }
        out.retain(|_, c| *c != 0);
        ModPoly { terms: out }
    }

    /// Groups terms by their exponent outside `y`; each group is a dense
    /// polynomial in `y`.
    fn split_in(&self, y: usize) -> BTreeMap<Exp, Vec<u64>> {
        let mut out: BTreeMap<Exp, Vec<u64>> = BTreeMap::new();
        for (e, &c) in &self.terms {
            let mut key = e.clone();
            let k = key[y] as usize;
            key[y] = 0;
            let u = out.entry(key).or_default();
            if u.len() <= k {
                u.resize(k + 1, 0);
            }
            u[k] = c;
        }
        out
    }

    fn join_in(groups: &BTreeMap<Exp, Vec<u64>>, y: usize) -> ModPoly {
        let mut terms = BTreeMap::new();
        for (key, u) in groups {
            for (k, &c) in u.iter().enumerate() {
                if c != 0 {
                    let mut e = key.clone();
                    e[y] = k as u32;
                    terms.insert(e, c);
                }
            }
        }
        ModPoly { terms }
    }

    fn mul(&self, other: &ModPoly, p: u64) -> ModPoly {
        let mut out: BTreeMap<Exp, u64> = BTreeMap::new();
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e: Exp = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let slot = out.entry(e).or_insert(0);
                *slot = add_mod(*slot, mul_mod(ca, cb, p), p);
            }
        }
        out.retain(|_, c| *c != 0);
        ModPoly { terms: out }
    }

    /// True when `divisor` divides `self` exactly.
    fn divisible_by(&self, divisor: &ModPoly, p: u64) -> bool {
        let Some((dl, dc)) = divisor.lead().map(|(e, c)| (e.clone(), c)) else { return false };
        let inv = inv_mod(dc, p);
        let mut rem = self.terms.clone();
        while let Some((e, c)) = rem.iter().next_back().map(|(e, &c)| (e.clone(), c)) {
            if e.iter().zip(&dl).any(|(a, b)| a < b) {
                return false;
            }
            let shift: Exp = e.iter().zip(&dl).map(|(a, b)| a - b).collect();
            let q = mul_mod(c, inv, p);
            for (de, &dcoef) in &divisor.terms {
                let key: Exp = de.iter().zip(&shift).map(|(a, b)| a + b).collect();
                let slot = rem.entry(key.clone()).or_insert(0);
                *slot = sub_mod(*slot, mul_mod(q, dcoef, p), p);
                if *slot == 0 {
                    rem.remove(&key);
                }
            }
        }
        true
    }
}

fn pow_mod(b: u64, mut e: u64, p: u64) -> u64 {
    let (mut base, mut acc) = (b % p, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        e >>= 1;
    }
    acc
}

fn uni_content(groups: &BTreeMap<Exp, Vec<u64>>, p: u64) -> Vec<u64> {
    let mut acc: Vec<u64> = Vec::new();
    for u in groups.values() {
        acc = uni_gcd(&acc, u, p);
        if acc.len() == 1 {
            break;
        }
    }
    acc
}

fn divide_groups(groups: &mut BTreeMap<Exp, Vec<u64>>, c: &[u64], p: u64) {
    if c.len() <= 1 {
        return;
    }
    for u in groups.values_mut() {
        *u = uni_divmod(u, c, p).0;
    }
}

/// Monic gcd over `F_p` of polynomials whose variables lie in `active`.
/// `None` when evaluation points run out.
fn gcd_mod(a: &ModPoly, b: &ModPoly, active: &[usize], p: u64) -> Option<ModPoly> {
    if a.is_zero() {
        return Some(b.clone().monic(p));
    }
    if b.is_zero() {
        return Some(a.clone().monic(p));
    }
    let nvars = a.lead().unwrap().0.len();
    let Some((&y, rest)) = active.split_last() else {
        return Some(ModPoly { terms: BTreeMap::from([(vec![0; nvars], 1)]) });
    };

    let (mut ga, mut gb) = (a.split_in(y), b.split_in(y));
    let (ca, cb) = (uni_content(&ga, p), uni_content(&gb, p));
    let content = uni_gcd(&ca, &cb, p);
    divide_groups(&mut ga, &ca, p);
    divide_groups(&mut gb, &cb, p);
    let with_content = |pp: ModPoly| {
        let c = ModPoly::join_in(&BTreeMap::from([(vec![0; nvars], content.clone())]), y);
        pp.mul(&c, p).monic(p)
    };
    if rest.is_empty() {
        // both are now constants times powers of nothing: the gcd is the content
        return Some(with_content(ModPoly { terms: BTreeMap::from([(vec![0; nvars], 1)]) }));
    }
    let (pa, pb) = (ModPoly::join_in(&ga, y), ModPoly::join_in(&gb, y));
    let lca = ga.values().next_back().unwrap().clone();
    let lcb = gb.values().next_back().unwrap().clone();
    let gamma = uni_gcd(&lca, &lcb, p);
    let da = ga.values().map(|u| deg(u)).max().unwrap();
    let db = gb.values().map(|u| deg(u)).max().unwrap();
    let bound = da.min(db) + deg(&gamma);

    let mut ts: Vec<u64> = Vec::new();
    let mut images: Vec<ModPoly> = Vec::new();
    let mut lead: Option<Exp> = None;
    let budget = 4 * (bound + 1) + 64;
    for t in 1..=budget as u64 {
        if t >= p {
            return None;
        }
        if uni_eval(&lca, t, p) == 0 || uni_eval(&lcb, t, p) == 0 {
            continue;
        }
        let g = gcd_mod(&pa.eval_var(y, t, p), &pb.eval_var(y, t, p), rest, p)?;
        let gl = g.lead().unwrap().0.clone();
        if gl.iter().all(|&e| e == 0) {
            // a good image of the primitive gcd is trivial
            return Some(with_content(g));
        }
        match &lead {
            Some(l) if gl > *l => continue,
            Some(l) if gl < *l => {
                ts.clear();
                images.clear();
            }
            _ => {}
        }
        lead = Some(gl);
        ts.push(t);
        images.push(g.scale(uni_eval(&gamma, t, p), p));
        if images.len() <= bound {
            continue;
        }
        let mut keys: Vec<&Exp> = images.iter().flat_map(|g| g.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        let groups: BTreeMap<Exp, Vec<u64>> = keys
            .into_iter()
            .map(|k| {
                let vs: Vec<u64> = images.iter().map(|g| g.terms.get(k).copied().unwrap_or(0)).collect();
                (k.clone(), interpolate(&ts, &vs, p))
            })
            .filter(|(_, u)| !u.is_empty())
            .collect();
        let mut groups = groups;
        let c = uni_content(&groups, p);
        divide_groups(&mut groups, &c, p);
        let candidate = ModPoly::join_in(&groups, y);
        if pa.divisible_by(&candidate, p) && pb.divisible_by(&candidate, p) {
            return Some(with_content(candidate));
        }
        // an undetected unlucky point slipped in: start over
        ts.clear();
        images.clear();
        lead = None;
    }
    None
}

fn to_mod(a: &Polynomial, p: u64) -> Option<ModPoly> {
    let pb = BigInt::from(p);
    let mut terms = BTreeMap::new();
    for (m, c) in a.terms() {
        let r = c.as_rational()?;
        let den = r.denom().mod_floor(&pb).to_u64()?;
        if den == 0 {
            return None;
        }
        let num = r.numer().mod_floor(&pb).to_u64()?;
        let v = mul_mod(num, inv_mod(den, p), p);
        if v != 0 {
            terms.insert(m.exponents().to_vec(), v);
        }
    }
    Some(ModPoly { terms })
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `r` with `r ≡ x (mod m)` and small numerator and denominator.
fn rational_reconstruct(x: &BigInt, m: &BigInt) -> Option<BigRational> {
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), x.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        (r0, r1) = (r1.clone(), &r0 - &q * &r1);
        (t0, t1) = (t1.clone(), &t0 - &q * &t1);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    Some(BigRational::new(r1, t1))
}

/// Gcd of two nonzero polynomials over Q, normalized. `None` if the
/// modular machinery gives up, in which case the caller falls back.
pub(crate) fn modular_gcd(a: &Polynomial, b: &Polynomial) -> Option<Polynomial> {
    let field = FieldTag::Rationals;
    let nvars = a.nvars();
    let mut active: Vec<usize> = a.variables();
    for v in b.variables() {
        if !active.contains(&v) {
            active.push(v);
        }
    }
    active.sort_unstable();
    let (a, b) = (a.normalized(), b.normalized());
    let lex_lc = |q: &Polynomial| {
        q.terms()
            .max_by(|x, y| x.0.exponents().cmp(y.0.exponents()))
            .and_then(|(_, c)| c.as_rational().map(|r| r.numer().clone()))
            .unwrap()
    };
    let (la, lb) = (lex_lc(&a), lex_lc(&b));

    let mut modulus = BigInt::one();
    let mut lifted: BTreeMap<Exp, BigInt> = BTreeMap::new();
    let mut lead: Option<Exp> = None;
    let mut previous: Option<Polynomial> = None;
    let mut p = (1u64 << 31) - 1;
    for _ in 0..200 {
        while !is_prime_u64(p) || (&la % p).is_zero() || (&lb % p).is_zero() {
            p -= 2;
        }
        let prime = p;
        p -= 2;
        let (Some(am), Some(bm)) = (to_mod(&a, prime), to_mod(&b, prime)) else { continue };
        let Some(g) = gcd_mod(&am, &bm, &active, prime) else { continue };
        let gl = g.lead().unwrap().0.clone();
        if gl.iter().all(|&e| e == 0) {
            return Some(Polynomial::one(field, nvars));
        }
        match &lead {
            Some(l) if gl > *l => continue,
            Some(l) if gl < *l => {
                modulus = BigInt::one();
                lifted.clear();
                previous = None;
            }
            _ => {}
        }
        lead = Some(gl);

        // Chinese remaindering, coefficientwise
        let pb = BigInt::from(prime);
        let inv = BigInt::from(inv_mod((&modulus % prime).to_u64().unwrap(), prime));
        let mut keys: Vec<Exp> = lifted.keys().cloned().collect();
        keys.extend(g.terms.keys().cloned());
        keys.sort();
        keys.dedup();
        let mut next = BTreeMap::new();
        for k in keys {
            let old = lifted.get(&k).cloned().unwrap_or_default();
            let new = BigInt::from(g.terms.get(&k).copied().unwrap_or(0));
            let delta = ((&new - &old).mod_floor(&pb) * &inv).mod_floor(&pb);
            next.insert(k, &old + &modulus * delta);
        }
        modulus *= &pb;
        lifted = next;

        let mut terms = Vec::with_capacity(lifted.len());
        let mut ok = true;
        for (k, v) in &lifted {
            match rational_reconstruct(v, &modulus) {
                Some(r) if r.is_zero() => {}
                Some(r) => terms.push((Monomial::from_exponents(k.clone()), Scalar::Rat(r))),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let candidate = Polynomial::from_terms(field, nvars, terms).normalized();
        if previous.as_ref() == Some(&candidate)
            && a.div_exact(&candidate).is_some()
            && b.div_exact(&candidate).is_some()
        {
            return Some(candidate);
        }
        previous = Some(candidate);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_polynomial;

    fn q(s: &str) -> Polynomial {
        parse_polynomial(s, &["x", "y", "z"], FieldTag::Rationals).unwrap()
    }

    #[test]
    fn interpolation_round_trip() {
        let p = 101;
        let f = vec![3, 0, 5, 7];
        let ts = [1, 2, 3, 4];
        let vs: Vec<u64> = ts.iter().map(|&t| uni_eval(&f, t, p)).collect();
        assert_eq!(interpolate(&ts, &vs, p), f);
    }

    #[test]
    fn reconstructs_small_fractions() {
        let m = BigInt::from(1_000_003i64);
        let x = (BigInt::from(2) * BigInt::from(inv_mod(3, 1_000_003))) % &m;
        assert_eq!(rational_reconstruct(&x, &m), Some(BigRational::new(2.into(), 3.into())));
    }

    #[test]
    fn agrees_on_known_gcds() {
        let common = q("3*x*y + z^2 - 1/2");
        let a = &common * &q("x - y*z + 3");
        let b = &common * &q("y^2 + x*z");
        assert_eq!(modular_gcd(&a, &b).unwrap(), common.normalized());
        assert!(modular_gcd(&q("x+1"), &q("y+1")).unwrap().is_constant());
        let a = &q("x^2 + y + 1").pow(3) * &q("x - z");
        let b = &q("x^2 + y + 1").pow(2) * &q("x + z");
        assert_eq!(modular_gcd(&a, &b).unwrap(), q("x^2 + y + 1").pow(2).normalized());
    }
}
