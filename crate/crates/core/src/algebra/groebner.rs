//! Buchberger's algorithm with the sugar selection strategy and the
//! Gebauer–Möller pair criteria.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::sync::Arc;

use super::poly::{Monomial, Polynomial};
use super::scalar::{FieldTag, Scalar};
use super::AlgebraError;

/// A term order. Every order here is encoded by a linear sort key, so
/// `key(a·b) = key(a) + key(b)` and comparison is lexicographic on keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MonomialOrder {
    GradedRevLex,
    Lex,
    /// Variable blocks, earlier blocks dominating, graded reverse lex inside
    /// each block. Every variable must appear in exactly one block.
    Block(Vec<Vec<usize>>),
}

impl MonomialOrder {
    /// Two-block elimination order: `eliminate` ≫ `keep`.
    pub fn elimination(eliminate: Vec<usize>, keep: Vec<usize>) -> Self {
        MonomialOrder::Block(vec![eliminate, keep])
    }

    pub fn key(&self, m: &Monomial) -> Vec<i64> {
        let e = m.exponents();
        match self {
            MonomialOrder::Lex => e.iter().map(|&x| x as i64).collect(),
            MonomialOrder::GradedRevLex => grevlex_key(e, &(0..e.len()).collect::<Vec<_>>()),
            MonomialOrder::Block(blocks) => blocks.iter().flat_map(|b| grevlex_key(e, b)).collect(),
        }
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        self.key(a).cmp(&self.key(b))
    }

    fn validate(&self, nvars: usize) -> Result<(), AlgebraError> {
        if let MonomialOrder::Block(blocks) = self {
            let mut seen = vec![false; nvars];
            for &v in blocks.iter().flatten() {
                if v >= nvars || seen[v] {
                    return Err(AlgebraError::ArityMismatch { expected: nvars, found: v + 1 });
                }
                seen[v] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(AlgebraError::ArityMismatch { expected: nvars, found: blocks.iter().map(Vec::len).sum() });
            }
        }
        Ok(())
    }
}

fn grevlex_key(e: &[u32], vars: &[usize]) -> Vec<i64> {
    let mut key = Vec::with_capacity(vars.len() + 1);
    key.push(vars.iter().map(|&v| e[v] as i64).sum());
    key.extend(vars.iter().rev().map(|&v| -(e[v] as i64)));
    key
}

/// Knobs for long-running Gröbner computations.
#[derive(Clone, Debug)]
pub struct GroebnerConfig {
    /// Abort after this many S-polynomial reductions.
    pub max_reductions: usize,
    /// Abort once any intermediate polynomial has more terms than this.
    pub max_terms: usize,
    /// Cooperative cancellation flag, polled between reductions.
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Default for GroebnerConfig {
    fn default() -> Self {
        GroebnerConfig { max_reductions: 200_000, max_terms: 200_000, cancel: None }
    }
}

#[derive(Clone, Debug)]
struct Term {
    key: Vec<i64>,
    mono: Monomial,
    coeff: Scalar,
}

#[derive(Clone, Debug)]
struct GPoly {
    // descending under the order
    terms: Vec<Term>,
    sugar: u64,
}

impl GPoly {
    fn from_poly(p: &Polynomial, order: &MonomialOrder) -> Self {
        let mut terms: Vec<Term> = p
            .terms()
            .map(|(m, c)| Term { key: order.key(m), mono: m.clone(), coeff: c.clone() })
            .collect();
        terms.sort_by(|a, b| b.key.cmp(&a.key));
        let sugar = p.degree();
        GPoly { terms, sugar }
    }

    fn to_poly(&self, field: FieldTag, nvars: usize) -> Polynomial {
        Polynomial::from_terms(field, nvars, self.terms.iter().map(|t| (t.mono.clone(), t.coeff.clone())))
    }

    fn lead(&self) -> &Term {
        &self.terms[0]
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn make_monic(&mut self) {
        if let Some(t) = self.terms.first() {
            if !t.coeff.is_one() {
                let inv = t.coeff.inv().unwrap();
                for t in &mut self.terms {
                    t.coeff = &t.coeff * &inv;
                }
            }
        }
    }
}

fn add_keys(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `a - c · m · b` where `m` has sort key `mkey`; both inputs descending.
fn sub_scaled(a: &[Term], b: &[Term], c: &Scalar, m: &Monomial, mkey: &[i64]) -> Vec<Term> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut i = 0;
    let mut j = 0;
    while i < a.len() || j < b.len() {
        let bj = b.get(j).map(|t| Term { key: add_keys(&t.key, mkey), mono: t.mono.mul(m), coeff: t.coeff.clone() });
        match (a.get(i), bj) {
            (Some(ta), Some(tb)) => match ta.key.cmp(&tb.key) {
                Ordering::Greater => {
                    out.push(ta.clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(Term { coeff: -&(c * &tb.coeff), ..tb });
                    j += 1;
                }
                Ordering::Equal => {
                    let v = &ta.coeff - &(c * &tb.coeff);
                    if !v.is_zero() {
                        out.push(Term { coeff: v, ..tb });
                    }
                    i += 1;
                    j += 1;
                }
            },
            (Some(ta), None) => {
                out.push(ta.clone());
                i += 1;
            }
            (None, Some(tb)) => {
                out.push(Term { coeff: -&(c * &tb.coeff), ..tb });
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Full reduction of `p` modulo monic `basis`.
fn reduce_full(
    p: GPoly,
    basis: &[GPoly],
    order: &MonomialOrder,
    cfg: &GroebnerConfig,
) -> Result<GPoly, AlgebraError> {
    let mut rest = p.terms;
    let mut sugar = p.sugar;
    let mut rem: Vec<Term> = Vec::new();
    while !rest.is_empty() {
        if rest.len() > cfg.max_terms {
            return Err(AlgebraError::ResourceLimit(format!(
                "intermediate polynomial exceeded {} terms",
                cfg.max_terms
            )));
        }
        let lead = &rest[0];
        match basis.iter().find(|g| g.lead().mono.divides(&lead.mono)) {
            Some(g) => {
                let m = lead.mono.div(&g.lead().mono);
                let mkey = order.key(&m);
                let c = lead.coeff.clone();
                sugar = sugar.max(m.degree() + g.sugar);
                rest = sub_scaled(&rest, &g.terms, &c, &m, &mkey);
            }
            None => rem.push(rest.remove(0)),
        }
    }
    Ok(GPoly { terms: rem, sugar })
}

#[derive(Clone, Debug)]
struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
    key: Vec<i64>,
    sugar: u64,
}

fn spoly(a: &GPoly, b: &GPoly, lcm: &Monomial, order: &MonomialOrder) -> GPoly {
    let ma = lcm.div(&a.lead().mono);
    let mb = lcm.div(&b.lead().mono);
    let ka = order.key(&ma);
    let kb = order.key(&mb);
    let shifted: Vec<Term> = a
        .terms
        .iter()
        .map(|t| Term { key: add_keys(&t.key, &ka), mono: t.mono.mul(&ma), coeff: t.coeff.clone() })
        .collect();
    let one = a.lead().coeff.field().one();
    let terms = sub_scaled(&shifted, &b.terms, &one, &mb, &kb);
    GPoly { terms, sugar: (a.sugar + ma.degree()).max(b.sugar + mb.degree()) }
}

/// Reduced Gröbner basis of the ideal generated by `generators`.
pub fn buchberger(generators: &[Polynomial], order: &MonomialOrder) -> Result<Vec<Polynomial>, AlgebraError> {
    buchberger_with(generators, order, &GroebnerConfig::default())
}

pub fn buchberger_with(
    generators: &[Polynomial],
    order: &MonomialOrder,
    cfg: &GroebnerConfig,
) -> Result<Vec<Polynomial>, AlgebraError> {
    let Some(first) = generators.first() else {
        return Ok(Vec::new());
    };
    let field = first.field();
    let nvars = first.nvars();
    if generators.iter().any(|g| g.field() != field || g.nvars() != nvars) {
        return Err(AlgebraError::FieldMismatch);
    }
    order.validate(nvars)?;

    let mut basis: Vec<GPoly> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();
    let mut reductions = 0usize;

    let mut inputs: Vec<GPoly> =
        generators.iter().filter(|g| !g.is_zero()).map(|g| GPoly::from_poly(g, order)).collect();
    inputs.sort_by(|a, b| a.lead().key.cmp(&b.lead().key));
    for g in inputs {
        let mut h = reduce_full(g, &basis, order, cfg)?;
        if h.is_zero() {
            continue;
        }
        h.make_monic();
        insert(&mut basis, &mut pairs, h, order);
    }

    while !pairs.is_empty() {
        if let Some(flag) = &cfg.cancel {
            if flag.load(AtomicOrdering::Relaxed) {
                return Err(AlgebraError::Cancelled);
            }
        }
        reductions += 1;
        if reductions > cfg.max_reductions {
            return Err(AlgebraError::ResourceLimit(format!("more than {} reductions", cfg.max_reductions)));
        }
        let best = (0..pairs.len())
            .min_by(|&a, &b| pairs[a].sugar.cmp(&pairs[b].sugar).then_with(|| pairs[a].key.cmp(&pairs[b].key)))
            .unwrap();
        let pair = pairs.swap_remove(best);
        let s = spoly(&basis[pair.i], &basis[pair.j], &pair.lcm, order);
        let mut h = reduce_full(s, &basis, order, cfg)?;
        if h.is_zero() {
            continue;
        }
        h.make_monic();
        insert(&mut basis, &mut pairs, h, order);
    }

    Ok(interreduce(basis, order, cfg)?.iter().map(|g| g.to_poly(field, nvars)).collect())
}

fn insert(basis: &mut Vec<GPoly>, pairs: &mut Vec<Pair>, h: GPoly, order: &MonomialOrder) {
    let hl = h.lead().mono.clone();
    let t = basis.len();
    // criterion B: drop old pairs made redundant by h
    pairs.retain(|p| {
        if !hl.divides(&p.lcm) {
            return true;
        }
        let li = basis[p.i].lead().mono.lcm(&hl);
        let lj = basis[p.j].lead().mono.lcm(&hl);
        li == p.lcm || lj == p.lcm
    });
    let mut new: Vec<(Pair, bool)> = (0..t)
        .map(|i| {
            let gi = &basis[i];
            let lcm = gi.lead().mono.lcm(&hl);
            let coprime = gi.lead().mono.is_coprime(&hl);
            let sugar = (gi.sugar + lcm.degree() - gi.lead().mono.degree()).max(h.sugar + lcm.degree() - hl.degree());
            (Pair { i, j: t, key: order.key(&lcm), lcm, sugar }, coprime)
        })
        .collect();
    // criterion M: drop pairs whose lcm is a proper multiple of another new lcm
    let lcms: Vec<Monomial> = new.iter().map(|(p, _)| p.lcm.clone()).collect();
    new.retain(|(p, _)| !lcms.iter().any(|l| l != &p.lcm && l.divides(&p.lcm)));
    // criterion F and the product criterion: one pair per lcm, none if any is coprime
    let mut kept: Vec<(Pair, bool)> = Vec::new();
    for (p, coprime) in new {
        if let Some(k) = kept.iter_mut().find(|(q, _)| q.lcm == p.lcm) {
            k.1 |= coprime;
        } else {
            kept.push((p, coprime));
        }
    }
    pairs.extend(kept.into_iter().filter(|(_, c)| !c).map(|(p, _)| p));
    basis.push(h);
}

fn interreduce(basis: Vec<GPoly>, order: &MonomialOrder, cfg: &GroebnerConfig) -> Result<Vec<GPoly>, AlgebraError> {
    // minimal basis: drop elements whose leading monomial is divisible by another's
    let mut minimal: Vec<GPoly> = Vec::new();
    for (i, g) in basis.iter().enumerate() {
        let redundant = basis.iter().enumerate().any(|(j, h)| {
            j != i
                && h.lead().mono.divides(&g.lead().mono)
                && (h.lead().mono != g.lead().mono || j < i)
        });
        if !redundant {
            minimal.push(g.clone());
        }
    }
    let mut out = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<GPoly> =
            minimal.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g.clone()).collect();
        let g = &minimal[i];
        let tail = GPoly { terms: g.terms[1..].to_vec(), sugar: g.sugar };
        let mut reduced = reduce_full(tail, &others, order, cfg)?;
        reduced.terms.insert(0, g.lead().clone());
        reduced.make_monic();
        out.push(reduced);
    }
    out.sort_by(|a, b| a.lead().key.cmp(&b.lead().key));
    Ok(out)
}

/// The remainder of `f` on division by the Gröbner basis `basis`.
pub fn normal_form(f: &Polynomial, basis: &[Polynomial], order: &MonomialOrder) -> Polynomial {
    let monic: Vec<GPoly> = basis
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| {
            let mut p = GPoly::from_poly(g, order);
            p.make_monic();
            p
        })
        .collect();
    let cfg = GroebnerConfig { max_reductions: usize::MAX, max_terms: usize::MAX, cancel: None };
    let r = reduce_full(GPoly::from_poly(f, order), &monic, order, &cfg).expect("no limits configured");
    r.to_poly(f.field(), f.nvars())
}

/// Leading monomial of `p` under `order`.
pub fn leading_monomial(p: &Polynomial, order: &MonomialOrder) -> Option<Monomial> {
    p.terms().map(|(m, _)| m).max_by(|a, b| order.cmp(a, b)).cloned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_polynomial;

    const Q: FieldTag = FieldTag::Rationals;

    fn ps(v: &[&str], names: &[&str]) -> Vec<Polynomial> {
        v.iter().map(|s| parse_polynomial(s, names, Q).unwrap()).collect()
    }

    #[test]
    fn single_monomial_generator() {
        for order in [MonomialOrder::Lex, MonomialOrder::GradedRevLex] {
            let gb = buchberger(&ps(&["x"], &["x", "y"]), &order).unwrap();
            assert_eq!(gb, ps(&["x"], &["x", "y"]));
        }
    }

    #[test]
    fn one_s_polynomial() {
        let gb = buchberger(&ps(&["x^2+x", "x^2"], &["x"]), &MonomialOrder::Lex).unwrap();
        assert_eq!(gb, ps(&["x"], &["x"]));
    }

    #[test]
    fn hand_run_lex() {
        let names = ["x", "y"];
        let gb = buchberger(&ps(&["x*y-1", "y^2-1"], &names), &MonomialOrder::Lex).unwrap();
        let mut expected = ps(&["x-y", "y^2-1"], &names);
        expected.sort_by(|a, b| {
            MonomialOrder::Lex.cmp(&leading_monomial(a, &MonomialOrder::Lex).unwrap(), &leading_monomial(b, &MonomialOrder::Lex).unwrap())
        });
        assert_eq!(gb, expected);
    }

    #[test]
    fn normal_forms() {
        let names = ["x", "y"];
        let f = ps(&["x+y+1", "x^2", "x-y"], &names);
        assert_eq!(normal_form(&f[0], &ps(&["x", "y"], &names), &MonomialOrder::GradedRevLex), ps(&["1"], &names)[0]);
        assert!(normal_form(&f[1], &ps(&["x"], &names), &MonomialOrder::GradedRevLex).is_zero());
        assert!(normal_form(&f[2], &ps(&["x-y", "y^2-1"], &names), &MonomialOrder::Lex).is_zero());
    }

    #[test]
    fn grevlex_orders_like_the_textbook() {
        let o = MonomialOrder::GradedRevLex;
        let m = |e: &[u32]| Monomial::from_exponents(e.to_vec());
        // x*z^2 < x*y*z? degree 3 each; grevlex: smallest variable exponent decides
        assert_eq!(o.cmp(&m(&[1, 0, 2]), &m(&[1, 1, 1])), Ordering::Less);
        assert_eq!(o.cmp(&m(&[2, 0, 0]), &m(&[0, 1, 1])), Ordering::Greater);
        let block = MonomialOrder::elimination(vec![0], vec![1, 2]);
        assert_eq!(block.cmp(&m(&[1, 0, 0]), &m(&[0, 5, 5])), Ordering::Greater);
    }

    #[test]
    fn elimination_finds_implicit_equation() {
        // t -> (t^2, t^3): eliminating t leaves y^2 - x^3
        let names = ["t", "x", "y"];
        let gens = ps(&["x - t^2", "y - t^3"], &names);
        let gb = buchberger(&gens, &MonomialOrder::elimination(vec![0], vec![1, 2])).unwrap();
        let elim: Vec<_> = gb.into_iter().filter(|g| g.degree_in(0) == 0).collect();
        assert_eq!(elim, ps(&["x^3 - y^2"], &names));
    }

    #[test]
    fn bad_block_order_is_rejected() {
        let gens = ps(&["x"], &["x", "y"]);
        assert!(buchberger(&gens, &MonomialOrder::Block(vec![vec![0]])).is_err());
    }

    #[test]
    fn cancellation_is_honoured() {
        let flag = Arc::new(AtomicBool::new(true));
        let cfg = GroebnerConfig { cancel: Some(flag), ..GroebnerConfig::default() };
        let gens = ps(&["x*y-1", "y^2-1"], &["x", "y"]);
        assert_eq!(buchberger_with(&gens, &MonomialOrder::Lex, &cfg), Err(AlgebraError::Cancelled));
    }
}
