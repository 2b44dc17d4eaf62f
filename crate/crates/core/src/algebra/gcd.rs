//! Multivariate GCD by recursive content extraction and subresultant
//! pseudo-remainder sequences.

use super::modgcd::modular_gcd;
use super::poly::{Monomial, Polynomial};

/// Normalized greatest common divisor. `gcd(a, 0)` is `a` normalized and
/// `gcd(0, 0)` is `0`.
pub fn poly_gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
    assert_eq!(a.field(), b.field(), "field mismatch in gcd");
    assert_eq!(a.nvars(), b.nvars(), "arity mismatch in gcd");
    gcd_rec(a, b).normalized()
}

fn one_like(p: &Polynomial) -> Polynomial {
    Polynomial::one(p.field(), p.nvars())
}

fn gcd_rec(a: &Polynomial, b: &Polynomial) -> Polynomial {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return one_like(a);
    }
    if a == b {
        return a.clone();
    }
    // monomial content is cheap and very common (monomial denominators)
    let (ma, mb) = (monomial_content(a), monomial_content(b));
    let m = Polynomial::monomial(a.field().one(), min_exponents(&ma, &mb));
    if a.len() == 1 || b.len() == 1 {
        return m;
    }
    let (a, b) = (strip(a, &ma), strip(b, &mb));
    let (va, vb) = (a.variables(), b.variables());
    // a variable present on one side only can only live in that side's content
    if let Some(&v) = va.iter().find(|v| !vb.contains(v)) {
        return &m * &gcd_rec(&content_in(&a, v), &b);
    }
    if let Some(&v) = vb.iter().find(|v| !va.contains(v)) {
        return &m * &gcd_rec(&a, &content_in(&b, v));
    }
    let Some(v) = va.iter().copied().min_by_key(|&v| (a.degree_in(v).max(b.degree_in(v)), std::cmp::Reverse(v))) else {
        return m;
    };
    if a.field().is_rationals() {
        if let Some(g) = modular_gcd(&a, &b) {
            return &m * &g;
        }
    }
    let ca = content_in(&a, v);
    let cb = content_in(&b, v);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let c = gcd_rec(&ca, &cb);
    let g = primitive_gcd(pa, pb, v);
    &(&m * &c) * &g
}

fn monomial_content(p: &Polynomial) -> Monomial {
    let mut terms = p.terms().map(|(m, _)| m);
    let first = terms.next().expect("nonzero").clone();
    terms.fold(first, |acc, m| min_exponents(&acc, m))
}

fn min_exponents(a: &Monomial, b: &Monomial) -> Monomial {
    Monomial::from_exponents(a.exponents().iter().zip(b.exponents()).map(|(x, y)| *x.min(y)).collect())
}

fn strip(p: &Polynomial, m: &Monomial) -> Polynomial {
    if m.is_one() {
        p.clone()
    } else {
        Polynomial::from_terms(p.field(), p.nvars(), p.terms().map(|(t, c)| (t.div(m), c.clone())))
    }
}

/// Gcd of the coefficients with respect to `v`, up to a unit.
pub(crate) fn content_in(p: &Polynomial, v: usize) -> Polynomial {
    let mut acc = Polynomial::zero(p.field(), p.nvars());
    for c in p.coefficients_in(v).into_iter().rev() {
        if c.is_zero() {
            continue;
        }
        acc = gcd_rec(&acc, &c);
        if acc.is_constant() {
            return one_like(p);
        }
    }
    acc
}

fn primitive_part_in(p: &Polynomial, v: usize) -> Polynomial {
    let c = content_in(p, v);
    p.div_exact(&c).expect("content divides")
}

fn lead_in(p: &Polynomial, v: usize) -> Polynomial {
    p.coefficients_in(v).pop().unwrap_or_else(|| Polynomial::zero(p.field(), p.nvars()))
}

fn var_power(nvars: usize, v: usize, e: u32) -> Monomial {
    let mut exps = vec![0; nvars];
    exps[v] = e;
    Monomial::from_exponents(exps)
}

/// `lc(b)^(deg a - deg b + 1) * a mod b`, viewing both as univariate in `v`.
pub(crate) fn pseudo_remainder(a: &Polynomial, b: &Polynomial, v: usize) -> Polynomial {
    let db = b.degree_in(v);
    let lcb = lead_in(b, v);
    let mut r = a.clone();
    let mut e = (a.degree_in(v) + 1).saturating_sub(db);
    while !r.is_zero() && r.degree_in(v) >= db {
        let dr = r.degree_in(v);
        let t = lead_in(&r, v).mul_monomial(&var_power(r.nvars(), v, dr - db));
        r = &(&lcb * &r) - &(&t * b);
        e -= 1;
    }
    &lcb.pow(e) * &r
}

fn primitive_gcd(a: Polynomial, b: Polynomial, v: usize) -> Polynomial {
    let (mut a, mut b) = if a.degree_in(v) >= b.degree_in(v) { (a, b) } else { (b, a) };
    let mut g = one_like(&a);
    let mut h = one_like(&a);
    loop {
        let d = a.degree_in(v) - b.degree_in(v);
        let r = pseudo_remainder(&a, &b, v);
        if r.is_zero() {
            break;
        }
        if r.degree_in(v) == 0 {
            return one_like(&a);
        }
        a = b;
        let divisor = &g * &h.pow(d);
        b = r.div_exact(&divisor).expect("subresultant division is exact");
        g = lead_in(&a, v);
        if d > 0 {
            let num = g.pow(d);
            h = num.div_exact(&h.pow(d - 1)).expect("subresultant division is exact");
        }
    }
    primitive_part_in(&b, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_polynomial, FieldTag};

    fn p(s: &str) -> Polynomial {
        parse_polynomial(s, &["x", "y", "z"], FieldTag::Rationals).unwrap()
    }

    #[test]
    fn gcd_of_difference_of_squares() {
        assert_eq!(poly_gcd(&p("x^2-y^2"), &p("x-y")), p("x-y"));
    }

    #[test]
    fn gcd_with_zero_normalizes() {
        assert_eq!(poly_gcd(&p("-4*x+6"), &p("0")), p("2*x-3"));
        assert!(poly_gcd(&p("0"), &p("0")).is_zero());
    }

    #[test]
    fn gcd_strips_integer_content() {
        assert_eq!(poly_gcd(&p("6*x"), &p("4*x^2")), p("x"));
    }

    #[test]
    fn gcd_multivariate() {
        let common = p("x*y + z^2 - 1");
        let a = &common * &p("x - y*z + 3");
        let b = &common * &p("y^2 + x*z");
        assert_eq!(poly_gcd(&a, &b), common);
        assert_eq!(poly_gcd(&p("x+1"), &p("y+1")), p("1"));
    }

    #[test]
    fn monomial_shortcuts() {
        assert_eq!(poly_gcd(&p("x^2*y*z"), &p("x*y^3 + x^3*z")), p("x"));
        assert_eq!(poly_gcd(&p("x*y*(x + z)"), &p("y^2*(x + z)*(z + 1)")), p("y*(x + z)"));
        assert_eq!(poly_gcd(&p("x^2*(y + 1)"), &p("x*(z + 1)")), p("x"));
    }

    #[test]
    fn gcd_over_prime_field() {
        let f = FieldTag::prime(5).unwrap();
        let a = parse_polynomial("x^2 - 1", &["x"], f).unwrap();
        let b = parse_polynomial("2*x + 2", &["x"], f).unwrap();
        assert_eq!(poly_gcd(&a, &b), parse_polynomial("x + 1", &["x"], f).unwrap());
    }
}
