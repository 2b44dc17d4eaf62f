//! Reduced fractions of polynomials.

use std::fmt;

use super::gcd::poly_gcd;
use super::poly::{default_names, Polynomial};
use super::scalar::{FieldTag, Scalar};
use super::AlgebraError;

/// `num / den` with `gcd(num, den)` a unit and `den` normalized: integral,
/// content-free and with positive graded-lex leading coefficient over Q,
/// monic over F_p. Zero is `0/1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, AlgebraError> {
        if num.field() != den.field() || num.nvars() != den.nvars() {
            return Err(AlgebraError::FieldMismatch);
        }
        if den.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: Polynomial, den: Polynomial) -> Self {
        if num.is_zero() {
            let one = Polynomial::one(den.field(), den.nvars());
            return RationalFunction { num, den: one };
        }
        let (num, den) = if den.is_constant() {
            (num, den)
        } else {
            let g = poly_gcd(&num, &den);
            if g.is_constant() {
                (num, den)
            } else {
                (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
            }
        };
        let (unit, den) = den.normalize_unit();
        let num = num.scale(&unit.inv().unwrap());
        RationalFunction { num, den }
    }

    pub fn from_polynomial(p: Polynomial) -> Self {
        let den = Polynomial::one(p.field(), p.nvars());
        RationalFunction { num: p, den }
    }

    pub fn zero(field: FieldTag, nvars: usize) -> Self {
        Self::from_polynomial(Polynomial::zero(field, nvars))
    }

    pub fn one(field: FieldTag, nvars: usize) -> Self {
        Self::from_polynomial(Polynomial::one(field, nvars))
    }

    pub fn constant(c: Scalar, nvars: usize) -> Self {
        Self::from_polynomial(Polynomial::constant(c, nvars))
    }

    pub fn var(field: FieldTag, nvars: usize, i: usize) -> Self {
        Self::from_polynomial(Polynomial::var(field, nvars, i))
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn field(&self) -> FieldTag {
        self.num.field()
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    /// `max(deg num, deg den)`.
    pub fn degree(&self) -> u64 {
        self.num.degree().max(self.den.degree())
    }

    /// The polynomial itself when the denominator is a constant.
    pub fn as_polynomial(&self) -> Option<Polynomial> {
        if self.den.is_constant() {
            Some(self.num.scale(&self.den.constant_term().inv().unwrap()))
        } else {
            None
        }
    }

    fn check(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.field() != other.field() || self.nvars() != other.nvars() {
            Err(AlgebraError::FieldMismatch)
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        if self.den == other.den {
            return Ok(Self::reduce(&self.num + &other.num, self.den.clone()));
        }
        let num = &(&self.num * &other.den) + &(&other.num * &self.den);
        Ok(Self::reduce(num, &self.den * &other.den))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.field(), self.nvars()));
        }
        // cross-cancel first to keep intermediate products small
        let g1 = poly_gcd(&self.num, &other.den);
        let g2 = poly_gcd(&other.num, &self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = other.den.div_exact(&g1).unwrap();
        let n2 = other.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        Ok(Self::reduce(&n1 * &n2, &d1 * &d2))
    }

    pub fn inv(&self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(Self::reduce(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        self.mul(&other.inv()?)
    }

    pub fn neg(&self) -> Self {
        RationalFunction { num: -&self.num, den: self.den.clone() }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self::reduce(self.num.scale(c), self.den.clone())
    }

    pub fn pow(&self, e: u32) -> Self {
        // powers of coprime polynomials stay coprime
        let (unit, den) = self.den.pow(e).normalize_unit();
        RationalFunction { num: self.num.pow(e).scale(&unit.inv().unwrap()), den }
    }

    /// Value at a point, or `DivisionByZero` if the denominator vanishes there.
    pub fn eval(&self, point: &[Scalar]) -> Result<Scalar, AlgebraError> {
        let d = self.den.eval(point);
        let inv = d.inv().ok_or(AlgebraError::DivisionByZero)?;
        Ok(&self.num.eval(point) * &inv)
    }

    /// Substitutes `values[i]` for variable `i`. All values must share a field
    /// and arity; the result lives in that arity.
    pub fn substitute(&self, values: &[RationalFunction]) -> Result<Self, AlgebraError> {
        if values.len() != self.nvars() {
            return Err(AlgebraError::ArityMismatch { expected: self.nvars(), found: values.len() });
        }
        let (field, target) = match values.first() {
            Some(v) => (v.field(), v.nvars()),
            None => (self.field(), 0),
        };
        if field != self.field() || values.iter().any(|v| v.field() != field || v.nvars() != target) {
            return Err(AlgebraError::FieldMismatch);
        }
        let (n_top, n_bot) = substitute_poly(&self.num, values, target);
        let (d_top, d_bot) = substitute_poly(&self.den, values, target);
        if d_top.is_zero() {
            return Err(AlgebraError::ZeroDenominator);
        }
        Ok(Self::reduce(&n_top * &d_bot, &n_bot * &d_top))
    }

    /// Quotient-rule derivative; characteristic zero only.
    pub fn partial_derivative(&self, var: usize) -> Result<Self, AlgebraError> {
        if !self.field().is_rationals() {
            return Err(AlgebraError::UnsupportedField("derivatives are only supported over Q"));
        }
        if var >= self.nvars() {
            return Err(AlgebraError::ArityMismatch { expected: self.nvars(), found: var + 1 });
        }
        let dn = self.num.derivative(var);
        if self.den.is_constant() {
            return Ok(Self::reduce(dn, self.den.clone()));
        }
        let dd = self.den.derivative(var);
        let num = &(&dn * &self.den) - &(&self.num * &dd);
        Ok(Self::reduce(num, self.den.pow(2)))
    }

    /// `self == other` decided by `num(a)·den(b) - num(b)·den(a) = 0`.
    pub fn cross_equal(&self, other: &Self) -> bool {
        (&(&self.num * &other.den) - &(&other.num * &self.den)).is_zero()
    }

    pub fn embed(&self, nvars: usize, map: &[usize]) -> Self {
        RationalFunction { num: self.num.embed(nvars, map), den: self.den.embed(nvars, map) }
    }

    pub fn to_string_with(&self, names: &[String]) -> String {
        let n = self.num.to_string_with(names);
        if self.den.is_constant() && self.den.constant_term().is_one() {
            return n;
        }
        format!("({})/({})", n, self.den.to_string_with(names))
    }
}

/// `p(values)` as `top / bottom` with `bottom` a product of denominator
/// powers.
fn substitute_poly(p: &Polynomial, values: &[RationalFunction], target: usize) -> (Polynomial, Polynomial) {
    let field = p.field();
    let degs: Vec<u32> = (0..p.nvars()).map(|v| p.degree_in(v)).collect();
    let mut num_pows: Vec<Vec<Polynomial>> = vec![Vec::new(); p.nvars()];
    let mut den_pows: Vec<Vec<Polynomial>> = vec![Vec::new(); p.nvars()];
    for v in 0..p.nvars() {
        let (n, d) = (&values[v].num, &values[v].den);
        let mut np = vec![Polynomial::one(field, target)];
        let mut dp = vec![Polynomial::one(field, target)];
        for _ in 0..degs[v] {
            np.push(np.last().unwrap() * n);
            dp.push(dp.last().unwrap() * d);
        }
        num_pows[v] = np;
        den_pows[v] = dp;
    }
    let mut top = Polynomial::zero(field, target);
    for (m, c) in p.terms() {
        let mut t = Polynomial::constant(c.clone(), target);
        for (v, &e) in m.exponents().iter().enumerate() {
            if degs[v] == 0 {
                continue;
            }
            t = &t * &num_pows[v][e as usize];
            let rest = degs[v] - e;
            if rest > 0 && !den_pows[v][1].is_constant() {
                t = &t * &den_pows[v][rest as usize];
            } else if rest > 0 {
                t = t.scale(&den_pows[v][rest as usize].constant_term());
            }
        }
        top = &top + &t;
    }
    let mut bottom = Polynomial::one(field, target);
    for v in 0..p.nvars() {
        if degs[v] > 0 {
            bottom = &bottom * &den_pows[v][degs[v] as usize];
        }
    }
    (top, bottom)
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_with(&default_names(self.nvars())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_expr;

    fn rf(s: &str) -> RationalFunction {
        parse_expr(s, &["x", "y"], FieldTag::Rationals).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(rf("x").add(&rf("1")).unwrap(), rf("x+1"));
        assert_eq!(rf("1/x").mul(&rf("x")).unwrap(), rf("1"));
        assert_eq!(rf("x^2-y^2").div(&rf("x-y")).unwrap(), rf("x+y"));
        assert_eq!(rf("x").div(&rf("0")), Err(AlgebraError::DivisionByZero));
    }

    #[test]
    fn denominators_are_normalized() {
        let r = rf("3/(-2*x+4)");
        assert_eq!(r.denominator().to_string(), "x1 - 2");
        assert_eq!(r.numerator().to_string(), "-3/2");
        assert_eq!(rf("0*x/(x+1)").denominator().to_string(), "1");
    }

    #[test]
    fn field_mismatch_is_reported() {
        let a = RationalFunction::one(FieldTag::Rationals, 1);
        let b = RationalFunction::one(FieldTag::prime(3).unwrap(), 1);
        assert_eq!(a.add(&b), Err(AlgebraError::FieldMismatch));
    }

    #[test]
    fn substitution_examples() {
        let f = rf("y*(x+1)");
        assert_eq!(f.substitute(&[rf("x"), rf("y")]).unwrap(), f);
        let one_var = parse_expr("x1", &["x1", "x2"], FieldTag::Rationals).unwrap();
        let target = parse_expr("x1^2+x2^2", &["x1", "x2"], FieldTag::Rationals).unwrap();
        let x2 = parse_expr("x2", &["x1", "x2"], FieldTag::Rationals).unwrap();
        assert_eq!(one_var.substitute(&[target.clone(), x2]).unwrap(), target);
        let inv = parse_expr("1/x", &["x"], FieldTag::Rationals).unwrap();
        let zero = RationalFunction::zero(FieldTag::Rationals, 1);
        assert_eq!(inv.substitute(&[zero]), Err(AlgebraError::ZeroDenominator));
    }

    #[test]
    fn substitution_with_rational_values() {
        let f = rf("x^2 + 1/y");
        let out = f.substitute(&[rf("1/y"), rf("x/y")]).unwrap();
        assert_eq!(out, rf("1/y^2 + y/x"));
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(rf("x^2*y").partial_derivative(0).unwrap(), rf("2*x*y"));
        assert_eq!(rf("1/x").partial_derivative(0).unwrap(), rf("-1/x^2"));
        assert_eq!(rf("x^2+y^2").partial_derivative(1).unwrap(), rf("2*y"));
        let fp = RationalFunction::var(FieldTag::prime(5).unwrap(), 1, 0);
        assert!(matches!(fp.partial_derivative(0), Err(AlgebraError::UnsupportedField(_))));
    }
}
