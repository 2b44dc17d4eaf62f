//! Exact algebra: coefficient fields, polynomials, rational functions,
//! GCDs, Gröbner bases and the expression parser.

mod gcd;
mod groebner;
mod modgcd;
mod parse;
mod poly;
mod ratfun;
mod scalar;

pub use gcd::poly_gcd;
pub use groebner::{buchberger, buchberger_with, leading_monomial, normal_form, GroebnerConfig, MonomialOrder};
pub use parse::{parse_expr, parse_polynomial};
pub use poly::{default_names, Monomial, Polynomial};
pub use ratfun::RationalFunction;
pub use scalar::{FieldTag, Scalar};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands live in different fields or rings")]
    FieldMismatch,
    #[error("expected {expected} variables, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("malformed scalar '{0}'")]
    BadScalar(String),
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier '{name}' at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("exponent at byte {pos} is not a nonnegative integer literal")]
    BadExponent { pos: usize },
    #[error("division by the zero polynomial at byte {pos}")]
    ZeroDivisorInExpression { pos: usize },
    #[error("'{0}' is not a polynomial")]
    NotPolynomial(String),
    #[error("substitution makes a denominator vanish identically")]
    ZeroDenominator,
    #[error("unsupported field: {0}")]
    UnsupportedField(&'static str),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("cancelled")]
    Cancelled,
}
