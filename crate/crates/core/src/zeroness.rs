//! Zeroness and Skolem probes for the main sequence of a system.

use std::collections::HashSet;

use num_bigint::BigUint;
use thiserror::Error;

use crate::algebra::{FieldTag, Polynomial, RationalFunction, Scalar};
use crate::flatten::stabilization_bound;
use crate::recsys::{InitialCondition, RecSystem, SystemError, Update};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZeronessVerdict {
    /// Certified: the main sequence vanishes everywhere. Only the finite
    /// field procedure produces this.
    Zero { states: usize },
    NonZero { index: usize, value: Scalar },
    /// Every checked entry was zero; no certificate.
    AllZeroUpTo { bound: usize },
    DivisionByZero { step: usize, equation: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZeronessError {
    #[error("the finite-field procedure needs a system over a prime field")]
    NotPrimeField,
    #[error("the prefix probe needs a system over Q")]
    NotRationals,
    #[error("degree of the system is unknown; pass an explicit bound")]
    UnknownDegree,
    #[error("state cycle not closed within {0} steps")]
    CycleCap(String),
    #[error(transparent)]
    System(#[from] SystemError),
}

fn numeric(init: &InitialCondition) -> Result<&[Scalar], ZeronessError> {
    match init {
        InitialCondition::Numeric(v) => Ok(v),
        _ => Err(SystemError::Invalid("a numeric initial condition is required".into()).into()),
    }
}

/// Walks the trajectory, calling `visit(n, row)` until it returns `Some`.
/// Division by zero becomes a verdict.
fn walk(
    sys: &RecSystem,
    init: &[Scalar],
    mut visit: impl FnMut(usize, &[Scalar]) -> Option<ZeronessVerdict>,
) -> Result<ZeronessVerdict, ZeronessError> {
    for (n, row) in sys.trajectory(init.to_vec())?.enumerate() {
        match row {
            Ok(row) => {
                if let Some(v) = visit(n, &row) {
                    return Ok(v);
                }
            }
            Err(SystemError::DivisionByZero { step, equation, .. }) => {
                return Ok(ZeronessVerdict::DivisionByZero { step, equation })
            }
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!("trajectories only end after an error")
}

/// Sound and complete over `F_p`: the state sequence is eventually periodic,
/// so it suffices to run until a state repeats.
pub fn zeroness_finite_field(sys: &RecSystem, init: &InitialCondition) -> Result<ZeronessVerdict, ZeronessError> {
    let FieldTag::Prime(p) = sys.field() else {
        return Err(ZeronessError::NotPrimeField);
    };
    let init = numeric(init)?;
    let cap = BigUint::from(p).pow(sys.k() as u32) + 1u32;
    let main = sys.main();
    let mut seen: HashSet<Vec<Scalar>> = HashSet::new();
    let mut overflow = false;
    let verdict = walk(sys, init, |n, row| {
        if !row[main].is_zero() {
            return Some(ZeronessVerdict::NonZero { index: n, value: row[main].clone() });
        }
        if !seen.insert(row.to_vec()) {
            return Some(ZeronessVerdict::Zero { states: seen.len() });
        }
        if BigUint::from(n) > cap {
            overflow = true;
            return Some(ZeronessVerdict::AllZeroUpTo { bound: n });
        }
        None
    })?;
    if overflow {
        return Err(ZeronessError::CycleCap(cap.to_string()));
    }
    Ok(verdict)
}

/// Number of entries the prefix probe inspects: `p + 2` with
/// `p = k + k^3·⌈log2(kD)⌉`.
pub fn prefix_length(sys: &RecSystem) -> Option<usize> {
    let d = sys.degree()?.max(1);
    Some(stabilization_bound(sys.k() as u64, d) as usize + 2)
}

/// The naive probe: checks a prefix only, so it never answers `Zero`.
pub fn prefix_zero_check(
    sys: &RecSystem,
    init: &InitialCondition,
    override_bound: Option<usize>,
) -> Result<ZeronessVerdict, ZeronessError> {
    if !sys.field().is_rationals() {
        return Err(ZeronessError::NotRationals);
    }
    let init = numeric(init)?;
    let bound = match override_bound {
        Some(b) => b,
        None => prefix_length(sys).ok_or(ZeronessError::UnknownDegree)?,
    };
    let main = sys.main();
    walk(sys, init, |n, row| {
        if n >= bound {
            return Some(ZeronessVerdict::AllZeroUpTo { bound });
        }
        (!row[main].is_zero()).then(|| ZeronessVerdict::NonZero { index: n, value: row[main].clone() })
    })
}

/// The least `n ≤ bound` with a zero main entry. Division by zero halts the
/// search with an error.
pub fn skolem_search(sys: &RecSystem, init: &InitialCondition, bound: usize) -> Result<Option<usize>, SystemError> {
    let InitialCondition::Numeric(init) = init else {
        return Err(SystemError::Invalid("a numeric initial condition is required".into()));
    };
    let main = sys.main();
    for (n, row) in sys.trajectory(init.clone())?.enumerate().take(bound + 1) {
        if row?[main].is_zero() {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// `P(x) = x(x-1)...(x-d+1)` in one variable.
pub fn falling_factorial(d: usize) -> Polynomial {
    let q = FieldTag::Rationals;
    let x = Polynomial::var(q, 1, 0);
    (0..d).fold(Polynomial::one(q, 1), |acc, j| {
        &acc * &(&x - &Polynomial::constant(q.from_i64(j as i64), 1))
    })
}

/// `u' = P(v+1), v' = v+1` from `(0, 0)`: the main column is `P(n)`, zero
/// for `n < d` and `d!` at `n = d`.
pub fn counterexample_system(d: usize) -> Result<(RecSystem, InitialCondition), SystemError> {
    if d == 0 {
        return Err(SystemError::Invalid("d must be at least 1".into()));
    }
    let q = FieldTag::Rationals;
    let v1 = &Polynomial::var(q, 2, 1) + &Polynomial::one(q, 2);
    let u = falling_factorial(d).compose(std::slice::from_ref(&v1), 2);
    let sys = RecSystem::new(
        q,
        vec!["u".into(), "v".into()],
        vec![Update::Rational(RationalFunction::from_polynomial(u)), Update::Rational(RationalFunction::from_polynomial(v1))],
        false,
        0,
    )?;
    Ok((sys, InitialCondition::Numeric(vec![q.zero(), q.zero()])))
}

/// The symbolic start `v_0 = x`, `u_0 = P(x)` used for flattening the
/// counterexample.
pub fn counterexample_symbolic_init(d: usize) -> InitialCondition {
    let x = RationalFunction::var(FieldTag::Rationals, 1, 0);
    InitialCondition::SymbolicCustom {
        params: vec!["x".into()],
        values: vec![RationalFunction::from_polynomial(falling_factorial(d)), x],
    }
}
