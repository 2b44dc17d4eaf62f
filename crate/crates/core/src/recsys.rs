//! Systems of mutually recursive sequences with rational or circuit updates,
//! and their numeric and symbolic evaluators.
//!
//! A system of dimension `k` names its sequences `names[0..k]`. Update `i`
//! reads the previous values of all sequences. In the extended format it may
//! additionally read `z1..z_i`, the values that equations `1..i` have already
//! produced in the current step.
//!
//! Inside expressions and circuits, previous values are referred to by the
//! sequence name or by `x1..xk`; current-step values by `z1..zk`.

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

use crate::algebra::{parse_expr, AlgebraError, FieldTag, Polynomial, RationalFunction, Scalar};
use crate::circuit::{fuse_extended, next_labels, Circuit, CircuitError};

/// Term budget used when a circuit update has to be expanded.
pub const EXPANSION_BUDGET: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("invalid system: {0}")]
    Invalid(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("division by zero at step {step} in equation {equation} ({name})")]
    DivisionByZero { step: usize, equation: usize, name: String },
    #[error("denominator vanishes identically at step {step} in equation {equation} ({name})")]
    IllDefinedSymbolic { step: usize, equation: usize, name: String },
    #[error("division by zero computing entry {index}")]
    SimpleDivisionByZero { index: usize },
    #[error("{0}")]
    Unsupported(String),
}

/// Where a variable of an update reads from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Previous(usize),
    Current(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Update {
    /// Over `k` variables (standard) or `2k` variables, previous values then
    /// current-step values (extended).
    Rational(RationalFunction),
    Circuit(Circuit),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitialCondition {
    Numeric(Vec<Scalar>),
    /// `F_0^{(i)} = x_i`.
    Symbolic,
    /// Arbitrary rational functions in the named parameters.
    SymbolicCustom { params: Vec<String>, values: Vec<RationalFunction> },
}

impl InitialCondition {
    pub fn is_canonical(&self) -> bool {
        matches!(self, InitialCondition::Symbolic)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecSystem {
    field: FieldTag,
    names: Vec<String>,
    updates: Vec<Update>,
    extended: bool,
    main: usize,
}

fn indexed_label(label: &str, prefix: char) -> Option<usize> {
    let rest = label.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) || rest.starts_with('0') {
        return None;
    }
    rest.parse().ok()
}

impl RecSystem {
    pub fn new(
        field: FieldTag,
        names: Vec<String>,
        updates: Vec<Update>,
        extended: bool,
        main: usize,
    ) -> Result<Self, SystemError> {
        let k = names.len();
        if k == 0 {
            return Err(SystemError::Invalid("a system needs at least one sequence".into()));
        }
        if updates.len() != k {
            return Err(SystemError::Invalid(format!("{} names but {} updates", k, updates.len())));
        }
        if main >= k {
            return Err(SystemError::Invalid(format!("main index {main} out of range")));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(SystemError::Invalid(format!("duplicate sequence name '{n}'")));
            }
            if indexed_label(n, 'z').is_some() {
                return Err(SystemError::Invalid(format!("sequence name '{n}' clashes with the z-labels")));
            }
            if matches!(indexed_label(n, 'x'), Some(j) if j != i + 1) {
                return Err(SystemError::Invalid(format!("sequence name '{n}' clashes with the x-labels")));
            }
        }
        let sys = RecSystem { field, names, updates, extended, main };
        let width = if extended { 2 * k } else { k };
        for (i, u) in sys.updates.iter().enumerate() {
            match u {
                Update::Rational(f) => {
                    if f.field() != field {
                        return Err(SystemError::Algebra(AlgebraError::FieldMismatch));
                    }
                    if f.nvars() != width {
                        return Err(SystemError::Invalid(format!(
                            "update {} has {} variables, expected {width}",
                            i + 1,
                            f.nvars()
                        )));
                    }
                    for p in [f.numerator(), f.denominator()] {
                        if let Some(&v) = p.variables().iter().find(|&&v| v >= k + i) {
                            return Err(CircuitError::CyclicDependency { equation: i + 1, referenced: v - k + 1 }.into());
                        }
                    }
                }
                Update::Circuit(c) => {
                    if c.field() != field {
                        return Err(SystemError::Circuit(CircuitError::FieldMismatch));
                    }
                    for l in c.input_labels() {
                        match sys.resolve(l) {
                            None => return Err(CircuitError::UnknownInput(l.to_string()).into()),
                            Some(Role::Current(j)) if !extended || j >= i => {
                                return Err(CircuitError::CyclicDependency { equation: i + 1, referenced: j + 1 }.into())
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
        Ok(sys)
    }

    /// Parses every update from expression text over the sequence names
    /// (plus `z1..zk` when extended).
    pub fn from_exprs<S: AsRef<str>>(
        field: FieldTag,
        names: &[S],
        exprs: &[S],
        extended: bool,
        main: usize,
    ) -> Result<Self, SystemError> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        let vars = Self::variable_names_for(&names, extended);
        let updates = exprs
            .iter()
            .map(|e| parse_expr(e.as_ref(), &vars, field).map(Update::Rational))
            .collect::<Result<Vec<_>, _>>()?;
        RecSystem::new(field, names, updates, extended, main)
    }

    fn variable_names_for(names: &[String], extended: bool) -> Vec<String> {
        let mut vars = names.to_vec();
        if extended {
            vars.extend(next_labels(names.len()));
        }
        vars
    }

    /// Variable names of rational updates, in index order.
    pub fn variable_names(&self) -> Vec<String> {
        Self::variable_names_for(&self.names, self.extended)
    }

    pub fn resolve(&self, label: &str) -> Option<Role> {
        if let Some(i) = self.names.iter().position(|n| n == label) {
            return Some(Role::Previous(i));
        }
        let k = self.k();
        if let Some(j) = indexed_label(label, 'x').filter(|&j| j <= k) {
            return Some(Role::Previous(j - 1));
        }
        indexed_label(label, 'z').filter(|&j| j <= k).map(|j| Role::Current(j - 1))
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn k(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn updates(&self) -> &[Update] {
        &self.updates
    }

    pub fn is_extended(&self) -> bool {
        self.extended
    }

    pub fn main(&self) -> usize {
        self.main
    }

    pub fn with_main(mut self, main: usize) -> Result<Self, SystemError> {
        if main >= self.k() {
            return Err(SystemError::Invalid(format!("main index {main} out of range")));
        }
        self.main = main;
        Ok(self)
    }

    /// Maximum update degree of the standard form: `None` when some circuit
    /// does not expand within [`EXPANSION_BUDGET`].
    pub fn degree(&self) -> Option<u64> {
        let std = self.to_standard().ok()?;
        let names = std.names.clone();
        let mut d = 0;
        for u in &std.updates {
            d = d.max(match u {
                Update::Rational(f) => f.degree(),
                Update::Circuit(c) => {
                    let c = c.relabel(|l| std.canonical_label(l));
                    c.to_polynomial(&names, EXPANSION_BUDGET).ok()?.degree()
                }
            });
        }
        Some(d)
    }

    fn canonical_label(&self, l: &str) -> String {
        match self.resolve(l) {
            Some(Role::Previous(i)) => self.names[i].clone(),
            Some(Role::Current(j)) => format!("z{}", j + 1),
            None => l.to_string(),
        }
    }

    /// Each update as a rational function over [`Self::variable_names`].
    pub fn rational_updates(&self) -> Result<Vec<RationalFunction>, SystemError> {
        let vars = self.variable_names();
        self.updates
            .iter()
            .map(|u| match u {
                Update::Rational(f) => Ok(f.clone()),
                Update::Circuit(c) => {
                    let c = c.relabel(|l| self.canonical_label(l));
                    Ok(RationalFunction::from_polynomial(c.to_polynomial(&vars, EXPANSION_BUDGET)?))
                }
            })
            .collect()
    }

    /// The equivalent standard system: circuits are fused, rational updates
    /// are composed. A standard system is returned unchanged.
    pub fn to_standard(&self) -> Result<RecSystem, SystemError> {
        if !self.extended {
            return Ok(self.clone());
        }
        let k = self.k();
        let all_circuits = self.updates.iter().all(|u| matches!(u, Update::Circuit(_)));
        let updates = if all_circuits {
            let circuits: Vec<Circuit> = self
                .updates
                .iter()
                .map(|u| match u {
                    Update::Circuit(c) => c.relabel(|l| self.canonical_label(l)),
                    Update::Rational(_) => unreachable!(),
                })
                .collect();
            let fused = fuse_extended(&circuits, &self.names, &next_labels(k))?;
            (0..k).map(|i| Update::Circuit(fused.project(i))).collect()
        } else {
            let rational = self.rational_updates()?;
            let mut fused: Vec<RationalFunction> = Vec::with_capacity(k);
            let prev: Vec<RationalFunction> =
                (0..k).map(|i| RationalFunction::var(self.field, k, i)).collect();
            for (i, f) in rational.iter().enumerate() {
                let mut vals = prev.clone();
                vals.extend(fused.iter().cloned());
                vals.extend((fused.len()..k).map(|_| RationalFunction::zero(self.field, k)));
                let g = f.substitute(&vals).map_err(|_| SystemError::IllDefinedSymbolic {
                    step: 0,
                    equation: i,
                    name: self.names[i].clone(),
                })?;
                fused.push(g);
            }
            fused.into_iter().map(Update::Rational).collect()
        };
        RecSystem::new(self.field, self.names.clone(), updates, false, self.main)
    }

    fn step_numeric(&self, state: &[Scalar], step: usize) -> Result<Vec<Scalar>, SystemError> {
        let k = self.k();
        let mut next: Vec<Scalar> = Vec::with_capacity(k);
        for (i, u) in self.updates.iter().enumerate() {
            let v = match u {
                Update::Rational(f) => {
                    let mut point = state.to_vec();
                    if self.extended {
                        point.extend(next.iter().cloned());
                        point.extend((i..k).map(|_| self.field.zero()));
                    }
                    f.eval(&point).map_err(|_| SystemError::DivisionByZero {
                        step,
                        equation: i,
                        name: self.names[i].clone(),
                    })?
                }
                Update::Circuit(c) => c
                    .eval_with(
                        |l| match self.resolve(l) {
                            Some(Role::Previous(j)) => Ok(state[j].clone()),
                            Some(Role::Current(j)) if j < next.len() => Ok(next[j].clone()),
                            _ => Err(CircuitError::MissingInput(l.to_string())),
                        },
                        Scalar::clone,
                        |a, b| a + b,
                        |a, b| a * b,
                    )?
                    .swap_remove(0),
            };
            next.push(v);
        }
        Ok(next)
    }

    fn check_numeric(&self, init: &[Scalar]) -> Result<(), SystemError> {
        if init.len() != self.k() {
            return Err(SystemError::Invalid(format!("{} initial values for {} sequences", init.len(), self.k())));
        }
        if init.iter().any(|v| v.field() != self.field) {
            return Err(SystemError::Algebra(AlgebraError::FieldMismatch));
        }
        Ok(())
    }

    /// Rows `0..=steps` of the joint trajectory from a numeric start.
    pub fn evaluate(&self, init: &InitialCondition, steps: usize) -> Result<Vec<Vec<Scalar>>, SystemError> {
        let InitialCondition::Numeric(values) = init else {
            return Err(SystemError::Invalid("numeric evaluation needs a numeric initial condition".into()));
        };
        self.check_numeric(values)?;
        let mut rows = vec![values.clone()];
        for n in 0..steps {
            let next = self.step_numeric(rows.last().unwrap(), n)?;
            rows.push(next);
        }
        Ok(rows)
    }

    /// Lazy trajectory; each item is a row or the error that ended it.
    pub fn trajectory(&self, init: Vec<Scalar>) -> Result<Trajectory<'_>, SystemError> {
        self.check_numeric(&init)?;
        Ok(Trajectory { sys: self, state: Some(init), pending: None, step: 0 })
    }

    /// Exact trace of rational functions `F_0 .. F_steps`.
    pub fn symbolic_evaluate(&self, init: &InitialCondition, steps: usize) -> Result<SymbolicTrace, SystemError> {
        if !self.field.is_rationals() {
            return Err(SystemError::Unsupported("symbolic evaluation is only supported over Q".into()));
        }
        let k = self.k();
        let (params, row0) = match init {
            InitialCondition::Symbolic => {
                let params: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
                let row: Vec<RationalFunction> = (0..k).map(|i| RationalFunction::var(self.field, k, i)).collect();
                (params, row)
            }
            InitialCondition::SymbolicCustom { params, values } => {
                if values.len() != k {
                    return Err(SystemError::Invalid(format!("{} initial values for {} sequences", values.len(), k)));
                }
                if values.iter().any(|v| v.nvars() != params.len() || v.field() != self.field) {
                    return Err(SystemError::Invalid("initial values do not match the declared parameters".into()));
                }
                (params.clone(), values.clone())
            }
            InitialCondition::Numeric(_) => {
                return Err(SystemError::Invalid("symbolic evaluation needs a symbolic initial condition".into()))
            }
        };
        let mut trace = SymbolicTrace { params, rows: vec![row0] };
        for n in 0..steps {
            let next = self.step_symbolic(trace.rows.last().unwrap(), n)?;
            trace.rows.push(next);
        }
        Ok(trace)
    }

    fn step_symbolic(&self, row: &[RationalFunction], step: usize) -> Result<Vec<RationalFunction>, SystemError> {
        let k = self.k();
        let nv = row[0].nvars();
        let mut next: Vec<RationalFunction> = Vec::with_capacity(k);
        for (i, u) in self.updates.iter().enumerate() {
            let ill = || SystemError::IllDefinedSymbolic { step, equation: i, name: self.names[i].clone() };
            let v = match u {
                Update::Rational(f) => {
                    let mut vals = row.to_vec();
                    if self.extended {
                        vals.extend(next.iter().cloned());
                        vals.extend((i..k).map(|_| RationalFunction::zero(self.field, nv)));
                    }
                    f.substitute(&vals).map_err(|e| match e {
                        AlgebraError::ZeroDenominator => ill(),
                        e => e.into(),
                    })?
                }
                Update::Circuit(c) => c
                    .eval_with(
                        |l| match self.resolve(l) {
                            Some(Role::Previous(j)) => Ok(row[j].clone()),
                            Some(Role::Current(j)) if j < next.len() => Ok(next[j].clone()),
                            _ => Err(CircuitError::MissingInput(l.to_string())),
                        },
                        |c| RationalFunction::constant(c.clone(), nv),
                        |a, b| a.add(b).expect("same ring"),
                        |a, b| a.mul(b).expect("same ring"),
                    )?
                    .swap_remove(0),
            };
            next.push(v);
        }
        Ok(next)
    }

    /// The first symbolic step `F_1^{(i)}` from the canonical start.
    pub fn first_step(&self) -> Result<Vec<RationalFunction>, SystemError> {
        Ok(self.symbolic_evaluate(&InitialCondition::Symbolic, 1)?.rows.pop().unwrap())
    }

    /// `h(f)`: every `x_i` replaced by `F_1^{(i)}`.
    pub fn apply_step_homomorphism(&self, f: &RationalFunction) -> Result<RationalFunction, SystemError> {
        apply_homomorphism(&self.first_step()?, f)
    }
}

/// `f` with `x_i` replaced by `images[i]`.
pub fn apply_homomorphism(images: &[RationalFunction], f: &RationalFunction) -> Result<RationalFunction, SystemError> {
    if f.nvars() != images.len() {
        return Err(SystemError::Invalid(format!(
            "function has {} variables, the homomorphism maps {}",
            f.nvars(),
            images.len()
        )));
    }
    f.substitute(images).map_err(|e| match e {
        AlgebraError::ZeroDenominator => {
            SystemError::IllDefinedSymbolic { step: 0, equation: 0, name: "homomorphism".into() }
        }
        e => e.into(),
    })
}

pub struct Trajectory<'a> {
    sys: &'a RecSystem,
    state: Option<Vec<Scalar>>,
    pending: Option<SystemError>,
    step: usize,
}

impl Iterator for Trajectory<'_> {
    type Item = Result<Vec<Scalar>, SystemError>;

    fn next(&mut self) -> Option<Self::Item> {
        let Some(cur) = self.state.take() else {
            return self.pending.take().map(Err);
        };
        match self.sys.step_numeric(&cur, self.step) {
            Ok(next) => self.state = Some(next),
            Err(e) => {
                // yield the current row now, the error on the following call
                self.pending = Some(e);
            }
        }
        self.step += 1;
        Some(Ok(cur))
    }
}

/// Rows `F_n^{(1..k)}` of a symbolic evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicTrace {
    pub params: Vec<String>,
    pub rows: Vec<Vec<RationalFunction>>,
}

impl SymbolicTrace {
    /// The column of sequence `i`.
    pub fn column(&self, i: usize) -> Vec<RationalFunction> {
        self.rows.iter().map(|r| r[i].clone()).collect()
    }

    /// Evaluates every entry at a numeric parameter point.
    pub fn at_point(&self, point: &[Scalar]) -> Result<Vec<Vec<Scalar>>, AlgebraError> {
        self.rows.iter().map(|r| r.iter().map(|f| f.eval(point)).collect()).collect()
    }
}

/// A P-recursive recurrence `P_0(n) a_n + ... + P_d(n) a_{n+d} = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PRecurrence {
    /// `P_0 .. P_d`, univariate in `n`.
    pub coeffs: Vec<Polynomial>,
    /// `a_0 .. a_{d-1}` or `a_0 .. a_d`.
    pub initial: Vec<Scalar>,
}

impl PRecurrence {
    pub fn parse<S: AsRef<str>>(coeffs: &[S], initial: &[S]) -> Result<Self, SystemError> {
        let q = FieldTag::Rationals;
        let coeffs = coeffs
            .iter()
            .map(|c| crate::algebra::parse_polynomial(c.as_ref(), &["n"], q))
            .collect::<Result<Vec<_>, _>>()?;
        let initial = initial.iter().map(|s| q.parse_scalar(s.as_ref())).collect::<Result<Vec<_>, _>>()?;
        Ok(PRecurrence { coeffs, initial })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

/// The `(d+2)`-dimensional ratrec system `u0..ud, v` of a P-recursive
/// sequence; the main sequence `u0` equals `a_n`. When only `a_0..a_{d-1}`
/// are given, `a_d` is obtained from the recurrence at `n = 0`.
pub fn from_precursive(rec: &PRecurrence) -> Result<(RecSystem, InitialCondition), SystemError> {
    let q = FieldTag::Rationals;
    let Some(lead) = rec.coeffs.last() else {
        return Err(SystemError::Invalid("a recurrence needs at least one coefficient".into()));
    };
    if lead.is_zero() {
        return Err(SystemError::Invalid("leading coefficient P_d is identically zero".into()));
    }
    if rec.coeffs.iter().any(|c| c.nvars() != 1 || c.field() != q) {
        return Err(SystemError::Invalid("coefficients must be univariate polynomials over Q".into()));
    }
    let d = rec.order();
    let mut init = rec.initial.clone();
    if init.len() == d {
        let at0: Vec<Scalar> = rec.coeffs.iter().map(|p| p.eval(&[q.zero()])).collect();
        let inv = at0[d].inv().ok_or(SystemError::SimpleDivisionByZero { index: d })?;
        let mut s = q.zero();
        for i in 0..d {
            s = &s + &(&at0[i] * &init[i]);
        }
        init.push(-&(&s * &inv));
    }
    if init.len() != d + 1 {
        return Err(SystemError::Invalid(format!("expected {} or {} initial values, got {}", d, d + 1, rec.initial.len())));
    }
    let k = d + 2;
    let mut names: Vec<String> = (0..=d).map(|i| format!("u{i}")).collect();
    names.push("v".into());
    let v = RationalFunction::var(q, k, d + 1);
    // the new top entry is a_{n+d+1}, given by the recurrence at index n+1
    let v1 = v.add(&RationalFunction::one(q, k))?;
    let at_v = |p: &Polynomial| -> Result<RationalFunction, SystemError> {
        Ok(RationalFunction::from_polynomial(p.clone()).substitute(std::slice::from_ref(&v1))?)
    };
    let pd = at_v(lead)?;
    let mut updates = Vec::with_capacity(k);
    for i in 0..d {
        updates.push(Update::Rational(RationalFunction::var(q, k, i + 1)));
    }
    let mut top = RationalFunction::zero(q, k);
    for (i, p) in rec.coeffs[..d].iter().enumerate() {
        let term = at_v(p)?.mul(&RationalFunction::var(q, k, i + 1))?;
        top = top.sub(&term)?;
    }
    updates.push(Update::Rational(top.div(&pd)?));
    updates.push(Update::Rational(v1));
    let sys = RecSystem::new(q, names, updates, false, 0)?;
    init.push(q.zero());
    Ok((sys, InitialCondition::Numeric(init)))
}

/// A single recursion `u_{n+m+1} = R(u_n, ..., u_{n+m})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleRecursion {
    pub m: usize,
    /// Over `y_0 .. y_m`.
    pub r: RationalFunction,
    /// `u_0 .. u_m`.
    pub initial: Vec<Scalar>,
}

impl SimpleRecursion {
    pub fn new(r: RationalFunction, initial: Vec<Scalar>) -> Result<Self, SystemError> {
        if r.nvars() == 0 || initial.len() != r.nvars() {
            return Err(SystemError::Invalid(format!(
                "a depth-{} recursion needs {} initial values",
                r.nvars().saturating_sub(1),
                r.nvars()
            )));
        }
        Ok(SimpleRecursion { m: r.nvars() - 1, r, initial })
    }

    /// `u_0 .. u_steps`.
    pub fn evaluate(&self, steps: usize) -> Result<Vec<Scalar>, SystemError> {
        let mut out: Vec<Scalar> = self.initial.iter().take(steps + 1).cloned().collect();
        while out.len() <= steps {
            let index = out.len();
            let window = &out[index - self.m - 1..];
            let v = self.r.eval(window).map_err(|_| SystemError::SimpleDivisionByZero { index })?;
            out.push(v);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeRow {
    pub n: usize,
    pub degree: u64,
    pub bound: BigUint,
    pub ok: bool,
}

/// Compares the maximal degree `d_n` of each trace row against `(k·D)^n`.
pub fn degree_profile(trace: &SymbolicTrace, k: u64, d: u64) -> Vec<DegreeRow> {
    let base = BigUint::from(k * d);
    let mut bound = BigUint::one();
    trace
        .rows
        .iter()
        .enumerate()
        .map(|(n, row)| {
            if n > 0 {
                bound = &bound * &base;
            }
            let degree = row.iter().map(RationalFunction::degree).max().unwrap_or(0);
            DegreeRow { n, degree, bound: bound.clone(), ok: BigUint::from(degree) <= bound }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: FieldTag = FieldTag::Rationals;

    fn ints(v: &[i64]) -> Vec<Scalar> {
        v.iter().map(|&x| Q.from_i64(x)).collect()
    }

    fn column(rows: &[Vec<Scalar>], i: usize) -> Vec<String> {
        rows.iter().map(|r| r[i].to_string()).collect()
    }

    pub(crate) fn catalan() -> RecSystem {
        RecSystem::from_exprs(Q, &["u", "v"], &["2*(2*v+1)/(v+2)*u", "v+1"], false, 0).unwrap()
    }

    #[test]
    fn catalan_numbers() {
        let rows = catalan().evaluate(&InitialCondition::Numeric(ints(&[1, 0])), 6).unwrap();
        assert_eq!(column(&rows, 0), ["1", "1", "2", "5", "14", "42", "132"]);
    }

    #[test]
    fn factorial_system() {
        let sys = RecSystem::from_exprs(Q, &["b", "c"], &["b+1", "c*(b+1)"], false, 1).unwrap();
        let rows = sys.evaluate(&InitialCondition::Numeric(ints(&[0, 1])), 5).unwrap();
        assert_eq!(column(&rows, 1), ["1", "1", "2", "6", "24", "120"]);
    }

    #[test]
    fn division_by_zero_is_located() {
        let sys = RecSystem::from_exprs(Q, &["u"], &["1/u"], false, 0).unwrap();
        let err = sys.evaluate(&InitialCondition::Numeric(ints(&[0])), 3).unwrap_err();
        assert_eq!(err, SystemError::DivisionByZero { step: 0, equation: 0, name: "u".into() });
    }

    fn chain_system() -> RecSystem {
        RecSystem::from_exprs(Q, &["u1", "u2"], &["u1^2+u2^2", "u1+u2"], false, 0).unwrap()
    }

    fn xs(s: &str) -> RationalFunction {
        parse_expr(s, &["x1", "x2"], Q).unwrap()
    }

    #[test]
    fn symbolic_chain() {
        let t = chain_system().symbolic_evaluate(&InitialCondition::Symbolic, 2).unwrap();
        assert_eq!(t.rows[1][0], xs("x1^2+x2^2"));
        assert_eq!(t.rows[2][0], xs("(x1^2+x2^2)^2+(x1+x2)^2"));
    }

    #[test]
    fn identity_system_is_fixed() {
        let sys = RecSystem::from_exprs(Q, &["a", "b"], &["a", "b"], false, 0).unwrap();
        let t = sys.symbolic_evaluate(&InitialCondition::Symbolic, 3).unwrap();
        for row in &t.rows {
            assert_eq!(row, &vec![xs("x1"), xs("x2")]);
        }
    }

    #[test]
    fn custom_symbolic_start() {
        let sys = RecSystem::from_exprs(Q, &["u", "v"], &["(v+1)*v*(v-1)", "v+1"], false, 0).unwrap();
        let x = |s: &str| parse_expr(s, &["x"], Q).unwrap();
        let init = InitialCondition::SymbolicCustom {
            params: vec!["x".into()],
            values: vec![x("x*(x-1)*(x-2)"), x("x")],
        };
        let t = sys.symbolic_evaluate(&init, 4).unwrap();
        for n in 0..=4i64 {
            let expected = x(&format!("(x+{n})*(x+{n}-1)*(x+{n}-2)"));
            assert_eq!(t.rows[n as usize][0], expected);
        }
    }

    #[test]
    fn step_homomorphism_examples() {
        let sys = chain_system();
        assert_eq!(sys.apply_step_homomorphism(&xs("x1")).unwrap(), xs("x1^2+x2^2"));
        assert_eq!(sys.apply_step_homomorphism(&xs("7/3")).unwrap(), xs("7/3"));
        assert_eq!(sys.apply_step_homomorphism(&xs("x1+x2")).unwrap(), xs("x1^2+x2^2+x1+x2"));
        let t = sys.symbolic_evaluate(&InitialCondition::Symbolic, 3).unwrap();
        for n in 0..3 {
            for i in 0..2 {
                assert_eq!(sys.apply_step_homomorphism(&t.rows[n][i]).unwrap(), t.rows[n + 1][i]);
            }
        }
    }

    #[test]
    fn symbolic_matches_numeric_at_a_point() {
        let sys = catalan();
        let t = sys.symbolic_evaluate(&InitialCondition::Symbolic, 5).unwrap();
        let at = t.at_point(&ints(&[1, 0])).unwrap();
        let rows = sys.evaluate(&InitialCondition::Numeric(ints(&[1, 0])), 5).unwrap();
        assert_eq!(at, rows);
    }

    #[test]
    fn precursive_factorial_and_fibonacci() {
        let fact = PRecurrence::parse(&["-(n+1)", "1"], &["1", "1"]).unwrap();
        let (sys, init) = from_precursive(&fact).unwrap();
        assert_eq!(sys.k(), 3);
        let rows = sys.evaluate(&init, 4).unwrap();
        assert_eq!(column(&rows, 0), ["1", "1", "2", "6", "24"]);

        let fib = PRecurrence::parse(&["-1", "-1", "1"], &["0", "1"]).unwrap();
        let (sys, init) = from_precursive(&fib).unwrap();
        let rows = sys.evaluate(&init, 6).unwrap();
        assert_eq!(column(&rows, 0), ["0", "1", "1", "2", "3", "5", "8"]);
    }

    #[test]
    fn precursive_order_zero() {
        let rec = PRecurrence::parse(&["1"], &["0"]).unwrap();
        let (sys, init) = from_precursive(&rec).unwrap();
        let rows = sys.evaluate(&init, 4).unwrap();
        assert!(rows.iter().all(|r| r[0] == Q.zero()));
    }

    #[test]
    fn precursive_vanishing_leading_coefficient() {
        // (n - 2) a_{n+1} = a_n: P_1 vanishes at n = 2
        let rec = PRecurrence::parse(&["-1", "n-2"], &["1", "1"]).unwrap();
        let (sys, init) = from_precursive(&rec).unwrap();
        let err = sys.evaluate(&init, 5).unwrap_err();
        assert!(matches!(err, SystemError::DivisionByZero { step: 1, .. }));
    }

    #[test]
    fn simple_recursions() {
        let y = |s: &str| parse_expr(s, &["y0", "y1"], Q).unwrap();
        let fact = SimpleRecursion::new(y("y1^2/y0 + y1"), ints(&[1, 1])).unwrap();
        let vals: Vec<String> = fact.evaluate(5).unwrap().iter().map(|v| v.to_string()).collect();
        assert_eq!(vals, ["1", "1", "2", "6", "24", "120"]);

        let constant = SimpleRecursion::new(parse_expr("y0", &["y0"], Q).unwrap(), ints(&[5])).unwrap();
        assert!(constant.evaluate(4).unwrap().iter().all(|v| *v == Q.from_i64(5)));

        let bad = SimpleRecursion::new(y("y1*(4*y1-y0)/(y1+2*y0)"), ints(&[0, 0])).unwrap();
        assert_eq!(bad.evaluate(3), Err(SystemError::SimpleDivisionByZero { index: 2 }));
    }

    #[test]
    fn degree_profiles() {
        let t = chain_system().symbolic_evaluate(&InitialCondition::Symbolic, 2).unwrap();
        let prof = degree_profile(&t, 2, 2);
        let degs: Vec<u64> = prof.iter().map(|r| r.degree).collect();
        assert_eq!(degs, [1, 2, 4]);
        let bounds: Vec<BigUint> = prof.iter().map(|r| r.bound.clone()).collect();
        assert_eq!(bounds, [1u32, 4, 16].map(BigUint::from));
        assert!(prof.iter().all(|r| r.ok));
    }

    #[test]
    fn extended_rational_system_fuses() {
        // a' = a + 1, b' = z1 * b
        let sys = RecSystem::from_exprs(Q, &["a", "b"], &["a+1", "z1*b"], true, 1).unwrap();
        let std = sys.to_standard().unwrap();
        assert!(!std.is_extended());
        let init = InitialCondition::Numeric(ints(&[0, 1]));
        assert_eq!(sys.evaluate(&init, 6).unwrap(), std.evaluate(&init, 6).unwrap());
        assert_eq!(column(&sys.evaluate(&init, 5).unwrap(), 1), ["1", "1", "2", "6", "24", "120"]);
        assert_eq!(sys.degree(), Some(2));
    }

    #[test]
    fn extended_reference_must_precede() {
        let err = RecSystem::from_exprs(Q, &["a", "b"], &["z2", "b"], true, 0).unwrap_err();
        assert_eq!(err, SystemError::Circuit(CircuitError::CyclicDependency { equation: 1, referenced: 2 }));
        assert!(RecSystem::from_exprs(Q, &["a", "b"], &["z1", "b"], false, 0).is_err());
    }

    #[test]
    fn lazy_trajectory_stops_at_division_by_zero() {
        let sys = RecSystem::from_exprs(Q, &["u"], &["1/(u-2)"], false, 0).unwrap();
        // 0 -> -1/2 -> -2/5 -> ...; starting at 2 fails immediately
        let items: Vec<_> = sys.trajectory(ints(&[2])).unwrap().collect();
        assert_eq!(items.len(), 2);
        assert!(items[0].is_ok());
        assert!(matches!(items[1], Err(SystemError::DivisionByZero { step: 0, .. })));
    }
}
