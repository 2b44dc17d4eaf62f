//! Prenex QBF front end and the reduction of QBF validity to zeroness of
//! an extended polynomial system over `{0, 1}` values.
//!
//! Sequences of the compiled system, for a prefix of length `k`:
//!
//! * `c1..ck`: binary counter, `c^i_n = 1` iff `n mod 2^i >= 2^(i-1)`;
//! * `d0..dk`: `d^0_n` is the matrix at the assignment `c_{n-1}`, and `d^i_n`
//!   folds two halves of level `i-1` at multiples of `2^i`;
//! * `f0..f(k-1)`: `f^(i-1)` remembers `d^(i-1)` from the middle of each
//!   block of length `2^i`.
//!
//! The counter bit `c^i` drives the variable at level `i`, with level 1
//! innermost, so the outermost prefix variable sits at level `k`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::algebra::{FieldTag, Scalar};
use crate::circuit::{Circuit, CircuitBuilder};
use crate::recsys::{InitialCondition, RecSystem, SystemError, Update};

pub const DEFAULT_BRUTE_FORCE_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    Const(bool),
    Var(String),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn var(name: &str) -> Self {
        BoolExpr::Var(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: BoolExpr) -> Self {
        BoolExpr::Not(Box::new(e))
    }

    pub fn and(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn eval(&self, env: &dyn Fn(&str) -> bool) -> bool {
        match self {
            BoolExpr::Const(b) => *b,
            BoolExpr::Var(v) => env(v),
            BoolExpr::Not(a) => !a.eval(env),
            BoolExpr::And(a, b) => a.eval(env) && b.eval(env),
            BoolExpr::Or(a, b) => a.eval(env) || b.eval(env),
        }
    }

    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            BoolExpr::Const(_) => {}
            BoolExpr::Var(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            BoolExpr::Not(a) => a.collect_vars(out),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            BoolExpr::Const(_) | BoolExpr::Var(_) => 1,
            BoolExpr::Not(a) => 1 + a.size(),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => 1 + a.size() + b.size(),
        }
    }
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoolExpr::Const(b) => write!(f, "{}", u8::from(*b)),
            BoolExpr::Var(v) => write!(f, "{v}"),
            BoolExpr::Not(a) => write!(f, "!{a}"),
            BoolExpr::And(a, b) => write!(f, "({a} & {b})"),
            BoolExpr::Or(a, b) => write!(f, "({a} | {b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QbfFormula {
    pub prefix: Vec<(Quantifier, String)>,
    pub matrix: BoolExpr,
}

impl QbfFormula {
    pub fn new(prefix: Vec<(Quantifier, String)>, matrix: BoolExpr) -> Result<Self, QbfError> {
        for (i, (_, v)) in prefix.iter().enumerate() {
            if prefix[..i].iter().any(|(_, w)| w == v) {
                return Err(QbfError::DuplicateBinding(v.clone()));
            }
        }
        if let Some(v) = matrix.variables().into_iter().find(|v| !prefix.iter().any(|(_, w)| w == v)) {
            return Err(QbfError::FreeVariable(v.to_string()));
        }
        Ok(QbfFormula { prefix, matrix })
    }

    pub fn k(&self) -> usize {
        self.prefix.len()
    }
}

impl fmt::Display for QbfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (q, v) in &self.prefix {
            let q = match q {
                Quantifier::Exists => "exists",
                Quantifier::Forall => "forall",
            };
            write!(f, "{q} {v}; ")?;
        }
        write!(f, "{}", self.matrix)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QbfError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("free variable '{0}'")]
    FreeVariable(String),
    #[error("variable '{0}' is bound twice")]
    DuplicateBinding(String),
    #[error("{k} variables exceed the brute-force limit {limit}")]
    LimitExceeded { k: usize, limit: usize },
    #[error("the reduction needs at least one quantified variable")]
    EmptyPrefix,
    #[error(transparent)]
    System(#[from] SystemError),
}

fn syntax(pos: usize, message: impl Into<String>) -> QbfError {
    QbfError::Syntax { pos, message: message.into() }
}

/// Parses either the prenex text format or QDIMACS (detected by a `p cnf`
/// header).
pub fn parse_qbf(text: &str) -> Result<QbfFormula, QbfError> {
    let is_qdimacs = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('c'))
        .is_some_and(|l| l.starts_with("p "));
    if is_qdimacs {
        parse_qdimacs(text)
    } else {
        parse_prenex(text)
    }
}

fn parse_prenex(text: &str) -> Result<QbfFormula, QbfError> {
    let mut prefix = Vec::new();
    let mut offset = 0;
    let mut rest = text;
    loop {
        let trimmed = rest.trim_start();
        let lead = rest.len() - trimmed.len();
        let q = if trimmed.starts_with("exists ") || trimmed.starts_with("exists\t") {
            Quantifier::Exists
        } else if trimmed.starts_with("forall ") || trimmed.starts_with("forall\t") {
            Quantifier::Forall
        } else {
            break;
        };
        let Some(semi) = trimmed.find(';') else {
            return Err(syntax(offset + lead, "quantifier declaration without ';'"));
        };
        let decl = &trimmed[6..semi];
        let vars: Vec<&str> = decl.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        if vars.is_empty() {
            return Err(syntax(offset + lead + 6, "expected a variable name"));
        }
        for v in vars {
            if !is_identifier(v) {
                return Err(syntax(offset + lead, format!("bad variable name '{v}'")));
            }
            prefix.push((q, v.to_string()));
        }
        offset += lead + semi + 1;
        rest = &trimmed[semi + 1..];
    }
    let mut p = ExprParser { src: rest.as_bytes(), pos: 0, offset };
    let matrix = p.or()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(syntax(p.offset + p.pos, "unexpected trailing input"));
    }
    QbfFormula::new(prefix, matrix)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
    offset: usize,
}

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn or(&mut self) -> Result<BoolExpr, QbfError> {
        let mut e = self.and()?;
        while self.eat(b'|') {
            e = BoolExpr::or(e, self.and()?);
        }
        Ok(e)
    }

    fn and(&mut self) -> Result<BoolExpr, QbfError> {
        let mut e = self.unary()?;
        while self.eat(b'&') {
            e = BoolExpr::and(e, self.unary()?);
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<BoolExpr, QbfError> {
        if self.eat(b'!') {
            return Ok(BoolExpr::not(self.unary()?));
        }
        if self.eat(b'(') {
            let e = self.or()?;
            if !self.eat(b')') {
                return Err(syntax(self.offset + self.pos, "expected ')'"));
            }
            return Ok(e);
        }
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let word = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match word {
            "" => Err(syntax(self.offset + start, "expected a variable, constant, '!' or '('")),
            "0" | "false" => Ok(BoolExpr::Const(false)),
            "1" | "true" => Ok(BoolExpr::Const(true)),
            w if is_identifier(w) => Ok(BoolExpr::var(w)),
            w => Err(syntax(self.offset + start, format!("bad token '{w}'"))),
        }
    }
}

fn parse_qdimacs(text: &str) -> Result<QbfFormula, QbfError> {
    let mut nvars = None;
    let mut prefix: Vec<(Quantifier, String)> = Vec::new();
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut pos = 0;
    for line in text.lines() {
        let here = pos;
        pos += line.len() + 1;
        let l = line.trim();
        if l.is_empty() || l.starts_with('c') {
            continue;
        }
        let mut words = l.split_whitespace();
        let head = words.next().unwrap();
        if head == "p" {
            if words.next() != Some("cnf") {
                return Err(syntax(here, "expected 'p cnf'"));
            }
            let n = words.next().and_then(|w| w.parse::<usize>().ok());
            if n.is_none() || words.next().and_then(|w| w.parse::<usize>().ok()).is_none() {
                return Err(syntax(here, "malformed problem line"));
            }
            nvars = n;
            continue;
        }
        let Some(n) = nvars else {
            return Err(syntax(here, "missing 'p cnf' header"));
        };
        let nums = |ws: std::str::SplitWhitespace| -> Result<Vec<i64>, QbfError> {
            ws.map(|w| w.parse::<i64>().map_err(|_| syntax(here, format!("bad literal '{w}'")))).collect()
        };
        let check = |v: i64| -> Result<(), QbfError> {
            if v.unsigned_abs() as usize > n {
                return Err(syntax(here, format!("variable {} exceeds the header count {n}", v.abs())));
            }
            Ok(())
        };
        if head == "e" || head == "a" {
            if !clauses.is_empty() || !current.is_empty() {
                return Err(syntax(here, "quantifier line after clauses"));
            }
            let q = if head == "e" { Quantifier::Exists } else { Quantifier::Forall };
            let vals = nums(words)?;
            if vals.last() != Some(&0) {
                return Err(syntax(here, "quantifier line must end with 0"));
            }
            for &v in &vals[..vals.len() - 1] {
                if v <= 0 {
                    return Err(syntax(here, "quantified variables must be positive"));
                }
                check(v)?;
                prefix.push((q, format!("x{v}")));
            }
            continue;
        }
        let vals = nums(l.split_whitespace())?;
        for v in vals {
            check(v)?;
            if v == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(v);
            }
        }
    }
    if nvars.is_none() {
        return Err(syntax(0, "missing 'p cnf' header"));
    }
    if !current.is_empty() {
        clauses.push(current);
    }
    let literal = |v: i64| {
        let x = BoolExpr::Var(format!("x{}", v.abs()));
        if v < 0 {
            BoolExpr::not(x)
        } else {
            x
        }
    };
    let matrix = clauses
        .iter()
        .map(|c| c.iter().map(|&v| literal(v)).reduce(BoolExpr::or).unwrap_or(BoolExpr::Const(false)))
        .reduce(BoolExpr::and)
        .unwrap_or(BoolExpr::Const(true));
    // free variables are existential at the outermost level
    let mut free: Vec<String> =
        matrix.variables().into_iter().filter(|v| !prefix.iter().any(|(_, w)| w == v)).map(String::from).collect();
    free.sort_by_key(|v| v[1..].parse::<u64>().unwrap_or(0));
    let mut full: Vec<(Quantifier, String)> = free.into_iter().map(|v| (Quantifier::Exists, v)).collect();
    full.extend(prefix);
    QbfFormula::new(full, matrix)
}

/// Validity by exhaustive recursion over the prefix.
pub fn brute_force_qbf(f: &QbfFormula) -> Result<bool, QbfError> {
    brute_force_qbf_with_limit(f, DEFAULT_BRUTE_FORCE_LIMIT)
}

pub fn brute_force_qbf_with_limit(f: &QbfFormula, limit: usize) -> Result<bool, QbfError> {
    if f.k() > limit {
        return Err(QbfError::LimitExceeded { k: f.k(), limit });
    }
    let mut env: HashMap<&str, bool> = HashMap::new();
    Ok(brute(f, 0, &mut env))
}

fn brute<'a>(f: &'a QbfFormula, depth: usize, env: &mut HashMap<&'a str, bool>) -> bool {
    let Some((q, v)) = f.prefix.get(depth) else {
        return f.matrix.eval(&|name| env[name]);
    };
    let mut branch = |b: bool| {
        env.insert(v.as_str(), b);
        brute(f, depth + 1, env)
    };
    match q {
        Quantifier::Exists => branch(false) || branch(true),
        Quantifier::Forall => branch(false) && branch(true),
    }
}

/// Appends the arithmetization of `e` to `b`: `¬a = 1 - a`, `a ∧ b = ab`,
/// `a ∨ b = 1 - (1-a)(1-b)`.
pub fn encode_bool(b: &mut CircuitBuilder, e: &BoolExpr, input: &dyn Fn(&mut CircuitBuilder, &str) -> usize) -> usize {
    match e {
        BoolExpr::Const(v) => b.constant_i64(i64::from(*v)),
        BoolExpr::Var(v) => input(b, v),
        BoolExpr::Not(a) => {
            let a = encode_bool(b, a, input);
            not_gate(b, a)
        }
        BoolExpr::And(l, r) => {
            let l = encode_bool(b, l, input);
            let r = encode_bool(b, r, input);
            b.mul(l, r)
        }
        BoolExpr::Or(l, r) => {
            let l = encode_bool(b, l, input);
            let r = encode_bool(b, r, input);
            or_gate(b, l, r)
        }
    }
}

fn not_gate(b: &mut CircuitBuilder, a: usize) -> usize {
    let one = b.constant_i64(1);
    b.sub(one, a)
}

fn and_gate(b: &mut CircuitBuilder, l: usize, r: usize) -> usize {
    b.mul(l, r)
}

fn or_gate(b: &mut CircuitBuilder, l: usize, r: usize) -> usize {
    let nl = not_gate(b, l);
    let nr = not_gate(b, r);
    let both = b.mul(nl, nr);
    not_gate(b, both)
}

/// The circuit of the arithmetized matrix; inputs are the variable names.
pub fn bool_to_circuit(matrix: &BoolExpr, field: FieldTag) -> Circuit {
    let mut b = CircuitBuilder::new(field);
    let out = encode_bool(&mut b, matrix, &|b, v| b.input(v));
    b.finish(vec![out])
}

/// The compiled system and how to read it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionOutput {
    /// Extended system; its main sequence is `dk`.
    pub system: RecSystem,
    pub init: InitialCondition,
    pub main: usize,
    /// Sequence name to role, e.g. `c2 -> "c^2"`.
    pub sequence_map: BTreeMap<String, String>,
    /// Prefix variable to the counter bit that drives it.
    pub variable_levels: BTreeMap<String, usize>,
    /// Rows `0..=horizon-1` suffice to read off validity.
    pub horizon: usize,
    pub k: usize,
}

fn c_index(i: usize) -> usize {
    i - 1
}

fn d_index(k: usize, i: usize) -> usize {
    k + i
}

fn f_index(k: usize, i: usize) -> usize {
    2 * k + 1 + i
}

/// Builds the `c`/`d`/`f` system. All sequences start at 0.
pub fn compile_qbf(f: &QbfFormula, field: FieldTag) -> Result<ReductionOutput, QbfError> {
    let k = f.k();
    if k == 0 {
        return Err(QbfError::EmptyPrefix);
    }
    let mut names = Vec::with_capacity(3 * k + 1);
    let mut sequence_map = BTreeMap::new();
    for i in 1..=k {
        names.push(format!("c{i}"));
        sequence_map.insert(format!("c{i}"), format!("c^{i}"));
    }
    for i in 0..=k {
        names.push(format!("d{i}"));
        sequence_map.insert(format!("d{i}"), format!("d^{i}"));
    }
    for i in 0..k {
        names.push(format!("f{i}"));
        sequence_map.insert(format!("f{i}"), format!("f^{i}"));
    }
    let prev = |j: usize| names[j].clone();
    let cur = |j: usize| format!("z{}", j + 1);

    // the prefix variable at position j is driven by c^(k-j)
    let variable_levels: BTreeMap<String, usize> =
        f.prefix.iter().enumerate().map(|(j, (_, v))| (v.clone(), k - j)).collect();
    let quantifier_at = |level: usize| f.prefix[k - level].0;

    let mut updates: Vec<Update> = Vec::with_capacity(3 * k + 1);

    // c^1_n = ¬c^1_{n-1}; c^i_n = Q(c^i_{n-1}, c^{i-1}_{n-1}, c^{i-1}_n)
    for i in 1..=k {
        let mut b = CircuitBuilder::new(field);
        let x = b.input(&prev(c_index(i)));
        let out = if i == 1 {
            not_gate(&mut b, x)
        } else {
            let y = b.input(&prev(c_index(i - 1)));
            let z = b.input(&cur(c_index(i - 1)));
            let nx = not_gate(&mut b, x);
            let ny = not_gate(&mut b, y);
            let nz = not_gate(&mut b, z);
            let falling = and_gate(&mut b, y, nz);
            let set = and_gate(&mut b, nx, falling);
            let hold = or_gate(&mut b, ny, z);
            let keep = and_gate(&mut b, x, hold);
            or_gate(&mut b, set, keep)
        };
        updates.push(Update::Circuit(b.finish(vec![out])));
    }

    // d^0_n = P_φ(c_{n-1})
    let mut b = CircuitBuilder::new(field);
    let out = encode_bool(&mut b, &f.matrix, &|b, v| b.input(&prev(c_index(variable_levels[v]))));
    updates.push(Update::Circuit(b.finish(vec![out])));

    // d^i_n = (d^{i-1}_n ⊛_i f^{i-1}_{n-1}) ∧ c^i_{n-1} ∧ ¬c^i_n
    for i in 1..=k {
        let mut b = CircuitBuilder::new(field);
        let x = b.input(&cur(d_index(k, i - 1)));
        let y = b.input(&prev(f_index(k, i - 1)));
        let z = b.input(&prev(c_index(i)));
        let t = b.input(&cur(c_index(i)));
        let folded = match quantifier_at(i) {
            Quantifier::Exists => or_gate(&mut b, x, y),
            Quantifier::Forall => and_gate(&mut b, x, y),
        };
        let nt = not_gate(&mut b, t);
        let gate = and_gate(&mut b, z, nt);
        let out = and_gate(&mut b, folded, gate);
        updates.push(Update::Circuit(b.finish(vec![out])));
    }

    // f^{i-1}_n = (d^{i-1}_n ∧ ¬c^i_{n-1} ∧ c^i_n) ∨ (f^{i-1}_{n-1} ∧ [c^i_{n-1} = c^i_n])
    for i in 1..=k {
        let mut b = CircuitBuilder::new(field);
        let x = b.input(&prev(c_index(i)));
        let y = b.input(&cur(c_index(i)));
        let z = b.input(&cur(d_index(k, i - 1)));
        let t = b.input(&prev(f_index(k, i - 1)));
        let nx = not_gate(&mut b, x);
        let ny = not_gate(&mut b, y);
        let rising = and_gate(&mut b, nx, y);
        let store = and_gate(&mut b, z, rising);
        let both = and_gate(&mut b, x, y);
        let neither = and_gate(&mut b, nx, ny);
        let same = or_gate(&mut b, both, neither);
        let hold = and_gate(&mut b, t, same);
        let out = or_gate(&mut b, store, hold);
        updates.push(Update::Circuit(b.finish(vec![out])));
    }

    let main = d_index(k, k);
    let system = RecSystem::new(field, names, updates, true, main)?;
    let init = InitialCondition::Numeric(vec![field.zero(); 3 * k + 1]);
    let horizon = (1usize << k) + 1;
    Ok(ReductionOutput { system, init, main, sequence_map, variable_levels, horizon, k })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidityReport {
    pub valid: bool,
    /// First index with a nonzero main entry.
    pub witness: Option<usize>,
    pub oracle_agrees: Option<bool>,
}

/// Compiles, fuses and evaluates the horizon; valid iff the main column has
/// a nonzero entry.
pub fn check_validity_via_sequence(f: &QbfFormula, field: FieldTag, oracle: bool) -> Result<ValidityReport, QbfError> {
    let out = compile_qbf(f, field)?;
    let fused = out.system.to_standard()?;
    let rows = fused.evaluate(&out.init, out.horizon - 1)?;
    let witness = rows.iter().position(|r| !r[out.main].is_zero());
    let valid = witness.is_some();
    let oracle_agrees = if oracle { Some(brute_force_qbf(f)? == valid) } else { None };
    Ok(ValidityReport { valid, witness, oracle_agrees })
}

/// The closed form of the counter: `c^i_n = 1` iff `n mod 2^i >= 2^(i-1)`.
pub fn counter_value(i: usize, n: usize) -> bool {
    n % (1 << i) >= 1 << (i - 1)
}

/// Every scalar of a row as a 0/1 bit, if the row is Boolean.
pub fn as_bits(row: &[Scalar]) -> Option<Vec<bool>> {
    row.iter()
        .map(|v| {
            if v.is_zero() {
                Some(false)
            } else if v.is_one() {
                Some(true)
            } else {
                None
            }
        })
        .collect()
}
