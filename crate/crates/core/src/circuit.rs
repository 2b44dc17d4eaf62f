//! Arithmetic circuits: DAGs of input, constant, addition and multiplication
//! gates, numbered topologically.

use std::collections::HashMap;

use thiserror::Error;

use crate::algebra::{FieldTag, Polynomial, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gate {
    Input(String),
    Constant(Scalar),
    Add(usize, usize),
    Mul(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("gate {gate} references gate {target}, which does not precede it")]
    ForwardReference { gate: usize, target: usize },
    #[error("output {0} is not a gate of the circuit")]
    BadOutput(usize),
    #[error("a circuit needs at least one output")]
    NoOutputs,
    #[error("input label '{0}' appears twice")]
    DuplicateInput(String),
    #[error("no value supplied for input '{0}'")]
    MissingInput(String),
    #[error("constant or input value lives in the wrong field")]
    FieldMismatch,
    #[error("expansion exceeded the budget of {0} terms")]
    TermBudgetExceeded(usize),
    #[error("input '{0}' is not among the declared variables")]
    UnknownInput(String),
    #[error("equation {equation} reads z{referenced}, which is not computed before it")]
    CyclicDependency { equation: usize, referenced: usize },
}

/// A multi-output arithmetic circuit over a fixed field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    field: FieldTag,
    gates: Vec<Gate>,
    outputs: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CircuitStats {
    pub size: usize,
    pub depth: usize,
}

impl Circuit {
    pub fn new(field: FieldTag, gates: Vec<Gate>, outputs: Vec<usize>) -> Result<Self, CircuitError> {
        let mut labels = std::collections::HashSet::new();
        for (id, g) in gates.iter().enumerate() {
            match g {
                Gate::Add(l, r) | Gate::Mul(l, r) => {
                    for &t in [l, r] {
                        if t >= id {
                            return Err(CircuitError::ForwardReference { gate: id, target: t });
                        }
                    }
                }
                Gate::Constant(c) => {
                    if c.field() != field {
                        return Err(CircuitError::FieldMismatch);
                    }
                }
                Gate::Input(label) => {
                    if !labels.insert(label.clone()) {
                        return Err(CircuitError::DuplicateInput(label.clone()));
                    }
                }
            }
        }
        if outputs.is_empty() {
            return Err(CircuitError::NoOutputs);
        }
        if let Some(&o) = outputs.iter().find(|&&o| o >= gates.len()) {
            return Err(CircuitError::BadOutput(o));
        }
        Ok(Circuit { field, gates, outputs })
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    /// Input labels in gate order.
    pub fn input_labels(&self) -> Vec<&str> {
        self.gates
            .iter()
            .filter_map(|g| match g {
                Gate::Input(l) => Some(l.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Evaluates every output in an arbitrary ring described by the closures.
    pub fn eval_with<T: Clone, E>(
        &self,
        mut input: impl FnMut(&str) -> Result<T, E>,
        constant: impl Fn(&Scalar) -> T,
        add: impl Fn(&T, &T) -> T,
        mul: impl Fn(&T, &T) -> T,
    ) -> Result<Vec<T>, E> {
        let mut vals: Vec<T> = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let v = match g {
                Gate::Input(l) => input(l)?,
                Gate::Constant(c) => constant(c),
                Gate::Add(l, r) => add(&vals[*l], &vals[*r]),
                Gate::Mul(l, r) => mul(&vals[*l], &vals[*r]),
            };
            vals.push(v);
        }
        Ok(self.outputs.iter().map(|&o| vals[o].clone()).collect())
    }

    /// Value of every output under `inputs`.
    pub fn eval_all(&self, inputs: &HashMap<String, Scalar>) -> Result<Vec<Scalar>, CircuitError> {
        self.eval_with(
            |l| {
                let v = inputs.get(l).ok_or_else(|| CircuitError::MissingInput(l.to_string()))?;
                if v.field() != self.field {
                    return Err(CircuitError::FieldMismatch);
                }
                Ok(v.clone())
            },
            Scalar::clone,
            |a, b| a + b,
            |a, b| a * b,
        )
    }

    /// The sub-circuit feeding output `index`, renumbered, as a single-output
    /// circuit.
    pub fn project(&self, index: usize) -> Circuit {
        let root = self.outputs[index];
        let mut live = vec![false; self.gates.len()];
        live[root] = true;
        for id in (0..=root).rev() {
            if !live[id] {
                continue;
            }
            if let Gate::Add(l, r) | Gate::Mul(l, r) = self.gates[id] {
                live[l] = true;
                live[r] = true;
            }
        }
        let mut map = vec![usize::MAX; self.gates.len()];
        let mut gates = Vec::new();
        for id in 0..=root {
            if !live[id] {
                continue;
            }
            map[id] = gates.len();
            gates.push(match &self.gates[id] {
                Gate::Add(l, r) => Gate::Add(map[*l], map[*r]),
                Gate::Mul(l, r) => Gate::Mul(map[*l], map[*r]),
                g => g.clone(),
            });
        }
        Circuit { field: self.field, outputs: vec![map[root]], gates }
    }

    /// Same circuit with input labels rewritten by `f`.
    pub fn relabel(&self, f: impl Fn(&str) -> String) -> Circuit {
        let gates = self
            .gates
            .iter()
            .map(|g| match g {
                Gate::Input(l) => Gate::Input(f(l)),
                g => g.clone(),
            })
            .collect();
        Circuit { field: self.field, gates, outputs: self.outputs.clone() }
    }

    /// Value of the first output.
    pub fn eval(&self, inputs: &HashMap<String, Scalar>) -> Result<Scalar, CircuitError> {
        Ok(self.eval_all(inputs)?.swap_remove(0))
    }

    /// Expands every output into a polynomial over `variables`, failing as
    /// soon as any gate needs more than `max_terms` terms.
    pub fn to_polynomials<S: AsRef<str>>(
        &self,
        variables: &[S],
        max_terms: usize,
    ) -> Result<Vec<Polynomial>, CircuitError> {
        let n = variables.len();
        let mut vals: Vec<Polynomial> = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let p = match g {
                Gate::Input(l) => {
                    let i = variables
                        .iter()
                        .position(|v| v.as_ref() == l)
                        .ok_or_else(|| CircuitError::UnknownInput(l.clone()))?;
                    Polynomial::var(self.field, n, i)
                }
                Gate::Constant(c) => Polynomial::constant(c.clone(), n),
                Gate::Add(l, r) => &vals[*l] + &vals[*r],
                Gate::Mul(l, r) => &vals[*l] * &vals[*r],
            };
            if p.len() > max_terms {
                return Err(CircuitError::TermBudgetExceeded(max_terms));
            }
            vals.push(p);
        }
        Ok(self.outputs.iter().map(|&o| vals[o].clone()).collect())
    }

    pub fn to_polynomial<S: AsRef<str>>(&self, variables: &[S], max_terms: usize) -> Result<Polynomial, CircuitError> {
        Ok(self.to_polynomials(variables, max_terms)?.swap_remove(0))
    }

    /// Gate count and longest input-to-output path. Every gate counts 1.
    pub fn stats(&self) -> CircuitStats {
        let mut depth = vec![0usize; self.gates.len()];
        for (id, g) in self.gates.iter().enumerate() {
            if let Gate::Add(l, r) | Gate::Mul(l, r) = g {
                depth[id] = 1 + depth[*l].max(depth[*r]);
            }
        }
        CircuitStats {
            size: self.gates.len(),
            depth: self.outputs.iter().map(|&o| depth[o]).max().unwrap_or(0),
        }
    }

    /// Builds a circuit computing `p`, one monomial product chain per term.
    pub fn from_polynomial<S: AsRef<str>>(p: &Polynomial, variables: &[S]) -> Circuit {
        let mut b = CircuitBuilder::new(p.field());
        let inputs: Vec<usize> = variables.iter().map(|v| b.input(v.as_ref())).collect();
        let mut acc = None;
        for (m, c) in p.terms() {
            let mut t = b.constant(c.clone());
            for (v, &e) in m.exponents().iter().enumerate() {
                for _ in 0..e {
                    t = b.mul(t, inputs[v]);
                }
            }
            acc = Some(match acc {
                None => t,
                Some(a) => b.add(a, t),
            });
        }
        let out = acc.unwrap_or_else(|| b.constant(p.field().zero()));
        b.finish(vec![out])
    }
}

/// Incremental construction with input deduplication.
#[derive(Clone, Debug)]
pub struct CircuitBuilder {
    field: FieldTag,
    gates: Vec<Gate>,
    inputs: HashMap<String, usize>,
}

impl CircuitBuilder {
    pub fn new(field: FieldTag) -> Self {
        CircuitBuilder { field, gates: Vec::new(), inputs: HashMap::new() }
    }

    fn push(&mut self, g: Gate) -> usize {
        self.gates.push(g);
        self.gates.len() - 1
    }

    pub fn input(&mut self, label: &str) -> usize {
        if let Some(&id) = self.inputs.get(label) {
            return id;
        }
        let id = self.push(Gate::Input(label.to_string()));
        self.inputs.insert(label.to_string(), id);
        id
    }

    pub fn constant(&mut self, c: Scalar) -> usize {
        self.push(Gate::Constant(c))
    }

    pub fn constant_i64(&mut self, c: i64) -> usize {
        let s = self.field.from_i64(c);
        self.constant(s)
    }

    pub fn add(&mut self, l: usize, r: usize) -> usize {
        self.push(Gate::Add(l, r))
    }

    pub fn mul(&mut self, l: usize, r: usize) -> usize {
        self.push(Gate::Mul(l, r))
    }

    /// `l - r`, as `l + (-1)·r`.
    pub fn sub(&mut self, l: usize, r: usize) -> usize {
        let m1 = self.constant_i64(-1);
        let neg = self.mul(m1, r);
        self.add(l, neg)
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn finish(self, outputs: Vec<usize>) -> Circuit {
        Circuit::new(self.field, self.gates, outputs).expect("builder emits valid circuits")
    }
}

/// The conventional labels `x1..xk` (previous values) of the extended format.
pub fn state_labels(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("x{i}")).collect()
}

/// The conventional labels `z1..zk` (values already computed this step).
pub fn next_labels(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("z{i}")).collect()
}

/// Turns the circuits of an extended system into one standard multi-output
/// circuit. Circuit `i` may read `state[..]` and `next[..i]`; every read of
/// `next[j]` is wired to the output of circuit `j`, and equal state inputs are
/// merged into one gate.
pub fn fuse_extended<S: AsRef<str>>(circuits: &[Circuit], state: &[S], next: &[S]) -> Result<Circuit, CircuitError> {
    let field = circuits.first().map(|c| c.field).ok_or(CircuitError::NoOutputs)?;
    let mut b = CircuitBuilder::new(field);
    for s in state {
        b.input(s.as_ref());
    }
    let mut outputs = Vec::with_capacity(circuits.len());
    for (i, c) in circuits.iter().enumerate() {
        if c.field != field {
            return Err(CircuitError::FieldMismatch);
        }
        let mut map = Vec::with_capacity(c.gates.len());
        for g in &c.gates {
            let id = match g {
                Gate::Input(l) => {
                    if let Some(j) = next.iter().position(|n| n.as_ref() == l) {
                        if j >= i {
                            return Err(CircuitError::CyclicDependency { equation: i + 1, referenced: j + 1 });
                        }
                        outputs[j]
                    } else if state.iter().any(|s| s.as_ref() == l) {
                        b.input(l)
                    } else {
                        return Err(CircuitError::UnknownInput(l.clone()));
                    }
                }
                Gate::Constant(v) => b.constant(v.clone()),
                Gate::Add(l, r) => b.add(map[*l], map[*r]),
                Gate::Mul(l, r) => b.mul(map[*l], map[*r]),
            };
            map.push(id);
        }
        outputs.push(map[c.outputs[0]]);
    }
    Ok(b.finish(outputs))
}
