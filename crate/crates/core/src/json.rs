//! JSON formats for systems, recurrences, circuits and results. Every number
//! is a decimal string, and every polynomial is written in canonical form.
//! Objects use sorted keys, so emitted documents are byte-stable.

use std::collections::BTreeSet;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::algebra::{parse_expr, AlgebraError, FieldTag, RationalFunction, Scalar};
use crate::circuit::{Circuit, CircuitError, Gate};
use crate::flatten::{FieldChain, FlattenResult};
use crate::qbf::ReductionOutput;
use crate::recsys::{InitialCondition, PRecurrence, RecSystem, SymbolicTrace, SystemError, Update};
use crate::zeroness::ZeronessVerdict;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JsonError {
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    System(#[from] SystemError),
}

fn bad(msg: impl Into<String>) -> JsonError {
    JsonError::Format(msg.into())
}

fn get<'a>(v: &'a Value, key: &str) -> Result<&'a Value, JsonError> {
    v.get(key).ok_or_else(|| bad(format!("missing key '{key}'")))
}

fn as_str<'a>(v: &'a Value, what: &str) -> Result<&'a str, JsonError> {
    v.as_str().ok_or_else(|| bad(format!("{what} must be a string")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, JsonError> {
    v.as_array().ok_or_else(|| bad(format!("{what} must be an array")))
}

fn strings(v: &Value, what: &str) -> Result<Vec<String>, JsonError> {
    as_array(v, what)?.iter().map(|s| as_str(s, what).map(String::from)).collect()
}

pub fn field_to_json(f: FieldTag) -> Value {
    match f {
        FieldTag::Rationals => json!("Q"),
        FieldTag::Prime(p) => json!({ "Fp": p }),
    }
}

pub fn field_from_json(v: &Value) -> Result<FieldTag, JsonError> {
    match v {
        Value::String(s) if s == "Q" => Ok(FieldTag::Rationals),
        Value::Object(m) => {
            let p = m.get("Fp").and_then(Value::as_u64).ok_or_else(|| bad("field must be \"Q\" or {\"Fp\": p}"))?;
            Ok(FieldTag::prime(p)?)
        }
        _ => Err(bad("field must be \"Q\" or {\"Fp\": p}")),
    }
}

/// Parses the command-line spellings `q`, `f2` and `fp:P`.
pub fn parse_field_flag(s: &str) -> Result<FieldTag, JsonError> {
    let s = s.trim().to_ascii_lowercase();
    match s.as_str() {
        "q" => Ok(FieldTag::Rationals),
        "f2" => Ok(FieldTag::prime(2)?),
        _ => {
            let p = s
                .strip_prefix("fp:")
                .or_else(|| s.strip_prefix('f'))
                .and_then(|p| p.parse::<u64>().ok())
                .ok_or_else(|| bad(format!("unknown field '{s}'; use q, f2 or fp:P")))?;
            Ok(FieldTag::prime(p)?)
        }
    }
}

pub fn scalar_to_json(s: &Scalar) -> Value {
    Value::String(s.to_string())
}

pub fn scalars_to_json(v: &[Scalar]) -> Value {
    Value::Array(v.iter().map(scalar_to_json).collect())
}

pub fn circuit_to_json(c: &Circuit) -> Value {
    let gates: Vec<Value> = c
        .gates()
        .iter()
        .map(|g| match g {
            Gate::Input(l) => json!({ "op": "input", "label": l }),
            Gate::Constant(v) => json!({ "op": "const", "value": v.to_string() }),
            Gate::Add(l, r) => json!({ "op": "add", "l": l, "r": r }),
            Gate::Mul(l, r) => json!({ "op": "mul", "l": l, "r": r }),
        })
        .collect();
    json!({ "field": field_to_json(c.field()), "gates": gates, "outputs": c.outputs() })
}

/// Reads a circuit; `field` overrides the document's own field.
pub fn circuit_from_json(v: &Value, field: Option<FieldTag>) -> Result<Circuit, JsonError> {
    let field = match field {
        Some(f) => f,
        None => v.get("field").map(field_from_json).transpose()?.unwrap_or(FieldTag::Rationals),
    };
    let index = |g: &Value, key: &str| -> Result<usize, JsonError> {
        get(g, key)?.as_u64().map(|x| x as usize).ok_or_else(|| bad(format!("gate field '{key}' must be an index")))
    };
    let mut gates = Vec::new();
    for g in as_array(get(v, "gates")?, "gates")? {
        let gate = match as_str(get(g, "op")?, "op")? {
            "input" => Gate::Input(as_str(get(g, "label")?, "label")?.to_string()),
            "const" => Gate::Constant(field.parse_scalar(as_str(get(g, "value")?, "value")?)?),
            "add" => Gate::Add(index(g, "l")?, index(g, "r")?),
            "mul" => Gate::Mul(index(g, "l")?, index(g, "r")?),
            op => return Err(bad(format!("unknown gate op '{op}'"))),
        };
        gates.push(gate);
    }
    let outputs = as_array(get(v, "outputs")?, "outputs")?
        .iter()
        .map(|o| o.as_u64().map(|x| x as usize).ok_or_else(|| bad("outputs must be indices")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Circuit::new(field, gates, outputs)?)
}

/// Identifiers occurring in expression text, in sorted order.
fn identifiers(exprs: &[String]) -> Vec<String> {
    let mut out = BTreeSet::new();
    for e in exprs {
        let b = e.as_bytes();
        let mut i = 0;
        while i < b.len() {
            if b[i].is_ascii_alphabetic() || b[i] == b'_' {
                let start = i;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                    i += 1;
                }
                out.insert(e[start..i].to_string());
            } else {
                i += 1;
            }
        }
    }
    out.into_iter().collect()
}

pub fn initial_to_json(init: &InitialCondition) -> Value {
    match init {
        InitialCondition::Numeric(v) => json!({ "numeric": scalars_to_json(v) }),
        InitialCondition::Symbolic => json!({ "symbolic": true }),
        InitialCondition::SymbolicCustom { params, values } => json!({
            "params": params,
            "symbolic_custom": values.iter().map(|v| v.to_string_with(params)).collect::<Vec<_>>(),
        }),
    }
}

pub fn initial_from_json(v: &Value, field: FieldTag) -> Result<InitialCondition, JsonError> {
    if let Some(vals) = v.get("numeric") {
        let vals = strings(vals, "numeric initial values")?;
        let vals = vals.iter().map(|s| field.parse_scalar(s)).collect::<Result<Vec<_>, _>>()?;
        return Ok(InitialCondition::Numeric(vals));
    }
    if let Some(exprs) = v.get("symbolic_custom") {
        let exprs = strings(exprs, "symbolic_custom")?;
        let params = match v.get("params") {
            Some(p) => strings(p, "params")?,
            None => identifiers(&exprs),
        };
        let values = exprs.iter().map(|e| parse_expr(e, &params, field)).collect::<Result<Vec<_>, _>>()?;
        return Ok(InitialCondition::SymbolicCustom { params, values });
    }
    match v.get("symbolic") {
        Some(Value::Bool(true)) => Ok(InitialCondition::Symbolic),
        _ => Err(bad("initial must be {\"numeric\": [...]}, {\"symbolic\": true} or {\"symbolic_custom\": [...]}")),
    }
}

pub fn system_to_json(sys: &RecSystem, init: Option<&InitialCondition>) -> Value {
    let vars = sys.variable_names();
    let updates: Vec<Value> = sys
        .names()
        .iter()
        .zip(sys.updates())
        .map(|(name, u)| match u {
            Update::Rational(f) => json!({ "name": name, "expr": f.to_string_with(&vars) }),
            Update::Circuit(c) => json!({ "name": name, "circuit": circuit_to_json(c) }),
        })
        .collect();
    let mut m = Map::new();
    m.insert("field".into(), field_to_json(sys.field()));
    m.insert("names".into(), json!(sys.names()));
    m.insert("main".into(), json!(sys.names()[sys.main()]));
    m.insert("extended".into(), json!(sys.is_extended()));
    m.insert("updates".into(), Value::Array(updates));
    if let Some(init) = init {
        m.insert("initial".into(), initial_to_json(init));
    }
    Value::Object(m)
}

/// Reads a system and its optional initial condition. `field` overrides the
/// document's field; expressions and constants are then read in it.
pub fn system_from_json(v: &Value, field: Option<FieldTag>) -> Result<(RecSystem, Option<InitialCondition>), JsonError> {
    let field = match field {
        Some(f) => f,
        None => v.get("field").map(field_from_json).transpose()?.unwrap_or(FieldTag::Rationals),
    };
    let names = strings(get(v, "names")?, "names")?;
    let extended = match v.get("extended") {
        None => false,
        Some(b) => b.as_bool().ok_or_else(|| bad("extended must be a boolean"))?,
    };
    let main = match v.get("main") {
        None => 0,
        Some(Value::String(s)) => names.iter().position(|n| n == s).ok_or_else(|| bad(format!("unknown main '{s}'")))?,
        Some(_) => return Err(bad("main must be a sequence name")),
    };
    let mut vars = names.clone();
    if extended {
        vars.extend(crate::circuit::next_labels(names.len()));
    }
    let entries = as_array(get(v, "updates")?, "updates")?;
    let mut updates: Vec<Option<Update>> = vec![None; names.len()];
    for (pos, e) in entries.iter().enumerate() {
        let slot = match e.get("name") {
            Some(n) => {
                let n = as_str(n, "update name")?;
                names.iter().position(|x| x == n).ok_or_else(|| bad(format!("update for unknown sequence '{n}'")))?
            }
            None => pos,
        };
        if slot >= names.len() || updates[slot].is_some() {
            return Err(bad(format!("update {} is duplicated or out of range", pos + 1)));
        }
        let u = if let Some(expr) = e.get("expr") {
            Update::Rational(parse_expr(as_str(expr, "expr")?, &vars, field)?)
        } else if let Some(c) = e.get("circuit") {
            Update::Circuit(circuit_from_json(c, Some(field))?)
        } else {
            return Err(bad("an update needs \"expr\" or \"circuit\""));
        };
        updates[slot] = Some(u);
    }
    let updates = updates
        .into_iter()
        .enumerate()
        .map(|(i, u)| u.ok_or_else(|| bad(format!("no update for '{}'", names[i]))))
        .collect::<Result<Vec<_>, _>>()?;
    let sys = RecSystem::new(field, names, updates, extended, main)?;
    let init = v.get("initial").map(|i| initial_from_json(i, field)).transpose()?;
    Ok((sys, init))
}

pub fn precurrence_to_json(rec: &PRecurrence) -> Value {
    let n = ["n".to_string()];
    json!({
        "d": rec.order(),
        "coeffs": rec.coeffs.iter().map(|p| p.to_string_with(&n)).collect::<Vec<_>>(),
        "initial": scalars_to_json(&rec.initial),
    })
}

pub fn precurrence_from_json(v: &Value) -> Result<PRecurrence, JsonError> {
    let coeffs = strings(get(v, "coeffs")?, "coeffs")?;
    let initial = strings(get(v, "initial")?, "initial")?;
    if let Some(d) = v.get("d") {
        let d = d.as_u64().ok_or_else(|| bad("d must be a natural number"))?;
        if coeffs.len() as u64 != d + 1 {
            return Err(bad(format!("d = {d} needs {} coefficients, got {}", d + 1, coeffs.len())));
        }
    }
    Ok(PRecurrence::parse(&coeffs, &initial)?)
}

fn ratfun_to_json(r: &RationalFunction, names: &[String]) -> Value {
    json!({ "num": r.numerator().to_string_with(names), "den": r.denominator().to_string_with(names) })
}

pub fn flatten_to_json(res: &FlattenResult) -> Value {
    let names = res.variable_names();
    json!({
        "m": res.m,
        "R": ratfun_to_json(&res.r, &names[..=res.m]),
        "cancelling": res.cancelling.to_string_with(&names),
        "verified": res.verified,
        "trdegs": res.trdegs,
        "bound": res.bound,
    })
}

pub fn chain_to_json(chain: &FieldChain, params: &[String]) -> Value {
    json!({
        "generators": chain.generators.iter().map(|g| g.to_string_with(params)).collect::<Vec<_>>(),
        "trdegs": chain.trdegs,
    })
}

pub fn verdict_to_json(v: &ZeronessVerdict) -> Value {
    match v {
        ZeronessVerdict::Zero { states } => json!({ "verdict": "zero", "states": states }),
        ZeronessVerdict::NonZero { index, value } => {
            json!({ "verdict": "nonzero", "n": index, "value": value.to_string() })
        }
        ZeronessVerdict::AllZeroUpTo { bound } => json!({ "verdict": "all_zero_up_to", "bound": bound }),
        ZeronessVerdict::DivisionByZero { step, equation } => {
            json!({ "verdict": "division_by_zero", "n": step, "equation": equation })
        }
    }
}

pub fn trajectory_to_json(sys: &RecSystem, rows: &[Vec<Scalar>]) -> Value {
    let main = sys.main();
    json!({
        "names": sys.names(),
        "main": sys.names()[main],
        "rows": rows.iter().map(|r| scalars_to_json(r)).collect::<Vec<_>>(),
        "main_column": rows.iter().map(|r| scalar_to_json(&r[main])).collect::<Vec<_>>(),
    })
}

pub fn trace_to_json(sys: &RecSystem, trace: &SymbolicTrace) -> Value {
    json!({
        "names": sys.names(),
        "params": trace.params,
        "rows": trace
            .rows
            .iter()
            .map(|r| r.iter().map(|f| Value::String(f.to_string_with(&trace.params))).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

pub fn reduction_to_json(out: &ReductionOutput) -> Value {
    let mut v = system_to_json(&out.system, Some(&out.init));
    v.as_object_mut().expect("object").insert(
        "metadata".into(),
        json!({
            "k": out.k,
            "horizon": out.horizon,
            "sequence_map": out.sequence_map,
            "variable_levels": out.variable_levels,
        }),
    );
    v
}

/// Pretty-printed document with a trailing newline.
pub fn to_canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
