//! JSON interchange schema shared by every CLI subcommand.
//!
//! - vector: `{"entries": [[index, value], ...]}`
//! - functional: the same with `"kind": "dual"`
//! - direct-sum vector: `[{"p": 2.0, "vector": {...}}, ...]`
//! - pair: `{"x": {...}, "y": {...}}`
//! - graph map: `{"k": 2, "p": 2.0, "table": [{"vertex": [1,3], "image": {...}}, ...]}`
//!   (direct-sum targets declare `"components_p": [p_1, ...]` instead of `"p"`
//!   and use direct-sum images)
//!
//! Inputs are parsed by hand so malformed files fail with the offending
//! field named. Emission goes through `serde_json`, whose shortest-roundtrip
//! float formatting makes parse → emit → parse the identity.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use thiserror::Error;

use crate::graphs::{GraphError, GraphImage, GraphMap, TargetSpace};
use crate::model::{DirectSumVector, DualFunctional, Exponent, GraphVertex, SeqVector};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("{path}: {message}")]
    Malformed { path: String, message: String },
    #[error("not valid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn bad(path: impl Into<String>, message: impl Into<String>) -> JsonError {
    JsonError::Malformed {
        path: path.into(),
        message: message.into(),
    }
}

fn parse_index(v: &Value, path: &str) -> Result<usize, JsonError> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| bad(path, "index must be a nonnegative integer"))
}

fn parse_coeff(v: &Value, path: &str) -> Result<f64, JsonError> {
    let x = v
        .as_f64()
        .ok_or_else(|| bad(path, "coefficient must be a number"))?;
    if !x.is_finite() {
        return Err(bad(path, "coefficient must be finite"));
    }
    Ok(x)
}

fn parse_entries(obj: &Value, path: &str) -> Result<Vec<(usize, f64)>, JsonError> {
    let entries = obj
        .get("entries")
        .ok_or_else(|| bad(format!("{path}.entries"), "missing field"))?
        .as_array()
        .ok_or_else(|| bad(format!("{path}.entries"), "must be an array of [index, value] pairs"))?;
    let mut seen = BTreeMap::new();
    let mut out = Vec::with_capacity(entries.len());
    for (i, pair) in entries.iter().enumerate() {
        let p = format!("{path}.entries[{i}]");
        let arr = pair
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| bad(&p, "must be a [index, value] pair"))?;
        let idx = parse_index(&arr[0], &p)?;
        let val = parse_coeff(&arr[1], &p)?;
        if seen.insert(idx, ()).is_some() {
            return Err(bad(&p, format!("duplicate index {idx}")));
        }
        out.push((idx, val));
    }
    Ok(out)
}

fn check_kind(obj: &Value, path: &str, dual: bool) -> Result<(), JsonError> {
    match (obj.get("kind").and_then(Value::as_str), dual) {
        (Some("dual"), true) | (None, false) => Ok(()),
        (Some("dual"), false) => Err(bad(
            format!("{path}.kind"),
            "a vector must not carry kind \"dual\"; this file holds a functional",
        )),
        (None, true) => Err(bad(
            format!("{path}.kind"),
            "expected \"dual\" for a functional input",
        )),
        (Some(other), _) => Err(bad(
            format!("{path}.kind"),
            format!("unknown kind {other:?}"),
        )),
    }
}

fn vector_at(v: &Value, path: &str) -> Result<SeqVector, JsonError> {
    if !v.is_object() {
        return Err(bad(path, "expected an object with an \"entries\" field"));
    }
    check_kind(v, path, false)?;
    Ok(SeqVector::from_entries(parse_entries(v, path)?))
}

pub fn parse_vector(s: &str) -> Result<SeqVector, JsonError> {
    let v: Value = serde_json::from_str(s)?;
    vector_at(&v, "$")
}

pub fn parse_functional(s: &str) -> Result<DualFunctional, JsonError> {
    let v: Value = serde_json::from_str(s)?;
    if !v.is_object() {
        return Err(bad("$", "expected an object with an \"entries\" field"));
    }
    check_kind(&v, "$", true)?;
    Ok(DualFunctional::from_entries(parse_entries(&v, "$")?))
}

fn exponent_at(v: &Value, path: &str) -> Result<Exponent, JsonError> {
    let p = v
        .as_f64()
        .ok_or_else(|| bad(path, "exponent must be a number"))?;
    Exponent::new(p).map_err(|e| bad(path, e.to_string()))
}

fn direct_sum_at(v: &Value, path: &str) -> Result<DirectSumVector, JsonError> {
    let arr = v
        .as_array()
        .ok_or_else(|| bad(path, "expected an array of {p, vector} components"))?;
    let mut comps = Vec::with_capacity(arr.len());
    for (i, c) in arr.iter().enumerate() {
        let p = format!("{path}[{i}]");
        let e = exponent_at(
            c.get("p").ok_or_else(|| bad(format!("{p}.p"), "missing field"))?,
            &format!("{p}.p"),
        )?;
        let vec = vector_at(
            c.get("vector")
                .ok_or_else(|| bad(format!("{p}.vector"), "missing field"))?,
            &format!("{p}.vector"),
        )?;
        comps.push((e, vec));
    }
    DirectSumVector::new(comps).map_err(|e| bad(path, e.to_string()))
}

pub fn parse_direct_sum(s: &str) -> Result<DirectSumVector, JsonError> {
    let v: Value = serde_json::from_str(s)?;
    direct_sum_at(&v, "$")
}

pub fn parse_pair(s: &str) -> Result<(SeqVector, SeqVector), JsonError> {
    let v: Value = serde_json::from_str(s)?;
    let x = vector_at(
        v.get("x").ok_or_else(|| bad("$.x", "missing field"))?,
        "$.x",
    )?;
    let y = vector_at(
        v.get("y").ok_or_else(|| bad("$.y", "missing field"))?,
        "$.y",
    )?;
    Ok((x, y))
}

pub fn parse_graph_map(s: &str) -> Result<GraphMap, JsonError> {
    let v: Value = serde_json::from_str(s)?;
    let k = v
        .get("k")
        .and_then(Value::as_u64)
        .ok_or_else(|| bad("$.k", "missing or non-integer tuple length"))? as usize;
    let target = if let Some(p) = v.get("p") {
        TargetSpace::James(exponent_at(p, "$.p")?)
    } else if let Some(ps) = v.get("components_p") {
        let arr = ps
            .as_array()
            .ok_or_else(|| bad("$.components_p", "must be an array of exponents"))?;
        let mut es = Vec::with_capacity(arr.len());
        for (i, pv) in arr.iter().enumerate() {
            es.push(exponent_at(pv, &format!("$.components_p[{i}]"))?);
        }
        TargetSpace::DirectSum(es)
    } else {
        return Err(bad("$", "need either \"p\" or \"components_p\""));
    };
    let rows = v
        .get("table")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("$.table", "missing or non-array"))?;
    let mut table = BTreeMap::new();
    for (i, row) in rows.iter().enumerate() {
        let path = format!("$.table[{i}]");
        let vert = row
            .get("vertex")
            .and_then(Value::as_array)
            .ok_or_else(|| bad(format!("{path}.vertex"), "missing or non-array"))?;
        let mut idx = Vec::with_capacity(vert.len());
        for (j, n) in vert.iter().enumerate() {
            idx.push(parse_index(n, &format!("{path}.vertex[{j}]"))?);
        }
        let vertex = GraphVertex::new(idx)
            .map_err(|e| bad(format!("{path}.vertex"), e.to_string()))?;
        let img_val = row
            .get("image")
            .ok_or_else(|| bad(format!("{path}.image"), "missing field"))?;
        let image = match &target {
            TargetSpace::James(_) => GraphImage::Plain(vector_at(img_val, &format!("{path}.image"))?),
            TargetSpace::DirectSum(es) => {
                let comps = img_val
                    .get("components")
                    .ok_or_else(|| bad(format!("{path}.image.components"), "missing field"))?;
                let sum = direct_sum_at(comps, &format!("{path}.image.components"))?;
                if sum.components().len() != es.len() {
                    return Err(bad(
                        format!("{path}.image.components"),
                        format!("expected {} components", es.len()),
                    ));
                }
                GraphImage::Sum(sum)
            }
        };
        if table.insert(vertex.clone(), image).is_some() {
            return Err(bad(format!("{path}.vertex"), format!("duplicate vertex {vertex}")));
        }
    }
    Ok(GraphMap::from_table(k, table, target)?)
}

pub fn vector_to_json(x: &SeqVector) -> Value {
    json!({ "entries": x.entries().map(|(i, v)| json!([i, v])).collect::<Vec<_>>() })
}

pub fn functional_to_json(f: &DualFunctional) -> Value {
    json!({
        "kind": "dual",
        "entries": f.entries().map(|(i, v)| json!([i, v])).collect::<Vec<_>>(),
    })
}

pub fn direct_sum_to_json(v: &DirectSumVector) -> Value {
    Value::Array(
        v.components()
            .iter()
            .map(|(e, x)| json!({ "p": e.p(), "vector": vector_to_json(x) }))
            .collect(),
    )
}
