//! JSON schemas for presentations, graded presentations, finite M-sets,
//! and Sigma functions. Parse errors carry JSON-pointer-style paths.
//!
//! Presentation: {"generators": ["x","y"], "relations": [[{"x":2},{"y":2}]]}
//! where each relation side maps generator name to exponent (absent = 0).
//! Graded presentations add {"degrees": {"x":1,"y":1}}.
//! Finite M-set: {"elements": ["a","b"], "action": {"x":[1,0]}}.
//! Sigma function: {"basis":"countable"|["e0","e1"],
//!                  "exceptions":{"3":-1,"5":"-inf"},
//!                  "tail":{"kind":"affine","a":-1,"b":0}}  (or "const","value").

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::free_points::{Basis, ExtInt, SigmaFunction, Tail};
use crate::graded::GradedMonoid;
use crate::monoid::{MonoidElement, MonoidPresentation};
use crate::msets::FiniteMSet;

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Monoid(#[from] crate::monoid::MonoidError),
    #[error(transparent)]
    Graded(#[from] crate::graded::GradedError),
    #[error(transparent)]
    MSet(#[from] crate::msets::MSetError),
    #[error(transparent)]
    Sigma(#[from] crate::free_points::SigmaError),
}

pub type Result<T> = std::result::Result<T, JsonError>;

fn schema_err<T>(path: impl Into<String>, message: impl Into<String>) -> Result<T> {
    Err(JsonError::Schema {
        path: path.into(),
        message: message.into(),
    })
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or(())
        .or_else(|_| schema_err(path, "expected an object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or(())
        .or_else(|_| schema_err(path, "expected an array"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str()
        .ok_or(())
        .or_else(|_| schema_err(path, "expected a string"))
}

fn relation_side(
    v: &Value,
    names: &BTreeMap<String, usize>,
    k: usize,
    path: &str,
) -> Result<MonoidElement> {
    let obj = as_object(v, path)?;
    let mut exps = vec![0u32; k];
    for (name, val) in obj {
        let idx = match names.get(name) {
            Some(&i) => i,
            None => return schema_err(format!("{}/{}", path, name), "unknown generator"),
        };
        let e = val
            .as_u64()
            .ok_or(())
            .or_else(|_| schema_err(format!("{}/{}", path, name), "expected a nonnegative exponent"))?;
        exps[idx] = u32::try_from(e)
            .map_err(|_| JsonError::Schema {
                path: format!("{}/{}", path, name),
                message: "exponent too large".into(),
            })?;
    }
    Ok(MonoidElement::new(exps))
}

/// Parse a presentation from a JSON value.
pub fn presentation_from_value(v: &Value) -> Result<MonoidPresentation> {
    let obj = as_object(v, "")?;
    let gens_v = obj
        .get("generators")
        .ok_or(())
        .or_else(|_| schema_err("/generators", "missing"))?;
    let generators: Vec<String> = as_array(gens_v, "/generators")?
        .iter()
        .enumerate()
        .map(|(i, g)| as_str(g, &format!("/generators/{}", i)).map(String::from))
        .collect::<Result<_>>()?;
    let names: BTreeMap<String, usize> = generators
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect();
    if names.len() != generators.len() {
        return schema_err("/generators", "duplicate generator name");
    }
    let k = generators.len();
    let mut relations = Vec::new();
    if let Some(rels_v) = obj.get("relations") {
        for (i, rel) in as_array(rels_v, "/relations")?.iter().enumerate() {
            let path = format!("/relations/{}", i);
            let pair = as_array(rel, &path)?;
            if pair.len() != 2 {
                return schema_err(path, "a relation is a two-element array");
            }
            let lhs = relation_side(&pair[0], &names, k, &format!("{}/0", path))?;
            let rhs = relation_side(&pair[1], &names, k, &format!("{}/1", path))?;
            relations.push((lhs, rhs));
        }
    }
    Ok(MonoidPresentation::new(generators, relations)?)
}

pub fn presentation_from_str(s: &str) -> Result<MonoidPresentation> {
    presentation_from_value(&serde_json::from_str(s)?)
}

/// Parse a single element written as a name-to-exponent map, e.g. {"x":2}.
pub fn element_from_value(v: &Value, p: &MonoidPresentation) -> Result<MonoidElement> {
    let names: BTreeMap<String, usize> = p
        .generator_names()
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect();
    relation_side(v, &names, p.generator_count(), "")
}

pub fn element_from_str(s: &str, p: &MonoidPresentation) -> Result<MonoidElement> {
    element_from_value(&serde_json::from_str(s)?, p)
}

fn side_to_value(p: &MonoidPresentation, e: &MonoidElement) -> Value {
    let mut m = Map::new();
    for (i, &x) in e.exponents().iter().enumerate() {
        if x > 0 {
            m.insert(p.generator_names()[i].clone(), json!(x));
        }
    }
    Value::Object(m)
}

pub fn presentation_to_value(p: &MonoidPresentation) -> Value {
    json!({
        "generators": p.generator_names(),
        "relations": p
            .relations()
            .iter()
            .map(|(u, v)| json!([side_to_value(p, u), side_to_value(p, v)]))
            .collect::<Vec<_>>(),
    })
}

/// Parse a graded presentation: a presentation plus a degrees map.
pub fn graded_from_value(v: &Value) -> Result<GradedMonoid> {
    let base = presentation_from_value(v)?;
    let obj = as_object(v, "")?;
    let degs_v = obj
        .get("degrees")
        .ok_or(())
        .or_else(|_| schema_err("/degrees", "missing"))?;
    let degs = as_object(degs_v, "/degrees")?;
    let mut degrees = vec![0i64; base.generator_count()];
    for (name, val) in degs {
        let idx = match base.generator_index(name) {
            Some(i) => i,
            None => return schema_err(format!("/degrees/{}", name), "unknown generator"),
        };
        degrees[idx] = val
            .as_i64()
            .ok_or(())
            .or_else(|_| schema_err(format!("/degrees/{}", name), "expected an integer"))?;
    }
    Ok(GradedMonoid::new(base, degrees)?)
}

pub fn graded_from_str(s: &str) -> Result<GradedMonoid> {
    graded_from_value(&serde_json::from_str(s)?)
}

pub fn graded_to_value(g: &GradedMonoid) -> Value {
    let mut v = presentation_to_value(g.base());
    let mut degs = Map::new();
    for (i, &d) in g.degrees().iter().enumerate() {
        degs.insert(g.base().generator_names()[i].clone(), json!(d));
    }
    v.as_object_mut()
        .unwrap()
        .insert("degrees".into(), Value::Object(degs));
    v
}

/// Parse a finite M-set over a given monoid:
/// {"elements": [...], "action": {"gen": [indices...]}}.
pub fn finite_mset_from_value(v: &Value, monoid: &MonoidPresentation) -> Result<FiniteMSet> {
    let obj = as_object(v, "")?;
    let elems_v = obj
        .get("elements")
        .ok_or(())
        .or_else(|_| schema_err("/elements", "missing"))?;
    let elements: Vec<String> = as_array(elems_v, "/elements")?
        .iter()
        .enumerate()
        .map(|(i, e)| as_str(e, &format!("/elements/{}", i)).map(String::from))
        .collect::<Result<_>>()?;
    let action_v = obj
        .get("action")
        .ok_or(())
        .or_else(|_| schema_err("/action", "missing"))?;
    let action_map = as_object(action_v, "/action")?;
    let mut action = vec![Vec::new(); monoid.generator_count()];
    for (name, row_v) in action_map {
        let g = match monoid.generator_index(name) {
            Some(i) => i,
            None => return schema_err(format!("/action/{}", name), "unknown generator"),
        };
        let row = as_array(row_v, &format!("/action/{}", name))?;
        action[g] = row
            .iter()
            .enumerate()
            .map(|(i, x)| {
                x.as_u64().map(|u| u as usize).ok_or(()).or_else(|_| {
                    schema_err(format!("/action/{}/{}", name, i), "expected an index")
                })
            })
            .collect::<Result<_>>()?;
    }
    for (g, row) in action.iter().enumerate() {
        if row.len() != elements.len() {
            return schema_err(
                format!("/action/{}", monoid.generator_names()[g]),
                "row length must match the carrier",
            );
        }
    }
    Ok(FiniteMSet::new(monoid.clone(), elements, action)?)
}

pub fn finite_mset_to_value(a: &FiniteMSet) -> Value {
    let mut act = Map::new();
    for (g, row) in a.action().iter().enumerate() {
        act.insert(a.monoid().generator_names()[g].clone(), json!(row));
    }
    json!({"elements": a.elements(), "action": Value::Object(act)})
}

fn extint_from_value(v: &Value, path: &str) -> Result<ExtInt> {
    if let Some(i) = v.as_i64() {
        return Ok(ExtInt::Int(i));
    }
    if v.as_str() == Some("-inf") {
        return Ok(ExtInt::NegInf);
    }
    schema_err(path, "expected an integer or \"-inf\"")
}

fn extint_to_value(v: ExtInt) -> Value {
    match v {
        ExtInt::NegInf => json!("-inf"),
        ExtInt::Int(i) => json!(i),
    }
}

/// Parse a Sigma function:
/// {"basis": "countable" | ["e0",...],
///  "exceptions": {"3": -1, "5": "-inf"},
///  "tail": {"kind":"const","value":0} | {"kind":"affine","a":-1,"b":0}}.
pub fn sigma_from_value(v: &Value) -> Result<SigmaFunction> {
    let obj = as_object(v, "")?;
    let basis = match obj.get("basis") {
        Some(Value::String(s)) if s == "countable" => Basis::Countable,
        Some(Value::Array(items)) => Basis::Finite(
            items
                .iter()
                .enumerate()
                .map(|(i, e)| as_str(e, &format!("/basis/{}", i)).map(String::from))
                .collect::<Result<_>>()?,
        ),
        _ => return schema_err("/basis", "expected \"countable\" or an array of names"),
    };
    let mut exceptions = BTreeMap::new();
    if let Some(exc_v) = obj.get("exceptions") {
        for (key, val) in as_object(exc_v, "/exceptions")? {
            let idx: usize = key.parse().map_err(|_| JsonError::Schema {
                path: format!("/exceptions/{}", key),
                message: "key must be a basis index".into(),
            })?;
            exceptions.insert(idx, extint_from_value(val, &format!("/exceptions/{}", key))?);
        }
    }
    let tail_v = obj
        .get("tail")
        .ok_or(())
        .or_else(|_| schema_err("/tail", "missing"))?;
    let tail_obj = as_object(tail_v, "/tail")?;
    let tail = match tail_obj.get("kind").and_then(Value::as_str) {
        Some("const") => {
            let val = tail_obj
                .get("value")
                .ok_or(())
                .or_else(|_| schema_err("/tail/value", "missing"))?;
            Tail::Const(extint_from_value(val, "/tail/value")?)
        }
        Some("affine") => {
            let get = |k: &str| -> Result<i64> {
                tail_obj
                    .get(k)
                    .and_then(Value::as_i64)
                    .ok_or(())
                    .or_else(|_| schema_err(format!("/tail/{}", k), "expected an integer"))
            };
            Tail::Affine {
                a: get("a")?,
                b: get("b")?,
            }
        }
        _ => return schema_err("/tail/kind", "expected \"const\" or \"affine\""),
    };
    Ok(SigmaFunction::new(basis, exceptions, tail)?)
}

pub fn sigma_from_str(s: &str) -> Result<SigmaFunction> {
    sigma_from_value(&serde_json::from_str(s)?)
}

pub fn sigma_to_value(f: &SigmaFunction) -> Value {
    let basis = match f.basis() {
        Basis::Countable => json!("countable"),
        Basis::Finite(names) => json!(names),
    };
    let mut exc = Map::new();
    for (&k, &v) in f.exceptions() {
        exc.insert(k.to_string(), extint_to_value(v));
    }
    let tail = match f.tail() {
        Tail::Const(c) => json!({"kind": "const", "value": extint_to_value(c)}),
        Tail::Affine { a, b } => json!({"kind": "affine", "a": a, "b": b}),
    };
    json!({"basis": basis, "exceptions": Value::Object(exc), "tail": tail})
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presentation_round_trip() {
        let src = r#"{"generators": ["x","y"], "relations": [[{"x":2},{"y":2}]]}"#;
        let p = presentation_from_str(src).unwrap();
        assert_eq!(p.generator_count(), 2);
        assert_eq!(p.relations().len(), 1);
        let v = presentation_to_value(&p);
        let q = presentation_from_value(&v).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn presentation_errors_carry_paths() {
        let bad = r#"{"generators": ["x"], "relations": [[{"z":1},{}]]}"#;
        let err = presentation_from_str(bad).unwrap_err().to_string();
        assert!(err.contains("/relations/0/0/z"), "{}", err);
        let dup = r#"{"generators": ["x","x"]}"#;
        assert!(presentation_from_str(dup)
            .unwrap_err()
            .to_string()
            .contains("/generators"));
    }

    #[test]
    fn graded_round_trip() {
        let src = r#"{"generators": ["x","y"], "relations": [],
                      "degrees": {"x":1, "y":1}}"#;
        let g = graded_from_str(src).unwrap();
        assert_eq!(g.degrees(), &[1, 1]);
        let g2 = graded_from_value(&graded_to_value(&g)).unwrap();
        assert_eq!(g.degrees(), g2.degrees());
        assert_eq!(g.base(), g2.base());
    }

    #[test]
    fn finite_mset_round_trip() {
        let m = presentation_from_str(r#"{"generators": ["x"]}"#).unwrap();
        let src = r#"{"elements": ["a","b"], "action": {"x": [1,1]}}"#;
        let a = finite_mset_from_value(&serde_json::from_str(src).unwrap(), &m).unwrap();
        let v = finite_mset_to_value(&a);
        let b = finite_mset_from_value(&v, &m).unwrap();
        assert_eq!(a.elements(), b.elements());
        assert_eq!(a.action(), b.action());
    }

    #[test]
    fn sigma_round_trip() {
        let src = r#"{"basis": "countable",
                      "exceptions": {"3": -1, "5": "-inf"},
                      "tail": {"kind": "affine", "a": -1, "b": 0}}"#;
        let f = sigma_from_str(src).unwrap();
        assert_eq!(f.eval(3), ExtInt::Int(-1));
        assert_eq!(f.eval(5), ExtInt::NegInf);
        let g = sigma_from_value(&sigma_to_value(&f)).unwrap();
        assert!(crate::free_points::equivalent(&f, &g).unwrap());
    }

    #[test]
    fn sigma_rejects_bad_tails() {
        let bad = r#"{"basis": "countable", "tail": {"kind": "affine", "a": 1, "b": 0}}"#;
        assert!(sigma_from_str(bad).is_err());
    }

    #[test]
    fn emission_is_deterministic() {
        let src = r#"{"generators": ["b","a"], "relations": [[{"a":1},{"b":1}]]}"#;
        let p = presentation_from_str(src).unwrap();
        let s1 = serde_json::to_string(&presentation_to_value(&p)).unwrap();
        let s2 = serde_json::to_string(&presentation_to_value(&p)).unwrap();
        assert_eq!(s1, s2);
    }
}
