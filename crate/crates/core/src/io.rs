//! Moment table JSON, versioned by a `schema` field.
//!
//! ```json
//! {"schema":"momentdet/1","dimension":1,"max_order":2,"exact":true,
//!  "entries":[{"alpha":[0],"value":[1,1]},{"alpha":[1],"value":[0,1]},{"alpha":[2],"value":[1,1]}]}
//! ```
//!
//! Exact tables carry `[num, den]` pairs. Float tables carry decimal strings
//! with enough digits to round-trip at `precision_bits`.

use serde_json::{json, Map, Value};

use crate::arith::Real;
use crate::error::{Error, Result};
use crate::measures::spec::{parse_json_text, rational_from_json, rational_to_json};
use crate::measures::{MomentSequence, MomentTable};
use crate::multi_index::{MonomialBasis, MultiIndex};

pub const SCHEMA: &str = "momentdet/1";

pub fn moments_to_value(s: &MomentSequence) -> Value {
    let entries: Vec<Value> = s
        .basis()
        .list
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let value = match &s.table {
                MomentTable::Exact(v) => rational_to_json(&v[i]),
                MomentTable::Float(v) => Value::String(v[i].to_decimal_string()),
            };
            json!({"alpha": a.0, "value": value})
        })
        .collect();
    let mut obj = Map::new();
    obj.insert("schema".into(), json!(SCHEMA));
    obj.insert("dimension".into(), json!(s.dim()));
    obj.insert("max_order".into(), json!(s.max_order()));
    obj.insert("exact".into(), json!(s.is_exact()));
    if !s.is_exact() {
        obj.insert("precision_bits".into(), json!(s.bits()));
    }
    obj.insert("provenance".into(), json!(s.provenance));
    obj.insert("entries".into(), Value::Array(entries));
    Value::Object(obj)
}

pub fn write_moments_json(s: &MomentSequence) -> String {
    serde_json::to_string_pretty(&moments_to_value(s)).expect("plain JSON")
}

/// Parses a moments document; `bits` is the width for float tables that do
/// not declare `precision_bits`.
pub fn parse_moments_json(text: &str, bits: usize) -> Result<MomentSequence> {
    moments_from_value(&parse_json_text(text)?, bits)
}

fn uint(obj: &Map<String, Value>, key: &str, cap: u64) -> Result<usize> {
    obj.get(key)
        .ok_or_else(|| Error::Schema(format!("missing field {key:?}")))?
        .as_u64()
        .filter(|&v| v <= cap)
        .map(|v| v as usize)
        .ok_or_else(|| Error::Schema(format!("{key} must be an integer in 0..={cap}")))
}

pub fn moments_from_value(v: &Value, bits: usize) -> Result<MomentSequence> {
    let obj = v.as_object().ok_or_else(|| Error::Schema("moments document must be an object".into()))?;
    match obj.get("schema") {
        None => {}
        Some(Value::String(s)) if s == SCHEMA => {}
        Some(other) => return Err(Error::Schema(format!("unsupported schema {other}"))),
    }
    let dim = uint(obj, "dimension", 64)?;
    if dim == 0 {
        return Err(Error::Schema("dimension must be positive".into()));
    }
    let n = uint(obj, "max_order", 100_000)?;
    let basis = MonomialBasis::try_new(dim, n, 2_000_000)
        .ok_or_else(|| Error::Schema(format!("a table of dimension {dim} and order {n} is too large")))?;
    let exact = match obj.get("exact") {
        None => true,
        Some(Value::Bool(b)) => *b,
        Some(_) => return Err(Error::Schema("exact must be a boolean".into())),
    };
    let bits = match obj.get("precision_bits") {
        None | Some(Value::Null) => bits,
        Some(_) => uint(obj, "precision_bits", 1 << 16)?.max(16),
    };
    let entries = obj
        .get("entries")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Schema("entries must be an array".into()))?;
    let mut slots: Vec<Option<&Value>> = vec![None; basis.len()];
    for (k, e) in entries.iter().enumerate() {
        let e = e.as_object().ok_or_else(|| Error::Schema(format!("entry {k} must be an object")))?;
        let alpha = e
            .get("alpha")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Schema(format!("entry {k}: alpha must be an array")))?
            .iter()
            .map(|x| x.as_u64().filter(|&x| x <= u32::MAX as u64).map(|x| x as u32))
            .collect::<Option<Vec<u32>>>()
            .ok_or_else(|| Error::Schema(format!("entry {k}: alpha must hold non-negative integers")))?;
        if alpha.len() != dim {
            return Err(Error::Schema(format!("entry {k}: alpha has {} components, expected {dim}", alpha.len())));
        }
        let a = MultiIndex(alpha);
        let i = basis
            .index_of(&a)
            .ok_or_else(|| Error::Schema(format!("entry {k}: alpha {:?} exceeds max_order {n}", a.0)))?;
        if slots[i].is_some() {
            return Err(Error::Schema(format!("entry {k}: duplicate alpha {:?}", a.0)));
        }
        slots[i] = Some(e.get("value").ok_or_else(|| Error::Schema(format!("entry {k}: missing value")))?);
    }
    let values = slots
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::Schema(format!("missing entry for alpha {:?}", basis.list[i].0))))
        .collect::<Result<Vec<&Value>>>()?;
    let provenance = obj.get("provenance").and_then(Value::as_str).unwrap_or("supplied").to_string();
    if exact {
        let v = values
            .iter()
            .enumerate()
            .map(|(i, v)| rational_from_json(v, &format!("moment {:?}", basis.list[i].0)))
            .collect::<Result<Vec<_>>>()?;
        MomentSequence::new_exact(dim, n, v, provenance)
    } else {
        let v = values
            .iter()
            .enumerate()
            .map(|(i, v)| float_from_json(v, bits).ok_or_else(|| Error::Schema(format!("moment {:?}: unreadable value", basis.list[i].0))))
            .collect::<Result<Vec<_>>>()?;
        MomentSequence::new_float(dim, n, v, provenance)
    }
}

fn float_from_json(v: &Value, bits: usize) -> Option<Real> {
    match v {
        Value::String(s) => Real::parse_decimal(s, bits),
        Value::Number(x) => Real::parse_decimal(&x.to_string(), bits),
        Value::Array(_) => rational_from_json(v, "").ok().map(|r| Real::from_rational(&r, bits)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{compute_moments, parse_measure_spec};
    use crate::moment_core::PrecisionPolicy;

    #[test]
    fn exact_round_trip() {
        let spec = parse_measure_spec(r#"{"kind":"discrete","atoms":[[["1/3",2],"1/2"],[[-1,0],"1/2"]]}"#).unwrap();
        let s = compute_moments(&spec, 6, &PrecisionPolicy::default()).unwrap();
        let back = parse_moments_json(&write_moments_json(&s), 256).unwrap();
        assert_eq!(back, s);
        assert!(back.is_exact());
    }

    #[test]
    fn float_round_trip() {
        let spec = parse_measure_spec(r#"{"kind":"catalog","catalog_id":"stieltjes_family","parameters":{"epsilon":"1/2"}}"#).unwrap();
        let s = compute_moments(&spec, 6, &PrecisionPolicy::default()).unwrap();
        assert!(!s.is_exact());
        let back = parse_moments_json(&write_moments_json(&s), 64).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(parse_moments_json("{\"dimension\":1,", 64), Err(Error::Parse { .. })));
        let missing = r#"{"dimension":1,"max_order":1,"entries":[{"alpha":[0],"value":1}]}"#;
        assert!(matches!(parse_moments_json(missing, 64), Err(Error::Schema(_))));
        let dup = r#"{"dimension":1,"max_order":0,"entries":[{"alpha":[0],"value":1},{"alpha":[0],"value":1}]}"#;
        assert!(matches!(parse_moments_json(dup, 64), Err(Error::Schema(_))));
        let bad = r#"{"schema":"other/2","dimension":1,"max_order":0,"entries":[]}"#;
        assert!(matches!(parse_moments_json(bad, 64), Err(Error::Schema(_))));
        let ok = r#"{"dimension":1,"max_order":1,"entries":[{"alpha":[1],"value":"0"},{"alpha":[0],"value":"1/1"}]}"#;
        assert_eq!(parse_moments_json(ok, 64).unwrap().max_order(), 1);
    }
}
