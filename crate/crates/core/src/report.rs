//! Report documents: JSON with every real number written as a decimal
//! string, a schema version and the seed, plus the published schemas.
//!
//! Reals are formatted with the shortest representation that reads back
//! to the same double, so a report pins the exact values computed.
//! Non-finite values are written `"inf"`, `"-inf"` and `"nan"`; negative
//! zero is written as zero.

use serde::Serialize;
use serde_json::{json, Map, Value};
use serde_value::Value as Raw;

use crate::error::{Error, Result};
use crate::scenario::Analysis;

/// Version of the report layout; bumped on incompatible changes.
pub const SCHEMA_VERSION: &str = "1.0.0";

/// Decimal string of a double.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else if x == 0.0 {
        "0.0".into()
    } else {
        ryu::Buffer::new().format_finite(x).to_string()
    }
}

/// Parse a decimal string written by [`format_real`].
pub fn parse_real(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}

fn key_string(k: Raw) -> String {
    match convert(k) {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

fn convert(v: Raw) -> Value {
    match v {
        Raw::Bool(b) => Value::Bool(b),
        Raw::U8(n) => n.into(),
        Raw::U16(n) => n.into(),
        Raw::U32(n) => n.into(),
        Raw::U64(n) => n.into(),
        Raw::I8(n) => n.into(),
        Raw::I16(n) => n.into(),
        Raw::I32(n) => n.into(),
        Raw::I64(n) => n.into(),
        Raw::F32(x) => Value::String(format_real(x as f64)),
        Raw::F64(x) => Value::String(format_real(x)),
        Raw::Char(c) => Value::String(c.to_string()),
        Raw::String(s) => Value::String(s),
        Raw::Unit | Raw::Option(None) => Value::Null,
        Raw::Option(Some(b)) | Raw::Newtype(b) => convert(*b),
        Raw::Seq(items) => Value::Array(items.into_iter().map(convert).collect()),
        Raw::Map(m) => Value::Object(m.into_iter().map(|(k, v)| (key_string(k), convert(v))).collect::<Map<_, _>>()),
        Raw::Bytes(b) => Value::Array(b.into_iter().map(Value::from).collect()),
    }
}

/// Serialize into a JSON value with reals as decimal strings. Object
/// keys come out sorted, which keeps reports diffable.
pub fn to_report_value<T: Serialize>(x: &T) -> Result<Value> {
    let raw = serde_value::to_value(x).map_err(|e| Error::Io(format!("serialization: {e}")))?;
    Ok(convert(raw))
}

/// The common envelope of every report file.
pub fn envelope(analysis: &str, scenario: &str, seed: u64, result: Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "analysis": analysis,
        "scenario": scenario,
        "seed": seed.to_string(),
        "result": result,
    })
}

/// Pretty JSON with a trailing newline; the bytes of a report.
pub fn to_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s.into_bytes()
}

/// Fields every `result` of an analysis carries.
fn result_required(a: Analysis) -> Vec<&'static str> {
    match a {
        Analysis::Classify => vec!["maps", "star_intervals", "counts", "inverse_counts"],
        Analysis::Cycle => vec!["cycle", "order_certificate", "condition", "epsilon"],
        Analysis::ReturnMap => vec!["local", "global"],
        Analysis::Decompose => vec!["status", "pieces", "reduction", "closeness", "epsilon", "unclassified_mass", "overlaps", "warnings"],
        Analysis::Certify => vec!["minimality", "orbit"],
        Analysis::Denjoy => vec!["budget", "in_scope", "epsilon", "intervals"],
        Analysis::Orbit => vec!["forward", "backward"],
    }
}

/// Any JSON value without non-integer numbers.
fn no_float_defs() -> Value {
    json!({
        "decimal": {"type": "string", "pattern": "^(-?inf|nan|-?[0-9]+(\\.[0-9]+)?([eE][-+]?[0-9]+)?)$"},
        "value": {
            "anyOf": [
                {"type": ["string", "boolean", "null", "integer"]},
                {"type": "array", "items": {"$ref": "#/$defs/value"}},
                {"type": "object", "additionalProperties": {"$ref": "#/$defs/value"}}
            ]
        }
    })
}

/// JSON schema of the report file of `a`.
pub fn report_schema(a: Analysis) -> Value {
    let required = result_required(a);
    let props: Map<String, Value> = required.iter().map(|k| (k.to_string(), json!({"$ref": "#/$defs/value"}))).collect();
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "$id": format!("circle-ifs/{}/{}", SCHEMA_VERSION, a.file_name()),
        "title": format!("{} report", a.id()),
        "type": "object",
        "required": ["schema_version", "analysis", "scenario", "seed", "result"],
        "additionalProperties": false,
        "properties": {
            "schema_version": {"const": SCHEMA_VERSION},
            "analysis": {"const": a.id()},
            "scenario": {"type": "string"},
            "seed": {"type": "string", "pattern": "^[0-9]+$"},
            "result": {
                "type": "object",
                "required": required,
                "properties": props,
                "additionalProperties": {"$ref": "#/$defs/value"}
            }
        },
        "$defs": no_float_defs()
    })
}

/// JSON schema of `summary.json`.
pub fn summary_schema() -> Value {
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "$id": format!("circle-ifs/{}/summary.json", SCHEMA_VERSION),
        "title": "pipeline summary",
        "type": "object",
        "required": ["schema_version", "analysis", "scenario", "seed", "result"],
        "additionalProperties": false,
        "properties": {
            "schema_version": {"const": SCHEMA_VERSION},
            "analysis": {"const": "summary"},
            "scenario": {"type": "string"},
            "seed": {"type": "string", "pattern": "^[0-9]+$"},
            "result": {
                "type": "object",
                "required": ["exit_code", "analyses", "error", "headline", "scenario_echo"],
                "properties": {
                    "exit_code": {"enum": [0, 1, 2, 3]},
                    "analyses": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["analysis", "status", "file"],
                            "properties": {
                                "analysis": {"enum": Analysis::ALL.map(Analysis::id)},
                                "status": {"enum": ["ok", "failed", "skipped"]},
                                "file": {"type": ["string", "null"]}
                            }
                        }
                    },
                    "error": {"type": ["object", "null"]},
                    "headline": {"type": "object", "additionalProperties": {"$ref": "#/$defs/value"}},
                    "scenario_echo": {"$ref": "#/$defs/value"}
                },
                "additionalProperties": {"$ref": "#/$defs/value"}
            }
        },
        "$defs": no_float_defs()
    })
}

/// Every published schema by file name.
pub fn all_schemas() -> Value {
    let mut m = Map::new();
    for a in Analysis::ALL {
        m.insert(a.file_name(), report_schema(a));
    }
    m.insert("summary.json".into(), summary_schema());
    Value::Object(m)
}
