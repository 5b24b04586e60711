//! Parameter values in JSON documents (graph files and bundle configs).
//!
//! Integers stay integers (`2`), floats keep a fraction or exponent (`2.0`),
//! arrays must hold numbers only. Objects reject duplicate keys.

use std::fmt;

use blockflow_core::{ParamValue, Parameters};
use serde::de::{self, Deserialize, Deserializer, MapAccess, Visitor};
use serde::ser::{Serialize, SerializeMap, Serializer};
use serde_json::{Number, Value};

pub fn param_from_json(value: &Value) -> Result<ParamValue, String> {
    match value {
        Value::Bool(b) => Ok(ParamValue::Bool(*b)),
        Value::String(s) => Ok(ParamValue::Str(s.clone())),
        Value::Number(n) => number(n),
        Value::Array(items) => items
            .iter()
            .map(|item| match item {
                Value::Number(n) => n.as_f64().ok_or_else(|| format!("number {n} out of range")),
                other => Err(format!("vector elements must be numbers, found {}", kind(other))),
            })
            .collect::<Result<Vec<f64>, _>>()
            .map(ParamValue::FloatVec),
        other => Err(format!("unsupported parameter value: {}", kind(other))),
    }
}

fn number(n: &Number) -> Result<ParamValue, String> {
    if let Some(i) = n.as_i64() {
        return Ok(ParamValue::Int(i));
    }
    if n.is_u64() {
        return Err(format!("integer {n} out of range"));
    }
    n.as_f64()
        .map(ParamValue::Float)
        .ok_or_else(|| format!("number {n} out of range"))
}

fn kind(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "bool",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

pub fn param_to_json(value: &ParamValue) -> Result<Value, String> {
    let float = |x: f64| {
        Number::from_f64(x)
            .map(Value::Number)
            .ok_or_else(|| format!("non-finite value {x} cannot be written as JSON"))
    };
    Ok(match value {
        ParamValue::Float(x) => float(*x)?,
        ParamValue::Int(i) => Value::from(*i),
        ParamValue::Bool(b) => Value::Bool(*b),
        ParamValue::Str(s) => Value::String(s.clone()),
        ParamValue::FloatVec(v) => Value::Array(v.iter().map(|x| float(*x)).collect::<Result<_, _>>()?),
    })
}

/// Parses the text of a `--set` value: JSON when it parses, else a string.
pub fn param_from_text(text: &str) -> Result<ParamValue, String> {
    match serde_json::from_str::<Value>(text) {
        Ok(value) => param_from_json(&value),
        Err(_) => Ok(ParamValue::Str(text.to_owned())),
    }
}

/// A JSON object of parameters that rejects duplicate keys while parsing
/// and keeps document order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamObject(pub Vec<(String, ParamValue)>);

impl ParamObject {
    pub fn to_parameters(&self) -> Parameters {
        self.0.iter().cloned().collect()
    }

    pub fn from_parameters(params: &Parameters) -> Self {
        ParamObject(params.iter().map(|(k, v)| (k.to_owned(), v.clone())).collect())
    }
}

impl<'de> Deserialize<'de> for ParamObject {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ObjectVisitor;

        impl<'de> Visitor<'de> for ObjectVisitor {
            type Value = ParamObject;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object of parameter values")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<ParamObject, A::Error> {
                let mut entries: Vec<(String, ParamValue)> = Vec::new();
                while let Some(key) = map.next_key::<String>()? {
                    let raw: Value = map.next_value()?;
                    if entries.iter().any(|(k, _)| *k == key) {
                        return Err(de::Error::custom(format!("duplicate parameter '{key}'")));
                    }
                    let value = param_from_json(&raw)
                        .map_err(|e| de::Error::custom(format!("parameter '{key}': {e}")))?;
                    entries.push((key, value));
                }
                Ok(ParamObject(entries))
            }
        }

        deserializer.deserialize_map(ObjectVisitor)
    }
}

impl Serialize for ParamObject {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            let value = param_to_json(v).map_err(serde::ser::Error::custom)?;
            map.serialize_entry(k, &value)?;
        }
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_survive_a_round_trip() {
        let obj: ParamObject =
            serde_json::from_str(r#"{"k": 2, "g": 2.0, "on": true, "name": "x", "v": [1, 2.5]}"#).unwrap();
        let p = obj.to_parameters();
        assert_eq!(p.get("k"), Some(&ParamValue::Int(2)));
        assert_eq!(p.get("g"), Some(&ParamValue::Float(2.0)));
        assert_eq!(p.get("v"), Some(&ParamValue::FloatVec(vec![1.0, 2.5])));
        let text = serde_json::to_string(&obj).unwrap();
        assert_eq!(text, r#"{"k":2,"g":2.0,"on":true,"name":"x","v":[1.0,2.5]}"#);
    }

    #[test]
    fn duplicates_and_nesting_are_rejected() {
        let err = serde_json::from_str::<ParamObject>("{\n\"k\": 1,\n\"k\": 2}").unwrap_err();
        assert!(err.to_string().contains("duplicate parameter 'k'"), "{err}");
        assert_eq!(err.line(), 3);
        assert!(serde_json::from_str::<ParamObject>(r#"{"k": {"a": 1}}"#).is_err());
        assert!(serde_json::from_str::<ParamObject>(r#"{"k": [1, "a"]}"#).is_err());
        assert!(serde_json::from_str::<ParamObject>(r#"{"k": null}"#).is_err());
    }

    #[test]
    fn set_values() {
        assert_eq!(param_from_text("12.5").unwrap(), ParamValue::Float(12.5));
        assert_eq!(param_from_text("[1,2]").unwrap(), ParamValue::FloatVec(vec![1.0, 2.0]));
        assert_eq!(param_from_text("out.csv").unwrap(), ParamValue::Str("out.csv".into()));
        assert!(param_to_json(&ParamValue::Float(f64::NAN)).is_err());
    }
}
