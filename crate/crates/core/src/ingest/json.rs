use std::str::FromStr;

use jsonpath_rust::JsonPath;
use serde_json::Value;

use super::{JsonPaths, RawColumn, RawMeta, RawRecord};
use crate::{CoreError, Result};

fn select(doc: &Value, path: &str) -> Result<Vec<Value>> {
    let compiled = JsonPath::<Value>::from_str(path).map_err(|e| CoreError::Invalid(format!("bad JSONPath '{path}': {e}")))?;
    Ok(compiled.find_slice_ptr(doc).into_iter().map(|p| (*p).clone()).collect())
}

/// Metadata paths must select exactly one scalar; column paths one numeric
/// array or a list of numbers.
pub fn parse_json(bytes: &[u8], paths: &JsonPaths) -> Result<RawRecord> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| CoreError::Parse(format!("malformed JSON: {e}")))?;
    let mut record = RawRecord::default();
    for m in &paths.metadata {
        let hits = select(&doc, &m.path)?;
        let value = match hits.as_slice() {
            [] => return Err(CoreError::Parse(format!("path {} selects nothing", m.path))),
            [single] => single,
            _ => return Err(CoreError::Parse(format!("path {} selects {} nodes, expected one", m.path, hits.len()))),
        };
        let text = match value {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            Value::Bool(b) => b.to_string(),
            _ => return Err(CoreError::Parse(format!("path {} does not select a scalar", m.path))),
        };
        record.metadata.push(RawMeta {
            key: m.key.clone(),
            value: text,
            unit: m.unit.clone(),
        });
    }
    for c in &paths.columns {
        let hits = select(&doc, &c.path)?;
        let items: Vec<&Value> = match hits.as_slice() {
            [] => return Err(CoreError::Parse(format!("path {} selects nothing", c.path))),
            [Value::Array(items)] => items.iter().collect(),
            many => many.iter().collect(),
        };
        let values = items
            .into_iter()
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| CoreError::Parse(format!("non-numeric element {v} under {}", c.path)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(CoreError::Parse(format!("column {} is empty", c.key)));
        }
        record.columns.push(RawColumn {
            name: c.key.clone(),
            unit: c.unit.clone(),
            values,
        });
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::JsonMeta;

    fn meta(key: &str, path: &str) -> JsonMeta {
        JsonMeta {
            key: key.into(),
            path: path.into(),
            unit: None,
        }
    }

    #[test]
    fn scalar_and_array() {
        let doc = br#"{"meta":{"material":"CuSn12","hb":[1.0,2.0]}}"#;
        let paths = JsonPaths {
            metadata: vec![meta("material", "$.meta.material")],
            columns: vec![meta("hb", "$.meta.hb")],
        };
        let r = parse_json(doc, &paths).unwrap();
        assert_eq!(r.metadata[0].key, "material");
        assert_eq!(r.metadata[0].value, "CuSn12");
        assert_eq!(r.columns[0].values, vec![1.0, 2.0]);
    }

    #[test]
    fn failures() {
        let doc = br#"{"a":[1,"x"],"b":[{"v":1},{"v":2}]}"#;
        let none = JsonPaths { metadata: vec![meta("m", "$.missing")], columns: vec![] };
        assert!(parse_json(doc, &none).is_err());
        let many = JsonPaths { metadata: vec![meta("m", "$.b[*].v")], columns: vec![] };
        assert!(parse_json(doc, &many).is_err());
        let bad = JsonPaths { metadata: vec![], columns: vec![meta("a", "$.a")] };
        assert!(parse_json(doc, &bad).is_err());
        let spread = JsonPaths { metadata: vec![], columns: vec![meta("v", "$.b[*].v")] };
        assert_eq!(parse_json(doc, &spread).unwrap().columns[0].values, vec![1.0, 2.0]);
        assert!(parse_json(b"{", &spread).is_err());
    }
}
