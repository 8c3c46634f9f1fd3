//! Form schemas per k-type and their conversion to metadatum nodes.

use std::collections::{BTreeMap, BTreeSet};

use matspace_rdf::Iri;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ingest::{parse_number, MetaValue, MetadataRecord};
use crate::units::UnitTable;
use crate::vocabulary::Registry;
use crate::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Text,
    Number,
    Quantity,
    TermRef,
    Boolean,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormField {
    pub key: String,
    pub label: String,
    pub concept: Iri,
    pub kind: FieldKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<Iri>,
    #[serde(default)]
    pub required: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub options: Vec<Iri>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormSchema {
    pub ktype: String,
    /// Assigned on attach; 1 for the first schema of a k-type.
    #[serde(default)]
    pub version: u32,
    pub fields: Vec<FormField>,
}

impl FormSchema {
    pub fn field(&self, key: &str) -> Option<&FormField> {
        self.fields.iter().find(|f| f.key == key)
    }

    /// Structural checks made when a schema is attached.
    pub fn check(&self, registry: &Registry, units: &UnitTable) -> Result<()> {
        let mut keys = BTreeSet::new();
        for f in &self.fields {
            if f.key.is_empty() {
                return Err(CoreError::Invalid("form field with empty key".into()));
            }
            if !keys.insert(&f.key) {
                return Err(CoreError::Invalid(format!("duplicate form field '{}'", f.key)));
            }
            if !registry.contains(&f.concept) {
                return Err(CoreError::Invalid(format!("field '{}' uses unregistered concept <{}>", f.key, f.concept)));
            }
            match (f.kind, &f.unit) {
                (FieldKind::Quantity, None) => {
                    return Err(CoreError::Invalid(format!("quantity field '{}' needs a unit", f.key)))
                }
                (FieldKind::Quantity, Some(u)) if !units.contains_iri(u) => {
                    return Err(CoreError::UnknownUnit(u.to_string()))
                }
                (FieldKind::Quantity, Some(_)) => {}
                (_, Some(_)) => {
                    return Err(CoreError::Invalid(format!("only quantity fields carry a unit ('{}')", f.key)))
                }
                (_, None) => {}
            }
            if f.kind == FieldKind::TermRef && f.options.is_empty() {
                return Err(CoreError::Invalid(format!("term-ref field '{}' has no options", f.key)));
            }
            if let Some(o) = f.options.iter().find(|o| !registry.contains(o)) {
                return Err(CoreError::Invalid(format!("option <{o}> of '{}' is not registered", f.key)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub key: String,
    pub message: String,
}

fn violation(key: &str, message: impl Into<String>) -> Violation {
    Violation { key: key.into(), message: message.into() }
}

fn as_number(v: &Value) -> Option<(f64, bool)> {
    match v {
        Value::Number(n) => Some((n.as_f64()?, n.is_i64() || n.is_u64())),
        Value::String(s) => parse_number(s, '.'),
        _ => None,
    }
}

fn is_blank(v: &Value) -> bool {
    v.is_null() || v.as_str().is_some_and(|s| s.trim().is_empty())
}

/// Every problem with a submission; empty means valid.
pub fn validate(schema: &FormSchema, values: &BTreeMap<String, Value>) -> Vec<Violation> {
    let mut out = Vec::new();
    for key in values.keys() {
        if schema.field(key).is_none() {
            out.push(violation(key, "not a field of this form"));
        }
    }
    for f in &schema.fields {
        let Some(v) = values.get(&f.key).filter(|v| !is_blank(v)) else {
            if f.required {
                out.push(violation(&f.key, "required field is missing"));
            }
            continue;
        };
        let problem = match f.kind {
            FieldKind::Text => (!(v.is_string() || v.is_number())).then_some("expected text"),
            FieldKind::Number | FieldKind::Quantity => as_number(v).is_none().then_some("expected a number"),
            FieldKind::Boolean => (!v.is_boolean()).then_some("expected true or false"),
            FieldKind::TermRef => match v.as_str() {
                Some(s) if f.options.iter().any(|o| o.as_str() == s) => None,
                _ => Some("value is not one of the allowed options"),
            },
        };
        if let Some(p) = problem {
            out.push(violation(&f.key, p));
        }
    }
    out
}

/// Metadata records for a valid submission, in schema field order.
pub fn records(schema: &FormSchema, values: &BTreeMap<String, Value>) -> Result<Vec<MetadataRecord>> {
    let violations = validate(schema, values);
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(|v| format!("{}: {}", v.key, v.message)).collect();
        return Err(CoreError::Invalid(format!("form validation failed: {}", text.join("; "))));
    }
    let mut out = Vec::new();
    for f in &schema.fields {
        let Some(v) = values.get(&f.key).filter(|v| !is_blank(v)) else { continue };
        let text = match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        let (value, term_value) = match f.kind {
            FieldKind::Number | FieldKind::Quantity => {
                let (number, integer) = as_number(v).expect("validated");
                (MetaValue::Number { number, integer }, None)
            }
            FieldKind::TermRef => (MetaValue::Text(text.clone()), Some(Iri::new(text.clone())?)),
            FieldKind::Text | FieldKind::Boolean => (MetaValue::Text(text.clone()), None),
        };
        out.push(MetadataRecord {
            key: f.key.clone(),
            concept: f.concept.clone(),
            value,
            text,
            unit: f.unit.clone(),
            original_unit: None,
            term_value,
        });
    }
    Ok(out)
}
