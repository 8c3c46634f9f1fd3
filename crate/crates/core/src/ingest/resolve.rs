use matspace_rdf::{Iri, Literal};
use serde::{Deserialize, Serialize};

use super::{MappingFile, RawRecord};
use crate::units::UnitTable;
use crate::vocabulary::mint_iri;
use crate::{CoreError, Result};

/// Typed metadata value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetaValue {
    Number { number: f64, integer: bool },
    Text(String),
}

impl MetaValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            MetaValue::Number { number, .. } => Some(*number),
            MetaValue::Text(_) => None,
        }
    }

    /// Literal form: `xsd:integer` for integers without a unit, `xsd:double`
    /// for every other number, `xsd:string` for text.
    pub fn literal(&self, has_unit: bool) -> Literal {
        match self {
            MetaValue::Number { number, integer: true } if !has_unit && number.abs() < 9.0e15 => {
                Literal::integer(*number as i64)
            }
            MetaValue::Number { number, .. } => Literal::double(*number),
            MetaValue::Text(t) => Literal::string(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetadataRecord {
    pub key: String,
    pub concept: Iri,
    pub value: MetaValue,
    /// Raw value text, used for term minting.
    pub text: String,
    pub unit: Option<Iri>,
    pub original_unit: Option<String>,
    pub term_value: Option<Iri>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedColumn {
    pub name: String,
    pub concept: Option<Iri>,
    pub unit: Option<Iri>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub records: Vec<MetadataRecord>,
    pub columns: Vec<ResolvedColumn>,
    /// Keys with a non-empty value and no mapping entry, columns included.
    pub unmapped: Vec<String>,
}

impl Resolution {
    pub fn matched_keys(&self) -> Vec<String> {
        self.records.iter().map(|r| r.key.clone()).collect()
    }

    pub fn matched_columns(&self) -> Vec<String> {
        self.columns.iter().filter(|c| c.concept.is_some()).map(|c| c.name.clone()).collect()
    }
}

/// Parses a plain decimal number with the given decimal separator.
/// Returns the value and whether the text was an integer.
pub fn parse_number(text: &str, decimal: char) -> Option<(f64, bool)> {
    let t = text.trim();
    if decimal != '.' && t.contains('.') {
        return None;
    }
    let normalized: String = t.chars().map(|c| if c == decimal { '.' } else { c }).collect();
    let body = normalized.strip_prefix(['+', '-']).unwrap_or(&normalized);
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], Some(&body[i + 1..])),
        None => (body, None),
    };
    let (int, frac) = match mantissa.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (mantissa, None),
    };
    let digits = |s: &str| s.chars().all(|c| c.is_ascii_digit());
    if !digits(int) || !frac.is_none_or(digits) || (int.is_empty() && frac.is_none_or(str::is_empty)) {
        return None;
    }
    if let Some(e) = exponent {
        let e = e.strip_prefix(['+', '-']).unwrap_or(e);
        if e.is_empty() || !digits(e) {
            return None;
        }
    }
    let value: f64 = normalized.parse().ok()?;
    value.is_finite().then_some((value, frac.is_none() && exponent.is_none()))
}

/// Maps raw keys to concepts, types values and resolves unit symbols.
pub fn resolve(raw: &RawRecord, mapping: &MappingFile, units: &UnitTable, strict: bool, decimal: char) -> Result<Resolution> {
    let mut out = Resolution::default();
    for row in &raw.metadata {
        if row.value.trim().is_empty() {
            continue;
        }
        let Some(entry) = mapping.get(&row.key) else {
            out.unmapped.push(row.key.clone());
            continue;
        };
        let unit = match &row.unit {
            Some(symbol) => Some(units.by_symbol(symbol)?.iri.clone()),
            None => None,
        };
        let value = match parse_number(&row.value, decimal) {
            Some((number, integer)) => MetaValue::Number { number, integer },
            None => MetaValue::Text(row.value.clone()),
        };
        let term_value = match &entry.annotation {
            Some(ns) => match mint_iri(ns, &row.value) {
                Ok(iri) => Some(iri),
                Err(CoreError::EmptySlug(_)) => None,
                Err(e) => return Err(e),
            },
            None => None,
        };
        out.records.push(MetadataRecord {
            key: row.key.clone(),
            concept: entry.iri.clone(),
            value,
            text: row.value.clone(),
            unit,
            original_unit: row.unit.clone(),
            term_value,
        });
    }
    for col in &raw.columns {
        let unit = match &col.unit {
            Some(symbol) => Some(units.by_symbol(symbol)?.iri.clone()),
            None => None,
        };
        let concept = mapping.get(&col.name).map(|e| e.iri.clone());
        if concept.is_none() {
            out.unmapped.push(col.name.clone());
        }
        out.columns.push(ResolvedColumn {
            name: col.name.clone(),
            concept,
            unit,
            values: col.values.clone(),
        });
    }
    if strict && !out.unmapped.is_empty() {
        return Err(CoreError::Unmapped(out.unmapped));
    }
    Ok(out)
}
