use std::collections::BTreeMap;
use std::fmt;

use matspace_rdf::Iri;
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::vocabulary::Namespace;
use crate::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingEntry {
    pub key: String,
    pub iri: Iri,
    /// Namespace that controlled values are minted into.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<Namespace>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MappingFormat {
    /// `key<TAB>iri` lines.
    TwoColumn,
    /// `{"<key>": {"key": …, "iri": …, "annotation": …}}`.
    Structured,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingFile {
    pub format: MappingFormat,
    pub entries: BTreeMap<String, MappingEntry>,
}

impl MappingFile {
    pub fn get(&self, key: &str) -> Option<&MappingEntry> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Deserialize)]
struct StructuredEntry {
    key: Option<String>,
    iri: String,
    #[serde(default)]
    annotation: Option<String>,
}

/// Object entries in document order, so duplicate keys can be reported
/// instead of silently overwritten.
struct OrderedEntries(Vec<(String, StructuredEntry)>);

impl<'de> Deserialize<'de> for OrderedEntries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = OrderedEntries;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a JSON object of mapping entries")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<OrderedEntries, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, StructuredEntry>()? {
                    out.push((k, v));
                }
                Ok(OrderedEntries(out))
            }
        }
        d.deserialize_map(V)
    }
}

pub fn parse_mapping(bytes: &[u8], format: MappingFormat) -> Result<MappingFile> {
    let text = std::str::from_utf8(bytes).map_err(|e| CoreError::Parse(format!("mapping is not UTF-8: {e}")))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut entries = BTreeMap::new();
    let mut add = |entry: MappingEntry| -> Result<()> {
        if entry.key.is_empty() {
            return Err(CoreError::Parse("mapping entry with an empty key".into()));
        }
        if entries.contains_key(&entry.key) {
            return Err(CoreError::Parse(format!("duplicate mapping key '{}'", entry.key)));
        }
        entries.insert(entry.key.clone(), entry);
        Ok(())
    };
    match format {
        MappingFormat::Structured => {
            let OrderedEntries(raw) =
                serde_json::from_str(text).map_err(|e| CoreError::Parse(format!("malformed mapping JSON: {e}")))?;
            for (outer, e) in raw {
                let key = e.key.unwrap_or_else(|| outer.clone());
                if key != outer {
                    return Err(CoreError::Parse(format!("mapping entry '{outer}' declares key '{key}'")));
                }
                let annotation = match e.annotation.as_deref().map(str::trim) {
                    None | Some("") => None,
                    Some(prefix) => Some(Namespace::from_prefix(prefix)?),
                };
                add(MappingEntry {
                    key,
                    iri: Iri::new(e.iri.trim())?,
                    annotation,
                })?;
            }
        }
        MappingFormat::TwoColumn => {
            for (n, line) in text.lines().enumerate() {
                let line = line.trim_end_matches('\r');
                if line.trim().is_empty() {
                    continue;
                }
                let (key, iri) = line
                    .split_once('\t')
                    .ok_or_else(|| CoreError::Parse(format!("mapping line {}: expected key<TAB>iri", n + 1)))?;
                if iri.contains('\t') {
                    return Err(CoreError::Parse(format!("mapping line {}: more than two columns", n + 1)));
                }
                add(MappingEntry {
                    key: key.trim().to_string(),
                    iri: Iri::new(iri.trim())?,
                    annotation: None,
                })?;
            }
        }
    }
    Ok(MappingFile { format, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structured_with_annotation() {
        let json = r#"{
          "Prüfinstitut": {"key": "Prüfinstitut", "iri": "https://w3id.org/steel/ProcessOntology/TestingFacility", "annotation": ""},
          "Werkstoff": {"key": "Werkstoff", "iri": "https://w3id.org/steel/ProcessOntology/Material", "annotation": "https://w3id.org/steel/ProcessOntology"}
        }"#;
        let m = parse_mapping(json.as_bytes(), MappingFormat::Structured).unwrap();
        assert_eq!(m.len(), 2);
        let w = m.get("Werkstoff").unwrap();
        assert_eq!(w.iri.as_str(), "https://w3id.org/steel/ProcessOntology/Material");
        assert_eq!(w.annotation.as_ref().unwrap().as_str(), "https://w3id.org/steel/ProcessOntology/");
        assert!(m.get("Prüfinstitut").unwrap().annotation.is_none());
    }

    #[test]
    fn two_column() {
        let m = parse_mapping(b"Werkstoff\thttps://w3id.org/steel/ProcessOntology/Material\r\n", MappingFormat::TwoColumn).unwrap();
        assert!(m.get("Werkstoff").unwrap().annotation.is_none());
    }

    #[test]
    fn duplicates_and_garbage() {
        let dup = r#"{"ID": {"key": "ID", "iri": "e:a"}, "ID": {"key": "ID", "iri": "e:b"}}"#;
        assert!(parse_mapping(dup.as_bytes(), MappingFormat::Structured).is_err());
        assert!(parse_mapping(b"ID\te:a\nID\te:b\n", MappingFormat::TwoColumn).is_err());
        assert!(parse_mapping(b"{not json", MappingFormat::Structured).is_err());
        assert!(parse_mapping(b"ID\tnot an iri", MappingFormat::TwoColumn).is_err());
        assert!(parse_mapping(b"just-one-column", MappingFormat::TwoColumn).is_err());
    }
}
