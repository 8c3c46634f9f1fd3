//! `KDC1` column container.
//!
//! Layout: the magic `KDC1`, a little-endian `u32` manifest length, the
//! manifest as UTF-8 JSON, then the concatenated little-endian `f64`
//! payloads. Manifest offsets count from the first payload byte.

use matspace_rdf::Iri;
use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

const MAGIC: &[u8; 4] = b"KDC1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainerColumn {
    pub name: String,
    pub concept: Option<Iri>,
    pub unit: Option<Iri>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ColumnContainer {
    pub columns: Vec<ContainerColumn>,
}

impl ColumnContainer {
    pub fn column(&self, name: &str) -> Option<&ContainerColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn manifest(&self) -> ContainerManifest {
        let mut offset = 0u64;
        let columns = self
            .columns
            .iter()
            .map(|c| {
                let m = ManifestColumn {
                    name: c.name.clone(),
                    concept: c.concept.as_ref().map(|i| i.as_str().to_string()),
                    unit: c.unit.as_ref().map(|i| i.as_str().to_string()),
                    length: c.values.len() as u64,
                    dtype: "f64".into(),
                    offset,
                };
                offset += 8 * c.values.len() as u64;
                m
            })
            .collect();
        ContainerManifest { columns }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContainerManifest {
    pub columns: Vec<ManifestColumn>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestColumn {
    pub name: String,
    pub concept: Option<String>,
    pub unit: Option<String>,
    pub length: u64,
    pub dtype: String,
    pub offset: u64,
}

pub fn write_container(container: &ColumnContainer) -> Result<Vec<u8>> {
    for (i, c) in container.columns.iter().enumerate() {
        if container.columns[..i].iter().any(|o| o.name == c.name) {
            return Err(CoreError::Invalid(format!("duplicate column name '{}'", c.name)));
        }
        if c.values.is_empty() {
            return Err(CoreError::Invalid(format!("column '{}' is empty", c.name)));
        }
    }
    let manifest = serde_json::to_vec(&container.manifest())?;
    let payload: usize = container.columns.iter().map(|c| c.values.len() * 8).sum();
    let mut out = Vec::with_capacity(8 + manifest.len() + payload);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
    out.extend_from_slice(&manifest);
    for c in &container.columns {
        for v in &c.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn read_container(bytes: &[u8]) -> Result<ColumnContainer> {
    let bad = |m: &str| CoreError::Parse(format!("container: {m}"));
    if bytes.len() < 8 || &bytes[..4] != MAGIC {
        return Err(bad("missing KDC1 magic"));
    }
    let len = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let manifest_end = 8usize.checked_add(len).filter(|&e| e <= bytes.len()).ok_or_else(|| bad("truncated manifest"))?;
    let manifest: ContainerManifest = serde_json::from_slice(&bytes[8..manifest_end])?;
    let payload = &bytes[manifest_end..];
    let mut columns = Vec::with_capacity(manifest.columns.len());
    for m in manifest.columns {
        if m.dtype != "f64" {
            return Err(bad(&format!("unsupported dtype {}", m.dtype)));
        }
        let start = m.offset as usize;
        let end = start
            .checked_add(8 * m.length as usize)
            .filter(|&e| e <= payload.len())
            .ok_or_else(|| bad(&format!("column {} exceeds payload", m.name)))?;
        let values = payload[start..end]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        columns.push(ContainerColumn {
            name: m.name,
            concept: m.concept.map(Iri::new).transpose()?,
            unit: m.unit.map(Iri::new).transpose()?,
            values,
        });
    }
    Ok(ColumnContainer { columns })
}
