//! Pull-only connectors to CKAN-shaped catalogs. Datasets are referenced by
//! URL; resource bytes are never fetched.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::knowledge::checksum;
use crate::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectorSpec {
    pub id: String,
    /// `http(s)://` catalog URL or a local file path.
    pub endpoint: String,
    #[serde(default = "default_ktype")]
    pub ktype: String,
    /// Poll interval in seconds; 0 means manual sync only.
    #[serde(default)]
    pub interval: u64,
}

fn default_ktype() -> String {
    "dataset".into()
}

impl ConnectorSpec {
    pub fn check(&self) -> Result<()> {
        if self.id.is_empty() || !self.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(CoreError::Invalid(format!("connector id '{}' must be a slug", self.id)));
        }
        if self.endpoint.trim().is_empty() {
            return Err(CoreError::Invalid("connector endpoint is empty".into()));
        }
        Ok(())
    }

    /// Catalog bytes from the endpoint.
    pub fn fetch(&self) -> Result<Vec<u8>> {
        if self.endpoint.starts_with("http://") || self.endpoint.starts_with("https://") {
            let resp = ureq::get(&self.endpoint).call().map_err(|e| CoreError::Fetch(e.to_string()))?;
            let mut buf = Vec::new();
            std::io::Read::read_to_end(&mut resp.into_reader(), &mut buf).map_err(|e| CoreError::Fetch(e.to_string()))?;
            Ok(buf)
        } else {
            let path = self.endpoint.strip_prefix("file://").unwrap_or(&self.endpoint);
            std::fs::read(Path::new(path)).map_err(|e| CoreError::Fetch(format!("{path}: {e}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resource {
    pub url: String,
    #[serde(default)]
    pub format: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalDataset {
    pub id: String,
    pub title: String,
    pub description: String,
    pub resources: Vec<Resource>,
    pub tags: Vec<String>,
}

impl ExternalDataset {
    /// Hash of everything a sync mirrors; a change means "updated".
    pub fn fingerprint(&self) -> String {
        checksum(serde_json::to_string(self).expect("plain data serializes").as_bytes())
    }
}

fn text(v: &Value, key: &str) -> String {
    v.get(key).and_then(Value::as_str).unwrap_or_default().to_string()
}

/// Reads `result.results[]` of a CKAN `package_search` response.
pub fn parse_catalog(bytes: &[u8]) -> Result<Vec<ExternalDataset>> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| CoreError::Parse(format!("catalog: {e}")))?;
    let results = doc
        .get("result")
        .and_then(|r| r.get("results"))
        .and_then(Value::as_array)
        .ok_or_else(|| CoreError::Parse("catalog lacks result.results".into()))?;
    let mut out = Vec::with_capacity(results.len());
    for (i, r) in results.iter().enumerate() {
        let id = match r.get("id") {
            Some(Value::String(s)) if !s.is_empty() => s.clone(),
            _ => return Err(CoreError::Parse(format!("catalog entry {i} has no id"))),
        };
        if out.iter().any(|d: &ExternalDataset| d.id == id) {
            return Err(CoreError::Parse(format!("catalog repeats dataset id '{id}'")));
        }
        let resources = r
            .get("resources")
            .and_then(Value::as_array)
            .map(|rs| {
                rs.iter()
                    .filter_map(|x| {
                        let url = text(x, "url");
                        (!url.is_empty()).then(|| Resource { url, format: text(x, "format") })
                    })
                    .collect()
            })
            .unwrap_or_default();
        let tags = r
            .get("tags")
            .and_then(Value::as_array)
            .map(|ts| {
                ts.iter()
                    .filter_map(|t| match t {
                        Value::String(s) => Some(s.clone()),
                        other => other.get("name").and_then(Value::as_str).map(str::to_string),
                    })
                    .collect()
            })
            .unwrap_or_default();
        out.push(ExternalDataset {
            id,
            title: text(r, "title"),
            description: text(r, "notes"),
            resources,
            tags,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncReport {
    pub created: usize,
    pub updated: usize,
    pub unchanged: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}
