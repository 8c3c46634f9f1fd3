//! K-types, k-items, links, attachments and integration levels.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use matspace_rdf::Iri;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ns;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KType {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// K-type id whose form schema applies; usually the k-type itself.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub target: String,
    pub relation: Iri,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Attachment metadata; the bytes live in the dataspace blob store.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attachment {
    pub filename: String,
    pub media_type: String,
    pub checksum: String,
    pub size: u64,
    /// Produced by the system (ingest output, reports, exports) rather than uploaded.
    #[serde(default)]
    pub derived: bool,
}

pub fn checksum(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KItem {
    pub id: String,
    pub ktype: String,
    pub name: String,
    pub summary: String,
    pub annotations: Vec<Iri>,
    pub links: Vec<Link>,
    pub attachments: Vec<Attachment>,
    /// Name of the attachment holding the column container, when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub container: Option<String>,
    pub graph_iri: Iri,
    pub created: String,
    pub updated: String,
}

impl KItem {
    pub fn iri(&self) -> Iri {
        ns::kitem_iri(&self.id)
    }

    pub fn attachment(&self, filename: &str) -> Option<&Attachment> {
        self.attachments.iter().find(|a| a.filename == filename)
    }

    pub fn has_annotation(&self, iri: &Iri) -> bool {
        self.annotations.contains(iri)
    }
}

/// Integration level 0..=5, or none when nothing was uploaded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IntegrationLevel {
    None,
    Level(u8),
}

impl IntegrationLevel {
    pub fn as_u8(self) -> Option<u8> {
        match self {
            IntegrationLevel::None => None,
            IntegrationLevel::Level(l) => Some(l),
        }
    }
}

impl fmt::Display for IntegrationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegrationLevel::None => f.write_str("none"),
            IntegrationLevel::Level(l) => write!(f, "{l}"),
        }
    }
}

impl Serialize for IntegrationLevel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            IntegrationLevel::None => s.serialize_str("none"),
            IntegrationLevel::Level(l) => s.serialize_u8(*l),
        }
    }
}

impl<'de> Deserialize<'de> for IntegrationLevel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) if s == "none" => Ok(IntegrationLevel::None),
            serde_json::Value::Number(n) => n
                .as_u64()
                .filter(|l| *l <= 5)
                .map(|l| IntegrationLevel::Level(l as u8))
                .ok_or_else(|| serde::de::Error::custom("level out of range")),
            other => Err(serde::de::Error::custom(format!("bad level {other}"))),
        }
    }
}

/// The per-level criteria; the level is the length of the leading run of
/// satisfied criteria.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelEvidence {
    /// L0: at least one attachment.
    pub has_attachment: bool,
    /// L1: a media-type annotation or `dsms:format` triple.
    pub file_type: bool,
    /// L2: a non-media-type vocabulary annotation.
    pub context: bool,
    /// L3: a metadatum node typed by a registered concept.
    pub typed_metadata: bool,
    /// L4: every matched mapping key semantified...
    pub fully_semantified: bool,
    /// ...and the graph references an existing container column.
    pub column_referenced: bool,
    /// L5: every container column has a non-empty expansion graph.
    pub columns_expanded: bool,
}

impl LevelEvidence {
    pub fn classify(&self) -> IntegrationLevel {
        let criteria = [
            self.has_attachment,
            self.file_type,
            self.context,
            self.typed_metadata,
            self.fully_semantified && self.column_referenced,
            self.columns_expanded,
        ];
        match criteria.iter().take_while(|c| **c).count() {
            0 => IntegrationLevel::None,
            n => IntegrationLevel::Level(n as u8 - 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    pub name: String,
    pub ktype: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GraphEdge {
    pub source: String,
    pub target: String,
    pub relation: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

/// Breadth-first closure from `root` up to `depth` hops, following edges in
/// either direction. `edges_of` returns every edge touching a node.
pub fn link_closure(
    root: GraphNode,
    depth: usize,
    mut node_of: impl FnMut(&str) -> Option<GraphNode>,
    mut edges_of: impl FnMut(&str) -> Vec<GraphEdge>,
) -> LinkGraph {
    let mut nodes: BTreeMap<String, GraphNode> = BTreeMap::new();
    let mut edges: BTreeSet<GraphEdge> = BTreeSet::new();
    let mut queue = VecDeque::new();
    nodes.insert(root.id.clone(), root.clone());
    queue.push_back((root.id, 0usize));
    while let Some((id, d)) = queue.pop_front() {
        if d == depth {
            continue;
        }
        for edge in edges_of(&id) {
            let other = if edge.source == id { edge.target.clone() } else { edge.source.clone() };
            if !nodes.contains_key(&other) {
                let Some(node) = node_of(&other) else { continue };
                nodes.insert(other.clone(), node);
                queue.push_back((other, d + 1));
            }
            edges.insert(edge);
        }
    }
    // keep only edges whose endpoints were both reached
    let edges = edges
        .into_iter()
        .filter(|e| nodes.contains_key(&e.source) && nodes.contains_key(&e.target))
        .collect();
    LinkGraph {
        nodes: nodes.into_values().collect(),
        edges,
    }
}
