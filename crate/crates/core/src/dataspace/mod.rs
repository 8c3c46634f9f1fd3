//! The dataspace: k-items with their graphs, attachments and containers,
//! plus vocabulary, forms, search, apps and connectors behind one facade.
//!
//! Every mutating call either commits completely or leaves the dataspace
//! untouched. Callers that share a dataspace across threads wrap it in a
//! `RwLock`.

mod apps;
mod persist;
mod sync;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::PathBuf;

use matspace_rdf::store::Scope;
use matspace_rdf::vocab::{dcterms, prov, qudt, rdf, rdfs};
use matspace_rdf::{BlankNode, Iri, Literal, QuadStore, Solutions, Subject, Term, Triple};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use uuid::Uuid;

use crate::connectors::ConnectorSpec;
use crate::form::{self, FormSchema};
use crate::ingest::{
    build_flat_graph, expand_column, read_container, run_pipeline, write_container, ColumnContainer, IngestConfig,
    IngestRecord, IngestReport, MappingFile, MetadataRecord, Origin,
};
use crate::knowledge::{checksum, link_closure, Attachment, GraphEdge, GraphNode, IntegrationLevel, KItem, KType, LevelEvidence, Link, LinkGraph};
use crate::ns::{self, iri};
use crate::search::{SearchDoc, SearchIndex, SearchQuery};
use crate::units::UnitTable;
use crate::vocabulary::{steel, Namespace, Registry, VocabTerm};
use crate::workflow::{AppSpec, RunRecord, UploadEvent};
use crate::{CoreError, Result};

pub use apps::ProvenanceView;

/// K-type created with every dataspace; tensile evaluation writes cards of it.
pub const MATERIAL_CARD_KTYPE: &str = "material-card";

const ID_NAMESPACE: Uuid = Uuid::from_u128(0x6d61_7473_7061_6365_8000_0000_0000_0001);

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
struct Counters {
    items: u64,
    runs: u64,
    events: u64,
    ingests: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct ConnectorState {
    spec: ConnectorSpec,
    /// External id to (item id, fingerprint).
    items: BTreeMap<String, (String, String)>,
}

/// Everything except the triple store, blobs and the search index.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct State {
    registry: Registry,
    ktypes: BTreeMap<String, KType>,
    items: BTreeMap<String, KItem>,
    ingests: BTreeMap<String, IngestRecord>,
    forms: BTreeMap<String, Vec<FormSchema>>,
    apps: BTreeMap<String, AppSpec>,
    runs: Vec<RunRecord>,
    events: Vec<UploadEvent>,
    dispatched: BTreeSet<(u64, String)>,
    queue: VecDeque<(u64, String)>,
    connectors: BTreeMap<String, ConnectorState>,
    counters: Counters,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KItemPatch {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub summary: Option<String>,
}

/// One metadatum node as shown to users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetadataRow {
    pub key: String,
    pub concept: Option<Iri>,
    /// Number or string.
    pub value: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit_iri: Option<Iri>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub term_value: Option<Iri>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<Iri>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub id: String,
    pub name: String,
    pub ktype: String,
    pub score: f64,
    pub annotations: Vec<Iri>,
    pub matched_annotations: Vec<Iri>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub kitems: usize,
    pub ktypes: usize,
    pub graphs: usize,
    pub triples: usize,
    pub terms: usize,
    pub apps: usize,
    pub runs: usize,
    pub pending_runs: usize,
    pub connectors: usize,
}

pub struct Dataspace {
    store: QuadStore,
    units: UnitTable,
    state: State,
    /// Attachment bytes per item and filename.
    blobs: BTreeMap<String, BTreeMap<String, Vec<u8>>>,
    /// Decoded containers, keyed by item id.
    containers: BTreeMap<String, ColumnContainer>,
    index: SearchIndex,
    data_dir: Option<PathBuf>,
}

impl std::fmt::Debug for Dataspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dataspace")
            .field("items", &self.state.items.len())
            .field("triples", &self.store.len())
            .field("data_dir", &self.data_dir)
            .finish()
    }
}

impl Default for Dataspace {
    fn default() -> Self {
        Self::new()
    }
}

pub(crate) fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Micros, true)
}

fn p(value: &str) -> Iri {
    iri(value)
}

fn is_slug(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl Dataspace {
    /// In-memory dataspace with the seeded vocabulary and unit table.
    pub fn new() -> Self {
        let mut store = QuadStore::new();
        store.set_prefix("dsms", p(ns::DSMS));
        store.set_prefix("steel", p(steel::NS));
        let mut ds = Dataspace {
            store,
            units: UnitTable::seeded(),
            state: State {
                registry: Registry::seeded(),
                ..Default::default()
            },
            blobs: BTreeMap::new(),
            containers: BTreeMap::new(),
            index: SearchIndex::default(),
            data_dir: None,
        };
        ds.state.ktypes.insert(
            MATERIAL_CARD_KTYPE.into(),
            KType {
                id: MATERIAL_CARD_KTYPE.into(),
                name: "Material Card".into(),
                description: "mechanical properties and material model parameters".into(),
                form: None,
            },
        );
        ds.refresh_vocabulary_graph();
        ds
    }

    pub fn store(&self) -> &QuadStore {
        &self.store
    }

    pub fn registry(&self) -> &Registry {
        &self.state.registry
    }

    pub fn units(&self) -> &UnitTable {
        &self.units
    }

    pub fn stats(&self) -> Stats {
        Stats {
            kitems: self.state.items.len(),
            ktypes: self.state.ktypes.len(),
            graphs: self.store.graph_names().count(),
            triples: self.store.len(),
            terms: self.state.registry.len(),
            apps: self.state.apps.len(),
            runs: self.state.runs.len(),
            pending_runs: self.state.queue.len(),
            connectors: self.state.connectors.len(),
        }
    }

    fn refresh_vocabulary_graph(&mut self) {
        let g = p(ns::VOCABULARY_GRAPH);
        self.store.drop_graph(&g);
        self.store.insert_graph(&g, self.state.registry.to_triples());
    }

    // ---- vocabulary ----

    pub fn register_term(&mut self, namespace: &str, label: &str, parent: Option<&Iri>, description: Option<&str>) -> Result<VocabTerm> {
        let ns = Namespace::new(namespace)?;
        let term = self.state.registry.register_term(&ns, label, parent, description)?;
        self.refresh_vocabulary_graph();
        Ok(term)
    }

    pub fn import_vocabulary(&mut self, turtle: &str) -> Result<usize> {
        let mut registry = self.state.registry.clone();
        let n = registry.import_turtle(turtle)?;
        self.state.registry = registry;
        self.refresh_vocabulary_graph();
        Ok(n)
    }

    pub fn find_terms(&self, query: &str) -> Vec<VocabTerm> {
        self.state.registry.find_terms(query)
    }

    pub fn children(&self, term: &Iri) -> Result<Vec<VocabTerm>> {
        self.state.registry.children(term)
    }

    // ---- k-types ----

    pub fn create_ktype(&mut self, ktype: KType) -> Result<KType> {
        if !is_slug(&ktype.id) {
            return Err(CoreError::Invalid(format!("k-type id '{}' must be a slug", ktype.id)));
        }
        if self.state.ktypes.contains_key(&ktype.id) {
            return Err(CoreError::Conflict(format!("k-type '{}' exists", ktype.id)));
        }
        let mut ktype = ktype;
        if ktype.name.trim().is_empty() {
            ktype.name = ktype.id.clone();
        }
        self.state.ktypes.insert(ktype.id.clone(), ktype.clone());
        Ok(ktype)
    }

    pub fn ktypes(&self) -> Vec<KType> {
        self.state.ktypes.values().cloned().collect()
    }

    pub fn ktype(&self, id: &str) -> Result<&KType> {
        self.state.ktypes.get(id).ok_or_else(|| CoreError::not_found("k-type", id))
    }

    pub fn delete_ktype(&mut self, id: &str) -> Result<()> {
        self.ktype(id)?;
        if let Some(item) = self.state.items.values().find(|i| i.ktype == id) {
            return Err(CoreError::Conflict(format!("k-type '{id}' is used by k-item {}", item.id)));
        }
        self.state.ktypes.remove(id);
        self.state.forms.remove(id);
        Ok(())
    }

    // ---- k-items ----

    pub fn kitem(&self, id: &str) -> Result<&KItem> {
        self.state.items.get(id).ok_or_else(|| CoreError::not_found("k-item", id))
    }

    /// All items in id order.
    pub fn kitems(&self) -> Vec<&KItem> {
        self.state.items.values().collect()
    }

    fn item_mut(&mut self, id: &str) -> Result<&mut KItem> {
        self.state.items.get_mut(id).ok_or_else(|| CoreError::not_found("k-item", id))
    }

    fn baseline(item: &KItem) -> Vec<Triple> {
        let s = item.iri();
        let mut t = vec![
            Triple::new(s.clone(), p(rdf::TYPE), p(ns::KITEM)),
            Triple::new(s.clone(), p(ns::KTYPE), ns::ktype_iri(&item.ktype)),
            Triple::new(s.clone(), p(rdfs::LABEL), Literal::string(&item.name)),
        ];
        if !item.summary.is_empty() {
            t.push(Triple::new(s, p(dcterms::DESCRIPTION), Literal::string(&item.summary)));
        }
        t
    }

    /// Ids come from a name-based UUID over the k-type, name and a creation
    /// counter, so replaying the same calls yields the same ids.
    pub fn create_kitem(&mut self, ktype: &str, name: &str, summary: &str) -> Result<KItem> {
        self.ktype(ktype)?;
        let name = name.trim();
        if name.is_empty() {
            return Err(CoreError::Invalid("k-item name is empty".into()));
        }
        let counter = self.state.counters.items + 1;
        let id = Uuid::new_v5(&ID_NAMESPACE, format!("{ktype}\n{name}\n{counter}").as_bytes()).to_string();
        let stamp = now();
        let item = KItem {
            id: id.clone(),
            ktype: ktype.into(),
            name: name.into(),
            summary: summary.into(),
            annotations: Vec::new(),
            links: Vec::new(),
            attachments: Vec::new(),
            container: None,
            graph_iri: ns::kitem_iri(&id),
            created: stamp.clone(),
            updated: stamp,
        };
        self.state.counters.items = counter;
        self.store.create_graph(&item.graph_iri);
        self.store.insert_graph(&item.graph_iri, Self::baseline(&item));
        self.state.items.insert(id.clone(), item.clone());
        self.reindex(&id);
        Ok(item)
    }

    pub fn patch_kitem(&mut self, id: &str, patch: &KItemPatch) -> Result<KItem> {
        let old = self.kitem(id)?.clone();
        if patch.name.as_deref().is_some_and(|n| n.trim().is_empty()) {
            return Err(CoreError::Invalid("k-item name is empty".into()));
        }
        let mut item = old.clone();
        if let Some(n) = &patch.name {
            item.name = n.trim().to_string();
        }
        if let Some(s) = &patch.summary {
            item.summary = s.clone();
        }
        for t in Self::baseline(&old) {
            self.store.remove(&old.graph_iri, &t);
        }
        self.store.insert_graph(&item.graph_iri, Self::baseline(&item));
        item.updated = now();
        self.state.items.insert(id.into(), item.clone());
        self.reindex(id);
        Ok(item)
    }

    /// Drops the item graph, its column graphs, its blobs and every inbound
    /// link. Provenance records stay.
    pub fn delete_kitem(&mut self, id: &str) -> Result<()> {
        let item = self.kitem(id)?.clone();
        let inbound: Vec<(String, Link)> = self
            .state
            .items
            .values()
            .flat_map(|i| i.links.iter().filter(|l| l.target == id).map(|l| (i.id.clone(), l.clone())))
            .collect();
        for (source, link) in inbound {
            let s = self.state.items.get_mut(&source).expect("source exists");
            s.links.retain(|l| l != &link);
            s.updated = now();
            let triple = Triple::new(ns::kitem_iri(&source), link.relation.clone(), ns::kitem_iri(id));
            self.store.remove(&ns::kitem_iri(&source), &triple);
            self.reindex(&source);
        }
        if let Some(c) = self.containers.remove(id) {
            for col in &c.columns {
                self.store.drop_graph(&ns::column_graph(id, &col.name));
            }
        }
        self.store.drop_graph(&item.graph_iri);
        self.blobs.remove(id);
        self.state.ingests.remove(id);
        self.state.items.remove(id);
        for c in self.state.connectors.values_mut() {
            c.items.retain(|_, (item_id, _)| item_id != id);
        }
        self.index.remove(id);
        Ok(())
    }

    fn touch(&mut self, id: &str) {
        if let Some(i) = self.state.items.get_mut(id) {
            i.updated = now();
        }
        self.reindex(id);
    }

    pub fn link(&mut self, source: &str, target: &str, relation: Option<Iri>, label: Option<String>) -> Result<Link> {
        self.kitem(source)?;
        self.kitem(target)?;
        if source == target {
            return Err(CoreError::Invalid("a k-item cannot link to itself".into()));
        }
        let relation = relation.unwrap_or_else(|| p(ns::IS_RELATED_TO));
        let link = Link { target: target.into(), relation: relation.clone(), label };
        let item = self.item_mut(source)?;
        if item.links.iter().any(|l| l.target == target && l.relation == relation) {
            return Err(CoreError::Conflict(format!("link {source} -> {target} via <{relation}> exists")));
        }
        item.links.push(link.clone());
        self.store
            .insert(&ns::kitem_iri(source), Triple::new(ns::kitem_iri(source), relation, ns::kitem_iri(target)));
        self.touch(source);
        Ok(link)
    }

    pub fn annotate(&mut self, id: &str, concept: &Iri) -> Result<KItem> {
        self.annotate_quiet(id, concept)?;
        self.reevaluate_triggers(id);
        Ok(self.kitem(id)?.clone())
    }

    fn annotate_quiet(&mut self, id: &str, concept: &Iri) -> Result<()> {
        if !self.state.registry.contains(concept) {
            return Err(CoreError::Invalid(format!("annotation <{concept}> is not a registered concept")));
        }
        let item = self.item_mut(id)?;
        if item.has_annotation(concept) {
            return Ok(());
        }
        item.annotations.push(concept.clone());
        self.store
            .insert(&ns::kitem_iri(id), Triple::new(ns::kitem_iri(id), p(ns::HAS_ANNOTATION), concept.clone()));
        self.touch(id);
        Ok(())
    }

    /// Uploads a file. Emits an upload event that apps may trigger on.
    pub fn attach(&mut self, id: &str, filename: &str, bytes: Vec<u8>, media_type: &str) -> Result<Attachment> {
        let a = self.store_attachment(id, filename, bytes, media_type, false, false)?;
        self.state.counters.events += 1;
        let event = UploadEvent {
            id: self.state.counters.events,
            kitem: id.into(),
            filename: filename.into(),
        };
        self.state.events.push(event);
        self.reevaluate_triggers(id);
        Ok(a)
    }

    /// Stores bytes under `filename`. Derived files may replace an earlier
    /// derived file of the same name; uploads never replace anything.
    fn store_attachment(&mut self, id: &str, filename: &str, bytes: Vec<u8>, media_type: &str, derived: bool, replace: bool) -> Result<Attachment> {
        if filename.is_empty() || filename.contains('/') || filename.contains('\\') {
            return Err(CoreError::Invalid(format!("bad attachment filename '{filename}'")));
        }
        let item = self.kitem(id)?;
        if let Some(existing) = item.attachment(filename) {
            if !(replace && existing.derived) {
                return Err(CoreError::Conflict(format!("attachment '{filename}' exists on {id}")));
            }
        }
        let a = Attachment {
            filename: filename.into(),
            media_type: if media_type.is_empty() { "application/octet-stream".into() } else { media_type.into() },
            checksum: checksum(&bytes),
            size: bytes.len() as u64,
            derived,
        };
        let g = ns::kitem_iri(id);
        let node = ns::attachment_iri(id, filename);
        self.store.remove_matching(&g, Some(&Subject::Iri(node.clone())), Some(&p(ns::CHECKSUM)), None);
        self.store.insert_graph(
            &g,
            [
                Triple::new(g.clone(), p(ns::HAS_ATTACHMENT), node.clone()),
                Triple::new(node.clone(), p(rdf::TYPE), p(ns::ATTACHMENT)),
                Triple::new(node.clone(), p(ns::FILENAME), Literal::string(filename)),
                Triple::new(node, p(ns::CHECKSUM), Literal::string(&a.checksum)),
            ],
        );
        let item = self.item_mut(id)?;
        item.attachments.retain(|x| x.filename != filename);
        item.attachments.push(a.clone());
        self.blobs.entry(id.into()).or_default().insert(filename.into(), bytes);
        self.touch(id);
        Ok(a)
    }

    /// Attachment bytes, verified against the stored checksum.
    pub fn attachment_bytes(&self, id: &str, filename: &str) -> Result<&[u8]> {
        let item = self.kitem(id)?;
        let meta = item.attachment(filename).ok_or_else(|| CoreError::not_found("attachment", filename))?;
        let bytes = self
            .blobs
            .get(id)
            .and_then(|b| b.get(filename))
            .ok_or_else(|| CoreError::not_found("attachment bytes", filename))?;
        if checksum(bytes) != meta.checksum {
            return Err(CoreError::Invalid(format!("checksum mismatch for '{filename}'")));
        }
        Ok(bytes)
    }

    /// Total bytes held across all attachments.
    pub fn attachment_bytes_total(&self) -> u64 {
        self.blobs.values().flat_map(|b| b.values()).map(|b| b.len() as u64).sum()
    }

    // ---- graph helpers ----

    fn node_triples(&self, graph: &Iri, node: &Subject) -> Vec<Triple> {
        self.store.triples_matching(Scope::Graph(graph), Some(node), None, None)
    }

    /// Metadatum nodes of an item, with their triples.
    fn metadatum_nodes(&self, id: &str) -> Vec<(Subject, Vec<Triple>)> {
        let g = ns::kitem_iri(id);
        self.store
            .triples_matching(Scope::Graph(&g), Some(&Subject::Iri(g.clone())), Some(&p(ns::HAS_METADATUM)), None)
            .into_iter()
            .filter_map(|t| t.object.to_subject())
            .map(|n| {
                let triples = self.node_triples(&g, &n);
                (n, triples)
            })
            .collect()
    }

    /// Removes nodes hanging off the item via `predicate` for which `keep`
    /// is false, along with every triple mentioning them.
    fn remove_nodes(&mut self, id: &str, predicate: &str, mut remove: impl FnMut(&[Triple]) -> bool) -> usize {
        let g = ns::kitem_iri(id);
        let nodes: Vec<Subject> = self
            .store
            .triples_matching(Scope::Graph(&g), Some(&Subject::Iri(g.clone())), Some(&p(predicate)), None)
            .into_iter()
            .filter_map(|t| t.object.to_subject())
            .collect();
        let mut removed = 0;
        for n in nodes {
            let triples = self.node_triples(&g, &n);
            if !remove(&triples) {
                continue;
            }
            removed += self.remove_subtree(&g, &n);
            let as_term: Term = match &n {
                Subject::Iri(i) => Term::Iri(i.clone()),
                Subject::BlankNode(b) => Term::BlankNode(b.clone()),
            };
            removed += self.store.remove_matching(&g, None, None, Some(&as_term));
        }
        removed
    }

    /// Removes `node`'s triples and, recursively, blank nodes it owns.
    fn remove_subtree(&mut self, g: &Iri, node: &Subject) -> usize {
        let triples = self.node_triples(g, node);
        let mut removed = self.store.remove_matching(g, Some(node), None, None);
        for t in triples {
            if let Term::BlankNode(b) = &t.object {
                removed += self.remove_subtree(g, &Subject::BlankNode(b.clone()));
            }
        }
        removed
    }

    fn has_value(triples: &[Triple], predicate: &str, object: &Term) -> bool {
        triples.iter().any(|t| t.predicate.as_str() == predicate && &t.object == object)
    }

    pub fn metadata_rows(&self, id: &str) -> Result<Vec<MetadataRow>> {
        self.kitem(id)?;
        let mut rows = Vec::new();
        for (_, triples) in self.metadatum_nodes(id) {
            let get = |pred: &str| triples.iter().find(|t| t.predicate.as_str() == pred).map(|t| t.object.clone());
            let key = get(ns::ORIGINAL_KEY).and_then(|o| o.as_literal().map(|l| l.lexical().to_string())).unwrap_or_default();
            let value = match get(ns::VALUE) {
                Some(Term::Literal(l)) => match l.as_f64() {
                    Some(v) if l.is_numeric() => serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null),
                    _ => Value::String(l.lexical().to_string()),
                },
                Some(Term::Iri(i)) => Value::String(i.as_str().to_string()),
                _ => Value::Null,
            };
            let unit_iri = get(qudt::UNIT).and_then(|o| o.as_iri().cloned());
            rows.push(MetadataRow {
                key,
                concept: get(rdf::TYPE).and_then(|o| o.as_iri().cloned()),
                value,
                unit: unit_iri.as_ref().and_then(|u| self.units.by_iri(u)).map(|u| u.symbol.clone()),
                unit_iri,
                term_value: get(ns::TERM_VALUE).and_then(|o| o.as_iri().cloned()),
                origin: get(ns::ORIGIN).and_then(|o| o.as_iri().cloned()),
            });
        }
        rows.sort_by(|a, b| a.key.cmp(&b.key).then_with(|| a.value.to_string().cmp(&b.value.to_string())));
        Ok(rows)
    }

    /// The item graph as Turtle.
    pub fn kitem_turtle(&self, id: &str) -> Result<String> {
        Ok(self.store.graph_turtle(&self.kitem(id)?.graph_iri))
    }

    /// Syntax errors in the query text count as query errors too.
    pub fn sparql(&self, query: &str) -> Result<Solutions> {
        self.store.query(query).map_err(CoreError::Query)
    }

    // ---- ingest ----

    /// Parses an attachment, resolves it against `mapping` and writes the
    /// item graph, container and annotations. Nothing is committed on error.
    /// A repeated ingest replaces the earlier ingest output.
    pub fn ingest(&mut self, id: &str, filename: &str, mapping: &MappingFile, config: &IngestConfig) -> Result<IngestReport> {
        let item = self.kitem(id)?.clone();
        if let Some(c) = &config.context {
            if !self.state.registry.contains(c) {
                return Err(CoreError::Invalid(format!("context <{c}> is not a registered concept")));
            }
        }
        let bytes = self.attachment_bytes(id, filename)?.to_vec();
        let out = run_pipeline(&bytes, mapping, config, &self.units, id)?;
        let container_bytes = out.container.as_ref().map(write_container).transpose()?;
        let turtle_name = format!("{filename}.ttl");
        let turtle = matspace_rdf::serialize_turtle(&out.triples, self.store.prefixes());
        let media = p(config.directives.media_type());

        // commit
        self.remove_nodes(id, ns::HAS_METADATUM, |t| Self::has_value(t, ns::ORIGIN, &Term::Iri(p(ns::INGEST_ORIGIN))));
        self.remove_nodes(id, ns::HAS_COLUMN, |_| true);
        if let Some(old) = self.containers.remove(id) {
            for c in &old.columns {
                self.store.drop_graph(&ns::column_graph(id, &c.name));
            }
        }
        let triples = self.store.relabel_blanks(out.triples);
        let written = self.store.insert_graph(&item.graph_iri, triples);
        self.store.insert(&item.graph_iri, Triple::new(item.iri(), p(ns::FORMAT), media.clone()));
        self.annotate_quiet(id, &media)?;
        if let Some(c) = &config.context {
            self.annotate_quiet(id, c)?;
        }
        self.store_attachment(id, &turtle_name, turtle.into_bytes(), "text/turtle", true, true)?;
        let mut container_name = None;
        if let (Some(c), Some(b)) = (out.container, container_bytes) {
            let name = format!("{filename}.kdc");
            self.store_attachment(id, &name, b, "application/x-kdc", true, true)?;
            self.containers.insert(id.into(), c);
            container_name = Some(name);
        }
        self.item_mut(id)?.container = container_name;
        let resolution = &out.resolution;
        self.state.ingests.insert(
            id.into(),
            IngestRecord {
                attachment: filename.into(),
                matched_keys: resolution.matched_keys(),
                matched_columns: resolution.matched_columns(),
                unmapped: resolution.unmapped.clone(),
            },
        );
        self.record_ingest_activity(id, filename);
        self.touch(id);
        self.reevaluate_triggers(id);
        Ok(IngestReport {
            level: self.integration_level(id)?,
            metadata: resolution.records.len(),
            columns: resolution.columns.len(),
            triples: written,
            unmapped: resolution.unmapped.clone(),
            turtle: turtle_name,
        })
    }

    fn record_ingest_activity(&mut self, id: &str, filename: &str) {
        self.state.counters.ingests += 1;
        let act = ns::activity_iri(&format!("ingest-{}", self.state.counters.ingests));
        let agent = ns::app_iri("data2rdf");
        self.store.insert_graph(
            &p(ns::PROVENANCE_GRAPH),
            [
                Triple::new(act.clone(), p(rdf::TYPE), p(prov::ACTIVITY)),
                Triple::new(act.clone(), p(prov::USED), ns::attachment_iri(id, filename)),
                Triple::new(act.clone(), p(prov::WAS_ASSOCIATED_WITH), agent.clone()),
                Triple::new(act, p(ns::TARGET), ns::kitem_iri(id)),
                Triple::new(agent, p(rdf::TYPE), p(prov::SOFTWARE_AGENT)),
            ],
        );
    }

    pub fn ingest_record(&self, id: &str) -> Option<&IngestRecord> {
        self.state.ingests.get(id)
    }

    pub fn container(&self, id: &str) -> Result<&ColumnContainer> {
        self.kitem(id)?;
        self.containers.get(id).ok_or_else(|| CoreError::not_found("container of k-item", id))
    }

    pub fn column(&self, id: &str, name: &str) -> Result<&[f64]> {
        self.container(id)?
            .column(name)
            .map(|c| c.values.as_slice())
            .ok_or_else(|| CoreError::not_found("column", name))
    }

    /// Writes the per-row expansion graph of every container column.
    pub fn expand_columns(&mut self, id: &str) -> Result<usize> {
        let container = self.container(id)?.clone();
        let mut total = 0;
        for c in &container.columns {
            let g = ns::column_graph(id, &c.name);
            self.store.drop_graph(&g);
            total += self.store.insert_graph(&g, expand_column(id, &c.name, &c.values));
        }
        self.touch(id);
        Ok(total)
    }

    // ---- integration level ----

    pub fn level_evidence(&self, id: &str) -> Result<LevelEvidence> {
        let item = self.kitem(id)?;
        let reg = &self.state.registry;
        let g = &item.graph_iri;
        let subject = Subject::Iri(g.clone());
        let format_triple = !self.store.triples_matching(Scope::Graph(g), Some(&subject), Some(&p(ns::FORMAT)), None).is_empty();
        let nodes = self.metadatum_nodes(id);
        let typed_metadata = nodes.iter().any(|(_, t)| {
            t.iter().any(|t| t.predicate.as_str() == rdf::TYPE && t.object.as_iri().is_some_and(|c| reg.contains(c)))
        });
        let fully_semantified = self.state.ingests.get(id).is_some_and(|rec| {
            let keys: BTreeSet<String> = nodes
                .iter()
                .filter(|(_, t)| Self::has_value(t, ns::ORIGIN, &Term::Iri(p(ns::INGEST_ORIGIN))))
                .flat_map(|(_, t)| t.iter().filter(|t| t.predicate.as_str() == ns::ORIGINAL_KEY))
                .filter_map(|t| t.object.as_literal().map(|l| l.lexical().to_string()))
                .collect();
            rec.matched_keys.iter().all(|k| keys.contains(k))
        });
        let urls = self.access_urls(id);
        let column_referenced = !urls.is_empty() && urls.iter().all(|(_, ok)| *ok);
        let columns_expanded = self.containers.get(id).is_some_and(|c| {
            !c.columns.is_empty() && c.columns.iter().all(|col| self.store.graph_len(&ns::column_graph(id, &col.name)) > 0)
        });
        Ok(LevelEvidence {
            has_attachment: !item.attachments.is_empty(),
            file_type: format_triple || item.annotations.iter().any(|a| reg.is_media_type(a)),
            context: item.annotations.iter().any(|a| reg.contains(a) && !reg.is_media_type(a) && a.as_str() != ns::MEDIA_TYPE),
            typed_metadata,
            fully_semantified,
            column_referenced,
            columns_expanded,
        })
    }

    /// Every access URL in the item graph and whether it resolves.
    pub fn access_urls(&self, id: &str) -> Vec<(String, bool)> {
        let g = ns::kitem_iri(id);
        self.store
            .triples_matching(Scope::Graph(&g), None, Some(&p(ns::ACCESS_URL)), None)
            .into_iter()
            .filter_map(|t| t.object.as_literal().map(|l| l.lexical().to_string()))
            .map(|url| {
                let ok = ns::parse_access_url(&url).is_some_and(|(item, col)| {
                    self.containers.get(item).is_some_and(|c| c.column(col).is_some())
                });
                (url, ok)
            })
            .collect()
    }

    pub fn integration_level(&self, id: &str) -> Result<IntegrationLevel> {
        Ok(self.level_evidence(id)?.classify())
    }

    // ---- forms ----

    /// Stores a new schema version for its k-type; earlier versions are kept.
    pub fn attach_form(&mut self, schema: FormSchema) -> Result<FormSchema> {
        self.ktype(&schema.ktype)?;
        schema.check(&self.state.registry, &self.units)?;
        let history = self.state.forms.entry(schema.ktype.clone()).or_default();
        let mut schema = schema;
        schema.version = history.len() as u32 + 1;
        history.push(schema.clone());
        if let Some(k) = self.state.ktypes.get_mut(&schema.ktype) {
            k.form = Some(schema.ktype.clone());
        }
        Ok(schema)
    }

    pub fn form(&self, ktype: &str) -> Result<&FormSchema> {
        self.state
            .forms
            .get(ktype)
            .and_then(|h| h.last())
            .ok_or_else(|| CoreError::not_found("form schema", ktype))
    }

    pub fn form_history(&self, ktype: &str) -> &[FormSchema] {
        self.state.forms.get(ktype).map(Vec::as_slice).unwrap_or_default()
    }

    /// Writes form-origin metadatum nodes, replacing the nodes an earlier
    /// submission of the same schema version wrote. Returns the node count.
    pub fn submit_form(&mut self, id: &str, schema_ktype: &str, values: &BTreeMap<String, Value>) -> Result<usize> {
        self.kitem(id)?;
        let schema = self.form(schema_ktype)?.clone();
        let records = form::records(&schema, values)?;
        let marker = Term::Literal(Literal::string(format!("{}@{}", schema.ktype, schema.version)));
        let item = ns::kitem_iri(id);
        let flat = build_flat_graph(&item, id, &records, &[], Origin::Form);
        let mut triples = flat.triples;
        for node in flat.nodes.values() {
            triples.push(Triple::new(node.clone(), p(ns::FORM_VERSION), marker.clone()));
        }
        self.remove_nodes(id, ns::HAS_METADATUM, |t| {
            Self::has_value(t, ns::ORIGIN, &Term::Iri(p(ns::FORM_ORIGIN))) && Self::has_value(t, ns::FORM_VERSION, &marker)
        });
        let triples = self.store.relabel_blanks(triples);
        self.store.insert_graph(&item, triples);
        self.touch(id);
        self.reindex(id);
        Ok(records.len())
    }

    // ---- search ----

    fn reindex(&mut self, id: &str) {
        let Some(item) = self.state.items.get(id) else {
            self.index.remove(id);
            return;
        };
        let mut text = vec![item.name.clone(), item.summary.clone()];
        for a in &item.annotations {
            text.push(self.state.registry.label(a).unwrap_or_default().to_string());
        }
        for (_, triples) in self.metadatum_nodes(id) {
            for t in triples {
                match (t.predicate.as_str(), &t.object) {
                    (ns::ORIGINAL_KEY, Term::Literal(l)) => text.push(l.lexical().to_string()),
                    (ns::VALUE, Term::Literal(l)) if !l.is_numeric() => text.push(l.lexical().to_string()),
                    _ => {}
                }
            }
        }
        let doc = SearchDoc::new(id, &item.ktype, item.annotations.clone(), &text.join(" "), &item.updated);
        self.index.index(doc);
    }

    pub fn search(&self, query: &SearchQuery) -> Result<Vec<SearchResult>> {
        let hits = self.index.search(query)?;
        Ok(hits
            .into_iter()
            .filter_map(|h| {
                let item = self.state.items.get(&h.id)?;
                Some(SearchResult {
                    id: h.id,
                    name: item.name.clone(),
                    ktype: item.ktype.clone(),
                    score: h.score,
                    annotations: item.annotations.clone(),
                    matched_annotations: h.matched_annotations,
                })
            })
            .collect())
    }

    // ---- link graph and coherence ----

    fn node_key(&self, iri: &Iri) -> String {
        match ns::kitem_id(iri) {
            Some(id) if self.state.items.contains_key(id) => id.to_string(),
            _ => iri.as_str().to_string(),
        }
    }

    fn key_iri(&self, key: &str) -> Option<Iri> {
        if self.state.items.contains_key(key) {
            Some(ns::kitem_iri(key))
        } else {
            Iri::new(key).ok()
        }
    }

    fn graph_node(&self, key: &str) -> Option<GraphNode> {
        if let Some(item) = self.state.items.get(key) {
            return Some(GraphNode { id: key.into(), name: item.name.clone(), ktype: item.ktype.clone() });
        }
        if let Some(rest) = key.strip_prefix("dsms://activity/") {
            return Some(match rest.strip_suffix("/settings") {
                Some(run) => GraphNode { id: key.into(), name: format!("settings of {run}"), ktype: "settings".into() },
                None => {
                    let app = self.state.runs.iter().find(|r| r.id == rest).map(|r| r.app.as_str()).unwrap_or("data2rdf");
                    GraphNode { id: key.into(), name: format!("{app} {rest}"), ktype: "activity".into() }
                }
            });
        }
        let (item, file) = key.strip_prefix("dsms://kitem/")?.split_once("/attachment/")?;
        self.state.items.get(item)?;
        Some(GraphNode { id: key.into(), name: ns::decode_segment(file), ktype: "attachment".into() })
    }

    fn graph_edges(&self, key: &str) -> Vec<GraphEdge> {
        let mut out = Vec::new();
        for item in self.state.items.values() {
            for l in &item.links {
                if item.id == key || l.target == key {
                    out.push(GraphEdge { source: item.id.clone(), target: l.target.clone(), relation: l.relation.as_str().into() });
                }
            }
        }
        let Some(node) = self.key_iri(key) else { return out };
        let pg = p(ns::PROVENANCE_GRAPH);
        let subject = Subject::Iri(node.clone());
        let object = Term::Iri(node.clone());
        for pred in [prov::USED, prov::WAS_GENERATED_BY] {
            let pred = p(pred);
            let mut triples = self.store.triples_matching(Scope::Graph(&pg), Some(&subject), Some(&pred), None);
            triples.extend(self.store.triples_matching(Scope::Graph(&pg), None, Some(&pred), Some(&object)));
            for t in triples {
                let (Subject::Iri(s), Term::Iri(o)) = (&t.subject, &t.object) else { continue };
                out.push(GraphEdge { source: self.node_key(s), target: self.node_key(o), relation: pred.as_str().into() });
            }
        }
        // attachments that take part in provenance hang off their item
        if let Some(item) = self.state.items.get(key) {
            for a in &item.attachments {
                let att = ns::attachment_iri(key, &a.filename);
                if self.in_provenance(&att) {
                    out.push(GraphEdge { source: key.into(), target: att.as_str().into(), relation: ns::HAS_ATTACHMENT.into() });
                }
            }
        } else if let Some((item, _)) = key.strip_prefix("dsms://kitem/").and_then(|r| r.split_once("/attachment/")) {
            out.push(GraphEdge { source: item.into(), target: key.into(), relation: ns::HAS_ATTACHMENT.into() });
        }
        out
    }

    fn in_provenance(&self, node: &Iri) -> bool {
        let pg = p(ns::PROVENANCE_GRAPH);
        !self.store.triples_matching(Scope::Graph(&pg), Some(&Subject::Iri(node.clone())), None, None).is_empty()
            || !self.store.triples_matching(Scope::Graph(&pg), None, None, Some(&Term::Iri(node.clone()))).is_empty()
    }

    /// Breadth-first closure over links and provenance edges.
    pub fn link_graph(&self, root: &str, depth: usize) -> Result<LinkGraph> {
        let root = self.graph_node(root).ok_or_else(|| CoreError::not_found("k-item", root))?;
        Ok(link_closure(root, depth, |k| self.graph_node(k), |k| self.graph_edges(k)))
    }

    /// Differences between item metadata and item graphs; empty when coherent.
    pub fn reconcile(&self) -> Vec<String> {
        let mut diffs = Vec::new();
        for item in self.state.items.values() {
            let g = &item.graph_iri;
            let s = Subject::Iri(g.clone());
            for l in &item.links {
                let t = Triple::new(g.clone(), l.relation.clone(), ns::kitem_iri(&l.target));
                if !self.store.contains(g, &t) {
                    diffs.push(format!("{}: link to {} via <{}> has no triple", item.id, l.target, l.relation));
                }
            }
            for t in self.store.triples_matching(Scope::Graph(g), Some(&s), None, None) {
                let Some(target) = t.object.as_iri().and_then(ns::kitem_id) else { continue };
                if !item.links.iter().any(|l| l.target == target && l.relation == t.predicate) {
                    diffs.push(format!("{}: triple to {target} via <{}> has no link", item.id, t.predicate));
                }
            }
            let annotated: BTreeSet<Iri> = self
                .store
                .triples_matching(Scope::Graph(g), Some(&s), Some(&p(ns::HAS_ANNOTATION)), None)
                .into_iter()
                .filter_map(|t| t.object.as_iri().cloned())
                .collect();
            if annotated != item.annotations.iter().cloned().collect() {
                diffs.push(format!("{}: annotations differ from graph", item.id));
            }
            for (url, ok) in self.access_urls(&item.id) {
                if !ok {
                    diffs.push(format!("{}: access URL {url} does not resolve", item.id));
                }
            }
        }
        diffs
    }

    /// Mints a store blank node; used by builtin operations.
    fn blank(&mut self) -> BlankNode {
        self.store.mint_blank()
    }

    /// Writes one metadatum node for `record` into the item graph.
    fn write_record(&mut self, id: &str, record: &MetadataRecord, origin: Origin) {
        let node = self.blank();
        let item = ns::kitem_iri(id);
        let triples = crate::ingest::metadatum_triples(&item, &node, record, origin);
        self.store.insert_graph(&item, triples);
    }

    pub fn read_container_bytes(bytes: &[u8]) -> Result<ColumnContainer> {
        read_container(bytes)
    }
}

#[cfg(test)]
mod tests;
