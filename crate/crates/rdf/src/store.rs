//! Named-graph triple store with per-graph indexes and Turtle snapshots.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::sparql::{self, SelectQuery, Solutions};
use crate::term::{BlankNode, Iri, Subject, Term, Triple};
use crate::turtle::{serialize_turtle, TurtleParser};
use crate::vocab::standard_prefixes;
use crate::RdfError;

#[derive(Debug, Clone, Default)]
struct GraphIndex {
    spo: BTreeMap<Subject, BTreeMap<Iri, BTreeSet<Term>>>,
    pos: BTreeMap<Iri, BTreeMap<Term, BTreeSet<Subject>>>,
    osp: BTreeMap<Term, BTreeMap<Subject, BTreeSet<Iri>>>,
    len: usize,
}

impl GraphIndex {
    fn insert(&mut self, t: Triple) -> bool {
        let fresh = self
            .spo
            .entry(t.subject.clone())
            .or_default()
            .entry(t.predicate.clone())
            .or_default()
            .insert(t.object.clone());
        if !fresh {
            return false;
        }
        self.pos
            .entry(t.predicate.clone())
            .or_default()
            .entry(t.object.clone())
            .or_default()
            .insert(t.subject.clone());
        self.osp.entry(t.object).or_default().entry(t.subject).or_default().insert(t.predicate);
        self.len += 1;
        true
    }

    fn remove(&mut self, t: &Triple) -> bool {
        let Some(by_p) = self.spo.get_mut(&t.subject) else {
            return false;
        };
        let Some(objects) = by_p.get_mut(&t.predicate) else {
            return false;
        };
        if !objects.remove(&t.object) {
            return false;
        }
        if objects.is_empty() {
            by_p.remove(&t.predicate);
        }
        if by_p.is_empty() {
            self.spo.remove(&t.subject);
        }
        if let Some(by_o) = self.pos.get_mut(&t.predicate) {
            if let Some(subjects) = by_o.get_mut(&t.object) {
                subjects.remove(&t.subject);
                if subjects.is_empty() {
                    by_o.remove(&t.object);
                }
            }
            if by_o.is_empty() {
                self.pos.remove(&t.predicate);
            }
        }
        if let Some(by_s) = self.osp.get_mut(&t.object) {
            if let Some(preds) = by_s.get_mut(&t.subject) {
                preds.remove(&t.predicate);
                if preds.is_empty() {
                    by_s.remove(&t.subject);
                }
            }
            if by_s.is_empty() {
                self.osp.remove(&t.object);
            }
        }
        self.len -= 1;
        true
    }

    fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().flat_map(|(s, by_p)| {
            by_p.iter()
                .flat_map(move |(p, objects)| objects.iter().map(move |o| Triple::new(s.clone(), p.clone(), o.clone())))
        })
    }

    fn matching(&self, s: Option<&Subject>, p: Option<&Iri>, o: Option<&Term>, out: &mut Vec<Triple>) {
        let triple = |s: &Subject, p: &Iri, o: &Term| Triple::new(s.clone(), p.clone(), o.clone());
        match (s, p, o) {
            (Some(s), _, _) => {
                let Some(by_p) = self.spo.get(s) else { return };
                let preds: Box<dyn Iterator<Item = (&Iri, &BTreeSet<Term>)>> = match p {
                    Some(p) => Box::new(by_p.get_key_value(p).into_iter()),
                    None => Box::new(by_p.iter()),
                };
                for (pred, objects) in preds {
                    match o {
                        Some(o) => {
                            if objects.contains(o) {
                                out.push(triple(s, pred, o));
                            }
                        }
                        None => out.extend(objects.iter().map(|obj| triple(s, pred, obj))),
                    }
                }
            }
            (None, Some(p), _) => {
                let Some(by_o) = self.pos.get(p) else { return };
                match o {
                    Some(o) => {
                        if let Some(subjects) = by_o.get(o) {
                            out.extend(subjects.iter().map(|subj| triple(subj, p, o)));
                        }
                    }
                    None => {
                        for (obj, subjects) in by_o {
                            out.extend(subjects.iter().map(|subj| triple(subj, p, obj)));
                        }
                    }
                }
            }
            (None, None, Some(o)) => {
                let Some(by_s) = self.osp.get(o) else { return };
                for (subj, preds) in by_s {
                    out.extend(preds.iter().map(|pred| triple(subj, pred, o)));
                }
            }
            (None, None, None) => out.extend(self.iter()),
        }
    }
}

/// Which graphs a pattern is matched against.
#[derive(Debug, Clone, Copy)]
pub enum Scope<'a> {
    /// Union of all named graphs, duplicates removed.
    Union,
    Graph(&'a Iri),
}

/// Named graphs of triples plus a prefix table.
///
/// Writers need `&mut self`; callers share a store behind a
/// `RwLock` to get many readers and one writer.
#[derive(Debug, Clone)]
pub struct QuadStore {
    graphs: BTreeMap<Iri, GraphIndex>,
    prefixes: BTreeMap<String, Iri>,
    blank_counter: u64,
}

impl Default for QuadStore {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Serialize, Deserialize)]
struct SnapshotIndex {
    blank_counter: u64,
    prefixes: BTreeMap<String, String>,
    graphs: Vec<SnapshotGraph>,
}

#[derive(Serialize, Deserialize)]
struct SnapshotGraph {
    iri: String,
    file: String,
}

impl QuadStore {
    /// Empty store with the standard prefixes registered.
    pub fn new() -> Self {
        let prefixes = standard_prefixes()
            .into_iter()
            .map(|(p, ns)| (p.to_string(), Iri::from_static(ns)))
            .collect();
        QuadStore {
            graphs: BTreeMap::new(),
            prefixes,
            blank_counter: 0,
        }
    }

    pub fn prefixes(&self) -> &BTreeMap<String, Iri> {
        &self.prefixes
    }

    pub fn set_prefix(&mut self, prefix: &str, namespace: Iri) {
        self.prefixes.insert(prefix.to_string(), namespace);
    }

    /// Mints a store-scoped blank node `_:b<counter>`.
    pub fn mint_blank(&mut self) -> BlankNode {
        let b = BlankNode::new(format!("b{}", self.blank_counter)).expect("valid label");
        self.blank_counter += 1;
        b
    }

    /// Renames every blank node in `triples` to a freshly minted store label,
    /// consistently within the batch.
    pub fn relabel_blanks(&mut self, triples: impl IntoIterator<Item = Triple>) -> Vec<Triple> {
        let mut mapping: BTreeMap<BlankNode, BlankNode> = BTreeMap::new();
        let mut out = Vec::new();
        for t in triples {
            let subject = match t.subject {
                Subject::BlankNode(b) => Subject::BlankNode(self.mapped(&mut mapping, b)),
                s => s,
            };
            let object = match t.object {
                Term::BlankNode(b) => Term::BlankNode(self.mapped(&mut mapping, b)),
                o => o,
            };
            out.push(Triple {
                subject,
                predicate: t.predicate,
                object,
            });
        }
        out
    }

    fn mapped(&mut self, mapping: &mut BTreeMap<BlankNode, BlankNode>, b: BlankNode) -> BlankNode {
        if let Some(m) = mapping.get(&b) {
            return m.clone();
        }
        let fresh = self.mint_blank();
        mapping.insert(b, fresh.clone());
        fresh
    }

    /// Inserts triples into `graph`, returning how many were new.
    pub fn insert_graph(&mut self, graph: &Iri, triples: impl IntoIterator<Item = Triple>) -> usize {
        let index = self.graphs.entry(graph.clone()).or_default();
        triples.into_iter().filter(|t| index.insert(t.clone())).count()
    }

    pub fn insert(&mut self, graph: &Iri, triple: Triple) -> bool {
        self.graphs.entry(graph.clone()).or_default().insert(triple)
    }

    pub fn remove(&mut self, graph: &Iri, triple: &Triple) -> bool {
        let Some(index) = self.graphs.get_mut(graph) else {
            return false;
        };
        index.remove(triple)
    }

    /// Removes every triple of `graph` matching the pattern.
    pub fn remove_matching(&mut self, graph: &Iri, s: Option<&Subject>, p: Option<&Iri>, o: Option<&Term>) -> usize {
        let Some(index) = self.graphs.get_mut(graph) else {
            return 0;
        };
        let mut found = Vec::new();
        index.matching(s, p, o, &mut found);
        found.iter().filter(|t| index.remove(t)).count()
    }

    /// Drops a graph, returning the number of triples it held.
    pub fn drop_graph(&mut self, graph: &Iri) -> usize {
        self.graphs.remove(graph).map(|g| g.len).unwrap_or(0)
    }

    /// Ensures a graph exists, even if empty.
    pub fn create_graph(&mut self, graph: &Iri) {
        self.graphs.entry(graph.clone()).or_default();
    }

    pub fn contains_graph(&self, graph: &Iri) -> bool {
        self.graphs.contains_key(graph)
    }

    pub fn contains(&self, graph: &Iri, triple: &Triple) -> bool {
        let mut out = Vec::new();
        if let Some(g) = self.graphs.get(graph) {
            g.matching(Some(&triple.subject), Some(&triple.predicate), Some(&triple.object), &mut out);
        }
        !out.is_empty()
    }

    pub fn graph_names(&self) -> impl Iterator<Item = &Iri> {
        self.graphs.keys()
    }

    /// Triples of one graph in (subject, predicate, object) order.
    pub fn graph_triples(&self, graph: &Iri) -> Vec<Triple> {
        self.graphs.get(graph).map(|g| g.iter().collect()).unwrap_or_default()
    }

    pub fn graph_len(&self, graph: &Iri) -> usize {
        self.graphs.get(graph).map(|g| g.len).unwrap_or(0)
    }

    /// Total triples over all graphs (counting duplicates across graphs).
    pub fn len(&self) -> usize {
        self.graphs.values().map(|g| g.len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pattern lookup in sorted order, duplicates across graphs removed.
    pub fn triples_matching(&self, scope: Scope<'_>, s: Option<&Subject>, p: Option<&Iri>, o: Option<&Term>) -> Vec<Triple> {
        let mut out = Vec::new();
        match scope {
            Scope::Graph(g) => {
                if let Some(index) = self.graphs.get(g) {
                    index.matching(s, p, o, &mut out);
                }
            }
            Scope::Union => {
                for index in self.graphs.values() {
                    index.matching(s, p, o, &mut out);
                }
                if self.graphs.len() > 1 {
                    out.sort();
                    out.dedup();
                }
            }
        }
        out
    }

    /// Evaluates a parsed query.
    pub fn select(&self, query: &SelectQuery) -> Result<Solutions, RdfError> {
        sparql::evaluate(self, query)
    }

    /// Parses and evaluates query text; the store's prefixes are predeclared.
    pub fn query(&self, text: &str) -> Result<Solutions, RdfError> {
        let query = sparql::parse_select_with_prefixes(text, &self.prefixes)?;
        self.select(&query)
    }

    /// Serializes one graph as Turtle.
    pub fn graph_turtle(&self, graph: &Iri) -> String {
        let triples = self.graph_triples(graph);
        serialize_turtle(&triples, &self.prefixes)
    }

    /// Writes one Turtle file per graph plus `index.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), RdfError> {
        let graphs_dir = dir.join("graphs");
        if graphs_dir.exists() {
            fs::remove_dir_all(&graphs_dir)?;
        }
        fs::create_dir_all(&graphs_dir)?;
        let mut index = SnapshotIndex {
            blank_counter: self.blank_counter,
            prefixes: self.prefixes.iter().map(|(k, v)| (k.clone(), v.as_str().to_string())).collect(),
            graphs: Vec::new(),
        };
        for (i, graph) in self.graphs.keys().enumerate() {
            let file = format!("g{i:05}.ttl");
            fs::write(graphs_dir.join(&file), self.graph_turtle(graph))?;
            index.graphs.push(SnapshotGraph {
                iri: graph.as_str().to_string(),
                file,
            });
        }
        let json = serde_json::to_string_pretty(&index).map_err(|e| RdfError::Snapshot(e.to_string()))?;
        fs::write(dir.join("index.json"), json)?;
        Ok(())
    }

    /// Loads a snapshot written by [`QuadStore::save`]. Blank nodes are
    /// relabelled with fresh store labels.
    pub fn load(dir: &Path) -> Result<Self, RdfError> {
        let text = fs::read_to_string(dir.join("index.json"))?;
        let index: SnapshotIndex = serde_json::from_str(&text).map_err(|e| RdfError::Snapshot(e.to_string()))?;
        let mut store = QuadStore::new();
        store.blank_counter = index.blank_counter;
        for (prefix, ns) in index.prefixes {
            store.prefixes.insert(prefix, Iri::new(ns)?);
        }
        for g in index.graphs {
            let iri = Iri::new(g.iri)?;
            let text = fs::read_to_string(dir.join("graphs").join(&g.file))?;
            let doc = TurtleParser::new().parse(&text)?;
            let triples = store.relabel_blanks(doc.triples);
            store.create_graph(&iri);
            store.insert_graph(&iri, triples);
        }
        Ok(store)
    }
}
