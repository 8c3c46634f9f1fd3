//! Faceted and free-text search over k-items.
//!
//! Free text is ranked by a [`SimilarityScorer`]; the default is BM25. Facets
//! filter first: k-types combine with OR, annotations with AND.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use matspace_rdf::Iri;
use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

/// Lowercases and splits on anything that is not alphanumeric.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchDoc {
    pub id: String,
    pub ktype: String,
    pub annotations: Vec<Iri>,
    pub tokens: Vec<String>,
    /// ISO-8601 timestamp; later sorts first among equal scores.
    pub updated: String,
}

impl SearchDoc {
    pub fn new(id: &str, ktype: &str, annotations: Vec<Iri>, text: &str, updated: &str) -> Self {
        SearchDoc {
            id: id.into(),
            ktype: ktype.into(),
            annotations,
            tokens: tokenize(text),
            updated: updated.into(),
        }
    }

    pub fn term_frequency(&self, token: &str) -> usize {
        self.tokens.iter().filter(|t| *t == token).count()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchQuery {
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default)]
    pub ktypes: Vec<String>,
    #[serde(default)]
    pub annotations: Vec<Iri>,
    #[serde(default)]
    pub limit: Option<usize>,
}

impl SearchQuery {
    pub fn text(text: &str) -> Self {
        SearchQuery { text: Some(text.into()), ..Default::default() }
    }

    pub fn facets(ktypes: &[&str], annotations: &[Iri]) -> Self {
        SearchQuery {
            ktypes: ktypes.iter().map(|k| k.to_string()).collect(),
            annotations: annotations.to_vec(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub id: String,
    pub score: f64,
    pub matched_annotations: Vec<Iri>,
    #[serde(skip)]
    updated: String,
}

/// Scores one document against query tokens, given corpus statistics.
pub trait SimilarityScorer: Send + Sync {
    fn score(&self, query: &[String], doc: &SearchDoc, corpus: &CorpusStats) -> f64;
}

/// Document-frequency and length statistics over the whole index.
#[derive(Debug, Clone, Default)]
pub struct CorpusStats {
    pub docs: usize,
    pub avg_len: f64,
    pub doc_freq: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25 {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25 {
    fn default() -> Self {
        Bm25 { k1: 1.2, b: 0.75 }
    }
}

impl Bm25 {
    /// `ln(1 + (N − n + 0.5)/(n + 0.5))`, positive for every n.
    pub fn idf(&self, corpus: &CorpusStats, token: &str) -> f64 {
        let n = corpus.doc_freq.get(token).copied().unwrap_or(0) as f64;
        (1.0 + (corpus.docs as f64 - n + 0.5) / (n + 0.5)).ln()
    }
}

impl SimilarityScorer for Bm25 {
    fn score(&self, query: &[String], doc: &SearchDoc, corpus: &CorpusStats) -> f64 {
        let len = doc.tokens.len() as f64;
        let norm = if corpus.avg_len > 0.0 { len / corpus.avg_len } else { 0.0 };
        let unique: BTreeSet<&String> = query.iter().collect();
        unique
            .into_iter()
            .map(|t| {
                let tf = doc.term_frequency(t) as f64;
                if tf == 0.0 {
                    return 0.0;
                }
                self.idf(corpus, t) * tf * (self.k1 + 1.0) / (tf + self.k1 * (1.0 - self.b + self.b * norm))
            })
            .sum()
    }
}

pub struct SearchIndex {
    docs: BTreeMap<String, SearchDoc>,
    scorer: Box<dyn SimilarityScorer>,
}

impl Default for SearchIndex {
    fn default() -> Self {
        SearchIndex::new(Box::new(Bm25::default()))
    }
}

impl std::fmt::Debug for SearchIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SearchIndex").field("docs", &self.docs.len()).finish()
    }
}

fn order(a: &SearchHit, b: &SearchHit) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| b.updated.cmp(&a.updated))
        .then_with(|| a.id.cmp(&b.id))
}

impl SearchIndex {
    pub fn new(scorer: Box<dyn SimilarityScorer>) -> Self {
        SearchIndex { docs: BTreeMap::new(), scorer }
    }

    /// Replaces any earlier document with the same id.
    pub fn index(&mut self, doc: SearchDoc) {
        self.docs.insert(doc.id.clone(), doc);
    }

    pub fn remove(&mut self, id: &str) {
        self.docs.remove(id);
    }

    pub fn get(&self, id: &str) -> Option<&SearchDoc> {
        self.docs.get(id)
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn stats(&self) -> CorpusStats {
        let mut doc_freq = BTreeMap::new();
        let mut total = 0usize;
        for d in self.docs.values() {
            total += d.tokens.len();
            for t in d.tokens.iter().collect::<BTreeSet<_>>() {
                *doc_freq.entry(t.clone()).or_insert(0) += 1;
            }
        }
        let docs = self.docs.len();
        CorpusStats {
            docs,
            avg_len: if docs == 0 { 0.0 } else { total as f64 / docs as f64 },
            doc_freq,
        }
    }

    fn passes(doc: &SearchDoc, ktypes: &[String], annotations: &[Iri]) -> bool {
        (ktypes.is_empty() || ktypes.iter().any(|k| k.eq_ignore_ascii_case(&doc.ktype)))
            && annotations.iter().all(|a| doc.annotations.contains(a))
    }

    fn hit(doc: &SearchDoc, score: f64, annotations: &[Iri]) -> SearchHit {
        SearchHit {
            id: doc.id.clone(),
            score,
            matched_annotations: annotations.iter().filter(|a| doc.annotations.contains(a)).cloned().collect(),
            updated: doc.updated.clone(),
        }
    }

    /// Pure filter; every hit scores 1.
    pub fn facet_search(&self, ktypes: &[String], annotations: &[Iri]) -> Vec<SearchHit> {
        let mut hits: Vec<SearchHit> = self
            .docs
            .values()
            .filter(|d| Self::passes(d, ktypes, annotations))
            .map(|d| Self::hit(d, 1.0, annotations))
            .collect();
        hits.sort_by(order);
        hits
    }

    /// Ranked free-text search; only hits with a positive score.
    pub fn text_search(&self, text: &str, limit: Option<usize>) -> Vec<SearchHit> {
        self.ranked(text, &[], &[], limit)
    }

    fn ranked(&self, text: &str, ktypes: &[String], annotations: &[Iri], limit: Option<usize>) -> Vec<SearchHit> {
        let query = tokenize(text);
        if query.is_empty() {
            return Vec::new();
        }
        let stats = self.stats();
        let mut hits: Vec<SearchHit> = self
            .docs
            .values()
            .filter(|d| Self::passes(d, ktypes, annotations))
            .filter_map(|d| {
                let s = self.scorer.score(&query, d, &stats);
                (s.is_finite() && s > 0.0).then(|| Self::hit(d, s, annotations))
            })
            .collect();
        hits.sort_by(order);
        if let Some(limit) = limit {
            hits.truncate(limit);
        }
        hits
    }

    /// Facets filter, then text (when given) ranks the survivors.
    pub fn search(&self, query: &SearchQuery) -> Result<Vec<SearchHit>> {
        let text = query.text.as_deref().map(str::trim).filter(|t| !t.is_empty());
        if text.is_none() && query.ktypes.is_empty() && query.annotations.is_empty() {
            return Err(CoreError::Invalid("search needs text, a k-type or an annotation".into()));
        }
        Ok(match text {
            Some(t) => self.ranked(t, &query.ktypes, &query.annotations, query.limit),
            None => {
                let mut hits = self.facet_search(&query.ktypes, &query.annotations);
                if let Some(limit) = query.limit {
                    hits.truncate(limit);
                }
                hits
            }
        })
    }
}
