//! Item-graph shapes.
//!
//! A metadatum node is
//! `<item> dsms:hasMetadatum _:m . _:m a <concept> ; dsms:value <literal> ;
//! dsms:originalKey "<key>" ; dsms:origin <origin>` plus `qudt:unit` and
//! `dsms:termValue` when present. A column node is
//! `<item> dsms:hasColumn _:c . _:c dsms:columnName "<name>" ;
//! dsms:accessUrl "container://<id>/<name>"` plus `a <concept>` and
//! `qudt:unit` when known.

use std::collections::BTreeMap;

use matspace_rdf::vocab::{qudt, rdf};
use matspace_rdf::{BlankNode, Iri, Literal, Subject, Term, Triple, TurtleParser};

use super::MetadataRecord;
use crate::ns::{self, iri};
use crate::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Ingest,
    Form,
    /// Written by a connector sync.
    Connector,
    /// Written by an app run.
    App,
}

impl Origin {
    pub fn iri(self) -> Iri {
        match self {
            Origin::Ingest => iri(ns::INGEST_ORIGIN),
            Origin::Form => iri(ns::FORM_ORIGIN),
            Origin::Connector => iri(ns::CONNECTOR_ORIGIN),
            Origin::App => iri(ns::APP_ORIGIN),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnRef {
    pub name: String,
    pub concept: Option<Iri>,
    pub unit: Option<Iri>,
}

#[derive(Debug, Clone, Default)]
pub struct FlatGraph {
    pub triples: Vec<Triple>,
    /// Metadatum node per record key.
    pub nodes: BTreeMap<String, BlankNode>,
}

fn blank(label: String) -> BlankNode {
    BlankNode::new(label).expect("generated labels are valid")
}

/// The metadatum node triples for one record.
pub fn metadatum_triples(item: &Iri, node: &BlankNode, record: &MetadataRecord, origin: Origin) -> Vec<Triple> {
    let mut t = vec![
        Triple::new(item.clone(), iri(ns::HAS_METADATUM), node.clone()),
        Triple::new(node.clone(), iri(rdf::TYPE), record.concept.clone()),
        Triple::new(node.clone(), iri(ns::VALUE), record.value.literal(record.unit.is_some())),
        Triple::new(node.clone(), iri(ns::ORIGINAL_KEY), Literal::string(&record.key)),
        Triple::new(node.clone(), iri(ns::ORIGIN), origin.iri()),
    ];
    if let Some(u) = &record.unit {
        t.push(Triple::new(node.clone(), iri(qudt::UNIT), u.clone()));
    }
    if let Some(tv) = &record.term_value {
        t.push(Triple::new(node.clone(), iri(ns::TERM_VALUE), tv.clone()));
    }
    t
}

/// Default graph shape: one metadatum node per record, one column node per
/// container column. Blank labels are batch-local (`m<i>`, `c<i>`); the store
/// relabels them on insert.
pub fn build_flat_graph(item: &Iri, item_id: &str, records: &[MetadataRecord], columns: &[ColumnRef], origin: Origin) -> FlatGraph {
    let mut out = FlatGraph::default();
    for (i, r) in records.iter().enumerate() {
        let node = blank(format!("m{i}"));
        out.triples.extend(metadatum_triples(item, &node, r, origin));
        out.nodes.insert(r.key.clone(), node);
    }
    for (i, c) in columns.iter().enumerate() {
        let node = blank(format!("c{i}"));
        out.triples.push(Triple::new(item.clone(), iri(ns::HAS_COLUMN), node.clone()));
        if let Some(concept) = &c.concept {
            out.triples.push(Triple::new(node.clone(), iri(rdf::TYPE), concept.clone()));
        }
        out.triples.push(Triple::new(node.clone(), iri(ns::COLUMN_NAME), Literal::string(&c.name)));
        out.triples.push(Triple::new(
            node.clone(),
            iri(ns::ACCESS_URL),
            Literal::string(ns::access_url(item_id, &c.name)),
        ));
        if let Some(u) = &c.unit {
            out.triples.push(Triple::new(node.clone(), iri(qudt::UNIT), u.clone()));
        }
    }
    out
}

/// Parses template Turtle with `ph:` bound to the placeholder namespace and
/// the standard prefixes predeclared.
pub fn parse_template(text: &str) -> Result<Vec<Triple>> {
    let mut parser = TurtleParser::new()
        .with_prefix("ph", &iri(ns::PLACEHOLDER))
        .with_prefix("dsms", &iri(ns::DSMS))
        .with_blank_prefix("t");
    for (p, n) in matspace_rdf::vocab::standard_prefixes() {
        parser = parser.with_prefix(p, &iri(n));
    }
    Ok(parser.parse(text)?.triples)
}

fn literal_key(l: &Literal) -> Option<&str> {
    l.lexical().strip_prefix("{{")?.strip_suffix("}}").map(str::trim)
}

/// Substitutes placeholders: `ph:__item__` becomes the item IRI, `ph:<key>`
/// the key's metadatum node and a literal `"{{<key>}}"` the key's value.
/// Fails before emitting anything if a key is unknown.
pub fn apply_template(template: &[Triple], records: &[MetadataRecord], flat: &FlatGraph, item: &Iri) -> Result<Vec<Triple>> {
    let node_for = |i: &Iri| -> Result<Option<Term>> {
        let Some(key) = ns::placeholder_key(i) else { return Ok(None) };
        if key == "__item__" {
            return Ok(Some(Term::Iri(item.clone())));
        }
        flat.nodes
            .get(&key)
            .map(|b| Some(Term::BlankNode(b.clone())))
            .ok_or(CoreError::Placeholder(key))
    };
    let mut out = Vec::with_capacity(template.len());
    for t in template {
        let subject = match &t.subject {
            Subject::Iri(i) => match node_for(i)? {
                Some(term) => term.to_subject().expect("placeholder nodes are subjects"),
                None => t.subject.clone(),
            },
            s => s.clone(),
        };
        if ns::placeholder_key(&t.predicate).is_some() {
            return Err(CoreError::Placeholder(format!("{} (predicate position)", t.predicate)));
        }
        let object = match &t.object {
            Term::Iri(i) => node_for(i)?.unwrap_or_else(|| t.object.clone()),
            Term::Literal(l) => match literal_key(l) {
                Some(key) => {
                    let r = records
                        .iter()
                        .find(|r| r.key == key)
                        .ok_or_else(|| CoreError::Placeholder(key.to_string()))?;
                    Term::Literal(r.value.literal(r.unit.is_some()))
                }
                None => t.object.clone(),
            },
            o => o.clone(),
        };
        out.push(Triple {
            subject,
            predicate: t.predicate.clone(),
            object,
        });
    }
    Ok(out)
}

/// Per-row expansion of one container column, stored in its own graph.
pub fn expand_column(item_id: &str, column: &str, values: &[f64]) -> Vec<Triple> {
    let base = ns::column_graph(item_id, column);
    let mut out = Vec::with_capacity(values.len() * 2);
    for (i, v) in values.iter().enumerate() {
        let row = iri(&format!("{}/row/{i}", base.as_str()));
        out.push(Triple::new(row.clone(), iri(ns::ROW_INDEX), Literal::integer(i as i64)));
        out.push(Triple::new(row, iri(ns::VALUE), Literal::double(*v)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::MetaValue;

    fn record(key: &str, value: &str, unit: Option<&str>) -> MetadataRecord {
        MetadataRecord {
            key: key.into(),
            concept: iri("https://w3id.org/steel/ProcessOntology/Tester"),
            value: MetaValue::Text(value.into()),
            text: value.into(),
            unit: unit.map(iri),
            original_unit: None,
            term_value: None,
        }
    }

    #[test]
    fn flat_shape() {
        let item = ns::kitem_iri("x");
        let cols = vec![
            ColumnRef { name: "Standardkraft".into(), concept: None, unit: Some(iri("http://qudt.org/vocab/unit/N")) },
            ColumnRef { name: "Standardweg".into(), concept: None, unit: None },
        ];
        let g = build_flat_graph(&item, "x", &[record("Prüfer", "wes", None)], &cols, Origin::Ingest);
        let count = |p: &str| g.triples.iter().filter(|t| t.predicate.as_str() == p).count();
        assert_eq!(count(ns::HAS_METADATUM), 1);
        assert_eq!(count(ns::HAS_COLUMN), 2);
        assert_eq!(count(ns::ACCESS_URL), 2);
        assert!(g.triples.iter().any(|t| t.object == Term::Literal(Literal::string("container://x/Standardkraft"))));
        let empty = build_flat_graph(&item, "x", &[], &[], Origin::Ingest);
        assert!(empty.triples.is_empty());
    }

    #[test]
    fn template_substitution() {
        let item = ns::kitem_iri("x");
        let records = vec![record("Prüfer", "wes", None)];
        let flat = build_flat_graph(&item, "x", &records, &[], Origin::Ingest);
        let tpl = parse_template("ph:__item__ prov:wasAttributedTo ph:Prüfer .\nph:Prüfer rdfs:comment \"{{Prüfer}}\" .").unwrap();
        let out = apply_template(&tpl, &records, &flat, &item).unwrap();
        assert_eq!(out[0].subject, Subject::Iri(item.clone()));
        assert_eq!(out[0].object, Term::BlankNode(flat.nodes["Prüfer"].clone()));
        assert_eq!(out[1].object, Term::Literal(Literal::string("wes")));

        let plain = parse_template("<e:a> <e:b> <e:c> .").unwrap();
        assert_eq!(apply_template(&plain, &records, &flat, &item).unwrap(), plain);

        let unknown = parse_template("ph:__item__ <e:p> ph:Nope .").unwrap();
        assert!(matches!(apply_template(&unknown, &records, &flat, &item), Err(CoreError::Placeholder(k)) if k == "Nope"));
    }

    #[test]
    fn column_expansion() {
        let t = expand_column("x", "force", &[1.0, 2.5]);
        assert_eq!(t.len(), 4);
        assert!(t[0].subject.to_string().contains("/column/force/row/0"));
    }
}
