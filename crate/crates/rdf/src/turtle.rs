//! Turtle parsing and deterministic serialization.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use crate::syntax::{ground, Cursor};
use crate::term::{escape_string, BlankNode, Iri, Literal, Subject, Term, Triple};
use crate::vocab::{rdf, xsd};
use crate::RdfError;

/// Result of parsing a Turtle document.
#[derive(Debug, Clone, Default)]
pub struct TurtleDocument {
    pub triples: Vec<Triple>,
    /// Prefixes declared in the document.
    pub prefixes: BTreeMap<String, Iri>,
}

/// Configurable Turtle parser.
#[derive(Debug, Clone, Default)]
pub struct TurtleParser {
    base: Option<String>,
    prefixes: BTreeMap<String, String>,
    blank_prefix: Option<String>,
}

impl TurtleParser {
    pub fn new() -> Self {
        Self::default()
    }

    /// Base IRI used to resolve relative references.
    pub fn with_base(mut self, base: &Iri) -> Self {
        self.base = Some(base.as_str().to_string());
        self
    }

    /// Prefixes available without a declaration in the document.
    pub fn with_prefix(mut self, prefix: &str, namespace: &Iri) -> Self {
        self.prefixes.insert(prefix.to_string(), namespace.as_str().to_string());
        self
    }

    /// Label prefix for freshly allocated blank nodes (default `b`).
    pub fn with_blank_prefix(mut self, prefix: &str) -> Self {
        self.blank_prefix = Some(prefix.to_string());
        self
    }

    pub fn parse(&self, text: &str) -> Result<TurtleDocument, RdfError> {
        let mut cursor = Cursor::new(text);
        if let Some(prefix) = &self.blank_prefix {
            cursor.set_blank_prefix(prefix);
        }
        if let Some(base) = &self.base {
            cursor.base = Some(url::Url::parse(base).map_err(|e| RdfError::InvalidIri {
                iri: base.clone(),
                reason: e.to_string(),
            })?);
        }
        cursor.prefixes = self.prefixes.clone();
        let mut declared = BTreeMap::new();
        let mut out = Vec::new();
        loop {
            cursor.skip_ws();
            if cursor.at_end() {
                break;
            }
            if cursor.peek() == Some('@') {
                cursor.bump();
                if cursor.eat_keyword("prefix") {
                    let (prefix, ns) = parse_prefix_decl(&mut cursor)?;
                    declared.insert(prefix, ns);
                    cursor.skip_ws();
                    cursor.expect_char('.')?;
                } else if cursor.eat_keyword("base") {
                    parse_base_decl(&mut cursor)?;
                    cursor.skip_ws();
                    cursor.expect_char('.')?;
                } else {
                    return Err(cursor.error("unknown directive"));
                }
                continue;
            }
            if cursor.eat_keyword("PREFIX") {
                let (prefix, ns) = parse_prefix_decl(&mut cursor)?;
                declared.insert(prefix, ns);
                continue;
            }
            if cursor.eat_keyword("BASE") {
                parse_base_decl(&mut cursor)?;
                continue;
            }
            cursor.parse_triples(&mut out)?;
            cursor.skip_ws();
            cursor.expect_char('.')?;
        }
        let triples = ground(out)?;
        Ok(TurtleDocument {
            triples,
            prefixes: declared,
        })
    }
}

fn parse_prefix_decl(cursor: &mut Cursor<'_>) -> Result<(String, Iri), RdfError> {
    cursor.skip_ws();
    let prefix = cursor.parse_pname_ns()?;
    cursor.skip_ws();
    let ns = cursor.parse_iriref()?;
    cursor.prefixes.insert(prefix.clone(), ns.as_str().to_string());
    Ok((prefix, ns))
}

fn parse_base_decl(cursor: &mut Cursor<'_>) -> Result<(), RdfError> {
    cursor.skip_ws();
    let base = cursor.parse_iriref()?;
    cursor.base = Some(url::Url::parse(base.as_str()).map_err(|e| cursor.error(e.to_string()))?);
    Ok(())
}

/// Parses a Turtle document without a base IRI.
pub fn parse_turtle(text: &str) -> Result<Vec<Triple>, RdfError> {
    Ok(TurtleParser::new().parse(text)?.triples)
}

/// Serializes triples deterministically.
///
/// Triples are sorted and grouped by subject; blank nodes are relabelled
/// `c0, c1, …` in an order derived from their graph neighbourhood, so the
/// output does not depend on insertion order or on the input labels of
/// structurally distinguishable blank nodes.
pub fn serialize_turtle<'a>(triples: impl IntoIterator<Item = &'a Triple>, prefixes: &BTreeMap<String, Iri>) -> String {
    let triples: BTreeSet<Triple> = triples.into_iter().cloned().collect();
    let relabelled = canonical_relabel(&triples);
    let mut out = String::new();
    for (prefix, ns) in prefixes {
        out.push_str(&format!("@prefix {prefix}: <{}> .\n", ns.as_str()));
    }
    if relabelled.is_empty() {
        return out;
    }
    if !prefixes.is_empty() {
        out.push('\n');
    }
    let compactor = Compactor::new(prefixes);
    let mut current_subject: Option<&Subject> = None;
    let mut current_predicate: Option<&Iri> = None;
    for triple in &relabelled {
        if current_subject == Some(&triple.subject) {
            if current_predicate == Some(&triple.predicate) {
                out.push_str(", ");
            } else {
                out.push_str(" ;\n    ");
                out.push_str(&compactor.predicate(&triple.predicate));
                out.push(' ');
            }
        } else {
            if current_subject.is_some() {
                out.push_str(" .\n");
            }
            out.push_str(&compactor.subject(&triple.subject));
            out.push(' ');
            out.push_str(&compactor.predicate(&triple.predicate));
            out.push(' ');
        }
        out.push_str(&compactor.term(&triple.object));
        current_subject = Some(&triple.subject);
        current_predicate = Some(&triple.predicate);
    }
    out.push_str(" .\n");
    out
}

struct Compactor<'a> {
    prefixes: &'a BTreeMap<String, Iri>,
}

impl<'a> Compactor<'a> {
    fn new(prefixes: &'a BTreeMap<String, Iri>) -> Self {
        Compactor { prefixes }
    }

    fn iri(&self, iri: &Iri) -> String {
        let value = iri.as_str();
        let best = self
            .prefixes
            .iter()
            .filter(|(_, ns)| value.starts_with(ns.as_str()))
            .filter(|(_, ns)| is_safe_local(&value[ns.as_str().len()..]))
            .max_by_key(|(p, ns)| (ns.as_str().len(), std::cmp::Reverse((*p).clone())));
        match best {
            Some((prefix, ns)) => format!("{prefix}:{}", &value[ns.as_str().len()..]),
            None => format!("<{value}>"),
        }
    }

    fn predicate(&self, iri: &Iri) -> String {
        if iri.as_str() == rdf::TYPE {
            "a".to_string()
        } else {
            self.iri(iri)
        }
    }

    fn subject(&self, subject: &Subject) -> String {
        match subject {
            Subject::Iri(iri) => self.iri(iri),
            Subject::BlankNode(b) => b.to_string(),
        }
    }

    fn term(&self, term: &Term) -> String {
        match term {
            Term::Iri(iri) => self.iri(iri),
            Term::BlankNode(b) => b.to_string(),
            Term::Literal(lit) => self.literal(lit),
        }
    }

    fn literal(&self, lit: &Literal) -> String {
        let quoted = format!("\"{}\"", escape_string(lit.lexical()));
        if let Some(lang) = lit.language() {
            format!("{quoted}@{lang}")
        } else if lit.datatype().as_str() == xsd::STRING {
            quoted
        } else {
            format!("{quoted}^^{}", self.iri(lit.datatype()))
        }
    }
}

fn is_safe_local(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        None => true,
        Some(c) if c.is_ascii_alphanumeric() || c == '_' => {
            local.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.') && !local.ends_with('.')
        }
        _ => false,
    }
}

/// Relabels blank nodes `c0, c1, …` using iterated neighbourhood hashing.
pub(crate) fn canonical_relabel(triples: &BTreeSet<Triple>) -> BTreeSet<Triple> {
    let mut blanks: BTreeSet<BlankNode> = BTreeSet::new();
    for t in triples {
        if let Subject::BlankNode(b) = &t.subject {
            blanks.insert(b.clone());
        }
        if let Term::BlankNode(b) = &t.object {
            blanks.insert(b.clone());
        }
    }
    if blanks.is_empty() {
        return triples.clone();
    }

    let mut color: HashMap<BlankNode, u64> = blanks.iter().map(|b| (b.clone(), 0)).collect();
    let rounds = blanks.len().min(8) + 1;
    for _ in 0..rounds {
        let mut signature: HashMap<BlankNode, Vec<(u8, String, String)>> = HashMap::new();
        let describe = |term: &Term, color: &HashMap<BlankNode, u64>| match term {
            Term::BlankNode(b) => format!("#{}", color[b]),
            other => other.to_string(),
        };
        for t in triples {
            if let Subject::BlankNode(b) = &t.subject {
                signature.entry(b.clone()).or_default().push((
                    0,
                    t.predicate.as_str().to_string(),
                    describe(&t.object, &color),
                ));
            }
            if let Term::BlankNode(b) = &t.object {
                let subject_desc = match &t.subject {
                    Subject::BlankNode(s) => format!("#{}", color[s]),
                    Subject::Iri(i) => i.to_string(),
                };
                signature
                    .entry(b.clone())
                    .or_default()
                    .push((1, t.predicate.as_str().to_string(), subject_desc));
            }
        }
        let mut next = HashMap::new();
        for b in &blanks {
            let mut sig = signature.remove(b).unwrap_or_default();
            sig.sort();
            let mut hasher = DefaultHasher::new();
            color[b].hash(&mut hasher);
            sig.hash(&mut hasher);
            next.insert(b.clone(), hasher.finish());
        }
        color = next;
    }

    let mut ordered: Vec<&BlankNode> = blanks.iter().collect();
    ordered.sort_by(|a, b| color[*a].cmp(&color[*b]).then_with(|| a.cmp(b)));
    let mapping: HashMap<&BlankNode, BlankNode> = ordered
        .into_iter()
        .enumerate()
        .map(|(i, b)| (b, BlankNode::new(format!("c{i}")).expect("valid label")))
        .collect();

    triples
        .iter()
        .map(|t| Triple {
            subject: match &t.subject {
                Subject::BlankNode(b) => Subject::BlankNode(mapping[b].clone()),
                s => s.clone(),
            },
            predicate: t.predicate.clone(),
            object: match &t.object {
                Term::BlankNode(b) => Term::BlankNode(mapping[b].clone()),
                o => o.clone(),
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &'static str) -> Iri {
        Iri::from_static(s)
    }

    #[test]
    fn single_statement() {
        let triples = parse_turtle("<a:s> <a:p> <a:o> .").unwrap();
        assert_eq!(triples, vec![Triple::new(iri("a:s"), iri("a:p"), iri("a:o"))]);
    }

    #[test]
    fn prefix_expansion_and_double_literal() {
        let text = "@prefix ex: <http://e/> .\n@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\nex:s ex:p \"1.55\"^^xsd:double .";
        let triples = parse_turtle(text).unwrap();
        assert_eq!(triples.len(), 1);
        assert_eq!(triples[0].subject, Subject::Iri(iri("http://e/s")));
        let lit = triples[0].object.as_literal().unwrap();
        assert_eq!(lit.datatype().as_str(), xsd::DOUBLE);
        assert_eq!(lit.as_f64(), Some(1.55));
    }

    #[test]
    fn missing_prefix_and_dot_is_error() {
        let err = parse_turtle("ex:s ex:p ex:o").unwrap_err();
        match err {
            RdfError::Syntax { line, message, .. } => {
                assert_eq!(line, 1);
                assert!(message.contains("undefined prefix"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_turtle("<a:s> <a:p> <a:o>").unwrap_err();
        assert!(matches!(err, RdfError::Syntax { .. }));
    }

    #[test]
    fn bad_typed_literal_rejected() {
        let text = "<a:s> <a:p> \"abc\"^^<http://www.w3.org/2001/XMLSchema#double> .";
        assert!(parse_turtle(text).is_err());
    }

    #[test]
    fn error_reports_line_and_column() {
        let err = parse_turtle("<a:s> <a:p> <a:o> .\n<a:s> <a:p> ? .").unwrap_err();
        match err {
            RdfError::Syntax { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, 13);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn relative_iris_need_base() {
        assert!(parse_turtle("<s> <a:p> <a:o> .").is_err());
        let doc = TurtleParser::new()
            .with_base(&iri("http://example.org/dir/"))
            .parse("<s> <a:p> <../o> .")
            .unwrap();
        assert_eq!(doc.triples[0].subject, Subject::Iri(iri("http://example.org/dir/s")));
        assert_eq!(doc.triples[0].object, Term::Iri(iri("http://example.org/o")));
    }

    #[test]
    fn abbreviations() {
        let text = r#"
            @prefix ex: <http://e/> .
            PREFIX foaf: <http://xmlns.com/foaf/0.1/>
            ex:a a ex:T ; ex:p 1, 2.5, 3e0, true ;
                 ex:q [ ex:r "x"@en ] ;
                 ex:l ( ex:b "y" ) .
            [] ex:p """multi
line "quoted" """ .
            _:n1 ex:p _:n1 .
        "#;
        let triples = parse_turtle(text).unwrap();
        // a: type, 4 p, q, l = 7; nested r = 1; list = 4; anon = 1; self loop = 1
        assert_eq!(triples.len(), 14);
        let datatypes: BTreeSet<_> = triples
            .iter()
            .filter_map(|t| t.object.as_literal())
            .map(|l| l.datatype().as_str().to_string())
            .collect();
        assert!(datatypes.contains(xsd::INTEGER));
        assert!(datatypes.contains(xsd::DECIMAL));
        assert!(datatypes.contains(xsd::DOUBLE));
        assert!(datatypes.contains(xsd::BOOLEAN));
        let long = triples
            .iter()
            .filter_map(|t| t.object.as_literal())
            .find(|l| l.lexical().contains('\n'))
            .unwrap();
        assert_eq!(long.lexical(), "multi\nline \"quoted\" ");
    }

    #[test]
    fn local_names_with_dots_and_digits() {
        let text = "@prefix ex: <http://e/> . ex:s ex:p ex:DX56D, ex:a.b, ex:1x .";
        let triples = parse_turtle(text).unwrap();
        let objects: Vec<_> = triples.iter().map(|t| t.object.as_iri().unwrap().as_str().to_string()).collect();
        assert!(objects.contains(&"http://e/DX56D".to_string()));
        assert!(objects.contains(&"http://e/a.b".to_string()));
        assert!(objects.contains(&"http://e/1x".to_string()));
    }

    #[test]
    fn empty_graph_serializes_to_prefixes_only() {
        let mut prefixes = BTreeMap::new();
        prefixes.insert("ex".to_string(), iri("http://e/"));
        let text = serialize_turtle(std::iter::empty(), &prefixes);
        assert_eq!(text, "@prefix ex: <http://e/> .\n");
    }

    #[test]
    fn single_triple_compacted() {
        let mut prefixes = BTreeMap::new();
        prefixes.insert("ex".to_string(), iri("http://e/"));
        let t = Triple::new(iri("http://e/s"), iri("http://e/p"), iri("http://e/o"));
        let text = serialize_turtle([&t], &prefixes);
        assert_eq!(text, "@prefix ex: <http://e/> .\n\nex:s ex:p ex:o .\n");
        assert_eq!(parse_turtle(&text).unwrap(), vec![t]);
    }

    #[test]
    fn serialization_is_insertion_order_independent() {
        let a = Triple::new(iri("http://e/s"), iri("http://e/p"), Literal::string("x\ty\"z"));
        let b = Triple::new(BlankNode::new("q").unwrap(), iri("http://e/p"), iri("http://e/s"));
        let c = Triple::new(iri("http://e/s"), iri(rdf::TYPE), iri("http://e/T"));
        let prefixes = BTreeMap::new();
        let one = serialize_turtle([&a, &b, &c], &prefixes);
        let two = serialize_turtle([&c, &b, &a], &prefixes);
        assert_eq!(one, two);
        let reparsed = parse_turtle(&one).unwrap();
        assert_eq!(reparsed.len(), 3);
    }
}
