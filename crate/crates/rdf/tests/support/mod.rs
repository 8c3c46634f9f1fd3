//! Random graph/query generators and a nested-loop SELECT oracle.
//!
//! Shared with the gateway acceptance target through `#[path]`.
#![allow(dead_code)]

use std::cmp::Ordering;

use matspace_rdf::vocab::{rdf, xsd};
use matspace_rdf::{BlankNode, CompareOp, Filter, Iri, Literal, Node, NodeTriple, Operand, SelectQuery, Subject, Term, Triple};
use rand::seq::IndexedRandom;
use rand::Rng;

const STRINGS: &[&str] = &[
    "a",
    "b",
    "Brinell Hardness",
    "quote \" inside",
    "back\\slash",
    "multi\nline",
    "tab\there",
    "Prüfer ä ö ü ß",
    "",
    "δ-ε",
    "emoji 🎉",
    "cr\rlf",
];

const IRI_LOCALS: &[&str] = &["s0", "s1", "s2", "DX56D", "a.b", "x-y", "1x", "with%20escape", "q?x=1", "frag#x", "_u"];

pub fn random_iri(rng: &mut impl Rng) -> Iri {
    let ns = ["http://e.org/", "https://w3id.org/steel/ProcessOntology/", "urn:x:", "dsms://kitem/"]
        .choose(rng)
        .unwrap();
    Iri::new(format!("{ns}{}", IRI_LOCALS.choose(rng).unwrap())).unwrap()
}

pub fn random_literal(rng: &mut impl Rng) -> Literal {
    match rng.random_range(0..7) {
        0 => Literal::string(*STRINGS.choose(rng).unwrap()),
        1 => Literal::lang(*STRINGS.choose(rng).unwrap(), *["en", "de", "en-US"].choose(rng).unwrap()).unwrap(),
        2 => Literal::integer(rng.random_range(-5..200)),
        3 => Literal::double(*[99.5, 106.89333758774, 0.1, -2.5e-7, 1e300, 100.0].choose(rng).unwrap()),
        4 => Literal::typed(*["1.55", "100", "-0.5", ".25"].choose(rng).unwrap(), Iri::new(xsd::DECIMAL).unwrap()).unwrap(),
        5 => Literal::boolean(rng.random_bool(0.5)),
        _ => Literal::typed("2021-05-19T10:00:00Z", Iri::new(xsd::DATE_TIME).unwrap()).unwrap(),
    }
}

pub fn random_blank(rng: &mut impl Rng) -> BlankNode {
    BlankNode::new(format!("n{}", rng.random_range(0..6))).unwrap()
}

/// A random graph of at most `max` triples mixing IRIs, blank nodes and literals.
pub fn random_graph(rng: &mut impl Rng, max: usize) -> Vec<Triple> {
    let n = rng.random_range(0..=max);
    let preds: Vec<Iri> = (0..4).map(|i| Iri::new(format!("http://e.org/p{i}")).unwrap()).collect();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let subject: Subject = if rng.random_bool(0.3) {
            random_blank(rng).into()
        } else {
            random_iri(rng).into()
        };
        let predicate = if rng.random_bool(0.1) {
            Iri::new(rdf::TYPE).unwrap()
        } else {
            preds.choose(rng).unwrap().clone()
        };
        let object: Term = match rng.random_range(0..10) {
            0..=2 => random_blank(rng).into(),
            3..=5 => random_iri(rng).into(),
            _ => random_literal(rng).into(),
        };
        out.push(Triple::new(subject, predicate, object));
    }
    out
}

/// A small-vocabulary graph for join testing; shared terms make joins non-trivial.
pub fn random_query_graph(rng: &mut impl Rng, max: usize) -> Vec<Triple> {
    let n = rng.random_range(0..=max);
    (0..n)
        .map(|_| {
            let s = Iri::new(format!("http://e.org/s{}", rng.random_range(0..5))).unwrap();
            let p = Iri::new(format!("http://e.org/p{}", rng.random_range(0..3))).unwrap();
            let o: Term = match rng.random_range(0..4) {
                0 | 1 => Iri::new(format!("http://e.org/s{}", rng.random_range(0..5))).unwrap().into(),
                2 => small_literal(rng).into(),
                _ => Literal::string(["Brinell", "brinell hardness", "DX56D"].choose(rng).unwrap().to_string()).into(),
            };
            Triple::new(s, p, o)
        })
        .collect()
}

fn small_literal(rng: &mut impl Rng) -> Literal {
    match rng.random_range(0..3) {
        0 => Literal::integer(rng.random_range(98..103)),
        1 => Literal::double(*[99.5, 100.0, 106.89333758774].choose(rng).unwrap()),
        _ => Literal::typed("100.0", Iri::new(xsd::DECIMAL).unwrap()).unwrap(),
    }
}

const VARS: &[&str] = &["a", "b", "c", "d"];

fn random_node(rng: &mut impl Rng, position: usize) -> Node {
    if rng.random_bool(0.6) {
        return Node::Var(VARS.choose(rng).unwrap().to_string());
    }
    match position {
        0 => Node::Term(Iri::new(format!("http://e.org/s{}", rng.random_range(0..5))).unwrap().into()),
        1 => Node::Term(Iri::new(format!("http://e.org/p{}", rng.random_range(0..3))).unwrap().into()),
        _ => {
            if rng.random_bool(0.5) {
                Node::Term(Iri::new(format!("http://e.org/s{}", rng.random_range(0..5))).unwrap().into())
            } else {
                Node::Term(small_literal(rng).into())
            }
        }
    }
}

/// A random query with 1..=3 patterns and at most one filter.
pub fn random_query(rng: &mut impl Rng, graphs: &[Iri]) -> SelectQuery {
    let n = rng.random_range(1..=3);
    let patterns: Vec<NodeTriple> = (0..n)
        .map(|_| NodeTriple {
            subject: random_node(rng, 0),
            predicate: random_node(rng, 1),
            object: random_node(rng, 2),
        })
        .collect();
    let mut query = SelectQuery {
        patterns,
        ..SelectQuery::default()
    };
    let vars = query.pattern_variables();
    if vars.is_empty() {
        // force at least one variable
        query.patterns[0].subject = Node::Var("a".into());
    }
    let vars = query.pattern_variables();
    let mut projected: Vec<String> = vars.iter().filter(|_| rng.random_bool(0.6)).cloned().collect();
    if projected.is_empty() {
        projected.push(vars[0].clone());
    }
    query.variables = projected;
    if rng.random_bool(0.6) {
        let var = vars.choose(rng).unwrap().clone();
        let op = *[CompareOp::Eq, CompareOp::Ne, CompareOp::Lt, CompareOp::Le, CompareOp::Gt, CompareOp::Ge]
            .choose(rng)
            .unwrap();
        let filter = match rng.random_range(0..4) {
            0 => Filter::Regex {
                var,
                pattern: ["^b", "hard", "DX", "s[12]$"].choose(rng).unwrap().to_string(),
                flags: ["", "i"].choose(rng).unwrap().to_string(),
            },
            1 => Filter::Compare {
                left: Operand::Var(var),
                op,
                right: Operand::Var(vars.choose(rng).unwrap().clone()),
            },
            _ => Filter::Compare {
                left: Operand::Var(var),
                op,
                right: Operand::Term(match rng.random_range(0..3) {
                    0 => Literal::double(100.0).into(),
                    1 => Literal::string("Brinell").into(),
                    _ => Iri::new("http://e.org/s1").unwrap().into(),
                }),
            },
        };
        query.filters.push(filter);
    }
    query.distinct = rng.random_bool(0.3);
    if rng.random_bool(0.2) {
        query.limit = Some(rng.random_range(0..5));
    }
    if rng.random_bool(0.2) {
        query.offset = Some(rng.random_range(0..5));
    }
    if rng.random_bool(0.3) {
        let mut choices = graphs.to_vec();
        choices.push(Iri::new("http://e.org/graph/missing").unwrap());
        query.graph = Some(choices.choose(rng).unwrap().clone());
    }
    query
}

fn escape(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

fn render_term(t: &Term) -> String {
    match t {
        Term::Iri(i) => format!("<{}>", i.as_str()),
        Term::BlankNode(b) => format!("_:{}", b.as_str()),
        Term::Literal(l) => match l.language() {
            Some(lang) => format!("\"{}\"@{lang}", escape(l.lexical())),
            None => format!("\"{}\"^^<{}>", escape(l.lexical()), l.datatype().as_str()),
        },
    }
}

fn render_node(n: &Node) -> String {
    match n {
        Node::Var(v) => format!("?{v}"),
        Node::Term(t) => render_term(t),
    }
}

/// Renders a query as SPARQL text.
pub fn render_query(q: &SelectQuery) -> String {
    let mut body = String::new();
    for p in &q.patterns {
        body.push_str(&format!(
            "  {} {} {} .\n",
            render_node(&p.subject),
            render_node(&p.predicate),
            render_node(&p.object)
        ));
    }
    for f in &q.filters {
        match f {
            Filter::Regex { var, pattern, flags } => {
                body.push_str(&format!("  FILTER regex(?{var}, \"{}\", \"{}\")\n", escape(pattern), flags));
            }
            Filter::Compare { left, op, right } => {
                let operand = |o: &Operand| match o {
                    Operand::Var(v) => format!("?{v}"),
                    Operand::Term(t) => render_term(t),
                };
                let sym = match op {
                    CompareOp::Eq => "=",
                    CompareOp::Ne => "!=",
                    CompareOp::Lt => "<",
                    CompareOp::Le => "<=",
                    CompareOp::Gt => ">",
                    CompareOp::Ge => ">=",
                };
                body.push_str(&format!("  FILTER ({} {sym} {})\n", operand(left), operand(right)));
            }
        }
    }
    if let Some(g) = &q.graph {
        body = format!("GRAPH <{}> {{\n{body}}}\n", g.as_str());
    }
    let vars: Vec<String> = q.variables.iter().map(|v| format!("?{v}")).collect();
    let mut text = format!(
        "SELECT {}{} WHERE {{\n{body}}}",
        if q.distinct { "DISTINCT " } else { "" },
        vars.join(" ")
    );
    if let Some(l) = q.limit {
        text.push_str(&format!(" LIMIT {l}"));
    }
    if let Some(o) = q.offset {
        text.push_str(&format!(" OFFSET {o}"));
    }
    text
}

/// Why the oracle refused to produce rows.
#[derive(Debug, PartialEq)]
pub struct OracleError;

fn numeric_value(l: &Literal) -> Option<f64> {
    const NUMERIC: &[&str] = &[
        xsd::INTEGER,
        xsd::DECIMAL,
        xsd::DOUBLE,
        xsd::FLOAT,
        xsd::LONG,
        xsd::INT,
        xsd::SHORT,
        xsd::BYTE,
        xsd::NON_NEGATIVE_INTEGER,
        xsd::POSITIVE_INTEGER,
        xsd::NON_POSITIVE_INTEGER,
        xsd::NEGATIVE_INTEGER,
        xsd::UNSIGNED_LONG,
        xsd::UNSIGNED_INT,
    ];
    if NUMERIC.contains(&l.datatype().as_str()) {
        Some(l.lexical().parse::<f64>().expect("generated numerics parse"))
    } else {
        None
    }
}

fn oracle_compare(a: &Term, op: CompareOp, b: &Term) -> Result<bool, OracleError> {
    let from_ord = |ord: Ordering| match op {
        CompareOp::Eq => ord.is_eq(),
        CompareOp::Ne => !ord.is_eq(),
        CompareOp::Lt => ord.is_lt(),
        CompareOp::Le => ord.is_le(),
        CompareOp::Gt => ord.is_gt(),
        CompareOp::Ge => ord.is_ge(),
    };
    match (a, b) {
        (Term::Literal(x), Term::Literal(y)) => match (numeric_value(x), numeric_value(y)) {
            (Some(u), Some(v)) => Ok(from_ord(u.partial_cmp(&v).unwrap())),
            (None, None) => {
                if matches!(op, CompareOp::Eq | CompareOp::Ne) {
                    return Ok((x == y) == (op == CompareOp::Eq));
                }
                let stringy = |l: &Literal| l.datatype().as_str() == xsd::STRING || l.language().is_some();
                if (stringy(x) && stringy(y)) || x.datatype() == y.datatype() {
                    Ok(from_ord(x.lexical().cmp(y.lexical())))
                } else {
                    Err(OracleError)
                }
            }
            _ => Err(OracleError),
        },
        _ => match op {
            CompareOp::Eq => Ok(a == b),
            CompareOp::Ne => Ok(a != b),
            _ => Err(OracleError),
        },
    }
}

fn unify(node: &Node, value: Term, binding: &mut Vec<(String, Term)>) -> bool {
    match node {
        Node::Term(t) => *t == value,
        Node::Var(v) => match binding.iter().find(|(name, _)| name == v) {
            Some((_, existing)) => *existing == value,
            None => {
                binding.push((v.clone(), value));
                true
            }
        },
    }
}

/// Brute-force evaluation: every combination of one triple per pattern.
pub fn brute_force(scoped: &[Triple], q: &SelectQuery) -> Result<Vec<Vec<Term>>, OracleError> {
    let k = q.patterns.len();
    let n = scoped.len();
    let mut rows = Vec::new();
    if n == 0 || k == 0 {
        return Ok(rows);
    }
    let total = n.pow(k as u32);
    for combo in 0..total {
        let mut idx = combo;
        let mut binding: Vec<(String, Term)> = Vec::new();
        let mut ok = true;
        for p in &q.patterns {
            let t = &scoped[idx % n];
            idx /= n;
            let subject_term: Term = match &t.subject {
                Subject::Iri(i) => Term::Iri(i.clone()),
                Subject::BlankNode(b) => Term::BlankNode(b.clone()),
            };
            if !unify(&p.subject, subject_term, &mut binding)
                || !unify(&p.predicate, Term::Iri(t.predicate.clone()), &mut binding)
                || !unify(&p.object, t.object.clone(), &mut binding)
            {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let lookup = |v: &str| binding.iter().find(|(name, _)| name == v).map(|(_, t)| t.clone()).unwrap();
        let mut keep = true;
        for f in &q.filters {
            let pass = match f {
                Filter::Regex { var, pattern, flags } => {
                    let re = regex::RegexBuilder::new(pattern).case_insensitive(flags.contains('i')).build().unwrap();
                    match lookup(var) {
                        Term::Literal(l) => re.is_match(l.lexical()),
                        Term::Iri(i) => re.is_match(i.as_str()),
                        Term::BlankNode(_) => false,
                    }
                }
                Filter::Compare { left, op, right } => {
                    let get = |o: &Operand| match o {
                        Operand::Var(v) => lookup(v),
                        Operand::Term(t) => t.clone(),
                    };
                    oracle_compare(&get(left), *op, &get(right))?
                }
            };
            if !pass {
                keep = false;
                break;
            }
        }
        if keep {
            rows.push(q.variables.iter().map(|v| lookup(v)).collect::<Vec<Term>>());
        }
    }
    rows.sort();
    if q.distinct {
        rows.dedup();
    }
    let rows: Vec<Vec<Term>> = rows.into_iter().skip(q.offset.unwrap_or(0)).collect();
    Ok(match q.limit {
        Some(l) => rows.into_iter().take(l).collect(),
        None => rows,
    })
}
