//! SPARQL SELECT subset: PREFIX/BASE, SELECT [DISTINCT], basic graph
//! patterns, FILTER (six comparators and `regex`), a single GRAPH scope,
//! LIMIT and OFFSET.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use regex::{Regex, RegexBuilder};
use serde_json::{json, Map, Value};

use crate::store::{QuadStore, Scope};
use crate::syntax::{Cursor, Node, NodeTriple};
use crate::term::{Iri, Term};
use crate::vocab::xsd;
use crate::RdfError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    fn holds(self, ord: Ordering) -> bool {
        match self {
            CompareOp::Eq => ord == Ordering::Equal,
            CompareOp::Ne => ord != Ordering::Equal,
            CompareOp::Lt => ord == Ordering::Less,
            CompareOp::Le => ord != Ordering::Greater,
            CompareOp::Gt => ord == Ordering::Greater,
            CompareOp::Ge => ord != Ordering::Less,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operand {
    Var(String),
    Term(Term),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Filter {
    Compare { left: Operand, op: CompareOp, right: Operand },
    Regex { var: String, pattern: String, flags: String },
}

impl Filter {
    fn variables(&self) -> Vec<&str> {
        match self {
            Filter::Compare { left, right, .. } => [left, right]
                .into_iter()
                .filter_map(|o| match o {
                    Operand::Var(v) => Some(v.as_str()),
                    Operand::Term(_) => None,
                })
                .collect(),
            Filter::Regex { var, .. } => vec![var.as_str()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SelectQuery {
    /// Projected variables, in output column order.
    pub variables: Vec<String>,
    pub patterns: Vec<NodeTriple>,
    pub filters: Vec<Filter>,
    pub graph: Option<Iri>,
    pub distinct: bool,
    pub limit: Option<usize>,
    pub offset: Option<usize>,
}

impl SelectQuery {
    /// Variables in the patterns, in order of first appearance.
    pub fn pattern_variables(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for p in &self.patterns {
            for node in [&p.subject, &p.predicate, &p.object] {
                if let Node::Var(v) = node {
                    if !seen.contains(v) {
                        seen.push(v.clone());
                    }
                }
            }
        }
        seen
    }

    /// Checks that filter and projection variables occur in some pattern.
    pub fn validate(&self) -> Result<(), RdfError> {
        let vars: BTreeSet<String> = self.pattern_variables().into_iter().collect();
        for f in &self.filters {
            for v in f.variables() {
                if !vars.contains(v) {
                    return Err(RdfError::Query(format!("filter variable ?{v} does not appear in any pattern")));
                }
            }
        }
        for v in &self.variables {
            if !vars.contains(v) {
                return Err(RdfError::Query(format!("projected variable ?{v} does not appear in any pattern")));
            }
        }
        Ok(())
    }
}

/// Variable bindings of a SELECT query, rows in projection order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Solutions {
    pub variables: Vec<String>,
    pub rows: Vec<Vec<Term>>,
}

impl Solutions {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// All values bound to `var`, in row order.
    pub fn column(&self, var: &str) -> Vec<&Term> {
        match self.variables.iter().position(|v| v == var) {
            Some(i) => self.rows.iter().map(|r| &r[i]).collect(),
            None => Vec::new(),
        }
    }

    /// Rows as variable → term maps.
    pub fn bindings(&self) -> Vec<BTreeMap<String, Term>> {
        self.rows
            .iter()
            .map(|r| self.variables.iter().cloned().zip(r.iter().cloned()).collect())
            .collect()
    }

    /// SPARQL 1.1 Query Results JSON.
    pub fn to_json(&self) -> Value {
        let bindings: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (var, term) in self.variables.iter().zip(row) {
                    obj.insert(var.clone(), term_json(term));
                }
                Value::Object(obj)
            })
            .collect();
        json!({
            "head": { "vars": self.variables },
            "results": { "bindings": bindings },
        })
    }
}

fn term_json(term: &Term) -> Value {
    match term {
        Term::Iri(i) => json!({"type": "uri", "value": i.as_str()}),
        Term::BlankNode(b) => json!({"type": "bnode", "value": b.as_str()}),
        Term::Literal(l) => {
            let mut obj = Map::new();
            obj.insert("type".into(), json!("literal"));
            obj.insert("value".into(), json!(l.lexical()));
            if let Some(lang) = l.language() {
                obj.insert("xml:lang".into(), json!(lang));
            } else if l.datatype().as_str() != xsd::STRING {
                obj.insert("datatype".into(), json!(l.datatype().as_str()));
            }
            Value::Object(obj)
        }
    }
}

/// Parses a SELECT query with no predeclared prefixes.
pub fn parse_select(text: &str) -> Result<SelectQuery, RdfError> {
    parse_select_with_prefixes(text, &BTreeMap::new())
}

/// Parses a SELECT query; `prefixes` are available without declaration.
pub fn parse_select_with_prefixes(text: &str, prefixes: &BTreeMap<String, Iri>) -> Result<SelectQuery, RdfError> {
    let mut c = Cursor::new(text);
    c.allow_variables = true;
    c.prefixes = prefixes.iter().map(|(k, v)| (k.clone(), v.as_str().to_string())).collect();
    loop {
        c.skip_ws();
        if c.eat_keyword("PREFIX") {
            c.skip_ws();
            let prefix = c.parse_pname_ns()?;
            c.skip_ws();
            let ns = c.parse_iriref()?;
            c.prefixes.insert(prefix, ns.as_str().to_string());
        } else if c.eat_keyword("BASE") {
            c.skip_ws();
            let base = c.parse_iriref()?;
            c.base = Some(url::Url::parse(base.as_str()).map_err(|e| c.error(e.to_string()))?);
        } else {
            break;
        }
    }
    if !c.eat_keyword("SELECT") {
        return Err(c.error("expected SELECT"));
    }
    let mut query = SelectQuery::default();
    c.skip_ws();
    if c.eat_keyword("DISTINCT") {
        query.distinct = true;
    }
    c.skip_ws();
    let mut star = false;
    if c.peek() == Some('*') {
        c.bump();
        star = true;
    } else {
        while matches!(c.peek(), Some('?') | Some('$')) {
            let v = c.parse_variable()?;
            if !query.variables.contains(&v) {
                query.variables.push(v);
            }
            c.skip_ws();
        }
        if query.variables.is_empty() {
            return Err(c.error("expected '*' or at least one variable after SELECT"));
        }
    }
    c.skip_ws();
    if c.eat_keyword("FROM") {
        return Err(c.error("FROM is not supported; use GRAPH"));
    }
    c.eat_keyword("WHERE");
    c.skip_ws();
    c.expect_char('{')?;
    let mut outside_patterns = 0usize;
    loop {
        c.skip_ws();
        match c.peek() {
            None => return Err(c.error("unterminated group pattern")),
            Some('}') => {
                c.bump();
                break;
            }
            Some('.') => {
                c.bump();
            }
            _ if c.eat_keyword("FILTER") => query.filters.push(parse_filter(&mut c)?),
            _ if c.eat_keyword("GRAPH") => {
                if query.graph.is_some() {
                    return Err(c.error("only one GRAPH block is supported"));
                }
                c.skip_ws();
                if matches!(c.peek(), Some('?') | Some('$')) {
                    return Err(c.error("GRAPH requires an IRI"));
                }
                query.graph = Some(c.parse_iri()?);
                c.skip_ws();
                c.expect_char('{')?;
                loop {
                    c.skip_ws();
                    match c.peek() {
                        None => return Err(c.error("unterminated GRAPH block")),
                        Some('}') => {
                            c.bump();
                            break;
                        }
                        Some('.') => {
                            c.bump();
                        }
                        _ if c.eat_keyword("FILTER") => query.filters.push(parse_filter(&mut c)?),
                        _ if c.eat_keyword("GRAPH") => return Err(c.error("nested GRAPH blocks are not supported")),
                        _ => c.parse_triples(&mut query.patterns)?,
                    }
                }
            }
            _ if c.eat_keyword("OPTIONAL") || c.eat_keyword("UNION") || c.eat_keyword("MINUS") => {
                return Err(c.error("OPTIONAL, UNION and MINUS are not supported"));
            }
            _ => {
                let before = query.patterns.len();
                c.parse_triples(&mut query.patterns)?;
                outside_patterns += query.patterns.len() - before;
            }
        }
    }
    if query.graph.is_some() && outside_patterns > 0 {
        return Err(c.error("patterns outside the GRAPH block are not supported"));
    }
    loop {
        c.skip_ws();
        if c.eat_keyword("LIMIT") {
            query.limit = Some(parse_count(&mut c)?);
        } else if c.eat_keyword("OFFSET") {
            query.offset = Some(parse_count(&mut c)?);
        } else if c.eat_keyword("ORDER") {
            return Err(c.error("ORDER BY is not supported; results are sorted by value"));
        } else {
            break;
        }
    }
    c.skip_ws();
    if !c.at_end() {
        return Err(c.error("unexpected trailing input"));
    }
    if star {
        query.variables = query
            .pattern_variables()
            .into_iter()
            .filter(|v| !v.starts_with('#'))
            .collect();
    }
    query.validate()?;
    Ok(query)
}

fn parse_count(c: &mut Cursor<'_>) -> Result<usize, RdfError> {
    c.skip_ws();
    let mut digits = String::new();
    while let Some(d) = c.peek().filter(|d| d.is_ascii_digit()) {
        digits.push(d);
        c.bump();
    }
    digits.parse().map_err(|_| c.error("expected a non-negative integer"))
}

fn parse_filter(c: &mut Cursor<'_>) -> Result<Filter, RdfError> {
    c.skip_ws();
    if c.eat_keyword("regex") {
        return parse_regex(c);
    }
    c.expect_char('(')?;
    c.skip_ws();
    let filter = if c.eat_keyword("regex") {
        parse_regex(c)?
    } else {
        let left = parse_operand(c)?;
        c.skip_ws();
        let op = parse_op(c)?;
        let right = parse_operand(c)?;
        Filter::Compare { left, op, right }
    };
    c.skip_ws();
    c.expect_char(')')?;
    Ok(filter)
}

fn parse_regex(c: &mut Cursor<'_>) -> Result<Filter, RdfError> {
    c.skip_ws();
    c.expect_char('(')?;
    c.skip_ws();
    if c.eat_keyword("str") {
        c.skip_ws();
        c.expect_char('(')?;
        c.skip_ws();
        let var = expect_var(c)?;
        c.skip_ws();
        c.expect_char(')')?;
        return finish_regex(c, var);
    }
    let var = expect_var(c)?;
    finish_regex(c, var)
}

fn finish_regex(c: &mut Cursor<'_>, var: String) -> Result<Filter, RdfError> {
    c.skip_ws();
    c.expect_char(',')?;
    c.skip_ws();
    let pattern = c.parse_literal()?.lexical().to_string();
    c.skip_ws();
    let mut flags = String::new();
    if c.peek() == Some(',') {
        c.bump();
        c.skip_ws();
        flags = c.parse_literal()?.lexical().to_string();
        c.skip_ws();
    }
    c.expect_char(')')?;
    Ok(Filter::Regex { var, pattern, flags })
}

fn expect_var(c: &mut Cursor<'_>) -> Result<String, RdfError> {
    if matches!(c.peek(), Some('?') | Some('$')) {
        c.parse_variable()
    } else {
        Err(c.error("expected a variable"))
    }
}

fn parse_op(c: &mut Cursor<'_>) -> Result<CompareOp, RdfError> {
    let two: String = c.rest().chars().take(2).collect();
    let (op, len) = match two.as_str() {
        "!=" => (CompareOp::Ne, 2),
        "<=" => (CompareOp::Le, 2),
        ">=" => (CompareOp::Ge, 2),
        _ => match two.chars().next() {
            Some('=') => (CompareOp::Eq, 1),
            Some('<') => (CompareOp::Lt, 1),
            Some('>') => (CompareOp::Gt, 1),
            _ => return Err(c.error("expected a comparison operator")),
        },
    };
    for _ in 0..len {
        c.bump();
    }
    c.skip_ws();
    Ok(op)
}

fn parse_operand(c: &mut Cursor<'_>) -> Result<Operand, RdfError> {
    c.skip_ws();
    match c.peek() {
        Some('?') | Some('$') => Ok(Operand::Var(c.parse_variable()?)),
        Some('"') | Some('\'') => Ok(Operand::Term(Term::Literal(c.parse_literal()?))),
        Some(ch) if ch.is_ascii_digit() || ch == '+' || ch == '-' || ch == '.' => {
            Ok(Operand::Term(Term::Literal(c.parse_number()?)))
        }
        Some('<') => Ok(Operand::Term(Term::Iri(c.parse_iriref()?))),
        _ if c.eat_keyword("true") => Ok(Operand::Term(Term::Literal(crate::term::Literal::boolean(true)))),
        _ if c.eat_keyword("false") => Ok(Operand::Term(Term::Literal(crate::term::Literal::boolean(false)))),
        _ if c.looks_like_pname() => Ok(Operand::Term(Term::Iri(c.parse_prefixed_name()?))),
        _ => Err(c.error("expected a variable or constant in FILTER")),
    }
}

/// Compares two terms under FILTER semantics.
///
/// Numeric literals compare by value. Other literals compare lexically when
/// both are strings or share a datatype. Mixing a numeric with a
/// non-numeric literal is an error. IRIs and blank nodes support only
/// `=` and `!=` (term identity).
pub fn compare_terms(left: &Term, op: CompareOp, right: &Term) -> Result<bool, RdfError> {
    match (left, right) {
        (Term::Literal(a), Term::Literal(b)) => match (a.is_numeric(), b.is_numeric()) {
            (true, true) => {
                let (x, y) = (a.as_f64().unwrap_or(f64::NAN), b.as_f64().unwrap_or(f64::NAN));
                Ok(match x.partial_cmp(&y) {
                    Some(ord) => op.holds(ord),
                    None => op == CompareOp::Ne,
                })
            }
            (false, false) => {
                if matches!(op, CompareOp::Eq | CompareOp::Ne) {
                    return Ok(op.holds(if a == b { Ordering::Equal } else { Ordering::Less }));
                }
                let comparable = (a.is_string() && b.is_string()) || a.datatype() == b.datatype();
                if !comparable {
                    return Err(RdfError::Query(format!(
                        "cannot order {} and {} with '{}'",
                        a,
                        b,
                        op.symbol()
                    )));
                }
                Ok(op.holds(a.lexical().cmp(b.lexical())))
            }
            _ => Err(RdfError::Query(format!(
                "mixed numeric and non-numeric comparison: {} {} {}",
                a,
                op.symbol(),
                b
            ))),
        },
        _ => match op {
            CompareOp::Eq => Ok(left == right),
            CompareOp::Ne => Ok(left != right),
            _ => Err(RdfError::Query(format!(
                "operator '{}' is not defined for {} and {}",
                op.symbol(),
                left,
                right
            ))),
        },
    }
}

/// Compiles a FILTER regex with SPARQL flags (`i`, `m`, `s`, `x`).
pub fn compile_regex(pattern: &str, flags: &str) -> Result<Regex, RdfError> {
    let mut builder = RegexBuilder::new(pattern);
    for f in flags.chars() {
        match f {
            'i' => builder.case_insensitive(true),
            'm' => builder.multi_line(true),
            's' => builder.dot_matches_new_line(true),
            'x' => builder.ignore_whitespace(true),
            other => return Err(RdfError::Query(format!("unsupported regex flag '{other}'"))),
        };
    }
    builder.build().map_err(|e| RdfError::Query(format!("invalid regex: {e}")))
}

/// Text a regex is matched against: literal lexical form or IRI text.
pub fn regex_subject(term: &Term) -> Option<&str> {
    match term {
        Term::Literal(l) => Some(l.lexical()),
        Term::Iri(i) => Some(i.as_str()),
        Term::BlankNode(_) => None,
    }
}

type Row = Vec<Option<Term>>;

enum CompiledFilter {
    Compare { left: Slot, op: CompareOp, right: Slot },
    Regex { var: usize, regex: Regex },
}

enum Slot {
    Var(usize),
    Term(Term),
}

impl Slot {
    fn resolve<'a>(&'a self, row: &'a Row) -> &'a Term {
        match self {
            Slot::Var(i) => row[*i].as_ref().expect("filter variables are bound"),
            Slot::Term(t) => t,
        }
    }
}

pub(crate) fn evaluate(store: &QuadStore, query: &SelectQuery) -> Result<Solutions, RdfError> {
    query.validate()?;
    let vars = query.pattern_variables();
    let slot_of = |v: &str| vars.iter().position(|x| x == v).expect("validated variable");

    let filters: Vec<CompiledFilter> = query
        .filters
        .iter()
        .map(|f| {
            Ok(match f {
                Filter::Compare { left, op, right } => {
                    let slot = |o: &Operand| match o {
                        Operand::Var(v) => Slot::Var(slot_of(v)),
                        Operand::Term(t) => Slot::Term(t.clone()),
                    };
                    CompiledFilter::Compare {
                        left: slot(left),
                        op: *op,
                        right: slot(right),
                    }
                }
                Filter::Regex { var, pattern, flags } => CompiledFilter::Regex {
                    var: slot_of(var),
                    regex: compile_regex(pattern, flags)?,
                },
            })
        })
        .collect::<Result<_, RdfError>>()?;

    let scope = match &query.graph {
        Some(g) => Scope::Graph(g),
        None => Scope::Union,
    };

    let mut rows: Vec<Row> = vec![vec![None; vars.len()]];
    let mut remaining: Vec<&NodeTriple> = query.patterns.iter().collect();
    let mut bound: BTreeSet<usize> = BTreeSet::new();
    while !remaining.is_empty() && !rows.is_empty() {
        // most selective pattern first: most constant or already-bound positions
        let pick = remaining
            .iter()
            .enumerate()
            .max_by_key(|(i, p)| {
                let fixed = [&p.subject, &p.predicate, &p.object]
                    .iter()
                    .filter(|n| match n {
                        Node::Term(_) => true,
                        Node::Var(v) => bound.contains(&slot_of(v)),
                    })
                    .count();
                (fixed, std::cmp::Reverse(*i))
            })
            .map(|(i, _)| i)
            .expect("non-empty");
        let pattern = remaining.remove(pick);
        let mut next = Vec::new();
        for row in &rows {
            extend_row(store, scope, pattern, row, &slot_of, &mut next);
        }
        for node in [&pattern.subject, &pattern.predicate, &pattern.object] {
            if let Node::Var(v) = node {
                bound.insert(slot_of(v));
            }
        }
        rows = next;
    }
    if query.patterns.is_empty() {
        rows.clear();
    }

    let mut kept = Vec::with_capacity(rows.len());
    for row in rows {
        let mut pass = true;
        for f in &filters {
            let ok = match f {
                CompiledFilter::Compare { left, op, right } => compare_terms(left.resolve(&row), *op, right.resolve(&row))?,
                CompiledFilter::Regex { var, regex } => {
                    regex_subject(row[*var].as_ref().expect("bound")).is_some_and(|s| regex.is_match(s))
                }
            };
            if !ok {
                pass = false;
                break;
            }
        }
        if pass {
            kept.push(row);
        }
    }

    let projection: Vec<usize> = query.variables.iter().map(|v| slot_of(v)).collect();
    let mut out: Vec<Vec<Term>> = kept
        .into_iter()
        .map(|row| projection.iter().map(|&i| row[i].clone().expect("bound")).collect())
        .collect();
    out.sort();
    if query.distinct {
        out.dedup();
    }
    let offset = query.offset.unwrap_or(0);
    let mut out: Vec<Vec<Term>> = out.into_iter().skip(offset).collect();
    if let Some(limit) = query.limit {
        out.truncate(limit);
    }
    Ok(Solutions {
        variables: query.variables.clone(),
        rows: out,
    })
}

fn extend_row(
    store: &QuadStore,
    scope: Scope<'_>,
    pattern: &NodeTriple,
    row: &Row,
    slot_of: &dyn Fn(&str) -> usize,
    out: &mut Vec<Row>,
) {
    let value = |node: &Node| -> Option<Term> {
        match node {
            Node::Term(t) => Some(t.clone()),
            Node::Var(v) => row[slot_of(v)].clone(),
        }
    };
    let s_val = value(&pattern.subject);
    let p_val = value(&pattern.predicate);
    let o_val = value(&pattern.object);
    let subject = match &s_val {
        Some(t) => match t.to_subject() {
            Some(s) => Some(s),
            None => return,
        },
        None => None,
    };
    let predicate = match &p_val {
        Some(Term::Iri(i)) => Some(i.clone()),
        Some(_) => return,
        None => None,
    };
    for t in store.triples_matching(scope, subject.as_ref(), predicate.as_ref(), o_val.as_ref()) {
        let mut next = row.clone();
        let mut ok = true;
        let candidates = [
            (&pattern.subject, Term::from(t.subject.clone())),
            (&pattern.predicate, Term::Iri(t.predicate.clone())),
            (&pattern.object, t.object.clone()),
        ];
        for (node, term) in candidates {
            if let Node::Var(v) = node {
                let slot = slot_of(v);
                match &next[slot] {
                    Some(existing) if existing != &term => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => next[slot] = Some(term),
                }
            }
        }
        if ok {
            out.push(next);
        }
    }
}
