//! Character-level parsing shared by the Turtle and SPARQL front ends.
//!
//! Both languages use the same term syntax and the same triples block
//! grammar (predicate-object lists, blank node property lists, collections).
//! SPARQL additionally allows variables in any position; Turtle rejects them.

use std::collections::BTreeMap;

use crate::term::{BlankNode, Iri, Literal, Subject, Term, Triple};
use crate::vocab::{rdf, xsd};
use crate::RdfError;

/// A term or a variable in a triple pattern.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Term(Term),
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeTriple {
    pub subject: Node,
    pub predicate: Node,
    pub object: Node,
}

pub(crate) struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
    pub base: Option<url::Url>,
    pub prefixes: BTreeMap<String, String>,
    pub allow_variables: bool,
    blank_labels: BTreeMap<String, BlankNode>,
    blank_prefix: String,
    blank_counter: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str) -> Self {
        Cursor {
            src,
            pos: 0,
            line: 1,
            column: 1,
            base: None,
            prefixes: BTreeMap::new(),
            allow_variables: false,
            blank_labels: BTreeMap::new(),
            blank_prefix: "b".into(),
            blank_counter: 0,
        }
    }

    pub fn set_blank_prefix(&mut self, prefix: &str) {
        self.blank_prefix = prefix.to_string();
    }

    pub fn error(&self, message: impl Into<String>) -> RdfError {
        RdfError::Syntax {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    pub fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    pub fn peek_nth(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    pub fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    pub fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    pub fn expect_char(&mut self, expected: char) -> Result<(), RdfError> {
        match self.peek() {
            Some(c) if c == expected => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(self.error(format!("expected '{expected}', found '{c}'"))),
            None => Err(self.error(format!("expected '{expected}', found end of input"))),
        }
    }

    /// Skips whitespace and `#` comments.
    pub fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    /// Case-insensitive keyword match followed by a non-name character.
    pub fn eat_keyword(&mut self, keyword: &str) -> bool {
        let rest = self.rest();
        if rest.len() < keyword.len() || !rest.is_char_boundary(keyword.len()) {
            return false;
        }
        if !rest[..keyword.len()].eq_ignore_ascii_case(keyword) {
            return false;
        }
        if let Some(next) = rest[keyword.len()..].chars().next() {
            if next.is_alphanumeric() || next == '_' || next == ':' || next == '-' {
                return false;
            }
        }
        for _ in keyword.chars() {
            self.bump();
        }
        true
    }

    pub fn fresh_blank(&mut self) -> BlankNode {
        let label = format!("{}{}", self.blank_prefix, self.blank_counter);
        self.blank_counter += 1;
        BlankNode::new(label).expect("generated label is valid")
    }

    fn labelled_blank(&mut self, label: &str) -> BlankNode {
        if let Some(b) = self.blank_labels.get(label) {
            return b.clone();
        }
        let b = self.fresh_blank();
        self.blank_labels.insert(label.to_string(), b.clone());
        b
    }

    fn resolve_iri(&self, raw: &str) -> Result<Iri, RdfError> {
        if let Ok(iri) = Iri::new(raw) {
            return Ok(iri);
        }
        match &self.base {
            Some(base) => {
                let joined = base
                    .join(raw)
                    .map_err(|e| self.error(format!("cannot resolve <{raw}>: {e}")))?;
                Iri::new(joined.as_str()).map_err(|e| self.error(e.to_string()))
            }
            None => Err(self.error(format!("relative IRI <{raw}> without a base"))),
        }
    }

    /// `<...>` with `\u` escapes; resolves against the base.
    pub fn parse_iriref(&mut self) -> Result<Iri, RdfError> {
        self.expect_char('<')?;
        let mut raw = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some('\\') => raw.push(self.parse_unicode_escape()?),
                Some(c) if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => {
                    return Err(self.error(format!("illegal character {c:?} in IRI")))
                }
                Some(c) => raw.push(c),
                None => return Err(self.error("unterminated IRI")),
            }
        }
        self.resolve_iri(&raw)
    }

    fn parse_unicode_escape(&mut self) -> Result<char, RdfError> {
        let len = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.error("bad escape in IRI")),
        };
        self.read_hex(len)
    }

    fn read_hex(&mut self, len: usize) -> Result<char, RdfError> {
        let mut code = 0u32;
        for _ in 0..len {
            let c = self.bump().ok_or_else(|| self.error("truncated escape"))?;
            let d = c.to_digit(16).ok_or_else(|| self.error("bad hex digit"))?;
            code = code * 16 + d;
        }
        char::from_u32(code).ok_or_else(|| self.error("escape is not a valid code point"))
    }

    fn is_pn_chars_base(c: char) -> bool {
        c.is_alphabetic()
    }

    fn is_pn_chars(c: char) -> bool {
        c.is_alphanumeric() || c == '_' || c == '-' || c == '\u{B7}'
    }

    /// Prefix part up to and including ':'. Returns `None` without consuming if not a prefixed name.
    fn scan_pname_ns(&self) -> Option<(String, usize)> {
        let rest = self.rest();
        let mut prefix = String::new();
        let mut chars = rest.char_indices().peekable();
        if let Some(&(_, c)) = chars.peek() {
            if c == ':' {
                return Some((String::new(), 1));
            }
            if !Self::is_pn_chars_base(c) {
                return None;
            }
        }
        while let Some((i, c)) = chars.next() {
            if c == ':' {
                if prefix.ends_with('.') {
                    return None;
                }
                return Some((prefix, i + 1));
            }
            if Self::is_pn_chars(c) || c == '.' {
                prefix.push(c);
            } else {
                return None;
            }
        }
        None
    }

    pub fn looks_like_pname(&self) -> bool {
        self.scan_pname_ns().is_some()
    }

    /// `prefix:local` or `prefix:`.
    pub fn parse_prefixed_name(&mut self) -> Result<Iri, RdfError> {
        let (prefix, len) = self
            .scan_pname_ns()
            .ok_or_else(|| self.error("expected a prefixed name"))?;
        let namespace = self
            .prefixes
            .get(&prefix)
            .cloned()
            .ok_or_else(|| self.error(format!("undefined prefix '{prefix}:'")))?;
        for _ in 0..self.src[self.pos..self.pos + len].chars().count() {
            self.bump();
        }
        let local = self.parse_local_name()?;
        Iri::new(format!("{namespace}{local}")).map_err(|e| self.error(e.to_string()))
    }

    pub fn parse_pname_ns(&mut self) -> Result<String, RdfError> {
        let (prefix, len) = self
            .scan_pname_ns()
            .ok_or_else(|| self.error("expected a prefix declaration name"))?;
        for _ in 0..self.src[self.pos..self.pos + len].chars().count() {
            self.bump();
        }
        Ok(prefix)
    }

    fn parse_local_name(&mut self) -> Result<String, RdfError> {
        let mut local = String::new();
        let mut first = true;
        loop {
            let Some(c) = self.peek() else { break };
            let accept = if first {
                Self::is_pn_chars_base(c) || c == '_' || c == ':' || c.is_ascii_digit() || c == '%' || c == '\\'
            } else {
                Self::is_pn_chars(c) || c == ':' || c == '%' || c == '\\' || c == '.'
            };
            if !accept {
                break;
            }
            if c == '.' {
                // a dot is only part of the name when more name characters follow
                match self.peek_nth(1) {
                    Some(n) if Self::is_pn_chars(n) || n == ':' || n == '%' || n == '\\' || n == '.' => {
                        // a run of dots still needs a name character after it
                        let rest = &self.rest()[1..];
                        let after_dots = rest.trim_start_matches('.');
                        match after_dots.chars().next() {
                            Some(n) if Self::is_pn_chars(n) || n == ':' || n == '%' || n == '\\' => {}
                            _ => break,
                        }
                    }
                    _ => break,
                }
            }
            self.bump();
            match c {
                '%' => {
                    let h1 = self.bump().filter(|c| c.is_ascii_hexdigit());
                    let h2 = self.bump().filter(|c| c.is_ascii_hexdigit());
                    match (h1, h2) {
                        (Some(a), Some(b)) => {
                            local.push('%');
                            local.push(a);
                            local.push(b);
                        }
                        _ => return Err(self.error("bad percent escape in local name")),
                    }
                }
                '\\' => {
                    let e = self.bump().ok_or_else(|| self.error("truncated escape"))?;
                    if !"_~.-!$&'()*+,;=/?#@%".contains(e) {
                        return Err(self.error(format!("illegal local name escape \\{e}")));
                    }
                    local.push(e);
                }
                c => local.push(c),
            }
            first = false;
        }
        Ok(local)
    }

    pub fn parse_iri(&mut self) -> Result<Iri, RdfError> {
        if self.peek() == Some('<') {
            self.parse_iriref()
        } else {
            self.parse_prefixed_name()
        }
    }

    fn parse_string(&mut self) -> Result<String, RdfError> {
        let quote = self.bump().ok_or_else(|| self.error("expected string"))?;
        let long = self.peek() == Some(quote) && self.peek_nth(1) == Some(quote);
        if long {
            self.bump();
            self.bump();
        }
        let mut value = String::new();
        loop {
            let c = self.bump().ok_or_else(|| self.error("unterminated string"))?;
            if c == quote {
                if !long {
                    break;
                }
                if self.peek() == Some(quote) && self.peek_nth(1) == Some(quote) {
                    // closing triple quote, but extra quotes belong to content
                    while self.peek_nth(2) == Some(quote) {
                        value.push(quote);
                        self.bump();
                    }
                    self.bump();
                    self.bump();
                    break;
                }
                value.push(c);
                continue;
            }
            match c {
                '\\' => {
                    let e = self.bump().ok_or_else(|| self.error("truncated escape"))?;
                    value.push(match e {
                        't' => '\t',
                        'b' => '\u{8}',
                        'n' => '\n',
                        'r' => '\r',
                        'f' => '\u{c}',
                        '"' => '"',
                        '\'' => '\'',
                        '\\' => '\\',
                        'u' => self.read_hex(4)?,
                        'U' => self.read_hex(8)?,
                        other => return Err(self.error(format!("illegal string escape \\{other}"))),
                    });
                }
                '\n' | '\r' if !long => return Err(self.error("newline in short string")),
                c => value.push(c),
            }
        }
        Ok(value)
    }

    pub fn parse_number(&mut self) -> Result<Literal, RdfError> {
        let mut text = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            text.push(c);
            self.bump();
        }
        let mut seen_digit = false;
        let mut seen_dot = false;
        let mut seen_exp = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                seen_digit = true;
                text.push(c);
                self.bump();
            } else if c == '.' && !seen_dot && !seen_exp {
                // trailing dot ends the statement, not the number
                match self.peek_nth(1) {
                    Some(n) if n.is_ascii_digit() => {
                        seen_dot = true;
                        text.push(c);
                        self.bump();
                    }
                    Some('e' | 'E') if seen_digit => {
                        seen_dot = true;
                        text.push(c);
                        self.bump();
                    }
                    _ => break,
                }
            } else if (c == 'e' || c == 'E') && !seen_exp {
                seen_exp = true;
                text.push(c);
                self.bump();
                if let Some(s @ ('+' | '-')) = self.peek() {
                    text.push(s);
                    self.bump();
                }
            } else {
                break;
            }
        }
        if !seen_digit {
            return Err(self.error(format!("malformed number '{text}'")));
        }
        let datatype = if seen_exp {
            xsd::DOUBLE
        } else if seen_dot {
            xsd::DECIMAL
        } else {
            xsd::INTEGER
        };
        Literal::typed(text, Iri::from_static(datatype)).map_err(|e| self.error(e.to_string()))
    }

    pub fn parse_literal(&mut self) -> Result<Literal, RdfError> {
        let lexical = self.parse_string()?;
        if self.peek() == Some('@') {
            self.bump();
            let mut tag = String::new();
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || c == '-' {
                    tag.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            return Literal::lang(lexical, tag).map_err(|e| self.error(e.to_string()));
        }
        if self.rest().starts_with("^^") {
            self.bump();
            self.bump();
            let datatype = self.parse_iri()?;
            return Literal::typed(lexical, datatype).map_err(|e| self.error(e.to_string()));
        }
        Ok(Literal::string(lexical))
    }

    pub fn parse_variable(&mut self) -> Result<String, RdfError> {
        self.bump(); // ? or $
        let mut name = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' {
                name.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if name.is_empty() {
            return Err(self.error("empty variable name"));
        }
        Ok(name)
    }

    fn blank_or_var(&mut self) -> Node {
        let b = self.fresh_blank();
        if self.allow_variables {
            Node::Var(format!("#{}", b.as_str()))
        } else {
            Node::Term(Term::BlankNode(b))
        }
    }

    /// Parses a single node in subject or object position, emitting nested triples.
    pub fn parse_node(&mut self, out: &mut Vec<NodeTriple>, object_position: bool) -> Result<Node, RdfError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('<') => Ok(Node::Term(Term::Iri(self.parse_iriref()?))),
            Some('?') | Some('$') => {
                if !self.allow_variables {
                    return Err(self.error("variables are not allowed here"));
                }
                Ok(Node::Var(self.parse_variable()?))
            }
            Some('_') if self.peek_nth(1) == Some(':') => {
                self.bump();
                self.bump();
                let mut label = String::new();
                while let Some(c) = self.peek() {
                    if c.is_alphanumeric() || c == '_' || c == '-' || (c == '.' && self.peek_nth(1).is_some_and(|n| n.is_alphanumeric() || n == '_' || n == '-')) {
                        label.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                if label.is_empty() {
                    return Err(self.error("empty blank node label"));
                }
                let b = self.labelled_blank(&label);
                if self.allow_variables {
                    Ok(Node::Var(format!("#{}", b.as_str())))
                } else {
                    Ok(Node::Term(Term::BlankNode(b)))
                }
            }
            Some('[') => {
                self.bump();
                self.skip_ws();
                let node = self.blank_or_var();
                if self.peek() == Some(']') {
                    self.bump();
                    return Ok(node);
                }
                self.parse_predicate_object_list(&node, out)?;
                self.skip_ws();
                self.expect_char(']')?;
                Ok(node)
            }
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    if self.peek() == Some(')') {
                        self.bump();
                        break;
                    }
                    items.push(self.parse_node(out, true)?);
                }
                let nil = Node::Term(Term::Iri(Iri::from_static(rdf::NIL)));
                if items.is_empty() {
                    return Ok(nil);
                }
                let cells: Vec<Node> = items.iter().map(|_| self.blank_or_var()).collect();
                for (i, item) in items.into_iter().enumerate() {
                    out.push(NodeTriple {
                        subject: cells[i].clone(),
                        predicate: Node::Term(Term::Iri(Iri::from_static(rdf::FIRST))),
                        object: item,
                    });
                    let rest = cells.get(i + 1).cloned().unwrap_or_else(|| nil.clone());
                    out.push(NodeTriple {
                        subject: cells[i].clone(),
                        predicate: Node::Term(Term::Iri(Iri::from_static(rdf::REST))),
                        object: rest,
                    });
                }
                Ok(cells[0].clone())
            }
            Some('"') | Some('\'') => {
                if !object_position {
                    return Err(self.error("literal in subject position"));
                }
                Ok(Node::Term(Term::Literal(self.parse_literal()?)))
            }
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' || (c == '.' && self.peek_nth(1).is_some_and(|n| n.is_ascii_digit())) => {
                if !object_position {
                    return Err(self.error("literal in subject position"));
                }
                Ok(Node::Term(Term::Literal(self.parse_number()?)))
            }
            Some(_) => {
                if object_position && (self.eat_keyword("true") || self.eat_keyword("false")) {
                    let text = &self.src[..self.pos];
                    let value = text.ends_with("true");
                    return Ok(Node::Term(Term::Literal(Literal::boolean(value))));
                }
                if self.looks_like_pname() {
                    return Ok(Node::Term(Term::Iri(self.parse_prefixed_name()?)));
                }
                Err(self.error(format!("unexpected character '{}'", self.peek().unwrap_or(' '))))
            }
        }
    }

    fn parse_verb(&mut self) -> Result<Node, RdfError> {
        self.skip_ws();
        if self.peek() == Some('a') {
            let next = self.peek_nth(1);
            if next.is_none_or(|n| n.is_whitespace() || n == '<' || n == '"' || n == '[' || n == '(' || n == '?' || n == '$' || n == '_') {
                self.bump();
                return Ok(Node::Term(Term::Iri(Iri::from_static(rdf::TYPE))));
            }
        }
        match self.peek() {
            Some('?') | Some('$') if self.allow_variables => Ok(Node::Var(self.parse_variable()?)),
            Some('<') => Ok(Node::Term(Term::Iri(self.parse_iriref()?))),
            Some(_) if self.looks_like_pname() => Ok(Node::Term(Term::Iri(self.parse_prefixed_name()?))),
            Some(c) => Err(self.error(format!("expected a predicate, found '{c}'"))),
            None => Err(self.error("expected a predicate, found end of input")),
        }
    }

    pub fn parse_predicate_object_list(&mut self, subject: &Node, out: &mut Vec<NodeTriple>) -> Result<(), RdfError> {
        loop {
            let predicate = self.parse_verb()?;
            loop {
                let object = self.parse_node(out, true)?;
                out.push(NodeTriple {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                self.skip_ws();
                if self.peek() == Some(',') {
                    self.bump();
                    continue;
                }
                break;
            }
            self.skip_ws();
            if self.peek() != Some(';') {
                return Ok(());
            }
            while self.peek() == Some(';') {
                self.bump();
                self.skip_ws();
            }
            // trailing ';' before '.' or ']' is allowed
            match self.peek() {
                Some('.') | Some(']') | Some('}') | None => return Ok(()),
                _ => {}
            }
        }
    }

    /// `subject predicateObjectList` or `[ ... ] predicateObjectList?`.
    pub fn parse_triples(&mut self, out: &mut Vec<NodeTriple>) -> Result<(), RdfError> {
        self.skip_ws();
        let property_list = self.peek() == Some('[');
        let subject = self.parse_node(out, false)?;
        self.skip_ws();
        if property_list && matches!(self.peek(), Some('.') | Some('}') | None) {
            return Ok(());
        }
        self.parse_predicate_object_list(&subject, out)
    }
}

/// Converts pattern triples into ground triples.
pub(crate) fn ground(node_triples: Vec<NodeTriple>) -> Result<Vec<Triple>, RdfError> {
    node_triples
        .into_iter()
        .map(|t| {
            let subject = match t.subject {
                Node::Term(Term::Iri(i)) => Subject::Iri(i),
                Node::Term(Term::BlankNode(b)) => Subject::BlankNode(b),
                _ => return Err(RdfError::InvalidTriple("subject must be an IRI or blank node".into())),
            };
            let predicate = match t.predicate {
                Node::Term(Term::Iri(i)) => i,
                _ => return Err(RdfError::InvalidTriple("predicate must be an IRI".into())),
            };
            let object = match t.object {
                Node::Term(term) => term,
                Node::Var(v) => return Err(RdfError::InvalidTriple(format!("unexpected variable ?{v}"))),
            };
            Ok(Triple {
                subject,
                predicate,
                object,
            })
        })
        .collect()
}
