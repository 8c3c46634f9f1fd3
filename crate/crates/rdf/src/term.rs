//! RDF terms: IRIs, literals, blank nodes and triples.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::vocab::{rdf, xsd};
use crate::RdfError;

/// An absolute IRI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, RdfError> {
        let value = value.into();
        validate_iri(&value)?;
        Ok(Iri(value))
    }

    /// Builds an IRI from a compile-time constant that is known to be valid.
    ///
    /// Panics on invalid input; only use with literals.
    pub fn from_static(value: &'static str) -> Self {
        Iri::new(value).expect("static IRI must be valid")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// Appends `suffix` and revalidates.
    pub fn join(&self, suffix: &str) -> Result<Iri, RdfError> {
        Iri::new(format!("{}{}", self.0, suffix))
    }
}

fn validate_iri(value: &str) -> Result<(), RdfError> {
    let invalid = |reason: &str| RdfError::InvalidIri {
        iri: value.to_string(),
        reason: reason.to_string(),
    };
    if value.is_empty() {
        return Err(invalid("empty"));
    }
    let Some(colon) = value.find(':') else {
        return Err(invalid("missing scheme"));
    };
    let scheme = &value[..colon];
    let mut chars = scheme.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return Err(invalid("scheme must start with a letter")),
    }
    if !chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.')) {
        return Err(invalid("bad scheme character"));
    }
    if value
        .chars()
        .any(|c| c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
    {
        return Err(invalid("forbidden character"));
    }
    Ok(())
}

impl TryFrom<String> for Iri {
    type Error = RdfError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Iri::new(value)
    }
}

impl From<Iri> for String {
    fn from(iri: Iri) -> Self {
        iri.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

/// A blank node label, without the `_:` prefix.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlankNode(String);

impl BlankNode {
    pub fn new(label: impl Into<String>) -> Result<Self, RdfError> {
        let label = label.into();
        if label.is_empty()
            || !label
                .chars()
                .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
            || label.ends_with('.')
        {
            return Err(RdfError::InvalidBlankNode(label));
        }
        Ok(BlankNode(label))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BlankNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "_:{}", self.0)
    }
}

/// A literal with datatype and optional language tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    lexical: String,
    datatype: Iri,
    language: Option<String>,
}

impl Literal {
    /// A plain `xsd:string` literal.
    pub fn string(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: Iri::from_static(xsd::STRING),
            language: None,
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Result<Self, RdfError> {
        let lexical = lexical.into();
        if datatype.as_str() == rdf::LANG_STRING {
            return Err(RdfError::InvalidLiteral {
                lexical,
                reason: "language-tagged strings need a language tag".into(),
            });
        }
        if is_numeric_datatype(datatype.as_str()) && !valid_numeric_lexical(datatype.as_str(), &lexical) {
            return Err(RdfError::InvalidLiteral {
                reason: format!("not a valid lexical form for {}", datatype.as_str()),
                lexical,
            });
        }
        if datatype.as_str() == xsd::BOOLEAN && !matches!(lexical.as_str(), "true" | "false" | "1" | "0") {
            return Err(RdfError::InvalidLiteral {
                lexical,
                reason: "not a boolean".into(),
            });
        }
        Ok(Literal {
            lexical,
            datatype,
            language: None,
        })
    }

    pub fn lang(lexical: impl Into<String>, language: impl Into<String>) -> Result<Self, RdfError> {
        let language = language.into();
        let ok = !language.is_empty()
            && language.split('-').all(|part| {
                !part.is_empty() && part.len() <= 8 && part.chars().all(|c| c.is_ascii_alphanumeric())
            })
            && language.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
        if !ok {
            return Err(RdfError::InvalidLiteral {
                lexical: lexical.into(),
                reason: format!("bad language tag {language:?}"),
            });
        }
        Ok(Literal {
            lexical: lexical.into(),
            datatype: Iri::from_static(rdf::LANG_STRING),
            language: Some(language.to_ascii_lowercase()),
        })
    }

    pub fn double(value: f64) -> Self {
        Literal {
            lexical: format_double(value),
            datatype: Iri::from_static(xsd::DOUBLE),
            language: None,
        }
    }

    pub fn integer(value: i64) -> Self {
        Literal {
            lexical: value.to_string(),
            datatype: Iri::from_static(xsd::INTEGER),
            language: None,
        }
    }

    pub fn boolean(value: bool) -> Self {
        Literal {
            lexical: value.to_string(),
            datatype: Iri::from_static(xsd::BOOLEAN),
            language: None,
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &Iri {
        &self.datatype
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }

    pub fn is_numeric(&self) -> bool {
        is_numeric_datatype(self.datatype.as_str())
    }

    /// Numeric value for numeric datatypes.
    pub fn as_f64(&self) -> Option<f64> {
        if !self.is_numeric() {
            return None;
        }
        parse_numeric(&self.lexical)
    }

    /// True for `xsd:string` and language-tagged strings.
    pub fn is_string(&self) -> bool {
        matches!(self.datatype.as_str(), xsd::STRING | rdf::LANG_STRING)
    }
}

/// Shortest round-trip text for a double, always with a fractional part or exponent.
pub fn format_double(value: f64) -> String {
    if value.is_nan() {
        return "NaN".into();
    }
    if value.is_infinite() {
        return if value > 0.0 { "INF".into() } else { "-INF".into() };
    }
    format!("{value:?}")
}

fn parse_numeric(lexical: &str) -> Option<f64> {
    match lexical {
        "INF" | "+INF" => Some(f64::INFINITY),
        "-INF" => Some(f64::NEG_INFINITY),
        "NaN" => Some(f64::NAN),
        other => other.parse::<f64>().ok(),
    }
}

const INTEGER_TYPES: &[&str] = &[
    xsd::INTEGER,
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

pub fn is_numeric_datatype(datatype: &str) -> bool {
    matches!(datatype, xsd::DECIMAL | xsd::DOUBLE | xsd::FLOAT) || INTEGER_TYPES.contains(&datatype)
}

fn valid_numeric_lexical(datatype: &str, lexical: &str) -> bool {
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let unsigned = lexical.strip_prefix(['+', '-']).unwrap_or(lexical);
    if INTEGER_TYPES.contains(&datatype) {
        return digits(unsigned);
    }
    if datatype == xsd::DECIMAL {
        return match unsigned.split_once('.') {
            Some((int, frac)) => (int.is_empty() || digits(int)) && (frac.is_empty() || digits(frac)) && !(int.is_empty() && frac.is_empty()),
            None => digits(unsigned),
        };
    }
    // double / float
    if matches!(lexical, "INF" | "+INF" | "-INF" | "NaN") {
        return true;
    }
    let (mantissa, exponent) = match unsigned.find(['e', 'E']) {
        Some(i) => (&unsigned[..i], Some(&unsigned[i + 1..])),
        None => (unsigned, None),
    };
    let mantissa_ok = match mantissa.split_once('.') {
        Some((int, frac)) => (int.is_empty() || digits(int)) && (frac.is_empty() || digits(frac)) && !(int.is_empty() && frac.is_empty()),
        None => digits(mantissa),
    };
    let exponent_ok = exponent.is_none_or(|e| digits(e.strip_prefix(['+', '-']).unwrap_or(e)));
    mantissa_ok && exponent_ok
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", escape_string(&self.lexical))?;
        if let Some(lang) = &self.language {
            write!(f, "@{lang}")
        } else if self.datatype.as_str() != xsd::STRING {
            write!(f, "^^{}", self.datatype)
        } else {
            Ok(())
        }
    }
}

pub(crate) fn escape_string(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{8}' => out.push_str("\\b"),
            '\u{c}' => out.push_str("\\f"),
            c if c.is_control() => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// Any RDF term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Iri(Iri),
    BlankNode(BlankNode),
    Literal(Literal),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    pub fn as_blank(&self) -> Option<&BlankNode> {
        match self {
            Term::BlankNode(b) => Some(b),
            _ => None,
        }
    }

    /// Converts into a subject if the term is not a literal.
    pub fn to_subject(&self) -> Option<Subject> {
        match self {
            Term::Iri(iri) => Some(Subject::Iri(iri.clone())),
            Term::BlankNode(b) => Some(Subject::BlankNode(b.clone())),
            Term::Literal(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => iri.fmt(f),
            Term::BlankNode(b) => b.fmt(f),
            Term::Literal(lit) => lit.fmt(f),
        }
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<BlankNode> for Term {
    fn from(b: BlankNode) -> Self {
        Term::BlankNode(b)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

impl From<Subject> for Term {
    fn from(s: Subject) -> Self {
        match s {
            Subject::Iri(iri) => Term::Iri(iri),
            Subject::BlankNode(b) => Term::BlankNode(b),
        }
    }
}

/// Subject position: IRI or blank node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Subject {
    Iri(Iri),
    BlankNode(BlankNode),
}

impl Subject {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Subject::Iri(iri) => Some(iri),
            Subject::BlankNode(_) => None,
        }
    }

    pub fn as_blank(&self) -> Option<&BlankNode> {
        match self {
            Subject::BlankNode(b) => Some(b),
            Subject::Iri(_) => None,
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Iri(iri) => iri.fmt(f),
            Subject::BlankNode(b) => b.fmt(f),
        }
    }
}

impl From<Iri> for Subject {
    fn from(iri: Iri) -> Self {
        Subject::Iri(iri)
    }
}

impl From<BlankNode> for Subject {
    fn from(b: BlankNode) -> Self {
        Subject::BlankNode(b)
    }
}

/// An RDF triple. The predicate is always an IRI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Subject,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: impl Into<Subject>, predicate: Iri, object: impl Into<Term>) -> Self {
        Triple {
            subject: subject.into(),
            predicate,
            object: object.into(),
        }
    }

    /// N-Triples line without the trailing newline.
    pub fn to_ntriples(&self) -> String {
        format!("{} {} {} .", self.subject, self.predicate, self.object)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ntriples())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iri_validation() {
        assert!(Iri::new("https://w3id.org/steel/ProcessOntology/DX56D").is_ok());
        assert!(Iri::new("dsms://kitem/abc").is_ok());
        assert!(Iri::new("").is_err());
        assert!(Iri::new("no-scheme").is_err());
        assert!(Iri::new("http://a b").is_err());
        assert!(Iri::new("1http://x").is_err());
    }

    #[test]
    fn numeric_literals_checked() {
        let double = Iri::from_static(xsd::DOUBLE);
        assert!(Literal::typed("106.89333758774", double.clone()).is_ok());
        assert!(Literal::typed("1e-3", double.clone()).is_ok());
        assert!(Literal::typed(".5", double.clone()).is_ok());
        assert!(Literal::typed("abc", double.clone()).is_err());
        assert!(Literal::typed("1.5", Iri::from_static(xsd::INTEGER)).is_err());
        assert!(Literal::typed("-42", Iri::from_static(xsd::INTEGER)).is_ok());
        assert_eq!(
            Literal::typed("106.89333758774", double).unwrap().as_f64(),
            Some(106.89333758774)
        );
    }

    #[test]
    fn language_only_on_lang_strings() {
        assert!(Literal::typed("x", Iri::from_static(rdf::LANG_STRING)).is_err());
        let l = Literal::lang("Werkstoff", "DE").unwrap();
        assert_eq!(l.language(), Some("de"));
        assert!(Literal::lang("x", "").is_err());
    }

    #[test]
    fn double_formatting_round_trips() {
        assert_eq!(format_double(8.0), "8.0");
        assert_eq!(format_double(1.55), "1.55");
        assert_eq!(format_double(1e-7), "1e-7");
    }
}
