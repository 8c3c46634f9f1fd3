//! RDF terms, Turtle I/O, a named-graph quad store and a small SPARQL SELECT engine.

pub mod iso;
pub mod sparql;
pub mod store;
mod syntax;
pub mod term;
pub mod turtle;
pub mod vocab;

pub use iso::isomorphic;
pub use sparql::{parse_select, CompareOp, Filter, Operand, SelectQuery, Solutions};
pub use store::QuadStore;
pub use syntax::{Node, NodeTriple};
pub use term::{format_double, BlankNode, Iri, Literal, Subject, Term, Triple};
pub use turtle::{parse_turtle, serialize_turtle, TurtleDocument, TurtleParser};

#[derive(Debug, thiserror::Error)]
pub enum RdfError {
    #[error("invalid IRI <{iri}>: {reason}")]
    InvalidIri { iri: String, reason: String },
    #[error("invalid blank node label '{0}'")]
    InvalidBlankNode(String),
    #[error("invalid literal \"{lexical}\": {reason}")]
    InvalidLiteral { lexical: String, reason: String },
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid triple: {0}")]
    InvalidTriple(String),
    #[error("query error: {0}")]
    Query(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot error: {0}")]
    Snapshot(String),
}
