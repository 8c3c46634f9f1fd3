//! Knowledge items, vocabulary, ingest, search, workflows and material cards
//! for a materials dataspace.
//!
//! The numeric parts (units, tensile evaluation, Hockett–Sherby fitting) are
//! generic over `F: num_traits::Float`; the aliases below fix them to `f64`.

pub mod analysis;
pub mod connectors;
pub mod dataspace;
pub mod fixtures;
pub mod form;
pub mod ingest;
pub mod knowledge;
pub mod material;
pub mod ns;
pub mod search;
pub mod units;
pub mod vocabulary;
pub mod workflow;

pub use dataspace::Dataspace;
pub use knowledge::{Attachment, IntegrationLevel, KItem, KType, Link};
pub use vocabulary::{mint_iri, Registry, VocabTerm};

pub type Unit = units::Unit;
pub type TensileCurveF64 = material::TensileCurve<f64>;
pub type SpecimenGeometryF64 = material::SpecimenGeometry<f64>;
pub type MechanicalPropertiesF64 = material::MechanicalProperties<f64>;
pub type HockettSherbyF64 = material::HockettSherby<f64>;

use matspace_rdf::RdfError;

#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error("{kind} '{id}' not found")]
    NotFound { kind: &'static str, id: String },
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("label '{0}' reduces to an empty slug")]
    EmptySlug(String),
    #[error("IRI <{iri}> already registered for term '{existing}'")]
    Collision { iri: String, existing: String },
    #[error("unknown unit symbol '{0}'")]
    UnknownUnit(String),
    #[error("incompatible units: {from} and {to}")]
    IncompatibleUnits { from: String, to: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unmapped keys in strict mode: {}", .0.join(", "))]
    Unmapped(Vec<String>),
    #[error("unresolved template placeholder '{0}'")]
    Placeholder(String),
    #[error("no linear region found")]
    NoLinearRegion,
    #[error("specimen did not yield")]
    NoYield,
    #[error("empty plastic region")]
    EmptyPlasticRegion,
    #[error("fit did not converge: {0}")]
    NonConvergence(String),
    #[error("provenance cycle at <{0}>")]
    ProvenanceCycle(String),
    #[error("operation failed: {0}")]
    Operation(String),
    #[error(transparent)]
    Query(RdfError),
    #[error(transparent)]
    Rdf(RdfError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("fetch failed: {0}")]
    Fetch(String),
}

impl From<RdfError> for CoreError {
    fn from(e: RdfError) -> Self {
        match e {
            RdfError::Query(_) => CoreError::Query(e),
            other => CoreError::Rdf(other),
        }
    }
}

impl CoreError {
    pub fn not_found(kind: &'static str, id: impl Into<String>) -> Self {
        CoreError::NotFound { kind, id: id.into() }
    }

    /// Machine-readable error code shared by the REST and CLI surfaces.
    pub fn code(&self) -> &'static str {
        match self {
            CoreError::NotFound { .. } => "not-found",
            CoreError::Conflict(_) | CoreError::Collision { .. } => "conflict",
            CoreError::Invalid(_) | CoreError::EmptySlug(_) | CoreError::Rdf(_) | CoreError::Json(_) => "invalid-input",
            CoreError::Query(_) => "query-error",
            CoreError::UnknownUnit(_) | CoreError::IncompatibleUnits { .. } => "unit-error",
            CoreError::Parse(_) | CoreError::Unmapped(_) | CoreError::Placeholder(_) => "ingest-error",
            CoreError::NoLinearRegion
            | CoreError::NoYield
            | CoreError::EmptyPlasticRegion
            | CoreError::NonConvergence(_) => "analysis-error",
            CoreError::ProvenanceCycle(_) | CoreError::Operation(_) | CoreError::Fetch(_) => "operation-failed",
            CoreError::Io(_) => "io-error",
        }
    }
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
