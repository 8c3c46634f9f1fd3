//! REST gateway and command line over a matspace dataspace.

pub mod api;
pub mod cli;
pub mod error;
pub mod ops;
pub mod state;

pub use api::router;
pub use state::{ApiConfig, Gateway};
