//! Edit distances between RNA secondary structures represented as ordered
//! labeled trees, with optional node and edge fusion operations.

pub mod cost;
pub mod edit;
pub mod error;
pub mod fusion;
pub mod generate;
pub mod model;
pub mod multilevel;
pub mod oracle;
pub mod replay;
pub mod report;
pub mod structure;
pub mod tree;

pub use cost::Cost;
pub use error::{ConfigError, DistanceError, ParseError};
