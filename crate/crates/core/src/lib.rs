//! Deterministic push-gossip simulation over unstructured overlays, with a
//! generating-function model of the gossip phase transition.

pub mod engine;
pub mod error;
pub mod fmt;
pub mod metrics;
pub mod protocol;
pub mod seed;
pub mod theory;
pub mod topology;

pub use error::{Error, Result};
