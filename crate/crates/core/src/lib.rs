//! Cross-lingual in-context learning and instruction-alignment toolkit.
//!
//! The crate covers exemplar retrieval for cross-lingual in-context learning,
//! alignment prompt construction, label selection by continuation
//! log-probability, instruction-data generation with experience replay, and
//! the evaluation metrics around them. Language models, translation systems
//! and embedding models sit behind client traits so every algorithm runs
//! offline against fixtures.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod instructgen;
pub mod prompting;
pub mod retrieval;
pub mod rng;
pub mod scoring;
pub mod similarity;

pub use error::{Error, Result};
