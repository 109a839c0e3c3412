//! Corpus lexicography toolkit.
//!
//! The crate takes tab-delimited bibliographic exports through record
//! cleaning ([`ingest`]), an eight-step normalisation and stemming pipeline
//! ([`pipeline`]), document-frequency dictionaries with rare-word pruning
//! ([`dictionary`]), power-law tail fitting ([`stats`]) and comparison against
//! an external academic word list ([`compare`]).
//!
//! With the default `parallel` feature, per-document work runs on rayon;
//! every parallel entry point has a `*_seq` twin that is always compiled.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod config;
pub mod dictionary;
mod error;
pub mod ingest;
pub mod pipeline;
pub mod stats;
pub mod stem;

pub use config::PipelineConfig;
pub use dictionary::{DictEntry, Dictionary, Provenance};
pub use error::{Error, Result};
pub use pipeline::{Pipeline, Step, TokenList};

/// Hex SHA-256 digest of `bytes`, truncated to 16 characters.
pub fn short_digest(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let full = hex::encode(Sha256::digest(bytes));
    full[..16].to_string()
}
