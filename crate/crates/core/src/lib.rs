//! Mines topic-specific domain communities from massive hyperlink graphs and
//! filters streamed text corpora down to the mined domain set.
//!
//! The pipeline has four stages, one module each:
//!
//! 1. [`graph`] — ingest vertex/edge files (split for out-of-core builds)
//!    into a memory-mapped CSR adjacency structure.
//! 2. [`community`] — Leiden community detection with modularity or CPM
//!    quality functions, deterministic under a fixed RNG seed.
//! 3. [`seed`] — resolve seed domains to graph nodes and extract the
//!    community they anchor as a normalized domain set.
//! 4. [`corpus`] — stream a JSON-lines corpus, keep records whose URL host
//!    matches the domain set, deduplicate, and report statistics.

pub mod community;
pub mod corpus;
pub mod error;
pub mod graph;
pub mod ioutil;
pub mod seed;

pub use error::{Category, Error, Result};
