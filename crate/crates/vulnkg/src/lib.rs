//! Vulnerability knowledge graph construction and multi-modal link prediction.
//!
//! This crate builds a typed knowledge graph out of CVE, CWE, and CPE data
//! (NVD, Red Hat, and the MITRE CWE catalog), and ranks candidate weaknesses
//! and platforms for a vulnerability with a two-level graph neural network
//! whose entity states are fused with text-description embeddings. Entities
//! never get their own learned lookup vectors, so the predictor also ranks
//! links for vulnerabilities that were not present at training time.
//!
//! Module map:
//!
//! - [`tensor`]: dense f64 tensors with tape-based reverse-mode gradients
//! - [`ingest`]: NVD / Red Hat / MITRE CWE fetching and parsing, offline fixtures
//! - [`graph`]: the knowledge graph, filters, splits, persistence, analyses
//! - [`model`]: relation-graph lift, relation-level and entity-level GNNs, scoring
//! - [`fusion`]: text embeddings (remote or deterministic local fallback) and
//!   the combination layers that inject them into the entity GNN
//! - [`train`]: negative sampling, binary cross-entropy objective, Adam loop,
//!   checkpoints
//! - [`eval`]: filtered ranking, MRR / Hits@K, metrics and prediction reports
//! - [`baseline`]: translation-embedding baseline for sanity comparison
//! - [`synth`]: seeded synthetic graphs used by the test and acceptance suites
//! - [`config`] / [`cli`]: run configuration and the command-line pipeline

pub mod baseline;
pub mod cli;
pub mod config;
pub mod eval;
pub mod fusion;
pub mod graph;
pub mod ingest;
pub mod model;
pub mod synth;
pub mod tensor;
pub mod train;

pub use graph::{DatasetSplit, EntityKind, KnowledgeGraph, Triple};
pub use tensor::{NumError, NumResult, ParamStore, Parameter, Tape, Tensor};
