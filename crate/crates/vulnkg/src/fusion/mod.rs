//! Text-description embeddings and their injection into the entity GNN.
//!
//! Every entity gets a 1536-dimensional description vector — from the remote
//! embedding endpoint or from a deterministic local fallback — plus a
//! relational feature (the mean of the query-conditioned relation rows
//! incident to it). The two are concatenated and pushed through two linear
//! layers down to the GNN dimension; the result enters the entity GNN as an
//! additive term in its initialization.

mod cache;
mod provider;

pub use cache::EmbeddingCache;
pub use provider::{EmbeddingProvider, EmbeddingService};

use thiserror::Error;

use crate::graph::{EntityId, KnowledgeGraph};
use crate::model::ModelParams;
use crate::tensor::{NumError, NumResult, Tape, Tensor};

/// Dimension delivered by the description embedder.
pub const TEXT_DIM: usize = 1536;

pub type FusionResult<T> = Result<T, FusionError>;

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("empty text for entity {0:?}")]
    EmptyText(String),
    #[error("embedding endpoint error: {0}")]
    Endpoint(String),
    #[error("embedding token environment variable {0} is not set")]
    MissingToken(String),
    #[error("provider returned dimension {got}, expected {expected}")]
    WrongDimension { expected: usize, got: usize },
    #[error("cache i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cache file format error: {0}")]
    BadCache(String),
    #[error(transparent)]
    Num(#[from] NumError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProviderTag {
    Remote,
    LocalFallback,
}

/// A description vector for one entity key.
#[derive(Clone, Debug, PartialEq)]
pub struct TextEmbedding {
    pub key: String,
    pub vector: Vec<f64>,
    pub provider: ProviderTag,
}

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Stable content key for cache entries.
pub fn content_key(text: &str) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Deterministic 1536-dim embedding: signed counts of character 3–5 grams
/// hashed into buckets, then L2-normalized. Zero network dependency.
pub fn local_fallback_embedding(text: &str) -> FusionResult<Vec<f64>> {
    if text.trim().is_empty() {
        return Err(FusionError::EmptyText(text.to_string()));
    }
    let chars: Vec<char> = text.chars().collect();
    let mut buckets = vec![0.0f64; TEXT_DIM];
    let mut add = |piece: &str| {
        let h = fnv1a(piece.as_bytes());
        let idx = (h % TEXT_DIM as u64) as usize;
        let sign = if (h >> 63) & 1 == 1 { -1.0 } else { 1.0 };
        buckets[idx] += sign;
    };
    for n in 3..=5usize {
        if chars.len() < n {
            continue;
        }
        for w in chars.windows(n) {
            add(&w.iter().collect::<String>());
        }
    }
    // The whole text counts as one token, so short texts still embed.
    add(text);
    let norm = buckets.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in &mut buckets {
            *v /= norm;
        }
    }
    Ok(buckets)
}

/// Mean of the `R_q` rows for the relation types incident to the entity
/// (either direction); zero vector for isolated entities. Plain (untaped)
/// reference route; [`FusionContext`] realizes the same map as a matrix.
pub fn relational_feature(entity: EntityId, g: &KnowledgeGraph, r_q: &Tensor) -> Vec<f64> {
    let rels = g.incident_relations(entity);
    let d = r_q.cols();
    let mut out = vec![0.0; d];
    if rels.is_empty() {
        return out;
    }
    for &r in &rels {
        for (o, v) in out.iter_mut().zip(r_q.row(r)) {
            *o += v;
        }
    }
    for o in &mut out {
        *o /= rels.len() as f64;
    }
    out
}

/// Concatenate one text vector with one relational vector and apply the
/// combination layers; single-row convenience over [`FusionContext::fused`].
pub fn fuse(
    tape: &Tape,
    text: &[f64],
    rel: &[f64],
    params: &ModelParams,
) -> NumResult<Tensor> {
    let text_t = Tensor::matrix(1, text.len(), text.to_vec())?;
    let rel_t = Tensor::matrix(1, rel.len(), rel.to_vec())?;
    let cat = tape.concat_cols(&text_t, &rel_t)?;
    fusion_layers(tape, &cat, params)
}

fn fusion_layers(tape: &Tape, cat: &Tensor, params: &ModelParams) -> NumResult<Tensor> {
    let (w1, b1) = params.fuse_first;
    let (w2, b2) = params.fuse_second;
    let h = tape.matmul(cat, &tape.param(&params.store, w1))?;
    let h = tape.add_row_vec(&h, &tape.param(&params.store, b1))?;
    let h = tape.relu(&h)?;
    let h = tape.matmul(&h, &tape.param(&params.store, w2))?;
    tape.add_row_vec(&h, &tape.param(&params.store, b2))
}

/// Per-graph constants for fusing every entity at once: the text matrix and
/// the incidence-mean matrix mapping `R_q` to per-entity relational features.
#[derive(Clone, Debug)]
pub struct FusionContext {
    pub text_matrix: Tensor,
    incidence_mean: Tensor,
}

impl FusionContext {
    /// Embeds every entity's description (label when absent) through the
    /// service and precomputes the incidence-mean matrix.
    pub fn build(g: &KnowledgeGraph, service: &mut EmbeddingService) -> FusionResult<FusionContext> {
        let n = g.entity_count();
        let mut text = Vec::with_capacity(n * TEXT_DIM);
        for e in 0..n {
            let emb = service.embed(g.description_of(e))?;
            text.extend_from_slice(&emb.vector);
        }
        let num_rel = g.relation_count();
        let mut m = vec![0.0; n * num_rel];
        for e in 0..n {
            let rels = g.incident_relations(e);
            if rels.is_empty() {
                continue;
            }
            let w = 1.0 / rels.len() as f64;
            for r in rels {
                m[e * num_rel + r] = w;
            }
        }
        Ok(FusionContext {
            text_matrix: Tensor::matrix(n, TEXT_DIM, text)?,
            incidence_mean: Tensor::matrix(n, num_rel, m)?,
        })
    }

    pub fn num_entities(&self) -> usize {
        self.text_matrix.rows()
    }

    /// Fused features for all entities under one query-conditioned `R_q`:
    /// `[text ‖ M·R_q]` through the combination layers, shape `[E × d]`.
    pub fn fused(&self, tape: &Tape, r_q: &Tensor, params: &ModelParams) -> NumResult<Tensor> {
        let rel_feats = tape.matmul(&self.incidence_mean, r_q)?;
        let cat = tape.concat_cols(&self.text_matrix, &rel_feats)?;
        fusion_layers(tape, &cat, params)
    }
}
