//! The two-level predictor: a query-conditioned GNN over the relation graph
//! produces per-relation features, which drive message passing over the
//! entity graph; a scoring head turns final entity states into tail
//! probabilities. No entity ever has learned parameters of its own, so the
//! model scores unseen entities exactly like seen ones.

mod lift;

pub use lift::{lift_relation_graph, FundamentalType, RelationGraph};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{EntityId, KnowledgeGraph, RelId};
use crate::tensor::{NumResult, ParamId, ParamStore, Tape, Tensor};

/// A tail-prediction query `(head, relation, ?)`; head prediction is
/// expressed through the inverse relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Query {
    pub head: EntityId,
    pub relation: RelId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Feature dimension shared by both GNN levels.
    pub dim: usize,
    /// Relation-level message-passing rounds.
    pub rel_layers: usize,
    /// Entity-level message-passing rounds.
    pub ent_layers: usize,
    /// Hidden width of the text-fusion layers.
    pub fusion_hidden: usize,
    /// Text-embedding dimension entering fusion.
    pub text_dim: usize,
    pub fusion_enabled: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            dim: 64,
            rel_layers: 6,
            ent_layers: 6,
            fusion_hidden: 800,
            text_dim: 1536,
            fusion_enabled: true,
        }
    }
}

/// Every learned weight group, addressable by name inside a [`ParamStore`].
#[derive(Clone, Debug)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub store: ParamStore,
    pub r_fund: ParamId,
    pub rel_update: Vec<ParamId>,
    pub g_first: Vec<(ParamId, ParamId)>,
    pub g_second: Vec<(ParamId, ParamId)>,
    pub ent_update: Vec<ParamId>,
    pub score_hidden: (ParamId, ParamId),
    pub score_out: (ParamId, ParamId),
    pub fuse_first: (ParamId, ParamId),
    pub fuse_second: (ParamId, ParamId),
}

fn xavier(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| rng.random_range(-limit..limit))
        .collect();
    Tensor::matrix(rows, cols, data).expect("finite init")
}

impl ModelParams {
    /// Seeded initialization: weights Xavier-uniform, biases zero.
    pub fn init(config: ModelConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = config.dim;
        let mut store = ParamStore::new();

        let r_fund = store.insert("r_fund", xavier(&mut rng, 4, d));

        let mut rel_update = Vec::new();
        for l in 0..config.rel_layers {
            rel_update.push(store.insert(&format!("rel.update.{l}.w"), xavier(&mut rng, 2 * d, d)));
        }

        let mut g_first = Vec::new();
        let mut g_second = Vec::new();
        let mut ent_update = Vec::new();
        for l in 0..config.ent_layers {
            g_first.push((
                store.insert(&format!("ent.g.{l}.w1"), xavier(&mut rng, d, d)),
                store.insert(&format!("ent.g.{l}.b1"), Tensor::zeros(vec![d])),
            ));
            g_second.push((
                store.insert(&format!("ent.g.{l}.w2"), xavier(&mut rng, d, d)),
                store.insert(&format!("ent.g.{l}.b2"), Tensor::zeros(vec![d])),
            ));
            ent_update.push(store.insert(&format!("ent.update.{l}.w"), xavier(&mut rng, 2 * d, d)));
        }

        let score_hidden = (
            store.insert("score.w1", xavier(&mut rng, d, d)),
            store.insert("score.b1", Tensor::zeros(vec![d])),
        );
        let score_out = (
            store.insert("score.w2", xavier(&mut rng, d, 1)),
            store.insert("score.b2", Tensor::zeros(vec![1])),
        );

        let fuse_in = config.text_dim + d;
        let fuse_first = (
            store.insert("fuse.w1", xavier(&mut rng, fuse_in, config.fusion_hidden)),
            store.insert("fuse.b1", Tensor::zeros(vec![config.fusion_hidden])),
        );
        let fuse_second = (
            store.insert("fuse.w2", xavier(&mut rng, config.fusion_hidden, d)),
            store.insert("fuse.b2", Tensor::zeros(vec![d])),
        );

        ModelParams {
            config,
            store,
            r_fund,
            rel_update,
            g_first,
            g_second,
            ent_update,
            score_hidden,
            score_out,
            fuse_first,
            fuse_second,
        }
    }

    /// Parameter groups and their ids, for optimizers and gradient checks.
    pub fn all_param_ids(&self) -> Vec<ParamId> {
        self.store.ids().collect()
    }
}

/// Edge arrays of the entity graph, extracted once per graph.
#[derive(Clone, Debug)]
pub struct GraphTensors {
    pub src: Vec<usize>,
    pub rel: Vec<usize>,
    pub dst: Vec<usize>,
    pub num_entities: usize,
    pub num_relations: usize,
}

impl GraphTensors {
    pub fn from_graph(g: &KnowledgeGraph) -> Self {
        let mut src = Vec::with_capacity(g.triple_count());
        let mut rel = Vec::with_capacity(g.triple_count());
        let mut dst = Vec::with_capacity(g.triple_count());
        for t in g.triples() {
            src.push(t.head);
            rel.push(t.relation);
            dst.push(t.tail);
        }
        GraphTensors {
            src,
            rel,
            dst,
            num_entities: g.entity_count(),
            num_relations: g.relation_count(),
        }
    }
}

/// Row `q` all ones, every other row zero.
pub fn indicator_r(query_rel: RelId, num_relations: usize, dim: usize) -> NumResult<Tensor> {
    if query_rel >= num_relations {
        return Err(crate::tensor::NumError::RowOutOfRange {
            index: query_rel,
            rows: num_relations,
        });
    }
    let mut data = vec![0.0; num_relations * dim];
    data[query_rel * dim..(query_rel + 1) * dim].fill(1.0);
    Tensor::matrix(num_relations, dim, data)
}

/// Row `u` is `R_q[q]`, every other row zero. Differentiable in `r_q`.
pub fn indicator_e(
    tape: &Tape,
    query: Query,
    r_q: &Tensor,
    num_entities: usize,
) -> NumResult<Tensor> {
    if query.head >= num_entities {
        return Err(crate::tensor::NumError::RowOutOfRange {
            index: query.head,
            rows: num_entities,
        });
    }
    let row = tape.gather_rows(r_q, &[query.relation])?;
    tape.segment_sum(&row, &[query.head], num_entities)
}

/// Query-conditioned relation representations: message passing over the
/// relation graph with fundamental-type features as the per-edge relation
/// vector (elementwise product message, sum aggregation, linear-over-concat
/// update with ReLU).
pub fn relation_gnn(
    tape: &Tape,
    rg: &RelationGraph,
    query_rel: RelId,
    params: &ModelParams,
) -> NumResult<Tensor> {
    let d = params.config.dim;
    let num_rel = rg.num_relations;
    let mut state = tape.watch(&indicator_r(query_rel, num_rel, d)?);
    let r_fund = tape.param(&params.store, params.r_fund);

    let (src, fund, dst): (Vec<usize>, Vec<usize>, Vec<usize>) = {
        let mut s = Vec::with_capacity(rg.edges.len());
        let mut f = Vec::with_capacity(rg.edges.len());
        let mut t = Vec::with_capacity(rg.edges.len());
        for &(a, label, b) in &rg.edges {
            s.push(a);
            f.push(label.index());
            t.push(b);
        }
        (s, f, t)
    };

    for l in 0..params.config.rel_layers {
        let agg = if src.is_empty() {
            tape.watch(&Tensor::zeros(vec![num_rel, d]))
        } else {
            let source_states = tape.gather_rows(&state, &src)?;
            let fund_rows = tape.gather_rows(&r_fund, &fund)?;
            let messages = tape.mul(&source_states, &fund_rows)?;
            tape.segment_sum(&messages, &dst, num_rel)?
        };
        let cat = tape.concat_cols(&state, &agg)?;
        let w = tape.param(&params.store, params.rel_update[l]);
        state = tape.relu(&tape.matmul(&cat, &w)?)?;
    }
    Ok(state)
}

/// Per-layer relation transform: row-wise two-layer MLP over `R_q`.
pub fn relation_transform_g(
    tape: &Tape,
    layer: usize,
    r_q: &Tensor,
    params: &ModelParams,
) -> NumResult<Tensor> {
    let (w1, b1) = params.g_first[layer];
    let (w2, b2) = params.g_second[layer];
    let h = tape.matmul(r_q, &tape.param(&params.store, w1))?;
    let h = tape.add_row_vec(&h, &tape.param(&params.store, b1))?;
    let h = tape.relu(&h)?;
    let h = tape.matmul(&h, &tape.param(&params.store, w2))?;
    tape.add_row_vec(&h, &tape.param(&params.store, b2))
}

/// Entity-level message passing conditioned on the query. Initialization is
/// the entity indicator plus (when supplied) the fused per-entity features;
/// each round transforms `R_q` with the layer's MLP, multiplies source
/// states with per-edge relation features, sum-aggregates onto targets, and
/// applies the linear-over-concat ReLU update.
pub fn entity_gnn(
    tape: &Tape,
    gt: &GraphTensors,
    query: Query,
    r_q: &Tensor,
    fused: Option<&Tensor>,
    params: &ModelParams,
) -> NumResult<Tensor> {
    let d = params.config.dim;
    let n = gt.num_entities;
    let mut state = indicator_e(tape, query, r_q, n)?;
    if let Some(f) = fused {
        state = tape.add(&state, f)?;
    }

    for l in 0..params.config.ent_layers {
        let agg = if gt.src.is_empty() {
            tape.watch(&Tensor::zeros(vec![n, d]))
        } else {
            let rel_feats = relation_transform_g(tape, l, r_q, params)?;
            let source_states = tape.gather_rows(&state, &gt.src)?;
            let edge_feats = tape.gather_rows(&rel_feats, &gt.rel)?;
            let messages = tape.mul(&source_states, &edge_feats)?;
            tape.segment_sum(&messages, &gt.dst, n)?
        };
        let cat = tape.concat_cols(&state, &agg)?;
        let w = tape.param(&params.store, params.ent_update[l]);
        state = tape.relu(&tape.matmul(&cat, &w)?)?;
    }
    Ok(state)
}

/// Scoring head up to the logit: `d → d` ReLU, `d → 1`.
pub fn tail_logits(tape: &Tape, states: &Tensor, params: &ModelParams) -> NumResult<Tensor> {
    let (w1, b1) = params.score_hidden;
    let (w2, b2) = params.score_out;
    let h = tape.matmul(states, &tape.param(&params.store, w1))?;
    let h = tape.add_row_vec(&h, &tape.param(&params.store, b1))?;
    let h = tape.relu(&h)?;
    let h = tape.matmul(&h, &tape.param(&params.store, w2))?;
    tape.add_row_vec(&h, &tape.param(&params.store, b2))
}

/// Per-entity probabilities in (0, 1).
pub fn score_tail(tape: &Tape, states: &Tensor, params: &ModelParams) -> NumResult<Tensor> {
    let logits = tail_logits(tape, states, params)?;
    tape.sigmoid(&logits)
}

#[cfg(test)]
mod tests;
