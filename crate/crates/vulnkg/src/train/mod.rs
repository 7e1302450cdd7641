//! Training: negative sampling, the binary cross-entropy objective over
//! positive and corrupted triples, an Adam loop, and checkpointing.

mod checkpoint;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eval::{evaluate_triples, EvalDirections, EvalError, EvalTask, FilterIndex, GnnPredictor, Scorer};
use crate::fusion::{EmbeddingService, FusionContext, FusionError};
use crate::graph::{EntityId, GraphError, KnowledgeGraph, Triple};
use crate::model::{
    entity_gnn, lift_relation_graph, relation_gnn, score_tail, GraphTensors, ModelConfig,
    ModelParams, Query, RelationGraph,
};
use crate::tensor::{NumError, ParamStore, Tape, Tensor};

use thiserror::Error;

pub type TrainResult<T> = Result<T, TrainError>;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("training graph has no task triples")]
    EmptyTaskPool,
    #[error("fusion is enabled but no embedding service was supplied")]
    MissingEmbeddingService,
    #[error("loss became non-finite in epoch {epoch}; aborted with the last finished epoch's parameters")]
    Diverged {
        epoch: usize,
        /// Parameters as of the last fully finished epoch.
        last_good: Box<ModelParams>,
    },
    #[error("checkpoint i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("checkpoint format error: {0}")]
    BadCheckpoint(String),
    #[error("checkpoint was trained against graph {expected}, found {actual} (pass force to override)")]
    GraphMismatch { expected: String, actual: String },
}

/// The knobs of the optimization loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Negatives per positive.
    pub negatives: usize,
    pub epochs: usize,
    pub batches_per_epoch: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub augment_inverses: bool,
    pub fusion_enabled: bool,
    /// Hide each training query's target edge from its own message passing.
    /// Required for generalization (otherwise training collapses to one-hop
    /// edge detection); switch off only to memorize a fixed training set.
    pub mask_target_edges: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 5e-4,
            negatives: 64,
            epochs: 10,
            batches_per_epoch: 10,
            batch_size: 64,
            seed: 0,
            augment_inverses: true,
            fusion_enabled: true,
            mask_target_edges: true,
        }
    }
}

/// Corrupted tails for one positive: uniform draws over entities of the true
/// tail's kind, never a known true answer. Pools smaller than `n` are
/// sampled with replacement (flagged in the second return).
pub fn sample_negatives(
    g: &KnowledgeGraph,
    query: Query,
    truth: EntityId,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<EntityId>, bool) {
    let kind = g.entity(truth).kind;
    let known: std::collections::BTreeSet<EntityId> =
        g.true_tails(query.head, query.relation).into_iter().collect();
    let pool: Vec<EntityId> = g
        .kind_members(kind)
        .iter()
        .copied()
        .filter(|e| !known.contains(e) && *e != truth)
        .collect();
    if pool.is_empty() {
        return (Vec::new(), true);
    }
    if pool.len() >= n {
        // Partial Fisher–Yates for n distinct draws.
        let mut pool = pool;
        for i in 0..n {
            let j = rng.random_range(i..pool.len());
            pool.swap(i, j);
        }
        pool.truncate(n);
        (pool, false)
    } else {
        let picks = (0..n)
            .map(|_| pool[rng.random_range(0..pool.len())])
            .collect();
        (picks, true)
    }
}

/// The cited objective on plain floats:
/// −log p⁺ − (1/n) Σ log(1 − p⁻ᵢ), with probabilities clamped at 1e-12.
pub fn bce_loss(p_pos: f64, p_negs: &[f64]) -> f64 {
    let clamp = |p: f64| p.clamp(1e-12, 1.0);
    let mut loss = -clamp(p_pos).ln();
    if !p_negs.is_empty() {
        let n = p_negs.len() as f64;
        for &p in p_negs {
            loss -= clamp(1.0 - p).ln() / n;
        }
    }
    loss
}

/// A training query: the positive pair plus its sampled negatives.
#[derive(Clone, Debug)]
pub struct TrainItem {
    pub query: Query,
    pub truth: EntityId,
    pub negatives: Vec<EntityId>,
}

/// Shared forward-pass state for one (augmented) training graph.
pub struct ForwardContext<'a> {
    pub graph: &'a KnowledgeGraph,
    pub tensors: GraphTensors,
    pub lift: RelationGraph,
    pub fusion: Option<FusionContext>,
    pub mask_targets: bool,
    edge_index: std::collections::HashMap<(EntityId, usize, EntityId), Vec<usize>>,
}

impl<'a> ForwardContext<'a> {
    pub fn new(graph: &'a KnowledgeGraph, fusion: Option<FusionContext>) -> Self {
        let tensors = GraphTensors::from_graph(graph);
        let mut edge_index: std::collections::HashMap<(EntityId, usize, EntityId), Vec<usize>> =
            std::collections::HashMap::new();
        for i in 0..tensors.src.len() {
            edge_index
                .entry((tensors.src[i], tensors.rel[i], tensors.dst[i]))
                .or_default()
                .push(i);
        }
        ForwardContext {
            graph,
            tensors,
            lift: lift_relation_graph(graph),
            fusion,
            mask_targets: true,
            edge_index,
        }
    }

    /// Edge arrays with the query's target edge (and its inverse twin)
    /// removed: a query must not see the very link it is asked to predict,
    /// or training collapses to one-hop edge detection instead of learning
    /// transferable structure.
    fn tensors_without_target(&self, query: Query, truth: EntityId) -> GraphTensors {
        let mut drop: Vec<usize> = Vec::new();
        if let Some(idx) = self.edge_index.get(&(query.head, query.relation, truth)) {
            drop.extend_from_slice(idx);
        }
        if let Some(partner) = self.graph.inverse_relation(query.relation) {
            if let Some(idx) = self.edge_index.get(&(truth, partner, query.head)) {
                drop.extend_from_slice(idx);
            }
        }
        if drop.is_empty() {
            return self.tensors.clone();
        }
        let keep = |i: &usize| !drop.contains(i);
        GraphTensors {
            src: (0..self.tensors.src.len())
                .filter(keep)
                .map(|i| self.tensors.src[i])
                .collect(),
            rel: (0..self.tensors.rel.len())
                .filter(keep)
                .map(|i| self.tensors.rel[i])
                .collect(),
            dst: (0..self.tensors.dst.len())
                .filter(keep)
                .map(|i| self.tensors.dst[i])
                .collect(),
            num_entities: self.tensors.num_entities,
            num_relations: self.tensors.num_relations,
        }
    }
}

/// Taped batch objective: one relation-level pass (and one fused matrix) per
/// distinct query relation, one entity-level pass per query, probabilities
/// clamped inside the logs exactly as the scalar [`bce_loss`].
pub fn batch_loss(
    tape: &Tape,
    ctx: &ForwardContext<'_>,
    params: &ModelParams,
    items: &[TrainItem],
) -> TrainResult<Tensor> {
    let mut rels: Vec<usize> = items.iter().map(|i| i.query.relation).collect();
    rels.sort_unstable();
    rels.dedup();

    let mut conditioned: std::collections::BTreeMap<usize, (Tensor, Option<Tensor>)> =
        std::collections::BTreeMap::new();
    for &rel in &rels {
        let r_q = relation_gnn(tape, &ctx.lift, rel, params)?;
        let fused = match &ctx.fusion {
            Some(f) => Some(f.fused(tape, &r_q, params)?),
            None => None,
        };
        conditioned.insert(rel, (r_q, fused));
    }

    let mut total: Option<Tensor> = None;
    for item in items {
        let (r_q, fused) = &conditioned[&item.query.relation];
        let states = if ctx.mask_targets {
            let masked = ctx.tensors_without_target(item.query, item.truth);
            entity_gnn(tape, &masked, item.query, r_q, fused.as_ref(), params)?
        } else {
            entity_gnn(tape, &ctx.tensors, item.query, r_q, fused.as_ref(), params)?
        };
        let probs = score_tail(tape, &states, params)?;

        let pos = tape.gather_rows(&probs, &[item.truth])?;
        let pos = tape.clamp(&pos, 1e-12, 1.0)?;
        let mut loss = tape.scale(&tape.sum_all(&tape.log(&pos)?)?, -1.0)?;

        if !item.negatives.is_empty() {
            let negs = tape.gather_rows(&probs, &item.negatives)?;
            let one_minus = tape.add_scalar(&tape.scale(&negs, -1.0)?, 1.0)?;
            let one_minus = tape.clamp(&one_minus, 1e-12, 1.0)?;
            let neg_term = tape.sum_all(&tape.log(&one_minus)?)?;
            let neg_term = tape.scale(&neg_term, -1.0 / item.negatives.len() as f64)?;
            loss = tape.add(&loss, &neg_term)?;
        }
        total = Some(match total {
            Some(t) => tape.add(&t, &loss)?,
            None => loss,
        });
    }
    let total = total.ok_or(TrainError::EmptyTaskPool)?;
    Ok(tape.scale(&total, 1.0 / items.len() as f64)?)
}

/// Adam with bias correction; gradients are zeroed after each step.
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: i32,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(store: &ParamStore, lr: f64) -> Self {
        let m = store
            .ids()
            .map(|id| vec![0.0; store.get(id).value.numel()])
            .collect();
        let v = store
            .ids()
            .map(|id| vec![0.0; store.get(id).value.numel()])
            .collect();
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m,
            v,
        }
    }

    pub fn step(&mut self, store: &mut ParamStore) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for id in 0..store.len() {
            let grad = store.get(id).grad.data().to_vec();
            let m = &mut self.m[id];
            let v = &mut self.v[id];
            for (i, &g) in grad.iter().enumerate() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g;
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g * g;
            }
            let (lr, eps) = (self.lr, self.eps);
            let (m, v) = (&self.m[id], &self.v[id]);
            store.update_value(id, |i, w| {
                let mhat = m[i] / bc1;
                let vhat = v[i] / bc2;
                w - lr * mhat / (vhat.sqrt() + eps)
            });
        }
        store.zero_grads();
    }
}

/// Everything `train` leaves behind.
#[derive(Debug)]
pub struct TrainOutcome {
    pub params: ModelParams,
    /// Mean training loss per epoch.
    pub epoch_losses: Vec<f64>,
    pub best_valid_mrr: Option<f64>,
    /// Parameters at the best validation epoch (when validation ran).
    pub best_params: Option<ModelParams>,
}

/// Runs the optimization loop over the training graph's task triples.
/// Positives are sampled per batch; each yields a tail query and, when the
/// graph is inverse-augmented, a head query through the inverse relation.
/// Validation MRR (filtered, both directions) is tracked when `valid` is
/// nonempty.
pub fn train(
    graph: &KnowledgeGraph,
    valid: &[Triple],
    model_cfg: ModelConfig,
    cfg: &TrainConfig,
    service: Option<&mut EmbeddingService>,
) -> TrainResult<TrainOutcome> {
    let augmented;
    let g = if cfg.augment_inverses && !graph.inverses_added() {
        augmented = graph.augment_inverses()?;
        &augmented
    } else {
        graph
    };

    let fusion = if cfg.fusion_enabled {
        let service = service.ok_or(TrainError::MissingEmbeddingService)?;
        Some(FusionContext::build(g, service)?)
    } else {
        None
    };
    let mut ctx = ForwardContext::new(g, fusion);
    ctx.mask_targets = cfg.mask_target_edges;

    // Positives come from forward task triples only; inverse queries are
    // derived per item.
    let pool: Vec<Triple> = g
        .triples()
        .iter()
        .filter(|t| g.task_relations.contains(&t.relation))
        .copied()
        .collect();
    if pool.is_empty() {
        return Err(TrainError::EmptyTaskPool);
    }

    let mut params = ModelParams::init(model_cfg, cfg.seed);
    params.config.fusion_enabled = cfg.fusion_enabled;
    let mut adam = Adam::new(&params.store, cfg.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7261696e);

    let filter = FilterIndex::build(g, g.triples().iter().chain(valid.iter()));

    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut best_valid_mrr: Option<f64> = None;
    let mut best_params: Option<ModelParams> = None;
    let mut last_good = params.clone();

    for epoch in 0..cfg.epochs {
        let mut epoch_loss = 0.0;
        let mut batches_done = 0usize;
        for _ in 0..cfg.batches_per_epoch {
            let mut items = Vec::with_capacity(cfg.batch_size * 2);
            for _ in 0..cfg.batch_size {
                let t = pool[rng.random_range(0..pool.len())];
                let tail_q = Query {
                    head: t.head,
                    relation: t.relation,
                };
                let (negs, _) = sample_negatives(g, tail_q, t.tail, cfg.negatives, &mut rng);
                items.push(TrainItem {
                    query: tail_q,
                    truth: t.tail,
                    negatives: negs,
                });
                if let Some(inv) = g.inverse_relation(t.relation) {
                    let head_q = Query {
                        head: t.tail,
                        relation: inv,
                    };
                    let (negs, _) = sample_negatives(g, head_q, t.head, cfg.negatives, &mut rng);
                    items.push(TrainItem {
                        query: head_q,
                        truth: t.head,
                        negatives: negs,
                    });
                }
            }
            let tape = Tape::new();
            let loss = match batch_loss(&tape, &ctx, &params, &items) {
                Ok(l) => l,
                Err(TrainError::Num(NumError::NonFinite { .. })) => {
                    return Err(TrainError::Diverged {
                        epoch,
                        last_good: Box::new(last_good),
                    });
                }
                Err(e) => return Err(e),
            };
            let loss_value = loss.item();
            if !loss_value.is_finite() {
                return Err(TrainError::Diverged {
                    epoch,
                    last_good: Box::new(last_good),
                });
            }
            tape.backward(&loss, &mut params.store)?;
            adam.step(&mut params.store);
            epoch_loss += loss_value;
            batches_done += 1;
        }
        epoch_losses.push(epoch_loss / batches_done.max(1) as f64);
        last_good = params.clone();

        if !valid.is_empty() {
            let predictor = GnnPredictor::new(&params, g, ctx.fusion.clone());
            let report = evaluate_triples(
                &predictor,
                valid,
                &filter,
                EvalTask::All,
                EvalDirections::Both,
                true,
            )?;
            let mrr = report.overall.mrr;
            if best_valid_mrr.is_none_or(|b| mrr > b) {
                best_valid_mrr = Some(mrr);
                best_params = Some(params.clone());
            }
        }
    }

    Ok(TrainOutcome {
        params,
        epoch_losses,
        best_valid_mrr,
        best_params,
    })
}

/// Forward-scores a probe query; checkpoints round-trip bit-equal on this.
pub fn probe_scores(params: &ModelParams, g: &KnowledgeGraph, query: Query) -> TrainResult<Vec<f64>> {
    let predictor = GnnPredictor::new(params, g, None);
    Ok(predictor.score_all(query)?)
}
