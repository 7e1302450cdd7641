//! Inference-time scorer over the two-level GNN, with per-relation caching
//! of the conditional relation representation and the fused feature matrix.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::fusion::FusionContext;
use crate::graph::{KnowledgeGraph, RelId};
use crate::model::{
    entity_gnn, lift_relation_graph, relation_gnn, tail_logits, GraphTensors, ModelParams, Query,
    RelationGraph,
};
use crate::tensor::{Tape, Tensor};

use super::{EvalResult, Scorer};

/// Scores queries against one (augmented) graph. Ranking uses raw logits;
/// sigmoid is monotone so the order matches probability ranking.
pub struct GnnPredictor<'a> {
    params: &'a ModelParams,
    graph: &'a KnowledgeGraph,
    tensors: GraphTensors,
    lift: RelationGraph,
    fusion: Option<FusionContext>,
    conditioned: RefCell<HashMap<RelId, (Tensor, Option<Tensor>)>>,
}

impl<'a> GnnPredictor<'a> {
    pub fn new(
        params: &'a ModelParams,
        graph: &'a KnowledgeGraph,
        fusion: Option<FusionContext>,
    ) -> Self {
        GnnPredictor {
            params,
            graph,
            tensors: GraphTensors::from_graph(graph),
            lift: lift_relation_graph(graph),
            fusion,
            conditioned: RefCell::new(HashMap::new()),
        }
    }

    pub fn fusion_enabled(&self) -> bool {
        self.fusion.is_some()
    }

    fn conditioned(&self, relation: RelId) -> EvalResult<(Tensor, Option<Tensor>)> {
        if let Some(hit) = self.conditioned.borrow().get(&relation) {
            return Ok(hit.clone());
        }
        let tape = Tape::inference();
        let r_q = relation_gnn(&tape, &self.lift, relation, self.params)?;
        let fused = match &self.fusion {
            Some(ctx) => Some(ctx.fused(&tape, &r_q, self.params)?),
            None => None,
        };
        self.conditioned
            .borrow_mut()
            .insert(relation, (r_q.clone(), fused.clone()));
        Ok((r_q, fused))
    }
}

impl Scorer for GnnPredictor<'_> {
    fn score_all(&self, query: Query) -> EvalResult<Vec<f64>> {
        let (r_q, fused) = self.conditioned(query.relation)?;
        let tape = Tape::inference();
        let states = entity_gnn(
            &tape,
            &self.tensors,
            query,
            &r_q,
            fused.as_ref(),
            self.params,
        )?;
        let logits = tail_logits(&tape, &states, self.params)?;
        Ok(logits.data().to_vec())
    }

    fn graph(&self) -> &KnowledgeGraph {
        self.graph
    }
}
