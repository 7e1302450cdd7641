//! Relation-graph construction: lifts the entity graph into a graph whose
//! nodes are relation types and whose edges carry one of the four
//! fundamental interaction labels.

use std::collections::BTreeSet;

use crate::graph::{KnowledgeGraph, RelId};

/// How two relations interact through a shared entity: the edge
/// `(r1, label, r2)` reads "a <label-source-side> of r1 is a
/// <label-target-side> of r2".
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FundamentalType {
    HeadToHead,
    HeadToTail,
    TailToHead,
    TailToTail,
}

impl FundamentalType {
    pub const ALL: [FundamentalType; 4] = [
        FundamentalType::HeadToHead,
        FundamentalType::HeadToTail,
        FundamentalType::TailToHead,
        FundamentalType::TailToTail,
    ];

    /// Row index into the fundamental-relation embedding matrix.
    pub fn index(self) -> usize {
        match self {
            FundamentalType::HeadToHead => 0,
            FundamentalType::HeadToTail => 1,
            FundamentalType::TailToHead => 2,
            FundamentalType::TailToTail => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FundamentalType::HeadToHead => "h2h",
            FundamentalType::HeadToTail => "h2t",
            FundamentalType::TailToHead => "t2h",
            FundamentalType::TailToTail => "t2t",
        }
    }
}

/// Deduplicated, deterministically ordered relation-graph edges.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RelationGraph {
    pub num_relations: usize,
    pub edges: Vec<(RelId, FundamentalType, RelId)>,
}

impl RelationGraph {
    pub fn contains(&self, src: RelId, label: FundamentalType, dst: RelId) -> bool {
        self.edges.contains(&(src, label, dst))
    }
}

/// Builds the relation graph from per-entity incidence. Self-pairs are kept
/// when witnessed (a relation always shares its own heads and tails with
/// itself once it has a triple).
pub fn lift_relation_graph(g: &KnowledgeGraph) -> RelationGraph {
    let n = g.entity_count();
    let mut heads_at: Vec<BTreeSet<RelId>> = vec![BTreeSet::new(); n];
    let mut tails_at: Vec<BTreeSet<RelId>> = vec![BTreeSet::new(); n];
    for t in g.triples() {
        heads_at[t.head].insert(t.relation);
        tails_at[t.tail].insert(t.relation);
    }

    let mut edges: BTreeSet<(RelId, FundamentalType, RelId)> = BTreeSet::new();
    for e in 0..n {
        for &r1 in &heads_at[e] {
            for &r2 in &heads_at[e] {
                edges.insert((r1, FundamentalType::HeadToHead, r2));
            }
            for &r2 in &tails_at[e] {
                edges.insert((r1, FundamentalType::HeadToTail, r2));
            }
        }
        for &r1 in &tails_at[e] {
            for &r2 in &heads_at[e] {
                edges.insert((r1, FundamentalType::TailToHead, r2));
            }
            for &r2 in &tails_at[e] {
                edges.insert((r1, FundamentalType::TailToTail, r2));
            }
        }
    }

    RelationGraph {
        num_relations: g.relation_count(),
        edges: edges.into_iter().collect(),
    }
}
