//! Ranking protocol and metrics: filtered/raw candidate ranking with a
//! mean-rank tie rule, MRR and Hits@K aggregation, and prediction reports.

mod predictor;

pub use predictor::GnnPredictor;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::graph::{DatasetSplit, EntityId, EntityKind, KnowledgeGraph, RelId, Triple};
use crate::model::Query;
use crate::tensor::NumError;

pub type EvalResult<T> = Result<T, EvalError>;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("truth entity {0} is not in the candidate set")]
    TruthNotCandidate(EntityId),
    #[error("unknown entity {0:?}")]
    UnknownEntity(String),
    #[error("entity {0} was not seen during training (transductive model)")]
    UnseenEntity(EntityId),
    #[error("unknown relation {0:?}")]
    UnknownRelation(String),
    #[error("entity kind {kind:?} cannot anchor relation {relation:?}")]
    KindMismatch { kind: EntityKind, relation: String },
    #[error("head queries need inverse relations in the graph")]
    NoInverses,
    #[error(transparent)]
    Num(#[from] NumError),
}

/// Scores every entity of its graph for a query; larger is better.
pub trait Scorer {
    fn score_all(&self, query: Query) -> EvalResult<Vec<f64>>;
    fn graph(&self) -> &KnowledgeGraph;
}

/// Deterministic pseudorandom scorer: the analytic-baseline reference model.
/// Scores are i.i.d. uniform given (seed, query, entity), so ranks of any
/// fixed truth are uniform over the candidate set.
pub struct UniformRandomScorer<'g> {
    pub seed: u64,
    pub graph: &'g KnowledgeGraph,
}

impl Scorer for UniformRandomScorer<'_> {
    fn score_all(&self, query: Query) -> EvalResult<Vec<f64>> {
        let mix = |mut x: u64| {
            x ^= x >> 33;
            x = x.wrapping_mul(0xff51afd7ed558ccd);
            x ^= x >> 33;
            x = x.wrapping_mul(0xc4ceb9fe1a85ec53);
            x ^= x >> 33;
            x
        };
        Ok((0..self.graph.entity_count())
            .map(|e| {
                let h = mix(
                    self.seed
                        .wrapping_add(mix((query.head as u64) << 32 | query.relation as u64))
                        .wrapping_add(mix(e as u64 ^ 0x9e3779b97f4a7c15)),
                );
                (h >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect())
    }

    fn graph(&self) -> &KnowledgeGraph {
        self.graph
    }
}

/// One ranked query: candidates in descending score order and the (possibly
/// fractional, under the mean-rank tie rule) rank of the truth.
#[derive(Clone, Debug)]
pub struct RankingResult {
    pub query: Query,
    pub truth: EntityId,
    pub candidates: Vec<EntityId>,
    pub rank_of_truth: f64,
    pub filtered: bool,
}

/// Known-true answers per (head, relation), for filtered evaluation. Built
/// over every split part so no true answer competes with the truth.
#[derive(Clone, Debug, Default)]
pub struct FilterIndex {
    map: HashMap<(EntityId, RelId), BTreeSet<EntityId>>,
}

impl FilterIndex {
    /// Indexes the triples under both query directions when the graph
    /// carries inverse relations.
    pub fn build<'a>(g: &KnowledgeGraph, triples: impl Iterator<Item = &'a Triple>) -> Self {
        let mut map: HashMap<(EntityId, RelId), BTreeSet<EntityId>> = HashMap::new();
        for t in triples {
            map.entry((t.head, t.relation)).or_default().insert(t.tail);
            if let Some(inv) = g.inverse_relation(t.relation) {
                map.entry((t.tail, inv)).or_default().insert(t.head);
            }
        }
        FilterIndex { map }
    }

    pub fn from_split(g: &KnowledgeGraph, split: &DatasetSplit) -> Self {
        let ext = split.extension.clone().unwrap_or_default();
        Self::build(
            g,
            split
                .train
                .iter()
                .chain(&split.valid)
                .chain(&split.test)
                .chain(&ext),
        )
    }

    pub fn known(&self, head: EntityId, relation: RelId) -> Option<&BTreeSet<EntityId>> {
        self.map.get(&(head, relation))
    }
}

/// Ranks the truth among type-eligible candidates. Filtered mode removes
/// known-true answers other than the truth before ranking; ties get the mean
/// rank of the tied block.
pub fn rank_query(
    scorer: &dyn Scorer,
    query: Query,
    truth: EntityId,
    known_true: &BTreeSet<EntityId>,
    filtered: bool,
) -> EvalResult<RankingResult> {
    let g = scorer.graph();
    let truth_kind = g.entity(truth).kind;
    let scores = scorer.score_all(query)?;

    let mut candidates: Vec<EntityId> = g
        .kind_members(truth_kind)
        .iter()
        .copied()
        .filter(|&e| !filtered || e == truth || !known_true.contains(&e))
        .collect();
    if !candidates.contains(&truth) {
        return Err(EvalError::TruthNotCandidate(truth));
    }

    let truth_score = scores[truth];
    let mut better = 0usize;
    let mut tied = 0usize;
    for &c in &candidates {
        if scores[c] > truth_score {
            better += 1;
        } else if scores[c] == truth_score {
            tied += 1;
        }
    }
    // Descending by score; ties by id for a deterministic listing.
    candidates.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let rank_of_truth = better as f64 + (tied as f64 + 1.0) / 2.0;
    Ok(RankingResult {
        query,
        truth,
        candidates,
        rank_of_truth,
        filtered,
    })
}

/// Mean reciprocal rank.
pub fn mrr(ranks: &[f64]) -> EvalResult<f64> {
    if ranks.is_empty() {
        return Err(EvalError::Empty("mrr of no ranks"));
    }
    Ok(ranks.iter().map(|r| 1.0 / r).sum::<f64>() / ranks.len() as f64)
}

/// Fraction of ranks at or under `k`.
pub fn hits_at_k(ranks: &[f64], k: usize) -> EvalResult<f64> {
    if ranks.is_empty() {
        return Err(EvalError::Empty("hits of no ranks"));
    }
    let hits = ranks.iter().filter(|&&r| r <= k as f64).count();
    Ok(hits as f64 / ranks.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalDirections {
    /// Tail queries plus head queries through inverse relations.
    Both,
    TailsOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalTask {
    CveCwe,
    CveCpe,
    All,
}

impl EvalTask {
    fn matches(self, g: &KnowledgeGraph, relation: RelId) -> bool {
        let forward = g.forward_relation(relation);
        match self {
            EvalTask::All => true,
            EvalTask::CveCwe => g.relation(forward).name == "matchingCWE",
            EvalTask::CveCpe => g.relation(forward).name == "matchingCVE",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskMetrics {
    pub mrr: f64,
    pub hits: BTreeMap<usize, f64>,
    pub query_count: usize,
}

/// Metrics per task plus the pooled result. Bit-stable across runs for the
/// same inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub per_task: BTreeMap<String, TaskMetrics>,
    pub overall: TaskMetrics,
    pub filtered: bool,
    pub directions: EvalDirections,
}

fn aggregate(ranks: &[f64]) -> EvalResult<TaskMetrics> {
    let mut hits = BTreeMap::new();
    for k in [1usize, 3, 10] {
        hits.insert(k, hits_at_k(ranks, k)?);
    }
    Ok(TaskMetrics {
        mrr: mrr(ranks)?,
        hits,
        query_count: ranks.len(),
    })
}

/// Ranks every given triple (both directions unless told otherwise),
/// aggregating MRR and Hits@{1,3,10} per task relation and pooled.
pub fn evaluate_triples(
    scorer: &dyn Scorer,
    eval_triples: &[Triple],
    filter: &FilterIndex,
    task: EvalTask,
    directions: EvalDirections,
    filtered: bool,
) -> EvalResult<MetricsReport> {
    if eval_triples.is_empty() {
        return Err(EvalError::Empty("no evaluation triples"));
    }
    let g = scorer.graph();
    let empty = BTreeSet::new();
    let mut per_task_ranks: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut all_ranks: Vec<f64> = Vec::new();

    for t in eval_triples {
        if !task.matches(g, t.relation) {
            continue;
        }
        let mut queries = vec![(
            Query {
                head: t.head,
                relation: t.relation,
            },
            t.tail,
        )];
        if directions == EvalDirections::Both {
            if let Some(inv) = g.inverse_relation(t.relation) {
                queries.push((
                    Query {
                        head: t.tail,
                        relation: inv,
                    },
                    t.head,
                ));
            }
        }
        let task_name = g.relation(g.forward_relation(t.relation)).name.clone();
        for (q, truth) in queries {
            let known = filter.known(q.head, q.relation).unwrap_or(&empty);
            let r = rank_query(scorer, q, truth, known, filtered)?;
            per_task_ranks
                .entry(task_name.clone())
                .or_default()
                .push(r.rank_of_truth);
            all_ranks.push(r.rank_of_truth);
        }
    }

    if all_ranks.is_empty() {
        return Err(EvalError::Empty("no queries matched the task"));
    }
    let mut per_task = BTreeMap::new();
    for (name, ranks) in &per_task_ranks {
        per_task.insert(name.clone(), aggregate(ranks)?);
    }
    Ok(MetricsReport {
        per_task,
        overall: aggregate(&all_ranks)?,
        filtered,
        directions,
    })
}

/// One evaluated query for report files.
#[derive(Clone, Debug, PartialEq)]
pub struct RankRow {
    pub query_label: String,
    pub relation: String,
    pub task: String,
    pub rank: f64,
    pub truth_label: String,
}

/// Per-query ranking rows in input order; pairs with [`report_from_rows`]
/// for the metrics summary over the same pass.
pub fn rank_rows(
    scorer: &dyn Scorer,
    eval_triples: &[Triple],
    filter: &FilterIndex,
    directions: EvalDirections,
    filtered: bool,
) -> EvalResult<Vec<RankRow>> {
    if eval_triples.is_empty() {
        return Err(EvalError::Empty("no evaluation triples"));
    }
    let g = scorer.graph();
    let empty = BTreeSet::new();
    let mut rows = Vec::new();
    for t in eval_triples {
        let mut queries = vec![(
            Query {
                head: t.head,
                relation: t.relation,
            },
            t.tail,
        )];
        if directions == EvalDirections::Both {
            if let Some(inv) = g.inverse_relation(t.relation) {
                queries.push((
                    Query {
                        head: t.tail,
                        relation: inv,
                    },
                    t.head,
                ));
            }
        }
        let task = g.relation(g.forward_relation(t.relation)).name.clone();
        for (q, truth) in queries {
            let known = filter.known(q.head, q.relation).unwrap_or(&empty);
            let r = rank_query(scorer, q, truth, known, filtered)?;
            rows.push(RankRow {
                query_label: g.entity(q.head).label.clone(),
                relation: g.relation(q.relation).name.clone(),
                task: task.clone(),
                rank: r.rank_of_truth,
                truth_label: g.entity(truth).label.clone(),
            });
        }
    }
    Ok(rows)
}

/// Aggregates rows produced by [`rank_rows`] into the metrics report.
pub fn report_from_rows(
    rows: &[RankRow],
    filtered: bool,
    directions: EvalDirections,
) -> EvalResult<MetricsReport> {
    if rows.is_empty() {
        return Err(EvalError::Empty("no ranking rows"));
    }
    let mut per_task_ranks: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut all = Vec::with_capacity(rows.len());
    for r in rows {
        per_task_ranks
            .entry(r.task.clone())
            .or_default()
            .push(r.rank);
        all.push(r.rank);
    }
    let mut per_task = BTreeMap::new();
    for (name, ranks) in &per_task_ranks {
        per_task.insert(name.clone(), aggregate(ranks)?);
    }
    Ok(MetricsReport {
        per_task,
        overall: aggregate(&all)?,
        filtered,
        directions,
    })
}

/// Analytic E[1/rank] for uniformly random ranking over the per-query
/// filtered candidate-set sizes: mean of H(m)/m.
pub fn random_baseline_mrr(candidate_sizes: &[usize]) -> f64 {
    if candidate_sizes.is_empty() {
        return 0.0;
    }
    let per_query: f64 = candidate_sizes
        .iter()
        .map(|&m| {
            let h: f64 = (1..=m).map(|k| 1.0 / k as f64).sum();
            h / m.max(1) as f64
        })
        .sum();
    per_query / candidate_sizes.len() as f64
}

/// Filtered candidate-set size for each query an evaluation would run;
/// pairs with [`random_baseline_mrr`].
pub fn candidate_sizes(
    g: &KnowledgeGraph,
    eval_triples: &[Triple],
    filter: &FilterIndex,
    directions: EvalDirections,
    filtered: bool,
) -> Vec<usize> {
    let empty = BTreeSet::new();
    let mut sizes = Vec::new();
    for t in eval_triples {
        let mut queries = vec![(t.head, t.relation, t.tail)];
        if directions == EvalDirections::Both {
            if let Some(inv) = g.inverse_relation(t.relation) {
                queries.push((t.tail, inv, t.head));
            }
        }
        for (head, relation, truth) in queries {
            let known = filter.known(head, relation).unwrap_or(&empty);
            let kind = g.entity(truth).kind;
            let n = g
                .kind_members(kind)
                .iter()
                .filter(|&&e| !filtered || e == truth || !known.contains(&e))
                .count();
            sizes.push(n);
        }
    }
    sizes
}

/// One row of a prediction table.
#[derive(Clone, Debug)]
pub struct PredictionRow {
    pub rank: usize,
    pub entity: EntityId,
    pub label: String,
    pub score: f64,
}

/// Ranked candidates for one anchor entity and relation, serving the
/// "what else is this CVE linked to" workflow. The query direction follows
/// from the anchor's kind; known links are removed when requested.
pub fn predict_report(
    scorer: &dyn Scorer,
    anchor_label: &str,
    relation_name: &str,
    top_n: usize,
    exclude_known: bool,
) -> EvalResult<Vec<PredictionRow>> {
    let g = scorer.graph();
    let anchor = g
        .entity_by_label(anchor_label)
        .ok_or_else(|| EvalError::UnknownEntity(anchor_label.to_string()))?;
    let forward = g
        .relation_id(relation_name)
        .ok_or_else(|| EvalError::UnknownRelation(relation_name.to_string()))?;

    let anchor_kind = g.entity(anchor).kind;
    let rel = g.relation(forward);
    let relation = if rel.head_kind == Some(anchor_kind) {
        forward
    } else if rel.tail_kind == Some(anchor_kind) {
        g.inverse_relation(forward).ok_or(EvalError::NoInverses)?
    } else {
        return Err(EvalError::KindMismatch {
            kind: anchor_kind,
            relation: relation_name.to_string(),
        });
    };

    let query = Query {
        head: anchor,
        relation,
    };
    let target_kind = g
        .relation_tail_kind(relation)
        .ok_or_else(|| EvalError::UnknownRelation(relation_name.to_string()))?;
    let scores = scorer.score_all(query)?;
    let known: BTreeSet<EntityId> = g.true_tails(anchor, relation).into_iter().collect();

    let mut rows: Vec<(EntityId, f64)> = g
        .kind_members(target_kind)
        .iter()
        .copied()
        .filter(|e| !(exclude_known && known.contains(e)))
        .map(|e| (e, scores[e]))
        .collect();
    rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
    Ok(rows
        .into_iter()
        .take(top_n)
        .enumerate()
        .map(|(i, (entity, score))| PredictionRow {
            rank: i + 1,
            entity,
            label: g.entity(entity).label.clone(),
            score,
        })
        .collect())
}

#[cfg(test)]
mod tests;
