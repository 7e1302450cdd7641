//! Transductive and inductive dataset splits.

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GraphError, GraphResult, KnowledgeGraph, Triple};

#[derive(Clone, Debug, PartialEq)]
pub enum SplitMode {
    Transductive {
        seed: u64,
    },
    Inductive {
        train_cutoff: NaiveDate,
        test_cutoff: NaiveDate,
    },
}

/// Train/valid/test triples, plus the inference extension in inductive mode.
/// Triples reference entity/relation ids of the source graph.
#[derive(Clone, Debug)]
pub struct DatasetSplit {
    pub mode: SplitMode,
    pub train: Vec<Triple>,
    pub valid: Vec<Triple>,
    pub test: Vec<Triple>,
    /// Inductive only: triples that extend the training graph into the
    /// inference graph (train ∪ extension ⊇ train).
    pub extension: Option<Vec<Triple>>,
}

impl DatasetSplit {
    /// Inference-graph triples: train plus the extension when present.
    pub fn inference_triples(&self) -> Vec<Triple> {
        let mut t = self.train.clone();
        if let Some(ext) = &self.extension {
            t.extend_from_slice(ext);
        }
        t
    }
}

#[derive(Clone, Debug, Default)]
pub struct SplitReport {
    pub requested_valid: usize,
    pub requested_test: usize,
    pub warnings: Vec<String>,
}

fn is_task_triple(g: &KnowledgeGraph, t: &Triple) -> bool {
    g.task_relations.contains(&t.relation)
}

/// Random split preserving entity coverage: every entity that appears in
/// valid or test keeps at least one training triple. Only task-relation
/// triples are eligible to leave the training graph; fractions are relative
/// to the eligible count.
pub fn split_transductive(
    g: &KnowledgeGraph,
    valid_fraction: f64,
    test_fraction: f64,
    seed: u64,
) -> GraphResult<(DatasetSplit, SplitReport)> {
    if valid_fraction <= 0.0
        || test_fraction <= 0.0
        || valid_fraction + test_fraction >= 1.0
        || !valid_fraction.is_finite()
        || !test_fraction.is_finite()
    {
        return Err(GraphError::BadFractions {
            valid: valid_fraction,
            test: test_fraction,
        });
    }
    if g.triple_count() == 0 {
        return Err(GraphError::EmptyInput("no triples to split"));
    }

    let eligible: Vec<usize> = (0..g.triple_count())
        .filter(|&i| is_task_triple(g, &g.triples()[i]))
        .collect();
    let want_valid = (valid_fraction * eligible.len() as f64).round() as usize;
    let want_test = (test_fraction * eligible.len() as f64).round() as usize;

    let mut order = eligible;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    // Remaining-train-degree per entity; moving a triple out requires both
    // endpoints to keep at least one training triple.
    let mut degree = vec![0usize; g.entity_count()];
    for t in g.triples() {
        degree[t.head] += 1;
        degree[t.tail] += 1;
    }

    let mut moved = vec![false; g.triple_count()];
    let mut valid = Vec::new();
    let mut test = Vec::new();
    for &i in &order {
        if valid.len() == want_valid && test.len() == want_test {
            break;
        }
        let t = &g.triples()[i];
        let self_loop = t.head == t.tail;
        let ok = if self_loop {
            degree[t.head] >= 3
        } else {
            degree[t.head] >= 2 && degree[t.tail] >= 2
        };
        if !ok {
            continue;
        }
        degree[t.head] -= 1;
        degree[t.tail] -= 1;
        moved[i] = true;
        if valid.len() < want_valid {
            valid.push(*t);
        } else {
            test.push(*t);
        }
    }

    let train: Vec<Triple> = (0..g.triple_count())
        .filter(|&i| !moved[i])
        .map(|i| g.triples()[i])
        .collect();

    let mut report = SplitReport {
        requested_valid: want_valid,
        requested_test: want_test,
        warnings: Vec::new(),
    };
    if valid.len() < want_valid || test.len() < want_test {
        report.warnings.push(format!(
            "coverage constraint limited the split: valid {}/{}, test {}/{}",
            valid.len(),
            want_valid,
            test.len(),
            want_test
        ));
    }

    Ok((
        DatasetSplit {
            mode: SplitMode::Transductive { seed },
            train,
            valid,
            test,
            extension: None,
        },
        report,
    ))
}

/// Temporal split: the training graph is everything dated up to
/// `train_cutoff`; window triples in `(train_cutoff, test_cutoff]` become the
/// inference extension plus the valid/test pools. Non-task window triples all
/// extend the inference graph; each entity whose only window presence is task
/// triples keeps one as an attachment edge so unseen entities stay connected
/// at inference time.
pub fn split_inductive(
    g: &KnowledgeGraph,
    train_cutoff: NaiveDate,
    test_cutoff: NaiveDate,
    valid_fraction: f64,
    seed: u64,
) -> GraphResult<(DatasetSplit, SplitReport)> {
    if train_cutoff >= test_cutoff {
        return Err(GraphError::BadCutoffs {
            train: train_cutoff,
            test: test_cutoff,
        });
    }
    if !(0.0..1.0).contains(&valid_fraction) {
        return Err(GraphError::BadFractions {
            valid: valid_fraction,
            test: 1.0 - valid_fraction,
        });
    }

    let mut train = Vec::new();
    let mut window = Vec::new();
    for t in g.triples() {
        if t.created <= train_cutoff {
            train.push(*t);
        } else if t.created <= test_cutoff {
            window.push(*t);
        }
    }
    if window.is_empty() {
        return Err(GraphError::NothingAfterCutoff(train_cutoff));
    }

    let mut covered = vec![false; g.entity_count()];
    for t in &train {
        covered[t.head] = true;
        covered[t.tail] = true;
    }

    // Window triples in date order so attachment edges are the earliest ones.
    let mut window_order: Vec<usize> = (0..window.len()).collect();
    window_order.sort_by_key(|&i| (window[i].created, i));

    let mut extension = Vec::new();
    let mut pool = Vec::new();
    for &i in &window_order {
        let t = window[i];
        if !is_task_triple(g, &t) || !covered[t.head] || !covered[t.tail] {
            covered[t.head] = true;
            covered[t.tail] = true;
            extension.push(t);
        } else {
            pool.push(t);
        }
    }

    let want_valid = (valid_fraction * pool.len() as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    let valid: Vec<Triple> = pool[..want_valid.min(pool.len())].to_vec();
    let test: Vec<Triple> = pool[want_valid.min(pool.len())..].to_vec();

    let mut report = SplitReport {
        requested_valid: want_valid,
        requested_test: pool.len().saturating_sub(want_valid),
        warnings: Vec::new(),
    };
    if test.is_empty() {
        report
            .warnings
            .push("no task triples left for the test pool".into());
    }

    Ok((
        DatasetSplit {
            mode: SplitMode::Inductive {
                train_cutoff,
                test_cutoff,
            },
            train,
            valid,
            test,
            extension: Some(extension),
        },
        report,
    ))
}
