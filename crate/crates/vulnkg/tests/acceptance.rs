//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS/FAIL line with its measurements. Heavy criteria serialize on a
//! shared lock so per-criterion runtime budgets aren't distorted by test
//! parallelism.

use std::collections::BTreeSet;
use std::sync::Mutex;
use std::time::Instant;

use chrono::NaiveDate;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use vulnkg::baseline::{transe_train, BaselineError, TransEConfig, TransEScorer};
use vulnkg::eval::{
    candidate_sizes, evaluate_triples, hits_at_k, mrr, random_baseline_mrr, rank_query,
    EvalDirections, EvalResult, EvalTask, FilterIndex, GnnPredictor, Scorer,
};
use vulnkg::fusion::{EmbeddingCache, EmbeddingService, FusionContext};
use vulnkg::graph::{
    split_inductive, split_transductive, EntityKind, KnowledgeGraph, RelationType, SplitMode,
    Triple,
};
use vulnkg::model::{
    lift_relation_graph, FundamentalType, ModelConfig, ModelParams, Query, RelationGraph,
};
use vulnkg::synth::{self, SynthConfig};
use vulnkg::tensor::{grad_check_params, ParamStore, Tape, Tensor};
use vulnkg::train::{batch_loss, sample_negatives, train, ForwardContext, TrainConfig, TrainItem};

static HEAVY: Mutex<()> = Mutex::new(());

fn pass(n: u32, detail: &str) {
    println!("PASS criterion {n}: {detail}");
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

fn generic_graph(
    num_entities: usize,
    num_relations: usize,
    triples: &[(usize, usize, usize)],
) -> KnowledgeGraph {
    let vocab: Vec<RelationType> = (0..num_relations)
        .map(|i| RelationType::new(&format!("r{i}"), None, None))
        .collect();
    let mut g = KnowledgeGraph::new(vocab);
    g.task_relations = (0..num_relations).collect();
    for i in 0..num_entities {
        g.add_entity(EntityKind::Cve, &format!("e{i}"));
    }
    for &(h, r, t) in triples {
        g.add_triple(h, r, t, date(2020, 1, 1)).unwrap();
    }
    g
}

// ---------------------------------------------------------------------------
// 1. Gradient correctness of the full fused model
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_gradient_correctness() {
    let _guard = HEAVY.lock().unwrap();
    let started = Instant::now();

    let mut rng = ChaCha8Rng::seed_from_u64(20240101);
    // ≤20 entities, ≤40 triples, 3 relations, d = 8.
    let n_entities = 18;
    let mut triples = Vec::new();
    for _ in 0..36 {
        triples.push((
            rng.random_range(0..n_entities),
            rng.random_range(0..3usize),
            rng.random_range(0..n_entities),
        ));
    }
    let mut g = generic_graph(n_entities, 3, &triples);
    for e in 0..n_entities {
        let label = g.entity(e).label.clone();
        g.descriptions
            .insert(label.clone(), format!("entity {label} carries marker m{e}"));
    }
    let g = g.augment_inverses().unwrap();

    let mut params = ModelParams::init(
        ModelConfig {
            dim: 8,
            rel_layers: 2,
            ent_layers: 2,
            fusion_hidden: 8,
            text_dim: 1536,
            fusion_enabled: true,
        },
        20240102,
    );
    // Zero-initialized biases sit ReLU pre-activations exactly on the kink,
    // where central differences are undefined; check at a generic point.
    for id in params.store.ids().collect::<Vec<_>>() {
        if params.store.name_of(id).contains(".b") {
            let shape = params.store.get(id).value.shape().to_vec();
            let n: usize = shape.iter().product();
            let data: Vec<f64> = (0..n).map(|_| rng.random_range(-0.1..0.1)).collect();
            params.store.set_value(id, Tensor::new(shape, data).unwrap());
        }
    }

    let mut service = EmbeddingService::local(EmbeddingCache::in_memory());
    let fusion = FusionContext::build(&g, &mut service).unwrap();
    let ctx = ForwardContext::new(&g, Some(fusion));

    // The loss under test is the real training objective over two queries.
    let mut items = Vec::new();
    for t in g.triples().iter().take(2) {
        let q = Query {
            head: t.head,
            relation: t.relation,
        };
        let (negs, _) = sample_negatives(&g, q, t.tail, 3, &mut rng);
        items.push(TrainItem {
            query: q,
            truth: t.tail,
            negatives: negs,
        });
    }
    let forward = |tape: &Tape, store: &ParamStore| {
        let mut p = params.clone();
        p.store = store.clone();
        batch_loss(tape, &ctx, &p, &items).map_err(|e| match e {
            vulnkg::train::TrainError::Num(n) => n,
            other => panic!("unexpected error in forward: {other}"),
        })
    };

    let mut store = params.store.clone();
    let mut worst: (String, f64) = (String::new(), 0.0);
    for id in store.ids().collect::<Vec<_>>() {
        let name = store.name_of(id).to_string();
        let err = if name == "fuse.w1" {
            // (text_dim + d) × hidden coordinates: a fixed 256-coordinate
            // sample keeps the sweep inside the runtime budget; any wrong
            // matmul/concat partial shows up coordinate-independently.
            let numel = store.get(id).value.numel();
            let mut coords: Vec<usize> = (0..256).map(|_| rng.random_range(0..numel)).collect();
            coords.sort_unstable();
            coords.dedup();
            grad_check_params(forward, &mut store, id, 1e-5, Some(&coords)).unwrap()
        } else {
            grad_check_params(forward, &mut store, id, 1e-5, None).unwrap()
        };
        assert!(err < 1e-4, "group {name}: max relative error {err}");
        if err > worst.1 {
            worst = (name, err);
        }
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 30,
        "gradient sweep took {elapsed:?}, budget is 30 s"
    );
    pass(
        1,
        &format!(
            "grad_check over {} parameter groups, worst {} = {:.2e}, {:.1?}",
            store.len(),
            worst.0,
            worst.1,
            elapsed
        ),
    );
}

// ---------------------------------------------------------------------------
// 2. Lift oracle
// ---------------------------------------------------------------------------

/// Independent O(|T|²) enumeration over ordered triple pairs.
fn brute_force_lift(g: &KnowledgeGraph) -> RelationGraph {
    let mut edges = BTreeSet::new();
    for a in g.triples() {
        for b in g.triples() {
            if a.head == b.head {
                edges.insert((a.relation, FundamentalType::HeadToHead, b.relation));
            }
            if a.head == b.tail {
                edges.insert((a.relation, FundamentalType::HeadToTail, b.relation));
            }
            if a.tail == b.head {
                edges.insert((a.relation, FundamentalType::TailToHead, b.relation));
            }
            if a.tail == b.tail {
                edges.insert((a.relation, FundamentalType::TailToTail, b.relation));
            }
        }
    }
    RelationGraph {
        num_relations: g.relation_count(),
        edges: edges.into_iter().collect(),
    }
}

#[test]
fn criterion_02_lift_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20240202);
    for case in 0..200 {
        let n = rng.random_range(2..=14);
        let r = rng.random_range(1..=6);
        let t = rng.random_range(1..=50);
        let triples: Vec<(usize, usize, usize)> = (0..t)
            .map(|_| {
                (
                    rng.random_range(0..n),
                    rng.random_range(0..r),
                    rng.random_range(0..n),
                )
            })
            .collect();
        let g = generic_graph(n, r, &triples);
        assert_eq!(
            lift_relation_graph(&g),
            brute_force_lift(&g),
            "lift mismatch on case {case}"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 10, "lift oracle took {elapsed:?}");
    pass(2, &format!("200 random graphs equal brute force, {elapsed:.1?}"));
}

// ---------------------------------------------------------------------------
// 3. Metric oracle
// ---------------------------------------------------------------------------

struct MatrixScorer<'g> {
    g: &'g KnowledgeGraph,
    scores: Vec<Vec<f64>>,
}

impl Scorer for MatrixScorer<'_> {
    fn score_all(&self, query: Query) -> EvalResult<Vec<f64>> {
        Ok(self.scores[query.head].clone())
    }
    fn graph(&self) -> &KnowledgeGraph {
        self.g
    }
}

#[test]
fn criterion_03_metric_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240303);
    for case in 0..100 {
        let m = rng.random_range(2..30); // candidates
        let q = rng.random_range(1..12); // queries
        let g = generic_graph(m, 1, &[(0, 0, 1 % m)]);
        let scores: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                (0..m)
                    // Coarse grid forces frequent ties, exercising the
                    // mean-rank rule in both routes.
                    .map(|_| (rng.random_range(0..6) as f64) / 2.0)
                    .collect()
            })
            .collect();
        let scorer = MatrixScorer { g: &g, scores };

        let mut ranks = Vec::new();
        let mut brute_ranks = Vec::new();
        for _ in 0..q {
            let head = rng.random_range(0..m);
            let truth = rng.random_range(0..m);
            let r = rank_query(
                &scorer,
                Query { head, relation: 0 },
                truth,
                &BTreeSet::new(),
                false,
            )
            .unwrap();
            ranks.push(r.rank_of_truth);

            // Independent recomputation straight from the matrix.
            let row = &scorer.scores[head];
            let better = row.iter().filter(|&&s| s > row[truth]).count();
            let tied = row.iter().filter(|&&s| s == row[truth]).count();
            brute_ranks.push(better as f64 + (tied as f64 + 1.0) / 2.0);
        }

        for (a, b) in ranks.iter().zip(&brute_ranks) {
            assert!((a - b).abs() < 1e-12, "rank mismatch on case {case}");
        }
        let lib_mrr = mrr(&ranks).unwrap();
        let brute_mrr = brute_ranks.iter().map(|r| 1.0 / r).sum::<f64>() / q as f64;
        assert!((lib_mrr - brute_mrr).abs() < 1e-12);

        let mut prev = 0.0;
        for k in 1..=12 {
            let h = hits_at_k(&ranks, k).unwrap();
            let brute = brute_ranks.iter().filter(|&&r| r <= k as f64).count() as f64 / q as f64;
            assert!((h - brute).abs() < 1e-12);
            assert!(h >= prev, "Hits must be nondecreasing in K");
            prev = h;
        }
        assert!(lib_mrr >= hits_at_k(&ranks, 1).unwrap());
        assert!(lib_mrr <= 1.0);
    }
    pass(3, "mrr/hits match brute force on 100 random score matrices at 1e-12");
}

// ---------------------------------------------------------------------------
// 4. Memorization
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_memorization() {
    let _guard = HEAVY.lock().unwrap();
    let started = Instant::now();
    let g = synth::memorization_toy();

    // Full model.
    let model_cfg = ModelConfig {
        dim: 32,
        rel_layers: 2,
        ent_layers: 2,
        fusion_hidden: 16,
        text_dim: 1536,
        fusion_enabled: false,
    };
    let train_cfg = TrainConfig {
        learning_rate: 5e-3,
        negatives: 6,
        epochs: 120,
        batches_per_epoch: 4,
        batch_size: 16,
        seed: 44,
        augment_inverses: true,
        fusion_enabled: false,
        // Memorization of a fixed training set scores with its edges
        // visible, so training sees them too.
        mask_target_edges: false,
    };
    assert!(train_cfg.epochs <= 500);
    let outcome = train(&g, &[], model_cfg, &train_cfg, None).unwrap();
    let g_aug = g.augment_inverses().unwrap();
    let predictor = GnnPredictor::new(&outcome.params, &g_aug, None);
    let triples: Vec<Triple> = g.triples().to_vec();
    let filter = FilterIndex::build(&g_aug, triples.iter());
    let gnn = evaluate_triples(
        &predictor,
        &triples,
        &filter,
        EvalTask::All,
        EvalDirections::TailsOnly,
        true,
    )
    .unwrap();
    assert_eq!(
        gnn.overall.hits[&1], 1.0,
        "full model filtered training Hits@1 = {} (MRR {})",
        gnn.overall.hits[&1], gnn.overall.mrr
    );

    // Translation baseline.
    let transe_cfg = TransEConfig {
        dim: 32,
        epochs: 150,
        learning_rate: 2e-2,
        negatives: 4,
        seed: 45,
        ..TransEConfig::default()
    };
    assert!(transe_cfg.epochs <= 500);
    let params = transe_train(&g, &SplitMode::Transductive { seed: 1 }, &transe_cfg).unwrap();
    let scorer = TransEScorer {
        params: &params,
        graph: &g,
    };
    let filter = FilterIndex::build(&g, triples.iter());
    let transe = evaluate_triples(
        &scorer,
        &triples,
        &filter,
        EvalTask::All,
        EvalDirections::TailsOnly,
        true,
    )
    .unwrap();
    assert_eq!(
        transe.overall.hits[&1], 1.0,
        "baseline filtered training Hits@1 = {} (MRR {})",
        transe.overall.hits[&1], transe.overall.mrr
    );

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 120, "memorization took {elapsed:?}");
    pass(
        4,
        &format!(
            "full model and baseline both reach filtered training Hits@1 = 1.0 ({elapsed:.1?})"
        ),
    );
}

// ---------------------------------------------------------------------------
// 5. Learning signal on the planted compositional rule
// ---------------------------------------------------------------------------

fn full_train_cfg(seed: u64, epochs: usize, fusion: bool) -> TrainConfig {
    TrainConfig {
        learning_rate: 3e-3,
        negatives: 8,
        epochs,
        batches_per_epoch: 8,
        batch_size: 16,
        seed,
        augment_inverses: true,
        fusion_enabled: fusion,
        mask_target_edges: true,
    }
}

fn full_model_cfg(fusion: bool) -> ModelConfig {
    ModelConfig {
        dim: 16,
        rel_layers: 2,
        ent_layers: 3,
        fusion_hidden: 32,
        text_dim: 1536,
        fusion_enabled: fusion,
    }
}

#[test]
fn criterion_05_learning_signal() {
    let _guard = HEAVY.lock().unwrap();
    let started = Instant::now();

    let g = synth::planted_composition_graph(&SynthConfig::default());
    assert_eq!(g.relation_count(), 3);
    let total = g.triple_count();
    assert!(
        (800..=1300).contains(&total),
        "synthetic KG has {total} triples"
    );

    let (split, _) = split_transductive(&g, 0.05, 0.15, 77).unwrap();
    let g_train = g.with_triples(&split.train).unwrap();

    let mut service = EmbeddingService::local(EmbeddingCache::in_memory());
    let outcome = train(
        &g_train,
        &[],
        full_model_cfg(true),
        &full_train_cfg(505, 60, true),
        Some(&mut service),
    )
    .unwrap();

    let rank_g = g.with_triples(&split.train).unwrap().augment_inverses().unwrap();
    let mut service = EmbeddingService::local(EmbeddingCache::in_memory());
    let fusion = FusionContext::build(&rank_g, &mut service).unwrap();
    let predictor = GnnPredictor::new(&outcome.params, &rank_g, Some(fusion));
    let filter = FilterIndex::from_split(&rank_g, &split);
    let report = evaluate_triples(
        &predictor,
        &split.test,
        &filter,
        EvalTask::All,
        EvalDirections::Both,
        true,
    )
    .unwrap();

    let sizes = candidate_sizes(&rank_g, &split.test, &filter, EvalDirections::Both, true);
    let baseline = random_baseline_mrr(&sizes);
    let elapsed = started.elapsed();
    assert!(
        report.overall.mrr >= 5.0 * baseline,
        "test MRR {} below 5× random baseline {baseline}",
        report.overall.mrr
    );
    assert!(elapsed.as_secs() < 600, "training took {elapsed:?}");
    pass(
        5,
        &format!(
            "test filtered MRR {:.4} ≥ 5 × random baseline {:.4} ({} queries, {elapsed:.1?})",
            report.overall.mrr,
            baseline,
            report.overall.query_count
        ),
    );
}

// ---------------------------------------------------------------------------
// 6. Inductive generalization to unseen heads
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_inductive_generalization() {
    let _guard = HEAVY.lock().unwrap();
    let started = Instant::now();

    let g = synth::planted_composition_graph(&SynthConfig {
        unseen_head_fraction: 0.10,
        ..SynthConfig::default()
    });
    let (split, _) = split_inductive(&g, synth::cutoff(), synth::end_date(), 0.3, 99).unwrap();
    assert!(!split.test.is_empty());

    // Unseen heads exist only through the inference extension.
    let train_entities: BTreeSet<usize> = split
        .train
        .iter()
        .flat_map(|t| [t.head, t.tail])
        .collect();
    for t in &split.test {
        assert!(
            !train_entities.contains(&t.head),
            "test head seen in training"
        );
    }

    let g_train = g.with_triples(&split.train).unwrap();
    let mut service = EmbeddingService::local(EmbeddingCache::in_memory());
    let outcome = train(
        &g_train,
        &[],
        full_model_cfg(true),
        &full_train_cfg(606, 40, true),
        Some(&mut service),
    )
    .unwrap();

    let inference = g
        .with_triples(&split.inference_triples())
        .unwrap()
        .augment_inverses()
        .unwrap();
    let mut service = EmbeddingService::local(EmbeddingCache::in_memory());
    let fusion = FusionContext::build(&inference, &mut service).unwrap();
    let predictor = GnnPredictor::new(&outcome.params, &inference, Some(fusion));
    let filter = FilterIndex::from_split(&inference, &split);
    let report = evaluate_triples(
        &predictor,
        &split.test,
        &filter,
        EvalTask::All,
        EvalDirections::TailsOnly,
        true,
    )
    .unwrap();

    let sizes = candidate_sizes(&inference, &split.test, &filter, EvalDirections::TailsOnly, true);
    let baseline = random_baseline_mrr(&sizes);
    assert!(
        report.overall.mrr >= 3.0 * baseline,
        "unseen-head MRR {} below 3× random baseline {baseline}",
        report.overall.mrr
    );

    // The translation baseline must refuse this mode outright.
    let refused = transe_train(&g_train, &split.mode, &TransEConfig::default());
    assert!(matches!(
        refused.unwrap_err(),
        BaselineError::InductiveUnsupported
    ));

    let elapsed = started.elapsed();
    pass(
        6,
        &format!(
            "unseen-head filtered MRR {:.4} ≥ 3 × random baseline {:.4}; translation baseline refused inductive mode ({elapsed:.1?})",
            report.overall.mrr, baseline
        ),
    );
}

// ---------------------------------------------------------------------------
// 7. Fusion ablation on token-correlated descriptions
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_fusion_ablation() {
    let _guard = HEAVY.lock().unwrap();
    let started = Instant::now();

    let g = synth::planted_composition_graph(&SynthConfig {
        heads: 80,
        mids: 24,
        tails: 100,
        token_descriptions: true,
        seed: 17,
        ..SynthConfig::default()
    });
    let (split, _) = split_transductive(&g, 0.05, 0.15, 7).unwrap();
    let g_train = g.with_triples(&split.train).unwrap();

    let evaluate = |fusion_enabled: bool| -> f64 {
        let mut service = EmbeddingService::local(EmbeddingCache::in_memory());
        let outcome = train(
            &g_train,
            &[],
            full_model_cfg(fusion_enabled),
            &full_train_cfg(707, 30, fusion_enabled),
            if fusion_enabled { Some(&mut service) } else { None },
        )
        .unwrap();
        let rank_g = g_train.augment_inverses().unwrap();
        let fusion = if fusion_enabled {
            let mut service = EmbeddingService::local(EmbeddingCache::in_memory());
            Some(FusionContext::build(&rank_g, &mut service).unwrap())
        } else {
            None
        };
        let predictor = GnnPredictor::new(&outcome.params, &rank_g, fusion);
        let filter = FilterIndex::from_split(&rank_g, &split);
        evaluate_triples(
            &predictor,
            &split.test,
            &filter,
            EvalTask::All,
            EvalDirections::Both,
            true,
        )
        .unwrap()
        .overall
        .mrr
    };

    let with_fusion = evaluate(true);
    let without_fusion = evaluate(false);

    // Hard check: for one trained fusion model, injecting the fused features
    // changes the scores of a fixed query.
    let mut service = EmbeddingService::local(EmbeddingCache::in_memory());
    let outcome = train(
        &g_train,
        &[],
        full_model_cfg(true),
        &full_train_cfg(707, 5, true),
        Some(&mut service),
    )
    .unwrap();
    let rank_g = g_train.augment_inverses().unwrap();
    let mut service = EmbeddingService::local(EmbeddingCache::in_memory());
    let fusion = FusionContext::build(&rank_g, &mut service).unwrap();
    let q = Query {
        head: 0,
        relation: g.task_relations[0],
    };
    let fused_scores = GnnPredictor::new(&outcome.params, &rank_g, Some(fusion))
        .score_all(q)
        .unwrap();
    let bare_scores = GnnPredictor::new(&outcome.params, &rank_g, None)
        .score_all(q)
        .unwrap();
    assert!(
        fused_scores
            .iter()
            .zip(&bare_scores)
            .any(|(a, b)| (a - b).abs() > 1e-9),
        "enabling fusion must change scores"
    );

    // Soft check: reported, not gated.
    if with_fusion >= without_fusion {
        println!(
            "criterion 7 soft check: fusion-enabled MRR {with_fusion:.4} ≥ fusion-disabled {without_fusion:.4}"
        );
    } else {
        println!(
            "criterion 7 soft check WARNING: fusion-enabled MRR {with_fusion:.4} < fusion-disabled {without_fusion:.4}"
        );
    }

    let elapsed = started.elapsed();
    pass(
        7,
        &format!(
            "fusion changes scores (hard); MRR with fusion {with_fusion:.4} vs without {without_fusion:.4} (soft, {elapsed:.1?})"
        ),
    );
}

// ---------------------------------------------------------------------------
// 8. Split contracts on fixtures and synthetic graphs
// ---------------------------------------------------------------------------

fn fixture_graph() -> KnowledgeGraph {
    use vulnkg::graph::{build_graph, BuildOptions};
    use vulnkg::ingest::{fetch_records, parse_cve_record, parse_cwe_catalog, FetchMode, Source};
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let docs = fetch_records(
        Source::Nvd,
        None,
        &FetchMode::Offline,
        root.join("nvd_small").to_str().unwrap(),
    )
    .unwrap();
    let cves: Vec<_> = docs
        .iter()
        .map(|d| parse_cve_record(d, Source::Nvd).unwrap())
        .collect();
    let xml = std::fs::read_to_string(root.join("cwe.xml")).unwrap();
    let (cwes, _) = parse_cwe_catalog(&xml).unwrap();
    build_graph(&cves, &cwes, &BuildOptions::default()).unwrap().0
}

#[test]
fn criterion_08_split_contracts() {
    let graphs: Vec<(&str, KnowledgeGraph)> = vec![
        ("fixture", fixture_graph()),
        (
            "synthetic",
            synth::planted_composition_graph(&SynthConfig {
                unseen_head_fraction: 0.1,
                ..SynthConfig::default()
            }),
        ),
    ];

    for (name, g) in &graphs {
        // Transductive coverage on several seeds.
        for seed in [1u64, 2, 3] {
            let (split, _) = split_transductive(g, 0.05, 0.10, seed).unwrap();
            let train_entities: BTreeSet<usize> = split
                .train
                .iter()
                .flat_map(|t| [t.head, t.tail])
                .collect();
            for t in split.valid.iter().chain(&split.test) {
                assert!(
                    train_entities.contains(&t.head) && train_entities.contains(&t.tail),
                    "{name}: coverage violated under seed {seed}"
                );
            }
        }

        // Inductive temporality.
        let cutoff = date(2023, 1, 1);
        let test_cutoff = date(2023, 10, 18);
        let (split, _) = match split_inductive(g, cutoff, test_cutoff, 0.3, 5) {
            Ok(s) => s,
            Err(_) => {
                // The synthetic unseen edges are dated mid-2023; the fixture
                // has 2023 records. Neither should fail here.
                panic!("{name}: inductive split failed");
            }
        };
        let max_train = split.train.iter().map(|t| t.created).max().unwrap();
        assert!(max_train <= cutoff, "{name}: train leaks past cutoff");
        if !split.test.is_empty() {
            let min_test = split.test.iter().map(|t| t.created).min().unwrap();
            assert!(cutoff < min_test, "{name}: test not after cutoff");
            assert!(split.test.iter().all(|t| t.created <= test_cutoff));
        }
        let inference = split.inference_triples();
        for t in &split.train {
            assert!(inference.contains(t), "{name}: inference must contain train");
        }
    }
    pass(8, "transductive coverage and inductive temporality hold on fixture and synthetic graphs");
}

// ---------------------------------------------------------------------------
// 9. Pipeline reproducibility (bit-identical reports)
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_pipeline_reproducibility() {
    let _guard = HEAVY.lock().unwrap();
    let started = Instant::now();
    let fixtures = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .canonicalize()
        .unwrap();

    let config = format!(
        r#"seed = 42

[paths]
fixtures = "{}"
cwe_catalog = "{}"

[split]
mode = "transductive"
valid_fraction = 0.08
test_fraction = 0.15

[model]
dim = 16
rel_layers = 2
ent_layers = 2
fusion_hidden = 32

[train]
learning_rate = 0.002
negatives = 8
epochs = 3
batches_per_epoch = 4
batch_size = 16
fusion_enabled = true

[embedding]
provider = "local-fallback"
"#,
        fixtures.join("nvd_tiny").display(),
        fixtures.join("cwe.xml").display()
    );

    let run = |dir: &std::path::Path| -> (Vec<u8>, Vec<u8>) {
        std::fs::write(dir.join("run.toml"), &config).unwrap();
        let bin = env!("CARGO_BIN_EXE_vulnkg");
        for args in [
            vec!["ingest"],
            vec!["build"],
            vec!["split"],
            vec!["train"],
            vec!["eval", "--part", "test"],
        ] {
            let status = std::process::Command::new(bin)
                .current_dir(dir)
                .arg("--config")
                .arg("run.toml")
                .args(&args)
                .output()
                .unwrap();
            assert!(
                status.status.success(),
                "step {args:?} failed: {}",
                String::from_utf8_lossy(&status.stderr)
            );
        }
        (
            std::fs::read(dir.join("out/reports/eval_test.tsv")).unwrap(),
            std::fs::read(dir.join("out/reports/train_loss.tsv")).unwrap(),
        )
    };

    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let (report_a, loss_a) = run(dir_a.path());
    let (report_b, loss_b) = run(dir_b.path());
    assert_eq!(report_a, report_b, "metrics reports differ between runs");
    assert_eq!(loss_a, loss_b, "loss logs differ between runs");
    let elapsed = started.elapsed();
    pass(
        9,
        &format!(
            "two end-to-end runs produced bit-identical metrics reports ({} bytes, {elapsed:.1?})",
            report_a.len()
        ),
    );
}

// ---------------------------------------------------------------------------
// 10. Delay-analysis invariant
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_delay_report_monotone() {
    use vulnkg::graph::cpe_delay_report;
    use vulnkg::ingest::{fetch_records, parse_cve_record, FetchMode, Source};

    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let docs = fetch_records(
        Source::Nvd,
        None,
        &FetchMode::Offline,
        root.join("nvd_small").to_str().unwrap(),
    )
    .unwrap();
    let cves: Vec<_> = docs
        .iter()
        .map(|d| parse_cve_record(d, Source::Nvd).unwrap())
        .collect();

    let report = cpe_delay_report(&cves, &[1, 7, 30, 180]);
    let mut any_positive = false;
    for (year, (total, pcts)) in &report.per_year {
        assert!(*total > 0);
        for w in pcts.windows(2) {
            assert!(
                w[0] >= w[1],
                "year {year}: percentages must not increase across windows ({pcts:?})"
            );
        }
        any_positive |= pcts.iter().any(|&p| p > 0.0);
    }
    assert!(any_positive, "fixture should contain delayed CPE additions");

    // Adversarial input: every CPE known at publication.
    let flat: Vec<_> = cves
        .iter()
        .cloned()
        .map(|mut c| {
            for ts in c.cpe_first_seen.values_mut() {
                *ts = c.published;
            }
            c
        })
        .collect();
    let report = cpe_delay_report(&flat, &[1, 7, 30, 180]);
    for (_, pcts) in report.per_year.values() {
        assert!(pcts.iter().all(|&p| p == 0.0));
    }
    pass(10, "delay percentages nonincreasing across 1→7→30→180-day windows");
}
