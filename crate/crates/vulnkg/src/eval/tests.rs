use super::*;
use crate::graph::{EntityKind, KnowledgeGraph, RelationType};
use chrono::NaiveDate;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2022, 3, 4).unwrap()
}

struct FnScorer<'g, F: Fn(Query) -> Vec<f64>> {
    g: &'g KnowledgeGraph,
    f: F,
}

impl<F: Fn(Query) -> Vec<f64>> Scorer for FnScorer<'_, F> {
    fn score_all(&self, query: Query) -> EvalResult<Vec<f64>> {
        Ok((self.f)(query))
    }
    fn graph(&self) -> &KnowledgeGraph {
        self.g
    }
}

/// One-kind graph with `n` entities and a single task relation.
fn flat_graph(n: usize) -> KnowledgeGraph {
    let mut g = KnowledgeGraph::new(vec![RelationType::new("r0", None, None)]);
    g.task_relations = vec![0];
    for i in 0..n {
        g.add_entity(EntityKind::Cve, &format!("e{i}"));
    }
    for i in 0..n {
        g.add_triple(i, 0, (i + 1) % n, date()).unwrap();
    }
    g
}

#[test]
fn rank_query_strict_winner() {
    let g = flat_graph(5);
    let scorer = FnScorer {
        g: &g,
        f: |_| vec![0.1, 0.9, 0.3, 0.2, 0.0],
    };
    let r = rank_query(
        &scorer,
        Query { head: 0, relation: 0 },
        1,
        &Default::default(),
        false,
    )
    .unwrap();
    assert_eq!(r.rank_of_truth, 1.0);
    assert_eq!(r.candidates[0], 1);
}

#[test]
fn rank_query_tie_gets_mean_rank() {
    let g = flat_graph(4);
    let scorer = FnScorer {
        g: &g,
        f: |_| vec![0.9, 0.9, 0.1, 0.0],
    };
    let r = rank_query(
        &scorer,
        Query { head: 2, relation: 0 },
        0,
        &Default::default(),
        false,
    )
    .unwrap();
    assert_eq!(r.rank_of_truth, 1.5);
}

#[test]
fn filtered_rank_never_worse() {
    let g = flat_graph(6);
    let scorer = FnScorer {
        g: &g,
        f: |_| vec![0.6, 0.5, 0.4, 0.3, 0.2, 0.1],
    };
    let truth = 3;
    let known: std::collections::BTreeSet<usize> = [0, 1, truth].into_iter().collect();
    let raw = rank_query(&scorer, Query { head: 5, relation: 0 }, truth, &known, false).unwrap();
    let filtered = rank_query(&scorer, Query { head: 5, relation: 0 }, truth, &known, true).unwrap();
    assert!(filtered.rank_of_truth <= raw.rank_of_truth);
    assert_eq!(raw.rank_of_truth, 4.0);
    assert_eq!(filtered.rank_of_truth, 2.0);
    // Filtering never removes the truth itself.
    assert!(filtered.candidates.contains(&truth));
}

#[test]
fn rank_query_rejects_foreign_truth() {
    let mut g = flat_graph(3);
    let vendor = g.add_entity(EntityKind::Vendor, "acme");
    let scorer = FnScorer {
        g: &g,
        f: |_| vec![0.0; 4],
    };
    // Truth of a different kind than... the candidate set is the truth's own
    // kind, so a vendor truth ranks among vendors; with one vendor it works.
    let r = rank_query(&scorer, Query { head: 0, relation: 0 }, vendor, &Default::default(), false).unwrap();
    assert_eq!(r.rank_of_truth, 1.0);
    assert_eq!(r.candidates.len(), 1);
}

#[test]
fn mrr_examples() {
    assert_eq!(mrr(&[1.0]).unwrap(), 1.0);
    let v = mrr(&[1.0, 2.0, 4.0]).unwrap();
    assert!((v - 0.583333).abs() < 1e-6);
    assert!(mrr(&[]).is_err());
    // Monotone: worsening any rank lowers MRR.
    let worse = mrr(&[1.0, 2.0, 8.0]).unwrap();
    assert!(worse < v);
}

#[test]
fn hits_examples() {
    let ranks = [1.0, 11.0, 5.0];
    assert!((hits_at_k(&ranks, 10).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(hits_at_k(&ranks, 11).unwrap(), 1.0);
    assert!(hits_at_k(&[], 3).is_err());
    let mut prev = 0.0;
    for k in 1..=12 {
        let h = hits_at_k(&ranks, k).unwrap();
        assert!(h >= prev);
        prev = h;
    }
}

#[test]
fn metrics_match_brute_force_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let q = rng.random_range(1..12);
        let ranks: Vec<f64> = (0..q).map(|_| rng.random_range(1..50) as f64).collect();
        let m = mrr(&ranks).unwrap();
        let brute: f64 = ranks.iter().map(|r| 1.0 / r).sum::<f64>() / ranks.len() as f64;
        assert!((m - brute).abs() < 1e-12);
        for k in [1, 3, 10] {
            let h = hits_at_k(&ranks, k).unwrap();
            let brute = ranks.iter().filter(|&&r| r <= k as f64).count() as f64 / ranks.len() as f64;
            assert!((h - brute).abs() < 1e-12);
        }
        assert!(m >= hits_at_k(&ranks, 1).unwrap());
    }
}

#[test]
fn ranking_invariant_under_monotone_transforms() {
    let g = flat_graph(8);
    let base_scores: Vec<f64> = vec![0.3, -1.2, 0.8, 0.0, 2.5, -0.7, 1.1, 0.4];
    let transforms: Vec<Box<dyn Fn(f64) -> f64>> = vec![
        Box::new(|x| x),
        Box::new(|x| 3.0 * x + 7.0),
        Box::new(|x| x.exp()),
        Box::new(|x| x.tanh()),
    ];
    let mut baseline: Option<(f64, Vec<usize>)> = None;
    for t in &transforms {
        let scores: Vec<f64> = base_scores.iter().map(|&x| t(x)).collect();
        let scorer = FnScorer {
            g: &g,
            f: move |_| scores.clone(),
        };
        let r = rank_query(&scorer, Query { head: 0, relation: 0 }, 6, &Default::default(), false).unwrap();
        match &baseline {
            None => baseline = Some((r.rank_of_truth, r.candidates)),
            Some((rank, order)) => {
                assert_eq!(r.rank_of_truth, *rank);
                assert_eq!(&r.candidates, order);
            }
        }
    }
}

#[test]
fn random_scorer_matches_analytic_baseline() {
    let g = flat_graph(60);
    let scorer = UniformRandomScorer { seed: 7, graph: &g };
    let triples: Vec<_> = g.triples().to_vec();
    let filter = FilterIndex::build(&g, triples.iter());
    let report = evaluate_triples(
        &scorer,
        &triples,
        &filter,
        EvalTask::All,
        EvalDirections::TailsOnly,
        true,
    )
    .unwrap();

    let sizes = candidate_sizes(&g, &triples, &filter, EvalDirections::TailsOnly, true);
    let expected = random_baseline_mrr(&sizes);
    // σ of the mean of 1/rank for uniform ranks over m candidates.
    let m = sizes[0] as f64;
    let e2: f64 = (1..=sizes[0]).map(|k| 1.0 / (k as f64 * k as f64)).sum::<f64>() / m;
    let var = e2 - (expected * expected);
    let sigma = (var / triples.len() as f64).sqrt();
    assert!(
        (report.overall.mrr - expected).abs() < 3.0 * sigma,
        "mrr {} vs baseline {expected} (3σ = {})",
        report.overall.mrr,
        3.0 * sigma
    );
}

#[test]
fn evaluate_splits_queries_both_directions() {
    let g = flat_graph(10).augment_inverses().unwrap();
    let triples: Vec<_> = g
        .triples()
        .iter()
        .filter(|t| !g.relation(t.relation).is_inverse)
        .copied()
        .collect();
    let filter = FilterIndex::build(&g, triples.iter());
    let scorer = UniformRandomScorer { seed: 3, graph: &g };
    let both = evaluate_triples(&scorer, &triples, &filter, EvalTask::All, EvalDirections::Both, true).unwrap();
    let tails = evaluate_triples(&scorer, &triples, &filter, EvalTask::All, EvalDirections::TailsOnly, true).unwrap();
    assert_eq!(both.overall.query_count, 2 * tails.overall.query_count);
}

#[test]
fn evaluate_rejects_empty() {
    let g = flat_graph(4);
    let scorer = UniformRandomScorer { seed: 1, graph: &g };
    let filter = FilterIndex::build(&g, [].iter());
    assert!(matches!(
        evaluate_triples(&scorer, &[], &filter, EvalTask::All, EvalDirections::Both, true),
        Err(EvalError::Empty(_))
    ));
}

fn security_toy() -> KnowledgeGraph {
    let mut g = KnowledgeGraph::with_security_schema();
    let cve = g.add_entity(EntityKind::Cve, "CVE-2023-0001");
    let cwe = g.add_entity(EntityKind::Cwe, "CWE-79");
    let cwe2 = g.add_entity(EntityKind::Cwe, "CWE-89");
    let _cwe3 = g.add_entity(EntityKind::Cwe, "CWE-20");
    let cpe = g.add_entity(EntityKind::Cpe, "cpe:2.3:a:google:chrome");
    let cpe2 = g.add_entity(EntityKind::Cpe, "cpe:2.3:a:mozilla:firefox");
    let _cpe3 = g.add_entity(EntityKind::Cpe, "cpe:2.3:a:qt:qt");
    let m_cwe = g.relation_id("matchingCWE").unwrap();
    let m_cve = g.relation_id("matchingCVE").unwrap();
    g.add_triple(cve, m_cwe, cwe, date()).unwrap();
    g.add_triple(cve, m_cwe, cwe2, date()).unwrap();
    g.add_triple(cpe, m_cve, cve, date()).unwrap();
    g.add_triple(cpe2, m_cve, cve, date()).unwrap();
    g.augment_inverses().unwrap()
}

#[test]
fn predict_report_shapes_and_exclusion() {
    let g = security_toy();
    let scorer = UniformRandomScorer { seed: 11, graph: &g };

    // CVE → CPE goes through the inverse of matchingCVE (stored CPE→CVE).
    let rows = predict_report(&scorer, "CVE-2023-0001", "matchingCVE", 10, false).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].rank, 1);
    assert!(rows.iter().all(|r| r.label.starts_with("cpe:2.3:")));

    let excluded = predict_report(&scorer, "CVE-2023-0001", "matchingCVE", 10, true).unwrap();
    assert_eq!(excluded.len(), 1);
    assert_eq!(excluded[0].label, "cpe:2.3:a:qt:qt");

    // top_n truncates.
    let top1 = predict_report(&scorer, "CVE-2023-0001", "matchingCVE", 1, false).unwrap();
    assert_eq!(top1.len(), 1);

    // Forward direction for matchingCWE (CVE is its head kind).
    let cwes = predict_report(&scorer, "CVE-2023-0001", "matchingCWE", 10, true).unwrap();
    assert_eq!(cwes.len(), 1);
    assert_eq!(cwes[0].label, "CWE-20");

    assert!(matches!(
        predict_report(&scorer, "CVE-9999-0000", "matchingCVE", 5, false),
        Err(EvalError::UnknownEntity(_))
    ));
    assert!(matches!(
        predict_report(&scorer, "CVE-2023-0001", "hasVendor", 5, false),
        Err(EvalError::KindMismatch { .. })
    ));
}

#[test]
fn random_baseline_formula() {
    // H(4)/4 = (1 + 1/2 + 1/3 + 1/4)/4.
    let b = random_baseline_mrr(&[4]);
    assert!((b - (1.0 + 0.5 + 1.0 / 3.0 + 0.25) / 4.0).abs() < 1e-12);
    assert_eq!(random_baseline_mrr(&[]), 0.0);
}
