use super::*;
use crate::graph::{EntityKind, KnowledgeGraph, RelationType, Triple};
use crate::tensor::{grad_check_params, Tape, Tensor};
use chrono::NaiveDate;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

fn date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 1, 1).unwrap()
}

fn generic_graph(num_entities: usize, num_relations: usize, triples: &[(usize, usize, usize)]) -> KnowledgeGraph {
    let vocab: Vec<RelationType> = (0..num_relations)
        .map(|i| RelationType::new(&format!("r{i}"), None, None))
        .collect();
    let mut g = KnowledgeGraph::new(vocab);
    g.task_relations = (0..num_relations).collect();
    for i in 0..num_entities {
        g.add_entity(EntityKind::Cve, &format!("e{i}"));
    }
    for &(h, r, t) in triples {
        g.add_triple(h, r, t, date()).unwrap();
    }
    g
}

/// O(|T|²) enumeration over all ordered triple pairs.
pub(crate) fn brute_force_lift(g: &KnowledgeGraph) -> RelationGraph {
    let mut edges = BTreeSet::new();
    let ts: Vec<Triple> = g.triples().to_vec();
    for a in &ts {
        for b in &ts {
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

pub(crate) fn random_generic_graph(
    rng: &mut ChaCha8Rng,
    max_entities: usize,
    max_relations: usize,
    max_triples: usize,
) -> KnowledgeGraph {
    let n = rng.random_range(2..=max_entities);
    let r = rng.random_range(1..=max_relations);
    let t = rng.random_range(1..=max_triples);
    let mut triples = Vec::new();
    for _ in 0..t {
        triples.push((
            rng.random_range(0..n),
            rng.random_range(0..r),
            rng.random_range(0..n),
        ));
    }
    generic_graph(n, r, &triples)
}

#[test]
fn lift_chain_example() {
    // (a, r0, b), (b, r1, c)
    let g = generic_graph(3, 2, &[(0, 0, 1), (1, 1, 2)]);
    let rg = lift_relation_graph(&g);
    assert!(rg.contains(0, FundamentalType::TailToHead, 1));
    assert!(rg.contains(1, FundamentalType::HeadToTail, 0));
}

#[test]
fn lift_shared_head_example() {
    // (a, r0, b), (a, r1, c)
    let g = generic_graph(3, 2, &[(0, 0, 1), (0, 1, 2)]);
    let rg = lift_relation_graph(&g);
    assert!(rg.contains(0, FundamentalType::HeadToHead, 1));
    assert!(rg.contains(1, FundamentalType::HeadToHead, 0));
}

#[test]
fn lift_single_triple_is_self_pairs_only() {
    let g = generic_graph(2, 1, &[(0, 0, 1)]);
    let rg = lift_relation_graph(&g);
    assert_eq!(
        rg.edges,
        vec![
            (0, FundamentalType::HeadToHead, 0),
            (0, FundamentalType::TailToTail, 0),
        ]
    );
}

#[test]
fn lift_matches_brute_force_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..40 {
        let g = random_generic_graph(&mut rng, 12, 6, 50);
        assert_eq!(lift_relation_graph(&g), brute_force_lift(&g));
    }
}

#[test]
fn indicator_r_definition() {
    let t = indicator_r(0, 2, 4).unwrap();
    assert_eq!(t.data(), &[1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    let sum: f64 = t.data().iter().sum();
    assert_eq!(sum, 4.0);
    assert!(indicator_r(5, 2, 4).is_err());
}

#[test]
fn indicator_e_definition() {
    let tape = Tape::inference();
    let r_q = Tensor::matrix(2, 2, vec![9.0, 9.0, 2.0, 3.0]).unwrap();
    let out = indicator_e(&tape, Query { head: 1, relation: 1 }, &r_q, 3).unwrap();
    assert_eq!(out.data(), &[0.0, 0.0, 2.0, 3.0, 0.0, 0.0]);
    assert!(indicator_e(&tape, Query { head: 7, relation: 0 }, &r_q, 3).is_err());

    let zero_rq = Tensor::zeros(vec![2, 2]);
    let out = indicator_e(&tape, Query { head: 0, relation: 0 }, &zero_rq, 3).unwrap();
    assert!(out.data().iter().all(|&v| v == 0.0));
}

fn small_params(d: usize, rel_layers: usize, ent_layers: usize, seed: u64) -> ModelParams {
    ModelParams::init(
        ModelConfig {
            dim: d,
            rel_layers,
            ent_layers,
            fusion_hidden: 4,
            text_dim: 8,
            fusion_enabled: false,
        },
        seed,
    )
}

#[test]
fn relation_gnn_zero_edges_propagates_indicator_through_updates() {
    let params = small_params(2, 1, 1, 3);
    let rg = RelationGraph {
        num_relations: 2,
        edges: vec![],
    };
    let tape = Tape::inference();
    let out = relation_gnn(&tape, &rg, 0, &params).unwrap();

    // Oracle: relu([h0 ‖ 0] · W) computed with plain loops.
    let w = params.store.get(params.rel_update[0]).value.clone();
    let h0 = indicator_r(0, 2, 2).unwrap();
    let mut expect = vec![0.0; 4];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = 0.0;
            for k in 0..2 {
                acc += h0.data()[i * 2 + k] * w.data()[k * 2 + j];
                // Aggregate half of the concat is zero.
            }
            expect[i * 2 + j] = acc.max(0.0);
        }
    }
    for (a, b) in out.data().iter().zip(&expect) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn relation_gnn_single_t2h_edge_hand_trace() {
    // d=2, 1 layer, identity update (both concat blocks identity), so
    // state(r1) after one round is relu(message) = relu(R_fund[t2h]).
    let mut params = small_params(2, 1, 1, 5);
    params.store.set_value(
        params.rel_update[0],
        Tensor::matrix(4, 2, vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0]).unwrap(),
    );
    params.store.set_value(
        params.r_fund,
        Tensor::matrix(4, 2, vec![
            0.5, -0.5, // h2h
            0.25, 0.75, // h2t
            -0.3, 0.9, // t2h
            0.1, 0.2, // t2t
        ])
        .unwrap(),
    );
    let rg = RelationGraph {
        num_relations: 2,
        edges: vec![(0, FundamentalType::TailToHead, 1)],
    };
    let tape = Tape::inference();
    let out = relation_gnn(&tape, &rg, 0, &params).unwrap();
    // Row 0: relu([1,1]) = [1,1]. Row 1: relu([1,1] ∘ [-0.3, 0.9]) = [0, 0.9].
    assert_eq!(out.row(0), &[1.0, 1.0]);
    assert!((out.row(1)[0] - 0.0).abs() < 1e-12);
    assert!((out.row(1)[1] - 0.9).abs() < 1e-12);
}

#[test]
fn relation_gnn_permutation_equivariant() {
    let params = small_params(4, 2, 1, 11);
    let edges = vec![
        (0, FundamentalType::TailToHead, 1),
        (1, FundamentalType::HeadToHead, 2),
        (2, FundamentalType::TailToTail, 0),
    ];
    let rg = RelationGraph {
        num_relations: 3,
        edges: edges.clone(),
    };
    // Relabel with the permutation 0→2, 1→0, 2→1.
    let perm = [2usize, 0, 1];
    let mut relabeled: Vec<(usize, FundamentalType, usize)> = edges
        .iter()
        .map(|&(a, f, b)| (perm[a], f, perm[b]))
        .collect();
    relabeled.sort();
    let rg_perm = RelationGraph {
        num_relations: 3,
        edges: relabeled,
    };

    let tape = Tape::inference();
    let base = relation_gnn(&tape, &rg, 0, &params).unwrap();
    let moved = relation_gnn(&tape, &rg_perm, perm[0], &params).unwrap();
    for r in 0..3 {
        for c in 0..4 {
            assert!((base.row(r)[c] - moved.row(perm[r])[c]).abs() < 1e-12);
        }
    }
}

#[test]
fn relation_transform_identity_passthrough_for_nonnegative_input() {
    let mut params = small_params(2, 1, 1, 7);
    let eye = Tensor::matrix(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
    params.store.set_value(params.g_first[0].0, eye.clone());
    params.store.set_value(params.g_second[0].0, eye);
    let tape = Tape::inference();
    let input = Tensor::matrix(2, 2, vec![0.5, 0.0, 2.0, 1.0]).unwrap();
    let out = relation_transform_g(&tape, 0, &input, &params).unwrap();
    assert_eq!(out.data(), input.data());

    // Zero weights (and zero biases) give zero output.
    let mut zeroed = small_params(2, 1, 1, 7);
    zeroed.store.set_value(zeroed.g_first[0].0, Tensor::zeros(vec![2, 2]));
    zeroed.store.set_value(zeroed.g_second[0].0, Tensor::zeros(vec![2, 2]));
    let out = relation_transform_g(&tape, 0, &input, &zeroed).unwrap();
    assert!(out.data().iter().all(|&v| v == 0.0));
}

#[test]
fn relation_transform_matches_hand_arithmetic() {
    let mut params = small_params(2, 1, 1, 9);
    let w1 = Tensor::matrix(2, 2, vec![0.3, -0.4, 0.8, 0.1]).unwrap();
    let b1 = Tensor::vector(vec![0.05, -0.02]).unwrap();
    let w2 = Tensor::matrix(2, 2, vec![-0.6, 0.2, 0.5, 0.9]).unwrap();
    let b2 = Tensor::vector(vec![0.0, 0.1]).unwrap();
    params.store.set_value(params.g_first[0].0, w1.clone());
    params.store.set_value(params.g_first[0].1, b1.clone());
    params.store.set_value(params.g_second[0].0, w2.clone());
    params.store.set_value(params.g_second[0].1, b2.clone());

    let x = Tensor::matrix(1, 2, vec![0.7, -0.3]).unwrap();
    let tape = Tape::inference();
    let out = relation_transform_g(&tape, 0, &x, &params).unwrap();

    let h0 = f64::max(0.7 * 0.3 + -0.3 * 0.8 + 0.05, 0.0);
    let h1 = f64::max(0.7 * -0.4 + -0.3 * 0.1 + -0.02, 0.0);
    let e0 = h0 * -0.6 + h1 * 0.5;
    let e1 = h0 * 0.2 + h1 * 0.9 + 0.1;
    assert!((out.data()[0] - e0).abs() < 1e-12);
    assert!((out.data()[1] - e1).abs() < 1e-12);
}

#[test]
fn entity_gnn_no_edges_runs_updates_on_init_only() {
    let params = small_params(2, 1, 1, 13);
    let gt = GraphTensors {
        src: vec![],
        rel: vec![],
        dst: vec![],
        num_entities: 3,
        num_relations: 2,
    };
    let r_q = Tensor::matrix(2, 2, vec![1.0, 2.0, 0.5, -0.5]).unwrap();
    let tape = Tape::inference();
    let out = entity_gnn(&tape, &gt, Query { head: 1, relation: 0 }, &r_q, None, &params).unwrap();

    let w = params.store.get(params.ent_update[0]).value.clone();
    // init row 1 = r_q[0] = [1,2]; others zero; update = relu([init ‖ 0]·W).
    let mut expect = vec![0.0; 6];
    for j in 0..2 {
        expect[2 + j] = (1.0 * w.data()[j] + 2.0 * w.data()[2 + j]).max(0.0);
    }
    for (a, b) in out.data().iter().zip(&expect) {
        assert!((a - b).abs() < 1e-12, "{:?} vs {:?}", out.data(), expect);
    }
}

#[test]
fn entity_gnn_isolated_entity_does_not_change_others() {
    let params = small_params(4, 1, 2, 17);
    let triples = [(0usize, 0usize, 1usize), (1, 1, 2)];
    let g = generic_graph(3, 2, &[(0, 0, 1), (1, 1, 2)]);
    let g_iso = generic_graph(4, 2, &triples); // entity 3 isolated
    let rq = {
        let tape = Tape::inference();
        relation_gnn(&tape, &lift_relation_graph(&g), 0, &params).unwrap()
    };
    let tape = Tape::inference();
    let q = Query { head: 0, relation: 0 };
    let base = entity_gnn(&tape, &GraphTensors::from_graph(&g), q, &rq, None, &params).unwrap();
    let with_iso =
        entity_gnn(&tape, &GraphTensors::from_graph(&g_iso), q, &rq, None, &params).unwrap();
    for e in 0..3 {
        assert_eq!(base.row(e), with_iso.row(e));
    }
}

#[test]
fn entity_gnn_reachability_grows_with_layers() {
    // Path a -r0-> b -r0-> c; information needs two rounds to reach c.
    let g = generic_graph(3, 1, &[(0, 0, 1), (1, 0, 2)]);
    let gt = GraphTensors::from_graph(&g);
    let rg = lift_relation_graph(&g);
    let q = Query { head: 0, relation: 0 };

    let one = small_params(4, 1, 1, 19);
    let two = small_params(4, 1, 2, 19);
    let tape = Tape::inference();
    let rq1 = relation_gnn(&tape, &rg, 0, &one).unwrap();
    let s1 = entity_gnn(&tape, &gt, q, &rq1, None, &one).unwrap();
    assert!(s1.row(2).iter().all(|&v| v == 0.0), "1 layer cannot reach c");

    let rq2 = relation_gnn(&tape, &rg, 0, &two).unwrap();
    let s2 = entity_gnn(&tape, &gt, q, &rq2, None, &two).unwrap();
    assert!(
        s2.row(2).iter().any(|&v| v != 0.0),
        "2 layers reach c: {:?}",
        s2.row(2)
    );
}

#[test]
fn entity_permutation_permutes_outputs() {
    // No per-entity parameters exist, so relabeling entities relabels rows.
    let params = small_params(4, 2, 2, 23);
    let triples = [(0usize, 0, 1), (1, 1, 2), (2, 0, 3), (0, 1, 3)];
    let g = generic_graph(4, 2, &triples);
    let perm = [3usize, 1, 0, 2];
    let permuted: Vec<(usize, usize, usize)> = triples
        .iter()
        .map(|&(h, r, t)| (perm[h], r, perm[t]))
        .collect();
    let g2 = generic_graph(4, 2, &permuted);

    let tape = Tape::inference();
    let rq = relation_gnn(&tape, &lift_relation_graph(&g), 0, &params).unwrap();
    let rq2 = relation_gnn(&tape, &lift_relation_graph(&g2), 0, &params).unwrap();
    // The relation graph is invariant under entity relabeling.
    for (a, b) in rq.data().iter().zip(rq2.data()) {
        assert!((a - b).abs() < 1e-12);
    }

    let s = entity_gnn(&tape, &GraphTensors::from_graph(&g), Query { head: 0, relation: 0 }, &rq, None, &params).unwrap();
    let s2 = entity_gnn(&tape, &GraphTensors::from_graph(&g2), Query { head: perm[0], relation: 0 }, &rq2, None, &params).unwrap();
    for e in 0..4 {
        for c in 0..4 {
            assert!((s.row(e)[c] - s2.row(perm[e])[c]).abs() < 1e-12);
        }
    }
}

#[test]
fn score_tail_definitions() {
    let mut params = small_params(2, 1, 1, 29);
    // Zero weights and biases: logit 0 → probability 0.5.
    params.store.set_value(params.score_hidden.0, Tensor::zeros(vec![2, 2]));
    params.store.set_value(params.score_out.0, Tensor::zeros(vec![2, 1]));
    let tape = Tape::inference();
    let states = Tensor::zeros(vec![3, 2]);
    let p = score_tail(&tape, &states, &params).unwrap();
    assert_eq!(p.data(), &[0.5, 0.5, 0.5]);

    // Probabilities always in (0,1), monotone in the logit.
    let params = small_params(2, 1, 1, 31);
    let states = Tensor::matrix(4, 2, vec![5.0, -3.0, 0.1, 0.9, -8.0, 2.0, 0.0, 0.0]).unwrap();
    let p = score_tail(&tape, &states, &params).unwrap();
    assert!(p.data().iter().all(|&v| v > 0.0 && v < 1.0));
    let logits = tail_logits(&tape, &states, &params).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(
                logits.data()[i] > logits.data()[j],
                p.data()[i] > p.data()[j]
            );
        }
    }
}

#[test]
fn query_conditioning_changes_relation_repr() {
    let params = small_params(8, 2, 2, 37);
    // Two relations with different lift neighborhoods.
    let g = generic_graph(4, 2, &[(0, 0, 1), (1, 1, 2), (2, 1, 3)]);
    let rg = lift_relation_graph(&g);
    let tape = Tape::inference();
    let a = relation_gnn(&tape, &rg, 0, &params).unwrap();
    let b = relation_gnn(&tape, &rg, 1, &params).unwrap();
    assert!(a
        .data()
        .iter()
        .zip(b.data())
        .any(|(x, y)| (x - y).abs() > 1e-9));
}

/// Zero-initialized biases put ReLU pre-activations exactly at the kink,
/// where central differences are meaningless; evaluate at a generic point.
pub(crate) fn randomize_biases(params: &mut ModelParams, rng: &mut ChaCha8Rng) {
    for id in params.all_param_ids() {
        if params.store.name_of(id).contains(".b") {
            let shape = params.store.get(id).value.shape().to_vec();
            let n: usize = shape.iter().product();
            let data: Vec<f64> = (0..n).map(|_| rng.random_range(-0.1..0.1)).collect();
            params.store.set_value(id, Tensor::new(shape, data).unwrap());
        }
    }
}

#[test]
fn gnn_grad_check_all_groups() {
    // End-to-end differentiability of both GNN levels plus the scorer on a
    // small random instance.
    let mut params = small_params(8, 2, 2, 41);
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    randomize_biases(&mut params, &mut rng);
    let g = random_generic_graph(&mut rng, 10, 3, 25);
    let gt = GraphTensors::from_graph(&g);
    let rg = lift_relation_graph(&g);
    let q = Query { head: 0, relation: 0 };

    let forward = |tape: &Tape, store: &crate::tensor::ParamStore| {
        let mut p = params.clone();
        p.store = store.clone();
        let rq = relation_gnn(tape, &rg, q.relation, &p)?;
        let states = entity_gnn(tape, &gt, q, &rq, None, &p)?;
        let logits = tail_logits(tape, &states, &p)?;
        tape.sum_all(&logits)
    };

    let mut store = params.store.clone();
    for id in params.all_param_ids() {
        let name = store.name_of(id).to_string();
        if name.starts_with("fuse.") {
            continue; // fusion is disconnected in this forward
        }
        let err = grad_check_params(forward, &mut store, id, 1e-5, None).unwrap();
        assert!(err < 1e-4, "group {name}: err = {err}");
    }
}
