//! Seeded synthetic graphs for tests and the acceptance suite: a planted
//! compositional rule (r3 ≈ r1 ∘ r2) over three entity groups, optionally
//! with token-correlated descriptions and a held-out set of late entities
//! for inductive evaluation, plus a tiny memorization toy.

use chrono::NaiveDate;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::graph::{EntityKind, KnowledgeGraph, RelationType};

#[derive(Clone, Debug)]
pub struct SynthConfig {
    /// Source entities (group A, heads of r1 and r3).
    pub heads: usize,
    /// Bridge entities (group B).
    pub mids: usize,
    /// Target entities (group C, tails of r2 and r3).
    pub tails: usize,
    /// r1 edges per head (min, max).
    pub r1_per_head: (usize, usize),
    /// r2 edges per mid (min, max).
    pub r2_per_mid: (usize, usize),
    /// Fraction of composition pairs kept as r3 triples.
    pub r3_keep: f64,
    /// Heads whose edges are dated after the cutoff (unseen in training).
    pub unseen_head_fraction: f64,
    /// Descriptions carry topic tokens correlated with the planted rule.
    pub token_descriptions: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            heads: 150,
            mids: 40,
            tails: 200,
            r1_per_head: (1, 2),
            r2_per_mid: (3, 6),
            r3_keep: 0.55,
            unseen_head_fraction: 0.0,
            token_descriptions: false,
            seed: 7,
        }
    }
}

/// Dates used by the generator; everything about an unseen head lands after
/// [`cutoff`].
pub fn base_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2022, 6, 1).unwrap()
}

pub fn late_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2023, 6, 1).unwrap()
}

pub fn cutoff() -> NaiveDate {
    NaiveDate::from_ymd_opt(2023, 1, 1).unwrap()
}

pub fn end_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2023, 12, 31).unwrap()
}

/// Builds the planted-rule graph. Relations: `r1` A→B, `r2` B→C, and the
/// evaluated task `r3` A→C holding exactly where a two-hop r1–r2 path was
/// sampled. Group kinds reuse the security vocabulary kinds so candidate
/// sets stay type-restricted.
pub fn planted_composition_graph(cfg: &SynthConfig) -> KnowledgeGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut g = KnowledgeGraph::new(vec![
        RelationType::new("r1", Some(EntityKind::Cve), Some(EntityKind::Cpe)),
        RelationType::new("r2", Some(EntityKind::Cpe), Some(EntityKind::Cwe)),
        RelationType::new("r3", Some(EntityKind::Cve), Some(EntityKind::Cwe)),
    ]);
    let r3 = 2;
    g.task_relations = vec![r3];

    let heads: Vec<usize> = (0..cfg.heads)
        .map(|i| g.add_entity(EntityKind::Cve, &format!("src{i:04}")))
        .collect();
    let mids: Vec<usize> = (0..cfg.mids)
        .map(|i| g.add_entity(EntityKind::Cpe, &format!("mid{i:04}")))
        .collect();
    let tails: Vec<usize> = (0..cfg.tails)
        .map(|i| g.add_entity(EntityKind::Cwe, &format!("dst{i:04}")))
        .collect();

    let n_unseen = (cfg.unseen_head_fraction * cfg.heads as f64).round() as usize;
    let unseen: Vec<bool> = (0..cfg.heads).map(|i| i < n_unseen).collect();
    let head_date = |i: usize| if unseen[i] { late_date() } else { base_date() };

    // r2: each mid reaches a few tails.
    let mut r2_adj: Vec<Vec<usize>> = vec![Vec::new(); cfg.mids];
    for adj in r2_adj.iter_mut() {
        let k = rng.random_range(cfg.r2_per_mid.0..=cfg.r2_per_mid.1);
        while adj.len() < k.min(cfg.tails) {
            let t = rng.random_range(0..cfg.tails);
            if !adj.contains(&t) {
                adj.push(t);
            }
        }
    }
    for (m, adj) in r2_adj.iter().enumerate() {
        for &t in adj {
            g.add_triple(mids[m], 1, tails[t], base_date()).unwrap();
        }
    }

    // r1 and the compositional r3 closure.
    for h in 0..cfg.heads {
        let k = rng.random_range(cfg.r1_per_head.0..=cfg.r1_per_head.1);
        let mut picked: Vec<usize> = Vec::new();
        while picked.len() < k.min(cfg.mids) {
            let m = rng.random_range(0..cfg.mids);
            if !picked.contains(&m) {
                picked.push(m);
            }
        }
        for &m in &picked {
            g.add_triple(heads[h], 0, mids[m], head_date(h)).unwrap();
            for &t in &r2_adj[m] {
                if rng.random_range(0.0..1.0) < cfg.r3_keep {
                    g.add_triple(heads[h], r3, tails[t], head_date(h)).unwrap();
                }
            }
        }
    }

    if cfg.token_descriptions {
        // Tail k carries token k; a head's description lists the tokens of
        // the tails it links to, so text alone predicts the rule.
        for (t, &node) in tails.iter().enumerate() {
            let label = g.entity(node).label.clone();
            g.descriptions.insert(
                label,
                format!("target concept carrying marker token{t:04} in its definition"),
            );
        }
        for (h, &node) in heads.iter().enumerate() {
            let linked: Vec<String> = g
                .true_tails(node, r3)
                .iter()
                .map(|&t| {
                    let label = g.entity(t).label.clone();
                    let idx: usize = label.trim_start_matches("dst").parse().unwrap();
                    format!("token{idx:04}")
                })
                .collect();
            let label = g.entity(node).label.clone();
            g.descriptions.insert(
                label,
                format!("source record {h:04} mentioning {}", linked.join(" ")),
            );
        }
    }
    g
}

/// A 20-triple toy: two one-to-one relations chaining three entity groups
/// (aᵢ -f→ bᵢ -g→ cᵢ). Translation-consistent, so both the GNN and a
/// translation baseline can memorize it exactly; cyclic permutations would
/// force a translation model's relation vector to zero and are avoided.
pub fn memorization_toy() -> KnowledgeGraph {
    let mut g = KnowledgeGraph::new(vec![
        RelationType::new("f", Some(EntityKind::Cve), Some(EntityKind::Cwe)),
        RelationType::new("g", Some(EntityKind::Cwe), Some(EntityKind::Cpe)),
    ]);
    g.task_relations = vec![0, 1];
    let a: Vec<usize> = (0..10)
        .map(|i| g.add_entity(EntityKind::Cve, &format!("a{i}")))
        .collect();
    let b: Vec<usize> = (0..10)
        .map(|i| g.add_entity(EntityKind::Cwe, &format!("b{i}")))
        .collect();
    let c: Vec<usize> = (0..10)
        .map(|i| g.add_entity(EntityKind::Cpe, &format!("c{i}")))
        .collect();
    for i in 0..10 {
        g.add_triple(a[i], 0, b[i], base_date()).unwrap();
        g.add_triple(b[i], 1, c[i], base_date()).unwrap();
    }
    debug_assert_eq!(g.triple_count(), 20);
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_graph_is_deterministic_and_compositional() {
        let cfg = SynthConfig::default();
        let a = planted_composition_graph(&cfg);
        let b = planted_composition_graph(&cfg);
        assert!(a.structurally_equal(&b));

        // Every r3 triple is witnessed by a two-hop r1–r2 path.
        let r3_triples: Vec<_> = a.triples().iter().filter(|t| t.relation == 2).collect();
        assert!(!r3_triples.is_empty());
        for t in &r3_triples {
            let witnessed = a.out_edges(t.head).iter().any(|&(r1, mid)| {
                r1 == 0 && a.out_edges(mid).iter().any(|&(r2, c)| r2 == 1 && c == t.tail)
            });
            assert!(witnessed, "r3 triple without a path");
        }
    }

    #[test]
    fn unseen_heads_are_dated_after_cutoff() {
        let cfg = SynthConfig {
            unseen_head_fraction: 0.1,
            ..SynthConfig::default()
        };
        let g = planted_composition_graph(&cfg);
        let n_unseen = (0.1f64 * cfg.heads as f64).round() as usize;
        for t in g.triples() {
            let head_label = g.entity(t.head).label.clone();
            if let Some(idx) = head_label.strip_prefix("src") {
                let idx: usize = idx.parse().unwrap();
                if idx < n_unseen {
                    assert!(t.created > cutoff());
                } else {
                    assert!(t.created <= cutoff());
                }
            }
        }
    }

    #[test]
    fn token_descriptions_cover_linked_tails() {
        let cfg = SynthConfig {
            token_descriptions: true,
            heads: 20,
            mids: 8,
            tails: 30,
            ..SynthConfig::default()
        };
        let g = planted_composition_graph(&cfg);
        let head = g.entity_by_label("src0000").unwrap();
        let desc = g.description_of(head).to_string();
        for &t in &g.true_tails(head, 2) {
            let label = g.entity(t).label.clone();
            let idx: usize = label.trim_start_matches("dst").parse().unwrap();
            assert!(desc.contains(&format!("token{idx:04}")));
        }
    }

    #[test]
    fn toy_has_twenty_triples() {
        let g = memorization_toy();
        assert_eq!(g.triple_count(), 20);
        assert_eq!(g.entity_count(), 30);
    }
}
