//! Dataset analyses: graph statistics, CPE update-delay percentages, and the
//! missing-CWE fraction.

use std::collections::BTreeMap;

use chrono::Datelike;

use crate::ingest::CveRecord;

use super::{EntityKind, KnowledgeGraph};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GraphStats {
    pub entities_per_kind: BTreeMap<EntityKind, usize>,
    pub triples_per_relation: BTreeMap<String, usize>,
    pub triples_per_year: BTreeMap<i32, usize>,
    pub total_entities: usize,
    pub total_triples: usize,
    pub relation_types: usize,
}

pub fn graph_stats(g: &KnowledgeGraph) -> GraphStats {
    let mut stats = GraphStats {
        total_entities: g.entity_count(),
        total_triples: g.triple_count(),
        relation_types: g.relation_count(),
        ..GraphStats::default()
    };
    for e in g.entities() {
        *stats.entities_per_kind.entry(e.kind).or_default() += 1;
    }
    for t in g.triples() {
        *stats
            .triples_per_relation
            .entry(g.relation(t.relation).name.clone())
            .or_default() += 1;
        *stats.triples_per_year.entry(t.created.year()).or_default() += 1;
    }
    stats
}

/// Per-year percentages of CVEs that gained a new CPE strictly more than each
/// window (in days) after publication. Percentages are nonincreasing across
/// growing windows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DelayReport {
    pub windows: Vec<i64>,
    /// year → (total CVEs, percentage per window)
    pub per_year: BTreeMap<i32, (usize, Vec<f64>)>,
}

pub fn cpe_delay_report(cves: &[CveRecord], windows: &[i64]) -> DelayReport {
    let mut per_year: BTreeMap<i32, (usize, Vec<usize>)> = BTreeMap::new();
    for cve in cves {
        let year = cve.published.year();
        let entry = per_year
            .entry(year)
            .or_insert_with(|| (0, vec![0; windows.len()]));
        entry.0 += 1;
        for (i, &w) in windows.iter().enumerate() {
            let threshold = cve.published + chrono::Duration::days(w);
            if cve.cpe_first_seen.values().any(|&t| t > threshold) {
                entry.1[i] += 1;
            }
        }
    }
    DelayReport {
        windows: windows.to_vec(),
        per_year: per_year
            .into_iter()
            .map(|(y, (total, counts))| {
                let pct = counts
                    .iter()
                    .map(|&c| 100.0 * c as f64 / total.max(1) as f64)
                    .collect();
                (y, (total, pct))
            })
            .collect(),
    }
}

/// Fraction of the unfiltered CVE population lacking any CWE association.
pub fn missing_cwe_fraction(cves: &[CveRecord]) -> f64 {
    if cves.is_empty() {
        return 0.0;
    }
    let missing = cves.iter().filter(|c| c.cwe_ids.is_empty()).count();
    missing as f64 / cves.len() as f64
}
