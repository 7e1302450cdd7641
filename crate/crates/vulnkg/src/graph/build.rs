//! Graph construction from parsed CVE and CWE records.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;

use crate::ingest::{parse_cpe_uri, shorten_cpe, CveRecord, CweRecord};

use super::{EntityKind, GraphError, GraphResult, KnowledgeGraph};

#[derive(Clone, Debug)]
pub struct BuildOptions {
    /// Date stamped on CWE-catalog edges; early enough that they always land
    /// in an inductive training graph.
    pub catalog_date: NaiveDate,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            catalog_date: NaiveDate::from_ymd_opt(1999, 1, 1).unwrap(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuildReport {
    /// CVE records excluded for lacking both CWE and CPE associations.
    pub excluded_cves: usize,
    /// matchingCWE references to ids absent from the catalog.
    pub dropped_cwe_refs: usize,
    /// CPE uris that failed to parse.
    pub bad_cpe_uris: usize,
}

/// Builds the security knowledge graph. CVEs without any usable CWE or CPE
/// association are excluded; every included CPE gains vendor and component
/// context; referenced CWEs pull in their catalog closure (hierarchy and
/// property edges).
pub fn build_graph(
    cves: &[CveRecord],
    cwes: &[CweRecord],
    opts: &BuildOptions,
) -> GraphResult<(KnowledgeGraph, BuildReport)> {
    if cves.is_empty() {
        return Err(GraphError::EmptyInput("no CVE records"));
    }
    let catalog: BTreeMap<&str, &CweRecord> =
        cwes.iter().map(|c| (c.cwe_id.as_str(), c)).collect();

    let mut g = KnowledgeGraph::with_security_schema();
    let mut report = BuildReport::default();

    let matching_cwe = g.relation_id("matchingCWE").unwrap();
    let matching_cve = g.relation_id("matchingCVE").unwrap();
    let has_vendor = g.relation_id("hasVendor").unwrap();
    let has_component = g.relation_id("hasComponent").unwrap();

    // Earliest date each shortened CPE is witnessed, for vendor/component edges.
    let mut cpe_witness: BTreeMap<String, NaiveDate> = BTreeMap::new();
    let mut referenced_cwes: BTreeSet<String> = BTreeSet::new();

    for cve in cves {
        let known_cwes: Vec<&str> = cve
            .cwe_ids
            .iter()
            .filter(|id| {
                let known = catalog.contains_key(id.as_str());
                if !known {
                    report.dropped_cwe_refs += 1;
                }
                known
            })
            .map(String::as_str)
            .collect();

        // (shortened cpe, edge date)
        let mut cpe_links: Vec<(String, NaiveDate)> = Vec::new();
        let mut seen_short: BTreeSet<String> = BTreeSet::new();
        for uri in &cve.cpe_uris {
            let Ok(name) = parse_cpe_uri(uri) else {
                report.bad_cpe_uris += 1;
                continue;
            };
            let short = shorten_cpe(&name);
            if !seen_short.insert(short.clone()) {
                continue;
            }
            let published = cve.published.date();
            let first_seen = cve
                .cpe_first_seen
                .get(&short)
                .map(|t| t.date())
                .unwrap_or(published);
            // The edge inherits the publication date, or the CPE's
            // first-seen date when that is later.
            let edge_date = first_seen.max(published);
            cpe_links.push((short, edge_date));
        }

        if known_cwes.is_empty() && cpe_links.is_empty() {
            report.excluded_cves += 1;
            continue;
        }

        let cve_node = g.add_entity(EntityKind::Cve, &cve.cve_id);
        g.descriptions
            .insert(cve.cve_id.clone(), cve.description.clone());

        for cwe_id in known_cwes {
            let cwe_node = g.add_entity(EntityKind::Cwe, cwe_id);
            referenced_cwes.insert(cwe_id.to_string());
            g.add_triple(cve_node, matching_cwe, cwe_node, cve.published.date())?;
        }
        for (short, edge_date) in cpe_links {
            let cpe_node = g.add_entity(EntityKind::Cpe, &short);
            g.add_triple(cpe_node, matching_cve, cve_node, edge_date)?;
            cpe_witness
                .entry(short)
                .and_modify(|d| *d = (*d).min(edge_date))
                .or_insert(edge_date);
        }
    }

    // Vendor/component context, dated by the CPE's earliest witness.
    for (short, &date) in &cpe_witness {
        let cpe_node = g.entity_id(EntityKind::Cpe, short).unwrap();
        let name = parse_cpe_uri(&crate::ingest::pad_short_cpe(short))
            .expect("short cpe re-parses after padding");
        let vendor_node = g.add_entity(EntityKind::Vendor, &name.vendor);
        let component_node = g.add_entity(EntityKind::Component, &name.product);
        g.add_triple(cpe_node, has_vendor, vendor_node, date)?;
        g.add_triple(cpe_node, has_component, component_node, date)?;
    }

    // CWE catalog closure: referenced weaknesses plus everything reachable
    // through hierarchy edges, with their property context.
    let child_of = g.relation_id("childOf").unwrap();
    let peer_of = g.relation_id("peerOf").unwrap();
    let can_preceed = g.relation_id("canPreceed").unwrap();
    let member_of = g.relation_id("memberOf").unwrap();
    let has_language = g.relation_id("hasLanguage").unwrap();
    let has_technology = g.relation_id("hasTechnology").unwrap();
    let has_likelihood = g.relation_id("hasExploitationLikelihood").unwrap();
    let has_consequence = g.relation_id("hasConsequence").unwrap();

    let mut included: BTreeSet<String> = BTreeSet::new();
    let mut worklist: Vec<String> = referenced_cwes.into_iter().collect();
    while let Some(id) = worklist.pop() {
        if !included.insert(id.clone()) {
            continue;
        }
        let Some(rec) = catalog.get(id.as_str()) else {
            continue;
        };
        for (set, _rel) in [
            (&rec.child_of, child_of),
            (&rec.peer_of, peer_of),
            (&rec.can_precede, can_preceed),
            (&rec.member_of, member_of),
        ] {
            for target in set.iter() {
                if catalog.contains_key(target.as_str()) {
                    worklist.push(target.clone());
                } else {
                    report.dropped_cwe_refs += 1;
                }
            }
        }
    }

    for id in &included {
        let rec = catalog[id.as_str()];
        let node = g.add_entity(EntityKind::Cwe, id);
        let desc = if rec.description.is_empty() {
            rec.name.clone()
        } else {
            rec.description.clone()
        };
        g.descriptions.insert(id.clone(), desc);

        for (set, rel) in [
            (&rec.child_of, child_of),
            (&rec.peer_of, peer_of),
            (&rec.can_precede, can_preceed),
            (&rec.member_of, member_of),
        ] {
            for target in set.iter() {
                if included.contains(target) {
                    let target_node = g.add_entity(EntityKind::Cwe, target);
                    g.add_triple(node, rel, target_node, opts.catalog_date)?;
                }
            }
        }
        for lang in &rec.languages {
            let n = g.add_entity(EntityKind::Language, lang);
            g.add_triple(node, has_language, n, opts.catalog_date)?;
        }
        for tech in &rec.technologies {
            let n = g.add_entity(EntityKind::Technology, tech);
            g.add_triple(node, has_technology, n, opts.catalog_date)?;
        }
        for cons in &rec.consequences {
            let n = g.add_entity(EntityKind::Consequence, cons);
            g.add_triple(node, has_consequence, n, opts.catalog_date)?;
        }
        if let Some(l) = &rec.exploitation_likelihood {
            let n = g.add_entity(EntityKind::ExploitationLikelihood, l);
            g.add_triple(node, has_likelihood, n, opts.catalog_date)?;
        }
    }

    Ok((g, report))
}
