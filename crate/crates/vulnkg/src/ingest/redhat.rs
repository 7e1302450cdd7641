//! Red Hat Security Data API per-CVE detail parsing.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;

use super::{
    cpe, looks_like_cve_id, parse_timestamp, CveRecord, IngestError, IngestResult,
};

#[derive(Deserialize)]
struct Document {
    #[serde(default)]
    name: Option<String>,
    #[serde(rename = "public_date", default)]
    public_date: Option<String>,
    #[serde(default)]
    bugzilla: Option<Bugzilla>,
    #[serde(default)]
    cwe: Option<String>,
    #[serde(default)]
    details: Vec<String>,
    #[serde(rename = "affected_release", default)]
    affected_release: Vec<AffectedRelease>,
    #[serde(rename = "package_state", default)]
    package_state: Vec<PackageState>,
}

#[derive(Deserialize)]
struct Bugzilla {
    #[serde(default)]
    description: Option<String>,
}

#[derive(Deserialize)]
struct AffectedRelease {
    #[serde(default)]
    cpe: Option<String>,
    #[serde(rename = "release_date", default)]
    release_date: Option<String>,
}

#[derive(Deserialize)]
struct PackageState {
    #[serde(default)]
    cpe: Option<String>,
}

fn to_cpe23(raw: &str) -> Option<String> {
    if raw.starts_with("cpe:2.3:") {
        Some(raw.to_string())
    } else {
        cpe::cpe22_to_cpe23(raw)
    }
}

pub(super) fn parse_record(raw: &str) -> IngestResult<CveRecord> {
    let doc: Document = serde_json::from_str(raw)
        .map_err(|e| IngestError::BadDocument(format!("redhat json: {e}")))?;
    let cve_id = match doc.name {
        Some(id) if looks_like_cve_id(&id) => id,
        _ => return Err(IngestError::MissingCveId),
    };
    let published = doc
        .public_date
        .as_deref()
        .and_then(parse_timestamp)
        .ok_or_else(|| IngestError::Undated(cve_id.clone()))?;

    let description = doc
        .bugzilla
        .as_ref()
        .and_then(|b| b.description.clone())
        .or_else(|| doc.details.first().cloned())
        .unwrap_or_default();

    let cwe_ids: BTreeSet<String> = doc
        .cwe
        .as_deref()
        .map(super::extract_cwe_ids)
        .unwrap_or_default();

    let mut cpe_uris = BTreeSet::new();
    let mut cpe_first_seen: BTreeMap<String, chrono::NaiveDateTime> = BTreeMap::new();
    for rel in &doc.affected_release {
        let Some(converted) = rel.cpe.as_deref().and_then(to_cpe23) else {
            continue;
        };
        if let Ok(name) = cpe::parse_cpe_uri(&converted) {
            let short = cpe::shorten_cpe(&name);
            // The advisory release date is the closest signal for when the
            // product association became known.
            let seen = rel
                .release_date
                .as_deref()
                .and_then(parse_timestamp)
                .unwrap_or(published)
                .max(published);
            cpe_first_seen
                .entry(short)
                .and_modify(|t| *t = (*t).min(seen))
                .or_insert(seen);
        }
        cpe_uris.insert(converted);
    }
    for st in &doc.package_state {
        if let Some(converted) = st.cpe.as_deref().and_then(to_cpe23) {
            if let Ok(name) = cpe::parse_cpe_uri(&converted) {
                cpe_first_seen
                    .entry(cpe::shorten_cpe(&name))
                    .or_insert(published);
            }
            cpe_uris.insert(converted);
        }
    }

    Ok(CveRecord {
        cve_id,
        description,
        cwe_ids,
        cpe_uris,
        published,
        last_modified: published,
        cpe_first_seen,
    })
}
