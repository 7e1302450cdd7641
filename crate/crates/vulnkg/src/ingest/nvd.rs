//! NVD CVE API 2.0 record parsing.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;

use super::{
    cpe, looks_like_cve_id, parse_timestamp, CveRecord, IngestError, IngestResult,
};

#[derive(Deserialize)]
struct Document {
    cve: Cve,
    #[serde(rename = "cveChanges", default)]
    cve_changes: Vec<ChangeWrapper>,
}

#[derive(Deserialize)]
struct Cve {
    #[serde(default)]
    id: Option<String>,
    #[serde(default)]
    published: Option<String>,
    #[serde(rename = "lastModified", default)]
    last_modified: Option<String>,
    #[serde(default)]
    descriptions: Vec<Description>,
    #[serde(default)]
    weaknesses: Vec<Weakness>,
    #[serde(default)]
    configurations: Vec<Configuration>,
}

#[derive(Deserialize)]
struct Description {
    #[serde(default)]
    lang: String,
    #[serde(default)]
    value: String,
}

#[derive(Deserialize)]
struct Weakness {
    #[serde(default)]
    description: Vec<Description>,
}

#[derive(Deserialize)]
struct Configuration {
    #[serde(default)]
    nodes: Vec<ConfigNode>,
}

#[derive(Deserialize)]
struct ConfigNode {
    #[serde(rename = "cpeMatch", default)]
    cpe_match: Vec<CpeMatch>,
}

#[derive(Deserialize)]
struct CpeMatch {
    #[serde(default)]
    vulnerable: bool,
    #[serde(default)]
    criteria: String,
}

#[derive(Deserialize)]
struct ChangeWrapper {
    change: Change,
}

#[derive(Deserialize)]
struct Change {
    #[serde(default)]
    created: Option<String>,
    #[serde(default)]
    details: Vec<ChangeDetail>,
}

#[derive(Deserialize)]
struct ChangeDetail {
    #[serde(default)]
    action: String,
    #[serde(rename = "newValue", default)]
    new_value: String,
}

/// Pulls `cpe:2.3:...` formatted strings out of free-form change text.
fn extract_cpe_strings(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut i = 0;
    while let Some(pos) = text[i..].find("cpe:2.3:") {
        let start = i + pos;
        let end = text[start..]
            .find(|c: char| c.is_whitespace() || c == '"' || c == ',')
            .map(|o| start + o)
            .unwrap_or(text.len());
        out.push(text[start..end].to_string());
        i = end.max(start + 8);
    }
    out
}

pub(super) fn parse_record(raw: &str) -> IngestResult<CveRecord> {
    let doc: Document = serde_json::from_str(raw)
        .map_err(|e| IngestError::BadDocument(format!("nvd json: {e}")))?;
    let cve = doc.cve;
    let cve_id = match cve.id {
        Some(id) if looks_like_cve_id(&id) => id,
        _ => return Err(IngestError::MissingCveId),
    };
    let published = cve
        .published
        .as_deref()
        .and_then(parse_timestamp)
        .ok_or_else(|| IngestError::Undated(cve_id.clone()))?;
    let last_modified = cve
        .last_modified
        .as_deref()
        .and_then(parse_timestamp)
        .map(|t| t.max(published))
        .unwrap_or(published);

    let description = cve
        .descriptions
        .iter()
        .find(|d| d.lang == "en")
        .or_else(|| cve.descriptions.first())
        .map(|d| d.value.clone())
        .unwrap_or_default();

    let mut cwe_ids = BTreeSet::new();
    for w in &cve.weaknesses {
        for d in &w.description {
            cwe_ids.extend(super::extract_cwe_ids(&d.value));
        }
    }

    let mut cpe_uris = BTreeSet::new();
    for cfg in &cve.configurations {
        for node in &cfg.nodes {
            for m in &node.cpe_match {
                if m.vulnerable && !m.criteria.is_empty() {
                    cpe_uris.insert(m.criteria.clone());
                }
            }
        }
    }

    // First-seen dates: earliest change-history event mentioning the CPE,
    // falling back to publication for everything else.
    let mut cpe_first_seen: BTreeMap<String, chrono::NaiveDateTime> = BTreeMap::new();
    for wrapper in &doc.cve_changes {
        let Some(created) = wrapper.change.created.as_deref().and_then(parse_timestamp) else {
            continue;
        };
        for detail in &wrapper.change.details {
            if detail.action != "Added" {
                continue;
            }
            for uri in extract_cpe_strings(&detail.new_value) {
                if let Ok(name) = cpe::parse_cpe_uri(&uri) {
                    let short = cpe::shorten_cpe(&name);
                    cpe_first_seen
                        .entry(short)
                        .and_modify(|t| *t = (*t).min(created))
                        .or_insert(created);
                }
            }
        }
    }
    for uri in &cpe_uris {
        if let Ok(name) = cpe::parse_cpe_uri(uri) {
            cpe_first_seen
                .entry(cpe::shorten_cpe(&name))
                .or_insert(published);
        }
    }

    Ok(CveRecord {
        cve_id,
        description,
        cwe_ids,
        cpe_uris,
        published,
        last_modified,
        cpe_first_seen,
    })
}
