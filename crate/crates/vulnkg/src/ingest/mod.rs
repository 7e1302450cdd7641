//! Source-data acquisition and parsing: NVD CVE API 2.0, Red Hat Security
//! Data API, and the MITRE CWE catalog, each with a fully offline fixture
//! mode (a directory of verbatim response documents plus a `manifest` file
//! listing their order, or a single catalog file).

mod cpe;
mod cwe_xml;
mod fetch;
mod nvd;
mod redhat;

pub use cpe::{pad_short_cpe, parse_cpe_uri, shorten_cpe, CpeName, CpePart};
pub use cwe_xml::parse_cwe_catalog;
pub use fetch::{cache_documents, fetch_records, FetchMode, Source};

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDateTime;
use thiserror::Error;

pub type IngestResult<T> = Result<T, IngestError>;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("http error fetching {url}: {message}")]
    Http { url: String, message: String },
    #[error("malformed document: {0}")]
    BadDocument(String),
    #[error("record has no CVE id")]
    MissingCveId,
    #[error("record {0} is undated")]
    Undated(String),
    #[error("invalid CPE uri {uri}: {reason}")]
    BadCpe { uri: String, reason: String },
    #[error("fixture {0} does not exist")]
    MissingFixture(String),
    #[error("fixture manifest entry {0} missing")]
    BadManifest(String),
    #[error("unparseable CWE catalog: {0}")]
    BadCatalog(String),
}

/// One parsed CVE record. `cpe_uris` keeps full URIs for audit; the graph
/// uses the shortened form.
#[derive(Clone, Debug, PartialEq)]
pub struct CveRecord {
    pub cve_id: String,
    pub description: String,
    pub cwe_ids: BTreeSet<String>,
    pub cpe_uris: BTreeSet<String>,
    pub published: NaiveDateTime,
    pub last_modified: NaiveDateTime,
    /// Shortened CPE → earliest time the CPE is known to have been attached.
    pub cpe_first_seen: BTreeMap<String, NaiveDateTime>,
}

impl CveRecord {
    /// Shortened forms of every parseable CPE uri on the record.
    pub fn short_cpes(&self) -> BTreeSet<String> {
        self.cpe_uris
            .iter()
            .filter_map(|u| parse_cpe_uri(u).ok())
            .map(|n| shorten_cpe(&n))
            .collect()
    }
}

/// One weakness (or category) entry from the MITRE CWE catalog.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CweRecord {
    pub cwe_id: String,
    pub name: String,
    pub description: String,
    pub child_of: BTreeSet<String>,
    pub peer_of: BTreeSet<String>,
    pub can_precede: BTreeSet<String>,
    pub member_of: BTreeSet<String>,
    pub languages: BTreeSet<String>,
    pub technologies: BTreeSet<String>,
    pub consequences: BTreeSet<String>,
    pub exploitation_likelihood: Option<String>,
}

/// Extracts every `CWE-N` token literally present in a string. Compound
/// Red Hat labels like `CWE-120->CWE-787` or `(CWE-125|CWE-787)` yield each id.
pub fn extract_cwe_ids(text: &str) -> BTreeSet<String> {
    let bytes = text.as_bytes();
    let mut out = BTreeSet::new();
    let mut i = 0;
    while let Some(pos) = text[i..].find("CWE-") {
        let start = i + pos;
        let digits_start = start + 4;
        let mut end = digits_start;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
        if end > digits_start {
            out.insert(text[start..end].to_string());
        }
        i = end.max(start + 4);
    }
    out
}

/// Parses one raw per-CVE document fetched from the given source.
pub fn parse_cve_record(raw: &str, source: Source) -> IngestResult<CveRecord> {
    match source {
        Source::Nvd => nvd::parse_record(raw),
        Source::RedHat => redhat::parse_record(raw),
        Source::MitreCwe => Err(IngestError::BadDocument(
            "CWE catalog documents do not contain CVE records".into(),
        )),
    }
}

/// Timestamp formats that appear across the sources.
pub(crate) fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let trimmed = s.trim().trim_end_matches('Z');
    for fmt in [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%d",
    ] {
        if fmt == "%Y-%m-%d" {
            if let Ok(d) = chrono::NaiveDate::parse_from_str(trimmed, fmt) {
                return d.and_hms_opt(0, 0, 0);
            }
        } else if let Ok(t) = NaiveDateTime::parse_from_str(trimmed, fmt) {
            return Some(t);
        }
    }
    // Offset forms like 2023-09-12T15:15:24.000+02:00
    if let Ok(t) = chrono::DateTime::parse_from_rfc3339(s.trim()) {
        return Some(t.naive_utc());
    }
    None
}

pub(crate) fn looks_like_cve_id(s: &str) -> bool {
    let Some(rest) = s.strip_prefix("CVE-") else {
        return false;
    };
    let mut parts = rest.splitn(2, '-');
    let year = parts.next().unwrap_or("");
    let seq = parts.next().unwrap_or("");
    year.len() == 4
        && year.chars().all(|c| c.is_ascii_digit())
        && seq.len() >= 4
        && seq.chars().all(|c| c.is_ascii_digit())
}
