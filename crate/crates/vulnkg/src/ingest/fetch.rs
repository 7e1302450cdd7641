//! Raw-document acquisition: offline fixture replay and live paged fetching
//! with retry, backoff, and a verbatim on-disk cache.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::NaiveDate;

use super::{IngestError, IngestResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Nvd,
    RedHat,
    MitreCwe,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Nvd => "nvd",
            Source::RedHat => "redhat",
            Source::MitreCwe => "mitre_cwe",
        }
    }

    pub fn default_url(self) -> &'static str {
        match self {
            Source::Nvd => "https://services.nvd.nist.gov/rest/json/cves/2.0",
            Source::RedHat => "https://access.redhat.com/hydra/rest/securitydata",
            Source::MitreCwe => "https://cwe.mitre.org/data/xml/cwec_latest.xml.zip",
        }
    }

    /// Environment variable consulted for an API key in live mode.
    pub fn api_key_var(self) -> Option<&'static str> {
        match self {
            Source::Nvd => Some("NVD_API_KEY"),
            _ => None,
        }
    }
}

impl std::str::FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nvd" => Ok(Source::Nvd),
            "redhat" => Ok(Source::RedHat),
            "mitre_cwe" | "cwe" => Ok(Source::MitreCwe),
            other => Err(format!("unknown source {other:?}")),
        }
    }
}

#[derive(Clone, Debug)]
pub enum FetchMode {
    /// Read fixture documents from disk; no network.
    Offline,
    /// Fetch from the network, caching every document under `cache_dir`.
    Live { cache_dir: PathBuf },
}

/// Returns every raw document from the source. Offline mode replays a
/// fixture directory (ordered by its `manifest`) or a single catalog file.
/// Live mode pages exhaustively, honors rate limiting, retries with
/// exponential backoff, and writes each document verbatim to the cache.
pub fn fetch_records(
    source: Source,
    since: Option<NaiveDate>,
    mode: &FetchMode,
    location: &str,
) -> IngestResult<Vec<String>> {
    match mode {
        FetchMode::Offline => read_fixture(location),
        FetchMode::Live { cache_dir } => {
            let docs = match source {
                Source::Nvd => live_nvd(location, since)?,
                Source::RedHat => live_redhat(location, since)?,
                Source::MitreCwe => vec![http_get(location, &[], 3)?],
            };
            write_cache(cache_dir, source, &docs)?;
            Ok(docs)
        }
    }
}

fn read_fixture(location: &str) -> IngestResult<Vec<String>> {
    let path = Path::new(location);
    if path.is_file() {
        let content = fs::read_to_string(path).map_err(|e| IngestError::Io {
            path: location.to_string(),
            source: e,
        })?;
        return Ok(vec![content]);
    }
    if !path.is_dir() {
        return Err(IngestError::MissingFixture(location.to_string()));
    }
    let manifest = path.join("manifest");
    let listing = fs::read_to_string(&manifest).map_err(|e| IngestError::Io {
        path: manifest.display().to_string(),
        source: e,
    })?;
    let mut docs = Vec::new();
    for line in listing.lines() {
        let name = line.trim();
        if name.is_empty() {
            continue;
        }
        let doc_path = path.join(name);
        let content = fs::read_to_string(&doc_path)
            .map_err(|_| IngestError::BadManifest(name.to_string()))?;
        docs.push(content);
    }
    Ok(docs)
}

/// Writes documents into the raw cache in fixture layout (manifest-ordered),
/// so offline runs and replayed live runs share one on-disk shape.
pub fn cache_documents(cache_dir: &Path, source: Source, docs: &[String]) -> IngestResult<()> {
    write_cache(cache_dir, source, docs)
}

fn write_cache(cache_dir: &Path, source: Source, docs: &[String]) -> IngestResult<()> {
    let dir = cache_dir.join(source.name());
    fs::create_dir_all(&dir).map_err(|e| IngestError::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    let mut manifest = String::new();
    for (i, doc) in docs.iter().enumerate() {
        let name = format!("{i:06}.{}", if source == Source::MitreCwe { "xml" } else { "json" });
        let p = dir.join(&name);
        let mut f = fs::File::create(&p).map_err(|e| IngestError::Io {
            path: p.display().to_string(),
            source: e,
        })?;
        f.write_all(doc.as_bytes()).map_err(|e| IngestError::Io {
            path: p.display().to_string(),
            source: e,
        })?;
        manifest.push_str(&name);
        manifest.push('\n');
    }
    let mp = dir.join("manifest");
    fs::write(&mp, manifest).map_err(|e| IngestError::Io {
        path: mp.display().to_string(),
        source: e,
    })?;
    Ok(())
}

fn http_get(url: &str, headers: &[(&str, String)], retries: u32) -> IngestResult<String> {
    let mut delay = Duration::from_secs(2);
    let mut attempt = 0;
    loop {
        attempt += 1;
        let mut req = ureq::get(url);
        for (k, v) in headers {
            req = req.header(*k, v);
        }
        match req.call() {
            Ok(mut resp) => {
                return resp
                    .body_mut()
                    .read_to_string()
                    .map_err(|e| IngestError::Http {
                        url: url.to_string(),
                        message: e.to_string(),
                    });
            }
            Err(ureq::Error::StatusCode(code)) if code == 403 || code == 429 => {
                // Rate-limit signal: wait it out, then retry.
                if attempt > retries {
                    return Err(IngestError::Http {
                        url: url.to_string(),
                        message: format!("rate limited (status {code})"),
                    });
                }
                std::thread::sleep(delay.max(Duration::from_secs(6)));
                delay *= 2;
            }
            Err(e) => {
                if attempt > retries {
                    return Err(IngestError::Http {
                        url: url.to_string(),
                        message: e.to_string(),
                    });
                }
                std::thread::sleep(delay);
                delay *= 2;
            }
        }
    }
}

/// Pages the NVD CVE API 2.0 and explodes each page into per-CVE documents.
fn live_nvd(base: &str, since: Option<NaiveDate>) -> IngestResult<Vec<String>> {
    let mut docs = Vec::new();
    let mut start_index = 0usize;
    let per_page = 2000usize;
    let mut headers: Vec<(&str, String)> = Vec::new();
    if let Ok(key) = std::env::var("NVD_API_KEY") {
        headers.push(("apiKey", key));
    }
    loop {
        let mut url = format!("{base}?resultsPerPage={per_page}&startIndex={start_index}");
        if let Some(d) = since {
            url.push_str(&format!(
                "&lastModStartDate={d}T00:00:00.000&lastModEndDate={}T00:00:00.000",
                chrono::Utc::now().date_naive()
            ));
        }
        let page = http_get(&url, &headers, 3)?;
        let value: serde_json::Value = serde_json::from_str(&page)
            .map_err(|e| IngestError::BadDocument(format!("nvd page: {e}")))?;
        let total = value["totalResults"].as_u64().unwrap_or(0) as usize;
        let items = value["vulnerabilities"]
            .as_array()
            .ok_or_else(|| IngestError::BadDocument("nvd page missing vulnerabilities".into()))?;
        for item in items {
            docs.push(item.to_string());
        }
        start_index += items.len();
        if start_index >= total || items.is_empty() {
            break;
        }
        // Public rate limit is 5 requests per 30 s window without a key.
        std::thread::sleep(Duration::from_secs(if headers.is_empty() { 7 } else { 1 }));
    }
    Ok(docs)
}

/// Pages the Red Hat list endpoint, then pulls each per-CVE detail document.
fn live_redhat(base: &str, since: Option<NaiveDate>) -> IngestResult<Vec<String>> {
    let mut ids = Vec::new();
    let mut page = 1usize;
    loop {
        let mut url = format!("{base}/cve.json?per_page=1000&page={page}");
        if let Some(d) = since {
            url.push_str(&format!("&after={d}"));
        }
        let body = http_get(&url, &[], 3)?;
        let value: serde_json::Value = serde_json::from_str(&body)
            .map_err(|e| IngestError::BadDocument(format!("redhat page: {e}")))?;
        let items = value
            .as_array()
            .ok_or_else(|| IngestError::BadDocument("redhat page is not a list".into()))?;
        if items.is_empty() {
            break;
        }
        for item in items {
            if let Some(id) = item["CVE"].as_str() {
                ids.push(id.to_string());
            }
        }
        page += 1;
    }
    let mut docs = Vec::new();
    for id in ids {
        let url = format!("{base}/cve/{id}.json");
        docs.push(http_get(&url, &[], 3)?);
    }
    Ok(docs)
}
