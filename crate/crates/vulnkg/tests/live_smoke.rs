//! Network smoke tests, ignored by default. Run explicitly with
//! `cargo test --test live_smoke -- --ignored` on a machine with outbound
//! HTTPS (NVD_API_KEY recommended for the NVD rate limit).

use chrono::NaiveDate;
use vulnkg::ingest::{fetch_records, parse_cve_record, FetchMode, Source};

#[test]
#[ignore = "requires network access"]
fn redhat_live_fetch_respects_since_bound() {
    let since = NaiveDate::from_ymd_opt(2023, 1, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let docs = fetch_records(
        Source::RedHat,
        Some(since),
        &FetchMode::Live {
            cache_dir: dir.path().to_path_buf(),
        },
        Source::RedHat.default_url(),
    )
    .expect("live fetch");
    assert!(!docs.is_empty());
    // Asserted on the date bound only; content drifts.
    for doc in docs.iter().take(50) {
        let rec = parse_cve_record(doc, Source::RedHat).expect("parse live record");
        assert!(rec.last_modified.date() >= since || rec.published.date() >= since);
    }
}

#[test]
#[ignore = "requires network access"]
fn nvd_live_fetch_one_window() {
    let since = chrono::Utc::now().date_naive() - chrono::Duration::days(7);
    let dir = tempfile::tempdir().unwrap();
    let docs = fetch_records(
        Source::Nvd,
        Some(since),
        &FetchMode::Live {
            cache_dir: dir.path().to_path_buf(),
        },
        Source::Nvd.default_url(),
    )
    .expect("live fetch");
    assert!(!docs.is_empty());
    let rec = parse_cve_record(&docs[0], Source::Nvd).expect("parse live record");
    assert!(rec.cve_id.starts_with("CVE-"));
}
