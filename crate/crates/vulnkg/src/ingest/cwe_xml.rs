//! MITRE CWE catalog (XML) parsing. Weakness and Category entries both
//! become [`CweRecord`]s; category membership is recorded on the member.

use std::collections::BTreeSet;

use quick_xml::events::Event;
use quick_xml::Reader;

use super::{CweRecord, IngestError, IngestResult};

fn attr(e: &quick_xml::events::BytesStart<'_>, name: &str) -> Option<String> {
    e.try_get_attribute(name)
        .ok()
        .flatten()
        .and_then(|a| a.normalized_value(quick_xml::XmlVersion::Implicit1_0).ok().map(|v| v.into_owned()))
}

#[derive(PartialEq)]
enum TextTarget {
    None,
    Description,
    Likelihood,
    Impact,
}

/// Parses the catalog into records plus the count of dropped edges
/// (self-loops and references to ids absent from the catalog).
pub fn parse_cwe_catalog(raw: &str) -> IngestResult<(Vec<CweRecord>, usize)> {
    let mut reader = Reader::from_str(raw);
    reader.config_mut().trim_text(true);

    let mut records: Vec<CweRecord> = Vec::new();
    let mut current: Option<CweRecord> = None;
    let mut target = TextTarget::None;
    let mut members: Vec<(String, String)> = Vec::new(); // (category, member)
    let mut dropped = 0usize;
    let mut saw_catalog = false;

    loop {
        match reader.read_event() {
            Err(e) => return Err(IngestError::BadCatalog(e.to_string())),
            Ok(Event::Eof) => break,
            Ok(Event::Start(e)) | Ok(Event::Empty(e)) => {
                let name = e.local_name();
                let name = std::str::from_utf8(name.as_ref()).unwrap_or("").to_string();
                handle_start(
                    &name,
                    &e,
                    &mut current,
                    &mut target,
                    &mut members,
                    &mut dropped,
                    &mut saw_catalog,
                );
            }
            Ok(Event::Text(t)) => {
                if let Some(rec) = current.as_mut() {
                    let text = t.xml10_content().unwrap_or_default().into_owned();
                    match target {
                        TextTarget::Description => {
                            if rec.description.is_empty() {
                                rec.description = text;
                            }
                        }
                        TextTarget::Likelihood => {
                            rec.exploitation_likelihood = Some(text);
                        }
                        TextTarget::Impact => {
                            rec.consequences.insert(text);
                        }
                        TextTarget::None => {}
                    }
                }
            }
            Ok(Event::End(e)) => {
                let name = e.local_name();
                let name = std::str::from_utf8(name.as_ref()).unwrap_or("").to_string();
                match name.as_str() {
                    "Weakness" | "Category" => {
                        if let Some(rec) = current.take() {
                            records.push(rec);
                        }
                    }
                    "Description" | "Summary" | "Likelihood_Of_Exploit" | "Impact" => {
                        target = TextTarget::None;
                    }
                    _ => {}
                }
            }
            Ok(_) => {}
        }
    }

    if !saw_catalog {
        return Err(IngestError::BadCatalog("no Weakness_Catalog element".into()));
    }

    // Category membership lands on the member record.
    let known: BTreeSet<String> = records.iter().map(|r| r.cwe_id.clone()).collect();
    for (category, member) in members {
        if let Some(rec) = records.iter_mut().find(|r| r.cwe_id == member) {
            rec.member_of.insert(category);
        } else {
            dropped += 1;
        }
    }

    // Drop edges whose target is not in the catalog.
    for rec in &mut records {
        for set in [
            &mut rec.child_of,
            &mut rec.peer_of,
            &mut rec.can_precede,
            &mut rec.member_of,
        ] {
            let before = set.len();
            set.retain(|id| known.contains(id));
            dropped += before - set.len();
        }
    }

    records.sort_by_key(|r| {
        r.cwe_id
            .trim_start_matches("CWE-")
            .parse::<u64>()
            .unwrap_or(u64::MAX)
    });
    Ok((records, dropped))
}

fn handle_start(
    name: &str,
    e: &quick_xml::events::BytesStart<'_>,
    current: &mut Option<CweRecord>,
    target: &mut TextTarget,
    members: &mut Vec<(String, String)>,
    dropped: &mut usize,
    saw_catalog: &mut bool,
) {
    match name {
        "Weakness_Catalog" => *saw_catalog = true,
        "Weakness" | "Category" => {
            if let Some(id) = attr(e, "ID") {
                let rec = CweRecord {
                    cwe_id: format!("CWE-{id}"),
                    name: attr(e, "Name").unwrap_or_default(),
                    ..CweRecord::default()
                };
                *current = Some(rec);
            }
        }
        "Description" | "Summary" => {
            if current.is_some() {
                *target = TextTarget::Description;
            }
        }
        "Likelihood_Of_Exploit" => {
            if current.is_some() {
                *target = TextTarget::Likelihood;
            }
        }
        "Impact" => {
            if current.is_some() {
                *target = TextTarget::Impact;
            }
        }
        "Related_Weakness" => {
            if let (Some(rec), Some(nature), Some(id)) =
                (current.as_mut(), attr(e, "Nature"), attr(e, "CWE_ID"))
            {
                let target_id = format!("CWE-{id}");
                if target_id == rec.cwe_id {
                    *dropped += 1;
                    return;
                }
                match nature.as_str() {
                    "ChildOf" => {
                        rec.child_of.insert(target_id);
                    }
                    "PeerOf" => {
                        rec.peer_of.insert(target_id);
                    }
                    "CanPrecede" => {
                        rec.can_precede.insert(target_id);
                    }
                    "MemberOf" => {
                        rec.member_of.insert(target_id);
                    }
                    _ => {}
                }
            }
        }
        "Language" => {
            if let Some(rec) = current.as_mut() {
                if let Some(v) = attr(e, "Name").or_else(|| attr(e, "Class")) {
                    rec.languages.insert(v);
                }
            }
        }
        "Technology" => {
            if let Some(rec) = current.as_mut() {
                if let Some(v) = attr(e, "Name").or_else(|| attr(e, "Class")) {
                    rec.technologies.insert(v);
                }
            }
        }
        "Has_Member" => {
            if let (Some(rec), Some(id)) = (current.as_ref(), attr(e, "CWE_ID")) {
                members.push((rec.cwe_id.clone(), format!("CWE-{id}")));
            }
        }
        _ => {}
    }
}
