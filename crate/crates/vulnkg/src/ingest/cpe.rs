//! CPE 2.3 formatted-string parsing and shortening.

use super::{IngestError, IngestResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CpePart {
    Application,
    OperatingSystem,
    Hardware,
}

impl CpePart {
    pub fn letter(self) -> char {
        match self {
            CpePart::Application => 'a',
            CpePart::OperatingSystem => 'o',
            CpePart::Hardware => 'h',
        }
    }

    fn from_component(c: &str) -> Option<Self> {
        match c {
            "a" => Some(CpePart::Application),
            "o" => Some(CpePart::OperatingSystem),
            "h" => Some(CpePart::Hardware),
            _ => None,
        }
    }
}

/// The eleven components of a CPE 2.3 name. Components are kept in their raw
/// (still-escaped) form so formatting round-trips exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CpeName {
    pub part: CpePart,
    pub vendor: String,
    pub product: String,
    pub version: String,
    pub update: String,
    pub edition: String,
    pub language: String,
    pub sw_edition: String,
    pub target_sw: String,
    pub target_hw: String,
    pub other: String,
}

impl CpeName {
    /// Full `cpe:2.3:` formatted string; exact inverse of [`parse_cpe_uri`].
    pub fn format(&self) -> String {
        format!(
            "cpe:2.3:{}:{}:{}:{}:{}:{}:{}:{}:{}:{}:{}",
            self.part.letter(),
            self.vendor,
            self.product,
            self.version,
            self.update,
            self.edition,
            self.language,
            self.sw_edition,
            self.target_sw,
            self.target_hw,
            self.other,
        )
    }
}

/// Splits on unescaped `:` (honoring `\:`), keeping components verbatim.
fn split_components(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                cur.push(c);
                if let Some(next) = chars.next() {
                    cur.push(next);
                }
            }
            ':' => {
                out.push(std::mem::take(&mut cur));
            }
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out
}

/// Parses a `cpe:2.3:` formatted string into its eleven components.
pub fn parse_cpe_uri(uri: &str) -> IngestResult<CpeName> {
    let body = uri
        .strip_prefix("cpe:2.3:")
        .ok_or_else(|| IngestError::BadCpe {
            uri: uri.to_string(),
            reason: "missing cpe:2.3 prefix".into(),
        })?;
    let comps = split_components(body);
    if comps.len() != 11 {
        return Err(IngestError::BadCpe {
            uri: uri.to_string(),
            reason: format!("expected 11 components, found {}", comps.len()),
        });
    }
    let part = CpePart::from_component(&comps[0]).ok_or_else(|| IngestError::BadCpe {
        uri: uri.to_string(),
        reason: format!("invalid part {:?}", comps[0]),
    })?;
    let mut it = comps.into_iter().skip(1);
    Ok(CpeName {
        part,
        vendor: it.next().unwrap(),
        product: it.next().unwrap(),
        version: it.next().unwrap(),
        update: it.next().unwrap(),
        edition: it.next().unwrap(),
        language: it.next().unwrap(),
        sw_edition: it.next().unwrap(),
        target_sw: it.next().unwrap(),
        target_hw: it.next().unwrap(),
        other: it.next().unwrap(),
    })
}

/// `cpe:2.3:<part>:<vendor>:<product>` — the entity-level product identity.
pub fn shorten_cpe(name: &CpeName) -> String {
    format!(
        "cpe:2.3:{}:{}:{}",
        name.part.letter(),
        name.vendor,
        name.product
    )
}

/// Pads a shortened CPE back to a full wildcard name.
pub fn pad_short_cpe(short: &str) -> String {
    format!("{short}{}", ":*".repeat(8))
}

/// Converts a CPE 2.2 URI (`cpe:/o:redhat:enterprise_linux:8`) to a 2.3
/// formatted string by wildcard-padding the missing components.
pub fn cpe22_to_cpe23(uri: &str) -> Option<String> {
    let body = uri.strip_prefix("cpe:/")?;
    let comps: Vec<&str> = body.split(':').collect();
    if comps.is_empty() || comps.len() > 7 {
        return None;
    }
    let mut full: Vec<String> = comps
        .iter()
        .map(|c| if c.is_empty() { "*".to_string() } else { (*c).to_string() })
        .collect();
    while full.len() < 11 {
        full.push("*".to_string());
    }
    Some(format!("cpe:2.3:{}", full.join(":")))
}
