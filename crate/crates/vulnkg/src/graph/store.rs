//! On-disk graph format: `entities.tsv`, `triples.tsv`, `descriptions.tsv`,
//! and a `manifest` carrying counts, the relation vocabulary, and a checksum.
//! Tab-separated and human-inspectable; format version "1".

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{Entity, EntityKind, GraphError, GraphResult, KnowledgeGraph, RelationType, Triple};

const FORMAT_VERSION: &str = "1";

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('\\') => out.push('\\'),
            Some(other) => out.push(other),
            None => {}
        }
    }
    out
}

fn hex_digest(hasher: Sha256) -> String {
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> GraphError + '_ {
    move |source| GraphError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn save_graph(g: &KnowledgeGraph, dir: &Path) -> GraphResult<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let mut entities = String::new();
    for (id, e) in g.entities().iter().enumerate() {
        entities.push_str(&format!(
            "{id}\t{}\t{}\t{}\n",
            e.kind.name(),
            escape(&e.label),
            escape(&e.description_key)
        ));
    }

    let mut triples = String::new();
    for t in g.triples() {
        triples.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            t.head,
            g.relation(t.relation).name,
            t.tail,
            t.created
        ));
    }

    let mut descriptions = String::new();
    for (k, v) in &g.descriptions {
        descriptions.push_str(&format!("{}\t{}\n", escape(k), escape(v)));
    }

    let mut hasher = Sha256::new();
    hasher.update(entities.as_bytes());
    hasher.update(triples.as_bytes());
    hasher.update(descriptions.as_bytes());
    let checksum = hex_digest(hasher);

    let mut manifest = String::new();
    manifest.push_str(&format!("format_version\t{FORMAT_VERSION}\n"));
    manifest.push_str(&format!("entities\t{}\n", g.entity_count()));
    manifest.push_str(&format!("relations\t{}\n", g.relation_count()));
    manifest.push_str(&format!("triples\t{}\n", g.triple_count()));
    manifest.push_str(&format!("inverses_added\t{}\n", g.inverses_added()));
    for rel in g.relations() {
        manifest.push_str(&format!(
            "relation\t{}\t{}\t{}\t{}\t{}\n",
            escape(&rel.name),
            rel.head_kind.map(|k| k.name()).unwrap_or("*"),
            rel.tail_kind.map(|k| k.name()).unwrap_or("*"),
            u8::from(rel.is_inverse),
            rel.inverse_of.map(|i| i.to_string()).unwrap_or_else(|| "-".into()),
        ));
    }
    for &r in &g.task_relations {
        manifest.push_str(&format!("task_relation\t{}\n", escape(&g.relation(r).name)));
    }
    manifest.push_str(&format!("checksum\t{checksum}\n"));

    fs::write(dir.join("entities.tsv"), entities).map_err(io_err(dir))?;
    fs::write(dir.join("triples.tsv"), triples).map_err(io_err(dir))?;
    fs::write(dir.join("descriptions.tsv"), descriptions).map_err(io_err(dir))?;
    fs::write(dir.join("manifest"), manifest).map_err(io_err(dir))?;
    Ok(())
}

pub fn load_graph(dir: &Path) -> GraphResult<KnowledgeGraph> {
    let read = |name: &str| -> GraphResult<String> {
        let p = dir.join(name);
        fs::read_to_string(&p).map_err(|source| GraphError::Io {
            path: p.display().to_string(),
            source,
        })
    };
    let manifest = read("manifest")?;
    let entities_tsv = read("entities.tsv")?;
    let triples_tsv = read("triples.tsv")?;
    let descriptions_tsv = read("descriptions.tsv")?;

    let mut version = None;
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut relations: Vec<RelationType> = Vec::new();
    let mut task_names: Vec<String> = Vec::new();
    let mut inverses_added = false;
    let mut checksum = String::new();
    for line in manifest.lines() {
        let fields: Vec<&str> = line.split('\t').collect();
        match fields.as_slice() {
            ["format_version", v] => version = Some(v.to_string()),
            ["entities", n] | ["relations", n] | ["triples", n] => {
                counts.insert(
                    fields[0].to_string(),
                    n.parse()
                        .map_err(|_| GraphError::BadFormat(format!("bad count line: {line}")))?,
                );
            }
            ["inverses_added", b] => inverses_added = *b == "true",
            ["relation", name, head, tail, is_inv, inv_of] => {
                let parse_kind = |s: &str| -> GraphResult<Option<EntityKind>> {
                    if s == "*" {
                        Ok(None)
                    } else {
                        EntityKind::parse(s).map(Some)
                    }
                };
                relations.push(RelationType {
                    name: unescape(name),
                    is_inverse: *is_inv == "1",
                    inverse_of: if *inv_of == "-" {
                        None
                    } else {
                        Some(inv_of.parse().map_err(|_| {
                            GraphError::BadFormat(format!("bad inverse_of: {line}"))
                        })?)
                    },
                    head_kind: parse_kind(head)?,
                    tail_kind: parse_kind(tail)?,
                });
            }
            ["task_relation", name] => task_names.push(unescape(name)),
            ["checksum", c] => checksum = c.to_string(),
            _ => return Err(GraphError::BadFormat(format!("unknown manifest line: {line}"))),
        }
    }

    match version {
        Some(v) if v == FORMAT_VERSION => {}
        Some(v) => return Err(GraphError::BadVersion(v)),
        None => return Err(GraphError::BadFormat("manifest missing format_version".into())),
    }

    let mut hasher = Sha256::new();
    hasher.update(entities_tsv.as_bytes());
    hasher.update(triples_tsv.as_bytes());
    hasher.update(descriptions_tsv.as_bytes());
    let actual = hex_digest(hasher);
    if actual != checksum {
        return Err(GraphError::ChecksumMismatch {
            expected: checksum,
            actual,
        });
    }

    let mut entities: Vec<Entity> = Vec::new();
    for line in entities_tsv.lines() {
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, kind, label, key] = fields.as_slice() else {
            return Err(GraphError::BadFormat(format!("bad entity line: {line}")));
        };
        let id: usize = id
            .parse()
            .map_err(|_| GraphError::BadFormat(format!("bad entity id: {line}")))?;
        if id != entities.len() {
            return Err(GraphError::BadFormat(format!("entity ids out of order at {id}")));
        }
        entities.push(Entity {
            kind: EntityKind::parse(kind)?,
            label: unescape(label),
            description_key: unescape(key),
        });
    }

    let rel_index: BTreeMap<&str, usize> = relations
        .iter()
        .enumerate()
        .map(|(i, r)| (r.name.as_str(), i))
        .collect();
    let mut triples: Vec<Triple> = Vec::new();
    for line in triples_tsv.lines() {
        let fields: Vec<&str> = line.split('\t').collect();
        let [head, rel, tail, created] = fields.as_slice() else {
            return Err(GraphError::BadFormat(format!("bad triple line: {line}")));
        };
        let relation = *rel_index
            .get(unescape(rel).as_str())
            .ok_or_else(|| GraphError::UnknownRelation(rel.to_string()))?;
        triples.push(Triple {
            head: head
                .parse()
                .map_err(|_| GraphError::BadFormat(format!("bad head id: {line}")))?,
            relation,
            tail: tail
                .parse()
                .map_err(|_| GraphError::BadFormat(format!("bad tail id: {line}")))?,
            created: created
                .parse()
                .map_err(|_| GraphError::BadFormat(format!("bad date: {line}")))?,
        });
    }

    let mut descriptions = BTreeMap::new();
    for line in descriptions_tsv.lines() {
        let Some((k, v)) = line.split_once('\t') else {
            return Err(GraphError::BadFormat(format!("bad description line: {line}")));
        };
        descriptions.insert(unescape(k), unescape(v));
    }

    if counts.get("entities").copied() != Some(entities.len())
        || counts.get("relations").copied() != Some(relations.len())
        || counts.get("triples").copied() != Some(triples.len())
    {
        return Err(GraphError::BadFormat("manifest counts disagree with files".into()));
    }

    let task_relations = task_names
        .iter()
        .map(|n| {
            rel_index
                .get(n.as_str())
                .copied()
                .ok_or_else(|| GraphError::UnknownRelation(n.clone()))
        })
        .collect::<GraphResult<Vec<_>>>()?;

    KnowledgeGraph::from_parts(
        relations,
        entities,
        &triples,
        task_relations,
        descriptions,
        inverses_added,
    )
}
