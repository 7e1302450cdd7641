//! The vulnerability knowledge graph: typed entities, typed directed triples
//! with timestamps, adjacency indices, dataset splits, persistence, and the
//! dataset analyses.

mod build;
mod reports;
mod split;
mod store;

pub use build::{build_graph, BuildOptions, BuildReport};
pub use reports::{cpe_delay_report, graph_stats, missing_cwe_fraction, DelayReport, GraphStats};
pub use split::{split_inductive, split_transductive, DatasetSplit, SplitMode, SplitReport};
pub use store::{load_graph, save_graph};

use std::collections::{BTreeMap, HashMap, HashSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type GraphResult<T> = Result<T, GraphError>;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("unknown entity kind {0:?}")]
    UnknownKind(String),
    #[error("unknown relation {0:?}")]
    UnknownRelation(String),
    #[error("entity id {0} out of range")]
    EntityOutOfRange(usize),
    #[error("triple violates schema: {head_kind:?} -[{relation}]-> {tail_kind:?}")]
    SchemaViolation {
        head_kind: EntityKind,
        relation: String,
        tail_kind: EntityKind,
    },
    #[error("inverse relations already added")]
    AlreadyAugmented,
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("invalid split fractions valid={valid} test={test}")]
    BadFractions { valid: f64, test: f64 },
    #[error("train cutoff {train} must precede test cutoff {test}")]
    BadCutoffs { train: NaiveDate, test: NaiveDate },
    #[error("no triples dated after {0}")]
    NothingAfterCutoff(NaiveDate),
    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("graph file format error: {0}")]
    BadFormat(String),
    #[error("unsupported graph format version {0}")]
    BadVersion(String),
    #[error("checksum mismatch: manifest {expected}, computed {actual}")]
    ChecksumMismatch { expected: String, actual: String },
}

/// The nine entity kinds of the security graph schema.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    Cve,
    Cwe,
    Cpe,
    Vendor,
    Component,
    Language,
    Technology,
    Consequence,
    ExploitationLikelihood,
}

impl EntityKind {
    pub const ALL: [EntityKind; 9] = [
        EntityKind::Cve,
        EntityKind::Cwe,
        EntityKind::Cpe,
        EntityKind::Vendor,
        EntityKind::Component,
        EntityKind::Language,
        EntityKind::Technology,
        EntityKind::Consequence,
        EntityKind::ExploitationLikelihood,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EntityKind::Cve => "CVE",
            EntityKind::Cwe => "CWE",
            EntityKind::Cpe => "CPE",
            EntityKind::Vendor => "Vendor",
            EntityKind::Component => "Component",
            EntityKind::Language => "Language",
            EntityKind::Technology => "Technology",
            EntityKind::Consequence => "Consequence",
            EntityKind::ExploitationLikelihood => "ExploitationLikelihood",
        }
    }

    pub fn parse(s: &str) -> GraphResult<Self> {
        EntityKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| GraphError::UnknownKind(s.to_string()))
    }
}

pub type EntityId = usize;
pub type RelId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entity {
    pub kind: EntityKind,
    pub label: String,
    /// Key into the description map; the label itself when the entity has no
    /// prose description.
    pub description_key: String,
}

/// A relation type. Inverse types are added by [`KnowledgeGraph::augment_inverses`]
/// and point back at their forward twin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationType {
    pub name: String,
    pub is_inverse: bool,
    pub inverse_of: Option<RelId>,
    pub head_kind: Option<EntityKind>,
    pub tail_kind: Option<EntityKind>,
}

impl RelationType {
    pub fn new(name: &str, head: Option<EntityKind>, tail: Option<EntityKind>) -> Self {
        RelationType {
            name: name.to_string(),
            is_inverse: false,
            inverse_of: None,
            head_kind: head,
            tail_kind: tail,
        }
    }
}

/// The 12 forward relation types of the security graph.
pub fn security_vocabulary() -> Vec<RelationType> {
    use EntityKind::*;
    vec![
        RelationType::new("matchingCWE", Some(Cve), Some(Cwe)),
        RelationType::new("matchingCVE", Some(Cpe), Some(Cve)),
        RelationType::new("hasVendor", Some(Cpe), Some(Vendor)),
        RelationType::new("hasComponent", Some(Cpe), Some(Component)),
        RelationType::new("childOf", Some(Cwe), Some(Cwe)),
        RelationType::new("peerOf", Some(Cwe), Some(Cwe)),
        RelationType::new("canPreceed", Some(Cwe), Some(Cwe)),
        RelationType::new("memberOf", Some(Cwe), Some(Cwe)),
        RelationType::new("hasLanguage", Some(Cwe), Some(Language)),
        RelationType::new("hasTechnology", Some(Cwe), Some(Technology)),
        RelationType::new("hasExploitationLikelihood", Some(Cwe), Some(ExploitationLikelihood)),
        RelationType::new("hasConsequence", Some(Cwe), Some(Consequence)),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Triple {
    pub head: EntityId,
    pub relation: RelId,
    pub tail: EntityId,
    pub created: NaiveDate,
}

/// Immutable after construction; all lookups are index-backed. Entity and
/// triple insertion order is deterministic given the same inputs, which the
/// pipeline relies on for bit-reproducible runs.
#[derive(Clone, Debug, Default)]
pub struct KnowledgeGraph {
    entities: Vec<Entity>,
    entity_index: HashMap<(EntityKind, String), EntityId>,
    relations: Vec<RelationType>,
    relation_index: HashMap<String, RelId>,
    triples: Vec<Triple>,
    triple_set: HashSet<(EntityId, RelId, EntityId)>,
    out_adj: Vec<Vec<(RelId, EntityId)>>,
    in_adj: Vec<Vec<(RelId, EntityId)>>,
    kind_members: BTreeMap<EntityKind, Vec<EntityId>>,
    /// Relations whose triples are the prediction tasks (eligible for
    /// valid/test and for ranking).
    pub task_relations: Vec<RelId>,
    /// description key → text; entities without an entry fall back to their label.
    pub descriptions: BTreeMap<String, String>,
    inverses_added: bool,
}

impl KnowledgeGraph {
    pub fn new(vocabulary: Vec<RelationType>) -> Self {
        let relation_index = vocabulary
            .iter()
            .enumerate()
            .map(|(i, r)| (r.name.clone(), i))
            .collect();
        KnowledgeGraph {
            relations: vocabulary,
            relation_index,
            ..KnowledgeGraph::default()
        }
    }

    pub fn with_security_schema() -> Self {
        let mut g = KnowledgeGraph::new(security_vocabulary());
        g.task_relations = vec![
            g.relation_id("matchingCWE").unwrap(),
            g.relation_id("matchingCVE").unwrap(),
        ];
        g
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn relations(&self) -> &[RelationType] {
        &self.relations
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn entity(&self, id: EntityId) -> &Entity {
        &self.entities[id]
    }

    pub fn relation(&self, id: RelId) -> &RelationType {
        &self.relations[id]
    }

    pub fn entity_id(&self, kind: EntityKind, label: &str) -> Option<EntityId> {
        self.entity_index.get(&(kind, label.to_string())).copied()
    }

    /// Finds an entity by label across kinds (labels are unique per kind;
    /// CVE/CWE/CPE labels are globally unique in practice).
    pub fn entity_by_label(&self, label: &str) -> Option<EntityId> {
        EntityKind::ALL
            .iter()
            .find_map(|&k| self.entity_id(k, label))
    }

    pub fn relation_id(&self, name: &str) -> Option<RelId> {
        self.relation_index.get(name).copied()
    }

    pub fn inverses_added(&self) -> bool {
        self.inverses_added
    }

    pub fn add_entity(&mut self, kind: EntityKind, label: &str) -> EntityId {
        self.add_entity_with_key(kind, label, label)
    }

    pub fn add_entity_with_key(
        &mut self,
        kind: EntityKind,
        label: &str,
        description_key: &str,
    ) -> EntityId {
        if let Some(&id) = self.entity_index.get(&(kind, label.to_string())) {
            return id;
        }
        let id = self.entities.len();
        self.entities.push(Entity {
            kind,
            label: label.to_string(),
            description_key: description_key.to_string(),
        });
        self.entity_index.insert((kind, label.to_string()), id);
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        self.kind_members.entry(kind).or_default().push(id);
        id
    }

    /// Adds a triple unless it is a duplicate; enforces relation kind
    /// constraints when present. Returns whether the triple was new.
    pub fn add_triple(
        &mut self,
        head: EntityId,
        relation: RelId,
        tail: EntityId,
        created: NaiveDate,
    ) -> GraphResult<bool> {
        if head >= self.entities.len() {
            return Err(GraphError::EntityOutOfRange(head));
        }
        if tail >= self.entities.len() {
            return Err(GraphError::EntityOutOfRange(tail));
        }
        let rel = self
            .relations
            .get(relation)
            .ok_or_else(|| GraphError::UnknownRelation(relation.to_string()))?;
        let (hk, tk) = (self.entities[head].kind, self.entities[tail].kind);
        if rel.head_kind.is_some_and(|k| k != hk) || rel.tail_kind.is_some_and(|k| k != tk) {
            return Err(GraphError::SchemaViolation {
                head_kind: hk,
                relation: rel.name.clone(),
                tail_kind: tk,
            });
        }
        if !self.triple_set.insert((head, relation, tail)) {
            return Ok(false);
        }
        self.triples.push(Triple {
            head,
            relation,
            tail,
            created,
        });
        self.out_adj[head].push((relation, tail));
        self.in_adj[tail].push((relation, head));
        Ok(true)
    }

    pub fn contains_triple(&self, head: EntityId, relation: RelId, tail: EntityId) -> bool {
        self.triple_set.contains(&(head, relation, tail))
    }

    pub fn out_edges(&self, e: EntityId) -> &[(RelId, EntityId)] {
        &self.out_adj[e]
    }

    pub fn in_edges(&self, e: EntityId) -> &[(RelId, EntityId)] {
        &self.in_adj[e]
    }

    /// Entities of one kind, in insertion order.
    pub fn kind_members(&self, kind: EntityKind) -> &[EntityId] {
        self.kind_members
            .get(&kind)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Distinct relation types incident to the entity in either direction.
    pub fn incident_relations(&self, e: EntityId) -> Vec<RelId> {
        let mut rels: Vec<RelId> = self.out_adj[e]
            .iter()
            .chain(self.in_adj[e].iter())
            .map(|&(r, _)| r)
            .collect();
        rels.sort_unstable();
        rels.dedup();
        rels
    }

    /// Known true tails for `(head, relation)` in this graph.
    pub fn true_tails(&self, head: EntityId, relation: RelId) -> Vec<EntityId> {
        self.out_adj[head]
            .iter()
            .filter(|&&(r, _)| r == relation)
            .map(|&(_, t)| t)
            .collect()
    }

    pub fn description_of(&self, e: EntityId) -> &str {
        let ent = &self.entities[e];
        self.descriptions
            .get(&ent.description_key)
            .map(String::as_str)
            .unwrap_or(&ent.label)
    }

    /// For each triple (h, r, t) adds (t, r⁻¹, h); the relation vocabulary
    /// doubles. Rejected when called twice.
    pub fn augment_inverses(&self) -> GraphResult<KnowledgeGraph> {
        if self.inverses_added {
            return Err(GraphError::AlreadyAugmented);
        }
        let forward = self.relations.len();
        let mut g = self.clone();
        for (i, rel) in self.relations.iter().enumerate() {
            let inv = RelationType {
                name: format!("inv:{}", rel.name),
                is_inverse: true,
                inverse_of: Some(i),
                head_kind: rel.tail_kind,
                tail_kind: rel.head_kind,
            };
            g.relation_index.insert(inv.name.clone(), forward + i);
            g.relations.push(inv);
        }
        for t in self.triples.iter() {
            g.add_triple(t.tail, t.relation + forward, t.head, t.created)?;
        }
        g.inverses_added = true;
        Ok(g)
    }

    /// Forward twin of an inverse relation (or the id itself when forward).
    pub fn forward_relation(&self, r: RelId) -> RelId {
        self.relations[r].inverse_of.unwrap_or(r)
    }

    /// Inverse twin of a forward relation, when inverses were added.
    pub fn inverse_relation(&self, r: RelId) -> Option<RelId> {
        if self.relations[r].is_inverse {
            return self.relations[r].inverse_of;
        }
        if !self.inverses_added {
            return None;
        }
        // Inverses are appended in forward order.
        let forward = self.relations.len() / 2;
        Some(r + forward)
    }

    /// Observed tail kind of a relation (schema constraint when declared,
    /// otherwise the kind of the first observed tail).
    pub fn relation_tail_kind(&self, r: RelId) -> Option<EntityKind> {
        if let Some(k) = self.relations[r].tail_kind {
            return Some(k);
        }
        self.triples
            .iter()
            .find(|t| t.relation == r)
            .map(|t| self.entities[t.tail].kind)
    }

    /// Content hash over entities, relations, and triples; identifies the
    /// graph a checkpoint was trained against.
    pub fn structural_checksum(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for e in &self.entities {
            hasher.update(e.kind.name().as_bytes());
            hasher.update([0]);
            hasher.update(e.label.as_bytes());
            hasher.update([0]);
        }
        for r in &self.relations {
            hasher.update(r.name.as_bytes());
            hasher.update([0]);
        }
        for t in &self.triples {
            hasher.update(t.head.to_le_bytes());
            hasher.update(t.relation.to_le_bytes());
            hasher.update(t.tail.to_le_bytes());
            hasher.update(t.created.to_string().as_bytes());
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Structural equality, ignoring index layout.
    pub fn structurally_equal(&self, other: &KnowledgeGraph) -> bool {
        self.entities == other.entities
            && self.relations == other.relations
            && self.triples == other.triples
            && self.task_relations == other.task_relations
            && self.descriptions == other.descriptions
            && self.inverses_added == other.inverses_added
    }

    /// Rebuilds a graph from parts (used by the loader and the splitter).
    pub(crate) fn from_parts(
        relations: Vec<RelationType>,
        entities: Vec<Entity>,
        triples: &[Triple],
        task_relations: Vec<RelId>,
        descriptions: BTreeMap<String, String>,
        inverses_added: bool,
    ) -> GraphResult<KnowledgeGraph> {
        let mut g = KnowledgeGraph::new(relations);
        for e in entities {
            g.add_entity_with_key(e.kind, &e.label, &e.description_key);
        }
        for t in triples {
            g.add_triple(t.head, t.relation, t.tail, t.created)?;
        }
        g.task_relations = task_relations;
        g.descriptions = descriptions;
        g.inverses_added = inverses_added;
        Ok(g)
    }

    /// A graph with the same catalog but only the given triples (adjacency
    /// rebuilt). Entity ids are preserved.
    pub fn with_triples(&self, triples: &[Triple]) -> GraphResult<KnowledgeGraph> {
        KnowledgeGraph::from_parts(
            self.relations.clone(),
            self.entities.clone(),
            triples,
            self.task_relations.clone(),
            self.descriptions.clone(),
            self.inverses_added,
        )
    }
}
