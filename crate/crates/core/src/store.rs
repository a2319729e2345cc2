//! In-memory graph store with its indexes, and the newline-delimited JSON
//! snapshot format.
//!
//! Snapshot layout: an optional header line followed by one record per node,
//! sorted by node id. Indexes are never persisted; they are rebuilt on load.
//!
//! ```text
//! {"record":"header","data":{"format_version":1,"dimension":256,"stats":{...}}}
//! {"record":"work","data":{...}}
//! {"record":"ctv","data":{...}}
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{
    ActionId, ActionNode, ClvId, CtvId, LanguageVersion, NodeRef, TemporalVersion, TextUnit, TextUnitId, ThemeId,
    ThemeNode, WorkId, WorkNode,
};
use crate::retrieval::embed::{CorpusStats, Embedder, HashedTfIdfEmbedder, DEFAULT_DIMENSION};
use crate::text::tokenize;

pub const SNAPSHOT_FORMAT_VERSION: u32 = 1;

/// Environment variable naming the default snapshot path.
pub const SNAPSHOT_ENV: &str = "NORMGRAPH_SNAPSHOT";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed snapshot at line {line}: {message}")]
    MalformedSnapshot { line: usize, message: String },
    #[error("dangling reference: {from} cites undefined {to}")]
    DanglingReference { from: String, to: String },
    #[error("duplicate node id {0}")]
    DuplicateId(String),
    #[error("unknown work {0}")]
    UnknownWork(WorkId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format_version: u32,
    pub dimension: usize,
    pub stats: CorpusStats,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "record", content = "data", rename_all = "snake_case")]
enum Record {
    Header(SnapshotHeader),
    Work(WorkNode),
    Ctv(TemporalVersion),
    Clv(LanguageVersion),
    Action(ActionNode),
    Theme(ThemeNode),
    TextUnit(TextUnit),
}

impl Record {
    fn id(&self) -> &str {
        match self {
            Record::Header(_) => "",
            Record::Work(n) => n.id.as_str(),
            Record::Ctv(n) => n.id.as_str(),
            Record::Clv(n) => n.id.as_str(),
            Record::Action(n) => n.id.as_str(),
            Record::Theme(n) => n.id.as_str(),
            Record::TextUnit(n) => n.id.as_str(),
        }
    }
}

/// The graph plus every index the query paths use.
///
/// Mutation is crate-internal and only happens during ingestion; once
/// [`GraphStore::commit`] has run the store is read-only and can be shared
/// freely between threads.
#[derive(Debug, Clone, Default)]
pub struct GraphStore {
    works: BTreeMap<WorkId, WorkNode>,
    ctvs: BTreeMap<CtvId, TemporalVersion>,
    clvs: BTreeMap<ClvId, LanguageVersion>,
    actions: BTreeMap<ActionId, ActionNode>,
    themes: BTreeMap<ThemeId, ThemeNode>,
    text_units: BTreeMap<TextUnitId, TextUnit>,
    stats: CorpusStats,
    dimension: usize,

    children: BTreeMap<WorkId, Vec<WorkId>>,
    versions: BTreeMap<WorkId, Vec<CtvId>>,
    actions_by_work: BTreeMap<WorkId, BTreeSet<ActionId>>,
    clvs_by_ctv: BTreeMap<CtvId, BTreeMap<String, ClvId>>,
    aliases: BTreeMap<String, BTreeSet<WorkId>>,
    folded_aliases: BTreeMap<String, BTreeSet<WorkId>>,
    term_index: BTreeMap<String, BTreeSet<TextUnitId>>,
    vector_index: Vec<TextUnitId>,
}

impl PartialEq for GraphStore {
    fn eq(&self, other: &Self) -> bool {
        self.works == other.works
            && self.ctvs == other.ctvs
            && self.clvs == other.clvs
            && self.actions == other.actions
            && self.themes == other.themes
            && self.text_units == other.text_units
            && self.stats == other.stats
            && self.dimension == other.dimension
    }
}

impl GraphStore {
    pub fn new() -> Self {
        Self { dimension: DEFAULT_DIMENSION, ..Default::default() }
    }

    // ---------------------------------------------------------------------
    // Read access
    // ---------------------------------------------------------------------

    pub fn work(&self, id: &str) -> Option<&WorkNode> {
        self.works.get(id)
    }

    pub fn ctv(&self, id: &str) -> Option<&TemporalVersion> {
        self.ctvs.get(id)
    }

    pub fn clv(&self, id: &str) -> Option<&LanguageVersion> {
        self.clvs.get(id)
    }

    pub fn action(&self, id: &str) -> Option<&ActionNode> {
        self.actions.get(id)
    }

    pub fn theme(&self, id: &str) -> Option<&ThemeNode> {
        self.themes.get(id)
    }

    pub fn text_unit(&self, id: &str) -> Option<&TextUnit> {
        self.text_units.get(id)
    }

    pub fn works(&self) -> impl Iterator<Item = &WorkNode> {
        self.works.values()
    }

    pub fn ctvs(&self) -> impl Iterator<Item = &TemporalVersion> {
        self.ctvs.values()
    }

    pub fn clvs(&self) -> impl Iterator<Item = &LanguageVersion> {
        self.clvs.values()
    }

    pub fn actions(&self) -> impl Iterator<Item = &ActionNode> {
        self.actions.values()
    }

    pub fn themes(&self) -> impl Iterator<Item = &ThemeNode> {
        self.themes.values()
    }

    pub fn text_units(&self) -> impl Iterator<Item = &TextUnit> {
        self.text_units.values()
    }

    pub fn norms(&self) -> impl Iterator<Item = &WorkNode> {
        self.works.values().filter(|w| w.parent.is_none())
    }

    pub fn node_count(&self) -> usize {
        self.works.len()
            + self.ctvs.len()
            + self.clvs.len()
            + self.actions.len()
            + self.themes.len()
            + self.text_units.len()
    }

    pub fn counts(&self) -> NodeCounts {
        NodeCounts {
            works: self.works.len(),
            ctvs: self.ctvs.len(),
            clvs: self.clvs.len(),
            actions: self.actions.len(),
            themes: self.themes.len(),
            text_units: self.text_units.len(),
        }
    }

    pub fn stats(&self) -> &CorpusStats {
        &self.stats
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// The default embedder over the frozen corpus statistics.
    pub fn embedder(&self) -> HashedTfIdfEmbedder<'_> {
        HashedTfIdfEmbedder::with_params(&self.stats, self.dimension, crate::retrieval::embed::DEFAULT_SEED)
    }

    /// All versions of `work`, ascending by `valid_start`.
    pub fn versions_of(&self, work: &str) -> Result<Vec<&TemporalVersion>, StoreError> {
        if !self.works.contains_key(work) {
            return Err(StoreError::UnknownWork(WorkId::new(work)));
        }
        Ok(self.versions.get(work).map(|ids| ids.iter().map(|id| &self.ctvs[id]).collect()).unwrap_or_default())
    }

    pub fn latest_ctv(&self, work: &str) -> Option<&TemporalVersion> {
        self.versions.get(work).and_then(|v| v.last()).map(|id| &self.ctvs[id])
    }

    /// The version preceding `ctv` in its work's history.
    pub fn predecessor(&self, ctv: &TemporalVersion) -> Option<&TemporalVersion> {
        let ids = self.versions.get(&ctv.work)?;
        let pos = ids.iter().position(|id| *id == ctv.id)?;
        pos.checked_sub(1).map(|p| &self.ctvs[&ids[p]])
    }

    /// Children in ordinal order, including repealed ones.
    pub fn children_of(&self, work: &str) -> &[WorkId] {
        self.children.get(work).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `work` followed by all its descendants, depth-first in ordinal order.
    pub fn subtree(&self, work: &WorkId) -> Vec<WorkId> {
        let mut out = Vec::new();
        let mut stack = vec![work.clone()];
        while let Some(w) = stack.pop() {
            stack.extend(self.children_of(w.as_str()).iter().rev().cloned());
            out.push(w);
        }
        out
    }

    /// Ancestors from the parent up to the norm.
    pub fn ancestors(&self, work: &str) -> Vec<WorkId> {
        let mut out = Vec::new();
        let mut cur = self.works.get(work).and_then(|w| w.parent.clone());
        while let Some(p) = cur {
            cur = self.works.get(&p).and_then(|w| w.parent.clone());
            out.push(p);
        }
        out
    }

    /// Language versions of a CTV, ordered by language tag.
    pub fn clvs_of(&self, ctv: &str) -> impl Iterator<Item = &LanguageVersion> {
        self.clvs_by_ctv.get(ctv).into_iter().flat_map(|m| m.values().map(|id| &self.clvs[id]))
    }

    pub fn clv_for(&self, ctv: &str, language: &str) -> Option<&LanguageVersion> {
        self.clvs_by_ctv.get(ctv).and_then(|m| m.get(language)).map(|id| &self.clvs[id])
    }

    pub fn is_text_bearing(&self, ctv: &str) -> bool {
        self.clvs_by_ctv.get(ctv).is_some_and(|m| !m.is_empty())
    }

    /// Content text of a language version.
    pub fn clv_text(&self, clv: &LanguageVersion) -> &str {
        self.text_units.get(&clv.text_unit).map(|u| u.text.as_str()).unwrap_or("")
    }

    /// Actions whose direct or propagated effects touch `work`.
    pub fn actions_touching(&self, work: &str) -> impl Iterator<Item = &ActionNode> {
        self.actions_by_work.get(work).into_iter().flat_map(|ids| ids.iter().map(|id| &self.actions[id]))
    }

    /// Works whose urn, fragment, heading or alias equals `alias`.
    pub fn alias_exact(&self, alias: &str) -> Option<&BTreeSet<WorkId>> {
        self.aliases.get(alias)
    }

    pub fn alias_folded(&self, alias: &str) -> Option<&BTreeSet<WorkId>> {
        self.folded_aliases.get(&alias.to_lowercase())
    }

    pub fn term_postings(&self, token: &str) -> Option<&BTreeSet<TextUnitId>> {
        self.term_index.get(token)
    }

    pub fn term_index(&self) -> &BTreeMap<String, BTreeSet<TextUnitId>> {
        &self.term_index
    }

    /// Retrievable text units (non-zero embedding), in id order.
    pub fn vector_index(&self) -> &[TextUnitId] {
        &self.vector_index
    }

    /// Norm language used for generated prose about `work`.
    pub fn narrative_language(&self, work: &str) -> String {
        let Some(node) = self.works.get(work) else {
            return "en".to_owned();
        };
        let norm = self.works.get(node.id.norm_urn()).unwrap_or(node);
        norm.narrative_language.clone().unwrap_or_else(|| norm.language.clone())
    }

    // ---------------------------------------------------------------------
    // Mutation (ingestion only)
    // ---------------------------------------------------------------------

    pub(crate) fn insert_work(&mut self, node: WorkNode) -> Result<(), StoreError> {
        if self.works.contains_key(&node.id) {
            return Err(StoreError::DuplicateId(node.id.to_string()));
        }
        self.index_work(&node);
        self.works.insert(node.id.clone(), node);
        Ok(())
    }

    fn index_work(&mut self, node: &WorkNode) {
        if let Some(parent) = &node.parent {
            let kids = self.children.entry(parent.clone()).or_default();
            kids.push(node.id.clone());
            let works = &self.works;
            let ordinal = |id: &WorkId| works.get(id).map_or(node.ordinal, |w| w.ordinal);
            kids.sort_by_key(|id| if *id == node.id { node.ordinal } else { ordinal(id) });
        }
        let mut keys = vec![node.id.to_string(), node.heading.clone()];
        keys.extend(node.id.fragment().map(str::to_owned));
        keys.extend(node.aliases.iter().cloned());
        for key in keys.into_iter().filter(|k| !k.is_empty()) {
            self.folded_aliases.entry(key.to_lowercase()).or_default().insert(node.id.clone());
            self.aliases.entry(key).or_default().insert(node.id.clone());
        }
    }

    pub(crate) fn insert_ctv(&mut self, ctv: TemporalVersion) -> Result<(), StoreError> {
        if self.ctvs.contains_key(&ctv.id) {
            return Err(StoreError::DuplicateId(ctv.id.to_string()));
        }
        self.index_ctv(&ctv);
        self.ctvs.insert(ctv.id.clone(), ctv);
        Ok(())
    }

    fn index_ctv(&mut self, ctv: &TemporalVersion) {
        let list = self.versions.entry(ctv.work.clone()).or_default();
        let ctvs = &self.ctvs;
        let pos = list
            .iter()
            .position(|id| ctvs.get(id).is_some_and(|c| c.validity.valid_start > ctv.validity.valid_start))
            .unwrap_or(list.len());
        list.insert(pos, ctv.id.clone());
    }

    pub(crate) fn close_ctv(&mut self, id: &CtvId, end: crate::model::DateStamp, by: &ActionId) {
        let ctv = self.ctvs.get_mut(id).expect("closing unknown ctv");
        ctv.validity.valid_end = Some(end);
        ctv.terminated_by = Some(by.clone());
    }

    pub(crate) fn set_aggregates(&mut self, id: &CtvId, aggregates: Vec<CtvId>) {
        self.ctvs.get_mut(id).expect("unknown ctv").aggregates = aggregates;
    }

    pub(crate) fn insert_clv(&mut self, clv: LanguageVersion) -> Result<(), StoreError> {
        if self.clvs.contains_key(&clv.id) {
            return Err(StoreError::DuplicateId(clv.id.to_string()));
        }
        self.clvs_by_ctv.entry(clv.temporal_version.clone()).or_default().insert(clv.language.clone(), clv.id.clone());
        self.clvs.insert(clv.id.clone(), clv);
        Ok(())
    }

    pub(crate) fn insert_action(&mut self, action: ActionNode) -> Result<(), StoreError> {
        if self.actions.contains_key(&action.id) {
            return Err(StoreError::DuplicateId(action.id.to_string()));
        }
        self.index_action(&action);
        self.actions.insert(action.id.clone(), action);
        Ok(())
    }

    fn index_action(&mut self, action: &ActionNode) {
        let mut works: BTreeSet<WorkId> = BTreeSet::new();
        works.insert(action.target.clone());
        for ctv in action.all_terminated().chain(action.all_produced()) {
            if let Some(c) = self.ctvs.get(ctv) {
                works.insert(c.work.clone());
            }
        }
        for w in works {
            self.actions_by_work.entry(w).or_default().insert(action.id.clone());
        }
    }

    pub(crate) fn insert_theme(&mut self, theme: ThemeNode) -> Result<(), StoreError> {
        if self.themes.contains_key(&theme.id) {
            return Err(StoreError::DuplicateId(theme.id.to_string()));
        }
        self.themes.insert(theme.id.clone(), theme);
        Ok(())
    }

    /// Inserts a text unit with a zero embedding; [`commit`](Self::commit)
    /// computes the real vectors once corpus statistics are final.
    pub(crate) fn insert_text_unit(&mut self, mut unit: TextUnit) -> Result<(), StoreError> {
        if self.text_units.contains_key(&unit.id) {
            return Err(StoreError::DuplicateId(unit.id.to_string()));
        }
        unit.embedding = vec![0.0; self.dimension];
        self.index_text_unit(&unit);
        self.text_units.insert(unit.id.clone(), unit);
        Ok(())
    }

    fn index_text_unit(&mut self, unit: &TextUnit) {
        for token in tokenize(&unit.text) {
            self.term_index.entry(token).or_default().insert(unit.id.clone());
        }
    }

    /// Freezes corpus statistics and recomputes every embedding with the
    /// default embedder.
    pub fn commit(&mut self) {
        self.stats = CorpusStats::from_texts(self.text_units.values().map(|u| u.text.as_str()));
        let stats = self.stats.clone();
        let embedder = HashedTfIdfEmbedder::with_params(&stats, self.dimension, crate::retrieval::embed::DEFAULT_SEED);
        self.reembed(&embedder);
    }

    /// Like [`commit`](Self::commit) but with a caller-supplied embedder.
    pub fn commit_with(&mut self, embedder: &dyn Embedder) {
        self.stats = CorpusStats::from_texts(self.text_units.values().map(|u| u.text.as_str()));
        self.dimension = embedder.dimension();
        self.reembed(embedder);
    }

    fn reembed(&mut self, embedder: &dyn Embedder) {
        let vectors: Vec<(TextUnitId, Vec<f32>)> =
            self.text_units.par_iter().map(|(id, u)| (id.clone(), embedder.embed(&u.text))).collect();
        for (id, v) in vectors {
            self.text_units.get_mut(&id).expect("unit vanished").embedding = v;
        }
        self.rebuild_vector_index();
    }

    fn rebuild_vector_index(&mut self) {
        self.vector_index = self.text_units.values().filter(|u| u.is_retrievable()).map(|u| u.id.clone()).collect();
    }

    /// Rebuilds the lexical index from scratch (used to check index coherence).
    pub fn rebuilt_term_index(&self) -> BTreeMap<String, BTreeSet<TextUnitId>> {
        let mut index: BTreeMap<String, BTreeSet<TextUnitId>> = BTreeMap::new();
        for unit in self.text_units.values() {
            for token in tokenize(&unit.text) {
                index.entry(token).or_default().insert(unit.id.clone());
            }
        }
        index
    }

    // ---------------------------------------------------------------------
    // Persistence
    // ---------------------------------------------------------------------

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), StoreError> {
        let file = fs::File::create(path)?;
        let mut out = BufWriter::new(file);
        self.write_snapshot(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn write_snapshot(&self, out: &mut impl Write) -> Result<(), StoreError> {
        let header = Record::Header(SnapshotHeader {
            format_version: SNAPSHOT_FORMAT_VERSION,
            dimension: self.dimension,
            stats: self.stats.clone(),
        });
        let mut records: Vec<Record> = Vec::with_capacity(self.node_count());
        records.extend(self.works.values().cloned().map(Record::Work));
        records.extend(self.ctvs.values().cloned().map(Record::Ctv));
        records.extend(self.clvs.values().cloned().map(Record::Clv));
        records.extend(self.actions.values().cloned().map(Record::Action));
        records.extend(self.themes.values().cloned().map(Record::Theme));
        records.extend(self.text_units.values().cloned().map(Record::TextUnit));
        records.sort_by(|a, b| a.id().cmp(b.id()));
        for record in std::iter::once(&header).chain(&records) {
            serde_json::to_writer(&mut *out, record).map_err(io::Error::other)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let text = fs::read_to_string(path)?;
        Self::from_snapshot_str(&text)
    }

    pub fn from_snapshot_str(text: &str) -> Result<Self, StoreError> {
        let mut store = GraphStore::new();
        let mut records = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: Record = serde_json::from_str(line)
                .map_err(|e| StoreError::MalformedSnapshot { line: n + 1, message: e.to_string() })?;
            if let Record::Header(h) = &record {
                if h.format_version != SNAPSHOT_FORMAT_VERSION {
                    return Err(StoreError::MalformedSnapshot {
                        line: n + 1,
                        message: format!("unsupported format_version {}", h.format_version),
                    });
                }
            }
            records.push((n + 1, record));
        }
        // Works first so that child ordering can be resolved, then everything else.
        records.sort_by_key(|(_, r)| match r {
            Record::Header(_) => 0,
            Record::Work(_) => 1,
            Record::Ctv(_) => 2,
            Record::Clv(_) => 3,
            Record::TextUnit(_) => 4,
            Record::Action(_) => 5,
            Record::Theme(_) => 6,
        });
        for (line, record) in records {
            let dup = |e: StoreError| match e {
                StoreError::DuplicateId(id) => {
                    StoreError::MalformedSnapshot { line, message: format!("duplicate id {id}") }
                }
                other => other,
            };
            match record {
                Record::Header(h) => {
                    store.dimension = h.dimension;
                    store.stats = h.stats;
                }
                Record::Work(w) => store.insert_work(w).map_err(dup)?,
                Record::Ctv(c) => store.insert_ctv(c).map_err(dup)?,
                Record::Clv(c) => store.insert_clv(c).map_err(dup)?,
                Record::TextUnit(u) => {
                    if store.text_units.contains_key(&u.id) {
                        return Err(dup(StoreError::DuplicateId(u.id.to_string())));
                    }
                    store.index_text_unit(&u);
                    store.text_units.insert(u.id.clone(), u);
                }
                Record::Action(a) => store.insert_action(a).map_err(dup)?,
                Record::Theme(t) => store.insert_theme(t).map_err(dup)?,
            }
        }
        store.check_references()?;
        store.rebuild_vector_index();
        Ok(store)
    }

    /// Fails on the first (in id order) reference to an undefined node.
    pub fn check_references(&self) -> Result<(), StoreError> {
        let dangling =
            |from: &str, to: &str| StoreError::DanglingReference { from: from.to_owned(), to: to.to_owned() };
        for w in self.works.values() {
            if let Some(p) = &w.parent {
                if !self.works.contains_key(p) {
                    return Err(dangling(w.id.as_str(), p.as_str()));
                }
            }
        }
        for c in self.ctvs.values() {
            if !self.works.contains_key(&c.work) {
                return Err(dangling(c.id.as_str(), c.work.as_str()));
            }
            for child in &c.aggregates {
                if !self.ctvs.contains_key(child) {
                    return Err(dangling(c.id.as_str(), child.as_str()));
                }
            }
            for a in std::iter::once(&c.produced_by).chain(&c.terminated_by) {
                if !self.actions.contains_key(a) {
                    return Err(dangling(c.id.as_str(), a.as_str()));
                }
            }
        }
        for l in self.clvs.values() {
            if !self.ctvs.contains_key(&l.temporal_version) {
                return Err(dangling(l.id.as_str(), l.temporal_version.as_str()));
            }
            if !self.text_units.contains_key(&l.text_unit) {
                return Err(dangling(l.id.as_str(), l.text_unit.as_str()));
            }
        }
        for a in self.actions.values() {
            if !self.works.contains_key(&a.target) {
                return Err(dangling(a.id.as_str(), a.target.as_str()));
            }
            for c in a.all_terminated().chain(a.all_produced()) {
                if !self.ctvs.contains_key(c) {
                    return Err(dangling(a.id.as_str(), c.as_str()));
                }
            }
            if !self.text_units.contains_key(&a.description_unit) {
                return Err(dangling(a.id.as_str(), a.description_unit.as_str()));
            }
        }
        for t in self.themes.values() {
            if !self.text_units.contains_key(&t.description_unit) {
                return Err(dangling(t.id.as_str(), t.description_unit.as_str()));
            }
            for m in &t.members {
                if !self.works.contains_key(m) {
                    return Err(dangling(t.id.as_str(), m.as_str()));
                }
            }
        }
        for u in self.text_units.values() {
            let exists = match &u.owner {
                NodeRef::Work(id) => self.works.contains_key(id),
                NodeRef::Ctv(id) => self.ctvs.contains_key(id),
                NodeRef::Clv(id) => self.clvs.contains_key(id),
                NodeRef::Action(id) => self.actions.contains_key(id),
                NodeRef::Theme(id) => self.themes.contains_key(id),
            };
            if !exists {
                return Err(dangling(u.id.as_str(), u.owner.id_str()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeCounts {
    pub works: usize,
    pub ctvs: usize,
    pub clvs: usize,
    pub actions: usize,
    pub themes: usize,
    pub text_units: usize,
}

impl NodeCounts {
    pub fn total(&self) -> usize {
        self.works + self.ctvs + self.clvs + self.actions + self.themes + self.text_units
    }
}
