//! Graph construction: enactment of source documents, application of
//! amendment events with upward aggregation, translations, and the corpus
//! directory pipeline.
//!
//! Every operation checks all of its preconditions before the first
//! mutation, so a failed call leaves the store untouched.

pub mod format;
pub mod textualize;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::locale::Locale;
use crate::model::{
    ActionId, ActionNode, ActionType, Aspect, ClvId, ComponentType, CtvId, DateStamp, Instrument, LanguageVersion,
    NodeRef, TemporalVersion, TextUnit, TextUnitId, ValidityInterval, WorkId, WorkKind, WorkNode,
};
use crate::store::{GraphStore, NodeCounts, StoreError};
use crate::themes::{define_theme, ThemeError};
use crate::validate::{validate_graph, Violation};

pub use format::{
    parse_document, parse_event_file, parse_translation_file, ComponentRecord, EventFile, EventRecord, InstrumentMeta,
    NormMeta, SourceDocument, ThemeRecord, TranslationFile,
};
pub use textualize::{render_action_text, rewording_summary, textualize_metadata};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("format error: {0}")]
    Format(String),
    #[error("structure error at `{fragment}`: {detail}")]
    StructureError { fragment: String, detail: String },
    #[error("duplicate fragment `{0}`")]
    DuplicateFragment(String),
    #[error("norm {0} is already enacted")]
    DuplicateNorm(String),
    #[error("unknown target {0}")]
    UnknownTarget(String),
    #[error("{target} has no version in force on {date}")]
    NoOpenVersion { target: String, date: DateStamp },
    #[error("event effective {effective} does not follow the current version of {target} (from {current_start})")]
    OutOfOrderEvent { target: String, current_start: DateStamp, effective: DateStamp },
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("{ctv} already has a {language} language version")]
    TranslationConflict { ctv: String, language: String },
    #[error("translation key `{0}` does not resolve to a version")]
    UnknownFragment(String),
    #[error("{0} has no text of its own to translate")]
    NotTextBearing(String),
    #[error("no documents (*.satdoc.json) in {0}")]
    NoDocuments(PathBuf),
    #[error(transparent)]
    Theme(#[from] ThemeError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{locus}: {source}")]
    Located { locus: String, source: Box<IngestError> },
}

impl IngestError {
    fn at(self, locus: impl Into<String>) -> Self {
        IngestError::Located { locus: locus.into(), source: Box::new(self) }
    }

    /// Stable name of the innermost error.
    pub fn kind(&self) -> &'static str {
        match self.root() {
            IngestError::Io { .. } => "Io",
            IngestError::Format(_) => "Format",
            IngestError::StructureError { .. } => "StructureError",
            IngestError::DuplicateFragment(_) => "DuplicateFragment",
            IngestError::DuplicateNorm(_) => "DuplicateNorm",
            IngestError::UnknownTarget(_) => "UnknownTarget",
            IngestError::NoOpenVersion { .. } => "NoOpenVersion",
            IngestError::OutOfOrderEvent { .. } => "OutOfOrderEvent",
            IngestError::InvalidEvent(_) => "InvalidEvent",
            IngestError::TranslationConflict { .. } => "TranslationConflict",
            IngestError::UnknownFragment(_) => "UnknownFragment",
            IngestError::NotTextBearing(_) => "NotTextBearing",
            IngestError::NoDocuments(_) => "NoDocuments",
            IngestError::Theme(_) => "Theme",
            IngestError::Store(_) => "Store",
            IngestError::Located { .. } => unreachable!("root strips locus wrappers"),
        }
    }

    /// The innermost error, without locus wrappers.
    pub fn root(&self) -> &IngestError {
        match self {
            IngestError::Located { source, .. } => source.root(),
            other => other,
        }
    }
}

// -------------------------------------------------------------------------
// Shared helpers
// -------------------------------------------------------------------------

fn open_version(store: &GraphStore, work: &WorkId) -> Option<TemporalVersion> {
    store.latest_ctv(work.as_str()).filter(|c| c.validity.is_open()).cloned()
}

/// Open versions of the children of `work`, in ordinal order.
fn current_child_versions(store: &GraphStore, work: &WorkId) -> Vec<CtvId> {
    store.children_of(work.as_str()).iter().filter_map(|c| open_version(store, c).map(|v| v.id)).collect()
}

fn add_content(
    store: &mut GraphStore,
    ctv: &CtvId,
    language: &str,
    text: &str,
    synthetic: bool,
) -> Result<ClvId, IngestError> {
    let clv = ClvId::derive(ctv, language);
    let unit = TextUnitId::content(&clv);
    store.insert_text_unit(TextUnit {
        id: unit.clone(),
        aspect: Aspect::Content,
        owner: NodeRef::Clv(clv.clone()),
        language: language.to_owned(),
        text: text.to_owned(),
        embedding: Vec::new(),
        synthetic,
    })?;
    store.insert_clv(LanguageVersion {
        id: clv.clone(),
        temporal_version: ctv.clone(),
        language: language.to_owned(),
        text_unit: unit,
    })?;
    Ok(clv)
}

/// Inserts the action, its description unit and the metadata units of the
/// versions it produced.
fn finish_action(store: &mut GraphStore, action: ActionNode) -> Result<ActionId, IngestError> {
    let language = store.narrative_language(action.target.as_str());
    let id = action.id.clone();
    let produced: Vec<CtvId> = action.all_produced().cloned().collect();
    let synthetic = action.synthetic;
    let description_unit = action.description_unit.clone();
    store.insert_action(action)?;
    let text = render_action_text(store.action(id.as_str()).expect("just inserted"), store, &language);
    store.insert_text_unit(TextUnit {
        id: description_unit,
        aspect: Aspect::ActionDescription,
        owner: NodeRef::Action(id.clone()),
        language,
        text,
        embedding: Vec::new(),
        synthetic,
    })?;
    for ctv in produced {
        for unit in textualize_metadata(&NodeRef::Ctv(ctv), store) {
            store.insert_text_unit(unit)?;
        }
    }
    Ok(id)
}

// -------------------------------------------------------------------------
// Enactment
// -------------------------------------------------------------------------

struct Enactor<'a> {
    norm: &'a WorkId,
    language: &'a str,
    date: DateStamp,
    action: &'a ActionId,
    produced: Vec<CtvId>,
}

impl Enactor<'_> {
    /// Creates `rec` and its subtree under `parent`; returns the new root version.
    fn create(
        &mut self,
        store: &mut GraphStore,
        parent: &WorkId,
        rec: &ComponentRecord,
        ordinal: u32,
    ) -> Result<CtvId, IngestError> {
        let id = self.norm.component(&rec.fragment_id);
        store.insert_work(WorkNode {
            id: id.clone(),
            kind: WorkKind::Component,
            component_type: rec.component_type,
            parent: Some(parent.clone()),
            ordinal,
            heading: rec.heading.clone(),
            label: rec.label.clone().unwrap_or_else(|| rec.heading.clone()),
            language: self.language.to_owned(),
            narrative_language: None,
            aliases: rec.aliases.clone(),
            metadata: BTreeMap::new(),
            synthetic: rec.synthetic,
        })?;
        let ctv = CtvId::derive(&id, self.date);
        let aggregates = rec.children.iter().map(|c| CtvId::derive(&id.component(&c.fragment_id), self.date)).collect();
        store.insert_ctv(TemporalVersion {
            id: ctv.clone(),
            work: id.clone(),
            validity: ValidityInterval::open(self.date),
            aggregates,
            produced_by: self.action.clone(),
            terminated_by: None,
        })?;
        if let Some(text) = &rec.text {
            add_content(store, &ctv, self.language, text, rec.synthetic)?;
        }
        self.produced.push(ctv.clone());
        for (i, child) in rec.children.iter().enumerate() {
            self.create(store, &id, child, i as u32)?;
        }
        Ok(ctv)
    }
}

/// Creates the norm, its components, their first versions and the
/// enactment action.
pub fn enact(store: &mut GraphStore, doc: &SourceDocument) -> Result<ActionId, IngestError> {
    format::validate_document(doc)?;
    let meta = &doc.norm;
    let norm = WorkId::new(meta.urn.as_str());
    if meta.urn.is_empty() || meta.urn.contains(['!', '@', '#']) {
        return Err(IngestError::Format(format!("invalid norm urn `{}`", meta.urn)));
    }
    if store.work(norm.as_str()).is_some() {
        return Err(IngestError::DuplicateNorm(meta.urn.clone()));
    }
    let date = meta.publication_date;
    let action_id = ActionId::new(format!("{}#enactment", meta.urn));
    let mut metadata = meta.metadata.clone();
    metadata.insert("publication_date".into(), date.to_string());

    store.insert_work(WorkNode {
        id: norm.clone(),
        kind: WorkKind::Norm,
        component_type: ComponentType::Other,
        parent: None,
        ordinal: 0,
        heading: meta.short_title.clone().unwrap_or_else(|| meta.title.clone()),
        label: meta.title.clone(),
        language: meta.language.clone(),
        narrative_language: meta.narrative_language.clone(),
        aliases: meta.aliases.clone(),
        metadata,
        synthetic: false,
    })?;
    let root_ctv = CtvId::derive(&norm, date);
    store.insert_ctv(TemporalVersion {
        id: root_ctv.clone(),
        work: norm.clone(),
        validity: ValidityInterval::open(date),
        aggregates: doc.body.iter().map(|c| CtvId::derive(&norm.component(&c.fragment_id), date)).collect(),
        produced_by: action_id.clone(),
        terminated_by: None,
    })?;

    let mut enactor =
        Enactor { norm: &norm, language: &meta.language, date, action: &action_id, produced: vec![root_ctv] };
    for (i, rec) in doc.body.iter().enumerate() {
        enactor.create(store, &norm, rec, i as u32)?;
    }
    let produced = enactor.produced;

    for unit in textualize_metadata(&NodeRef::Work(norm.clone()), store) {
        store.insert_text_unit(unit)?;
    }
    let narrative = store.narrative_language(norm.as_str());
    let action = ActionNode {
        id: action_id.clone(),
        action_type: ActionType::Enactment,
        instrument: Instrument {
            urn: meta.urn.clone(),
            title: meta.title.clone(),
            short_title: meta.short_title.clone().unwrap_or_else(|| meta.title.clone()),
        },
        source_provision: None,
        source_label: None,
        target: norm,
        enactment_date: date,
        effective_date: date,
        terminates: Vec::new(),
        produces: produced,
        propagated_terminates: Vec::new(),
        propagated_produces: Vec::new(),
        summary: Locale::get(&narrative).fill("summary.enacted", &[]),
        description_unit: TextUnitId::action(&action_id),
        synthetic: false,
    };
    finish_action(store, action)
}

// -------------------------------------------------------------------------
// Events
// -------------------------------------------------------------------------

enum Plan<'e> {
    Reword(&'e BTreeMap<String, String>),
    Insert(&'e ComponentRecord),
    Repeal,
}

/// Applies one event record; `index` is its zero-based position in its file.
pub fn apply_event(
    store: &mut GraphStore,
    instrument: &InstrumentMeta,
    index: usize,
    ev: &EventRecord,
) -> Result<ActionId, IngestError> {
    let d = ev.effective_date;
    if ev.enactment_date > d {
        return Err(IngestError::InvalidEvent(format!(
            "enactment date {} after effective date {d}",
            ev.enactment_date
        )));
    }
    let action_id = ActionId::new(format!("{}#{}", instrument.urn, index + 1));
    if store.action(action_id.as_str()).is_some() {
        return Err(IngestError::InvalidEvent(format!("action {action_id} already applied")));
    }
    let target = WorkId::new(ev.target.as_str());
    let target_node =
        store.work(target.as_str()).cloned().ok_or_else(|| IngestError::UnknownTarget(ev.target.clone()))?;
    let plan = match (ev.action_type, &ev.new_text, &ev.new_components) {
        (ActionType::Amendment, Some(texts), None) => Plan::Reword(texts),
        (ActionType::Amendment, None, Some(sub)) => Plan::Insert(sub),
        (ActionType::Repeal, None, None) => Plan::Repeal,
        (ActionType::Enactment, ..) => {
            return Err(IngestError::InvalidEvent("enactments come from source documents".into()))
        }
        (ActionType::Amendment, None, None) => {
            return Err(IngestError::InvalidEvent("amendment needs new_text or new_components".into()))
        }
        (ActionType::Amendment, Some(_), Some(_)) => {
            return Err(IngestError::InvalidEvent("new_text and new_components are exclusive".into()))
        }
        (ActionType::Repeal, ..) => return Err(IngestError::InvalidEvent("repeal carries no new content".into())),
    };

    // Preconditions.
    let no_open = |w: &WorkId| IngestError::NoOpenVersion { target: w.to_string(), date: d };
    let current = open_version(store, &target).ok_or_else(|| no_open(&target))?;
    let strictly_before = !matches!(plan, Plan::Insert(_));
    if current.validity.valid_start > d || (strictly_before && current.validity.valid_start == d) {
        return Err(IngestError::OutOfOrderEvent {
            target: target.to_string(),
            current_start: current.validity.valid_start,
            effective: d,
        });
    }
    for ancestor in store.ancestors(target.as_str()) {
        let v = open_version(store, &ancestor).ok_or_else(|| no_open(&ancestor))?;
        if v.validity.valid_start > d {
            return Err(IngestError::OutOfOrderEvent {
                target: ancestor.to_string(),
                current_start: v.validity.valid_start,
                effective: d,
            });
        }
    }
    let primary = target_node.language.clone();
    match plan {
        Plan::Reword(texts) => {
            if !store.is_text_bearing(current.id.as_str()) {
                return Err(IngestError::InvalidEvent(format!("{target} carries no text to reword")));
            }
            if !texts.contains_key(&primary) {
                return Err(IngestError::InvalidEvent(format!("new_text lacks the primary language `{primary}`")));
            }
        }
        Plan::Insert(sub) => {
            let parent_type = (target_node.kind == WorkKind::Component).then_some(target_node.component_type);
            let mut seen = BTreeSet::new();
            format::validate_subtree(sub, parent_type, &mut seen)?;
            if let Some(taken) = seen.iter().find(|f| store.work(target.component(f).as_str()).is_some()) {
                return Err(IngestError::DuplicateFragment(taken.clone()));
            }
            if target_node.component_type == ComponentType::Article && store.is_text_bearing(current.id.as_str()) {
                return Err(IngestError::StructureError {
                    fragment: sub.fragment_id.clone(),
                    detail: "cannot subdivide an article that carries its own text".into(),
                });
            }
        }
        Plan::Repeal => {
            // Closing a version on its own start day would leave it empty.
            for w in store.subtree(&target) {
                if let Some(v) = open_version(store, &w).filter(|v| v.validity.valid_start >= d) {
                    return Err(IngestError::OutOfOrderEvent {
                        target: w.to_string(),
                        current_start: v.validity.valid_start,
                        effective: d,
                    });
                }
            }
        }
    }

    // Mutation.
    let narrative = store.narrative_language(target.as_str());
    let loc = Locale::get(&narrative);
    let mut terminates = Vec::new();
    let mut produces = Vec::new();
    let (action_target, summary, propagate_from) = match plan {
        Plan::Reword(texts) => {
            let old_text = textualize::ctv_text(store, &current, &primary).unwrap_or("").to_owned();
            store.close_ctv(&current.id, d, &action_id);
            let new_id = CtvId::derive(&target, d);
            store.insert_ctv(TemporalVersion {
                id: new_id.clone(),
                work: target.clone(),
                validity: ValidityInterval::open(d),
                aggregates: current_child_versions(store, &target),
                produced_by: action_id.clone(),
                terminated_by: None,
            })?;
            for (lang, text) in texts {
                add_content(store, &new_id, lang, text, ev.synthetic)?;
            }
            terminates.push(current.id.clone());
            produces.push(new_id);
            let summary = rewording_summary(&old_text, &texts[&primary], &narrative);
            (target.clone(), summary, target_node.parent.clone())
        }
        Plan::Repeal => {
            for w in store.subtree(&target) {
                if let Some(v) = open_version(store, &w) {
                    store.close_ctv(&v.id, d, &action_id);
                    terminates.push(v.id);
                }
            }
            let summary = loc.fill("summary.repealed", &[("target", &target_node.heading)]);
            (target.clone(), summary, target_node.parent.clone())
        }
        Plan::Insert(sub) => {
            let ordinal = store.children_of(target.as_str()).len() as u32;
            let mut enactor =
                Enactor { norm: &target.norm(), language: &primary, date: d, action: &action_id, produced: Vec::new() };
            enactor.create(store, &target, sub, ordinal)?;
            produces = enactor.produced;
            let root = target.component(&sub.fragment_id);
            let summary = loc.fill("summary.inserted", &[("target", &sub.heading)]);
            (root, summary, Some(target.clone()))
        }
    };

    let mut propagated_terminates = Vec::new();
    let mut propagated_produces = Vec::new();
    let mut cursor = propagate_from;
    while let Some(w) = cursor {
        let open = open_version(store, &w).expect("ancestor checked open");
        let aggregates = current_child_versions(store, &w);
        if open.validity.valid_start == d {
            // Created earlier today; its ancestors were refreshed at the same time.
            store.set_aggregates(&open.id, aggregates);
            break;
        }
        store.close_ctv(&open.id, d, &action_id);
        let new_id = CtvId::derive(&w, d);
        store.insert_ctv(TemporalVersion {
            id: new_id.clone(),
            work: w.clone(),
            validity: ValidityInterval::open(d),
            aggregates,
            produced_by: action_id.clone(),
            terminated_by: None,
        })?;
        let copies: Vec<(String, String, bool)> = store
            .clvs_of(open.id.as_str())
            .map(|clv| {
                let unit = store.text_unit(clv.text_unit.as_str()).expect("content unit");
                (clv.language.clone(), unit.text.clone(), unit.synthetic)
            })
            .collect();
        for (lang, text, synthetic) in copies {
            add_content(store, &new_id, &lang, &text, synthetic)?;
        }
        propagated_terminates.push(open.id);
        propagated_produces.push(new_id);
        cursor = store.work(w.as_str()).and_then(|n| n.parent.clone());
    }

    let action = ActionNode {
        id: action_id.clone(),
        action_type: ev.action_type,
        instrument: Instrument {
            urn: instrument.urn.clone(),
            title: instrument.title.clone(),
            short_title: instrument.short_title.clone(),
        },
        source_provision: ev.source_provision.as_deref().map(|f| WorkId::new(format!("{}!{f}", instrument.urn))),
        source_label: ev.source_label.clone(),
        target: action_target,
        enactment_date: ev.enactment_date,
        effective_date: d,
        terminates,
        produces,
        propagated_terminates,
        propagated_produces,
        summary: ev.summary.clone().unwrap_or(summary),
        description_unit: TextUnitId::action(&action_id),
        synthetic: ev.synthetic,
    };
    finish_action(store, action)
}

// -------------------------------------------------------------------------
// Translations
// -------------------------------------------------------------------------

/// Adds language versions to existing temporal versions of `norm`.
///
/// Keys are `fragment` (latest version) or `fragment@YYYY-MM-DD`. Creates
/// language versions and content units only.
pub fn add_language(
    store: &mut GraphStore,
    norm: &WorkId,
    translations: &BTreeMap<String, String>,
    language: &str,
    synthetic: bool,
) -> Result<Vec<ClvId>, IngestError> {
    if translations.is_empty() {
        return Ok(Vec::new());
    }
    if store.work(norm.as_str()).is_none() {
        return Err(IngestError::UnknownTarget(norm.to_string()));
    }
    let mut resolved: Vec<(CtvId, &str)> = Vec::new();
    let mut seen = BTreeSet::new();
    for (key, text) in translations {
        let (fragment, date) = match key.split_once('@') {
            Some((f, d)) => {
                let d: DateStamp = d.parse().map_err(|_| IngestError::UnknownFragment(key.clone()))?;
                (f, Some(d))
            }
            None => (key.as_str(), None),
        };
        let work = norm.component(fragment);
        let ctv = match date {
            Some(d) => store.ctv(CtvId::derive(&work, d).as_str()).cloned(),
            None => store.latest_ctv(work.as_str()).cloned(),
        }
        .ok_or_else(|| IngestError::UnknownFragment(key.clone()))?;
        if !store.is_text_bearing(ctv.id.as_str()) {
            return Err(IngestError::NotTextBearing(ctv.id.to_string()));
        }
        if store.clv_for(ctv.id.as_str(), language).is_some() || !seen.insert(ctv.id.clone()) {
            return Err(IngestError::TranslationConflict { ctv: ctv.id.to_string(), language: language.to_owned() });
        }
        resolved.push((ctv.id, text));
    }
    resolved.into_iter().map(|(ctv, text)| add_content(store, &ctv, language, text, synthetic)).collect()
}

// -------------------------------------------------------------------------
// Corpus pipeline
// -------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestReport {
    pub documents: usize,
    pub events: usize,
    pub themes: usize,
    pub translations: usize,
    pub counts: NodeCounts,
    pub violations: Vec<Violation>,
}

fn read(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|e| IngestError::Io { path: path.to_owned(), message: e.to_string() })
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Builds and commits a store from every corpus file in `dir`.
///
/// Order: documents by file name, then events by (effective date, file
/// name, position in file), then themes, then translations.
pub fn ingest_corpus(dir: impl AsRef<Path>) -> Result<(GraphStore, IngestReport), IngestError> {
    let dir = dir.as_ref();
    let entries = fs::read_dir(dir).map_err(|e| IngestError::Io { path: dir.to_owned(), message: e.to_string() })?;
    let mut paths: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.retain(|p| p.is_file());
    let mut files = Vec::with_capacity(paths.len());
    for path in &paths {
        files.push((file_name(path), read(path)?));
    }
    ingest_files(&files).map_err(|e| match e {
        IngestError::NoDocuments(_) => IngestError::NoDocuments(dir.to_owned()),
        other => other,
    })
}

/// [`ingest_corpus`] over in-memory `(file name, contents)` pairs; names
/// carry the suffixes and fix the ordering.
pub fn ingest_files(files: &[(String, String)]) -> Result<(GraphStore, IngestReport), IngestError> {
    let mut files: Vec<&(String, String)> = files.iter().collect();
    files.sort_by(|a, b| a.0.cmp(&b.0));
    let with_suffix = |suffix: &str| -> Vec<(&str, &str)> {
        files.iter().filter(|f| f.0.ends_with(suffix)).map(|f| (f.0.as_str(), f.1.as_str())).collect()
    };
    let docs = with_suffix(".satdoc.json");
    if docs.is_empty() {
        return Err(IngestError::NoDocuments(PathBuf::new()));
    }

    let mut store = GraphStore::new();
    for (name, text) in &docs {
        let doc = parse_document(text).map_err(|e| e.at(*name))?;
        enact(&mut store, &doc).map_err(|e| e.at(*name))?;
    }

    let mut event_files = Vec::new();
    for (name, text) in with_suffix(".satev.json") {
        let file = parse_event_file(text).map_err(|e| e.at(name))?;
        event_files.push((name.to_owned(), file));
    }
    let mut queue: Vec<(DateStamp, &str, usize, &InstrumentMeta, &EventRecord)> = event_files
        .iter()
        .flat_map(|(name, f)| {
            f.events.iter().enumerate().map(move |(i, ev)| (ev.effective_date, name.as_str(), i, &f.instrument, ev))
        })
        .collect();
    queue.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
    for (_, name, i, instrument, ev) in &queue {
        apply_event(&mut store, instrument, *i, ev).map_err(|e| e.at(format!("{name} event {}", i + 1)))?;
    }

    let mut themes = 0;
    for (name, f) in &event_files {
        for t in &f.themes {
            let members: Vec<WorkId> = t.members.iter().map(|m| WorkId::new(m.as_str())).collect();
            let language = t.language.clone().unwrap_or_else(|| {
                members.first().map_or_else(|| "en".to_owned(), |m| store.narrative_language(m.as_str()))
            });
            define_theme(&mut store, &t.label, &t.description, &language, &members)
                .map_err(|e| IngestError::from(e).at(format!("{name} theme `{}`", t.label)))?;
            themes += 1;
        }
    }

    let mut translations = 0;
    for (name, text) in with_suffix(".satlang.json") {
        let file = parse_translation_file(text).map_err(|e| e.at(name))?;
        translations += add_language(
            &mut store,
            &WorkId::new(file.norm.as_str()),
            &file.translations,
            &file.language,
            file.synthetic,
        )
        .map_err(|e| e.at(name))?
        .len();
    }

    store.commit();
    let report = IngestReport {
        documents: docs.len(),
        events: queue.len(),
        themes,
        translations,
        counts: store.counts(),
        violations: validate_graph(&store),
    };
    Ok((store, report))
}
