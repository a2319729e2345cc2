//! Deterministic query planning and execution.
//!
//! A [`Query`] is canonicalized (aliases resolved, defaults filled, the clock
//! bound), a [`Strategy`] is selected, and the pattern runner executes a
//! fixed sequence of [`Step`]s. Every [`Answer`] carries the policies it used
//! and an [`Annex`] recording the steps, citations, actions and chains.

pub mod annex;
pub mod render;
mod runners;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{ActionId, DateStamp, ThemeId, WorkId, WorkKind};
use crate::retrieval::{RetrievalError, RetrievalMode, DEFAULT_K};
use crate::store::GraphStore;
use crate::temporal::{
    resolve_instant, MembershipPolicy, ResolutionPolicy, ResolvedInstant, ScopeKind, TemporalError, TemporalScope,
};

pub use annex::{Annex, AnnexAction, AnnexChain, AnnexHit, Citation, ErrorBody, ErrorRecord, Policies, StateRef};
pub use render::{extract_enumeration, footer, Enumeration, Renderer, TemplateRenderer};
pub use runners::{run_impact_analysis, run_point_in_time, run_provenance, run_retrieve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pattern {
    PointInTime,
    ImpactAnalysis,
    Provenance,
    Retrieve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    StructureFirst,
    SpanFirst,
    TimeFirst,
}

/// The eight composable pipeline steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Canonicalize,
    Scope,
    Strategy,
    CtvSelect,
    Retrieve,
    CausalAggregation,
    ChainAssembly,
    Generate,
}

/// A structured query as supplied by a caller; unset fields take defaults
/// during canonicalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub pattern: Pattern,
    /// Work urn, fragment id, heading or alias.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    /// Norm urn or alias restricting `target` resolution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<String>,
    /// Theme id or label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theme: Option<String>,
    /// Textual target: the span for provenance, the query text for retrieval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temporal: Option<TemporalScope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language_fallback: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub membership: Option<MembershipPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<RetrievalMode>,
}

impl Query {
    pub fn new(pattern: Pattern) -> Self {
        Self {
            pattern,
            target: None,
            norm: None,
            theme: None,
            term: None,
            temporal: None,
            language: None,
            language_fallback: None,
            membership: None,
            k: None,
            mode: None,
        }
    }

    pub fn point_in_time(target: impl Into<String>) -> Self {
        Self::new(Pattern::PointInTime).target(target)
    }

    pub fn impact(target: impl Into<String>) -> Self {
        Self::new(Pattern::ImpactAnalysis).target(target)
    }

    pub fn provenance(term: impl Into<String>) -> Self {
        Self::new(Pattern::Provenance).term(term)
    }

    pub fn retrieve(text: impl Into<String>) -> Self {
        Self::new(Pattern::Retrieve).term(text)
    }

    pub fn target(mut self, target: impl Into<String>) -> Self {
        self.target = Some(target.into());
        self
    }

    pub fn theme(mut self, theme: impl Into<String>) -> Self {
        self.theme = Some(theme.into());
        self
    }

    pub fn term(mut self, term: impl Into<String>) -> Self {
        self.term = Some(term.into());
        self
    }

    pub fn at(mut self, t: DateStamp) -> Self {
        self.temporal = Some(TemporalScope::instant(t));
        self
    }

    pub fn between(mut self, from: DateStamp, to: DateStamp) -> Self {
        self.temporal = Some(TemporalScope {
            kind: ScopeKind::Interval { from, to },
            resolution_policy: ResolutionPolicy::SnapshotLast,
        });
        self
    }

    pub fn resolution(mut self, policy: ResolutionPolicy) -> Self {
        let scope = self.temporal.unwrap_or_else(TemporalScope::now);
        self.temporal = Some(scope.with_policy(policy));
        self
    }

    pub fn membership(mut self, policy: MembershipPolicy) -> Self {
        self.membership = Some(policy);
        self
    }

    pub fn language(mut self, language: impl Into<String>) -> Self {
        self.language = Some(language.into());
        self
    }

    pub fn k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn mode(mut self, mode: RetrievalMode) -> Self {
        self.mode = Some(mode);
        self
    }
}

/// A query with every alias resolved and every default bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CanonicalQuery {
    pub pattern: Pattern,
    pub target: Option<WorkId>,
    pub theme: Option<ThemeId>,
    pub term: Option<String>,
    pub temporal: TemporalScope,
    /// Whether the caller supplied a temporal constraint.
    pub temporal_explicit: bool,
    pub at: ResolvedInstant,
    pub language: String,
    pub language_fallback: bool,
    pub membership: MembershipPolicy,
    pub k: usize,
    pub mode: RetrievalMode,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("unknown alias `{0}`")]
    UnknownAlias(String),
    #[error("alias `{alias}` is ambiguous: {}", candidates.join(", "))]
    AmbiguousAlias { alias: String, candidates: Vec<String> },
    #[error("unknown theme `{0}`")]
    UnknownTheme(String),
    #[error("query has no structural, textual or temporal constraint")]
    UnplannableQuery,
    #[error("{0:?} queries need a textual target")]
    MissingTerm(Pattern),
    #[error("{0:?} queries need a structural or theme target")]
    MissingTarget(Pattern),
    #[error("{0}")]
    InvalidTemporal(String),
    #[error("k must be at least 1")]
    InvalidK,
    #[error("{source} (resolved t = {resolved_t})")]
    Temporal { source: TemporalError, resolved_t: DateStamp },
    #[error("the resolved scope is empty")]
    EmptyScope,
    #[error("term `{0}` not found in scope")]
    TermNotFound(String),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
}

impl PlanError {
    /// Stable machine-readable kind.
    pub fn kind(&self) -> &'static str {
        match self {
            PlanError::UnknownAlias(_) => "UnknownAlias",
            PlanError::AmbiguousAlias { .. } => "AmbiguousAlias",
            PlanError::UnknownTheme(_) => "UnknownTheme",
            PlanError::UnplannableQuery => "UnplannableQuery",
            PlanError::MissingTerm(_) => "MissingTerm",
            PlanError::MissingTarget(_) => "MissingTarget",
            PlanError::InvalidTemporal(_) => "InvalidTemporal",
            PlanError::InvalidK => "InvalidK",
            PlanError::Temporal { source, .. } => match source {
                TemporalError::NotYetEnacted { .. } => "NotYetEnacted",
                TemporalError::RepealedAt { .. } => "RepealedAt",
                TemporalError::UnknownWork(_) => "UnknownWork",
                TemporalError::UnknownEntry(_) => "UnknownEntry",
                TemporalError::MissingLanguage { .. } => "MissingLanguage",
                TemporalError::InvalidInterval { .. } => "InvalidInterval",
            },
            PlanError::EmptyScope => "EmptyScope",
            PlanError::TermNotFound(_) => "TermNotFound",
            PlanError::Retrieval(RetrievalError::EmptyScope) => "EmptyScope",
            PlanError::Retrieval(RetrievalError::InvalidK) => "InvalidK",
        }
    }

    pub fn resolved_t(&self) -> Option<DateStamp> {
        match self {
            PlanError::Temporal { resolved_t, .. } => Some(*resolved_t),
            _ => None,
        }
    }

    pub fn to_record(&self) -> ErrorRecord {
        ErrorRecord {
            error: ErrorBody { kind: self.kind().to_owned(), message: self.to_string(), resolved_t: self.resolved_t() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Answer {
    pub pattern: Pattern,
    pub rendered_text: String,
    /// Extracted passages: enumeration items, or full texts.
    pub passages: Vec<String>,
    pub citations: Vec<Citation>,
    pub actions: Vec<ActionId>,
    pub policies: Policies,
    pub confidence: f64,
    pub annex: Annex,
}

fn resolve_norm_context(store: &GraphStore, norm: &str) -> Result<WorkId, PlanError> {
    let pick = |set: Option<&BTreeSet<WorkId>>| -> Vec<WorkId> {
        set.into_iter()
            .flatten()
            .filter(|w| store.work(w.as_str()).is_some_and(|n| n.kind == WorkKind::Norm))
            .cloned()
            .collect()
    };
    let mut found = pick(store.alias_exact(norm));
    if found.is_empty() {
        found = pick(store.alias_folded(norm));
    }
    match found.len() {
        0 => Err(PlanError::UnknownAlias(norm.to_owned())),
        1 => Ok(found.remove(0)),
        _ => Err(PlanError::AmbiguousAlias {
            alias: norm.to_owned(),
            candidates: found.iter().map(ToString::to_string).collect(),
        }),
    }
}

/// Resolves `alias` to a single work: exact match on urn, fragment id,
/// heading or alias first, then a case-folded match.
pub fn resolve_alias(store: &GraphStore, alias: &str, norm: Option<&WorkId>) -> Result<WorkId, PlanError> {
    let within = |set: Option<&BTreeSet<WorkId>>| -> Vec<WorkId> {
        set.into_iter().flatten().filter(|w| norm.is_none_or(|n| w.norm_urn() == n.as_str())).cloned().collect()
    };
    let mut found = within(store.alias_exact(alias.trim()));
    if found.is_empty() {
        found = within(store.alias_folded(alias.trim()));
    }
    match found.len() {
        0 => Err(PlanError::UnknownAlias(alias.to_owned())),
        1 => Ok(found.remove(0)),
        _ => Err(PlanError::AmbiguousAlias {
            alias: alias.to_owned(),
            candidates: found.iter().map(ToString::to_string).collect(),
        }),
    }
}

fn resolve_theme(store: &GraphStore, theme: &str) -> Result<ThemeId, PlanError> {
    if store.theme(theme).is_some() {
        return Ok(ThemeId::new(theme));
    }
    let slug = ThemeId::from_label(theme);
    if store.theme(slug.as_str()).is_some() {
        return Ok(slug);
    }
    store
        .themes()
        .find(|t| t.label.to_lowercase() == theme.trim().to_lowercase())
        .map(|t| t.id.clone())
        .ok_or_else(|| PlanError::UnknownTheme(theme.to_owned()))
}

/// Resolves aliases, binds `Now` to `clock` and fills defaults: k = 8,
/// SnapshotLast, SnapshotAnchored, the norm's primary language, fallback on.
pub fn canonicalize(raw: &Query, store: &GraphStore, clock: DateStamp) -> Result<CanonicalQuery, PlanError> {
    let norm = raw.norm.as_deref().map(|n| resolve_norm_context(store, n)).transpose()?;
    let target = raw.target.as_deref().map(|a| resolve_alias(store, a, norm.as_ref())).transpose()?;
    let theme = raw.theme.as_deref().map(|t| resolve_theme(store, t)).transpose()?;
    let term = raw.term.as_ref().map(|t| t.trim().to_owned()).filter(|t| !t.is_empty());

    let temporal = raw.temporal.unwrap_or_else(TemporalScope::now);
    if let ScopeKind::Interval { from, to } = temporal.kind {
        if from > to {
            return Err(PlanError::InvalidTemporal(format!("interval [{from}, {to}] is empty")));
        }
    }
    let k = raw.k.unwrap_or(DEFAULT_K);
    if k == 0 {
        return Err(PlanError::InvalidK);
    }

    match raw.pattern {
        Pattern::Provenance | Pattern::Retrieve if term.is_none() => return Err(PlanError::MissingTerm(raw.pattern)),
        Pattern::ImpactAnalysis if target.is_none() && theme.is_none() => {
            return Err(PlanError::MissingTarget(raw.pattern))
        }
        Pattern::ImpactAnalysis if !matches!(temporal.kind, ScopeKind::Interval { .. }) => {
            return Err(PlanError::InvalidTemporal("impact analysis needs an interval".into()))
        }
        _ => {}
    }

    let anchor_work = target
        .clone()
        .or_else(|| theme.as_ref().and_then(|t| store.theme(t.as_str())).and_then(|t| t.members.first().cloned()))
        .or_else(|| store.norms().next().map(|n| n.id.clone()));
    let language = raw.language.clone().unwrap_or_else(|| {
        anchor_work.and_then(|w| store.work(w.as_str()).map(|n| n.language.clone())).unwrap_or_else(|| "en".to_owned())
    });

    Ok(CanonicalQuery {
        pattern: raw.pattern,
        target,
        theme,
        term,
        temporal,
        temporal_explicit: raw.temporal.is_some(),
        at: resolve_instant(&temporal, clock),
        language,
        language_fallback: raw.language_fallback.unwrap_or(true),
        membership: raw.membership.unwrap_or(MembershipPolicy::SnapshotAnchored),
        k,
        mode: raw.mode.unwrap_or(RetrievalMode::Vector),
    })
}

/// Structural (or theme) target → StructureFirst; textual target alone →
/// SpanFirst; only temporal constraints → TimeFirst.
pub fn select_strategy(q: &CanonicalQuery) -> Result<Strategy, PlanError> {
    if q.target.is_some() || q.theme.is_some() {
        Ok(Strategy::StructureFirst)
    } else if q.term.is_some() {
        Ok(Strategy::SpanFirst)
    } else if q.temporal_explicit {
        Ok(Strategy::TimeFirst)
    } else {
        Err(PlanError::UnplannableQuery)
    }
}

/// Stateless executor over an immutable store.
pub struct Planner<'s> {
    store: &'s GraphStore,
    renderer: Box<dyn Renderer + Send + Sync + 's>,
}

impl<'s> Planner<'s> {
    pub fn new(store: &'s GraphStore) -> Self {
        Self { store, renderer: Box::new(TemplateRenderer) }
    }

    pub fn with_renderer(store: &'s GraphStore, renderer: Box<dyn Renderer + Send + Sync + 's>) -> Self {
        Self { store, renderer }
    }

    pub fn store(&self) -> &'s GraphStore {
        self.store
    }

    /// canonicalize → select strategy → pattern runner. Pure in (store, query, clock).
    pub fn run(&self, query: &Query, clock: DateStamp) -> Result<Answer, PlanError> {
        let q = canonicalize(query, self.store, clock)?;
        let strategy = select_strategy(&q)?;
        let renderer = self.renderer.as_ref();
        match q.pattern {
            Pattern::PointInTime => run_point_in_time(self.store, &q, strategy, renderer),
            Pattern::ImpactAnalysis => run_impact_analysis(self.store, &q, strategy, renderer),
            Pattern::Provenance => run_provenance(self.store, &q, strategy, renderer),
            Pattern::Retrieve => run_retrieve(self.store, &q, strategy, renderer),
        }
    }
}
