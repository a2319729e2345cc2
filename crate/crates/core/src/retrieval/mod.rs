//! Scope- and time-filtered ranking of text units, plus exact span location
//! over version histories.

pub mod embed;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::{Aspect, CtvId, DateStamp, NodeRef, TextUnit, TextUnitId, WorkId};
use crate::store::GraphStore;
use crate::temporal::ctv_at;
use crate::text::{contains_phrase, tokenize};

use embed::{cosine, Embedder};

pub const DEFAULT_K: usize = 8;
const BM25_K1: f64 = 1.2;
const BM25_B: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RetrievalMode {
    Vector,
    Lexical,
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetrievalRequest {
    pub query_text: String,
    pub scope: BTreeSet<WorkId>,
    pub t: DateStamp,
    pub aspects: BTreeSet<Aspect>,
    /// Content language; `None` admits every language version.
    pub language: Option<String>,
    /// With `language` set, use the primary language where it is missing.
    pub language_fallback: bool,
    pub k: usize,
    pub mode: RetrievalMode,
    /// Admit action descriptions only for actions effective on or before `t`.
    pub actions_until_t: bool,
}

impl RetrievalRequest {
    pub fn new(query_text: impl Into<String>, scope: BTreeSet<WorkId>, t: DateStamp) -> Self {
        Self {
            query_text: query_text.into(),
            scope,
            t,
            aspects: Aspect::ALL.into_iter().collect(),
            language: None,
            language_fallback: true,
            k: DEFAULT_K,
            mode: RetrievalMode::Vector,
            actions_until_t: true,
        }
    }

    pub fn aspects(mut self, aspects: &[Aspect]) -> Self {
        self.aspects = aspects.iter().copied().collect();
        self
    }

    pub fn mode(mut self, mode: RetrievalMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn language(mut self, language: impl Into<String>, fallback: bool) -> Self {
        self.language = Some(language.into());
        self.language_fallback = fallback;
        self
    }
}

/// Where a hit comes from: the scoped work, its version at `t`, and the
/// node owning the unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HitProvenance {
    pub work: WorkId,
    pub ctv: CtvId,
    pub source: NodeRef,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetrievalHit {
    pub text_unit: TextUnitId,
    pub aspect: Aspect,
    /// In `[-1, 1]`; hits are sorted by score descending, then unit id.
    pub score: f64,
    pub provenance: HitProvenance,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RetrievalError {
    #[error("retrieval scope is empty")]
    EmptyScope,
    #[error("k must be at least 1")]
    InvalidK,
}

struct Candidate<'s> {
    unit: &'s TextUnit,
    provenance: HitProvenance,
}

fn candidates<'s>(store: &'s GraphStore, req: &RetrievalRequest) -> Vec<Candidate<'s>> {
    let mut out: BTreeMap<TextUnitId, Candidate<'s>> = BTreeMap::new();
    let alive: BTreeMap<&WorkId, CtvId> =
        req.scope.iter().filter_map(|w| ctv_at(store, w.as_str(), req.t).ok().map(|c| (w, c.id.clone()))).collect();
    let mut push = |unit: &'s TextUnit, work: &WorkId, ctv: &CtvId, source: NodeRef| {
        if tokenize(&unit.text).is_empty() {
            return;
        }
        out.entry(unit.id.clone()).or_insert_with(|| Candidate {
            unit,
            provenance: HitProvenance { work: work.clone(), ctv: ctv.clone(), source },
        });
    };

    if req.aspects.contains(&Aspect::Content) {
        for (work, ctv) in &alive {
            let clvs: Vec<_> = match &req.language {
                None => store.clvs_of(ctv.as_str()).collect(),
                Some(lang) => {
                    let primary = store.work(work.as_str()).map(|w| w.language.as_str()).unwrap_or("");
                    store
                        .clv_for(ctv.as_str(), lang)
                        .or_else(|| req.language_fallback.then(|| store.clv_for(ctv.as_str(), primary)).flatten())
                        .into_iter()
                        .collect()
                }
            };
            for clv in clvs {
                if let Some(unit) = store.text_unit(clv.text_unit.as_str()) {
                    push(unit, work, ctv, NodeRef::Clv(clv.id.clone()));
                }
            }
        }
    }

    if req.aspects.contains(&Aspect::ActionDescription) {
        for work in alive.keys() {
            for action in store.actions_touching(work.as_str()) {
                if req.actions_until_t && action.effective_date > req.t {
                    continue;
                }
                // Attribute to the target when it is in scope and alive.
                let (owner, ctv) = alive.get_key_value(&action.target).map_or((*work, &alive[work]), |(w, c)| (*w, c));
                if let Some(unit) = store.text_unit(action.description_unit.as_str()) {
                    push(unit, owner, ctv, NodeRef::Action(action.id.clone()));
                }
            }
        }
    }

    if req.aspects.contains(&Aspect::Metadata) {
        let by_ctv: BTreeMap<&CtvId, &WorkId> = alive.iter().map(|(w, c)| (c, *w)).collect();
        for unit in store.text_units().filter(|u| u.aspect == Aspect::Metadata) {
            match &unit.owner {
                NodeRef::Work(w) => {
                    if let Some(ctv) = alive.get(w) {
                        push(unit, w, ctv, unit.owner.clone());
                    }
                }
                NodeRef::Ctv(c) => {
                    if let Some(w) = by_ctv.get(c) {
                        push(unit, w, c, unit.owner.clone());
                    }
                }
                _ => {}
            }
        }
    }

    if req.aspects.contains(&Aspect::ThemeDescription) {
        for theme in store.themes() {
            let member = theme.members.iter().filter(|m| alive.contains_key(m)).min();
            if let (Some(work), Some(unit)) = (member, store.text_unit(theme.description_unit.as_str())) {
                push(unit, work, &alive[work], NodeRef::Theme(theme.id.clone()));
            }
        }
    }

    out.into_values().collect()
}

fn bm25_scores(store: &GraphStore, query: &str, cands: &[Candidate<'_>]) -> Vec<f64> {
    let stats = store.stats();
    let avgdl = stats.average_length().max(1.0);
    let mut terms = tokenize(query);
    terms.sort();
    terms.dedup();
    let raw: Vec<f64> = cands
        .iter()
        .map(|c| {
            let tokens = tokenize(&c.unit.text);
            let dl = tokens.len() as f64;
            terms
                .iter()
                .map(|term| {
                    let tf = tokens.iter().filter(|t| *t == term).count() as f64;
                    if tf == 0.0 {
                        return 0.0;
                    }
                    let norm = tf + BM25_K1 * (1.0 - BM25_B + BM25_B * dl / avgdl);
                    stats.idf(term) * tf * (BM25_K1 + 1.0) / norm
                })
                .sum()
        })
        .collect();
    let max = raw.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        raw.into_iter().map(|s| s / max).collect()
    } else {
        raw
    }
}

/// Positions (0-based) after sorting by score descending, then unit id.
fn ranks(scores: &[f64], cands: &[Candidate<'_>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then_with(|| cands[a].unit.id.cmp(&cands[b].unit.id)));
    let mut rank = vec![0; scores.len()];
    for (pos, idx) in order.into_iter().enumerate() {
        rank[idx] = pos;
    }
    rank
}

/// Ranked search with the store's default embedder.
pub fn scoped_search(store: &GraphStore, req: &RetrievalRequest) -> Result<Vec<RetrievalHit>, RetrievalError> {
    scoped_search_with(store, req, &store.embedder())
}

/// Ranked search with a caller-supplied embedder, which must be the one the
/// store was committed with.
///
/// Hybrid ranking orders by the sum of vector and lexical ranks; ties go to
/// the better lexical rank, then the smaller unit id. Its score is
/// `1 - position / candidates`, so it sorts like the fused order.
pub fn scoped_search_with(
    store: &GraphStore,
    req: &RetrievalRequest,
    embedder: &dyn Embedder,
) -> Result<Vec<RetrievalHit>, RetrievalError> {
    if req.scope.is_empty() {
        return Err(RetrievalError::EmptyScope);
    }
    if req.k == 0 {
        return Err(RetrievalError::InvalidK);
    }
    let cands = candidates(store, req);
    let n = cands.len();
    let vector = || {
        let q = embedder.embed(&req.query_text);
        cands.iter().map(|c| cosine(&q, &c.unit.embedding)).collect::<Vec<f64>>()
    };
    let scores: Vec<f64> = match req.mode {
        RetrievalMode::Vector => vector(),
        RetrievalMode::Lexical => bm25_scores(store, &req.query_text, &cands),
        RetrievalMode::Hybrid => {
            let lexical = bm25_scores(store, &req.query_text, &cands);
            let rv = ranks(&vector(), &cands);
            let rl = ranks(&lexical, &cands);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                (rv[a] + rl[a], rl[a])
                    .cmp(&(rv[b] + rl[b], rl[b]))
                    .then_with(|| cands[a].unit.id.cmp(&cands[b].unit.id))
            });
            let mut fused = vec![0.0; n];
            for (pos, idx) in order.into_iter().enumerate() {
                fused[idx] = 1.0 - pos as f64 / n as f64;
            }
            fused
        }
    };
    let mut hits: Vec<RetrievalHit> = cands
        .into_iter()
        .zip(scores)
        .map(|(c, score)| RetrievalHit {
            text_unit: c.unit.id.clone(),
            aspect: c.unit.aspect,
            score,
            provenance: c.provenance,
        })
        .collect();
    hits.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.text_unit.cmp(&b.text_unit)));
    hits.truncate(req.k);
    Ok(hits)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpanMatch {
    pub work: WorkId,
    pub ctv: CtvId,
    /// The work's preceding version (if any) does not contain the term.
    pub first_containing: bool,
}

fn version_contains(store: &GraphStore, ctv: &CtvId, term: &str) -> bool {
    store.clvs_of(ctv.as_str()).any(|clv| contains_phrase(store.clv_text(clv), term))
}

/// Every version of every scoped work whose content (any language) contains
/// `term` on token boundaries, case-folded. Ordered by work, then date.
pub fn locate_spans(store: &GraphStore, term: &str, scope: &BTreeSet<WorkId>) -> Vec<SpanMatch> {
    let mut out = Vec::new();
    for work in scope {
        let mut previous = false;
        for v in store.versions_of(work.as_str()).unwrap_or_default() {
            let contains = version_contains(store, &v.id, term);
            if contains {
                out.push(SpanMatch { work: work.clone(), ctv: v.id.clone(), first_containing: !previous });
            }
            previous = contains;
        }
    }
    out
}
