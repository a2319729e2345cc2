//! Pattern runners. Each executes a fixed step sequence and records it in
//! the annex; none mutates the store.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{ActionId, ActionNode, ActionType, DateStamp, NodeRef, TemporalVersion, WorkId};
use crate::retrieval::{locate_spans, scoped_search, RetrievalRequest};
use crate::store::GraphStore;
use crate::temporal::{ctv_at, resolve_scope, snapshot_text, LanguagePolicy, ResolvedScope, ScopeEntry, TemporalError};

use super::annex::{Annex, AnnexAction, AnnexChain, AnnexHit, Citation, Policies, StateRef, ANNEX_FORMAT_VERSION};
use super::render::{
    extract_enumeration, level_name, ImpactGroup, ImpactLine, ImpactView, PointInTimeView, PreState, ProvenanceSection,
    ProvenanceView, Renderer, RetrieveLine, RetrieveView, TextSection, When,
};
use super::{Answer, CanonicalQuery, Pattern, PlanError, Step, Strategy};

fn temporal(q: &CanonicalQuery) -> impl Fn(TemporalError) -> PlanError + '_ {
    move |source| PlanError::Temporal { source, resolved_t: q.at.t }
}

/// Prose follows the norm's narrative language unless the caller asked for
/// a language other than the norm's primary one.
fn prose_language(store: &GraphStore, q: &CanonicalQuery, anchor: Option<&WorkId>) -> String {
    let anchor = anchor
        .cloned()
        .or_else(|| q.target.clone())
        .or_else(|| q.theme.as_ref().and_then(|t| store.theme(t.as_str())).and_then(|t| t.members.first().cloned()))
        .or_else(|| store.norms().next().map(|n| n.id.clone()));
    match anchor.as_ref().and_then(|w| store.work(w.as_str())) {
        Some(node) if node.language == q.language => store.narrative_language(node.id.as_str()),
        _ => q.language.clone(),
    }
}

fn policies(q: &CanonicalQuery, strategy: Strategy, prose_language: String) -> Policies {
    Policies {
        resolution_policy: q.at.policy,
        membership_policy: q.membership,
        k: q.k,
        strategy,
        retrieval_mode: q.mode,
        language: q.language.clone(),
        language_fallback: q.language_fallback,
        prose_language,
        resolved_t: q.at.t,
        window: q.at.window,
    }
}

fn annex_action(action: &ActionNode, group: Option<WorkId>) -> AnnexAction {
    AnnexAction {
        id: action.id.clone(),
        action_type: action.action_type,
        instrument: action.instrument.short_title.clone(),
        target: action.target.clone(),
        group,
        enactment_date: action.enactment_date,
        effective_date: action.effective_date,
        summary: action.summary.clone(),
    }
}

fn norm_label(store: &GraphStore, work: &WorkId) -> String {
    store.work(work.norm_urn()).map(|n| n.label.clone()).unwrap_or_else(|| work.norm_urn().to_owned())
}

fn work_label(store: &GraphStore, work: &WorkId) -> String {
    store.work(work.as_str()).map(|n| n.label.clone()).unwrap_or_else(|| work.to_string())
}

fn primary_clv_citation(store: &GraphStore, ctv: &TemporalVersion) -> Citation {
    let primary = store.work(ctv.work.as_str()).map(|w| w.language.as_str()).unwrap_or("");
    Citation {
        work: ctv.work.clone(),
        ctv: ctv.id.clone(),
        clv: store.clv_for(ctv.id.as_str(), primary).map(|c| c.id.clone()),
    }
}

struct Built {
    steps: Vec<Step>,
    rendered_text: String,
    passages: Vec<String>,
    citations: Vec<Citation>,
    actions: Vec<AnnexAction>,
    chains: Vec<AnnexChain>,
    impact_dates: Vec<DateStamp>,
    hits: Vec<AnnexHit>,
    confidence: f64,
}

fn answer(pattern: Pattern, policies: Policies, mut b: Built) -> Answer {
    b.citations.sort();
    b.citations.dedup();
    let annex = Annex {
        format_version: ANNEX_FORMAT_VERSION,
        pattern,
        policies: policies.clone(),
        steps: b.steps,
        citations: b.citations.clone(),
        actions: b.actions,
        chains: b.chains,
        impact_dates: b.impact_dates,
        hits: b.hits,
        confidence: b.confidence,
        rendered_text: b.rendered_text.clone(),
    };
    Answer {
        pattern,
        rendered_text: b.rendered_text,
        passages: b.passages,
        citations: b.citations,
        actions: annex.actions.iter().map(|a| a.id.clone()).collect(),
        policies,
        confidence: b.confidence,
        annex,
    }
}

/// Scope roots for structure-first queries: the target, or the theme members.
fn roots(store: &GraphStore, q: &CanonicalQuery) -> Vec<WorkId> {
    match (&q.target, &q.theme) {
        (Some(t), _) => vec![t.clone()],
        (None, Some(theme)) => store.theme(theme.as_str()).map(|t| t.members.clone()).unwrap_or_default(),
        (None, None) => store.norms().map(|n| n.id.clone()).collect(),
    }
}

fn entry(q: &CanonicalQuery) -> Option<ScopeEntry> {
    match (&q.target, &q.theme) {
        (Some(t), _) => Some(ScopeEntry::Work(t.clone())),
        (None, Some(theme)) => Some(ScopeEntry::Theme(theme.clone())),
        (None, None) => None,
    }
}

fn scope_for(store: &GraphStore, q: &CanonicalQuery, strategy: Strategy) -> Result<BTreeSet<WorkId>, PlanError> {
    match (strategy, entry(q)) {
        (Strategy::StructureFirst, Some(e)) => {
            Ok(resolve_scope(store, &e, &q.at, q.membership).map_err(temporal(q))?.works)
        }
        _ => Ok(store.works().map(|w| w.id.clone()).collect()),
    }
}

/// Reads an enumeration with the text's own locale, then the prose locale
/// (stand-in texts may be worded in the narrative language).
fn enumerate(text: &str, language: &str, prose: &str) -> Option<super::render::Enumeration> {
    extract_enumeration(text, language).or_else(|| extract_enumeration(text, prose))
}

/// The state of one or more provisions at the resolved instant.
pub fn run_point_in_time(
    store: &GraphStore,
    q: &CanonicalQuery,
    strategy: Strategy,
    renderer: &dyn Renderer,
) -> Result<Answer, PlanError> {
    let mut steps = vec![Step::Canonicalize, Step::Scope];
    let t = q.at.t;
    let roots = roots(store, q);
    let mut live_roots = Vec::new();
    for root in &roots {
        match ctv_at(store, root.as_str(), t) {
            Ok(_) => live_roots.push(root.clone()),
            // A theme member may lapse; a named target may not.
            Err(e) if q.target.is_some() || roots.len() == 1 => return Err(temporal(q)(e)),
            Err(_) => {}
        }
    }
    if live_roots.is_empty() {
        return Err(PlanError::EmptyScope);
    }
    steps.push(Step::Strategy);

    steps.push(Step::CtvSelect);
    let policy = LanguagePolicy { requested: &q.language, fallback: q.language_fallback };
    let mut per_root = Vec::new();
    let mut citations = Vec::new();
    let mut actions: BTreeMap<ActionId, AnnexAction> = BTreeMap::new();
    for root in &live_roots {
        let entries = snapshot_text(store, root.as_str(), t, policy).map_err(temporal(q))?;
        for w in store.subtree(root) {
            if let Ok(ctv) = ctv_at(store, w.as_str(), t) {
                let clv = entries.iter().find(|e| e.ctv == ctv.id).map(|e| e.clv.clone());
                citations.push(Citation { work: w.clone(), ctv: ctv.id.clone(), clv });
            }
        }
        for e in &entries {
            if let Some(action) = store.ctv(e.ctv.as_str()).and_then(|c| store.action(c.produced_by.as_str())) {
                actions.entry(action.id.clone()).or_insert_with(|| annex_action(action, None));
            }
        }
        per_root.push((root.clone(), entries));
    }

    steps.push(Step::Retrieve);
    let prose = prose_language(store, q, live_roots.first());
    let mut sections = Vec::new();
    let mut passages = Vec::new();
    for (root, entries) in &per_root {
        let norm = norm_label(store, root);
        if entries.len() == 1 {
            let e = &entries[0];
            let enumeration = enumerate(&e.text, &e.language, &prose);
            match &enumeration {
                Some(en) => passages.extend(en.items.iter().cloned()),
                None => passages.push(e.text.clone()),
            }
            sections.push(TextSection {
                label: work_label(store, root),
                norm,
                text: Some(e.text.clone()),
                enumeration,
            });
        } else if entries.is_empty() {
            sections.push(TextSection { label: work_label(store, root), norm, text: None, enumeration: None });
        } else {
            for e in entries {
                passages.push(e.text.clone());
                sections.push(TextSection {
                    label: work_label(store, &e.work),
                    norm: norm.clone(),
                    text: Some(e.text.clone()),
                    enumeration: enumerate(&e.text, &e.language, &prose),
                });
            }
        }
    }

    steps.push(Step::Generate);
    let when = match q.at.window {
        Some((from, to))
            if from.year() == to.year() && (from.month(), from.day(), to.month(), to.day()) == (1, 1, 12, 31) =>
        {
            When::Year(from.year())
        }
        _ => When::Date(t),
    };
    let rendered_text = renderer.point_in_time(&PointInTimeView { language: prose.clone(), when, sections });
    let built = Built {
        steps,
        rendered_text,
        passages,
        citations,
        actions: actions.into_values().collect(),
        chains: Vec::new(),
        impact_dates: Vec::new(),
        hits: Vec::new(),
        confidence: 1.0,
    };
    Ok(answer(q.pattern, policies(q, strategy, prose), built))
}

/// The child of a scope root that contains `work`, or the root itself.
fn group_of(store: &GraphStore, roots: &[WorkId], work: &WorkId) -> Option<WorkId> {
    let mut lineage = vec![work.clone()];
    lineage.extend(store.ancestors(work.as_str()));
    let root_pos = lineage.iter().position(|w| roots.contains(w))?;
    Some(if root_pos == 0 { lineage[0].clone() } else { lineage[root_pos - 1].clone() })
}

fn heading(store: &GraphStore, work: &WorkId) -> String {
    store.work(work.as_str()).map(|w| w.heading.clone()).unwrap_or_else(|| work.to_string())
}

/// Actions effective in the window whose target, or a directly affected
/// version's work, is in scope.
fn actions_in_window<'s>(
    store: &'s GraphStore,
    scope: &ResolvedScope,
    (from, to): (DateStamp, DateStamp),
) -> Vec<&'s ActionNode> {
    let direct_work = |c: &crate::model::CtvId| store.ctv(c.as_str()).map(|v| v.work.clone());
    let mut out: Vec<&ActionNode> = store
        .actions()
        .filter(|a| from <= a.effective_date && a.effective_date <= to)
        .filter(|a| {
            scope.works.contains(&a.target)
                || a.terminates.iter().chain(&a.produces).filter_map(direct_work).any(|w| scope.works.contains(&w))
        })
        .collect();
    out.sort_by(|a, b| a.effective_date.cmp(&b.effective_date).then_with(|| a.id.cmp(&b.id)));
    out
}

/// Actions in a window, grouped by the component of the entry they touched.
pub fn run_impact_analysis(
    store: &GraphStore,
    q: &CanonicalQuery,
    strategy: Strategy,
    renderer: &dyn Renderer,
) -> Result<Answer, PlanError> {
    let mut steps = vec![Step::Canonicalize, Step::Scope];
    let entry = entry(q).ok_or(PlanError::MissingTarget(q.pattern))?;
    let window = q.at.window.ok_or_else(|| PlanError::InvalidTemporal("impact analysis needs an interval".into()))?;
    let scope = resolve_scope(store, &entry, &q.at, q.membership).map_err(temporal(q))?;
    if scope.works.is_empty() {
        return Err(PlanError::EmptyScope);
    }
    steps.push(Step::Strategy);

    steps.push(Step::CausalAggregation);
    let roots = roots(store, q);
    let selected = actions_in_window(store, &scope, window);
    let mut groups: Vec<(WorkId, Vec<&ActionNode>)> = Vec::new();
    for action in &selected {
        let key = group_of(store, &roots, &action.target).unwrap_or_else(|| action.target.clone());
        match groups.iter_mut().find(|(g, _)| *g == key) {
            Some((_, list)) => list.push(action),
            None => groups.push((key, vec![action])),
        }
    }
    // Groups follow the document order of the entry's components.
    let order: BTreeMap<WorkId, usize> =
        roots.iter().flat_map(|r| store.subtree(r)).enumerate().map(|(i, w)| (w, i)).collect();
    groups.sort_by_key(|(g, _)| order.get(g).copied().unwrap_or(usize::MAX));

    steps.push(Step::Retrieve);
    let mut citations = Vec::new();
    let mut annex_actions = Vec::new();
    let mut view_groups = Vec::new();
    for (group, list) in &groups {
        let targets: BTreeSet<&WorkId> = list.iter().map(|a| &a.target).collect();
        let label = match targets.iter().next() {
            Some(only) if targets.len() == 1 && *only != group => {
                format!("{} ({})", heading(store, group), heading(store, only))
            }
            _ => heading(store, group),
        };
        let lines = list
            .iter()
            .map(|a| ImpactLine {
                instrument: a.instrument.short_title.clone(),
                summary: a.summary.clone(),
                is_amendment: a.action_type == ActionType::Amendment,
            })
            .collect();
        view_groups.push(ImpactGroup { label, lines });
        for a in list {
            annex_actions.push(annex_action(a, Some(group.clone())));
            for c in a.produces.iter().filter_map(|c| store.ctv(c.as_str())) {
                citations.push(primary_clv_citation(store, c));
            }
        }
    }
    let dates: Vec<DateStamp> =
        selected.iter().map(|a| a.effective_date).collect::<BTreeSet<_>>().into_iter().collect();

    steps.push(Step::Generate);
    let (target, level) = match &entry {
        ScopeEntry::Work(w) => (
            heading(store, w),
            store.work(w.as_str()).map(|n| level_name(&format!("{:?}", n.component_type))).unwrap_or_default(),
        ),
        ScopeEntry::Theme(t) => {
            (store.theme(t.as_str()).map(|t| t.label.clone()).unwrap_or_else(|| t.to_string()), "Theme".into())
        }
    };
    let prose = prose_language(store, q, None);
    let rendered_text = renderer.impact(&ImpactView {
        language: prose.clone(),
        target,
        level,
        window,
        groups: view_groups,
        dates: dates.clone(),
    });
    let passages = annex_actions.iter().map(|a| format!("{}: {}", a.instrument, a.summary)).collect();
    let built = Built {
        steps,
        rendered_text,
        passages,
        citations,
        actions: annex_actions,
        chains: Vec::new(),
        impact_dates: dates,
        hits: Vec::new(),
        confidence: 1.0,
    };
    Ok(answer(q.pattern, policies(q, strategy, prose), built))
}

fn state_ref(ctv: &TemporalVersion) -> StateRef {
    StateRef { ctv: ctv.id.clone(), valid_from: ctv.validity.valid_start, valid_until: ctv.validity.last_day() }
}

/// Which action introduced a term, with the states on either side.
pub fn run_provenance(
    store: &GraphStore,
    q: &CanonicalQuery,
    strategy: Strategy,
    renderer: &dyn Renderer,
) -> Result<Answer, PlanError> {
    let mut steps = vec![Step::Canonicalize, Step::Scope];
    let term = q.term.clone().ok_or(PlanError::MissingTerm(q.pattern))?;
    let scope: BTreeSet<WorkId> = match (strategy, entry(q)) {
        // Provenance looks at history, so the structural scope is every
        // descendant regardless of when it was in force.
        (Strategy::StructureFirst, Some(_)) => roots(store, q).iter().flat_map(|r| store.subtree(r)).collect(),
        _ => store.works().map(|w| w.id.clone()).collect(),
    };
    steps.push(Step::Strategy);

    steps.push(Step::Retrieve);
    let t = q.at.t;
    let mut first: BTreeMap<WorkId, &TemporalVersion> = BTreeMap::new();
    for span in locate_spans(store, &term, &scope) {
        let Some(ctv) = store.ctv(span.ctv.as_str()) else { continue };
        if span.first_containing && ctv.validity.valid_start <= t {
            first.entry(span.work).or_insert(ctv);
        }
    }
    if first.is_empty() {
        return Err(PlanError::TermNotFound(term));
    }

    steps.push(Step::CausalAggregation);
    steps.push(Step::ChainAssembly);
    let mut chains = Vec::new();
    let mut sections = Vec::new();
    let mut citations = Vec::new();
    let mut actions: BTreeMap<ActionId, AnnexAction> = BTreeMap::new();
    let short = |id: &ActionId| store.action(id.as_str()).map(|a| a.instrument.short_title.clone()).unwrap_or_default();
    for (work, post) in &first {
        let pre = store.predecessor(post);
        let causal = store.action(post.produced_by.as_str());
        let Some(causal) = causal else { continue };
        let mut chain = Vec::new();
        if let Some(p) = pre {
            chain.push(p.produced_by.clone());
            citations.push(primary_clv_citation(store, p));
        }
        chain.push(causal.id.clone());
        citations.push(primary_clv_citation(store, post));
        for id in &chain {
            if let Some(a) = store.action(id.as_str()) {
                actions.entry(a.id.clone()).or_insert_with(|| annex_action(a, None));
            }
        }
        let effect = if pre.is_some() { "inserted" } else { "original" };
        chains.push(AnnexChain {
            work: work.clone(),
            actions: chain.clone(),
            pre_state: pre.map(state_ref),
            causal_action: causal.id.clone(),
            post_state: state_ref(post),
            effect: effect.to_owned(),
            match_kind: "exact".to_owned(),
            confidence: 1.0,
        });
        sections.push(ProvenanceSection {
            target: work_label(store, work),
            pre: pre.map(|p| PreState {
                until: p.validity.last_day().unwrap_or(post.validity.valid_start.pred()),
                instrument: short(&p.produced_by),
                ctv: p.id.to_string(),
            }),
            instrument: causal.instrument.short_title.clone(),
            effective: causal.effective_date,
            post_from: post.validity.valid_start,
            post_ctv: post.id.to_string(),
            chain: chain.iter().map(short).collect(),
            confidence: 1.0,
        });
    }

    steps.push(Step::Generate);
    let prose = prose_language(store, q, first.keys().next());
    let rendered_text = renderer.provenance(&ProvenanceView { language: prose.clone(), term: term.clone(), sections });
    let built = Built {
        steps,
        rendered_text,
        passages: vec![term],
        citations,
        actions: actions.into_values().collect(),
        chains,
        impact_dates: Vec::new(),
        hits: Vec::new(),
        confidence: 1.0,
    };
    Ok(answer(q.pattern, policies(q, strategy, prose), built))
}

/// Ranked text units in scope at the resolved instant.
pub fn run_retrieve(
    store: &GraphStore,
    q: &CanonicalQuery,
    strategy: Strategy,
    renderer: &dyn Renderer,
) -> Result<Answer, PlanError> {
    let mut steps = vec![Step::Canonicalize, Step::Scope];
    let query_text = q.term.clone().ok_or(PlanError::MissingTerm(q.pattern))?;
    let scope = scope_for(store, q, strategy)?;
    steps.push(Step::Strategy);

    steps.push(Step::Retrieve);
    let req = RetrievalRequest::new(query_text.clone(), scope, q.at.t)
        .k(q.k)
        .mode(q.mode)
        .language(q.language.clone(), q.language_fallback);
    let found = scoped_search(store, &req)?;

    steps.push(Step::Generate);
    let mut citations = Vec::new();
    let mut hits = Vec::new();
    let mut lines = Vec::new();
    for h in &found {
        let clv = match &h.provenance.source {
            NodeRef::Clv(c) => Some(c.clone()),
            _ => None,
        };
        citations.push(Citation { work: h.provenance.work.clone(), ctv: h.provenance.ctv.clone(), clv });
        hits.push(AnnexHit {
            text_unit: h.text_unit.clone(),
            score: h.score,
            work: h.provenance.work.clone(),
            ctv: h.provenance.ctv.clone(),
            source: h.provenance.source.id_str().to_owned(),
        });
        lines.push(RetrieveLine {
            score: h.score,
            text_unit: h.text_unit.to_string(),
            text: store.text_unit(h.text_unit.as_str()).map(|u| u.text.clone()).unwrap_or_default(),
        });
    }
    let prose = prose_language(store, q, found.first().map(|h| &h.provenance.work));
    let rendered_text = renderer.retrieve(&RetrieveView {
        language: prose.clone(),
        query: query_text,
        t: q.at.t,
        lines: lines.clone(),
    });
    let confidence = found.first().map_or(0.0, |h| h.score.clamp(0.0, 1.0));
    let built = Built {
        steps,
        rendered_text,
        passages: lines.into_iter().map(|l| l.text).collect(),
        citations,
        actions: Vec::new(),
        chains: Vec::new(),
        impact_dates: Vec::new(),
        hits,
        confidence,
    };
    Ok(answer(q.pattern, policies(q, strategy, prose), built))
}
