//! Whole-graph consistency check. Violations are data: the validator never
//! fails, it reports every broken invariant with the node ids involved.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::model::{ActionType, Aspect, NodeRef, WorkKind};
use crate::store::GraphStore;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DanglingReference { from: String, to: String },
    Hierarchy { work: String, detail: String },
    OrdinalGap { parent: String },
    OverlappingValidity { work: String, first: String, second: String },
    Gap { work: String, before: String, after: String },
    OpenBeforeLater { work: String, ctv: String },
    Aggregation { ctv: String, detail: String },
    ProducerMismatch { ctv: String, action: String },
    TerminatorMismatch { ctv: String, detail: String },
    ActionShape { action: String, detail: String },
    ActionDateMismatch { action: String, ctv: String },
    DuplicateLanguage { ctv: String, language: String },
    TextUnitOwner { unit: String, detail: String },
    Embedding { unit: String, detail: String },
    Theme { theme: String, detail: String },
}

/// Every invariant violation in `store`, sorted. Empty iff consistent.
pub fn validate_graph(store: &GraphStore) -> Vec<Violation> {
    let mut out = Vec::new();
    if let Err(e) = store.check_references() {
        if let crate::store::StoreError::DanglingReference { from, to } = e {
            out.push(Violation::DanglingReference { from, to });
        }
        // Further checks would chase missing ids.
        return out;
    }
    check_hierarchy(store, &mut out);
    check_tiling(store, &mut out);
    check_aggregation(store, &mut out);
    check_actions(store, &mut out);
    check_language_versions(store, &mut out);
    check_text_units(store, &mut out);
    check_themes(store, &mut out);
    out.sort();
    out.dedup();
    out
}

fn check_hierarchy(store: &GraphStore, out: &mut Vec<Violation>) {
    for w in store.works() {
        match (&w.kind, &w.parent) {
            (WorkKind::Norm, Some(_)) => {
                out.push(Violation::Hierarchy { work: w.id.to_string(), detail: "norm has a parent".into() })
            }
            (WorkKind::Component, None) => {
                out.push(Violation::Hierarchy { work: w.id.to_string(), detail: "component without parent".into() })
            }
            (WorkKind::Component, Some(p)) => {
                if p.norm_urn() != w.id.norm_urn() {
                    out.push(Violation::Hierarchy {
                        work: w.id.to_string(),
                        detail: format!("parent {p} belongs to another norm"),
                    });
                }
                let parent_type =
                    store.work(p.as_str()).filter(|pw| pw.kind == WorkKind::Component).map(|pw| pw.component_type);
                if !w.component_type.allowed_under(parent_type) {
                    out.push(Violation::Hierarchy {
                        work: w.id.to_string(),
                        detail: format!("{:?} not allowed under {:?}", w.component_type, parent_type),
                    });
                }
            }
            (WorkKind::Norm, None) => {}
        }
        let kids = store.children_of(w.id.as_str());
        let ordinals: Vec<u32> = kids.iter().filter_map(|k| store.work(k.as_str()).map(|n| n.ordinal)).collect();
        if ordinals.iter().enumerate().any(|(i, o)| *o as usize != i) {
            out.push(Violation::OrdinalGap { parent: w.id.to_string() });
        }
    }
}

fn check_tiling(store: &GraphStore, out: &mut Vec<Violation>) {
    for w in store.works() {
        let versions = store.versions_of(w.id.as_str()).unwrap_or_default();
        if versions.is_empty() {
            out.push(Violation::Gap { work: w.id.to_string(), before: String::new(), after: String::new() });
            continue;
        }
        for pair in versions.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            match a.validity.valid_end {
                None => out.push(Violation::OpenBeforeLater { work: w.id.to_string(), ctv: a.id.to_string() }),
                Some(end) if end > b.validity.valid_start => out.push(Violation::OverlappingValidity {
                    work: w.id.to_string(),
                    first: a.id.to_string(),
                    second: b.id.to_string(),
                }),
                Some(end) if end < b.validity.valid_start => out.push(Violation::Gap {
                    work: w.id.to_string(),
                    before: a.id.to_string(),
                    after: b.id.to_string(),
                }),
                _ => {}
            }
        }
    }
}

fn check_aggregation(store: &GraphStore, out: &mut Vec<Violation>) {
    for ctv in store.ctvs() {
        let at = ctv.validity.valid_start;
        let expected: Vec<String> = store
            .children_of(ctv.work.as_str())
            .iter()
            .filter_map(|child| {
                store
                    .versions_of(child.as_str())
                    .ok()?
                    .into_iter()
                    .find(|c| c.validity.contains(at))
                    .map(|c| c.id.to_string())
            })
            .collect();
        let actual: Vec<String> = ctv.aggregates.iter().map(|c| c.to_string()).collect();
        if expected != actual {
            out.push(Violation::Aggregation {
                ctv: ctv.id.to_string(),
                detail: format!("expected {expected:?}, found {actual:?}"),
            });
        }
        for child in &ctv.aggregates {
            if let Some(c) = store.ctv(child.as_str()) {
                let parent_of_child = store.work(c.work.as_str()).and_then(|w| w.parent.as_ref());
                if parent_of_child != Some(&ctv.work) {
                    out.push(Violation::Aggregation {
                        ctv: ctv.id.to_string(),
                        detail: format!("{child} is not a child version"),
                    });
                }
            }
        }
    }
}

fn check_actions(store: &GraphStore, out: &mut Vec<Violation>) {
    for ctv in store.ctvs() {
        let producer = store.action(ctv.produced_by.as_str());
        if !producer.is_some_and(|a| a.all_produced().any(|c| *c == ctv.id)) {
            out.push(Violation::ProducerMismatch { ctv: ctv.id.to_string(), action: ctv.produced_by.to_string() });
        }
        match (&ctv.validity.valid_end, &ctv.terminated_by) {
            (Some(_), None) => out.push(Violation::TerminatorMismatch {
                ctv: ctv.id.to_string(),
                detail: "closed without terminating action".into(),
            }),
            (None, Some(a)) => out.push(Violation::TerminatorMismatch {
                ctv: ctv.id.to_string(),
                detail: format!("open but terminated by {a}"),
            }),
            (Some(_), Some(a)) => {
                if !store.action(a.as_str()).is_some_and(|x| x.all_terminated().any(|c| *c == ctv.id)) {
                    out.push(Violation::TerminatorMismatch {
                        ctv: ctv.id.to_string(),
                        detail: format!("{a} does not list it"),
                    });
                }
            }
            (None, None) => {}
        }
    }

    for a in store.actions() {
        let shape = |detail: &str| Violation::ActionShape { action: a.id.to_string(), detail: detail.to_owned() };
        if a.enactment_date > a.effective_date {
            out.push(shape("enactment_date after effective_date"));
        }
        match a.action_type {
            ActionType::Enactment => {
                if a.all_terminated().next().is_some() {
                    out.push(shape("enactment terminates versions"));
                }
                if a.source_provision.is_some() {
                    out.push(shape("enactment has a source provision"));
                }
                if a.produces.is_empty() {
                    out.push(shape("enactment produces nothing"));
                }
            }
            ActionType::Amendment => {
                // An insertion may terminate nothing when its ancestors were
                // already revised the same day; a rewording never may.
                let rewords =
                    a.produces.iter().filter_map(|c| store.ctv(c.as_str())).any(|c| store.predecessor(c).is_some());
                if a.all_terminated().next().is_none() && rewords {
                    out.push(shape("amendment terminates nothing"));
                }
                if a.produces.is_empty() {
                    out.push(shape("amendment produces nothing"));
                }
            }
            ActionType::Repeal => {
                if a.terminates.is_empty() {
                    out.push(shape("repeal terminates nothing"));
                }
                if !a.produces.is_empty() {
                    out.push(shape("repeal produces versions"));
                }
            }
        }
        for c in a.all_terminated() {
            let ok = store.ctv(c.as_str()).is_some_and(|v| {
                v.validity.valid_end == Some(a.effective_date) && v.terminated_by.as_ref() == Some(&a.id)
            });
            if !ok {
                out.push(Violation::ActionDateMismatch { action: a.id.to_string(), ctv: c.to_string() });
            }
        }
        for c in a.all_produced() {
            let ok = store
                .ctv(c.as_str())
                .is_some_and(|v| v.validity.valid_start == a.effective_date && v.produced_by == a.id);
            if !ok {
                out.push(Violation::ActionDateMismatch { action: a.id.to_string(), ctv: c.to_string() });
            }
        }
    }
}

fn check_language_versions(store: &GraphStore, out: &mut Vec<Violation>) {
    let mut seen = BTreeSet::new();
    for clv in store.clvs() {
        if !seen.insert((clv.temporal_version.clone(), clv.language.clone())) {
            out.push(Violation::DuplicateLanguage {
                ctv: clv.temporal_version.to_string(),
                language: clv.language.clone(),
            });
        }
        match store.text_unit(clv.text_unit.as_str()) {
            Some(u) if u.aspect == Aspect::Content && u.owner == NodeRef::Clv(clv.id.clone()) => {}
            _ => out.push(Violation::TextUnitOwner {
                unit: clv.text_unit.to_string(),
                detail: format!("not the content unit of {}", clv.id),
            }),
        }
    }
}

fn check_text_units(store: &GraphStore, out: &mut Vec<Violation>) {
    let dimension = store.dimension();
    for u in store.text_units() {
        let owner_ok = matches!(
            (u.aspect, &u.owner),
            (Aspect::Content, NodeRef::Clv(_))
                | (Aspect::ActionDescription, NodeRef::Action(_))
                | (Aspect::ThemeDescription, NodeRef::Theme(_))
                | (Aspect::Metadata, NodeRef::Work(_) | NodeRef::Ctv(_))
        );
        if !owner_ok {
            out.push(Violation::TextUnitOwner {
                unit: u.id.to_string(),
                detail: format!("{:?} unit owned by {}", u.aspect, u.owner.id_str()),
            });
        }
        if u.embedding.len() != dimension {
            out.push(Violation::Embedding {
                unit: u.id.to_string(),
                detail: format!("dimension {} != {dimension}", u.embedding.len()),
            });
        } else if u.is_retrievable() {
            let norm: f64 = u.embedding.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-4 {
                out.push(Violation::Embedding { unit: u.id.to_string(), detail: format!("norm {norm:.6}") });
            }
        }
    }
}

fn check_themes(store: &GraphStore, out: &mut Vec<Violation>) {
    for t in store.themes() {
        let ok = store.text_unit(t.description_unit.as_str()).is_some_and(|u| u.aspect == Aspect::ThemeDescription);
        if !ok {
            out.push(Violation::Theme {
                theme: t.id.to_string(),
                detail: "description unit is not a theme description".into(),
            });
        }
    }
}
