//! Thematic communities: curated groups of works that cut across the
//! structural hierarchy and can serve as a query entry point.

use std::collections::BTreeSet;

use crate::model::{Aspect, NodeRef, TextUnit, TextUnitId, ThemeId, ThemeNode, WorkId};
use crate::store::GraphStore;
use crate::temporal::{resolve_scope, MembershipPolicy, ResolvedInstant, ScopeEntry, TemporalError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ThemeError {
    #[error("unknown theme member {0}")]
    UnknownMember(String),
    #[error("a theme labelled `{0}` already exists")]
    DuplicateLabel(String),
    #[error("unknown theme {0}")]
    UnknownTheme(String),
}

/// Creates a theme and its description unit. Members may be empty.
pub fn define_theme(
    store: &mut GraphStore,
    label: &str,
    description: &str,
    language: &str,
    members: &[WorkId],
) -> Result<ThemeId, ThemeError> {
    let id = ThemeId::from_label(label);
    if store.theme(id.as_str()).is_some() || store.themes().any(|t| t.label == label) {
        return Err(ThemeError::DuplicateLabel(label.to_owned()));
    }
    if let Some(missing) = members.iter().find(|m| store.work(m.as_str()).is_none()) {
        return Err(ThemeError::UnknownMember(missing.to_string()));
    }
    let mut unique = BTreeSet::new();
    let members: Vec<WorkId> = members.iter().filter(|m| unique.insert(*m)).cloned().collect();
    let unit = TextUnit {
        id: TextUnitId::theme(&id),
        aspect: Aspect::ThemeDescription,
        owner: NodeRef::Theme(id.clone()),
        language: language.to_owned(),
        text: description.to_owned(),
        embedding: Vec::new(),
        synthetic: false,
    };
    let description_unit = unit.id.clone();
    store.insert_text_unit(unit).expect("theme unit id is fresh");
    store
        .insert_theme(ThemeNode { id: id.clone(), label: label.to_owned(), description_unit, members })
        .expect("theme id is fresh");
    Ok(id)
}

/// Union of the member scopes at `at` under `policy`.
pub fn theme_scope(
    store: &GraphStore,
    theme: &ThemeId,
    at: &ResolvedInstant,
    policy: MembershipPolicy,
) -> Result<BTreeSet<WorkId>, TemporalError> {
    Ok(resolve_scope(store, &ScopeEntry::Theme(theme.clone()), at, policy)?.works)
}

/// Themes that list `work` or one of its ancestors as a member.
pub fn themes_of(store: &GraphStore, work: &WorkId) -> Vec<ThemeId> {
    let mut lineage: BTreeSet<WorkId> = store.ancestors(work.as_str()).into_iter().collect();
    lineage.insert(work.clone());
    store.themes().filter(|t| t.members.iter().any(|m| lineage.contains(m))).map(|t| t.id.clone()).collect()
}
