//! Point-in-time resolution: instants from temporal scopes, the version of a
//! work at an instant, scope membership policies and text materialization
//! through the aggregation closure.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{ClvId, CtvId, DateStamp, TemporalVersion, ThemeId, WorkId};
use crate::store::GraphStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResolutionPolicy {
    SnapshotLast,
    SnapshotFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MembershipPolicy {
    SnapshotAnchored,
    ActionTime,
    Lifetime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScopeKind {
    Instant {
        t: DateStamp,
    },
    /// Both ends inclusive.
    Interval {
        from: DateStamp,
        to: DateStamp,
    },
    Now,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TemporalScope {
    pub kind: ScopeKind,
    pub resolution_policy: ResolutionPolicy,
}

impl TemporalScope {
    pub fn instant(t: DateStamp) -> Self {
        Self { kind: ScopeKind::Instant { t }, resolution_policy: ResolutionPolicy::SnapshotLast }
    }

    pub fn interval(from: DateStamp, to: DateStamp) -> Result<Self, TemporalError> {
        if from > to {
            return Err(TemporalError::InvalidInterval { from, to });
        }
        Ok(Self { kind: ScopeKind::Interval { from, to }, resolution_policy: ResolutionPolicy::SnapshotLast })
    }

    pub fn now() -> Self {
        Self { kind: ScopeKind::Now, resolution_policy: ResolutionPolicy::SnapshotLast }
    }

    pub fn with_policy(mut self, policy: ResolutionPolicy) -> Self {
        self.resolution_policy = policy;
        self
    }
}

/// An evaluation instant together with the policy and window it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResolvedInstant {
    pub t: DateStamp,
    pub policy: ResolutionPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(DateStamp, DateStamp)>,
}

impl ResolvedInstant {
    pub fn at(t: DateStamp) -> Self {
        Self { t, policy: ResolutionPolicy::SnapshotLast, window: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemporalError {
    #[error("{work} was not yet enacted on {t} (first version from {first_start})")]
    NotYetEnacted { work: String, t: DateStamp, first_start: DateStamp },
    #[error("{work} was repealed on {repealed_on}, before {t}")]
    RepealedAt { work: String, t: DateStamp, repealed_on: DateStamp },
    #[error("unknown work {0}")]
    UnknownWork(String),
    #[error("unknown scope entry {0}")]
    UnknownEntry(String),
    #[error("{ctv} has no {language} language version and fallback is disabled")]
    MissingLanguage { ctv: String, language: String },
    #[error("invalid interval [{from}, {to}]")]
    InvalidInterval { from: DateStamp, to: DateStamp },
}

/// Instant → t; Now → clock; Interval → upper bound under SnapshotLast, lower
/// bound under SnapshotFirst.
pub fn resolve_instant(scope: &TemporalScope, clock: DateStamp) -> ResolvedInstant {
    let policy = scope.resolution_policy;
    match scope.kind {
        ScopeKind::Instant { t } => ResolvedInstant { t, policy, window: None },
        ScopeKind::Now => ResolvedInstant { t: clock, policy, window: None },
        ScopeKind::Interval { from, to } => ResolvedInstant {
            t: match policy {
                ResolutionPolicy::SnapshotLast => to,
                ResolutionPolicy::SnapshotFirst => from,
            },
            policy,
            window: Some((from, to)),
        },
    }
}

/// The unique version of `work` whose interval contains `t`.
pub fn ctv_at<'s>(store: &'s GraphStore, work: &str, t: DateStamp) -> Result<&'s TemporalVersion, TemporalError> {
    let versions = store.versions_of(work).map_err(|_| TemporalError::UnknownWork(work.to_owned()))?;
    let idx = versions.partition_point(|v| v.validity.valid_start <= t);
    if idx == 0 {
        let first_start = versions.first().map(|v| v.validity.valid_start).unwrap_or(t);
        return Err(TemporalError::NotYetEnacted { work: work.to_owned(), t, first_start });
    }
    let candidate = versions[idx - 1];
    if candidate.validity.contains(t) {
        Ok(candidate)
    } else {
        Err(TemporalError::RepealedAt {
            work: work.to_owned(),
            t,
            repealed_on: candidate.validity.valid_end.expect("closed interval"),
        })
    }
}

pub fn is_alive(store: &GraphStore, work: &str, t: DateStamp) -> bool {
    ctv_at(store, work, t).is_ok()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum ScopeEntry {
    Work(WorkId),
    Theme(ThemeId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResolvedScope {
    pub works: BTreeSet<WorkId>,
    pub membership: MembershipPolicy,
    pub at: ResolvedInstant,
}

/// Works in scope of `entry` (itself included) under `policy`.
///
/// * SnapshotAnchored: alive at the window start, or at `t` without a window.
/// * ActionTime: for each action touching the subtree and effective in the
///   window (or by `t`), the subtree members alive when it fired, including
///   those it closed.
/// * Lifetime: any version overlapping the window, or starting by `t`.
pub fn resolve_scope(
    store: &GraphStore,
    entry: &ScopeEntry,
    at: &ResolvedInstant,
    policy: MembershipPolicy,
) -> Result<ResolvedScope, TemporalError> {
    let roots: Vec<WorkId> = match entry {
        ScopeEntry::Work(w) => {
            if store.work(w.as_str()).is_none() {
                return Err(TemporalError::UnknownEntry(w.to_string()));
            }
            vec![w.clone()]
        }
        ScopeEntry::Theme(id) => {
            store.theme(id.as_str()).ok_or_else(|| TemporalError::UnknownEntry(id.to_string()))?.members.clone()
        }
    };
    let mut works = BTreeSet::new();
    for root in &roots {
        works.extend(members_under(store, root, at, policy));
    }
    Ok(ResolvedScope { works, membership: policy, at: *at })
}

fn members_under(store: &GraphStore, root: &WorkId, at: &ResolvedInstant, policy: MembershipPolicy) -> Vec<WorkId> {
    let subtree = store.subtree(root);
    match policy {
        MembershipPolicy::SnapshotAnchored => {
            let anchor = at.window.map_or(at.t, |(from, _)| from);
            subtree.into_iter().filter(|w| is_alive(store, w.as_str(), anchor)).collect()
        }
        MembershipPolicy::Lifetime => subtree
            .into_iter()
            .filter(|w| {
                store.versions_of(w.as_str()).unwrap_or_default().iter().any(|v| match at.window {
                    Some((from, to)) => v.validity.overlaps_days(from, to),
                    None => v.validity.valid_start <= at.t,
                })
            })
            .collect(),
        MembershipPolicy::ActionTime => {
            let in_window = |d: DateStamp| match at.window {
                Some((from, to)) => from <= d && d <= to,
                None => d <= at.t,
            };
            let dates: BTreeSet<DateStamp> = subtree
                .iter()
                .flat_map(|w| store.actions_touching(w.as_str()))
                .map(|a| a.effective_date)
                .filter(|d| in_window(*d))
                .collect();
            subtree
                .into_iter()
                .filter(|w| {
                    let versions = store.versions_of(w.as_str()).unwrap_or_default();
                    dates
                        .iter()
                        .any(|d| versions.iter().any(|v| v.validity.contains(*d) || v.validity.valid_end == Some(*d)))
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguagePolicy<'a> {
    pub requested: &'a str,
    /// Fall back to the norm's primary language when `requested` is missing.
    pub fallback: bool,
}

/// One text-bearing component of a materialized snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SnapshotEntry {
    pub work: WorkId,
    pub ctv: CtvId,
    pub clv: ClvId,
    pub language: String,
    pub text: String,
}

/// Text of `work` at `t`: depth-first over the aggregation closure, one entry
/// per text-bearing version, in ordinal order.
pub fn snapshot_text(
    store: &GraphStore,
    work: &str,
    t: DateStamp,
    language: LanguagePolicy<'_>,
) -> Result<Vec<SnapshotEntry>, TemporalError> {
    let root = ctv_at(store, work, t)?;
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(ctv) = stack.pop() {
        if store.is_text_bearing(ctv.id.as_str()) {
            let primary = store.work(ctv.work.as_str()).map(|w| w.language.as_str()).unwrap_or("");
            let clv = store
                .clv_for(ctv.id.as_str(), language.requested)
                .or_else(|| language.fallback.then(|| store.clv_for(ctv.id.as_str(), primary)).flatten())
                .ok_or_else(|| TemporalError::MissingLanguage {
                    ctv: ctv.id.to_string(),
                    language: language.requested.to_owned(),
                })?;
            out.push(SnapshotEntry {
                work: ctv.work.clone(),
                ctv: ctv.id.clone(),
                clv: clv.id.clone(),
                language: clv.language.clone(),
                text: store.clv_text(clv).to_owned(),
            });
        }
        stack.extend(ctv.aggregates.iter().rev().filter_map(|c| store.ctv(c.as_str())));
    }
    Ok(out)
}
