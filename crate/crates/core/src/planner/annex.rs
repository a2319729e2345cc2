//! Machine-readable answer record. Field order and names are part of the
//! versioned schema; every field is always present.

use serde::{Deserialize, Serialize};

use crate::model::{ActionId, ActionType, ClvId, CtvId, DateStamp, TextUnitId, WorkId};
use crate::retrieval::RetrievalMode;
use crate::temporal::{MembershipPolicy, ResolutionPolicy};

use super::{Pattern, Step, Strategy};

pub const ANNEX_FORMAT_VERSION: u32 = 1;

/// Every policy that influenced an answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policies {
    pub resolution_policy: ResolutionPolicy,
    pub membership_policy: MembershipPolicy,
    pub k: usize,
    pub strategy: Strategy,
    pub retrieval_mode: RetrievalMode,
    /// Content language requested for text.
    pub language: String,
    pub language_fallback: bool,
    /// Language of the generated prose.
    pub prose_language: String,
    pub resolved_t: DateStamp,
    pub window: Option<(DateStamp, DateStamp)>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Citation {
    pub work: WorkId,
    pub ctv: CtvId,
    pub clv: Option<ClvId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnexAction {
    pub id: ActionId,
    pub action_type: ActionType,
    pub instrument: String,
    pub target: WorkId,
    /// Impact analysis: the child of the entry under which the action is grouped.
    pub group: Option<WorkId>,
    pub enactment_date: DateStamp,
    pub effective_date: DateStamp,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateRef {
    pub ctv: CtvId,
    pub valid_from: DateStamp,
    /// Last day in force; `None` while still in force.
    pub valid_until: Option<DateStamp>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnexChain {
    pub work: WorkId,
    /// Ordered causal chain; consecutive actions share a version.
    pub actions: Vec<ActionId>,
    pub pre_state: Option<StateRef>,
    pub causal_action: ActionId,
    pub post_state: StateRef,
    pub effect: String,
    pub match_kind: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnexHit {
    pub text_unit: TextUnitId,
    pub score: f64,
    pub work: WorkId,
    pub ctv: CtvId,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annex {
    pub format_version: u32,
    pub pattern: Pattern,
    pub policies: Policies,
    pub steps: Vec<Step>,
    pub citations: Vec<Citation>,
    pub actions: Vec<AnnexAction>,
    pub chains: Vec<AnnexChain>,
    pub impact_dates: Vec<DateStamp>,
    pub hits: Vec<AnnexHit>,
    pub confidence: f64,
    pub rendered_text: String,
}

/// Error record emitted in place of an annex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub error: ErrorBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
    pub resolved_t: Option<DateStamp>,
}
