//! Node and edge types of the versioned document graph.
//!
//! The graph separates four layers:
//!
//! * [`WorkNode`]: the abstract identity of a norm or one of its hierarchical
//!   components, stable across amendments.
//! * [`TemporalVersion`]: a date-stamped, language-agnostic state of a work
//!   with a half-open [`ValidityInterval`]. Parent versions *aggregate* child
//!   versions by id, so unchanged children are shared between parent states.
//! * [`LanguageVersion`]: the wording of one temporal version in one language.
//!   It is the only owner of content [`TextUnit`]s.
//! * [`ActionNode`]: a reified legislative event that terminates and/or
//!   produces temporal versions.
//!
//! All types are plain values; the [`crate::store::GraphStore`] owns them and
//! maintains the indexes.

use std::borrow::Borrow;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id!(
    /// Canonical `urn:lex`-style identifier of a norm or component.
    ///
    /// Component urns extend their norm's urn with a `!fragment` suffix, e.g.
    /// `urn:lex:br:federal:constituicao:1988-10-05;1988!art6_cpt`.
    WorkId
);
string_id!(
    /// `<work urn>@<valid_start>`.
    CtvId
);
string_id!(
    /// `<ctv id>#<language>`.
    ClvId
);
string_id!(ActionId);
string_id!(TextUnitId);
string_id!(ThemeId);

impl WorkId {
    /// Urn of the norm this work belongs to (the part before `!`).
    pub fn norm_urn(&self) -> &str {
        self.0.split('!').next().unwrap_or(&self.0)
    }

    pub fn norm(&self) -> WorkId {
        WorkId::new(self.norm_urn())
    }

    /// Fragment path after `!`, `None` for a norm.
    pub fn fragment(&self) -> Option<&str> {
        self.0.split_once('!').map(|(_, f)| f)
    }

    pub fn is_norm(&self) -> bool {
        !self.0.contains('!')
    }

    /// Component urn for `fragment` under this work's norm.
    pub fn component(&self, fragment: &str) -> WorkId {
        WorkId(format!("{}!{}", self.norm_urn(), fragment))
    }
}

impl CtvId {
    pub fn derive(work: &WorkId, valid_start: DateStamp) -> Self {
        CtvId(format!("{work}@{valid_start}"))
    }
}

impl ClvId {
    pub fn derive(ctv: &CtvId, language: &str) -> Self {
        ClvId(format!("{ctv}#{language}"))
    }
}

impl TextUnitId {
    pub fn content(clv: &ClvId) -> Self {
        TextUnitId(format!("tu:{clv}"))
    }

    pub fn action(action: &ActionId) -> Self {
        TextUnitId(format!("tu:{action}"))
    }

    pub fn theme(theme: &ThemeId) -> Self {
        TextUnitId(format!("tu:{theme}"))
    }

    pub fn metadata(owner: &str, key: &str) -> Self {
        TextUnitId(format!("tu:{owner}#meta:{key}"))
    }
}

/// Calendar date at day precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DateStamp(NaiveDate);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid date `{0}`, expected YYYY-MM-DD")]
pub struct DateParseError(pub String);

impl DateStamp {
    pub fn from_ymd(year: i32, month: u32, day: u32) -> Option<Self> {
        NaiveDate::from_ymd_opt(year, month, day).map(DateStamp)
    }

    pub fn year(self) -> i32 {
        self.0.year()
    }

    pub fn month(self) -> u32 {
        self.0.month()
    }

    pub fn day(self) -> u32 {
        self.0.day()
    }

    /// The previous calendar day.
    pub fn pred(self) -> Self {
        DateStamp(self.0.pred_opt().expect("date underflow"))
    }

    pub fn succ(self) -> Self {
        DateStamp(self.0.succ_opt().expect("date overflow"))
    }

    pub fn add_days(self, days: i64) -> Self {
        DateStamp(self.0 + chrono::Duration::days(days))
    }

    pub fn days_since(self, other: DateStamp) -> i64 {
        (self.0 - other.0).num_days()
    }

    pub fn as_naive(self) -> NaiveDate {
        self.0
    }
}

impl From<NaiveDate> for DateStamp {
    fn from(d: NaiveDate) -> Self {
        DateStamp(d)
    }
}

impl FromStr for DateStamp {
    type Err = DateParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map(DateStamp).map_err(|_| DateParseError(s.to_owned()))
    }
}

impl fmt::Display for DateStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format("%Y-%m-%d"))
    }
}

/// Half-open validity interval `[valid_start, valid_end)`; an absent end means
/// the version is still in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ValidityInterval {
    pub valid_start: DateStamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid_end: Option<DateStamp>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("empty validity interval [{start}, {end})")]
pub struct EmptyInterval {
    pub start: DateStamp,
    pub end: DateStamp,
}

impl ValidityInterval {
    pub fn new(valid_start: DateStamp, valid_end: Option<DateStamp>) -> Result<Self, EmptyInterval> {
        match valid_end {
            Some(end) if end <= valid_start => Err(EmptyInterval { start: valid_start, end }),
            _ => Ok(Self { valid_start, valid_end }),
        }
    }

    pub fn open(valid_start: DateStamp) -> Self {
        Self { valid_start, valid_end: None }
    }

    /// `valid_start <= t < coalesce(valid_end, +inf)`.
    pub fn contains(&self, t: DateStamp) -> bool {
        self.valid_start <= t && self.valid_end.is_none_or(|end| t < end)
    }

    pub fn is_open(&self) -> bool {
        self.valid_end.is_none()
    }

    /// True if the interval shares at least one day with `[from, to]` (both inclusive).
    pub fn overlaps_days(&self, from: DateStamp, to: DateStamp) -> bool {
        self.valid_start <= to && self.valid_end.is_none_or(|end| end > from)
    }

    /// Last day on which the version was in force.
    pub fn last_day(&self) -> Option<DateStamp> {
        self.valid_end.map(DateStamp::pred)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum WorkKind {
    Norm,
    Component,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ComponentType {
    Title,
    Chapter,
    Section,
    Article,
    Caput,
    Paragraph,
    Item,
    Other,
}

impl ComponentType {
    /// Whether `self` may appear directly under `parent` (`None` = the norm root).
    pub fn allowed_under(self, parent: Option<ComponentType>) -> bool {
        use ComponentType::*;
        matches!(
            (self, parent),
            (Other, _)
                | (_, Some(Other))
                | (Title, None)
                | (Chapter, None | Some(Title))
                | (Section, Some(Chapter))
                | (Article, None | Some(Title | Chapter | Section))
                | (Caput | Paragraph, Some(Article))
                | (Item, Some(Caput | Paragraph | Item))
        )
    }

    /// Types whose records always carry their own wording.
    pub fn always_text_bearing(self) -> bool {
        matches!(self, ComponentType::Caput | ComponentType::Paragraph | ComponentType::Item)
    }

    pub fn is_container(self) -> bool {
        matches!(self, ComponentType::Title | ComponentType::Chapter | ComponentType::Section)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkNode {
    pub id: WorkId,
    pub kind: WorkKind,
    pub component_type: ComponentType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<WorkId>,
    pub ordinal: u32,
    /// Short heading used in trees and reports, e.g. `Art. 6º` or `caput`.
    pub heading: String,
    /// Noun phrase used in generated prose, e.g. `the caput of Art. 6º`.
    pub label: String,
    /// Primary language of the norm this work belongs to.
    pub language: String,
    /// Language of generated metadata and action descriptions (norms only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub narrative_language: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
    #[serde(default, skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub metadata: std::collections::BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub synthetic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalVersion {
    pub id: CtvId,
    pub work: WorkId,
    pub validity: ValidityInterval,
    /// Child versions in child-ordinal order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aggregates: Vec<CtvId>,
    pub produced_by: ActionId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminated_by: Option<ActionId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageVersion {
    pub id: ClvId,
    pub temporal_version: CtvId,
    pub language: String,
    pub text_unit: TextUnitId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActionType {
    Enactment,
    Amendment,
    Repeal,
}

/// The normative instrument that commands an action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instrument {
    pub urn: String,
    /// Full title used in prose, e.g. `Constitutional Amendment no. 26, of February 14, 2000`.
    pub title: String,
    /// Short citation form, e.g. `CA 26/2000`.
    pub short_title: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionNode {
    pub id: ActionId,
    pub action_type: ActionType,
    pub instrument: Instrument,
    /// Commanding provision of the instrument; external to the graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_provision: Option<WorkId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_label: Option<String>,
    /// Primary affected work: the amended or repealed work, the root of an
    /// inserted subtree, or the norm for an enactment.
    pub target: WorkId,
    pub enactment_date: DateStamp,
    pub effective_date: DateStamp,
    /// Versions directly closed by the command.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terminates: Vec<CtvId>,
    /// Versions directly created by the command.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub produces: Vec<CtvId>,
    /// Ancestor versions closed by upward aggregation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub propagated_terminates: Vec<CtvId>,
    /// Ancestor versions created by upward aggregation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub propagated_produces: Vec<CtvId>,
    /// One-line effect, e.g. `added "food"`.
    pub summary: String,
    pub description_unit: TextUnitId,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub synthetic: bool,
}

impl ActionNode {
    pub fn all_terminated(&self) -> impl Iterator<Item = &CtvId> {
        self.terminates.iter().chain(&self.propagated_terminates)
    }

    pub fn all_produced(&self) -> impl Iterator<Item = &CtvId> {
        self.produces.iter().chain(&self.propagated_produces)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Aspect {
    Content,
    ActionDescription,
    Metadata,
    ThemeDescription,
}

impl Aspect {
    pub const ALL: [Aspect; 4] =
        [Aspect::Content, Aspect::ActionDescription, Aspect::Metadata, Aspect::ThemeDescription];
}

/// Typed reference to the node owning a text unit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id")]
pub enum NodeRef {
    Work(WorkId),
    Ctv(CtvId),
    Clv(ClvId),
    Action(ActionId),
    Theme(ThemeId),
}

impl NodeRef {
    pub fn id_str(&self) -> &str {
        match self {
            NodeRef::Work(id) => id.as_str(),
            NodeRef::Ctv(id) => id.as_str(),
            NodeRef::Clv(id) => id.as_str(),
            NodeRef::Action(id) => id.as_str(),
            NodeRef::Theme(id) => id.as_str(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextUnit {
    pub id: TextUnitId,
    pub aspect: Aspect,
    pub owner: NodeRef,
    pub language: String,
    pub text: String,
    pub embedding: Vec<f32>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub synthetic: bool,
}

impl TextUnit {
    /// Units with an all-zero embedding (no tokens) are excluded from vector ranking.
    pub fn is_retrievable(&self) -> bool {
        self.embedding.iter().any(|x| *x != 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThemeNode {
    pub id: ThemeId,
    pub label: String,
    pub description_unit: TextUnitId,
    pub members: Vec<WorkId>,
}

impl ThemeId {
    pub fn from_label(label: &str) -> Self {
        let slug: String = label
            .chars()
            .map(|c| if c.is_alphanumeric() { c.to_lowercase().next().unwrap_or(c) } else { '-' })
            .collect();
        let slug = slug.split('-').filter(|s| !s.is_empty()).collect::<Vec<_>>().join("-");
        ThemeId(format!("theme:{slug}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> DateStamp {
        s.parse().unwrap()
    }

    #[test]
    fn interval_contains_examples() {
        let original = ValidityInterval::new(d("1988-10-05"), Some(d("2000-02-15"))).unwrap();
        assert!(original.contains(d("1999-06-01")));

        let open = ValidityInterval::open(d("1988-10-05"));
        assert!(open.contains(d("1988-10-05")));

        let closed = ValidityInterval::new(d("2000-02-15"), Some(d("2010-02-04"))).unwrap();
        assert!(!closed.contains(d("2010-02-04")));
        assert!(closed.contains(d("2010-02-03")));
        assert_eq!(closed.last_day(), Some(d("2010-02-03")));
    }

    #[test]
    fn empty_interval_rejected() {
        assert!(ValidityInterval::new(d("2000-01-01"), Some(d("2000-01-01"))).is_err());
        assert!(ValidityInterval::new(d("2000-01-02"), Some(d("2000-01-01"))).is_err());
    }

    #[test]
    fn date_parse_and_display() {
        assert_eq!(d("2000-02-15").to_string(), "2000-02-15");
        assert!("2000-02-30".parse::<DateStamp>().is_err());
        assert!("15/02/2000".parse::<DateStamp>().is_err());
        assert_eq!(d("2000-03-01").pred(), d("2000-02-29"));
    }

    #[test]
    fn work_id_fragments() {
        let art = WorkId::new("urn:lex:br:federal:constituicao:1988-10-05;1988!art6_cpt");
        assert_eq!(art.norm_urn(), "urn:lex:br:federal:constituicao:1988-10-05;1988");
        assert_eq!(art.fragment(), Some("art6_cpt"));
        assert!(!art.is_norm());
        assert_eq!(art.component("art7").fragment(), Some("art7"));
        assert!(art.norm().is_norm());
    }

    #[test]
    fn component_hierarchy() {
        use ComponentType::*;
        assert!(Item.allowed_under(Some(Caput)));
        assert!(!Item.allowed_under(Some(Chapter)));
        assert!(!Item.allowed_under(Some(Title)));
        assert!(Article.allowed_under(None));
        assert!(Caput.allowed_under(Some(Article)));
        assert!(!Caput.allowed_under(Some(Chapter)));
    }

    #[test]
    fn theme_slug() {
        assert_eq!(ThemeId::from_label("Social Rights").as_str(), "theme:social-rights");
        assert_eq!(ThemeId::from_label("  Social -- Security ").as_str(), "theme:social-security");
    }
}
