//! On-disk input formats: articulated documents (`*.satdoc.json`), event
//! files (`*.satev.json`) and translation files (`*.satlang.json`).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::{ActionType, ComponentType, DateStamp};

use super::IngestError;

pub const INPUT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDocument {
    pub format_version: u32,
    pub norm: NormMeta,
    #[serde(default)]
    pub body: Vec<ComponentRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormMeta {
    pub urn: String,
    /// Noun phrase used in prose, e.g. `the Brazilian Federal Constitution of 1988`.
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub short_title: Option<String>,
    pub publication_date: DateStamp,
    pub language: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub narrative_language: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub fragment_id: String,
    pub component_type: ComponentType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordinal: Option<u32>,
    pub heading: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub synthetic: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<ComponentRecord>,
}

impl ComponentRecord {
    /// Whether this record must (and may) carry text.
    pub fn requires_text(&self) -> Option<bool> {
        match self.component_type {
            t if t.always_text_bearing() => Some(true),
            t if t.is_container() => Some(false),
            ComponentType::Article => Some(self.children.is_empty()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstrumentMeta {
    pub urn: String,
    pub title: String,
    pub short_title: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventFile {
    pub format_version: u32,
    pub instrument: InstrumentMeta,
    #[serde(default)]
    pub events: Vec<EventRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub themes: Vec<ThemeRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub action_type: ActionType,
    /// Fragment of the commanding provision inside the instrument.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_provision: Option<String>,
    /// Prose label of the commanding provision, e.g. `the caput of its Art. 1º`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_label: Option<String>,
    /// Urn of the affected work; for insertions, the parent receiving the new subtree.
    pub target: String,
    pub enactment_date: DateStamp,
    pub effective_date: DateStamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub new_text: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub new_components: Option<ComponentRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub synthetic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThemeRecord {
    pub label: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
    #[serde(default)]
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationFile {
    pub format_version: u32,
    pub norm: String,
    pub language: String,
    /// `fragment` (latest version) or `fragment@YYYY-MM-DD` → text.
    pub translations: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub synthetic: bool,
}

fn check_version(found: u32) -> Result<(), IngestError> {
    if found == INPUT_FORMAT_VERSION {
        Ok(())
    } else {
        Err(IngestError::Format(format!("unsupported format_version {found}")))
    }
}

/// Parses and structurally validates an articulated document.
pub fn parse_document(input: &str) -> Result<SourceDocument, IngestError> {
    let doc: SourceDocument = serde_json::from_str(input).map_err(|e| IngestError::Format(e.to_string()))?;
    check_version(doc.format_version)?;
    validate_document(&doc)?;
    Ok(doc)
}

pub fn validate_document(doc: &SourceDocument) -> Result<(), IngestError> {
    let mut seen = BTreeSet::new();
    validate_children(&doc.body, None, &mut seen)
}

/// Checks a subtree to be placed under a parent of type `parent`.
pub fn validate_subtree(
    record: &ComponentRecord,
    parent: Option<ComponentType>,
    seen: &mut BTreeSet<String>,
) -> Result<(), IngestError> {
    validate_children(std::slice::from_ref(record), parent, seen)
}

fn validate_children(
    records: &[ComponentRecord],
    parent: Option<ComponentType>,
    seen: &mut BTreeSet<String>,
) -> Result<(), IngestError> {
    for (i, r) in records.iter().enumerate() {
        if r.fragment_id.is_empty() || r.fragment_id.contains(['!', '@', '#']) {
            return Err(IngestError::StructureError {
                fragment: r.fragment_id.clone(),
                detail: "fragment id must be non-empty and free of '!', '@', '#'".into(),
            });
        }
        if !seen.insert(r.fragment_id.clone()) {
            return Err(IngestError::DuplicateFragment(r.fragment_id.clone()));
        }
        if !r.component_type.allowed_under(parent) {
            return Err(IngestError::StructureError {
                fragment: r.fragment_id.clone(),
                detail: format!(
                    "{:?} cannot be nested under {}",
                    r.component_type,
                    parent.map_or("the norm root".to_owned(), |p| format!("{p:?}"))
                ),
            });
        }
        if let Some(ord) = r.ordinal {
            if ord as usize != i {
                return Err(IngestError::StructureError {
                    fragment: r.fragment_id.clone(),
                    detail: format!("ordinal {ord} at position {i}"),
                });
            }
        }
        match (r.requires_text(), &r.text) {
            (Some(true), None) => {
                return Err(IngestError::StructureError {
                    fragment: r.fragment_id.clone(),
                    detail: format!("{:?} requires text", r.component_type),
                })
            }
            (Some(false), Some(_)) => {
                return Err(IngestError::StructureError {
                    fragment: r.fragment_id.clone(),
                    detail: format!("{:?} with subdivisions cannot carry text", r.component_type),
                })
            }
            _ => {}
        }
        validate_children(&r.children, Some(r.component_type), seen)?;
    }
    Ok(())
}

pub fn parse_event_file(input: &str) -> Result<EventFile, IngestError> {
    let file: EventFile = serde_json::from_str(input).map_err(|e| IngestError::Format(e.to_string()))?;
    check_version(file.format_version)?;
    for pair in file.events.windows(2) {
        if pair[1].effective_date < pair[0].effective_date {
            return Err(IngestError::Format(format!(
                "effective dates decrease within file ({} after {})",
                pair[1].effective_date, pair[0].effective_date
            )));
        }
    }
    Ok(file)
}

pub fn parse_translation_file(input: &str) -> Result<TranslationFile, IngestError> {
    let file: TranslationFile = serde_json::from_str(input).map_err(|e| IngestError::Format(e.to_string()))?;
    check_version(file.format_version)?;
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(body: &str) -> String {
        format!(
            r#"{{"format_version":1,"norm":{{"urn":"urn:x","title":"the X Act","publication_date":"2001-01-01","language":"en"}},"body":{body}}}"#
        )
    }

    #[test]
    fn minimal_document_parses() {
        let d =
            parse_document(&doc(r#"[{"fragment_id":"art1","component_type":"Article","heading":"Art. 1","children":[
                {"fragment_id":"art1_cpt","component_type":"Caput","heading":"caput","text":"Only text."}]}]"#))
            .unwrap();
        assert_eq!(d.body[0].children[0].text.as_deref(), Some("Only text."));
    }

    #[test]
    fn item_under_chapter_rejected() {
        let err = parse_document(&doc(
            r#"[{"fragment_id":"cap1","component_type":"Chapter","heading":"Chapter I","children":[
                {"fragment_id":"i","component_type":"Item","heading":"I","text":"x"}]}]"#,
        ))
        .unwrap_err();
        assert!(matches!(err, IngestError::StructureError { .. }), "{err:?}");
    }

    #[test]
    fn duplicate_fragment_rejected() {
        let err = parse_document(&doc(r#"[{"fragment_id":"a","component_type":"Article","heading":"A","text":"x"},
                {"fragment_id":"a","component_type":"Article","heading":"B","text":"y"}]"#))
        .unwrap_err();
        assert!(matches!(err, IngestError::DuplicateFragment(f) if f == "a"));
    }

    #[test]
    fn text_presence_rules() {
        let container_with_text = doc(r#"[{"fragment_id":"t","component_type":"Title","heading":"T","text":"no"}]"#);
        assert!(parse_document(&container_with_text).is_err());
        let caput_without_text = doc(r#"[{"fragment_id":"a","component_type":"Article","heading":"A","children":[
                {"fragment_id":"c","component_type":"Caput","heading":"caput"}]}]"#);
        assert!(parse_document(&caput_without_text).is_err());
    }

    #[test]
    fn leaf_text_is_preserved_byte_exactly() {
        let text = "  Spaces,\ttabs — and “quotes” stay.  ";
        let json = serde_json::to_string(text).unwrap();
        let d = parse_document(&doc(&format!(
            r#"[{{"fragment_id":"a","component_type":"Article","heading":"A","text":{json}}}]"#
        )))
        .unwrap();
        assert_eq!(d.body[0].text.as_deref(), Some(text));
    }

    #[test]
    fn decreasing_event_dates_rejected() {
        let f = r#"{"format_version":1,"instrument":{"urn":"u","title":"T","short_title":"T"},"events":[
            {"action_type":"Repeal","target":"urn:x!a","enactment_date":"2002-01-01","effective_date":"2002-01-01"},
            {"action_type":"Repeal","target":"urn:x!b","enactment_date":"2001-01-01","effective_date":"2001-01-01"}]}"#;
        assert!(parse_event_file(f).is_err());
    }
}
