//! Natural-language text units generated from graph structure: action
//! descriptions, metadata sentences and change summaries.

use crate::locale::Locale;
use crate::model::{
    ActionNode, ActionType, Aspect, CtvId, DateStamp, NodeRef, TemporalVersion, TextUnit, TextUnitId, WorkNode,
};
use crate::store::GraphStore;
use crate::text::{added_tokens, capitalize, removed_tokens};

/// Content text of `ctv` in `language`, else in the norm's primary language,
/// else in any language.
pub fn ctv_text<'s>(store: &'s GraphStore, ctv: &TemporalVersion, language: &str) -> Option<&'s str> {
    let primary = store.work(ctv.work.as_str()).map(|w| w.language.as_str()).unwrap_or("");
    store
        .clv_for(ctv.id.as_str(), language)
        .or_else(|| store.clv_for(ctv.id.as_str(), primary))
        .or_else(|| store.clvs_of(ctv.id.as_str()).next())
        .map(|clv| store.clv_text(clv))
}

fn version_of<'s>(store: &'s GraphStore, ids: &[CtvId], work: &WorkNode) -> Option<&'s TemporalVersion> {
    ids.iter().filter_map(|id| store.ctv(id.as_str())).find(|c| c.work == work.id)
}

fn norm_label(store: &GraphStore, work: &WorkNode) -> String {
    store.work(work.id.norm_urn()).map_or_else(|| work.label.clone(), |n| n.label.clone())
}

/// Deterministic description of an action, naming the instrument and source
/// provision, the target, the termination and effective dates and the new text.
pub fn render_action_text(action: &ActionNode, store: &GraphStore, language: &str) -> String {
    let loc = Locale::get(language);
    let Some(target) = store.work(action.target.as_str()) else {
        return action.summary.clone();
    };
    let norm = norm_label(store, target);
    let source =
        action.source_label.as_deref().map(|s| loc.fill("action.source", &[("source", s)])).unwrap_or_default();
    let instrument = capitalize(&action.instrument.title);
    let effective = action.effective_date.to_string();
    let terminated = action.effective_date.pred().to_string();

    let prior = version_of(store, &action.terminates, target);
    let prior_label = |p: &TemporalVersion| {
        let original = store.action(p.produced_by.as_str()).is_some_and(|a| a.action_type == ActionType::Enactment);
        loc.fill(if original { "action.prior_original" } else { "action.prior_amended" }, &[])
    };
    let new_text = version_of(store, &action.produces, target).and_then(|c| ctv_text(store, c, language));

    match action.action_type {
        ActionType::Enactment => loc.fill(
            "action.enactment",
            &[("instrument", &instrument), ("enacted", &action.enactment_date.to_string()), ("effective", &effective)],
        ),
        ActionType::Repeal => {
            let (prior_kind, prior_start) =
                prior.map(|p| (prior_label(p), p.validity.valid_start.to_string())).unwrap_or_default();
            loc.fill(
                "action.repeal",
                &[
                    ("instrument", &instrument),
                    ("source", &source),
                    ("target", &target.label),
                    ("norm", &norm),
                    ("terminated", &terminated),
                    ("prior", &prior_kind),
                    ("prior_start", &prior_start),
                ],
            )
        }
        ActionType::Amendment => match prior {
            Some(p) => loc.fill(
                "action.amendment",
                &[
                    ("instrument", &instrument),
                    ("source", &source),
                    ("target", &target.label),
                    ("norm", &norm),
                    ("terminated", &terminated),
                    ("prior", &prior_label(p)),
                    ("prior_start", &p.validity.valid_start.to_string()),
                    ("effective", &effective),
                    ("text", new_text.unwrap_or("")),
                ],
            ),
            None => {
                let parent = target
                    .parent
                    .as_ref()
                    .and_then(|p| store.work(p.as_str()))
                    .map_or_else(|| norm.clone(), |p| p.label.clone());
                let key = if new_text.is_some() { "action.insertion" } else { "action.insertion_container" };
                loc.fill(
                    key,
                    &[
                        ("instrument", &instrument),
                        ("source", &source),
                        ("target", &target.label),
                        ("parent", &parent),
                        ("norm", &norm),
                        ("effective", &effective),
                        ("text", new_text.unwrap_or("")),
                    ],
                )
            }
        },
    }
}

/// One-line effect of a rewording, from a token-level diff.
pub fn rewording_summary(old: &str, new: &str, language: &str) -> String {
    let loc = Locale::get(language);
    let added = added_tokens(old, new).join(" ");
    let removed = removed_tokens(old, new).join(" ");
    match (added.is_empty(), removed.is_empty()) {
        (false, true) => loc.fill("summary.added", &[("added", &added)]),
        (true, false) => loc.fill("summary.removed", &[("removed", &removed)]),
        (false, false) => loc.fill("summary.replaced", &[("added", &added), ("removed", &removed)]),
        (true, true) => loc.fill("summary.reworded", &[]),
    }
}

fn metadata_unit(owner: NodeRef, key: &str, language: &str, text: String, synthetic: bool) -> TextUnit {
    TextUnit {
        id: TextUnitId::metadata(owner.id_str(), key),
        aspect: Aspect::Metadata,
        owner,
        language: language.to_owned(),
        text,
        embedding: Vec::new(),
        synthetic,
    }
}

/// One declarative sentence per metadata property of a work, or one sentence
/// describing the producing action of a component version. Norm-level
/// versions and works without metadata yield nothing.
pub fn textualize_metadata(node: &NodeRef, store: &GraphStore) -> Vec<TextUnit> {
    match node {
        NodeRef::Work(id) => {
            let Some(work) = store.work(id.as_str()) else { return Vec::new() };
            let language = store.narrative_language(id.as_str());
            let loc = Locale::get(&language);
            let subject = capitalize(&work.label);
            work.metadata
                .iter()
                .map(|(key, value)| {
                    let value = match value.parse::<DateStamp>() {
                        Ok(d) => loc.long_date(d),
                        Err(_) => value.clone(),
                    };
                    let template = format!("meta.{key}");
                    let text = if loc.templates.contains_key(&template) {
                        loc.fill(&template, &[("subject", &subject), ("value", &value)])
                    } else {
                        let key_words = key.replace('_', " ");
                        loc.fill("meta.generic", &[("key", &key_words), ("subject", &work.label), ("value", &value)])
                    };
                    metadata_unit(node.clone(), key, &language, text, false)
                })
                .collect()
        }
        NodeRef::Ctv(id) => {
            let Some(ctv) = store.ctv(id.as_str()) else { return Vec::new() };
            let Some(work) = store.work(ctv.work.as_str()) else { return Vec::new() };
            if work.parent.is_none() {
                return Vec::new();
            }
            let Some(producer) = store.action(ctv.produced_by.as_str()) else { return Vec::new() };
            let language = store.narrative_language(work.id.as_str());
            let loc = Locale::get(&language);
            let date = loc.long_date(ctv.validity.valid_start);
            let norm = norm_label(store, work);
            let subject = capitalize(&work.label);
            let text = if producer.action_type == ActionType::Enactment {
                loc.fill("meta.version.original", &[("subject", &subject), ("norm", &norm), ("date", &date)])
            } else {
                loc.fill(
                    "meta.version.amended",
                    &[
                        ("subject", &subject),
                        ("norm", &norm),
                        ("date", &date),
                        ("instrument", &producer.instrument.title),
                    ],
                )
            };
            vec![metadata_unit(node.clone(), "version", &language, text, work.synthetic)]
        }
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_variants() {
        let old = "education, health, work, housing";
        assert_eq!(rewording_summary(old, "education, health, food, work, housing", "en"), "added \"food\"");
        assert_eq!(rewording_summary(old, "education, work, housing", "en"), "removed \"health\"");
        assert_eq!(rewording_summary(old, "education, care, work, housing", "en"), "replaced \"health\" with \"care\"");
        assert_eq!(rewording_summary(old, "Education; health. Work, housing", "en"), "reworded");
    }
}
