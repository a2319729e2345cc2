//! Answer generation. The shipped renderer is template-based and extractive;
//! the [`Renderer`] trait is the slot for any other generator.

use serde::Serialize;

use super::annex::Policies;
use crate::locale::Locale;
use crate::model::DateStamp;
use crate::text::capitalize;

/// An enumeration found in a provision, e.g. "Rights include a, b, and c".
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Enumeration {
    /// Lower-cased head noun phrase, e.g. `social rights`.
    pub subject: String,
    /// Items in source order.
    pub items: Vec<String>,
}

/// Splits `text` at its first introducer verb and reads a comma-separated
/// list whose last item starts with the conjunction. Trailing clauses after
/// the last item are dropped. Needs at least two items.
pub fn extract_enumeration(text: &str, language: &str) -> Option<Enumeration> {
    let loc = Locale::get(language);
    let words: Vec<&str> = text.split_whitespace().collect();
    let pos = words.iter().position(|w| {
        let bare: String = w.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
        loc.introducers.contains(&bare)
    })?;
    if pos == 0 {
        return None;
    }
    let subject = words[..pos].join(" ");
    let mut subject_chars = subject.chars();
    let subject: String = {
        let first = subject_chars.next()?;
        first.to_lowercase().chain(subject_chars).collect()
    };
    let rest = words[pos + 1..].join(" ");
    let conj = format!("{} ", loc.conjunction);
    let clean = |s: &str| s.trim().trim_end_matches(['.', ';', ':']).trim().to_owned();
    let mut items = Vec::new();
    for segment in rest.split(", ") {
        if let Some(last) = segment.strip_prefix(&conj) {
            items.push(clean(last));
            break;
        }
        items.push(clean(segment));
    }
    if items.len() < 2 || items.iter().any(String::is_empty) {
        return None;
    }
    Some(Enumeration { subject, items })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum When {
    Year(i32),
    Date(DateStamp),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TextSection {
    /// Prose label of the provision, e.g. `Art. 6º`.
    pub label: String,
    pub norm: String,
    pub text: Option<String>,
    pub enumeration: Option<Enumeration>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PointInTimeView {
    pub language: String,
    pub when: When,
    pub sections: Vec<TextSection>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImpactLine {
    pub instrument: String,
    pub summary: String,
    pub is_amendment: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImpactGroup {
    pub label: String,
    pub lines: Vec<ImpactLine>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImpactView {
    pub language: String,
    pub target: String,
    /// Capitalized component type of the entry, e.g. `Chapter`.
    pub level: String,
    pub window: (DateStamp, DateStamp),
    pub groups: Vec<ImpactGroup>,
    pub dates: Vec<DateStamp>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PreState {
    pub until: DateStamp,
    pub instrument: String,
    pub ctv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProvenanceSection {
    pub target: String,
    pub pre: Option<PreState>,
    pub instrument: String,
    pub effective: DateStamp,
    pub post_from: DateStamp,
    pub post_ctv: String,
    /// Instrument short titles along the chain.
    pub chain: Vec<String>,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProvenanceView {
    pub language: String,
    pub term: String,
    pub sections: Vec<ProvenanceSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetrieveLine {
    pub score: f64,
    pub text_unit: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetrieveView {
    pub language: String,
    pub query: String,
    pub t: DateStamp,
    pub lines: Vec<RetrieveLine>,
}

/// Turns grounded, structured answer content into prose.
pub trait Renderer {
    fn point_in_time(&self, view: &PointInTimeView) -> String;
    fn impact(&self, view: &ImpactView) -> String;
    fn provenance(&self, view: &ProvenanceView) -> String;
    fn retrieve(&self, view: &RetrieveView) -> String;
}

/// Locale-driven deterministic templates.
#[derive(Debug, Clone, Copy, Default)]
pub struct TemplateRenderer;

impl Renderer for TemplateRenderer {
    fn point_in_time(&self, view: &PointInTimeView) -> String {
        let loc = Locale::get(&view.language);
        let when = match view.when {
            When::Year(y) => loc.fill("answer.year", &[("year", &y.to_string())]),
            When::Date(d) => loc.fill("answer.date", &[("date", &loc.long_date(d))]),
        };
        view.sections
            .iter()
            .map(|s| match (&s.enumeration, &s.text) {
                (Some(e), _) => loc.fill(
                    "answer.enumeration",
                    &[
                        ("when", &when),
                        ("subject", &e.subject),
                        ("target", &s.label),
                        ("norm", &s.norm),
                        ("items", &loc.join_list(&e.items)),
                    ],
                ),
                (None, Some(text)) => loc.fill(
                    "answer.verbatim",
                    &[("when", &when), ("target", &s.label), ("norm", &s.norm), ("text", text)],
                ),
                (None, None) => loc.fill("answer.empty", &[("when", &when), ("target", &s.label), ("norm", &s.norm)]),
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn impact(&self, view: &ImpactView) -> String {
        let loc = Locale::get(&view.language);
        let (from, to) = view.window;
        let whole_years = (from.month(), from.day(), to.month(), to.day()) == (1, 1, 12, 31);
        let (from_s, to_s) = if whole_years {
            (from.year().to_string(), to.year().to_string())
        } else {
            (from.to_string(), to.to_string())
        };
        let mut out = vec![loc.fill("impact.header", &[("target", &view.target), ("from", &from_s), ("to", &to_s)])];
        if view.groups.is_empty() {
            out.push(loc.fill(
                "impact.none",
                &[("target", &view.target), ("from", &from.to_string()), ("to", &to.to_string())],
            ));
        }
        for (gi, group) in view.groups.iter().enumerate() {
            let last_group = gi + 1 == view.groups.len();
            let n = group.lines.len();
            let noun = if group.lines.iter().all(|l| l.is_amendment) { "amendment" } else { "change" };
            let count_key = format!("impact.count.{noun}.{}", if n == 1 { "one" } else { "many" });
            let count = loc.fill(&count_key, &[("n", &n.to_string())]);
            let head = loc.fill("impact.group", &[("label", &group.label), ("count", &count)]);
            out.push(format!("{} {head}", if last_group { "'--" } else { "+--" }));
            let indent = if last_group { "    " } else { "|   " };
            for (li, line) in group.lines.iter().enumerate() {
                let branch = if li + 1 == n { "'--" } else { "+--" };
                out.push(format!("{indent}{branch} {}: {}", line.instrument, line.summary));
            }
        }
        let dates = view.dates.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
        out.push(loc.fill("impact.dates", &[("level", &view.level), ("dates", &dates)]));
        out.join("\n")
    }

    fn provenance(&self, view: &ProvenanceView) -> String {
        let loc = Locale::get(&view.language);
        let term = view.term.as_str();
        let mut blocks = Vec::new();
        for s in &view.sections {
            let mut out = vec![loc.fill("provenance.header", &[("term", term), ("target", &s.target)])];
            match &s.pre {
                Some(pre) => {
                    out.push(loc.fill("provenance.pre", &[("until", &pre.until.to_string()), ("term", term)]));
                    out.push(format!(
                        "  {}",
                        loc.fill("provenance.pre_source", &[("instrument", &pre.instrument), ("ctv", &pre.ctv)])
                    ));
                }
                None => out.push(loc.fill("provenance.pre_none", &[("term", term)])),
            }
            out.push(
                loc.fill("provenance.event", &[("instrument", &s.instrument), ("effective", &s.effective.to_string())]),
            );
            let effect_key = if s.pre.is_some() { "provenance.effect" } else { "provenance.effect_origin" };
            out.push(format!("  {}", loc.fill(effect_key, &[("term", term)])));
            out.push(loc.fill("provenance.post", &[("from", &s.post_from.to_string())]));
            out.push(format!("  {}", loc.fill("provenance.post_source", &[("ctv", &s.post_ctv)])));
            out.push(loc.fill("provenance.audit", &[]));
            let chain = s.chain.iter().map(|c| format!("[Action({c})]")).collect::<Vec<_>>().join(" -> ");
            out.push(format!("  {}", loc.fill("provenance.chain", &[("chain", &chain)])));
            out.push(format!(
                "  {}",
                loc.fill("provenance.confidence", &[("confidence", &format!("{:.1}", s.confidence))])
            ));
            blocks.push(out.join("\n"));
        }
        blocks.join("\n\n")
    }

    fn retrieve(&self, view: &RetrieveView) -> String {
        let loc = Locale::get(&view.language);
        let t = view.t.to_string();
        if view.lines.is_empty() {
            return loc.fill("retrieve.none", &[("query", &view.query), ("t", &t)]);
        }
        let mut out = vec![
            loc.fill("retrieve.header", &[("n", &view.lines.len().to_string()), ("query", &view.query), ("t", &t)])
        ];
        for (i, line) in view.lines.iter().enumerate() {
            let excerpt: String = line.text.chars().take(160).collect();
            let ellipsis = if line.text.chars().count() > 160 { "..." } else { "" };
            out.push(format!("{}. [{:.3}] {}: {excerpt}{ellipsis}", i + 1, line.score, line.text_unit));
        }
        out.join("\n")
    }
}

/// `Chapter`, `Article`, ... for the level line of impact summaries.
pub fn level_name(kind: &str) -> String {
    capitalize(kind)
}

/// One-line disclosure of every policy behind an answer.
pub fn footer(policies: &Policies) -> String {
    Locale::get(&policies.prose_language).fill(
        "footer",
        &[
            ("resolution", &format!("{:?}", policies.resolution_policy)),
            ("membership", &format!("{:?}", policies.membership_policy)),
            ("k", &policies.k.to_string()),
            ("strategy", &format!("{:?}", policies.strategy)),
            ("language", &policies.language),
            ("fallback", if policies.language_fallback { "on" } else { "off" }),
            ("t", &policies.resolved_t.to_string()),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_with_trailing_clause() {
        let text = "Social rights include education, health, work, leisure, security, social security, \
                    protection of motherhood and childhood, and assistance to the destitute, in the manner \
                    prescribed by this Constitution.";
        let e = extract_enumeration(text, "en").unwrap();
        assert_eq!(e.subject, "social rights");
        assert_eq!(
            e.items,
            [
                "education",
                "health",
                "work",
                "leisure",
                "security",
                "social security",
                "protection of motherhood and childhood",
                "assistance to the destitute"
            ]
        );
    }

    #[test]
    fn no_enumeration_without_introducer() {
        assert!(extract_enumeration("Placeholder text, nothing listed.", "en").is_none());
        assert!(extract_enumeration("Include a, and b.", "en").is_none());
    }

    #[test]
    fn impact_tree_layout() {
        let d = |s: &str| s.parse::<DateStamp>().unwrap();
        let line = |i: &str, s: &str| ImpactLine { instrument: i.into(), summary: s.into(), is_amendment: true };
        let view = ImpactView {
            language: "en".into(),
            target: "Chapter II".into(),
            level: "Chapter".into(),
            window: (d("2010-01-01"), d("2019-12-31")),
            groups: vec![
                ImpactGroup { label: "A".into(), lines: vec![line("X 1", "one"), line("X 2", "two")] },
                ImpactGroup { label: "B".into(), lines: vec![line("Y 1", "three")] },
            ],
            dates: vec![d("2010-02-04"), d("2015-09-15")],
        };
        let expected = "Impact Summary for Chapter II (2010-2019):\n\
                        +-- A: 2 amendments\n\
                        |   +-- X 1: one\n\
                        |   '-- X 2: two\n\
                        '-- B: 1 amendment\n    '-- Y 1: three\n\
                        Chapter-level impact dates: {2010-02-04, 2015-09-15}.";
        assert_eq!(TemplateRenderer.impact(&view), expected);
    }
}
