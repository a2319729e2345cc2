//! Sentence templates for generated prose, one JSON file per language.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::model::DateStamp;

#[derive(Debug, Clone, Deserialize)]
pub struct Locale {
    pub months: Vec<String>,
    pub date_long: String,
    /// Verbs introducing an enumeration, e.g. `include` in "Rights include a, b and c".
    pub introducers: Vec<String>,
    pub conjunction: String,
    pub templates: BTreeMap<String, String>,
}

const SHIPPED: &[(&str, &str)] =
    &[("en", include_str!("../locales/en.json")), ("pt", include_str!("../locales/pt.json"))];

fn registry() -> &'static BTreeMap<&'static str, Locale> {
    static REGISTRY: OnceLock<BTreeMap<&'static str, Locale>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        SHIPPED.iter().map(|(tag, src)| (*tag, serde_json::from_str(src).expect("shipped locale parses"))).collect()
    })
}

impl Locale {
    /// Locale for `language`, by primary subtag; English when unknown.
    pub fn get(language: &str) -> &'static Locale {
        let primary = language.split(['-', '_']).next().unwrap_or(language).to_lowercase();
        let reg = registry();
        reg.get(primary.as_str()).unwrap_or_else(|| &reg["en"])
    }

    pub fn available() -> impl Iterator<Item = &'static str> {
        registry().keys().copied()
    }

    /// Template `key` with `{name}` placeholders substituted; falls back to
    /// the English template when this locale lacks the key.
    pub fn fill(&self, key: &str, args: &[(&str, &str)]) -> String {
        let template = self
            .templates
            .get(key)
            .or_else(|| Locale::get("en").templates.get(key))
            .unwrap_or_else(|| panic!("missing template {key}"));
        fill(template, args)
    }

    pub fn long_date(&self, d: DateStamp) -> String {
        fill(
            &self.date_long,
            &[
                ("month", &self.months[d.month() as usize - 1]),
                ("day", &d.day().to_string()),
                ("year", &d.year().to_string()),
            ],
        )
    }

    /// `a`, `a and b`, `a, b, and c`.
    pub fn join_list(&self, items: &[String]) -> String {
        match items {
            [] => String::new(),
            [one] => one.clone(),
            [a, b] => format!("{a} {} {b}", self.conjunction),
            [init @ .., last] => format!("{}, {} {last}", init.join(", "), self.conjunction),
        }
    }
}

/// Single-pass placeholder substitution; substituted values are never rescanned.
pub fn fill(template: &str, args: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + 64);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let hit = after.find('}').and_then(|close| {
            let name = &after[..close];
            args.iter().find(|(k, _)| *k == name).map(|(_, v)| (close, *v))
        });
        match hit {
            Some((close, value)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn long_dates() {
        let d: DateStamp = "1988-10-05".parse().unwrap();
        assert_eq!(Locale::get("en").long_date(d), "October 5, 1988");
        assert_eq!(Locale::get("pt-BR").long_date(d), "5 de outubro de 1988");
    }

    #[test]
    fn list_joining() {
        let en = Locale::get("en");
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert_eq!(en.join_list(&v(&["a"])), "a");
        assert_eq!(en.join_list(&v(&["a", "b"])), "a and b");
        assert_eq!(en.join_list(&v(&["a", "b", "c"])), "a, b, and c");
    }

    #[test]
    fn fill_handles_braces_and_values() {
        assert_eq!(fill("{{x}}", &[("x", "1, 2")]), "{1, 2}");
        assert_eq!(fill("{a}{b}", &[("a", "{b}"), ("b", "B")]), "{b}B");
        assert_eq!(fill("{unknown}", &[]), "{unknown}");
    }

    #[test]
    fn every_locale_has_every_english_key() {
        let en = Locale::get("en");
        for tag in Locale::available() {
            let loc = Locale::get(tag);
            assert_eq!(loc.months.len(), 12);
            for key in en.templates.keys() {
                assert!(loc.templates.contains_key(key), "{tag} lacks {key}");
            }
        }
    }
}
