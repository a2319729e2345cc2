//! Reference corpus: Title II of the 1988 Brazilian Constitution reduced to
//! Art. 6, Art. 7 and Art. 12, four constitutional amendments, one theme,
//! one translation and the ground truth for the exemplar queries.
//!
//! Wording not available in the original language is given as English
//! stand-ins flagged `synthetic`; placeholder provisions carry the
//! `[synthetic filler]` marker in their text.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::eval::{Expected, ExpectedAction, ExpectedChain, TruthFile, TruthQuery, TRUTH_FORMAT_VERSION};
use crate::ingest::format::{
    ComponentRecord, EventFile, EventRecord, InstrumentMeta, NormMeta, SourceDocument, ThemeRecord, TranslationFile,
    INPUT_FORMAT_VERSION,
};
use crate::ingest::{ingest_files, IngestError, IngestReport};
use crate::model::{ActionId, ActionType, ComponentType, CtvId, DateStamp, WorkId};
use crate::planner::Query;
use crate::store::GraphStore;

pub const NORM_URN: &str = "urn:lex:br:federal:constituicao:1988-10-05;1988";
pub const CA26_URN: &str = "urn:lex:br:federal:emenda.constitucional:2000-02-14;26";
pub const CA64_URN: &str = "urn:lex:br:federal:emenda.constitucional:2010-02-04;64";
pub const CA72_URN: &str = "urn:lex:br:federal:emenda.constitucional:2013-04-02;72";
pub const CA90_URN: &str = "urn:lex:br:federal:emenda.constitucional:2015-09-15;90";
pub const THEMES_URN: &str = "urn:normgraph:themes";

/// Clock used by the truth queries.
pub const FIXTURE_CLOCK: &str = "2024-01-01";

pub const ART6_ORIGINAL: &str = "Social rights include education, health, work, leisure, security, social security, \
     protection of motherhood and childhood, and assistance to the destitute, in the manner prescribed by this \
     Constitution.";
pub const ART6_CA26: &str = "Social rights include education, health, work, housing, leisure, security, social \
     security, protection of motherhood and childhood, and assistance to the destitute, in the manner prescribed by \
     this Constitution.";
pub const ART6_CA64: &str = "Social rights include education, health, food, work, housing, leisure, security, social \
     security, protection of motherhood and childhood, and assistance to the destitute, in the manner prescribed by \
     this Constitution.";
pub const ART6_CA90: &str = "Social rights include education, health, food, work, housing, transportation, leisure, \
     security, social security, protection of motherhood and childhood, and assistance to the destitute, in the \
     manner prescribed by this Constitution.";

/// The eight rights in force in 1999, in textual order.
pub const RIGHTS_1999: [&str; 8] = [
    "education",
    "health",
    "work",
    "leisure",
    "security",
    "social security",
    "protection of motherhood and childhood",
    "assistance to the destitute",
];

pub fn date(s: &str) -> DateStamp {
    s.parse().expect("fixture dates are valid")
}

pub fn norm() -> WorkId {
    WorkId::new(NORM_URN)
}

/// Fixture work for a fragment id, e.g. `art6_cpt`.
pub fn work(fragment: &str) -> WorkId {
    norm().component(fragment)
}

pub fn ctv(fragment: &str, start: &str) -> CtvId {
    CtvId::derive(&work(fragment), date(start))
}

/// First event of an instrument, or the norm's enactment for `NORM_URN`.
pub fn action(instrument_urn: &str) -> ActionId {
    if instrument_urn == NORM_URN {
        ActionId::new(format!("{NORM_URN}#enactment"))
    } else {
        ActionId::new(format!("{instrument_urn}#1"))
    }
}

fn component(
    fragment: &str,
    component_type: ComponentType,
    heading: &str,
    label: &str,
    text: Option<&str>,
    children: Vec<ComponentRecord>,
) -> ComponentRecord {
    ComponentRecord {
        fragment_id: fragment.to_owned(),
        component_type,
        ordinal: None,
        heading: heading.to_owned(),
        label: Some(label.to_owned()),
        aliases: Vec::new(),
        text: text.map(str::to_owned),
        synthetic: text.is_some_and(|t| t.starts_with("[synthetic filler]")),
        children,
    }
}

fn with_aliases(mut rec: ComponentRecord, aliases: &[&str]) -> ComponentRecord {
    rec.aliases = aliases.iter().map(|a| (*a).to_owned()).collect();
    rec
}

fn filler(what: &str) -> String {
    format!("[synthetic filler] Placeholder wording for {what}.")
}

pub fn fixture_document() -> SourceDocument {
    use ComponentType::*;
    let mut art6_cpt = component("art6_cpt", Caput, "caput", "the caput of Art. 6º", Some(ART6_ORIGINAL), vec![]);
    // English stand-in for the original Portuguese wording.
    art6_cpt.synthetic = true;
    let art6 =
        with_aliases(component("art6", Article, "Art. 6º", "Art. 6º", None, vec![art6_cpt]), &["Article 6", "Art. 6"]);

    let f_art7_cpt = filler("the caput of Art. 7º");
    let f_inc1 = filler("item I of the caput of Art. 7º");
    let f_inc2 = filler("item II of the caput of Art. 7º");
    let f_par = filler("the sole paragraph of Art. 7º");
    let art7 = with_aliases(
        component(
            "art7",
            Article,
            "Art. 7º",
            "Art. 7º",
            None,
            vec![
                component(
                    "art7_cpt",
                    Caput,
                    "caput",
                    "the caput of Art. 7º",
                    Some(&f_art7_cpt),
                    vec![
                        component("art7_cpt_inc1", Item, "I", "item I of the caput of Art. 7º", Some(&f_inc1), vec![]),
                        component(
                            "art7_cpt_inc2",
                            Item,
                            "II",
                            "item II of the caput of Art. 7º",
                            Some(&f_inc2),
                            vec![],
                        ),
                    ],
                ),
                component(
                    "art7_par1u",
                    Paragraph,
                    "sole paragraph",
                    "the sole paragraph of Art. 7º",
                    Some(&f_par),
                    vec![],
                ),
            ],
        ),
        &["Article 7", "Art. 7"],
    );

    let f12 = |w: &str| filler(w);
    let art12 = with_aliases(
        component(
            "art12",
            Article,
            "Art. 12",
            "Art. 12",
            None,
            vec![component(
                "art12_cpt",
                Caput,
                "caput",
                "the caput of Art. 12",
                Some(&f12("the caput of Art. 12")),
                vec![
                    component(
                        "art12_cpt_inc1",
                        Item,
                        "I",
                        "item I of the caput of Art. 12",
                        Some(&f12("item I of the caput of Art. 12")),
                        vec![
                            component(
                                "art12_cpt_inc1_ali_a",
                                Item,
                                "a)",
                                "line a of item I of the caput of Art. 12",
                                Some(&f12("line a of item I of the caput of Art. 12")),
                                vec![],
                            ),
                            component(
                                "art12_cpt_inc1_ali_b",
                                Item,
                                "b)",
                                "line b of item I of the caput of Art. 12",
                                Some(&f12("line b of item I of the caput of Art. 12")),
                                vec![],
                            ),
                        ],
                    ),
                    component(
                        "art12_cpt_inc2",
                        Item,
                        "II",
                        "item II of the caput of Art. 12",
                        Some(&f12("item II of the caput of Art. 12")),
                        vec![],
                    ),
                ],
            )],
        ),
        &["Article 12"],
    );

    let chapter2 = with_aliases(
        component("tit2_cap2", Chapter, "Chapter II", "Chapter II", None, vec![art6, art7]),
        &["On Social Rights"],
    );
    let chapter3 = component("tit2_cap3", Chapter, "Chapter III", "Chapter III", None, vec![art12]);
    let title2 = component("tit2", Title, "Title II", "Title II", None, vec![chapter2, chapter3]);

    SourceDocument {
        format_version: INPUT_FORMAT_VERSION,
        norm: NormMeta {
            urn: NORM_URN.to_owned(),
            title: "the Brazilian Federal Constitution of 1988".to_owned(),
            short_title: Some("CF/1988".to_owned()),
            publication_date: date("1988-10-05"),
            language: "pt".to_owned(),
            narrative_language: Some("en".to_owned()),
            aliases: vec!["Brazilian Constitution".into(), "Constitution of 1988".into()],
            metadata: [
                ("alternative_title".to_owned(), "the 1988 Constitution of Brazil".to_owned()),
                ("succeeds".to_owned(), "the 1967 Constitution of Brazil".to_owned()),
            ]
            .into_iter()
            .collect(),
        },
        body: vec![title2],
    }
}

fn instrument(urn: &str, number: u32, long_date: &str, year: i32) -> InstrumentMeta {
    InstrumentMeta {
        urn: urn.to_owned(),
        title: format!("Constitutional Amendment no. {number}, of {long_date}"),
        short_title: format!("CA {number}/{year}"),
    }
}

fn reword(target: &str, enacted: &str, effective: &str, text: &str) -> EventRecord {
    EventRecord {
        action_type: ActionType::Amendment,
        source_provision: None,
        source_label: None,
        target: work(target).to_string(),
        enactment_date: date(enacted),
        effective_date: date(effective),
        new_text: Some([("pt".to_owned(), text.to_owned())].into_iter().collect()),
        new_components: None,
        summary: None,
        synthetic: true,
    }
}

pub fn fixture_events() -> Vec<(String, EventFile)> {
    let file =
        |instrument, events| EventFile { format_version: INPUT_FORMAT_VERSION, instrument, events, themes: vec![] };

    let mut ca26 = reword("art6_cpt", "2000-02-14", "2000-02-15", ART6_CA26);
    ca26.source_provision = Some("art1_cpt".to_owned());
    ca26.source_label = Some("the caput of its Art. 1º".to_owned());
    let ca64 = reword("art6_cpt", "2010-02-04", "2010-02-04", ART6_CA64);
    let mut ca72 = reword(
        "art7_par1u",
        "2013-04-02",
        "2013-04-02",
        "[synthetic filler] Placeholder wording for the sole paragraph of Art. 7º as amended.",
    );
    ca72.summary = Some("extended domestic workers' rights".to_owned());
    let ca90 = reword("art6_cpt", "2015-09-15", "2015-09-15", ART6_CA90);

    let themes = EventFile {
        format_version: INPUT_FORMAT_VERSION,
        instrument: InstrumentMeta {
            urn: THEMES_URN.to_owned(),
            title: "Thematic communities".to_owned(),
            short_title: "themes".to_owned(),
        },
        events: vec![],
        themes: vec![ThemeRecord {
            label: "Social Rights".to_owned(),
            description: "Laws, articles, and provisions related to social rights and the entitlements they guarantee."
                .to_owned(),
            language: Some("en".to_owned()),
            members: vec![work("tit2_cap2").to_string()],
        }],
    };

    vec![
        ("ca026-2000.satev.json".to_owned(), file(instrument(CA26_URN, 26, "February 14, 2000", 2000), vec![ca26])),
        ("ca064-2010.satev.json".to_owned(), file(instrument(CA64_URN, 64, "February 4, 2010", 2010), vec![ca64])),
        ("ca072-2013.satev.json".to_owned(), file(instrument(CA72_URN, 72, "April 2, 2013", 2013), vec![ca72])),
        ("ca090-2015.satev.json".to_owned(), file(instrument(CA90_URN, 90, "September 15, 2015", 2015), vec![ca90])),
        ("themes.satev.json".to_owned(), themes),
    ]
}

pub fn fixture_translation() -> TranslationFile {
    TranslationFile {
        format_version: INPUT_FORMAT_VERSION,
        norm: NORM_URN.to_owned(),
        language: "en".to_owned(),
        translations: [("art6_cpt@1988-10-05".to_owned(), ART6_ORIGINAL.to_owned())].into_iter().collect(),
        synthetic: true,
    }
}

fn truth_query(id: &str, query: Query, expected: Expected) -> TruthQuery {
    TruthQuery { id: id.to_owned(), query, clock: date(FIXTURE_CLOCK), expected }
}

/// Expected answers, written by hand from the event files above.
pub fn fixture_truth() -> TruthFile {
    let ctvs = |pairs: &[(&str, &str)]| Expected {
        ctvs: Some(pairs.iter().map(|(f, d)| ctv(f, d)).collect()),
        ..Expected::default()
    };
    let chain = |actions: &[&str]| Expected {
        chains: Some(vec![ExpectedChain {
            work: work("art6_cpt"),
            actions: actions.iter().map(|u| action(u)).collect(),
        }]),
        ..Expected::default()
    };
    let impact = Expected {
        actions: Some(vec![
            ExpectedAction { action: action(CA64_URN), work: work("art6_cpt") },
            ExpectedAction { action: action(CA72_URN), work: work("art7_par1u") },
            ExpectedAction { action: action(CA90_URN), work: work("art6_cpt") },
        ]),
        ..Expected::default()
    };
    TruthFile {
        format_version: TRUTH_FORMAT_VERSION,
        queries: vec![
            truth_query(
                "at-art6-1999",
                Query::point_in_time("art6").between(date("1999-01-01"), date("1999-12-31")),
                ctvs(&[("art6", "1988-10-05"), ("art6_cpt", "1988-10-05")]),
            ),
            truth_query(
                "at-art6-2000-02-14",
                Query::point_in_time("art6").at(date("2000-02-14")),
                ctvs(&[("art6", "1988-10-05"), ("art6_cpt", "1988-10-05")]),
            ),
            truth_query(
                "at-art6-2000-02-15",
                Query::point_in_time("art6").at(date("2000-02-15")),
                ctvs(&[("art6", "2000-02-15"), ("art6_cpt", "2000-02-15")]),
            ),
            truth_query(
                "impact-chapter2-2010s",
                Query::impact("Chapter II").between(date("2010-01-01"), date("2019-12-31")),
                impact,
            ),
            truth_query("provenance-food-art6", Query::provenance("food").target("art6"), chain(&[CA26_URN, CA64_URN])),
            truth_query("provenance-education-art6", Query::provenance("education").target("art6"), chain(&[NORM_URN])),
        ],
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("fixture types serialize");
    s.push('\n');
    s
}

/// Corpus files as `(file name, contents)`, in file-name order.
pub fn build_fixture_corpus() -> Vec<(String, String)> {
    let mut files: BTreeMap<String, String> = BTreeMap::new();
    files.insert("cf1988.satdoc.json".to_owned(), to_json(&fixture_document()));
    for (name, ev) in fixture_events() {
        files.insert(name, to_json(&ev));
    }
    files.insert("cf1988.en.satlang.json".to_owned(), to_json(&fixture_translation()));
    files.into_iter().collect()
}

pub fn fixture_truth_json() -> String {
    to_json(&fixture_truth())
}

/// Ingests the fixture corpus in memory.
pub fn fixture_store() -> Result<(GraphStore, IngestReport), IngestError> {
    ingest_files(&build_fixture_corpus())
}

/// Writes `corpus/*` and `fixture.sattruth.json` under `root`.
pub fn write_fixture_tree(root: impl AsRef<Path>) -> io::Result<()> {
    let root = root.as_ref();
    let corpus = root.join("corpus");
    fs::create_dir_all(&corpus)?;
    for (name, contents) in build_fixture_corpus() {
        fs::write(corpus.join(name), contents)?;
    }
    fs::write(root.join("fixture.sattruth.json"), fixture_truth_json())
}
