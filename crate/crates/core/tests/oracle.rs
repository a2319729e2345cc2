//! Snapshot materialization against a brute-force replay of the inputs.

mod common;

use std::time::Instant;

use common::{replay, synthetic_corpus, Synthetic};
use normgraph::fixtures;
use normgraph::ingest::format::{EventFile, SourceDocument};
use normgraph::ingest::ingest_files;
use normgraph::temporal::{snapshot_text, LanguagePolicy};
use normgraph::{validate_graph, DateStamp, GraphStore};

const PT: LanguagePolicy<'static> = LanguagePolicy { requested: "pt", fallback: false };

fn engine_text(store: &GraphStore, norm: &str, t: DateStamp) -> Vec<(String, String)> {
    match snapshot_text(store, norm, t, PT) {
        Ok(entries) => entries.into_iter().filter_map(|e| e.work.fragment().map(|f| (f.to_owned(), e.text))).collect(),
        Err(_) => vec![],
    }
}

/// Every change date, the day before each and one day past the last.
fn probe_dates(dates: &[DateStamp]) -> Vec<DateStamp> {
    let mut v: Vec<DateStamp> = dates.iter().flat_map(|d| [d.pred(), *d, d.succ()]).collect();
    v.sort();
    v.dedup();
    v
}

fn check(syn: &Synthetic) {
    let (store, report) = ingest_files(&syn.files).unwrap_or_else(|e| panic!("seed {}: {e}", syn.seed));
    assert!(report.violations.is_empty(), "seed {}: {:?}", syn.seed, report.violations);
    assert!(validate_graph(&store).is_empty());
    let norm = syn.norm();
    for t in probe_dates(&syn.change_dates()) {
        let expected = replay(&syn.doc, &syn.events, t);
        let got = engine_text(&store, norm.as_str(), t);
        assert_eq!(got, expected, "seed {} at {t}", syn.seed);
    }
}

#[test]
fn fixture_snapshots_match_replay_at_every_event_date() {
    let files = fixtures::build_fixture_corpus();
    let (store, _) = ingest_files(&files).unwrap();
    let doc: SourceDocument =
        serde_json::from_str(&files.iter().find(|(n, _)| n.ends_with(".satdoc.json")).unwrap().1).unwrap();
    let mut events = Vec::new();
    for (_, body) in files.iter().filter(|(n, _)| n.ends_with(".satev.json")) {
        let f: EventFile = serde_json::from_str(body).unwrap();
        events.extend(f.events);
    }
    events.sort_by_key(|e| e.effective_date);
    let mut dates: Vec<DateStamp> = events.iter().map(|e| e.effective_date).collect();
    dates.push(doc.norm.publication_date);
    assert!(dates.len() >= 5);
    for t in probe_dates(&dates) {
        assert_eq!(engine_text(&store, fixtures::NORM_URN, t), replay(&doc, &events, t), "fixture at {t}");
    }
}

#[test]
fn two_hundred_random_corpora_match_replay() {
    let started = Instant::now();
    let mut total_events = 0;
    for seed in 0..200 {
        let syn = synthetic_corpus(seed);
        assert!(syn.doc.body.len() <= common::MAX_COMPONENTS);
        assert!(syn.events.len() <= common::MAX_EVENTS);
        total_events += syn.events.len();
        check(&syn);
    }
    // The generator must actually exercise the event path.
    assert!(total_events > 600, "only {total_events} events generated");
    assert!(started.elapsed().as_secs() < 30, "oracle suite took {:?}", started.elapsed());
}

#[test]
fn generator_mixes_all_operations() {
    use normgraph::model::ActionType;
    let mut reword = 0;
    let mut insert = 0;
    let mut repeal = 0;
    for seed in 0..200 {
        for ev in synthetic_corpus(seed).events {
            match (ev.action_type, ev.new_components.is_some()) {
                (ActionType::Repeal, _) => repeal += 1,
                (_, true) => insert += 1,
                _ => reword += 1,
            }
        }
    }
    assert!(reword > 0 && insert > 0 && repeal > 0, "{reword} {insert} {repeal}");
}

#[test]
fn generator_is_reproducible() {
    let a = synthetic_corpus(42);
    let b = synthetic_corpus(42);
    assert_eq!(a.files, b.files);
}
