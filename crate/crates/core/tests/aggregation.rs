//! Upward aggregation creates versions only along changed paths, and
//! unchanged siblings keep their version ids.

mod common;

use std::collections::BTreeSet;

use common::{expected_ctv_count, subtree_size, synthetic_corpus, Tree};
use normgraph::fixtures::{self, ctv, fixture_document, fixture_events, work};
use normgraph::ingest::format::EventRecord;
use normgraph::ingest::ingest_files;
use normgraph::GraphStore;

#[test]
fn fixture_version_count_matches_closed_form() {
    let doc = fixture_document();
    let events: Vec<EventRecord> = fixture_events().into_iter().flat_map(|(_, f)| f.events).collect();
    let (store, _) = fixtures::fixture_store().unwrap();
    let components = 1 + doc.body.iter().map(subtree_size).sum::<usize>();
    // Each amendment touches one leaf four levels below the norm.
    let per_event: usize =
        events.iter().map(|e| Tree::from_doc(&doc).path(e.target.split_once('!').map(|(_, f)| f)).len()).sum();
    assert_eq!(store.ctvs().count(), components + per_event);
    assert_eq!(store.ctvs().count(), expected_ctv_count(&doc, &events));
    assert_eq!(store.ctvs().count(), 37);
}

#[test]
fn unchanged_siblings_share_version_ids() {
    let (store, _) = fixtures::fixture_store().unwrap();
    let aggregates = |id: &normgraph::model::CtvId| store.ctv(id.as_str()).unwrap().aggregates.clone();

    // Chapter II before and after the 2010 amendment of Art. 6.
    assert_eq!(aggregates(&ctv("tit2_cap2", "2000-02-15")), [ctv("art6", "2000-02-15"), ctv("art7", "1988-10-05")]);
    assert_eq!(aggregates(&ctv("tit2_cap2", "2010-02-04")), [ctv("art6", "2010-02-04"), ctv("art7", "1988-10-05")]);
    // Title II keeps pointing to the original Chapter III throughout.
    for start in ["1988-10-05", "2000-02-15", "2010-02-04", "2013-04-02", "2015-09-15"] {
        assert_eq!(aggregates(&ctv("tit2", start))[1], ctv("tit2_cap3", "1988-10-05"), "Title II @ {start}");
    }
    // Art. 7 sole paragraph change leaves the caput of Art. 7 untouched.
    assert_eq!(
        aggregates(&ctv("art7", "2013-04-02")),
        [ctv("art7_cpt", "1988-10-05"), ctv("art7_par1u", "2013-04-02")]
    );
    assert_eq!(store.versions_of(work("art12").as_str()).unwrap().len(), 1);
}

fn check_sharing(store: &GraphStore) {
    for c in store.ctvs() {
        for a in &c.aggregates {
            let child = store.ctv(a.as_str()).expect("aggregate exists");
            assert!(child.validity.contains(c.validity.valid_start), "{} aggregates {} out of range", c.id, a);
        }
        if let Some(p) = store.predecessor(c) {
            let before: BTreeSet<_> = p.aggregates.iter().collect();
            let after: BTreeSet<_> = c.aggregates.iter().collect();
            // Children not touched on this date are literally the same versions.
            for id in after.difference(&before) {
                assert_eq!(store.ctv(id.as_str()).unwrap().validity.valid_start, c.validity.valid_start);
            }
        }
    }
}

#[test]
fn random_corpora_match_closed_form() {
    for seed in 0..200 {
        let syn = synthetic_corpus(seed);
        let (store, _) = ingest_files(&syn.files).unwrap();
        assert_eq!(store.ctvs().count(), expected_ctv_count(&syn.doc, &syn.events), "seed {seed}");
        check_sharing(&store);
    }
    check_sharing(&fixtures::fixture_store().unwrap().0);
}
