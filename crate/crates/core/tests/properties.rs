//! Structural invariants over random corpora.

mod common;

use std::collections::BTreeMap;

use common::synthetic_corpus;
use normgraph::ingest::ingest_files;
use normgraph::text::tokenize;
use normgraph::{validate_graph, GraphStore};
use proptest::prelude::*;

fn snapshot_bytes(store: &GraphStore) -> Vec<u8> {
    let mut out = Vec::new();
    store.write_snapshot(&mut out).unwrap();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn snapshot_round_trip_is_byte_identical(seed in any::<u64>()) {
        let syn = synthetic_corpus(seed);
        let (store, _) = ingest_files(&syn.files).unwrap();
        let bytes = snapshot_bytes(&store);
        let reloaded = GraphStore::from_snapshot_str(std::str::from_utf8(&bytes).unwrap()).unwrap();
        prop_assert_eq!(snapshot_bytes(&reloaded), bytes.clone());
        prop_assert_eq!(reloaded.counts(), store.counts());

        // Ingest is insensitive to the order in which files are supplied.
        let mut reversed = syn.files.clone();
        reversed.reverse();
        let (again, _) = ingest_files(&reversed).unwrap();
        prop_assert_eq!(snapshot_bytes(&again), bytes);
    }

    #[test]
    fn versions_of_a_work_tile_its_lifetime(seed in any::<u64>()) {
        let syn = synthetic_corpus(seed);
        let (store, _) = ingest_files(&syn.files).unwrap();
        let mut by_work: BTreeMap<&str, Vec<_>> = BTreeMap::new();
        for c in store.ctvs() {
            by_work.entry(c.work.as_str()).or_default().push(c.validity);
        }
        for (work, mut vs) in by_work {
            vs.sort_by_key(|v| v.valid_start);
            prop_assert!(vs.iter().filter(|v| v.valid_end.is_none()).count() <= 1, "{}", work);
            for pair in vs.windows(2) {
                // Consecutive, non-overlapping and gap-free.
                prop_assert_eq!(pair[0].valid_end, Some(pair[1].valid_start), "{}", work);
            }
            for v in &vs {
                if let Some(end) = v.valid_end {
                    prop_assert!(v.valid_start < end);
                }
            }
        }
        let ids: std::collections::BTreeSet<_> = store.ctvs().map(|c| c.id.clone()).collect();
        prop_assert_eq!(ids.len(), store.ctvs().count());
    }

    #[test]
    fn indexes_agree_with_text_units(seed in any::<u64>()) {
        let syn = synthetic_corpus(seed);
        let (store, _) = ingest_files(&syn.files).unwrap();
        prop_assert_eq!(store.term_index(), &store.rebuilt_term_index());
        for unit in store.text_units() {
            for token in tokenize(&unit.text) {
                prop_assert!(store.term_postings(&token).is_some_and(|p| p.contains(&unit.id)));
            }
            prop_assert_eq!(unit.embedding.len(), store.dimension());
        }
        let retrievable: Vec<_> = store.text_units().filter(|u| u.is_retrievable()).map(|u| u.id.clone()).collect();
        prop_assert_eq!(store.vector_index(), retrievable.as_slice());
    }

    #[test]
    fn ingested_graphs_validate(seed in any::<u64>()) {
        let syn = synthetic_corpus(seed);
        let (store, report) = ingest_files(&syn.files).unwrap();
        prop_assert!(report.violations.is_empty());
        prop_assert_eq!(validate_graph(&store), vec![]);
        prop_assert!(store.check_references().is_ok());
    }
}
