//! Ground-truth evaluation and the checked-in fixture tree.

use std::fs;
use std::path::PathBuf;

use normgraph::eval::{evaluate, ExpectedAction, TruthFile};
use normgraph::fixtures::{
    self, action, build_fixture_corpus, fixture_truth, fixture_truth_json, work, CA26_URN, CA64_URN,
};

fn repo_fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn fixture_truth_scores_perfectly() {
    let (store, _) = fixtures::fixture_store().unwrap();
    let report = evaluate(&store, &fixture_truth()).unwrap();
    assert!(report.failed_queries.is_empty(), "{:?}", report.failed_queries);
    for (name, m) in report.metrics() {
        assert_eq!(m.value, 1.0, "{name}");
        assert!(m.queries > 0, "{name} is vacuous");
    }
    assert!(report.below(1.0).is_empty());
}

#[test]
fn wrong_truth_is_penalized() {
    let (store, _) = fixtures::fixture_store().unwrap();
    let mut truth = fixture_truth();
    for q in &mut truth.queries {
        if let Some(chains) = &mut q.expected.chains {
            // Claim the 2010 amendment alone introduced "food".
            if chains[0].actions.len() == 2 {
                chains[0].actions = vec![action(CA64_URN)];
            }
        }
        if let Some(actions) = &mut q.expected.actions {
            actions.push(ExpectedAction { action: action(CA26_URN), work: work("art6_cpt") });
        }
    }
    let report = evaluate(&store, &truth).unwrap();
    assert!(report.chain_completeness.value < 1.0);
    assert!(report.action_attribution_f1.value < 1.0);
    assert_eq!(report.temporal_precision.value, 1.0);
    assert_eq!(report.below(1.0), ["action_attribution_f1", "chain_completeness", "summary_completeness"]);
}

#[test]
fn checked_in_fixtures_match_the_generator() {
    let root = repo_fixtures();
    let mut on_disk: Vec<String> =
        fs::read_dir(root.join("corpus")).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    on_disk.sort();
    let generated = build_fixture_corpus();
    assert_eq!(on_disk, generated.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>());
    for (name, contents) in generated {
        assert_eq!(fs::read_to_string(root.join("corpus").join(&name)).unwrap(), contents, "{name}");
    }
    let truth = fs::read_to_string(root.join("fixture.sattruth.json")).unwrap();
    assert_eq!(truth, fixture_truth_json());
    assert_eq!(TruthFile::parse(&truth).unwrap(), fixture_truth());
}
