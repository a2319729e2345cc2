//! End-to-end behavior of the `normgraph` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_normgraph");

fn repo_fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("NORMGRAPH_SNAPSHOT").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ingest(dir: &TempDir) -> PathBuf {
    let snap = dir.path().join("fixture.ndjson");
    let corpus = repo_fixtures().join("corpus");
    let o = run(&["ingest", corpus.to_str().unwrap(), snap.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    snap
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn ingest_reports_counts() {
    let dir = TempDir::new().unwrap();
    let snap = dir.path().join("s.ndjson");
    let o = run(&["ingest", p(&repo_fixtures().join("corpus")), p(&snap)]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("works: 17; ctvs: 37; clvs: 15; actions: 5"), "{out}");
    assert!(snap.exists());
}

#[test]
fn point_in_time_text_and_footer() {
    let dir = TempDir::new().unwrap();
    let snap = ingest(&dir);
    let o = run(&[
        "query",
        "at",
        "art6",
        "--between",
        "1999-01-01",
        "1999-12-31",
        "--snapshot",
        p(&snap),
        "--clock",
        "2024-01-01",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("In 1999, the social rights listed in Art. 6º"), "{out}");
    assert!(out.contains("policy: SnapshotLast; membership: SnapshotAnchored"), "{out}");
    assert!(out.contains("t: 1999-12-31"));
}

#[test]
fn snapshot_path_from_environment() {
    let dir = TempDir::new().unwrap();
    let snap = ingest(&dir);
    let o = Command::new(BIN)
        .args(["query", "impact", "Chapter II", "--between", "2010-01-01", "2019-12-31", "--clock", "2024-01-01"])
        .env("NORMGRAPH_SNAPSHOT", &snap)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("Chapter-level impact dates: {2010-02-04, 2013-04-02, 2015-09-15}."));
}

#[test]
fn json_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let snap = ingest(&dir);
    let args =
        ["query", "provenance", "art6", "--term", "food", "--snapshot", p(&snap), "--clock", "2024-01-01", "--json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["pattern"], "Provenance");
    assert_eq!(v["chains"][0]["confidence"], 1.0);
}

#[test]
fn query_errors_exit_two_with_a_record() {
    let dir = TempDir::new().unwrap();
    let snap = ingest(&dir);
    let o =
        run(&["query", "at", "art6", "--at", "1980-01-01", "--snapshot", p(&snap), "--clock", "2024-01-01", "--json"]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "NotYetEnacted");
    assert_eq!(v["error"]["resolved_t"], "1980-01-01");

    let o = run(&["query", "at", "no-such-thing", "--snapshot", p(&snap), "--clock", "2024-01-01"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("UnknownAlias"));

    let o = run(&["query", "at", "art6", "--target", "art7", "--snapshot", p(&snap)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn data_errors_exit_three() {
    let dir = TempDir::new().unwrap();
    let o = run(&["query", "at", "art6", "--snapshot", p(&dir.path().join("missing.ndjson"))]);
    assert_eq!(o.status.code(), Some(3));

    // An event aimed at a component that does not exist.
    let corpus = dir.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    for entry in fs::read_dir(repo_fixtures().join("corpus")).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), corpus.join(entry.file_name())).unwrap();
    }
    let ev = corpus.join("ca064-2010.satev.json");
    let broken = fs::read_to_string(&ev).unwrap().replace("!art6_cpt", "!art99_cpt");
    fs::write(&ev, broken).unwrap();
    let o = run(&["ingest", p(&corpus), p(&dir.path().join("out.ndjson"))]);
    assert_eq!(o.status.code(), Some(3));
    let record: serde_json::Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
    assert_eq!(record["error"]["kind"], "UnknownTarget");
}

#[test]
fn eval_thresholds() {
    let dir = TempDir::new().unwrap();
    let snap = ingest(&dir);
    let truth = repo_fixtures().join("fixture.sattruth.json");
    let report = dir.path().join("report.json");
    let o = run(&["eval", p(&snap), p(&truth), "--min", "1.0", "--report", p(&report)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["chain_completeness"]["value"], 1.0);

    // Drop the first action of the food chain: the chain score falls below 1.
    let mut t: serde_json::Value = serde_json::from_str(&fs::read_to_string(&truth).unwrap()).unwrap();
    let food = t["queries"].as_array_mut().unwrap().iter_mut().find(|q| q["id"] == "provenance-food-art6").unwrap();
    food["expected"]["chains"][0]["actions"].as_array_mut().unwrap().remove(0);
    let wrong = dir.path().join("wrong.sattruth.json");
    fs::write(&wrong, serde_json::to_string(&t).unwrap()).unwrap();
    let o = run(&["eval", p(&snap), p(&wrong), "--min", "1.0"]);
    assert_eq!(o.status.code(), Some(4));
    let o = run(&["eval", p(&snap), p(&wrong), "--min", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn fixtures_command_reproduces_the_checked_in_tree() {
    let dir = TempDir::new().unwrap();
    let o = run(&["fixtures", p(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    for entry in fs::read_dir(repo_fixtures().join("corpus")).unwrap() {
        let entry = entry.unwrap();
        let fresh = fs::read(dir.path().join("corpus").join(entry.file_name())).unwrap();
        assert_eq!(fresh, fs::read(entry.path()).unwrap(), "{:?}", entry.file_name());
    }
    assert_eq!(
        fs::read(dir.path().join("fixture.sattruth.json")).unwrap(),
        fs::read(repo_fixtures().join("fixture.sattruth.json")).unwrap()
    );
}

#[test]
fn ingesting_twice_gives_identical_snapshots() {
    let dir = TempDir::new().unwrap();
    let a = ingest(&dir);
    let b = dir.path().join("second.ndjson");
    assert!(run(&["ingest", p(&repo_fixtures().join("corpus")), p(&b)]).status.success());
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn annex_fields_match_the_published_schema() {
    let schema: serde_json::Value = serde_json::from_str(include_str!("../../../docs/annex.schema.json")).unwrap();
    let names = |v: &serde_json::Value| -> Vec<String> {
        let mut n: Vec<String> = v.as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_owned()).collect();
        n.sort();
        n
    };
    let dir = TempDir::new().unwrap();
    let snap = ingest(&dir);
    let o = run(&[
        "query",
        "provenance",
        "art6",
        "--term",
        "food",
        "--snapshot",
        p(&snap),
        "--clock",
        "2024-01-01",
        "--json",
    ]);
    let annex: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let keys = |v: &serde_json::Value| {
        let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
        k.sort();
        k
    };
    assert_eq!(keys(&annex), names(&schema["required"]));
    assert_eq!(keys(&annex["policies"]), names(&schema["properties"]["policies"]["required"]));
    assert_eq!(keys(&annex["chains"][0]), names(&schema["properties"]["chains"]["items"]["required"]));
}

#[test]
fn empty_corpus_and_missing_truth_are_data_errors() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let o = run(&["ingest", p(&empty), p(&dir.path().join("x.ndjson"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no documents"));

    let snap = ingest(&dir);
    let o = run(&["eval", p(&snap), p(&dir.path().join("missing.sattruth.json")), "--min", "1.0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn query_without_dates_uses_the_clock() {
    let dir = TempDir::new().unwrap();
    let snap = ingest(&dir);
    let o = run(&["query", "at", "--target", "art6", "--snapshot", p(&snap), "--clock", "2024-01-01"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("On January 1, 2024,"), "{out}");
    assert!(out.contains("food") && out.contains("transportation"));
    assert!(out.trim_end().ends_with("t: 2024-01-01"));
}
