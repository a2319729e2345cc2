//! `normgraph` command line: ingest a corpus, query a snapshot, evaluate
//! against ground truth, emit the reference fixtures.
//!
//! Exit codes: 0 success, 2 query error, 3 data error, 4 metric below threshold.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use normgraph::eval::{evaluate, TruthFile};
use normgraph::fixtures::write_fixture_tree;
use normgraph::ingest::ingest_corpus;
use normgraph::planner::{footer, Pattern, Planner, Query};
use normgraph::retrieval::RetrievalMode;
use normgraph::store::SNAPSHOT_ENV;
use normgraph::temporal::{MembershipPolicy, ResolutionPolicy, TemporalScope};
use normgraph::{DateStamp, GraphStore};

const EXIT_QUERY: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_THRESHOLD: u8 = 4;

#[derive(Parser)]
#[command(name = "normgraph", version, about = "Temporal knowledge graph for versioned legal norms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a snapshot from a corpus directory.
    Ingest { corpus_dir: PathBuf, out_snapshot: PathBuf },
    /// Run a planner query against a snapshot.
    Query(QueryArgs),
    /// Score planner answers against a ground-truth file.
    Eval {
        snapshot: PathBuf,
        truth: PathBuf,
        /// Fail with exit 4 if any metric is below this value.
        #[arg(long)]
        min: Option<f64>,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Print the JSON report instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Write the reference corpus and truth file under a directory.
    Fixtures { out_dir: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum PatternArg {
    At,
    Impact,
    Provenance,
    Retrieve,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    SnapshotLast,
    SnapshotFirst,
}

#[derive(Clone, Copy, ValueEnum)]
enum MembershipArg {
    SnapshotAnchored,
    ActionTime,
    Lifetime,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Vector,
    Lexical,
    Hybrid,
}

#[derive(Args)]
struct QueryArgs {
    pattern: PatternArg,
    /// Structural target (same as --target).
    target_pos: Option<String>,
    #[arg(long, env = SNAPSHOT_ENV)]
    snapshot: PathBuf,
    #[arg(long)]
    target: Option<String>,
    /// Norm restricting target resolution.
    #[arg(long)]
    norm: Option<String>,
    #[arg(long)]
    theme: Option<String>,
    /// Span for provenance, query text for retrieve.
    #[arg(long)]
    term: Option<String>,
    #[arg(long, value_parser = parse_date, conflicts_with = "between")]
    at: Option<DateStamp>,
    #[arg(long, num_args = 2, value_names = ["FROM", "TO"], value_parser = parse_date)]
    between: Option<Vec<DateStamp>>,
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
    #[arg(long, value_enum)]
    membership: Option<MembershipArg>,
    #[arg(long)]
    lang: Option<String>,
    /// Do not fall back to the norm's primary language.
    #[arg(long)]
    no_fallback: bool,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Emit the full annex (or an error record) as JSON.
    #[arg(long)]
    json: bool,
    /// Injected "now"; defaults to today's local date.
    #[arg(long, value_parser = parse_date)]
    clock: Option<DateStamp>,
}

fn parse_date(s: &str) -> Result<DateStamp, String> {
    s.parse::<DateStamp>().map_err(|e| e.to_string())
}

fn fail(code: u8, kind: &str, message: impl std::fmt::Display) -> ExitCode {
    let record = serde_json::json!({ "error": { "kind": kind, "message": message.to_string() } });
    eprintln!("{record}");
    ExitCode::from(code)
}

fn load(path: &PathBuf) -> Result<GraphStore, ExitCode> {
    GraphStore::load(path).map_err(|e| fail(EXIT_DATA, "Snapshot", e))
}

fn build_query(a: &QueryArgs) -> Result<Query, String> {
    let pattern = match a.pattern {
        PatternArg::At => Pattern::PointInTime,
        PatternArg::Impact => Pattern::ImpactAnalysis,
        PatternArg::Provenance => Pattern::Provenance,
        PatternArg::Retrieve => Pattern::Retrieve,
    };
    let mut q = Query::new(pattern);
    q.target = match (&a.target_pos, &a.target) {
        (Some(p), Some(t)) if p != t => return Err(format!("conflicting targets `{p}` and `{t}`")),
        (p, t) => t.clone().or_else(|| p.clone()),
    };
    q.norm = a.norm.clone();
    q.theme = a.theme.clone();
    q.term = a.term.clone();
    let policy = a.policy.map(|p| match p {
        PolicyArg::SnapshotLast => ResolutionPolicy::SnapshotLast,
        PolicyArg::SnapshotFirst => ResolutionPolicy::SnapshotFirst,
    });
    q.temporal = match (&a.at, &a.between) {
        (Some(t), _) => Some(TemporalScope::instant(*t)),
        (None, Some(w)) => Some(TemporalScope::interval(w[0], w[1]).map_err(|e| e.to_string())?),
        (None, None) => None,
    };
    if let Some(p) = policy {
        q = q.resolution(p);
    }
    q.membership = a.membership.map(|m| match m {
        MembershipArg::SnapshotAnchored => MembershipPolicy::SnapshotAnchored,
        MembershipArg::ActionTime => MembershipPolicy::ActionTime,
        MembershipArg::Lifetime => MembershipPolicy::Lifetime,
    });
    q.language = a.lang.clone();
    q.language_fallback = a.no_fallback.then_some(false);
    q.k = a.k;
    q.mode = a.mode.map(|m| match m {
        ModeArg::Vector => RetrievalMode::Vector,
        ModeArg::Lexical => RetrievalMode::Lexical,
        ModeArg::Hybrid => RetrievalMode::Hybrid,
    });
    Ok(q)
}

fn today() -> DateStamp {
    let d = chrono::Local::now().date_naive();
    DateStamp::from(d)
}

fn cmd_ingest(corpus_dir: &PathBuf, out: &PathBuf) -> ExitCode {
    let (store, report) = match ingest_corpus(corpus_dir) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_DATA, e.kind(), e),
    };
    if !report.violations.is_empty() {
        for v in &report.violations {
            eprintln!("{}", serde_json::to_string(v).expect("violations serialize"));
        }
        return fail(EXIT_DATA, "Validation", format!("{} graph violations", report.violations.len()));
    }
    if let Err(e) = store.save(out) {
        return fail(EXIT_DATA, "Io", e);
    }
    let c = report.counts;
    println!(
        "ingested {} document(s), {} event(s), {} theme(s), {} translation(s)",
        report.documents, report.events, report.themes, report.translations
    );
    println!(
        "works: {}; ctvs: {}; clvs: {}; actions: {}; themes: {}; text units: {}; total: {}",
        c.works,
        c.ctvs,
        c.clvs,
        c.actions,
        c.themes,
        c.text_units,
        c.total()
    );
    println!("snapshot: {}", out.display());
    ExitCode::SUCCESS
}

fn cmd_query(a: &QueryArgs) -> ExitCode {
    let store = match load(&a.snapshot) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let query = match build_query(a) {
        Ok(q) => q,
        Err(msg) => return fail(EXIT_QUERY, "InvalidQuery", msg),
    };
    let clock = a.clock.unwrap_or_else(today);
    let result = Planner::new(&store).run(&query, clock);
    match result {
        Ok(answer) => {
            if a.json {
                println!("{}", serde_json::to_string_pretty(&answer.annex).expect("annex serializes"));
            } else {
                println!("{}", answer.rendered_text);
                println!();
                println!("{}", footer(&answer.policies));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if a.json {
                println!("{}", serde_json::to_string_pretty(&e.to_record()).expect("error record serializes"));
            } else {
                eprintln!("error [{}]: {e}", e.kind());
            }
            ExitCode::from(EXIT_QUERY)
        }
    }
}

fn cmd_eval(
    snapshot: &PathBuf,
    truth: &PathBuf,
    min: Option<f64>,
    report_path: Option<&PathBuf>,
    json: bool,
) -> ExitCode {
    let store = match load(snapshot) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let truth = match TruthFile::load(truth) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_DATA, "Truth", e),
    };
    let report = match evaluate(&store, &truth) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_DATA, "Truth", e),
    };
    let report_json = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Some(path) = report_path {
        if let Err(e) = std::fs::write(path, format!("{report_json}\n")) {
            return fail(EXIT_DATA, "Io", e);
        }
    }
    if json {
        println!("{report_json}");
    } else {
        print!("{}", report.table());
    }
    if let Some(min) = min {
        let below = report.below(min);
        if !below.is_empty() {
            eprintln!("below {min}: {}", below.join(", "));
            return ExitCode::from(EXIT_THRESHOLD);
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Ingest { corpus_dir, out_snapshot } => cmd_ingest(corpus_dir, out_snapshot),
        Command::Query(a) => cmd_query(a),
        Command::Eval { snapshot, truth, min, report, json } => cmd_eval(snapshot, truth, *min, report.as_ref(), *json),
        Command::Fixtures { out_dir } => match write_fixture_tree(out_dir) {
            Ok(()) => {
                println!("fixtures written to {}", out_dir.display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(EXIT_DATA, "Io", e),
        },
    }
}
