//! Evaluation harness: ground-truth files, answer records and the four
//! answer-quality metrics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{ActionId, CtvId, DateStamp, WorkId};
use crate::planner::{Answer, Planner, Query};
use crate::store::GraphStore;

pub const TRUTH_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthFile {
    pub format_version: u32,
    pub queries: Vec<TruthQuery>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthQuery {
    pub id: String,
    pub query: Query,
    /// Injected "now"; makes every truth query reproducible.
    pub clock: DateStamp,
    pub expected: Expected,
}

/// Each present field is scored by its metric; absent fields are not.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ctvs: Option<Vec<CtvId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<ExpectedAction>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chains: Option<Vec<ExpectedChain>>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExpectedAction {
    pub action: ActionId,
    pub work: WorkId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedChain {
    pub work: WorkId,
    pub actions: Vec<ActionId>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("truth file schema error: {0}")]
    Schema(String),
    #[error("answer ids {answers:?} do not match truth ids {truth:?}")]
    MismatchedQueryIds { answers: Vec<String>, truth: Vec<String> },
    #[error("truth query `{query}` references unknown {kind} `{id}`")]
    UnresolvedId { query: String, kind: &'static str, id: String },
}

impl TruthFile {
    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let file: TruthFile = serde_json::from_str(text).map_err(|e| EvalError::Schema(e.to_string()))?;
        if file.format_version != TRUTH_FORMAT_VERSION {
            return Err(EvalError::Schema(format!("unsupported format_version {}", file.format_version)));
        }
        let mut seen = BTreeSet::new();
        for q in &file.queries {
            if !seen.insert(q.id.as_str()) {
                return Err(EvalError::Schema(format!("duplicate query id `{}`", q.id)));
            }
        }
        Ok(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EvalError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| EvalError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    /// Every referenced CTV, action and work must exist in `store`.
    pub fn check_against(&self, store: &GraphStore) -> Result<(), EvalError> {
        for q in &self.queries {
            let missing =
                |kind: &'static str, id: &str| EvalError::UnresolvedId { query: q.id.clone(), kind, id: id.to_owned() };
            for c in q.expected.ctvs.iter().flatten() {
                store.ctv(c.as_str()).ok_or_else(|| missing("ctv", c.as_str()))?;
            }
            for a in q.expected.actions.iter().flatten() {
                store.action(a.action.as_str()).ok_or_else(|| missing("action", a.action.as_str()))?;
                store.work(a.work.as_str()).ok_or_else(|| missing("work", a.work.as_str()))?;
            }
            for ch in q.expected.chains.iter().flatten() {
                store.work(ch.work.as_str()).ok_or_else(|| missing("work", ch.work.as_str()))?;
                for a in &ch.actions {
                    store.action(a.as_str()).ok_or_else(|| missing("action", a.as_str()))?;
                }
            }
        }
        Ok(())
    }
}

/// The scoreable content of one planner answer.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AnswerRecord {
    pub ctvs: BTreeSet<CtvId>,
    pub actions: BTreeSet<(ActionId, WorkId)>,
    /// Pairs rendered in an impact summary (grouped actions).
    pub summarized: BTreeSet<(ActionId, WorkId)>,
    pub chains: BTreeMap<WorkId, Vec<ActionId>>,
    /// Error kind when the planner refused the query.
    pub error: Option<String>,
}

impl AnswerRecord {
    pub fn from_answer(answer: &Answer) -> Self {
        let pair = |a: &crate::planner::AnnexAction| (a.id.clone(), a.target.clone());
        Self {
            ctvs: answer.citations.iter().map(|c| c.ctv.clone()).collect(),
            actions: answer.annex.actions.iter().map(pair).collect(),
            summarized: answer.annex.actions.iter().filter(|a| a.group.is_some()).map(pair).collect(),
            chains: answer.annex.chains.iter().map(|c| (c.work.clone(), c.actions.clone())).collect(),
            error: None,
        }
    }

    pub fn failed(kind: &str) -> Self {
        Self { error: Some(kind.to_owned()), ..Self::default() }
    }
}

/// A metric averaged over the queries that define it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metric {
    pub value: f64,
    /// Number of contributing queries; 0 means the metric is vacuous (1.0).
    pub queries: usize,
    /// Some contributing query had an undefined ratio, reported as 0.0.
    pub degenerate: bool,
}

impl Metric {
    fn mean(values: &[f64], degenerate: bool) -> Self {
        let value = if values.is_empty() { 1.0 } else { values.iter().sum::<f64>() / values.len() as f64 };
        Metric { value, queries: values.len(), degenerate }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrecisionRecall {
    pub precision: Metric,
    pub recall: Metric,
}

pub type Answers = BTreeMap<String, AnswerRecord>;

fn pair_up<'a>(
    answers: &'a Answers,
    truth: &'a TruthFile,
) -> Result<Vec<(&'a AnswerRecord, &'a TruthQuery)>, EvalError> {
    let truth_ids: BTreeSet<&str> = truth.queries.iter().map(|q| q.id.as_str()).collect();
    let answer_ids: BTreeSet<&str> = answers.keys().map(String::as_str).collect();
    if truth_ids != answer_ids {
        return Err(EvalError::MismatchedQueryIds {
            answers: answer_ids.into_iter().map(str::to_owned).collect(),
            truth: truth_ids.into_iter().map(str::to_owned).collect(),
        });
    }
    Ok(truth.queries.iter().map(|q| (&answers[&q.id], q)).collect())
}

/// Macro-averaged precision and recall over CTV id sets. Empty retrieval
/// against a non-empty truth scores precision 0.0 and sets the flag.
pub fn temporal_precision_recall(answers: &Answers, truth: &TruthFile) -> Result<PrecisionRecall, EvalError> {
    let mut precision = Vec::new();
    let mut recall = Vec::new();
    let mut degenerate = false;
    for (answer, q) in pair_up(answers, truth)? {
        let Some(expected) = &q.expected.ctvs else { continue };
        let expected: BTreeSet<&CtvId> = expected.iter().collect();
        let hit = answer.ctvs.iter().filter(|c| expected.contains(c)).count() as f64;
        if answer.ctvs.is_empty() {
            degenerate |= !expected.is_empty();
            precision.push(if expected.is_empty() { 1.0 } else { 0.0 });
        } else {
            precision.push(hit / answer.ctvs.len() as f64);
        }
        recall.push(if expected.is_empty() { 1.0 } else { hit / expected.len() as f64 });
    }
    Ok(PrecisionRecall { precision: Metric::mean(&precision, degenerate), recall: Metric::mean(&recall, false) })
}

fn f1(tp: usize, retrieved: usize, relevant: usize) -> f64 {
    if retrieved == 0 && relevant == 0 {
        return 1.0;
    }
    if tp == 0 {
        return 0.0;
    }
    let p = tp as f64 / retrieved as f64;
    let r = tp as f64 / relevant as f64;
    2.0 * p * r / (p + r)
}

/// F1 over (action, target work) pairs, pooled across queries.
pub fn action_attribution_f1(answers: &Answers, truth: &TruthFile) -> Result<Metric, EvalError> {
    let (mut tp, mut retrieved, mut relevant, mut n) = (0, 0, 0, 0);
    for (answer, q) in pair_up(answers, truth)? {
        let Some(expected) = &q.expected.actions else { continue };
        let expected: BTreeSet<(ActionId, WorkId)> =
            expected.iter().map(|e| (e.action.clone(), e.work.clone())).collect();
        tp += answer.actions.intersection(&expected).count();
        retrieved += answer.actions.len();
        relevant += expected.len();
        n += 1;
    }
    Ok(Metric { value: f1(tp, retrieved, relevant), queries: n, degenerate: false })
}

fn lcs<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// Order-respecting credit for one chain: longest common subsequence over
/// the longer of the two chains, so only the exact chain scores 1.0.
pub fn chain_score(truth: &[ActionId], answer: &[ActionId]) -> f64 {
    let denom = truth.len().max(answer.len());
    if denom == 0 {
        return 1.0;
    }
    lcs(truth, answer) as f64 / denom as f64
}

/// Per-query mean chain score (a missing chain scores 0), averaged over queries.
pub fn chain_completeness(answers: &Answers, truth: &TruthFile) -> Result<Metric, EvalError> {
    let mut per_query = Vec::new();
    for (answer, q) in pair_up(answers, truth)? {
        let Some(chains) = &q.expected.chains else { continue };
        if chains.is_empty() {
            per_query.push(if answer.chains.is_empty() { 1.0 } else { 0.0 });
            continue;
        }
        let scores: Vec<f64> =
            chains.iter().map(|c| answer.chains.get(&c.work).map_or(0.0, |got| chain_score(&c.actions, got))).collect();
        per_query.push(scores.iter().sum::<f64>() / scores.len() as f64);
    }
    Ok(Metric::mean(&per_query, false))
}

/// Fraction of expected (action, work) pairs that appear as grouped entries
/// of an impact summary, averaged over queries.
pub fn summary_completeness(answers: &Answers, truth: &TruthFile) -> Result<Metric, EvalError> {
    let mut per_query = Vec::new();
    for (answer, q) in pair_up(answers, truth)? {
        let Some(expected) = &q.expected.actions else { continue };
        if expected.is_empty() {
            per_query.push(1.0);
            continue;
        }
        let found = expected.iter().filter(|e| answer.summarized.contains(&(e.action.clone(), e.work.clone()))).count();
        per_query.push(found as f64 / expected.len() as f64);
    }
    Ok(Metric::mean(&per_query, false))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub queries: usize,
    pub failed_queries: Vec<String>,
    pub temporal_precision: Metric,
    pub temporal_recall: Metric,
    pub action_attribution_f1: Metric,
    pub chain_completeness: Metric,
    pub summary_completeness: Metric,
}

impl EvalReport {
    /// Metric name and value, in report order.
    pub fn metrics(&self) -> [(&'static str, &Metric); 5] {
        [
            ("temporal_precision", &self.temporal_precision),
            ("temporal_recall", &self.temporal_recall),
            ("action_attribution_f1", &self.action_attribution_f1),
            ("chain_completeness", &self.chain_completeness),
            ("summary_completeness", &self.summary_completeness),
        ]
    }

    /// Names of metrics strictly below `min`.
    pub fn below(&self, min: f64) -> Vec<&'static str> {
        self.metrics().into_iter().filter(|(_, m)| m.value < min).map(|(n, _)| n).collect()
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<24} {:>7} {:>8}", "metric", "value", "queries");
        for (name, m) in self.metrics() {
            let flag = if m.degenerate { " (degenerate)" } else { "" };
            let _ = writeln!(out, "{name:<24} {:>7.3} {:>8}{flag}", m.value, m.queries);
        }
        if !self.failed_queries.is_empty() {
            let _ = writeln!(out, "failed queries: {}", self.failed_queries.join(", "));
        }
        out
    }
}

/// Scores precomputed answers against `truth`.
pub fn score(answers: &Answers, truth: &TruthFile) -> Result<EvalReport, EvalError> {
    let pr = temporal_precision_recall(answers, truth)?;
    Ok(EvalReport {
        queries: truth.queries.len(),
        failed_queries: answers.iter().filter(|(_, a)| a.error.is_some()).map(|(id, _)| id.clone()).collect(),
        temporal_precision: pr.precision,
        temporal_recall: pr.recall,
        action_attribution_f1: action_attribution_f1(answers, truth)?,
        chain_completeness: chain_completeness(answers, truth)?,
        summary_completeness: summary_completeness(answers, truth)?,
    })
}

/// Runs every truth query through the planner, then scores the answers.
pub fn evaluate(store: &GraphStore, truth: &TruthFile) -> Result<EvalReport, EvalError> {
    truth.check_against(store)?;
    let planner = Planner::new(store);
    let answers: Answers = truth
        .queries
        .iter()
        .map(|q| {
            let record = match planner.run(&q.query, q.clock) {
                Ok(a) => AnswerRecord::from_answer(&a),
                Err(e) => AnswerRecord::failed(e.kind()),
            };
            (q.id.clone(), record)
        })
        .collect();
    score(&answers, truth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::Pattern;

    fn a(s: &str) -> ActionId {
        ActionId::new(s)
    }

    fn truth_with(expected: Expected) -> TruthFile {
        TruthFile {
            format_version: 1,
            queries: vec![TruthQuery {
                id: "q".into(),
                query: Query::new(Pattern::ImpactAnalysis),
                clock: "2024-01-01".parse().unwrap(),
                expected,
            }],
        }
    }

    fn one(record: AnswerRecord) -> Answers {
        [("q".to_owned(), record)].into_iter().collect()
    }

    #[test]
    fn chain_scoring_rule() {
        assert_eq!(chain_score(&[a("x"), a("y")], &[a("x"), a("y")]), 1.0);
        assert_eq!(chain_score(&[a("x"), a("y")], &[a("y"), a("x")]), 0.5);
        assert_eq!(chain_score(&[a("x"), a("y")], &[]), 0.0);
    }

    #[test]
    fn f1_missing_one_of_three() {
        let pairs: Vec<ExpectedAction> =
            ["a1", "a2", "a3"].iter().map(|id| ExpectedAction { action: a(id), work: WorkId::new("w") }).collect();
        let truth = truth_with(Expected { actions: Some(pairs.clone()), ..Expected::default() });
        let record = AnswerRecord {
            actions: pairs[..2].iter().map(|e| (e.action.clone(), e.work.clone())).collect(),
            ..AnswerRecord::default()
        };
        let m = action_attribution_f1(&one(record), &truth).unwrap();
        assert!((m.value - 0.8).abs() < 1e-12);
    }

    #[test]
    fn empty_retrieval_is_degenerate_zero() {
        let truth = truth_with(Expected { ctvs: Some(vec![CtvId::new("c")]), ..Expected::default() });
        let pr = temporal_precision_recall(&one(AnswerRecord::default()), &truth).unwrap();
        assert_eq!(pr.precision.value, 0.0);
        assert!(pr.precision.degenerate);
        assert_eq!(pr.recall.value, 0.0);
    }

    #[test]
    fn mismatched_ids_rejected() {
        let truth = truth_with(Expected::default());
        let answers: Answers = [("other".to_owned(), AnswerRecord::default())].into_iter().collect();
        assert!(matches!(score(&answers, &truth), Err(EvalError::MismatchedQueryIds { .. })));
    }
}
