//! Offline evaluation: ranking metrics over held-out posts, per-algorithm
//! reports with pairwise significance tests, and the gist-vs-verbatim drift
//! analysis.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::folksonomy::{Post, ResourceId, TagId, UserId};
use crate::ranking::{Query, RankedTags, TagRecommender};

mod drift;
mod wilcoxon;

pub use drift::{drift_analysis, DriftRow, DriftTable, DEFAULT_MAX_LAG};
pub use wilcoxon::{wilcoxon_rank_sum, wilcoxon_rank_sum_with, WilcoxonMethod, EXACT_LIMIT};

/// Largest cut-off reported; also the list length requested from every
/// algorithm.
pub const MAX_K: usize = 10;

/// Describes the MRR variant so reports can flag it.
pub const MRR_NOTE: &str = "mrr: per case (1/|true|) * sum of 1/rank over every true tag found in the top 10";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("evaluation case has no true tags")]
    NoTrueTags,
    #[error("significance test needs non-empty samples")]
    EmptySample,
    #[error("exact rank-sum test limited to 20 values, got {0}")]
    SampleTooLarge(usize),
}

/// A held-out post with the ranking an algorithm produced for it.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalCase {
    pub user: UserId,
    pub resource: ResourceId,
    /// Sorted, without duplicates.
    true_tags: Vec<TagId>,
    pub predicted: RankedTags,
}

impl EvalCase {
    pub fn new(
        user: UserId,
        resource: ResourceId,
        true_tags: impl IntoIterator<Item = TagId>,
        predicted: RankedTags,
    ) -> Result<Self, EvalError> {
        let mut true_tags: Vec<TagId> = true_tags.into_iter().collect();
        true_tags.sort_unstable();
        true_tags.dedup();
        if true_tags.is_empty() {
            return Err(EvalError::NoTrueTags);
        }
        Ok(Self {
            user,
            resource,
            true_tags,
            predicted,
        })
    }

    pub fn true_tags(&self) -> &[TagId] {
        &self.true_tags
    }

    fn is_true(&self, tag: TagId) -> bool {
        self.true_tags.binary_search(&tag).is_ok()
    }

    fn hits_at(&self, k: usize) -> usize {
        self.predicted.tags().take(k).filter(|&t| self.is_true(t)).count()
    }
}

/// Denominator of precision when fewer than `k` tags were returned.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PrecisionMode {
    /// Divide by `min(k, returned)`.
    #[default]
    Returned,
    /// Always divide by `k`.
    Strict,
}

impl PrecisionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PrecisionMode::Returned => "returned",
            PrecisionMode::Strict => "strict",
        }
    }
}

/// Precision and recall of the top `k` predictions. An empty prediction
/// scores `(0, 0)`; so does `k = 0`.
pub fn precision_recall_at_k(case: &EvalCase, k: usize, mode: PrecisionMode) -> (f64, f64) {
    if k == 0 || case.predicted.is_empty() {
        return (0.0, 0.0);
    }
    let hits = case.hits_at(k) as f64;
    let denom = match mode {
        PrecisionMode::Returned => k.min(case.predicted.len()),
        PrecisionMode::Strict => k,
    };
    (hits / denom as f64, hits / case.true_tags.len() as f64)
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn f1_at_5(case: &EvalCase) -> f64 {
    f1_at_5_with(case, PrecisionMode::Returned)
}

pub fn f1_at_5_with(case: &EvalCase, mode: PrecisionMode) -> f64 {
    let (p, r) = precision_recall_at_k(case, 5, mode);
    harmonic(p, r)
}

/// `(1/|true|) · Σ 1/rank` over true tags ranked in the top 10.
pub fn mrr(case: &EvalCase) -> f64 {
    let mut sum = 0.0;
    for (i, t) in case.predicted.tags().take(MAX_K).enumerate() {
        if case.is_true(t) {
            sum += 1.0 / (i + 1) as f64;
        }
    }
    sum / case.true_tags.len() as f64
}

/// `(1/|true|) · Σ P@p` over hit positions `p` in the top 10.
pub fn map_at_10(case: &EvalCase) -> f64 {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, t) in case.predicted.tags().take(MAX_K).enumerate() {
        if case.is_true(t) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    sum / case.true_tags.len() as f64
}

/// All metrics of one case.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseScores {
    pub user: UserId,
    pub resource: ResourceId,
    /// Index `k - 1` holds P@k.
    pub precision: [f64; MAX_K],
    pub recall: [f64; MAX_K],
    pub f1_at_5: f64,
    pub mrr: f64,
    pub map: f64,
    /// The algorithm failed and the case was scored as an empty prediction.
    pub failed: bool,
}

pub fn score_case(case: &EvalCase, mode: PrecisionMode, failed: bool) -> CaseScores {
    let mut precision = [0.0; MAX_K];
    let mut recall = [0.0; MAX_K];
    for k in 1..=MAX_K {
        let (p, r) = precision_recall_at_k(case, k, mode);
        precision[k - 1] = p;
        recall[k - 1] = r;
    }
    CaseScores {
        user: case.user,
        resource: case.resource,
        precision,
        recall,
        f1_at_5: f1_at_5_with(case, mode),
        mrr: mrr(case),
        map: map_at_10(case),
        failed,
    }
}

/// Runs one algorithm on one held-out post. Failures become an empty
/// prediction with `failed` set.
pub fn run_case(algorithm: &dyn TagRecommender, post: &Post, mode: PrecisionMode) -> CaseScores {
    let query = Query {
        user: post.user(),
        resource: post.resource(),
        ref_time: post.timestamp(),
    };
    let (predicted, failed) = match algorithm.recommend(&query, MAX_K) {
        Ok(ranked) => (ranked, false),
        Err(err) => {
            log::warn!("{} failed on user {:?}: {}", algorithm.name(), post.user(), err);
            (RankedTags::empty(), true)
        }
    };
    // posts always carry at least one tag
    let case = EvalCase::new(post.user(), post.resource(), post.tags().iter().copied(), predicted)
        .expect("posts are never empty");
    score_case(&case, mode, failed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    F1At5,
    Mrr,
    Map,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::F1At5, Metric::Mrr, Metric::Map];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::F1At5 => "f1@5",
            Metric::Mrr => "mrr",
            Metric::Map => "map",
        }
    }

    pub fn of(self, scores: &CaseScores) -> f64 {
        match self {
            Metric::F1At5 => scores.f1_at_5,
            Metric::Mrr => scores.mrr,
            Metric::Map => scores.map,
        }
    }
}

/// Mean metrics of one algorithm over all evaluated cases.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmMetrics {
    pub name: String,
    pub notes: Option<String>,
    pub precision: [f64; MAX_K],
    pub recall: [f64; MAX_K],
    pub f1_at_5: f64,
    pub mrr: f64,
    pub map: f64,
    pub n_cases: usize,
    pub n_failures: usize,
    /// Sorted by (user, resource).
    pub cases: Vec<CaseScores>,
}

impl AlgorithmMetrics {
    pub fn metric(&self, metric: Metric) -> f64 {
        match metric {
            Metric::F1At5 => self.f1_at_5,
            Metric::Mrr => self.mrr,
            Metric::Map => self.map,
        }
    }
}

/// Averages case scores. Cases are summed in (user, resource) order so the
/// result does not depend on how they were computed.
pub fn aggregate(name: &str, notes: Option<&str>, mut cases: Vec<CaseScores>) -> AlgorithmMetrics {
    cases.sort_by_key(|c| (c.user, c.resource));
    let n = cases.len();
    let mean = |f: &dyn Fn(&CaseScores) -> f64| -> f64 {
        if n == 0 {
            0.0
        } else {
            cases.iter().map(f).sum::<f64>() / n as f64
        }
    };
    let mut precision = [0.0; MAX_K];
    let mut recall = [0.0; MAX_K];
    for k in 0..MAX_K {
        precision[k] = mean(&|c| c.precision[k]);
        recall[k] = mean(&|c| c.recall[k]);
    }
    AlgorithmMetrics {
        name: name.to_string(),
        notes: notes.map(str::to_string),
        precision,
        recall,
        f1_at_5: mean(&|c| c.f1_at_5),
        mrr: mean(&|c| c.mrr),
        map: mean(&|c| c.map),
        n_cases: n,
        n_failures: cases.iter().filter(|c| c.failed).count(),
        cases,
    }
}

/// Two-sided rank-sum p-value of one metric between two algorithms.
#[derive(Clone, Debug, PartialEq)]
pub struct Significance {
    pub a: String,
    pub b: String,
    pub metric: Metric,
    pub p_value: f64,
}

impl Significance {
    /// Star notation: `***` below .001, `**` below .01, `*` below .05.
    pub fn stars(&self) -> &'static str {
        match self.p_value {
            p if p < 0.001 => "***",
            p if p < 0.01 => "**",
            p if p < 0.05 => "*",
            _ => "",
        }
    }
}

/// Rank-sum tests of every metric for every pair of algorithms, in input
/// order. Pairs with no cases are skipped.
pub fn pairwise_significance(algorithms: &[AlgorithmMetrics]) -> Vec<Significance> {
    let mut out = Vec::new();
    for (i, a) in algorithms.iter().enumerate() {
        for b in &algorithms[i + 1..] {
            for metric in Metric::ALL {
                let x: Vec<f64> = a.cases.iter().map(|c| metric.of(c)).collect();
                let y: Vec<f64> = b.cases.iter().map(|c| metric.of(c)).collect();
                if let Ok(p_value) = wilcoxon_rank_sum(&x, &y) {
                    out.push(Significance {
                        a: a.name.clone(),
                        b: b.name.clone(),
                        metric,
                        p_value,
                    });
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalConfig {
    pub precision_mode: PrecisionMode,
    pub significance: bool,
    /// Fingerprint of the run configuration, copied into the report.
    pub config_fingerprint: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub algorithms: Vec<AlgorithmMetrics>,
    pub significance: Vec<Significance>,
    pub precision_mode: PrecisionMode,
    pub config_fingerprint: u64,
}

impl EvalReport {
    pub fn assemble(algorithms: Vec<AlgorithmMetrics>, config: &EvalConfig) -> Self {
        let significance = if config.significance {
            pairwise_significance(&algorithms)
        } else {
            Vec::new()
        };
        Self {
            algorithms,
            significance,
            precision_mode: config.precision_mode,
            config_fingerprint: config.config_fingerprint,
        }
    }

    pub fn get(&self, name: &str) -> Option<&AlgorithmMetrics> {
        self.algorithms.iter().find(|a| a.name == name)
    }
}

/// Runs every algorithm on every test post, sequentially.
pub fn evaluate(algorithms: &[&dyn TagRecommender], test: &[Post], config: &EvalConfig) -> EvalReport {
    let metrics = algorithms
        .iter()
        .map(|alg| {
            let cases = test.iter().map(|p| run_case(*alg, p, config.precision_mode)).collect();
            aggregate(alg.name(), alg.notes(), cases)
        })
        .collect();
    EvalReport::assemble(metrics, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn case(truth: &[u32], predicted: &[u32]) -> EvalCase {
        let n = predicted.len();
        let ranked = RankedTags::from_scores(
            predicted.iter().enumerate().map(|(i, &t)| (TagId(t), (n - i) as f64)),
            MAX_K,
        );
        EvalCase::new(UserId(0), ResourceId(0), truth.iter().map(|&t| TagId(t)), ranked).unwrap()
    }

    #[test]
    fn perfect_and_missed() {
        let c = case(&[1, 2, 3, 4, 5], &[5, 4, 3, 2, 1]);
        assert_eq!(precision_recall_at_k(&c, 5, PrecisionMode::Returned), (1.0, 1.0));
        let c = case(&[1], &[2, 3]);
        assert_eq!(precision_recall_at_k(&c, 5, PrecisionMode::Returned), (0.0, 0.0));
        assert_eq!(f1_at_5(&c), 0.0);
    }

    #[test]
    fn two_hits_in_five() {
        let c = case(&[1, 2, 3, 4], &[1, 9, 2, 8, 7, 3]);
        assert_eq!(precision_recall_at_k(&c, 5, PrecisionMode::Returned), (0.4, 0.5));
        assert!((f1_at_5(&c) - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn short_lists() {
        let c = case(&[1, 2], &[1, 3]);
        assert_eq!(precision_recall_at_k(&c, 5, PrecisionMode::Returned).0, 0.5);
        assert_eq!(precision_recall_at_k(&c, 5, PrecisionMode::Strict).0, 0.2);
        let c = case(&[1], &[]);
        assert_eq!(precision_recall_at_k(&c, 3, PrecisionMode::Returned), (0.0, 0.0));
    }

    #[test]
    fn ranks_one_and_three() {
        let c = case(&[1, 2], &[1, 7, 2]);
        assert!((mrr(&c) - (1.0 + 1.0 / 3.0) / 2.0).abs() < 1e-15);
        assert!((map_at_10(&c) - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
        let c = case(&[1], &[1]);
        assert_eq!((mrr(&c), map_at_10(&c)), (1.0, 1.0));
    }

    #[test]
    fn empty_truth_rejected() {
        assert_eq!(
            EvalCase::new(UserId(0), ResourceId(0), vec![], RankedTags::empty()),
            Err(EvalError::NoTrueTags)
        );
    }

    #[test]
    fn aggregate_means() {
        let scores = vec![
            score_case(&case(&[1], &[1]), PrecisionMode::Returned, false),
            score_case(&case(&[1], &[2]), PrecisionMode::Returned, true),
        ];
        let m = aggregate("x", None, scores);
        assert_eq!(m.n_cases, 2);
        assert_eq!(m.n_failures, 1);
        assert_eq!(m.mrr, 0.5);
        assert_eq!(m.precision[0], 0.5);
    }
}
