//! AUC scoring, truth-stratified test sets and the overlap diagnostic.

use std::collections::{BTreeMap, HashMap};

use crate::error::{arg, Error, Result};
use crate::model::{dot, logistic, HyperObservations, HyperScorer, LatentFactors, PairObservations};

/// Area under the ROC curve via the Mann-Whitney rank statistic. Tied
/// scores share their average rank, so a tied positive/negative pair counts
/// one half.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return arg(format!("{} scores but {} labels", scores.len(), labels.len()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return arg("NaN score");
    }
    let positives = labels.iter().filter(|&&y| y == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Evaluation(format!(
            "AUC needs both classes ({positives} positive, {negatives} negative)"
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // twice the rank sum keeps tied average ranks integral
    let mut rank_sum2: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let tied_pos = order[start..end].iter().filter(|&&i| labels[i] == 1).count() as u128;
        // ranks start..end (1-based start+1..=end) average to (start + 1 + end) / 2
        rank_sum2 += tied_pos * (start as u128 + 1 + end as u128);
        start = end;
    }
    let p = positives as u128;
    let u2 = rank_sum2 - p * (p + 1);
    Ok(u2 as f64 / (2.0 * positives as f64 * negatives as f64))
}

/// Splits indices into those whose true probability lies in `[low, high]`
/// (A1) and the rest (A2).
pub fn stratify_by_truth(truth: &[f64], low: f64, high: f64) -> Result<(Vec<usize>, Vec<usize>)> {
    if low > high {
        return arg(format!("stratification bounds reversed: {low} > {high}"));
    }
    if let Some(i) = truth.iter().position(|p| !p.is_finite()) {
        return arg(format!("missing truth for entry {i}"));
    }
    let (a1, a2): (Vec<usize>, Vec<usize>) = (0..truth.len()).partition(|&i| truth[i] >= low && truth[i] <= high);
    Ok((a1, a2))
}

/// Largest number of observed hyperlinks sharing one observed pair.
pub fn overlap_degree_c0(pairs: &PairObservations, hypers: &HyperObservations) -> usize {
    if pairs.is_empty() || hypers.is_empty() {
        return 0;
    }
    let mut counts: HashMap<(usize, usize), usize> = pairs.entries().iter().map(|e| ((e.i, e.j), 0)).collect();
    for t in hypers.tuples() {
        for a in 0..t.len() {
            for b in a + 1..t.len() {
                if let Some(c) = counts.get_mut(&(t[a], t[b])) {
                    *c += 1;
                }
            }
        }
    }
    counts.into_values().max().unwrap_or(0)
}

/// AUC (or the reason it is undefined), size and probability error of one
/// test set.
#[derive(Debug, Clone, PartialEq)]
pub struct SetScore {
    pub auc: std::result::Result<f64, String>,
    pub count: usize,
    pub mse: Option<f64>,
}

/// Per-test-set results keyed by set name, iterated in name order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub sets: BTreeMap<String, SetScore>,
}

impl EvalReport {
    pub fn auc(&self, name: &str) -> Option<f64> {
        self.sets.get(name).and_then(|s| s.auc.as_ref().ok().copied())
    }
}

/// Ground-truth probabilities aligned with the test entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TruthProbs {
    pub pair: Option<Vec<f64>>,
    pub hyper: Option<Vec<f64>>,
}

pub const STRATA: (f64, f64) = (0.2, 0.8);

pub fn pair_scores(z: &LatentFactors, pairs: &PairObservations) -> Vec<f64> {
    pairs
        .entries()
        .iter()
        .map(|e| logistic(dot(z.row(e.i), z.row(e.j))))
        .collect()
}

pub fn hyper_scores(z: &LatentFactors, scorer: HyperScorer, hypers: &HyperObservations) -> Vec<f64> {
    hypers.tuples().map(|t| scorer.prob(z, t)).collect()
}

fn score_set(scores: &[f64], labels: &[u8], truth: Option<&[f64]>) -> SetScore {
    SetScore {
        auc: auc(scores, labels).map_err(|e| e.to_string()),
        count: scores.len(),
        mse: truth.map(|t| {
            scores.iter().zip(t).map(|(s, p)| (s - p).powi(2)).sum::<f64>() / scores.len().max(1) as f64
        }),
    }
}

fn add_sets(report: &mut EvalReport, prefix: &str, scores: &[f64], labels: &[u8], truth: Option<&[f64]>) -> Result<()> {
    report.sets.insert(prefix.to_string(), score_set(scores, labels, truth));
    if let Some(truth) = truth {
        if truth.len() != scores.len() {
            return arg(format!("{prefix}: {} truth values for {} entries", truth.len(), scores.len()));
        }
        let (a1, a2) = stratify_by_truth(truth, STRATA.0, STRATA.1)?;
        for (name, idx) in [("A1", a1), ("A2", a2)] {
            let s: Vec<f64> = idx.iter().map(|&i| scores[i]).collect();
            let y: Vec<u8> = idx.iter().map(|&i| labels[i]).collect();
            let t: Vec<f64> = idx.iter().map(|&i| truth[i]).collect();
            report.sets.insert(format!("{prefix}_{name}"), score_set(&s, &y, Some(&t)));
        }
    }
    Ok(())
}

/// Scores every test entry and reports AUC per set: `pair`, `hyper` and,
/// with ground truth, the stratified `*_A1` / `*_A2` sets. A set with a
/// single class keeps its row with the AUC error recorded.
pub fn evaluate(
    z: &LatentFactors,
    scorer: HyperScorer,
    test_pairs: &PairObservations,
    test_hypers: &HyperObservations,
    truth: Option<&TruthProbs>,
) -> Result<EvalReport> {
    if test_pairs.is_empty() && test_hypers.is_empty() {
        return arg("evaluation needs at least one non-empty test set");
    }
    let mut report = EvalReport::default();
    if !test_pairs.is_empty() {
        let scores = pair_scores(z, test_pairs);
        add_sets(&mut report, "pair", &scores, &test_pairs.labels(), truth.and_then(|t| t.pair.as_deref()))?;
    }
    if !test_hypers.is_empty() {
        let scores = hyper_scores(z, scorer, test_hypers);
        add_sets(&mut report, "hyper", &scores, test_hypers.labels(), truth.and_then(|t| t.hyper.as_deref()))?;
    }
    Ok(report)
}

/// Mean of the pairwise and hyperlink AUCs over whichever validation sets
/// are non-empty.
pub fn validation_auc(
    z: &LatentFactors,
    scorer: HyperScorer,
    valid_pairs: &PairObservations,
    valid_hypers: &HyperObservations,
) -> Result<f64> {
    let mut parts = Vec::new();
    if !valid_pairs.is_empty() {
        parts.push(auc(&pair_scores(z, valid_pairs), &valid_pairs.labels())?);
    }
    if !valid_hypers.is_empty() {
        parts.push(auc(&hyper_scores(z, scorer, valid_hypers), valid_hypers.labels())?);
    }
    if parts.is_empty() {
        return arg("empty validation sets");
    }
    Ok(parts.iter().sum::<f64>() / parts.len() as f64)
}
