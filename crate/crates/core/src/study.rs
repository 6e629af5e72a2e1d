//! Replicated simulation studies: generate, fit every method, evaluate and
//! summarise.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::augment::{tune_delta, AugmentOptions, AugmentPipeline};
use crate::error::{arg, Result};
use crate::eval::{evaluate, EvalReport};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::io::CirclesData;
use crate::model::{hyper_prob_generalized, HyperObservations, HyperScorer, LatentFactors, ModelConfig, PairObservations};
use crate::optim::{fit_variant, tune_lambda_for, Method};
use crate::simgen::{make_splits, GenSpec, SplitBundle};

/// A fitting method as run by the studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Estimator {
    Ple,
    Hle,
    Jle,
    AugJle,
}

impl Estimator {
    pub const ALL: [Estimator; 4] = [Estimator::Ple, Estimator::Hle, Estimator::Jle, Estimator::AugJle];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Ple => "PLE",
            Estimator::Hle => "HLE",
            Estimator::Jle => "JLE",
            Estimator::AugJle => "Aug JLE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ple" => Some(Estimator::Ple),
            "hle" => Some(Estimator::Hle),
            "jle" => Some(Estimator::Jle),
            "augjle" | "aug-jle" | "aug_jle" => Some(Estimator::AugJle),
            _ => None,
        }
    }

    /// Scoring rule for hyperlinks under this estimator.
    pub fn scorer(self, beta: f64) -> HyperScorer {
        match self {
            Estimator::Hle => Method::Hle.scorer(beta),
            _ => Method::Jle.scorer(beta),
        }
    }
}

/// Fitting settings shared by every method of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub model: ModelConfig,
    /// Ridge grid tuned on validation AUC; `None` uses `model.lambda`.
    pub lambda_grid: Option<Vec<f64>>,
    /// Cutoff grid tuned on validation AUC; `None` uses `augment.delta`.
    pub delta_grid: Option<Vec<f64>>,
    pub augment: AugmentOptions,
    pub estimators: Vec<Estimator>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            model: ModelConfig::default(),
            lambda_grid: None,
            delta_grid: None,
            augment: AugmentOptions::default(),
            estimators: Estimator::ALL.to_vec(),
        }
    }
}

/// Ridge grid used by the reproduction runs. The penalty is not normalised
/// by the number of observations, so useful values are small.
pub const LAMBDA_GRID: [f64; 4] = [0.0, 1e-4, 3e-4, 1e-3];
/// Cutoff grid used by the reproduction runs.
pub const DELTA_GRID: [f64; 3] = [0.05, 0.1, 0.2];

impl StudyConfig {
    /// Default model with both tuning grids switched on.
    pub fn tuned() -> Self {
        StudyConfig {
            lambda_grid: Some(LAMBDA_GRID.to_vec()),
            delta_grid: Some(DELTA_GRID.to_vec()),
            ..StudyConfig::default()
        }
    }
}

/// Fitted factors plus the tuned settings.
#[derive(Debug, Clone)]
pub struct Fitted {
    pub z: LatentFactors,
    pub lambda: f64,
    pub delta: Option<f64>,
    pub augmented: usize,
}

/// Fits one estimator on the bundle's training data, tuning on its
/// validation data when grids are given.
pub fn fit_estimator(est: Estimator, bundle: &SplitBundle, config: &StudyConfig) -> Result<Fitted> {
    fit_estimator_with(est, bundle, config, None)
}

/// As [`fit_estimator`], with an already tuned ridge penalty skipping the
/// grid search.
pub fn fit_estimator_with(est: Estimator, bundle: &SplitBundle, config: &StudyConfig, lambda: Option<f64>) -> Result<Fitted> {
    let (tp, th) = (&bundle.train_pairs, &bundle.train_hypers);
    let (vp, vh) = (&bundle.valid_pairs, &bundle.valid_hypers);
    let method = match est {
        Estimator::Ple => Method::Ple,
        Estimator::Hle => Method::Hle,
        _ => Method::Jle,
    };
    // PLE and HLE are tuned on the validation data they model
    let (vp_m, vh_m) = match est {
        Estimator::Ple => (vp.clone(), HyperObservations::empty(vh.n(), vh.m())),
        Estimator::Hle => (PairObservations::empty(vp.n()), vh.clone()),
        _ => (vp.clone(), vh.clone()),
    };
    let lambda = match (lambda, &config.lambda_grid) {
        (Some(l), _) => l,
        (None, Some(grid)) => tune_lambda_for(method, grid, tp, th, &vp_m, &vh_m, &config.model)?.0,
        (None, None) => config.model.lambda,
    };
    let model = ModelConfig { lambda, ..config.model.clone() };
    if est != Estimator::AugJle {
        let (z, _) = fit_variant(method, tp, th, &model)?;
        return Ok(Fitted { z, lambda, delta: None, augmented: 0 });
    }
    let delta = match &config.delta_grid {
        Some(grid) => tune_delta(grid, tp, th, vp, vh, &model, &config.augment)?.0,
        None => config.augment.delta,
    };
    let pipeline = AugmentPipeline::prepare(tp, th, &model, &config.augment)?;
    let augmented = pipeline.select(delta)?;
    let (z, _) = pipeline.refit(&augmented)?;
    Ok(Fitted { z, lambda, delta: Some(delta), augmented: augmented.len() })
}

/// One replicate: every configured estimator's report on the test sets.
#[derive(Debug, Clone)]
pub struct ReplicateResult {
    pub seed: u64,
    pub reports: BTreeMap<Estimator, std::result::Result<EvalReport, String>>,
    pub measured_rho: Option<f64>,
    pub measured_rho_obs: Option<f64>,
}

pub const RHO_SAMPLES: usize = 100_000;

pub fn run_replicate(spec: &GenSpec, config: &StudyConfig) -> Result<ReplicateResult> {
    let bundle = make_splits(spec)?;
    let truth = bundle.test_truth();
    let mut reports = BTreeMap::new();
    // JLE and Aug JLE share the tuned penalty
    let mut joint_lambda = None;
    for &est in &config.estimators {
        let hint = if matches!(est, Estimator::Jle | Estimator::AugJle) { joint_lambda } else { None };
        let outcome = fit_estimator_with(est, &bundle, config, hint).and_then(|fitted| {
            if matches!(est, Estimator::Jle | Estimator::AugJle) {
                joint_lambda = Some(fitted.lambda);
            }
            evaluate(
                &fitted.z,
                est.scorer(config.model.beta),
                &bundle.test_pairs,
                &bundle.test_hypers,
                Some(&truth),
            )
        });
        reports.insert(est, outcome.map_err(|e| e.to_string()));
    }
    let measured_rho = if spec.rho > 0.0 {
        bundle.truth.measure_rho(RHO_SAMPLES, spec.seed ^ 0x5eed).ok()
    } else {
        None
    };
    Ok(ReplicateResult { seed: spec.seed, reports, measured_rho, measured_rho_obs: bundle.measured_rho_obs })
}

/// Runs `replicates` copies of the spec with seeds `base, base + 1, ...`.
/// A failed replicate is kept with its error.
pub fn run_study(spec: &GenSpec, config: &StudyConfig, replicates: usize) -> Result<Vec<std::result::Result<ReplicateResult, String>>> {
    if replicates == 0 {
        return arg("need at least one replicate");
    }
    Ok((0..replicates as u64)
        .map(|k| {
            let s = GenSpec { seed: spec.seed.wrapping_add(k), ..spec.clone() };
            run_replicate(&s, config).map_err(|e| e.to_string())
        })
        .collect())
}

/// Mean and sample standard deviation (absent for one value).
pub fn mean_sd(values: &[f64]) -> Option<(f64, Option<f64>)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.len() > 1).then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    Some((mean, sd))
}

/// AUC summary per test set and estimator over successful replicates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub cells: BTreeMap<(String, Estimator), (f64, Option<f64>, usize)>,
    pub replicates: usize,
    pub failures: Vec<String>,
}

impl Summary {
    pub fn mean(&self, set: &str, est: Estimator) -> Option<f64> {
        self.cells.get(&(set.to_string(), est)).map(|c| c.0)
    }
}

pub fn summarize(results: &[std::result::Result<ReplicateResult, String>]) -> Summary {
    let mut values: BTreeMap<(String, Estimator), Vec<f64>> = BTreeMap::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rep) => {
                for (est, report) in &rep.reports {
                    match report {
                        Ok(report) => {
                            for name in report.sets.keys() {
                                if let Some(a) = report.auc(name) {
                                    values.entry((name.clone(), *est)).or_default().push(a);
                                }
                            }
                        }
                        Err(e) => failures.push(format!("seed {}: {}: {e}", rep.seed, est.name())),
                    }
                }
            }
            Err(e) => failures.push(e.clone()),
        }
    }
    let cells = values
        .into_iter()
        .map(|(k, v)| {
            let (m, sd) = mean_sd(&v).expect("non-empty");
            (k, (m, sd, v.len()))
        })
        .collect();
    Summary { cells, replicates: results.len(), failures }
}

/// Text table: one row per test set, one column per estimator, cells
/// `mean(sd)` with the deviation omitted for a single replicate.
pub fn format_table(summary: &Summary, estimators: &[Estimator]) -> String {
    let sets: Vec<&String> = {
        let mut s: Vec<&String> = summary.cells.keys().map(|(s, _)| s).collect();
        s.dedup();
        s
    };
    let mut out = String::new();
    write!(out, "{:<12}", "set").unwrap();
    for e in estimators {
        write!(out, "{:>14}", e.name()).unwrap();
    }
    out.push('\n');
    for set in sets {
        write!(out, "{set:<12}").unwrap();
        for e in estimators {
            let cell = match summary.cells.get(&(set.clone(), *e)) {
                Some((m, Some(sd), _)) => format!("{m:.2}({sd:.2})"),
                Some((m, None, _)) => format!("{m:.2}"),
                None => "-".to_string(),
            };
            write!(out, "{cell:>14}").unwrap();
        }
        out.push('\n');
    }
    for f in &summary.failures {
        writeln!(out, "failed: {f}").unwrap();
    }
    out
}

/// Settings of the ego-network experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct EgoConfig {
    pub model: ModelConfig,
    pub lambda_grid: Option<Vec<f64>>,
    /// Train, validation and test shares of all node pairs.
    pub proportions: [f64; 3],
    /// Balanced training triples decomposed from the circles.
    pub train_hypers: usize,
    /// Balanced augmented triples from training cliques and non-cliques.
    pub augmented: usize,
    /// Order of the joint-membership test tuples.
    pub test_order: usize,
    pub test_tuples: usize,
    /// Leave the largest circle out before decomposing.
    pub drop_largest: bool,
    pub seed: u64,
}

impl Default for EgoConfig {
    fn default() -> Self {
        EgoConfig {
            model: ModelConfig::default(),
            lambda_grid: Some(LAMBDA_GRID.to_vec()),
            proportions: [0.4, 0.2, 0.4],
            train_hypers: 600,
            augmented: 2000,
            test_order: 6,
            test_tuples: 2000,
            drop_largest: true,
            seed: 0,
        }
    }
}

/// Test AUCs per estimator: pairwise links and m-order joint membership
/// scored from pairwise concordance alone.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EgoResult {
    pub pair_auc: BTreeMap<Estimator, f64>,
    pub order_auc: BTreeMap<Estimator, f64>,
    pub train_hypers: usize,
    pub augmented: usize,
}

/// Circle-labelled augmentation: training cliques inside one circle become
/// present triples, training non-cliques outside every circle absent ones,
/// sampled half and half.
fn circle_augmentation(
    pairs: &PairObservations,
    hypers: &HyperObservations,
    memberships: &[Vec<usize>],
    count: usize,
    seed: u64,
) -> Result<HyperObservations> {
    let pools = crate::augment::build_candidate_pools(pairs, hypers, 3, Some(crate::augment::DEFAULT_CAP_PER_CLASS), seed)?;
    let mut ones: Vec<&[usize]> = pools.clique_tuples().filter(|t| crate::io::joint_membership(memberships, t) == 1).collect();
    let mut zeros: Vec<&[usize]> = pools.non_clique_tuples().filter(|t| crate::io::joint_membership(memberships, t) == 0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ones.shuffle(&mut rng);
    zeros.shuffle(&mut rng);
    let half = count / 2;
    let take_ones = half.min(ones.len());
    let take_zeros = (count - take_ones).min(zeros.len());
    let entries = ones[..take_ones]
        .iter()
        .map(|t| (t.to_vec(), 1, 1.0))
        .chain(zeros[..take_zeros].iter().map(|t| (t.to_vec(), 0, 1.0)));
    HyperObservations::from_entries(pairs.n(), 3, entries)
}

/// Splits every node pair of an ego-network, decomposes the circles (the
/// largest one optionally dropped) into training triples, and scores PLE, JLE and
/// Aug JLE on held-out pairs and on balanced m-order membership tuples.
pub fn ego_experiment(edges: &[(usize, usize)], circles: &CirclesData, config: &EgoConfig) -> Result<EgoResult> {
    let n = circles.n;
    if n < config.test_order.max(3) {
        return arg(format!("ego-network has only {n} nodes"));
    }
    let props = config.proportions;
    if props.iter().any(|p| !(*p > 0.0)) || (props.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return arg(format!("split proportions {props:?} must be positive and sum to 1"));
    }
    let linked: std::collections::HashSet<(usize, usize)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let mut all: Vec<(usize, usize, u8)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            all.push((i, j, u8::from(linked.contains(&(i, j)))));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    all.shuffle(&mut rng);
    let n_train = (props[0] * all.len() as f64).round() as usize;
    let n_valid = (props[1] * all.len() as f64).round() as usize;
    let train_pairs = PairObservations::from_unordered(n, all[..n_train].iter().copied())?;
    let valid_pairs = PairObservations::from_unordered(n, all[n_train..n_train + n_valid].iter().copied())?;
    let test_pairs = PairObservations::from_unordered(n, all[n_train + n_valid..].iter().copied())?;

    let mut kept = circles.clone();
    if config.drop_largest {
        kept.drop_largest();
    }
    let memberships = kept.memberships();
    let train_hypers = crate::io::circles_to_hyperlinks(&kept, config.train_hypers, true, config.seed ^ 0x7ea1)?;
    let augmented = circle_augmentation(&train_pairs, &train_hypers, &memberships, config.augmented, config.seed ^ 0xa06)?;
    let joint_hypers = train_hypers.union(&augmented)?;
    let test_tuples = crate::io::circles_to_tuples(&kept, config.test_order, config.test_tuples, true, config.seed ^ 0x7e57)?;

    let no_hypers = HyperObservations::empty(n, 3);
    let mut result = EgoResult { train_hypers: train_hypers.len(), augmented: augmented.len(), ..EgoResult::default() };
    for (est, method, hypers) in [
        (Estimator::Ple, Method::Ple, &no_hypers),
        (Estimator::Jle, Method::Jle, &train_hypers),
        (Estimator::AugJle, Method::Jle, &joint_hypers),
    ] {
        let lambda = match &config.lambda_grid {
            Some(grid) => tune_lambda_for(method, grid, &train_pairs, hypers, &valid_pairs, &no_hypers, &config.model)?.0,
            None => config.model.lambda,
        };
        let (z, _) = fit_variant(method, &train_pairs, hypers, &ModelConfig { lambda, ..config.model.clone() })?;
        let pair = crate::eval::auc(&crate::eval::pair_scores(&z, &test_pairs), &test_pairs.labels())?;
        let scores: Vec<f64> = test_tuples
            .tuples()
            .map(|t| {
                let rows: Vec<&[f64]> = t.iter().map(|&i| z.row(i)).collect();
                hyper_prob_generalized(&rows)
            })
            .collect::<Result<_>>()?;
        let order = crate::eval::auc(&scores, test_tuples.labels())?;
        result.pair_auc.insert(est, pair);
        result.order_auc.insert(est, order);
    }
    Ok(result)
}
