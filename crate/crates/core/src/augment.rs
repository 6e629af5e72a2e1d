//! Hyperlink augmentation from pairwise structure.
//!
//! 1. Embed the observed network with the ridge penalty switched off.
//! 2. Collect unobserved tuples whose internal pairs are all observed with
//!    the same label: all ones form the clique pool, all zeros the
//!    non-clique pool.
//! 3. Keep clique tuples scored at least `1 - delta` as present hyperlinks
//!    and non-clique tuples scored at most `delta` as absent ones, then
//!    refit the joint embedding on the enlarged hyperlink set.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{arg, Error, Result};
use crate::eval;
use crate::model::{HyperObservations, HyperScorer, LatentFactors, ModelConfig, PairObservations};
use crate::optim::{fit_from, fit_variant, init_factors, FitReport, Method, TuningTable};

pub const DEFAULT_CAP_PER_CLASS: usize = 20_000;

/// Which candidate pool an augmented tuple came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Clique,
    NonClique,
}

/// Candidate tuples for augmentation, stored flat with `m` indices each.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePools {
    pub m: usize,
    pub clique: Vec<usize>,
    pub non_clique: Vec<usize>,
}

impl CandidatePools {
    pub fn clique_tuples(&self) -> impl Iterator<Item = &[usize]> {
        self.clique.chunks_exact(self.m)
    }

    pub fn non_clique_tuples(&self) -> impl Iterator<Item = &[usize]> {
        self.non_clique.chunks_exact(self.m)
    }

    pub fn clique_len(&self) -> usize {
        self.clique.len() / self.m
    }

    pub fn non_clique_len(&self) -> usize {
        self.non_clique.len() / self.m
    }
}

/// Fixed-size uniform subsample of a stream (reservoir sampling).
struct Reservoir {
    m: usize,
    cap: Option<usize>,
    seen: usize,
    items: Vec<usize>,
}

impl Reservoir {
    fn new(m: usize, cap: Option<usize>) -> Self {
        Reservoir {
            m,
            cap,
            seen: 0,
            items: Vec::new(),
        }
    }

    fn offer(&mut self, tuple: &[usize], rng: &mut ChaCha8Rng) {
        self.seen += 1;
        match self.cap {
            Some(cap) if self.seen > cap => {
                let slot = rng.gen_range(0..self.seen);
                if slot < cap {
                    self.items[slot * self.m..(slot + 1) * self.m].copy_from_slice(tuple);
                }
            }
            _ => self.items.extend_from_slice(tuple),
        }
    }
}

/// Forward adjacency (neighbours with a larger index), sorted, optionally
/// restricted to pairs observed with label `y`.
pub(crate) fn forward_adjacency(pairs: &PairObservations, n: usize, y: Option<u8>) -> Vec<Vec<usize>> {
    let mut fwd = vec![Vec::new(); n];
    for e in pairs.entries().iter().filter(|e| y.is_none_or(|y| e.y == y)) {
        fwd[e.i].push(e.j);
    }
    for list in &mut fwd {
        list.sort_unstable();
    }
    fwd
}

fn intersect_sorted(a: &[usize], b: &[usize], out: &mut Vec<usize>) {
    out.clear();
    let (mut x, mut y) = (0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[x]);
                x += 1;
                y += 1;
            }
        }
    }
}

/// Calls `visit` for every m-clique (ascending tuple) of the graph given by
/// forward adjacency lists. Candidates are narrowed by intersecting the
/// forward lists of the nodes chosen so far.
pub(crate) fn for_each_clique(fwd: &[Vec<usize>], m: usize, visit: &mut dyn FnMut(&[usize])) {
    fn extend(fwd: &[Vec<usize>], m: usize, stack: &mut Vec<usize>, candidates: &[usize], visit: &mut dyn FnMut(&[usize])) {
        if stack.len() == m {
            visit(stack);
            return;
        }
        let mut next = Vec::new();
        for (pos, &v) in candidates.iter().enumerate() {
            // not enough candidates left to complete the clique
            if candidates.len() - pos < m - stack.len() {
                break;
            }
            stack.push(v);
            if stack.len() == m {
                visit(stack);
            } else {
                intersect_sorted(&candidates[pos + 1..], &fwd[v], &mut next);
                let cands = std::mem::take(&mut next);
                extend(fwd, m, stack, &cands, visit);
                next = cands;
            }
            stack.pop();
        }
    }
    if m == 0 {
        return;
    }
    let mut stack = Vec::with_capacity(m);
    for (u, list) in fwd.iter().enumerate() {
        stack.push(u);
        if m == 1 {
            visit(&stack);
        } else {
            extend(fwd, m, &mut stack, list, visit);
        }
        stack.pop();
    }
}

/// Enumerates unobserved m-tuples whose internal pairs are all observed with
/// one constant label. With `cap_per_class`, each pool is a seeded uniform
/// subsample of at most that many tuples.
pub fn build_candidate_pools(
    pairs: &PairObservations,
    hypers: &HyperObservations,
    m: usize,
    cap_per_class: Option<usize>,
    seed: u64,
) -> Result<CandidatePools> {
    if m < 3 {
        return arg(format!("candidate pools need m >= 3, got {m}"));
    }
    if !hypers.is_empty() && hypers.m() != m {
        return arg(format!("observed hyperlinks have order {}, pools requested for {m}", hypers.m()));
    }
    let n = pairs.n().max(hypers.n());
    let observed = hypers.tuple_set();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pools = [Reservoir::new(m, cap_per_class), Reservoir::new(m, cap_per_class)];
    for (label, pool) in [(1u8, 0usize), (0u8, 1usize)] {
        let fwd = forward_adjacency(pairs, n, Some(label));
        let reservoir = &mut pools[pool];
        for_each_clique(&fwd, m, &mut |t| {
            if !observed.contains(t) {
                reservoir.offer(t, &mut rng);
            }
        });
    }
    let [clique, non_clique] = pools;
    Ok(CandidatePools {
        m,
        clique: clique.items,
        non_clique: non_clique.items,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedEntry {
    pub tuple: Vec<usize>,
    pub y: u8,
    pub source: Source,
    pub score: f64,
}

/// Pseudo-labelled hyperlink statuses chosen from the candidate pools.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AugmentedSet {
    pub entries: Vec<AugmentedEntry>,
}

/// Weight given to augmented entries in the refit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AugmentWeight {
    #[default]
    Unit,
    /// `score` for present links, `1 - score` for absent ones.
    Confidence,
}

impl AugmentedSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_observations(&self, n: usize, m: usize, weighting: AugmentWeight) -> HyperObservations {
        let mut out = HyperObservations::empty(n, m);
        for e in &self.entries {
            let w = match weighting {
                AugmentWeight::Unit => 1.0,
                AugmentWeight::Confidence if e.y == 1 => e.score,
                AugmentWeight::Confidence => 1.0 - e.score,
            };
            out.push_trusted(&e.tuple, e.y, w.max(f64::MIN_POSITIVE));
        }
        out
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return arg(format!("delta must lie in (0, 0.5), got {delta}"));
    }
    Ok(())
}

/// Keeps low-uncertainty candidates: clique tuples scored `>= 1 - delta`
/// become present hyperlinks, non-clique tuples scored `<= delta` absent ones.
pub fn select_augmented(z_obs: &LatentFactors, pools: &CandidatePools, beta: f64, delta: f64) -> Result<AugmentedSet> {
    select_with(z_obs, pools, HyperScorer::new(beta), delta)
}

fn select_with(z_obs: &LatentFactors, pools: &CandidatePools, scorer: HyperScorer, delta: f64) -> Result<AugmentedSet> {
    check_delta(delta)?;
    let mut entries = Vec::new();
    for t in pools.clique_tuples() {
        let score = scorer.prob(z_obs, t);
        if score >= 1.0 - delta {
            entries.push(AugmentedEntry { tuple: t.to_vec(), y: 1, source: Source::Clique, score });
        }
    }
    for t in pools.non_clique_tuples() {
        let score = scorer.prob(z_obs, t);
        if score <= delta {
            entries.push(AugmentedEntry { tuple: t.to_vec(), y: 0, source: Source::NonClique, score });
        }
    }
    Ok(AugmentedSet { entries })
}

/// Fits the joint embedding on the observed data with the ridge penalty
/// switched off.
pub fn embed_observed(
    pairs: &PairObservations,
    hypers: &HyperObservations,
    config: &ModelConfig,
) -> Result<(LatentFactors, FitReport)> {
    if pairs.is_empty() {
        return arg("augmentation needs pairwise observations");
    }
    let cfg = ModelConfig { lambda: 0.0, ..config.clone() };
    fit_variant(Method::Jle, pairs, hypers, &cfg)
}

/// Knobs of the augmentation pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentOptions {
    pub delta: f64,
    pub cap_per_class: Option<usize>,
    /// Start the refit from the step-1 embedding rather than a fresh seeded
    /// initialisation.
    pub warm_start: bool,
    /// Ridge penalty for the refit; `None` reuses the configured one.
    pub refit_lambda: Option<f64>,
    pub weighting: AugmentWeight,
    pub pool_seed: u64,
}

impl Default for AugmentOptions {
    fn default() -> Self {
        AugmentOptions {
            delta: 0.1,
            cap_per_class: Some(DEFAULT_CAP_PER_CLASS),
            warm_start: true,
            refit_lambda: None,
            weighting: AugmentWeight::Unit,
            pool_seed: 0,
        }
    }
}

/// Step 1 and step 2 computed once, reusable across cutoffs.
#[derive(Debug, Clone)]
pub struct AugmentPipeline<'a> {
    pairs: &'a PairObservations,
    hypers: &'a HyperObservations,
    config: ModelConfig,
    options: AugmentOptions,
    pub z_obs: LatentFactors,
    pub pools: CandidatePools,
}

impl<'a> AugmentPipeline<'a> {
    pub fn prepare(
        pairs: &'a PairObservations,
        hypers: &'a HyperObservations,
        config: &ModelConfig,
        options: &AugmentOptions,
    ) -> Result<Self> {
        let m = if hypers.is_empty() { 3 } else { hypers.m() };
        let (z_obs, _) = embed_observed(pairs, hypers, config)?;
        let pools = build_candidate_pools(pairs, hypers, m, options.cap_per_class, options.pool_seed)?;
        Ok(AugmentPipeline {
            pairs,
            hypers,
            config: config.clone(),
            options: options.clone(),
            z_obs,
            pools,
        })
    }

    pub fn select(&self, delta: f64) -> Result<AugmentedSet> {
        select_with(&self.z_obs, &self.pools, HyperScorer::new(self.config.beta), delta)
    }

    /// Refits JLE on the observed pairs and the union of observed and
    /// augmented hyperlinks. An empty augmentation reproduces the plain
    /// seeded JLE fit.
    pub fn refit(&self, augmented: &AugmentedSet) -> Result<(LatentFactors, FitReport)> {
        let cfg = ModelConfig {
            lambda: self.options.refit_lambda.unwrap_or(self.config.lambda),
            ..self.config.clone()
        };
        if augmented.is_empty() {
            return fit_variant(Method::Jle, self.pairs, self.hypers, &cfg);
        }
        let n = self.pairs.n().max(self.hypers.n());
        let extra = augmented.to_observations(n, self.pools.m, self.options.weighting);
        let merged = if self.hypers.is_empty() {
            extra
        } else {
            self.hypers.union(&extra)?
        };
        let init = if self.options.warm_start {
            self.z_obs.clone()
        } else {
            let o = &cfg.optimizer;
            init_factors(n, cfg.rank, o.init_scale, o.seed)
        };
        fit_from(Method::Jle, init, self.pairs, &merged, &cfg)
    }
}

/// Runs the three augmentation steps and the refit.
pub fn augment_and_refit(
    pairs: &PairObservations,
    hypers: &HyperObservations,
    config: &ModelConfig,
    options: &AugmentOptions,
) -> Result<(LatentFactors, AugmentedSet, FitReport)> {
    check_delta(options.delta)?;
    let pipeline = AugmentPipeline::prepare(pairs, hypers, config, options)?;
    let augmented = pipeline.select(options.delta)?;
    let (z, report) = pipeline.refit(&augmented)?;
    Ok((z, augmented, report))
}

/// Picks the cutoff with the best validation AUC; ties go to the larger
/// cutoff. Grid values are checked before any fitting.
pub fn tune_delta(
    grid: &[f64],
    pairs: &PairObservations,
    hypers: &HyperObservations,
    valid_pairs: &PairObservations,
    valid_hypers: &HyperObservations,
    config: &ModelConfig,
    options: &AugmentOptions,
) -> Result<(f64, TuningTable)> {
    if grid.is_empty() {
        return arg("empty delta grid");
    }
    for &d in grid {
        check_delta(d)?;
    }
    if valid_pairs.is_empty() && valid_hypers.is_empty() {
        return arg("tuning needs a non-empty validation set");
    }
    let mut values = grid.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();

    let pipeline = AugmentPipeline::prepare(pairs, hypers, config, options)?;
    let scorer = HyperScorer::new(config.beta);
    let mut rows = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    for delta in values {
        let augmented = pipeline.select(delta)?;
        let z = match pipeline.refit(&augmented) {
            Ok((z, _)) => z,
            Err(Error::Diverged(_)) => continue,
            Err(e) => return Err(e),
        };
        let score = eval::validation_auc(&z, scorer, valid_pairs, valid_hypers)?;
        rows.push((delta, score));
        // ascending grid: ">=" hands ties to the larger cutoff
        if best.is_none_or(|(_, s)| score >= s) {
            best = Some((delta, score));
        }
    }
    match best {
        Some((delta, _)) => Ok((delta, TuningTable { rows })),
        None => Err(Error::Tuning("every delta refit diverged".into())),
    }
}

/// Every tuple's internal pairs, for invariant checks.
pub fn internal_pairs(tuple: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..tuple.len()).flat_map(move |a| (a + 1..tuple.len()).map(move |b| (tuple[a], tuple[b])))
}

/// True when the augmented set avoids observed tuples and every entry's
/// pairs are observed with the label matching its source.
pub fn check_augmented(pairs: &PairObservations, hypers: &HyperObservations, augmented: &AugmentedSet) -> bool {
    let labels = pairs.label_map();
    let observed: HashSet<&[usize]> = hypers.tuple_set();
    augmented.entries.iter().all(|e| {
        let want = match e.source {
            Source::Clique => 1,
            Source::NonClique => 0,
        };
        !observed.contains(e.tuple.as_slice())
            && e.y == want
            && internal_pairs(&e.tuple).all(|p| labels.get(&p) == Some(&want))
    })
}
