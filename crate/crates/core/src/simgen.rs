//! Synthetic networks: latent factors, pairwise links, hyperlinks under
//! three generating models, missing-not-at-random observation sampling and
//! the dependency estimators used to check them.
//!
//! Hyperlink labels are drawn lazily. Each tuple's uniform variate is a hash
//! of the generator seed and the tuple, so a label does not depend on which
//! other tuples were generated or in what order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::augment::{for_each_clique, forward_adjacency};
use crate::error::{arg, Error, Result};
use crate::eval::TruthProbs;
use crate::model::{
    concordance_term, dot, logistic, Concordance, HyperObservations, LatentFactors, PairEntry, PairObservations,
};

/// Dense storage for one value per unordered pair `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTable<T> {
    n: usize,
    values: Vec<T>,
}

impl<T: Copy> PairTable<T> {
    pub fn filled(n: usize, value: T) -> Self {
        PairTable {
            n,
            values: vec![value; n * n.saturating_sub(1) / 2],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        debug_assert!(i != j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    /// Inverse of [`PairTable::index`].
    pub fn pair(&self, idx: usize) -> (usize, usize) {
        let mut i = 0;
        let mut start = 0;
        loop {
            let row = self.n - i - 1;
            if idx < start + row {
                return (i, i + 1 + idx - start);
            }
            start += row;
            i += 1;
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[self.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        let idx = self.index(i, j);
        self.values[idx] = value;
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// All pairs in index order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| (i + 1..self.n).map(move |j| (i, j)))
    }
}

/// Every pair's realised label and generating probability.
#[derive(Debug, Clone, PartialEq)]
pub struct FullNetwork {
    pub labels: PairTable<u8>,
    pub probs: PairTable<f64>,
}

impl FullNetwork {
    pub fn n(&self) -> usize {
        self.labels.n()
    }

    /// 1 when every internal pair of the tuple is linked.
    pub fn clique(&self, tuple: &[usize]) -> u8 {
        for a in 0..tuple.len() {
            for b in a + 1..tuple.len() {
                if self.labels.get(tuple[a], tuple[b]) == 0 {
                    return 0;
                }
            }
        }
        1
    }

    /// Probability that the tuple forms a clique.
    pub fn clique_prob(&self, tuple: &[usize]) -> f64 {
        let mut q = 1.0;
        for a in 0..tuple.len() {
            for b in a + 1..tuple.len() {
                q *= self.probs.get(tuple[a], tuple[b]);
            }
        }
        q
    }

    /// Observation set listing the given pairs with their labels.
    pub fn observe(&self, pairs: impl IntoIterator<Item = (usize, usize)>) -> PairObservations {
        let entries = pairs
            .into_iter()
            .map(|(a, b)| {
                let (i, j) = (a.min(b), a.max(b));
                PairEntry { i, j, y: self.labels.get(i, j) }
            })
            .collect();
        PairObservations::from_trusted(self.n(), entries)
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Uniform variate in `[0, 1)` keyed by seed and tuple.
pub fn tuple_uniform(seed: u64, tuple: &[usize]) -> f64 {
    let mut h = splitmix(seed);
    for &i in tuple {
        h = splitmix(h ^ i as u64);
    }
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn mixture_entry(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.5) {
        rng.gen_range(-1.0..-0.6)
    } else {
        rng.gen_range(0.6..1.0)
    }
}

/// Entries drawn from the equal mixture of `U(-1, -0.6)` and `U(0.6, 1)`.
pub fn gen_latent_mixture(n: usize, r: usize, seed: u64) -> LatentFactors {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n * r).map(|_| mixture_entry(&mut rng)).collect();
    LatentFactors::from_vec(n, r, values).expect("mixture entries are finite")
}

pub const CLUSTER_WITHIN_RATE: f64 = 0.90;
pub const CLUSTER_PERTURBATION: f64 = 0.1;

/// Clustered factors: row `i` is `scale * center[label(i)] + noise`.
///
/// Centers come from the mixture distribution and are shifted to sum to
/// zero, which pushes between-cluster inner products as low as a
/// positive semi-definite Gram matrix allows. The scale is found by
/// bisection so that the mean within-cluster link probability is 0.90.
pub fn gen_latent_clustered(n: usize, r: usize, k: usize, seed: u64) -> Result<(LatentFactors, Vec<usize>)> {
    if k == 0 || k > n {
        return arg(format!("cluster count {k} must be in 1..={n}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec<f64>> = (0..k).map(|_| (0..r).map(|_| mixture_entry(&mut rng)).collect()).collect();
    if k > 1 {
        for d in 0..r {
            let mean = centers.iter().map(|c| c[d]).sum::<f64>() / k as f64;
            centers.iter_mut().for_each(|c| c[d] -= mean);
        }
    }
    let labels: Vec<usize> = (0..n).map(|i| i * k / n).collect();
    let noise: Vec<f64> = (0..n * r)
        .map(|_| rng.gen_range(-CLUSTER_PERTURBATION..CLUSTER_PERTURBATION))
        .collect();
    let build = |scale: f64| -> LatentFactors {
        let values = (0..n * r).map(|idx| scale * centers[labels[idx / r]][idx % r] + noise[idx]).collect();
        LatentFactors::from_vec(n, r, values).expect("finite cluster factors")
    };
    let within_rate = |z: &LatentFactors| -> f64 {
        let (mut sum, mut count) = (0.0, 0usize);
        for i in 0..n {
            for j in i + 1..n {
                if labels[i] == labels[j] {
                    sum += logistic(dot(z.row(i), z.row(j)));
                    count += 1;
                }
            }
        }
        if count == 0 {
            CLUSTER_WITHIN_RATE
        } else {
            sum / count as f64
        }
    };
    let (mut lo, mut hi) = (0.0, 10.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if within_rate(&build(mid)) < CLUSTER_WITHIN_RATE {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((build(0.5 * (lo + hi)), labels))
}

/// Draws every pair `i < j` as Bernoulli(`sigma(Z_i . Z_j)`).
pub fn gen_pair_links(z: &LatentFactors, seed: u64) -> FullNetwork {
    let n = z.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = PairTable::filled(n, 0u8);
    let mut probs = PairTable::filled(n, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let p = logistic(dot(z.row(i), z.row(j)));
            let idx = probs.index(i, j);
            probs.values[idx] = p;
            labels.values[idx] = u8::from(rng.gen::<f64>() < p);
        }
    }
    FullNetwork { labels, probs }
}

/// Conditionally independent hyperlinks:
/// `P(Y = 1) = sigma(c * pairwise sum + beta * f)` on the given factors.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentHyper {
    pub z: LatentFactors,
    pub c: f64,
    pub beta: f64,
    pub seed: u64,
}

impl IndependentHyper {
    pub fn new(z: LatentFactors, c: f64, beta: f64, seed: u64) -> Result<Self> {
        if !(c > 0.0) {
            return arg(format!("pairwise coefficient c must be positive, got {c}"));
        }
        if !(beta >= 1.0) {
            return arg(format!("generating beta must be >= 1, got {beta}"));
        }
        Ok(IndependentHyper { z, c, beta, seed })
    }

    pub fn prob(&self, tuple: &[usize]) -> f64 {
        let mut pairwise = 0.0;
        for a in 0..tuple.len() {
            for b in a + 1..tuple.len() {
                pairwise += dot(self.z.row(tuple[a]), self.z.row(tuple[b]));
            }
        }
        let high: f64 = (0..self.z.r())
            .map(|k| concordance_term(tuple.iter().map(|&i| self.z.row(i)[k]), Concordance::SignConsistent))
            .sum();
        logistic(self.c * pairwise + self.beta * high)
    }

    pub fn label(&self, tuple: &[usize]) -> u8 {
        u8::from(tuple_uniform(self.seed, tuple) < self.prob(tuple))
    }
}

/// Hyperlinks that depend on the realised clique indicator. With marginal
/// `theta` and clique probability `q`, a clique is linked with probability
/// `p1 = theta + rho (1 - q)` and a non-clique with `p0 = theta - rho q`, so
/// `p1 - p0 = rho` and `q p1 + (1 - q) p0 = theta`. When that pair leaves
/// `[0, 1]` it is shifted back as a whole, which keeps the gap at `rho`.
#[derive(Debug, Clone)]
pub struct DependentHyper<'a> {
    pub marginal: IndependentHyper,
    pub network: &'a FullNetwork,
    pub rho: f64,
    pub seed: u64,
}

impl<'a> DependentHyper<'a> {
    pub fn new(marginal: IndependentHyper, network: &'a FullNetwork, rho: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return arg(format!("rho must lie in [0, 1), got {rho}"));
        }
        Ok(DependentHyper { marginal, network, rho, seed })
    }

    /// `(p1, p0, clamped)` for the tuple.
    pub fn conditional(&self, tuple: &[usize]) -> (f64, f64, bool) {
        let theta = self.marginal.prob(tuple);
        let q = self.network.clique_prob(tuple);
        let raw = theta - self.rho * q;
        let p0 = raw.clamp(0.0, 1.0 - self.rho);
        (p0 + self.rho, p0, p0 != raw)
    }

    /// Generating probability given the realised clique indicator.
    pub fn prob(&self, tuple: &[usize]) -> f64 {
        let (p1, p0, _) = self.conditional(tuple);
        if self.network.clique(tuple) == 1 {
            p1
        } else {
            p0
        }
    }

    pub fn label(&self, tuple: &[usize]) -> u8 {
        u8::from(tuple_uniform(self.seed, tuple) < self.prob(tuple))
    }
}

/// Hyperlinks built on cliques and cluster membership only:
/// 0.9 for a same-cluster clique, 0.1 for a mixed-cluster clique, else 0.
#[derive(Debug, Clone)]
pub struct CliqueHyper<'a> {
    pub clusters: &'a [usize],
    pub network: &'a FullNetwork,
    pub seed: u64,
}

impl CliqueHyper<'_> {
    pub fn prob(&self, tuple: &[usize]) -> f64 {
        if self.network.clique(tuple) == 0 {
            return 0.0;
        }
        let c = self.clusters[tuple[0]];
        if tuple.iter().all(|&i| self.clusters[i] == c) {
            0.9
        } else {
            0.1
        }
    }

    pub fn label(&self, tuple: &[usize]) -> u8 {
        u8::from(tuple_uniform(self.seed, tuple) < self.prob(tuple))
    }
}

/// Inverse-probability estimate of `P(Y | clique) - P(Y | no clique)`
/// averaged over tuples: `mean(Y D / q - Y (1 - D) / (1 - q))`.
pub fn estimate_link_dependency(labels: &[u8], cliques: &[u8], clique_probs: &[f64]) -> Result<f64> {
    if labels.len() != cliques.len() || labels.len() != clique_probs.len() || labels.is_empty() {
        return Err(Error::Estimation("dependency estimate needs aligned, non-empty inputs".into()));
    }
    let mut total = 0.0;
    for ((&y, &d), &q) in labels.iter().zip(cliques).zip(clique_probs) {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Estimation(format!("clique probability {q} outside (0, 1)")));
        }
        let y = f64::from(y);
        total += if d == 1 { y / q } else { -y / (1.0 - q) };
    }
    Ok(total / labels.len() as f64)
}

pub const RHO_OBS_WEDGES: usize = 100_000;

fn observed_table(obs: &PairObservations, n: usize) -> Result<PairTable<bool>> {
    if obs.n() > n {
        return arg(format!("observations cover {} nodes, n is {n}", obs.n()));
    }
    let mut table = PairTable::filled(n, false);
    for e in obs.entries() {
        table.set(e.i, e.j, true);
    }
    Ok(table)
}

/// Correlation, over sampled wedges `(i; j, k)`, between "both `(i, j)` and
/// `(i, k)` observed" and "`(j, k)` observed".
pub fn estimate_rho_obs(obs: &PairObservations, n: usize, seed: u64) -> Result<f64> {
    if n < 3 || n * (n - 1) * (n - 2) / 2 < 100 {
        return Err(Error::Estimation(format!("too few wedges on {n} nodes")));
    }
    let table = observed_table(obs, n)?;
    rho_obs_from_table(&table, seed)
}

fn rho_obs_from_table(table: &PairTable<bool>, seed: u64) -> Result<f64> {
    let n = table.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sx, mut sw, mut sxw) = (0.0, 0.0, 0.0);
    for _ in 0..RHO_OBS_WEDGES {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let mut k = rng.gen_range(0..n - 2);
        for skip in [i.min(j), i.max(j)] {
            if k >= skip {
                k += 1;
            }
        }
        let x = f64::from(u8::from(table.get(i, j) && table.get(i, k)));
        let w = f64::from(u8::from(table.get(j, k)));
        sx += x;
        sw += w;
        sxw += x * w;
    }
    let count = RHO_OBS_WEDGES as f64;
    let (mx, mw) = (sx / count, sw / count);
    let var_x = mx * (1.0 - mx);
    let var_w = mw * (1.0 - mw);
    if var_x <= 0.0 || var_w <= 0.0 {
        return Err(Error::Estimation("observation indicators have zero variance".into()));
    }
    Ok(((sxw / count - mx * mw) / (var_x * var_w).sqrt()).clamp(-1.0, 1.0))
}

/// Observes exactly `quota` pairs. A random core of nodes is chosen just
/// large enough to hold the quota among its internal pairs; `contrast = 0`
/// spreads the quota uniformly and `contrast = 1` puts all of it inside the
/// core.
fn block_sample(n: usize, quota: usize, contrast: f64, seed: u64) -> PairTable<bool> {
    let total = n * (n - 1) / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut core_size = 2;
    while core_size < n && core_size * (core_size - 1) / 2 < quota {
        core_size += 1;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut in_core = vec![false; n];
    for &i in &order[..core_size] {
        in_core[i] = true;
    }
    let mut table = PairTable::filled(n, false);
    let (mut within, mut between): (Vec<usize>, Vec<usize>) =
        (0..total).partition(|&idx| {
            let (i, j) = table.pair(idx);
            in_core[i] && in_core[j]
        });
    let uniform = quota as f64 * within.len() as f64 / total as f64;
    let packed = quota.min(within.len()) as f64;
    let take_within = ((uniform + contrast * (packed - uniform)).round() as usize)
        .clamp(quota.saturating_sub(between.len()), quota.min(within.len()));
    let (w, _) = within.partial_shuffle(&mut rng, take_within);
    let w = w.to_vec();
    let (b, _) = between.partial_shuffle(&mut rng, quota - take_within);
    for &idx in w.iter().chain(b.iter()) {
        table.values[idx] = true;
    }
    table
}

/// Picks which pairs are observed. `rho_obs = 0` samples uniformly; larger
/// values concentrate observations among a random core of nodes, with the
/// concentration bisected until the measured observation dependency matches
/// `rho_obs`.
pub fn sample_observations(network: &FullNetwork, target_rate: f64, rho_obs: f64, seed: u64) -> Result<PairObservations> {
    let n = network.n();
    if !(target_rate > 0.0 && target_rate <= 1.0) {
        return arg(format!("target rate must lie in (0, 1], got {target_rate}"));
    }
    if !(0.0..1.0).contains(&rho_obs) {
        return arg(format!("rho_obs must lie in [0, 1), got {rho_obs}"));
    }
    let total = n * n.saturating_sub(1) / 2;
    let quota = (target_rate * total as f64).round() as usize;
    if quota == 0 {
        return Err(Error::Generation("target rate yields no observed pairs".into()));
    }
    let to_obs = |table: &PairTable<bool>| network.observe(table.pairs().filter(|&(i, j)| table.get(i, j)));
    if rho_obs == 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx: Vec<usize> = (0..total).collect();
        let (chosen, _) = idx.partial_shuffle(&mut rng, quota);
        let mut chosen = chosen.to_vec();
        chosen.sort_unstable();
        let probe = PairTable::<u8>::filled(n, 0);
        return Ok(network.observe(chosen.into_iter().map(|k| probe.pair(k))));
    }
    if quota == total {
        return Err(Error::Generation("a fully observed network has no observation dependency".into()));
    }
    let measure = |contrast: f64| -> Result<(PairTable<bool>, f64)> {
        let table = block_sample(n, quota, contrast, seed);
        let rho = rho_obs_from_table(&table, splitmix(seed))
            .map_err(|e| Error::Generation(format!("cannot measure observation dependency: {e}")))?;
        Ok((table, rho))
    };
    let (best_table, best_rho) = measure(1.0)?;
    if best_rho < rho_obs - 0.01 {
        return Err(Error::Generation(format!(
            "rate {target_rate} supports observation dependency up to {best_rho:.3}, requested {rho_obs}"
        )));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut best = (best_table, best_rho);
    for _ in 0..25 {
        let mid = 0.5 * (lo + hi);
        let (table, rho) = measure(mid)?;
        if (rho - rho_obs).abs() < (best.1 - rho_obs).abs() {
            best = (table, rho);
        }
        if (rho - rho_obs).abs() < 0.003 {
            break;
        }
        if rho < rho_obs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(to_obs(&best.0))
}

/// How hyperlink statuses are generated from the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HyperModel {
    /// Independent given the latent factors.
    Independent,
    /// Dependent on the realised clique indicator with gap `rho`.
    Dependent,
    /// Clique and cluster membership only; needs clusters.
    CliqueMisspecified,
}

/// Number of training hyperlinks drawn from the all-observed tuple pool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HyperTrainSize {
    /// A fraction of all `C(n, 3)` tuples.
    FractionOfAll(f64),
    /// A fraction of the pool.
    FractionOfPool(f64),
    Count(usize),
}

/// Where validation and test hyperlinks come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HyperEvalDesign {
    /// The pool left after training, split in half.
    PoolHalves,
    /// Tuples with at least one unobserved training pair, drawn until each
    /// class reaches its quota.
    BalancedUnobserved { valid_per_class: usize, test_per_class: usize },
}

/// Full recipe for one synthetic data set.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    pub r: usize,
    pub alpha_pair: Vec<f64>,
    pub alpha_hyper: Vec<f64>,
    pub c: f64,
    pub beta_gen: f64,
    pub rho: f64,
    pub rho_obs: f64,
    pub clusters: Option<usize>,
    pub seed: u64,
    pub hyper_model: HyperModel,
    /// Training, validation and test shares of all pairs.
    pub proportions: [f64; 3],
    pub hyper_train: HyperTrainSize,
    pub hyper_eval: HyperEvalDesign,
}

pub const ALPHA_PAIR: [f64; 5] = [1.0, 1.0, 1.0, 0.2, 0.2];
pub const ALPHA_HYPER: [f64; 5] = [0.2, 0.2, 0.2, 1.0, 1.0];

impl GenSpec {
    /// Observed hyperlinks: 60/20/20 pair split, training hyperlinks at
    /// 0.2% of all triples.
    pub fn study1(n: usize, seed: u64) -> Self {
        GenSpec {
            n,
            r: 5,
            alpha_pair: ALPHA_PAIR.to_vec(),
            alpha_hyper: ALPHA_HYPER.to_vec(),
            c: 1.0,
            beta_gen: 3.0,
            rho: 0.0,
            rho_obs: 0.0,
            clusters: None,
            seed,
            hyper_model: HyperModel::Independent,
            proportions: [0.6, 0.2, 0.2],
            hyper_train: HyperTrainSize::FractionOfAll(0.002),
            hyper_eval: HyperEvalDesign::PoolHalves,
        }
    }

    /// Sparse hyperlinks: as study 1 but training hyperlinks are 1% of the
    /// pool. A missing rate moves the pair split to
    /// `(0.8 (1 - miss), 0.2 (1 - miss), miss)`.
    pub fn study2(n: usize, seed: u64, missing_rate: Option<f64>) -> Self {
        let proportions = match missing_rate {
            Some(miss) => [0.8 * (1.0 - miss), 0.2 * (1.0 - miss), miss],
            None => [0.6, 0.2, 0.2],
        };
        GenSpec {
            proportions,
            hyper_train: HyperTrainSize::FractionOfPool(0.01),
            ..Self::study1(n, seed)
        }
    }

    /// Dependent hyperlinks on a clustered network with observations
    /// missing not at random: 40/20/40 pair split, 30 training hyperlinks,
    /// class-balanced evaluation tuples that are not fully observed.
    pub fn study3(n: usize, seed: u64, rho: f64, rho_obs: f64) -> Self {
        GenSpec {
            n,
            r: 5,
            alpha_pair: vec![1.0; 5],
            alpha_hyper: vec![1.0; 5],
            c: 1.0,
            beta_gen: 1.0,
            rho,
            rho_obs,
            clusters: Some(6),
            seed,
            hyper_model: HyperModel::Dependent,
            proportions: [0.4, 0.2, 0.4],
            hyper_train: HyperTrainSize::Count(30),
            hyper_eval: HyperEvalDesign::BalancedUnobserved { valid_per_class: 250, test_per_class: 500 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 || self.r == 0 {
            return arg(format!("need n >= 3 and r >= 1, got n={} r={}", self.n, self.r));
        }
        for (name, alpha) in [("alpha_pair", &self.alpha_pair), ("alpha_hyper", &self.alpha_hyper)] {
            if alpha.len() != self.r || alpha.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                return arg(format!("{name} needs {} positive entries, got {alpha:?}", self.r));
            }
        }
        if !(self.c > 0.0) || !(self.beta_gen >= 1.0) {
            return arg(format!("need c > 0 and beta_gen >= 1, got c={} beta_gen={}", self.c, self.beta_gen));
        }
        if !(0.0..1.0).contains(&self.rho) || !(0.0..1.0).contains(&self.rho_obs) {
            return arg(format!("rho and rho_obs must lie in [0, 1), got {} and {}", self.rho, self.rho_obs));
        }
        let [train, valid, test] = self.proportions;
        if self.proportions.iter().any(|p| !(*p >= 0.0)) || !(train > 0.0) || ((train + valid + test) - 1.0).abs() > 1e-9 {
            return arg(format!("split proportions must be non-negative, start positive and sum to 1, got {:?}", self.proportions));
        }
        if self.hyper_model == HyperModel::CliqueMisspecified && self.clusters.is_none() {
            return arg("the clique model needs clusters");
        }
        if let Some(k) = self.clusters {
            if k == 0 || k > self.n {
                return arg(format!("cluster count {k} must be in 1..={}", self.n));
            }
        }
        Ok(())
    }
}

/// Everything needed to recompute generating probabilities.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    /// Unweighted latent factors.
    pub z: LatentFactors,
    pub network: FullNetwork,
    pub clusters: Option<Vec<usize>>,
    hyper: IndependentHyper,
    model: HyperModel,
    rho: f64,
    hyper_seed: u64,
}

impl GroundTruth {
    /// Generating probability of the tuple's hyperlink status.
    pub fn hyper_prob(&self, tuple: &[usize]) -> f64 {
        match self.model {
            HyperModel::Independent => self.hyper.prob(tuple),
            HyperModel::Dependent => self.dependent().prob(tuple),
            HyperModel::CliqueMisspecified => self.clique_model().prob(tuple),
        }
    }

    pub fn hyper_label(&self, tuple: &[usize]) -> u8 {
        u8::from(tuple_uniform(self.hyper_seed, tuple) < self.hyper_prob(tuple))
    }

    pub fn pair_prob(&self, i: usize, j: usize) -> f64 {
        self.network.probs.get(i, j)
    }

    fn dependent(&self) -> DependentHyper<'_> {
        DependentHyper { marginal: self.hyper.clone(), network: &self.network, rho: self.rho, seed: self.hyper_seed }
    }

    fn clique_model(&self) -> CliqueHyper<'_> {
        CliqueHyper {
            clusters: self.clusters.as_deref().expect("validated"),
            network: &self.network,
            seed: self.hyper_seed,
        }
    }

    /// Link dependency measured on `samples` uniform random triples.
    pub fn measure_rho(&self, samples: usize, seed: u64) -> Result<f64> {
        let n = self.network.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut labels, mut cliques, mut qs) = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..samples {
            let mut t = rand::seq::index::sample(&mut rng, n, 3).into_vec();
            t.sort_unstable();
            labels.push(self.hyper_label(&t));
            cliques.push(self.network.clique(&t));
            qs.push(self.network.clique_prob(&t));
        }
        estimate_link_dependency(&labels, &cliques, &qs)
    }
}

/// Train/validation/test sets with aligned ground truth.
#[derive(Debug, Clone)]
pub struct SplitBundle {
    pub spec: GenSpec,
    pub truth: GroundTruth,
    pub train_pairs: PairObservations,
    pub valid_pairs: PairObservations,
    pub test_pairs: PairObservations,
    pub train_hypers: HyperObservations,
    pub valid_hypers: HyperObservations,
    pub test_hypers: HyperObservations,
    /// Size of the all-observed tuple pool.
    pub pool_size: usize,
    /// Observation dependency of the training pairs, when measurable.
    pub measured_rho_obs: Option<f64>,
}

impl SplitBundle {
    pub fn pair_truth(&self, pairs: &PairObservations) -> Vec<f64> {
        pairs.entries().iter().map(|e| self.truth.pair_prob(e.i, e.j)).collect()
    }

    pub fn hyper_truth(&self, hypers: &HyperObservations) -> Vec<f64> {
        hypers.tuples().map(|t| self.truth.hyper_prob(t)).collect()
    }

    pub fn test_truth(&self) -> TruthProbs {
        TruthProbs {
            pair: Some(self.pair_truth(&self.test_pairs)),
            hyper: Some(self.hyper_truth(&self.test_hypers)),
        }
    }
}

/// Generates the network and splits it by its recipe.
pub fn make_splits(spec: &GenSpec) -> Result<SplitBundle> {
    spec.validate()?;
    let n = spec.n;
    let seeds: Vec<u64> = (1..=8).map(|k| splitmix(spec.seed ^ (k * 0x1000_0001))).collect();
    let (z, clusters) = match spec.clusters {
        Some(k) => {
            let (z, labels) = gen_latent_clustered(n, spec.r, k, seeds[0])?;
            (z, Some(labels))
        }
        None => (gen_latent_mixture(n, spec.r, seeds[0]), None),
    };
    let network = gen_pair_links(&z.weighted(&spec.alpha_pair)?, seeds[1]);
    let hyper = IndependentHyper::new(z.weighted(&spec.alpha_hyper)?, spec.c, spec.beta_gen, seeds[2])?;
    let truth = GroundTruth {
        z,
        network,
        clusters,
        hyper,
        model: spec.hyper_model,
        rho: spec.rho,
        hyper_seed: seeds[2],
    };

    // pair split
    let total = n * (n - 1) / 2;
    let [p_train, p_valid, _] = spec.proportions;
    let n_train = (p_train * total as f64).round() as usize;
    let n_valid = ((p_valid * total as f64).round() as usize).min(total - n_train);
    let mut rest: Vec<usize>;
    let train_pairs = if spec.rho_obs > 0.0 {
        let obs = sample_observations(&truth.network, p_train, spec.rho_obs, seeds[3])?;
        let observed: std::collections::HashSet<(usize, usize)> = obs.entries().iter().map(|e| (e.i, e.j)).collect();
        rest = (0..total).filter(|&k| !observed.contains(&truth.network.labels.pair(k))).collect();
        obs
    } else {
        let mut order: Vec<usize> = (0..total).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seeds[3]));
        rest = order.split_off(n_train.min(total));
        order.sort_unstable();
        truth.network.observe(order.into_iter().map(|k| truth.network.labels.pair(k)))
    };
    rest.shuffle(&mut ChaCha8Rng::seed_from_u64(seeds[4]));
    let n_valid = n_valid.min(rest.len());
    let mut valid_idx = rest[..n_valid].to_vec();
    let mut test_idx = rest[n_valid..].to_vec();
    valid_idx.sort_unstable();
    test_idx.sort_unstable();
    let table = &truth.network.labels;
    let valid_pairs = truth.network.observe(valid_idx.into_iter().map(|k| table.pair(k)));
    let test_pairs = truth.network.observe(test_idx.into_iter().map(|k| table.pair(k)));

    // all-observed tuple pool
    let fwd = forward_adjacency(&train_pairs, n, None);
    let mut pool: Vec<[usize; 3]> = Vec::new();
    for_each_clique(&fwd, 3, &mut |t| pool.push([t[0], t[1], t[2]]));
    let pool_size = pool.len();
    let n_hyper_train = match spec.hyper_train {
        HyperTrainSize::FractionOfAll(f) => (f * (n * (n - 1) * (n - 2) / 6) as f64).round() as usize,
        HyperTrainSize::FractionOfPool(f) => (f * pool_size as f64).round() as usize,
        HyperTrainSize::Count(k) => k,
    };
    if n_hyper_train > pool_size {
        return Err(Error::Generation(format!(
            "{n_hyper_train} training hyperlinks requested from a pool of {pool_size}"
        )));
    }
    pool.shuffle(&mut ChaCha8Rng::seed_from_u64(seeds[5]));
    let labelled = |tuples: &mut Vec<[usize; 3]>| -> HyperObservations {
        tuples.sort_unstable();
        let mut out = HyperObservations::empty(n, 3);
        for t in tuples.iter() {
            out.push_trusted(t, truth.hyper_label(t), 1.0);
        }
        out
    };
    let mut train_tuples = pool[..n_hyper_train].to_vec();
    let train_hypers = labelled(&mut train_tuples);

    let (valid_hypers, test_hypers) = match spec.hyper_eval {
        HyperEvalDesign::PoolHalves => {
            let remaining = &pool[n_hyper_train..];
            let half = remaining.len() / 2;
            let mut valid = remaining[..half].to_vec();
            let mut test = remaining[half..].to_vec();
            (labelled(&mut valid), labelled(&mut test))
        }
        HyperEvalDesign::BalancedUnobserved { valid_per_class, test_per_class } => {
            let observed: std::collections::HashSet<(usize, usize)> =
                train_pairs.entries().iter().map(|e| (e.i, e.j)).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seeds[6]);
            let mut used = std::collections::HashSet::new();
            let mut draw = |per_class: usize| -> Result<Vec<[usize; 3]>> {
                let mut counts = [0usize; 2];
                let mut out = Vec::with_capacity(2 * per_class);
                let limit = 2000 * per_class.max(1) + 100_000;
                let mut attempts = 0;
                while counts[0] < per_class || counts[1] < per_class {
                    attempts += 1;
                    if attempts > limit {
                        return Err(Error::Generation(format!(
                            "found {} positive and {} negative unobserved tuples, wanted {per_class} each",
                            counts[1], counts[0]
                        )));
                    }
                    let mut t = rand::seq::index::sample(&mut rng, n, 3).into_vec();
                    t.sort_unstable();
                    let t = [t[0], t[1], t[2]];
                    let all_observed = observed.contains(&(t[0], t[1]))
                        && observed.contains(&(t[0], t[2]))
                        && observed.contains(&(t[1], t[2]));
                    if all_observed || used.contains(&t) {
                        continue;
                    }
                    let y = truth.hyper_label(&t) as usize;
                    if counts[y] < per_class {
                        counts[y] += 1;
                        used.insert(t);
                        out.push(t);
                    }
                }
                Ok(out)
            };
            let mut test = draw(test_per_class)?;
            let mut valid = draw(valid_per_class)?;
            (labelled(&mut valid), labelled(&mut test))
        }
    };

    let measured_rho_obs = estimate_rho_obs(&train_pairs, n, seeds[7]).ok();
    Ok(SplitBundle {
        spec: spec.clone(),
        truth,
        train_pairs,
        valid_pairs,
        test_pairs,
        train_hypers,
        valid_hypers,
        test_hypers,
        pool_size,
        measured_rho_obs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_table_indexing_round_trips() {
        let t = PairTable::filled(7, 0u8);
        let mut k = 0;
        for (i, j) in t.pairs() {
            assert_eq!(t.index(i, j), k);
            assert_eq!(t.index(j, i), k);
            assert_eq!(t.pair(k), (i, j));
            k += 1;
        }
        assert_eq!(k, t.len());
    }

    #[test]
    fn mixture_supports_and_balance() {
        let z = gen_latent_mixture(2000, 5, 3);
        assert!(z.as_slice().iter().all(|v| (0.6..=1.0).contains(&v.abs())));
        let positive = z.as_slice().iter().filter(|v| **v > 0.0).count() as f64 / 10_000.0;
        assert!((positive - 0.5).abs() < 0.05, "{positive}");
        assert_eq!(z, gen_latent_mixture(2000, 5, 3));
        assert_ne!(z, gen_latent_mixture(2000, 5, 4));
    }

    #[test]
    fn cluster_labels_are_even() {
        let (_, labels) = gen_latent_clustered(100, 5, 6, 1).unwrap();
        let mut sizes = [0usize; 6];
        labels.iter().for_each(|&l| sizes[l] += 1);
        assert!(sizes.iter().all(|&s| s == 100 / 6 || s == 100 / 6 + 1), "{sizes:?}");
        assert!(gen_latent_clustered(5, 5, 6, 1).is_err());
    }

    fn cluster_rates(n: usize, seed: u64) -> (f64, f64) {
        let (z, labels) = gen_latent_clustered(n, 5, 6, seed).unwrap();
        let net = gen_pair_links(&z, seed + 1);
        let (mut w, mut wc, mut b, mut bc) = (0.0, 0.0, 0.0, 0.0);
        for (i, j) in net.labels.pairs() {
            let y = f64::from(net.labels.get(i, j));
            if labels[i] == labels[j] {
                w += y;
                wc += 1.0;
            } else {
                b += y;
                bc += 1.0;
            }
        }
        (w / wc, b / bc)
    }

    #[test]
    fn cluster_within_rate() {
        let (within, _) = cluster_rates(240, 7);
        assert!((within - 0.90).abs() < 0.05, "within {within}");
    }

    #[test]
    fn cluster_between_rate_sits_at_the_gram_bound() {
        // with K centers summing to zero the mean between-cluster logit is
        // -within/(K-1); a rate near 0.4 is the lowest the model reaches
        let (_, between) = cluster_rates(240, 7);
        assert!(between < 0.45, "between {between}");
    }

    #[test]
    #[ignore = "0.25 between-cluster rate is unreachable next to a 0.90 within rate with 6 clusters in 5 dimensions"]
    fn cluster_between_rate_of_a_quarter() {
        let (_, between) = cluster_rates(240, 7);
        assert!((between - 0.25).abs() < 0.05, "between {between}");
    }

    #[test]
    fn zero_factors_link_at_half() {
        let net = gen_pair_links(&LatentFactors::zeros(200, 2), 5);
        let count = net.labels.len() as f64;
        let rate = net.labels.values().iter().map(|&y| f64::from(y)).sum::<f64>() / count;
        assert!((rate - 0.5).abs() < 3.0 * (0.25 / count).sqrt());
        assert!(net.probs.values().iter().all(|&p| p == 0.5));
        assert_eq!(net, gen_pair_links(&LatentFactors::zeros(200, 2), 5));
    }

    #[test]
    fn pair_probs_are_model_probs() {
        let z = gen_latent_mixture(30, 3, 2);
        let net = gen_pair_links(&z, 1);
        for (i, j) in net.labels.pairs() {
            assert_eq!(net.probs.get(i, j), crate::model::pair_prob(z.row(i), z.row(j)).unwrap());
        }
    }

    #[test]
    fn independent_hyper_matches_model() {
        let z = gen_latent_mixture(20, 5, 2).weighted(&[0.2, 0.2, 0.2, 1.0, 1.0]).unwrap();
        let gen = IndependentHyper::new(z.clone(), 1.0, 3.0, 4).unwrap();
        let t = [1usize, 5, 9];
        let rows: Vec<&[f64]> = t.iter().map(|&i| z.row(i)).collect();
        assert!((gen.prob(&t) - crate::model::hyper_prob(&rows, 3.0).unwrap()).abs() < 1e-15);
        let scaled = IndependentHyper::new(z.clone(), 0.5, 3.0, 4).unwrap();
        let pairwise = dot(z.row(1), z.row(5)) + dot(z.row(1), z.row(9)) + dot(z.row(5), z.row(9));
        let f = crate::model::concordance_f(&rows).unwrap();
        assert!((scaled.prob(&t) - logistic(0.5 * pairwise + 3.0 * f)).abs() < 1e-15);

        let zero = IndependentHyper::new(LatentFactors::zeros(60, 5), 1.0, 3.0, 8).unwrap();
        let mut ones = 0.0;
        let mut count = 0.0;
        for i in 0..60 {
            for j in i + 1..60 {
                for k in j + 1..60 {
                    ones += f64::from(zero.label(&[i, j, k]));
                    count += 1.0;
                }
            }
        }
        assert!((ones / count - 0.5).abs() < 3.0 * (0.25 / count).sqrt());
        assert!(IndependentHyper::new(LatentFactors::zeros(3, 1), 0.0, 3.0, 0).is_err());
        assert!(IndependentHyper::new(LatentFactors::zeros(3, 1), 1.0, 0.5, 0).is_err());
    }

    #[test]
    fn dependent_hyper_gap_and_reduction() {
        let z = gen_latent_mixture(40, 5, 1).weighted(&[0.3; 5]).unwrap();
        let net = gen_pair_links(&z, 2);
        let marginal = IndependentHyper::new(z.clone(), 1.0, 1.0, 3).unwrap();
        let indep = DependentHyper::new(marginal.clone(), &net, 0.0, 3).unwrap();
        let t = [0usize, 1, 2];
        let (p1, p0, _) = indep.conditional(&t);
        assert_eq!((p1, p0), (marginal.prob(&t), marginal.prob(&t)));
        let dep = DependentHyper::new(marginal.clone(), &net, 0.4, 3).unwrap();
        for t in [[0usize, 1, 2], [3, 4, 5], [7, 20, 33]] {
            let (p1, p0, clamped) = dep.conditional(&t);
            assert!((p1 - p0 - 0.4).abs() < 1e-12);
            if !clamped {
                let q = net.clique_prob(&t);
                assert!((q * p1 + (1.0 - q) * p0 - marginal.prob(&t)).abs() < 1e-12);
            }
        }
        assert!(DependentHyper::new(marginal.clone(), &net, 1.0, 0).is_err());
        assert!(DependentHyper::new(marginal, &net, -0.1, 0).is_err());
    }

    #[test]
    fn clique_hyper_rule() {
        let z = LatentFactors::zeros(6, 1);
        let mut net = gen_pair_links(&z, 0);
        for (i, j) in net.labels.pairs().collect::<Vec<_>>() {
            net.labels.set(i, j, 1);
        }
        net.labels.set(3, 5, 0);
        let clusters = [0, 0, 0, 1, 1, 1];
        let gen = CliqueHyper { clusters: &clusters, network: &net, seed: 1 };
        assert_eq!(gen.prob(&[0, 1, 2]), 0.9);
        assert_eq!(gen.prob(&[0, 1, 3]), 0.1);
        assert_eq!(gen.prob(&[3, 4, 5]), 0.0);
        assert_eq!(gen.label(&[3, 4, 5]), 0);
    }

    #[test]
    fn clique_hyper_rates() {
        let n = 30;
        let mut net = gen_pair_links(&LatentFactors::zeros(n, 1), 0);
        for (i, j) in net.labels.pairs().collect::<Vec<_>>() {
            net.labels.set(i, j, 1);
        }
        let clusters: Vec<usize> = (0..n).map(|i| i / 15).collect();
        let gen = CliqueHyper { clusters: &clusters, network: &net, seed: 9 };
        let (mut same, mut sc, mut cross, mut cc) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let y = f64::from(gen.label(&[i, j, k]));
                    if clusters[i] == clusters[k] {
                        same += y;
                        sc += 1.0;
                    } else {
                        cross += y;
                        cc += 1.0;
                    }
                }
            }
        }
        assert!((same / sc - 0.9).abs() < 0.05);
        assert!((cross / cc - 0.1).abs() < 0.05);
    }

    #[test]
    fn uniform_observation_sampling() {
        let z = gen_latent_mixture(120, 2, 0);
        let net = gen_pair_links(&z, 1);
        let obs = sample_observations(&net, 0.5, 0.0, 2).unwrap();
        let expected = 0.5 * (120.0 * 119.0 / 2.0);
        assert!((obs.len() as f64 - expected).abs() <= 0.01 * expected);
        let rho = estimate_rho_obs(&obs, 120, 3).unwrap();
        assert!(rho.abs() < 0.02, "{rho}");
        for e in obs.entries() {
            assert_eq!(e.y, net.labels.get(e.i, e.j));
        }
        assert!(sample_observations(&net, 0.0, 0.0, 2).is_err());
        assert!(sample_observations(&net, 0.5, 1.0, 2).is_err());
    }

    #[test]
    fn rho_obs_degenerate_cases() {
        let z = LatentFactors::zeros(20, 1);
        let net = gen_pair_links(&z, 1);
        let full = sample_observations(&net, 1.0, 0.0, 0).unwrap();
        assert!(matches!(estimate_rho_obs(&full, 20, 0), Err(Error::Estimation(_))));
        assert!(estimate_rho_obs(&PairObservations::empty(4), 4, 0).is_err());
    }

    #[test]
    fn link_dependency_estimator() {
        assert!(estimate_link_dependency(&[], &[], &[]).is_err());
        assert!(estimate_link_dependency(&[1], &[1], &[1.0]).is_err());
        // y/q for a linked clique, -y/(1-q) for a linked non-clique
        let est = estimate_link_dependency(&[1, 1, 0], &[1, 0, 0], &[0.5, 0.5, 0.5]).unwrap();
        assert!((est - (2.0 - 2.0 + 0.0) / 3.0).abs() < 1e-15);
    }
}
