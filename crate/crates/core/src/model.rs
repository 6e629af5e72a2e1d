//! Latent-factor link model: concordance measures, link probabilities and
//! the Brier-type losses for pairwise links and m-order hyperlinks.
//!
//! Unobserved statuses are never stored. An observation set only lists the
//! pairs (or tuples) whose status is known, with label 1 for presence and 0
//! for absence.

use std::collections::{HashMap, HashSet};

use crate::error::{arg, Result};

/// Node embeddings: an `n x r` row-major matrix, row `i` is node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentFactors {
    n: usize,
    r: usize,
    values: Vec<f64>,
}

impl LatentFactors {
    pub fn zeros(n: usize, r: usize) -> Self {
        LatentFactors {
            n,
            r,
            values: vec![0.0; n * r],
        }
    }

    /// Builds from a row-major buffer. Every entry must be finite.
    pub fn from_vec(n: usize, r: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || r == 0 {
            return arg("latent factors need n >= 1 and r >= 1");
        }
        if values.len() != n * r {
            return arg(format!(
                "expected {} values for a {n}x{r} matrix, got {}",
                n * r,
                values.len()
            ));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return arg(format!("non-finite latent entry at row {}", pos / r));
        }
        Ok(LatentFactors { n, r, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != r) {
            return arg("rows have different lengths");
        }
        Self::from_vec(rows.len(), r, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.r..(i + 1) * self.r]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.r..(i + 1) * self.r]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Clamps every entry onto `[-cap, cap]`.
    pub fn project(&mut self, cap: f64) {
        for v in &mut self.values {
            *v = v.clamp(-cap, cap);
        }
    }

    /// Column-weighted copy: entry `(i, k)` becomes `alpha[k] * Z[i, k]`.
    pub fn weighted(&self, alpha: &[f64]) -> Result<Self> {
        if alpha.len() != self.r {
            return arg(format!(
                "weight vector has length {}, latent dimension is {}",
                alpha.len(),
                self.r
            ));
        }
        let mut out = self.clone();
        for row in out.values.chunks_mut(self.r) {
            for (v, a) in row.iter_mut().zip(alpha) {
                *v *= a;
            }
        }
        Ok(out)
    }
}

/// One observed pairwise status, `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairEntry {
    pub i: usize,
    pub j: usize,
    pub y: u8,
}

/// Observed pairwise link statuses over `n` nodes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairObservations {
    n: usize,
    entries: Vec<PairEntry>,
}

impl PairObservations {
    pub fn empty(n: usize) -> Self {
        PairObservations {
            n,
            entries: Vec::new(),
        }
    }

    /// Validates `i < j < n`, binary labels and uniqueness.
    pub fn new(n: usize, entries: Vec<PairEntry>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for e in &entries {
            if e.i >= e.j {
                return arg(format!("pair ({}, {}) is not ordered i < j", e.i, e.j));
            }
            if e.j >= n {
                return arg(format!("pair ({}, {}) out of range for n={n}", e.i, e.j));
            }
            if e.y > 1 {
                return arg(format!("pair ({}, {}) has non-binary label {}", e.i, e.j, e.y));
            }
            if !seen.insert((e.i, e.j)) {
                return arg(format!("duplicate pair ({}, {})", e.i, e.j));
            }
        }
        Ok(PairObservations { n, entries })
    }

    /// Like [`PairObservations::new`] but sorts each pair first.
    pub fn from_unordered(n: usize, triples: impl IntoIterator<Item = (usize, usize, u8)>) -> Result<Self> {
        let mut entries = Vec::new();
        for (a, b, y) in triples {
            if a == b {
                return arg(format!("self-loop ({a}, {a})"));
            }
            entries.push(PairEntry {
                i: a.min(b),
                j: a.max(b),
                y,
            });
        }
        Self::new(n, entries)
    }

    pub(crate) fn from_trusted(n: usize, entries: Vec<PairEntry>) -> Self {
        debug_assert!(entries.iter().all(|e| e.i < e.j && e.j < n && e.y <= 1));
        PairObservations { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[PairEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.entries.iter().map(|e| e.y).collect()
    }

    /// Lookup table `(i, j) -> y` with `i < j`.
    pub fn label_map(&self) -> HashMap<(usize, usize), u8> {
        self.entries.iter().map(|e| ((e.i, e.j), e.y)).collect()
    }
}

/// Observed m-order hyperlink statuses. Tuples are stored flat, each one
/// strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperObservations {
    n: usize,
    m: usize,
    nodes: Vec<usize>,
    labels: Vec<u8>,
    weights: Vec<f64>,
}

impl HyperObservations {
    pub fn empty(n: usize, m: usize) -> Self {
        HyperObservations {
            n,
            m,
            nodes: Vec::new(),
            labels: Vec::new(),
            weights: Vec::new(),
        }
    }

    /// Builds a validated set. Tuples are sorted ascending; repeated indices
    /// inside a tuple, duplicate tuples, non-binary labels and non-positive
    /// weights are rejected.
    pub fn from_entries(
        n: usize,
        m: usize,
        entries: impl IntoIterator<Item = (Vec<usize>, u8, f64)>,
    ) -> Result<Self> {
        if m < 2 {
            return arg(format!("hyperlink order must be at least 2, got {m}"));
        }
        let mut out = Self::empty(n, m);
        for (mut tuple, y, w) in entries {
            if tuple.len() != m {
                return arg(format!("tuple {tuple:?} has arity {}, expected {m}", tuple.len()));
            }
            tuple.sort_unstable();
            if tuple.windows(2).any(|w| w[0] == w[1]) {
                return arg(format!("tuple {tuple:?} repeats a node"));
            }
            if tuple[m - 1] >= n {
                return arg(format!("tuple {tuple:?} out of range for n={n}"));
            }
            if y > 1 {
                return arg(format!("tuple {tuple:?} has non-binary label {y}"));
            }
            if !(w > 0.0 && w.is_finite()) {
                return arg(format!("tuple {tuple:?} has non-positive weight {w}"));
            }
            out.nodes.extend_from_slice(&tuple);
            out.labels.push(y);
            out.weights.push(w);
        }
        let mut seen = HashSet::with_capacity(out.len());
        for t in out.tuples() {
            if !seen.insert(t) {
                return arg(format!("duplicate tuple {t:?}"));
            }
        }
        Ok(out)
    }

    /// Appends a tuple the caller guarantees to be sorted, in range and new.
    pub(crate) fn push_trusted(&mut self, tuple: &[usize], y: u8, w: f64) {
        debug_assert_eq!(tuple.len(), self.m);
        debug_assert!(tuple.windows(2).all(|p| p[0] < p[1]));
        self.nodes.extend_from_slice(tuple);
        self.labels.push(y);
        self.weights.push(w);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn tuple(&self, e: usize) -> &[usize] {
        &self.nodes[e * self.m..(e + 1) * self.m]
    }

    pub fn tuples(&self) -> impl ExactSizeIterator<Item = &[usize]> {
        self.nodes.chunks_exact(self.m)
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn label(&self, e: usize) -> u8 {
        self.labels[e]
    }

    pub fn weight(&self, e: usize) -> f64 {
        self.weights[e]
    }

    pub fn tuple_set(&self) -> HashSet<&[usize]> {
        self.tuples().collect()
    }

    /// Copy with every weight multiplied by `factor`.
    pub fn scaled_weights(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for w in &mut out.weights {
            *w *= factor;
        }
        out
    }

    /// Union with a disjoint set of the same order.
    pub fn union(&self, other: &HyperObservations) -> Result<Self> {
        if other.m != self.m || other.n != self.n {
            return arg("cannot merge hyperlink sets with different n or m");
        }
        let existing = self.tuple_set();
        if let Some(t) = other.tuples().find(|t| existing.contains(t)) {
            return arg(format!("tuple {t:?} present in both sets"));
        }
        let mut out = self.clone();
        out.nodes.extend_from_slice(&other.nodes);
        out.labels.extend_from_slice(&other.labels);
        out.weights.extend_from_slice(&other.weights);
        Ok(out)
    }
}

/// How the high-order term of the hyperlink logit is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Concordance {
    /// Sign-adjusted absolute products, the concordance `f`.
    #[default]
    SignConsistent,
    /// Plain symmetric CP product `sum_k prod_l Z[l, k]`.
    Cp,
}

/// Settings for the adaptive first-order optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub step_size: f64,
    pub decay1: f64,
    pub decay2: f64,
    pub epsilon: f64,
    pub max_iters: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub init_scale: f64,
    /// Worker threads for gradient accumulation; 1 runs inline.
    pub threads: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            step_size: 0.01,
            decay1: 0.9,
            decay2: 0.999,
            epsilon: 1e-8,
            max_iters: 5000,
            tolerance: 1e-5,
            seed: 0,
            init_scale: 0.5,
            threads: 1,
        }
    }
}

/// Hyperparameters of the joint embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub rank: usize,
    /// Weight of the high-order concordance term; at least 1.
    pub beta: f64,
    /// Ridge penalty on the squared Frobenius norm of `Z`.
    pub lambda: f64,
    /// Entry bound enforced after every optimizer step.
    pub cap: f64,
    pub optimizer: OptimizerConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            rank: 5,
            beta: 1.0,
            lambda: 0.0,
            cap: 10.0,
            optimizer: OptimizerConfig::default(),
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let o = &self.optimizer;
        if self.rank == 0 {
            return arg("rank must be positive");
        }
        if !(self.beta >= 1.0 && self.beta.is_finite()) {
            return arg(format!("beta must be >= 1, got {}", self.beta));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return arg(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if !(self.cap > 0.0) {
            return arg(format!("cap must be positive, got {}", self.cap));
        }
        if !(o.step_size > 0.0) || !(0.0..1.0).contains(&o.decay1) || !(0.0..1.0).contains(&o.decay2) {
            return arg("optimizer step size must be positive and decays in [0, 1)");
        }
        if !(o.init_scale >= 0.0) || !(o.tolerance >= 0.0) {
            return arg("init scale and tolerance must be non-negative");
        }
        Ok(())
    }
}

/// Numerically stable logistic function.
#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// +1 when all coordinates are non-negative or all are negative, else -1.
pub fn sign_consistency(coords: &[f64]) -> Result<i8> {
    if coords.is_empty() {
        return arg("sign consistency of an empty list");
    }
    if coords.iter().any(|c| !c.is_finite()) {
        return arg("sign consistency of non-finite coordinates");
    }
    Ok(psi(coords.iter().copied()))
}

#[inline]
fn psi(mut coords: impl Iterator<Item = f64>) -> i8 {
    let Some(first) = coords.next() else { return 1 };
    let neg = first < 0.0;
    if coords.all(|c| (c < 0.0) == neg) {
        1
    } else {
        -1
    }
}

fn check_rows(rows: &[&[f64]], min_m: usize) -> Result<usize> {
    if rows.len() < min_m {
        return arg(format!("need at least {min_m} rows, got {}", rows.len()));
    }
    let r = rows[0].len();
    if rows.iter().any(|row| row.len() != r) {
        return arg("latent rows have different lengths");
    }
    Ok(r)
}

/// Rows in lexicographic order, so that floating-point results do not
/// depend on the order the caller listed them in.
fn canonical<'a>(rows: &[&'a [f64]]) -> Vec<&'a [f64]> {
    let mut out = rows.to_vec();
    out.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    out
}

/// High-order concordance `sum_k psi_k |prod_l Z[l, k]|` of m >= 3 rows.
pub fn concordance_f(rows: &[&[f64]]) -> Result<f64> {
    let r = check_rows(rows, 3)?;
    let rows = canonical(rows);
    Ok((0..r).map(|k| concordance_term(rows.iter().map(|row| row[k]), Concordance::SignConsistent)).sum())
}

/// One coordinate's contribution to the high-order term.
#[inline]
pub(crate) fn concordance_term(coords: impl Iterator<Item = f64> + Clone, kind: Concordance) -> f64 {
    let prod: f64 = coords.clone().product();
    match kind {
        Concordance::Cp => prod,
        Concordance::SignConsistent => f64::from(psi(coords)) * prod.abs(),
    }
}

/// `sigma(zi . zj)`.
pub fn pair_prob(zi: &[f64], zj: &[f64]) -> Result<f64> {
    if zi.len() != zj.len() {
        return arg("latent rows have different lengths");
    }
    Ok(logistic(dot(zi, zj)))
}

fn pairwise_sum(rows: &[&[f64]]) -> f64 {
    let mut total = 0.0;
    for a in 0..rows.len() {
        for b in a + 1..rows.len() {
            total += dot(rows[a], rows[b]);
        }
    }
    total
}

/// Hyperlink probability with the sign-consistent concordance term.
pub fn hyper_prob(rows: &[&[f64]], beta: f64) -> Result<f64> {
    check_rows(rows, 3)?;
    if !(beta >= 1.0) {
        return arg(format!("beta must be >= 1, got {beta}"));
    }
    let rows = canonical(rows);
    Ok(logistic(pairwise_sum(&rows) + beta * concordance_f(&rows)?))
}

/// Joint-membership probability from pairwise concordance alone, any m >= 2.
pub fn hyper_prob_generalized(rows: &[&[f64]]) -> Result<f64> {
    check_rows(rows, 2)?;
    Ok(logistic(pairwise_sum(&canonical(rows))))
}

/// Scores hyperlink tuples against a fitted embedding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperScorer {
    pub beta: f64,
    pub concordance: Concordance,
}

impl HyperScorer {
    pub fn new(beta: f64) -> Self {
        HyperScorer {
            beta,
            concordance: Concordance::SignConsistent,
        }
    }

    /// Logit for the tuple of node indices; indices must be in range.
    #[inline]
    pub fn logit(&self, z: &LatentFactors, tuple: &[usize]) -> f64 {
        hyper_logit(z, tuple, self.beta, Some(self.concordance))
    }

    #[inline]
    pub fn prob(&self, z: &LatentFactors, tuple: &[usize]) -> f64 {
        logistic(self.logit(z, tuple))
    }
}

/// Hyperlink logit on rows of `z`; `None` drops the high-order term.
#[inline]
pub(crate) fn hyper_logit(z: &LatentFactors, tuple: &[usize], beta: f64, kind: Option<Concordance>) -> f64 {
    let mut total = 0.0;
    for a in 0..tuple.len() {
        for b in a + 1..tuple.len() {
            total += dot(z.row(tuple[a]), z.row(tuple[b]));
        }
    }
    if let Some(kind) = kind {
        let high: f64 = (0..z.r())
            .map(|k| concordance_term(tuple.iter().map(|&i| z.row(i)[k]), kind))
            .sum();
        total += beta * high;
    }
    total
}

fn check_pairs(z: &LatentFactors, obs: &PairObservations) -> Result<()> {
    if obs.n() > z.n() {
        return arg(format!("observations cover {} nodes, factors only {}", obs.n(), z.n()));
    }
    Ok(())
}

fn check_hyper(z: &LatentFactors, obs: &HyperObservations) -> Result<()> {
    if obs.n() > z.n() {
        return arg(format!("observations cover {} nodes, factors only {}", obs.n(), z.n()));
    }
    Ok(())
}

/// Mean squared error between pairwise labels and `sigma(zi . zj)`.
pub fn loss_pair(z: &LatentFactors, obs: &PairObservations) -> Result<f64> {
    if obs.is_empty() {
        return arg("pairwise loss over an empty observation set");
    }
    check_pairs(z, obs)?;
    let sum: f64 = obs
        .entries()
        .iter()
        .map(|e| {
            let p = logistic(dot(z.row(e.i), z.row(e.j)));
            (f64::from(e.y) - p).powi(2)
        })
        .sum();
    Ok(sum / obs.len() as f64)
}

/// Weighted squared error of hyperlink labels, divided by the entry count.
pub fn loss_hyper(z: &LatentFactors, obs: &HyperObservations, beta: f64) -> Result<f64> {
    loss_hyper_with(z, obs, HyperScorer::new(beta))
}

pub(crate) fn loss_hyper_with(z: &LatentFactors, obs: &HyperObservations, scorer: HyperScorer) -> Result<f64> {
    if obs.is_empty() {
        return arg("hyperlink loss over an empty observation set");
    }
    check_hyper(z, obs)?;
    let sum: f64 = obs
        .tuples()
        .enumerate()
        .map(|(e, t)| obs.weight(e) * (f64::from(obs.label(e)) - scorer.prob(z, t)).powi(2))
        .sum();
    Ok(sum / obs.len() as f64)
}

/// Hyperlink loss + pairwise loss + `lambda * ||Z||^2`. An empty set
/// contributes zero; both empty is an error.
pub fn loss_joint(
    z: &LatentFactors,
    pairs: &PairObservations,
    hypers: &HyperObservations,
    config: &ModelConfig,
) -> Result<f64> {
    if pairs.is_empty() && hypers.is_empty() {
        return arg("joint loss needs at least one non-empty observation set");
    }
    let mut total = 0.0;
    if !hypers.is_empty() {
        total += loss_hyper(z, hypers, config.beta)?;
    }
    if !pairs.is_empty() {
        total += loss_pair(z, pairs)?;
    }
    if config.lambda != 0.0 {
        total += config.lambda * z.frobenius_sq();
    }
    Ok(total)
}
