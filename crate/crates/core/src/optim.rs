//! Analytic gradient of the joint loss and the adaptive first-order fitting
//! loop.
//!
//! Gradient accumulation walks the observation lists in fixed-size chunks.
//! Each chunk accumulates into its own buffer and the buffers are summed in
//! chunk order, so the result does not depend on how many worker threads ran
//! the chunks.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{arg, Diverged, Error, Result};
use crate::eval;
use crate::model::{
    dot, logistic, Concordance, HyperObservations, HyperScorer, LatentFactors, ModelConfig, PairObservations,
};

const CHUNK: usize = 2048;

/// Which observation sets an embedding is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Pairwise links only.
    Ple,
    /// Hyperlinks only, with the plain CP product as high-order term.
    Hle,
    /// Both link types with the sign-consistent concordance.
    Jle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ple => "PLE",
            Method::Hle => "HLE",
            Method::Jle => "JLE",
        }
    }

    /// Scorer used to predict hyperlinks from an embedding fitted this way.
    pub fn scorer(self, beta: f64) -> HyperScorer {
        HyperScorer {
            beta,
            concordance: match self {
                Method::Hle => Concordance::Cp,
                Method::Ple | Method::Jle => Concordance::SignConsistent,
            },
        }
    }
}

/// Summary of one optimizer run.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub iterations: usize,
    /// Loss recorded before every step, plus the loss at the returned factors.
    pub losses: Vec<f64>,
    pub final_grad_norm: f64,
    pub converged: bool,
    pub elapsed_secs: f64,
}

/// Wall-clock time is not compared.
impl PartialEq for FitReport {
    fn eq(&self, other: &Self) -> bool {
        self.iterations == other.iterations
            && self.losses == other.losses
            && self.final_grad_norm.to_bits() == other.final_grad_norm.to_bits()
            && self.converged == other.converged
    }
}

impl FitReport {
    pub fn final_loss(&self) -> f64 {
        self.losses.last().copied().unwrap_or(f64::NAN)
    }
}

/// The loss being minimised: which terms are active and how hyperlinks are
/// scored.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Objective<'a> {
    pub pairs: Option<&'a PairObservations>,
    pub hypers: Option<&'a HyperObservations>,
    pub scorer: HyperScorer,
    pub lambda: f64,
}

impl<'a> Objective<'a> {
    pub fn new(
        method: Method,
        pairs: &'a PairObservations,
        hypers: &'a HyperObservations,
        config: &ModelConfig,
    ) -> Result<Self> {
        let (use_pairs, use_hypers) = match method {
            Method::Ple => {
                if pairs.is_empty() {
                    return arg("PLE needs pairwise observations");
                }
                (true, false)
            }
            Method::Hle => {
                if hypers.is_empty() {
                    return arg("HLE needs hyperlink observations");
                }
                (false, true)
            }
            Method::Jle => {
                if pairs.is_empty() && hypers.is_empty() {
                    return arg("JLE needs at least one non-empty observation set");
                }
                (!pairs.is_empty(), !hypers.is_empty())
            }
        };
        Ok(Objective {
            pairs: use_pairs.then_some(pairs),
            hypers: use_hypers.then_some(hypers),
            scorer: method.scorer(config.beta),
            lambda: config.lambda,
        })
    }

    fn check_dims(&self, z: &LatentFactors) -> Result<()> {
        let n = self.pairs.map_or(0, |p| p.n()).max(self.hypers.map_or(0, |h| h.n()));
        if n > z.n() {
            return arg(format!("observations cover {n} nodes, factors only {}", z.n()));
        }
        Ok(())
    }

    fn tasks(&self) -> Vec<Task> {
        let mut tasks = Vec::new();
        if let Some(p) = self.pairs {
            tasks.extend((0..p.len()).step_by(CHUNK).map(|s| Task::Pairs(s, (s + CHUNK).min(p.len()))));
        }
        if let Some(h) = self.hypers {
            tasks.extend((0..h.len()).step_by(CHUNK).map(|s| Task::Hypers(s, (s + CHUNK).min(h.len()))));
        }
        tasks
    }

    /// Loss value and gradient, written into `grad`.
    pub fn loss_and_grad(&self, z: &LatentFactors, grad: &mut [f64], pool: Option<&rayon::ThreadPool>) -> f64 {
        let tasks = self.tasks();
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        match pool {
            Some(pool) => {
                let parts: Vec<(f64, Vec<f64>)> = pool.install(|| {
                    tasks
                        .par_iter()
                        .map(|task| {
                            let mut buf = vec![0.0; grad.len()];
                            let l = self.run_task(*task, z, &mut buf);
                            (l, buf)
                        })
                        .collect()
                });
                for (l, buf) in parts {
                    loss += l;
                    grad.iter_mut().zip(&buf).for_each(|(g, b)| *g += b);
                }
            }
            None => {
                let mut buf = vec![0.0; grad.len()];
                for task in tasks {
                    buf.iter_mut().for_each(|b| *b = 0.0);
                    loss += self.run_task(task, z, &mut buf);
                    grad.iter_mut().zip(&buf).for_each(|(g, b)| *g += b);
                }
            }
        }
        if self.lambda != 0.0 {
            loss += self.lambda * z.frobenius_sq();
            for (g, v) in grad.iter_mut().zip(z.as_slice()) {
                *g += 2.0 * self.lambda * v;
            }
        }
        loss
    }

    fn run_task(&self, task: Task, z: &LatentFactors, buf: &mut [f64]) -> f64 {
        match task {
            Task::Pairs(start, end) => {
                let obs = self.pairs.expect("pair task without pairs");
                pair_chunk(z, obs, start, end, buf)
            }
            Task::Hypers(start, end) => {
                let obs = self.hypers.expect("hyper task without hypers");
                hyper_chunk(z, obs, self.scorer, start, end, buf)
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Task {
    Pairs(usize, usize),
    Hypers(usize, usize),
}

fn pair_chunk(z: &LatentFactors, obs: &PairObservations, start: usize, end: usize, buf: &mut [f64]) -> f64 {
    let r = z.r();
    let scale = 1.0 / obs.len() as f64;
    let mut loss = 0.0;
    for e in &obs.entries()[start..end] {
        let (zi, zj) = (z.row(e.i), z.row(e.j));
        let p = logistic(dot(zi, zj));
        let resid = p - f64::from(e.y);
        loss += resid * resid * scale;
        let d = 2.0 * scale * resid * p * (1.0 - p);
        for k in 0..r {
            buf[e.i * r + k] += d * zj[k];
            buf[e.j * r + k] += d * zi[k];
        }
    }
    loss
}

fn hyper_chunk(
    z: &LatentFactors,
    obs: &HyperObservations,
    scorer: HyperScorer,
    start: usize,
    end: usize,
    buf: &mut [f64],
) -> f64 {
    let (r, m) = (z.r(), obs.m());
    let values = z.as_slice();
    let scale = 1.0 / obs.len() as f64;
    let mut vals = vec![0.0; m];
    let mut prefix = vec![0.0; m + 1];
    let mut suffix = vec![0.0; m + 1];
    // d logit / d z[tuple[a], k] at a * r + k
    let mut dlogit = vec![0.0; m * r];
    let mut loss = 0.0;
    for e in start..end {
        let tuple = obs.tuple(e);
        let mut logit = 0.0;
        for k in 0..r {
            let (mut sum, mut sq) = (0.0, 0.0);
            for (a, &i) in tuple.iter().enumerate() {
                let v = values[i * r + k];
                vals[a] = v;
                sum += v;
                sq += v * v;
            }
            // sum over pairs of products = ((sum)^2 - sum of squares) / 2
            logit += 0.5 * (sum * sum - sq);
            prefix[0] = 1.0;
            for a in 0..m {
                prefix[a + 1] = prefix[a] * vals[a];
            }
            suffix[m] = 1.0;
            for a in (0..m).rev() {
                suffix[a] = suffix[a + 1] * vals[a];
            }
            let psi = match scorer.concordance {
                Concordance::Cp => 1.0,
                Concordance::SignConsistent => {
                    let neg = vals[0] < 0.0;
                    if vals.iter().all(|&v| (v < 0.0) == neg) {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            logit += scorer.beta
                * match scorer.concordance {
                    Concordance::Cp => prefix[m],
                    Concordance::SignConsistent => psi * prefix[m].abs(),
                };
            for a in 0..m {
                let others = prefix[a] * suffix[a + 1];
                let high = match scorer.concordance {
                    Concordance::Cp => others,
                    // d|prod|/dz_a = sign(z_a) |prod of the others|; zero at the kink
                    Concordance::SignConsistent if vals[a] == 0.0 => 0.0,
                    Concordance::SignConsistent => psi * vals[a].signum() * others.abs(),
                };
                dlogit[a * r + k] = (sum - vals[a]) + scorer.beta * high;
            }
        }
        let w = obs.weight(e);
        let p = logistic(logit);
        let resid = p - f64::from(obs.label(e));
        loss += w * resid * resid * scale;
        let d = 2.0 * scale * w * resid * p * (1.0 - p);
        if d == 0.0 {
            continue;
        }
        for (a, &i) in tuple.iter().enumerate() {
            for k in 0..r {
                buf[i * r + k] += d * dlogit[a * r + k];
            }
        }
    }
    loss
}

/// Gradient of the joint loss with respect to every latent entry.
pub fn grad_joint(
    z: &LatentFactors,
    pairs: &PairObservations,
    hypers: &HyperObservations,
    config: &ModelConfig,
) -> Result<LatentFactors> {
    grad_for(Method::Jle, z, pairs, hypers, config)
}

/// Gradient of the loss a given method minimises.
pub fn grad_for(
    method: Method,
    z: &LatentFactors,
    pairs: &PairObservations,
    hypers: &HyperObservations,
    config: &ModelConfig,
) -> Result<LatentFactors> {
    let objective = Objective::new(method, pairs, hypers, config)?;
    objective.check_dims(z)?;
    let mut grad = LatentFactors::zeros(z.n(), z.r());
    objective.loss_and_grad(z, grad.as_mut_slice(), None);
    Ok(grad)
}

/// Loss a given method minimises.
pub fn loss_for(
    method: Method,
    z: &LatentFactors,
    pairs: &PairObservations,
    hypers: &HyperObservations,
    config: &ModelConfig,
) -> Result<f64> {
    let objective = Objective::new(method, pairs, hypers, config)?;
    objective.check_dims(z)?;
    let mut scratch = vec![0.0; z.n() * z.r()];
    Ok(objective.loss_and_grad(z, &mut scratch, None))
}

/// Node count implied by the observation sets.
fn node_count(pairs: &PairObservations, hypers: &HyperObservations) -> usize {
    pairs.n().max(hypers.n())
}

/// Uniform `[-scale, scale]` initialisation from a seed.
pub fn init_factors(n: usize, r: usize, scale: f64, seed: u64) -> LatentFactors {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n * r)
        .map(|_| if scale > 0.0 { rng.gen_range(-scale..=scale) } else { 0.0 })
        .collect();
    LatentFactors::from_vec(n.max(1), r.max(1), values).expect("finite initial values")
}

/// Fits the joint embedding from a seeded random start.
pub fn fit(
    pairs: &PairObservations,
    hypers: &HyperObservations,
    config: &ModelConfig,
) -> Result<(LatentFactors, FitReport)> {
    fit_variant(Method::Jle, pairs, hypers, config)
}

/// Fits the embedding for `method` from a seeded random start.
pub fn fit_variant(
    method: Method,
    pairs: &PairObservations,
    hypers: &HyperObservations,
    config: &ModelConfig,
) -> Result<(LatentFactors, FitReport)> {
    config.validate()?;
    Objective::new(method, pairs, hypers, config)?;
    let n = node_count(pairs, hypers);
    let o = &config.optimizer;
    let init = init_factors(n, config.rank, o.init_scale, o.seed);
    fit_from(method, init, pairs, hypers, config)
}

/// Runs the optimizer from the supplied starting point.
pub fn fit_from(
    method: Method,
    init: LatentFactors,
    pairs: &PairObservations,
    hypers: &HyperObservations,
    config: &ModelConfig,
) -> Result<(LatentFactors, FitReport)> {
    config.validate()?;
    let objective = Objective::new(method, pairs, hypers, config)?;
    objective.check_dims(&init)?;
    if init.r() != config.rank {
        return arg(format!("initial factors have rank {}, config says {}", init.r(), config.rank));
    }
    let o = &config.optimizer;
    let pool = if o.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(o.threads)
                .build()
                .map_err(|e| Error::Argument(format!("cannot build thread pool: {e}")))?,
        )
    } else {
        None
    };

    let started = Instant::now();
    let mut z = init;
    z.project(config.cap);
    let len = z.as_slice().len();
    let mut grad = vec![0.0; len];
    let mut first = vec![0.0; len];
    let mut second = vec![0.0; len];
    let mut losses = Vec::with_capacity(o.max_iters.min(100_000) + 1);
    let mut last_finite = z.clone();
    let mut iterations = 0;
    let mut converged = false;
    let mut grad_norm;

    loop {
        let loss = objective.loss_and_grad(&z, &mut grad, pool.as_ref());
        grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        losses.push(loss);
        if !loss.is_finite() || !grad_norm.is_finite() {
            let report = FitReport {
                iterations,
                losses,
                final_grad_norm: grad_norm,
                converged: false,
                elapsed_secs: started.elapsed().as_secs_f64(),
            };
            return Err(Error::Diverged(Box::new(Diverged { last_finite, report })));
        }
        if grad_norm < o.tolerance {
            converged = true;
            break;
        }
        if iterations == o.max_iters {
            break;
        }
        last_finite.as_mut_slice().copy_from_slice(z.as_slice());
        iterations += 1;
        let t = iterations as i32;
        let bias1 = 1.0 - o.decay1.powi(t);
        let bias2 = 1.0 - o.decay2.powi(t);
        for (((v, g), m1), m2) in z.as_mut_slice().iter_mut().zip(&grad).zip(&mut first).zip(&mut second) {
            *m1 = o.decay1 * *m1 + (1.0 - o.decay1) * g;
            *m2 = o.decay2 * *m2 + (1.0 - o.decay2) * g * g;
            let step = o.step_size * (*m1 / bias1) / ((*m2 / bias2).sqrt() + o.epsilon);
            *v = (*v - step).clamp(-config.cap, config.cap);
        }
    }

    let report = FitReport {
        iterations,
        losses,
        final_grad_norm: grad_norm,
        converged,
        elapsed_secs: started.elapsed().as_secs_f64(),
    };
    Ok((z, report))
}

/// Validation AUC per grid value.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningTable {
    pub rows: Vec<(f64, f64)>,
}

/// Grid search for the ridge penalty by validation AUC (JLE).
pub fn tune_lambda(
    grid: &[f64],
    train_pairs: &PairObservations,
    train_hypers: &HyperObservations,
    valid_pairs: &PairObservations,
    valid_hypers: &HyperObservations,
    config: &ModelConfig,
) -> Result<(f64, TuningTable)> {
    tune_lambda_for(Method::Jle, grid, train_pairs, train_hypers, valid_pairs, valid_hypers, config)
}

/// Grid search for the ridge penalty of any method. Ties go to the smaller
/// penalty; grid duplicates are ignored.
pub fn tune_lambda_for(
    method: Method,
    grid: &[f64],
    train_pairs: &PairObservations,
    train_hypers: &HyperObservations,
    valid_pairs: &PairObservations,
    valid_hypers: &HyperObservations,
    config: &ModelConfig,
) -> Result<(f64, TuningTable)> {
    if grid.is_empty() {
        return arg("empty lambda grid");
    }
    if let Some(bad) = grid.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return arg(format!("lambda grid value {bad} outside [0, 1]"));
    }
    if valid_pairs.is_empty() && valid_hypers.is_empty() {
        return arg("tuning needs a non-empty validation set");
    }
    let mut values = grid.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();

    let scorer = method.scorer(config.beta);
    let mut rows = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    for lambda in values {
        let cfg = ModelConfig { lambda, ..config.clone() };
        let z = match fit_variant(method, train_pairs, train_hypers, &cfg) {
            Ok((z, _)) => z,
            Err(Error::Diverged(_)) => continue,
            Err(e) => return Err(e),
        };
        let score = eval::validation_auc(&z, scorer, valid_pairs, valid_hypers)?;
        rows.push((lambda, score));
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((lambda, score));
        }
    }
    match best {
        Some((lambda, _)) => Ok((lambda, TuningTable { rows })),
        None => Err(Error::Tuning("every lambda fit diverged".into())),
    }
}
