use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hyperembed::augment::{tune_delta, AugmentOptions, AugmentPipeline};
use hyperembed::eval::{evaluate, TruthProbs};
use hyperembed::io::{self, ModelFile};
use hyperembed::model::{hyper_prob_generalized, pair_prob, Concordance, HyperObservations, HyperScorer, ModelConfig, PairObservations};
use hyperembed::optim::{fit_variant, tune_lambda_for, Method};
use hyperembed::simgen::{make_splits, GenSpec};
use hyperembed::study::{ego_experiment, format_table, run_study, summarize, EgoConfig, Estimator, StudyConfig};
use hyperembed::Error;

mod manifest;

use manifest::Manifest;

#[derive(Parser)]
#[command(name = "hyperembed", version, about = "Joint embedding of pairwise links and hyperlinks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one study's network and write its splits.
    Simulate(SimulateArgs),
    /// Fit an embedding and save the model.
    Fit(FitArgs),
    /// Score pairs or tuples with a saved model.
    Predict(PredictArgs),
    /// AUC report of a saved model on test files.
    Eval(EvalArgs),
    /// Replicated simulate, fit and evaluate run of one study.
    Repro(ReproArgs),
    /// Pair and joint-membership AUCs on an ego-network with circles.
    Ego(EgoArgs),
}

#[derive(Args, Clone)]
struct SeedArg {
    /// Random seed; falls back to HYPEREMBED_SEED, then 0.
    #[arg(long, env = "HYPEREMBED_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct StudySpecArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    study: u8,
    #[arg(long)]
    n: usize,
    /// Link dependency (study 3).
    #[arg(long, default_value_t = 0.85)]
    rho: f64,
    /// Observation dependency (study 3).
    #[arg(long, default_value_t = 0.35)]
    rho_obs: f64,
    /// Share of pairs held out as unobserved (study 2).
    #[arg(long)]
    missing_rate: Option<f64>,
}

impl StudySpecArgs {
    fn spec(&self, seed: u64) -> Result<GenSpec> {
        if self.missing_rate.is_some() && self.study != 2 {
            return Err(Error::Argument("--missing-rate applies to study 2 only".into()).into());
        }
        let spec = match self.study {
            1 => GenSpec::study1(self.n, seed),
            2 => GenSpec::study2(self.n, seed, self.missing_rate),
            _ => GenSpec::study3(self.n, seed, self.rho, self.rho_obs),
        };
        spec.validate()?;
        Ok(spec)
    }

    fn to_json(&self) -> Value {
        let mut v = json!({ "study": self.study, "n": self.n });
        match self.study {
            2 => v["missing_rate"] = json!(self.missing_rate),
            3 => {
                v["rho"] = json!(self.rho);
                v["rho_obs"] = json!(self.rho_obs);
            }
            _ => {}
        }
        v
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    spec: StudySpecArgs,
    #[command(flatten)]
    seed: SeedArg,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitMethod {
    Ple,
    Hle,
    Jle,
    Augjle,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value_t = 5)]
    rank: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long, default_value_t = 5000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

impl ModelArgs {
    fn config(&self, seed: u64) -> ModelConfig {
        let mut config = ModelConfig { rank: self.rank, beta: self.beta, lambda: self.lambda, ..ModelConfig::default() };
        config.optimizer.max_iters = self.max_iters;
        config.optimizer.tolerance = self.tol;
        config.optimizer.threads = self.threads.max(1);
        config.optimizer.seed = seed;
        config
    }

    fn to_json(&self) -> Value {
        json!({
            "rank": self.rank,
            "beta": self.beta,
            "lambda": self.lambda,
            "max_iters": self.max_iters,
            "tol": self.tol,
            "threads": self.threads,
        })
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(value_enum)]
    method: FitMethod,
    #[arg(long)]
    train_pairs: Option<PathBuf>,
    #[arg(long)]
    train_hyper: Option<PathBuf>,
    #[arg(long)]
    valid_pairs: Option<PathBuf>,
    #[arg(long)]
    valid_hyper: Option<PathBuf>,
    /// Model output path.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    seed: SeedArg,
    /// Augmentation cutoff in (0, 0.5).
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Comma-separated ridge values tuned on the validation files.
    #[arg(long, value_delimiter = ',')]
    lambda_grid: Option<Vec<f64>>,
    /// Comma-separated cutoffs tuned on the validation files (augjle).
    #[arg(long, value_delimiter = ',')]
    delta_grid: Option<Vec<f64>>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Whitespace-separated node indices, one pair or tuple per line.
    #[arg(long)]
    queries: PathBuf,
    /// Score tuples of any order from pairwise concordance alone.
    #[arg(long)]
    generalized: bool,
    /// Scores CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    test_pairs: Option<PathBuf>,
    #[arg(long)]
    test_hyper: Option<PathBuf>,
    #[arg(long)]
    truth_pairs: Option<PathBuf>,
    #[arg(long)]
    truth_hyper: Option<PathBuf>,
    /// Report CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproArgs {
    #[command(flatten)]
    spec: StudySpecArgs,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, default_value_t = 5)]
    replicates: usize,
    /// Comma-separated subset of ple, hle, jle, augjle.
    #[arg(long, value_delimiter = ',')]
    estimators: Option<Vec<String>>,
    /// Skip the ridge and cutoff grid searches.
    #[arg(long)]
    no_tune: bool,
    #[arg(long, default_value_t = 5000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Summary table path; stdout only when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EgoArgs {
    /// Edge list, one `a b` pair of raw ids per line.
    #[arg(long)]
    edges: PathBuf,
    /// Circles file, one `name id id ...` line per circle.
    #[arg(long)]
    circles: PathBuf,
    /// Leave the largest circle out before decomposing the rest.
    #[arg(long)]
    drop_largest_circle: bool,
    /// Order of the joint-membership test tuples.
    #[arg(long, default_value_t = 6)]
    order: usize,
    #[arg(long, default_value_t = 600)]
    train_hypers: usize,
    #[arg(long, default_value_t = 2000)]
    augmented: usize,
    #[arg(long, default_value_t = 2000)]
    test_tuples: usize,
    /// Fixed ridge instead of the default grid search.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 5000)]
    max_iters: usize,
    #[command(flatten)]
    seed: SeedArg,
    /// Results table; the raw-id mapping goes to `<out>.ids`.
    #[arg(long)]
    out: PathBuf,
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Error::Argument(msg.into()).into()
}

fn load_pairs_opt(path: &Option<PathBuf>, manifest: &mut Manifest) -> Result<Option<PairObservations>> {
    path.as_ref()
        .map(|p| {
            manifest.input(p)?;
            Ok(io::load_pairs(p)?)
        })
        .transpose()
}

fn load_hyper_opt(path: &Option<PathBuf>, manifest: &mut Manifest) -> Result<Option<HyperObservations>> {
    path.as_ref()
        .map(|p| {
            manifest.input(p)?;
            Ok(io::load_hyper(p)?)
        })
        .transpose()
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let start = Instant::now();
    let seed = args.seed.seed;
    let spec = args.spec.spec(seed)?;
    let bundle = make_splits(&spec)?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut manifest = Manifest::new("simulate", args.spec.to_json(), seed);
    let out = |name: &str| args.out.join(name);
    let sets = [
        ("train", &bundle.train_pairs, &bundle.train_hypers),
        ("valid", &bundle.valid_pairs, &bundle.valid_hypers),
        ("test", &bundle.test_pairs, &bundle.test_hypers),
    ];
    for (name, pairs, hypers) in sets {
        io::save_pairs(&out(&format!("{name}_pairs.txt")), pairs)?;
        io::save_hyper(&out(&format!("{name}_hyper.txt")), hypers)?;
        manifest.output(&out(&format!("{name}_pairs.txt")))?;
        manifest.output(&out(&format!("{name}_hyper.txt")))?;
    }
    io::save_truth_pairs(&out("truth_test_pairs.txt"), &bundle.test_pairs, &bundle.pair_truth(&bundle.test_pairs))?;
    io::save_truth_hyper(&out("truth_test_hyper.txt"), &bundle.test_hypers, &bundle.hyper_truth(&bundle.test_hypers))?;
    manifest.output(&out("truth_test_pairs.txt"))?;
    manifest.output(&out("truth_test_hyper.txt"))?;
    let rho = if spec.rho > 0.0 { bundle.truth.measure_rho(100_000, seed).ok() } else { None };
    manifest.extra("measured_rho", json!(rho));
    manifest.extra("measured_rho_obs", json!(bundle.measured_rho_obs));
    manifest.extra("hyper_pool_size", json!(bundle.pool_size));
    manifest.finish(&out("manifest.json"), start)?;
    eprintln!(
        "wrote {} training pairs and {} training hyperlinks to {}",
        bundle.train_pairs.len(),
        bundle.train_hypers.len(),
        args.out.display()
    );
    Ok(())
}

fn fit(args: &FitArgs) -> Result<()> {
    let start = Instant::now();
    let seed = args.seed.seed;
    let mut config_json = args.model.to_json();
    config_json["method"] = json!(method_name(args.method));
    config_json["delta"] = json!(args.delta);
    config_json["lambda_grid"] = json!(args.lambda_grid);
    config_json["delta_grid"] = json!(args.delta_grid);
    let mut manifest = Manifest::new("fit", config_json, seed);

    let train_pairs = load_pairs_opt(&args.train_pairs, &mut manifest)?;
    let train_hypers = load_hyper_opt(&args.train_hyper, &mut manifest)?;
    let valid_pairs = load_pairs_opt(&args.valid_pairs, &mut manifest)?;
    let valid_hypers = load_hyper_opt(&args.valid_hyper, &mut manifest)?;
    match args.method {
        FitMethod::Ple | FitMethod::Augjle if train_pairs.is_none() => {
            return Err(usage(format!("{} needs --train-pairs", method_name(args.method))))
        }
        FitMethod::Hle if train_hypers.is_none() => return Err(usage("hle needs --train-hyper")),
        FitMethod::Jle if train_pairs.is_none() && train_hypers.is_none() => {
            return Err(usage("jle needs --train-pairs or --train-hyper"))
        }
        _ => {}
    }
    let n = [
        train_pairs.as_ref().map(|p| p.n()),
        train_hypers.as_ref().map(|h| h.n()),
        valid_pairs.as_ref().map(|p| p.n()),
        valid_hypers.as_ref().map(|h| h.n()),
    ]
    .into_iter()
    .flatten()
    .max()
    .unwrap_or(0);
    let m = train_hypers.as_ref().or(valid_hypers.as_ref()).map_or(3, |h| h.m());
    let empty_pairs = PairObservations::empty(n);
    let empty_hypers = HyperObservations::empty(n, m);
    // methods ignore the observations they do not model
    let (tp, th) = match args.method {
        FitMethod::Ple => (train_pairs.as_ref().unwrap_or(&empty_pairs), &empty_hypers),
        FitMethod::Hle => (&empty_pairs, train_hypers.as_ref().unwrap_or(&empty_hypers)),
        _ => (train_pairs.as_ref().unwrap_or(&empty_pairs), train_hypers.as_ref().unwrap_or(&empty_hypers)),
    };
    let (vp, vh) = match args.method {
        FitMethod::Ple => (valid_pairs.as_ref().unwrap_or(&empty_pairs), &empty_hypers),
        FitMethod::Hle => (&empty_pairs, valid_hypers.as_ref().unwrap_or(&empty_hypers)),
        _ => (valid_pairs.as_ref().unwrap_or(&empty_pairs), valid_hypers.as_ref().unwrap_or(&empty_hypers)),
    };
    let method = match args.method {
        FitMethod::Ple => Method::Ple,
        FitMethod::Hle => Method::Hle,
        _ => Method::Jle,
    };
    let mut config = args.model.config(seed);
    config.validate()?;
    if (args.lambda_grid.is_some() || args.delta_grid.is_some()) && vp.is_empty() && vh.is_empty() {
        return Err(usage("grid search needs --valid-pairs or --valid-hyper"));
    }
    if let Some(grid) = &args.lambda_grid {
        let (lambda, table) = tune_lambda_for(method, grid, tp, th, vp, vh, &config)?;
        manifest.extra("lambda_table", json!(table.rows));
        config.lambda = lambda;
    }
    manifest.extra("lambda", json!(config.lambda));

    let outcome = if let FitMethod::Augjle = args.method {
        let options = AugmentOptions { delta: args.delta, pool_seed: seed, ..AugmentOptions::default() };
        let delta = match &args.delta_grid {
            Some(grid) => {
                let (delta, table) = tune_delta(grid, tp, th, vp, vh, &config, &options)?;
                manifest.extra("delta_table", json!(table.rows));
                delta
            }
            None => args.delta,
        };
        let pipeline = AugmentPipeline::prepare(tp, th, &config, &options)?;
        let augmented = pipeline.select(delta)?;
        manifest.extra("delta", json!(delta));
        manifest.extra("augmented", json!(augmented.len()));
        pipeline.refit(&augmented)
    } else {
        fit_variant(method, tp, th, &config)
    };
    let concordance = match args.method {
        FitMethod::Hle => Concordance::Cp,
        _ => Concordance::SignConsistent,
    };
    let order = (!th.is_empty()).then_some(th.m());
    match outcome {
        Ok((z, report)) => {
            io::save_model(&args.out, &ModelFile { z, config, concordance, order })?;
            manifest.output(&args.out)?;
            manifest.extra("iterations", json!(report.iterations));
            manifest.extra("final_loss", json!(report.final_loss()));
            manifest.extra("converged", json!(report.converged));
            manifest.finish(&io::with_suffix(&args.out, ".manifest.json"), start)?;
            Ok(())
        }
        Err(Error::Diverged(d)) => {
            let failed = io::with_suffix(&args.out, ".failed");
            io::save_model(&failed, &ModelFile { z: d.last_finite.clone(), config, concordance, order })?;
            manifest.output(&failed)?;
            manifest.extra("iterations", json!(d.report.iterations));
            manifest.finish(&io::with_suffix(&failed, ".manifest.json"), start)?;
            Err(Error::Diverged(d)).with_context(|| format!("partial model saved to {}", failed.display()))
        }
        Err(e) => Err(e.into()),
    }
}

fn method_name(m: FitMethod) -> &'static str {
    match m {
        FitMethod::Ple => "ple",
        FitMethod::Hle => "hle",
        FitMethod::Jle => "jle",
        FitMethod::Augjle => "augjle",
    }
}

fn write_or_print(path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn data_error(path: &Path, line: usize, msg: String) -> anyhow::Error {
    Error::Parse { path: path.to_path_buf(), line, msg }.into()
}

fn predict(args: &PredictArgs) -> Result<()> {
    let start = Instant::now();
    let mut manifest = Manifest::new("predict", json!({ "generalized": args.generalized }), 0);
    manifest.input(&args.model)?;
    manifest.input(&args.queries)?;
    let model = io::load_model(&args.model)?;
    let queries = io::load_queries(&args.queries)?;
    let z = &model.z;
    // a model that never saw hyperlinks scores triples, the order of every study
    let order = model.order.unwrap_or(3);
    let scorer = HyperScorer { beta: model.config.beta, concordance: model.concordance };
    let mut out = String::from("tuple,score\n");
    for (row, q) in queries.iter().enumerate() {
        if let Some(&bad) = q.iter().find(|&&i| i >= z.n()) {
            return Err(data_error(&args.queries, row + 1, format!("node {bad} outside 0..{}", z.n())));
        }
        let mut sorted = q.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(data_error(&args.queries, row + 1, "repeated node".into()));
        }
        let score = if args.generalized {
            let rows: Vec<&[f64]> = q.iter().map(|&i| z.row(i)).collect();
            hyper_prob_generalized(&rows)?
        } else if q.len() == 2 {
            pair_prob(z.row(q[0]), z.row(q[1]))?
        } else if q.len() == order {
            scorer.prob(z, &sorted)
        } else {
            return Err(usage(format!(
                "query row {} has {} nodes but the model scores pairs and {order}-tuples; pass --generalized",
                row + 1,
                q.len()
            )));
        };
        let tuple: Vec<String> = q.iter().map(ToString::to_string).collect();
        out.push_str(&format!("{},{score:?}\n", tuple.join(" ")));
    }
    write_or_print(&args.out, &out)?;
    if let Some(p) = &args.out {
        manifest.output(p)?;
        manifest.finish(&io::with_suffix(p, ".manifest.json"), start)?;
    }
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<()> {
    let start = Instant::now();
    let mut manifest = Manifest::new("eval", json!({}), 0);
    manifest.input(&args.model)?;
    let model = io::load_model(&args.model)?;
    let pairs = load_pairs_opt(&args.test_pairs, &mut manifest)?;
    let hypers = load_hyper_opt(&args.test_hyper, &mut manifest)?;
    if pairs.is_none() && hypers.is_none() {
        return Err(usage("eval needs --test-pairs or --test-hyper"));
    }
    if args.truth_pairs.is_some() && pairs.is_none() || args.truth_hyper.is_some() && hypers.is_none() {
        return Err(usage("a truth file needs the matching test file"));
    }
    let n = model.z.n();
    for (cover, path) in [
        (pairs.as_ref().map(|p| p.n()), &args.test_pairs),
        (hypers.as_ref().map(|h| h.n()), &args.test_hyper),
    ] {
        if let (Some(c), Some(path)) = (cover, path) {
            if c > n {
                return Err(data_error(path, 1, format!("test file covers {c} nodes, model has {n}")));
            }
        }
    }
    let pairs = pairs.unwrap_or_else(|| PairObservations::empty(n));
    let hypers = hypers.unwrap_or_else(|| HyperObservations::empty(n, model.order.unwrap_or(3)));
    let truth = if args.truth_pairs.is_some() || args.truth_hyper.is_some() {
        let pair = match &args.truth_pairs {
            Some(p) => {
                manifest.input(p)?;
                Some(io::load_truth_pairs(p, &pairs)?)
            }
            None => None,
        };
        let hyper = match &args.truth_hyper {
            Some(p) => {
                manifest.input(p)?;
                Some(io::load_truth_hyper(p, &hypers)?)
            }
            None => None,
        };
        Some(TruthProbs { pair, hyper })
    } else {
        None
    };
    let scorer = HyperScorer { beta: model.config.beta, concordance: model.concordance };
    let report = evaluate(&model.z, scorer, &pairs, &hypers, truth.as_ref())?;
    for (name, set) in &report.sets {
        if let Err(e) = &set.auc {
            eprintln!("{name}: {e}");
        }
    }
    write_or_print(&args.out, &io::report_csv(&report))?;
    if let Some(p) = &args.out {
        manifest.output(p)?;
        manifest.finish(&io::with_suffix(p, ".manifest.json"), start)?;
    }
    Ok(())
}

fn repro(args: &ReproArgs) -> Result<()> {
    let start = Instant::now();
    let seed = args.seed.seed;
    let spec = args.spec.spec(seed)?;
    let estimators = match &args.estimators {
        Some(names) => names
            .iter()
            .map(|s| Estimator::parse(s).ok_or_else(|| usage(format!("unknown estimator {s:?}"))))
            .collect::<Result<Vec<_>>>()?,
        None => Estimator::ALL.to_vec(),
    };
    let mut config = if args.no_tune { StudyConfig::default() } else { StudyConfig::tuned() };
    config.estimators = estimators.clone();
    config.model.optimizer.max_iters = args.max_iters;
    config.model.optimizer.threads = args.threads.max(1);
    if args.replicates == 0 {
        return Err(usage("need at least one replicate"));
    }
    let results = run_study(&spec, &config, args.replicates)?;
    let summary = summarize(&results);
    let mut text = format!("study {} n={} replicates={} seeds {}..{}\n", args.spec.study, args.spec.n, args.replicates, seed, seed + args.replicates as u64 - 1);
    for r in results.iter().flatten() {
        if r.measured_rho.is_some() || spec.rho_obs > 0.0 {
            text += &format!(
                "seed {}: measured rho {} rho_obs {}\n",
                r.seed,
                r.measured_rho.map_or("NA".into(), |v| format!("{v:.3}")),
                r.measured_rho_obs.map_or("NA".into(), |v| format!("{v:.3}"))
            );
        }
    }
    text += &format_table(&summary, &estimators);
    print!("{text}");
    if let Some(p) = &args.out {
        std::fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?;
        let mut config_json = args.spec.to_json();
        config_json["replicates"] = json!(args.replicates);
        config_json["estimators"] = json!(estimators.iter().map(|e| e.name()).collect::<Vec<_>>());
        config_json["tuned"] = json!(!args.no_tune);
        config_json["max_iters"] = json!(args.max_iters);
        let mut manifest = Manifest::new("repro", config_json, seed);
        manifest.output(p)?;
        manifest.extra("failures", json!(summary.failures));
        manifest.finish(&io::with_suffix(p, ".manifest.json"), start)?;
    }
    Ok(())
}

fn ego(args: &EgoArgs) -> Result<()> {
    let start = Instant::now();
    let seed = args.seed.seed;
    let mut manifest = Manifest::new(
        "ego",
        json!({
            "drop_largest_circle": args.drop_largest_circle,
            "order": args.order,
            "train_hypers": args.train_hypers,
            "augmented": args.augmented,
            "test_tuples": args.test_tuples,
            "lambda": args.lambda,
            "max_iters": args.max_iters,
        }),
        seed,
    );
    manifest.input(&args.edges)?;
    manifest.input(&args.circles)?;
    let mut ids = io::IdMap::default();
    let edges = io::load_edge_list(&args.edges, &mut ids)?;
    let circles = io::load_circles_with(&args.circles, ids)?;
    let mut config = EgoConfig {
        test_order: args.order,
        train_hypers: args.train_hypers,
        augmented: args.augmented,
        test_tuples: args.test_tuples,
        drop_largest: args.drop_largest_circle,
        seed,
        ..EgoConfig::default()
    };
    config.model.optimizer.max_iters = args.max_iters;
    config.model.optimizer.seed = seed;
    if let Some(lambda) = args.lambda {
        config.model.lambda = lambda;
        config.lambda_grid = None;
    }
    config.model.validate()?;
    let result = ego_experiment(&edges, &circles, &config)?;
    let mut text = format!("nodes={} circles={} train_hypers={} augmented={}\n", circles.n, circles.circles.len(), result.train_hypers, result.augmented);
    text += &format!("{:<8} {:>8} {:>8}\n", "method", "pair", format!("order{}", args.order));
    for (est, pair) in &result.pair_auc {
        text += &format!("{:<8} {:>8.3} {:>8.3}\n", est.name(), pair, result.order_auc[est]);
    }
    print!("{text}");
    std::fs::write(&args.out, &text).with_context(|| format!("writing {}", args.out.display()))?;
    let id_path = io::with_suffix(&args.out, ".ids");
    io::save_id_map(&id_path, &circles.ids)?;
    manifest.output(&args.out)?;
    manifest.output(&id_path)?;
    manifest.finish(&io::with_suffix(&args.out, ".manifest.json"), start)
}

/// 2 argument error, 3 data error, 4 numeric failure.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Argument(_)) => 2,
        Some(Error::Diverged(_) | Error::Tuning(_) | Error::Estimation(_)) => 4,
        Some(_) => 3,
        None if err.downcast_ref::<std::io::Error>().is_some() => 3,
        None => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict(a),
        Command::Eval(a) => eval(a),
        Command::Repro(a) => repro(a),
        Command::Ego(a) => ego(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
