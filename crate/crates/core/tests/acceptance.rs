//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Failures are reported, not asserted, so the run always completes. Set
//! `HYPEREMBED_ACCEPT_STRICT=1` to exit non-zero when any criterion fails.
//! `HYPEREMBED_EGO_DIR` points at a directory with `<id>.edges` and
//! `<id>.circles` ego-network files (`HYPEREMBED_EGO_ID`, default 348).

use std::collections::HashSet;
use std::path::Path;
use std::time::Instant;

use hyperembed::augment::{build_candidate_pools, check_augmented, select_augmented};
use hyperembed::eval::{auc, overlap_degree_c0};
use hyperembed::io;
use hyperembed::model::{
    concordance_f, hyper_prob, loss_joint, Concordance, HyperObservations, LatentFactors, ModelConfig, PairObservations,
};
use hyperembed::optim::grad_joint;
use hyperembed::simgen::{make_splits, GenSpec};
use hyperembed::study::{
    ego_experiment, run_study, summarize, EgoConfig, Estimator, ReplicateResult, StudyConfig, Summary,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const REPLICATES: usize = 5;
const SWEEP_REPLICATES: usize = 3;
const BASE_SEED: u64 = 2024;

struct Outcome {
    id: u32,
    pass: bool,
}

fn report(id: u32, name: &str, pass: bool, detail: String, elapsed: f64) -> Outcome {
    println!("{} [{id}] {name}: {detail} ({elapsed:.1}s)", if pass { "PASS" } else { "FAIL" });
    Outcome { id, pass }
}

fn fmt(x: Option<f64>) -> String {
    x.map_or("NA".into(), |v| format!("{v:.3}"))
}

fn random_instance(rng: &mut ChaCha8Rng, n: usize, m: usize, obs: f64, h: usize) -> (PairObservations, HyperObservations) {
    let mut triples = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(obs) {
                triples.push((i, j, u8::from(rng.gen_bool(0.5))));
            }
        }
    }
    let pairs = PairObservations::from_unordered(n, triples).unwrap();
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for _ in 0..h {
        let mut t = rand::seq::index::sample(rng, n, m).into_vec();
        t.sort_unstable();
        if seen.insert(t.clone()) {
            entries.push((t, u8::from(rng.gen_bool(0.5)), 1.0));
        }
    }
    (pairs, HyperObservations::from_entries(n, m, entries).unwrap())
}

fn random_z(rng: &mut ChaCha8Rng, n: usize, r: usize, scale: f64) -> LatentFactors {
    LatentFactors::from_vec(n, r, (0..n * r).map(|_| rng.gen_range(-scale..scale)).collect()).unwrap()
}

fn gradient_check() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED);
    let h = 1e-5;
    let (mut worst, mut checked) = (0.0f64, 0usize);
    for _ in 0..50 {
        let n = rng.gen_range(3..=8);
        let r = rng.gen_range(1..=3);
        let (pairs, hypers) = random_instance(&mut rng, n, 3, 0.7, 6);
        if pairs.is_empty() && hypers.is_empty() {
            continue;
        }
        let config = ModelConfig {
            rank: r,
            beta: rng.gen_range(1.0..4.0),
            lambda: rng.gen_range(0.0..0.1),
            ..ModelConfig::default()
        };
        let z = random_z(&mut rng, n, r, 1.5);
        let grad = grad_joint(&z, &pairs, &hypers, &config).unwrap();
        for k in 0..n * r {
            if z.as_slice()[k].abs() <= 1e-3 {
                continue;
            }
            let mut plus = z.clone();
            plus.as_mut_slice()[k] += h;
            let mut minus = z.clone();
            minus.as_mut_slice()[k] -= h;
            let fd = (loss_joint(&plus, &pairs, &hypers, &config).unwrap()
                - loss_joint(&minus, &pairs, &hypers, &config).unwrap())
                / (2.0 * h);
            let g = grad.as_slice()[k];
            // relative error with a floor so that vanishing gradients compare absolutely
            let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(1e-6);
            worst = worst.max(rel);
            checked += 1;
        }
    }
    let elapsed = t.elapsed().as_secs_f64();
    report(
        1,
        "gradient vs central differences",
        worst < 1e-5 && elapsed < 10.0,
        format!("worst relative error {worst:.2e} over {checked} coordinates"),
        elapsed,
    )
}

fn auc_oracle() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED + 1);
    let mut worst = 0.0f64;
    let mut sets = 0;
    while sets < 100 {
        let len = rng.gen_range(2..300);
        // coarse scores force ties
        let levels = rng.gen_range(2..50);
        let scores: Vec<f64> = (0..len).map(|_| rng.gen_range(0..levels) as f64 / levels as f64).collect();
        let labels: Vec<u8> = (0..len).map(|_| u8::from(rng.gen_bool(0.4))).collect();
        let (pos, neg): (Vec<usize>, Vec<usize>) = (0..len).partition(|&i| labels[i] == 1);
        if pos.is_empty() || neg.is_empty() {
            continue;
        }
        let mut wins = 0.0;
        for &p in &pos {
            for &q in &neg {
                wins += if scores[p] > scores[q] {
                    1.0
                } else if scores[p] == scores[q] {
                    0.5
                } else {
                    0.0
                };
            }
        }
        let brute = wins / (pos.len() * neg.len()) as f64;
        worst = worst.max((auc(&scores, &labels).unwrap() - brute).abs());
        sets += 1;
    }
    let elapsed = t.elapsed().as_secs_f64();
    report(2, "rank AUC vs brute force", worst <= 1e-12 && elapsed < 5.0, format!("max difference {worst:.1e} over 100 sets"), elapsed)
}

fn study(spec: GenSpec, config: &StudyConfig, replicates: usize) -> (Summary, Vec<ReplicateResult>) {
    let results = run_study(&spec, config, replicates).expect("replicate count is positive");
    let summary = summarize(&results);
    for f in &summary.failures {
        println!("  replicate failure: {f}");
    }
    (summary, results.into_iter().flatten().collect())
}

fn with_estimators(estimators: &[Estimator]) -> StudyConfig {
    StudyConfig { estimators: estimators.to_vec(), ..StudyConfig::tuned() }
}

fn study1() -> Vec<Outcome> {
    let t = Instant::now();
    let config = with_estimators(&[Estimator::Ple, Estimator::Hle, Estimator::Jle]);
    let (big, _) = study(GenSpec::study1(300, BASE_SEED), &config, REPLICATES);
    let (small, _) = study(GenSpec::study1(100, BASE_SEED), &with_estimators(&[Estimator::Jle]), REPLICATES);
    let elapsed = t.elapsed().as_secs_f64();
    let a2 = |e| big.mean("hyper_A2", e);
    let a1 = |e| big.mean("hyper_A1", e);
    let (jle, hle, ple) = (a2(Estimator::Jle), a2(Estimator::Hle), a2(Estimator::Ple));
    let small_jle = small.mean("hyper_A2", Estimator::Jle);
    let pass3 = matches!((jle, hle, small_jle), (Some(j), Some(h), Some(s))
        if (0.90..=1.00).contains(&j) && (0.81..=0.91).contains(&h) && j - h >= 0.04 && (s - 0.92).abs() <= 0.05)
        && elapsed < 15.0 * 60.0;
    println!(
        "  N=300 pair AUC: PLE {} HLE {} JLE {}",
        fmt(big.mean("pair", Estimator::Ple)),
        fmt(big.mean("pair", Estimator::Hle)),
        fmt(big.mean("pair", Estimator::Jle))
    );
    let o3 = report(
        3,
        "Study 1 A2 hyper",
        pass3,
        format!(
            "N=300 JLE {} (want [0.90,1.00]) HLE {} (want [0.81,0.91]) PLE {} gap {} (want >= 0.04); N=100 JLE {} (want 0.92 +- 0.05)",
            fmt(jle),
            fmt(hle),
            fmt(ple),
            fmt(jle.zip(hle).map(|(j, h)| j - h)),
            fmt(small_jle)
        ),
        elapsed,
    );
    let (j1, p1, h1) = (a1(Estimator::Jle), a1(Estimator::Ple), a1(Estimator::Hle));
    let pass4 = matches!((j1, p1, h1), (Some(j), Some(p), Some(h)) if j >= 0.54 && j > p && j > h);
    let o4 = report(
        4,
        "Study 1 A1 hyper ordering",
        pass4,
        format!("N=300 JLE {} (want >= 0.54) PLE {} HLE {}", fmt(j1), fmt(p1), fmt(h1)),
        0.0,
    );
    vec![o3, o4]
}

fn study2() -> Outcome {
    let t = Instant::now();
    let config = with_estimators(&[Estimator::Jle, Estimator::AugJle]);
    let (big, _) = study(GenSpec::study2(200, BASE_SEED, None), &config, REPLICATES);
    let (small, _) = study(GenSpec::study2(100, BASE_SEED, None), &config, REPLICATES);
    let elapsed = t.elapsed().as_secs_f64();
    let aug_h = big.mean("hyper", Estimator::AugJle);
    let jle_h = big.mean("hyper", Estimator::Jle);
    let aug_p = big.mean("pair", Estimator::AugJle);
    let jle_p = big.mean("pair", Estimator::Jle);
    let small_aug_p = small.mean("pair", Estimator::AugJle);
    let pass = matches!((aug_h, jle_h, aug_p, jle_p, small_aug_p), (Some(ah), Some(jh), Some(ap), Some(jp), Some(sp))
        if (ah - 0.85).abs() <= 0.05 && ah >= jh && ap >= jp && (sp - 0.72).abs() <= 0.05);
    report(
        5,
        "Study 2 augmentation",
        pass,
        format!(
            "N=200 hyper Aug {} (want 0.85 +- 0.05) JLE {}; pair Aug {} JLE {}; N=100 pair Aug {} (want 0.72 +- 0.05) JLE {}",
            fmt(aug_h),
            fmt(jle_h),
            fmt(aug_p),
            fmt(jle_p),
            fmt(small_aug_p),
            fmt(small.mean("pair", Estimator::Jle))
        ),
        elapsed,
    )
}

fn missing_sweep() -> Outcome {
    let t = Instant::now();
    let config = with_estimators(&[Estimator::Jle, Estimator::AugJle]);
    let mut gaps = Vec::new();
    for rate in [0.5, 0.4, 0.3, 0.2] {
        let (s, _) = study(GenSpec::study2(200, BASE_SEED, Some(rate)), &config, SWEEP_REPLICATES);
        let gap = s.mean("hyper", Estimator::AugJle).zip(s.mean("hyper", Estimator::Jle)).map(|(a, j)| a - j);
        println!(
            "  missing {rate}: hyper JLE {} Aug {}; pair JLE {} Aug {}",
            fmt(s.mean("hyper", Estimator::Jle)),
            fmt(s.mean("hyper", Estimator::AugJle)),
            fmt(s.mean("pair", Estimator::Jle)),
            fmt(s.mean("pair", Estimator::AugJle))
        );
        gaps.push(gap);
    }
    let elapsed = t.elapsed().as_secs_f64();
    let pass = if gaps.iter().all(Option::is_some) {
        let g: Vec<f64> = gaps.iter().flatten().copied().collect();
        let rises: Vec<f64> = g.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).collect();
        let monotone = rises.is_empty() || (rises.len() == 1 && rises[0] <= 0.01);
        monotone && g[0] >= 0.04
    } else {
        false
    };
    let shown: Vec<String> = gaps.iter().map(|g| fmt(*g)).collect();
    report(
        6,
        "missing-rate sweep",
        pass,
        format!("Aug-JLE hyper gaps at 50/40/30/20% missing: {} (want decreasing, first >= 0.04)", shown.join(", ")),
        elapsed,
    )
}

fn study3() -> Outcome {
    let t = Instant::now();
    let (s, reps) = study(GenSpec::study3(120, BASE_SEED, 0.85, 0.35), &StudyConfig::tuned(), REPLICATES);
    let elapsed = t.elapsed().as_secs_f64();
    let gap = |set: &str| s.mean(set, Estimator::AugJle).zip(s.mean(set, Estimator::Jle)).map(|(a, j)| a - j);
    let ordered = reps
        .iter()
        .filter(|rep| {
            ["pair", "hyper"].iter().all(|set| {
                let a = |e: Estimator| rep.reports.get(&e).and_then(|r| r.as_ref().ok()).and_then(|r| r.auc(set));
                match (a(Estimator::AugJle), a(Estimator::Jle), a(Estimator::Ple), a(Estimator::Hle)) {
                    (Some(aug), Some(j), Some(p), Some(h)) => aug > j && j >= p && j >= h,
                    _ => false,
                }
            })
        })
        .count();
    let rho_obs: Vec<f64> = reps.iter().filter_map(|r| r.measured_rho_obs).collect();
    let rho: Vec<f64> = reps.iter().filter_map(|r| r.measured_rho).collect();
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    for set in ["pair", "hyper"] {
        let cells: Vec<String> = Estimator::ALL.iter().map(|&e| format!("{} {}", e.name(), fmt(s.mean(set, e)))).collect();
        println!("  {set}: {}", cells.join(", "));
    }
    let pass = matches!((gap("pair"), gap("hyper")), (Some(p), Some(h)) if p >= 0.05 && h >= 0.05) && ordered >= 4;
    report(
        7,
        "Study 3 augmentation under dependence",
        pass,
        format!(
            "measured rho_obs {} rho {}; Aug-JLE gap pair {} hyper {} (want >= 0.05); ordering held in {ordered}/{} replicates (want >= 4)",
            fmt(mean(&rho_obs)),
            fmt(mean(&rho)),
            fmt(gap("pair")),
            fmt(gap("hyper")),
            reps.len()
        ),
        elapsed,
    )
}

fn calibration() -> Outcome {
    let t = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for rho in [0.25, 0.55, 0.85] {
        let measured = make_splits(&GenSpec::study3(240, BASE_SEED, rho, 0.25))
            .and_then(|b| b.truth.measure_rho(100_000, BASE_SEED));
        let ok = matches!(measured, Ok(m) if (m - rho).abs() <= 0.03);
        pass &= ok;
        parts.push(format!("rho {rho}->{}", fmt(measured.ok())));
    }
    for rho_obs in [0.15, 0.25, 0.35] {
        let measured = make_splits(&GenSpec::study3(240, BASE_SEED, 0.55, rho_obs)).map(|b| b.measured_rho_obs);
        let m = measured.ok().flatten();
        let ok = matches!(m, Some(m) if (m - rho_obs).abs() <= 0.05);
        pass &= ok;
        parts.push(format!("rho_obs {rho_obs}->{}", fmt(m)));
    }
    report(8, "dependency calibration", pass, parts.join(", "), t.elapsed().as_secs_f64())
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn property_suites() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED + 9);
    let mut failures = Vec::new();

    let mut perm_bad = 0;
    for _ in 0..1000 {
        let m = rng.gen_range(3..=6);
        let r = rng.gen_range(1..=5);
        let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..r).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let mut shuffled = refs.clone();
        shuffled.shuffle(&mut rng);
        let beta = rng.gen_range(1.0..10.0);
        if concordance_f(&refs).unwrap().to_bits() != concordance_f(&shuffled).unwrap().to_bits()
            || hyper_prob(&refs, beta).unwrap().to_bits() != hyper_prob(&shuffled, beta).unwrap().to_bits()
        {
            perm_bad += 1;
        }
    }
    if perm_bad > 0 {
        failures.push(format!("{perm_bad} permutation mismatches"));
    }

    let (mut mono_bad, mut disjoint_bad, mut c0_bad) = (0, 0, 0);
    for _ in 0..100 {
        let n = rng.gen_range(5..14);
        let m = rng.gen_range(3..5);
        let (pairs, hypers) = random_instance(&mut rng, n, m, 0.85, 8);
        let pools = build_candidate_pools(&pairs, &hypers, m, None, 0).unwrap();
        let z = random_z(&mut rng, n, 3, 2.0);
        let (d1, d2) = (rng.gen_range(0.001..0.25), rng.gen_range(0.25..0.499));
        let small = select_augmented(&z, &pools, 1.0, d1).unwrap();
        let large = select_augmented(&z, &pools, 1.0, d2).unwrap();
        let keys: HashSet<(Vec<usize>, u8)> = large.entries.iter().map(|e| (e.tuple.clone(), e.y)).collect();
        if small.entries.iter().any(|e| !keys.contains(&(e.tuple.clone(), e.y))) {
            mono_bad += 1;
        }
        let observed = hypers.tuple_set();
        if large.entries.iter().any(|e| observed.contains(e.tuple.as_slice())) || !check_augmented(&pairs, &hypers, &large) {
            disjoint_bad += 1;
        }

        let h = rng.gen_range(0..40);
        let (pairs, hypers) = random_instance(&mut rng, n, m, 0.6, h);
        let mut oracle = 0;
        for e in pairs.entries() {
            oracle = oracle.max(hypers.tuples().filter(|t| t.contains(&e.i) && t.contains(&e.j)).count());
        }
        let c0 = overlap_degree_c0(&pairs, &hypers);
        if c0 != oracle || c0 > binomial(n - 2, m - 2).min(hypers.len()) {
            c0_bad += 1;
        }
    }
    for (count, what) in [(mono_bad, "monotonicity"), (disjoint_bad, "disjointness"), (c0_bad, "overlap degree")] {
        if count > 0 {
            failures.push(format!("{count} {what} violations"));
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let mut io_bad = 0;
    for case in 0..50 {
        let n = rng.gen_range(4..30);
        let m = rng.gen_range(2..5);
        let (pairs, plain) = random_instance(&mut rng, n, m, 0.5, 20);
        let entries: Vec<_> = plain.tuples().zip(plain.labels()).map(|(t, &y)| (t.to_vec(), y, rng.gen_range(1e-6..5.0))).collect();
        let hypers = HyperObservations::from_entries(n, m, entries).unwrap();
        let (pp, hp, mp) = (dir.path().join("p"), dir.path().join("h"), dir.path().join("m"));
        io::save_pairs(&pp, &pairs).unwrap();
        io::save_hyper(&hp, &hypers).unwrap();
        let z = random_z(&mut rng, n, 5, 1e3);
        let model = io::ModelFile {
            z: z.clone(),
            config: ModelConfig { beta: rng.gen_range(1.0..9.0), lambda: rng.gen_range(0.0..1.0), ..ModelConfig::default() },
            concordance: if case % 2 == 0 { Concordance::Cp } else { Concordance::SignConsistent },
            order: (case % 3 != 0).then_some(m),
        };
        io::save_model(&mp, &model).unwrap();
        let back = io::load_model(&mp).unwrap();
        let hb = io::load_hyper(&hp).unwrap();
        let same_weights = hb.weights().iter().zip(hypers.weights()).all(|(a, b)| a.to_bits() == b.to_bits());
        let same_model = back.z.as_slice().iter().zip(z.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits())
            && back.config.beta.to_bits() == model.config.beta.to_bits()
            && back.config.lambda.to_bits() == model.config.lambda.to_bits()
            && back.concordance == model.concordance
            && back.order == model.order;
        if io::load_pairs(&pp).unwrap() != pairs || hb != hypers || !same_weights || !same_model {
            io_bad += 1;
        }
    }
    if io_bad > 0 {
        failures.push(format!("{io_bad} I/O round-trip mismatches"));
    }
    let detail = if failures.is_empty() {
        "1000 permutation cases, 100 augmentation and overlap instances, 50 I/O round trips".to_string()
    } else {
        failures.join("; ")
    };
    report(9, "property suites", failures.is_empty(), detail, t.elapsed().as_secs_f64())
}

fn circles_fixture(dir: &Path) -> (bool, String) {
    let text = "\
# planted circles over external ids
family\t101\t102\t103\t104\t105
work\t104\t105\t106\t107
club\t201\t202\t203
pair\t301\t302
everyone\t101\t102\t103\t104\t105\t106\t107\t201\t202\t203\t301\t302
";
    let path = dir.join("fixture.circles");
    std::fs::write(&path, text).unwrap();
    let mut data = io::load_circles(&path).unwrap();
    data.drop_largest();
    let hypers = io::circles_to_hyperlinks(&data, 0, false, 0).unwrap();
    let raw: Vec<Vec<&str>> = text.lines().skip(1).take(4).map(|l| l.split('\t').skip(1).collect()).collect();
    let ids = data.ids.ids();
    let mut mismatches = 0;
    for (t, &y) in hypers.tuples().zip(hypers.labels()) {
        let expect = raw.iter().any(|c| t.iter().all(|&i| c.contains(&ids[i].as_str())));
        mismatches += usize::from(y != u8::from(expect));
    }
    let positives = hypers.labels().iter().filter(|&&y| y == 1).count();
    let ok = mismatches == 0 && hypers.len() == binomial(data.n, 3) && positives == 10 + 4 + 1;
    (ok, format!("fixture: {} triples, {positives} linked, {mismatches} mismatches", hypers.len()))
}

fn ego_network() -> Outcome {
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let (mut pass, mut detail) = circles_fixture(dir.path());
    match std::env::var("HYPEREMBED_EGO_DIR") {
        Ok(ego_dir) => {
            let id = std::env::var("HYPEREMBED_EGO_ID").unwrap_or_else(|_| "348".into());
            let base = Path::new(&ego_dir);
            let mut ids = io::IdMap::default();
            let loaded = io::load_edge_list(&base.join(format!("{id}.edges")), &mut ids)
                .and_then(|edges| Ok((edges, io::load_circles_with(&base.join(format!("{id}.circles")), ids)?)));
            match loaded.and_then(|(edges, circles)| ego_experiment(&edges, &circles, &EgoConfig::default())) {
                Ok(res) => {
                    let jle_pair = res.pair_auc[&Estimator::Jle];
                    let aug_order = res.order_auc[&Estimator::AugJle];
                    pass &= jle_pair >= 0.74 && aug_order >= 0.85;
                    detail += &format!(
                        "; ego {id}: JLE pair {jle_pair:.3} (want >= 0.74), Aug JLE 6-order {aug_order:.3} (want >= 0.85), PLE pair {:.3}",
                        res.pair_auc[&Estimator::Ple]
                    );
                }
                Err(e) => {
                    pass = false;
                    detail += &format!("; ego {id}: {e}");
                }
            }
        }
        Err(_) => detail += "; ego-network files not supplied, real-data check not run",
    }
    report(10, "circle decomposition and ego-network", pass, detail, t.elapsed().as_secs_f64())
}

fn main() {
    // honour `cargo test -- --list` and filters without running the studies
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let start = Instant::now();
    let mut outcomes = vec![gradient_check(), auc_oracle()];
    outcomes.extend(study1());
    outcomes.push(study2());
    outcomes.push(missing_sweep());
    outcomes.push(study3());
    outcomes.push(calibration());
    outcomes.push(property_suites());
    outcomes.push(ego_network());
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    println!(
        "acceptance: {} of {} criteria passed in {:.0}s{}",
        outcomes.len() - failed.len(),
        outcomes.len(),
        start.elapsed().as_secs_f64(),
        if failed.is_empty() { String::new() } else { format!("; failed {failed:?}") }
    );
    if !failed.is_empty() && std::env::var_os("HYPEREMBED_ACCEPT_STRICT").is_some() {
        std::process::exit(1);
    }
}
