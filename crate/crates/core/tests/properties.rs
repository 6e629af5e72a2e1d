use std::collections::{HashMap, HashSet};

use hyperembed::augment::{build_candidate_pools, check_augmented, select_augmented};
use hyperembed::eval::overlap_degree_c0;
use hyperembed::io;
use hyperembed::model::{concordance_f, hyper_prob, Concordance, HyperObservations, LatentFactors, ModelConfig, PairObservations};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn entry() -> impl Strategy<Value = f64> {
    prop_oneof![4 => -2.0f64..2.0, 1 => Just(0.0), 1 => Just(-0.5), 1 => Just(0.5)]
}

fn rows_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (3usize..=6, 1usize..=5).prop_flat_map(|(m, r)| prop::collection::vec(prop::collection::vec(entry(), r), m))
}

/// Random instance: every pair observed with probability `obs`, labels by
/// `density`, plus `h` random labelled m-tuples.
fn instance(n: usize, m: usize, obs: f64, density: f64, h: usize, seed: u64) -> (PairObservations, HyperObservations) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triples = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(obs) {
                triples.push((i, j, u8::from(rng.gen_bool(density))));
            }
        }
    }
    let pairs = PairObservations::from_unordered(n, triples).unwrap();
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for _ in 0..h {
        let mut t = rand::seq::index::sample(&mut rng, n, m).into_vec();
        t.sort_unstable();
        if seen.insert(t.clone()) {
            entries.push((t, u8::from(rng.gen_bool(0.5)), 1.0));
        }
    }
    (pairs, HyperObservations::from_entries(n, m, entries).unwrap())
}

fn random_z(n: usize, r: usize, scale: f64, seed: u64) -> LatentFactors {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    LatentFactors::from_vec(n, r, (0..n * r).map(|_| rng.gen_range(-scale..scale)).collect()).unwrap()
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn concordance_and_prob_permutation_invariant(rows in rows_strategy(), seed in any::<u64>(), beta in 1.0f64..10.0) {
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let mut shuffled = refs.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(concordance_f(&refs).unwrap().to_bits(), concordance_f(&shuffled).unwrap().to_bits());
        prop_assert_eq!(hyper_prob(&refs, beta).unwrap().to_bits(), hyper_prob(&shuffled, beta).unwrap().to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn augmentation_monotone_in_delta(
        n in 6usize..14,
        seed in any::<u64>(),
        d1 in 0.001f64..0.499,
        d2 in 0.001f64..0.499,
    ) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let (pairs, hypers) = instance(n, 3, 0.8, 0.5, 6, seed);
        let pools = build_candidate_pools(&pairs, &hypers, 3, None, seed).unwrap();
        let z = random_z(n, 3, 2.0, seed ^ 1);
        let small = select_augmented(&z, &pools, 1.0, lo).unwrap();
        let large = select_augmented(&z, &pools, 1.0, hi).unwrap();
        let keys: HashSet<(Vec<usize>, u8)> = large.entries.iter().map(|e| (e.tuple.clone(), e.y)).collect();
        for e in &small.entries {
            prop_assert!(keys.contains(&(e.tuple.clone(), e.y)));
        }
    }

    #[test]
    fn augmented_disjoint_from_observed(n in 5usize..14, m in 3usize..5, seed in any::<u64>(), delta in 0.01f64..0.49) {
        let (pairs, hypers) = instance(n, m, 0.9, 0.5, 10, seed);
        let pools = build_candidate_pools(&pairs, &hypers, m, None, seed).unwrap();
        let z = random_z(n, 2, 2.0, seed ^ 2);
        let aug = select_augmented(&z, &pools, 1.0, delta).unwrap();
        let observed = hypers.tuple_set();
        for e in &aug.entries {
            prop_assert!(!observed.contains(e.tuple.as_slice()));
            let in_band = if e.y == 1 { e.score >= 1.0 - delta } else { e.score <= delta };
            prop_assert!(in_band);
        }
        prop_assert!(check_augmented(&pairs, &hypers, &aug));
    }

    #[test]
    fn overlap_degree_matches_oracle(n in 4usize..12, m in 3usize..5, h in 0usize..40, seed in any::<u64>()) {
        prop_assume!(m <= n);
        let (pairs, hypers) = instance(n, m, 0.6, 0.5, h, seed);
        let mut best = 0;
        for e in pairs.entries() {
            let count = hypers.tuples().filter(|t| t.contains(&e.i) && t.contains(&e.j)).count();
            best = best.max(count);
        }
        let c0 = overlap_degree_c0(&pairs, &hypers);
        prop_assert_eq!(c0, best);
        prop_assert!(c0 <= binomial(n - 2, m - 2).min(hypers.len()));
    }

    #[test]
    fn pairs_and_hyper_round_trip(n in 3usize..30, m in 2usize..5, seed in any::<u64>(), weighted in any::<bool>()) {
        prop_assume!(m <= n);
        let dir = tempfile::tempdir().unwrap();
        let (pairs, hypers) = instance(n, m, 0.5, 0.3, 20, seed);
        let hypers = if weighted {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let entries: Vec<_> = hypers.tuples().zip(hypers.labels()).map(|(t, &y)| (t.to_vec(), y, rng.gen_range(1e-6..5.0))).collect();
            HyperObservations::from_entries(n, m, entries).unwrap()
        } else {
            hypers
        };
        let pp = dir.path().join("p.txt");
        let hp = dir.path().join("h.txt");
        io::save_pairs(&pp, &pairs).unwrap();
        io::save_hyper(&hp, &hypers).unwrap();
        prop_assert_eq!(io::load_pairs(&pp).unwrap(), pairs.clone());
        let back = io::load_hyper(&hp).unwrap();
        prop_assert_eq!(&back, &hypers);
        for (a, b) in back.weights().iter().zip(hypers.weights()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let pair_probs: Vec<f64> = (0..pairs.len()).map(|_| rng.gen::<f64>()).collect();
        let hyper_probs: Vec<f64> = (0..hypers.len()).map(|_| rng.gen::<f64>()).collect();
        let tp = dir.path().join("tp.txt");
        let th = dir.path().join("th.txt");
        io::save_truth_pairs(&tp, &pairs, &pair_probs).unwrap();
        io::save_truth_hyper(&th, &hypers, &hyper_probs).unwrap();
        prop_assert_eq!(io::load_truth_pairs(&tp, &pairs).unwrap(), pair_probs);
        prop_assert_eq!(io::load_truth_hyper(&th, &hypers).unwrap(), hyper_probs);
    }

    #[test]
    fn model_round_trip(
        n in 1usize..20,
        r in 1usize..6,
        seed in any::<u64>(),
        beta in 1.0f64..50.0,
        lambda in prop_oneof![Just(0.0), 1e-12f64..10.0],
        cp in any::<bool>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..n * r)
            .map(|_| match rng.gen_range(0..4) {
                0 => 0.0,
                1 => rng.gen_range(-1e-300..1e-300),
                2 => rng.gen_range(-1e10..1e10),
                _ => rng.gen_range(-10.0..10.0),
            })
            .collect();
        let model = io::ModelFile {
            z: LatentFactors::from_vec(n, r, values).unwrap(),
            config: ModelConfig { rank: r, beta, lambda, ..ModelConfig::default() },
            concordance: if cp { Concordance::Cp } else { Concordance::SignConsistent },
            order: if cp { Some(3) } else { None },
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        io::save_model(&path, &model).unwrap();
        let back = io::load_model(&path).unwrap();
        let bits = |z: &LatentFactors| z.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back.z), bits(&model.z));
        prop_assert_eq!(back.config.beta.to_bits(), beta.to_bits());
        prop_assert_eq!(back.config.lambda.to_bits(), lambda.to_bits());
        prop_assert_eq!(back.config.cap.to_bits(), model.config.cap.to_bits());
        prop_assert_eq!(back.concordance, model.concordance);
        prop_assert_eq!(back.order, model.order);
    }

    #[test]
    fn queries_round_trip(rows in prop::collection::vec(prop::collection::vec(0usize..1000, 2..7), 1..30)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.txt");
        let text: String = rows.iter().map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ") + "\n").collect();
        std::fs::write(&path, text).unwrap();
        prop_assert_eq!(io::load_queries(&path).unwrap(), rows);
    }

    #[test]
    fn circles_decomposition_matches_membership(n in 4usize..12, k in 1usize..5, m in 2usize..5, seed in any::<u64>()) {
        prop_assume!(m <= n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut lines = String::new();
        let mut sets: Vec<HashSet<usize>> = Vec::new();
        for c in 0..k {
            let size = rng.gen_range(1..=n);
            let members: HashSet<usize> = rand::seq::index::sample(&mut rng, n, size).into_iter().collect();
            let ids: Vec<String> = members.iter().map(|i| format!("u{i}")).collect();
            lines += &format!("circle{c}\t{}\n", ids.join("\t"));
            sets.push(members);
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.circles");
        std::fs::write(&path, lines).unwrap();
        let data = io::load_circles(&path).unwrap();
        prop_assume!(data.n >= m);
        let hypers = io::circles_to_tuples(&data, m, 0, false, 0).unwrap();
        let ids = data.ids.ids();
        let raw: HashMap<usize, usize> = (0..data.n).map(|i| (i, ids[i][1..].parse().unwrap())).collect();
        prop_assert_eq!(hypers.len(), binomial(data.n, m));
        for (t, &y) in hypers.tuples().zip(hypers.labels()) {
            let expect = sets.iter().any(|s| t.iter().all(|i| s.contains(&raw[i])));
            prop_assert_eq!(y, u8::from(expect));
        }
    }
}
