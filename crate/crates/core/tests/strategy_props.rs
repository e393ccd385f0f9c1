use std::sync::Arc;

use lmcma::cholesky::PairArchive;
use lmcma::strategy::{
    candidate_from, default_params, sample_candidate, sigma_one_fifth, steady_state_accept,
    Candidate, StrategyState,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn candidate(n: usize, fitness: f64, rng: &mut ChaCha8Rng) -> Candidate {
    Candidate {
        z: vec![0.0; n],
        x: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        fitness,
        snapshot_version: 0,
    }
}

#[test]
fn best_set_stays_sorted_and_bounded() {
    let mut params = default_params(6).unwrap();
    // fitness here is unrelated to x, so keep σ from collapsing
    params.d_sigma = 1e4;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut state = StrategyState::new(&params, vec![0.0; 6]).unwrap();
    let mut last_best = f64::INFINITY;
    for i in 0..20_000 {
        let f = if i % 97 == 0 {
            f64::NAN
        } else {
            rng.random_range(0.0..100.0)
        };
        let worst = state.best_set.last().map(|s| s.fitness);
        let full = state.best_set.len() == params.ss_pool;
        let accepted = steady_state_accept(&mut state, &params, candidate(6, f, &mut rng)).unwrap();
        if f.is_nan() {
            assert!(!accepted);
        } else if full {
            assert_eq!(accepted, f < worst.unwrap());
        } else {
            assert!(accepted);
        }
        assert!(state.best_set.len() <= params.ss_pool);
        assert!(state
            .best_set
            .windows(2)
            .all(|w| w[0].fitness <= w[1].fitness));
        assert!(state.best_fitness <= last_best);
        assert!(state.sigma > 0.0);
        last_best = state.best_fitness;
    }
    assert_eq!(state.evals, 20_000);
    assert_eq!(state.best_fitness, state.best_set[0].fitness);
}

#[test]
fn archive_bounded_with_increasing_stamps() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut archive = PairArchive::new(8, 5, 0.1).unwrap();
    let mut t = 0;
    for _ in 0..10_000 {
        t += rng.random_range(1..20u64);
        let p: Vec<f64> = (0..8).map(|_| rng.random_range(-2.0..2.0)).collect();
        archive.insert_pair(&p, t, 8).unwrap();
        assert!(archive.len() <= 5);
        assert!(archive.entries().windows(2).all(|w| w[0].t < w[1].t));
    }
    assert_eq!(archive.len(), 5);
}

#[test]
fn one_fifth_rule_has_no_drift_at_target_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let steps = 100_000;
    let mut sigma: f64 = 1.0;
    for _ in 0..steps {
        sigma = sigma_one_fifth(sigma, rng.random_bool(0.2), 0.2, 1.0);
    }
    let drift = sigma.ln() / steps as f64;
    assert!(drift.abs() <= 0.02, "{drift}");
}

#[test]
fn candidates_reproduce_from_snapshot() {
    let params = default_params(9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut state = StrategyState::with_random_mean(&params, &mut rng).unwrap();
    state.sigma = 0.7;
    let arch = Arc::make_mut(&mut state.archive);
    for t in 1..=4 {
        let p: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        arch.insert_pair(&p, t, 1).unwrap();
    }
    let snap = state.snapshot();
    for _ in 0..100 {
        let c = sample_candidate(&snap, &mut rng);
        let again = candidate_from(&snap, c.z.clone()).unwrap();
        assert_eq!(c.x, again.x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn full_set_accepts_only_strict_improvements(
        pool in 1usize..8,
        fits in prop::collection::vec(0.0f64..10.0, 1..40),
        probe in 0.0f64..10.0,
    ) {
        let mut params = default_params(3).unwrap();
        params.ss_pool = pool;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut state = StrategyState::new(&params, vec![0.0; 3]).unwrap();
        for f in fits {
            steady_state_accept(&mut state, &params, candidate(3, f, &mut rng)).unwrap();
        }
        let before = state.best_set.clone();
        let accepted = steady_state_accept(&mut state, &params, candidate(3, probe, &mut rng)).unwrap();
        let expect = before.len() < pool || probe < before.last().unwrap().fitness;
        prop_assert_eq!(accepted, expect);
        if !accepted {
            prop_assert_eq!(&state.best_set, &before);
        }
        prop_assert!(state.best_set.windows(2).all(|w| w[0].fitness <= w[1].fitness));
    }

    #[test]
    fn sigma_rule_is_exact_exponential(sigma in 1e-10f64..1e3, acc: bool, d in 0.5f64..50.0) {
        let got = sigma_one_fifth(sigma, acc, 0.2, d);
        let want = sigma * ((if acc { 0.8 } else { -0.2 }) / d).exp();
        prop_assert!((got - want).abs() <= 1e-14 * want);
    }
}
