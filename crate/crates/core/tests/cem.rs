use std::sync::Mutex;

use karel_core::decoder::{Decoder, PrimitiveDecoder};
use karel_core::golden::GOLDEN;
use karel_core::vocab::{self, decode_program, encode_tokens, EOS_ID};
use karel_core::{best_sampled, cem_search, Action, CemConfig, InitDist, Program};
use proptest::prelude::*;

fn sphere(target: f64) -> impl Fn(&[f64]) -> f64 + Sync {
    move |z: &[f64]| -z.iter().map(|x| (x - target).powi(2)).sum::<f64>()
}

#[test]
fn full_elite_fraction_averages_the_population() {
    let seen = Mutex::new(Vec::new());
    let cfg = CemConfig { population: 16, elite_frac: 1.0, iterations: 1, ..CemConfig::default() };
    let r = cem_search(
        |z: &[f64]| {
            seen.lock().unwrap().push(z.to_vec());
            z[0]
        },
        3,
        &cfg,
        4,
    )
    .unwrap();
    let seen = seen.into_inner().unwrap();
    assert_eq!(seen.len(), 16);
    for d in 0..3 {
        let avg = seen.iter().map(|z| z[d]).sum::<f64>() / 16.0;
        assert!((r.mean[d] - avg).abs() < 1e-12);
    }
}

#[test]
fn ones_init_starts_at_one() {
    let cfg = CemConfig { population: 4, elite_frac: 1.0, iterations: 1, sigma: 1e-9, init: InitDist::Ones, ..CemConfig::default() };
    let r = cem_search(sphere(0.0), 5, &cfg, 0).unwrap();
    assert!(r.mean.iter().all(|m| (m - 1.0).abs() < 1e-6));
}

#[test]
fn decay_shrinks_sigma_to_floor() {
    let cfg = CemConfig { exp_decay: true, decay_rate: 0.5, sigma_floor: 0.05, iterations: 10, ..CemConfig::default() };
    let r = cem_search(sphere(0.0), 2, &cfg, 1).unwrap();
    assert_eq!(r.history[0].sigma, 0.5);
    assert!((r.history[1].sigma - 0.25).abs() < 1e-15);
    assert_eq!(r.history.last().unwrap().sigma, 0.05);
}

#[test]
fn more_random_samples_never_hurt() {
    let one = best_sampled(sphere(0.3), 8, 1, 2).unwrap();
    let many = best_sampled(sphere(0.3), 8, 1000, 2).unwrap();
    assert!(many.best_value >= one.best_value);
    assert_eq!(many.evaluations, 1000);
}

#[test]
fn vocabulary_round_trips_every_golden_program() {
    for g in GOLDEN {
        for p in g.programs().unwrap() {
            let mut ids = encode_tokens(&p);
            assert!(ids.iter().all(|&i| (i as usize) < vocab::size()));
            ids.push(EOS_ID);
            ids.push(0);
            assert_eq!(decode_program(&ids).unwrap(), p);
        }
    }
}

#[test]
fn vocabulary_file_is_versioned() {
    let f = vocab::vocab_file();
    let json = serde_json::to_string(&f).unwrap();
    assert_eq!(vocab::load(&json).unwrap(), f);
    let bumped = json.replace(&format!("\"version\":{}", f.version), "\"version\":99");
    assert!(vocab::load(&bumped).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn best_ever_never_decreases(seed in any::<u64>(), dim in 1usize..12, decay in any::<bool>()) {
        let cfg = CemConfig { iterations: 30, exp_decay: decay, ..CemConfig::default() };
        let r = cem_search(sphere(1.5), dim, &cfg, seed).unwrap();
        for w in r.history.windows(2) {
            prop_assert!(w[1].best_ever >= w[0].best_ever);
        }
        prop_assert_eq!(r.best_value, r.history.last().unwrap().best_ever);
        prop_assert_eq!(r.best_value, sphere(1.5)(&r.best));
    }

    #[test]
    fn increasing_affine_rescaling_leaves_search_unchanged(seed in any::<u64>(), a in 1u32..9, b in -50i32..50) {
        // Integer-valued objective so rescaling is exact.
        let f = |z: &[f64]| -(z.iter().map(|x| (x - 0.7).powi(2)).sum::<f64>() * 100.0).round();
        let g = |z: &[f64]| a as f64 * f(z) + b as f64;
        let cfg = CemConfig { iterations: 20, ..CemConfig::default() };
        let rf = cem_search(f, 6, &cfg, seed).unwrap();
        let rg = cem_search(g, 6, &cfg, seed).unwrap();
        prop_assert_eq!(rf.mean, rg.mean);
        prop_assert_eq!(rf.best, rg.best);
    }

    #[test]
    fn identity_decoder_round_trips_straight_lines(idx in proptest::collection::vec(0usize..5, 0..12)) {
        let p = Program::from_actions(idx.iter().map(|&i| Action::ALL[i]));
        let d = PrimitiveDecoder::new(12);
        let z = d.encode(&p).unwrap();
        prop_assert_eq!(z.len(), d.dim());
        prop_assert_eq!(d.decode(&z).unwrap(), p);
    }
}
