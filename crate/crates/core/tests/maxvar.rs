mod common;

use mimo_bounds::bounds::unit_max_trace;
use mimo_bounds::maxvar::{brute_force_max_trace, chain_optimal, check_r_rank, max_trace, trace_cov, DiscreteInput};
use mimo_bounds::{presets, validate_channel, Error};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn chain_search_matches_all_points_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..20 {
        let (model, _) = common::random_channel_in(&mut rng, 2, 3, 0.0, 0.0, 3.0);
        for alpha in [0.2, 0.7, 1.1, 1.5] {
            let m = model.with_alpha(alpha).unwrap();
            let chain = max_trace(&m).unwrap();
            let all = brute_force_max_trace(&m).unwrap();
            assert!(
                (chain.value - all).abs() <= 1e-6 * all.max(1e-9),
                "trial {trial} alpha {alpha}: {} vs {all}",
                chain.value
            );
        }
    }
}

#[test]
fn trace_bound_covers_channels_with_opposing_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut opposing = 0;
    for _ in 0..20 {
        let (model, _) = common::random_channel(&mut rng, 2, 3, 0.0);
        for alpha in [0.2, 0.7, 1.1] {
            let m = model.with_alpha(alpha).unwrap();
            let all = brute_force_max_trace(&m).unwrap();
            let t = unit_max_trace(&m).unwrap();
            assert!(t >= all * (1.0 - 1e-6), "{t} vs {all}");
            assert!(max_trace(&m).unwrap().value <= all * (1.0 + 1e-6));
        }
        opposing += usize::from(!chain_optimal(model.h()));
    }
    assert!(opposing > 0);
}

#[test]
fn published_rows_against_all_points_optimum() {
    for (h, alpha) in [
        (presets::maxvar_2x4(), 1.5),
        (presets::maxvar_2x4(), 0.9),
        (presets::maxvar_2x4(), 0.6),
        (presets::maxvar_2x4(), 0.3),
        (presets::maxvar_3x4(), 0.9),
        (presets::maxvar_3x4(), 0.75),
        (presets::maxvar_3x4(), 0.6),
    ] {
        let m = presets::model(h, 1.0, alpha).unwrap();
        let chain = max_trace(&m).unwrap();
        let all = brute_force_max_trace(&m).unwrap();
        assert!((chain.value - all).abs() <= 1e-7 * all, "alpha {alpha}: {} vs {all}", chain.value);
    }
}

#[test]
fn returned_input_is_feasible_and_attains_the_value() {
    for amp in [0.5, 1.0, 4.0] {
        let m = presets::model(presets::maxvar_3x4(), amp, 0.75).unwrap();
        let sol = max_trace(&m).unwrap();
        assert!(sol.input.average_power() <= 0.75 * amp * (1.0 + 1e-9));
        let t = trace_cov(&m, &sol.input);
        assert!((t - sol.value * amp * amp).abs() < 1e-9 * t);
        assert!(sol.input.points.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| a <= b)));
        assert!(sol.support_bound_ok);
    }
}

#[test]
fn random_feasible_inputs_never_beat_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let m = presets::model(presets::maxvar_2x4(), 1.0, 0.6).unwrap();
    let best = max_trace(&m).unwrap().value;
    let pts: Vec<Vec<f64>> = (0..16)
        .map(|mask| (0..4).map(|k| (mask >> k & 1) as f64).collect())
        .collect();
    for _ in 0..5000 {
        let mut w: Vec<f64> = (0..16).map(|_| rng.random::<f64>().powi(4)).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        let input = DiscreteInput::new(pts.clone(), w).unwrap();
        let power = input.average_power();
        // Shrink towards the origin until the budget holds.
        let input = if power > 0.6 {
            let c = 0.6 / power;
            let mut probs: Vec<f64> = input.probs.iter().map(|p| p * c).collect();
            probs[0] += 1.0 - c;
            DiscreteInput::new(pts.clone(), probs).unwrap()
        } else {
            input
        };
        assert!(trace_cov(&m, &input) <= best + 1e-12);
    }
}

#[test]
fn reflected_optimum_is_optimal_for_the_mirrored_budget() {
    let m = presets::model(presets::maxvar_2x4(), 1.0, 1.5).unwrap();
    let sol = max_trace(&m).unwrap();
    let r = sol.input.reflect(1.0);
    assert!((trace_cov(&m, &r) - trace_cov(&m, &sol.input)).abs() < 1e-12);
    assert!((r.average_power() - (4.0 - sol.input.average_power())).abs() < 1e-12);
}

#[test]
fn larger_arrays_use_the_heuristic() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (model, _) = common::random_channel_in(&mut rng, 2, 9, 0.0, 0.0, 3.0);
    let m = model.with_alpha(2.0).unwrap();
    let sol = max_trace(&m).unwrap();
    assert!(!sol.exhaustive);
    let all = brute_force_max_trace(&m).unwrap();
    assert!(sol.value <= all * (1.0 + 1e-9));
    assert!(sol.value >= 0.95 * all);
}

#[test]
fn guards() {
    let h = DMatrix::from_fn(2, 13, |i, j| 1.0 + (i * 13 + j) as f64 * 0.1 + (j * j) as f64 * 0.01);
    let m = validate_channel(&h, 1.0, 1.0).unwrap();
    assert!(matches!(max_trace(&m), Err(Error::TooLarge(_))));
    let sq = validate_channel(&DMatrix::identity(2, 2), 1.0, 1.0).unwrap();
    assert!(max_trace(&sq).is_err());
    assert!(check_r_rank(&presets::model(presets::maxvar_3x4(), 1.0, 1.0).unwrap()).unwrap().exhaustive);
}
