mod common;

use mimo_bounds::presets;
use mimo_bounds::zonotope::{lp_oracle_min_energy, zonotope_volume_mc};
use mimo_bounds::{build_decomposition, Error};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn min_energy_agrees_with_lp_on_random_channels() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..60 {
        let n_r = 2 + trial % 2;
        let n_t = n_r + 1 + trial % (6 - n_r);
        let (model, decomp) = common::random_channel(&mut rng, n_r, n_t, 1e-6);
        for _ in 0..5 {
            let x = common::random_box_point(&mut rng, n_t, 1.0);
            let xbar = model.h() * &x;
            let r = decomp.min_energy_input(&xbar).unwrap();
            let (_, lp) = lp_oracle_min_energy(&model, &xbar).unwrap();
            assert!((r.energy - lp).abs() <= 1e-7 * (1.0 + lp), "trial {trial}: {} vs {lp}", r.energy);
            let back = model.h() * DVector::from_column_slice(&r.x_min);
            assert!((back - &xbar).amax() <= 1e-9);
            assert!(r.energy <= x.sum() + 1e-9);
        }
    }
}

#[test]
fn box_points_fall_in_exactly_one_cell() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, h) in presets::tiling_channels() {
        let model = presets::model(h, 1.0, 1.0).unwrap();
        let decomp = build_decomposition(&model).unwrap();
        for _ in 0..2000 {
            let x = common::random_box_point(&mut rng, model.n_t(), 1.0);
            let cells = decomp.containing_cells(&(model.h() * x));
            assert_eq!(cells.len(), 1, "{name}: {cells:?}");
        }
    }
}

#[test]
fn cell_volumes_add_up_to_the_hull_area() {
    for (name, h) in presets::tiling_channels() {
        for amp in [0.5, 1.0, 3.0] {
            let model = presets::model(h.clone(), amp, 1.0).unwrap();
            let decomp = build_decomposition(&model).unwrap();
            let area = common::hull_area(&h, amp);
            assert!((decomp.volume() - area).abs() < 1e-9 * area, "{name}: {} vs {area}", decomp.volume());
        }
    }
}

#[test]
fn monte_carlo_volume_brackets_the_exact_volume() {
    let model = presets::model(presets::bounds_2x3(), 1.0, 1.0).unwrap();
    let decomp = build_decomposition(&model).unwrap();
    let est = zonotope_volume_mc(&model, 50_000, 2).unwrap();
    assert!((est.estimate - decomp.volume()).abs() < 4.0 * est.std_error);
    assert!(matches!(zonotope_volume_mc(&model, 0, 2), Err(Error::InvalidArgument(_))));
}

#[test]
fn uniform_output_costs_alpha_th_on_average() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for h in [presets::bounds_2x3(), presets::bounds_2x4(), presets::maxvar_3x4()] {
        let amp = 2.0;
        let decomp = build_decomposition(&presets::model(h, amp, 1.0).unwrap()).unwrap();
        let n = 40_000;
        let costs: Vec<f64> = (0..n)
            .map(|_| {
                let (_, _, xbar) = decomp.sample_uniform(&mut rng);
                decomp.cost(&xbar).unwrap()
            })
            .collect();
        let mean = costs.iter().sum::<f64>() / n as f64;
        let var = costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - decomp.alpha_th() * amp).abs() < 4.0 * se, "{mean} vs {}", decomp.alpha_th() * amp);
    }
}

#[test]
fn points_outside_the_zonotope_are_rejected() {
    let decomp = build_decomposition(&presets::model(presets::bounds_2x3(), 1.0, 1.0).unwrap()).unwrap();
    let far = DVector::from_vec(vec![100.0, 100.0]);
    assert!(matches!(decomp.min_energy_input(&far), Err(Error::OutsideZonotope)));
    assert!(decomp.min_energy_input(&DVector::from_vec(vec![1.0])).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn min_energy_input_is_feasible_and_minimal(
        seed in 0u64..1_000_000,
        amp in 0.1f64..10.0,
        u in prop::collection::vec(0.0f64..1.0, 4),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (model, _) = common::random_channel(&mut rng, 2, 4, 1e-6);
        let model = model.with_amplitude(amp).unwrap();
        let decomp = build_decomposition(&model).unwrap();
        let x = DVector::from_iterator(4, u.iter().map(|v| v * amp));
        let xbar = model.h() * &x;
        let r = decomp.min_energy_input(&xbar).unwrap();
        let slack = 1e-9 * amp.max(1.0);
        prop_assert!(r.x_min.iter().all(|&v| v >= -slack && v <= amp + slack));
        let back = model.h() * DVector::from_column_slice(&r.x_min);
        prop_assert!((back - &xbar).amax() <= 1e-8 * amp.max(1.0));
        prop_assert!(r.energy <= x.sum() + 1e-9 * amp);
        let cell = &decomp.cells()[r.cell_index];
        let outside: f64 = cell.complement().map(|j| r.x_min[j]).sum();
        prop_assert!((outside - amp * cell.s as f64).abs() < 1e-12 * amp.max(1.0));
    }
}
