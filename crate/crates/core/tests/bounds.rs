use std::f64::consts::{E, PI};

use mimo_bounds::bounds::*;
use mimo_bounds::scalar::db_to_amplitude;
use mimo_bounds::{build_decomposition, presets, Decomposition, Error};

fn decomp(h: nalgebra::DMatrix<f64>) -> Decomposition {
    build_decomposition(&presets::model(h, 1.0, 1.0).unwrap()).unwrap()
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn trunc_exp_density(mu: f64) -> impl Fn(f64) -> f64 {
    move |u| mu * (-mu * u).exp() / (1.0 - (-mu).exp())
}

#[test]
fn truncated_exponential_entropy_by_quadrature() {
    for mu in [1e-3, 0.1, 1.0, 3.0, 12.0, 40.0] {
        let f = trunc_exp_density(mu);
        let h = simpson(|u| -f(u) * f(u).ln(), 0.0, 1.0, 20_000);
        assert!((trunc_exp_entropy(mu) - h).abs() < 1e-9, "mu {mu}: {} vs {h}", trunc_exp_entropy(mu));
    }
    assert!(trunc_exp_entropy(0.0).abs() < 1e-15);
}

#[test]
fn solve_mu_inverts_the_truncated_mean() {
    for mu in [1e-4, 0.05, 0.7, 2.0, 9.0, 60.0] {
        let f = trunc_exp_density(mu);
        let mean = simpson(|u| u * f(u), 0.0, 1.0, 20_000);
        let got = solve_mu(mean).unwrap();
        assert!((got - mu).abs() < 1e-6 * mu.max(1.0), "{got} vs {mu}");
    }
    assert!(matches!(solve_mu(0.5), Err(Error::OutOfRange { .. })));
    assert!(solve_mu(0.0).is_err());
}

#[test]
fn kl_projection_against_a_line_search() {
    let q = SimplexWeights::new(vec![0.2, 0.5, 0.3]).unwrap();
    let s = [0.0, 1.0, 2.0];
    for target in [0.3, 0.9, 1.1, 1.7] {
        let (p, d) = kl_project(&q, &s, target).unwrap();
        assert!((p.mean(&s) - target).abs() < 1e-10);
        assert!((p.divergence(&q) - d).abs() < 1e-12);
        // The feasible set is a segment parametrized by p_1.
        let mut best = f64::INFINITY;
        let n = 200_000;
        for i in 1..n {
            let p1 = i as f64 / n as f64;
            let p2 = (target - p1) / 2.0;
            let p0 = 1.0 - p1 - p2;
            if p0 < 0.0 || p2 < 0.0 {
                continue;
            }
            let w = [p0, p1, p2];
            let kl: f64 = w
                .iter()
                .zip(q.as_slice())
                .filter(|(p, _)| **p > 0.0)
                .map(|(p, q)| p * (p / q).ln())
                .sum();
            best = best.min(kl);
        }
        assert!(d <= best + 1e-12 && d > best - 1e-6, "target {target}: {d} vs {best}");
    }
    assert!(matches!(kl_project(&q, &s, 2.5), Err(Error::Unreachable { .. })));
    let (edge, d) = kl_project(&q, &s, 2.0).unwrap();
    assert!((edge.as_slice()[2] - 1.0).abs() < 1e-12);
    assert!((d - (1.0f64 / 0.3).ln()).abs() < 1e-9);
}

#[test]
fn threshold_ratios_of_the_figure_channels() {
    assert!((decomp(presets::bounds_2x3()).alpha_th() - 1.4762).abs() < 5e-4);
    assert!((decomp(presets::bounds_2x4()).alpha_th() - 1.947).abs() < 5e-4);
}

#[test]
fn peak_bound_matches_a_brute_force_supremum() {
    let d = decomp(presets::bounds_2x3()).with_amplitude(3.0).unwrap();
    assert_eq!(d.cells().len(), 3);
    let q = d.q();
    let shift = 3.0 / (2.0 * PI * E).sqrt();
    let c: Vec<f64> = d
        .cells()
        .iter()
        .map(|cell| cell.sigma.iter().map(|s| (s + shift).ln()).sum())
        .collect();
    let n = 1000;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=n {
        for j in 0..=n - i {
            let p = [i as f64 / n as f64, j as f64 / n as f64, (n - i - j) as f64 / n as f64];
            let kl: f64 = p.iter().zip(&q).filter(|(p, _)| **p > 0.0).map(|(p, q)| p * (p / q).ln()).sum();
            let lin: f64 = p.iter().zip(&c).map(|(p, c)| p * c).sum();
            best = best.max(d.v_h().ln() - kl + lin);
        }
    }
    let ub = upper_bound_peak(&d);
    assert!(ub >= best - 1e-12 && ub - best < 1e-5, "{ub} vs {best}");
}

#[test]
fn nu_maximizes_its_objective() {
    let d = decomp(presets::bounds_2x3());
    for alpha in [0.3, 0.9, 1.3] {
        let (lo, hi) = nu_interval(&d, alpha).unwrap();
        let n = 20_000;
        let scan = (0..=n)
            .map(|i| nu_objective(&d, alpha, lo + (hi - lo) * i as f64 / n as f64))
            .fold(f64::NEG_INFINITY, f64::max);
        let v = nu(&d, alpha).unwrap();
        assert!(v >= scan - 1e-10 && v <= scan + 1e-6, "alpha {alpha}: {v} vs {scan}");
    }
}

#[test]
fn nu_is_negative_increasing_and_vanishes_at_the_threshold() {
    let d = decomp(presets::tiling_a());
    let th = d.alpha_th();
    let mut prev = f64::NEG_INFINITY;
    let mut alpha = 0.05;
    while alpha < th - 0.01 {
        let v = nu(&d, alpha).unwrap();
        assert!(v < 0.0);
        assert!(v >= prev - 1e-9);
        prev = v;
        alpha += 0.05;
    }
    assert!(nu(&d, th - 1e-4).unwrap() > -1e-3);
    assert!(matches!(nu(&d, th + 0.1), Err(Error::EmptyInterval { .. })));
}

#[test]
fn bounds_are_ordered_and_monotone_in_alpha() {
    for (h, alphas) in [
        (presets::bounds_2x3(), [0.3, 0.6, 0.9, 1.2]),
        (presets::bounds_2x4(), [0.4, 0.6, 1.2, 1.8]),
    ] {
        let d = decomp(h);
        for db in [-20.0, -5.0, 0.0, 5.0, 15.0, 30.0] {
            let mut prev: Option<BoundReport> = None;
            for alpha in alphas {
                let r = bounds_at(&d, alpha, db).unwrap();
                let lo = r.best_lower();
                let hi = r.best_upper();
                assert!(lo <= hi + 1e-6, "alpha {alpha} at {db} dB: {lo} > {hi}");
                let ub_mu = r.ub_mu.unwrap();
                assert!(ub_mu <= r.ub_peak + 1e-9, "{alpha} {db}: {ub_mu} vs {}", r.ub_peak);
                if let Some(p) = prev {
                    assert!(r.lb_exp.unwrap() >= p.lb_exp.unwrap() - 1e-9);
                    assert!(ub_mu >= p.ub_mu.unwrap() - 1e-7);
                    assert!(r.ub_trace >= p.ub_trace - 1e-12);
                }
                prev = Some(r);
            }
        }
    }
}

#[test]
fn above_threshold_only_the_uniform_bound_applies() {
    let d = decomp(presets::bounds_2x3());
    let r = bounds_at(&d, 2.0, 10.0).unwrap();
    assert!(r.lb_uniform.is_some());
    assert!(r.lb_exp.is_none() && r.ub_mu.is_none() && r.ub_mu_delta.is_none() && r.nu.is_none());
    assert!(r.lb_uniform.unwrap() <= r.ub_peak);
    // Beyond n_T / 2 the average constraint is inactive.
    let big = bounds_at(&d, 5.0, 10.0).unwrap();
    assert_eq!(big.alpha_used, 1.5);
    assert_eq!(big.ub_peak, r.ub_peak);
}

#[test]
fn high_snr_gap_closes() {
    let d = decomp(presets::bounds_2x3());
    let at25 = bounds_at(&d, 0.9, 25.0).unwrap();
    assert!(at25.ub_mu.unwrap() - at25.lb_exp.unwrap() < 0.1);
    for (h, alpha) in [(presets::bounds_2x3(), 0.9), (presets::bounds_2x4(), 2.0)] {
        let d = decomp(h);
        let r = bounds_at(&d, alpha, 80.0).unwrap();
        let asym = high_snr_asymptote(&d, alpha).unwrap();
        let lower = r.lb_exp.or(r.lb_uniform).unwrap();
        let n_log_a = 2.0 * db_to_amplitude(80.0).ln();
        assert!((lower - n_log_a - asym).abs() < 1e-6);
        assert!((r.ub_peak - n_log_a - asym).abs() < 1e-3 || alpha < d.alpha_th());
    }
}

#[test]
fn low_snr_slope_of_the_trace_bound() {
    for (h, alpha) in [(presets::bounds_2x3(), 0.9), (presets::bounds_2x4(), 0.6)] {
        let m = presets::model(h, db_to_amplitude(-40.0), alpha).unwrap();
        let slope = low_snr_slope(&m).unwrap();
        let a2 = m.amplitude().powi(2);
        let ratio = upper_bound_trace(&m).unwrap() / a2 / slope;
        assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
    }
}
