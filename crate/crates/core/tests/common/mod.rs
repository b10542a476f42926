#![allow(dead_code)]

use mimo_bounds::{build_decomposition, validate_channel, ChannelModel, Decomposition};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// A canonical channel whose tiling has no tie within `tie_margin`.
pub fn random_channel<R: Rng>(rng: &mut R, n_r: usize, n_t: usize, tie_margin: f64) -> (ChannelModel, Decomposition) {
    random_channel_in(rng, n_r, n_t, tie_margin, -0.5, 3.0)
}

/// Same with entries drawn uniformly from `[lo, hi)`.
pub fn random_channel_in<R: Rng>(
    rng: &mut R,
    n_r: usize,
    n_t: usize,
    tie_margin: f64,
    lo: f64,
    hi: f64,
) -> (ChannelModel, Decomposition) {
    loop {
        let h = DMatrix::from_fn(n_r, n_t, |_, _| rng.random_range(lo..hi));
        let Ok(model) = validate_channel(&h, 1.0, 1.0) else { continue };
        if !model.is_canonical() {
            continue;
        }
        let Ok(decomp) = build_decomposition(&model) else { continue };
        let clear = decomp
            .cells()
            .iter()
            .all(|c| c.a.values().all(|a| (a - 1.0).abs() > tie_margin));
        if clear && !decomp.used_tie_break() {
            return (model, decomp);
        }
    }
}

pub fn random_box_point<R: Rng>(rng: &mut R, n: usize, amplitude: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| amplitude * rng.random::<f64>())
}

/// Area of the planar zonotope from the convex hull of all `2^n_T` corner
/// images.
pub fn hull_area(h: &DMatrix<f64>, amplitude: f64) -> f64 {
    assert_eq!(h.nrows(), 2);
    let n_t = h.ncols();
    let mut pts: Vec<(f64, f64)> = (0..1usize << n_t)
        .map(|mask| {
            let mut p = (0.0, 0.0);
            for k in 0..n_t {
                if mask >> k & 1 == 1 {
                    p.0 += amplitude * h[(0, k)];
                    p.1 += amplitude * h[(1, k)];
                }
            }
            p
        })
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let n = hull.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
        .abs()
}
