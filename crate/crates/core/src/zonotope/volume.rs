//! Hit-or-miss Monte Carlo volume of the image zonotope.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::lp::box_lp_feasible;
use crate::channel::ChannelModel;
use crate::error::{Error, Result};

const CHUNK: usize = 16_384;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VolumeEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub hits: usize,
}

/// Samples the axis-aligned bounding box of `R(H)` and tests membership by
/// LP feasibility.
pub fn zonotope_volume_mc(model: &ChannelModel, n_samples: usize, seed: u64) -> Result<VolumeEstimate> {
    if n_samples < 10_000 {
        return Err(Error::InvalidArgument(format!(
            "volume estimation needs at least 10000 samples, got {n_samples}"
        )));
    }
    let h = model.h();
    let amp = model.amplitude();
    let n_r = model.n_r();
    let lo: Vec<f64> = h
        .row_iter()
        .map(|r| amp * r.iter().map(|v| v.min(0.0)).sum::<f64>())
        .collect();
    let hi: Vec<f64> = h
        .row_iter()
        .map(|r| amp * r.iter().map(|v| v.max(0.0)).sum::<f64>())
        .collect();
    let box_vol: f64 = lo.iter().zip(&hi).map(|(l, u)| u - l).product();

    let n_chunks = n_samples.div_ceil(CHUNK);
    let hits: usize = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(n_samples - c * CHUNK);
            let mut p = DVector::zeros(n_r);
            (0..count)
                .filter(|_| {
                    for i in 0..n_r {
                        p[i] = lo[i] + (hi[i] - lo[i]) * rng.random::<f64>();
                    }
                    box_lp_feasible(h, &p, amp)
                })
                .count()
        })
        .sum();

    let frac = hits as f64 / n_samples as f64;
    Ok(VolumeEstimate {
        estimate: box_vol * frac,
        std_error: box_vol * (frac * (1.0 - frac) / n_samples as f64).sqrt(),
        n_samples,
        hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use nalgebra::DMatrix;

    #[test]
    fn unit_zonotope_volume() {
        let h = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]);
        let m = presets::model(h, 1.0, 0.9).unwrap();
        let v = zonotope_volume_mc(&m, 40_000, 7).unwrap();
        assert!((v.estimate - 3.0).abs() < 3.0 * v.std_error + 1e-12);
    }

    #[test]
    fn sample_guard_and_determinism() {
        let m = presets::model(presets::tiling_a(), 1.0, 0.9).unwrap();
        assert!(zonotope_volume_mc(&m, 0, 1).is_err());
        let a = zonotope_volume_mc(&m, 20_000, 5).unwrap();
        let b = zonotope_volume_mc(&m, 20_000, 5).unwrap();
        assert_eq!(a.hits, b.hits);
    }
}
