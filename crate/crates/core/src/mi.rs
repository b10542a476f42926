//! Mutual information of discrete inputs over the Gaussian channel and the
//! numerical k-point lower bounds.
//!
//! For a mixture `Y = xbar_K + Z` the output entropy splits into the exact
//! noise part and a term that only involves `LSE_j(log p_j - z.d_kj -
//! |d_kj|^2 / 2)` with `d_kj = xbar_k - xbar_j`. Averaging that term over
//! the component index exactly (instead of sampling it) and over a fixed
//! set of noise draws gives a low-variance estimator whose first-order
//! term in `z` vanishes, which matters at low SNR where the information is
//! tiny.

use argmin::core::{CostFunction, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maxvar::DiscreteInput;
use crate::scalar::log_sum_exp;
use crate::zonotope::Decomposition;

pub const MIN_SAMPLES: usize = 10_000;
pub const SEARCH_SAMPLES: usize = 200_000;
pub const FINAL_SAMPLES: usize = 2_000_000;
const CHUNK: usize = 8192;
const PROB_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MIEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

/// A fixed set of standard normal draws, reused across evaluations so
/// that nearby inputs see the same noise.
#[derive(Debug, Clone)]
pub struct NoiseSamples {
    n_r: usize,
    n: usize,
    seed: u64,
    z: Vec<f64>,
}

impl NoiseSamples {
    pub fn new(n_r: usize, n_samples: usize, seed: u64) -> Result<NoiseSamples> {
        if n_samples < MIN_SAMPLES {
            return Err(Error::InvalidArgument(format!(
                "at least {MIN_SAMPLES} samples are needed, got {n_samples}"
            )));
        }
        if n_r == 0 {
            return Err(Error::InvalidArgument("zero output dimension".into()));
        }
        let n_chunks = n_samples.div_ceil(CHUNK);
        let z: Vec<f64> = (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                let count = CHUNK.min(n_samples - c * CHUNK) * n_r;
                (0..count)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect::<Vec<_>>()
            })
            .flatten()
            .collect();
        Ok(NoiseSamples {
            n_r,
            n: n_samples,
            seed,
            z,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `I(Xbar; Xbar + Z)` in nats for a finitely supported `Xbar`.
    pub fn estimate(&self, points: &[DVector<f64>], probs: &[f64]) -> Result<MIEstimate> {
        let (points, probs) = prune(points, probs, self.n_r)?;
        let k = points.len();
        let n_r = self.n_r;
        // Per component k: offsets c_kj and directions d_kj.
        let comps: Vec<(Vec<f64>, Vec<f64>)> = (0..k)
            .map(|a| {
                let mut c = Vec::with_capacity(k);
                let mut d = Vec::with_capacity(k * n_r);
                for b in 0..k {
                    let diff = &points[a] - &points[b];
                    c.push(probs[b].ln() - 0.5 * diff.norm_squared());
                    d.extend(diff.iter());
                }
                (c, d)
            })
            .collect();
        let sample = |z: &[f64], buf: &mut Vec<f64>| -> f64 {
            let mut g = 0.0;
            for (a, (c, d)) in comps.iter().enumerate() {
                buf.clear();
                for b in 0..k {
                    let dz: f64 = (0..n_r).map(|i| z[i] * d[b * n_r + i]).sum();
                    buf.push(c[b] - dz);
                }
                g -= probs[a] * log_sum_exp(buf.iter().copied());
            }
            g
        };
        let shift = sample(&vec![0.0; n_r], &mut Vec::new());
        let n_chunks = self.n.div_ceil(CHUNK);
        let parts: Vec<(f64, f64)> = (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(self.n);
                let mut buf = Vec::with_capacity(k);
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in lo..hi {
                    let v = sample(&self.z[i * n_r..(i + 1) * n_r], &mut buf) - shift;
                    s += v;
                    s2 += v * v;
                }
                (s, s2)
            })
            .collect();
        let (s, s2) = parts
            .iter()
            .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
        let n = self.n as f64;
        let mean = s / n;
        let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
        Ok(MIEstimate {
            value: shift + mean,
            std_error: (var / n).sqrt(),
            n_samples: self.n,
            seed: self.seed,
        })
    }
}

fn prune(points: &[DVector<f64>], probs: &[f64], n_r: usize) -> Result<(Vec<DVector<f64>>, Vec<f64>)> {
    if points.is_empty() || points.len() != probs.len() {
        return Err(Error::InvalidArgument(
            "points and probabilities must be nonempty and of equal length".into(),
        ));
    }
    if points.iter().any(|p| p.len() != n_r) {
        return Err(Error::InvalidArgument(format!(
            "points must have dimension {n_r}"
        )));
    }
    if probs.iter().any(|&p| !(p >= 0.0)) {
        return Err(Error::InvalidArgument("negative probability".into()));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "probabilities sum to {total}"
        )));
    }
    let kept: Vec<usize> = (0..probs.len()).filter(|&i| probs[i] >= PROB_FLOOR).collect();
    let mass: f64 = kept.iter().map(|&i| probs[i]).sum();
    Ok((
        kept.iter().map(|&i| points[i].clone()).collect(),
        kept.iter().map(|&i| probs[i] / mass).collect(),
    ))
}

/// One-shot estimate with fresh noise draws.
pub fn mi_discrete_gaussian(
    points: &[DVector<f64>],
    probs: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<MIEstimate> {
    let n_r = points.first().map(|p| p.len()).unwrap_or(0);
    NoiseSamples::new(n_r, n_samples, seed)?.estimate(points, probs)
}

/// Search settings for [`k_point_lower_bound`].
#[derive(Debug, Clone, Serialize)]
pub struct KPointBudget {
    pub search_samples: usize,
    pub final_samples: usize,
    pub starts: usize,
    /// Nelder-Mead iterations per start.
    pub max_iters: u64,
}

impl Default for KPointBudget {
    fn default() -> Self {
        KPointBudget {
            search_samples: SEARCH_SAMPLES,
            final_samples: FINAL_SAMPLES,
            starts: 8,
            max_iters: 400,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KPointResult {
    /// Estimate on fresh noise draws for the selected input.
    pub estimate: MIEstimate,
    /// Selected input, with every point replaced by its minimum-energy
    /// preimage.
    pub input: DiscreteInput,
    /// Images `H x` of the selected points.
    pub images: Vec<Vec<f64>>,
    /// Objective value on the search noise.
    pub search_value: f64,
    /// The winning start stopped on its iteration cap.
    pub budget_exhausted: bool,
}

struct Candidate {
    points: Vec<Vec<f64>>,
    images: Vec<DVector<f64>>,
    probs: Vec<f64>,
}

#[derive(Clone)]
struct KPointProblem<'a> {
    decomp: &'a Decomposition,
    k: usize,
    budget: f64,
    noise: &'a NoiseSamples,
    scale: f64,
}

impl KPointProblem<'_> {
    fn decode(&self, theta: &[f64]) -> Result<Candidate> {
        let amp = self.decomp.amplitude();
        let n_t = self.decomp.n_t();
        let h = self.decomp.model().h();
        let mut points = vec![vec![0.0; n_t]];
        let mut images = vec![DVector::zeros(self.decomp.n_r())];
        let mut energies = vec![0.0];
        for j in 0..self.k - 1 {
            let x = DVector::from_iterator(
                n_t,
                theta[j * n_t..(j + 1) * n_t]
                    .iter()
                    .map(|u| amp * u.clamp(0.0, 1.0)),
            );
            let r = self.decomp.min_energy_input(&(h * x))?;
            let xm = DVector::from_column_slice(&r.x_min);
            images.push(h * &xm);
            energies.push(r.energy);
            points.push(r.x_min);
        }
        let logits_at = (self.k - 1) * n_t;
        let mut logits = vec![0.0];
        logits.extend_from_slice(&theta[logits_at..logits_at + self.k - 1]);
        let lz = log_sum_exp(logits.iter().copied());
        let mut probs: Vec<f64> = logits.iter().map(|l| (l - lz).exp()).collect();
        let power: f64 = probs.iter().zip(&energies).map(|(p, e)| p * e).sum();
        if power > self.budget {
            let c = self.budget / power;
            for p in probs.iter_mut().skip(1) {
                *p *= c;
            }
            probs[0] = 1.0 - probs[1..].iter().sum::<f64>();
        }
        Ok(Candidate {
            points,
            images,
            probs,
        })
    }

    fn encode(&self, input: &DiscreteInput) -> Option<Vec<f64>> {
        let amp = self.decomp.amplitude();
        let n_t = self.decomp.n_t();
        let p0 = input
            .points
            .iter()
            .zip(&input.probs)
            .find(|(x, _)| x.iter().all(|&v| v == 0.0))
            .map(|(_, &p)| p)?;
        let rest: Vec<(&Vec<f64>, f64)> = input
            .points
            .iter()
            .zip(&input.probs)
            .filter(|(x, _)| x.iter().any(|&v| v != 0.0))
            .map(|(x, &p)| (x, p))
            .collect();
        if rest.len() > self.k - 1 || p0 <= 0.0 {
            return None;
        }
        let mut u = Vec::new();
        let mut logits = Vec::new();
        for j in 0..self.k - 1 {
            match rest.get(j) {
                Some((x, p)) => {
                    u.extend(x.iter().map(|v| v / amp));
                    logits.push((p.max(1e-12) / p0).ln());
                }
                None => {
                    u.extend(std::iter::repeat_n(0.5, n_t));
                    logits.push(-6.0);
                }
            }
        }
        u.extend(logits);
        Some(u)
    }
}

impl CostFunction for KPointProblem<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, theta: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let c = self
            .decode(theta)
            .map_err(|e| argmin::core::Error::msg(e.to_string()))?;
        let est = self
            .noise
            .estimate(&c.images, &c.probs)
            .map_err(|e| argmin::core::Error::msg(e.to_string()))?;
        Ok(-est.value / self.scale)
    }
}

fn initial_simplex(theta: &[f64]) -> Vec<Vec<f64>> {
    let mut simplex = vec![theta.to_vec()];
    for i in 0..theta.len() {
        let mut v = theta.to_vec();
        v[i] += if v[i] > 0.5 { -0.3 } else { 0.3 };
        simplex.push(v);
    }
    simplex
}

/// Best mutual information over inputs with `k` mass points, one pinned at
/// the origin, subject to the average-power constraint measured by the
/// minimum-energy cost of each image point.
pub fn k_point_lower_bound(
    decomp: &Decomposition,
    alpha: f64,
    k: usize,
    budget: &KPointBudget,
    seed: u64,
) -> Result<KPointResult> {
    k_point_lower_bound_warm(decomp, alpha, k, budget, seed, None)
}

/// Same, additionally starting one search from `warm` (typically the
/// optimum for `k - 1` points).
pub fn k_point_lower_bound_warm(
    decomp: &Decomposition,
    alpha: f64,
    k: usize,
    budget: &KPointBudget,
    seed: u64,
    warm: Option<&DiscreteInput>,
) -> Result<KPointResult> {
    if k < 2 {
        return Err(Error::InvalidArgument(
            "at least two mass points are needed".into(),
        ));
    }
    if !(alpha > 0.0) {
        return Err(Error::Infeasible);
    }
    if budget.starts == 0 {
        return Err(Error::InvalidArgument("no search starts".into()));
    }
    let amp = decomp.amplitude();
    let alpha = alpha.min(decomp.n_t() as f64 / 2.0);
    let noise = NoiseSamples::new(decomp.n_r(), budget.search_samples, seed)?;
    let h_energy = decomp.model().h().norm_squared();
    let problem = KPointProblem {
        decomp,
        k,
        budget: alpha * amp,
        noise: &noise,
        scale: (amp * amp * h_energy).min(1.0),
    };
    let dim = (k - 1) * (decomp.n_t() + 1);
    let mut starts: Vec<Vec<f64>> = (0..budget.starts)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1000 + s as u64);
            let n_u = (k - 1) * decomp.n_t();
            (0..dim)
                .map(|i| {
                    if i < n_u {
                        rng.random::<f64>()
                    } else {
                        rng.sample::<f64, _>(StandardNormal) - 1.0
                    }
                })
                .collect()
        })
        .collect();
    if let Some(theta) = warm.and_then(|w| problem.encode(w)) {
        starts[0] = theta;
    }

    let runs: Vec<Result<(Vec<f64>, f64, bool)>> = starts
        .par_iter()
        .map(|theta| {
            let solver = NelderMead::new(initial_simplex(theta))
                .with_sd_tolerance(1e-10)
                .map_err(|e| Error::NonConvergence(e.to_string()))?;
            let res = Executor::new(problem.clone(), solver)
                .configure(|s| s.max_iters(budget.max_iters))
                .run()
                .map_err(|e| Error::NonConvergence(e.to_string()))?;
            let state = res.state();
            let exhausted = matches!(
                state.get_termination_status(),
                TerminationStatus::Terminated(TerminationReason::MaxItersReached)
            );
            let best = state
                .get_best_param()
                .cloned()
                .unwrap_or_else(|| theta.clone());
            Ok((best, state.get_best_cost(), exhausted))
        })
        .collect();

    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for r in runs {
        let r = r?;
        if best.as_ref().is_none_or(|b| r.1 < b.1) {
            best = Some(r);
        }
    }
    let (theta, cost, exhausted) = best.expect("at least one start");
    let cand = problem.decode(&theta)?;
    let estimate = mi_discrete_gaussian(
        &cand.images,
        &cand.probs,
        budget.final_samples,
        seed ^ 0x9e37_79b9_7f4a_7c15,
    )?;
    Ok(KPointResult {
        estimate,
        input: DiscreteInput {
            points: cand.points,
            probs: cand.probs,
        },
        images: cand.images.iter().map(|v| v.iter().copied().collect()).collect(),
        search_value: -cost * problem.scale,
        budget_exhausted: exhausted,
    })
}
