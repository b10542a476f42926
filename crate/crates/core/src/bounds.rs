//! Analytic capacity bounds and their high- and low-SNR limits.
//!
//! Everything is in nats. The amplitude `A` is read from the
//! decomposition's model; the power ratio is passed explicitly so one
//! decomposition serves a whole `alpha` grid.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::channel::{effective_alpha, ChannelModel};
use crate::error::{Error, Result};
use crate::maxvar::{brute_force_max_trace, chain_optimal, max_trace};
use crate::scalar::{db_to_amplitude, golden_max, golden_min, log_sum_exp, q_function, softplus};
use crate::zonotope::Decomposition;

/// Inset applied to open search intervals.
pub const INTERVAL_INSET: f64 = 1e-9;
/// Golden-section tolerance on the search variable.
pub const SEARCH_TOL: f64 = 1e-8;
/// Residual target for the `mu` equation.
pub const MU_RESIDUAL: f64 = 1e-12;
/// Outer search range for `log mu`.
pub const LOG_MU_RANGE: (f64, f64) = (-20.0, 20.0);

const GRID: usize = 64;

/// Probability vector over the cells of a decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    pub fn new(w: Vec<f64>) -> Result<SimplexWeights> {
        if w.is_empty() || w.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::InvalidArgument(
                "weights must be nonempty and nonnegative".into(),
            ));
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("weights sum to {total}")));
        }
        Ok(SimplexWeights(w))
    }

    fn normalized(mut w: Vec<f64>) -> SimplexWeights {
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        SimplexWeights(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn mean(&self, s: &[f64]) -> f64 {
        self.0.iter().zip(s).map(|(p, v)| p * v).sum()
    }

    /// `D(self || q)` in nats.
    pub fn divergence(&self, q: &SimplexWeights) -> f64 {
        self.0
            .iter()
            .zip(&q.0)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, q)| p * (p / q).ln())
            .sum()
    }
}

/// All bounds at one `(alpha, A)` grid point. Bounds that do not apply at
/// this `alpha` are `None`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub a_linear: f64,
    pub a_db: f64,
    pub alpha_used: f64,
    pub lb_uniform: Option<f64>,
    pub lb_exp: Option<f64>,
    pub ub_peak: f64,
    pub ub_mu: Option<f64>,
    pub ub_mu_delta: Option<f64>,
    pub ub_trace: f64,
    pub nu: Option<f64>,
}

impl BoundReport {
    pub fn lower_bounds(&self) -> Vec<f64> {
        [self.lb_uniform, self.lb_exp].into_iter().flatten().collect()
    }

    pub fn upper_bounds(&self) -> Vec<f64> {
        [Some(self.ub_peak), self.ub_mu, self.ub_mu_delta, Some(self.ub_trace)]
            .into_iter()
            .flatten()
            .collect()
    }

    pub fn best_lower(&self) -> f64 {
        self.lower_bounds().into_iter().fold(0.0, f64::max)
    }

    pub fn best_upper(&self) -> f64 {
        self.upper_bounds()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

fn trunc_exp_mean(mu: f64) -> f64 {
    if mu < 1e-2 {
        let m2 = mu * mu;
        0.5 - mu / 12.0 + mu * m2 / 720.0 - mu * m2 * m2 / 30240.0
    } else {
        1.0 / mu - 1.0 / mu.exp_m1()
    }
}

/// Solves `1/mu - e^{-mu}/(1 - e^{-mu}) = x` for `x in (0, 1/2)`.
pub fn solve_mu(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 0.5) {
        return Err(Error::OutOfRange {
            value: x,
            lo: 0.0,
            hi: 0.5,
        });
    }
    let (mut lo, mut hi) = (1e-8_f64.ln(), 1e8_f64.ln());
    while trunc_exp_mean(lo.exp()) < x {
        lo -= 10.0;
    }
    while trunc_exp_mean(hi.exp()) > x {
        hi += 10.0;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if trunc_exp_mean(mid.exp()) > x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Differential entropy (nats) of the exponential law truncated to `[0, 1]`
/// with parameter `mu`.
pub fn trunc_exp_entropy(mu: f64) -> f64 {
    if mu < 1e-6 {
        return -mu * mu / 24.0;
    }
    1.0 - (mu.ln() - (-(-mu).exp_m1()).ln()) - mu / mu.exp_m1()
}

/// Mean of `s` under `p ∝ exp(logw)`, with `log Z` of the weights.
fn tilted(logw: &[f64], s: &[f64]) -> (f64, f64) {
    let lz = log_sum_exp(logw.iter().copied());
    let mean = logw
        .iter()
        .zip(s)
        .map(|(l, v)| (l - lz).exp() * v)
        .sum();
    (mean, lz)
}

fn finite_range(q: &[f64], s: &[f64]) -> (f64, f64) {
    s.iter()
        .zip(q)
        .filter(|(_, &qi)| qi > 0.0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&v, _)| {
            (lo.min(v), hi.max(v))
        })
}

/// Minimizes `D(p || q)` subject to `sum_U p_U s_U = target`.
pub fn kl_project(q: &SimplexWeights, s: &[f64], target: f64) -> Result<(SimplexWeights, f64)> {
    let qv = q.as_slice();
    if s.len() != qv.len() {
        return Err(Error::InvalidArgument("weights and values differ in length".into()));
    }
    let (smin, smax) = finite_range(qv, s);
    let span = smax - smin;
    let tol = 1e-12 * (1.0 + smin.abs().max(smax.abs()));
    if target < smin - tol || target > smax + tol {
        return Err(Error::Unreachable {
            target,
            lo: smin,
            hi: smax,
        });
    }
    let edge = |at: f64| {
        let w: Vec<f64> = qv
            .iter()
            .zip(s)
            .map(|(&qi, &si)| if qi > 0.0 && (si - at).abs() <= tol { qi } else { 0.0 })
            .collect();
        let mass: f64 = w.iter().sum();
        (SimplexWeights::normalized(w), -mass.ln())
    };
    if span <= tol {
        return Ok((q.clone(), 0.0));
    }
    if (target - smin).abs() <= tol {
        return Ok(edge(smin));
    }
    if (target - smax).abs() <= tol {
        return Ok(edge(smax));
    }
    let logq: Vec<f64> = qv.iter().map(|v| v.ln()).collect();
    let mean_at = |theta: f64| {
        let lw: Vec<f64> = logq.iter().zip(s).map(|(l, v)| l + theta * v).collect();
        tilted(&lw, s).0
    };
    let (mut lo, mut hi) = (-1.0 / span, 1.0 / span);
    while mean_at(lo) > target {
        lo *= 2.0;
    }
    while mean_at(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mean_at(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    let lw: Vec<f64> = logq.iter().zip(s).map(|(l, v)| l + theta * v).collect();
    let (mean, lz) = tilted(&lw, s);
    let p = SimplexWeights::normalized(lw.iter().map(|l| (l - lz).exp()).collect());
    let d = (theta * mean - lz).max(0.0);
    Ok((p, d))
}

fn require_below_threshold(decomp: &Decomposition, alpha: f64) -> Result<()> {
    if alpha >= decomp.alpha_th() {
        return Err(Error::EmptyInterval {
            alpha,
            alpha_th: decomp.alpha_th(),
        });
    }
    Ok(())
}

fn cell_weights(decomp: &Decomposition) -> SimplexWeights {
    SimplexWeights::normalized(decomp.q())
}

/// The objective maximized over `lambda` in the definition of `nu`.
pub fn nu_objective(decomp: &Decomposition, alpha: f64, lambda: f64) -> f64 {
    let n_r = decomp.n_r() as f64;
    let Ok(mu) = solve_mu(lambda / n_r) else {
        return f64::NEG_INFINITY;
    };
    match kl_project(&cell_weights(decomp), &decomp.s(), alpha - lambda) {
        Ok((_, d)) => n_r * trunc_exp_entropy(mu) - d,
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Open search interval for `lambda`, already inset.
pub fn nu_interval(decomp: &Decomposition, alpha: f64) -> Result<(f64, f64)> {
    require_below_threshold(decomp, alpha)?;
    let half = decomp.n_r() as f64 / 2.0;
    let lo = (half + alpha - decomp.alpha_th()).max(0.0) + INTERVAL_INSET;
    let hi = half.min(alpha) - INTERVAL_INSET;
    if lo >= hi {
        return Err(Error::EmptyInterval {
            alpha,
            alpha_th: decomp.alpha_th(),
        });
    }
    Ok((lo, hi))
}

/// Grid scan then golden-section refinement around the best grid point.
fn scan_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let step = (hi - lo) / GRID as f64;
    let (mut bi, mut bv) = (0, f64::NEG_INFINITY);
    for i in 0..=GRID {
        let v = f(lo + step * i as f64);
        if v > bv {
            bi = i;
            bv = v;
        }
    }
    let a = lo + step * bi.saturating_sub(1) as f64;
    let b = (lo + step * (bi + 1) as f64).min(hi);
    let r = golden_max(&f, a, b, tol);
    if r.value >= bv {
        (r.x, r.value)
    } else {
        (lo + step * bi as f64, bv)
    }
}

fn scan_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (x, v) = scan_max(|t| -f(t), lo, hi, tol);
    (x, -v)
}

/// High-SNR penalty of an active average-power constraint; negative.
pub fn nu(decomp: &Decomposition, alpha: f64) -> Result<f64> {
    let (lo, hi) = nu_interval(decomp, alpha)?;
    Ok(scan_max(|l| nu_objective(decomp, alpha, l), lo, hi, SEARCH_TOL).1)
}

fn log_vol_term(decomp: &Decomposition) -> f64 {
    let n_r = decomp.n_r() as f64;
    2.0 * n_r * decomp.amplitude().ln() + 2.0 * decomp.v_h().ln() - n_r * (2.0 * PI * E).ln()
}

/// Entropy-power lower bound with a uniform image; valid for
/// `alpha >= alpha_th`.
pub fn lower_bound_epi_uniform(decomp: &Decomposition) -> f64 {
    0.5 * softplus(log_vol_term(decomp))
}

/// Entropy-power lower bound with truncated-exponential signaling inside
/// each cell; valid for `alpha < alpha_th`.
pub fn lower_bound_epi_exponential(decomp: &Decomposition, alpha: f64) -> Result<f64> {
    let v = nu(decomp, alpha)?;
    Ok(lower_bound_epi_exponential_with_nu(decomp, v))
}

pub fn lower_bound_epi_exponential_with_nu(decomp: &Decomposition, nu: f64) -> f64 {
    0.5 * softplus(log_vol_term(decomp) + 2.0 * nu)
}

/// Peak-power-only upper bound, closed form.
pub fn upper_bound_peak(decomp: &Decomposition) -> f64 {
    let shift = decomp.amplitude() / (2.0 * PI * E).sqrt();
    let terms = decomp.cells().iter().map(|c| {
        c.q.ln() + c.sigma.iter().map(|s| (s + shift).ln()).sum::<f64>()
    });
    decomp.v_h().ln() + log_sum_exp(terms)
}

/// `max_{p: p.s <= alpha} { -D(p||q) + p.b }`, by the dual
/// `min_{t >= 0} log sum q e^{b - t s} + t alpha`.
fn constrained_tilt(logq: &[f64], b: &[f64], s: &[f64], alpha: f64) -> f64 {
    let lw: Vec<f64> = logq.iter().zip(b).map(|(l, v)| l + v).collect();
    let (mean, lz) = tilted(&lw, s);
    if mean <= alpha {
        return lz;
    }
    let at = |t: f64| {
        let w: Vec<f64> = lw.iter().zip(s).map(|(l, v)| l - t * v).collect();
        tilted(&w, s)
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while at(hi).0 > alpha && hi < 1e12 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if at(mid).0 > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    at(t).1 + t * alpha
}

/// Objective of the single-parameter bound at a fixed `mu`, already
/// maximized over the cell probabilities. Any `mu > 0` gives a valid upper
/// bound.
pub fn mu_objective(decomp: &Decomposition, alpha: f64, mu: f64) -> f64 {
    let amp = decomp.amplitude();
    let shrink = if mu < 1e-8 {
        1.0 - mu / 2.0
    } else {
        -(-mu).exp_m1() / mu
    };
    let gain = amp * shrink / (2.0 * PI * E).sqrt();
    let tail = -(amp * amp);
    let b: Vec<f64> = decomp
        .cells()
        .iter()
        .map(|c| {
            let logs: f64 = c.sigma.iter().map(|s| (s + gain).ln()).sum();
            let lin: f64 = c
                .sigma
                .iter()
                .map(|s| s * -(tail / (2.0 * s * s)).exp_m1())
                .sum();
            logs + mu / (amp * (2.0 * PI).sqrt()) * lin - mu * c.s as f64
        })
        .collect();
    let logq: Vec<f64> = decomp.q().iter().map(|v| v.ln()).collect();
    decomp.v_h().ln() + mu * alpha + constrained_tilt(&logq, &b, &decomp.s(), alpha)
}

/// Upper bound from the single-parameter relaxation, evaluated as
/// `inf_mu sup_p`; valid for `alpha < alpha_th`.
pub fn upper_bound_mu(decomp: &Decomposition, alpha: f64) -> Result<f64> {
    require_below_threshold(decomp, alpha)?;
    let (lo, hi) = LOG_MU_RANGE;
    let inner = scan_min(|lm| mu_objective(decomp, alpha, lm.exp()), lo, hi, SEARCH_TOL).1;
    Ok(inner.min(mu_objective(decomp, alpha, 0.0)))
}

/// Objective of the two-parameter bound at fixed `(delta, mu)`.
pub fn mu_delta_objective(decomp: &Decomposition, alpha: f64, delta: f64, mu: f64) -> f64 {
    let amp = decomp.amplitude();
    let sq2pi = (2.0 * PI).sqrt();
    let base = amp.ln() - 0.5 * (2.0 * PI * E).ln() - mu.ln() + mu * delta / amp
        + (-(-mu * (1.0 + 2.0 * delta / amp)).exp_m1()).ln();
    let b: Vec<f64> = decomp
        .cells()
        .iter()
        .map(|c| {
            let per: f64 = c
                .sigma
                .iter()
                .map(|&s| {
                    let z = delta / s;
                    let body = 1.0 - 2.0 * q_function(z);
                    let g0 = (-z * z / 2.0).exp();
                    let g1 = (-(amp + delta).powi(2) / (2.0 * s * s)).exp();
                    base - body.ln()
                        + q_function(z)
                        + z / sq2pi * g0
                        + mu * s / (amp * sq2pi) * (g0 - g1)
                })
                .sum();
            per - mu * c.s as f64
        })
        .collect();
    let logq: Vec<f64> = decomp.q().iter().map(|v| v.ln()).collect();
    decomp.v_h().ln() + mu * alpha + constrained_tilt(&logq, &b, &decomp.s(), alpha)
}

/// Upper bound from the two-parameter relaxation, minimized by coordinate
/// descent over `(log delta, log mu)`; valid for `alpha < alpha_th`.
pub fn upper_bound_mu_delta(decomp: &Decomposition, alpha: f64) -> Result<f64> {
    require_below_threshold(decomp, alpha)?;
    let amp = decomp.amplitude();
    let (smin, smax) = decomp
        .cells()
        .iter()
        .flat_map(|c| c.sigma.iter().copied())
        .fold((f64::INFINITY, 0.0_f64), |(a, b), s| (a.min(s), b.max(s)));
    let ld_range = ((smin * 1e-6).ln(), (20.0 * (amp + smax)).ln());
    let (lm_lo, lm_hi) = LOG_MU_RANGE;
    let f = |ld: f64, lm: f64| {
        let v = mu_delta_objective(decomp, alpha, ld.exp(), lm.exp());
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let (mut lm, _) = scan_min(|lm| mu_objective(decomp, alpha, lm.exp()), lm_lo, lm_hi, SEARCH_TOL);
    let (mut ld, mut best) = scan_min(|ld| f(ld, lm), ld_range.0, ld_range.1, SEARCH_TOL);
    for _ in 0..50 {
        let prev = best;
        let r = golden_min(|x| f(ld, x), lm_lo, lm_hi, SEARCH_TOL);
        let (xm, vm) = scan_min(|x| f(ld, x), lm_lo, lm_hi, SEARCH_TOL);
        let (nlm, vlm) = if r.value < vm { (r.x, r.value) } else { (xm, vm) };
        if vlm < best {
            lm = nlm;
            best = vlm;
        }
        let (nld, vld) = scan_min(|x| f(x, lm), ld_range.0, ld_range.1, SEARCH_TOL);
        if vld < best {
            ld = nld;
            best = vld;
        }
        if prev - best < 1e-9 {
            break;
        }
    }
    Ok(best)
}

/// Maximum covariance trace at unit amplitude for the model's `alpha`.
///
/// Falls back to the all-points optimum when some pair of columns has a
/// negative inner product, since chains can then miss the optimum.
pub fn unit_max_trace(model: &ChannelModel) -> Result<f64> {
    let m = model.with_amplitude(1.0)?;
    let chain = max_trace(&m)?.value;
    if chain_optimal(m.h()) {
        Ok(chain)
    } else {
        Ok(chain.max(brute_force_max_trace(&m)?))
    }
}

/// Covariance-trace upper bound.
pub fn upper_bound_trace(model: &ChannelModel) -> Result<f64> {
    let t1 = unit_max_trace(model)?;
    Ok(upper_bound_trace_from(model.n_r(), model.amplitude(), t1))
}

/// Same bound from a precomputed unit-amplitude trace.
pub fn upper_bound_trace_from(n_r: usize, amplitude: f64, unit_trace: f64) -> f64 {
    let n = n_r as f64;
    0.5 * n * (amplitude * amplitude * unit_trace / n).ln_1p()
}

/// Limit of `C - n_R log A` as `A` grows.
pub fn high_snr_asymptote(decomp: &Decomposition, alpha: f64) -> Result<f64> {
    let n_r = decomp.n_r() as f64;
    let base = decomp.v_h().ln() - 0.5 * n_r * (2.0 * PI * E).ln();
    if alpha < decomp.alpha_th() {
        Ok(base + nu(decomp, alpha)?)
    } else {
        Ok(base)
    }
}

/// Limit of `C / A^2` as `A` shrinks.
pub fn low_snr_slope(model: &ChannelModel) -> Result<f64> {
    Ok(0.5 * unit_max_trace(model)?)
}

/// Everything for one grid point. `unit_trace` and `nu` depend only on
/// `alpha` and are passed in so sweeps compute them once.
pub fn evaluate_bounds(
    decomp: &Decomposition,
    alpha: f64,
    a_db: f64,
    unit_trace: f64,
    nu: Option<f64>,
) -> Result<BoundReport> {
    let amp = db_to_amplitude(a_db);
    let d = decomp.with_amplitude(amp)?;
    let below = alpha < d.alpha_th();
    let (lb_uniform, lb_exp, ub_mu, ub_mu_delta, nu) = if below {
        let v = match nu {
            Some(v) => v,
            None => self::nu(&d, alpha)?,
        };
        (
            None,
            Some(lower_bound_epi_exponential_with_nu(&d, v)),
            Some(upper_bound_mu(&d, alpha)?),
            Some(upper_bound_mu_delta(&d, alpha)?),
            Some(v),
        )
    } else {
        (Some(lower_bound_epi_uniform(&d)), None, None, None, None)
    };
    Ok(BoundReport {
        a_linear: amp,
        a_db,
        alpha_used: alpha,
        lb_uniform,
        lb_exp,
        ub_peak: upper_bound_peak(&d),
        ub_mu,
        ub_mu_delta,
        ub_trace: upper_bound_trace_from(d.n_r(), amp, unit_trace),
        nu,
    })
}

/// Convenience wrapper computing the `alpha`-only quantities as well.
pub fn bounds_at(decomp: &Decomposition, alpha: f64, a_db: f64) -> Result<BoundReport> {
    let model = decomp.model().with_alpha(alpha)?;
    let alpha_used = effective_alpha(&model);
    let t1 = unit_max_trace(&model)?;
    evaluate_bounds(decomp, alpha_used, a_db, t1, None)
}
