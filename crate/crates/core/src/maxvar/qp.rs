//! Concave quadratic maximization over `{p >= 0, 1^T p = 1, c^T p <= b}`.
//!
//! The objective is `f(p) = sum_k p_k |y_k|^2 - |sum_k p_k y_k|^2`, the
//! trace of the covariance of a discrete vector taking value `y_k` with
//! probability `p_k`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const MAX_ITER: usize = 100_000;
const POLISH_EVERY: usize = 20;
const KKT_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub(crate) struct QpSolution {
    pub p: Vec<f64>,
    pub value: f64,
    pub binding: bool,
}

pub(crate) fn objective(y: &DMatrix<f64>, p: &[f64]) -> f64 {
    let mut mean = DVector::zeros(y.nrows());
    let mut second = 0.0;
    for (k, &pk) in p.iter().enumerate() {
        if pk != 0.0 {
            mean.axpy(pk, &y.column(k), 1.0);
            second += pk * y.column(k).norm_squared();
        }
    }
    second - mean.norm_squared()
}

fn gradient(y: &DMatrix<f64>, d: &[f64], p: &[f64]) -> Vec<f64> {
    let mean = y * DVector::from_column_slice(p);
    (0..p.len())
        .map(|k| d[k] - 2.0 * y.column(k).dot(&mean))
        .collect()
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(z: &[f64]) -> Vec<f64> {
    let mut u = z.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            tau = t;
        }
    }
    z.iter().map(|&zi| (zi - tau).max(0.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projection onto the simplex cut by `c^T p <= b`; `min c` must be `<= b`.
pub(crate) fn project_budget(z: &[f64], c: &[f64], b: f64) -> Vec<f64> {
    let p = project_simplex(z);
    if dot(&p, c) <= b {
        return p;
    }
    let shifted = |t: f64| -> Vec<f64> {
        let w: Vec<f64> = z.iter().zip(c).map(|(zi, ci)| zi - t * ci).collect();
        project_simplex(&w)
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while dot(&shifted(hi), c) > b {
        hi *= 2.0;
        if hi > 1e300 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dot(&shifted(mid), c) > b {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    shifted(hi)
}

/// Solves the KKT system on a fixed support and checks optimality.
fn polish(
    y: &DMatrix<f64>,
    d: &[f64],
    c: &[f64],
    b: f64,
    support: &[usize],
    binding: bool,
) -> Option<Vec<f64>> {
    let m = support.len();
    let extra = if binding { 2 } else { 1 };
    let dim = m + extra;
    let mut sys = DMatrix::zeros(dim, dim);
    let mut rhs = DVector::zeros(dim);
    for (r, &k) in support.iter().enumerate() {
        for (s, &l) in support.iter().enumerate() {
            sys[(r, s)] = 2.0 * y.column(k).dot(&y.column(l));
        }
        sys[(r, m)] = 1.0;
        sys[(m, r)] = 1.0;
        if binding {
            sys[(r, m + 1)] = c[k];
            sys[(m + 1, r)] = c[k];
        }
        rhs[r] = d[k];
    }
    rhs[m] = 1.0;
    if binding {
        rhs[m + 1] = b;
    }
    let sol = sys.clone().svd(true, true).solve(&rhs, 1e-13).ok()?;
    let scale = 1.0 + d.iter().cloned().fold(0.0, f64::max);
    if (&sys * &sol - &rhs).amax() > KKT_TOL * scale {
        return None;
    }
    if support.iter().enumerate().any(|(r, _)| sol[r] < -1e-13) {
        return None;
    }
    let tau = sol[m];
    let t = if binding { sol[m + 1] } else { 0.0 };
    if t < -KKT_TOL * scale {
        return None;
    }
    let mut p = vec![0.0; d.len()];
    for (r, &k) in support.iter().enumerate() {
        p[k] = sol[r].max(0.0);
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    if dot(&p, c) > b + 1e-12 * (1.0 + b) {
        return None;
    }
    let g = gradient(y, d, &p);
    let ok = (0..d.len()).all(|k| g[k] - tau - t.max(0.0) * c[k] <= KKT_TOL * scale);
    ok.then_some(p)
}

fn try_polish(y: &DMatrix<f64>, d: &[f64], c: &[f64], b: f64, p: &[f64]) -> Option<Vec<f64>> {
    let support: Vec<usize> = (0..p.len()).filter(|&k| p[k] > 1e-10).collect();
    let near = (dot(p, c) - b).abs() <= 1e-6 * (1.0 + b);
    let flags: &[bool] = if near { &[true, false] } else { &[false, true] };
    flags
        .iter()
        .find_map(|&binding| polish(y, d, c, b, &support, binding))
}

/// Maximizes the covariance trace of points `y` (columns) with costs `c`
/// and budget `b`.
pub(crate) fn maximize(y: &DMatrix<f64>, c: &[f64], b: f64) -> Result<QpSolution> {
    let n = y.ncols();
    let cmin_idx = (0..n)
        .min_by(|&i, &j| c[i].total_cmp(&c[j]))
        .ok_or_else(|| Error::InvalidArgument("empty point set".into()))?;
    if c[cmin_idx] > b {
        return Err(Error::Infeasible);
    }
    let d: Vec<f64> = (0..n).map(|k| y.column(k).norm_squared()).collect();
    let finish = |p: Vec<f64>| {
        let value = objective(y, &p);
        let binding = (dot(&p, c) - b).abs() <= 1e-9 * (1.0 + b);
        QpSolution { p, value, binding }
    };
    let mut p = vec![0.0; n];
    p[cmin_idx] = 1.0;
    let fro = y.norm_squared().max(1e-300);
    let eta = 1.0 / (2.0 * fro);
    let scale = 1.0 + d.iter().cloned().fold(0.0, f64::max);
    for it in 1..=MAX_ITER {
        let g = gradient(y, &d, &p);
        let z: Vec<f64> = p.iter().zip(&g).map(|(pi, gi)| pi + eta * gi).collect();
        let q = project_budget(&z, c, b);
        let dir: Vec<f64> = q.iter().zip(&p).map(|(a, b)| a - b).collect();
        let step_norm = dir.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if step_norm / eta <= KKT_TOL * scale {
            return Ok(finish(try_polish(y, &d, c, b, &p).unwrap_or(p)));
        }
        let yd = y * DVector::from_column_slice(&dir);
        let curv = 2.0 * yd.norm_squared();
        let slope = dot(&g, &dir);
        let gamma = if curv > 0.0 { (slope / curv).min(1.0) } else { 1.0 };
        for (pi, di) in p.iter_mut().zip(&dir) {
            *pi = (*pi + gamma * di).max(0.0);
        }
        if it % POLISH_EVERY == 0 {
            if let Some(exact) = try_polish(y, &d, c, b, &p) {
                return Ok(finish(exact));
            }
        }
    }
    Err(Error::NonConvergence(format!(
        "covariance-trace QP did not meet the KKT tolerance in {MAX_ITER} iterations"
    )))
}
