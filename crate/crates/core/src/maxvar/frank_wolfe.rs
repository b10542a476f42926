//! Away-step Frank-Wolfe over every binary input point.
//!
//! The feasible polytope `{p in simplex, sum_k p_k |x_k| <= b}` has two
//! kinds of vertices: single points with cost at most `b`, and two-point
//! mixtures straddling the budget exactly. Costs are Hamming weights, so
//! the linear oracle only needs the best point of each weight.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const MAX_ITER: usize = 500_000;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Atom {
    Single(usize),
    /// `theta` on the first index, `1 - theta` on the second.
    Pair(usize, usize, f64),
}

impl Atom {
    fn same(&self, other: &Atom) -> bool {
        match (self, other) {
            (Atom::Single(a), Atom::Single(b)) => a == b,
            (Atom::Pair(a, b, _), Atom::Pair(c, d, _)) => a == c && b == d,
            _ => false,
        }
    }

    fn value(&self, g: &[f64]) -> f64 {
        match *self {
            Atom::Single(i) => g[i],
            Atom::Pair(i, j, th) => th * g[i] + (1.0 - th) * g[j],
        }
    }

    fn mean(&self, y: &[DVector<f64>]) -> DVector<f64> {
        match *self {
            Atom::Single(i) => y[i].clone(),
            Atom::Pair(i, j, th) => &y[i] * th + &y[j] * (1.0 - th),
        }
    }

    fn second(&self, sq: &[f64]) -> f64 {
        match *self {
            Atom::Single(i) => sq[i],
            Atom::Pair(i, j, th) => th * sq[i] + (1.0 - th) * sq[j],
        }
    }
}

/// Best vertex for the linear objective `g`.
fn oracle(g: &[f64], levels: &[Vec<usize>], budget: f64) -> Atom {
    let best: Vec<Option<usize>> = levels
        .iter()
        .map(|idx| idx.iter().copied().max_by(|&a, &b| g[a].total_cmp(&g[b])))
        .collect();
    let mut top: Option<(Atom, f64)> = None;
    let mut consider = |a: Atom| {
        let v = a.value(g);
        if top.is_none_or(|(_, bv)| v > bv) {
            top = Some((a, v));
        }
    };
    for (w, b) in best.iter().enumerate() {
        let Some(i) = *b else { continue };
        if (w as f64) <= budget {
            consider(Atom::Single(i));
        }
    }
    for (lo, bl) in best.iter().enumerate() {
        let Some(i) = *bl else { continue };
        if lo as f64 >= budget {
            continue;
        }
        for (hi, bh) in best.iter().enumerate().skip(lo + 1) {
            let Some(j) = *bh else { continue };
            if (hi as f64) <= budget {
                continue;
            }
            let th = (hi as f64 - budget) / (hi - lo) as f64;
            consider(Atom::Pair(i, j, th));
        }
    }
    top.expect("origin is always feasible").0
}

/// Maximum covariance trace of `H X` over `X` on `{0,1}^n_T` with
/// `E|X|_1 <= budget`.
pub(crate) fn max_trace_all_points(h: &DMatrix<f64>, budget: f64) -> Result<f64> {
    let n_t = h.ncols();
    let n_pts = 1usize << n_t;
    let y: Vec<DVector<f64>> = (0..n_pts)
        .map(|mask| {
            let mut v = DVector::zeros(h.nrows());
            for k in 0..n_t {
                if mask >> k & 1 == 1 {
                    v += h.column(k);
                }
            }
            v
        })
        .collect();
    let sq: Vec<f64> = y.iter().map(|v| v.norm_squared()).collect();
    let mut levels = vec![Vec::new(); n_t + 1];
    for mask in 0..n_pts {
        levels[(mask as u32).count_ones() as usize].push(mask);
    }

    let mut atoms: Vec<(Atom, f64)> = vec![(Atom::Single(0), 1.0)];
    for _ in 0..MAX_ITER {
        let mean = atoms
            .iter()
            .fold(DVector::zeros(h.nrows()), |m, (a, w)| m + a.mean(&y) * *w);
        let second: f64 = atoms.iter().map(|(a, w)| w * a.second(&sq)).sum();
        let f = second - mean.norm_squared();
        let g: Vec<f64> = (0..n_pts).map(|k| sq[k] - 2.0 * y[k].dot(&mean)).collect();
        let p_val: f64 = atoms.iter().map(|(a, w)| w * a.value(&g)).sum();

        let fw = oracle(&g, &levels, budget);
        let gap = fw.value(&g) - p_val;
        if gap <= 1e-9 * (1.0 + f.abs()) {
            return Ok(f);
        }
        let (away_idx, away_val) = atoms
            .iter()
            .enumerate()
            .map(|(i, (a, _))| (i, a.value(&g)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("active set is never empty");
        let away_gap = p_val - away_val;

        if gap >= away_gap || atoms.len() == 1 {
            // Frank-Wolfe step towards fw.
            let dm = fw.mean(&y) - &mean;
            let curv = 2.0 * dm.norm_squared();
            let gamma = if curv > 0.0 { (gap / curv).min(1.0) } else { 1.0 };
            for (_, w) in atoms.iter_mut() {
                *w *= 1.0 - gamma;
            }
            match atoms.iter_mut().find(|(a, _)| a.same(&fw)) {
                Some((_, w)) => *w += gamma,
                None => atoms.push((fw, gamma)),
            }
        } else {
            let (away, w_a) = atoms[away_idx];
            let gamma_max = w_a / (1.0 - w_a);
            let dm = &mean - away.mean(&y);
            let curv = 2.0 * dm.norm_squared();
            let gamma = if curv > 0.0 {
                (away_gap / curv).min(gamma_max)
            } else {
                gamma_max
            };
            for (_, w) in atoms.iter_mut() {
                *w *= 1.0 + gamma;
            }
            atoms[away_idx].1 -= gamma;
        }
        atoms.retain(|(_, w)| *w > 1e-15);
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        atoms.iter_mut().for_each(|(_, w)| *w /= total);
    }
    Err(Error::NonConvergence(
        "Frank-Wolfe did not close the duality gap".into(),
    ))
}
