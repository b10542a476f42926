//! Maximum trace of `Cov(H X)` under peak and average power constraints.
//!
//! Optimal inputs are binary (`x in {0, A}^n_T`) and their support forms a
//! chain `0 < x_1 < x_2 < ...` under the componentwise order, so for a fixed
//! antenna ordering only the `n_T + 1` prefix vectors matter and the problem
//! becomes a small concave QP. The ordering itself is searched exhaustively
//! for `n_T <= 8`.

mod frank_wolfe;
mod qp;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{effective_alpha, ChannelModel};
use crate::error::{Error, Result};

/// Largest `n_T` searched over all orderings.
pub const EXHAUSTIVE_MAX_NT: usize = 8;
/// Largest `n_T` accepted at all.
pub const MAX_NT: usize = 12;

/// A finitely supported input distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteInput {
    pub points: Vec<Vec<f64>>,
    pub probs: Vec<f64>,
}

impl DiscreteInput {
    pub fn new(points: Vec<Vec<f64>>, probs: Vec<f64>) -> Result<DiscreteInput> {
        if points.is_empty() || points.len() != probs.len() {
            return Err(Error::InvalidArgument(
                "points and probabilities must be nonempty and of equal length".into(),
            ));
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
        let dim = points[0].len();
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidArgument("points differ in dimension".into()));
        }
        Ok(DiscreteInput { points, probs })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `E |X|_1`.
    pub fn average_power(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.probs)
            .map(|(x, p)| p * x.iter().sum::<f64>())
            .sum()
    }

    /// Same points with every coordinate replaced by `A - x`.
    pub fn reflect(&self, amplitude: f64) -> DiscreteInput {
        DiscreteInput {
            points: self
                .points
                .iter()
                .map(|x| x.iter().map(|v| amplitude - v).collect())
                .collect(),
            probs: self.probs.clone(),
        }
    }
}

/// Optimum of the covariance-trace problem.
#[derive(Debug, Clone, Serialize)]
pub struct TraceSolution {
    /// Maximum trace in units of `A^2`.
    pub value: f64,
    pub input: DiscreteInput,
    /// 0-based antenna order whose prefixes carry the support.
    pub ordering: Vec<usize>,
    /// Whether `E|X|_1 = alpha A` at the optimum.
    pub constraint_binds: bool,
    /// Outcome of the R-matrix rank check, when it was run.
    pub r_rank_holds: Option<bool>,
    /// False only if the rank condition holds and the support still
    /// exceeds `n_R + 2`.
    pub support_bound_ok: bool,
    /// True when every ordering was tried.
    pub exhaustive: bool,
}

/// Trace of the covariance of `H X` (absolute units).
pub fn trace_cov(model: &ChannelModel, input: &DiscreteInput) -> f64 {
    let h = model.h();
    let ys: Vec<DVector<f64>> = input
        .points
        .iter()
        .map(|x| h * DVector::from_column_slice(x))
        .collect();
    let mut mean = DVector::zeros(h.nrows());
    let mut second = 0.0;
    for (y, &p) in ys.iter().zip(&input.probs) {
        mean.axpy(p, y, 1.0);
        second += p * y.norm_squared();
    }
    second - mean.norm_squared()
}

/// Rows `(2 r_V, |V|, |r_V|^2)` over nonempty subsets `V`, with
/// `r_V = H 1_V`.
#[derive(Debug, Clone)]
pub struct RMatrix {
    pub rows: DMatrix<f64>,
    /// Subset of each row, as 0-based antenna indices.
    pub subsets: Vec<Vec<usize>>,
}

impl RMatrix {
    pub fn build(model: &ChannelModel) -> Result<RMatrix> {
        let n_t = model.n_t();
        if n_t > MAX_NT {
            return Err(Error::TooLarge(format!(
                "{n_t} transmit antennas give {} subsets",
                (1u64 << n_t) - 1
            )));
        }
        let h = model.h();
        let n_r = model.n_r();
        let count = (1usize << n_t) - 1;
        let mut rows = DMatrix::zeros(count, n_r + 2);
        let mut subsets = Vec::with_capacity(count);
        for mask in 1..=count {
            let v: Vec<usize> = (0..n_t).filter(|k| mask >> k & 1 == 1).collect();
            let mut r = DVector::zeros(n_r);
            for &k in &v {
                r += h.column(k);
            }
            let row = mask - 1;
            for i in 0..n_r {
                rows[(row, i)] = 2.0 * r[i];
            }
            rows[(row, n_r)] = v.len() as f64;
            rows[(row, n_r + 1)] = r.norm_squared();
            subsets.push(v);
        }
        Ok(RMatrix { rows, subsets })
    }
}

#[derive(Debug, Clone)]
pub struct RRankCheck {
    pub holds: bool,
    /// A singular square submatrix when the condition fails.
    pub witness: Option<DMatrix<f64>>,
    /// The subsets labelling the witness rows.
    pub witness_subsets: Option<Vec<Vec<usize>>>,
    pub exhaustive: bool,
}

const R_RANK_SAMPLES: usize = 20_000;

/// Checks that every `(n_R + 2)`-row square submatrix of the R-matrix is
/// nonsingular. Exhaustive for `n_T <= 5`, sampled above.
pub fn check_r_rank(model: &ChannelModel) -> Result<RRankCheck> {
    model.require_canonical()?;
    if model.n_r() < 2 {
        return Err(Error::InvalidArgument(
            "the rank condition needs at least two receive antennas".into(),
        ));
    }
    let r = RMatrix::build(model)?;
    let size = model.n_r() + 2;
    let n_rows = r.rows.nrows();
    let norms: Vec<f64> = r.rows.row_iter().map(|row| row.norm()).collect();
    let singular = |idx: &[usize]| -> bool {
        let sub = r.rows.select_rows(idx);
        let scale: f64 = idx.iter().map(|&i| norms[i]).product();
        sub.determinant().abs() <= 1e-9 * scale
    };
    let fail = |idx: Vec<usize>, exhaustive: bool| RRankCheck {
        holds: false,
        witness: Some(r.rows.select_rows(&idx)),
        witness_subsets: Some(idx.iter().map(|&i| r.subsets[i].clone()).collect()),
        exhaustive,
    };
    let exhaustive = model.n_t() <= 5;
    if exhaustive {
        if let Some(idx) = (0..n_rows).combinations(size).find(|idx| singular(idx)) {
            return Ok(fail(idx, true));
        }
    } else {
        // Repeated rows are the common failure; find them deterministically.
        for (a, b) in (0..n_rows).tuple_combinations() {
            if (r.rows.row(a) - r.rows.row(b)).amax() <= 1e-12 * (1.0 + norms[a]) {
                let mut idx = vec![a, b];
                idx.extend((0..n_rows).filter(|&i| i != a && i != b).take(size - 2));
                return Ok(fail(idx, false));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..R_RANK_SAMPLES {
            let mut idx = sample(&mut rng, n_rows, size).into_vec();
            idx.sort_unstable();
            if singular(&idx) {
                return Ok(fail(idx, false));
            }
        }
    }
    Ok(RRankCheck {
        holds: true,
        witness: None,
        witness_subsets: None,
        exhaustive,
    })
}

fn validate_ordering(ordering: &[usize], n_t: usize) -> Result<()> {
    let mut seen = vec![false; n_t];
    if ordering.len() != n_t {
        return Err(Error::InvalidArgument(format!(
            "ordering has {} entries, expected {n_t}",
            ordering.len()
        )));
    }
    for &k in ordering {
        if k >= n_t || seen[k] {
            return Err(Error::InvalidArgument(format!(
                "{ordering:?} is not a permutation"
            )));
        }
        seen[k] = true;
    }
    Ok(())
}

/// Chain QP without validation; returns the normalized optimum.
fn chain_optimum(h: &DMatrix<f64>, ordering: &[usize], budget: f64) -> Result<qp::QpSolution> {
    let n_t = ordering.len();
    let mut y = DMatrix::zeros(h.nrows(), n_t + 1);
    for (k, &ant) in ordering.iter().enumerate() {
        let prev = y.column(k).clone_owned();
        y.set_column(k + 1, &(prev + h.column(ant)));
    }
    let costs: Vec<f64> = (0..=n_t).map(|k| k as f64).collect();
    qp::maximize(&y, &costs, budget)
}

fn solution_from_chain(
    model: &ChannelModel,
    ordering: &[usize],
    sol: qp::QpSolution,
) -> TraceSolution {
    let amp = model.amplitude();
    let n_t = model.n_t();
    let mut points = Vec::new();
    let mut probs = Vec::new();
    let kept: f64 = sol.p.iter().filter(|&&p| p > 1e-12).sum();
    for (k, &p) in sol.p.iter().enumerate() {
        if p > 1e-12 {
            let mut x = vec![0.0; n_t];
            for &ant in &ordering[..k] {
                x[ant] = amp;
            }
            points.push(x);
            probs.push(p / kept);
        }
    }
    TraceSolution {
        value: sol.value,
        input: DiscreteInput { points, probs },
        ordering: ordering.to_vec(),
        constraint_binds: sol.binding,
        r_rank_holds: None,
        support_bound_ok: true,
        exhaustive: false,
    }
}

/// Optimum restricted to the prefix chain of one antenna ordering.
pub fn max_trace_chain(model: &ChannelModel, ordering: &[usize]) -> Result<TraceSolution> {
    validate_ordering(ordering, model.n_t())?;
    let sol = chain_optimum(model.h(), ordering, effective_alpha(model))?;
    Ok(solution_from_chain(model, ordering, sol))
}

fn better(value: f64, best: f64) -> bool {
    value > best + 1e-10 * best.abs().max(1e-300)
}

fn greedy_ordering(h: &DMatrix<f64>) -> Vec<usize> {
    let n_t = h.ncols();
    let mut order = Vec::with_capacity(n_t);
    let mut acc = DVector::zeros(h.nrows());
    let mut left: Vec<usize> = (0..n_t).collect();
    while !left.is_empty() {
        let (pos, _) = left
            .iter()
            .enumerate()
            .map(|(i, &k)| (i, (&acc + h.column(k)).norm_squared()))
            .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
        let k = left.remove(pos);
        acc += h.column(k);
        order.push(k);
    }
    order
}

/// True when every pair of columns has a nonnegative inner product, in
/// which case some chain input attains the maximum trace.
pub fn chain_optimal(h: &DMatrix<f64>) -> bool {
    let g = h.transpose() * h;
    g.iter().all(|&v| v >= 0.0)
}

/// Maximum covariance trace over chain inputs, in units of `A^2`. This is
/// the global maximum when [`chain_optimal`] holds.
pub fn max_trace(model: &ChannelModel) -> Result<TraceSolution> {
    model.require_canonical()?;
    let n_t = model.n_t();
    if n_t > MAX_NT {
        return Err(Error::TooLarge(format!("{n_t} transmit antennas")));
    }
    let h = model.h();
    let budget = effective_alpha(model);
    let exhaustive = n_t <= EXHAUSTIVE_MAX_NT;
    let (ordering, sol) = if exhaustive {
        let orders: Vec<Vec<usize>> = (0..n_t).permutations(n_t).collect();
        let values: Vec<Result<f64>> = orders
            .par_iter()
            .map(|o| chain_optimum(h, o, budget).map(|s| s.value))
            .collect();
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in values.into_iter().enumerate() {
            let v = v?;
            if best.is_none_or(|(_, b)| better(v, b)) {
                best = Some((i, v));
            }
        }
        let order = orders[best.expect("at least one ordering").0].clone();
        let sol = chain_optimum(h, &order, budget)?;
        (order, sol)
    } else {
        let mut order = greedy_ordering(h);
        let mut sol = chain_optimum(h, &order, budget)?;
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..n_t - 1 {
                let mut cand = order.clone();
                cand.swap(i, i + 1);
                let s = chain_optimum(h, &cand, budget)?;
                if better(s.value, sol.value) {
                    order = cand;
                    sol = s;
                    improved = true;
                }
            }
        }
        (order, sol)
    };
    let mut out = solution_from_chain(model, &ordering, sol);
    out.exhaustive = exhaustive;
    if model.n_r() >= 2 {
        let holds = check_r_rank(model)?.holds;
        out.r_rank_holds = Some(holds);
        out.support_bound_ok = !holds || out.input.len() <= model.n_r() + 2;
    }
    Ok(out)
}

/// Independent optimum over all `2^n_T` binary points without the chain
/// restriction; units of `A^2`.
pub fn brute_force_max_trace(model: &ChannelModel) -> Result<f64> {
    if model.n_t() > 10 {
        return Err(Error::TooLarge(format!(
            "{} transmit antennas for the all-points oracle",
            model.n_t()
        )));
    }
    frank_wolfe::max_trace_all_points(model.h(), effective_alpha(model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn trace_of_simple_inputs() {
        let h = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]);
        let m = presets::model(h, 1.0, 1.5).unwrap();
        let one = DiscreteInput::new(vec![vec![1.0, 0.0, 1.0]], vec![1.0]).unwrap();
        assert_eq!(trace_cov(&m, &one), 0.0);
        let two = DiscreteInput::new(vec![vec![0.0; 3], vec![1.0; 3]], vec![0.5, 0.5]).unwrap();
        assert!((trace_cov(&m, &two) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_budget_is_degenerate() {
        let m = presets::model(presets::maxvar_2x4(), 1.0, 0.5).unwrap();
        let sol = chain_optimum(m.h(), &[0, 1, 2, 3], 0.0).unwrap();
        let s = solution_from_chain(&m, &[0, 1, 2, 3], sol);
        assert_eq!(s.value, 0.0);
        assert_eq!(s.input.points, vec![vec![0.0; 4]]);
    }

    #[test]
    fn row_four_chain() {
        let m = presets::model(presets::maxvar_2x4(), 1.0, 0.3).unwrap();
        let s = max_trace_chain(&m, &[0, 1, 2, 3]).unwrap();
        assert!((s.value - 6.014175).abs() < 1e-9);
        assert_eq!(s.input.points[1], vec![1.0, 1.0, 0.0, 0.0]);
        assert!((s.input.probs[0] - 0.85).abs() < 1e-9);
        assert!(s.constraint_binds);
    }

    #[test]
    fn rejects_bad_orderings() {
        let m = presets::model(presets::maxvar_2x4(), 1.0, 0.3).unwrap();
        assert!(max_trace_chain(&m, &[0, 1, 1, 3]).is_err());
        assert!(max_trace_chain(&m, &[0, 1, 2]).is_err());
    }

    #[test]
    fn r_rank_conditions() {
        let m = presets::model(presets::maxvar_2x4(), 1.0, 1.5).unwrap();
        assert!(check_r_rank(&m).unwrap().holds);
        let dup = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.3, 2.0, 2.0, 1.1]);
        let m = presets::model(dup, 1.0, 1.0).unwrap();
        let c = check_r_rank(&m).unwrap();
        assert!(!c.holds);
        assert!(c.witness.is_some());
        let miso = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
        let m = presets::model(miso, 1.0, 1.0).unwrap();
        assert!(check_r_rank(&m).is_err());
        assert_eq!(RMatrix::build(&presets::model(presets::maxvar_3x4(), 1.0, 1.0).unwrap())
            .unwrap()
            .rows
            .nrows(), 15);
    }

    #[test]
    fn reflection_keeps_trace() {
        let m = presets::model(presets::maxvar_2x4(), 2.0, 0.6).unwrap();
        let s = max_trace(&m).unwrap();
        let t = trace_cov(&m, &s.input);
        assert!((t / 4.0 - s.value).abs() < 1e-9);
        assert!((trace_cov(&m, &s.input.reflect(2.0)) - t).abs() < 1e-9);
    }
}
