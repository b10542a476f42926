//! Dense two-phase simplex for `min c^T x` s.t. `M x = b`, `0 <= x <= u`.
//!
//! Sizes here are a handful of rows, so a full tableau with Bland's rule is
//! both simple and exact enough. Upper bounds become explicit rows
//! `x_j + w_j = u`, which also provides half of the starting basis.

use nalgebra::{DMatrix, DVector};

use crate::channel::ChannelModel;
use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: DVector<f64>,
    pub objective: f64,
}

struct Tableau {
    t: DMatrix<f64>,
    basis: Vec<usize>,
    n: usize,
    m: usize,
}

impl Tableau {
    fn new(a: &DMatrix<f64>, b: &DVector<f64>, upper: f64) -> Tableau {
        let (m, n) = a.shape();
        let rows = m + n;
        let cols = 2 * n + m + 1;
        let rhs = cols - 1;
        let mut t = DMatrix::zeros(rows, cols);
        let mut basis = Vec::with_capacity(rows);
        for i in 0..m {
            let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                t[(i, j)] = sign * a[(i, j)];
            }
            t[(i, 2 * n + i)] = 1.0;
            t[(i, rhs)] = sign * b[i];
            basis.push(2 * n + i);
        }
        for j in 0..n {
            t[(m + j, j)] = 1.0;
            t[(m + j, n + j)] = 1.0;
            t[(m + j, rhs)] = upper;
            basis.push(n + j);
        }
        Tableau { t, basis, n, m }
    }

    fn rhs(&self) -> usize {
        self.t.ncols() - 1
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[(row, col)];
        let cols = self.t.ncols();
        for c in 0..cols {
            self.t[(row, c)] /= p;
        }
        for r in 0..self.t.nrows() {
            if r == row {
                continue;
            }
            let f = self.t[(r, col)];
            if f != 0.0 {
                for c in 0..cols {
                    let v = self.t[(row, c)];
                    self.t[(r, c)] -= f * v;
                }
                self.t[(r, col)] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Runs simplex iterations for the given cost over the allowed columns.
    /// Returns the objective value.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<f64> {
        let rhs = self.rhs();
        let rows = self.t.nrows();
        let max_iter = 50 * (rows + allowed) + 1000;
        for _ in 0..max_iter {
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut r = cost[j];
                for i in 0..rows {
                    r -= cost[self.basis[i]] * self.t[(i, j)];
                }
                if r < -1e-12 {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return Ok((0..rows)
                    .map(|i| cost[self.basis[i]] * self.t[(i, rhs)])
                    .sum());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..rows {
                let a = self.t[(i, col)];
                if a > PIVOT_EPS {
                    let ratio = self.t[(i, rhs)].max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best - 1e-15
                                || (ratio <= best + 1e-15 && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leave else {
                return Err(Error::NonConvergence("unbounded linear program".into()));
            };
            self.pivot(row, col);
        }
        Err(Error::NonConvergence("simplex iteration cap".into()))
    }

    fn phase_one(&mut self, scale: f64) -> Result<bool> {
        let n_cols = 2 * self.n + self.m;
        let mut cost = vec![0.0; n_cols];
        for c in cost.iter_mut().skip(2 * self.n) {
            *c = 1.0;
        }
        let infeas = self.optimize(&cost, n_cols)?;
        Ok(infeas <= 1e-9 * scale)
    }

    /// Pivots basic artificials out where possible; redundant rows keep
    /// their artificial at zero level, which is harmless.
    fn expel_artificials(&mut self) {
        let first_art = 2 * self.n;
        for i in 0..self.t.nrows() {
            if self.basis[i] >= first_art {
                if let Some(j) = (0..first_art)
                    .find(|&j| !self.basis.contains(&j) && self.t[(i, j)].abs() > 1e-9)
                {
                    self.pivot(i, j);
                }
            }
        }
    }

    fn x(&self) -> DVector<f64> {
        let rhs = self.rhs();
        let mut x = DVector::zeros(self.n);
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.t[(i, rhs)];
            }
        }
        x
    }
}

fn feasibility_scale(a: &DMatrix<f64>, b: &DVector<f64>, upper: f64) -> f64 {
    1.0 + b.amax() + upper * a.amax() * a.ncols() as f64
}

/// Solves `min cost^T x` over `{M x = b, 0 <= x <= upper}`.
pub fn solve_box_lp(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    upper: f64,
    cost: &[f64],
) -> Result<LpSolution> {
    let n = a.ncols();
    if cost.len() != n || b.len() != a.nrows() {
        return Err(Error::InvalidArgument("LP dimensions disagree".into()));
    }
    if !b.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite right-hand side".into()));
    }
    let mut tab = Tableau::new(a, b, upper);
    if !tab.phase_one(feasibility_scale(a, b, upper))? {
        return Err(Error::Infeasible);
    }
    tab.expel_artificials();
    let mut full = vec![0.0; 2 * n + a.nrows()];
    full[..n].copy_from_slice(cost);
    tab.optimize(&full, 2 * n)?;
    let x = tab.x().map(|v| v.clamp(0.0, upper));
    let objective = cost.iter().zip(x.iter()).map(|(c, v)| c * v).sum();
    Ok(LpSolution { x, objective })
}

/// Whether `{M x = b, 0 <= x <= upper}` is nonempty.
pub fn box_lp_feasible(a: &DMatrix<f64>, b: &DVector<f64>, upper: f64) -> bool {
    let mut tab = Tableau::new(a, b, upper);
    tab.phase_one(feasibility_scale(a, b, upper))
        .unwrap_or(false)
}

/// Least-`l1` preimage of `xbar` in the amplitude box, solved as an LP.
pub fn lp_oracle_min_energy(model: &ChannelModel, xbar: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let cost = vec![1.0; model.n_t()];
    let sol = solve_box_lp(model.h(), xbar, model.amplitude(), &cost)?;
    Ok((sol.x, sol.objective))
}
