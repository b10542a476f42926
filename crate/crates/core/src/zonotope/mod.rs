//! Minimum-energy tiling of the image zonotope `R(H) = {H x : x in [0, A]^n_T}`.
//!
//! Every basis set `U` (a choice of `n_R` linearly independent columns)
//! contributes one parallelepiped `v_U + H_U [0, A]^n_R`. The offsets `v_U`
//! switch the remaining antennas fully on or off depending on whether their
//! column is "expensive" (`a_{U,j} = 1^T H_U^{-1} h_j > 1`) or "cheap" to
//! emulate with the columns of `U`. The shifted cells tile `R(H)`, and
//! within each cell the least-`l1` preimage of `xbar` is affine in `xbar`.

mod lp;
mod volume;

use std::collections::BTreeMap;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::channel::ChannelModel;
use crate::error::{Error, Result};

pub use lp::{box_lp_feasible, lp_oracle_min_energy, solve_box_lp, LpSolution};
pub use volume::{zonotope_volume_mc, VolumeEstimate};

/// `|det H_U| > TOL_DET * (max column norm)^n_R` marks a basis set.
pub const TOL_DET: f64 = 1e-10;
/// `|a_{U,j} - 1| <= TOL_TIE` counts as a tie.
pub const TOL_TIE: f64 = 1e-9;
/// Cell-membership slack on `beta`, relative to `max(A, 1)`.
pub const TOL_BOX: f64 = 1e-9;
/// Second-pass slack used before declaring a point outside.
pub const TOL_BOX_LOOSE: f64 = 1e-6;

/// One parallelepiped of the tiling.
#[derive(Debug, Clone)]
pub struct BasisCell {
    /// Sorted 0-based column indices.
    pub indices: Vec<usize>,
    pub h_u: DMatrix<f64>,
    pub h_u_inv: DMatrix<f64>,
    pub det_abs: f64,
    /// `H_U^{-1} h_j` for every column `j` outside `U`.
    pub gamma: BTreeMap<usize, DVector<f64>>,
    /// Component sums of `gamma`.
    pub a: BTreeMap<usize, f64>,
    /// Which outside antennas sit at `A` (true) or `0` (false).
    pub g: BTreeMap<usize, bool>,
    /// Offset `A * sum_j g_j h_j`.
    pub v: DVector<f64>,
    /// Number of outside antennas switched on.
    pub s: usize,
    /// Volume share `|det H_U| / V_H`.
    pub q: f64,
    /// Row norms of `H_U^{-1}`.
    pub sigma: Vec<f64>,
}

impl BasisCell {
    /// Complement of `U`, ascending.
    pub fn complement(&self) -> impl Iterator<Item = usize> + '_ {
        self.g.keys().copied()
    }

    /// `beta = H_U^{-1}(xbar - v_U)`.
    pub fn beta(&self, xbar: &DVector<f64>) -> DVector<f64> {
        &self.h_u_inv * (xbar - &self.v)
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    model: ChannelModel,
    cells: Vec<BasisCell>,
    v_h: f64,
    alpha_th: f64,
    tie_break: bool,
}

/// Outcome of [`Decomposition::min_energy_input`].
#[derive(Debug, Clone, Serialize)]
pub struct MinEnergyResult {
    pub x_min: Vec<f64>,
    pub cell_index: usize,
    pub beta: Vec<f64>,
    pub energy: f64,
}

/// All size-`n_R` column subsets with nonzero determinant, lexicographic.
pub fn enumerate_bases(model: &ChannelModel) -> Result<Vec<Vec<usize>>> {
    model.require_canonical()?;
    let h = model.h();
    let n_r = model.n_r();
    let max_norm = h
        .column_iter()
        .map(|c| c.norm())
        .fold(0.0_f64, f64::max);
    let thresh = TOL_DET * max_norm.powi(n_r as i32);
    let bases: Vec<Vec<usize>> = (0..model.n_t())
        .combinations(n_r)
        .filter(|u| h.select_columns(u).determinant().abs() > thresh)
        .collect();
    if bases.is_empty() {
        return Err(Error::NoBasis);
    }
    Ok(bases)
}

/// Tie rule for an outside column `j` of cell `U` with `a_{U,j}` within
/// tolerance of 1.
///
/// Equivalent to perturbing column `i` by a factor `1 + eps_i` with
/// `eps_1 >> eps_2 >> ...`: the sign of `a - 1` is then decided by the
/// lowest-indexed column among `U + {j}` whose first-order coefficient is
/// nonzero (`+1` for `j`, `-gamma_l` for the `l`-th member of `U`). When the
/// first member of `U` decides, this reduces to "switch on iff the first
/// component of `gamma_{U,j}` is negative"; outside columns that precede
/// `U` are switched on whenever `a >= 1`.
fn tie_rule(indices: &[usize], j: usize, gamma: &DVector<f64>) -> bool {
    let mut order: Vec<(usize, f64)> = indices
        .iter()
        .enumerate()
        .map(|(l, &i)| (i, -gamma[l]))
        .collect();
    order.push((j, 1.0));
    order.sort_by_key(|&(i, _)| i);
    order
        .into_iter()
        .find(|&(_, c)| c.abs() > TOL_TIE)
        .map(|(_, c)| c > 0.0)
        .unwrap_or(false)
}

/// Builds the full minimum-energy tiling.
pub fn build_decomposition(model: &ChannelModel) -> Result<Decomposition> {
    let bases = enumerate_bases(model)?;
    let h = model.h();
    let n_t = model.n_t();
    let amp = model.amplitude();

    struct Partial {
        indices: Vec<usize>,
        h_u: DMatrix<f64>,
        h_u_inv: DMatrix<f64>,
        det_abs: f64,
        gamma: BTreeMap<usize, DVector<f64>>,
        a: BTreeMap<usize, f64>,
    }

    let mut partials = Vec::with_capacity(bases.len());
    for u in bases {
        let h_u = h.select_columns(&u);
        let det_abs = h_u.determinant().abs();
        let h_u_inv = h_u.clone().try_inverse().ok_or(Error::NoBasis)?;
        let mut gamma = BTreeMap::new();
        let mut a = BTreeMap::new();
        for j in (0..n_t).filter(|j| !u.contains(j)) {
            let gj = &h_u_inv * h.column(j);
            a.insert(j, gj.sum());
            gamma.insert(j, gj);
        }
        partials.push(Partial {
            indices: u,
            h_u,
            h_u_inv,
            det_abs,
            gamma,
            a,
        });
    }

    let tie_break = partials
        .iter()
        .any(|p| p.a.values().any(|&a| (a - 1.0).abs() <= TOL_TIE));
    let v_h: f64 = partials.iter().map(|p| p.det_abs).sum();

    let cells: Vec<BasisCell> = partials
        .into_iter()
        .map(|p| {
            let g: BTreeMap<usize, bool> = p
                .a
                .iter()
                .map(|(&j, &a)| {
                    let on = if !tie_break {
                        a > 1.0
                    } else if (a - 1.0).abs() <= TOL_TIE {
                        tie_rule(&p.indices, j, &p.gamma[&j])
                    } else {
                        a > 1.0
                    };
                    (j, on)
                })
                .collect();
            let v = offset(h, &g, amp);
            let s = g.values().filter(|&&on| on).count();
            let sigma = p
                .h_u_inv
                .row_iter()
                .map(|r| r.norm())
                .collect::<Vec<_>>();
            BasisCell {
                q: p.det_abs / v_h,
                indices: p.indices,
                h_u: p.h_u,
                h_u_inv: p.h_u_inv,
                det_abs: p.det_abs,
                gamma: p.gamma,
                a: p.a,
                g,
                v,
                s,
                sigma,
            }
        })
        .collect();

    let alpha_th =
        model.n_r() as f64 / 2.0 + cells.iter().map(|c| c.s as f64 * c.q).sum::<f64>();
    Ok(Decomposition {
        model: model.clone(),
        cells,
        v_h,
        alpha_th,
        tie_break,
    })
}

fn offset(h: &DMatrix<f64>, g: &BTreeMap<usize, bool>, amp: f64) -> DVector<f64> {
    let mut v = DVector::zeros(h.nrows());
    for (&j, &on) in g {
        if on {
            v += h.column(j);
        }
    }
    v * amp
}

impl Decomposition {
    pub fn model(&self) -> &ChannelModel {
        &self.model
    }

    pub fn cells(&self) -> &[BasisCell] {
        &self.cells
    }

    pub fn amplitude(&self) -> f64 {
        self.model.amplitude()
    }

    pub fn n_r(&self) -> usize {
        self.model.n_r()
    }

    pub fn n_t(&self) -> usize {
        self.model.n_t()
    }

    /// `V_H = sum_U |det H_U|`; the zonotope volume is `A^n_R V_H`.
    pub fn v_h(&self) -> f64 {
        self.v_h
    }

    /// Threshold ratio above which a uniform image is power-feasible.
    pub fn alpha_th(&self) -> f64 {
        self.alpha_th
    }

    /// Whether the tie-breaking rule was needed.
    pub fn used_tie_break(&self) -> bool {
        self.tie_break
    }

    /// Cell volume shares `q_U`, in cell order.
    pub fn q(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.q).collect()
    }

    /// Switched-on counts `s_U`, in cell order.
    pub fn s(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.s as f64).collect()
    }

    /// Zonotope volume `A^n_R V_H`.
    pub fn volume(&self) -> f64 {
        self.amplitude().powi(self.n_r() as i32) * self.v_h
    }

    /// The same tiling for another peak amplitude: only the offsets scale.
    pub fn with_amplitude(&self, amplitude: f64) -> Result<Decomposition> {
        let model = self.model.with_amplitude(amplitude)?;
        let cells = self
            .cells
            .iter()
            .map(|c| BasisCell {
                v: offset(model.h(), &c.g, amplitude),
                ..c.clone()
            })
            .collect();
        Ok(Decomposition {
            model,
            cells,
            ..self.clone()
        })
    }

    /// Same tiling, different average-to-peak ratio on the stored model.
    pub fn with_alpha(&self, alpha: f64) -> Result<Decomposition> {
        Ok(Decomposition {
            model: self.model.with_alpha(alpha)?,
            ..self.clone()
        })
    }

    fn box_slack(&self, tol: f64) -> f64 {
        tol * self.amplitude().max(1.0)
    }

    fn find_cell(&self, xbar: &DVector<f64>, tol: f64) -> Option<(usize, DVector<f64>)> {
        let amp = self.amplitude();
        let slack = self.box_slack(tol);
        self.cells.iter().enumerate().find_map(|(i, c)| {
            let beta = c.beta(xbar);
            beta.iter()
                .all(|&b| b >= -slack && b <= amp + slack)
                .then_some((i, beta))
        })
    }

    /// First cell (lexicographic in `U`) whose parallelepiped holds `xbar`.
    pub fn locate(&self, xbar: &DVector<f64>) -> Result<usize> {
        self.locate_with_beta(xbar).map(|(i, _)| i)
    }

    /// Cell index together with the local coordinates `beta`.
    pub fn locate_with_beta(&self, xbar: &DVector<f64>) -> Result<(usize, DVector<f64>)> {
        if xbar.len() != self.n_r() {
            return Err(Error::InvalidArgument(format!(
                "point has dimension {}, expected {}",
                xbar.len(),
                self.n_r()
            )));
        }
        self.find_cell(xbar, TOL_BOX)
            .or_else(|| self.find_cell(xbar, TOL_BOX_LOOSE))
            .ok_or(Error::OutsideZonotope)
    }

    /// Indices of every cell holding `xbar` at the strict tolerance.
    pub fn containing_cells(&self, xbar: &DVector<f64>) -> Vec<usize> {
        let amp = self.amplitude();
        let slack = self.box_slack(TOL_BOX);
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                c.beta(xbar)
                    .iter()
                    .all(|&b| b >= -slack && b <= amp + slack)
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Least-`l1` input in `[0, A]^n_T` with `H x = xbar`.
    pub fn min_energy_input(&self, xbar: &DVector<f64>) -> Result<MinEnergyResult> {
        let (idx, beta) = self.locate_with_beta(xbar)?;
        let cell = &self.cells[idx];
        let amp = self.amplitude();
        let mut x = vec![0.0; self.n_t()];
        for (&j, &on) in &cell.g {
            x[j] = if on { amp } else { 0.0 };
        }
        for (l, &i) in cell.indices.iter().enumerate() {
            x[i] = beta[l].clamp(0.0, amp);
        }
        let energy = x.iter().sum();
        Ok(MinEnergyResult {
            x_min: x,
            cell_index: idx,
            beta: beta.iter().cloned().collect(),
            energy,
        })
    }

    /// Minimum-energy cost `A s_U + ||beta||_1` of an image point.
    pub fn cost(&self, xbar: &DVector<f64>) -> Result<f64> {
        self.min_energy_input(xbar).map(|r| r.energy)
    }

    /// Draws `xbar` uniformly over `R(H)`: cell with probability `q_U`,
    /// then `beta` uniform on `[0, A]^n_R`. Returns (cell, beta, xbar).
    pub fn sample_uniform<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
    ) -> (usize, DVector<f64>, DVector<f64>) {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut idx = self.cells.len() - 1;
        for (i, c) in self.cells.iter().enumerate() {
            acc += c.q;
            if u < acc {
                idx = i;
                break;
            }
        }
        let amp = self.amplitude();
        let cell = &self.cells[idx];
        let beta = DVector::from_fn(self.n_r(), |_, _| amp * rng.random::<f64>());
        let xbar = &cell.v + &cell.h_u * &beta;
        (idx, beta, xbar)
    }

    /// Parallelogram outlines (closed, blank line between cells) as two
    /// whitespace-separated columns. Only defined for `n_R = 2`.
    pub fn tikz_data(&self) -> Result<String> {
        if self.n_r() != 2 {
            return Err(Error::InvalidArgument(
                "vertex lists are only produced for two receive antennas".into(),
            ));
        }
        let amp = self.amplitude();
        let mut out = String::new();
        for (k, c) in self.cells.iter().enumerate() {
            if k > 0 {
                out.push('\n');
            }
            let a = c.h_u.column(0) * amp;
            let b = c.h_u.column(1) * amp;
            let corners = [
                c.v.clone(),
                &c.v + &a,
                &c.v + &a + &b,
                &c.v + &b,
                c.v.clone(),
            ];
            for p in corners {
                out.push_str(&format!(
                    "{} {}\n",
                    crate::reports::fmt_sig(p[0]),
                    crate::reports::fmt_sig(p[1])
                ));
            }
        }
        Ok(out)
    }

    /// JSON view with 1-based antenna indices.
    pub fn to_json(&self) -> serde_json::Value {
        let cells: Vec<serde_json::Value> = self
            .cells
            .iter()
            .map(|c| {
                let g: BTreeMap<String, u8> = c
                    .g
                    .iter()
                    .map(|(&j, &on)| ((j + 1).to_string(), on as u8))
                    .collect();
                serde_json::json!({
                    "U": c.indices.iter().map(|i| i + 1).collect::<Vec<_>>(),
                    "g": g,
                    "v": c.v.iter().cloned().collect::<Vec<_>>(),
                    "s": c.s,
                    "q": c.q,
                    "sigma": c.sigma,
                    "det_abs": c.det_abs,
                })
            })
            .collect();
        serde_json::json!({
            "A": self.amplitude(),
            "cells": cells,
            "V_H": self.v_h,
            "alpha_th": self.alpha_th,
            "tie_break": self.tie_break,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn decomp(h: DMatrix<f64>) -> Decomposition {
        build_decomposition(&presets::model(h, 1.0, 0.9).unwrap()).unwrap()
    }

    #[test]
    fn bases_of_reference_channels() {
        let m = presets::model(presets::tiling_a(), 1.0, 0.9).unwrap();
        assert_eq!(
            enumerate_bases(&m).unwrap(),
            vec![vec![0, 1], vec![0, 2], vec![1, 2]]
        );
        let m = presets::model(presets::dependent_columns(), 1.0, 0.9).unwrap();
        assert_eq!(enumerate_bases(&m).unwrap(), vec![vec![0, 2], vec![1, 2]]);
        let h = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]);
        let m = presets::model(h, 1.0, 0.9).unwrap();
        assert_eq!(enumerate_bases(&m).unwrap().len(), 3);
    }

    #[test]
    fn expensive_middle_column_is_switched_on() {
        let d = decomp(presets::tiling_a());
        let c13 = &d.cells()[1];
        assert_eq!(c13.indices, vec![0, 2]);
        let g = &c13.gamma[&1];
        assert!((g[0] - 0.5).abs() < 1e-12 && (g[1] - 0.75).abs() < 1e-12);
        assert!((c13.a[&1] - 1.25).abs() < 1e-12);
        assert!(c13.g[&1]);
        assert_eq!(c13.s, 1);
        assert!((&c13.v - presets::tiling_a().column(1)).norm() < 1e-12);
        assert_eq!(d.cells()[0].s, 0);
        assert_eq!(d.cells()[2].s, 0);
        assert!(!d.used_tie_break());
        assert!((d.v_h() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn cheap_middle_column_stays_off() {
        let d = decomp(presets::tiling_b());
        let h = presets::tiling_b();
        let c13 = &d.cells()[1];
        let g = &c13.gamma[&1];
        assert!((g[0] - 0.2).abs() < 1e-12 && (g[1] - 0.3).abs() < 1e-12);
        assert!((c13.a[&1] - 0.5).abs() < 1e-12);
        assert_eq!(c13.v.norm(), 0.0);
        // {1,2} is shifted by h_3 and {2,3} by h_1.
        assert!((&d.cells()[0].v - h.column(2)).norm() < 1e-12);
        assert!((&d.cells()[2].v - h.column(0)).norm() < 1e-12);
    }

    #[test]
    fn threshold_of_bounds_channel() {
        let d = decomp(presets::bounds_2x3());
        assert!((d.v_h() - 10.5).abs() < 1e-12);
        let s: Vec<usize> = d.cells().iter().map(|c| c.s).collect();
        assert_eq!(s, vec![0, 1, 0]);
        assert!((d.cells()[1].a[&1] - 1.1).abs() < 1e-12);
        assert!((d.alpha_th() - (1.0 + 5.0 / 10.5)).abs() < 1e-12);
    }

    #[test]
    fn tie_channel_takes_tie_path_and_tiles() {
        let d = decomp(presets::tie_channel());
        assert!(d.used_tie_break());
        let h = presets::tie_channel();
        // Tie resolves like the cheap-column case.
        assert_eq!(d.cells()[1].v.norm(), 0.0);
        assert!((&d.cells()[0].v - h.column(2)).norm() < 1e-12);
        assert!((&d.cells()[2].v - h.column(0)).norm() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let x = DVector::from_fn(3, |_, _| rng.random::<f64>());
            let xbar = &h * &x;
            assert_eq!(d.containing_cells(&xbar).len(), 1);
            let r = d.min_energy_input(&xbar).unwrap();
            assert!(r.energy <= x.sum() + 1e-9);
        }
    }

    #[test]
    fn locate_edge_cases() {
        let d = decomp(presets::tiling_a());
        let h = presets::tiling_a();
        let xbar = &h * DVector::from_vec(vec![0.5, 0.5, 0.5]);
        assert!((xbar[0] - 2.75).abs() < 1e-12 && (xbar[1] - 2.5).abs() < 1e-12);
        let i = d.locate(&xbar).unwrap();
        assert_eq!(d.locate(&xbar).unwrap(), i);
        let origin = DVector::zeros(2);
        let i0 = d.locate(&origin).unwrap();
        assert_eq!(d.cells()[i0].v.norm(), 0.0);
        assert_eq!(i0, 0);
        let far = DVector::from_vec(vec![100.0, 100.0]);
        assert_eq!(d.locate(&far), Err(Error::OutsideZonotope));
    }

    #[test]
    fn min_energy_forms_of_example() {
        let d = decomp(presets::tiling_a());
        let h = presets::tiling_a();
        // Interior of the unshifted {1,2} cell.
        let xbar = &h.select_columns(&[0, 1]) * DVector::from_vec(vec![0.3, 0.6]);
        let r = d.min_energy_input(&xbar).unwrap();
        assert_eq!(r.x_min[2], 0.0);
        assert!((r.x_min[0] - 0.3).abs() < 1e-12 && (r.x_min[1] - 0.6).abs() < 1e-12);
        // Interior of h_2 + D_{1,3}.
        let xbar = h.column(1) + &h.select_columns(&[0, 2]) * DVector::from_vec(vec![0.4, 0.7]);
        let r = d.min_energy_input(&xbar).unwrap();
        assert_eq!(r.x_min[1], 1.0);
        assert!((r.energy - 2.1).abs() < 1e-12);
    }

    #[test]
    fn rescaling_moves_offsets_only() {
        let d = decomp(presets::tiling_a());
        let d5 = d.with_amplitude(5.0).unwrap();
        assert!((&d5.cells()[1].v - &d.cells()[1].v * 5.0).norm() < 1e-12);
        assert_eq!(d5.alpha_th(), d.alpha_th());
        assert!((d5.volume() - 25.0 * 9.0).abs() < 1e-9);
    }

    #[test]
    fn tikz_and_json_outputs() {
        let d = decomp(presets::tiling_a());
        let t = d.tikz_data().unwrap();
        assert_eq!(t.lines().filter(|l| !l.is_empty()).count(), 15);
        let j = d.to_json();
        assert_eq!(j["cells"][1]["U"], serde_json::json!([1, 3]));
        assert_eq!(j["cells"][1]["g"]["2"], 1);
        assert_eq!(j["V_H"], 9.0);
    }
}
