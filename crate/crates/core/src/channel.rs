//! Channel instances: validation, reduction to the canonical wide form, and
//! power-constraint normalization.
//!
//! A channel `Y = H x + Z` is canonical when `n_T > n_R = rank(H)`. Tall or
//! rank-deficient matrices are brought into that form by projecting the
//! output onto the left singular vectors of the nonzero singular values.
//! Correlated Gaussian noise is whitened first with the Cholesky factor of
//! its covariance.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Singular values below `DEFAULT_RANK_TOL * sigma_max` count as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Structural classification of a channel matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelForm {
    /// `n_T > n_R` and `rank(H) = n_R`.
    Canonical,
    /// Tall or rank-deficient; run [`reduce_channel`] first.
    NeedsReduction,
    /// `rank(H) = n_R = n_T`; outside the scope of the bounds in this crate.
    SquareFullRank,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    h: DMatrix<f64>,
    amplitude: f64,
    alpha: f64,
    rank: usize,
    form: ChannelForm,
}

impl ChannelModel {
    /// Channel matrix, `n_R x n_T`.
    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn shape(&self) -> (usize, usize) {
        self.h.shape()
    }

    pub fn n_t(&self) -> usize {
        self.h.ncols()
    }

    pub fn n_r(&self) -> usize {
        self.h.nrows()
    }

    /// Peak amplitude `A` of every transmit antenna.
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Average-to-peak power ratio `alpha = E / A`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn form(&self) -> ChannelForm {
        self.form
    }

    pub fn is_canonical(&self) -> bool {
        self.form == ChannelForm::Canonical
    }

    /// Same channel matrix with a different peak amplitude.
    pub fn with_amplitude(&self, amplitude: f64) -> Result<ChannelModel> {
        check_power(amplitude, self.alpha)?;
        Ok(ChannelModel {
            amplitude,
            ..self.clone()
        })
    }

    /// Same channel matrix with a different average-to-peak ratio.
    pub fn with_alpha(&self, alpha: f64) -> Result<ChannelModel> {
        check_power(self.amplitude, alpha)?;
        Ok(ChannelModel {
            alpha,
            ..self.clone()
        })
    }

    pub(crate) fn require_canonical(&self) -> Result<()> {
        match self.form {
            ChannelForm::Canonical => Ok(()),
            ChannelForm::SquareFullRank => Err(Error::SquareFullRank(self.n_t())),
            ChannelForm::NeedsReduction => Err(Error::NotCanonical),
        }
    }
}

fn check_power(amplitude: f64, alpha: f64) -> Result<()> {
    if !(amplitude > 0.0 && amplitude.is_finite() && alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::NonPositivePower { amplitude, alpha });
    }
    Ok(())
}

/// Numerical rank with singular values thresholded relative to the largest.
pub fn numerical_rank(h: &DMatrix<f64>, rel_tol: f64) -> Result<usize> {
    let sv = h.singular_values();
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    if !(smax > f64::MIN_POSITIVE) {
        return Err(Error::ZeroMatrix);
    }
    Ok(sv.iter().filter(|&&s| s > rel_tol * smax).count())
}

/// Checks a channel instance and classifies it.
pub fn validate_channel(h: &DMatrix<f64>, amplitude: f64, alpha: f64) -> Result<ChannelModel> {
    validate_channel_with_tol(h, amplitude, alpha, DEFAULT_RANK_TOL)
}

pub fn validate_channel_with_tol(
    h: &DMatrix<f64>,
    amplitude: f64,
    alpha: f64,
    rank_tol: f64,
) -> Result<ChannelModel> {
    if h.is_empty() {
        return Err(Error::InvalidArgument("channel matrix is empty".into()));
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("channel matrix has non-finite entries".into()));
    }
    check_power(amplitude, alpha)?;
    let rank = numerical_rank(h, rank_tol)?;
    let (n_r, n_t) = h.shape();
    let form = if n_t > n_r && rank == n_r {
        ChannelForm::Canonical
    } else if rank == n_r && n_r == n_t {
        ChannelForm::SquareFullRank
    } else {
        ChannelForm::NeedsReduction
    };
    Ok(ChannelModel {
        h: h.clone(),
        amplitude,
        alpha,
        rank,
        form,
    })
}

/// Outcome of [`reduce_channel`].
#[derive(Debug, Clone)]
pub struct ReductionReport {
    pub original_rank: usize,
    /// Rows of `U^T` kept from the SVD; applied to the (whitened) output.
    /// Orthonormal rows. Identity when no output was discarded.
    pub transform: DMatrix<f64>,
    /// `S^{-T}` with `K = S^T S`, when a noise covariance was supplied.
    pub whitening: Option<DMatrix<f64>>,
    pub reduced: ChannelModel,
    pub whitened: bool,
    pub square_full_rank: bool,
}

/// Whitens (optionally) and drops output dimensions that carry no signal.
///
/// The reduced matrix has `n_R = rank`. When the rank also equals `n_T`
/// the result is flagged `square_full_rank` and is rejected by every bound.
pub fn reduce_channel(
    model: &ChannelModel,
    noise_cov: Option<&DMatrix<f64>>,
) -> Result<ReductionReport> {
    reduce_channel_with_tol(model, noise_cov, DEFAULT_RANK_TOL)
}

pub fn reduce_channel_with_tol(
    model: &ChannelModel,
    noise_cov: Option<&DMatrix<f64>>,
    rank_tol: f64,
) -> Result<ReductionReport> {
    let n_r = model.n_r();
    let (h, whitening) = match noise_cov {
        Some(k) => {
            if k.shape() != (n_r, n_r) {
                return Err(Error::InvalidArgument(format!(
                    "noise covariance must be {n_r}x{n_r}, got {}x{}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            let asym = (k - k.transpose()).abs().max();
            if asym > 1e-12 * (1.0 + k.abs().max()) {
                return Err(Error::NotPositiveDefinite);
            }
            // K = L L^T, so S = L^T and S^{-T} = L^{-1}.
            let chol = k.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
            let l_inv = chol
                .l()
                .try_inverse()
                .ok_or(Error::NotPositiveDefinite)?;
            (&l_inv * model.h(), Some(l_inv))
        }
        None => (model.h().clone(), None),
    };

    let rank = match numerical_rank(&h, rank_tol) {
        Ok(r) => r,
        Err(Error::ZeroMatrix) => return Err(Error::DegenerateChannel),
        Err(e) => return Err(e),
    };
    if rank == 0 {
        return Err(Error::DegenerateChannel);
    }

    let (transform, reduced_h) = if rank == n_r {
        (DMatrix::identity(n_r, n_r), h)
    } else {
        let svd = h.clone().svd(true, false);
        let u = svd.u.as_ref().expect("left singular vectors requested");
        // nalgebra does not sort singular values; pick the r largest.
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| {
            svd.singular_values[b]
                .partial_cmp(&svd.singular_values[a])
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut t = DMatrix::zeros(rank, n_r);
        for (row, &col) in order.iter().take(rank).enumerate() {
            let mut uc = u.column(col).clone_owned();
            // Sign convention: largest-magnitude entry positive.
            let imax = uc.iamax();
            if uc[imax] < 0.0 {
                uc.neg_mut();
            }
            t.row_mut(row).copy_from(&uc.transpose());
        }
        let hr = &t * &h;
        (t, hr)
    };

    let reduced =
        validate_channel_with_tol(&reduced_h, model.amplitude(), model.alpha(), rank_tol)?;
    let square_full_rank = reduced.form() == ChannelForm::SquareFullRank;
    Ok(ReductionReport {
        original_rank: rank,
        transform,
        whitening,
        reduced,
        whitened: noise_cov.is_some(),
        square_full_rank,
    })
}

/// Average-to-peak ratio actually in force: the average constraint is
/// inactive above `n_T / 2`.
pub fn effective_alpha(model: &ChannelModel) -> f64 {
    model.alpha().min(model.n_t() as f64 / 2.0)
}

/// JSON channel document: `{"H": [[..]], "A": .., "alpha": .., "noise_cov": [[..]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    #[serde(rename = "H")]
    pub h: Vec<Vec<f64>>,
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_cov: Option<Vec<Vec<f64>>>,
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map(|r| r.len()).unwrap_or(0);
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("matrix is empty".into()));
    }
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Parse("matrix rows have unequal lengths".into()));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

pub(crate) fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().cloned().collect())
        .collect()
}

impl ChannelFile {
    pub fn from_json(text: &str) -> Result<ChannelFile> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<ChannelFile> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_model(model: &ChannelModel) -> ChannelFile {
        ChannelFile {
            h: rows_of(model.h()),
            amplitude: model.amplitude(),
            alpha: model.alpha(),
            noise_cov: None,
        }
    }

    /// Validates, whitens and reduces as needed; returns a canonical model.
    pub fn into_canonical(&self) -> Result<ChannelModel> {
        let h = matrix_from_rows(&self.h)?;
        let model = validate_channel(&h, self.amplitude, self.alpha)?;
        let cov = self
            .noise_cov
            .as_ref()
            .map(|rows| matrix_from_rows(rows))
            .transpose()?;
        if model.is_canonical() && cov.is_none() {
            return Ok(model);
        }
        let report = reduce_channel(&model, cov.as_ref())?;
        report.reduced.require_canonical()?;
        Ok(report.reduced)
    }
}
