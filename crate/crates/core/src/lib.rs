//! Capacity bounds, asymptotics, and optimal signaling structures for
//! optical MIMO intensity channels `Y = H x + Z` with more transmit than
//! receive antennas, per-antenna peak amplitude `A` and a total average
//! power `alpha * A`.
//!
//! The modules follow the computation pipeline:
//!
//! - [`channel`]: validation and reduction to the canonical form
//!   `n_T > n_R = rank(H)`.
//! - [`zonotope`]: the minimum-energy tiling of the image zonotope into
//!   parallelepipeds, minimum-energy preimages, and an LP cross-check.
//! - [`maxvar`]: maximization of the trace of `Cov(H X)`, which drives the
//!   low-SNR behavior.
//! - [`bounds`]: analytic lower and upper bounds and their asymptotes.
//! - [`mi`]: Monte-Carlo mutual information for discrete inputs and the
//!   numerical k-point lower bounds.
//! - [`reports`]: sweeps, tables, and plot-ready output files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channel;
pub mod error;
pub mod maxvar;
pub mod mi;
pub mod presets;
pub mod reports;
pub mod scalar;
pub mod zonotope;

pub use channel::{
    effective_alpha, reduce_channel, validate_channel, ChannelFile, ChannelForm, ChannelModel,
    ReductionReport,
};
pub use error::{Error, Result};
pub use zonotope::{build_decomposition, BasisCell, Decomposition, MinEnergyResult};
