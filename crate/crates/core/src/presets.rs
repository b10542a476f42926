//! Channel matrices used throughout the examples, tests, and reports.

use nalgebra::DMatrix;

use crate::channel::{validate_channel, ChannelModel};
use crate::error::Result;

fn rows(r: &[&[f64]]) -> DMatrix<f64> {
    DMatrix::from_fn(r.len(), r[0].len(), |i, j| r[i][j])
}

/// `[2.5 2 1; 1 2 2]`: the middle column carries weight sum 1.25.
pub fn tiling_a() -> DMatrix<f64> {
    rows(&[&[2.5, 2.0, 1.0], &[1.0, 2.0, 2.0]])
}

/// `[2.5 0.8 1; 1 0.8 2]`: the middle column carries weight sum 0.5.
pub fn tiling_b() -> DMatrix<f64> {
    rows(&[&[2.5, 0.8, 1.0], &[1.0, 0.8, 2.0]])
}

pub fn tiling_c() -> DMatrix<f64> {
    rows(&[&[7.0, 5.0, 2.0, 1.0], &[1.0, 2.0, 2.9, 3.0]])
}

pub fn tiling_d() -> DMatrix<f64> {
    rows(&[&[7.0, 5.0, 2.0, 1.0], &[1.0, 3.0, 2.9, 3.0]])
}

/// `[2.5 5 1; 1.2 2.4 2]`: second column is twice the first.
pub fn dependent_columns() -> DMatrix<f64> {
    rows(&[&[2.5, 5.0, 1.0], &[1.2, 2.4, 2.0]])
}

/// Channel with negative gains.
pub fn negative_entries() -> DMatrix<f64> {
    rows(&[&[-2.0, 7.0, 5.0, 2.0], &[-1.2, 1.0, 2.0, 2.9]])
}

/// `[2.5 1.6 1; 1 1.6 2]`: the middle column is an affine combination of
/// the outer two, a tie in the tiling rule.
pub fn tie_channel() -> DMatrix<f64> {
    rows(&[&[2.5, 1.6, 1.0], &[1.0, 1.6, 2.0]])
}

/// The six tiling illustrations, in order.
pub fn tiling_channels() -> Vec<(&'static str, DMatrix<f64>)> {
    vec![
        ("2x3-a", tiling_a()),
        ("2x3-b", tiling_b()),
        ("2x4-a", tiling_c()),
        ("2x4-b", tiling_d()),
        ("2x3-dependent", dependent_columns()),
        ("2x4-negative", negative_entries()),
    ]
}

/// `[1 1.5 3; 2 2 1]`, threshold ratio 1.4762.
pub fn bounds_2x3() -> DMatrix<f64> {
    rows(&[&[1.0, 1.5, 3.0], &[2.0, 2.0, 1.0]])
}

/// `[1.5 1 0.75 0.5; 0.5 0.75 1 1.5]`, threshold ratio 1.947.
pub fn bounds_2x4() -> DMatrix<f64> {
    rows(&[&[1.5, 1.0, 0.75, 0.5], &[0.5, 0.75, 1.0, 1.5]])
}

pub fn maxvar_2x4() -> DMatrix<f64> {
    rows(&[&[1.3, 0.6, 1.0, 0.1], &[2.1, 4.5, 0.7, 0.5]])
}

pub fn maxvar_3x4() -> DMatrix<f64> {
    rows(&[
        &[0.9, 3.2, 1.0, 2.1],
        &[0.5, 3.5, 1.7, 2.5],
        &[0.7, 1.1, 1.1, 1.3],
    ])
}

/// Convenience: a validated model for a preset matrix.
pub fn model(h: DMatrix<f64>, amplitude: f64, alpha: f64) -> Result<ChannelModel> {
    validate_channel(&h, amplitude, alpha)
}

/// Looks up a preset by name (used by the command line).
pub fn by_name(name: &str) -> Option<DMatrix<f64>> {
    Some(match name {
        "2x3-a" => tiling_a(),
        "2x3-b" => tiling_b(),
        "2x4-a" => tiling_c(),
        "2x4-b" => tiling_d(),
        "2x3-dependent" => dependent_columns(),
        "2x4-negative" => negative_entries(),
        "2x3-tie" => tie_channel(),
        "bounds-2x3" => bounds_2x3(),
        "bounds-2x4" => bounds_2x4(),
        "maxvar-2x4" => maxvar_2x4(),
        "maxvar-3x4" => maxvar_3x4(),
        _ => return None,
    })
}

pub const PRESET_NAMES: &[&str] = &[
    "2x3-a",
    "2x3-b",
    "2x4-a",
    "2x4-b",
    "2x3-dependent",
    "2x4-negative",
    "2x3-tie",
    "bounds-2x3",
    "bounds-2x4",
    "maxvar-2x4",
    "maxvar-3x4",
];
