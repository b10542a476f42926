//! Sweeps, tables, and plot-ready output files.
//!
//! Numbers are written with nine significant digits in a fixed format and
//! LF line endings, and parallel work is collected in grid order, so the
//! same configuration always produces the same bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::bounds::{self, evaluate_bounds, unit_max_trace, BoundReport};
use crate::channel::{effective_alpha, validate_channel, ChannelFile};
use crate::error::{Error, Result};
use crate::maxvar::max_trace;
use crate::mi::{k_point_lower_bound_warm, KPointBudget, KPointResult};
use crate::presets;
use crate::scalar::db_to_amplitude;
use crate::zonotope::{build_decomposition, Decomposition};

/// `%.9g`-style formatting.
pub fn fmt_sig(v: f64) -> String {
    fmt_g(v, 9)
}

fn fmt_g(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mant, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_default()
}

/// Two whitespace-separated columns, one pair per line.
pub fn dat_text(pairs: &[(f64, f64)]) -> String {
    let mut out = String::new();
    for (x, y) in pairs {
        writeln!(out, "{} {}", fmt_sig(*x), fmt_sig(*y)).expect("string write");
    }
    out
}

/// Which bounds a sweep reports; unselected columns are left empty.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundSelection {
    pub lb_uniform: bool,
    pub lb_exp: bool,
    pub ub_peak: bool,
    pub ub_mu: bool,
    pub ub_mu_delta: bool,
    pub ub_trace: bool,
}

impl Default for BoundSelection {
    fn default() -> Self {
        BoundSelection {
            lb_uniform: true,
            lb_exp: true,
            ub_peak: true,
            ub_mu: true,
            ub_mu_delta: true,
            ub_trace: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub channel: ChannelFile,
    /// Where the channel came from, for the manifest.
    pub channel_source: Option<PathBuf>,
    pub alphas: Vec<f64>,
    pub a_db_min: f64,
    pub a_db_max: f64,
    pub steps: usize,
    pub selection: BoundSelection,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
}

impl SweepConfig {
    pub fn new(channel: ChannelFile, alphas: Vec<f64>, a_db_min: f64, a_db_max: f64, steps: usize) -> SweepConfig {
        SweepConfig {
            channel,
            channel_source: None,
            alphas,
            a_db_min,
            a_db_max,
            steps,
            selection: BoundSelection::default(),
            out_dir: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidArgument(format!(
                "a sweep needs at least 2 grid points, got {}",
                self.steps
            )));
        }
        if !(self.a_db_max > self.a_db_min) || !self.a_db_min.is_finite() || !self.a_db_max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "amplitude grid [{}, {}] dB is not increasing",
                self.a_db_min, self.a_db_max
            )));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::InvalidArgument(
                "alpha values must be given and positive".into(),
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let span = self.a_db_max - self.a_db_min;
        (0..self.steps)
            .map(|i| self.a_db_min + span * i as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CellFailure {
    pub alpha: f64,
    pub a_db: f64,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    /// Successful cells, grouped by alpha in config order, then by grid.
    pub reports: Vec<BoundReport>,
    /// The same reports split by requested alpha.
    pub by_alpha: Vec<(f64, Vec<BoundReport>)>,
    pub failures: Vec<CellFailure>,
    pub alpha_th: f64,
    pub v_h: f64,
}

fn alpha_tag(alpha: f64) -> String {
    format!("alpha{}", fmt_sig(alpha))
}

type Column = fn(&BoundReport) -> Option<f64>;

pub const CSV_HEADER: &str = "A_dB,lb_uniform,lb_exp,ub_peak,ub_mu,ub_mu_delta,ub_trace,nu";

/// CSV text for one alpha.
pub fn bounds_csv(reports: &[BoundReport], sel: &BoundSelection) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let pick = |on: bool, v: Option<f64>| if on { opt(v) } else { String::new() };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_sig(r.a_db),
            pick(sel.lb_uniform, r.lb_uniform),
            pick(sel.lb_exp, r.lb_exp),
            pick(sel.ub_peak, Some(r.ub_peak)),
            pick(sel.ub_mu, r.ub_mu),
            pick(sel.ub_mu_delta, r.ub_mu_delta),
            pick(sel.ub_trace, Some(r.ub_trace)),
            opt(r.nu),
        )
        .expect("string write");
    }
    out
}

fn series(reports: &[BoundReport], f: impl Fn(&BoundReport) -> Option<f64>) -> Vec<(f64, f64)> {
    reports
        .iter()
        .filter_map(|r| f(r).map(|v| (r.a_db, v)))
        .collect()
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text.as_bytes()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn tolerances() -> serde_json::Value {
    json!({
        "tol_rank": crate::channel::DEFAULT_RANK_TOL,
        "tol_det": crate::zonotope::TOL_DET,
        "tol_tie": crate::zonotope::TOL_TIE,
        "tol_box": crate::zonotope::TOL_BOX,
        "tol_box_retry": crate::zonotope::TOL_BOX_LOOSE,
        "interval_inset": bounds::INTERVAL_INSET,
        "golden_tol": bounds::SEARCH_TOL,
        "mu_residual": bounds::MU_RESIDUAL,
        "log_mu_range": [bounds::LOG_MU_RANGE.0, bounds::LOG_MU_RANGE.1],
    })
}

/// Recorded conventions shared by every manifest.
pub fn conventions() -> serde_json::Value {
    json!({
        "units": "nats",
        "db_convention": "A_dB = 10*log10(A)",
        "inf_sup_relaxation": true,
        "inf_sup_note": "ub_mu and ub_mu_delta minimize over the outer parameters after maximizing over cell probabilities; this is never below the sup-inf form and is still a capacity upper bound",
        "number_format": "9 significant digits",
    })
}

/// Evaluates every bound on the grid for every alpha. Failing cells are
/// skipped and recorded rather than aborting the sweep.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutcome> {
    config.validate()?;
    let model = config.channel.into_canonical()?;
    let decomp = build_decomposition(&model)?;
    let grid = config.grid();
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    let mut per_alpha = Vec::new();

    for &alpha in &config.alphas {
        let fail_all = |e: Error, failures: &mut Vec<CellFailure>| {
            failures.extend(grid.iter().map(|&a_db| CellFailure {
                alpha,
                a_db,
                error: e.to_string(),
            }))
        };
        let m = match model.with_alpha(alpha) {
            Ok(m) => m,
            Err(e) => {
                fail_all(e, &mut failures);
                continue;
            }
        };
        let used = effective_alpha(&m);
        let t1 = match unit_max_trace(&m) {
            Ok(t) => t,
            Err(e) => {
                fail_all(e, &mut failures);
                continue;
            }
        };
        let nu = if used < decomp.alpha_th() {
            match bounds::nu(&decomp, used) {
                Ok(v) => Some(v),
                Err(e) => {
                    fail_all(e, &mut failures);
                    continue;
                }
            }
        } else {
            None
        };
        let cells: Vec<Result<BoundReport>> = grid
            .par_iter()
            .map(|&a_db| evaluate_bounds(&decomp, used, a_db, t1, nu))
            .collect();
        let mut ok = Vec::new();
        for (&a_db, cell) in grid.iter().zip(cells) {
            match cell {
                Ok(r) => ok.push(r),
                Err(e) => failures.push(CellFailure {
                    alpha,
                    a_db,
                    error: e.to_string(),
                }),
            }
        }
        per_alpha.push((alpha, ok.clone()));
        reports.extend(ok);
    }

    let outcome = SweepOutcome {
        reports,
        by_alpha: per_alpha,
        failures,
        alpha_th: decomp.alpha_th(),
        v_h: decomp.v_h(),
    };
    if let Some(dir) = &config.out_dir {
        fs::create_dir_all(dir)?;
        for (alpha, reps) in &outcome.by_alpha {
            let tag = alpha_tag(*alpha);
            write_file(&dir.join(format!("bounds_{tag}.csv")), &bounds_csv(reps, &config.selection))?;
            let sel = &config.selection;
            let columns: [(&str, bool, Column); 7] = [
                ("lb_uniform", sel.lb_uniform, |r| r.lb_uniform),
                ("lb_exp", sel.lb_exp, |r| r.lb_exp),
                ("ub_peak", sel.ub_peak, |r| Some(r.ub_peak)),
                ("ub_mu", sel.ub_mu, |r| r.ub_mu),
                ("ub_mu_delta", sel.ub_mu_delta, |r| r.ub_mu_delta),
                ("ub_trace", sel.ub_trace, |r| Some(r.ub_trace)),
                ("nu", true, |r| r.nu),
            ];
            for (name, on, f) in columns {
                let pairs = series(reps, f);
                if on && !pairs.is_empty() {
                    write_file(&dir.join(format!("{tag}_{name}.dat")), &dat_text(&pairs))?;
                }
            }
        }
        let manifest = json!({
            "kind": "bounds",
            "channel": {
                "source": config.channel_source.as_ref().map(|p| p.display().to_string()),
                "H": config.channel.h,
                "V_H": decomp.v_h(),
                "alpha_th": decomp.alpha_th(),
            },
            "alphas": config.alphas,
            "grid_db": {"min": config.a_db_min, "max": config.a_db_max, "steps": config.steps},
            "selection": config.selection,
            "seed": config.seed,
            "tolerances": tolerances(),
            "conventions": conventions(),
            "failures": outcome.failures,
            "cells": outcome.reports.len(),
        });
        write_file(&dir.join("manifest.json"), &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    }
    Ok(outcome)
}

/// One grid point of a k-point sweep.
#[derive(Debug, Clone, Serialize)]
pub struct KPointRow {
    pub alpha: f64,
    pub a_db: f64,
    /// Results in the order of the requested `k` values.
    pub results: Vec<(usize, KPointResult)>,
}

/// Numerical k-point lower bounds on the sweep grid. Each `k` is warm
/// started from the previous one at the same grid point.
pub fn run_kpoint_sweep(config: &SweepConfig, ks: &[usize], budget: &KPointBudget) -> Result<(Vec<KPointRow>, Vec<CellFailure>)> {
    config.validate()?;
    if ks.is_empty() {
        return Err(Error::InvalidArgument("no k values requested".into()));
    }
    let model = config.channel.into_canonical()?;
    let decomp = build_decomposition(&model)?;
    let grid = config.grid();
    let cells: Vec<(f64, f64)> = config
        .alphas
        .iter()
        .flat_map(|&a| grid.iter().map(move |&g| (a, g)))
        .collect();
    let results: Vec<Result<KPointRow>> = cells
        .iter()
        .map(|&(alpha, a_db)| {
            let d = decomp.with_amplitude(db_to_amplitude(a_db))?;
            let mut warm = None;
            let mut out = Vec::new();
            for &k in ks {
                let r = k_point_lower_bound_warm(&d, alpha, k, budget, config.seed, warm.as_ref())?;
                warm = Some(r.input.clone());
                out.push((k, r));
            }
            Ok(KPointRow {
                alpha,
                a_db,
                results: out,
            })
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for ((alpha, a_db), r) in cells.into_iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(CellFailure {
                alpha,
                a_db,
                error: e.to_string(),
            }),
        }
    }
    if let Some(dir) = &config.out_dir {
        fs::create_dir_all(dir)?;
        for &alpha in &config.alphas {
            let tag = alpha_tag(alpha);
            let mine: Vec<&KPointRow> = rows.iter().filter(|r| r.alpha == alpha).collect();
            let mut csv = String::from("A_dB");
            for k in ks {
                write!(csv, ",kpoint_{k},kpoint_{k}_se").expect("string write");
            }
            csv.push('\n');
            for r in &mine {
                csv.push_str(&fmt_sig(r.a_db));
                for (_, res) in &r.results {
                    write!(csv, ",{},{}", fmt_sig(res.estimate.value), fmt_sig(res.estimate.std_error))
                        .expect("string write");
                }
                csv.push('\n');
            }
            write_file(&dir.join(format!("kpoint_{tag}.csv")), &csv)?;
            for (i, k) in ks.iter().enumerate() {
                let pairs: Vec<(f64, f64)> = mine
                    .iter()
                    .map(|r| (r.a_db, r.results[i].1.estimate.value))
                    .collect();
                write_file(&dir.join(format!("{tag}_kpoint_{k}.dat")), &dat_text(&pairs))?;
            }
        }
        let manifest = json!({
            "kind": "kpoint",
            "channel": {"source": config.channel_source.as_ref().map(|p| p.display().to_string()), "H": config.channel.h},
            "alphas": config.alphas,
            "grid_db": {"min": config.a_db_min, "max": config.a_db_max, "steps": config.steps},
            "k": ks,
            "budget": budget,
            "seed": config.seed,
            "optimizer": "Nelder-Mead, multi-start, common random numbers, origin pinned",
            "conventions": conventions(),
            "failures": failures,
        });
        write_file(&dir.join("manifest.json"), &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    }
    Ok((rows, failures))
}

/// A mass point given by its on/off pattern, with its probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PmfEntry {
    pub pattern: Vec<u8>,
    pub prob: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    pub channel: &'static str,
    pub alpha: f64,
    pub printed_value: f64,
    pub computed_value: f64,
    pub rel_error: f64,
    pub printed_pmf: Vec<PmfEntry>,
    pub computed_pmf: Vec<PmfEntry>,
    pub support_match: bool,
    /// Total variation between printed and computed PMFs over the union
    /// of their supports.
    pub tv_distance: f64,
    pub seconds: f64,
}

fn pmf(entries: &[(&[u8], f64)]) -> Vec<PmfEntry> {
    entries
        .iter()
        .map(|(p, q)| PmfEntry {
            pattern: p.to_vec(),
            prob: *q,
        })
        .collect()
}

type Table1Config = (&'static str, fn() -> DMatrix<f64>, f64, f64, Vec<PmfEntry>);

/// The seven published configurations with their printed optima, copied
/// as printed.
pub fn table1_configs() -> Vec<Table1Config> {
    const Z: &[u8] = &[0, 0, 0, 0];
    vec![
        ("maxvar-2x4", presets::maxvar_2x4, 1.5, 16.3687, pmf(&[(Z, 0.625), (&[1, 1, 1, 1], 0.375)])),
        ("maxvar-2x4", presets::maxvar_2x4, 0.9, 12.957, pmf(&[(Z, 0.7), (&[1, 1, 1, 0], 0.3)])),
        (
            "maxvar-2x4",
            presets::maxvar_2x4,
            0.6,
            9.9575,
            pmf(&[(Z, 0.7438), (&[1, 1, 0, 0], 0.1687), (&[1, 1, 1, 0], 0.0875)]),
        ),
        ("maxvar-2x4", presets::maxvar_2x4, 0.3, 6.0142, pmf(&[(Z, 0.85), (&[1, 1, 0, 0], 0.15)])),
        ("maxvar-3x4", presets::maxvar_3x4, 0.9, 23.8405, pmf(&[(Z, 0.7755), (&[1, 1, 1, 1], 0.2245)])),
        (
            "maxvar-3x4",
            presets::maxvar_3x4,
            0.75,
            20.8950,
            pmf(&[(Z, 0.7772), (&[1, 1, 1, 0], 0.1413), (&[1, 1, 1, 1], 0.0815)]),
        ),
        ("maxvar-3x4", presets::maxvar_3x4, 0.6, 17.7968, pmf(&[(Z, 0.8), (&[1, 1, 1, 0], 0.2)])),
    ]
}

/// Total variation distance between two pattern PMFs.
pub fn tv_distance(a: &[PmfEntry], b: &[PmfEntry]) -> f64 {
    let mut total = 0.0;
    for e in a {
        let q = b.iter().find(|f| f.pattern == e.pattern).map_or(0.0, |f| f.prob);
        total += (e.prob - q).abs();
    }
    for f in b {
        if !a.iter().any(|e| e.pattern == f.pattern) {
            total += f.prob;
        }
    }
    0.5 * total
}

/// Recomputes every published row.
pub fn run_table1() -> Result<Vec<Table1Row>> {
    table1_configs()
        .into_iter()
        .map(|(name, h, alpha, printed, printed_pmf)| {
            let start = Instant::now();
            let model = validate_channel(&h(), 1.0, alpha)?;
            let sol = max_trace(&model)?;
            let computed_pmf: Vec<PmfEntry> = sol
                .input
                .points
                .iter()
                .zip(&sol.input.probs)
                .map(|(x, &p)| PmfEntry {
                    pattern: x.iter().map(|&v| (v > 0.5) as u8).collect(),
                    prob: p,
                })
                .collect();
            let mut a: Vec<_> = printed_pmf.iter().map(|e| &e.pattern).collect();
            let mut b: Vec<_> = computed_pmf.iter().map(|e| &e.pattern).collect();
            a.sort();
            b.sort();
            Ok(Table1Row {
                channel: name,
                alpha,
                printed_value: printed,
                computed_value: sol.value,
                rel_error: (sol.value - printed).abs() / printed,
                support_match: a == b,
                tv_distance: tv_distance(&printed_pmf, &computed_pmf),
                printed_pmf,
                computed_pmf,
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

fn pmf_text(p: &[PmfEntry]) -> String {
    p.iter()
        .map(|e| {
            let pat: String = e
                .pattern
                .iter()
                .map(|&b| if b == 1 { 'A' } else { '0' })
                .collect();
            format!("{pat}:{}", fmt_g(e.prob, 4))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Plain-text comparison table.
pub fn table1_text(rows: &[Table1Row]) -> String {
    let mut out = String::from(
        "channel     alpha  printed    computed     rel_err    support  tv        printed_pmf | computed_pmf\n",
    );
    for r in rows {
        writeln!(
            out,
            "{:<11} {:<6} {:<10} {:<12} {:<10} {:<8} {:<9} {} | {}",
            r.channel,
            fmt_sig(r.alpha),
            fmt_sig(r.printed_value),
            fmt_g(r.computed_value, 8),
            fmt_g(r.rel_error, 3),
            if r.support_match { "same" } else { "differs" },
            fmt_g(r.tv_distance, 3),
            pmf_text(&r.printed_pmf),
            pmf_text(&r.computed_pmf),
        )
        .expect("string write");
    }
    out
}

/// `(alpha, nu)` pairs over a grid inside `(0, alpha_th)`.
pub fn run_nu_curve(decomp: &Decomposition, alphas: &[f64]) -> Result<Vec<(f64, f64)>> {
    if alphas.is_empty() {
        return Err(Error::InvalidArgument("empty alpha grid".into()));
    }
    alphas
        .par_iter()
        .map(|&a| {
            if !(a > 0.0) {
                return Err(Error::InvalidArgument(format!("alpha {a} is not positive")));
            }
            bounds::nu(decomp, a).map(|v| (a, v))
        })
        .collect()
}

/// `alpha_th`, `V_H` and related constants of a channel as JSON.
pub fn channel_summary(decomp: &Decomposition) -> serde_json::Value {
    json!({
        "V_H": decomp.v_h(),
        "alpha_th": decomp.alpha_th(),
        "cells": decomp.cells().len(),
        "n_T": decomp.n_t(),
        "n_R": decomp.n_r(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-2.5), "-2.5");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_sig(123456789.4), "123456789");
        assert_eq!(fmt_sig(1234567891.0), "1.23456789e+09");
        assert_eq!(fmt_sig(1.5e-7), "1.5e-07");
        assert_eq!(fmt_sig(0.0001), "0.0001");
        assert_eq!(fmt_sig(0.000018896949), "1.8896949e-05");
        assert_eq!(fmt_sig(9.9999999999), "10");
        assert_eq!(fmt_sig(f64::NAN), "nan");
    }

    #[test]
    fn sweep_config_guards() {
        let ch = ChannelFile::from_model(&presets::model(presets::bounds_2x3(), 1.0, 0.9).unwrap());
        assert!(SweepConfig::new(ch.clone(), vec![0.9], 0.0, 10.0, 1).validate().is_err());
        assert!(SweepConfig::new(ch.clone(), vec![0.9], 10.0, 0.0, 5).validate().is_err());
        assert!(SweepConfig::new(ch.clone(), vec![], 0.0, 10.0, 5).validate().is_err());
        assert!(SweepConfig::new(ch.clone(), vec![-1.0], 0.0, 10.0, 5).validate().is_err());
        let c = SweepConfig::new(ch, vec![0.9], -15.0, 25.0, 81);
        let g = c.grid();
        assert_eq!(g.len(), 81);
        assert_eq!(g[0], -15.0);
        assert_eq!(g[80], 25.0);
        assert!((g[1] - g[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tv_of_pmfs() {
        let a = pmf(&[(&[0, 0], 0.5), (&[1, 1], 0.5)]);
        let b = pmf(&[(&[0, 0], 0.5), (&[1, 0], 0.5)]);
        assert_eq!(tv_distance(&a, &a), 0.0);
        assert!((tv_distance(&a, &b) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn csv_leaves_inapplicable_fields_empty() {
        let r = BoundReport {
            a_linear: 1.0,
            a_db: 0.0,
            alpha_used: 2.0,
            lb_uniform: Some(0.5),
            lb_exp: None,
            ub_peak: 2.0,
            ub_mu: None,
            ub_mu_delta: None,
            ub_trace: 1.25,
            nu: None,
        };
        let csv = bounds_csv(&[r], &BoundSelection::default());
        assert_eq!(csv, format!("{CSV_HEADER}\n0,0.5,,2,,,1.25,\n"));
    }
}
