use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde_json::json;

use mimo_bounds::maxvar::{check_r_rank, max_trace};
use mimo_bounds::mi::KPointBudget;
use mimo_bounds::reports::{self, SweepConfig};
use mimo_bounds::zonotope::lp_oracle_min_energy;
use mimo_bounds::{build_decomposition, presets, ChannelFile};

/// Capacity bounds and signaling structures for optical MIMO intensity
/// channels.
#[derive(Parser)]
#[command(name = "mimo-bounds", version)]
struct Cli {
    /// Channel JSON file: {"H": [[..]], "A": .., "alpha": .., "noise_cov": [[..]]}.
    #[arg(long, global = true, conflicts_with = "preset")]
    channel: Option<PathBuf>,
    /// Built-in channel instead of a file.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output directory; results go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimum-energy tiling of the image zonotope.
    Decompose {
        /// Emit the cells as TikZ coordinates (two receive antennas only).
        #[arg(long)]
        tikz_data: bool,
    },
    /// Minimum-energy preimage of an image point, with the LP cross-check.
    Minenergy {
        /// Image point, comma separated.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        xbar: Vec<f64>,
    },
    /// Maximum covariance trace and its optimal input.
    Maxvar {
        #[arg(long)]
        alpha: Option<f64>,
        /// Reproduce the published maximum-variance table instead.
        #[arg(long)]
        table1: bool,
    },
    /// Analytic bounds over an amplitude grid.
    Bounds(SweepArgs),
    /// Numerical k-point lower bounds over an amplitude grid.
    Kpoint {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        k: Vec<usize>,
        /// Noise samples per evaluation during the search.
        #[arg(long, default_value_t = mimo_bounds::mi::SEARCH_SAMPLES)]
        samples: usize,
        /// Noise samples for the reported estimate.
        #[arg(long, default_value_t = mimo_bounds::mi::FINAL_SAMPLES)]
        final_samples: usize,
    },
    /// High-SNR penalty nu as a function of alpha.
    NuCurve {
        #[arg(long, default_value_t = 0.05)]
        alpha_min: f64,
        /// Defaults to alpha_th - 0.01.
        #[arg(long)]
        alpha_max: Option<f64>,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Published maximum-variance table against recomputed values.
    Table1,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, allow_negative_numbers = true, default_value_t = -15.0)]
    amin_db: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 25.0)]
    amax_db: f64,
    #[arg(long, default_value_t = 81)]
    steps: usize,
    /// Average-to-peak ratios, comma separated (default: the channel's).
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
}

fn channel_file(cli: &Cli) -> Result<ChannelFile> {
    if let Some(path) = &cli.channel {
        return ChannelFile::load(path).with_context(|| format!("reading {}", path.display()));
    }
    let name = cli.preset.as_deref().unwrap_or("bounds-2x3");
    let Some(h) = presets::by_name(name) else {
        bail!(
            "unknown preset {name:?}; choose one of {}",
            presets::PRESET_NAMES.join(", ")
        );
    };
    Ok(ChannelFile::from_model(&presets::model(h, 1.0, 1.0)?))
}

fn emit(out: Option<&Path>, name: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join(name);
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn pretty(v: &serde_json::Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn sweep_config(cli: &Cli, file: ChannelFile, args: &SweepArgs) -> SweepConfig {
    let alphas = if args.alpha.is_empty() {
        vec![file.alpha]
    } else {
        args.alpha.clone()
    };
    let mut config = SweepConfig::new(file, alphas, args.amin_db, args.amax_db, args.steps);
    config.channel_source = cli.channel.clone();
    config.out_dir = cli.out.clone();
    config.seed = cli.seed;
    config
}

fn run(cli: &Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Table1 | Command::Maxvar { table1: true, .. } => {
            let rows = reports::run_table1()?;
            emit(out, "table1.txt", &reports::table1_text(&rows))?;
            if let Some(dir) = out {
                emit(Some(dir), "table1.json", &pretty(&serde_json::to_value(&rows)?)?)?;
            }
        }
        Command::Decompose { tikz_data } => {
            let model = channel_file(cli)?.into_canonical()?;
            let decomp = build_decomposition(&model)?;
            if *tikz_data {
                emit(out, "tiling.dat", &decomp.tikz_data()?)?;
            } else {
                emit(out, "decomposition.json", &pretty(&decomp.to_json())?)?;
            }
        }
        Command::Minenergy { xbar } => {
            let model = channel_file(cli)?.into_canonical()?;
            let decomp = build_decomposition(&model)?;
            let xbar = DVector::from_column_slice(xbar);
            let r = decomp.min_energy_input(&xbar)?;
            let (_, lp) = lp_oracle_min_energy(&model, &xbar)?;
            let v = json!({
                "xbar": xbar.as_slice(),
                "x_min": r.x_min,
                "cell": decomp.cells()[r.cell_index].indices.iter().map(|i| i + 1).collect::<Vec<_>>(),
                "beta": r.beta,
                "energy": r.energy,
                "lp_energy": lp,
            });
            emit(out, "minenergy.json", &pretty(&v)?)?;
        }
        Command::Maxvar { alpha, .. } => {
            let mut model = channel_file(cli)?.into_canonical()?;
            if let Some(a) = alpha {
                model = model.with_alpha(*a)?;
            }
            let sol = max_trace(&model)?;
            let check = check_r_rank(&model)?;
            let v = json!({
                "solution": sol,
                "r_rank_holds": check.holds,
                "r_rank_exhaustive": check.exhaustive,
            });
            emit(out, "maxvar.json", &pretty(&v)?)?;
        }
        Command::Bounds(args) => {
            let config = sweep_config(cli, channel_file(cli)?, args);
            let outcome = reports::run_sweep(&config)?;
            if out.is_none() {
                for (alpha, reps) in &outcome.by_alpha {
                    println!("# alpha = {}", reports::fmt_sig(*alpha));
                    print!("{}", reports::bounds_csv(reps, &config.selection));
                }
            }
            for f in &outcome.failures {
                eprintln!("cell alpha={} A_dB={} failed: {}", f.alpha, f.a_db, f.error);
            }
        }
        Command::Kpoint {
            sweep,
            k,
            samples,
            final_samples,
        } => {
            let config = sweep_config(cli, channel_file(cli)?, sweep);
            let budget = KPointBudget {
                search_samples: *samples,
                final_samples: *final_samples,
                ..KPointBudget::default()
            };
            let (rows, failures) = reports::run_kpoint_sweep(&config, k, &budget)?;
            if out.is_none() {
                for row in &rows {
                    let cols: Vec<String> = row
                        .results
                        .iter()
                        .map(|(k, r)| {
                            format!(
                                "k{k}={} (se {})",
                                reports::fmt_sig(r.estimate.value),
                                reports::fmt_sig(r.estimate.std_error)
                            )
                        })
                        .collect();
                    println!(
                        "alpha={} A_dB={} {}",
                        reports::fmt_sig(row.alpha),
                        reports::fmt_sig(row.a_db),
                        cols.join(" ")
                    );
                }
            }
            for f in &failures {
                eprintln!("cell alpha={} A_dB={} failed: {}", f.alpha, f.a_db, f.error);
            }
        }
        Command::NuCurve {
            alpha_min,
            alpha_max,
            step,
        } => {
            let model = channel_file(cli)?.into_canonical()?;
            let decomp = build_decomposition(&model)?;
            let hi = alpha_max.unwrap_or(decomp.alpha_th() - 0.01);
            if step.is_nan() || *step <= 0.0 || hi < *alpha_min {
                bail!("empty alpha grid [{alpha_min}, {hi}] with step {step}");
            }
            let n = ((hi - alpha_min) / step + 1e-9).floor() as usize + 1;
            let grid: Vec<f64> = (0..n).map(|i| alpha_min + step * i as f64).collect();
            let pairs = reports::run_nu_curve(&decomp, &grid)?;
            emit(out, "nu.dat", &reports::dat_text(&pairs))?;
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    run(&cli)
}
