#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use wiretap::error::{HarnessError, Result};
use wiretap::gsvd_check::gsvd_check;
use wiretap::harness::{mean_curves, snr_to_power, ExperimentFile, InitChoice, SolverOverrides};
use wiretap::io::{emit_results, load_channel};
use wiretap::{run_sweep, ExperimentConfig, OutputFormat, Preset};
use wiretap_core::mimome::gauss_seidel_from;
use wiretap_core::misome::{misome_two_layer, TwoLayerConfig};
use wiretap_core::sdof::{sdof_closed_form, sdof_table_lookup};
use wiretap_core::{sample_channel, AntennaConfig, WiretapChannel};

#[derive(Parser)]
#[command(name = "wiretap", version, about = "Secrecy-rate solvers for the helper-assisted MIMO wiretap channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximal secure degrees of freedom of an antenna configuration.
    Sdof {
        #[arg(long)]
        na: usize,
        #[arg(long)]
        nb: usize,
        #[arg(long)]
        ne: usize,
        #[arg(long)]
        nj: usize,
        /// Also evaluate the table form and fail if it disagrees.
        #[arg(long)]
        table_check: bool,
    },
    /// Secrecy capacity with a single-antenna receiver.
    CapacityMisome {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value_t = 10.0)]
        snr_db: f64,
        /// Outer grid size of the two-layer search.
        #[arg(long, default_value_t = TwoLayerConfig::default().grid_points)]
        grid: usize,
    },
    /// Gauss-Seidel secrecy-rate maximization for a multi-antenna receiver.
    SolveMimome {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value_t = 10.0)]
        snr_db: f64,
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        #[arg(long, default_value = "alignment")]
        init: InitChoice,
    },
    /// Monte-Carlo sweep over seeded channels.
    Sweep {
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        preset: Option<Preset>,
        /// Sweep description in JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the extension of --out, then csv.
        #[arg(long)]
        format: Option<OutputFormat>,
    },
    /// Randomized GSVD reconstruction and dimension check.
    GsvdCheck {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

#[derive(Args)]
struct ChannelArgs {
    /// Channel file (JSON).
    #[arg(long, conflicts_with = "seed")]
    channel: Option<PathBuf>,
    /// Draw a Rayleigh channel from this seed instead.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    na: Option<usize>,
    #[arg(long)]
    nb: Option<usize>,
    #[arg(long)]
    ne: Option<usize>,
    #[arg(long)]
    nj: Option<usize>,
}

impl ChannelArgs {
    fn load(&self, default: AntennaConfig) -> Result<WiretapChannel> {
        if let Some(path) = &self.channel {
            return load_channel(path);
        }
        let config = AntennaConfig::new(
            self.na.unwrap_or(default.na),
            self.nb.unwrap_or(default.nb),
            self.ne.unwrap_or(default.ne),
            self.nj.unwrap_or(default.nj),
        )?;
        Ok(sample_channel(config, self.seed.unwrap_or(0)))
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json values serialize"));
}

fn sdof(na: usize, nb: usize, ne: usize, nj: usize, table_check: bool) -> Result<()> {
    let config = AntennaConfig::new(na, nb, ne, nj)?;
    let b = sdof_closed_form(config);
    let mut out = json!({
        "na": na, "nb": nb, "ne": ne, "nj": nj,
        "d0": b.d0, "d1": b.d1, "d2": b.d2, "s": b.s, "d_star": b.d_star,
    });
    if table_check {
        let entry = sdof_table_lookup(config)?;
        out["table_row"] = json!(format!("{:?}", entry.row));
        out["table_d_star"] = json!(entry.d_star);
        print_json(&out);
        if entry.d_star != b.d_star {
            return Err(wiretap_core::Error::Internal(format!(
                "closed form gives {} but the table gives {}",
                b.d_star, entry.d_star
            ))
            .into());
        }
        return Ok(());
    }
    print_json(&out);
    Ok(())
}

fn capacity_misome(channel: &ChannelArgs, snr_db: f64, grid: usize) -> Result<()> {
    let ch = channel.load(AntennaConfig { na: 3, nb: 1, ne: 3, nj: 2 })?;
    let cfg = TwoLayerConfig { grid_points: grid, ..TwoLayerConfig::default() };
    let out = misome_two_layer(&ch, snr_to_power(snr_db), &cfg)?;
    print_json(&json!({
        "config": ch.config.to_string(),
        "snr_db": snr_db,
        "cs_bits": out.result.cs,
        "rd_bits": out.result.rd,
        "re_bits": out.result.re,
        "tau_star": out.tau_star,
        "evaluations": out.evaluations.len(),
        "flags": out.result.diagnostics.flags,
    }));
    Ok(())
}

fn solve_mimome(channel: &ChannelArgs, snr_db: f64, tol: f64, max_iters: usize, init: InitChoice) -> Result<()> {
    let ch = channel.load(AntennaConfig { na: 3, nb: 3, ne: 3, nj: 4 })?;
    let overrides = SolverOverrides { gs_tol: Some(tol), gs_max_iters: Some(max_iters), ..Default::default() };
    if !(tol >= 0.0) {
        return Err(HarnessError::InvalidConfig("--tol must be non-negative".into()));
    }
    let rep = gauss_seidel_from(&ch, snr_to_power(snr_db), init.into(), &overrides.gauss_seidel())?;
    print_json(&json!({
        "config": ch.config.to_string(),
        "snr_db": snr_db,
        "cs_bits": rep.final_result.cs,
        "init_cs_bits": rep.init_result.cs,
        "iterations": rep.iterations,
        "converged": rep.converged,
        "objective_trace_nats": rep.objective_trace,
        "flags": rep.final_result.diagnostics.flags,
    }));
    Ok(())
}

fn sweep(
    preset: Option<Preset>,
    config: Option<&Path>,
    trials: Option<usize>,
    seed: Option<u64>,
    out: &Path,
    format: Option<OutputFormat>,
) -> Result<()> {
    let mut cfg: ExperimentConfig = match (preset, config) {
        (Some(p), _) => p.config(trials, seed.unwrap_or(0)),
        (None, Some(path)) => {
            let text =
                std::fs::read_to_string(path).map_err(|source| HarnessError::Read { path: path.into(), source })?;
            let file: ExperimentFile =
                serde_json::from_str(&text).map_err(|source| HarnessError::Json { path: path.into(), source })?;
            file.try_into()?
        }
        (None, None) => return Err(HarnessError::InvalidConfig("either --preset or --config is required".into())),
    };
    if let Some(t) = trials {
        cfg.trials = t;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let records = run_sweep(&cfg)?;
    let format = format.or_else(|| OutputFormat::from_extension(out)).unwrap_or_default();
    emit_results(&records, format, out)?;
    eprintln!("{} records written to {}", records.len(), out.display());
    for (snr, scheme, mean) in mean_curves(&records) {
        println!("{snr:>6.1} dB  {scheme:<15} {mean:.6}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sdof { na, nb, ne, nj, table_check } => sdof(na, nb, ne, nj, table_check),
        Command::CapacityMisome { channel, snr_db, grid } => capacity_misome(&channel, snr_db, grid),
        Command::SolveMimome { channel, snr_db, tol, max_iters, init } => {
            solve_mimome(&channel, snr_db, tol, max_iters, init)
        }
        Command::Sweep { preset, config, trials, seed, out, format } => {
            sweep(preset, config.as_deref(), trials, seed, &out, format)
        }
        Command::GsvdCheck { trials, seed, tol } => {
            let report = gsvd_check(trials, seed, tol);
            print_json(&json!({
                "trials": report.trials,
                "max_residual": report.max_residual,
                "failures": report.failures,
            }));
            if report.passed() {
                Ok(())
            } else {
                Err(wiretap_core::Error::Internal(format!("{} GSVD checks failed", report.failures.len())).into())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
