use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cavitysim_cli::config::{load_config, ExperimentConfig};
use cavitysim_cli::runner;
use cavitysim_cli::{parse_freq_arg, parse_temp_arg};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Analytic,
    Stochastic,
}

#[derive(Parser, Debug)]
#[command(
    name = "cavitysim",
    about = "Simulate a two-port microwave cavity measurement chain from classical drive levels down to sub-photon powers, and fit the resulting resonance curves",
    version
)]
struct Cli {
    /// Config file path, or a bundled preset name (table1, fig5).
    #[arg(long, global = true)]
    config: Option<String>,

    /// Override the master RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for CSV and report outputs (default: current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the sweep execution mode.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,

    /// Also write normalized plot columns (offset_khz, rel_db).
    #[arg(long, global = true)]
    plot_data: bool,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep the generator across the resonance and fit the line shape.
    Sweep,
    /// Run one sweep per configured power level and compare fitted Qs.
    Table1,
    /// Acquire the noise-only spectrum (generator off) and fit it.
    Noise,
    /// Fit a previously written freq_hz,power_dbm CSV.
    Fit {
        csv: PathBuf,
        /// Add this offset to the CSV frequency column before fitting
        /// (for records stored in baseband coordinates).
        #[arg(long, default_value_t = 0.0)]
        rf_offset_hz: f64,
    },
    /// Report stored energy and photon number per drive power.
    Photons {
        /// Power levels in dBm at the cavity input; defaults to the
        /// table1 list from the config.
        #[arg(long = "power-dbm", num_args = 1.., allow_negative_numbers = true)]
        powers_dbm: Vec<f64>,
    },
    /// Single-photon power and thermal-noise figures for a cavity.
    Sensitivity {
        /// Resonance frequency (e.g. 1GHz, 9.59GHz, 1e9).
        freq: String,
        /// Loaded quality factor.
        q: f64,
        /// Temperature (e.g. 300K).
        temp: String,
        /// Target signal-to-noise ratio.
        snr: f64,
        /// Optical-cavity comparison: wavelength in meters.
        #[arg(long, default_value_t = 1e-6)]
        optical_lambda_m: f64,
        /// Optical-cavity comparison: finesse.
        #[arg(long, default_value_t = 1e5)]
        optical_finesse: f64,
        /// Optical-cavity comparison: length in meters.
        #[arg(long, default_value_t = 1.0)]
        optical_length_m: f64,
    },
}

fn effective_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(source) => load_config(source)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.sweep.master_seed = seed;
    }
    if let Some(mode) = cli.mode {
        cfg.sweep.mode = match mode {
            ModeArg::Analytic => cavitysim::chain::SweepMode::Analytic,
            ModeArg::Stochastic => cavitysim::chain::SweepMode::Stochastic,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let out = Some(out.as_path());
    match &cli.cmd {
        Command::Sweep => {
            let cfg = effective_config(cli)?;
            let run = runner::run_sweep(&cfg, out, cli.plot_data)?;
            print!("{}", run.fit.report());
            Ok(run.fit.converged)
        }
        Command::Table1 => {
            let cfg = effective_config(cli)?;
            let run = runner::run_table1(&cfg, out, cli.plot_data)?;
            print!("{}", run.text_report());
            Ok(run.all_converged())
        }
        Command::Noise => {
            let cfg = effective_config(cli)?;
            let run = runner::run_noise(&cfg, out, cli.plot_data)?;
            print!("{}", run.report());
            Ok(run.fit.converged)
        }
        Command::Fit { csv, rf_offset_hz } => {
            let fitted = runner::fit_csv_file(csv, *rf_offset_hz, out)?;
            print!("{}", fitted.report());
            Ok(fitted.converged)
        }
        Command::Photons { powers_dbm } => {
            let cfg = effective_config(cli)?;
            let powers = if powers_dbm.is_empty() {
                cfg.table1.powers_dbm.clone()
            } else {
                powers_dbm.clone()
            };
            let rows = runner::run_photons(&cfg, &powers)?;
            print!("{}", runner::photon_table(&rows));
            Ok(true)
        }
        Command::Sensitivity {
            freq,
            q,
            temp,
            snr,
            optical_lambda_m,
            optical_finesse,
            optical_length_m,
        } => {
            let f_hz = parse_freq_arg(freq).map_err(anyhow::Error::msg)?;
            let temp_k = parse_temp_arg(temp).map_err(anyhow::Error::msg)?;
            let report = runner::run_sensitivity(
                f_hz,
                *q,
                temp_k,
                *snr,
                *optical_lambda_m,
                *optical_finesse,
                *optical_length_m,
            )?;
            print!("{}", report.render());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("cavitysim: fit did not converge");
            ExitCode::FAILURE
        }
        Err(err) => {
            eprintln!("cavitysim: error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
