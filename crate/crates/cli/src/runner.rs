//! Experiment runners: sweep, four-power table, noise-only acquisition,
//! sensitivity figures, and CSV refits. Each runner returns its results
//! and optionally writes the CSV/report artifacts into an output
//! directory.

use std::path::Path;

use anyhow::{bail, Context};
use cavitysim::analyzer::{analyze, AnalyzerSettings, Window};
use cavitysim::cavity::{optical_single_photon_power, single_photon_power, stored_photons};
use cavitysim::chain::{
    point_seed, sweep, synthesize, ScenePoint, SweepPointResult, SweepSettings,
};
use cavitysim::fit::{
    fit, fit_lorentzian, initial_guess, q_consistency, ConsistencyReport, FitResult, QEstimate,
    SweepData, SweepSource,
};
use cavitysim::thermal::{
    budget, min_measure_time, occupation, required_rbw, total_noise_power, NoiseBudget,
};
use cavitysim::units::{dbm_to_watts, watts_to_dbm};
use cavitysim::{CavityParams, ChainConfig, Frequency, Power, ThermalEnvironment};

use crate::config::ExperimentConfig;

/// Uncertainty floor used when judging Q agreement across power levels;
/// fitted standard errors below this are dominated by systematics on a
/// real bench.
pub const Q_SIGMA_FLOOR: f64 = 1000.0;
/// Pairwise tolerance (in combined sigmas) for the Q consistency verdict.
pub const Q_CONSISTENCY_TOL: f64 = 1.5;
/// Half-width of the noise-fit region around the resonance, in linewidths.
const NOISE_FIT_HALF_LINEWIDTHS: f64 = 2.5;

pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![start];
    }
    let step = (stop - start) / (n - 1) as f64;
    (0..n).map(|i| start + i as f64 * step).collect()
}

/// Render bins as the `freq_hz,power_dbm` exchange CSV.
pub fn spectrum_csv(freqs_hz: &[f64], powers_w: &[f64]) -> String {
    let mut out = String::with_capacity(32 * freqs_hz.len() + 20);
    out.push_str("freq_hz,power_dbm\n");
    for (f, p) in freqs_hz.iter().zip(powers_w) {
        out.push_str(&format!("{:.9e},{:.9e}\n", f, watts_to_dbm(*p)));
    }
    out
}

/// Parse the `freq_hz,power_dbm` exchange CSV back into watts.
pub fn parse_spectrum_csv(text: &str) -> anyhow::Result<(Vec<f64>, Vec<f64>)> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "freq_hz,power_dbm" => {}
        Some((_, header)) => bail!("expected header 'freq_hz,power_dbm', got '{header}'"),
        None => bail!("empty CSV"),
    }
    let mut freqs = Vec::new();
    let mut powers = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (f, p) = line
            .split_once(',')
            .with_context(|| format!("line {}: expected two comma-separated columns", idx + 1))?;
        let f: f64 = f
            .trim()
            .parse()
            .with_context(|| format!("line {}: bad frequency", idx + 1))?;
        let dbm: f64 = match p.trim() {
            "-inf" => f64::NEG_INFINITY,
            v => v
                .parse()
                .with_context(|| format!("line {}: bad power", idx + 1))?,
        };
        freqs.push(f);
        powers.push(if dbm == f64::NEG_INFINITY {
            0.0
        } else {
            dbm_to_watts(dbm)?.watts()
        });
    }
    Ok((freqs, powers))
}

/// Plot-ready normalization: frequency offset in kHz against power in dB
/// relative to the peak.
pub fn plot_csv(freqs_hz: &[f64], powers_w: &[f64], center_hz: f64) -> String {
    let peak_dbm = powers_w
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        .max(1e-300);
    let peak_dbm = watts_to_dbm(peak_dbm);
    let mut out = String::from("offset_khz,rel_db\n");
    for (f, p) in freqs_hz.iter().zip(powers_w) {
        out.push_str(&format!(
            "{:.9e},{:.9e}\n",
            (f - center_hz) / 1e3,
            watts_to_dbm(*p) - peak_dbm
        ));
    }
    out
}

fn write_artifact(out: Option<&Path>, name: &str, body: &str) -> anyhow::Result<()> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        let path = dir.join(name);
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn built(
    cfg: &ExperimentConfig,
) -> anyhow::Result<(CavityParams, ChainConfig, ThermalEnvironment)> {
    Ok((cfg.cavity.build()?, cfg.chain.build()?, cfg.env.build()?))
}

#[derive(Debug)]
pub struct SweepRun {
    pub results: Vec<SweepPointResult>,
    pub fit: FitResult,
}

/// Execute the configured sweep, fit it, and emit `<prefix>_spectrum.csv`
/// plus `<prefix>_fit.txt` (and `<prefix>_plot.csv` when asked).
pub fn run_sweep_as(
    cfg: &ExperimentConfig,
    prefix: &str,
    out: Option<&Path>,
    plot: bool,
) -> anyhow::Result<SweepRun> {
    cfg.validate()?;
    let (cav, chain, env) = built(cfg)?;
    let s = &cfg.sweep;
    let gen_power = dbm_to_watts(s.power_dbm_at_cavity + chain.attenuation_db)?;
    let points: Vec<ScenePoint> = linspace(s.f_start_hz, s.f_stop_hz, s.points)
        .into_iter()
        .map(|f| {
            Ok(ScenePoint {
                gen_freq: Frequency::from_hz(f)?,
                gen_power,
            })
        })
        .collect::<cavitysim::Result<_>>()?;
    let settings = SweepSettings {
        rbw_hz: s.rbw_hz,
        averages: s.averages,
        window: Window::Rectangular,
        mode: s.mode,
        master_seed: s.master_seed,
    };
    let results = sweep(&points, &chain, &cav, &env, &settings)?;

    let freqs: Vec<f64> = results.iter().map(|r| r.gen_freq_hz).collect();
    let powers: Vec<f64> = results.iter().map(|r| r.measured_power_w).collect();
    let data = SweepData::new(freqs.clone(), powers.clone(), SweepSource::Driven)?;
    let fitted = fit(&data)?;

    write_artifact(
        out,
        &format!("{prefix}_spectrum.csv"),
        &spectrum_csv(&freqs, &powers),
    )?;
    write_artifact(out, &format!("{prefix}_fit.txt"), &fitted.report())?;
    if plot {
        write_artifact(
            out,
            &format!("{prefix}_plot.csv"),
            &plot_csv(&freqs, &powers, fitted.f_center_hz),
        )?;
    }
    Ok(SweepRun {
        results,
        fit: fitted,
    })
}

pub fn run_sweep(
    cfg: &ExperimentConfig,
    out: Option<&Path>,
    plot: bool,
) -> anyhow::Result<SweepRun> {
    run_sweep_as(cfg, "sweep", out, plot)
}

#[derive(Debug)]
pub struct Table1Row {
    pub power_dbm: f64,
    pub q_injected: f64,
    pub rbw_hz: f64,
    pub energy_j: f64,
    pub photons: f64,
    pub fit: FitResult,
}

#[derive(Debug)]
pub struct Table1Run {
    pub rows: Vec<Table1Row>,
    pub consistency: ConsistencyReport,
}

impl Table1Run {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.fit.converged)
    }

    /// Machine-readable summary.
    pub fn csv(&self) -> String {
        let mut out = String::from("power_dbm,photons,q_fitted,q_stderr\n");
        for r in &self.rows {
            let stderr = r
                .fit
                .stderr
                .map(|s| format!("{:.6e}", s.q_loaded))
                .unwrap_or_else(|| "nan".to_string());
            out.push_str(&format!(
                "{},{:.6e},{:.6e},{}\n",
                r.power_dbm, r.photons, r.fit.q_loaded, stderr
            ));
        }
        out
    }

    /// Aligned human-readable table plus the consistency verdict.
    pub fn text_report(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:>10}  {:>12}  {:>10}  {:>10}  {:>10}  {:>9}\n",
            "power_dbm", "photons", "q_injected", "q_fitted", "q_stderr", "converged"
        ));
        for r in &self.rows {
            let stderr = r
                .fit
                .stderr
                .map(|s| format!("{:10.1}", s.q_loaded))
                .unwrap_or_else(|| format!("{:>10}", "n/a"));
            out.push_str(&format!(
                "{:>10}  {:>12.4e}  {:>10.0}  {:>10.1}  {}  {:>9}\n",
                r.power_dbm, r.photons, r.q_injected, r.fit.q_loaded, stderr, r.fit.converged
            ));
        }
        out.push_str(&format!(
            "q_consistency: {} (tol {} x combined sigma, sigma floor {})\n",
            if self.consistency.overall_pass {
                "PASS"
            } else {
                "FAIL"
            },
            self.consistency.tol,
            Q_SIGMA_FLOOR,
        ));
        for p in &self.consistency.pairs {
            out.push_str(&format!(
                "  rows {}-{}: |dQ| = {:.1} vs {:.1} -> {}\n",
                p.i,
                p.j,
                p.difference,
                self.consistency.tol * p.combined_sigma,
                if p.pass { "ok" } else { "inconsistent" }
            ));
        }
        out
    }
}

/// Run one sweep per configured power level, with that row's loaded Q and
/// resolution bandwidth, and judge the fitted Qs for mutual consistency.
pub fn run_table1(
    cfg: &ExperimentConfig,
    out: Option<&Path>,
    plot: bool,
) -> anyhow::Result<Table1Run> {
    cfg.validate()?;
    let env_f_res = Frequency::from_hz(cfg.cavity.f_res_hz)?;
    let mut rows = Vec::new();
    for (row, &power_dbm) in cfg.table1.powers_dbm.iter().enumerate() {
        let q = cfg.table1.row_q(row)?;
        let rbw = cfg.table1.row_rbw(row)?;
        let averages = cfg.table1.row_averages(row)?;

        let mut row_cfg = cfg.clone();
        row_cfg.cavity.q_loaded = q;
        row_cfg.sweep.power_dbm_at_cavity = power_dbm;
        row_cfg.sweep.rbw_hz = rbw;
        row_cfg.sweep.averages = averages;
        // Decorrelate rows while keeping the whole table reproducible.
        row_cfg.sweep.master_seed = point_seed(cfg.sweep.master_seed, 1000 + row as u64);

        let prefix = format!("table1_{power_dbm}dBm");
        let run = run_sweep_as(&row_cfg, &prefix, out, plot)?;

        let cav = row_cfg.cavity.build()?;
        let (energy_j, photons) = stored_photons(&cav, env_f_res, dbm_to_watts(power_dbm)?);
        rows.push(Table1Row {
            power_dbm,
            q_injected: q,
            rbw_hz: rbw,
            energy_j,
            photons,
            fit: run.fit,
        });
    }

    let estimates: Vec<QEstimate> = rows
        .iter()
        .map(|r| QEstimate {
            q: r.fit.q_loaded,
            sigma: r
                .fit
                .stderr
                .map(|s| s.q_loaded)
                .unwrap_or(0.0)
                .max(Q_SIGMA_FLOOR),
        })
        .collect();
    // A single row is trivially consistent with itself.
    let consistency = if estimates.len() == 1 {
        ConsistencyReport {
            pairs: Vec::new(),
            overall_pass: true,
            tol: Q_CONSISTENCY_TOL,
        }
    } else {
        q_consistency(&estimates, Q_CONSISTENCY_TOL)?
    };

    let run = Table1Run { rows, consistency };
    write_artifact(out, "table1.csv", &run.csv())?;
    write_artifact(out, "table1_report.txt", &run.text_report())?;
    Ok(run)
}

#[derive(Debug)]
pub struct NoiseRun {
    /// RF-mapped spectrum across the passband: (freqs, watts).
    pub rf_freqs_hz: Vec<f64>,
    pub powers_w: Vec<f64>,
    pub fit: FitResult,
    pub budget: NoiseBudget,
}

impl NoiseRun {
    pub fn report(&self) -> String {
        format!(
            "{}per_bin_photon_equivalent={:.6e}\nper_bin_noise_w={:.6e}\ntotal_noise_power_w={:.6e}\noccupation={:.6e}\n",
            self.fit.report(),
            self.budget.per_bin_photon_equivalent,
            self.budget.per_bin_power.watts(),
            self.budget.total_power.watts(),
            self.budget.occupation,
        )
    }
}

/// Noise-only acquisition: generator off, one long frame analyzed at the
/// configured RBW with a Hann window, Lorentzian-fitted over the
/// resonance region.
pub fn run_noise(
    cfg: &ExperimentConfig,
    out: Option<&Path>,
    plot: bool,
) -> anyhow::Result<NoiseRun> {
    cfg.validate()?;
    let (cav, chain, env) = built(cfg)?;
    let rbw = cfg.noise.rbw_hz;
    let averages = cfg.noise.averages;

    let seg_len = (chain.sample_rate_hz / rbw).round();
    let duration = averages as f64 * seg_len / chain.sample_rate_hz;
    let pt = ScenePoint {
        gen_freq: cav.f_res,
        gen_power: Power::ZERO,
    };
    let frame = synthesize(&pt, &chain, &cav, &env, duration, cfg.sweep.master_seed)?;
    let spec = analyze(&frame, &AnalyzerSettings::new(rbw, averages, Window::Hann))?;

    // Passband bins, mapped back to RF so the record carries cavity-frame
    // frequencies.
    let lo = chain.lo_freq.hz();
    let mut rf = Vec::new();
    let mut pw = Vec::new();
    for (f, p) in spec.freqs_hz().iter().zip(spec.powers_w()) {
        if *f > 0.0 && *f <= chain.lpf_cutoff_hz {
            rf.push(lo + f);
            pw.push(*p);
        }
    }

    let half_span = NOISE_FIT_HALF_LINEWIDTHS * cav.f_res.hz() / cav.q_loaded;
    let mut fit_f = Vec::new();
    let mut fit_p = Vec::new();
    for (f, p) in rf.iter().zip(&pw) {
        if (f - cav.f_res.hz()).abs() <= half_span {
            fit_f.push(*f);
            fit_p.push(*p);
        }
    }
    let data = SweepData::new(fit_f, fit_p, SweepSource::NoiseOnly)?;
    let guess = initial_guess(&data)?;
    let fitted = fit_lorentzian(&data, &guess)?;

    let noise_budget = budget(&cav, &env, rbw, 0.0)?;
    let run = NoiseRun {
        rf_freqs_hz: rf,
        powers_w: pw,
        fit: fitted,
        budget: noise_budget,
    };

    write_artifact(
        out,
        "noise_spectrum.csv",
        &spectrum_csv(&run.rf_freqs_hz, &run.powers_w),
    )?;
    write_artifact(out, "noise_fit.txt", &run.report())?;
    if plot {
        write_artifact(
            out,
            "noise_plot.csv",
            &plot_csv(&run.rf_freqs_hz, &run.powers_w, run.fit.f_center_hz),
        )?;
    }
    Ok(run)
}

#[derive(Debug)]
pub struct SensitivityReport {
    pub f_hz: f64,
    pub q: f64,
    pub temp_k: f64,
    pub snr: f64,
    pub single_photon_power_w: f64,
    pub occupation: f64,
    pub total_noise_power_w: f64,
    pub required_rbw_hz: f64,
    pub min_measure_time_s: f64,
    pub optical_lambda_m: f64,
    pub optical_finesse: f64,
    pub optical_length_m: f64,
    pub optical_single_photon_power_w: f64,
}

impl SensitivityReport {
    pub fn render(&self) -> String {
        format!(
            "f_hz={:.6e}\nq={:.6e}\ntemp_k={}\nsnr={}\nsingle_photon_power_w={:.6e}\nsingle_photon_power_dbm={:.4}\noccupation={:.6e}\ntotal_noise_power_w={:.6e}\nrequired_rbw_hz={:.6e}\nmin_measure_time_s={:.6e}\noptical_lambda_m={:.6e}\noptical_finesse={:.6e}\noptical_length_m={:.6e}\noptical_single_photon_power_w={:.6e}\n",
            self.f_hz,
            self.q,
            self.temp_k,
            self.snr,
            self.single_photon_power_w,
            watts_to_dbm(self.single_photon_power_w),
            self.occupation,
            self.total_noise_power_w,
            self.required_rbw_hz,
            self.min_measure_time_s,
            self.optical_lambda_m,
            self.optical_finesse,
            self.optical_length_m,
            self.optical_single_photon_power_w,
        )
    }
}

/// Single-photon power, thermal budget, and the resolution bandwidth /
/// measurement time needed to see one photon at the requested S/N.
pub fn run_sensitivity(
    f_hz: f64,
    q: f64,
    temp_k: f64,
    snr: f64,
    optical_lambda_m: f64,
    optical_finesse: f64,
    optical_length_m: f64,
) -> anyhow::Result<SensitivityReport> {
    let f = Frequency::from_hz(f_hz)?;
    let env = ThermalEnvironment::new(temp_k)?;
    let cav = CavityParams::new(f, q, 0.0, 0.0)?;
    let rbw = required_rbw(f, &env, q, snr)?;
    Ok(SensitivityReport {
        f_hz,
        q,
        temp_k,
        snr,
        single_photon_power_w: single_photon_power(f, q)?.watts(),
        occupation: occupation(f, &env),
        total_noise_power_w: total_noise_power(&cav, &env)?.watts(),
        required_rbw_hz: rbw.hz(),
        min_measure_time_s: min_measure_time(rbw.hz())?,
        optical_lambda_m,
        optical_finesse,
        optical_length_m,
        optical_single_photon_power_w: optical_single_photon_power(
            optical_lambda_m,
            optical_finesse,
            optical_length_m,
        )?
        .watts(),
    })
}

#[derive(Debug)]
pub struct PhotonRow {
    pub power_dbm: f64,
    pub energy_j: f64,
    pub photons: f64,
}

/// Stored energy and photon number at resonance for each power level.
pub fn run_photons(cfg: &ExperimentConfig, powers_dbm: &[f64]) -> anyhow::Result<Vec<PhotonRow>> {
    cfg.validate()?;
    let cav = cfg.cavity.build()?;
    let rows = powers_dbm
        .iter()
        .map(|&p| {
            let (energy_j, photons) = stored_photons(&cav, cav.f_res, dbm_to_watts(p)?);
            Ok(PhotonRow {
                power_dbm: p,
                energy_j,
                photons,
            })
        })
        .collect::<cavitysim::Result<Vec<_>>>()?;
    Ok(rows)
}

pub fn photon_table(rows: &[PhotonRow]) -> String {
    let mut out = String::from("power_dbm,energy_j,photons\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.6e},{:.6e}\n",
            r.power_dbm, r.energy_j, r.photons
        ));
    }
    out
}

/// Refit a spectrum CSV. `rf_offset_hz` shifts the frequency column first,
/// for records stored in baseband coordinates.
pub fn fit_csv_file(
    path: &Path,
    rf_offset_hz: f64,
    out: Option<&Path>,
) -> anyhow::Result<FitResult> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (mut freqs, powers) = parse_spectrum_csv(&text)?;
    for f in &mut freqs {
        *f += rf_offset_hz;
    }
    let data = SweepData::new(freqs, powers, SweepSource::Driven)?;
    let fitted = fit(&data)?;
    write_artifact(out, "fit.txt", &fitted.report())?;
    Ok(fitted)
}
