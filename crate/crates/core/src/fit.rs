//! Lorentzian least squares on measured sweeps and noise spectra.
//!
//! The model is `P(f) = baseline + peak / (1 + 4 Q^2 ((f - f_c)/f_c)^2)`,
//! fitted in linear watts with a damped Gauss-Newton loop (Levenberg-style
//! schedule: damping starts at 1e-3, grows tenfold on a rejected step,
//! shrinks tenfold on an accepted one). Accepted steps never increase the
//! objective. Standard errors come from the residual-scaled curvature of
//! the objective at the optimum.

// Index loops mirror the textbook elimination steps on the 4x4 systems.
#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};
use crate::units::watts_to_dbm;

/// Whether the sweep was driven by a generator or is a noise-only record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepSource {
    Driven,
    NoiseOnly,
}

/// An ordered (frequency, power) record ready for fitting.
#[derive(Debug, Clone)]
pub struct SweepData {
    freqs_hz: Vec<f64>,
    powers_w: Vec<f64>,
    source: SweepSource,
}

impl SweepData {
    pub fn new(freqs_hz: Vec<f64>, powers_w: Vec<f64>, source: SweepSource) -> Result<Self> {
        if freqs_hz.len() != powers_w.len() {
            return Err(Error::invalid(
                "frequency and power columns differ in length".to_string(),
            ));
        }
        if freqs_hz.len() < 5 {
            return Err(Error::invalid(format!(
                "need at least 5 points to fit, got {}",
                freqs_hz.len()
            )));
        }
        if freqs_hz.iter().any(|f| !f.is_finite() || *f <= 0.0) {
            return Err(Error::invalid(
                "frequencies must be finite and positive".to_string(),
            ));
        }
        if freqs_hz.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "frequencies must be strictly increasing".to_string(),
            ));
        }
        if powers_w.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid(
                "powers must be finite and non-negative".to_string(),
            ));
        }
        Ok(SweepData {
            freqs_hz,
            powers_w,
            source,
        })
    }

    pub fn freqs_hz(&self) -> &[f64] {
        &self.freqs_hz
    }

    pub fn powers_w(&self) -> &[f64] {
        &self.powers_w
    }

    pub fn source(&self) -> SweepSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.freqs_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs_hz.is_empty()
    }
}

/// Per-parameter standard errors of a converged fit.
#[derive(Debug, Clone, Copy)]
pub struct FitStderr {
    pub peak_power_w: f64,
    pub f_center_hz: f64,
    pub q_loaded: f64,
    pub baseline_w: f64,
}

/// Fitted Lorentzian parameters. Also doubles as the seed-value carrier
/// produced by [`initial_guess`].
#[derive(Debug, Clone, Copy)]
pub struct FitResult {
    /// Height of the resonance above the baseline, W.
    pub peak_power_w: f64,
    pub f_center_hz: f64,
    pub q_loaded: f64,
    /// Flat floor under the resonance, W (free sign; absorbs the
    /// amplifier noise pedestal in noise-only fits).
    pub baseline_w: f64,
    pub residual_rms_w: f64,
    /// Present only when the fit converged and the curvature had full rank.
    pub stderr: Option<FitStderr>,
    pub converged: bool,
    pub iterations: usize,
    /// Set when the data's maximum sits on the first or last point.
    pub edge_peak: bool,
}

impl FitResult {
    /// Plain-text key=value report in the exchange format.
    pub fn report(&self) -> String {
        let (q_err, f_err, p_err) = match &self.stderr {
            Some(s) => (
                format!("{:.6e}", s.q_loaded),
                format!("{:.6e}", s.f_center_hz),
                format!("{:.6e}", s.peak_power_w),
            ),
            None => (
                "unavailable".to_string(),
                "unavailable".to_string(),
                "unavailable".to_string(),
            ),
        };
        format!(
            "q_loaded={:.6e}\nq_stderr={}\nf_center_hz={:.6e}\nf_center_stderr_hz={}\npeak_dbm={:.6}\npeak_stderr_w={}\nbaseline_dbm={:.6}\nresidual_rms_dbm={:.6}\nconverged={}\niterations={}\nedge_peak={}\n",
            self.q_loaded,
            q_err,
            self.f_center_hz,
            f_err,
            watts_to_dbm(self.peak_power_w),
            p_err,
            watts_to_dbm(self.baseline_w.max(0.0)),
            watts_to_dbm(self.residual_rms_w),
            self.converged,
            self.iterations,
            self.edge_peak,
        )
    }
}

fn lorentz_model(f: f64, peak: f64, f_c: f64, q: f64, baseline: f64) -> f64 {
    let x = (f - f_c) / f_c;
    baseline + peak / (1.0 + 4.0 * q * q * x * x)
}

/// Seed parameter values from the data: the maximum sets the peak and
/// center, the half-power crossing width (linearly interpolated) sets Q,
/// and the median of the lowest quartile sets the baseline.
pub fn initial_guess(d: &SweepData) -> Result<FitResult> {
    let powers = d.powers_w();
    let freqs = d.freqs_hz();
    let (peak_idx, &max_p) = powers
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite powers"))
        .expect("non-empty data");
    let min_p = powers.iter().cloned().fold(f64::INFINITY, f64::min);
    if max_p == min_p {
        return Err(Error::NoPeak("all powers are equal".to_string()));
    }

    let mut low = powers.to_vec();
    low.sort_by(|a, b| a.partial_cmp(b).expect("finite powers"));
    let quartile = &low[..(low.len() / 4).max(1)];
    let baseline = quartile[quartile.len() / 2];

    let f_center = freqs[peak_idx];
    let edge_peak = peak_idx == 0 || peak_idx == powers.len() - 1;
    let level = baseline + 0.5 * (max_p - baseline);

    // First crossing of the half-power level walking outward from the peak.
    let mut left = None;
    for i in (0..peak_idx).rev() {
        if powers[i] < level {
            let t = (level - powers[i]) / (powers[i + 1] - powers[i]);
            left = Some(freqs[i] + t * (freqs[i + 1] - freqs[i]));
            break;
        }
    }
    let mut right = None;
    for i in peak_idx + 1..powers.len() {
        if powers[i] < level {
            let t = (level - powers[i - 1]) / (powers[i] - powers[i - 1]);
            right = Some(freqs[i - 1] + t * (freqs[i] - freqs[i - 1]));
            break;
        }
    }
    let width = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (None, Some(r)) => 2.0 * (r - f_center),
        (Some(l), None) => 2.0 * (f_center - l),
        (None, None) => 0.5 * (freqs[freqs.len() - 1] - freqs[0]),
    };
    let q = if width > 0.0 {
        f_center / width
    } else {
        f_center
    };

    let peak = max_p - baseline;
    let residual_rms = {
        let ss: f64 = freqs
            .iter()
            .zip(powers)
            .map(|(f, p)| {
                let r = lorentz_model(*f, peak, f_center, q, baseline) - p;
                r * r
            })
            .sum();
        (ss / powers.len() as f64).sqrt()
    };

    Ok(FitResult {
        peak_power_w: peak,
        f_center_hz: f_center,
        q_loaded: q,
        baseline_w: baseline,
        residual_rms_w: residual_rms,
        stderr: None,
        converged: false,
        iterations: 0,
        edge_peak,
    })
}

/// Solve the 4x4 system `a * x = b` by Gaussian elimination with partial
/// pivoting. Returns None when the matrix is numerically singular.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let mut pivot = col;
        for row in col + 1..4 {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let m = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= m * a[col][k];
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = [0.0; 4];
    for col in (0..4).rev() {
        let mut s = b[col];
        for k in col + 1..4 {
            s -= a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
    }
    Some(x)
}

/// Invert a symmetric 4x4 via Gauss-Jordan. None when singular.
fn invert4(m: [[f64; 4]; 4]) -> Option<[[f64; 4]; 4]> {
    let mut a = m;
    let mut inv = [[0.0f64; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..4 {
        let mut pivot = col;
        for row in col + 1..4 {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for k in 0..4 {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for row in 0..4 {
            if row != col {
                let m = a[row][col];
                for k in 0..4 {
                    a[row][k] -= m * a[col][k];
                    inv[row][k] -= m * inv[col][k];
                }
            }
        }
    }
    Some(inv)
}

const MAX_ITERATIONS: usize = 200;
const STEP_TOLERANCE: f64 = 1e-9;

/// Nonlinear least squares refinement of `guess` against `d`.
///
/// Non-convergence is not an error: the best iterate comes back with
/// `converged = false` and no standard errors.
pub fn fit_lorentzian(d: &SweepData, guess: &FitResult) -> Result<FitResult> {
    for (name, v) in [
        ("peak", guess.peak_power_w),
        ("f_center", guess.f_center_hz),
        ("q", guess.q_loaded),
        ("baseline", guess.baseline_w),
    ] {
        if !v.is_finite() {
            return Err(Error::invalid(format!(
                "guess {name} must be finite, got {v}"
            )));
        }
    }
    if guess.f_center_hz <= 0.0 || guess.q_loaded <= 0.0 {
        return Err(Error::invalid(
            "guess center frequency and Q must be positive".to_string(),
        ));
    }

    let freqs = d.freqs_hz();
    let powers = d.powers_w();
    let n = powers.len();

    // Work in multiples of the guess so the normal equations stay
    // conditioned despite watts ~1e-18 sitting next to hertz ~1e10.
    let peak_scale = if guess.peak_power_w > 0.0 {
        guess.peak_power_w
    } else {
        powers.iter().cloned().fold(0.0, f64::max).max(1e-300)
    };
    let scales = [peak_scale, guess.f_center_hz, guess.q_loaded, peak_scale];
    let mut u = [
        guess.peak_power_w / scales[0],
        1.0,
        1.0,
        guess.baseline_w / scales[3],
    ];

    let ssr_of = |u: &[f64; 4]| -> f64 {
        let (p, f_c, q, b) = (
            u[0] * scales[0],
            u[1] * scales[1],
            u[2] * scales[2],
            u[3] * scales[3],
        );
        freqs
            .iter()
            .zip(powers)
            .map(|(f, y)| {
                let r = lorentz_model(*f, p, f_c, q, b) - y;
                r * r
            })
            .sum()
    };

    // J^T J and J^T r for the current scaled parameters.
    let normal_eqs = |u: &[f64; 4]| -> ([[f64; 4]; 4], [f64; 4]) {
        let (p, f_c, q, _b) = (
            u[0] * scales[0],
            u[1] * scales[1],
            u[2] * scales[2],
            u[3] * scales[3],
        );
        let mut jtj = [[0.0f64; 4]; 4];
        let mut jtr = [0.0f64; 4];
        for (f, y) in freqs.iter().zip(powers) {
            let x = (f - f_c) / f_c;
            let den = 1.0 + 4.0 * q * q * x * x;
            let lor = 1.0 / den;
            let r = u[3] * scales[3] + p * lor - y;
            let dd = lor * lor;
            let j = [
                lor * scales[0],
                p * 8.0 * q * q * x * (f / (f_c * f_c)) * dd * scales[1],
                -p * 8.0 * q * x * x * dd * scales[2],
                scales[3],
            ];
            for a in 0..4 {
                jtr[a] += j[a] * r;
                for b in a..4 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        for a in 0..4 {
            for b in 0..a {
                jtj[a][b] = jtj[b][a];
            }
        }
        (jtj, jtr)
    };

    let mut ssr = ssr_of(&u);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = normal_eqs(&u);
        let mut damped = jtj;
        for k in 0..4 {
            damped[k][k] += lambda * jtj[k][k].max(1e-300);
        }
        let rhs = [-jtr[0], -jtr[1], -jtr[2], -jtr[3]];
        let Some(step) = solve4(damped, rhs) else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
            continue;
        };
        let trial = [
            u[0] + step[0],
            u[1] + step[1],
            u[2] + step[2],
            u[3] + step[3],
        ];
        let physical = trial.iter().all(|v| v.is_finite())
            && trial[0] * scales[0] >= 0.0
            && trial[1] * scales[1] > 0.0
            && trial[2] * scales[2] > 0.0;
        let trial_ssr = if physical {
            ssr_of(&trial)
        } else {
            f64::INFINITY
        };
        if trial_ssr <= ssr {
            let rel_step = (0..4)
                .map(|k| step[k].abs() / u[k].abs().max(1.0))
                .fold(0.0, f64::max);
            u = trial;
            ssr = trial_ssr;
            lambda = (lambda / 10.0).max(1e-12);
            if rel_step < STEP_TOLERANCE {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }

    let stderr = if converged && n > 4 {
        let (jtj, _) = normal_eqs(&u);
        invert4(jtj).map(|cov| {
            let s2 = ssr / (n - 4) as f64;
            FitStderr {
                peak_power_w: (s2 * cov[0][0]).max(0.0).sqrt() * scales[0],
                f_center_hz: (s2 * cov[1][1]).max(0.0).sqrt() * scales[1],
                q_loaded: (s2 * cov[2][2]).max(0.0).sqrt() * scales[2],
                baseline_w: (s2 * cov[3][3]).max(0.0).sqrt() * scales[3],
            }
        })
    } else {
        None
    };

    Ok(FitResult {
        peak_power_w: u[0] * scales[0],
        f_center_hz: u[1] * scales[1],
        q_loaded: u[2] * scales[2],
        baseline_w: u[3] * scales[3],
        residual_rms_w: (ssr / n as f64).sqrt(),
        stderr,
        converged,
        iterations,
        edge_peak: guess.edge_peak,
    })
}

/// Convenience: guess then refine.
pub fn fit(d: &SweepData) -> Result<FitResult> {
    let guess = initial_guess(d)?;
    fit_lorentzian(d, &guess)
}

/// A Q value with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy)]
pub struct QEstimate {
    pub q: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct PairCheck {
    pub i: usize,
    pub j: usize,
    pub difference: f64,
    pub combined_sigma: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    pub pairs: Vec<PairCheck>,
    pub overall_pass: bool,
    pub tol: f64,
}

/// Pairwise agreement of Q estimates: each |Q_i - Q_j| is compared
/// against `tol` times the combined uncertainty sqrt(s_i^2 + s_j^2).
pub fn q_consistency(estimates: &[QEstimate], tol: f64) -> Result<ConsistencyReport> {
    if estimates.len() < 2 {
        return Err(Error::invalid(format!(
            "consistency check needs at least 2 estimates, got {}",
            estimates.len()
        )));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut pairs = Vec::new();
    let mut overall = true;
    for i in 0..estimates.len() {
        for j in i + 1..estimates.len() {
            let difference = (estimates[i].q - estimates[j].q).abs();
            let combined = (estimates[i].sigma.powi(2) + estimates[j].sigma.powi(2)).sqrt();
            let pass = difference <= tol * combined;
            overall &= pass;
            pairs.push(PairCheck {
                i,
                j,
                difference,
                combined_sigma: combined,
                pass,
            });
        }
    }
    Ok(ConsistencyReport {
        pairs,
        overall_pass: overall,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn synthetic(peak: f64, f_c: f64, q: f64, baseline: f64, n: usize, span_lw: f64) -> SweepData {
        let lw = f_c / q;
        let f0 = f_c - span_lw / 2.0 * lw;
        let step = span_lw * lw / (n - 1) as f64;
        let freqs: Vec<f64> = (0..n).map(|i| f0 + i as f64 * step).collect();
        let powers: Vec<f64> = freqs
            .iter()
            .map(|f| lorentz_model(*f, peak, f_c, q, baseline))
            .collect();
        SweepData::new(freqs, powers, SweepSource::Driven).unwrap()
    }

    #[test]
    fn guess_recovers_q_within_20_percent() {
        let d = synthetic(1e-13, 9.59e9, 8800.0, 0.0, 41, 5.0);
        let g = initial_guess(&d).unwrap();
        assert!(
            (g.q_loaded / 8800.0 - 1.0).abs() < 0.2,
            "guess Q {}",
            g.q_loaded
        );
        assert!(!g.edge_peak);
    }

    #[test]
    fn guess_flags_edge_peaks() {
        // Monotone data: upper half of a resonance only.
        let d = synthetic(1e-13, 9.59e9, 8800.0, 0.0, 21, 4.0);
        let half: Vec<f64> = d.freqs_hz()[..10].to_vec();
        let powers: Vec<f64> = d.powers_w()[..10].to_vec();
        let rising = SweepData::new(half, powers, SweepSource::Driven).unwrap();
        let g = initial_guess(&rising).unwrap();
        assert!(g.edge_peak);
        assert!(g.q_loaded > 0.0);
    }

    #[test]
    fn guess_rejects_flat_data() {
        let d = SweepData::new(
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
            vec![1e-12; 5],
            SweepSource::Driven,
        )
        .unwrap();
        assert!(matches!(initial_guess(&d), Err(Error::NoPeak(_))));
    }

    #[test]
    fn noiseless_round_trip_is_exact() {
        let peak = 1.320_9e-16; // -128.79 dBm
        let d = synthetic(peak, 9.590e9, 8800.0, 0.0, 41, 5.0);
        let fitted = fit(&d).unwrap();
        assert!(fitted.converged);
        assert_relative_eq!(fitted.peak_power_w, peak, max_relative = 1e-6);
        assert_relative_eq!(fitted.f_center_hz, 9.590e9, max_relative = 1e-9);
        assert_relative_eq!(fitted.q_loaded, 8800.0, max_relative = 1e-6);
        assert!(fitted.baseline_w.abs() <= 1e-9 * peak);
        assert!(fitted.residual_rms_w <= 1e-9 * peak);
        // Objective did not increase relative to the seed.
        let g = initial_guess(&d).unwrap();
        assert!(fitted.residual_rms_w <= g.residual_rms_w);
    }

    #[test]
    fn round_trip_with_baseline() {
        let d = synthetic(5e-15, 9.59e9, 12_000.0, 2e-16, 61, 6.0);
        let fitted = fit(&d).unwrap();
        assert!(fitted.converged);
        assert_relative_eq!(fitted.q_loaded, 12_000.0, max_relative = 1e-6);
        assert_relative_eq!(fitted.baseline_w, 2e-16, max_relative = 1e-5);
        let err = fitted.stderr.expect("converged fit has stderr");
        assert!(err.q_loaded < 1.0);
    }

    #[test]
    fn rescaling_powers_rescales_power_parameters_only() {
        let lw = 9.59e9 / 8800.0;
        let f0 = 9.59e9 - 2.5 * lw;
        let freqs: Vec<f64> = (0..41).map(|i| f0 + i as f64 * 5.0 * lw / 40.0).collect();
        // Perturb slightly so the fit is non-trivial and stderr is nonzero.
        let powers: Vec<f64> = freqs
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let wiggle = 1.0 + 1e-3 * ((i * 37 % 11) as f64 - 5.0) / 5.0;
                lorentz_model(*f, 3e-16, 9.59e9, 8800.0, 1e-17) * wiggle
            })
            .collect();
        let scale = 2.5e4;
        let scaled: Vec<f64> = powers.iter().map(|p| p * scale).collect();
        let a = fit(&SweepData::new(freqs.clone(), powers, SweepSource::Driven).unwrap()).unwrap();
        let b = fit(&SweepData::new(freqs, scaled, SweepSource::Driven).unwrap()).unwrap();
        assert!(a.converged && b.converged);
        assert_relative_eq!(b.peak_power_w, a.peak_power_w * scale, max_relative = 1e-9);
        assert_relative_eq!(b.baseline_w, a.baseline_w * scale, max_relative = 1e-7);
        assert_relative_eq!(
            b.residual_rms_w,
            a.residual_rms_w * scale,
            max_relative = 1e-9
        );
        assert_relative_eq!(b.f_center_hz, a.f_center_hz, max_relative = 1e-9);
        assert_relative_eq!(b.q_loaded, a.q_loaded, max_relative = 1e-9);
        let (ea, eb) = (a.stderr.unwrap(), b.stderr.unwrap());
        assert_relative_eq!(
            eb.peak_power_w,
            ea.peak_power_w * scale,
            max_relative = 1e-7
        );
        assert_relative_eq!(eb.q_loaded, ea.q_loaded, max_relative = 1e-7);
    }

    #[test]
    fn consistency_of_measured_q_values() {
        let table: Vec<QEstimate> = [8800.0, 8900.0, 7100.0, 8200.0]
            .iter()
            .map(|q| QEstimate {
                q: *q,
                sigma: 1000.0,
            })
            .collect();
        let report = q_consistency(&table, 1.5).unwrap();
        assert!(report.overall_pass);
        assert_eq!(report.pairs.len(), 6);

        let gross = [
            QEstimate {
                q: 8800.0,
                sigma: 1000.0,
            },
            QEstimate {
                q: 20_000.0,
                sigma: 1000.0,
            },
        ];
        assert!(!q_consistency(&gross, 1.5).unwrap().overall_pass);

        let repeated = [
            QEstimate {
                q: 8800.0,
                sigma: 1000.0,
            },
            QEstimate {
                q: 8800.0,
                sigma: 1000.0,
            },
        ];
        let rep = q_consistency(&repeated, 1.5).unwrap();
        assert!(rep.overall_pass);
        assert_eq!(rep.pairs[0].difference, 0.0);

        assert!(q_consistency(&table[..1], 1.5).is_err());
    }

    #[test]
    fn report_format_keys() {
        let d = synthetic(1e-13, 9.59e9, 8800.0, 0.0, 41, 5.0);
        let fitted = fit(&d).unwrap();
        let report = fitted.report();
        for key in [
            "q_loaded=",
            "q_stderr=",
            "f_center_hz=",
            "peak_dbm=",
            "converged=true",
        ] {
            assert!(report.contains(key), "missing {key} in:\n{report}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip_across_q_range(
            q in 1e3f64..1e5,
            peak_exp in -19.0f64..-10.0,
            base_frac in 0.0f64..0.5,
            n in 21usize..80,
            span in 4.0f64..8.0,
        ) {
            let peak = 10f64.powf(peak_exp);
            let d = synthetic(peak, 9.59e9, q, base_frac * peak, n, span);
            let fitted = fit(&d).unwrap();
            prop_assert!(fitted.converged);
            prop_assert!((fitted.q_loaded / q - 1.0).abs() <= 1e-6);
            prop_assert!((fitted.peak_power_w / peak - 1.0).abs() <= 1e-6);
            prop_assert!((fitted.f_center_hz / 9.59e9 - 1.0).abs() <= 1e-9);
        }
    }
}
