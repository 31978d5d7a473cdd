//! Thermal photon statistics and noise budgets for the cavity: emission
//! PSD, its frequency integral, per-bin noise at a given resolution
//! bandwidth, and the largest bandwidth that still resolves a single
//! photon's output power at a target signal-to-noise ratio.
//!
//! Only the cavity's own thermal emission lives here. Amplifier noise is
//! a property of the measurement chain and is added in [`crate::chain`].

use crate::cavity::{lorentzian_factor, single_photon_power, CavityParams};
use crate::error::{Error, Result};
use crate::units::{Frequency, Power, HBAR, K_B};

/// The thermal bath the cavity sits in.
#[derive(Debug, Clone, Copy)]
pub struct ThermalEnvironment {
    /// Temperature in kelvin, > 0.
    pub temp: f64,
}

impl ThermalEnvironment {
    pub fn new(temp: f64) -> Result<Self> {
        if !(temp > 0.0 && temp.is_finite()) {
            return Err(Error::invalid(format!(
                "temperature must be positive, got {temp} K"
            )));
        }
        Ok(ThermalEnvironment { temp })
    }
}

/// Bose-Einstein occupation number 1 / (exp(hbar*omega / k_B*T) - 1).
pub fn occupation(f: Frequency, env: &ThermalEnvironment) -> f64 {
    let x = HBAR * f.angular() / (K_B * env.temp);
    1.0 / x.exp_m1()
}

/// Thermal emission PSD of the cavity at angular frequency `omega`,
/// in W per (rad/s):
/// (1/2pi) * hbar*omega / (exp(hbar*omega/k_B*T) - 1) * lorentzian.
pub fn noise_psd(omega: f64, c: &CavityParams, env: &ThermalEnvironment) -> f64 {
    let x = HBAR * omega / (K_B * env.temp);
    let planck = HBAR * omega / x.exp_m1();
    planck / (2.0 * std::f64::consts::PI) * lorentzian_factor(omega, c.f_res, c.q_loaded)
}

/// Frequency-integrated thermal output power,
/// hbar*omega_res^2/Q * 1/4 * occupation. Valid for large Q only.
pub fn total_noise_power(c: &CavityParams, env: &ThermalEnvironment) -> Result<Power> {
    if c.q_loaded < 100.0 {
        return Err(Error::RegimeViolation(format!(
            "closed-form total noise power requires Q >= 100, got {}",
            c.q_loaded
        )));
    }
    let om = c.f_res.angular();
    Power::from_watts(HBAR * om * om / c.q_loaded * 0.25 * occupation(c.f_res, env))
}

/// Thermal noise power that lands in one analysis bin centered on `at`.
///
/// The bin width is max(rbw, signal_bw) in Hz, converted to rad/s against
/// the PSD. The narrow-bin linearization is clamped so a very wide bin
/// never reports more than the total emitted power.
pub fn per_bin_noise(
    c: &CavityParams,
    env: &ThermalEnvironment,
    rbw_hz: f64,
    signal_bw_hz: f64,
    at: Frequency,
) -> Result<Power> {
    if !(rbw_hz > 0.0 && rbw_hz.is_finite()) {
        return Err(Error::invalid(format!(
            "resolution bandwidth must be positive, got {rbw_hz}"
        )));
    }
    if !(signal_bw_hz >= 0.0 && signal_bw_hz.is_finite()) {
        return Err(Error::invalid(format!(
            "signal bandwidth must be non-negative, got {signal_bw_hz}"
        )));
    }
    let bin_hz = rbw_hz.max(signal_bw_hz);
    let mut w = noise_psd(at.angular(), c, env) * 2.0 * std::f64::consts::PI * bin_hz;
    if c.q_loaded >= 100.0 {
        let total = total_noise_power(c, env)?.watts();
        if w > total {
            w = total;
        }
    }
    Power::from_watts(w)
}

/// Largest resolution bandwidth (in Hz) at which the output power of a
/// single intracavity photon equals `snr` times the per-bin thermal
/// noise: delta_f = hbar*omega_res^2 / (k_B*T*Q) / snr. Valid in the
/// Rayleigh-Jeans regime hbar*omega << k_B*T.
pub fn required_rbw(
    f_res: Frequency,
    env: &ThermalEnvironment,
    q: f64,
    snr: f64,
) -> Result<Frequency> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::invalid(format!(
            "quality factor must be positive, got {q}"
        )));
    }
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::invalid(format!(
            "signal-to-noise ratio must be positive, got {snr}"
        )));
    }
    let om = f_res.angular();
    let x = HBAR * om / (K_B * env.temp);
    if x > 0.1 {
        return Err(Error::RegimeViolation(format!(
            "Rayleigh-Jeans form requires hbar*omega/k_B*T <= 0.1, got {x:.3}"
        )));
    }
    Frequency::from_hz(HBAR * om * om / (K_B * env.temp * q) / snr)
}

/// Minimum measurement time that supports a given resolution bandwidth.
pub fn min_measure_time(rbw_hz: f64) -> Result<f64> {
    if !(rbw_hz > 0.0 && rbw_hz.is_finite()) {
        return Err(Error::invalid(format!(
            "resolution bandwidth must be positive, got {rbw_hz}"
        )));
    }
    Ok(1.0 / rbw_hz)
}

/// Summary of the thermal noise situation for one cavity + bin setup.
#[derive(Debug, Clone, Copy)]
pub struct NoiseBudget {
    /// Peak of the emission PSD, W/(rad/s).
    pub psd_peak: f64,
    /// Frequency-integrated emitted power.
    pub total_power: Power,
    /// Noise in one on-resonance analysis bin.
    pub per_bin_power: Power,
    /// Effective bin width used, Hz.
    pub bin_width_hz: f64,
    /// Bose-Einstein occupation at the resonance.
    pub occupation: f64,
    /// per_bin_power expressed in units of the single-photon output power.
    pub per_bin_photon_equivalent: f64,
}

/// Assemble the noise budget at the cavity resonance.
pub fn budget(
    c: &CavityParams,
    env: &ThermalEnvironment,
    rbw_hz: f64,
    signal_bw_hz: f64,
) -> Result<NoiseBudget> {
    let per_bin = per_bin_noise(c, env, rbw_hz, signal_bw_hz, c.f_res)?;
    let single = single_photon_power(c.f_res, c.q_loaded)?;
    Ok(NoiseBudget {
        psd_peak: noise_psd(c.f_res.angular(), c, env),
        total_power: total_noise_power(c, env)?,
        per_bin_power: per_bin,
        bin_width_hz: rbw_hz.max(signal_bw_hz),
        occupation: occupation(c.f_res, env),
        per_bin_photon_equivalent: per_bin.watts() / single.watts(),
    })
}
