//! End-to-end model of the measurement chain: generator, attenuator
//! stack, cavity, low-noise amplifier, mixer against a fixed local
//! oscillator, low-pass filter, and the baseband time series handed to
//! the FFT analyzer.
//!
//! Two modes are provided. The analytic mode composes the closed-form
//! transmission and noise budgets into the expected per-bin powers. The
//! stochastic mode synthesizes an actual baseband voltage record: cavity
//! thermal noise enters as complex-Gaussian spectral amplitudes shaped by
//! the cavity Lorentzian, amplifier noise as a white floor, and the drive
//! as a coherent tone, all inside the filter passband. Noise is injected
//! at the cavity and at the LNA input only; the attenuators sit upstream
//! of the cavity reference plane and their own emission is treated as
//! part of the cavity's thermal state.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analyzer::{analyze, AnalyzerSettings, Window};
use crate::cavity::{coupled_transmission, CavityParams};
use crate::error::{Error, Result};
use crate::fftutil;
use crate::thermal::{noise_psd, per_bin_noise, ThermalEnvironment};
use crate::units::{Frequency, Power, K_B};

/// Gains, conversion, and filtering between the generator and the
/// analyzer input.
#[derive(Debug, Clone, Copy)]
pub struct ChainConfig {
    /// Attenuation between the generator and the cavity input, dB >= 0.
    pub attenuation_db: f64,
    /// Low-noise amplifier gain, dB.
    pub lna_gain_db: f64,
    /// LNA input-referred noise temperature, K >= 0.
    pub lna_noise_temp: f64,
    /// Local oscillator frequency for the downconverting mixer.
    pub lo_freq: Frequency,
    /// Low-pass cutoff after the mixer, Hz.
    pub lpf_cutoff_hz: f64,
    /// Baseband sampling rate, Hz; must exceed twice the cutoff.
    pub sample_rate_hz: f64,
    /// Post-mixer amplifier gain, dB.
    pub post_gain_db: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            attenuation_db: 124.0,
            lna_gain_db: 30.0,
            lna_noise_temp: 100.0,
            lo_freq: Frequency::from_hz(9.584e9).expect("default LO is valid"),
            lpf_cutoff_hz: 10e6,
            sample_rate_hz: 25e6,
            post_gain_db: 30.0,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("attenuation_db", self.attenuation_db),
            ("lna_gain_db", self.lna_gain_db),
            ("lna_noise_temp", self.lna_noise_temp),
            ("lpf_cutoff_hz", self.lpf_cutoff_hz),
            ("sample_rate_hz", self.sample_rate_hz),
            ("post_gain_db", self.post_gain_db),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(format!(
                    "chain.{name} must be finite, got {v}"
                )));
            }
        }
        if self.attenuation_db < 0.0 {
            return Err(Error::invalid("attenuation must be >= 0 dB".to_string()));
        }
        if self.lna_noise_temp < 0.0 {
            return Err(Error::invalid(
                "LNA noise temperature must be >= 0 K".to_string(),
            ));
        }
        if self.lpf_cutoff_hz <= 0.0 {
            return Err(Error::invalid(
                "low-pass cutoff must be positive".to_string(),
            ));
        }
        if self.sample_rate_hz <= 2.0 * self.lpf_cutoff_hz {
            return Err(Error::invalid(format!(
                "sample rate {} Hz must exceed twice the low-pass cutoff {} Hz",
                self.sample_rate_hz, self.lpf_cutoff_hz
            )));
        }
        Ok(())
    }

    /// Linear power gain seen by anything entering at the cavity output.
    pub fn chain_gain(&self) -> f64 {
        10f64.powf((self.lna_gain_db + self.post_gain_db) / 10.0)
    }

    /// Linear attenuation factor applied to the generator output.
    pub fn attenuation(&self) -> f64 {
        10f64.powf(-self.attenuation_db / 10.0)
    }
}

/// One generator setting within a sweep.
#[derive(Debug, Clone, Copy)]
pub struct ScenePoint {
    /// Generator frequency (pre-mixer, RF).
    pub gen_freq: Frequency,
    /// Generator output power, upstream of the attenuator chain.
    pub gen_power: Power,
}

/// A real-valued baseband voltage record, normalized so the mean square
/// of the samples is a power in watts.
#[derive(Debug, Clone)]
pub struct BasebandFrame {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    pub duration: f64,
    pub seed: u64,
}

/// Closed-form expectation of what the analyzer sees at one sweep point.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticOutput {
    /// Coherent tone power in its analysis bin, after all chain gains.
    pub signal_bin_power: Power,
    /// Mean noise power in that bin (cavity thermal plus LNA white),
    /// after all chain gains, for a unity-noise-bandwidth bin.
    pub noise_bin_power: Power,
    /// Frequency the tone lands on after downconversion, Hz.
    pub baseband_freq_hz: f64,
}

/// Standard normal pair from two raw 64-bit words (Box-Muller). Fixed
/// word consumption per pair, which is what makes every spectral bin
/// independently addressable in the RNG stream.
fn normal_pair(w1: u64, w2: u64) -> (f64, f64) {
    let u1 = ((w1 >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0);
    let u2 = ((w2 >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0);
    let r = (-2.0 * u1.ln()).sqrt();
    let phase = 2.0 * std::f64::consts::PI * u2;
    (r * phase.cos(), r * phase.sin())
}

/// Complex-Gaussian amplitude of spectral bin `k`, drawn from the words
/// reserved for that bin (4 words starting at 4k). Sequential synthesis
/// walks these positions contiguously; bin-addressed evaluation seeks to
/// them, and both see identical values.
fn bin_amplitude(rng: &mut ChaCha8Rng, sigma: f64) -> Complex64 {
    let (g1, g2) = normal_pair(rng.next_u64(), rng.next_u64());
    Complex64::new(sigma * g1, sigma * g2)
}

/// One-sided noise PSD (W/Hz) entering the analyzer at baseband
/// frequency `f_b`: Lorentzian-shaped cavity emission mapped through the
/// mixer plus the white LNA floor, both amplified by the chain gain.
fn baseband_noise_psd(
    f_b: f64,
    chain: &ChainConfig,
    cav: &CavityParams,
    env: &ThermalEnvironment,
) -> f64 {
    let om_rf = 2.0 * std::f64::consts::PI * (chain.lo_freq.hz() + f_b);
    chain.chain_gain()
        * (2.0 * std::f64::consts::PI * noise_psd(om_rf, cav, env) + K_B * chain.lna_noise_temp)
}

fn baseband_freq(pt: &ScenePoint, chain: &ChainConfig) -> Result<f64> {
    let f_b = pt.gen_freq.hz() - chain.lo_freq.hz();
    if f_b <= 0.0 {
        return Err(Error::Alias(format!(
            "generator at {} Hz is not above the {} Hz LO; the image band is not modeled",
            pt.gen_freq.hz(),
            chain.lo_freq.hz()
        )));
    }
    if f_b >= chain.lpf_cutoff_hz {
        return Err(Error::Alias(format!(
            "baseband image at {} Hz falls outside the {} Hz low-pass cutoff",
            f_b, chain.lpf_cutoff_hz
        )));
    }
    Ok(f_b)
}

/// Expected tone and per-bin noise power at the analyzer for one point.
pub fn analytic_output(
    pt: &ScenePoint,
    chain: &ChainConfig,
    cav: &CavityParams,
    env: &ThermalEnvironment,
    rbw_hz: f64,
) -> Result<AnalyticOutput> {
    chain.validate()?;
    let f_b = baseband_freq(pt, chain)?;
    let gain = chain.chain_gain();

    let at_cavity = pt.gen_power.scaled(chain.attenuation())?;
    let signal = coupled_transmission(cav, pt.gen_freq, at_cavity).scaled(gain)?;

    let cavity_noise = per_bin_noise(cav, env, rbw_hz, 0.0, pt.gen_freq)?.watts();
    let lna_noise = K_B * chain.lna_noise_temp * rbw_hz;
    let noise = Power::from_watts((cavity_noise + lna_noise) * gain)?;

    Ok(AnalyticOutput {
        signal_bin_power: signal,
        noise_bin_power: noise,
        baseband_freq_hz: f_b,
    })
}

/// Synthesize the baseband record for one generator setting.
///
/// Deterministic for a fixed seed. Noise is drawn in the frequency domain
/// (independent complex-Gaussian bins with variance set by the shaped
/// PSD), which gives exact spectral shaping with no filter transient; the
/// ideal low-pass is a brick wall on the synthesis grid.
pub fn synthesize(
    pt: &ScenePoint,
    chain: &ChainConfig,
    cav: &CavityParams,
    env: &ThermalEnvironment,
    duration: f64,
    seed: u64,
) -> Result<BasebandFrame> {
    chain.validate()?;
    let f_b = baseband_freq(pt, chain)?;
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::invalid(format!(
            "duration must be positive, got {duration}"
        )));
    }
    let fs = chain.sample_rate_hz;
    let n = (duration * fs).round() as usize;
    if n < 4 {
        return Err(Error::FrameTooShort(format!(
            "duration {duration} s is under 4 samples at {fs} Hz"
        )));
    }

    let df = fs / n as f64;
    let gain = chain.chain_gain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Half spectrum; the conjugate mirror is implicit in the c2r transform.
    let mut spec = vec![Complex64::new(0.0, 0.0); n / 2 + 1];

    // Positive-frequency bins inside the passband; DC and Nyquist stay
    // zero. Bin k owns RNG words 4k..4k+4.
    let top = (n - 1) / 2;
    rng.set_word_pos(4);
    for (k, bin) in spec.iter_mut().enumerate().take(top + 1).skip(1) {
        let f_k = k as f64 * df;
        if f_k > chain.lpf_cutoff_hz {
            break;
        }
        let sigma = 0.5 * n as f64 * (baseband_noise_psd(f_k, chain, cav, env) * df).sqrt();
        *bin = bin_amplitude(&mut rng, sigma);
    }

    // The coherent tone. On-grid tones are injected as exact DFT lines;
    // off-grid tones are added in the time domain after the transform.
    let signal_w = {
        let at_cavity = pt.gen_power.scaled(chain.attenuation())?;
        coupled_transmission(cav, pt.gen_freq, at_cavity).watts() * gain
    };
    let mut time_domain_tone = None;
    if signal_w > 0.0 {
        let amp = (2.0 * signal_w).sqrt();
        let k_exact = f_b / df;
        let k_round = k_exact.round();
        if (k_exact - k_round).abs() < 1e-9 && (k_round as usize) <= top {
            spec[k_round as usize] += Complex64::new(amp * n as f64 / 2.0, 0.0);
        } else {
            time_domain_tone = Some(amp);
        }
    }

    let c2r = fftutil::plan_c2r(n);
    let mut samples = vec![0.0f64; n];
    let mut scratch = c2r.make_scratch_vec();
    c2r.process_with_scratch(&mut spec, &mut samples, &mut scratch)
        .expect("synthesis buffers sized for the transform");
    drop(scratch);
    drop(spec);
    let inv_n = 1.0 / n as f64;
    for x in &mut samples {
        *x *= inv_n;
    }

    if let Some(amp) = time_domain_tone {
        let step = 2.0 * std::f64::consts::PI * f_b / fs;
        for (i, x) in samples.iter_mut().enumerate() {
            *x += amp * (step * i as f64).cos();
        }
    }

    Ok(BasebandFrame {
        samples,
        sample_rate: fs,
        duration,
        seed,
    })
}

/// Analytic or Monte Carlo execution of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Analytic,
    Stochastic,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepSettings {
    pub rbw_hz: f64,
    pub averages: usize,
    pub window: Window,
    pub mode: SweepMode,
    pub master_seed: u64,
}

/// What the analyzer reports at one sweep point.
#[derive(Debug, Clone, Copy)]
pub struct SweepPointResult {
    pub gen_freq_hz: f64,
    pub baseband_freq_hz: f64,
    /// Power in the tone's analysis bin: the expectation in analytic
    /// mode, one noisy realization in stochastic mode.
    pub measured_power_w: f64,
    pub analytic_signal_w: f64,
    pub analytic_noise_w: f64,
    /// Median off-tone bin power near the tone (stochastic mode only).
    pub noise_floor_w: Option<f64>,
}

impl SweepPointResult {
    /// Measured tone-to-floor power ratio, when a floor estimate exists.
    pub fn tone_snr(&self) -> Option<f64> {
        match self.noise_floor_w {
            Some(floor) if floor > 0.0 => Some((self.measured_power_w - floor).max(0.0) / floor),
            _ => None,
        }
    }
}

/// Seed for the RNG of sweep point `index` under `master_seed`. A pure
/// hash, so points can execute in any order (or concurrently) and still
/// reproduce the same realizations.
pub fn point_seed(master_seed: u64, index: u64) -> u64 {
    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    splitmix64(splitmix64(master_seed) ^ index.wrapping_mul(0xA076_1D64_78BD_642F))
}

/// Indices of the bins used for the local noise-floor estimate: nearby
/// in-band bins, skipping the tone and its immediate neighbors. Shared
/// by the transform path and the bin-addressed path so the selection
/// cannot drift between them.
fn floor_bin_indices(
    tone_bin: usize,
    n_bins: usize,
    rbw_eff: f64,
    lpf_cutoff_hz: f64,
) -> Vec<usize> {
    let in_band_max = lpf_cutoff_hz - rbw_eff;
    let within = |k: usize| k as f64 * rbw_eff <= in_band_max;
    let lo = tone_bin.saturating_sub(200).max(2);
    let hi = (tone_bin + 200).min(n_bins - 1);
    let mut nearby: Vec<usize> = (lo..=hi)
        .filter(|k| k.abs_diff(tone_bin) > 3 && within(*k))
        .collect();
    if nearby.len() < 8 {
        nearby = (2..n_bins)
            .filter(|k| k.abs_diff(tone_bin) > 3 && within(*k))
            .collect();
    }
    nearby
}

/// Bin-addressed evaluation of a one-segment rectangular-window
/// measurement. For that analyzer setting the forward transform exactly
/// undoes the synthesis transform, so the analyzed bins equal the drawn
/// spectral amplitudes; evaluating just the bins the measurement reads
/// gives the same numbers as the full round trip without materializing
/// the time series. Returns None when the setup needs the full pipeline
/// (off-grid tone or an unusable segment length).
fn direct_point(
    chain: &ChainConfig,
    cav: &CavityParams,
    env: &ThermalEnvironment,
    analytic: &AnalyticOutput,
    seed: u64,
    n: usize,
) -> Result<Option<(f64, Option<f64>)>> {
    if n < 4 {
        return Ok(None);
    }
    let fs = chain.sample_rate_hz;
    let df = fs / n as f64;
    let top = (n - 1) / 2;
    let n_bins = n / 2 + 1;

    let signal_w = analytic.signal_bin_power.watts();
    let k_tone = {
        let k_exact = analytic.baseband_freq_hz / df;
        let k_round = k_exact.round();
        if signal_w > 0.0 && (k_exact - k_round).abs() >= 1e-9 {
            return Ok(None);
        }
        k_round as usize
    };
    // Interior bins only; DC and Nyquist carry a different one-sided
    // fold factor and belong to the transform path.
    if k_tone == 0 || k_tone > top {
        return Ok(None);
    }

    let floor_bins = floor_bin_indices(k_tone, n_bins, df, chain.lpf_cutoff_hz);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cal = 2.0 / (n as f64 * n as f64);
    let mut bin_power = |k: usize, tone_amp_fd: f64| -> f64 {
        let f_k = k as f64 * df;
        let mut amp = Complex64::new(tone_amp_fd, 0.0);
        if k >= 1 && k <= top && f_k <= chain.lpf_cutoff_hz {
            let sigma = 0.5 * n as f64 * (baseband_noise_psd(f_k, chain, cav, env) * df).sqrt();
            rng.set_word_pos(4 * k as u128);
            amp += bin_amplitude(&mut rng, sigma);
        }
        cal * amp.norm_sqr()
    };

    let tone_line = if signal_w > 0.0 {
        (2.0 * signal_w).sqrt() * n as f64 / 2.0
    } else {
        0.0
    };
    let measured = bin_power(k_tone, tone_line);
    let floor = if floor_bins.is_empty() {
        None
    } else {
        let sum: f64 = floor_bins.iter().map(|k| bin_power(*k, 0.0)).sum();
        Some(sum / floor_bins.len() as f64)
    };
    Ok(Some((measured, floor)))
}

/// Simulate one sweep point. Pure in (point, index, configuration), which
/// is what makes sweep execution order irrelevant.
pub fn simulate_point(
    pt: &ScenePoint,
    index: usize,
    chain: &ChainConfig,
    cav: &CavityParams,
    env: &ThermalEnvironment,
    settings: &SweepSettings,
) -> Result<SweepPointResult> {
    let analytic = analytic_output(pt, chain, cav, env, settings.rbw_hz)?;
    let result = |measured: f64, floor: Option<f64>| SweepPointResult {
        gen_freq_hz: pt.gen_freq.hz(),
        baseband_freq_hz: analytic.baseband_freq_hz,
        measured_power_w: measured,
        analytic_signal_w: analytic.signal_bin_power.watts(),
        analytic_noise_w: analytic.noise_bin_power.watts(),
        noise_floor_w: floor,
    };
    match settings.mode {
        SweepMode::Analytic => Ok(result(
            analytic.signal_bin_power.watts() + analytic.noise_bin_power.watts(),
            None,
        )),
        SweepMode::Stochastic => {
            let fs = chain.sample_rate_hz;
            let seg_exact = fs / settings.rbw_hz;
            let seg_len = seg_exact.round().max(1.0);
            let seed = point_seed(settings.master_seed, index as u64);

            // One rectangular segment on an aligned grid: evaluate the
            // measured bins directly (exact identity with the transform
            // path, which the unit tests pin down).
            if settings.averages == 1
                && settings.window == Window::Rectangular
                && (seg_exact - seg_len).abs() < 1e-6
            {
                if let Some((measured, floor)) =
                    direct_point(chain, cav, env, &analytic, seed, seg_len as usize)?
                {
                    return Ok(result(measured, floor));
                }
            }

            let duration = settings.averages as f64 * seg_len / fs;
            let frame = synthesize(pt, chain, cav, env, duration, seed)?;
            let spec = analyze(
                &frame,
                &AnalyzerSettings::new(settings.rbw_hz, settings.averages, settings.window),
            )?;
            let tone_bin = spec.nearest_bin(analytic.baseband_freq_hz);
            let measured = spec.powers_w()[tone_bin];
            let nearby =
                floor_bin_indices(tone_bin, spec.len(), spec.rbw_hz(), chain.lpf_cutoff_hz);
            let floor = if nearby.is_empty() {
                None
            } else {
                Some(nearby.iter().map(|k| spec.powers_w()[*k]).sum::<f64>() / nearby.len() as f64)
            };
            Ok(result(measured, floor))
        }
    }
}

/// Run every point of a sweep. Points are independent and execute in
/// parallel; results come back in point order and are identical to a
/// serial run because each point's seed depends only on its index.
pub fn sweep(
    points: &[ScenePoint],
    chain: &ChainConfig,
    cav: &CavityParams,
    env: &ThermalEnvironment,
    settings: &SweepSettings,
) -> Result<Vec<SweepPointResult>> {
    if points.is_empty() {
        return Err(Error::invalid("sweep needs at least one point".to_string()));
    }
    if points
        .windows(2)
        .any(|w| w[1].gen_freq.hz() <= w[0].gen_freq.hz())
    {
        return Err(Error::invalid(
            "sweep frequencies must be strictly increasing".to_string(),
        ));
    }
    points
        .par_iter()
        .enumerate()
        .map(|(i, pt)| {
            simulate_point(pt, i, chain, cav, env, settings).map_err(|e| Error::SweepPoint {
                index: i,
                source: Box::new(e),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bench_cavity() -> CavityParams {
        CavityParams::new(Frequency::from_hz(9.590e9).unwrap(), 8800.0, 0.89, 0.94).unwrap()
    }

    fn room() -> ThermalEnvironment {
        ThermalEnvironment::new(305.4).unwrap()
    }

    fn cold() -> ThermalEnvironment {
        // Cold enough that the occupation underflows to zero.
        ThermalEnvironment::new(1e-6).unwrap()
    }

    fn point(f_hz: f64, p_dbm: f64) -> ScenePoint {
        ScenePoint {
            gen_freq: Frequency::from_hz(f_hz).unwrap(),
            gen_power: Power::from_dbm(p_dbm).unwrap(),
        }
    }

    fn lossless_chain() -> ChainConfig {
        ChainConfig {
            attenuation_db: 0.0,
            lna_gain_db: 0.0,
            lna_noise_temp: 0.0,
            post_gain_db: 0.0,
            ..ChainConfig::default()
        }
    }

    #[test]
    fn analytic_signal_through_lossless_chain() {
        // Cavity input at -125 dBm, on resonance, no gains: the tone comes
        // out at the insertion loss.
        let out = analytic_output(
            &point(9.590e9, -125.0),
            &lossless_chain(),
            &bench_cavity(),
            &room(),
            1.0,
        )
        .unwrap();
        assert_relative_eq!(
            out.signal_bin_power.dbm(),
            -128.789_950,
            max_relative = 1e-8
        );
        assert_relative_eq!(out.baseband_freq_hz, 6e6);
    }

    #[test]
    fn analytic_noise_unaffected_by_generator_power() {
        let chain = ChainConfig::default();
        let cav = bench_cavity();
        let env = room();
        let on = analytic_output(&point(9.590e9, -21.0), &chain, &cav, &env, 625.0).unwrap();
        let off = analytic_output(&point(9.590e9, -300.0), &chain, &cav, &env, 625.0).unwrap();
        assert_eq!(on.noise_bin_power.watts(), off.noise_bin_power.watts());
        assert!(off.signal_bin_power.watts() < 1e-30);
        // Cavity thermal per-bin noise at 625 Hz, amplified by 60 dB, plus
        // the LNA contribution.
        let expect = (2.633_329e-18 + K_B * 100.0 * 625.0) * 1e6;
        assert_relative_eq!(on.noise_bin_power.watts(), expect, max_relative = 1e-4);
    }

    #[test]
    fn cold_cavity_leaves_only_the_flat_lna_floor() {
        // With the thermal occupation frozen out, the analytic noise bin
        // is the white LNA term alone, identical at every sweep offset.
        let chain = ChainConfig::default();
        let cav = bench_cavity();
        let rbw = 625.0;
        let expect = K_B * chain.lna_noise_temp * rbw * chain.chain_gain();
        for f in [9.5885e9, 9.590e9, 9.5925e9] {
            let out = analytic_output(&point(f, -300.0), &chain, &cav, &cold(), rbw).unwrap();
            assert_relative_eq!(out.noise_bin_power.watts(), expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn analytic_rejects_out_of_band_points() {
        let chain = ChainConfig::default();
        // Below the LO.
        assert!(matches!(
            analytic_output(&point(9.58e9, -55.0), &chain, &bench_cavity(), &room(), 1.0),
            Err(Error::Alias(_))
        ));
        // Beyond the low-pass cutoff.
        assert!(matches!(
            analytic_output(
                &point(9.595e9, -55.0),
                &chain,
                &bench_cavity(),
                &room(),
                1.0
            ),
            Err(Error::Alias(_))
        ));
    }

    #[test]
    fn analytic_output_linear_in_generator_power() {
        let chain = ChainConfig::default();
        let cav = bench_cavity();
        let env = room();
        let p1 = analytic_output(&point(9.5901e9, -60.0), &chain, &cav, &env, 1.0).unwrap();
        let p2 = analytic_output(&point(9.5901e9, -50.0), &chain, &cav, &env, 1.0).unwrap();
        assert_relative_eq!(
            p2.signal_bin_power.dbm() - p1.signal_bin_power.dbm(),
            10.0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn synthesize_is_deterministic_per_seed() {
        let chain = ChainConfig::default();
        let pt = point(9.590e9, -55.0 + 124.0);
        let a = synthesize(&pt, &chain, &bench_cavity(), &room(), 4e-4, 42).unwrap();
        let b = synthesize(&pt, &chain, &bench_cavity(), &room(), 4e-4, 42).unwrap();
        assert_eq!(a.samples, b.samples);
        let c = synthesize(&pt, &chain, &bench_cavity(), &room(), 4e-4, 43).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn synthesize_with_no_sources_is_silent() {
        let chain = lossless_chain();
        let pt = ScenePoint {
            gen_freq: Frequency::from_hz(9.590e9).unwrap(),
            gen_power: Power::ZERO,
        };
        let frame = synthesize(&pt, &chain, &bench_cavity(), &cold(), 1e-4, 7).unwrap();
        assert!(frame.samples.iter().all(|x| *x == 0.0));
        assert_eq!(
            frame.samples.len(),
            (1e-4 * chain.sample_rate_hz).round() as usize
        );
    }

    #[test]
    fn tone_only_frame_matches_analytic_power() {
        // No thermal or LNA noise: the analyzed peak bin must equal the
        // analytic signal power to well under 0.1 dB.
        let chain = ChainConfig {
            lna_noise_temp: 0.0,
            ..ChainConfig::default()
        };
        let cav = bench_cavity();
        let pt = point(9.590e9, -55.0 + 124.0);
        let analytic = analytic_output(&pt, &chain, &cav, &cold(), 25e3).unwrap();
        let frame = synthesize(&pt, &chain, &cav, &cold(), 4.0 * 1000.0 / 25e6, 5).unwrap();
        let spec = analyze(&frame, &AnalyzerSettings::new(25e3, 4, Window::Rectangular)).unwrap();
        let k = spec.nearest_bin(analytic.baseband_freq_hz);
        let err_db = 10.0 * (spec.powers_w()[k] / analytic.signal_bin_power.watts()).log10();
        assert!(err_db.abs() < 0.1, "tone bin off by {err_db} dB");
        // The analyzed tone frequency is within one bin of gen - lo.
        assert!((spec.freqs_hz()[k] - 6e6).abs() <= spec.rbw_hz());
    }

    #[test]
    fn frame_noise_power_converges_to_passband_budget() {
        // Tone off; total mean-square power approaches the integrated
        // analytic budget over the passband.
        let chain = ChainConfig::default();
        let cav = bench_cavity();
        let env = room();
        let pt = ScenePoint {
            gen_freq: Frequency::from_hz(9.590e9).unwrap(),
            gen_power: Power::ZERO,
        };
        let averages = 16usize;
        let seg = 1000.0;
        let frame = synthesize(&pt, &chain, &cav, &env, averages as f64 * seg / 25e6, 11).unwrap();
        let mean_sq = frame.samples.iter().map(|x| x * x).sum::<f64>() / frame.samples.len() as f64;

        // Simpson integral of the shaped PSD across the passband.
        let n = 20_000;
        let h = chain.lpf_cutoff_hz / n as f64;
        let psd_at = |f_b: f64| {
            let om = 2.0 * std::f64::consts::PI * (chain.lo_freq.hz() + f_b);
            chain.chain_gain()
                * (2.0 * std::f64::consts::PI * noise_psd(om, &cav, &env)
                    + K_B * chain.lna_noise_temp)
        };
        let mut sum = psd_at(h) + psd_at(chain.lpf_cutoff_hz);
        for i in 2..n {
            sum += psd_at(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let budget = sum * h / 3.0;
        let tol = 3.0 / (averages as f64).sqrt();
        assert!(
            (mean_sq / budget - 1.0).abs() < tol,
            "frame power {mean_sq} vs budget {budget}"
        );
    }

    #[test]
    fn sweep_symmetric_points_give_symmetric_signal() {
        let chain = ChainConfig::default();
        let cav = bench_cavity();
        let settings = SweepSettings {
            rbw_hz: 25e3,
            averages: 1,
            window: Window::Rectangular,
            mode: SweepMode::Analytic,
            master_seed: 0,
        };
        let offsets = [-2e6, -1e6, 0.0, 1e6, 2e6];
        let points: Vec<ScenePoint> = offsets.iter().map(|o| point(9.590e9 + o, -55.0)).collect();
        let results = sweep(&points, &chain, &cav, &room(), &settings).unwrap();
        for i in 0..2 {
            let a = results[i].analytic_signal_w;
            let b = results[offsets.len() - 1 - i].analytic_signal_w;
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
        // Peak sits at the resonance.
        let peak = results
            .iter()
            .max_by(|a, b| a.measured_power_w.partial_cmp(&b.measured_power_w).unwrap())
            .unwrap();
        assert_relative_eq!(peak.gen_freq_hz, 9.590e9);
    }

    #[test]
    fn sweep_points_are_order_independent() {
        let chain = ChainConfig::default();
        let cav = bench_cavity();
        let env = room();
        let settings = SweepSettings {
            rbw_hz: 25e3,
            averages: 2,
            window: Window::Rectangular,
            mode: SweepMode::Stochastic,
            master_seed: 99,
        };
        let points: Vec<ScenePoint> = (0..5)
            .map(|i| point(9.5885e9 + i as f64 * 0.5e6, -55.0))
            .collect();
        let in_order = sweep(&points, &chain, &cav, &env, &settings).unwrap();
        // Re-run each point individually in reverse order; identical results.
        for (i, pt) in points.iter().enumerate().rev() {
            let solo = simulate_point(pt, i, &chain, &cav, &env, &settings).unwrap();
            assert_eq!(solo.measured_power_w, in_order[i].measured_power_w);
        }
    }

    #[test]
    fn sweep_errors_carry_point_index() {
        let chain = ChainConfig::default();
        let settings = SweepSettings {
            rbw_hz: 25e3,
            averages: 1,
            window: Window::Rectangular,
            mode: SweepMode::Analytic,
            master_seed: 0,
        };
        // Second point is beyond the LPF image.
        let points = vec![point(9.590e9, -55.0), point(9.596e9, -55.0)];
        match sweep(&points, &chain, &bench_cavity(), &room(), &settings) {
            Err(Error::SweepPoint { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected SweepPoint error, got {other:?}"),
        }
        // Non-increasing frequencies are rejected up front.
        let bad = vec![point(9.590e9, -55.0), point(9.589e9, -55.0)];
        assert!(sweep(&bad, &chain, &bench_cavity(), &room(), &settings).is_err());
    }

    #[test]
    fn direct_path_matches_transform_path() {
        // A one-segment rectangular analysis must give identical bin
        // powers whether or not the time series is materialized.
        let chain = ChainConfig {
            lpf_cutoff_hz: 400e3,
            sample_rate_hz: 1e6,
            ..ChainConfig::default()
        };
        let cav = bench_cavity();
        let env = room();
        let settings = SweepSettings {
            rbw_hz: 1000.0,
            averages: 1,
            window: Window::Rectangular,
            mode: SweepMode::Stochastic,
            master_seed: 77,
        };
        for (idx, p_dbm) in [(3usize, -50.0), (9, -300.0)] {
            let pt = point(9.584e9 + 100e3, p_dbm);
            let fast = simulate_point(&pt, idx, &chain, &cav, &env, &settings).unwrap();

            let seed = point_seed(settings.master_seed, idx as u64);
            let frame = synthesize(&pt, &chain, &cav, &env, 1000.0 / 1e6, seed).unwrap();
            let spec = analyze(
                &frame,
                &AnalyzerSettings::new(1000.0, 1, Window::Rectangular),
            )
            .unwrap();
            let tone_bin = spec.nearest_bin(fast.baseband_freq_hz);
            assert_relative_eq!(
                fast.measured_power_w,
                spec.powers_w()[tone_bin],
                max_relative = 1e-9
            );
            let nearby =
                floor_bin_indices(tone_bin, spec.len(), spec.rbw_hz(), chain.lpf_cutoff_hz);
            let full_floor =
                nearby.iter().map(|k| spec.powers_w()[*k]).sum::<f64>() / nearby.len() as f64;
            assert_relative_eq!(fast.noise_floor_w.unwrap(), full_floor, max_relative = 1e-9);
        }
    }

    #[test]
    fn multi_segment_points_use_the_transform_path() {
        // averages > 1 cannot take the shortcut; make sure the result is
        // still deterministic and carries a floor estimate.
        let chain = ChainConfig {
            lpf_cutoff_hz: 400e3,
            sample_rate_hz: 1e6,
            ..ChainConfig::default()
        };
        let settings = SweepSettings {
            rbw_hz: 1000.0,
            averages: 3,
            window: Window::Rectangular,
            mode: SweepMode::Stochastic,
            master_seed: 5,
        };
        let pt = point(9.584e9 + 100e3, -50.0);
        let a = simulate_point(&pt, 0, &chain, &bench_cavity(), &room(), &settings).unwrap();
        let b = simulate_point(&pt, 0, &chain, &bench_cavity(), &room(), &settings).unwrap();
        assert_eq!(a.measured_power_w, b.measured_power_w);
        assert!(a.noise_floor_w.is_some());
    }

    #[test]
    fn point_seed_spreads_indices() {
        let s: Vec<u64> = (0..100).map(|i| point_seed(1, i)).collect();
        let mut uniq = s.clone();
        uniq.sort_unstable();
        uniq.dedup();
        assert_eq!(uniq.len(), s.len());
        assert_ne!(point_seed(1, 0), point_seed(2, 0));
    }
}
