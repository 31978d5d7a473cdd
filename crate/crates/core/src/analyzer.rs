//! Averaged-periodogram FFT spectrum analyzer.
//!
//! A baseband frame is split into non-overlapping segments of
//! `sample_rate / rbw` samples, each segment is windowed and transformed,
//! and per-bin powers are averaged over segments. Bin powers are
//! calibrated against the window's coherent gain so a sinusoid at a bin
//! center reports its true power. Noise quantities read from a windowed
//! spectrum carry an extra factor of the window's equivalent noise
//! bandwidth ([`Spectrum::enbw_bins`]); callers comparing against PSD
//! predictions divide it out.

use num_complex::Complex64;

use crate::chain::BasebandFrame;
use crate::error::{Error, Result};
use crate::fftutil;
use crate::units::{watts_to_dbm, Power};

/// Analysis window applied to each segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// No tapering; exact for tones at bin centers and for noise totals.
    Rectangular,
    /// Hann taper; the default for noise measurements.
    Hann,
}

impl Window {
    fn coefficients(&self, len: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; len],
            Window::Hann => (0..len)
                .map(|n| {
                    let phase = 2.0 * std::f64::consts::PI * n as f64 / len as f64;
                    0.5 * (1.0 - phase.cos())
                })
                .collect(),
        }
    }

    /// Equivalent noise bandwidth in bins: len * sum(w^2) / sum(w)^2.
    pub fn enbw_bins(&self) -> f64 {
        match self {
            Window::Rectangular => 1.0,
            Window::Hann => 1.5,
        }
    }
}

/// Power estimator applied across segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    /// Mean of per-segment bin powers (RMS detection).
    PowerMean,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalyzerSettings {
    /// Resolution bandwidth in Hz; sets the segment length sample_rate/rbw.
    pub rbw_hz: f64,
    /// Number of segments averaged, >= 1.
    pub averages: usize,
    pub window: Window,
    pub detector: Detector,
}

impl AnalyzerSettings {
    pub fn new(rbw_hz: f64, averages: usize, window: Window) -> Self {
        AnalyzerSettings {
            rbw_hz,
            averages,
            window,
            detector: Detector::PowerMean,
        }
    }
}

/// One-sided power spectrum with uniformly spaced bins.
#[derive(Debug, Clone)]
pub struct Spectrum {
    freqs_hz: Vec<f64>,
    powers_w: Vec<f64>,
    rbw_hz: f64,
    averages_used: usize,
    enbw_bins: f64,
}

impl Spectrum {
    pub fn from_bins(
        freqs_hz: Vec<f64>,
        powers_w: Vec<f64>,
        rbw_hz: f64,
        averages_used: usize,
        enbw_bins: f64,
    ) -> Result<Self> {
        if freqs_hz.len() != powers_w.len() {
            return Err(Error::invalid(
                "frequency and power columns differ in length".to_string(),
            ));
        }
        if freqs_hz.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "spectrum bins must be strictly increasing".to_string(),
            ));
        }
        if powers_w.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid(
                "bin powers must be finite and non-negative".to_string(),
            ));
        }
        Ok(Spectrum {
            freqs_hz,
            powers_w,
            rbw_hz,
            averages_used,
            enbw_bins,
        })
    }

    pub fn len(&self) -> usize {
        self.freqs_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs_hz.is_empty()
    }

    pub fn freqs_hz(&self) -> &[f64] {
        &self.freqs_hz
    }

    pub fn powers_w(&self) -> &[f64] {
        &self.powers_w
    }

    pub fn rbw_hz(&self) -> f64 {
        self.rbw_hz
    }

    pub fn averages_used(&self) -> usize {
        self.averages_used
    }

    /// Equivalent noise bandwidth of the analysis window, in bins.
    pub fn enbw_bins(&self) -> f64 {
        self.enbw_bins
    }

    /// Index of the bin whose center is closest to `freq_hz`.
    pub fn nearest_bin(&self, freq_hz: f64) -> usize {
        let spacing = self.rbw_hz;
        let idx = ((freq_hz - self.freqs_hz[0]) / spacing).round();
        (idx.max(0.0) as usize).min(self.freqs_hz.len() - 1)
    }

    /// Serialize as `freq_hz,power_dbm` CSV with full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * self.len() + 20);
        out.push_str("freq_hz,power_dbm\n");
        for (f, p) in self.freqs_hz.iter().zip(&self.powers_w) {
            out.push_str(&format!("{:.9e},{:.9e}\n", f, watts_to_dbm(*p)));
        }
        out
    }
}

/// Sum of bin powers with centers inside [f_lo, f_hi].
pub fn band_power(spec: &Spectrum, f_lo: f64, f_hi: f64) -> Result<Power> {
    if f_lo.is_nan() || f_hi.is_nan() || f_lo >= f_hi {
        return Err(Error::invalid(format!(
            "band must satisfy f_lo < f_hi, got [{f_lo}, {f_hi}]"
        )));
    }
    if spec.is_empty() {
        return Err(Error::OutOfSpan("spectrum has no bins".to_string()));
    }
    let half = spec.rbw_hz / 2.0;
    let (span_lo, span_hi) = (
        spec.freqs_hz[0] - half,
        spec.freqs_hz[spec.len() - 1] + half,
    );
    if f_lo < span_lo || f_hi > span_hi {
        return Err(Error::OutOfSpan(format!(
            "[{f_lo}, {f_hi}] outside spectrum span [{span_lo}, {span_hi}]"
        )));
    }
    let sum = spec
        .freqs_hz
        .iter()
        .zip(&spec.powers_w)
        .filter(|(f, _)| **f >= f_lo && **f <= f_hi)
        .map(|(_, p)| p)
        .sum();
    Power::from_watts(sum)
}

/// Split, window, transform, and average the frame into a power spectrum.
pub fn analyze(frame: &BasebandFrame, s: &AnalyzerSettings) -> Result<Spectrum> {
    if !(s.rbw_hz > 0.0 && s.rbw_hz.is_finite()) {
        return Err(Error::invalid(format!(
            "rbw must be positive, got {}",
            s.rbw_hz
        )));
    }
    if s.averages == 0 {
        return Err(Error::invalid("averages must be >= 1".to_string()));
    }
    let fs = frame.sample_rate;
    let seg_len = (fs / s.rbw_hz).round() as usize;
    if seg_len < 2 {
        return Err(Error::invalid(format!(
            "rbw {} Hz leaves fewer than 2 samples per segment at {} Hz sampling",
            s.rbw_hz, fs
        )));
    }
    if seg_len > frame.samples.len() {
        return Err(Error::FrameTooShort(format!(
            "rbw {} Hz needs {} samples per segment, frame has {}",
            s.rbw_hz,
            seg_len,
            frame.samples.len()
        )));
    }
    let available = frame.samples.len() / seg_len;
    if available < s.averages {
        return Err(Error::FrameTooShort(format!(
            "{} averages of {} samples need {} samples, frame has {}",
            s.averages,
            seg_len,
            s.averages * seg_len,
            frame.samples.len()
        )));
    }

    let window = s.window.coefficients(seg_len);
    let coherent_gain: f64 = window.iter().sum();
    let cal = 1.0 / (coherent_gain * coherent_gain);

    let fft = fftutil::plan_r2c(seg_len);
    let n_bins = seg_len / 2 + 1;
    let mut acc = vec![0.0f64; n_bins];
    let mut buf = vec![0.0f64; seg_len];
    let mut bins = vec![Complex64::new(0.0, 0.0); n_bins];
    let mut scratch = fft.make_scratch_vec();

    for seg in 0..s.averages {
        let chunk = &frame.samples[seg * seg_len..(seg + 1) * seg_len];
        for ((b, x), w) in buf.iter_mut().zip(chunk).zip(&window) {
            *b = x * w;
        }
        fft.process_with_scratch(&mut buf, &mut bins, &mut scratch)
            .expect("analysis buffers sized for the transform");
        for (a, b) in acc.iter_mut().zip(&bins) {
            *a += b.norm_sqr();
        }
    }

    let match_detector = match s.detector {
        Detector::PowerMean => 1.0 / s.averages as f64,
    };
    let rbw_eff = fs / seg_len as f64;
    let nyquist_is_real = seg_len.is_multiple_of(2);
    let powers_w: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            // One-sided: interior bins collect both the +f and -f halves.
            let fold = if k == 0 || (nyquist_is_real && k == n_bins - 1) {
                1.0
            } else {
                2.0
            };
            fold * a * cal * match_detector
        })
        .collect();
    let freqs_hz: Vec<f64> = (0..n_bins).map(|k| k as f64 * rbw_eff).collect();

    Spectrum::from_bins(
        freqs_hz,
        powers_w,
        rbw_eff,
        s.averages,
        s.window.enbw_bins(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn frame_of(samples: Vec<f64>, fs: f64) -> BasebandFrame {
        let duration = samples.len() as f64 / fs;
        BasebandFrame {
            samples,
            sample_rate: fs,
            duration,
            seed: 0,
        }
    }

    fn tone_frame(amp: f64, freq: f64, fs: f64, n: usize) -> BasebandFrame {
        let samples = (0..n)
            .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / fs).cos())
            .collect();
        frame_of(samples, fs)
    }

    fn white_frame(sigma: f64, fs: f64, n: usize, seed: u64) -> BasebandFrame {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = (0..n)
            .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        frame_of(samples, fs)
    }

    #[test]
    fn tone_at_bin_center_is_calibrated() {
        let fs = 1e6;
        let p_true = 2.5e-9_f64;
        let amp = (2.0 * p_true).sqrt();
        // 10 kHz rbw -> 100 samples per segment; tone on bin 4.
        let frame = tone_frame(amp, 40e3, fs, 400);
        for window in [Window::Rectangular, Window::Hann] {
            let spec = analyze(&frame, &AnalyzerSettings::new(10e3, 4, window)).unwrap();
            let k = spec.nearest_bin(40e3);
            assert_relative_eq!(spec.freqs_hz()[k], 40e3);
            let err_db = 10.0 * (spec.powers_w()[k] / p_true).log10();
            assert!(err_db.abs() <= 0.01, "{window:?}: {err_db} dB");
        }
    }

    #[test]
    fn hann_mid_bin_scalloping() {
        let fs = 1e6;
        let p_true = 1e-6_f64;
        let amp = (2.0 * p_true).sqrt();
        // Tone halfway between bins 40 and 41.
        let frame = tone_frame(amp, 40.5e3, fs, 4000);
        let spec = analyze(&frame, &AnalyzerSettings::new(1e3, 4, Window::Hann)).unwrap();
        let peak = spec.powers_w().iter().cloned().fold(0.0, f64::max);
        let loss_db = -10.0 * (peak / p_true).log10();
        assert!(
            (1.35..=1.45).contains(&loss_db),
            "scalloping loss {loss_db} dB"
        );
    }

    #[test]
    fn white_noise_per_bin_power() {
        let fs = 1e6;
        let sigma = 3e-4;
        let averages = 400;
        let frame = white_frame(sigma, fs, 100 * averages, 7);
        let spec = analyze(
            &frame,
            &AnalyzerSettings::new(10e3, averages, Window::Rectangular),
        )
        .unwrap();
        // Total power sigma^2 over the fs/2 one-sided band.
        let expect = sigma * sigma * spec.rbw_hz() / (fs / 2.0);
        let interior = &spec.powers_w()[1..spec.len() - 1];
        let mean = interior.iter().sum::<f64>() / interior.len() as f64;
        let tol = 3.0 / (averages as f64).sqrt();
        assert!(
            (mean / expect - 1.0).abs() <= tol,
            "mean {mean} vs {expect}"
        );

        // Hann overreads noise by its ENBW; dividing it out restores the level.
        let spec_h = analyze(&frame, &AnalyzerSettings::new(10e3, averages, Window::Hann)).unwrap();
        let interior_h = &spec_h.powers_w()[1..spec_h.len() - 1];
        let mean_h = interior_h.iter().sum::<f64>() / interior_h.len() as f64 / spec_h.enbw_bins();
        assert!(
            (mean_h / expect - 1.0).abs() <= tol,
            "hann mean {mean_h} vs {expect}"
        );
    }

    #[test]
    fn parseval_whole_span() {
        let fs = 1e6;
        let frame = white_frame(2e-3, fs, 4096, 11);
        let used = 4000; // 4 segments of 1000
        let mean_square = frame.samples[..used].iter().map(|x| x * x).sum::<f64>() / used as f64;
        let spec = analyze(&frame, &AnalyzerSettings::new(1e3, 4, Window::Rectangular)).unwrap();
        let total = band_power(&spec, 0.0, fs / 2.0).unwrap().watts();
        assert_relative_eq!(total, mean_square, max_relative = 1e-3);
    }

    #[test]
    fn band_power_subsets() {
        let spec = Spectrum::from_bins(
            vec![100.0, 200.0, 300.0, 400.0],
            vec![1e-3, 2e-3, 3e-3, 4e-3],
            100.0,
            1,
            1.0,
        )
        .unwrap();
        assert_relative_eq!(band_power(&spec, 100.0, 400.0).unwrap().watts(), 1e-2);
        // A sub-span that contains no bin centers sums to zero.
        assert_eq!(band_power(&spec, 210.0, 290.0).unwrap().watts(), 0.0);
        assert!(band_power(&spec, 100.0, 500.0).is_err());
        assert!(band_power(&spec, 300.0, 200.0).is_err());
    }

    #[test]
    fn averaging_tightens_noise_floor() {
        let fs = 1e6;
        let rel_std = |averages: usize, seed: u64| {
            let frame = white_frame(1e-3, fs, 100 * averages, seed);
            let spec = analyze(
                &frame,
                &AnalyzerSettings::new(10e3, averages, Window::Rectangular),
            )
            .unwrap();
            let bins = &spec.powers_w()[1..spec.len() - 1];
            let mean = bins.iter().sum::<f64>() / bins.len() as f64;
            let var = bins.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / bins.len() as f64;
            var.sqrt() / mean
        };
        // Doubling the averages should shrink the relative std by sqrt(2).
        let mut ratios = Vec::new();
        for seed in 0..8 {
            ratios.push(rel_std(64, seed) / rel_std(128, seed + 100));
        }
        let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!(
            (mean_ratio / std::f64::consts::SQRT_2 - 1.0).abs() <= 0.2,
            "ratio {mean_ratio}"
        );
    }

    #[test]
    fn analyze_is_deterministic() {
        let frame = white_frame(1e-3, 1e6, 2000, 3);
        let s = AnalyzerSettings::new(1e3, 2, Window::Hann);
        let a = analyze(&frame, &s).unwrap();
        let b = analyze(&frame, &s).unwrap();
        assert_eq!(a.powers_w(), b.powers_w());
        assert_eq!(a.freqs_hz(), b.freqs_hz());
    }

    #[test]
    fn rejects_short_frames_and_fine_rbw() {
        let frame = white_frame(1e-3, 1e6, 1000, 5);
        // Segment longer than the frame.
        assert!(matches!(
            analyze(
                &frame,
                &AnalyzerSettings::new(100.0, 1, Window::Rectangular)
            ),
            Err(Error::FrameTooShort(_))
        ));
        // Not enough segments for the requested averages.
        assert!(matches!(
            analyze(&frame, &AnalyzerSettings::new(1e3, 2, Window::Rectangular)),
            Err(Error::FrameTooShort(_))
        ));
        assert!(analyze(&frame, &AnalyzerSettings::new(0.0, 1, Window::Rectangular)).is_err());
    }

    #[test]
    fn csv_has_header_and_full_precision() {
        let spec = Spectrum::from_bins(vec![1.0, 2.0], vec![1e-3, 2e-3], 1.0, 1, 1.0).unwrap();
        let csv = spec.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "freq_hz,power_dbm");
        let first = lines.next().unwrap();
        assert!(first.starts_with("1.000000000e0,"));
        // 0 dBm with nine digits after the point.
        assert!(first.ends_with("0.000000000e0"));
    }
}
