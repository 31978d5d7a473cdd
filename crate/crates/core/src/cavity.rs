//! Resonator physics: the multi-pass interference sum, its Lorentzian
//! approximation, and the coupled two-port transmission/stored-energy
//! model used by the measurement chain.
//!
//! The interference picture and the coupled-port picture are linked by
//! `Q = omega*l / (c*(1-R))`, exposed as [`effective_q`] so the
//! approximation regime can be tested; production code uses
//! [`CavityParams`] throughout.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::{photon_energy, Frequency, Power, C, HBAR};

/// A lossless two-mirror etalon described by its per-pass reflection
/// amplitude and geometry.
#[derive(Debug, Clone, Copy)]
pub struct IdealEtalon {
    /// Amplitude for reflection back toward the exit mirror, 0 < R < 1.
    pub reflection: f64,
    /// Mirror spacing in meters.
    pub spacing: f64,
    /// Refractive index of the medium between the mirrors, >= 1.
    pub index: f64,
    /// Incidence angle in radians, |theta| < pi/2.
    pub incidence: f64,
}

impl IdealEtalon {
    pub fn new(reflection: f64, spacing: f64, index: f64, incidence: f64) -> Result<Self> {
        if !(reflection > 0.0 && reflection < 1.0) {
            return Err(Error::invalid(format!(
                "reflection amplitude must be in (0, 1), got {reflection}"
            )));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid(format!(
                "mirror spacing must be positive, got {spacing}"
            )));
        }
        if !(index >= 1.0 && index.is_finite()) {
            return Err(Error::invalid(format!(
                "refractive index must be >= 1, got {index}"
            )));
        }
        if incidence.is_nan() || incidence.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::invalid(format!(
                "incidence angle must satisfy |theta| < pi/2, got {incidence}"
            )));
        }
        Ok(IdealEtalon {
            reflection,
            spacing,
            index,
            incidence,
        })
    }

    /// Single-pass transmission amplitude T = 1 - R.
    pub fn transmission(&self) -> f64 {
        1.0 - self.reflection
    }

    /// Effective number of interfering passes, ~1/(1-R).
    pub fn passes(&self) -> f64 {
        1.0 / (1.0 - self.reflection)
    }

    /// Finesse, pi times the pass count.
    pub fn finesse(&self) -> f64 {
        std::f64::consts::PI * self.passes()
    }

    /// Phase accumulated in one round trip at vacuum wavelength `lambda_vac`:
    /// delta = (2*pi/lambda) * 2*n*l*cos(theta).
    pub fn round_trip_phase(&self, lambda_vac: f64) -> f64 {
        (2.0 * std::f64::consts::PI / lambda_vac)
            * 2.0
            * self.index
            * self.spacing
            * self.incidence.cos()
    }
}

/// Total transmitted amplitude as the sum over passes.
///
/// With `k_max = None` this is the closed form `T / (1 - R*exp(i*delta))`;
/// with `Some(k)` it is the partial sum over passes 0..=k. Both views must
/// agree in the limit, which is what the convergence tests check.
pub fn multipass_amplitude(
    e: &IdealEtalon,
    lambda_vac: f64,
    k_max: Option<u64>,
) -> Result<Complex64> {
    if !(lambda_vac > 0.0 && lambda_vac.is_finite()) {
        return Err(Error::invalid(format!(
            "wavelength must be positive, got {lambda_vac}"
        )));
    }
    if e.reflection >= 1.0 {
        return Err(Error::DivergentSeries(e.reflection));
    }
    let delta = e.round_trip_phase(lambda_vac);
    let t = e.transmission();
    let ratio = Complex64::from_polar(e.reflection, delta);
    match k_max {
        None => Ok(Complex64::new(t, 0.0) / (Complex64::new(1.0, 0.0) - ratio)),
        Some(k) => {
            let mut term = Complex64::new(1.0, 0.0);
            let mut sum = Complex64::new(0.0, 0.0);
            for _ in 0..=k {
                sum += term;
                term *= ratio;
            }
            Ok(sum * t)
        }
    }
}

/// Transmission probability 1 / (1 + 4 q^2 ((omega - omega_res)/omega_res)^2).
///
/// `omega` is angular (rad/s); the detuning is normalized to the resonance.
pub fn lorentzian_factor(omega: f64, f_res: Frequency, q: f64) -> f64 {
    let om_r = f_res.angular();
    let detune = (omega - om_r) / om_r;
    1.0 / (1.0 + 4.0 * q * q * detune * detune)
}

/// Full width at half maximum of the resonance, f_res / q.
pub fn linewidth(q: f64, f_res: Frequency) -> Result<Frequency> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::invalid(format!(
            "quality factor must be positive, got {q}"
        )));
    }
    Frequency::from_hz(f_res.hz() / q)
}

/// Quality factor of an etalon of length `length` with per-pass reflection
/// `reflection`, Q = omega*length / (c * (1 - R)). Links the interference
/// sum to the Lorentzian form; used by the approximation-regime tests.
pub fn effective_q(omega: f64, length: f64, reflection: f64) -> f64 {
    omega * length / (C * (1.0 - reflection))
}

/// A two-port cavity characterized by its loaded Q and port couplings.
#[derive(Debug, Clone, Copy)]
pub struct CavityParams {
    /// Resonance frequency.
    pub f_res: Frequency,
    /// Loaded quality factor.
    pub q_loaded: f64,
    /// Input port coupling coefficient.
    pub beta1: f64,
    /// Output port coupling coefficient.
    pub beta2: f64,
    /// Extra line loss applied to the transmitted signal, dB >= 0.
    pub excess_loss_db: f64,
}

impl CavityParams {
    pub fn new(f_res: Frequency, q_loaded: f64, beta1: f64, beta2: f64) -> Result<Self> {
        Self::with_excess_loss(f_res, q_loaded, beta1, beta2, 0.0)
    }

    pub fn with_excess_loss(
        f_res: Frequency,
        q_loaded: f64,
        beta1: f64,
        beta2: f64,
        excess_loss_db: f64,
    ) -> Result<Self> {
        if !(q_loaded > 0.0 && q_loaded.is_finite()) {
            return Err(Error::invalid(format!(
                "loaded Q must be positive, got {q_loaded}"
            )));
        }
        if !(beta1 >= 0.0 && beta1.is_finite()) || !(beta2 >= 0.0 && beta2.is_finite()) {
            return Err(Error::invalid(format!(
                "port couplings must be non-negative, got beta1={beta1}, beta2={beta2}"
            )));
        }
        if !(excess_loss_db >= 0.0 && excess_loss_db.is_finite()) {
            return Err(Error::invalid(format!(
                "excess loss must be non-negative dB, got {excess_loss_db}"
            )));
        }
        Ok(CavityParams {
            f_res,
            q_loaded,
            beta1,
            beta2,
            excess_loss_db,
        })
    }

    /// Unloaded Q, derived: Q0 = Q_L * (1 + beta1 + beta2).
    pub fn q_unloaded(&self) -> f64 {
        self.q_loaded * (1.0 + self.beta1 + self.beta2)
    }

    /// On-resonance insertion factor 4*b1*b2 / (1 + b1 + b2)^2.
    pub fn insertion_factor(&self) -> f64 {
        let denom = 1.0 + self.beta1 + self.beta2;
        4.0 * self.beta1 * self.beta2 / (denom * denom)
    }

    /// Fraction of incident power coupled into stored energy,
    /// 4*b1 / (1 + b1 + b2)^2.
    pub fn energy_coupling(&self) -> f64 {
        let denom = 1.0 + self.beta1 + self.beta2;
        4.0 * self.beta1 / (denom * denom)
    }

    fn excess_loss_linear(&self) -> f64 {
        10f64.powf(-self.excess_loss_db / 10.0)
    }
}

/// Transmitted power through the two-port cavity at drive frequency `f`.
pub fn coupled_transmission(c: &CavityParams, f: Frequency, p_inc: Power) -> Power {
    let lf = lorentzian_factor(f.angular(), c.f_res, c.q_loaded);
    let w = p_inc.watts() * c.insertion_factor() * lf * c.excess_loss_linear();
    Power::from_watts(w).expect("transmission of a valid power is valid")
}

/// Energy stored in the cavity and the corresponding time-averaged photon
/// number. Photon counts are reported as real numbers; sub-unity values
/// are meaningful time-averaged occupations.
pub fn stored_photons(c: &CavityParams, f: Frequency, p_inc: Power) -> (f64, f64) {
    let om = f.angular();
    let lf = lorentzian_factor(om, c.f_res, c.q_loaded);
    let energy = p_inc.watts() * (c.q_loaded / om) * c.energy_coupling() * lf;
    (energy, energy / photon_energy(f))
}

/// Output power of an ideal cavity holding exactly one photon,
/// hbar * (2*pi*f)^2 / q.
pub fn single_photon_power(f: Frequency, q: f64) -> Result<Power> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::invalid(format!(
            "quality factor must be positive, got {q}"
        )));
    }
    let om = f.angular();
    Power::from_watts(HBAR * om * om / q)
}

/// Single-photon output power for an optical Fabry-Perot cavity of the
/// given finesse and length, via Q = (F/pi) * omega*length / c.
pub fn optical_single_photon_power(lambda: f64, finesse: f64, length: f64) -> Result<Power> {
    if !(lambda > 0.0 && finesse > 0.0 && length > 0.0) {
        return Err(Error::invalid(
            "optical cavity parameters must all be positive".to_string(),
        ));
    }
    let om = 2.0 * std::f64::consts::PI * C / lambda;
    let q = (finesse / std::f64::consts::PI) * om * length / C;
    Power::from_watts(HBAR * om * om / q)
}
