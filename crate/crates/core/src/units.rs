//! Physical constants and the unit newtypes used by every other module.
//!
//! All internal computation is in SI (watts, hertz, joules, kelvin); dBm
//! appears only at I/O boundaries. [`Frequency`] exposes both the cyclic
//! (`hz`) and angular (`angular`) views so each formula can state which
//! one it consumes.

use crate::error::{Error, Result};

/// Reduced Planck constant, J*s (CODATA 2018).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (exact since the 2019 SI redefinition).
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s (exact).
pub const C: f64 = 299_792_458.0;

/// A non-negative power in watts.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Power {
    watts: f64,
}

impl Power {
    pub const ZERO: Power = Power { watts: 0.0 };

    pub fn from_watts(watts: f64) -> Result<Power> {
        if !watts.is_finite() || watts < 0.0 {
            return Err(Error::invalid(format!(
                "power must be finite and non-negative, got {watts} W"
            )));
        }
        Ok(Power { watts })
    }

    /// Power from a level in dBm (decibels referenced to 1 mW).
    pub fn from_dbm(dbm: f64) -> Result<Power> {
        if !dbm.is_finite() {
            return Err(Error::invalid(format!(
                "dBm value must be finite, got {dbm}"
            )));
        }
        Ok(Power {
            watts: 10f64.powf(dbm / 10.0) * 1e-3,
        })
    }

    pub fn watts(&self) -> f64 {
        self.watts
    }

    /// Level in dBm. Defined only for positive power; returns `-inf` for zero.
    pub fn dbm(&self) -> f64 {
        10.0 * (self.watts / 1e-3).log10()
    }

    /// Scale by a linear (power) gain factor.
    pub fn scaled(&self, gain: f64) -> Result<Power> {
        Power::from_watts(self.watts * gain)
    }
}

/// A strictly positive frequency in hertz.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Frequency {
    hz: f64,
}

impl Frequency {
    pub fn from_hz(hz: f64) -> Result<Frequency> {
        if !hz.is_finite() || hz <= 0.0 {
            return Err(Error::invalid(format!(
                "frequency must be finite and positive, got {hz} Hz"
            )));
        }
        Ok(Frequency { hz })
    }

    pub fn hz(&self) -> f64 {
        self.hz
    }

    /// Angular view, omega = 2*pi*f in rad/s.
    pub fn angular(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.hz
    }

    /// Vacuum wavelength c/f in meters.
    pub fn wavelength(&self) -> f64 {
        C / self.hz
    }
}

/// 10^(p/10) milliwatts expressed in watts.
pub fn dbm_to_watts(dbm: f64) -> Result<Power> {
    Power::from_dbm(dbm)
}

/// Watts to dBm; `-inf` for zero watts.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}

/// Energy of one photon at frequency f: hbar * 2*pi*f, in joules.
pub fn photon_energy(f: Frequency) -> f64 {
    HBAR * f.angular()
}
