//! Simulation and analysis toolkit for measuring a microwave cavity's
//! resonance curve at drive powers from the classical regime down to
//! hundredths of a photon.
//!
//! The pipeline mirrors a bench setup: a swept generator feeds an
//! attenuator chain into a two-port cavity held in a thermal environment,
//! the transmitted signal passes a low-noise amplifier and is mixed down
//! to baseband, and an FFT spectrum analyzer measures the per-bin power.
//! A Lorentzian fit then extracts the loaded Q from the sweep, which is
//! the quantity that stays put as the drive power drops below one
//! intracavity photon.
//!
//! Modules:
//! - [`units`]: physical constants, dBm/watt and frequency conversions
//! - [`cavity`]: multi-pass interference, Lorentzian transmission, stored energy
//! - [`thermal`]: Bose-Einstein occupation and thermal-noise budgets
//! - [`chain`]: the generator → attenuator → cavity → LNA → mixer chain
//! - [`analyzer`]: averaged-periodogram FFT spectrum analyzer
//! - [`fit`]: Lorentzian least-squares fitting and Q-consistency checks

pub mod analyzer;
pub mod cavity;
pub mod chain;
pub mod error;
mod fftutil;
pub mod fit;
pub mod thermal;
pub mod units;

pub use analyzer::{AnalyzerSettings, Spectrum, Window};
pub use cavity::{CavityParams, IdealEtalon};
pub use chain::{BasebandFrame, ChainConfig, ScenePoint, SweepMode, SweepSettings};
pub use error::{Error, Result};
pub use fit::{FitResult, SweepData, SweepSource};
pub use thermal::ThermalEnvironment;
pub use units::{Frequency, Power};
