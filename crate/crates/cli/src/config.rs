//! Flat key-value experiment configuration: one `section.key = value` per
//! line, `#` comments, unknown keys rejected with line diagnostics.

use cavitysim::chain::SweepMode;
use cavitysim::{CavityParams, ChainConfig, Frequency, ThermalEnvironment};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config: {0}")]
    Invalid(String),
}

fn parse_err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Parse {
        line,
        message: message.into(),
    }
}

/// Cavity section; mirrors [`CavityParams`].
#[derive(Debug, Clone, Copy)]
pub struct CavitySpec {
    pub f_res_hz: f64,
    pub q_loaded: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub excess_loss_db: f64,
}

impl Default for CavitySpec {
    fn default() -> Self {
        CavitySpec {
            f_res_hz: 9.590e9,
            q_loaded: 8800.0,
            beta1: 0.89,
            beta2: 0.94,
            excess_loss_db: 0.0,
        }
    }
}

impl CavitySpec {
    pub fn build(&self) -> Result<CavityParams, ConfigError> {
        CavityParams::with_excess_loss(
            Frequency::from_hz(self.f_res_hz).map_err(|e| ConfigError::Invalid(e.to_string()))?,
            self.q_loaded,
            self.beta1,
            self.beta2,
            self.excess_loss_db,
        )
        .map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

/// Chain section; mirrors [`ChainConfig`].
#[derive(Debug, Clone, Copy)]
pub struct ChainSpec {
    pub attenuation_db: f64,
    pub lna_gain_db: f64,
    pub lna_noise_temp_k: f64,
    pub lo_freq_hz: f64,
    pub lpf_cutoff_hz: f64,
    pub sample_rate_hz: f64,
    pub post_gain_db: f64,
}

impl Default for ChainSpec {
    fn default() -> Self {
        let d = ChainConfig::default();
        ChainSpec {
            attenuation_db: d.attenuation_db,
            lna_gain_db: d.lna_gain_db,
            lna_noise_temp_k: d.lna_noise_temp,
            lo_freq_hz: d.lo_freq.hz(),
            lpf_cutoff_hz: d.lpf_cutoff_hz,
            sample_rate_hz: d.sample_rate_hz,
            post_gain_db: d.post_gain_db,
        }
    }
}

impl ChainSpec {
    pub fn build(&self) -> Result<ChainConfig, ConfigError> {
        let chain = ChainConfig {
            attenuation_db: self.attenuation_db,
            lna_gain_db: self.lna_gain_db,
            lna_noise_temp: self.lna_noise_temp_k,
            lo_freq: Frequency::from_hz(self.lo_freq_hz)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?,
            lpf_cutoff_hz: self.lpf_cutoff_hz,
            sample_rate_hz: self.sample_rate_hz,
            post_gain_db: self.post_gain_db,
        };
        chain
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(chain)
    }
}

/// The frequency sweep request.
#[derive(Debug, Clone, Copy)]
pub struct SweepSpec {
    pub f_start_hz: f64,
    pub f_stop_hz: f64,
    pub points: usize,
    pub power_dbm_at_cavity: f64,
    pub rbw_hz: f64,
    pub averages: usize,
    pub mode: SweepMode,
    pub master_seed: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            f_start_hz: 9.588e9,
            f_stop_hz: 9.593e9,
            points: 201,
            power_dbm_at_cavity: -55.0,
            rbw_hz: 25_000.0,
            averages: 4,
            mode: SweepMode::Analytic,
            master_seed: 1,
        }
    }
}

/// Per-power rows for the four-power comparison run. `q_values`,
/// `rbw_hz`, and `averages` hold either one shared entry or one per power.
#[derive(Debug, Clone)]
pub struct Table1Spec {
    pub powers_dbm: Vec<f64>,
    pub q_values: Vec<f64>,
    pub rbw_hz: Vec<f64>,
    pub averages: Vec<usize>,
}

impl Default for Table1Spec {
    fn default() -> Self {
        Table1Spec {
            powers_dbm: vec![-55.0, -125.0, -135.0, -145.0],
            q_values: vec![8800.0],
            rbw_hz: vec![25_000.0, 100.0, 10.0, 1.0],
            averages: vec![1],
        }
    }
}

impl Table1Spec {
    fn per_row<T: Copy>(&self, list: &[T], row: usize, what: &str) -> Result<T, ConfigError> {
        match list.len() {
            1 => Ok(list[0]),
            n if n == self.powers_dbm.len() => Ok(list[row]),
            n => Err(ConfigError::Invalid(format!(
                "table1.{what} must have 1 entry or one per power ({} powers, got {n})",
                self.powers_dbm.len()
            ))),
        }
    }

    pub fn row_q(&self, row: usize) -> Result<f64, ConfigError> {
        self.per_row(&self.q_values, row, "q_values")
    }

    pub fn row_rbw(&self, row: usize) -> Result<f64, ConfigError> {
        self.per_row(&self.rbw_hz, row, "rbw_hz")
    }

    pub fn row_averages(&self, row: usize) -> Result<usize, ConfigError> {
        self.per_row(&self.averages, row, "averages")
    }
}

/// Noise-only acquisition settings.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSpec {
    pub rbw_hz: f64,
    pub averages: usize,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            rbw_hz: 625.0,
            averages: 100,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentConfig {
    pub cavity: CavitySpec,
    pub chain: ChainSpec,
    pub env: EnvSpec,
    pub sweep: SweepSpec,
    pub table1: Table1Spec,
    pub noise: NoiseSpec,
}

#[derive(Debug, Clone, Copy)]
pub struct EnvSpec {
    pub temp_k: f64,
}

impl Default for EnvSpec {
    fn default() -> Self {
        EnvSpec { temp_k: 305.4 }
    }
}

impl EnvSpec {
    pub fn build(&self) -> Result<ThermalEnvironment, ConfigError> {
        ThermalEnvironment::new(self.temp_k).map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.cavity.build()?;
        self.chain.build()?;
        self.env.build()?;
        if self.sweep.f_start_hz.is_nan()
            || self.sweep.f_stop_hz.is_nan()
            || self.sweep.f_start_hz >= self.sweep.f_stop_hz
        {
            return Err(ConfigError::Invalid(format!(
                "sweep.f_start_hz {} must be below sweep.f_stop_hz {}",
                self.sweep.f_start_hz, self.sweep.f_stop_hz
            )));
        }
        if self.sweep.points < 5 {
            return Err(ConfigError::Invalid(format!(
                "sweep.points must be at least 5, got {}",
                self.sweep.points
            )));
        }
        for rbw in [self.sweep.rbw_hz, self.noise.rbw_hz] {
            if rbw.is_nan() || rbw <= 0.0 {
                return Err(ConfigError::Invalid(format!(
                    "resolution bandwidths must be positive, got {rbw}"
                )));
            }
        }
        if self.sweep.averages == 0 || self.noise.averages == 0 {
            return Err(ConfigError::Invalid(
                "averages must be at least 1".to_string(),
            ));
        }
        if self.table1.powers_dbm.is_empty() {
            return Err(ConfigError::Invalid(
                "table1.powers_dbm must not be empty".to_string(),
            ));
        }
        for row in 0..self.table1.powers_dbm.len() {
            self.table1.row_q(row)?;
            self.table1.row_rbw(row)?;
            self.table1.row_averages(row)?;
        }
        Ok(())
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("key '{key}': '{value}' is not a number")))
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize, ConfigError> {
    value.parse::<usize>().map_err(|_| {
        parse_err(
            line,
            format!("key '{key}': '{value}' is not a non-negative integer"),
        )
    })
}

fn parse_u64(line: usize, key: &str, value: &str) -> Result<u64, ConfigError> {
    value
        .parse::<u64>()
        .map_err(|_| parse_err(line, format!("key '{key}': '{value}' is not a 64-bit seed")))
}

fn parse_f64_list(line: usize, key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(|v| parse_f64(line, key, v.trim()))
        .collect()
}

fn parse_usize_list(line: usize, key: &str, value: &str) -> Result<Vec<usize>, ConfigError> {
    value
        .split(',')
        .map(|v| parse_usize(line, key, v.trim()))
        .collect()
}

fn parse_mode(line: usize, value: &str) -> Result<SweepMode, ConfigError> {
    match value {
        "analytic" => Ok(SweepMode::Analytic),
        "stochastic" => Ok(SweepMode::Stochastic),
        other => Err(parse_err(
            line,
            format!("sweep.mode must be analytic or stochastic, got '{other}'"),
        )),
    }
}

/// Parse a configuration file body on top of the defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(parse_err(
                line,
                format!("expected 'key = value', got '{body}'"),
            ));
        };
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(parse_err(line, format!("key '{key}' has an empty value")));
        }
        match key {
            "cavity.f_res_hz" => cfg.cavity.f_res_hz = parse_f64(line, key, value)?,
            "cavity.q_loaded" => cfg.cavity.q_loaded = parse_f64(line, key, value)?,
            "cavity.beta1" => cfg.cavity.beta1 = parse_f64(line, key, value)?,
            "cavity.beta2" => cfg.cavity.beta2 = parse_f64(line, key, value)?,
            "cavity.excess_loss_db" => cfg.cavity.excess_loss_db = parse_f64(line, key, value)?,
            "chain.attenuation_db" => cfg.chain.attenuation_db = parse_f64(line, key, value)?,
            "chain.lna_gain_db" => cfg.chain.lna_gain_db = parse_f64(line, key, value)?,
            "chain.lna_noise_temp_k" => cfg.chain.lna_noise_temp_k = parse_f64(line, key, value)?,
            "chain.lo_freq_hz" => cfg.chain.lo_freq_hz = parse_f64(line, key, value)?,
            "chain.lpf_cutoff_hz" => cfg.chain.lpf_cutoff_hz = parse_f64(line, key, value)?,
            "chain.sample_rate_hz" => cfg.chain.sample_rate_hz = parse_f64(line, key, value)?,
            "chain.post_gain_db" => cfg.chain.post_gain_db = parse_f64(line, key, value)?,
            "env.temp_k" => cfg.env.temp_k = parse_f64(line, key, value)?,
            "sweep.f_start_hz" => cfg.sweep.f_start_hz = parse_f64(line, key, value)?,
            "sweep.f_stop_hz" => cfg.sweep.f_stop_hz = parse_f64(line, key, value)?,
            "sweep.points" => cfg.sweep.points = parse_usize(line, key, value)?,
            "sweep.power_dbm_at_cavity" => {
                cfg.sweep.power_dbm_at_cavity = parse_f64(line, key, value)?
            }
            "sweep.rbw_hz" => cfg.sweep.rbw_hz = parse_f64(line, key, value)?,
            "sweep.averages" => cfg.sweep.averages = parse_usize(line, key, value)?,
            "sweep.mode" => cfg.sweep.mode = parse_mode(line, value)?,
            "sweep.master_seed" => cfg.sweep.master_seed = parse_u64(line, key, value)?,
            "table1.powers_dbm" => cfg.table1.powers_dbm = parse_f64_list(line, key, value)?,
            "table1.q_values" => cfg.table1.q_values = parse_f64_list(line, key, value)?,
            "table1.rbw_hz" => cfg.table1.rbw_hz = parse_f64_list(line, key, value)?,
            "table1.averages" => cfg.table1.averages = parse_usize_list(line, key, value)?,
            "noise.rbw_hz" => cfg.noise.rbw_hz = parse_f64(line, key, value)?,
            "noise.averages" => cfg.noise.averages = parse_usize(line, key, value)?,
            other => return Err(parse_err(line, format!("unknown key '{other}'"))),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Bundled presets, selectable by name wherever a config path is accepted.
pub const PRESET_TABLE1: &str = include_str!("../presets/table1.cfg");
pub const PRESET_FIG5: &str = include_str!("../presets/fig5.cfg");

/// Load a config from a preset name (`table1`, `fig5`) or a file path.
pub fn load_config(source: &str) -> Result<ExperimentConfig, ConfigError> {
    match source {
        "table1" => parse_config(PRESET_TABLE1),
        "fig5" => parse_config(PRESET_FIG5),
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::Invalid(format!("cannot read '{path}': {e}")))?;
            parse_config(&text)
        }
    }
}
