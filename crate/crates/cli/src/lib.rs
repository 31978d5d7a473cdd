//! Library surface behind the `cavitysim` binary: configuration parsing
//! and the experiment runners. The binary itself is a thin argument
//! layer over these.

pub mod config;
pub mod runner;

/// Parse a frequency argument with an optional Hz/kHz/MHz/GHz suffix;
/// a bare number is hertz.
pub fn parse_freq_arg(arg: &str) -> Result<f64, String> {
    let lower = arg.trim().to_ascii_lowercase();
    let (number, scale) = if let Some(v) = lower.strip_suffix("ghz") {
        (v, 1e9)
    } else if let Some(v) = lower.strip_suffix("mhz") {
        (v, 1e6)
    } else if let Some(v) = lower.strip_suffix("khz") {
        (v, 1e3)
    } else if let Some(v) = lower.strip_suffix("hz") {
        (v, 1.0)
    } else {
        (lower.as_str(), 1.0)
    };
    number
        .trim()
        .parse::<f64>()
        .map(|v| v * scale)
        .map_err(|_| format!("'{arg}' is not a frequency (expected e.g. 9.59GHz or 1e9)"))
}

/// Parse a temperature argument with an optional trailing K.
pub fn parse_temp_arg(arg: &str) -> Result<f64, String> {
    let lower = arg.trim().to_ascii_lowercase();
    let number = lower.strip_suffix('k').unwrap_or(&lower);
    number
        .trim()
        .parse::<f64>()
        .map_err(|_| format!("'{arg}' is not a temperature (expected e.g. 300K)"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_suffixes() {
        assert_eq!(parse_freq_arg("1GHz").unwrap(), 1e9);
        assert_eq!(parse_freq_arg("9.59ghz").unwrap(), 9.59e9);
        assert_eq!(parse_freq_arg("625Hz").unwrap(), 625.0);
        assert_eq!(parse_freq_arg("2.5 MHz").unwrap(), 2.5e6);
        assert_eq!(parse_freq_arg("1e9").unwrap(), 1e9);
        assert!(parse_freq_arg("fast").is_err());
    }

    #[test]
    fn temperature_suffixes() {
        assert_eq!(parse_temp_arg("300K").unwrap(), 300.0);
        assert_eq!(parse_temp_arg("305.4").unwrap(), 305.4);
        assert!(parse_temp_arg("cold").is_err());
    }
}
