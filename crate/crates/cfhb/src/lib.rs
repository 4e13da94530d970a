//! Switching-interval-resolved simulator and analyzer for an isolated
//! current-fed half-bridge (CFHB) AC-DC converter under secondary-side
//! modulation (SPSM analytics, DCPSM, IDCPSM).
//!
//! The crate synthesizes exact piecewise-linear current waveforms per
//! switching interval, integrates them in closed form, evaluates the
//! closed-form RMS/average expressions for each scheme, checks
//! soft-switching feasibility, and aggregates grid-cycle loss/efficiency
//! comparisons.

pub mod cli;
pub mod metrics;
pub mod params;
pub mod sweep;
pub mod waveforms;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CfhbError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("infeasible operating point: {0}")]
    Infeasible(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("waveform domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CfhbError>;

/// Formats a float with 9 significant digits for deterministic CSV output.
pub fn fmt_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    // Round at 9 significant digits first so the exponent of e.g. 9.9999...
    // is decided on the rounded value.
    let scale = 10f64.powi(8 - exp);
    let rounded = (x * scale).round() / scale;
    let exp = rounded.abs().log10().floor() as i32;
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{rounded:.decimals$}");
        trim_zeros(&s)
    } else {
        let mantissa = rounded / 10f64.powi(exp);
        let s = format!("{mantissa:.8}");
        format!("{}e{}", trim_zeros(&s), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::fmt_g9;

    #[test]
    fn fmt_g9_basic() {
        assert_eq!(fmt_g9(0.0), "0");
        assert_eq!(fmt_g9(1.0), "1");
        assert_eq!(fmt_g9(-2.5), "-2.5");
        assert_eq!(fmt_g9(123456789.0), "123456789");
        assert_eq!(fmt_g9(0.000123456789), "0.000123456789");
        assert_eq!(fmt_g9(1234567891.0), "1.23456789e9");
        assert_eq!(fmt_g9(std::f64::consts::PI), "3.14159265");
    }

    #[test]
    fn fmt_g9_round_boundary() {
        assert_eq!(fmt_g9(0.999999999999), "1");
        assert_eq!(fmt_g9(9.99999999999e8), "1e9");
    }
}
