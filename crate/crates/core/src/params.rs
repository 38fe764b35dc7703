//! Physical constants of the neutral-kaon system.
//!
//! Proper time is measured in units of the K_S lifetime, so widths and the
//! mass difference are all expressed in 1/τ_S (ħ = c = 1).

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Ratio τ_L / τ_S used for the default long-lived width.
pub const LIFETIME_RATIO: f64 = 579.0;

/// Strangeness oscillation period 2π/Δm in units of τ_S.
pub const OSCILLATION_PERIOD: f64 = 13.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("`{field}` must be finite, got {value}")]
    NonFinite { field: &'static str, value: f64 },

    #[error("gamma_s must be strictly positive, got {0}")]
    Positivity(f64),

    #[error("`{field}` must be non-negative, got {value}")]
    Negative { field: &'static str, value: f64 },

    #[error(
        "widths must be ordered gamma_s > gamma_l (got gamma_s = {gamma_s}, gamma_l = {gamma_l})"
    )]
    OrderedWidth { gamma_s: f64, gamma_l: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Decay widths and mass difference, in units of 1/τ_S.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub gamma_s: f64,
    pub gamma_l: f64,
    pub delta_m: f64,
}

impl Default for ParameterSet {
    fn default() -> Self {
        default_params()
    }
}

/// Γ_S = 1, Γ_L = 1/579 and Δm = 2π/13.
pub fn default_params() -> ParameterSet {
    ParameterSet {
        gamma_s: 1.0,
        gamma_l: 1.0 / LIFETIME_RATIO,
        delta_m: 2.0 * PI / OSCILLATION_PERIOD,
    }
}

/// Returns `p` unchanged when every invariant holds.
pub fn validate(p: ParameterSet) -> Result<ParameterSet, ParamError> {
    for (field, value) in [
        ("gamma_s", p.gamma_s),
        ("gamma_l", p.gamma_l),
        ("delta_m", p.delta_m),
    ] {
        if !value.is_finite() {
            return Err(ParamError::NonFinite { field, value });
        }
    }
    if p.gamma_s <= 0.0 {
        return Err(ParamError::Positivity(p.gamma_s));
    }
    if p.gamma_l < 0.0 {
        return Err(ParamError::Negative {
            field: "gamma_l",
            value: p.gamma_l,
        });
    }
    if p.delta_m < 0.0 {
        return Err(ParamError::Negative {
            field: "delta_m",
            value: p.delta_m,
        });
    }
    if p.gamma_l >= p.gamma_s {
        return Err(ParamError::OrderedWidth {
            gamma_s: p.gamma_s,
            gamma_l: p.gamma_l,
        });
    }
    Ok(p)
}

impl ParameterSet {
    pub fn new(gamma_s: f64, gamma_l: f64, delta_m: f64) -> Result<Self, ParamError> {
        validate(ParameterSet {
            gamma_s,
            gamma_l,
            delta_m,
        })
    }

    /// The Γ_S = Γ_L = 0 limit (stable, purely oscillating kaons).
    ///
    /// This is deliberately outside the validated domain: it exists so the
    /// closed forms can be evaluated at the spin-singlet limit.
    pub fn stable_limit(delta_m: f64) -> Self {
        ParameterSet {
            gamma_s: 0.0,
            gamma_l: 0.0,
            delta_m,
        }
    }

    /// Serializes to the `key = value` config format. Values use the
    /// shortest representation that parses back to the same `f64`.
    pub fn to_config_string(&self) -> String {
        format!(
            "gamma_s = {:?}\ngamma_l = {:?}\ndelta_m = {:?}\n",
            self.gamma_s, self.gamma_l, self.delta_m
        )
    }
}

impl fmt::Display for ParameterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "gamma_s = {}, gamma_l = {}, delta_m = {}",
            self.gamma_s, self.gamma_l, self.delta_m
        )
    }
}

/// Keys present in a config file; anything absent stays `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PartialParams {
    pub gamma_s: Option<f64>,
    pub gamma_l: Option<f64>,
    pub delta_m: Option<f64>,
}

impl PartialParams {
    /// Parses flat `key = value` lines. `#` starts a comment anywhere on a line.
    pub fn parse(text: &str) -> Result<Self, ParamError> {
        let mut out = PartialParams::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ParamError::Parse {
                line: line_no,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let number: f64 = value.parse().map_err(|_| ParamError::Parse {
                line: line_no,
                message: format!("`{value}` is not a number"),
            })?;
            let slot = match key {
                "gamma_s" => &mut out.gamma_s,
                "gamma_l" => &mut out.gamma_l,
                "delta_m" => &mut out.delta_m,
                other => {
                    return Err(ParamError::Parse {
                        line: line_no,
                        message: format!("unknown key `{other}`"),
                    })
                }
            };
            *slot = Some(number);
        }
        Ok(out)
    }

    pub fn read(path: &Path) -> Result<Self, ParamError> {
        let text = std::fs::read_to_string(path).map_err(|e| ParamError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Overlays the present keys onto `base` without validating.
    pub fn apply_to(&self, base: ParameterSet) -> ParameterSet {
        ParameterSet {
            gamma_s: self.gamma_s.unwrap_or(base.gamma_s),
            gamma_l: self.gamma_l.unwrap_or(base.gamma_l),
            delta_m: self.delta_m.unwrap_or(base.delta_m),
        }
    }
}

/// Reads a config file; missing keys take their default values.
pub fn load_params(path: impl AsRef<Path>) -> Result<ParameterSet, ParamError> {
    let partial = PartialParams::read(path.as_ref())?;
    validate(partial.apply_to(default_params()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    #[test]
    fn defaults() {
        let p = default_params();
        assert_eq!(p.gamma_s, 1.0);
        assert!((p.delta_m - 0.483_321_946_706_122).abs() < 1e-14);
        assert!((p.gamma_l - 0.001_727_115_716_753).abs() < 1e-14);
        assert_eq!(validate(p), Ok(p));
    }

    #[test]
    fn validation_errors_are_distinct() {
        assert!(ParameterSet::new(1.0, 0.0017, 0.4833).is_ok());
        assert!(matches!(
            ParameterSet::new(1.0, 2.0, 0.4833),
            Err(ParamError::OrderedWidth { .. })
        ));
        assert!(matches!(
            ParameterSet::new(0.0, 0.0, 0.4833),
            Err(ParamError::Positivity(_))
        ));
        assert!(matches!(
            ParameterSet::new(1.0, -0.1, 0.4833),
            Err(ParamError::Negative {
                field: "gamma_l",
                ..
            })
        ));
        assert!(matches!(
            ParameterSet::new(1.0, 0.0, -1.0),
            Err(ParamError::Negative {
                field: "delta_m",
                ..
            })
        ));
        assert!(matches!(
            ParameterSet::new(1.0, f64::NAN, 0.5),
            Err(ParamError::NonFinite {
                field: "gamma_l",
                ..
            })
        ));
        // equal widths are not ordered
        assert!(matches!(
            ParameterSet::new(1.0, 1.0, 0.5),
            Err(ParamError::OrderedWidth { .. })
        ));
    }

    fn write_tmp(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_examples() {
        let f = write_tmp("delta_m = 0.0\n");
        let p = load_params(f.path()).unwrap();
        assert_eq!(p.delta_m, 0.0);
        assert_eq!(p.gamma_s, 1.0);

        let f = write_tmp("");
        assert_eq!(load_params(f.path()).unwrap(), default_params());

        let f = write_tmp("gamma_s = -1\n");
        assert!(matches!(
            load_params(f.path()),
            Err(ParamError::Positivity(_))
        ));
    }

    #[test]
    fn parse_reports_line_numbers() {
        let err = PartialParams::parse("# header\ngamma_s = 1\n\ndelta_m: 3\n").unwrap_err();
        assert!(matches!(err, ParamError::Parse { line: 4, .. }));
        let err = PartialParams::parse("gamma_x = 1\n").unwrap_err();
        assert!(matches!(err, ParamError::Parse { line: 1, .. }));
        let err = PartialParams::parse("gamma_l = abc").unwrap_err();
        assert!(matches!(err, ParamError::Parse { line: 1, .. }));
    }

    #[test]
    fn comments_and_whitespace() {
        let p = PartialParams::parse("  gamma_l=0.002   # trailing\n#gamma_s = 9\n").unwrap();
        assert_eq!(p.gamma_l, Some(0.002));
        assert_eq!(p.gamma_s, None);
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_params("/definitely/not/here.cfg"),
            Err(ParamError::Io { .. })
        ));
    }

    proptest! {
        #[test]
        fn config_round_trip_is_bit_exact(
            gs in 1e-6f64..1e3,
            frac in 0.0f64..0.999,
            dm in 0.0f64..1e3,
        ) {
            let p = ParameterSet::new(gs, gs * frac, dm).unwrap();
            let f = write_tmp(&p.to_config_string());
            let q = load_params(f.path()).unwrap();
            prop_assert_eq!(p.gamma_s.to_bits(), q.gamma_s.to_bits());
            prop_assert_eq!(p.gamma_l.to_bits(), q.gamma_l.to_bits());
            prop_assert_eq!(p.delta_m.to_bits(), q.delta_m.to_bits());
        }
    }
}
