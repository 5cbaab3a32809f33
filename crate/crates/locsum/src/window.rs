//! Window-width rules f_N for the localization window (N, N·f_N].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent rule ξ(N) used by [`WindowKind::GrowingLog`].
///
/// ξ must be non-decreasing over the evaluated range; every variant here is
/// non-decreasing by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum XiRule {
    /// ξ(N) = scale · log log N.
    LogLog { scale: f64 },
}

impl XiRule {
    pub fn eval(&self, level: f64) -> f64 {
        match *self {
            XiRule::LogLog { scale } => scale * level.ln().ln(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            XiRule::LogLog { scale } => {
                if !(scale > 0.0) || !scale.is_finite() {
                    return Err(Error::Domain(format!(
                        "xi scale must be a positive finite number, got {scale}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The width rule itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowKind {
    /// f_N = (log N)^M with fixed M > 0.
    PowerLog { m: f64 },
    /// f_N = (log N)^{ξ(N)} with ξ non-decreasing.
    GrowingLog { xi: XiRule },
    /// f_N ≡ value. Diagnostic family for injected test widths; not one of
    /// the two log-based regimes.
    Fixed { value: f64 },
}

/// A window family: the width rule plus the floor f_N ≥ 1 + 1/N and the
/// optional budget cap f_N ≤ N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowFamily {
    pub kind: WindowKind,
    /// Enforce f_N ≤ N on evaluation (the part-(ii) budget shape).
    #[serde(default)]
    pub cap_at_level: bool,
}

impl WindowFamily {
    pub fn power_log(m: f64) -> Self {
        WindowFamily { kind: WindowKind::PowerLog { m }, cap_at_level: false }
    }

    pub fn growing_log(xi: XiRule) -> Self {
        WindowFamily { kind: WindowKind::GrowingLog { xi }, cap_at_level: false }
    }

    pub fn fixed(value: f64) -> Self {
        WindowFamily { kind: WindowKind::Fixed { value }, cap_at_level: false }
    }

    pub fn with_cap(mut self) -> Self {
        self.cap_at_level = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            WindowKind::PowerLog { m } => {
                if !(m > 0.0) || !m.is_finite() {
                    return Err(Error::Domain(format!(
                        "power-log exponent must be a positive finite number, got {m}"
                    )));
                }
            }
            WindowKind::GrowingLog { xi } => xi.validate()?,
            WindowKind::Fixed { value } => {
                if !(value > 0.0) || !value.is_finite() {
                    return Err(Error::Domain(format!(
                        "fixed width must be a positive finite number, got {value}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Evaluate f_N at a level N ≥ 1, clamped below at 1 + 1/N.
    ///
    /// Log-based kinds reject N = 1 (log 1 = 0 leaves no width to clamp
    /// from). With `cap_at_level`, the result is additionally capped at N,
    /// which requires N large enough that the cap and the floor are
    /// compatible.
    pub fn width(&self, level: f64) -> Result<f64> {
        if !(level >= 1.0) || !level.is_finite() {
            return Err(Error::Domain(format!("window level must be >= 1, got {level}")));
        }
        let raw = match self.kind {
            WindowKind::PowerLog { m } => {
                let l = level.ln();
                if l <= 0.0 {
                    return Err(Error::Domain(format!(
                        "power-log width is (log N)^M = 0 at N = {level}, below the floor 1 + 1/N"
                    )));
                }
                l.powf(m)
            }
            WindowKind::GrowingLog { xi } => {
                let l = level.ln();
                if l <= 0.0 {
                    return Err(Error::Domain(format!(
                        "growing-log width degenerates at N = {level} (log N = 0)"
                    )));
                }
                l.powf(xi.eval(level))
            }
            WindowKind::Fixed { value } => value,
        };
        let floor = 1.0 + 1.0 / level;
        let width = raw.max(floor);
        if self.cap_at_level {
            if level < floor {
                return Err(Error::Domain(format!(
                    "cap f_N <= N conflicts with the floor 1 + 1/N at N = {level}"
                )));
            }
            return Ok(width.min(level));
        }
        Ok(width)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_log_at_one_is_domain_error() {
        let f = WindowFamily::power_log(2.0);
        assert!(matches!(f.width(1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn floor_binds_for_small_levels() {
        // ln(2)^1 = 0.693 < 1.5 = 1 + 1/2, so the floor wins.
        let f = WindowFamily::power_log(1.0);
        assert_eq!(f.width(2.0).unwrap(), 1.5);
    }

    #[test]
    fn power_log_matches_direct_evaluation() {
        let f = WindowFamily::power_log(3.0);
        let n = 100.0f64;
        assert_eq!(f.width(n).unwrap(), n.ln().powf(3.0));
    }

    #[test]
    fn cap_at_level_binds() {
        let f = WindowFamily::growing_log(XiRule::LogLog { scale: 4.0 }).with_cap();
        let n = 20.0f64;
        assert_eq!(f.width(n).unwrap(), n);
    }

    #[test]
    fn below_one_rejected() {
        let f = WindowFamily::fixed(4.0);
        assert!(f.width(0.5).is_err());
    }
}
