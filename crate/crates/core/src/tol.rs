use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

/// Environment variable that overrides individual tolerances, as a
/// comma-separated list of `key=value` pairs, e.g. `complete=1e-8,zero=1e-14`.
pub const TOLERANCE_ENV: &str = "MEASTREE_TOL";

/// The numerical tolerance pack used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Frobenius norm of `Σ L†L − I` accepted for a measurement.
    pub complete: f64,
    /// Relative Hermiticity defect accepted for a density operator.
    pub herm: f64,
    /// Most negative eigenvalue (relative to the trace) accepted for a density operator.
    pub psd: f64,
    /// Trace and probability cutoff below which values count as zero.
    pub zero: f64,
    /// Second singular value, relative to the first, accepted as rank one.
    pub rank: f64,
    /// Residual accepted for a product factorization.
    pub fact: f64,
    /// Probability spread accepted as input independence.
    pub independence: f64,
    /// Probability spread above which a branch is declared input dependent.
    pub dependence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            complete: 1e-9,
            herm: 1e-9,
            psd: 1e-9,
            zero: 1e-12,
            rank: 1e-8,
            fact: 1e-8,
            independence: 1e-9,
            dependence: 1e-6,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ToleranceError {
    #[error("expected `key=value`, found `{0}`")]
    Syntax(String),
    #[error("unknown tolerance key `{0}`")]
    UnknownKey(String),
    #[error("tolerance `{0}` must be a finite non-negative number, found `{1}`")]
    BadValue(String, String),
}

impl Tolerances {
    /// Applies `key=value` overrides on top of the defaults.
    pub fn parse(overrides: &str) -> Result<Self, ToleranceError> {
        let mut tol = Tolerances::default();
        for item in overrides.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| ToleranceError::Syntax(item.to_string()))?;
            let (key, value) = (key.trim(), value.trim());
            let parsed: f64 = value
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| ToleranceError::BadValue(key.to_string(), value.to_string()))?;
            let slot = match key {
                "complete" => &mut tol.complete,
                "herm" => &mut tol.herm,
                "psd" => &mut tol.psd,
                "zero" => &mut tol.zero,
                "rank" => &mut tol.rank,
                "fact" => &mut tol.fact,
                "independence" => &mut tol.independence,
                "dependence" => &mut tol.dependence,
                other => return Err(ToleranceError::UnknownKey(other.to_string())),
            };
            *slot = parsed;
        }
        Ok(tol)
    }

    /// Reads [`TOLERANCE_ENV`]; defaults when unset.
    pub fn from_env() -> Result<Self, ToleranceError> {
        match std::env::var(TOLERANCE_ENV) {
            Ok(s) => Self::parse(&s),
            Err(_) => Ok(Self::default()),
        }
    }

    /// The process-wide pack, read from the environment on first use.
    ///
    /// A malformed override is logged and ignored.
    pub fn current() -> &'static Tolerances {
        static CURRENT: OnceLock<Tolerances> = OnceLock::new();
        CURRENT.get_or_init(|| {
            Self::from_env().unwrap_or_else(|e| {
                log::warn!("ignoring {TOLERANCE_ENV}: {e}");
                Self::default()
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_overrides_selected_keys() {
        let t = Tolerances::parse("complete=1e-6, zero=0").unwrap();
        assert_eq!(t.complete, 1e-6);
        assert_eq!(t.zero, 0.0);
        assert_eq!(t.herm, Tolerances::default().herm);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(matches!(Tolerances::parse("complete"), Err(ToleranceError::Syntax(_))));
        assert!(matches!(Tolerances::parse("bogus=1"), Err(ToleranceError::UnknownKey(_))));
        assert!(matches!(Tolerances::parse("zero=-1"), Err(ToleranceError::BadValue(..))));
        assert_eq!(Tolerances::parse("").unwrap(), Tolerances::default());
    }
}
