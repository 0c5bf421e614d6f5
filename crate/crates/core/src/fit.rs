//! Decay-rate fits for convergence series: exponential `C e^{-ct}` versus
//! algebraic `C t^{-e}`, with the exponent-to-`ρ` maps of the Łojasiewicz rates.

use serde::{Deserialize, Serialize};

use crate::equilibrium::linear_fit;
use crate::error::{ChicError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    Exponential,
    Algebraic,
    /// Pick whichever of the two has the smaller log-residual.
    Auto,
}

/// Which rate law maps an algebraic exponent to `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesTag {
    /// `V*` norms: `e = ρ/(1 - 2ρ)`.
    DualNorm,
    /// `L²` norm of the temperature: `e = ρ/(2 - 4ρ)`.
    ThetaL2,
}

/// Algebraic exponent implied by `ρ ∈ (0, ½)`.
pub fn exponent_from_rho(rho: f64, tag: SeriesTag) -> f64 {
    match tag {
        SeriesTag::DualNorm => rho / (1.0 - 2.0 * rho),
        SeriesTag::ThetaL2 => rho / (2.0 - 4.0 * rho),
    }
}

/// Inverse of [`exponent_from_rho`] on `e ∈ (0, ∞)`.
pub fn rho_from_exponent(e: f64, tag: SeriesTag) -> f64 {
    match tag {
        SeriesTag::DualNorm => e / (1.0 + 2.0 * e),
        SeriesTag::ThetaL2 => 2.0 * e / (1.0 + 4.0 * e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFitResult {
    pub model: DecayModel,
    /// Rate `c` (exponential) or exponent `e` (algebraic).
    pub exponent: f64,
    pub prefactor: f64,
    /// `ρ` implied by the selected model; `½` for exponential decay.
    pub implied_rho: f64,
    pub r_squared: f64,
    /// Sum of squared log-residuals of the selected model.
    pub residual: f64,
    pub exponential_residual: f64,
    pub algebraic_residual: f64,
    pub window: (f64, f64),
}

struct LogFit {
    intercept: f64,
    slope: f64,
    r2: f64,
    rss: f64,
}

fn log_fit(x: &[f64], y: &[f64]) -> LogFit {
    let (a, b, r2) = linear_fit(x, y);
    let rss = x.iter().zip(y).map(|(xi, yi)| (yi - a - b * xi).powi(2)).sum();
    LogFit {
        intercept: a,
        slope: b,
        r2,
        rss,
    }
}

pub fn fit_decay(t: &[f64], v: &[f64], model: DecayModel, tag: SeriesTag) -> Result<DecayFitResult> {
    if t.len() != v.len() {
        return Err(ChicError::DimensionMismatch {
            expected: t.len(),
            got: v.len(),
        });
    }
    if t.len() < 10 {
        return Err(ChicError::InvalidSeries {
            required: 10,
            got: t.len(),
        });
    }
    let bad = v.iter().filter(|&&x| !(x > 0.0 && x.is_finite())).count();
    if bad > 0 {
        return Err(ChicError::InvalidSeries {
            required: t.len(),
            got: t.len() - bad,
        });
    }
    // Algebraic fits need t > 0; keep both models on the same points.
    let keep: Vec<usize> = match model {
        DecayModel::Exponential => (0..t.len()).collect(),
        _ => (0..t.len()).filter(|&i| t[i] > 0.0).collect(),
    };
    if keep.len() < 10 {
        return Err(ChicError::InvalidSeries {
            required: 10,
            got: keep.len(),
        });
    }
    let ts: Vec<f64> = keep.iter().map(|&i| t[i]).collect();
    let ly: Vec<f64> = keep.iter().map(|&i| v[i].ln()).collect();
    let exp = log_fit(&ts, &ly);
    let alg = if model == DecayModel::Exponential {
        None
    } else {
        let lt: Vec<f64> = ts.iter().map(|x| x.ln()).collect();
        Some(log_fit(&lt, &ly))
    };
    let chosen = match (model, &alg) {
        (DecayModel::Exponential, _) => DecayModel::Exponential,
        (DecayModel::Algebraic, _) => DecayModel::Algebraic,
        (DecayModel::Auto, Some(a)) => {
            if a.rss < exp.rss {
                DecayModel::Algebraic
            } else {
                DecayModel::Exponential
            }
        }
        (DecayModel::Auto, None) => DecayModel::Exponential,
    };
    let alg_rss = alg.as_ref().map_or(f64::NAN, |a| a.rss);
    let window = (ts[0], *ts.last().unwrap());
    Ok(match chosen {
        DecayModel::Algebraic => {
            let a = alg.expect("algebraic fit computed");
            let e = -a.slope;
            DecayFitResult {
                model: chosen,
                exponent: e,
                prefactor: a.intercept.exp(),
                implied_rho: rho_from_exponent(e, tag),
                r_squared: a.r2,
                residual: a.rss,
                exponential_residual: exp.rss,
                algebraic_residual: a.rss,
                window,
            }
        }
        _ => DecayFitResult {
            model: DecayModel::Exponential,
            exponent: -exp.slope,
            prefactor: exp.intercept.exp(),
            implied_rho: 0.5,
            r_squared: exp.r2,
            residual: exp.rss,
            exponential_residual: exp.rss,
            algebraic_residual: alg_rss,
            window,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebraic_series_recovers_exponent() {
        let t: Vec<f64> = (1..=40).map(|i| i as f64 * 0.5).collect();
        let v: Vec<f64> = t.iter().map(|x| 3.0 / x).collect();
        let r = fit_decay(&t, &v, DecayModel::Auto, SeriesTag::DualNorm).unwrap();
        assert_eq!(r.model, DecayModel::Algebraic);
        assert!((r.exponent - 1.0).abs() < 1e-12);
        assert!((r.implied_rho - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.prefactor - 3.0).abs() < 1e-10);
    }

    #[test]
    fn exponential_series_selected() {
        let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.5).collect();
        let v: Vec<f64> = t.iter().map(|x| 2.0 * (-0.5 * x).exp()).collect();
        let r = fit_decay(&t, &v, DecayModel::Auto, SeriesTag::DualNorm).unwrap();
        assert_eq!(r.model, DecayModel::Exponential);
        assert!((r.exponent - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_short_or_nonpositive_series() {
        let t: Vec<f64> = (1..=5).map(|i| i as f64).collect();
        assert!(fit_decay(&t, &t, DecayModel::Auto, SeriesTag::DualNorm).is_err());
        let t: Vec<f64> = (1..=12).map(|i| i as f64).collect();
        let mut v = t.clone();
        v[3] = 0.0;
        assert!(fit_decay(&t, &v, DecayModel::Exponential, SeriesTag::DualNorm).is_err());
    }

    #[test]
    fn theta_map_inverts() {
        for rho in [0.1, 0.25, 0.4] {
            for tag in [SeriesTag::DualNorm, SeriesTag::ThetaL2] {
                let e = exponent_from_rho(rho, tag);
                assert!((rho_from_exponent(e, tag) - rho).abs() < 1e-12);
            }
        }
    }
}
