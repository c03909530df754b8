//! Least-squares fits of mean counters against code distance.
//!
//! Both models are fitted as straight lines in log space:
//! power law `y = A·d^B` via `log10 y = log10 A + B·log10 d`, and
//! exponential `y = A·10^(B·d)` via `log10 y = log10 A + B·d`.

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least 2 usable points, got {0}")]
    TooFewPoints(usize),
    #[error("all usable points share the same abscissa")]
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    Power,
    Exp,
}

impl std::str::FromStr for FitModel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "power" => Ok(FitModel::Power),
            "exp" => Ok(FitModel::Exp),
            other => Err(format!("unknown fit model '{other}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    /// Prefactor `A`.
    pub a: f64,
    /// Exponent (power law) or decay slope per unit distance (exponential).
    pub b: f64,
    /// Sum of squared residuals in log10 space.
    pub residual: f64,
    pub points_used: usize,
}

impl FitResult {
    pub fn predict(&self, d: f64) -> f64 {
        match self.model {
            FitModel::Power => self.a * d.powf(self.b),
            FitModel::Exp => self.a * 10f64.powf(self.b * d),
        }
    }
}

/// Ordinary least squares `y = a + b·x`; returns `(a, b, residual)`.
fn ols(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64), FitError> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(FitError::Degenerate);
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let residual = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    Ok((a, b, residual))
}

/// Keeps points with `d ≥ d_min` and `y > 0`, warning about dropped
/// non-positive values.
fn usable(points: &[(f64, f64)], d_min: f64) -> Vec<(f64, f64)> {
    points
        .iter()
        .copied()
        .filter(|&(d, _)| d >= d_min)
        .filter(|&(d, y)| {
            let ok = y > 0.0 && y.is_finite();
            if !ok {
                warn!("dropping point d={d} y={y}: not positive");
            }
            ok
        })
        .collect()
}

pub fn fit(model: FitModel, points: &[(f64, f64)], d_min: f64) -> Result<FitResult, FitError> {
    let pts = usable(points, d_min);
    if pts.len() < 2 {
        return Err(FitError::TooFewPoints(pts.len()));
    }
    let xs: Vec<f64> = pts
        .iter()
        .map(|&(d, _)| match model {
            FitModel::Power => d.log10(),
            FitModel::Exp => d,
        })
        .collect();
    let ys: Vec<f64> = pts.iter().map(|&(_, y)| y.log10()).collect();
    let (icept, b, residual) = ols(&xs, &ys)?;
    Ok(FitResult {
        model,
        a: 10f64.powf(icept),
        b,
        residual,
        points_used: pts.len(),
    })
}

pub fn fit_power_law(points: &[(f64, f64)], d_min: f64) -> Result<FitResult, FitError> {
    fit(FitModel::Power, points, d_min)
}

pub fn fit_exponential(points: &[(f64, f64)], d_min: f64) -> Result<FitResult, FitError> {
    fit(FitModel::Exp, points, d_min)
}
