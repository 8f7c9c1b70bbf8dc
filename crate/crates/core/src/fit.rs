//! Least-squares line fits used by the decay and growth diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination.
    pub r2: f64,
    pub points: usize,
}

pub fn line_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return invalid(format!("line fit needs matching samples, got {} and {}", x.len(), y.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if sxx == 0.0 {
        return invalid("line fit with a single abscissa");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LineFit { slope, intercept, r2, points: x.len() })
}

/// Fit `log y = log A + r x`; non-positive samples are rejected.
pub fn exp_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if y.iter().any(|v| !(*v > 0.0)) {
        return invalid("exponential fit needs positive samples");
    }
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    line_fit(x, &ly)
}
