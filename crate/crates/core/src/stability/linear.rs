//! RK4 evolution of `d_t U = J L U` for a fixed dense operator.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{split, stack, OperatorMatrix};
use crate::error::{invalid, Result, WwError};
use crate::fit::line_fit;
use crate::numerics::{x0_norm, Grid1D};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearGrowth {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// `max_t |U(t)| / ((1 + t) |U0|)`.
    pub constant: f64,
    /// Slope of `log |U|` against `log t` over the second half of the run.
    pub exponent: f64,
    pub final_state: (Vec<f64>, Vec<f64>),
}

pub(crate) fn rk4_step(a: &DMatrix<f64>, u: &DVector<f64>, dt: f64) -> DVector<f64> {
    let k1 = a * u;
    let k2 = a * (u + &k1 * (0.5 * dt));
    let k3 = a * (u + &k2 * (0.5 * dt));
    let k4 = a * (u + &k3 * dt);
    u + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

pub fn evolve_linear(op: &OperatorMatrix, grid: &Grid1D, u1: &[f64], u2: &[f64], t_final: f64, dt: f64) -> Result<LinearGrowth> {
    if !(dt > 0.0 && t_final > 0.0) {
        return invalid("need dt > 0 and T > 0");
    }
    let n = op.n;
    let jl = op.j_times();
    let steps = (t_final / dt).round().max(1.0) as usize;
    let h = t_final / steps as f64;
    let mut u = stack(u1, u2);
    let n0 = x0_norm(grid, u1, u2)?;
    if n0 == 0.0 {
        return invalid("zero initial data");
    }
    let mut times = vec![0.0];
    let mut norms = vec![n0];
    let mut constant: f64 = 1.0;
    for s in 1..=steps {
        u = rk4_step(&jl, &u, h);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(WwError::NonFinite { step: s });
        }
        let t = s as f64 * h;
        let (a, b) = split(&u, n);
        let nu = x0_norm(grid, &a, &b)?;
        constant = constant.max(nu / ((1.0 + t) * n0));
        times.push(t);
        norms.push(nu);
    }
    let half = times.len() / 2;
    let lt: Vec<f64> = times[half..].iter().map(|t| t.ln()).collect();
    let ln: Vec<f64> = norms[half..].iter().map(|v| v.ln()).collect();
    let exponent = if lt.len() >= 2 { line_fit(&lt, &ln)?.slope } else { 0.0 };
    Ok(LinearGrowth { times, norms, constant, exponent, final_state: split(&u, n) })
}
