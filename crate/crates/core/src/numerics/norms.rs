use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::Grid1D;
use crate::error::{invalid, Result};

/// Symbol of `(1 - d_x^2)^{-1/4} d_x`.
pub fn pm_symbol(k: f64) -> Complex64 {
    Complex64::new(0.0, k * (1.0 + k * k).powf(-0.25))
}

/// `|pm(k)|^2`, the weight of the half-derivative seminorm.
pub fn pm_weight(k: f64) -> f64 {
    k * k / (1.0 + k * k).sqrt()
}

pub fn apply_pm(grid: &Grid1D, f: &[f64]) -> Vec<f64> {
    let mut c = grid.forward(f);
    for (z, &k) in c.iter_mut().zip(grid.xi_odd()) {
        *z *= pm_symbol(k);
    }
    grid.inverse(&c)
}

fn weighted_norm(grid: &Grid1D, f: &[f64], w: impl Fn(f64) -> f64) -> f64 {
    let c = grid.forward(f);
    let n = grid.n() as f64;
    let s: f64 = c
        .iter()
        .zip(grid.wavenumbers())
        .map(|(z, &k)| w(k) * z.norm_sqr())
        .sum();
    (grid.length() * s / (n * n)).sqrt()
}

pub fn h1_norm(grid: &Grid1D, f: &[f64]) -> f64 {
    weighted_norm(grid, f, |k| 1.0 + k * k)
}

pub fn pm_norm(grid: &Grid1D, f: &[f64]) -> f64 {
    weighted_norm(grid, f, pm_weight)
}

/// `|u1|_{H^1} + |pm u2|_{L^2}`.
pub fn x0_norm(grid: &Grid1D, u1: &[f64], u2: &[f64]) -> Result<f64> {
    grid.check_len(u1, "x0_norm first component")?;
    grid.check_len(u2, "x0_norm second component")?;
    Ok(h1_norm(grid, u1) + pm_norm(grid, u2))
}

/// Squared version used as a quadratic form.
pub fn x0_norm_sq(grid: &Grid1D, u1: &[f64], u2: &[f64]) -> f64 {
    h1_norm(grid, u1).powi(2) + pm_norm(grid, u2).powi(2)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub x0: f64,
    pub l2_eta: f64,
    pub l2_phi: f64,
    pub es: Option<f64>,
}

impl NormReport {
    pub fn of_pair(grid: &Grid1D, u1: &[f64], u2: &[f64]) -> Self {
        Self {
            x0: h1_norm(grid, u1) + pm_norm(grid, u2),
            l2_eta: grid.l2(u1),
            l2_phi: grid.l2(u2),
            es: None,
        }
    }

    /// Same report restricted to nodes where `mask` is true.
    pub fn of_pair_windowed(grid: &Grid1D, u1: &[f64], u2: &[f64], mask: &[bool]) -> Self {
        let cut = |f: &[f64]| -> Vec<f64> {
            f.iter().zip(mask).map(|(&v, &m)| if m { v } else { 0.0 }).collect()
        };
        let (a, b) = (cut(u1), cut(u2));
        Self::of_pair(grid, &a, &b)
    }

    pub fn e0(&self) -> f64 {
        self.l2_eta + self.l2_phi
    }
}

/// One entry of a space-time derivative family for the `E^s` norm.
#[derive(Clone, Debug)]
pub struct DerivativeSnapshot {
    pub t_order: usize,
    pub x_order: usize,
    pub eta: Vec<f64>,
    pub phi: Vec<f64>,
}

/// Sum of the L2 norms of every supplied `d_t^a d_x^b U` with `a + b <= s`.
/// All combinations must be present.
pub fn es_norm(grid: &Grid1D, snapshots: &[DerivativeSnapshot], s: usize) -> Result<f64> {
    let mut total = 0.0;
    for order in 0..=s {
        for a in 0..=order {
            let b = order - a;
            let snap = snapshots
                .iter()
                .find(|d| d.t_order == a && d.x_order == b);
            match snap {
                Some(d) => {
                    grid.check_len(&d.eta, "es_norm eta")?;
                    grid.check_len(&d.phi, "es_norm phi")?;
                    total += grid.l2(&d.eta) + grid.l2(&d.phi);
                }
                None => return invalid(format!("missing derivative snapshot d_t^{a} d_x^{b}")),
            }
        }
    }
    Ok(total)
}

/// Space-time derivative family of a profile translating at speed `c`,
/// where `d_t = -c d_x` holds exactly. `eta` and `phi` must be periodic.
pub fn traveling_snapshots(grid: &Grid1D, eta: &[f64], phi: &[f64], c: f64, s: usize) -> Vec<DerivativeSnapshot> {
    let mut de = vec![eta.to_vec()];
    let mut dp = vec![phi.to_vec()];
    for k in 1..=s {
        de.push(grid.derivative(&de[k - 1]));
        dp.push(grid.derivative(&dp[k - 1]));
    }
    let mut out = Vec::new();
    for order in 0..=s {
        for a in 0..=order {
            let f = (-c).powi(a as i32);
            out.push(DerivativeSnapshot {
                t_order: a,
                x_order: order - a,
                eta: de[order].iter().map(|v| v * f).collect(),
                phi: dp[order].iter().map(|v| v * f).collect(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn x0_of_single_sine_mode() {
        let g = Grid1D::new(2.0 * PI, 32).unwrap();
        let u1: Vec<f64> = g.nodes().iter().map(|x| x.sin()).collect();
        let u2 = vec![0.0; 32];
        let v = x0_norm(&g, &u1, &u2).unwrap();
        assert!((v - (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn x0_ignores_constants_in_potential() {
        let g = Grid1D::new(2.0 * PI, 32).unwrap();
        let v = x0_norm(&g, &vec![0.0; 32], &vec![3.5; 32]).unwrap();
        assert!(v.abs() < 1e-14);
        assert_eq!(x0_norm(&g, &vec![0.0; 32], &vec![0.0; 32]).unwrap(), 0.0);
    }

    #[test]
    fn pm_on_cosine() {
        let g = Grid1D::new(2.0 * PI, 32).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|x| x.cos()).collect();
        let p = apply_pm(&g, &f);
        let a = 2f64.powf(-0.25);
        for (x, v) in g.nodes().iter().zip(&p) {
            assert!((v + a * x.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn es_zero_order_is_sum_of_l2() {
        let g = Grid1D::new(2.0 * PI, 16).unwrap();
        let e: Vec<f64> = g.nodes().iter().map(|x| x.sin()).collect();
        let p: Vec<f64> = g.nodes().iter().map(|x| (2.0 * x).cos()).collect();
        let snaps = vec![DerivativeSnapshot { t_order: 0, x_order: 0, eta: e.clone(), phi: p.clone() }];
        let v = es_norm(&g, &snaps, 0).unwrap();
        assert!((v - g.l2(&e) - g.l2(&p)).abs() < 1e-14);
        assert!(es_norm(&g, &snaps, 1).is_err());
        let zero = vec![DerivativeSnapshot { t_order: 0, x_order: 0, eta: vec![0.0; 16], phi: vec![0.0; 16] }];
        assert_eq!(es_norm(&g, &zero, 0).unwrap(), 0.0);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let g = Grid1D::new(2.0 * PI, 16).unwrap();
        assert!(x0_norm(&g, &vec![0.0; 8], &vec![0.0; 16]).is_err());
    }
}
