//! Dirichlet-Neumann operator and the quantities derived from it.

pub mod params;
pub mod strip;

use serde::{Deserialize, Serialize};

pub use params::PhysicalParams;
pub use strip::{cosh_ratio, flat_symbol, Correction, DnConfig, StripField, StripProblem, StripSolver};

use crate::error::{invalid, Result, WwError};
use crate::fit::{line_fit, LineFit};
use crate::numerics::{CarrierKind, Grid1D, RampCarrier, SurfaceState};

/// Exact flat harmonic extension of `psi` on a strip of depth `depth`.
pub fn harmonic_lift(psi: &[f64], grid: &Grid1D, nz: usize, depth: f64) -> Result<StripField> {
    grid.check_len(psi, "psi")?;
    let s = StripSolver::new(grid, depth, 0.0, DnConfig { nz, ..Default::default() })?;
    Ok(s.lift(psi))
}

/// One-shot `G[eta] psi` for periodic `psi`.
pub fn apply_dn(grid: &Grid1D, eta: &[f64], psi: &[f64], depth: f64, cfg: DnConfig) -> Result<Vec<f64>> {
    let s = StripSolver::new(grid, depth, 0.0, cfg)?;
    s.problem(eta)?.apply(psi)
}

/// One-shot transverse operator `G_k[eta] f`.
pub fn dn_transverse(grid: &Grid1D, eta: &[f64], f: &[f64], k: f64, depth: f64, cfg: DnConfig) -> Result<Vec<f64>> {
    let s = StripSolver::new(grid, depth, k, cfg)?;
    s.problem(eta)?.apply(f)
}

/// `G[eta]` applied to the carrier part `amp * S` of a potential.
pub fn apply_dn_ramp(problem: &StripProblem<'_>, kind: CarrierKind, amp: f64) -> Result<Vec<f64>> {
    let s = problem.solver();
    let grid = s.grid();
    if amp == 0.0 {
        return Ok(vec![0.0; grid.n()]);
    }
    match kind {
        CarrierKind::Linear => {
            if s.transverse_k() != 0.0 {
                return invalid("linear carrier is only harmonic without transverse modulation");
            }
            // G[eta] x = -d_x eta exactly.
            let ex = grid.derivative(problem.eta());
            let f = -amp * 2.0 / grid.length();
            Ok(ex.iter().map(|v| f * v).collect())
        }
        CarrierKind::Blend => {
            let c = RampCarrier::new(grid, kind);
            let data: Vec<f64> = c.values().iter().map(|v| amp * v).collect();
            problem.apply(&data)
        }
    }
}

/// `G[eta] phi` for the full potential of a state.
pub fn apply_dn_state(problem: &StripProblem<'_>, u: &SurfaceState) -> Result<Vec<f64>> {
    let mut out = problem.apply(&u.phi_periodic)?;
    let r = apply_dn_ramp(problem, u.carrier, u.phi_ramp_amp)?;
    out.iter_mut().zip(&r).for_each(|(a, b)| *a += b);
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct GoodUnknowns {
    /// Vertical velocity at the surface.
    pub z: Vec<f64>,
    /// Horizontal velocity at the surface.
    pub v: Vec<f64>,
}

impl GoodUnknowns {
    /// From `d_x eta`, `d_x psi` and `G[eta] psi`.
    pub fn from_parts(eta_x: &[f64], psi_x: &[f64], g_psi: &[f64]) -> Self {
        let z: Vec<f64> = g_psi
            .iter()
            .zip(eta_x)
            .zip(psi_x)
            .map(|((g, ex), px)| (g + ex * px) / (1.0 + ex * ex))
            .collect();
        let v = psi_x.iter().zip(&z).zip(eta_x).map(|((px, zz), ex)| px - zz * ex).collect();
        Self { z, v }
    }
}

pub fn good_unknowns(problem: &StripProblem<'_>, u: &SurfaceState) -> Result<GoodUnknowns> {
    let g = apply_dn_state(problem, u)?;
    Ok(GoodUnknowns::from_parts(&u.eta_x(), &u.phi_x(), &g))
}

/// Shape derivative `D_eta(G[eta] psi) . zeta = -G[eta](zeta Z) - d_x(v zeta)`.
pub fn shape_derivative(problem: &StripProblem<'_>, u: &SurfaceState, zeta: &[f64]) -> Result<Vec<f64>> {
    let grid = problem.solver().grid();
    grid.check_len(zeta, "zeta")?;
    let gu = good_unknowns(problem, u)?;
    let zz: Vec<f64> = zeta.iter().zip(&gu.z).map(|(a, b)| a * b).collect();
    let vz: Vec<f64> = zeta.iter().zip(&gu.v).map(|(a, b)| a * b).collect();
    let gz = problem.apply(&zz)?;
    let dvz = grid.derivative(&vz);
    Ok(gz.iter().zip(&dvz).map(|(a, b)| -a - b).collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayReport {
    /// Fitted slope of `log |G psi|` against `|x - center|`.
    pub rate: f64,
    pub fit: LineFit,
    pub window: (f64, f64),
}

/// Fit the exponential decay of a field around `center` on the window
/// `0.05 L <= |x - center| <= 0.35 L`, skipping samples below `1e-13`.
pub fn fit_decay(grid: &Grid1D, f: &[f64], center: f64) -> Result<DecayReport> {
    let l = grid.length();
    let (lo, hi) = (0.05 * l, 0.35 * l);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (x, v) in grid.nodes().iter().zip(f) {
        let mut d = x - center;
        d -= l * (d / l).round();
        let d = d.abs();
        if d >= lo && d <= hi && v.abs() >= 1e-13 {
            xs.push(d);
            ys.push(v.abs().ln());
        }
    }
    if xs.len() < 8 {
        return Err(WwError::InsufficientDecayData { usable: xs.len() });
    }
    let fit = line_fit(&xs, &ys)?;
    Ok(DecayReport { rate: fit.slope, fit, window: (lo, hi) })
}

/// Decay rate of `G[eta] phi` for a localized state.
pub fn decay_profile(problem: &StripProblem<'_>, u: &SurfaceState, center: f64) -> Result<DecayReport> {
    let g = apply_dn_state(problem, u)?;
    fit_decay(problem.solver().grid(), &g, center)
}
