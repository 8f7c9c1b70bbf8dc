//! Nonlinear Zakharov system, RK4 time stepping and conserved quantities.

use serde::{Deserialize, Serialize};

use crate::dn::{apply_dn_state, DnConfig, PhysicalParams, StripSolver};
use crate::error::{invalid, Result, WwError};
use crate::numerics::{Grid1D, SurfaceState};

/// The water-wave system for one fluid on one grid.
#[derive(Clone, Debug)]
pub struct Zakharov {
    pub params: PhysicalParams,
    pub solver: StripSolver,
}

/// Right-hand side pieces shared by the evolution and the traveling-wave residual.
#[derive(Clone, Debug)]
pub struct RhsParts {
    /// `G[eta] phi`.
    pub g_phi: Vec<f64>,
    /// `d_t phi`.
    pub phi_t: Vec<f64>,
    pub eta_x: Vec<f64>,
    pub phi_x: Vec<f64>,
}

impl Zakharov {
    pub fn new(grid: &Grid1D, params: PhysicalParams, cfg: DnConfig) -> Result<Self> {
        Ok(Self { params, solver: StripSolver::new(grid, params.depth, 0.0, cfg)? })
    }

    pub fn grid(&self) -> &Grid1D {
        self.solver.grid()
    }

    /// Capillary term `b d_x(eta_x / sqrt(1 + eta_x^2))`.
    pub fn capillary(&self, eta_x: &[f64]) -> Vec<f64> {
        let t: Vec<f64> = eta_x.iter().map(|e| e / (1.0 + e * e).sqrt()).collect();
        let d = self.grid().derivative(&t);
        d.iter().map(|v| self.params.b * v).collect()
    }

    pub fn rhs_parts(&self, u: &SurfaceState) -> Result<RhsParts> {
        let p = self.solver.problem(&u.eta)?;
        let g_phi = apply_dn_state(&p, u)?;
        let eta_x = u.eta_x();
        let phi_x = u.phi_x();
        let cap = self.capillary(&eta_x);
        let g = self.params.g;
        let phi_t = (0..eta_x.len())
            .map(|j| {
                let (ex, px, gp) = (eta_x[j], phi_x[j], g_phi[j]);
                let b = gp + px * ex;
                -0.5 * px * px + 0.5 * b * b / (1.0 + ex * ex) - g * u.eta[j] + cap[j]
            })
            .collect();
        Ok(RhsParts { g_phi, phi_t, eta_x, phi_x })
    }

    /// `(d_t eta, d_t phi)`; the second component is periodic since the
    /// carrier amplitude is time invariant.
    pub fn rhs(&self, u: &SurfaceState) -> Result<(Vec<f64>, Vec<f64>)> {
        let r = self.rhs_parts(u)?;
        Ok((r.g_phi, r.phi_t))
    }

    /// Energy, mass and momentum.
    pub fn conserved(&self, u: &SurfaceState) -> Result<Conserved> {
        let grid = self.grid();
        let p = self.solver.problem(&u.eta)?;
        let g_phi = apply_dn_state(&p, u)?;
        let phi = u.phi_total();
        let ex = u.eta_x();
        let px = u.phi_x();
        let (g, b) = (self.params.g, self.params.b);
        let dens: Vec<f64> = (0..phi.len())
            .map(|j| {
                let e = ex[j];
                // sqrt(1 + e^2) - 1 without cancellation.
                let arc = e * e / ((1.0 + e * e).sqrt() + 1.0);
                0.5 * (g_phi[j] * phi[j] + g * u.eta[j] * u.eta[j] + 2.0 * b * arc)
            })
            .collect();
        let mom: Vec<f64> = u.eta.iter().zip(&px).map(|(a, b)| a * b).collect();
        Ok(Conserved { energy: grid.integrate(&dens), mass: grid.integrate(&u.eta), momentum: grid.integrate(&mom) })
    }

    /// Largest linear frequency on the grid, `max sqrt((g + b xi^2) xi tanh(H xi))`.
    pub fn max_frequency(&self) -> f64 {
        let (g, b, h) = (self.params.g, self.params.b, self.params.depth);
        self.grid()
            .wavenumbers()
            .iter()
            .map(|&k| ((g + b * k * k) * k * (h * k).tanh()).abs().sqrt())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Conserved {
    pub energy: f64,
    pub mass: f64,
    pub momentum: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    pub filter_order: u32,
    pub filter_strength: f64,
    /// Store a state every this many steps; 0 keeps only the final state.
    pub checkpoint_stride: usize,
    /// Record conserved quantities every this many steps; 0 disables.
    pub diagnostics_stride: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self { dt: 0.05, t_final: 1.0, filter_order: 8, filter_strength: 36.0, checkpoint_stride: 0, diagnostics_stride: 1 }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.t_final >= 0.0) {
            return invalid(format!("need dt > 0 and T >= 0, got dt={} T={}", self.dt, self.t_final));
        }
        if !(self.filter_strength >= 0.0) {
            return invalid("filter strength must be non-negative");
        }
        Ok(())
    }

    /// Advisory stiffness bound `dt <= 2.8 / max|omega|`. Returns a message when violated.
    pub fn cfl_advisory(&self, model: &Zakharov) -> Option<String> {
        let w = model.max_frequency();
        let bound = 2.8 / w;
        (self.dt > bound).then(|| format!("dt = {} exceeds the RK4 stiffness bound {bound:.4e}", self.dt))
    }
}

/// Exponential filter `exp(-strength (|xi| / xi_max)^order)` on the grid.
pub fn filter_symbol(grid: &Grid1D, order: u32, strength: f64) -> Vec<f64> {
    let km = grid.xi_max();
    grid.wavenumbers().iter().map(|k| (-strength * (k.abs() / km).powi(order as i32)).exp()).collect()
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub conserved: Vec<Conserved>,
    pub checkpoints: Vec<(f64, SurfaceState)>,
    pub final_state: SurfaceState,
    pub final_time: f64,
    pub steps: usize,
    /// Step at which a non-finite value appeared; `final_state` is then the last good state.
    pub aborted_at: Option<usize>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn into_result(self) -> Result<Self> {
        match self.aborted_at {
            Some(step) => Err(WwError::NonFinite { step }),
            None => Ok(self),
        }
    }

    /// Largest relative deviation of each conserved quantity from its initial value.
    pub fn relative_drift(&self) -> Conserved {
        let c0 = self.conserved.first().copied().unwrap_or_default();
        let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { a.abs() / b.abs() };
        let mut d = Conserved::default();
        for c in &self.conserved {
            d.energy = d.energy.max(rel(c.energy - c0.energy, c0.energy));
            d.mass = d.mass.max(rel(c.mass - c0.mass, c0.mass));
            d.momentum = d.momentum.max(rel(c.momentum - c0.momentum, c0.momentum));
        }
        d
    }
}

fn axpy(y: &[f64], a: f64, x: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(p, q)| p + a * q).collect()
}

/// Classical RK4 with the exponential filter applied to both fields after every step.
pub fn evolve(model: &Zakharov, u0: &SurfaceState, cfg: &EvolutionConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let grid = model.grid().clone();
    if u0.grid != grid {
        return invalid("initial state lives on a different grid");
    }
    u0.check_admissible(model.params.depth)?;
    let mut warnings = Vec::new();
    if let Some(w) = cfg.cfl_advisory(model) {
        warnings.push(w);
    }
    let filt = filter_symbol(&grid, cfg.filter_order, cfg.filter_strength);
    let use_filter = cfg.filter_strength > 0.0;
    let steps = (cfg.t_final / cfg.dt).round() as usize;
    let dt = if steps == 0 { 0.0 } else { cfg.t_final / steps as f64 };
    let mut u = u0.clone();
    let mut traj = Trajectory {
        times: Vec::new(),
        conserved: Vec::new(),
        checkpoints: Vec::new(),
        final_state: u0.clone(),
        final_time: 0.0,
        steps: 0,
        aborted_at: None,
        warnings: Vec::new(),
    };
    if cfg.diagnostics_stride > 0 {
        traj.times.push(0.0);
        traj.conserved.push(model.conserved(&u)?);
    }
    if cfg.checkpoint_stride > 0 {
        traj.checkpoints.push((0.0, u.clone()));
    }
    let with = |base: &SurfaceState, a: f64, k: &(Vec<f64>, Vec<f64>)| SurfaceState {
        eta: axpy(&base.eta, a, &k.0),
        phi_periodic: axpy(&base.phi_periodic, a, &k.1),
        ..base.clone()
    };
    for step in 1..=steps {
        let stages = (|| -> Result<_> {
            let k1 = model.rhs(&u)?;
            let k2 = model.rhs(&with(&u, 0.5 * dt, &k1))?;
            let k3 = model.rhs(&with(&u, 0.5 * dt, &k2))?;
            let k4 = model.rhs(&with(&u, dt, &k3))?;
            Ok((k1, k2, k3, k4))
        })();
        // A blown-up stage (overflow, cavitation, stalled solver) ends the run
        // with the last good state kept.
        let (k1, k2, k3, k4) = match stages {
            Ok(k) => k,
            Err(e) => {
                warnings.push(format!("step {step}: {e}"));
                traj.aborted_at = Some(step);
                break;
            }
        };
        let mut next = u.clone();
        for j in 0..grid.n() {
            next.eta[j] += dt / 6.0 * (k1.0[j] + 2.0 * k2.0[j] + 2.0 * k3.0[j] + k4.0[j]);
            next.phi_periodic[j] += dt / 6.0 * (k1.1[j] + 2.0 * k2.1[j] + 2.0 * k3.1[j] + k4.1[j]);
        }
        if use_filter {
            next.eta = grid.apply_real(&next.eta, &filt);
            next.phi_periodic = grid.apply_real(&next.phi_periodic, &filt);
        }
        if next.eta.iter().chain(&next.phi_periodic).any(|v| !v.is_finite()) {
            traj.aborted_at = Some(step);
            break;
        }
        u = next;
        let t = step as f64 * dt;
        traj.final_time = t;
        traj.steps = step;
        if cfg.diagnostics_stride > 0 && step % cfg.diagnostics_stride == 0 {
            traj.times.push(t);
            traj.conserved.push(model.conserved(&u)?);
        }
        if cfg.checkpoint_stride > 0 && step % cfg.checkpoint_stride == 0 {
            traj.checkpoints.push((t, u.clone()));
        }
    }
    traj.final_state = u;
    traj.warnings = warnings;
    Ok(traj)
}

/// Reversal map `(x, phi) -> (-x, -phi)`.
pub fn reverse(u: &SurfaceState) -> SurfaceState {
    let n = u.grid.n();
    let refl = |f: &[f64]| -> Vec<f64> { (0..n).map(|j| f[(n - j) % n]).collect() };
    SurfaceState {
        eta: refl(&u.eta),
        phi_periodic: refl(&u.phi_periodic).iter().map(|v| -v).collect(),
        ..u.clone()
    }
}

/// Position of the minimum of a periodic field, refined by Newton iteration
/// on the trigonometric interpolant.
pub fn locate_minimum(grid: &Grid1D, f: &[f64]) -> f64 {
    let (j, _) = f.iter().enumerate().fold((0, f64::INFINITY), |a, (i, &v)| if v < a.1 { (i, v) } else { a });
    let c = grid.forward(f);
    let n = grid.n() as f64;
    let x0 = grid.nodes()[0];
    let eval = |x: f64, order: i32| -> f64 {
        let mut s = 0.0;
        for (z, &k) in c.iter().zip(grid.xi_odd()) {
            let ph = num_complex::Complex64::from_polar(1.0, k * (x - x0));
            let d = num_complex::Complex64::new(0.0, k).powi(order);
            s += (z * ph * d).re;
        }
        s / n
    };
    let mut x = grid.nodes()[j];
    for _ in 0..20 {
        let d1 = eval(x, 1);
        let d2 = eval(x, 2);
        if d2 <= 0.0 {
            break;
        }
        let step = d1 / d2;
        x -= step;
        if step.abs() < 1e-13 {
            break;
        }
    }
    x
}
