//! Two solitary waves of different speeds: superposition, the defect it
//! leaves in the equations, its decay, cutoffs and the linearization about it.

pub mod cutoff;
pub mod linearized;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use cutoff::{cutoffs, overlap_sup, smooth_step, CutoffPair};
pub use linearized::{
    assemble_lm, corrected_defect, e1_energy, evolve_linearized_about_m, first_order_correction, CorrectedDefect,
    Correction, LinearizedRun, OperatorLattice, OperatorSnapshot,
};

use crate::dn::{apply_dn_state, DnConfig, PhysicalParams, StripSolver};
use crate::error::{invalid, Result, WwError};
use crate::evolution::Zakharov;
use crate::fit::exp_fit;
use crate::numerics::io::write_table_csv;
use crate::numerics::{es_norm, DerivativeSnapshot, Grid1D, NormReport, SurfaceState};
use crate::par;
use crate::solitary::{build_wave, NewtonOptions, SolitaryWave};

/// Waves are kept this far inside the box, as a fraction of its length.
pub const WINDOW_FRACTION: f64 = 0.35;

/// Two refined waves on one grid and one fluid, `c1 < c2`, the faster one
/// starting `h` to the right. Positions are measured in a frame moving at
/// `frame_speed`.
#[derive(Clone, Debug)]
pub struct TwoSolitonConfig {
    pub wave1: SolitaryWave,
    pub wave2: SolitaryWave,
    pub h: f64,
    /// Position of the slow wave at `t = 0`.
    pub x1: f64,
    pub frame_speed: f64,
    pub solver: StripSolver,
}

fn same_fluid(a: &PhysicalParams, b: &PhysicalParams) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0);
    close(a.g, b.g) && close(a.b, b.b) && close(a.depth, b.depth)
}

impl TwoSolitonConfig {
    /// Pair centered on the origin, seen from the frame moving at the mean speed.
    pub fn new(wave1: SolitaryWave, wave2: SolitaryWave, h: f64, dn: DnConfig) -> Result<Self> {
        let (p1, p2) = (wave1.params, wave2.params);
        if wave1.grid() != wave2.grid() {
            return invalid("waves live on different grids");
        }
        if !same_fluid(&p1, &p2) {
            return invalid("waves belong to different fluids");
        }
        if !(p1.c < p2.c) {
            return invalid(format!("need c1 < c2, got {} and {}", p1.c, p2.c));
        }
        let width = 1.0 / p1.tail_rate().min(p2.tail_rate());
        if !(h >= 4.0 * width) {
            return invalid(format!("separation {h} below four widths ({})", 4.0 * width));
        }
        let solver = StripSolver::new(wave1.grid(), p1.depth, 0.0, dn)?;
        let cfg = Self { wave1, wave2, h, x1: -h / 2.0, frame_speed: 0.5 * (p1.c + p2.c), solver };
        cfg.check_window(0.0)?;
        Ok(cfg)
    }

    /// Builds both waves for the fluid `(g, b, H)` and the two speed parameters.
    #[allow(clippy::too_many_arguments)]
    pub fn build(g: f64, b: f64, depth: f64, eps1: f64, eps2: f64, grid: &Grid1D, h: f64, dn: DnConfig, opts: &NewtonOptions) -> Result<Self> {
        let p1 = PhysicalParams::from_fluid(g, b, depth, eps1)?;
        let p2 = PhysicalParams::from_fluid(g, b, depth, eps2)?;
        let ((_, w1), (_, w2)) = (build_wave(&p1, grid, dn, opts)?, build_wave(&p2, grid, dn, opts)?);
        Self::new(w1, w2, h, dn)
    }

    pub fn grid(&self) -> &Grid1D {
        self.wave1.grid()
    }

    /// Fluid parameters with the given reference speed.
    pub fn params_at(&self, c: f64) -> PhysicalParams {
        PhysicalParams { c, ..self.wave1.params }
    }

    /// Nonlinear system in the lab frame.
    pub fn model(&self) -> Zakharov {
        Zakharov { params: self.params_at(self.wave1.params.c), solver: self.solver.clone() }
    }

    pub fn speeds(&self) -> (f64, f64) {
        (self.wave1.params.c, self.wave2.params.c)
    }

    pub fn mean_speed(&self) -> f64 {
        0.5 * (self.wave1.params.c + self.wave2.params.c)
    }

    pub fn with_h(&self, h: f64) -> Result<Self> {
        Self::new(self.wave1.clone(), self.wave2.clone(), h, self.solver.config())
    }

    pub fn with_frame(&self, frame_speed: f64) -> Self {
        Self { frame_speed, ..self.clone() }
    }

    /// Copy with wave `which` (1 or 2) replaced by the rest state; speeds and cutoffs are kept.
    pub fn without_wave(&self, which: usize) -> Self {
        let mut out = self.clone();
        let w = if which == 1 { &mut out.wave1 } else { &mut out.wave2 };
        w.state = SurfaceState::rest(w.grid());
        out
    }

    /// Wave positions at time `t` in the current frame.
    pub fn positions(&self, t: f64) -> (f64, f64) {
        let (c1, c2) = self.speeds();
        let f = self.frame_speed;
        (self.x1 + (c1 - f) * t, self.x1 + self.h + (c2 - f) * t)
    }

    /// Last time at which both waves are still inside the measurement window.
    pub fn valid_until(&self) -> f64 {
        let (c1, c2) = self.speeds();
        let lim = WINDOW_FRACTION * self.grid().length();
        let (p1, p2) = self.positions(0.0);
        let reach = |p: f64, v: f64| if v > 0.0 { (lim - p) / v } else if v < 0.0 { (lim + p) / -v } else { f64::INFINITY };
        reach(p1, c1 - self.frame_speed).min(reach(p2, c2 - self.frame_speed))
    }

    pub fn check_window(&self, t: f64) -> Result<()> {
        let lim = WINDOW_FRACTION * self.grid().length();
        let (p1, p2) = self.positions(t);
        if t < 0.0 || p1.abs() > lim || p2.abs() > lim {
            return Err(WwError::WindowViolation(format!("t = {t}: waves at {p1:.3}, {p2:.3}, window +-{lim:.3}")));
        }
        Ok(())
    }

    /// Both translated waves at time `t`.
    pub fn components(&self, t: f64) -> Result<(SurfaceState, SurfaceState)> {
        self.check_window(t)?;
        let (p1, p2) = self.positions(t);
        Ok((self.wave1.state.translate(p1 - self.wave1.center), self.wave2.state.translate(p2 - self.wave2.center)))
    }

    /// Components with wave `i` displaced by `d[i]` from its position at `t`; no window check.
    fn components_displaced(&self, t: f64, d: [f64; 2]) -> Result<(SurfaceState, SurfaceState)> {
        let (p1, p2) = self.positions(t);
        Ok((
            self.wave1.state.translate(p1 + d[0] - self.wave1.center),
            self.wave2.state.translate(p2 + d[1] - self.wave2.center),
        ))
    }
}

/// `M(t) = Q1(x - x1(t)) + Q2(x - x2(t))`.
pub fn superpose(cfg: &TwoSolitonConfig, t: f64) -> Result<SurfaceState> {
    let (a, b) = cfg.components(t)?;
    a.add(&b)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InteractionResidual {
    pub t: f64,
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    /// Product of the two horizontal potential gradients.
    pub r21: Vec<f64>,
    /// Difference of the quadratic Dirichlet-Neumann terms.
    pub r22: Vec<f64>,
    /// Difference of the capillary terms.
    pub r23: Vec<f64>,
    pub norms: NormReport,
}

impl InteractionResidual {
    pub fn e0(&self) -> f64 {
        self.norms.e0()
    }
}

fn dn_quadratic(g_phi: &[f64], eta_x: &[f64], phi_x: &[f64]) -> Vec<f64> {
    (0..g_phi.len())
        .map(|j| {
            let b = g_phi[j] + eta_x[j] * phi_x[j];
            b * b / (1.0 + eta_x[j] * eta_x[j])
        })
        .collect()
}

fn residual_of(cfg: &TwoSolitonConfig, t: f64, u1: &SurfaceState, u2: &SurfaceState) -> Result<InteractionResidual> {
    let m = u1.add(u2)?;
    let s = &cfg.solver;
    let (q1, q2, qm) = (s.problem(&u1.eta)?, s.problem(&u2.eta)?, s.problem(&m.eta)?);
    let g11 = apply_dn_state(&q1, u1)?;
    let g22 = apply_dn_state(&q2, u2)?;
    let gm1 = apply_dn_state(&qm, u1)?;
    let gm2 = apply_dn_state(&qm, u2)?;
    let n = g11.len();
    let r1: Vec<f64> = (0..n).map(|j| (g11[j] - gm1[j]) + (g22[j] - gm2[j])).collect();

    let model = cfg.model();
    let (e1x, e2x, emx) = (u1.eta_x(), u2.eta_x(), m.eta_x());
    let (p1x, p2x) = (u1.phi_x(), u2.phi_x());
    let pmx: Vec<f64> = p1x.iter().zip(&p2x).map(|(a, b)| a + b).collect();
    let gm: Vec<f64> = gm1.iter().zip(&gm2).map(|(a, b)| a + b).collect();
    let r21: Vec<f64> = p1x.iter().zip(&p2x).map(|(a, b)| a * b).collect();
    let (n1, n2, nm) = (dn_quadratic(&g11, &e1x, &p1x), dn_quadratic(&g22, &e2x, &p2x), dn_quadratic(&gm, &emx, &pmx));
    let r22: Vec<f64> = (0..n).map(|j| 0.5 * (n1[j] + n2[j] - nm[j])).collect();
    let (k1, k2, km) = (model.capillary(&e1x), model.capillary(&e2x), model.capillary(&emx));
    let r23: Vec<f64> = (0..n).map(|j| k1[j] + k2[j] - km[j]).collect();
    let r2: Vec<f64> = (0..n).map(|j| r21[j] + r22[j] + r23[j]).collect();
    let norms = NormReport::of_pair(cfg.grid(), &r1, &r2);
    Ok(InteractionResidual { t, r1, r2, r21, r22, r23, norms })
}

/// Interaction defect `R_M(t)` from the four Dirichlet-Neumann evaluations
/// and the three groups of the potential equation.
pub fn residual_rm(cfg: &TwoSolitonConfig, t: f64) -> Result<InteractionResidual> {
    let (u1, u2) = cfg.components(t)?;
    residual_of(cfg, t, &u1, &u2)
}

/// `E^1` norm of `R_M(t)` with lab-frame time derivatives. The frame part is
/// exact; the rest is a centered difference over a translation of `1e-2`.
pub fn residual_e1(cfg: &TwoSolitonConfig, t: f64) -> Result<f64> {
    let (c1, c2) = cfg.speeds();
    let f = cfg.frame_speed;
    let rel = (c1 - f).abs().max((c2 - f).abs());
    let grid = cfg.grid();
    let r = residual_rm(cfg, t)?;
    let dx = |v: &[f64]| grid.derivative(v);
    let (r1x, r2x) = (dx(&r.r1), dx(&r.r2));
    let (dt1, dt2) = if rel > 0.0 {
        let tau = 1e-2 / rel;
        let at = |s: f64| -> Result<InteractionResidual> {
            let (u1, u2) = cfg.components_displaced(t, [(c1 - f) * s, (c2 - f) * s])?;
            residual_of(cfg, t + s, &u1, &u2)
        };
        let (p, m) = (at(tau)?, at(-tau)?);
        let d = |a: &[f64], b: &[f64], x: &[f64]| -> Vec<f64> { (0..a.len()).map(|j| (a[j] - b[j]) / (2.0 * tau) - f * x[j]).collect() };
        (d(&p.r1, &m.r1, &r1x), d(&p.r2, &m.r2, &r2x))
    } else {
        (r1x.iter().map(|v| -f * v).collect(), r2x.iter().map(|v| -f * v).collect())
    };
    let snaps = vec![
        DerivativeSnapshot { t_order: 0, x_order: 0, eta: r.r1, phi: r.r2 },
        DerivativeSnapshot { t_order: 0, x_order: 1, eta: r1x, phi: r2x },
        DerivativeSnapshot { t_order: 1, x_order: 0, eta: dt1, phi: dt2 },
    ];
    es_norm(grid, &snaps, 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayVariable {
    Time,
    Separation,
}

/// Log-linear fit of `|R_M|_{E^0}` against time or separation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayFit {
    pub variable: DecayVariable,
    pub samples: Vec<f64>,
    pub norms: Vec<f64>,
    pub rate: f64,
    pub prefactor: f64,
    pub r2: f64,
    pub window: (f64, f64),
    pub warning: Option<String>,
}

impl DecayFit {
    /// Columns `t, norm` or `h, norm`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let key = match self.variable {
            DecayVariable::Time => "t",
            DecayVariable::Separation => "h",
        };
        let rows: Vec<Vec<f64>> = self.samples.iter().zip(&self.norms).map(|(a, b)| vec![*a, *b]).collect();
        write_table_csv(path, &[key, "norm"], &rows)
    }
}

const POOR_FIT: f64 = 0.9;

fn decay_fit(variable: DecayVariable, samples: Vec<f64>, norms: Vec<f64>) -> Result<DecayFit> {
    let fit = exp_fit(&samples, &norms)?;
    let warning = (fit.r2 < POOR_FIT).then(|| format!("poor log-linear fit, R^2 = {:.4}; data {:?} -> {:?}", fit.r2, samples, norms));
    let window = (samples.iter().copied().fold(f64::INFINITY, f64::min), samples.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    Ok(DecayFit { variable, rate: fit.slope, prefactor: fit.intercept.exp(), r2: fit.r2, samples, norms, window, warning })
}

/// Decay of the defect along the given times.
pub fn decay_in_time(cfg: &TwoSolitonConfig, times: &[f64]) -> Result<DecayFit> {
    for &t in times {
        cfg.check_window(t)?;
    }
    let norms: Result<Vec<f64>> = par::map_slice(times, |&t| residual_rm(cfg, t).map(|r| r.e0())).into_iter().collect();
    decay_fit(DecayVariable::Time, times.to_vec(), norms?)
}

/// Decay of the defect at `t = 0` across separations.
pub fn decay_in_separation(cfg: &TwoSolitonConfig, hs: &[f64]) -> Result<DecayFit> {
    let norms: Result<Vec<f64>> = par::map_slice(hs, |&h| residual_rm(&cfg.with_h(h)?, 0.0).map(|r| r.e0())).into_iter().collect();
    decay_fit(DecayVariable::Separation, hs.to_vec(), norms?)
}

/// `-r_t / (c2 - c1)`: the measured exponent of the interaction.
pub fn measured_epsilon0(cfg: &TwoSolitonConfig, time_fit: &DecayFit) -> f64 {
    let (c1, c2) = cfg.speeds();
    -time_fit.rate / (c2 - c1)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct InteractionBound {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `int e^{-eps|x - c1 t|} e^{-eps|x - h - c2 t|} dx` in closed form, and the
/// comparison function `e^{-eps h} e^{-eps0 (c2 - c1) t}`.
pub fn interaction_integral(eps: f64, eps0: f64, c1: f64, c2: f64, h: f64, t: f64) -> Result<InteractionBound> {
    if !(eps > 0.0 && eps0 > 0.0 && eps0 < eps) {
        return invalid(format!("need 0 < eps0 < eps, got eps0 = {eps0}, eps = {eps}"));
    }
    if !(c2 > c1 && h >= 0.0 && t >= 0.0) {
        return invalid("need c2 > c1, h >= 0 and t >= 0");
    }
    let d = h + (c2 - c1) * t;
    // Two outer half-lines contribute e^{-eps d} / (2 eps) each; the middle segment d e^{-eps d}.
    let lhs = (-eps * d).exp() * (1.0 / eps + d);
    let rhs = (-eps * h - eps0 * (c2 - c1) * t).exp();
    Ok(InteractionBound { lhs, rhs, ratio: lhs / rhs })
}

/// Smallest constant making the interaction bound hold on the sampled set.
pub fn interaction_constant(eps: f64, eps0: f64, c1: f64, c2: f64, hs: &[f64], ts: &[f64]) -> Result<f64> {
    let mut c: f64 = 0.0;
    for &h in hs {
        for &t in ts {
            c = c.max(interaction_integral(eps, eps0, c1, c2, h, t)?.ratio);
        }
    }
    Ok(c)
}
