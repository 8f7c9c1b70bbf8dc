//! Linearization about the two-wave superposition, its energy `E_1`, the
//! homogeneous evolution and the first-order correction.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{cutoffs, residual_rm, superpose, TwoSolitonConfig};
use crate::dn::{apply_dn_state, GoodUnknowns};
use crate::error::{invalid, Result, WwError};
use crate::evolution::Zakharov;
use crate::fit::exp_fit;
use crate::numerics::io::write_table_csv;
use crate::numerics::norms::x0_norm_sq;
use crate::numerics::{x0_norm, Grid1D, NormReport, SurfaceState};
use crate::par;
use crate::stability::{Linearization, OperatorKind, OperatorMatrix};

/// Displacement of either wave between two operator assemblies.
pub const LATTICE_SHIFT: f64 = 0.5;

/// Centered difference step for the lab-frame time derivative of `Z_M`.
const DT_Z: f64 = 1e-4;

fn vertical_velocity(model: &Zakharov, u: &SurfaceState) -> Result<Vec<f64>> {
    let p = model.solver.problem(&u.eta)?;
    let g = apply_dn_state(&p, u)?;
    Ok(GoodUnknowns::from_parts(&u.eta_x(), &u.phi_x(), &g).z)
}

fn frame_model(cfg: &TwoSolitonConfig) -> Zakharov {
    Zakharov { params: cfg.params_at(cfg.frame_speed), solver: cfg.solver.clone() }
}

/// `A = d_x J` as a dense matrix on stacked nodes.
fn a_matrix(d: &DMatrix<f64>) -> DMatrix<f64> {
    let n = d.nrows();
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    a.view_mut((0, n), (n, n)).copy_from(d);
    a.view_mut((n, 0), (n, n)).copy_from(&(-d));
    a
}

/// Operators about `M(t)` in the configuration's frame.
#[derive(Clone, Debug)]
pub struct OperatorSnapshot {
    pub t: f64,
    /// `Lambda[M] - f A` in `(eta, phi)`.
    pub lambda: DMatrix<f64>,
    /// `L[M] - f A` in good unknowns.
    pub lm: DMatrix<f64>,
    /// `v_M d_x Z_M + d_t Z_M` with the lab-frame time derivative.
    pub a_m: Vec<f64>,
    /// `R_M(t)` stacked, when requested.
    pub forcing: Option<DVector<f64>>,
}

fn snapshot(cfg: &TwoSolitonConfig, t: f64, with_forcing: bool) -> Result<OperatorSnapshot> {
    let m = superpose(cfg, t)?;
    let model = frame_model(cfg);
    let lin = Linearization::new(&model, &m)?;
    let (c1, c2) = cfg.speeds();
    let f = cfg.frame_speed;
    let z_at = |s: f64| -> Result<Vec<f64>> {
        let (a, b) = cfg.components_displaced(t, [c1 * s, c2 * s])?;
        vertical_velocity(&model, &a.add(&b)?)
    };
    let (zp, zm) = (z_at(DT_Z)?, z_at(-DT_Z)?);
    let n = lin.n();
    let dtz: Vec<f64> = (0..n).map(|j| (zp[j] - zm[j]) / (2.0 * DT_Z)).collect();
    let a_m: Vec<f64> = (0..n).map(|j| lin.v[j] * lin.z_x[j] + dtz[j]).collect();
    let mut lm = lin.lc().matrix;
    for j in 0..n {
        // Frame time derivative: d_t Z + f d_x Z.
        lm[(j, j)] += dtz[j] + f * lin.z_x[j];
    }
    let forcing = if with_forcing {
        let r = residual_rm(cfg, t)?;
        Some(DVector::from_iterator(2 * n, r.r1.into_iter().chain(r.r2)))
    } else {
        None
    };
    Ok(OperatorSnapshot { t, lambda: lin.lambda().matrix, lm, a_m, forcing })
}

/// Lab-frame `L[M](t)` and the coefficient `a_M`.
pub fn assemble_lm(cfg: &TwoSolitonConfig, t: f64) -> Result<(OperatorMatrix, Vec<f64>)> {
    let s = snapshot(cfg, t, false)?;
    let d = crate::stability::dense_of(cfg.grid().n(), |v| cfg.grid().derivative(v));
    let lab = s.lm + a_matrix(&d) * cfg.frame_speed;
    let n = cfg.grid().n();
    Ok((OperatorMatrix { kind: OperatorKind::Lm, matrix: lab, n, k: 0.0 }, s.a_m))
}

/// Snapshots on an even time lattice, linearly interpolated in between.
#[derive(Clone, Debug)]
pub struct OperatorLattice {
    pub snapshots: Vec<OperatorSnapshot>,
    pub frame_speed: f64,
}

impl OperatorLattice {
    /// Lattice over `[t0, t1]` with spacing set by [`LATTICE_SHIFT`].
    pub fn build(cfg: &TwoSolitonConfig, t0: f64, t1: f64, with_forcing: bool) -> Result<Self> {
        let (c1, c2) = cfg.speeds();
        let rel = (c1 - cfg.frame_speed).abs().max((c2 - cfg.frame_speed).abs());
        let step = if rel > 0.0 { LATTICE_SHIFT / rel } else { f64::INFINITY };
        Self::with_step(cfg, t0, t1, step, with_forcing)
    }

    pub fn with_step(cfg: &TwoSolitonConfig, t0: f64, t1: f64, step: f64, with_forcing: bool) -> Result<Self> {
        if !(t1 > t0 && step > 0.0) {
            return invalid(format!("bad lattice [{t0}, {t1}] step {step}"));
        }
        cfg.check_window(t0)?;
        cfg.check_window(t1)?;
        let intervals = ((t1 - t0) / step).ceil().max(1.0) as usize;
        let times: Vec<f64> = (0..=intervals).map(|i| t0 + (t1 - t0) * i as f64 / intervals as f64).collect();
        let snaps: Result<Vec<_>> = par::map_slice(&times, |&t| snapshot(cfg, t, with_forcing)).into_iter().collect();
        Ok(Self { snapshots: snaps?, frame_speed: cfg.frame_speed })
    }

    pub fn span(&self) -> (f64, f64) {
        (self.snapshots[0].t, self.snapshots.last().unwrap().t)
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let (a, b) = self.span();
        let tol = 1e-9 * (b - a).abs().max(1.0);
        if t < a - tol || t > b + tol {
            return Err(WwError::WindowViolation(format!("t = {t} outside the operator lattice [{a}, {b}]")));
        }
        let k = self.snapshots.len() - 1;
        if k == 0 {
            return Ok((0, 0.0));
        }
        let pos = ((t - a) / (b - a) * k as f64).clamp(0.0, k as f64);
        let i = (pos.floor() as usize).min(k - 1);
        Ok((i, pos - i as f64))
    }

    fn interp(&self, t: f64, u: &DVector<f64>, pick: impl Fn(&OperatorSnapshot) -> &DMatrix<f64>) -> Result<DVector<f64>> {
        let (i, w) = self.locate(t)?;
        let a = pick(&self.snapshots[i]) * u;
        if w == 0.0 {
            return Ok(a);
        }
        let b = pick(&self.snapshots[i + 1]) * u;
        Ok(a * (1.0 - w) + b * w)
    }

    /// `(L[M] - f A) u` at time `t`.
    pub fn apply_lm(&self, t: f64, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.interp(t, u, |s| &s.lm)
    }

    /// `(Lambda[M] - f A) u` at time `t`.
    pub fn apply_lambda(&self, t: f64, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.interp(t, u, |s| &s.lambda)
    }

    /// Interpolated `R_M(t)`.
    pub fn forcing(&self, t: f64) -> Result<DVector<f64>> {
        let (i, w) = self.locate(t)?;
        let get = |k: usize| {
            self.snapshots[k].forcing.clone().ok_or_else(|| WwError::InvalidArgument("lattice built without forcing".into()))
        };
        let a = get(i)?;
        if w == 0.0 {
            return Ok(a);
        }
        Ok(a * (1.0 - w) + get(i + 1)? * w)
    }
}

fn j_apply(y: DVector<f64>, n: usize) -> DVector<f64> {
    let mut out = DVector::zeros(2 * n);
    for i in 0..n {
        out[i] = y[n + i];
        out[n + i] = -y[i];
    }
    out
}

fn halves(u: &DVector<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    (u.rows(0, n).iter().copied().collect(), u.rows(n, n).iter().copied().collect())
}

/// `(A V, V) = int V1 d_x V2 - V2 d_x V1`.
fn a_form(grid: &Grid1D, v1: &[f64], v2: &[f64]) -> f64 {
    grid.inner(v1, &grid.derivative(v2)) - grid.inner(v2, &grid.derivative(v1))
}

/// `E_1(U) = (L_M U, U) - c1 (A chi1 U, chi1 U) - c2 (A chi2 U, chi2 U)`,
/// given `L[M] - f A` at the same time.
pub fn e1_energy(cfg: &TwoSolitonConfig, lm_frame_u: &DVector<f64>, t: f64, u: &DVector<f64>) -> f64 {
    let grid = cfg.grid();
    let n = grid.n();
    let (u1, u2) = halves(u, n);
    let quad = lm_frame_u.dot(u) * grid.dx() + cfg.frame_speed * a_form(grid, &u1, &u2);
    let cut = cutoffs(cfg, t);
    let (c1, c2) = cfg.speeds();
    let part = |chi: &[f64]| {
        let a: Vec<f64> = u1.iter().zip(chi).map(|(v, c)| v * c).collect();
        let b: Vec<f64> = u2.iter().zip(chi).map(|(v, c)| v * c).collect();
        a_form(grid, &a, &b)
    };
    quad - c1 * part(&cut.chi1) - c2 * part(&cut.chi2)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearizedRun {
    pub times: Vec<f64>,
    /// `|U|_{X^0} + |U2|_{L^2}`.
    pub norms: Vec<f64>,
    /// `|U|_{X^0}^2 + |U2|_{L^2}^2`, the scale in the `E_1` drift bound.
    pub energy_scale: Vec<f64>,
    pub e1: Vec<f64>,
    /// Slope of `log norms` against time.
    pub rate: f64,
    pub r2: f64,
    pub final_state: (Vec<f64>, Vec<f64>),
}

impl LinearizedRun {
    /// `max_t h |dE_1/dt| / (|U|^2_{X^0} + |U2|^2_{L^2})` from centered differences.
    pub fn e1_drift_constant(&self, h: f64) -> f64 {
        let mut c: f64 = 0.0;
        for k in 1..self.times.len().saturating_sub(1) {
            let d = (self.e1[k + 1] - self.e1[k - 1]) / (self.times[k + 1] - self.times[k - 1]);
            c = c.max(h * d.abs() / self.energy_scale[k]);
        }
        c
    }

    /// Columns `t, norm, e1`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows: Vec<Vec<f64>> = (0..self.times.len()).map(|k| vec![self.times[k], self.norms[k], self.e1[k]]).collect();
        write_table_csv(path, &["t", "norm", "e1"], &rows)
    }
}

/// RK4 for `d_t U = J (L[M] - f A) U` in the configuration's frame.
pub fn evolve_linearized_about_m(cfg: &TwoSolitonConfig, lattice: &OperatorLattice, u1: &[f64], u2: &[f64], t_final: f64, dt: f64) -> Result<LinearizedRun> {
    let grid = cfg.grid();
    grid.check_len(u1, "U1")?;
    grid.check_len(u2, "U2")?;
    if !(dt > 0.0 && t_final > 0.0) {
        return invalid("need dt > 0 and T > 0");
    }
    let (t0, _) = lattice.span();
    lattice.locate(t0 + t_final)?;
    let n = grid.n();
    let steps = (t_final / dt).round().max(1.0) as usize;
    let h = t_final / steps as f64;
    let mut u = DVector::from_iterator(2 * n, u1.iter().chain(u2).copied());
    let rhs = |t: f64, v: &DVector<f64>| -> Result<DVector<f64>> { Ok(j_apply(lattice.apply_lm(t, v)?, n)) };
    let record = |t: f64, v: &DVector<f64>| -> Result<(f64, f64, f64)> {
        let (a, b) = halves(v, n);
        let norm = x0_norm(grid, &a, &b)? + grid.l2(&b);
        let scale = x0_norm_sq(grid, &a, &b) + grid.l2(&b).powi(2);
        let lu = lattice.apply_lm(t, v)?;
        Ok((norm, scale, e1_energy(cfg, &lu, t, v)))
    };
    let (mut times, mut norms, mut scales, mut e1) = (vec![t0], Vec::new(), Vec::new(), Vec::new());
    let (a, b, c) = record(t0, &u)?;
    norms.push(a);
    scales.push(b);
    e1.push(c);
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        let k1 = rhs(t, &u)?;
        let k2 = rhs(t + 0.5 * h, &(&u + &k1 * (0.5 * h)))?;
        let k3 = rhs(t + 0.5 * h, &(&u + &k2 * (0.5 * h)))?;
        let k4 = rhs(t + h, &(&u + &k3 * h))?;
        u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(WwError::NonFinite { step: s + 1 });
        }
        let tn = t0 + (s + 1) as f64 * h;
        let (a, b, c) = record(tn, &u)?;
        times.push(tn);
        norms.push(a);
        scales.push(b);
        e1.push(c);
    }
    let fit = exp_fit(&times, &norms)?;
    Ok(LinearizedRun { times, norms, energy_scale: scales, e1, rate: fit.slope, r2: fit.r2, final_state: halves(&u, n) })
}

/// First-order correction `V1` on `[0, T_max]`, solved backward from `V1(T_max) = 0`.
#[derive(Clone, Debug)]
pub struct Correction {
    /// `e^{-eps0 h}`.
    pub delta: f64,
    pub eps0: f64,
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    /// `|V1(t)|_{E^0}` at every stored time.
    pub norms: Vec<f64>,
    /// Fitted decay rate of `|R_M|_{E^0}` over the lattice.
    pub forcing_rate: f64,
    /// `|R_M(T_max)| / (delta |rate|)`, the neglected part of the integral.
    pub tail_estimate: f64,
    /// `max |d_t V1 - J Lambda V1 + R_M / delta|_{E^0} / max |R_M / delta|_{E^0}`.
    pub defect: f64,
    /// Fitted rate of `|V1(t)|_{E^0}` over the first half of the interval.
    pub decay_rate: f64,
}

impl Correction {
    pub fn at_start(&self) -> &DVector<f64> {
        &self.states[0]
    }
}

fn e0_of(grid: &Grid1D, v: &DVector<f64>) -> f64 {
    let (a, b) = halves(v, grid.n());
    NormReport::of_pair(grid, &a, &b).e0()
}

/// Fourth-order centered derivative of a stored trajectory at index `k`.
fn stencil_derivative(states: &[DVector<f64>], k: usize, h: f64) -> DVector<f64> {
    (&states[k - 2] - &states[k - 1] * 8.0 + &states[k + 1] * 8.0 - &states[k + 2]) / (12.0 * h)
}

/// Fourth-order one-sided derivative at the first stored time.
fn forward_derivative(states: &[DVector<f64>], h: f64) -> DVector<f64> {
    (&states[0] * -25.0 + &states[1] * 48.0 - &states[2] * 36.0 + &states[3] * 16.0 - &states[4] * 3.0) / (12.0 * h)
}

/// Integrates `d_t V1 = J (Lambda[M] - f A) V1 - R_M / delta` backward from
/// `T_max`. The lattice must carry the forcing and span `[0, T_max]`.
pub fn first_order_correction(cfg: &TwoSolitonConfig, lattice: &OperatorLattice, eps0: f64, t_max: f64, dt: f64) -> Result<Correction> {
    if !(eps0 > 0.0 && t_max > 0.0 && dt > 0.0) {
        return invalid("need eps0 > 0, T_max > 0 and dt > 0");
    }
    let grid = cfg.grid();
    let n = grid.n();
    let (a, b) = lattice.span();
    if a > 0.0 || b < t_max {
        return Err(WwError::WindowViolation(format!("lattice [{a}, {b}] does not cover [0, {t_max}]")));
    }
    let delta = (-eps0 * cfg.h).exp();
    let steps = (t_max / dt).round().max(4.0) as usize;
    let h = t_max / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * h).collect();

    let mut lat_norms = Vec::new();
    for s in lattice.snapshots.iter().filter(|s| s.t <= t_max + 1e-9) {
        let f = s.forcing.as_ref().ok_or_else(|| WwError::InvalidArgument("lattice built without forcing".into()))?;
        lat_norms.push(e0_of(grid, f));
    }
    if lat_norms.iter().all(|v| *v == 0.0) {
        let zero = vec![DVector::zeros(2 * n); steps + 1];
        return Ok(Correction {
            delta,
            eps0,
            times,
            norms: vec![0.0; steps + 1],
            states: zero,
            forcing_rate: 0.0,
            tail_estimate: 0.0,
            defect: 0.0,
            decay_rate: 0.0,
        });
    }
    let lat_times: Vec<f64> = lattice.snapshots.iter().map(|s| s.t).filter(|t| *t <= t_max + 1e-9).collect();
    let forcing_rate = exp_fit(&lat_times, &lat_norms)?.slope;
    if !(forcing_rate < 0.0) {
        return Err(WwError::PropertyViolation(format!("interaction defect does not decay (rate {forcing_rate:e})")));
    }

    let rhs = |t: f64, v: &DVector<f64>| -> Result<DVector<f64>> {
        let lv = j_apply(lattice.apply_lambda(t, v)?, n);
        Ok(lv - lattice.forcing(t)? / delta)
    };
    let mut states = vec![DVector::zeros(2 * n); steps + 1];
    let mut v = DVector::zeros(2 * n);
    for k in (1..=steps).rev() {
        let t = times[k];
        let s = -h;
        let k1 = rhs(t, &v)?;
        let k2 = rhs(t + 0.5 * s, &(&v + &k1 * (0.5 * s)))?;
        let k3 = rhs(t + 0.5 * s, &(&v + &k2 * (0.5 * s)))?;
        let k4 = rhs(t + s, &(&v + &k3 * s))?;
        v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (s / 6.0);
        if v.iter().any(|x| !x.is_finite()) {
            return Err(WwError::NonFinite { step: steps - k + 1 });
        }
        states[k - 1] = v.clone();
    }
    let norms: Vec<f64> = states.iter().map(|s| e0_of(grid, s)).collect();

    let forcing_end = e0_of(grid, &lattice.forcing(t_max)?) / delta;
    let tail_estimate = forcing_end / forcing_rate.abs();
    if tail_estimate > 0.1 * norms[0] {
        return Err(WwError::TmaxTooSmall { tail: tail_estimate, reference: norms[0] });
    }

    // Self-check of the ODE on about twenty interior times.
    let stride = ((steps - 4) / 20).max(1);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in (2..steps - 1).step_by(stride) {
        let d = stencil_derivative(&states, k, h);
        let r = rhs(times[k], &states[k])?;
        worst = worst.max(e0_of(grid, &(d - r)));
        scale = scale.max(e0_of(grid, &lattice.forcing(times[k])?) / delta);
    }
    let half: Vec<usize> = (0..=steps / 2).collect();
    let ht: Vec<f64> = half.iter().map(|&k| times[k]).collect();
    let hn: Vec<f64> = half.iter().map(|&k| norms[k]).collect();
    let decay_rate = exp_fit(&ht, &hn)?.slope;
    Ok(Correction { delta, eps0, times, states, norms, forcing_rate, tail_estimate, defect: worst / scale, decay_rate })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CorrectedDefect {
    /// `|R_M(0)|_{E^0}`.
    pub base: f64,
    /// `|d_t(M + delta V1) - F(M + delta V1)|_{E^0}` at `t = 0`.
    pub corrected: f64,
}

/// Defect of `M` and of `M + delta V1` at `t = 0` in the nonlinear system.
/// `d_t V1(0)` comes from the computed trajectory, not from the equation.
pub fn corrected_defect(cfg: &TwoSolitonConfig, corr: &Correction) -> Result<CorrectedDefect> {
    let grid = cfg.grid();
    let n = grid.n();
    let model = cfg.model();
    let (u1, u2) = cfg.components(0.0)?;
    let (c1, c2) = cfg.speeds();
    let m = superpose(cfg, 0.0)?;
    let (e1x, e2x, p1x, p2x) = (u1.eta_x(), u2.eta_x(), u1.phi_x(), u2.phi_x());
    let mt_eta: Vec<f64> = (0..n).map(|j| -c1 * e1x[j] - c2 * e2x[j]).collect();
    let mt_phi: Vec<f64> = (0..n).map(|j| -c1 * p1x[j] - c2 * p2x[j]).collect();
    let defect = |state: &SurfaceState, add_eta: &[f64], add_phi: &[f64]| -> Result<f64> {
        let (fe, fp) = model.rhs(state)?;
        let de: Vec<f64> = (0..n).map(|j| mt_eta[j] + add_eta[j] - fe[j]).collect();
        let dp: Vec<f64> = (0..n).map(|j| mt_phi[j] + add_phi[j] - fp[j]).collect();
        Ok(NormReport::of_pair(grid, &de, &dp).e0())
    };
    let zero = vec![0.0; n];
    let base = defect(&m, &zero, &zero)?;
    let h = corr.times[1] - corr.times[0];
    let dv_frame = forward_derivative(&corr.states, h);
    let (v1, v2) = halves(corr.at_start(), n);
    // Lab-frame derivative: subtract the frame drift f d_x V.
    let f = cfg.frame_speed;
    let (v1x, v2x) = (grid.derivative(&v1), grid.derivative(&v2));
    let add_eta: Vec<f64> = (0..n).map(|j| corr.delta * (dv_frame[j] - f * v1x[j])).collect();
    let add_phi: Vec<f64> = (0..n).map(|j| corr.delta * (dv_frame[n + j] - f * v2x[j])).collect();
    let mut shifted = m.clone();
    for j in 0..n {
        shifted.eta[j] += corr.delta * v1[j];
        shifted.phi_periodic[j] += corr.delta * v2[j];
    }
    let corrected = defect(&shifted, &add_eta, &add_phi)?;
    Ok(CorrectedDefect { base, corrected })
}
