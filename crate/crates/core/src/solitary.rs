//! Solitary waves: long-wave seeds, Newton refinement of the traveling-wave
//! equations, speed derivatives and the momentum slope.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dn::{DnConfig, PhysicalParams};
use crate::error::{invalid, Result, WwError};
use crate::evolution::Zakharov;
use crate::numerics::io::{read_checkpoint, write_checkpoint, write_json};
use crate::numerics::{make_grid, CarrierKind, Grid1D, NormReport, RampCarrier, SurfaceState};
use crate::par;

#[derive(Clone, Debug)]
pub struct SolitaryWave {
    pub params: PhysicalParams,
    pub center: f64,
    pub state: SurfaceState,
    /// E0 norm of the traveling residual when the wave was produced.
    pub residual_norm: f64,
    pub iterations: usize,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    params: PhysicalParams,
    center: f64,
    residual_norm: f64,
    ramp_amplitude: f64,
    carrier: CarrierKind,
    length: f64,
    points: usize,
    layout: String,
}

impl SolitaryWave {
    pub fn grid(&self) -> &Grid1D {
        &self.state.grid
    }
    pub fn eta(&self) -> &[f64] {
        &self.state.eta
    }

    pub fn translate(&self, a: f64) -> Self {
        Self { state: self.state.translate(a), center: self.center + a, ..self.clone() }
    }

    /// Binary checkpoint (`eta` then periodic potential) plus a JSON sidecar.
    pub fn save(&self, stem: &Path) -> Result<()> {
        let mut data = self.state.eta.clone();
        data.extend_from_slice(&self.state.phi_periodic);
        write_checkpoint(&stem.with_extension("bin"), self.grid(), &data)?;
        let side = Sidecar {
            params: self.params,
            center: self.center,
            residual_norm: self.residual_norm,
            ramp_amplitude: self.state.phi_ramp_amp,
            carrier: self.state.carrier,
            length: self.grid().length(),
            points: self.grid().n(),
            layout: "eta[N], phi_periodic[N]".into(),
        };
        write_json(&stem.with_extension("json"), &side)
    }

    /// Inverse of [`SolitaryWave::save`].
    pub fn load(stem: &Path) -> Result<Self> {
        let (length, n, data) = read_checkpoint(&stem.with_extension("bin"))?;
        let text = std::fs::read_to_string(stem.with_extension("json"))?;
        let side: Sidecar = serde_json::from_str(&text).map_err(|e| WwError::Format(e.to_string()))?;
        if data.len() != 2 * n || side.points != n {
            return Err(WwError::Format(format!("checkpoint holds {} values for N = {n}", data.len())));
        }
        let grid = make_grid(length, n)?;
        let state = SurfaceState::new(&grid, data[..n].to_vec(), data[n..].to_vec(), side.ramp_amplitude, side.carrier)?;
        Ok(Self { params: side.params, center: side.center, state, residual_norm: side.residual_norm, iterations: 0 })
    }
}

/// Far-field amplitude of the leading-order potential, `-2 eps sqrt(beta - 1/3) c H`.
/// Negative because the carrier tends to `+1` as `x -> +inf`.
pub fn seed_amplitude(p: &PhysicalParams) -> f64 {
    -2.0 * p.epsilon() * (p.beta() - 1.0 / 3.0).sqrt() * p.c * p.depth
}

/// Leading-order long-wave profile centered at `x0`.
pub fn asymptotic_profile(params: &PhysicalParams, grid: &Grid1D, x0: f64, carrier: CarrierKind) -> Result<SolitaryWave> {
    params.validate()?;
    let eps = params.epsilon();
    let beta = params.beta();
    if !(eps > 0.0 && eps <= 0.3) {
        return invalid(format!("seed needs 0 < eps <= 0.3, got {eps}"));
    }
    if beta <= 1.0 / 3.0 + 0.01 {
        return invalid(format!("beta = {beta} too close to 1/3: the wave width diverges"));
    }
    let h = params.depth;
    let k = eps / (2.0 * (beta - 1.0 / 3.0).sqrt());
    let amp = seed_amplitude(params);
    let l = grid.length();
    let s = RampCarrier::new(grid, carrier);
    let mut eta = Vec::with_capacity(grid.n());
    let mut p = Vec::with_capacity(grid.n());
    for (j, &x) in grid.nodes().iter().enumerate() {
        let xx = k * (x - x0) / h;
        eta.push(-eps * eps * h / xx.cosh().powi(2));
        let phi = amp * xx.tanh();
        let sv = match carrier {
            CarrierKind::Blend if x.abs() > 0.4 * l => x.signum(),
            _ => s.values()[j],
        };
        p.push(phi - amp * sv);
    }
    let state = SurfaceState::new(grid, eta, p, amp, carrier)?;
    Ok(SolitaryWave { params: *params, center: x0, state, residual_norm: f64::NAN, iterations: 0 })
}

#[derive(Clone, Debug)]
pub struct Residual {
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    pub norms: NormReport,
}

impl Residual {
    pub fn e0(&self) -> f64 {
        self.norms.e0()
    }
}

/// Moving-frame residual at the model's speed:
/// `r1 = c eta_x + G phi`, `r2 = c phi_x + (d_t phi)`.
pub fn traveling_residual(model: &Zakharov, u: &SurfaceState) -> Result<Residual> {
    let c = model.params.c;
    let parts = model.rhs_parts(u)?;
    let r1: Vec<f64> = parts.eta_x.iter().zip(&parts.g_phi).map(|(e, g)| c * e + g).collect();
    let r2: Vec<f64> = parts.phi_x.iter().zip(&parts.phi_t).map(|(p, t)| c * p + t).collect();
    let norms = NormReport::of_pair(model.grid(), &r1, &r2);
    Ok(Residual { r1, r2, norms })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RampMode {
    /// Keep the seed's far-field amplitude. A mismatch then shows up as a weak
    /// uniform current and a shifted far-field level.
    Frozen,
    /// Solve for the amplitude together with the condition `eta(-L/2) = 0`.
    FarFieldPinned,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum JacobianKind {
    ForwardDifference,
    /// Dense linearization built from the assembled operator matrices.
    Analytic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub ramp: RampMode,
    pub jacobian: JacobianKind,
    /// Relative forward-difference step.
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 12, ramp: RampMode::FarFieldPinned, jacobian: JacobianKind::ForwardDifference, fd_step: 1e-7 }
    }
}

/// Reduced coordinates: `eta` even and the periodic potential odd about 0.
struct Reduced {
    n: usize,
    free_amp: bool,
    carrier: CarrierKind,
    grid: Grid1D,
}

impl Reduced {
    fn n_eta(&self) -> usize {
        self.n / 2 + 1
    }
    fn len(&self) -> usize {
        self.n + usize::from(self.free_amp)
    }

    fn pack(&self, u: &SurfaceState) -> Vec<f64> {
        let h = self.n / 2;
        let mut x = Vec::with_capacity(self.len());
        for i in 0..h {
            x.push(u.eta[h + i]);
        }
        x.push(u.eta[0]);
        for i in 1..h {
            x.push(u.phi_periodic[h + i]);
        }
        if self.free_amp {
            x.push(u.phi_ramp_amp);
        }
        x
    }

    fn unpack(&self, x: &[f64], amp: f64) -> SurfaceState {
        let (n, h) = (self.n, self.n / 2);
        let mut eta = vec![0.0; n];
        let mut p = vec![0.0; n];
        for i in 0..h {
            eta[h + i] = x[i];
            eta[h - i] = x[i];
        }
        eta[0] = x[h];
        for i in 1..h {
            let v = x[self.n_eta() + i - 1];
            p[h + i] = v;
            p[h - i] = -v;
        }
        let amp = if self.free_amp { x[self.n] } else { amp };
        SurfaceState { grid: self.grid.clone(), eta, phi_periodic: p, phi_ramp_amp: amp, carrier: self.carrier }
    }

    /// Odd part of `r1`, even part of `r2`, then the far-field pin.
    fn restrict(&self, r1: &[f64], r2: &[f64], u: &SurfaceState, g: f64) -> Vec<f64> {
        let h = self.n / 2;
        let mut f = Vec::with_capacity(self.len());
        for i in 1..h {
            f.push(r1[h + i]);
        }
        for i in 0..h {
            f.push(r2[h + i]);
        }
        f.push(r2[0]);
        if self.free_amp {
            f.push(g * u.eta[0]);
        }
        f
    }
}

fn residual_vector(model: &Zakharov, red: &Reduced, x: &[f64], amp: f64) -> Result<(Vec<f64>, f64)> {
    let u = red.unpack(x, amp);
    let r = traveling_residual(model, &u)?;
    Ok((red.restrict(&r.r1, &r.r2, &u, model.params.g), r.e0()))
}

fn fd_jacobian(model: &Zakharov, red: &Reduced, x: &[f64], amp: f64, f0: &[f64], rel: f64) -> Result<DMatrix<f64>> {
    let m = red.len();
    let ne = red.n_eta();
    let scale = |range: &[f64]| range.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-8);
    let se = rel * scale(&x[..ne]);
    let sp = rel * scale(&x[ne..]);
    let cols = par::map_range(m, |j| -> Result<Vec<f64>> {
        let h = if j < ne { se } else { sp };
        let mut xp = x.to_vec();
        xp[j] += h;
        let (fp, _) = residual_vector(model, red, &xp, amp)?;
        Ok(fp.iter().zip(f0).map(|(a, b)| (a - b) / h).collect())
    });
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for (j, c) in cols.into_iter().enumerate() {
        let c = c?;
        for i in 0..m {
            jac[(i, j)] = c[i];
        }
    }
    Ok(jac)
}

fn analytic_jacobian(model: &Zakharov, red: &Reduced, x: &[f64], amp: f64) -> Result<DMatrix<f64>> {
    let u = red.unpack(x, amp);
    let lin = crate::stability::Linearization::new(model, &u)?;
    let df = lin.moving_frame_jacobian();
    let (n, h) = (red.n, red.n / 2);
    let m = red.len();
    // Columns of the map from reduced unknowns to full fields.
    let mut basis: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
    for i in 0..h {
        if i == 0 {
            basis.push(vec![(h, 1.0)]);
        } else {
            basis.push(vec![(h + i, 1.0), (h - i, 1.0)]);
        }
    }
    basis.push(vec![(0, 1.0)]);
    for i in 1..h {
        basis.push(vec![(n + h + i, 1.0), (n + h - i, -1.0)]);
    }
    let rows: Vec<usize> = (1..h).map(|i| h + i).chain((0..h).map(|i| n + h + i)).chain(std::iter::once(n)).collect();
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for (c, b) in basis.iter().enumerate() {
        for (r, &row) in rows.iter().enumerate() {
            jac[(r, c)] = b.iter().map(|&(k, w)| w * df[(row, k)]).sum();
        }
    }
    if red.free_amp {
        // Amplitude column from the carrier direction; pin row on eta(-L/2).
        let (d1, d2) = lin.apply_moving_frame_ramp(model, 1.0)?;
        for (r, &row) in rows.iter().enumerate() {
            jac[(r, m - 1)] = if row < n { d1[row] } else { d2[row - n] };
        }
        jac[(m - 1, h)] = model.params.g;
    }
    Ok(jac)
}

/// Newton refinement of a seed centered at 0, then translated back to its center.
pub fn refine_newton(model: &Zakharov, seed: &SolitaryWave, opts: &NewtonOptions) -> Result<SolitaryWave> {
    let grid = model.grid();
    if seed.state.grid != *grid {
        return invalid("seed lives on a different grid");
    }
    let centered = if seed.center == 0.0 { seed.state.clone() } else { seed.state.translate(-seed.center) };
    let red = Reduced { n: grid.n(), free_amp: opts.ramp == RampMode::FarFieldPinned, carrier: centered.carrier, grid: grid.clone() };
    let amp = centered.phi_ramp_amp;
    let mut x = red.pack(&centered);
    let (mut f, mut norm) = residual_vector(model, &red, &x, amp)?;
    let mut growth = 0;
    let mut iterations = 0;
    while norm >= opts.tol {
        if iterations == opts.max_iter {
            return Err(WwError::NoConvergence { iterations, residual: norm, dump: x });
        }
        iterations += 1;
        let jac = match opts.jacobian {
            JacobianKind::ForwardDifference => fd_jacobian(model, &red, &x, amp, &f, opts.fd_step)?,
            JacobianKind::Analytic => analytic_jacobian(model, &red, &x, amp)?,
        };
        let rhs = DVector::from_iterator(f.len(), f.iter().map(|v| -v));
        let dx = jac
            .lu()
            .solve(&rhs)
            .ok_or_else(|| WwError::NumericalDegeneracy("singular Newton Jacobian".into()))?;
        for (a, d) in x.iter_mut().zip(dx.iter()) {
            *a += d;
        }
        let prev = norm;
        let (fnew, nnew) = residual_vector(model, &red, &x, amp)?;
        f = fnew;
        norm = nnew;
        if !norm.is_finite() {
            return Err(WwError::NoConvergence { iterations, residual: norm, dump: x });
        }
        growth = if norm > prev { growth + 1 } else { 0 };
        if growth >= 3 {
            return Err(WwError::NoConvergence { iterations, residual: norm, dump: x });
        }
    }
    let state = red.unpack(&x, amp);
    let wave = SolitaryWave { params: model.params, center: 0.0, state, residual_norm: norm, iterations };
    Ok(if seed.center == 0.0 { wave } else { wave.translate(seed.center) })
}

/// Seed plus refinement on a fresh model for `params`.
pub fn build_wave(params: &PhysicalParams, grid: &Grid1D, dn: DnConfig, opts: &NewtonOptions) -> Result<(Zakharov, SolitaryWave)> {
    let model = Zakharov::new(grid, *params, dn)?;
    let seed = asymptotic_profile(params, grid, 0.0, CarrierKind::Linear)?;
    let wave = refine_newton(&model, &seed, opts)?;
    Ok((model, wave))
}

/// `integral eta d_x phi`.
pub fn momentum(u: &SurfaceState) -> f64 {
    let px = u.phi_x();
    u.grid.integrate(&u.eta.iter().zip(&px).map(|(a, b)| a * b).collect::<Vec<_>>())
}

/// Centered difference in the speed at fixed fluid `(g, b, H)`.
#[derive(Clone, Debug)]
pub struct SpeedDerivative {
    /// `d_c Q` as a state; its ramp amplitude is `d_c amp`.
    pub dq: SurfaceState,
    pub dc: f64,
    pub plus: SolitaryWave,
    pub minus: SolitaryWave,
}

pub fn speed_derivative(params: &PhysicalParams, grid: &Grid1D, d_eps: f64, dn: DnConfig, opts: &NewtonOptions) -> Result<SpeedDerivative> {
    let eps = params.epsilon();
    if !(d_eps > 0.0 && d_eps < eps) {
        return invalid(format!("need 0 < d_eps < eps, got {d_eps}"));
    }
    let pp = params.with_eps(eps - d_eps)?;
    let pm = params.with_eps(eps + d_eps)?;
    let (_, wp) = build_wave(&pp, grid, dn, opts)?;
    let (_, wm) = build_wave(&pm, grid, dn, opts)?;
    let dc = pp.c - pm.c;
    let d = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| (x - y) / dc).collect() };
    let dq = SurfaceState {
        grid: grid.clone(),
        eta: d(&wp.state.eta, &wm.state.eta),
        phi_periodic: d(&wp.state.phi_periodic, &wm.state.phi_periodic),
        phi_ramp_amp: (wp.state.phi_ramp_amp - wm.state.phi_ramp_amp) / dc,
        carrier: wp.state.carrier,
    };
    Ok(SpeedDerivative { dq, dc, plus: wp, minus: wm })
}

/// `d/dc integral eta_c d_x phi_c`, which equals `(d_c Q, J d_x Q)`.
pub fn momentum_slope(params: &PhysicalParams, grid: &Grid1D, d_eps: f64, dn: DnConfig, opts: &NewtonOptions) -> Result<f64> {
    let sd = speed_derivative(params, grid, d_eps, dn, opts)?;
    Ok((momentum(&sd.plus.state) - momentum(&sd.minus.state)) / sd.dc)
}
