//! Flattened-strip elliptic solver behind the Dirichlet-Neumann operator.
//!
//! The fluid domain `{-H < y < eta(x)}` is mapped to `S = [-L/2, L/2) x [-1, 0]`
//! by `y = (z + 1)(H + eta) - H`. The potential solves
//! `div(P grad u) - k^2 (H + eta) u = 0` with Dirichlet data on `z = 0` and a
//! natural Neumann condition on `z = -1`.
//!
//! Discretization: Fourier in `x`, Chebyshev-Gauss-Lobatto nodes in `z`, and
//! the weak form integrated with Gauss-Legendre points in `z` (values
//! interpolated from the nodes). Writing `P = P0 + dP` with the flat
//! coefficients `P0 = diag(H, 1/H)`, the field is `E psi + u` where `E` is the
//! exact flat harmonic extension and `u` vanishes on top. Minimizing the
//! energy over `u` gives
//!
//! ```text
//! A_II u = -(dA E psi)_I,      G psi = G0 psi + (1/dx) E^T dA (E psi + u)
//! ```
//!
//! which is exactly symmetric, annihilates constants and reduces to the exact
//! symbol `G0` when `eta = 0`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Result, WwError};
use crate::numerics::cheb::{cgl_nodes, cheb_diff, gauss_legendre, interp_matrix, matmul};
use crate::numerics::Grid1D;
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DnConfig {
    /// Vertical node count.
    pub nz: usize,
    /// Relative residual target of the conjugate-gradient solve.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DnConfig {
    fn default() -> Self {
        Self { nz: 32, tol: 1e-10, max_iter: 200 }
    }
}

/// Scalar field on the strip, stored level by level: `values[l * N + j]`,
/// with level 0 at `z = 0` and the last level at `z = -1`.
#[derive(Clone, Debug)]
pub struct StripField {
    pub n: usize,
    pub z: Vec<f64>,
    pub values: Vec<f64>,
}

impl StripField {
    pub fn nz(&self) -> usize {
        self.z.len()
    }
    pub fn level(&self, l: usize) -> &[f64] {
        &self.values[l * self.n..(l + 1) * self.n]
    }
    /// `d_z` at `z = 0` from the Chebyshev differentiation matrix.
    pub fn dz_top(&self) -> Vec<f64> {
        let nz = self.nz();
        let d = cheb_diff(nz);
        let mut out = vec![0.0; self.n];
        for l in 0..nz {
            let s = d[l];
            for (o, v) in out.iter_mut().zip(self.level(l)) {
                *o += s * v;
            }
        }
        out
    }
}

/// Weak-form coefficients at the quadrature points, premultiplied by the
/// quadrature weights. Row `q` of each array belongs to quadrature level `q`.
#[derive(Clone, Debug)]
struct Coefficients {
    c11: Vec<f64>,
    c12: Vec<f64>,
    c22: Vec<f64>,
    c33: Vec<f64>,
}

/// Precomputed data for a fixed grid, depth, transverse wavenumber and `Nz`.
#[derive(Clone, Debug)]
pub struct StripSolver {
    grid: Grid1D,
    depth: f64,
    k: f64,
    cfg: DnConfig,
    z: Vec<f64>,
    mq: usize,
    wq: Vec<f64>,
    zq: Vec<f64>,
    iq: Vec<f64>,
    gq: Vec<f64>,
    iq_t: Vec<f64>,
    gq_t: Vec<f64>,
    lift: Vec<f64>,
    g0: Vec<f64>,
    dsym: Vec<Complex64>,
    /// Inverse flat interior blocks, one per `|m|` in `0..=N/2`.
    pinv: Vec<Vec<f64>>,
}

fn transpose(a: &[f64], r: usize, c: usize) -> Vec<f64> {
    let mut t = vec![0.0; r * c];
    for i in 0..r {
        for j in 0..c {
            t[j * r + i] = a[i * c + j];
        }
    }
    t
}

/// `cosh(d (z + 1)) / cosh(d)` without overflow.
pub fn cosh_ratio(d: f64, z: f64) -> f64 {
    if d == 0.0 {
        return 1.0;
    }
    (d * z).exp() * (1.0 + (-2.0 * d * (z + 1.0)).exp()) / (1.0 + (-2.0 * d).exp())
}

/// Flat-bottom symbol `kappa tanh(H kappa)` with `kappa = sqrt(xi^2 + k^2)`.
pub fn flat_symbol(xi: f64, k: f64, depth: f64) -> f64 {
    let kap = (xi * xi + k * k).sqrt();
    kap * (depth * kap).tanh()
}

impl StripSolver {
    pub fn new(grid: &Grid1D, depth: f64, k: f64, cfg: DnConfig) -> Result<Self> {
        if cfg.nz < 8 {
            return invalid(format!("vertical node count must be at least 8, got {}", cfg.nz));
        }
        if !(depth > 0.0) {
            return invalid(format!("depth must be positive, got {depth}"));
        }
        if !(cfg.tol > 0.0) || cfg.max_iter == 0 {
            return invalid("solver tolerance and iteration cap must be positive");
        }
        let (n, nz) = (grid.n(), cfg.nz);
        let z = cgl_nodes(nz);
        let dz = cheb_diff(nz);
        let mq = nz + 2;
        let (zq, wq) = gauss_legendre(mq);
        let iq = interp_matrix(&z, &zq);
        let gq = matmul(&iq, &dz, mq, nz, nz);
        let iq_t = transpose(&iq, mq, nz);
        let gq_t = transpose(&gq, mq, nz);

        let xi = grid.wavenumbers();
        let mut lift = vec![0.0; nz * n];
        for l in 0..nz {
            for m in 0..n {
                let kap = (xi[m] * xi[m] + k * k).sqrt();
                lift[l * n + m] = cosh_ratio(depth * kap, z[l]);
            }
        }
        let g0 = xi.iter().map(|&x| flat_symbol(x, k, depth)).collect();

        // Flat mass and stiffness in z.
        let mut mass = vec![0.0; nz * nz];
        let mut stiff = vec![0.0; nz * nz];
        for q in 0..mq {
            for a in 0..nz {
                for b in 0..nz {
                    mass[a * nz + b] += wq[q] * iq[q * nz + a] * iq[q * nz + b];
                    stiff[a * nz + b] += wq[q] * gq[q * nz + a] * gq[q * nz + b];
                }
            }
        }
        let dx = grid.dx();
        let xo = grid.xi_odd();
        let ni = nz - 1;
        let mut pinv = Vec::with_capacity(n / 2 + 1);
        for m in 0..=n / 2 {
            let s = depth * (xo[m] * xo[m] + k * k);
            let mut kmat = DMatrix::<f64>::zeros(ni, ni);
            for a in 0..ni {
                for b in 0..ni {
                    let (ia, ib) = (a + 1, b + 1);
                    kmat[(a, b)] = dx * (s * mass[ia * nz + ib] + stiff[ia * nz + ib] / depth);
                }
            }
            let inv = kmat
                .cholesky()
                .ok_or_else(|| WwError::NumericalDegeneracy("flat strip block not positive definite".into()))?
                .inverse();
            let mut rows = vec![0.0; ni * ni];
            for a in 0..ni {
                for b in 0..ni {
                    rows[a * ni + b] = inv[(a, b)];
                }
            }
            pinv.push(rows);
        }

        Ok(Self {
            grid: grid.clone(),
            depth,
            k,
            cfg,
            z,
            mq,
            wq,
            zq,
            iq,
            gq,
            iq_t,
            gq_t,
            lift,
            g0,
            dsym: grid.derivative_symbol(),
            pinv,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }
    pub fn depth(&self) -> f64 {
        self.depth
    }
    pub fn transverse_k(&self) -> f64 {
        self.k
    }
    pub fn config(&self) -> DnConfig {
        self.cfg
    }
    pub fn nodes_z(&self) -> &[f64] {
        &self.z
    }

    /// Exact flat harmonic extension of `psi`.
    pub fn lift(&self, psi: &[f64]) -> StripField {
        let n = self.grid.n();
        let nz = self.cfg.nz;
        let ph = self.grid.forward(psi);
        let mut spec = vec![Complex64::new(0.0, 0.0); nz * n];
        for l in 0..nz {
            for m in 0..n {
                spec[l * n + m] = ph[m] * self.lift[l * n + m];
            }
        }
        StripField { n, z: self.z.clone(), values: self.grid.inverse_rows(&spec, nz) }
    }

    /// `E^T y`: adjoint of the lift, mapping a strip field to a surface field.
    fn lift_adjoint(&self, y: &[f64]) -> Vec<f64> {
        let n = self.grid.n();
        let nz = self.cfg.nz;
        let yh = self.grid.forward_rows(y, nz);
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for l in 0..nz {
            for m in 0..n {
                acc[m] += yh[l * n + m] * self.lift[l * n + m];
            }
        }
        self.grid.inverse(&acc)
    }

    /// Flat operator `G0` applied spectrally.
    pub fn apply_flat(&self, psi: &[f64]) -> Vec<f64> {
        let mut c = self.grid.forward(psi);
        for (z, s) in c.iter_mut().zip(&self.g0) {
            *z *= s;
        }
        self.grid.inverse(&c)
    }

    fn coefficients(&self, eta: &[f64], delta: bool) -> Coefficients {
        let n = self.grid.n();
        let h = self.depth;
        let dx = self.grid.dx();
        let etax = self.grid.derivative(eta);
        let size = self.mq * n;
        let mut c = Coefficients {
            c11: vec![0.0; size],
            c12: vec![0.0; size],
            c22: vec![0.0; size],
            c33: vec![0.0; size],
        };
        for q in 0..self.mq {
            let w = self.wq[q] * dx;
            let s = self.zq[q] + 1.0;
            for j in 0..n {
                let i = q * n + j;
                let d = h + eta[j];
                let ex = etax[j];
                let (p11, p22, p33) = if delta {
                    (eta[j], (1.0 + s * s * ex * ex) / d - 1.0 / h, eta[j])
                } else {
                    (d, (1.0 + s * s * ex * ex) / d, d)
                };
                c.c11[i] = w * p11;
                c.c12[i] = -w * s * ex;
                c.c22[i] = w * p22;
                c.c33[i] = w * self.k * self.k * p33;
            }
        }
        c
    }

    /// Weak-form operator for the given coefficients applied to a full strip field.
    fn form(&self, c: &Coefficients, u: &[f64]) -> Vec<f64> {
        let n = self.grid.n();
        let nz = self.cfg.nz;
        let mq = self.mq;
        let mut ux = u.to_vec();
        self.grid.apply_rows(&mut ux, nz, &self.dsym);
        let uxq = matmul(&self.iq, &ux, mq, nz, n);
        let uzq = matmul(&self.gq, u, mq, nz, n);
        let mut fx = vec![0.0; mq * n];
        let mut fz = vec![0.0; mq * n];
        for i in 0..mq * n {
            fx[i] = c.c11[i] * uxq[i] + c.c12[i] * uzq[i];
            fz[i] = c.c12[i] * uxq[i] + c.c22[i] * uzq[i];
        }
        let mut t = matmul(&self.iq_t, &fx, nz, mq, n);
        self.grid.apply_rows(&mut t, nz, &self.dsym);
        let mut out = matmul(&self.gq_t, &fz, nz, mq, n);
        for (o, v) in out.iter_mut().zip(&t) {
            *o -= v;
        }
        if self.k != 0.0 {
            let uq = matmul(&self.iq, u, mq, nz, n);
            let fm: Vec<f64> = uq.iter().zip(&c.c33).map(|(a, b)| a * b).collect();
            let m = matmul(&self.iq_t, &fm, nz, mq, n);
            for (o, v) in out.iter_mut().zip(&m) {
                *o += v;
            }
        }
        out
    }

    /// Flat interior block inverse, applied mode by mode.
    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        let n = self.grid.n();
        let ni = self.cfg.nz - 1;
        let rh = self.grid.forward_rows(r, ni);
        let mut out = vec![Complex64::new(0.0, 0.0); ni * n];
        let mut col = vec![Complex64::new(0.0, 0.0); ni];
        for m in 0..n {
            let mm = if m <= n / 2 { m } else { n - m };
            let inv = &self.pinv[mm];
            for l in 0..ni {
                col[l] = rh[l * n + m];
            }
            for a in 0..ni {
                let row = &inv[a * ni..(a + 1) * ni];
                let mut s = Complex64::new(0.0, 0.0);
                for (w, v) in row.iter().zip(&col) {
                    s += v * w;
                }
                out[a * n + m] = s;
            }
        }
        self.grid.inverse_rows(&out, ni)
    }

    /// Prepare the operator for one surface.
    pub fn problem(&self, eta: &[f64]) -> Result<StripProblem<'_>> {
        self.grid.check_len(eta, "eta")?;
        let min = eta.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(self.depth + min > 0.0) || eta.iter().any(|v| !v.is_finite()) {
            return invalid(format!("cavitation: depth + min(eta) = {}", self.depth + min));
        }
        let flat = eta.iter().all(|&v| v == 0.0);
        Ok(StripProblem {
            solver: self,
            eta: eta.to_vec(),
            full: self.coefficients(eta, false),
            delta: self.coefficients(eta, true),
            flat,
        })
    }
}

/// Operator data for one fixed surface `eta`.
#[derive(Clone, Debug)]
pub struct StripProblem<'a> {
    solver: &'a StripSolver,
    eta: Vec<f64>,
    full: Coefficients,
    delta: Coefficients,
    flat: bool,
}

/// Result of the interior solve.
#[derive(Clone, Debug)]
pub struct Correction {
    pub field: StripField,
    pub iterations: usize,
    /// Relative residual of the discrete interior equation.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl<'a> StripProblem<'a> {
    pub fn solver(&self) -> &StripSolver {
        self.solver
    }
    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// Pointwise coefficient matrix `P` at `(x_j, z)`, as `(P11, P12, P22)`.
    pub fn coefficient_at(&self, j: usize, z: f64) -> (f64, f64, f64) {
        let s = self.solver;
        let ex = s.grid.derivative(&self.eta)[j];
        let d = s.depth + self.eta[j];
        let t = z + 1.0;
        (d, -t * ex, (1.0 + t * t * ex * ex) / d)
    }

    fn apply_interior(&self, x: &[f64]) -> Vec<f64> {
        let n = self.solver.grid.n();
        let mut full = vec![0.0; n];
        full.extend_from_slice(x);
        let y = self.solver.form(&self.full, &full);
        y[n..].to_vec()
    }

    fn pcg(&self, b: &[f64]) -> Result<(Vec<f64>, usize, f64)> {
        let cfg = self.solver.cfg;
        let bn = dot(b, b).sqrt();
        let mut x = vec![0.0; b.len()];
        if bn == 0.0 {
            return Ok((x, 0, 0.0));
        }
        let mut r = b.to_vec();
        let mut z = self.solver.precondition(&r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut rel = 1.0;
        for it in 1..=cfg.max_iter {
            let q = self.apply_interior(&p);
            let a = rz / dot(&p, &q);
            for i in 0..x.len() {
                x[i] += a * p[i];
                r[i] -= a * q[i];
            }
            rel = dot(&r, &r).sqrt() / bn;
            if !rel.is_finite() {
                return Err(WwError::SolverFailure { iterations: it, residual: rel });
            }
            if rel < cfg.tol {
                return Ok((x, it, rel));
            }
            z = self.solver.precondition(&r);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..p.len() {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(WwError::SolverFailure { iterations: cfg.max_iter, residual: rel })
    }

    /// Correction `u` (zero on top) for the lifted data `phi0 = E psi`.
    pub fn solve_correction(&self, phi0: &StripField) -> Result<Correction> {
        let s = self.solver;
        let n = s.grid.n();
        if phi0.values.len() != s.cfg.nz * n {
            return invalid("strip field does not match the solver layout");
        }
        let mut values = vec![0.0; s.cfg.nz * n];
        let (mut iterations, mut residual) = (0, 0.0);
        if !self.flat {
            let f = s.form(&self.delta, &phi0.values);
            let b: Vec<f64> = f[n..].iter().map(|v| -v).collect();
            let (x, it, rel) = self.pcg(&b)?;
            values[n..].copy_from_slice(&x);
            iterations = it;
            residual = rel;
        }
        Ok(Correction { field: StripField { n, z: s.z.clone(), values }, iterations, residual })
    }

    /// Relative residual `|A_II u + (dA phi0)_I| / |(dA phi0)_I|` of a candidate correction.
    pub fn interior_residual(&self, phi0: &StripField, u: &StripField) -> f64 {
        let n = self.solver.grid.n();
        let f = self.solver.form(&self.delta, &phi0.values);
        let au = self.apply_interior(&u.values[n..]);
        let num: f64 = au.iter().zip(&f[n..]).map(|(a, b)| (a + b) * (a + b)).sum();
        let den: f64 = f[n..].iter().map(|v| v * v).sum();
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }

    /// Dirichlet-Neumann operator applied to periodic data.
    pub fn apply(&self, psi: &[f64]) -> Result<Vec<f64>> {
        let s = self.solver;
        s.grid.check_len(psi, "psi")?;
        let mut data = psi.to_vec();
        if s.k == 0.0 {
            // Constants are annihilated exactly.
            let mean = data.iter().sum::<f64>() / data.len() as f64;
            data.iter_mut().for_each(|v| *v -= mean);
        }
        let mut out = s.apply_flat(&data);
        if self.flat {
            return Ok(out);
        }
        let phi0 = s.lift(&data);
        let corr = self.solve_correction(&phi0)?;
        let total: Vec<f64> = phi0.values.iter().zip(&corr.field.values).map(|(a, b)| a + b).collect();
        let y = s.form(&self.delta, &total);
        let back = s.lift_adjoint(&y);
        let inv_dx = 1.0 / s.grid.dx();
        for (o, v) in out.iter_mut().zip(&back) {
            *o += inv_dx * v;
        }
        Ok(out)
    }

    /// Dense `N x N` matrix of the operator, one solve per column.
    pub fn dense(&self) -> Result<DMatrix<f64>> {
        let n = self.solver.grid.n();
        let cols = par::map_range(n, |j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            self.apply(&e)
        });
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (j, c) in cols.into_iter().enumerate() {
            let c = c?;
            for i in 0..n {
                m[(i, j)] = c[i];
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cosh_ratio_is_stable() {
        assert!((cosh_ratio(1.0, -0.5) - (0.5f64).cosh() / 1f64.cosh()).abs() < 1e-15);
        let v = cosh_ratio(800.0, -0.01);
        assert!(v.is_finite() && (v - (-8.0f64).exp()).abs() < 1e-15);
        assert_eq!(cosh_ratio(0.0, -0.3), 1.0);
    }

    #[test]
    fn lift_of_cosine_mode() {
        let g = Grid1D::new(2.0 * PI, 16).unwrap();
        let s = StripSolver::new(&g, 1.0, 0.0, DnConfig::default()).unwrap();
        let psi: Vec<f64> = g.nodes().iter().map(|x| x.cos()).collect();
        let f = s.lift(&psi);
        for l in 0..f.nz() {
            for (j, x) in g.nodes().iter().enumerate() {
                let want = x.cos() * (f.z[l] + 1.0).cosh() / 1f64.cosh();
                assert!((f.level(l)[j] - want).abs() < 1e-13);
            }
        }
        let psi2: Vec<f64> = g.nodes().iter().map(|x| (2.0 * x).cos()).collect();
        let d = s.lift(&psi2).dz_top();
        for (v, x) in d.iter().zip(g.nodes()) {
            assert!((v - 2.0 * 2f64.tanh() * (2.0 * x).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn flat_preconditioner_inverts_flat_operator() {
        let g = Grid1D::new(10.0, 16).unwrap();
        let s = StripSolver::new(&g, 1.3, 0.7, DnConfig { nz: 10, ..Default::default() }).unwrap();
        let p = s.problem(&vec![0.0; 16]).unwrap();
        let x: Vec<f64> = (0..9 * 16).map(|i| ((i * 13 % 7) as f64 - 3.0) / 3.0).collect();
        let ax = p.apply_interior(&x);
        let back = s.precondition(&ax);
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-10, "{a} {b}");
        }
    }
}
