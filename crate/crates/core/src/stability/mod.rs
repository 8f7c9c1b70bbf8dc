//! Dense linearized operators about a traveling wave, their spectra, the
//! constrained coercivity test and linear evolution.

pub mod coercivity;
pub mod linear;
pub mod spectrum;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use coercivity::{coercivity_rayleigh, unconstrained_count, x0_gram, CoercivityReport};
pub use linear::{evolve_linear, LinearGrowth};
pub use spectrum::{assemble_lk, spectrum, transverse_scan, write_spectra_csv, BranchPoint, SpectrumResult, TransverseScan};

use crate::dn::{apply_dn_state, DnConfig, GoodUnknowns, PhysicalParams, StripSolver};
use crate::error::{invalid, Result, WwError};
use crate::evolution::Zakharov;
use crate::numerics::{Grid1D, SurfaceState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    /// Linearization in the original unknowns.
    Lambda,
    /// Same operator in good unknowns.
    Lc,
    /// Transverse family, scaled variables.
    Lk,
    /// Linearization about a two-wave superposition.
    Lm,
}

/// Dense operator on stacked `(U1 nodes, U2 nodes)`.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub kind: OperatorKind,
    pub matrix: DMatrix<f64>,
    pub n: usize,
    pub k: f64,
}

impl OperatorMatrix {
    /// `max |A - A^T| / max |A|`.
    pub fn symmetry_defect(&self) -> f64 {
        let a = &self.matrix;
        let d = (a - a.transpose()).amax();
        d / a.amax()
    }

    /// Induced infinity norm, an upper bound for the spectral norm of a symmetric matrix.
    pub fn norm(&self) -> f64 {
        self.matrix.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn apply(&self, u1: &[f64], u2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let x = stack(u1, u2);
        let y = &self.matrix * x;
        split(&y, self.n)
    }

    /// `J A` with `J = [[0, I], [-I, 0]]`.
    pub fn j_times(&self) -> DMatrix<f64> {
        j_times(&self.matrix, self.n)
    }
}

pub fn j_matrix(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

pub(crate) fn j_times(a: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(2 * n, a.ncols());
    out.rows_mut(0, n).copy_from(&a.rows(n, n));
    out.rows_mut(n, n).copy_from(&(-a.rows(0, n)));
    out
}

/// `J (a, b) = (b, -a)`.
pub fn apply_j(u1: &[f64], u2: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (u2.to_vec(), u1.iter().map(|v| -v).collect())
}

pub(crate) fn stack(u1: &[f64], u2: &[f64]) -> DVector<f64> {
    DVector::from_iterator(u1.len() + u2.len(), u1.iter().chain(u2).copied())
}

pub(crate) fn split(y: &DVector<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    (y.rows(0, n).iter().copied().collect(), y.rows(n, n).iter().copied().collect())
}

fn scale_rows(m: &DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    let mut out = m.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row *= d[i];
    }
    out
}

fn scale_cols(m: &DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    let mut out = m.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= d[j];
    }
    out
}

fn diag(d: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(d))
}

/// Dense matrix of a real-valued periodic linear map, built column by column.
pub fn dense_of(n: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let c = f(&e);
        e[j] = 0.0;
        m.column_mut(j).copy_from_slice(&c);
    }
    m
}

fn blocks(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(c);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}

/// Coefficient fields and dense building blocks of the linearization about a
/// traveling state at the model's speed.
#[derive(Clone, Debug)]
pub struct Linearization {
    pub grid: Grid1D,
    pub params: PhysicalParams,
    pub wave: SurfaceState,
    pub eta_x: Vec<f64>,
    /// Vertical surface velocity.
    pub z: Vec<f64>,
    /// Horizontal surface velocity.
    pub v: Vec<f64>,
    pub v_x: Vec<f64>,
    pub z_x: Vec<f64>,
    /// `(1 + eta_x^2)^{-3/2}`.
    pub curvature_weight: Vec<f64>,
    /// Dense Dirichlet-Neumann matrix at the wave.
    pub g: DMatrix<f64>,
    /// Spectral derivative matrix.
    pub d: DMatrix<f64>,
    pub dn: DnConfig,
}

impl Linearization {
    pub fn new(model: &Zakharov, wave: &SurfaceState) -> Result<Self> {
        let grid = model.grid().clone();
        if wave.grid != grid {
            return invalid("wave lives on a different grid");
        }
        let problem = model.solver.problem(&wave.eta)?;
        let g_phi = apply_dn_state(&problem, wave)?;
        let eta_x = wave.eta_x();
        let gu = GoodUnknowns::from_parts(&eta_x, &wave.phi_x(), &g_phi);
        let v_x = grid.derivative(&gu.v);
        let z_x = grid.derivative(&gu.z);
        let curvature_weight = eta_x.iter().map(|e| (1.0 + e * e).powf(-1.5)).collect();
        let g = problem.dense()?;
        let d = dense_of(grid.n(), |f| grid.derivative(f));
        Ok(Self {
            grid,
            params: model.params,
            wave: wave.clone(),
            eta_x,
            z: gu.z,
            v: gu.v,
            v_x,
            z_x,
            curvature_weight,
            g,
            d,
            dn: model.solver.config(),
        })
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    fn v_minus_c(&self) -> Vec<f64> {
        self.v.iter().map(|v| v - self.params.c).collect()
    }

    /// `b d_x(w d_x .)` with `w = (1 + eta_x^2)^{-3/2}`.
    fn curvature_matrix(&self) -> DMatrix<f64> {
        let wd = scale_rows(&self.d, &self.curvature_weight);
        (&self.d * wd) * self.params.b
    }

    fn identity_g(&self) -> DMatrix<f64> {
        DMatrix::identity(self.n(), self.n()) * self.params.g
    }

    /// Linearization in `(eta, phi)`.
    pub fn lambda(&self) -> OperatorMatrix {
        let n = self.n();
        let vc = self.v_minus_c();
        let zgz = scale_cols(&scale_rows(&self.g, &self.z), &self.z);
        let zvx: Vec<f64> = self.z.iter().zip(&self.v_x).map(|(a, b)| a * b).collect();
        let a = self.identity_g() - self.curvature_matrix() + zgz + diag(&zvx);
        let b = scale_rows(&self.d, &vc) - scale_rows(&self.g, &self.z);
        let c = -(&self.d * diag(&vc)) - scale_cols(&self.g, &self.z);
        let m = blocks(&a, &b, &c, &self.g);
        OperatorMatrix { kind: OperatorKind::Lambda, matrix: m, n, k: 0.0 }
    }

    /// Linearization in good unknowns, assembled directly.
    pub fn lc(&self) -> OperatorMatrix {
        let n = self.n();
        let vc = self.v_minus_c();
        let a_coef: Vec<f64> = vc.iter().zip(&self.z_x).map(|(a, b)| a * b).collect();
        let a = self.identity_g() - self.curvature_matrix() + diag(&a_coef);
        let b = scale_rows(&self.d, &vc);
        let c = -(&self.d * diag(&vc));
        let m = blocks(&a, &b, &c, &self.g);
        OperatorMatrix { kind: OperatorKind::Lc, matrix: m, n, k: 0.0 }
    }

    /// Transverse family `L(k)`: `G` replaced by `G_k` and the curvature
    /// operator gains `-b k^2 (1 + eta_x^2)^{-1/2}`.
    pub fn lk(&self, k: f64) -> Result<OperatorMatrix> {
        let n = self.n();
        let mut base = self.lc();
        if k == 0.0 {
            base.kind = OperatorKind::Lk;
            return Ok(base);
        }
        let solver = StripSolver::new(&self.grid, self.params.depth, k, self.dn)?;
        let gk = solver.problem(&self.wave.eta)?.dense()?;
        let bk2 = self.params.b * k * k;
        for i in 0..n {
            let e = self.eta_x[i];
            base.matrix[(i, i)] += bk2 / (1.0 + e * e).sqrt();
        }
        base.matrix.view_mut((n, n), (n, n)).copy_from(&gk);
        base.kind = OperatorKind::Lk;
        base.k = k;
        Ok(base)
    }

    /// `R = [[1, 0], [-Z, 1]]`.
    pub fn r_matrix(&self) -> DMatrix<f64> {
        self.r_with(-1.0)
    }
    pub fn r_inverse(&self) -> DMatrix<f64> {
        self.r_with(1.0)
    }
    fn r_with(&self, s: f64) -> DMatrix<f64> {
        let n = self.n();
        let mut r = DMatrix::identity(2 * n, 2 * n);
        for i in 0..n {
            r[(n + i, i)] = s * self.z[i];
        }
        r
    }

    /// `R U` without forming the matrix.
    pub fn apply_r(&self, u1: &[f64], u2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let w2 = u2.iter().zip(u1).zip(&self.z).map(|((b, a), z)| b - z * a).collect();
        (u1.to_vec(), w2)
    }

    /// Linearization of the moving-frame residual, `J Lambda`.
    pub fn moving_frame_jacobian(&self) -> DMatrix<f64> {
        j_times(&self.lambda().matrix, self.n())
    }

    /// Moving-frame residual linearized in the carrier direction, scaled by `amp`.
    pub fn apply_moving_frame_ramp(&self, model: &Zakharov, amp: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.n();
        let du = SurfaceState { eta: vec![0.0; n], phi_periodic: vec![0.0; n], phi_ramp_amp: amp, ..self.wave.clone() };
        let (l1, l2) = self.apply_lambda(model, &du)?;
        Ok((l2, l1.iter().map(|v| -v).collect()))
    }

    /// `Lambda dU` for a perturbation that may carry a carrier component.
    pub fn apply_lambda(&self, model: &Zakharov, du: &SurfaceState) -> Result<(Vec<f64>, Vec<f64>)> {
        let problem = model.solver.problem(&self.wave.eta)?;
        let (g, b) = (self.params.g, self.params.b);
        let grid = &self.grid;
        let g_phi = apply_dn_state(&problem, du)?;
        let phi_x = du.phi_x();
        let zeta = &du.eta;
        let zz: Vec<f64> = zeta.iter().zip(&self.z).map(|(a, b)| a * b).collect();
        let g_zz = problem.apply(&zz)?;
        let wz: Vec<f64> = grid.derivative(zeta).iter().zip(&self.curvature_weight).map(|(a, w)| a * w).collect();
        let curv = grid.derivative(&wz);
        let vc = self.v_minus_c();
        let flux: Vec<f64> = vc.iter().zip(zeta).map(|(a, b)| a * b).collect();
        let dflux = grid.derivative(&flux);
        let n = self.n();
        let mut o1 = vec![0.0; n];
        let mut o2 = vec![0.0; n];
        for j in 0..n {
            o1[j] = -b * curv[j] + g * zeta[j] + self.z[j] * g_zz[j] + self.z[j] * self.v_x[j] * zeta[j] + vc[j] * phi_x[j]
                - self.z[j] * g_phi[j];
            o2[j] = -dflux[j] - g_zz[j] + g_phi[j];
        }
        Ok((o1, o2))
    }

    /// Translation mode `d_x Q` as a periodic pair.
    pub fn translation_mode(&self) -> (Vec<f64>, Vec<f64>) {
        (self.eta_x.clone(), self.wave.phi_x())
    }

    /// `R d_x Q = (eta_x, v)`, the kernel of the good-unknown operator.
    pub fn kernel_mode(&self) -> (Vec<f64>, Vec<f64>) {
        let (a, b) = self.translation_mode();
        self.apply_r(&a, &b)
    }

    /// Conjugation identity defect, on the full grid and on the band `|m| <= N/4`.
    pub fn conjugation_defect(&self) -> ConjugationDefect {
        let lc = self.lc();
        let ri = self.r_inverse();
        let conj = ri.transpose() * self.lambda().matrix * &ri;
        let diff = &lc.matrix - &conj;
        let full = diff.norm() / lc.matrix.norm();
        let p = band_projector(&self.grid, self.n() / 4);
        let n = self.n();
        let mut pb = DMatrix::zeros(2 * n, 2 * n);
        pb.view_mut((0, 0), (n, n)).copy_from(&p);
        pb.view_mut((n, n), (n, n)).copy_from(&p);
        let resolved = (&pb * diff * &pb).norm() / (&pb * &lc.matrix * &pb).norm();
        ConjugationDefect { full, resolved }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConjugationDefect {
    pub full: f64,
    pub resolved: f64,
}

/// Orthogonal projector onto Fourier modes `|m| <= mmax`.
pub fn band_projector(grid: &Grid1D, mmax: usize) -> DMatrix<f64> {
    let n = grid.n();
    let mask: Vec<f64> = (0..n)
        .map(|m| {
            let mm = if m <= n / 2 { m } else { n - m };
            if mm <= mmax { 1.0 } else { 0.0 }
        })
        .collect();
    dense_of(n, |f| grid.apply_real(f, &mask))
}

/// `m(xi) = b xi^2 + g - c^2 xi / tanh(H xi)`; must be positive everywhere.
pub fn dispersion_symbol(params: &PhysicalParams, xi: &[f64]) -> Result<Vec<f64>> {
    let (g, b, c, h) = (params.g, params.b, params.c, params.depth);
    let vals: Vec<f64> = xi
        .iter()
        .map(|&k| {
            let y = h * k;
            let ratio = if y.abs() < 1e-8 { 1.0 + y * y / 3.0 } else { y / y.tanh() };
            b * k * k + g - c * c / h * ratio
        })
        .collect();
    if let Some((i, v)) = vals.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(WwError::PropertyViolation(format!("dispersion symbol {v:e} <= 0 at xi = {}", xi[i])));
    }
    Ok(vals)
}

#[derive(Clone, Debug)]
pub struct StableDecomposition {
    pub alpha: f64,
    pub beta: f64,
    pub v: (Vec<f64>, Vec<f64>),
    pub u: (Vec<f64>, Vec<f64>),
}

/// `U = alpha J W + beta W + V` with `W = R d_x Q`, `(V, J W) = 0` and `(V1, eta_x) = 0`.
pub fn stable_decomposition(lin: &Linearization, u1: &[f64], u2: &[f64]) -> Result<StableDecomposition> {
    let grid = &lin.grid;
    grid.check_len(u1, "U1")?;
    grid.check_len(u2, "U2")?;
    let ex2 = grid.inner(&lin.eta_x, &lin.eta_x);
    if !(ex2 > 0.0) {
        return invalid("flat wave: the translation mode vanishes");
    }
    let (w1, w2) = lin.kernel_mode();
    let (jw1, jw2) = apply_j(&w1, &w2);
    let pair = |a1: &[f64], a2: &[f64], b1: &[f64], b2: &[f64]| grid.inner(a1, b1) + grid.inner(a2, b2);
    let alpha = pair(u1, u2, &jw1, &jw2) / pair(&jw1, &jw2, &jw1, &jw2);
    // Pairing with (eta_x, 0) only sees first components; (W, (eta_x, 0)) = |eta_x|^2.
    let beta = (grid.inner(u1, &lin.eta_x) - alpha * grid.inner(&jw1, &lin.eta_x)) / grid.inner(&w1, &lin.eta_x);
    let v1 = (0..u1.len()).map(|i| u1[i] - alpha * jw1[i] - beta * w1[i]).collect();
    let v2 = (0..u2.len()).map(|i| u2[i] - alpha * jw2[i] - beta * w2[i]).collect();
    Ok(StableDecomposition { alpha, beta, v: (v1, v2), u: (u1.to_vec(), u2.to_vec()) })
}
