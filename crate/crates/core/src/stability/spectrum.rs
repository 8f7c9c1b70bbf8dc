//! Spectra of `J L` and the transverse-instability scan.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Linearization, OperatorMatrix};
use crate::dn::{DnConfig, PhysicalParams};
use crate::error::{invalid, Result};
use crate::numerics::io::write_table_csv;
use crate::numerics::make_grid;
use crate::par;
use crate::solitary::{build_wave, NewtonOptions};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<(f64, f64)>,
    pub k: f64,
    pub n: usize,
    pub length: f64,
    /// Norm of the matrix whose spectrum this is, used to scale tolerances.
    pub scale: f64,
}

impl SpectrumResult {
    pub fn values(&self) -> Vec<Complex64> {
        self.eigenvalues.iter().map(|&(r, i)| Complex64::new(r, i)).collect()
    }

    pub fn max_real(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest distance from `-sigma` to the spectrum over all `sigma`, relative to `scale`.
    pub fn pm_symmetry_defect(&self) -> f64 {
        let v = self.values();
        let worst = v
            .iter()
            .map(|s| v.iter().map(|t| (t + s).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        worst / self.scale
    }

    /// Eigenvalue with the largest real part.
    pub fn leading(&self) -> Complex64 {
        self.values().into_iter().fold(Complex64::new(f64::NEG_INFINITY, 0.0), |a, b| if b.re > a.re { b } else { a })
    }
}

/// Eigenvalues of `J L`.
pub fn spectrum(op: &OperatorMatrix, length: f64) -> SpectrumResult {
    let jl = op.j_times();
    let scale = jl.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let ev = jl.complex_eigenvalues();
    SpectrumResult { eigenvalues: ev.iter().map(|z| (z.re, z.im)).collect(), k: op.k, n: op.n, length, scale }
}

/// `L(k)` about a wave given in scaled variables.
pub fn assemble_lk(lin: &Linearization, k: f64) -> Result<OperatorMatrix> {
    lin.lk(k)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchPoint {
    pub k: f64,
    /// Leading eigenvalue at the base resolution.
    pub sigma: (f64, f64),
    /// Same at 1.5 times the resolution.
    pub sigma_fine: (f64, f64),
    /// True when a real positive eigenvalue is present and moves less than 10% under refinement.
    pub unstable: bool,
    /// Positive real part present at the base resolution but rejected by the refinement filter.
    pub spurious: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransverseScan {
    pub points: Vec<BranchPoint>,
    pub zero_mode_max_real: f64,
    pub zero_mode_scale: f64,
    pub max_pm_defect: f64,
    /// Largest `|k|` with an accepted unstable eigenvalue.
    pub band_edge: Option<f64>,
}

impl TransverseScan {
    pub fn sigma(&self, k: f64) -> Option<f64> {
        self.points.iter().find(|p| p.k == k && p.unstable).map(|p| p.sigma.0)
    }
}

/// Real parts below `floor * scale` count as neutral.
const NEUTRAL_FLOOR: f64 = 1e-6;

fn is_unstable(s: Complex64, scale: f64) -> bool {
    s.re > NEUTRAL_FLOOR * scale && s.im.abs() <= 1e-6 * scale.max(1.0)
}

/// Scan `k` for real unstable eigenvalues of `J L(k)` about the scaled wave
/// with the given `eps`, `beta`, on a box of length `length` with `n` and `3n/2` points.
pub fn transverse_scan(eps: f64, beta: f64, length: f64, n: usize, ks: &[f64], dn: DnConfig, opts: &NewtonOptions) -> Result<TransverseScan> {
    if n % 4 != 0 {
        return invalid("transverse scan needs N divisible by 4 so that 3N/2 is even");
    }
    let params = PhysicalParams::from_eps_beta(1.0, 1.0, eps, beta)?.scaled();
    let lin_at = |nn: usize| -> Result<Linearization> {
        let grid = make_grid(length, nn)?;
        let (model, wave) = build_wave(&params, &grid, dn, opts)?;
        Linearization::new(&model, &wave.state)
    };
    let coarse = lin_at(n)?;
    let fine = lin_at(3 * n / 2)?;
    let zero = spectrum(&coarse.lk(0.0)?, length);
    let mut max_pm = zero.pm_symmetry_defect();
    let results = par::map_slice(ks, |&k| -> Result<(BranchPoint, f64)> {
        let sc = spectrum(&coarse.lk(k)?, length);
        let sf = spectrum(&fine.lk(k)?, length);
        let (a, b) = (sc.leading(), sf.leading());
        let base = is_unstable(a, sc.scale);
        let stable_under_refinement = is_unstable(b, sf.scale) && ((a.re - b.re).abs() <= 0.1 * a.re.abs());
        let p = BranchPoint {
            k,
            sigma: (a.re, a.im),
            sigma_fine: (b.re, b.im),
            unstable: base && stable_under_refinement,
            spurious: base && !stable_under_refinement,
        };
        Ok((p, sc.pm_symmetry_defect()))
    });
    let mut points = Vec::with_capacity(ks.len());
    for r in results {
        let (p, d) = r?;
        max_pm = max_pm.max(d);
        points.push(p);
    }
    let band_edge = points.iter().filter(|p| p.unstable).map(|p| p.k.abs()).fold(None, |a: Option<f64>, k| Some(a.map_or(k, |v| v.max(k))));
    Ok(TransverseScan { points, zero_mode_max_real: zero.max_real(), zero_mode_scale: zero.scale, max_pm_defect: max_pm, band_edge })
}

/// Rows `k, Re sigma, Im sigma, converged`.
pub fn write_spectra_csv(path: &Path, scan: &TransverseScan) -> Result<()> {
    let rows: Vec<Vec<f64>> = scan
        .points
        .iter()
        .map(|p| vec![p.k, p.sigma.0, p.sigma.1, if p.unstable { 1.0 } else { 0.0 }])
        .collect();
    write_table_csv(path, &["k", "re_sigma", "im_sigma", "converged"], &rows)
}

/// Eigenvalues of a symmetric matrix after explicit symmetrization.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let s = (a + a.transpose()) * 0.5;
    let mut v: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}
