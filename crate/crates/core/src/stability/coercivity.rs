//! Constrained Rayleigh quotients of `L_c` in the energy metric.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{apply_j, dense_of, Linearization, OperatorMatrix};
use crate::error::{Result, WwError};
use crate::numerics::norms::pm_weight;
use crate::numerics::Grid1D;

/// Gram matrix of the energy inner product: `H^1` on the first component,
/// the half-derivative seminorm on the second.
pub fn x0_gram(grid: &Grid1D) -> DMatrix<f64> {
    let n = grid.n();
    let dx = grid.dx();
    let m1 = dense_of(n, |f| grid.apply_even(f, |k| 1.0 + k * k)) * dx;
    let m2 = dense_of(n, |f| grid.apply_even(f, pm_weight)) * dx;
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&m1);
    m.view_mut((n, n), (n, n)).copy_from(&m2);
    (&m + m.transpose()) * 0.5
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoercivityReport {
    /// Smallest generalized eigenvalue on the constrained subspace.
    pub min_value: f64,
    /// Minimizer as stacked nodal values.
    pub minimizer: Vec<f64>,
    /// Generalized eigenvalues, ascending.
    pub spectrum: Vec<f64>,
}

/// Orthonormal basis of the complement of the given constraint vectors.
fn complement_basis(constraints: &[Vec<f64>], dim: usize) -> Result<DMatrix<f64>> {
    let c = DMatrix::from_fn(constraints.len(), dim, |i, j| constraints[i][j]);
    let gram = &c * c.transpose();
    let inv = gram
        .try_inverse()
        .ok_or_else(|| WwError::NumericalDegeneracy("dependent constraints".into()))?;
    let proj = DMatrix::identity(dim, dim) - c.transpose() * inv * &c;
    let eig = SymmetricEigen::new((&proj + proj.transpose()) * 0.5);
    let keep: Vec<usize> = (0..dim).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    if keep.len() != dim - constraints.len() {
        return Err(WwError::NumericalDegeneracy("constraint projector has the wrong rank".into()));
    }
    Ok(DMatrix::from_fn(dim, keep.len(), |i, j| eig.eigenvectors[(i, keep[j])]))
}

/// `dx` turns nodal sums into the discrete `L^2` pairing used by the quadratic form.
fn generalized_on(basis: &DMatrix<f64>, l: &DMatrix<f64>, m: &DMatrix<f64>, dx: f64) -> Result<CoercivityReport> {
    let a = basis.transpose() * l * basis * dx;
    let a = (&a + a.transpose()) * 0.5;
    let b = basis.transpose() * m * basis;
    let b = (&b + b.transpose()) * 0.5;
    let chol = Cholesky::new(b).ok_or_else(|| WwError::NumericalDegeneracy("energy Gram matrix not positive on the subspace".into()))?;
    let lower = chol.l();
    let linv = lower
        .clone()
        .try_inverse()
        .ok_or_else(|| WwError::NumericalDegeneracy("singular Cholesky factor".into()))?;
    let k = &linv * a * linv.transpose();
    let eig = SymmetricEigen::new((&k + k.transpose()) * 0.5);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let spectrum: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = linv.transpose() * eig.eigenvectors.column(order[0]);
    let u = basis * y;
    Ok(CoercivityReport { min_value: spectrum[0], minimizer: u.iter().copied().collect(), spectrum })
}

fn constants_direction(n: usize) -> Vec<f64> {
    let mut c = vec![0.0; 2 * n];
    c[n..].iter_mut().for_each(|v| *v = 1.0);
    c
}

/// Minimum of `(L_c U, U) / |U|^2` over `U` orthogonal to `J R d_x Q`, to
/// `(eta_x, 0)` and, as a quotient, to `(0, 1)`.
pub fn coercivity_rayleigh(lc: &OperatorMatrix, lin: &Linearization) -> Result<CoercivityReport> {
    let n = lin.n();
    let (w1, w2) = lin.kernel_mode();
    let (jw1, jw2) = apply_j(&w1, &w2);
    let c1: Vec<f64> = jw1.into_iter().chain(jw2).collect();
    let c2: Vec<f64> = lin.eta_x.iter().copied().chain(std::iter::repeat(0.0).take(n)).collect();
    let basis = complement_basis(&[c1, c2, constants_direction(n)], 2 * n)?;
    generalized_on(&basis, &lc.matrix, &x0_gram(&lin.grid), lin.grid.dx())
}

/// Generalized spectrum of `L_c` on the quotient by `(0, 1)` only, and the
/// number of eigenvalues at or below `tol`.
pub fn unconstrained_count(lc: &OperatorMatrix, grid: &Grid1D, tol: f64) -> Result<(usize, CoercivityReport)> {
    let n = grid.n();
    let basis = complement_basis(&[constants_direction(n)], 2 * n)?;
    let rep = generalized_on(&basis, &lc.matrix, &x0_gram(grid), grid.dx())?;
    let count = rep.spectrum.iter().filter(|&&v| v <= tol).count();
    Ok((count, rep))
}
