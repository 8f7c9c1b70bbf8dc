//! Vertical discretization helpers on `z in [-1, 0]`.

use std::f64::consts::PI;

/// Chebyshev-Gauss-Lobatto points mapped to `[-1, 0]`, ordered from `z = 0`
/// (index 0) down to `z = -1` (last index).
pub fn cgl_nodes(nz: usize) -> Vec<f64> {
    let m = (nz - 1) as f64;
    (0..nz)
        .map(|l| {
            if l == 0 {
                0.0
            } else if l == nz - 1 {
                -1.0
            } else {
                0.5 * ((PI * l as f64 / m).cos() - 1.0)
            }
        })
        .collect()
}

/// Row-major `nz x nz` differentiation matrix in `z` on [`cgl_nodes`].
pub fn cheb_diff(nz: usize) -> Vec<f64> {
    let m = nz - 1;
    let s: Vec<f64> = (0..nz).map(|l| (PI * l as f64 / m as f64).cos()).collect();
    let c = |l: usize| -> f64 {
        let e = if l == 0 || l == m { 2.0 } else { 1.0 };
        if l % 2 == 0 { e } else { -e }
    };
    let mut d = vec![0.0; nz * nz];
    for i in 0..nz {
        for j in 0..nz {
            if i != j {
                d[i * nz + j] = c(i) / c(j) / (s[i] - s[j]);
            }
        }
    }
    // Negative sum trick for the diagonal.
    for i in 0..nz {
        let off: f64 = (0..nz).filter(|&j| j != i).map(|j| d[i * nz + j]).sum();
        d[i * nz + i] = -off;
    }
    // d/dz = 2 d/ds since z = (s - 1)/2.
    d.iter_mut().for_each(|v| *v *= 2.0);
    d
}

/// Gauss-Legendre nodes and weights on `[-1, 0]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(m);
    let mut w = Vec::with_capacity(m);
    for i in 0..m {
        let mut t = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, t);
            dp = d;
            let step = p / d;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, t);
        if d.is_finite() {
            dp = d;
        }
        x.push(0.5 * (t - 1.0));
        w.push(1.0 / ((1.0 - t * t) * dp * dp));
    }
    (x, w)
}

fn legendre(m: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if m == 0 { 1.0 } else { p1 };
    let d = m as f64 * (t * p - p0) / (t * t - 1.0);
    (p, d)
}

/// Row-major `targets.len() x nodes.len()` matrix evaluating the interpolant
/// through [`cgl_nodes`] at `targets` (barycentric form).
pub fn interp_matrix(nodes: &[f64], targets: &[f64]) -> Vec<f64> {
    let nz = nodes.len();
    let wts: Vec<f64> = (0..nz)
        .map(|l| {
            let e = if l == 0 || l == nz - 1 { 0.5 } else { 1.0 };
            if l % 2 == 0 { e } else { -e }
        })
        .collect();
    let mut out = vec![0.0; targets.len() * nz];
    for (q, &t) in targets.iter().enumerate() {
        let row = &mut out[q * nz..(q + 1) * nz];
        if let Some(hit) = nodes.iter().position(|&z| (z - t).abs() < 1e-15) {
            row[hit] = 1.0;
            continue;
        }
        let mut den = 0.0;
        for l in 0..nz {
            let r = wts[l] / (t - nodes[l]);
            row[l] = r;
            den += r;
        }
        row.iter_mut().for_each(|v| *v /= den);
    }
    out
}

/// Row-major product of an `r x k` and a `k x c` matrix.
pub fn matmul(a: &[f64], b: &[f64], r: usize, k: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        let row = &mut out[i * c..(i + 1) * c];
        for l in 0..k {
            let s = a[i * k + l];
            if s != 0.0 {
                for (o, v) in row.iter_mut().zip(&b[l * c..(l + 1) * c]) {
                    *o += s * v;
                }
            }
        }
    }
    out
}
