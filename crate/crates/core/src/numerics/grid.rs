use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result, WwError};

/// Periodic grid on `[-L/2, L/2)` with `N` nodes and the matching wavenumbers.
#[derive(Clone)]
pub struct Grid1D {
    length: f64,
    n: usize,
    dx: f64,
    nodes: Vec<f64>,
    xi: Vec<f64>,
    /// Wavenumbers with the Nyquist entry set to zero (odd symbols).
    xi_odd: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid1D")
            .field("length", &self.length)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for Grid1D {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

pub fn make_grid(length: f64, n: usize) -> Result<Grid1D> {
    Grid1D::new(length, n)
}

impl Grid1D {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return invalid(format!("box length must be positive, got {length}"));
        }
        if n % 2 != 0 {
            return invalid(format!("point count must be even, got {n}"));
        }
        if n < 4 {
            return invalid(format!("point count too small: {n}"));
        }
        let dx = length / n as f64;
        let nodes = (0..n).map(|j| -length / 2.0 + j as f64 * dx).collect();
        let k0 = 2.0 * PI / length;
        let xi: Vec<f64> = (0..n)
            .map(|m| {
                let mm = if m < n / 2 { m as i64 } else { m as i64 - n as i64 };
                k0 * mm as f64
            })
            .collect();
        let mut xi_odd = xi.clone();
        xi_odd[n / 2] = 0.0;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Self { length, n, dx, nodes, xi, xi_odd, fwd, inv })
    }

    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn wavenumbers(&self) -> &[f64] {
        &self.xi
    }
    pub fn xi_max(&self) -> f64 {
        PI * self.n as f64 / self.length
    }
    /// Index of the node at `x = 0`.
    pub fn center_index(&self) -> usize {
        self.n / 2
    }

    pub fn check_len(&self, f: &[f64], what: &str) -> Result<()> {
        if f.len() != self.n {
            return invalid(format!("{what}: length {} does not match grid size {}", f.len(), self.n));
        }
        Ok(())
    }

    pub fn forward(&self, f: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    /// Inverse transform with `1/N` normalization; returns the real part.
    pub fn inverse(&self, c: &[Complex64]) -> Vec<f64> {
        let mut buf = c.to_vec();
        self.inv.process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter().map(|z| z.re * s).collect()
    }

    /// Multiply by a real symbol sampled on the grid.
    pub fn apply_real(&self, f: &[f64], sym: &[f64]) -> Vec<f64> {
        let mut c = self.forward(f);
        for (z, w) in c.iter_mut().zip(sym) {
            *z *= w;
        }
        self.inverse(&c)
    }

    /// Symbol sampled on the grid with the Nyquist entry replaced by the mean
    /// of `s(xi_N)` and `s(-xi_N)`, so Hermitian symbols give real output.
    pub fn sample_symbol<F: Fn(f64) -> Complex64>(&self, symbol: F) -> Result<Vec<Complex64>> {
        let mut out: Vec<Complex64> = self.xi.iter().map(|&k| symbol(k)).collect();
        let h = self.n / 2;
        out[h] = 0.5 * (symbol(self.xi[h]) + symbol(-self.xi[h]));
        if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(WwError::NumericalDomain("symbol is not finite on the grid".into()));
        }
        Ok(out)
    }

    pub fn apply_multiplier<F: Fn(f64) -> Complex64>(&self, symbol: F, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f, "apply_multiplier")?;
        let s = self.sample_symbol(symbol)?;
        Ok(self.apply_sampled(&s, f))
    }

    pub fn apply_sampled(&self, s: &[Complex64], f: &[f64]) -> Vec<f64> {
        let mut c = self.forward(f);
        for (z, w) in c.iter_mut().zip(s) {
            *z *= w;
        }
        self.inverse(&c)
    }

    /// Real even symbol given as a function of the wavenumber.
    pub fn apply_even(&self, f: &[f64], symbol: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut c = self.forward(f);
        for (z, &k) in c.iter_mut().zip(&self.xi) {
            *z *= symbol(k);
        }
        self.inverse(&c)
    }

    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let mut c = self.forward(f);
        for (z, &k) in c.iter_mut().zip(&self.xi_odd) {
            *z *= Complex64::new(0.0, k);
        }
        self.inverse(&c)
    }

    pub fn derivative2(&self, f: &[f64]) -> Vec<f64> {
        self.apply_even(f, |k| -k * k)
    }

    /// `f(x - a)` by a spectral shift.
    pub fn shift(&self, f: &[f64], a: f64) -> Vec<f64> {
        let mut c = self.forward(f);
        let h = self.n / 2;
        for (m, z) in c.iter_mut().enumerate() {
            let k = self.xi[m];
            if m == h {
                *z *= (k * a).cos();
            } else {
                *z *= Complex64::from_polar(1.0, -k * a);
            }
        }
        self.inverse(&c)
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.dx * f.iter().sum::<f64>()
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.dx * f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn l2(&self, f: &[f64]) -> f64 {
        self.inner(f, f).sqrt()
    }

    pub fn xi_odd(&self) -> &[f64] {
        &self.xi_odd
    }

    /// Transforms of several rows of length `N` stored back to back.
    /// Two real rows share one complex transform.
    pub fn forward_rows(&self, data: &[f64], rows: usize) -> Vec<Complex64> {
        let n = self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); rows * n];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut r = 0;
        while r < rows {
            if r + 1 < rows {
                for j in 0..n {
                    buf[j] = Complex64::new(data[r * n + j], data[(r + 1) * n + j]);
                }
                self.fwd.process(&mut buf);
                for m in 0..n {
                    let zm = buf[m];
                    let zc = buf[(n - m) % n].conj();
                    out[r * n + m] = 0.5 * (zm + zc);
                    out[(r + 1) * n + m] = Complex64::new(0.0, -0.5) * (zm - zc);
                }
                r += 2;
            } else {
                for j in 0..n {
                    buf[j] = Complex64::new(data[r * n + j], 0.0);
                }
                self.fwd.process(&mut buf);
                out[r * n..(r + 1) * n].copy_from_slice(&buf);
                r += 1;
            }
        }
        out
    }

    /// Inverse of [`forward_rows`] for spectra of real rows.
    pub fn inverse_rows(&self, spec: &[Complex64], rows: usize) -> Vec<f64> {
        let n = self.n;
        let s = 1.0 / n as f64;
        let mut out = vec![0.0; rows * n];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut r = 0;
        let i = Complex64::new(0.0, 1.0);
        while r < rows {
            if r + 1 < rows {
                for m in 0..n {
                    buf[m] = spec[r * n + m] + i * spec[(r + 1) * n + m];
                }
                self.inv.process(&mut buf);
                for j in 0..n {
                    out[r * n + j] = buf[j].re * s;
                    out[(r + 1) * n + j] = buf[j].im * s;
                }
                r += 2;
            } else {
                buf.copy_from_slice(&spec[r * n..(r + 1) * n]);
                self.inv.process(&mut buf);
                for j in 0..n {
                    out[r * n + j] = buf[j].re * s;
                }
                r += 1;
            }
        }
        out
    }

    /// Apply one Hermitian symbol to many real rows in place.
    pub fn apply_rows(&self, data: &mut [f64], rows: usize, sym: &[Complex64]) {
        let n = self.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let s = 1.0 / n as f64;
        let mut r = 0;
        while r < rows {
            let pair = r + 1 < rows;
            for j in 0..n {
                let b = if pair { data[(r + 1) * n + j] } else { 0.0 };
                buf[j] = Complex64::new(data[r * n + j], b);
            }
            self.fwd.process(&mut buf);
            for (z, w) in buf.iter_mut().zip(sym) {
                *z *= w;
            }
            self.inv.process(&mut buf);
            for j in 0..n {
                data[r * n + j] = buf[j].re * s;
                if pair {
                    data[(r + 1) * n + j] = buf[j].im * s;
                }
            }
            r += if pair { 2 } else { 1 };
        }
    }

    /// Symbol `i xi` with the Nyquist entry removed.
    pub fn derivative_symbol(&self) -> Vec<Complex64> {
        self.xi_odd.iter().map(|&k| Complex64::new(0.0, k)).collect()
    }
}
