use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::Grid1D;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random real field with Gaussian-weighted Fourier modes, spectrum cut at
/// `|xi| <= kmax` and unit L2-ish amplitude. The mean is zero.
pub fn smooth_field<R: Rng>(grid: &Grid1D, rng: &mut R, kmax: f64) -> Vec<f64> {
    let mut f = vec![0.0; grid.n()];
    let k0 = 2.0 * std::f64::consts::PI / grid.length();
    let mmax = ((kmax / k0).floor() as usize).min(grid.n() / 2 - 1);
    for m in 1..=mmax {
        let k = k0 * m as f64;
        let w = (-(k / kmax).powi(2)).exp();
        let a: f64 = rng.gen_range(-1.0..1.0) * w;
        let b: f64 = rng.gen_range(-1.0..1.0) * w;
        for (v, x) in f.iter_mut().zip(grid.nodes()) {
            *v += a * (k * x).cos() + b * (k * x).sin();
        }
    }
    let s = grid.l2(&f).max(1e-300);
    f.iter_mut().for_each(|v| *v /= s);
    f
}

/// Random smooth field multiplied by a Gaussian envelope of width `width`
/// centered at `center`.
pub fn localized_field<R: Rng>(grid: &Grid1D, rng: &mut R, kmax: f64, center: f64, width: f64) -> Vec<f64> {
    let f = smooth_field(grid, rng, kmax);
    let mut out: Vec<f64> = f
        .iter()
        .zip(grid.nodes())
        .map(|(v, x)| v * (-((x - center) / width).powi(2)).exp())
        .collect();
    let s = grid.l2(&out).max(1e-300);
    out.iter_mut().for_each(|v| *v /= s);
    out
}

/// Localized random pair `(u1, u2)` for linearized runs. The mean of `u1` is
/// removed: on the periodic box it would drive the mean of `u2` linearly in time.
pub fn linearized_data(grid: &Grid1D, seed: u64, kmax: f64, center: f64, width: f64) -> (Vec<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let mut u1 = localized_field(grid, &mut r, kmax, center, width);
    let u2 = localized_field(grid, &mut r, kmax, center, width);
    let m = u1.iter().sum::<f64>() / u1.len() as f64;
    u1.iter_mut().for_each(|v| *v -= m);
    (u1, u2)
}
