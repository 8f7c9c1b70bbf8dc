#![allow(dead_code)]

use std::sync::OnceLock;

use wwlab::dn::{DnConfig, PhysicalParams};
use wwlab::evolution::Zakharov;
use wwlab::numerics::{make_grid, Grid1D};
use wwlab::solitary::{build_wave, NewtonOptions, SolitaryWave};

pub fn dn() -> DnConfig {
    DnConfig { tol: 1e-12, ..Default::default() }
}

pub fn params(eps: f64) -> PhysicalParams {
    PhysicalParams::from_eps_beta(1.0, 1.0, eps, 0.4).unwrap()
}

/// Box scaled with the wave width, `L = 12.8 / eps`.
pub fn grid_for(eps: f64, n: usize) -> Grid1D {
    make_grid(12.8 / eps, n).unwrap()
}

/// Refined wave at `eps = 0.1`, `beta = 0.4` on `L = 128`, `N = 256`, built once per binary.
pub fn default_wave() -> &'static (Zakharov, SolitaryWave) {
    static W: OnceLock<(Zakharov, SolitaryWave)> = OnceLock::new();
    W.get_or_init(|| build_wave(&params(0.1), &grid_for(0.1, 256), dn(), &NewtonOptions::default()).unwrap())
}

pub fn max_abs(f: &[f64]) -> f64 {
    f.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Same wave on `N = 512`, where the evolution filter leaves the wave's spectrum alone.
pub fn fine_wave() -> &'static (Zakharov, SolitaryWave) {
    static W: OnceLock<(Zakharov, SolitaryWave)> = OnceLock::new();
    W.get_or_init(|| build_wave(&params(0.1), &grid_for(0.1, 512), dn(), &NewtonOptions::default()).unwrap())
}

/// Slow wave `eps = 0.15` and fast wave `eps = 0.1` in the fluid `g = H = 1`,
/// `b = 0.4 / 1.01`, on `L = 128`, `N = 256`, separated by `h = 20`.
pub fn pair() -> &'static wwlab::multi::TwoSolitonConfig {
    static P: OnceLock<wwlab::multi::TwoSolitonConfig> = OnceLock::new();
    P.get_or_init(|| {
        let grid = make_grid(128.0, 256).unwrap();
        wwlab::multi::TwoSolitonConfig::build(1.0, 0.4 / 1.01, 1.0, 0.15, 0.1, &grid, 20.0, dn(), &NewtonOptions::default()).unwrap()
    })
}

/// Localized random pair with the mean of the first component removed.
pub fn mean_free_data(grid: &Grid1D, seed: u64, center: f64, width: f64) -> (Vec<f64>, Vec<f64>) {
    wwlab::numerics::random::linearized_data(grid, seed, 1.5, center, width)
}
