//! Smooth partition of unity separating the two waves.

use serde::{Deserialize, Serialize};

use super::TwoSolitonConfig;

/// Degree-9 step: 1 for `s <= 0`, 0 for `s >= 1`, four continuous derivatives.
pub fn smooth_step(s: f64) -> f64 {
    1.0 - rise(s)
}

/// Regularized incomplete beta `I_s(5, 5)`, clamped to `[0, 1]`.
fn rise(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        (s.powi(5) * (126.0 + s * (-420.0 + s * (540.0 + s * (-315.0 + 70.0 * s))))).clamp(0.0, 1.0)
    }
}

fn rise_slope(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        630.0 * (s * (1.0 - s)).powi(4)
    }
}

/// `chi1, chi2` with `chi1^2 + chi2^2 = 1` and their `x` derivatives on the grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CutoffPair {
    pub t: f64,
    pub h: f64,
    /// Start of the transition, `h/4` right of where the slow wave started, moving at the mean speed.
    pub start: f64,
    pub chi1: Vec<f64>,
    pub chi2: Vec<f64>,
    pub dchi1: Vec<f64>,
    pub dchi2: Vec<f64>,
}

impl CutoffPair {
    pub fn max_slope(&self) -> f64 {
        self.dchi1.iter().chain(&self.dchi2).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |chi1^2 + chi2^2 - 1|`.
    pub fn unity_defect(&self) -> f64 {
        self.chi1.iter().zip(&self.chi2).fold(0.0, |m, (a, b)| m.max((a * a + b * b - 1.0).abs()))
    }
}

/// Cutoffs at time `t`. The transition from wave 1 to wave 2 spans
/// `[start, start + h/4]`; on the periodic box a second transition of the
/// same width sits half a box away and returns to wave 1.
pub fn cutoffs(cfg: &TwoSolitonConfig, t: f64) -> CutoffPair {
    let grid = cfg.grid();
    let l = grid.length();
    let h = cfg.h;
    let w = h / 4.0;
    let start = cfg.x1 + w + (cfg.mean_speed() - cfg.frame_speed) * t;
    let mid = start + w / 2.0;
    let n = grid.n();
    let (mut chi1, mut chi2, mut dchi1, mut dchi2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for (j, &x) in grid.nodes().iter().enumerate() {
        let y = (x - mid + l / 2.0).rem_euclid(l) - l / 2.0;
        let s1 = (y + w / 2.0) / w;
        let s2 = (y - l / 2.0 + w) / w;
        let a = smooth_step(s1) + rise(s2);
        let da = (-rise_slope(s1) + rise_slope(s2)) / w;
        let b = 1.0 - a;
        let norm = (a * a + b * b).sqrt();
        let n3 = norm * norm * norm;
        chi1[j] = a / norm;
        chi2[j] = b / norm;
        // d(a / norm)/da = b / norm^3 and d(b / norm)/da = -a / norm^3 when a + b = 1.
        dchi1[j] = b / n3 * da;
        dchi2[j] = -a / n3 * da;
    }
    CutoffPair { t, h, start, chi1, chi2, dchi1, dchi2 }
}

/// `(sup e^{-eps|x - x1(t)|} chi2, sup e^{-eps|x - x2(t)|} chi1)` with periodic distances.
pub fn overlap_sup(cfg: &TwoSolitonConfig, t: f64, eps: f64) -> (f64, f64) {
    let grid = cfg.grid();
    let l = grid.length();
    let cut = cutoffs(cfg, t);
    let (p1, p2) = cfg.positions(t);
    let dist = |x: f64, p: f64| ((x - p + l / 2.0).rem_euclid(l) - l / 2.0).abs();
    let mut s = (0.0f64, 0.0f64);
    for (j, &x) in grid.nodes().iter().enumerate() {
        s.0 = s.0.max((-eps * dist(x, p1)).exp() * cut.chi2[j]);
        s.1 = s.1.max((-eps * dist(x, p2)).exp() * cut.chi1[j]);
    }
    s
}
