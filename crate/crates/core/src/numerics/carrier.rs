use serde::{Deserialize, Serialize};

use super::grid::Grid1D;

/// How the non-decaying odd part of a potential is carried on the periodic box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CarrierKind {
    /// `S(x) = 2x/L`: the potential is quasi-periodic with jump `2 amp` per
    /// period. Exact for the Dirichlet-Neumann operator since
    /// `G[eta](x) = -d_x eta`.
    #[default]
    Linear,
    /// Periodic odd profile equal to `+-1` on `w <= |x| <= 0.4 L`, with quintic
    /// C2 transitions at the origin and across the box edge.
    Blend,
}

/// Fixed odd profile `S` multiplying the ramp amplitude of a potential.
#[derive(Clone, Debug)]
pub struct RampCarrier {
    kind: CarrierKind,
    inner_width: f64,
    values: Vec<f64>,
    slope: Vec<f64>,
}

fn smoothstep5(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

fn smoothstep5_d(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

impl RampCarrier {
    pub fn new(grid: &Grid1D, kind: CarrierKind) -> Self {
        let l = grid.length();
        let w = l / 20.0;
        let (values, slope) = match kind {
            CarrierKind::Linear => (
                grid.nodes().iter().map(|x| 2.0 * x / l).collect(),
                vec![2.0 / l; grid.n()],
            ),
            CarrierKind::Blend => grid
                .nodes()
                .iter()
                .map(|&x| blend_profile(x, l, w))
                .unzip(),
        };
        Self { kind, inner_width: w, values, slope }
    }

    pub fn kind(&self) -> CarrierKind {
        self.kind
    }
    pub fn inner_width(&self) -> f64 {
        self.inner_width
    }
    /// `S` at the grid nodes.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    /// `S'` at the grid nodes, exact.
    pub fn slope(&self) -> &[f64] {
        &self.slope
    }

    /// `S(x - a)` at the grid nodes, evaluated from the closed form.
    pub fn shifted(&self, grid: &Grid1D, a: f64) -> Vec<f64> {
        let l = grid.length();
        grid.nodes()
            .iter()
            .map(|&x| match self.kind {
                CarrierKind::Linear => 2.0 * (x - a) / l,
                CarrierKind::Blend => {
                    let y = (x - a + 0.5 * l).rem_euclid(l) - 0.5 * l;
                    blend_profile(y, l, self.inner_width).0
                }
            })
            .collect()
    }
}

/// Blend profile and its derivative at `x` in `[-L/2, L/2)`.
fn blend_profile(x: f64, l: f64, w: f64) -> (f64, f64) {
    let sgn = if x < 0.0 { -1.0 } else { 1.0 };
    let a = x.abs();
    let (v, d) = if a <= w {
        let t = (x + w) / (2.0 * w);
        return (-1.0 + 2.0 * smoothstep5(t), smoothstep5_d(t) / w);
    } else if a <= 0.4 * l {
        (1.0, 0.0)
    } else {
        // Transition from +1 at 0.4L to -1 at 0.6L, odd about L/2.
        let t = (a - 0.4 * l) / (0.2 * l);
        (1.0 - 2.0 * smoothstep5(t), -2.0 * smoothstep5_d(t) / (0.2 * l))
    };
    (sgn * v, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blend_is_odd_and_bounded() {
        let g = Grid1D::new(100.0, 256).unwrap();
        let c = RampCarrier::new(&g, CarrierKind::Blend);
        let s = c.values();
        let n = g.n();
        for j in 1..n {
            assert!((s[j] + s[n - j]).abs() < 1e-14, "odd at {j}");
            assert!(s[j].abs() <= 1.0 + 1e-15);
        }
        assert!(s[0].abs() < 1e-14);
        assert!(c.inner_width() <= g.length() / 20.0);
        for (x, v) in g.nodes().iter().zip(s) {
            if *x >= c.inner_width() && *x <= 0.4 * g.length() {
                assert_eq!(*v, 1.0);
            }
        }
    }

    #[test]
    fn blend_slope_matches_differences() {
        let g = Grid1D::new(100.0, 4096).unwrap();
        let c = RampCarrier::new(&g, CarrierKind::Blend);
        let (s, d) = (c.values(), c.slope());
        let n = g.n();
        let h = g.dx();
        for j in 1..n - 1 {
            let fd = (s[j + 1] - s[j - 1]) / (2.0 * h);
            assert!((fd - d[j]).abs() < 1e-4, "{j}: {fd} vs {}", d[j]);
        }
    }

    fn second_difference_jump(n: usize) -> (f64, f64) {
        let g = Grid1D::new(100.0, n).unwrap();
        let c = RampCarrier::new(&g, CarrierKind::Blend);
        let s = c.values();
        let h2 = g.dx() * g.dx();
        let dd: Vec<f64> = (1..g.n() - 1).map(|j| (s[j + 1] - 2.0 * s[j] + s[j - 1]) / h2).collect();
        let max_jump = dd.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        let max_dd = dd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (max_jump, max_dd)
    }

    #[test]
    fn blend_second_differences_continuous() {
        // A C2 profile has jumps in second differences that shrink with the
        // spacing; a C1 kink would leave an O(1) jump.
        let (j1, m1) = second_difference_jump(4096);
        let (j2, _) = second_difference_jump(8192);
        assert!(j1 < 0.05 * m1, "{j1} vs {m1}");
        assert!(j2 < 0.6 * j1, "{j2} vs {j1}");
    }

    #[test]
    fn closed_form_shift_wraps() {
        let g = Grid1D::new(40.0, 64).unwrap();
        let c = RampCarrier::new(&g, CarrierKind::Blend);
        let s = c.shifted(&g, g.length());
        for (a, b) in s.iter().zip(c.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_carrier() {
        let g = Grid1D::new(64.0, 64).unwrap();
        let c = RampCarrier::new(&g, CarrierKind::Linear);
        assert!((c.values()[32]).abs() < 1e-15);
        assert!((c.slope()[5] - 2.0 / 64.0).abs() < 1e-15);
        assert!((c.values()[0] + 1.0).abs() < 1e-15);
    }
}
