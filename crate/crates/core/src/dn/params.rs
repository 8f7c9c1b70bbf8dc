use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Fluid and wave-speed parameters. `alpha`, `beta` and `epsilon` are derived.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub g: f64,
    /// Surface-tension coefficient.
    pub b: f64,
    pub depth: f64,
    /// Wave speed.
    pub c: f64,
}

impl PhysicalParams {
    /// Wave family member with `alpha = 1 + eps^2` and the given `beta`.
    pub fn from_eps_beta(g: f64, depth: f64, eps: f64, beta: f64) -> Result<Self> {
        let c = (g * depth / (1.0 + eps * eps)).sqrt();
        let p = Self { g, b: beta * depth * c * c, depth, c };
        p.validate()?;
        Ok(p)
    }

    /// Fixed fluid `(g, b, H)`; the speed is chosen so that `alpha = 1 + eps^2`.
    pub fn from_fluid(g: f64, b: f64, depth: f64, eps: f64) -> Result<Self> {
        let c = (g * depth / (1.0 + eps * eps)).sqrt();
        let p = Self { g, b, depth, c };
        p.validate()?;
        Ok(p)
    }

    /// Same fluid at a different speed parameter.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::from_fluid(self.g, self.b, self.depth, eps)
    }

    pub fn alpha(&self) -> f64 {
        self.g * self.depth / (self.c * self.c)
    }
    pub fn beta(&self) -> f64 {
        self.b / (self.depth * self.c * self.c)
    }
    pub fn epsilon(&self) -> f64 {
        (self.alpha() - 1.0).max(0.0).sqrt()
    }

    /// Leading-order decay rate of the solitary tail, `eps / (H sqrt(beta - 1/3))`.
    pub fn tail_rate(&self) -> f64 {
        self.epsilon() / (self.depth * (self.beta() - 1.0 / 3.0).sqrt())
    }

    /// Dimensionless form: unit depth and speed, `g -> alpha`, `b -> beta`.
    pub fn scaled(&self) -> Self {
        Self { g: self.alpha(), b: self.beta(), depth: 1.0, c: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g > 0.0 && self.depth > 0.0 && self.c > 0.0 && self.b >= 0.0) {
            return invalid(format!("non-physical parameters {self:?}"));
        }
        if !(self.alpha() > 1.0) {
            return invalid(format!("need alpha > 1, got {}", self.alpha()));
        }
        if !(self.beta() > 1.0 / 3.0) {
            return invalid(format!("need beta > 1/3, got {}", self.beta()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consistency() {
        let p = PhysicalParams::from_eps_beta(1.0, 1.0, 0.1, 0.4).unwrap();
        assert!((p.c - 0.995037190209989).abs() < 1e-14);
        assert!((p.alpha() - 1.01).abs() < 1e-14);
        assert!((p.beta() - 0.4).abs() < 1e-14);
        assert!((p.c * p.c - p.g * p.depth / p.alpha()).abs() < 1e-14);
        assert!((p.b - p.beta() * p.depth * p.c * p.c).abs() < 1e-14);
        assert!(PhysicalParams::from_eps_beta(1.0, 1.0, 0.1, 0.3).is_err());
    }

    #[test]
    fn fluid_constructor_shares_surface_tension() {
        let a = PhysicalParams::from_eps_beta(1.0, 1.0, 0.1, 0.4).unwrap();
        let b = a.with_eps(0.15).unwrap();
        assert_eq!(a.b, b.b);
        assert!(b.c < a.c);
        assert!((b.epsilon() - 0.15).abs() < 1e-13);
    }
}
