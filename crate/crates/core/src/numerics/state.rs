use super::carrier::{CarrierKind, RampCarrier};
use super::grid::Grid1D;
use crate::error::{invalid, Result};

/// Surface elevation and potential trace. The potential is
/// `phi_ramp_amp * S + phi_periodic` with `S` the carrier profile.
#[derive(Clone, Debug)]
pub struct SurfaceState {
    pub grid: Grid1D,
    pub eta: Vec<f64>,
    pub phi_periodic: Vec<f64>,
    pub phi_ramp_amp: f64,
    pub carrier: CarrierKind,
}

impl SurfaceState {
    pub fn new(grid: &Grid1D, eta: Vec<f64>, phi_periodic: Vec<f64>, amp: f64, carrier: CarrierKind) -> Result<Self> {
        grid.check_len(&eta, "eta")?;
        grid.check_len(&phi_periodic, "phi_periodic")?;
        if !amp.is_finite() || eta.iter().chain(&phi_periodic).any(|v| !v.is_finite()) {
            return invalid("surface state contains non-finite values");
        }
        Ok(Self { grid: grid.clone(), eta, phi_periodic, phi_ramp_amp: amp, carrier })
    }

    pub fn rest(grid: &Grid1D) -> Self {
        Self {
            grid: grid.clone(),
            eta: vec![0.0; grid.n()],
            phi_periodic: vec![0.0; grid.n()],
            phi_ramp_amp: 0.0,
            carrier: CarrierKind::Linear,
        }
    }

    pub fn ramp(&self) -> RampCarrier {
        RampCarrier::new(&self.grid, self.carrier)
    }

    /// Full potential at the nodes.
    pub fn phi_total(&self) -> Vec<f64> {
        reconstruct_phi(self, &self.ramp())
    }

    /// `d_x phi`, exact for the carrier part.
    pub fn phi_x(&self) -> Vec<f64> {
        let s = self.ramp();
        let d = self.grid.derivative(&self.phi_periodic);
        d.iter().zip(s.slope()).map(|(a, b)| a + self.phi_ramp_amp * b).collect()
    }

    pub fn eta_x(&self) -> Vec<f64> {
        self.grid.derivative(&self.eta)
    }

    /// Non-cavitation check `depth + min eta > 0`.
    pub fn check_admissible(&self, depth: f64) -> Result<()> {
        let m = self.eta.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(depth + m > 0.0) {
            return invalid(format!("cavitation: depth + min(eta) = {}", depth + m));
        }
        Ok(())
    }

    /// The state translated by `a`: `U(x - a)`, with the ramp amplitude kept.
    pub fn translate(&self, a: f64) -> Self {
        let g = &self.grid;
        let eta = g.shift(&self.eta, a);
        let mut p = g.shift(&self.phi_periodic, a);
        match self.carrier {
            CarrierKind::Linear => {
                let off = 2.0 * a * self.phi_ramp_amp / g.length();
                p.iter_mut().for_each(|v| *v -= off);
            }
            CarrierKind::Blend => {
                let s = self.ramp();
                let ss = s.shifted(g, a);
                for ((v, a1), a0) in p.iter_mut().zip(&ss).zip(s.values()) {
                    *v += self.phi_ramp_amp * (a1 - a0);
                }
            }
        }
        Self { eta, phi_periodic: p, ..self.clone() }
    }

    /// `self + other` on the same grid and carrier; ramp amplitudes add.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid || self.carrier != other.carrier {
            return invalid("states live on different grids or carriers");
        }
        Ok(Self {
            grid: self.grid.clone(),
            eta: self.eta.iter().zip(&other.eta).map(|(a, b)| a + b).collect(),
            phi_periodic: self.phi_periodic.iter().zip(&other.phi_periodic).map(|(a, b)| a + b).collect(),
            phi_ramp_amp: self.phi_ramp_amp + other.phi_ramp_amp,
            carrier: self.carrier,
        })
    }
}

/// `phi = amp * S + phi_periodic`.
pub fn reconstruct_phi(u: &SurfaceState, carrier: &RampCarrier) -> Vec<f64> {
    u.phi_periodic
        .iter()
        .zip(carrier.values())
        .map(|(p, s)| p + u.phi_ramp_amp * s)
        .collect()
}
