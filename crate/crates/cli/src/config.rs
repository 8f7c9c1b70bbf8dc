//! JSON run configuration. Every section has defaults; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wwlab::dn::{DnConfig, PhysicalParams};
use wwlab::numerics::{make_grid, Grid1D};
use wwlab::{Result, WwError};

/// Environment variable that overrides the output directory of the config file.
pub const OUT_ENV: &str = "WWLAB_OUT";

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Free label copied into the summary.
    pub experiment: String,
    pub physics: Physics,
    pub grid: GridSpec,
    /// Relative residual target of the Dirichlet-Neumann solves.
    pub dn_tol: f64,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    /// Stem of a saved wave (`<stem>.bin` + `<stem>.json`) used by `evolve` instead of building one.
    pub wave: Option<PathBuf>,
    pub evolve: EvolveKnobs,
    pub dn_check: DnCheckKnobs,
    pub pair: PairKnobs,
    pub spectrum: SpectrumKnobs,
    pub lingrow: LingrowKnobs,
    pub correct: CorrectKnobs,
    pub interaction: InteractionKnobs,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: "default".into(),
            physics: Physics::default(),
            grid: GridSpec::default(),
            dn_tol: 1e-12,
            seed: 0,
            out_dir: None,
            wave: None,
            evolve: EvolveKnobs::default(),
            dn_check: DnCheckKnobs::default(),
            pair: PairKnobs::default(),
            spectrum: SpectrumKnobs::default(),
            lingrow: LingrowKnobs::default(),
            correct: CorrectKnobs::default(),
            interaction: InteractionKnobs::default(),
            tolerances: Tolerances::default(),
        }
    }
}

/// Fluid and wave. Give either `beta` (with `g`, `depth`, `eps`) or the surface tension `b`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Physics {
    pub g: f64,
    pub depth: f64,
    pub eps: f64,
    pub beta: Option<f64>,
    pub b: Option<f64>,
}

impl Default for Physics {
    fn default() -> Self {
        Self { g: 1.0, depth: 1.0, eps: 0.1, beta: None, b: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub length: f64,
    pub n: usize,
    pub nz: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { length: 128.0, n: 256, nz: 32 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveKnobs {
    /// Defaults to ten box units of travel, `10 / c`.
    pub t_final: Option<f64>,
    pub dt: f64,
    pub checkpoint_stride: usize,
}

impl Default for EvolveKnobs {
    fn default() -> Self {
        Self { t_final: None, dt: 0.05, checkpoint_stride: 20 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DnCheckKnobs {
    /// Amplitude of the `sech^2` test surface; 0 checks the flat surface only.
    pub surface_amplitude: f64,
    pub pairs: usize,
}

impl Default for DnCheckKnobs {
    fn default() -> Self {
        Self { surface_amplitude: 0.05, pairs: 20 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairKnobs {
    pub eps1: f64,
    pub eps2: f64,
    pub h: f64,
    pub times: Vec<f64>,
    pub separations: Vec<f64>,
}

impl Default for PairKnobs {
    fn default() -> Self {
        Self {
            eps1: 0.15,
            eps2: 0.1,
            h: 20.0,
            times: (0..7).map(|k| 200.0 * k as f64).collect(),
            separations: vec![15.0, 20.0, 25.0, 30.0],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumKnobs {
    pub ks: Vec<f64>,
    pub length: f64,
    pub n: usize,
}

impl Default for SpectrumKnobs {
    fn default() -> Self {
        Self { ks: vec![-0.01, 0.005, 0.01, 0.05, 0.3], length: 128.0, n: 128 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LingrowKnobs {
    pub t_final: f64,
    pub dt: f64,
    pub samples: usize,
    /// Also measure the `E_1` drift constant at `h` and `2h`.
    pub drift_check: bool,
}

impl Default for LingrowKnobs {
    fn default() -> Self {
        Self { t_final: 400.0, dt: 0.05, samples: 5, drift_check: true }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrectKnobs {
    pub t_max: f64,
    pub dt: f64,
}

impl Default for CorrectKnobs {
    fn default() -> Self {
        Self { t_max: 1200.0, dt: 0.1 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InteractionKnobs {
    pub eps: f64,
    pub eps0: f64,
    pub c1: f64,
    pub c2: f64,
    pub h_max: f64,
    pub t_max: f64,
    pub step: f64,
}

impl Default for InteractionKnobs {
    fn default() -> Self {
        Self { eps: 1.0, eps0: 0.5, c1: 1.0, c2: 1.1, h_max: 40.0, t_max: 100.0, step: 1.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub newton_residual: f64,
    pub parity: f64,
    pub shape_error: f64,
    pub energy_drift: f64,
    pub dn_symbol: f64,
    pub dn_constants: f64,
    pub dn_symmetry: f64,
    pub shape_order: f64,
    pub fit_r2: f64,
    pub rate_consistency: f64,
    pub growth_margin: f64,
    pub drift_ratio: f64,
    pub correction_defect: f64,
    pub correction_decay: f64,
    pub spectrum_symmetry: f64,
    pub neutral_floor: f64,
    /// Relative change that the baseline comparison flags.
    pub baseline_change: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            newton_residual: 1e-9,
            parity: 1e-8,
            shape_error: 1e-5,
            energy_drift: 1e-8,
            dn_symbol: 1e-8,
            dn_constants: 1e-12,
            dn_symmetry: 1e-9,
            shape_order: 1.9,
            fit_r2: 0.95,
            rate_consistency: 0.3,
            growth_margin: 1.5,
            drift_ratio: 0.4,
            correction_defect: 1e-6,
            correction_decay: 0.8,
            spectrum_symmetry: 1e-6,
            neutral_floor: 1e-6,
            baseline_change: 0.05,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| WwError::Format(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Physical admissibility and basic shape checks, before any work is done.
    pub fn validate(&self) -> Result<()> {
        self.params()?.validate()?;
        if self.grid.n < 8 || self.grid.n % 2 != 0 || !(self.grid.length > 0.0) || self.grid.nz < 4 {
            return Err(WwError::InvalidArgument(format!("bad grid {:?}", self.grid)));
        }
        if !(self.dn_tol > 0.0) {
            return Err(WwError::InvalidArgument("dn_tol must be positive".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<PhysicalParams> {
        let p = &self.physics;
        match (p.beta, p.b) {
            (Some(_), Some(_)) => Err(WwError::InvalidArgument("give either physics.beta or physics.b, not both".into())),
            (None, Some(b)) => PhysicalParams::from_fluid(p.g, b, p.depth, p.eps),
            (beta, None) => PhysicalParams::from_eps_beta(p.g, p.depth, p.eps, beta.unwrap_or(0.4)),
        }
    }

    pub fn make_grid(&self) -> Result<Grid1D> {
        make_grid(self.grid.length, self.grid.n)
    }

    pub fn dn(&self) -> DnConfig {
        DnConfig { nz: self.grid.nz, tol: self.dn_tol, ..Default::default() }
    }

    /// `--out` beats the environment, which beats the config file.
    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        if let Some(p) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
            return PathBuf::from(p);
        }
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("wwlab-out"))
    }
}
