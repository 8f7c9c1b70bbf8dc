//! One function per subcommand. Each writes its artifacts into `out` and
//! fills the summary; failed checks are recorded there, errors are returned.

use std::path::Path;

use wwlab::dn::{shape_derivative, StripSolver};
use wwlab::evolution::{evolve, EvolutionConfig, Zakharov};
use wwlab::multi::{
    corrected_defect, decay_in_separation, decay_in_time, evolve_linearized_about_m, first_order_correction, interaction_integral,
    measured_epsilon0, residual_rm, OperatorLattice, TwoSolitonConfig,
};
use wwlab::numerics::io::{write_json, write_table_csv};
use wwlab::numerics::norms::apply_pm;
use wwlab::numerics::random::{linearized_data, rng, smooth_field};
use wwlab::numerics::{CarrierKind, Grid1D, SurfaceState};
use wwlab::solitary::{build_wave, NewtonOptions, SolitaryWave};
use wwlab::stability::{coercivity_rayleigh, transverse_scan, unconstrained_count, write_spectra_csv, Linearization};
use wwlab::Result;

use crate::config::RunConfig;
use crate::summary::{Relation, Summary};

fn max_abs(f: &[f64]) -> f64 {
    f.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn wave(cfg: &RunConfig) -> Result<(Zakharov, SolitaryWave)> {
    build_wave(&cfg.params()?, &cfg.make_grid()?, cfg.dn(), &NewtonOptions::default())
}

/// Largest deviation from evenness of `eta` and oddness of the potential about the wave center.
fn parity_defect(w: &SolitaryWave) -> f64 {
    let centered = if w.center == 0.0 { w.state.clone() } else { w.state.translate(-w.center) };
    let n = centered.eta.len();
    let c = n / 2;
    let phi = centered.phi_total();
    let mut d = 0.0f64;
    for i in 1..c {
        d = d.max((centered.eta[c + i] - centered.eta[c - i]).abs());
        d = d.max((phi[c + i] - phi[c] + phi[c - i] - phi[c]).abs());
    }
    d
}

fn write_state(path: &Path, grid: &Grid1D, u: &SurfaceState) -> Result<()> {
    let phi = u.phi_total();
    let rows: Vec<Vec<f64>> = (0..grid.n()).map(|j| vec![grid.nodes()[j], u.eta[j], phi[j]]).collect();
    write_table_csv(path, &["x", "eta", "phi"], &rows)
}

pub fn solitary(cfg: &RunConfig, out: &Path, s: &mut Summary) -> Result<()> {
    let (model, w) = wave(cfg)?;
    let tol = &cfg.tolerances;
    s.check("newton_residual", w.residual_norm, Relation::Below, tol.newton_residual);
    s.check("parity_defect", parity_defect(&w), Relation::Below, tol.parity);
    s.record("speed", model.params.c);
    s.record("alpha", model.params.alpha());
    s.record("beta", model.params.beta());
    s.record("newton_iterations", w.iterations as f64);
    s.record("trough", w.state.eta.iter().copied().fold(f64::INFINITY, f64::min));
    s.record("ramp_amplitude", w.state.phi_ramp_amp);
    write_state(&out.join("wave.csv"), w.grid(), &w.state)?;
    s.artifact("wave.csv");
    w.save(&out.join("wave"))?;
    s.artifact("wave.bin");
    s.artifact("wave.json");
    Ok(())
}

pub fn evolve_wave(cfg: &RunConfig, out: &Path, s: &mut Summary) -> Result<()> {
    let (model, w) = match &cfg.wave {
        Some(stem) => {
            let w = SolitaryWave::load(stem)?;
            (Zakharov::new(w.grid(), w.params, cfg.dn())?, w)
        }
        None => wave(cfg)?,
    };
    let c = model.params.c;
    let knobs = &cfg.evolve;
    let ecfg = EvolutionConfig {
        dt: knobs.dt,
        t_final: knobs.t_final.unwrap_or(10.0 / c),
        checkpoint_stride: knobs.checkpoint_stride,
        ..Default::default()
    };
    let tr = evolve(&model, &w.state, &ecfg)?;
    s.warnings.extend(tr.warnings.iter().cloned());
    let tr = tr.into_result()?;
    let grid = model.grid();
    let back = grid.shift(&tr.final_state.eta, -c * tr.final_time);
    s.check("shape_error", max_diff(&back, &w.state.eta), Relation::Below, cfg.tolerances.shape_error);
    let drift = tr.relative_drift();
    s.check("energy_drift", drift.energy, Relation::AtMost, cfg.tolerances.energy_drift);
    s.record("mass_drift", drift.mass);
    s.record("momentum_drift", drift.momentum);
    s.record("final_time", tr.final_time);
    s.record("steps", tr.steps as f64);
    let rows: Vec<Vec<f64>> = tr.times.iter().zip(&tr.conserved).map(|(t, q)| vec![*t, q.energy, q.mass, q.momentum]).collect();
    write_table_csv(&out.join("conserved.csv"), &["t", "energy", "mass", "momentum"], &rows)?;
    s.artifact("conserved.csv");
    write_state(&out.join("final.csv"), grid, &tr.final_state)?;
    s.artifact("final.csv");
    Ok(())
}

pub fn dn_check(cfg: &RunConfig, out: &Path, s: &mut Summary) -> Result<()> {
    let grid = cfg.make_grid()?;
    let depth = cfg.physics.depth;
    let tol = &cfg.tolerances;
    let solver = StripSolver::new(&grid, depth, 0.0, cfg.dn())?;
    let mut r = rng(cfg.seed);

    // Flat surface against the exact multiplier, mode by mode.
    let psi = smooth_field(&grid, &mut r, 0.5 * grid.xi_max());
    let flat = solver.problem(&vec![0.0; grid.n()])?.apply(&psi)?;
    let exact = grid.apply_even(&psi, |xi| xi * (depth * xi).tanh());
    s.check("flat_symbol_error", max_diff(&flat, &exact) / max_abs(&exact), Relation::Below, tol.dn_symbol);
    let (ci, co) = (grid.forward(&psi), grid.forward(&flat));
    let floor = 1e-8 * ci.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let rows: Vec<Vec<f64>> = (1..grid.n() / 2)
        .filter(|&m| ci[m].norm() > floor)
        .map(|m| {
            let xi = grid.wavenumbers()[m];
            vec![xi, xi * (depth * xi).tanh(), (co[m] / ci[m]).re]
        })
        .collect();
    write_table_csv(&out.join("symbol.csv"), &["xi", "exact", "measured"], &rows)?;
    s.artifact("symbol.csv");

    let amp = cfg.dn_check.surface_amplitude;
    let eta: Vec<f64> = grid.nodes().iter().map(|x| amp / (x / 2.0).cosh().powi(2)).collect();
    let p = solver.problem(&eta)?;
    s.check("constants_annihilated", max_abs(&p.apply(&vec![1.0; grid.n()])?), Relation::Below, tol.dn_constants);

    let mut worst = 0.0f64;
    let mut min_ratio = f64::INFINITY;
    let mut pair_rows = Vec::new();
    for k in 0..cfg.dn_check.pairs {
        let u = smooth_field(&grid, &mut r, 3.0);
        let v = smooth_field(&grid, &mut r, 3.0);
        let (gu, gv) = (p.apply(&u)?, p.apply(&v)?);
        let (pu, pv) = (grid.l2(&apply_pm(&grid, &u)), grid.l2(&apply_pm(&grid, &v)));
        let defect = (grid.inner(&gu, &v) - grid.inner(&u, &gv)).abs() / (pu * pv);
        let ratio = grid.inner(&gu, &u) / (pu * pu);
        worst = worst.max(defect);
        min_ratio = min_ratio.min(ratio);
        pair_rows.push(vec![k as f64, defect, ratio]);
    }
    write_table_csv(&out.join("pairs.csv"), &["pair", "symmetry_defect", "coercivity_ratio"], &pair_rows)?;
    s.artifact("pairs.csv");
    s.check("symmetry_defect", worst, Relation::AtMost, tol.dn_symmetry);
    s.check("coercivity_ratio", min_ratio, Relation::Above, 0.0);

    // Shape derivative against central differences at two step sizes. The
    // test fields widen on coarse grids so that discretization error stays
    // below the difference-quotient error being measured.
    let w = (grid.dx() / 0.25).max(1.0);
    let psi: Vec<f64> = grid.nodes().iter().map(|x| (x / (2.0 * w)).sin() * (-(x * x) / (8.0 * w * w)).exp()).collect();
    let zeta: Vec<f64> = grid.nodes().iter().map(|x| (-(x - w).powi(2) / (3.0 * w * w)).exp()).collect();
    let u = SurfaceState::new(&grid, eta.clone(), psi.clone(), 0.0, CarrierKind::Linear)?;
    let exact = shape_derivative(&p, &u, &zeta)?;
    let scale = max_abs(&exact);
    let fd = |h: f64| -> Result<f64> {
        let shifted = |sg: f64| -> Result<Vec<f64>> {
            let e: Vec<f64> = eta.iter().zip(&zeta).map(|(a, b)| a + sg * h * b).collect();
            solver.problem(&e)?.apply(&psi)
        };
        let (a, b) = (shifted(1.0)?, shifted(-1.0)?);
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect();
        Ok(max_diff(&d, &exact) / scale)
    };
    let (e1, e2) = (fd(0.04)?, fd(0.02)?);
    s.record("shape_fd_error", e2);
    s.check("shape_derivative_order", (e1 / e2).log2(), Relation::AtLeast, tol.shape_order);
    Ok(())
}

fn pair_config(cfg: &RunConfig) -> Result<TwoSolitonConfig> {
    let p = cfg.params()?;
    let k = &cfg.pair;
    TwoSolitonConfig::build(p.g, p.b, p.depth, k.eps1, k.eps2, &cfg.make_grid()?, k.h, cfg.dn(), &NewtonOptions::default())
}

pub fn residual(cfg: &RunConfig, out: &Path, s: &mut Summary) -> Result<()> {
    let pc = pair_config(cfg)?;
    let tol = &cfg.tolerances;
    let ft = decay_in_time(&pc, &cfg.pair.times)?;
    let fh = decay_in_separation(&pc, &cfg.pair.separations)?;
    s.warnings.extend(ft.warning.iter().chain(&fh.warning).cloned());
    let (c1, c2) = pc.speeds();
    let dc = c2 - c1;
    let d_min = pc.wave1.params.tail_rate().min(pc.wave2.params.tail_rate());
    s.record("defect_at_start", residual_rm(&pc, 0.0)?.e0());
    s.record("eps0", measured_epsilon0(&pc, &ft));
    s.record("rate_time", ft.rate);
    s.record("rate_separation", fh.rate);
    s.check("rate_time_sign", ft.rate, Relation::Below, 0.0);
    s.check("rate_separation_sign", fh.rate, Relation::Below, 0.0);
    s.check("r2_time", ft.r2, Relation::AtLeast, tol.fit_r2);
    s.check("r2_separation", fh.r2, Relation::AtLeast, tol.fit_r2);
    s.check("rate_time_vs_tail", ft.rate.abs() / (0.5 * d_min * dc), Relation::AtLeast, 1.0);
    let consistency = (fh.rate.abs() - ft.rate.abs() / dc).abs() / (ft.rate.abs() / dc);
    s.check("rate_consistency", consistency, Relation::Below, tol.rate_consistency);
    ft.write_csv(&out.join("decay_time.csv"))?;
    fh.write_csv(&out.join("decay_separation.csv"))?;
    write_json(&out.join("fits.json"), &serde_json::json!({ "time": ft, "separation": fh }))?;
    for a in ["decay_time.csv", "decay_separation.csv", "fits.json"] {
        s.artifact(a);
    }
    Ok(())
}

pub fn spectrum(cfg: &RunConfig, out: &Path, s: &mut Summary) -> Result<()> {
    let p = cfg.params()?;
    let k = &cfg.spectrum;
    let scan = transverse_scan(p.epsilon(), p.beta(), k.length, k.n, &k.ks, cfg.dn(), &NewtonOptions::default())?;
    let tol = &cfg.tolerances;
    s.check("zero_mode_real_part", scan.zero_mode_max_real / scan.zero_mode_scale, Relation::Below, tol.neutral_floor);
    s.check("pm_symmetry", scan.max_pm_defect, Relation::Below, tol.spectrum_symmetry);
    let unstable = scan.points.iter().filter(|b| b.unstable && b.k != 0.0).count();
    s.check("unstable_points", unstable as f64, Relation::AtLeast, 1.0);
    let kmax = k.ks.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    s.check("band_edge", scan.band_edge.unwrap_or(f64::NAN), Relation::Below, kmax);
    s.record("spurious_points", scan.points.iter().filter(|b| b.spurious).count() as f64);
    let mut sym = 0.0f64;
    for b in &scan.points {
        if let (Some(a), Some(m)) = (scan.sigma(b.k), scan.sigma(-b.k)) {
            sym = sym.max((a - m).abs() / a.abs());
        }
    }
    s.record("k_symmetry_defect", sym);
    write_spectra_csv(&out.join("spectra.csv"), &scan)?;
    write_json(&out.join("scan.json"), &scan)?;
    s.artifact("spectra.csv");
    s.artifact("scan.json");
    Ok(())
}

pub fn coercivity(cfg: &RunConfig, out: &Path, s: &mut Summary) -> Result<()> {
    let (model, w) = wave(cfg)?;
    let lin = Linearization::new(&model, &w.state)?;
    let lc = lin.lc();
    let rep = coercivity_rayleigh(&lc, &lin)?;
    s.check("constrained_minimum", rep.min_value, Relation::Above, 0.0);
    let (count, full) = unconstrained_count(&lc, &lin.grid, 1e-8)?;
    s.check("nonpositive_directions", count as f64, Relation::AtMost, 2.0);
    let rows: Vec<Vec<f64>> = full.spectrum.iter().take(20).enumerate().map(|(i, v)| vec![i as f64, *v]).collect();
    write_table_csv(&out.join("coercivity_spectrum.csv"), &["index", "value"], &rows)?;
    s.artifact("coercivity_spectrum.csv");
    Ok(())
}

pub fn lingrow(cfg: &RunConfig, out: &Path, s: &mut Summary) -> Result<()> {
    let pc = pair_config(cfg)?;
    let k = &cfg.lingrow;
    let eps0 = measured_epsilon0(&pc, &decay_in_time(&pc, &cfg.pair.times)?);
    let (c1, c2) = pc.speeds();
    let bound = cfg.tolerances.growth_margin * eps0 * (c2 - c1) / 2.0;
    s.record("eps0", eps0);
    let grid = pc.grid().clone();
    let lattice = OperatorLattice::build(&pc, 0.0, k.t_final, false)?;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..k.samples {
        let seed = cfg.seed + i as u64;
        let (u1, u2) = linearized_data(&grid, seed, 1.5, 0.0, 15.0);
        let run = evolve_linearized_about_m(&pc, &lattice, &u1, &u2, k.t_final, k.dt)?;
        worst = worst.max(run.rate);
        let name = format!("growth_seed{seed}.csv");
        run.write_csv(&out.join(&name))?;
        s.artifact(&name);
    }
    s.check("growth_rate", worst, Relation::AtMost, bound);
    if k.drift_check {
        let drift = |h: f64| -> Result<f64> {
            let c = pc.with_h(h)?;
            let lat = OperatorLattice::build(&c, 0.0, k.t_final, false)?;
            let start = c.x1 + h / 4.0;
            let mut m = 0.0f64;
            for i in 0..4 {
                let (u1, u2) = linearized_data(&grid, cfg.seed + 7 + i, 1.5, start + h / 8.0, h / 8.0);
                m = m.max(evolve_linearized_about_m(&c, &lat, &u1, &u2, k.t_final, k.dt)?.e1_drift_constant(h));
            }
            Ok(m)
        };
        let (a, b) = (drift(pc.h)?, drift(2.0 * pc.h)?);
        s.record("drift_constant_h", a);
        s.record("drift_constant_2h", b);
        s.check("drift_ratio", (b / a - 1.0).abs(), Relation::Below, cfg.tolerances.drift_ratio);
    }
    Ok(())
}

pub fn correct(cfg: &RunConfig, out: &Path, s: &mut Summary) -> Result<()> {
    let pc = pair_config(cfg)?;
    let k = &cfg.correct;
    let ft = decay_in_time(&pc, &cfg.pair.times)?;
    let eps0 = measured_epsilon0(&pc, &ft);
    let lattice = OperatorLattice::build(&pc, 0.0, k.t_max, true)?;
    let corr = first_order_correction(&pc, &lattice, eps0, k.t_max, k.dt)?;
    let cd = corrected_defect(&pc, &corr)?;
    let tol = &cfg.tolerances;
    s.check("correction_defect", corr.defect, Relation::Below, tol.correction_defect);
    s.check("correction_decay", corr.decay_rate, Relation::AtMost, -tol.correction_decay * ft.rate.abs());
    s.check("corrected_defect", cd.corrected, Relation::Below, cd.base);
    s.record("correction_norm", corr.norms.first().copied().unwrap_or(f64::NAN));
    s.record("tail_estimate", corr.tail_estimate);
    s.record("base_defect", cd.base);
    let rows: Vec<Vec<f64>> = corr.times.iter().zip(&corr.norms).step_by(10).map(|(t, n)| vec![*t, *n]).collect();
    write_table_csv(&out.join("correction.csv"), &["t", "norm"], &rows)?;
    s.artifact("correction.csv");
    Ok(())
}

fn steps(max: f64, step: f64) -> Vec<f64> {
    let n = (max / step + 1e-9).floor() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

pub fn interaction(cfg: &RunConfig, out: &Path, s: &mut Summary) -> Result<()> {
    let k = &cfg.interaction;
    let (hs, ts) = (steps(k.h_max, k.step), steps(k.t_max, k.step));
    let mut rows = Vec::with_capacity(hs.len() * ts.len());
    let mut constant = 0.0f64;
    let mut violations = 0usize;
    for &t in &ts {
        let mut prev = f64::INFINITY;
        for &h in &hs {
            let b = interaction_integral(k.eps, k.eps0, k.c1, k.c2, h, t)?;
            constant = constant.max(b.ratio);
            if b.lhs > prev {
                violations += 1;
            }
            prev = b.lhs;
            rows.push(vec![h, t, b.lhs, b.rhs, b.ratio]);
        }
    }
    let origin = interaction_integral(k.eps, k.eps0, k.c1, k.c2, 0.0, 0.0)?;
    s.check("origin_identity", (origin.lhs * k.eps - 1.0).abs(), Relation::Below, 1e-14);
    s.check("constant", constant, Relation::Below, f64::MAX);
    s.check("monotonicity_violations", violations as f64, Relation::AtMost, 0.0);
    write_table_csv(&out.join("interaction.csv"), &["h", "t", "lhs", "rhs", "ratio"], &rows)?;
    s.artifact("interaction.csv");
    Ok(())
}
