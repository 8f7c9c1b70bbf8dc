//! Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed here.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use wwlab::dn::*;
use wwlab::evolution::{evolve, EvolutionConfig, Zakharov};
use wwlab::fit::line_fit;
use wwlab::multi::*;
use wwlab::numerics::norms::apply_pm;
use wwlab::numerics::random::{localized_field, rng, smooth_field};
use wwlab::numerics::{make_grid, CarrierKind, Grid1D, SurfaceState};
use wwlab::solitary::{asymptotic_profile, build_wave, momentum_slope, speed_derivative, traveling_residual, NewtonOptions};
use wwlab::stability::*;

type Outcome = Result<String, String>;

/// Collects named checks; any failure fails the criterion.
struct Checks {
    lines: Vec<String>,
    ok: bool,
}

impl Checks {
    fn new() -> Self {
        Self { lines: Vec::new(), ok: true }
    }

    fn that(&mut self, ok: bool, what: String) -> &mut Self {
        self.ok &= ok;
        self.lines.push(if ok { what } else { format!("!! {what}") });
        self
    }

    fn done(&self) -> Outcome {
        let s = self.lines.join("; ");
        if self.ok {
            Ok(s)
        } else {
            Err(s)
        }
    }
}

fn dn_exactness() -> Outcome {
    let g = Grid1D::new(40.0, 128).unwrap();
    let s = StripSolver::new(&g, 1.0, 0.0, dn()).unwrap();
    let mut r = rng(1);
    let psi = smooth_field(&g, &mut r, 0.5 * g.xi_max());
    let out = s.problem(&vec![0.0; 128]).unwrap().apply(&psi).unwrap();
    let exact = g.apply_even(&psi, |xi| xi * xi.tanh());
    let sym = max_diff(&out, &exact) / max_abs(&exact);
    let eta: Vec<f64> = g.nodes().iter().map(|x| 0.1 * (x / 3.0).cos() - 0.05 / (x / 2.0).cosh().powi(2)).collect();
    let c = max_abs(&s.problem(&eta).unwrap().apply(&vec![2.5; 128]).unwrap());
    Checks::new()
        .that(sym < 1e-8, format!("symbol error {sym:.2e} < 1e-8"))
        .that(c < 1e-12, format!("|G[eta] const| {c:.2e} < 1e-12"))
        .done()
}

fn dn_symmetry_and_shape() -> Outcome {
    let g = Grid1D::new(40.0, 128).unwrap();
    let eta: Vec<f64> = g.nodes().iter().map(|x| 0.05 / (x / 2.0).cosh().powi(2)).collect();
    let s = StripSolver::new(&g, 1.0, 0.0, dn()).unwrap();
    let p = s.problem(&eta).unwrap();
    let mut r = rng(11);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let u = smooth_field(&g, &mut r, 3.0);
        let v = smooth_field(&g, &mut r, 3.0);
        let (gu, gv) = (p.apply(&u).unwrap(), p.apply(&v).unwrap());
        let scale = g.l2(&apply_pm(&g, &u)) * g.l2(&apply_pm(&g, &v));
        worst = worst.max((g.inner(&gu, &v) - g.inner(&u, &gv)).abs() / scale);
    }

    let g = Grid1D::new(30.0, 96).unwrap();
    let s = StripSolver::new(&g, 1.0, 0.0, DnConfig { tol: 1e-14, ..Default::default() }).unwrap();
    let eta: Vec<f64> = g.nodes().iter().map(|x| 0.2 / (x / 2.0).cosh().powi(2)).collect();
    let psi: Vec<f64> = g.nodes().iter().map(|x| (x / 2.0).sin() * (-(x * x) / 8.0).exp()).collect();
    let zeta: Vec<f64> = g.nodes().iter().map(|x| (-(x - 1.0).powi(2) / 3.0).exp()).collect();
    let u = SurfaceState::new(&g, eta.clone(), psi.clone(), 0.0, CarrierKind::Linear).unwrap();
    let exact = shape_derivative(&s.problem(&eta).unwrap(), &u, &zeta).unwrap();
    let err = |h: f64| {
        let at = |sg: f64| {
            let e: Vec<f64> = eta.iter().zip(&zeta).map(|(a, b)| a + sg * h * b).collect();
            s.problem(&e).unwrap().apply(&psi).unwrap()
        };
        let d: Vec<f64> = at(1.0).iter().zip(at(-1.0)).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        max_diff(&d, &exact) / max_abs(&exact)
    };
    let order = (err(0.04) / err(0.02)).log2();
    Checks::new()
        .that(worst <= 1e-9, format!("symmetry defect {worst:.2e} <= 1e-9 |Pu||Pv|"))
        .that(order >= 1.9, format!("shape-derivative order {order:.3} >= 1.9"))
        .done()
}

fn dn_decay() -> Outcome {
    let rate = |n: usize| {
        let (model, w) = if n == 512 {
            fine_wave().clone()
        } else {
            build_wave(&params(0.1), &grid_for(0.1, n), dn(), &NewtonOptions::default()).unwrap()
        };
        let p = model.solver.problem(&w.state.eta).unwrap();
        decay_profile(&p, &w.state, w.center).unwrap().rate
    };
    let (a, b) = (rate(256), rate(512));
    let change = (a - b).abs() / b.abs();
    Checks::new()
        .that(a < 0.0 && b < 0.0, format!("rates {a:.4} (N=256), {b:.4} (N=512) < 0"))
        .that(change <= 0.1, format!("change under N doubling {:.2}% <= 10%", 100.0 * change))
        .done()
}

fn solitary_waves() -> Outcome {
    let (_, w) = default_wave();
    let seed = |eps: f64| {
        let p = params(eps);
        let grid = grid_for(eps, 256);
        let model = Zakharov::new(&grid, p, dn()).unwrap();
        let s = asymptotic_profile(&p, &grid, 0.0, CarrierKind::Linear).unwrap();
        traveling_residual(&model, &s.state).unwrap().e0()
    };
    let eps = [0.05, 0.075, 0.1];
    let logs: Vec<f64> = eps.iter().map(|&e| seed(e).ln()).collect();
    let slope = line_fit(&eps.map(f64::ln), &logs).unwrap().slope;
    let c = w.grid().n() / 2;
    let phi = w.state.phi_total();
    let parity = (1..c).fold(0.0f64, |m, i| {
        m.max((w.state.eta[c + i] - w.state.eta[c - i]).abs()).max((phi[c + i] + phi[c - i] - 2.0 * phi[c]).abs())
    });
    Checks::new()
        .that(w.residual_norm < 1e-9, format!("Newton residual {:.2e} < 1e-9", w.residual_norm))
        .that((3.5..=4.5).contains(&slope), format!("seed exponent {slope:.3} in [3.5, 4.5]"))
        .that(parity < 1e-8, format!("parity {parity:.2e} < 1e-8"))
        .done()
}

fn nonlinear_evolution() -> Outcome {
    let (model, w) = fine_wave();
    let c = model.params.c;
    let cfg = EvolutionConfig { dt: 0.05, t_final: 10.0 / c, ..Default::default() };
    let tr = evolve(model, &w.state, &cfg).unwrap().into_result().unwrap();
    let back = model.grid().shift(&tr.final_state.eta, -c * tr.final_time);
    let shape = max_diff(&back, &w.state.eta);
    let drift = tr.relative_drift().energy;

    let (model, w) = default_wave();
    let run = |dt: f64| {
        let cfg = EvolutionConfig { dt, t_final: 2.0, filter_strength: 0.0, diagnostics_stride: 0, ..Default::default() };
        evolve(model, &w.state, &cfg).unwrap().final_state
    };
    let reference = run(0.05);
    let e = |u: &SurfaceState| max_diff(&u.eta, &reference.eta).max(max_diff(&u.phi_periodic, &reference.phi_periodic));
    let ratio = e(&run(0.2)) / e(&run(0.1));
    Checks::new()
        .that(shape < 1e-5, format!("shape error {shape:.2e} < 1e-5"))
        .that(drift <= 1e-8, format!("energy drift {drift:.2e} <= 1e-8"))
        .that((12.0..=20.0).contains(&ratio), format!("dt-halving factor {ratio:.2} in [12, 20]"))
        .done()
}

fn slope_sign() -> Outcome {
    let opts = NewtonOptions::default();
    let mut ch = Checks::new();
    for eps in [0.05, 0.1] {
        let s = momentum_slope(&params(eps), &grid_for(eps, 256), 1e-3, dn(), &opts).unwrap();
        ch.that(s < 0.0, format!("eps {eps}: {s:.4e} < 0"));
    }
    let coarse = momentum_slope(&params(0.1), &make_grid(128.0, 128).unwrap(), 1e-3, dn(), &opts).unwrap();
    ch.that(coarse < 0.0, format!("N=128: {coarse:.4e} < 0"));
    ch.done()
}

fn spectral_identities() -> Outcome {
    let (model, w) = default_wave();
    let l = Linearization::new(model, &w.state).unwrap();
    let lam = l.lambda();
    let (t1, t2) = l.translation_mode();
    let out = lam.apply(&t1, &t2);
    let kernel = max_abs(&out.0).max(max_abs(&out.1)) / (lam.norm() * max_abs(&t1).max(max_abs(&t2)));

    let (ex, px) = l.translation_mode();
    let target: Vec<f64> = px.iter().copied().chain(ex.iter().map(|v| -v)).collect();
    let defect = |d_eps: f64| {
        let sd = speed_derivative(&w.params, w.grid(), d_eps, dn(), &NewtonOptions::default()).unwrap();
        let (a, b) = l.apply_lambda(model, &sd.dq).unwrap();
        let got: Vec<f64> = a.into_iter().chain(b).collect();
        max_diff(&got, &target) / max_abs(&target)
    };
    let (coarse, fine) = (defect(2e-3), defect(1e-3));
    let conj = l.conjugation_defect().resolved;
    let s = spectrum(&l.lc(), l.grid.length());
    let pm = s.pm_symmetry_defect();
    let re = s.max_real() / s.scale;
    Checks::new()
        .that(kernel < 1e-6, format!("translation kernel {kernel:.2e} < 1e-6 relative"))
        .that(fine < 1e-2 && (3.0..=5.0).contains(&(coarse / fine)), format!("speed-derivative identity {fine:.2e}, second order (ratio {:.2})", coarse / fine))
        .that(conj < 1e-8, format!("conjugation {conj:.2e} < 1e-8"))
        .that(pm < 1e-6, format!("+/- symmetry {pm:.2e} < 1e-6"))
        .that(re < 1e-6, format!("max Re sigma / scale {re:.2e} < 1e-6"))
        .done()
}

fn coercivity() -> Outcome {
    let min_at = |n: usize| {
        let (model, w) = if n == 256 {
            default_wave().clone()
        } else {
            build_wave(&params(0.1), &grid_for(0.1, n), dn(), &NewtonOptions::default()).unwrap()
        };
        let l = Linearization::new(&model, &w.state).unwrap();
        let lc = l.lc();
        let m = coercivity_rayleigh(&lc, &l).unwrap().min_value;
        let count = if n == 256 { Some(unconstrained_count(&lc, &l.grid, 1e-8).unwrap().0) } else { None };
        (m, count)
    };
    let ((a, count), (b, _)) = (min_at(256), min_at(384));
    let count = count.unwrap();
    let var = (a - b).abs() / b;
    Checks::new()
        .that(a > 0.0 && b > 0.0, format!("constrained minimum {a:.4e} (256), {b:.4e} (384) > 0"))
        .that(var <= 0.15, format!("variation {:.2}% <= 15%", 100.0 * var))
        .that(count <= 2, format!("nonpositive directions {count} <= 2"))
        .done()
}

fn transverse() -> Outcome {
    let ks = [-0.01, 0.005, 0.01, 0.05, 0.3];
    let scan = transverse_scan(0.1, 0.4, 128.0, 128, &ks, dn(), &NewtonOptions::default()).unwrap();
    let s = scan.sigma(0.01);
    let sym = match (s, scan.sigma(-0.01)) {
        (Some(a), Some(b)) => (a - b).abs() / a,
        _ => f64::NAN,
    };
    let real = scan.points.iter().filter(|p| p.unstable).all(|p| p.sigma.1.abs() < 1e-6 && !p.spurious);
    let edge = scan.band_edge.unwrap_or(f64::NAN);
    Checks::new()
        .that(s.is_some_and(|v| v > 0.0), format!("sigma(0.01) = {s:?} > 0, refined"))
        .that(real, "unstable eigenvalues real and refinement-stable".into())
        .that(sym < 1e-6, format!("|sigma(k) - sigma(-k)| / sigma {sym:.2e} < 1e-6"))
        .that(edge < 0.05 && scan.sigma(0.3).is_none(), format!("band edge {edge} < 0.05"))
        .done()
}

fn interaction_bound() -> Outcome {
    let hs: Vec<f64> = (0..=40).map(f64::from).collect();
    let ts: Vec<f64> = (0..=100).map(f64::from).collect();
    let c = interaction_constant(1.0, 0.5, 1.0, 1.1, &hs, &ts).unwrap();
    let monotone = ts.iter().all(|&t| {
        let lhs: Vec<f64> = hs.iter().map(|&h| interaction_integral(1.0, 0.5, 1.0, 1.1, h, t).unwrap().lhs).collect();
        lhs.windows(2).all(|w| w[1] < w[0])
    });
    Checks::new()
        .that(c.is_finite(), format!("C = {c:.4}"))
        .that(monotone, "decreasing in h at every t".into())
        .done()
}

fn time_fit() -> DecayFit {
    let ts: Vec<f64> = (0..7).map(|k| k as f64 * 200.0).collect();
    decay_in_time(pair(), &ts).unwrap()
}

fn two_soliton_residual() -> Outcome {
    let cfg = pair();
    let ft = time_fit();
    let fh = decay_in_separation(cfg, &[15.0, 20.0, 25.0, 30.0]).unwrap();
    let (c1, c2) = cfg.speeds();
    let rt = ft.rate.abs() / (c2 - c1);
    let consistency = (fh.rate.abs() - rt).abs() / rt;
    Checks::new()
        .that(ft.rate < 0.0 && ft.r2 >= 0.95, format!("time rate {:.4e}, R^2 {:.5}", ft.rate, ft.r2))
        .that(fh.rate < 0.0 && fh.r2 >= 0.95, format!("separation rate {:.4}, R^2 {:.5}", fh.rate, fh.r2))
        .that(consistency < 0.3, format!("cross-consistency {:.1}% < 30%", 100.0 * consistency))
        .done()
}

fn growth_about_pair() -> Outcome {
    let cfg = pair();
    let eps0 = measured_epsilon0(cfg, &time_fit());
    let (c1, c2) = cfg.speeds();
    let bound = 1.5 * eps0 * (c2 - c1) / 2.0;
    let lat = OperatorLattice::build(cfg, 0.0, 400.0, false).unwrap();
    let worst = (0..5)
        .map(|seed| {
            let (u1, u2) = mean_free_data(cfg.grid(), seed, 0.0, 15.0);
            evolve_linearized_about_m(cfg, &lat, &u1, &u2, 400.0, 0.05).unwrap().rate
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let constant = |h: f64| {
        let c = cfg.with_h(h).unwrap();
        let mid = cutoffs(&c, 0.0).start + h / 8.0;
        let lat = OperatorLattice::with_step(&c, 0.0, 20.0, 10.0, false).unwrap();
        (7..11)
            .map(|seed| {
                let (u1, u2) = mean_free_data(c.grid(), seed, mid, h / 8.0);
                evolve_linearized_about_m(&c, &lat, &u1, &u2, 20.0, 0.05).unwrap().e1_drift_constant(h)
            })
            .fold(0.0, f64::max)
    };
    let (a, b) = (constant(20.0), constant(40.0));
    let change = (b / a - 1.0).abs();
    Checks::new()
        .that(worst <= bound, format!("max rate over 5 data {worst:.3e} <= {bound:.3e}"))
        .that(change < 0.4, format!("h * drift: {a:.4} (h=20), {b:.4} (h=40), change {:.1}% < 40%", 100.0 * change))
        .done()
}

fn correction_efficacy() -> Outcome {
    let cfg = pair();
    let eps0 = measured_epsilon0(cfg, &time_fit());
    let lat = OperatorLattice::build(cfg, 0.0, 1200.0, true).unwrap();
    let corr = first_order_correction(cfg, &lat, eps0, 1200.0, 0.1).unwrap();
    let d = corrected_defect(cfg, &corr).unwrap();
    Checks::new().that(d.corrected < d.base, format!("defect {:.3e} -> {:.3e}", d.base, d.corrected)).done()
}

fn growth_about_one_wave() -> Outcome {
    let (model, w) = default_wave();
    let l = Linearization::new(model, &w.state).unwrap();
    let mut r = rng(21);
    let u1 = localized_field(&l.grid, &mut r, 1.0, 0.0, 15.0);
    let u2 = localized_field(&l.grid, &mut r, 1.0, 0.0, 15.0);
    let g = evolve_linear(&l.lc(), &l.grid, &u1, &u2, 50.0, 0.05).unwrap();
    let (k1, k2) = apply_j(&l.kernel_mode().0, &l.kernel_mode().1);
    let gk = evolve_linear(&l.lc(), &l.grid, &k1, &k2, 50.0, 0.05).unwrap();
    let c = g.constant.max(gk.constant);
    Checks::new().that(c < 10.0, format!("C = {c:.3} < 10 over T = 50 (random and skew-kernel data)")).done()
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("DN exactness", dn_exactness),
        ("DN symmetry and shape derivative", dn_symmetry_and_shape),
        ("DN decay propagation", dn_decay),
        ("solitary waves", solitary_waves),
        ("nonlinear evolution", nonlinear_evolution),
        ("momentum slope sign", slope_sign),
        ("spectral identities", spectral_identities),
        ("coercivity", coercivity),
        ("transverse instability", transverse),
        ("interaction bound", interaction_bound),
        ("two-soliton residual", two_soliton_residual),
        ("growth about the pair", growth_about_pair),
        ("correction efficacy", correction_efficacy),
        ("growth about one wave", growth_about_one_wave),
    ];
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = format!("{:02}", i + 1);
        if filter.as_ref().is_some_and(|p| !name.contains(p.as_str()) && *p != id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {id} {name} [{secs:.1}s]: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL {id} {name} [{secs:.1}s]: {d}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
