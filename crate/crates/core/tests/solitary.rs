mod common;

use common::*;
use wwlab::dn::{fit_decay, PhysicalParams};
use wwlab::evolution::Zakharov;
use wwlab::fit::line_fit;
use wwlab::numerics::{make_grid, CarrierKind, SurfaceState};
use wwlab::solitary::*;
use wwlab::WwError;

#[test]
fn seed_trough_and_far_field_amplitude() {
    let p = params(0.1);
    let grid = grid_for(0.1, 256);
    let s = asymptotic_profile(&p, &grid, 0.0, CarrierKind::Linear).unwrap();
    assert!((s.state.eta[grid.center_index()] + 0.01).abs() < 1e-15);
    // 2 eps sqrt(beta - 1/3) c H with c = 1/sqrt(1.01).
    assert!((p.c - 0.995037).abs() < 1e-6);
    let oracle = 2.0 * 0.1 * (0.4f64 - 1.0 / 3.0).sqrt() * p.c;
    assert!((s.state.phi_ramp_amp.abs() - oracle).abs() < 1e-15);
    assert!((oracle - 0.0513835).abs() < 1e-7);
    // Quoted elsewhere as roughly 0.051375.
    assert!((oracle - 0.051375).abs() < 2e-5);
    assert!(s.state.phi_ramp_amp < 0.0);
}

#[test]
fn seed_is_even_and_potential_odd() {
    let p = params(0.1);
    let grid = grid_for(0.1, 128);
    let s = asymptotic_profile(&p, &grid, 0.0, CarrierKind::Linear).unwrap();
    let n = grid.n();
    let phi = s.state.phi_total();
    for i in 1..n / 2 {
        assert_eq!(s.state.eta[n / 2 + i], s.state.eta[n / 2 - i]);
        assert!((phi[n / 2 + i] + phi[n / 2 - i]).abs() < 1e-15);
    }
}

#[test]
fn seed_rejects_degenerate_regimes() {
    let grid = grid_for(0.1, 64);
    let near = PhysicalParams::from_eps_beta(1.0, 1.0, 0.1, 1.0 / 3.0 + 0.005).unwrap();
    assert!(matches!(asymptotic_profile(&near, &grid, 0.0, CarrierKind::Linear), Err(WwError::InvalidArgument(_))));
    let big = params(0.35);
    assert!(matches!(asymptotic_profile(&big, &grid, 0.0, CarrierKind::Linear), Err(WwError::InvalidArgument(_))));
}

#[test]
fn rest_state_has_zero_residual() {
    let grid = grid_for(0.1, 64);
    let model = Zakharov::new(&grid, params(0.1), dn()).unwrap();
    let r = traveling_residual(&model, &SurfaceState::rest(&grid)).unwrap();
    assert_eq!(max_abs(&r.r1), 0.0);
    assert_eq!(max_abs(&r.r2), 0.0);
}

fn seed_residual(eps: f64) -> f64 {
    let p = params(eps);
    let grid = grid_for(eps, 256);
    let model = Zakharov::new(&grid, p, dn()).unwrap();
    let s = asymptotic_profile(&p, &grid, 0.0, CarrierKind::Linear).unwrap();
    traveling_residual(&model, &s.state).unwrap().e0()
}

#[test]
fn seed_residual_scales_like_fourth_power() {
    let eps = [0.05, 0.075, 0.1];
    let r: Vec<f64> = eps.iter().map(|&e| seed_residual(e)).collect();
    let fit = line_fit(&eps.map(f64::ln), &r.iter().map(|v| v.ln()).collect::<Vec<_>>()).unwrap();
    assert!((3.5..=4.5).contains(&fit.slope), "exponent {}", fit.slope);
    let factor = r[2] / r[0];
    assert!((8.0..=32.0).contains(&factor), "factor {factor}");
}

#[test]
fn newton_converges_fast_with_symmetry() {
    let (model, w) = default_wave();
    assert!(w.iterations <= 8, "{} iterations", w.iterations);
    assert!(w.residual_norm < 1e-9);
    let r = traveling_residual(model, &w.state).unwrap();
    assert!(r.e0() < 1e-9);
    let n = w.grid().n();
    let phi = w.state.phi_total();
    for i in 1..n / 2 {
        assert!((w.state.eta[n / 2 + i] - w.state.eta[n / 2 - i]).abs() < 1e-10);
        assert!((phi[n / 2 + i] + phi[n / 2 - i]).abs() < 1e-10);
    }
    assert!(w.state.eta[n / 2] < 0.0);
    // Depression close to -eps^2 H.
    assert!((w.state.eta[n / 2] + 0.01).abs() < 0.05 * 0.01);
}

#[test]
fn stationarity_identity_holds() {
    let (model, w) = default_wave();
    let parts = model.rhs_parts(&w.state).unwrap();
    let c = model.params.c;
    let defect = parts.g_phi.iter().zip(&parts.eta_x).fold(0.0f64, |m, (g, e)| m.max((g + c * e).abs()));
    assert!(defect < 1e-9, "{defect}");
}

#[test]
fn translated_wave_keeps_parity_about_its_center() {
    let (model, w) = default_wave();
    let grid = w.grid();
    // A whole number of cells keeps the nodes symmetric about the new center.
    let a = 20.0 * grid.dx();
    let shifted = w.translate(a);
    let n = grid.n();
    let c = n / 2 + 20;
    let phi = shifted.state.phi_total();
    for i in 1..60 {
        assert!((shifted.state.eta[c + i] - shifted.state.eta[c - i]).abs() < 1e-8);
        assert!((phi[c + i] - phi[c] + (phi[c - i] - phi[c])).abs() < 1e-8);
    }
    let r = traveling_residual(model, &shifted.state).unwrap();
    assert!(r.e0() < 1e-8);
}

#[test]
fn tail_is_small_and_decays_at_the_long_wave_rate() {
    let (_, w) = default_wave();
    let grid = w.grid();
    let l = grid.length();
    for (x, e) in grid.nodes().iter().zip(&w.state.eta) {
        if x.abs() >= 0.35 * l {
            assert!(e.abs() < 1e-8);
        }
    }
    let fit = fit_decay(grid, &w.state.eta, 0.0).unwrap();
    let expected = w.params.tail_rate();
    assert!((fit.rate.abs() - expected).abs() < 0.25 * expected, "rate {} vs {expected}", fit.rate);
}

#[test]
fn refined_seed_is_a_fixed_point() {
    let (model, w) = default_wave();
    let again = refine_newton(model, w, &NewtonOptions::default()).unwrap();
    assert_eq!(again.iterations, 0);
    assert_eq!(max_diff(&again.state.eta, &w.state.eta), 0.0);
}

#[test]
fn analytic_jacobian_agrees_with_finite_differences() {
    let p = params(0.1);
    let grid = grid_for(0.1, 128);
    let fd = build_wave(&p, &grid, dn(), &NewtonOptions::default()).unwrap().1;
    let opts = NewtonOptions { jacobian: JacobianKind::Analytic, ..Default::default() };
    let an = build_wave(&p, &grid, dn(), &opts).unwrap().1;
    assert!(an.residual_norm < 1e-9);
    assert!(max_diff(&fd.state.eta, &an.state.eta) < 1e-10);
    assert!((fd.state.phi_ramp_amp - an.state.phi_ramp_amp).abs() < 1e-10);
}

#[test]
fn frozen_ramp_still_converges() {
    let p = params(0.1);
    let grid = grid_for(0.1, 128);
    let model = Zakharov::new(&grid, p, dn()).unwrap();
    let seed = asymptotic_profile(&p, &grid, 0.0, CarrierKind::Linear).unwrap();
    let opts = NewtonOptions { ramp: RampMode::Frozen, ..Default::default() };
    let w = refine_newton(&model, &seed, &opts).unwrap();
    assert!(w.residual_norm < 1e-9);
    assert_eq!(w.state.phi_ramp_amp, seed.state.phi_ramp_amp);
}

#[test]
fn divergence_is_reported_with_a_dump() {
    let p = params(0.1);
    let grid = grid_for(0.1, 64);
    let model = Zakharov::new(&grid, p, dn()).unwrap();
    let seed = asymptotic_profile(&p, &grid, 0.0, CarrierKind::Linear).unwrap();
    let opts = NewtonOptions { max_iter: 1, tol: 1e-30, ..Default::default() };
    match refine_newton(&model, &seed, &opts) {
        Err(WwError::NoConvergence { iterations, dump, .. }) => {
            assert_eq!(iterations, 1);
            assert_eq!(dump.len(), grid.n() + 1);
        }
        other => panic!("expected no-convergence, got {other:?}"),
    }
}

#[test]
fn checkpoint_roundtrip_with_sidecar() {
    let (_, w) = default_wave();
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("wave");
    w.save(&stem).unwrap();
    let back = SolitaryWave::load(&stem).unwrap();
    assert_eq!(back.state.eta, w.state.eta);
    assert_eq!(back.state.phi_periodic, w.state.phi_periodic);
    assert_eq!(back.state.phi_ramp_amp, w.state.phi_ramp_amp);
    assert_eq!(back.params, w.params);
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json")).unwrap()).unwrap();
    assert!(side["residual_norm"].as_f64().unwrap() < 1e-9);
}

/// Momentum of the leading-order profile: `(4/3) eps^2 H |amp|`.
fn leading_momentum(p: &PhysicalParams) -> f64 {
    4.0 / 3.0 * p.epsilon().powi(2) * p.depth * seed_amplitude(p).abs()
}

#[test]
fn momentum_matches_leading_order() {
    let (_, w) = default_wave();
    let m = momentum(&w.state);
    let lead = leading_momentum(&w.params);
    assert!(m > 0.0);
    assert!((m - lead).abs() < 0.05 * lead, "{m} vs {lead}");
}

#[test]
fn speed_derivative_of_trough_matches_leading_order() {
    let p = params(0.1);
    let grid = grid_for(0.1, 256);
    let sd = speed_derivative(&p, &grid, 1e-3, dn(), &NewtonOptions::default()).unwrap();
    // d/dc (-eps^2 H) at fixed fluid is 2 g H^2 / c^3: shallower trough as c grows.
    let lead = 2.0 * p.g * p.depth * p.depth / p.c.powi(3);
    let got = sd.dq.eta[grid.center_index()];
    assert!(got > 0.0 && (got - lead).abs() < 0.1 * lead, "{got} vs {lead}");
}

#[test]
fn momentum_slope_is_negative_and_grid_stable() {
    let opts = NewtonOptions::default();
    for eps in [0.05, 0.1] {
        let p = params(eps);
        let s = momentum_slope(&p, &grid_for(eps, 256), 1e-3, dn(), &opts).unwrap();
        assert!(s < 0.0, "eps {eps}: {s}");
        // Leading-order slope from the closed-form momentum.
        let h = 1e-4;
        let (pp, pm) = (p.with_eps(eps - h).unwrap(), p.with_eps(eps + h).unwrap());
        let lead = (leading_momentum(&pp) - leading_momentum(&pm)) / (pp.c - pm.c);
        assert!(lead < 0.0 && (s - lead).abs() < 0.15 * lead.abs(), "eps {eps}: {s} vs {lead}");
    }
    let p = params(0.1);
    let coarse = momentum_slope(&p, &make_grid(128.0, 128).unwrap(), 1e-3, dn(), &opts).unwrap();
    let fine = momentum_slope(&p, &make_grid(128.0, 256).unwrap(), 1e-3, dn(), &opts).unwrap();
    assert!(coarse < 0.0 && fine < 0.0);
    assert!((coarse - fine).abs() < 1e-3 * fine.abs());
}
