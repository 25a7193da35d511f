//! Energy diagnostics along real trajectories: dual-path component
//! agreement, energy-identity residual refinement, and decay-rate fits
//! against the damped-oscillator envelope.

mod common;

use common::{damped_oscillator, fixture, seeded_state};
use inexbeam::diagnostics::{
    self, convergence_order, fit_trajectory_decay, identity_residual_series, max_identity_residual,
    modal_energy, quadrature_energy,
};
use inexbeam::integrate::{run_simulation, IntegratorConfig, Scheme};
use inexbeam::{ModalForcing, ModalState};

#[test]
fn dual_path_energies_across_mode_counts() {
    for n in [2usize, 5, 8] {
        let (basis, quad, ops) = fixture(n, 1.0, 0.05, true, true);
        for seed in 0..12 {
            let state = seeded_state(n, 1.0, seed);
            let em = modal_energy(&ops, &state);
            let eq = quadrature_energy(&basis, &quad, &state, ops.params()).unwrap();
            for (label, a, b) in [
                ("kinetic", em.kinetic, eq.kinetic),
                ("inertial", em.inertial, eq.inertial),
                ("bend", em.bend, eq.bend),
                ("nonlinear", em.nonlinear, eq.nonlinear),
            ] {
                assert!(
                    (a - b).abs() <= 1e-8 * a.abs().max(1e-12),
                    "n = {n}, seed {seed}, {label}: {a} vs {b}"
                );
            }
        }
    }
}

#[test]
fn identity_residual_zero_for_trivial_run() {
    let (_, _, ops) = fixture(2, 1.0, 0.05, true, false);
    let forcing = ModalForcing::zero(2);
    let cfg = IntegratorConfig::new(Scheme::Rk4, 1e-2).unwrap();
    let traj = run_simulation(&ops, ModalState::zero(2, 0.0), &forcing, &cfg, 1.0, 1).unwrap();
    for (_, r) in identity_residual_series(&traj) {
        assert_eq!(r, 0.0);
    }
}

#[test]
fn identity_residual_refines_at_second_order_midpoint() {
    // sigma = iota = 1, damped: the residual of
    // E(t) - E(0) + k2 int ||w_xxt||^2 = 0 must shrink as dt^2.
    let (_, _, ops) = fixture(3, 1.0, 0.05, true, true);
    let forcing = ModalForcing::zero(3);
    let initial = ModalState::new(0.0, vec![0.1, 0.02, 0.0], vec![0.0; 3]);
    let mut errors = Vec::new();
    for &dt in &[4e-3, 2e-3, 1e-3] {
        let cfg = IntegratorConfig::new(Scheme::ImplicitMidpoint, dt).unwrap();
        let traj = run_simulation(&ops, initial.clone(), &forcing, &cfg, 2.0, 1).unwrap();
        errors.push((dt, max_identity_residual(&traj)));
    }
    let order = convergence_order(&errors).unwrap();
    assert!(
        (order - 2.0).abs() < 0.25,
        "observed order {order}: {errors:?}"
    );
}

#[test]
fn identity_residual_refines_at_second_order_rk4() {
    // With RK4 the stepping error is O(dt^4); the trapezoid accumulation of
    // the dissipation/work integrals dominates at O(dt^2).
    let (_, _, ops) = fixture(2, 1.0, 0.03, true, false);
    let forcing = ModalForcing::zero(2);
    let initial = ModalState::new(0.0, vec![0.15, 0.0], vec![0.0, 0.1]);
    let mut errors = Vec::new();
    for &dt in &[4e-3, 2e-3, 1e-3] {
        let cfg = IntegratorConfig::new(Scheme::Rk4, dt).unwrap();
        let traj = run_simulation(&ops, initial.clone(), &forcing, &cfg, 2.0, 1).unwrap();
        errors.push((dt, max_identity_residual(&traj)));
    }
    let order = convergence_order(&errors).unwrap();
    assert!(
        (order - 2.0).abs() < 0.25,
        "observed order {order}: {errors:?}"
    );
}

#[test]
fn forced_run_work_balances_energy_gain_plus_dissipation() {
    // Identity with forcing: E(t) - E(0) + dissipation - work = O(dt^2).
    let (basis, quad, ops) = fixture(2, 1.0, 0.04, true, false);
    let forcing = inexbeam::Forcing::UniformHarmonic {
        amplitude: 0.5,
        omega: 2.0,
    }
    .prepare(&basis, &quad)
    .unwrap();
    let initial = ModalState::zero(2, 0.0);
    let mut errors = Vec::new();
    for &dt in &[4e-3, 2e-3, 1e-3] {
        let cfg = IntegratorConfig::new(Scheme::ImplicitMidpoint, dt).unwrap();
        let traj = run_simulation(&ops, initial.clone(), &forcing, &cfg, 2.0, 1).unwrap();
        let last = traj.final_energy();
        assert!(last.work_accum > 0.0, "forcing should do work");
        errors.push((dt, max_identity_residual(&traj)));
    }
    let order = convergence_order(&errors).unwrap();
    assert!(
        (order - 2.0).abs() < 0.3,
        "observed order {order}: {errors:?}"
    );
}

#[test]
fn damped_single_mode_decay_rate_matches_modal_envelope() {
    // Linear damped mode: energy decays like exp(-k2 kappa^4 t); the fit
    // must land within 10% of the modal rate.
    let k2 = 0.002; // light damping keeps the envelope clean
    let (_, _, ops) = fixture(1, 1.0, k2, false, false);
    let eta = k2 * ops.kappa4()[0];
    let forcing = ModalForcing::zero(1);
    let cfg = IntegratorConfig::new(Scheme::ImplicitMidpoint, 1e-3).unwrap();
    let initial = ModalState::new(0.0, vec![0.3], vec![0.0]);
    let traj = run_simulation(&ops, initial, &forcing, &cfg, 60.0, 20).unwrap();
    let fit = fit_trajectory_decay(&traj, (0.0, 60.0), 0.0).unwrap();
    assert!(
        (fit.omega - eta).abs() <= 0.1 * eta,
        "fitted {} vs modal rate {eta}",
        fit.omega
    );
    assert!(fit.r_squared > 0.99, "r^2 = {}", fit.r_squared);
}

#[test]
fn damped_mode_tracks_closed_form_solution() {
    let k2 = 0.02;
    let (_, _, ops) = fixture(1, 1.0, k2, false, false);
    let k4 = ops.kappa4()[0];
    let eta = k2 * k4;
    let forcing = ModalForcing::zero(1);
    let cfg = IntegratorConfig::new(Scheme::ImplicitMidpoint, 5e-4).unwrap();
    let q0 = 0.8;
    let v0 = -0.3;
    let initial = ModalState::new(0.0, vec![q0], vec![v0]);
    let traj = run_simulation(&ops, initial, &forcing, &cfg, 3.0, 50).unwrap();
    for rec in &traj.records {
        let exact = damped_oscillator(rec.state.t, q0, v0, k4, eta);
        assert!(
            (rec.state.q[0] - exact).abs() < 5e-6,
            "t = {}: {} vs {exact}",
            rec.state.t,
            rec.state.q[0]
        );
    }
}

#[test]
fn small_data_nonlinear_run_decays_exponentially() {
    // sigma = iota = 1, k2 > 0, tiny data: completes, energy non-increasing,
    // positive fitted decay rate with high r^2. RK4 here: deep in the decay
    // the energy falls below any absolute Newton tolerance, while the
    // explicit scheme keeps working in relative arithmetic.
    let (_, _, ops) = fixture(3, 1.0, 0.05, true, true);
    let forcing = ModalForcing::zero(3);
    let cfg = IntegratorConfig::new(Scheme::Rk4, 2e-3).unwrap();
    let initial = ModalState::new(0.0, vec![0.01, 0.0, 0.0], vec![0.0; 3]);
    let traj = run_simulation(&ops, initial, &forcing, &cfg, 30.0, 10).unwrap();
    assert!(traj.blowup.is_none());
    for pair in traj.records.windows(2) {
        assert!(
            pair[1].energy.e_total <= pair[0].energy.e_total * (1.0 + 1e-10) + 1e-18,
            "energy increased at t = {}",
            pair[1].energy.t
        );
    }
    let fit = fit_trajectory_decay(&traj, (0.0, 30.0), 0.0).unwrap();
    assert!(fit.omega > 0.0);
    assert!(fit.r_squared >= 0.99, "r^2 = {}", fit.r_squared);
    // record spacing 0.02 puts the trapezoid accumulation error near 1e-7
    let residual = max_identity_residual(&traj);
    assert!(residual < 1e-6, "identity residual {residual}");
}

#[test]
fn e1_diagnostic_is_finite_and_positive_along_trajectory() {
    let (_, _, ops) = fixture(3, 1.0, 0.05, true, true);
    let forcing = ModalForcing::zero(3);
    let cfg = IntegratorConfig::new(Scheme::ImplicitMidpoint, 1e-3).unwrap();
    let initial = ModalState::new(0.0, vec![0.1, -0.05, 0.02], vec![0.0; 3]);
    let traj = run_simulation(&ops, initial, &forcing, &cfg, 1.0, 100).unwrap();
    for rec in &traj.records {
        let load = forcing.eval(rec.state.t);
        let accel = inexbeam::dynamics::solve_acceleration(&ops, &rec.state, &load).unwrap();
        let e1 = diagnostics::higher_energy_e1(&ops, &rec.state, &accel);
        assert!(e1.is_finite() && e1 >= 0.0, "E1 = {e1}");
    }
}
