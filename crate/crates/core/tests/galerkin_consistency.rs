//! The master consistency test: the tensor-based modal residual must agree
//! with the residual of the continuous weak form evaluated entirely by
//! quadrature on reconstructed physical fields, for arbitrary states,
//! accelerations, and loads. This ties the four-tensor contractions (and
//! their index order) to the PDE itself.

#![allow(clippy::needless_range_loop)]

mod common;

use common::{fixture, seeded_state, seeded_vector};
use inexbeam::dynamics::{residual, solve_acceleration, stiffness_force, inertia_velocity_force};
use inexbeam::{DiscreteOperators, ModeBasis, ModalState, QuadratureContext};

/// Weak-form residual tested against every basis function, bypassing the
/// tensors: all fields are reconstructed on the quadrature grid and each
/// inner product is evaluated by the rule. The nonlocal inertia term uses
/// `\int_x^L u_tt = F(L) - F(x)` with `F` the cumulative primitive of
/// `u_tt = -\int_0^x [w_xt^2 + w_x w_xtt]`.
fn weak_form_residual(
    basis: &ModeBasis,
    quad: &QuadratureContext,
    ops: &DiscreteOperators,
    state: &ModalState,
    accel: &[f64],
    load: &[f64],
) -> Vec<f64> {
    let params = ops.params();
    let nodes = quad.nodes();
    let w_x = basis.combine(&state.q, 1, nodes).unwrap();
    let w_xx = basis.combine(&state.q, 2, nodes).unwrap();
    let w_tt = basis.combine(accel, 0, nodes).unwrap();
    let w_xt = basis.combine(&state.v, 1, nodes).unwrap();
    let w_xxt = basis.combine(&state.v, 2, nodes).unwrap();
    let w_xtt = basis.combine(accel, 1, nodes).unwrap();

    // u_tt = -\int_0^x [w_xt^2 + w_x w_xtt], then its tail integral
    // \int_x^L u_tt needs a second nested primitive.
    let utt_integrand: Vec<f64> = w_xt
        .iter()
        .zip(w_x.iter().zip(&w_xtt))
        .map(|(wxt, (wx, wxtt))| wxt * wxt + wx * wxtt)
        .collect();
    let utt_prefix = quad.cumulative_primitive(&utt_integrand).unwrap();
    let u_tt: Vec<f64> = utt_prefix.node_values.iter().map(|p| -p).collect();
    let utt_outer = quad.cumulative_primitive(&u_tt).unwrap();
    let tail: Vec<f64> = utt_outer
        .node_values
        .iter()
        .map(|p| utt_outer.total - p)
        .collect();

    let n = basis.n_modes();
    let mut out = vec![0.0; n];
    for j in 0..n {
        let s_j = basis.sample(j, 0, nodes).unwrap();
        let s_j_x = basis.sample(j, 1, nodes).unwrap();
        let s_j_xx = basis.sample(j, 2, nodes).unwrap();

        let inertia_term = quad
            .inner_product(
                &w_x.iter().zip(&tail).map(|(a, b)| a * b).collect::<Vec<_>>(),
                &s_j_x,
            )
            .unwrap();
        let nl1 = quad
            .inner_product(
                &w_xx
                    .iter()
                    .zip(&w_x)
                    .map(|(a, b)| a * b * b)
                    .collect::<Vec<_>>(),
                &s_j_xx,
            )
            .unwrap();
        let nl2 = quad
            .inner_product(
                &w_xx
                    .iter()
                    .zip(&w_x)
                    .map(|(a, b)| a * a * b)
                    .collect::<Vec<_>>(),
                &s_j_x,
            )
            .unwrap();

        // `load` is already the modal projection (p, s_j), subtract directly.
        out[j] = quad.inner_product(&w_tt, &s_j).unwrap()
            + params.stiffness * quad.inner_product(&w_xx, &s_j_xx).unwrap()
            + params.damping * quad.inner_product(&w_xxt, &s_j_xx).unwrap()
            + params.sigma_factor() * params.stiffness * nl1
            + params.sigma_factor() * params.stiffness * nl2
            - params.iota_factor() * inertia_term
            - load[j];
    }
    out
}

#[test]
fn tensor_residual_matches_weak_form_on_random_states() {
    let (basis, quad, ops) = fixture(4, 1.0, 0.05, true, true);
    for seed in 0..50 {
        let state = seeded_state(4, 0.5, seed);
        let accel = seeded_vector(4, 1.0, seed + 1000);
        let load = seeded_vector(4, 0.5, seed + 2000);
        let tensor_route = residual(&ops, &state, &accel, &load);
        let quad_route = weak_form_residual(&basis, &quad, &ops, &state, &accel, &load);
        for j in 0..4 {
            assert!(
                (tensor_route[j] - quad_route[j]).abs() <= 1e-8,
                "seed {seed}, component {j}: {} vs {}",
                tensor_route[j],
                quad_route[j]
            );
        }
    }
}

#[test]
fn weak_form_agrees_for_every_flag_combination() {
    for (sigma, iota) in [(false, false), (true, false), (false, true), (true, true)] {
        let (basis, quad, ops) = fixture(3, 2.0, 0.1, sigma, iota);
        let state = seeded_state(3, 0.4, 9);
        let accel = seeded_vector(3, 0.8, 19);
        let load = seeded_vector(3, 0.3, 29);
        let tensor_route = residual(&ops, &state, &accel, &load);
        let quad_route = weak_form_residual(&basis, &quad, &ops, &state, &accel, &load);
        for j in 0..3 {
            assert!(
                (tensor_route[j] - quad_route[j]).abs() <= 1e-8,
                "sigma={sigma} iota={iota}, component {j}"
            );
        }
    }
}

#[test]
fn stiffness_force_matches_direct_weak_form_quadrature() {
    // Single active mode: N_j computed by tensors equals the two nonlinear
    // weak-form inner products with w = 2 s_1.
    let (basis, quad, ops) = fixture(2, 1.0, 0.0, true, false);
    let q = vec![2.0, 0.0];
    let n_force = stiffness_force(&ops, &q);
    let nodes = quad.nodes();
    let w_x = basis.combine(&q, 1, nodes).unwrap();
    let w_xx = basis.combine(&q, 2, nodes).unwrap();
    for j in 0..2 {
        let s_j_x = basis.sample(j, 1, nodes).unwrap();
        let s_j_xx = basis.sample(j, 2, nodes).unwrap();
        let nl1 = quad
            .inner_product(
                &w_xx.iter().zip(&w_x).map(|(a, b)| a * b * b).collect::<Vec<_>>(),
                &s_j_xx,
            )
            .unwrap();
        let nl2 = quad
            .inner_product(
                &w_xx.iter().zip(&w_x).map(|(a, b)| a * a * b).collect::<Vec<_>>(),
                &s_j_x,
            )
            .unwrap();
        let expected = ops.params().stiffness * (nl1 + nl2);
        assert!(
            (n_force[j] - expected).abs() <= 1e-10 * expected.abs().max(1.0),
            "component {j}: {} vs {expected}",
            n_force[j]
        );
    }
}

#[test]
fn velocity_force_matches_nested_integral_quadrature() {
    // Single mode, q1 = 1, v1 = 3: V_1 = 9 I_1111 must equal the direct
    // quadrature of (\int_0^x w_xt^2, \int_0^x s_1' w_x).
    let (basis, quad, ops) = fixture(1, 1.0, 0.05, true, true);
    let q = vec![1.0];
    let v = vec![3.0];
    let v_force = inertia_velocity_force(&ops, &q, &v);
    let nodes = quad.nodes();
    let w_x = basis.combine(&q, 1, nodes).unwrap();
    let w_xt = basis.combine(&v, 1, nodes).unwrap();
    let h_integrand: Vec<f64> = w_xt.iter().map(|x| x * x).collect();
    let h = quad.cumulative_primitive(&h_integrand).unwrap();
    let s1_x = basis.sample(0, 1, nodes).unwrap();
    let g_integrand: Vec<f64> = s1_x.iter().zip(&w_x).map(|(a, b)| a * b).collect();
    let g = quad.cumulative_primitive(&g_integrand).unwrap();
    let expected = quad.inner_product(&h.node_values, &g.node_values).unwrap();
    assert!(
        (v_force[0] - expected).abs() <= 1e-10 * expected.abs().max(1.0),
        "{} vs {expected}",
        v_force[0]
    );
    assert!(
        (v_force[0] - 9.0 * ops.inertia_tensor().get(0, 0, 0, 0)).abs()
            <= 1e-12 * v_force[0].abs()
    );
}

#[test]
fn solved_acceleration_satisfies_weak_form() {
    // End to end: solve for the acceleration with the tensors, then check
    // the weak-form residual is zero by quadrature.
    let (basis, quad, ops) = fixture(4, 1.0, 0.05, true, true);
    let state = seeded_state(4, 0.3, 77);
    let load = seeded_vector(4, 0.2, 78);
    let accel = solve_acceleration(&ops, &state, &load).unwrap();
    let quad_route = weak_form_residual(&basis, &quad, &ops, &state, &accel, &load);
    for (j, r) in quad_route.iter().enumerate() {
        assert!(r.abs() <= 1e-8, "component {j}: residual {r}");
    }
}
