//! The truncated equations of motion and the acceleration solve.
//!
//! Expanding `w = sum_a q_a s_a` and testing the weak form against `s_j`
//! gives, term by term (orthonormality collapses the linear terms):
//!
//! * `(w_tt, s_j)`: mass-matrix row `[M(q) a]_j` (below),
//! * `D (w_xx, s_j'')      = D kappa_j^4 q_j`,
//! * `k2 (w_xxt, s_j'')    = k2 kappa_j^4 v_j`,
//! * `sigma D (w_xx w_x, w_x s_j'')  = sigma D sum q_a q_b q_c S[a][j][b][c]`,
//! * `sigma D (w_xx w_x, w_xx s_j')  = sigma D sum q_a q_b q_c S[a][c][b][j]`,
//! * `-iota (w_x \int_x^L u_tt, s_j')`: with
//!   `u_tt = -sum_ab (v_a v_b + q_a a_b) F_ab` and the exchange identity
//!   `\int_0^L (\int_x^L g) h dx = (g, \int_0^x h)`, this term becomes
//!   `iota sum_abc (v_a v_b + q_a a_b) q_c I[a][b][c][j]`.
//!
//! Sorting by the acceleration `a = q''` yields the semi-discrete system
//!
//! ```text
//! M(q) a + k2 K4 v + D K4 q + N(q) + V(q, v) = P(t),
//! M(q)[j][b]  = delta_jb + iota * sum_ac q_a q_c I[a][b][c][j],
//! N_j(q)      = sigma D sum_abc q_a q_b q_c (S[a][j][b][c] + S[a][c][b][j]),
//! V_j(q, v)   = iota sum_abc v_a v_b q_c I[a][b][c][j].
//! ```
//!
//! With a single active mode `i` these collapse to the diagonal patterns
//! `D q_i^3 (S_iiij + S_jiii)` and `[a_i q_i^2 + v_i^2 q_i] I_iiij`, which is
//! pinned by unit tests. `M(q) = I + Gram(g_b)` with `g_b = sum_a q_a F_ab`,
//! so `M` is symmetric positive definite with every eigenvalue `>= 1` for
//! any state; the acceleration is always well defined and is computed by a
//! Cholesky solve. `N` is the gradient of the quartic potential
//! `(sigma D / 2) sum q_a q_b q_c q_d S[a][b][c][d]`.

use crate::assembly::DiscreteOperators;
use crate::error::Result;
use crate::linalg;
use serde::{Deserialize, Serialize};

/// Modal coordinates and velocities at a time instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalState {
    pub t: f64,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

impl ModalState {
    pub fn new(t: f64, q: Vec<f64>, v: Vec<f64>) -> Self {
        assert_eq!(q.len(), v.len(), "q and v must have equal length");
        Self { t, q, v }
    }

    pub fn zero(n: usize, t: f64) -> Self {
        Self {
            t,
            q: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn n_modes(&self) -> usize {
        self.q.len()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.q.iter().all(|x| x.is_finite())
            && self.v.iter().all(|x| x.is_finite())
    }
}

/// `M(q) = I + iota * G(q)`, row-major symmetric, eigenvalues >= 1.
pub fn nonlinear_mass(ops: &DiscreteOperators, q: &[f64]) -> Vec<f64> {
    let n = ops.n_modes();
    debug_assert_eq!(q.len(), n);
    let mut m = vec![0.0; n * n];
    for j in 0..n {
        m[j * n + j] = 1.0;
    }
    if !ops.params().iota {
        return m;
    }
    let tensor = ops.inertia_tensor();
    // G[j][b] = (g_b, g_j) is symmetric; fill the upper triangle and mirror.
    for j in 0..n {
        for b in j..n {
            let mut acc = 0.0;
            for a in 0..n {
                if q[a] == 0.0 {
                    continue;
                }
                for c in 0..n {
                    acc += q[a] * q[c] * tensor.get(a, b, c, j);
                }
            }
            m[j * n + b] += acc;
            if b != j {
                m[b * n + j] += acc;
            }
        }
    }
    m
}

/// Cubic restoring force `N(q)`, the gradient of the quartic potential.
pub fn stiffness_force(ops: &DiscreteOperators, q: &[f64]) -> Vec<f64> {
    let n = ops.n_modes();
    debug_assert_eq!(q.len(), n);
    let mut out = vec![0.0; n];
    if !ops.params().sigma {
        return out;
    }
    let d = ops.params().stiffness;
    let s = ops.stiffness_tensor();
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for a in 0..n {
            if q[a] == 0.0 {
                continue;
            }
            for b in 0..n {
                if q[b] == 0.0 {
                    continue;
                }
                let qab = q[a] * q[b];
                for c in 0..n {
                    acc += qab * q[c] * (s.get(a, j, b, c) + s.get(a, c, b, j));
                }
            }
        }
        *o = d * acc;
    }
    out
}

/// Velocity-quadratic inertia force `V(q, v)`.
pub fn inertia_velocity_force(ops: &DiscreteOperators, q: &[f64], v: &[f64]) -> Vec<f64> {
    let n = ops.n_modes();
    debug_assert_eq!(q.len(), n);
    debug_assert_eq!(v.len(), n);
    let mut out = vec![0.0; n];
    if !ops.params().iota {
        return out;
    }
    let tensor = ops.inertia_tensor();
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for a in 0..n {
            if v[a] == 0.0 {
                continue;
            }
            for b in 0..n {
                if v[b] == 0.0 {
                    continue;
                }
                let vab = v[a] * v[b];
                for c in 0..n {
                    acc += vab * q[c] * tensor.get(a, b, c, j);
                }
            }
        }
        *o = acc;
    }
    out
}

/// The quartic potential `(sigma D / 2) sum q_a q_b q_c q_d S[a][b][c][d]`,
/// whose gradient is [`stiffness_force`]. Also equals the nonlinear bending
/// energy `sigma (D/2) ||w_x w_xx||^2`.
pub fn quartic_potential(ops: &DiscreteOperators, q: &[f64]) -> f64 {
    if !ops.params().sigma {
        return 0.0;
    }
    let n = ops.n_modes();
    let s = ops.stiffness_tensor();
    let mut acc = 0.0;
    for a in 0..n {
        if q[a] == 0.0 {
            continue;
        }
        for b in 0..n {
            if q[b] == 0.0 {
                continue;
            }
            let qab = q[a] * q[b];
            for c in 0..n {
                if q[c] == 0.0 {
                    continue;
                }
                let qabc = qab * q[c];
                for d in 0..n {
                    acc += qabc * q[d] * s.get(a, b, c, d);
                }
            }
        }
    }
    0.5 * ops.params().stiffness * acc
}

/// Right-hand side of the acceleration solve:
/// `rhs = P - k2 K4 v - D K4 q - N(q) - V(q, v)`.
pub fn acceleration_rhs(ops: &DiscreteOperators, state: &ModalState, load: &[f64]) -> Vec<f64> {
    let n = ops.n_modes();
    debug_assert_eq!(load.len(), n);
    let params = ops.params();
    let nq = stiffness_force(ops, &state.q);
    let vqv = inertia_velocity_force(ops, &state.q, &state.v);
    let mut rhs = vec![0.0; n];
    for j in 0..n {
        let k4 = ops.kappa4()[j];
        rhs[j] = load[j]
            - params.damping * k4 * state.v[j]
            - params.stiffness * k4 * state.q[j]
            - nq[j]
            - vqv[j];
    }
    rhs
}

/// Residual `R = M(q) a + k2 K4 v + D K4 q + N(q) + V(q, v) - P`;
/// `R = 0` defines the semi-discrete motion.
pub fn residual(
    ops: &DiscreteOperators,
    state: &ModalState,
    accel: &[f64],
    load: &[f64],
) -> Vec<f64> {
    let n = ops.n_modes();
    debug_assert_eq!(accel.len(), n);
    let m = nonlinear_mass(ops, &state.q);
    let rhs = acceleration_rhs(ops, state, load);
    let mut r = vec![0.0; n];
    for j in 0..n {
        let mut ma = 0.0;
        for b in 0..n {
            ma += m[j * n + b] * accel[b];
        }
        r[j] = ma - rhs[j];
    }
    r
}

/// Solves `M(q) a = rhs` by Cholesky. With the inertia flag off the mass
/// matrix is the identity and `a = rhs` componentwise.
pub fn solve_acceleration(
    ops: &DiscreteOperators,
    state: &ModalState,
    load: &[f64],
) -> Result<Vec<f64>> {
    let mut rhs = acceleration_rhs(ops, state, load);
    if !ops.params().iota {
        return Ok(rhs);
    }
    let n = ops.n_modes();
    let mut m = nonlinear_mass(ops, &state.q);
    linalg::cholesky_factor(&mut m, n)?;
    linalg::cholesky_solve(&m, n, &mut rhs);
    Ok(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{BeamParameters, DiscreteOperators};
    use crate::basis::ModeBasis;
    use crate::quadrature::QuadratureContext;
    use proptest::prelude::*;

    fn fixture(n: usize, damping: f64, sigma: bool, iota: bool) -> DiscreteOperators {
        let quad = QuadratureContext::with_defaults(1.0).unwrap();
        let basis = ModeBasis::new(n, 1.0, &quad).unwrap();
        let params =
            BeamParameters::new_with_options(1.0, 1.0, damping, sigma, iota, true).unwrap();
        DiscreteOperators::assemble(&basis, &quad, params).unwrap()
    }

    fn seeded_state(n: usize, scale: f64, seed: u64) -> ModalState {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let q = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
        let v = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
        ModalState::new(0.0, q, v)
    }

    #[test]
    fn mass_is_identity_for_zero_state_or_flag_off() {
        let ops = fixture(3, 0.05, true, true);
        let m = nonlinear_mass(&ops, &[0.0; 3]);
        for j in 0..3 {
            for b in 0..3 {
                assert_eq!(m[j * 3 + b], if j == b { 1.0 } else { 0.0 });
            }
        }
        let ops_off = fixture(3, 0.0, true, false);
        let m = nonlinear_mass(&ops_off, &[0.4, -0.3, 0.8]);
        for j in 0..3 {
            for b in 0..3 {
                assert_eq!(m[j * 3 + b], if j == b { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn mass_matrix_dominates_identity() {
        let ops = fixture(3, 0.05, true, true);
        for seed in 0..5 {
            let state = seeded_state(3, 1.0, seed);
            let m = nonlinear_mass(&ops, &state.q);
            let nm = nalgebra::DMatrix::from_row_slice(3, 3, &m);
            let eig = nm.symmetric_eigen();
            for ev in eig.eigenvalues.iter() {
                assert!(*ev >= 1.0 - 1e-12, "eigenvalue {ev}");
            }
            // symmetric by construction
            for j in 0..3 {
                for b in 0..3 {
                    assert_eq!(m[j * 3 + b], m[b * 3 + j]);
                }
            }
        }
    }

    #[test]
    fn forces_vanish_with_flags_off_or_zero_state() {
        let ops = fixture(3, 0.05, true, true);
        assert!(stiffness_force(&ops, &[0.0; 3]).iter().all(|&x| x == 0.0));
        assert!(
            inertia_velocity_force(&ops, &[0.3, 0.1, -0.2], &[0.0; 3])
                .iter()
                .all(|&x| x == 0.0)
        );
        let ops_plain = fixture(3, 0.0, false, false);
        assert!(stiffness_force(&ops_plain, &[0.5, -0.4, 0.2])
            .iter()
            .all(|&x| x == 0.0));
        assert!(
            inertia_velocity_force(&ops_plain, &[0.5, -0.4, 0.2], &[1.0, 2.0, 3.0])
                .iter()
                .all(|&x| x == 0.0)
        );
    }

    #[test]
    fn single_mode_stiffness_reduces_to_diagonal_pattern() {
        // One active mode i: N_j = D q_i^3 (S_iiij + S_jiii).
        let ops = fixture(3, 0.0, true, false);
        let s = ops.stiffness_tensor();
        let d = ops.params().stiffness;
        for i in 0..3 {
            let mut q = [0.0; 3];
            q[i] = 0.7;
            let n_force = stiffness_force(&ops, &q);
            for j in 0..3 {
                let expected = d * q[i].powi(3) * (s.get(i, i, i, j) + s.get(j, i, i, i));
                assert!(
                    (n_force[j] - expected).abs() <= 1e-12 * expected.abs().max(1.0),
                    "i = {i}, j = {j}: {} vs {expected}",
                    n_force[j]
                );
            }
        }
    }

    #[test]
    fn single_mode_inertia_reduces_to_diagonal_pattern() {
        // One active mode i: [(M - I) a]_j = a_i q_i^2 I_iiij and
        // V_j = v_i^2 q_i I_iiij.
        let ops = fixture(3, 0.05, true, true);
        let tensor = ops.inertia_tensor();
        let i = 1;
        let (qi, vi, ai) = (0.6, -1.3, 2.2);
        let mut q = [0.0; 3];
        let mut v = [0.0; 3];
        let mut a = [0.0; 3];
        q[i] = qi;
        v[i] = vi;
        a[i] = ai;
        let m = nonlinear_mass(&ops, &q);
        for j in 0..3 {
            let mut ma = 0.0;
            for b in 0..3 {
                ma += (m[j * 3 + b] - if j == b { 1.0 } else { 0.0 }) * a[b];
            }
            let expected = ai * qi * qi * tensor.get(i, i, i, j);
            assert!((ma - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        }
        let vq = inertia_velocity_force(&ops, &q, &v);
        for j in 0..3 {
            let expected = vi * vi * qi * tensor.get(i, i, i, j);
            assert!((vq[j] - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn n16_single_mode_example() {
        // q1 = 2 on a single-mode system: N_1 = 16 D S_1111.
        let ops = fixture(1, 0.0, true, false);
        let n_force = stiffness_force(&ops, &[2.0]);
        let expected = 16.0 * ops.params().stiffness * ops.stiffness_tensor().get(0, 0, 0, 0);
        assert!((n_force[0] - expected).abs() <= 1e-12 * expected.abs());
    }

    #[test]
    fn single_mode_velocity_force_example() {
        // q1 = 1, v1 = 3: V_1 = 9 I_1111.
        let ops = fixture(1, 0.05, true, true);
        let v_force = inertia_velocity_force(&ops, &[1.0], &[3.0]);
        let expected = 9.0 * ops.inertia_tensor().get(0, 0, 0, 0);
        assert!((v_force[0] - expected).abs() <= 1e-12 * expected.abs());
    }

    #[test]
    fn stiffness_force_is_gradient_of_quartic_potential() {
        let ops = fixture(3, 0.0, true, false);
        let state = seeded_state(3, 0.6, 7);
        let n_force = stiffness_force(&ops, &state.q);
        let h = 1e-6;
        for j in 0..3 {
            let mut up = state.q.clone();
            let mut down = state.q.clone();
            up[j] += h;
            down[j] -= h;
            let fd = (quartic_potential(&ops, &up) - quartic_potential(&ops, &down)) / (2.0 * h);
            assert!(
                (fd - n_force[j]).abs() <= 1e-6 * fd.abs().max(1.0),
                "component {j}: fd {fd} vs {}",
                n_force[j]
            );
        }
    }

    #[test]
    fn acceleration_identity_path_when_mass_trivial() {
        let ops = fixture(3, 0.1, true, false);
        let state = seeded_state(3, 0.5, 3);
        let load = vec![0.3, -0.1, 0.0];
        let a = solve_acceleration(&ops, &state, &load).unwrap();
        let rhs = acceleration_rhs(&ops, &state, &load);
        assert_eq!(a, rhs);

        // iota on but q = 0 also leaves M = I.
        let ops_iota = fixture(3, 0.1, true, true);
        let rest = ModalState::new(0.0, vec![0.0; 3], vec![0.4, 0.0, -0.2]);
        let a = solve_acceleration(&ops_iota, &rest, &load).unwrap();
        let rhs = acceleration_rhs(&ops_iota, &rest, &load);
        assert_eq!(a, rhs);
    }

    #[test]
    fn acceleration_matches_explicit_two_by_two_inverse() {
        let ops = fixture(2, 0.05, true, true);
        let state = seeded_state(2, 0.8, 11);
        let load = vec![0.25, -0.75];
        let a = solve_acceleration(&ops, &state, &load).unwrap();
        let m = nonlinear_mass(&ops, &state.q);
        let rhs = acceleration_rhs(&ops, &state, &load);
        let det = m[0] * m[3] - m[1] * m[2];
        let exact = [
            (m[3] * rhs[0] - m[1] * rhs[1]) / det,
            (-m[2] * rhs[0] + m[0] * rhs[1]) / det,
        ];
        for j in 0..2 {
            assert!((a[j] - exact[j]).abs() <= 1e-12 * exact[j].abs().max(1.0));
        }
    }

    #[test]
    fn residual_vanishes_on_solved_acceleration() {
        let ops = fixture(4, 0.05, true, true);
        for seed in 0..10 {
            let state = seeded_state(4, 1.0, seed);
            let load = seeded_state(4, 0.5, seed + 100).q;
            let a = solve_acceleration(&ops, &state, &load).unwrap();
            let r = residual(&ops, &state, &a, &load);
            let rhs = acceleration_rhs(&ops, &state, &load);
            let scale = 1.0 + rhs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            for rj in &r {
                assert!(rj.abs() <= 1e-12 * scale, "residual {rj}, scale {scale}");
            }
        }
    }

    #[test]
    fn residual_zero_for_decoupled_linear_oscillators() {
        let ops = fixture(3, 0.2, false, false);
        let state = seeded_state(3, 1.0, 5);
        let load = vec![0.1, 0.2, -0.3];
        let params = *ops.params();
        let a: Vec<f64> = (0..3)
            .map(|j| {
                load[j]
                    - params.stiffness * ops.kappa4()[j] * state.q[j]
                    - params.damping * ops.kappa4()[j] * state.v[j]
            })
            .collect();
        let r = residual(&ops, &state, &a, &load);
        for rj in &r {
            assert_eq!(*rj, 0.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        /// N(alpha q) = alpha^3 N(q).
        #[test]
        fn stiffness_force_is_cubic(alpha in 0.1f64..2.0, seed in 0u64..20) {
            let ops = fixture(3, 0.0, true, false);
            let state = seeded_state(3, 0.5, seed);
            let scaled: Vec<f64> = state.q.iter().map(|x| alpha * x).collect();
            let n1 = stiffness_force(&ops, &scaled);
            let n0 = stiffness_force(&ops, &state.q);
            for j in 0..3 {
                let want = alpha.powi(3) * n0[j];
                prop_assert!((n1[j] - want).abs() <= 1e-10 * want.abs().max(1e-12));
            }
        }

        /// V(alpha q, beta v) = alpha beta^2 V(q, v).
        #[test]
        fn velocity_force_scaling(alpha in 0.1f64..2.0, beta in 0.1f64..2.0, seed in 0u64..20) {
            let ops = fixture(3, 0.05, true, true);
            let state = seeded_state(3, 0.5, seed);
            let qs: Vec<f64> = state.q.iter().map(|x| alpha * x).collect();
            let vs: Vec<f64> = state.v.iter().map(|x| beta * x).collect();
            let v1 = inertia_velocity_force(&ops, &qs, &vs);
            let v0 = inertia_velocity_force(&ops, &state.q, &state.v);
            for j in 0..3 {
                let want = alpha * beta * beta * v0[j];
                prop_assert!((v1[j] - want).abs() <= 1e-10 * want.abs().max(1e-12));
            }
        }

        /// M(alpha q) - I = alpha^2 (M(q) - I).
        #[test]
        fn mass_deviation_is_quadratic(alpha in 0.1f64..2.0, seed in 0u64..20) {
            let ops = fixture(3, 0.05, true, true);
            let state = seeded_state(3, 0.5, seed);
            let qs: Vec<f64> = state.q.iter().map(|x| alpha * x).collect();
            let m1 = nonlinear_mass(&ops, &qs);
            let m0 = nonlinear_mass(&ops, &state.q);
            for j in 0..3 {
                for b in 0..3 {
                    let id = if j == b { 1.0 } else { 0.0 };
                    let want = alpha * alpha * (m0[j * 3 + b] - id);
                    let got = m1[j * 3 + b] - id;
                    prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1e-12));
                }
            }
        }
    }
}
