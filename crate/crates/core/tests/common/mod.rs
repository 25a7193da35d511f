//! Shared oracles for the integration tests. Everything here is independent
//! of the engine's own numerical paths: raw-form bisection for wavenumbers,
//! dense trapezoid quadrature for integrals, and closed-form oscillator
//! solutions for the linear dynamics.

#![allow(dead_code)]

use inexbeam::{BeamParameters, DiscreteOperators, ModeBasis, QuadratureContext};

/// Bisection on the raw characteristic form `cos(x) cosh(x) + 1` down to an
/// interval of width `tol`. Valid while `cosh` stays small (first few
/// roots), which is exactly where the reference values live.
pub fn bisect_raw_characteristic(mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let f = |x: f64| x.cos() * x.cosh() + 1.0;
    let mut f_lo = f(lo);
    assert!(
        f_lo * f(hi) < 0.0,
        "oracle bracket [{lo}, {hi}] has no sign change"
    );
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_lo * f_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    0.5 * (lo + hi)
}

/// Dense trapezoid rule on `[a, b]` with `n` intervals.
pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for i in 1..n {
        acc += f(a + i as f64 * h);
    }
    acc * h
}

/// Displacement of the damped linear oscillator
/// `q'' + eta q' + omega0^2 q = 0`, underdamped branch, with `q(0) = q0`,
/// `q'(0) = v0`.
pub fn damped_oscillator(t: f64, q0: f64, v0: f64, omega0_sq: f64, eta: f64) -> f64 {
    let omega_d = (omega0_sq - 0.25 * eta * eta).sqrt();
    let decay = (-0.5 * eta * t).exp();
    decay * (q0 * (omega_d * t).cos() + ((v0 + 0.5 * eta * q0) / omega_d) * (omega_d * t).sin())
}

/// Standard fixture: basis + default quadrature + operators on `[0, 1]`.
pub fn fixture(
    n: usize,
    stiffness: f64,
    damping: f64,
    sigma: bool,
    iota: bool,
) -> (ModeBasis, QuadratureContext, DiscreteOperators) {
    let quad = QuadratureContext::with_defaults(1.0).expect("default quadrature");
    let basis = ModeBasis::new(n, 1.0, &quad).expect("basis");
    let params = BeamParameters::new_with_options(stiffness, 1.0, damping, sigma, iota, true)
        .expect("params");
    let ops = DiscreteOperators::assemble(&basis, &quad, params).expect("operators");
    (basis, quad, ops)
}

/// Deterministic random state with entries in `(-scale, scale)`.
pub fn seeded_state(n: usize, scale: f64, seed: u64) -> inexbeam::ModalState {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let q = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
    let v = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
    inexbeam::ModalState::new(0.0, q, v)
}

pub fn seeded_vector(n: usize, scale: f64, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}
