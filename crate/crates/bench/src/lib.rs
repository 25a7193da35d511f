//! Shared fixtures for the engine benchmarks.

use inexbeam::{BeamParameters, DiscreteOperators, ModalState, ModeBasis, QuadratureContext};

/// Basis + quadrature + operators on the unit interval with both
/// nonlinearities and light damping.
pub fn operators(n: usize) -> (ModeBasis, QuadratureContext, DiscreteOperators) {
    let quad = QuadratureContext::with_defaults(1.0).expect("quadrature");
    let basis = ModeBasis::new(n, 1.0, &quad).expect("basis");
    let params = BeamParameters::new(1.0, 1.0, 0.05, true, true).expect("params");
    let ops = DiscreteOperators::assemble(&basis, &quad, params).expect("operators");
    (basis, quad, ops)
}

/// A deterministic non-trivial state: decaying modal amplitudes with
/// alternating signs.
pub fn probe_state(n: usize) -> ModalState {
    let q: Vec<f64> = (0..n)
        .map(|j| 0.2 * (-1.0_f64).powi(j as i32) / (1.0 + j as f64))
        .collect();
    let v: Vec<f64> = (0..n).map(|j| 0.1 / (1.0 + j as f64)).collect();
    ModalState::new(0.0, q, v)
}
