//! Energy functionals, the damped energy identity residual, the
//! inextensibility residual, higher-energy diagnostics, and fitting helpers
//! (decay rates, convergence orders).
//!
//! The total energy of the model is
//!
//! ```text
//! E = 1/2 ||w_t||^2 + iota/2 ||u_t||^2 + D/2 ||w_xx||^2 + sigma D/2 ||w_x w_xx||^2
//! ```
//!
//! and along unforced trajectories it obeys
//! `E(t) + k2 \int_0^t ||w_xxt||^2 = E(0)`; with forcing the work integral
//! `\int (p, w_t)` joins the right-hand side. Every norm has two independent
//! evaluation routes: exact tensor contractions ([`modal_energy`]) and
//! quadrature on reconstructed physical fields ([`quadrature_energy`]). The
//! identity residual accumulated over a recorded trajectory is the engine's
//! primary correctness instrument.

use crate::assembly::{BeamParameters, DiscreteOperators};
use crate::basis::ModeBasis;
use crate::dynamics::{quartic_potential, ModalState};
use crate::error::{Error, Result};
use crate::integrate::{Trajectory, TrajectoryRecord};
use crate::quadrature::QuadratureContext;
use serde::{Deserialize, Serialize};

/// Instantaneous energy components; all non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyComponents {
    /// `1/2 ||w_t||^2`
    pub kinetic: f64,
    /// `iota/2 ||u_t||^2`
    pub inertial: f64,
    /// `D/2 ||w_xx||^2`
    pub bend: f64,
    /// `sigma D/2 ||w_x w_xx||^2`
    pub nonlinear: f64,
}

impl EnergyComponents {
    pub fn total(&self) -> f64 {
        self.kinetic + self.inertial + self.bend + self.nonlinear
    }
}

/// One energy sample along a trajectory, including the running identity
/// bookkeeping. The accumulated integrals are filled in from recorded
/// samples by the trapezoid rule, not inside the stepper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub e_kinetic: f64,
    pub e_inertial: f64,
    pub e_bend: f64,
    pub e_nl: f64,
    pub e_total: f64,
    /// `k2 ||w_xxt||^2` at this instant (dissipation integrand).
    pub dissipation_rate: f64,
    /// `(p, w_t)` at this instant (work integrand).
    pub work_rate: f64,
    /// `k2 \int_0^t ||w_xxt||^2`, trapezoid over records.
    pub dissipation_accum: f64,
    /// `\int_0^t (p, w_t)`, trapezoid over records.
    pub work_accum: f64,
    /// `E(t) - E(0) + dissipation_accum - work_accum`.
    pub identity_residual: f64,
}

impl EnergyRecord {
    pub fn from_components(t: f64, c: EnergyComponents, dissipation_rate: f64, work_rate: f64) -> Self {
        Self {
            t,
            e_kinetic: c.kinetic,
            e_inertial: c.inertial,
            e_bend: c.bend,
            e_nl: c.nonlinear,
            e_total: c.total(),
            dissipation_rate,
            work_rate,
            dissipation_accum: 0.0,
            work_accum: 0.0,
            identity_residual: 0.0,
        }
    }
}

/// Energy components by exact tensor contraction:
/// `||w_t||^2 = sum v_j^2`, `||w_xx||^2 = sum kappa_j^4 q_j^2`,
/// `||w_x w_xx||^2 = sum q q q q S`, `||u_t||^2 = sum q v q v I`.
pub fn modal_energy(ops: &DiscreteOperators, state: &ModalState) -> EnergyComponents {
    let params = ops.params();
    let n = ops.n_modes();
    let kinetic = 0.5 * state.v.iter().map(|v| v * v).sum::<f64>();
    let bend = 0.5
        * params.stiffness
        * state
            .q
            .iter()
            .zip(ops.kappa4())
            .map(|(q, k4)| k4 * q * q)
            .sum::<f64>();
    let nonlinear = quartic_potential(ops, &state.q);
    let inertial = if params.iota {
        let tensor = ops.inertia_tensor();
        let mut acc = 0.0;
        for a in 0..n {
            if state.q[a] == 0.0 {
                continue;
            }
            for b in 0..n {
                if state.v[b] == 0.0 {
                    continue;
                }
                let qv = state.q[a] * state.v[b];
                for c in 0..n {
                    if state.q[c] == 0.0 {
                        continue;
                    }
                    let qvq = qv * state.q[c];
                    for d in 0..n {
                        acc += qvq * state.v[d] * tensor.get(a, b, c, d);
                    }
                }
            }
        }
        0.5 * acc
    } else {
        0.0
    };
    EnergyComponents {
        kinetic,
        inertial,
        bend,
        nonlinear,
    }
}

/// Dissipation integrand `k2 ||w_xxt||^2 = k2 sum kappa_j^4 v_j^2`.
pub fn dissipation_rate(ops: &DiscreteOperators, state: &ModalState) -> f64 {
    ops.params().damping
        * state
            .v
            .iter()
            .zip(ops.kappa4())
            .map(|(v, k4)| k4 * v * v)
            .sum::<f64>()
}

/// Energy components by field reconstruction and quadrature, with
/// `u_t = -\int_0^x w_x w_xt`. Independent oracle for [`modal_energy`].
pub fn quadrature_energy(
    basis: &ModeBasis,
    quad: &QuadratureContext,
    state: &ModalState,
    params: &BeamParameters,
) -> Result<EnergyComponents> {
    let nodes = quad.nodes();
    let w_t = basis.combine(&state.v, 0, nodes)?;
    let w_x = basis.combine(&state.q, 1, nodes)?;
    let w_xx = basis.combine(&state.q, 2, nodes)?;
    let w_xt = basis.combine(&state.v, 1, nodes)?;

    let kinetic = 0.5 * quad.inner_product(&w_t, &w_t)?;
    let bend = 0.5 * params.stiffness * quad.inner_product(&w_xx, &w_xx)?;
    let nonlinear = if params.sigma {
        let prod: Vec<f64> = w_x.iter().zip(&w_xx).map(|(a, b)| a * b).collect();
        0.5 * params.stiffness * quad.inner_product(&prod, &prod)?
    } else {
        0.0
    };
    let inertial = if params.iota {
        let integrand: Vec<f64> = w_x.iter().zip(&w_xt).map(|(a, b)| a * b).collect();
        let u_t = quad.cumulative_primitive(&integrand)?;
        0.5 * quad.inner_product(&u_t.node_values, &u_t.node_values)?
    } else {
        0.0
    };
    Ok(EnergyComponents {
        kinetic,
        inertial,
        bend,
        nonlinear,
    })
}

/// Fills `dissipation_accum`, `work_accum`, and `identity_residual` of every
/// record from the recorded rates by the trapezoid rule.
pub fn accumulate_identity(records: &mut [TrajectoryRecord]) {
    if records.is_empty() {
        return;
    }
    let e0 = records[0].energy.e_total;
    records[0].energy.dissipation_accum = 0.0;
    records[0].energy.work_accum = 0.0;
    records[0].energy.identity_residual = 0.0;
    for k in 1..records.len() {
        let dt = records[k].energy.t - records[k - 1].energy.t;
        let diss = records[k - 1].energy.dissipation_accum
            + 0.5 * dt * (records[k - 1].energy.dissipation_rate + records[k].energy.dissipation_rate);
        let work = records[k - 1].energy.work_accum
            + 0.5 * dt * (records[k - 1].energy.work_rate + records[k].energy.work_rate);
        records[k].energy.dissipation_accum = diss;
        records[k].energy.work_accum = work;
        records[k].energy.identity_residual = records[k].energy.e_total - e0 + diss - work;
    }
}

/// `(t, identity_residual)` series of a recorded trajectory.
pub fn identity_residual_series(trajectory: &Trajectory) -> Vec<(f64, f64)> {
    trajectory
        .records
        .iter()
        .map(|r| (r.energy.t, r.energy.identity_residual))
        .collect()
}

/// Largest `|identity_residual|` over a trajectory, the headline scalar.
pub fn max_identity_residual(trajectory: &Trajectory) -> f64 {
    trajectory
        .records
        .iter()
        .fold(0.0_f64, |m, r| m.max(r.energy.identity_residual.abs()))
}

/// Pointwise inextensibility check on the quadrature grid.
#[derive(Debug, Clone, Copy)]
pub struct InextensibilityReport {
    /// max over nodes of `|(1 + u_x)^2 + w_x^2 - 1 - w_x^4/4|` with
    /// `u_x = -w_x^2/2`; an algebraic identity, nonzero only by round-off.
    pub algebraic_residual: f64,
    /// max over nodes of `w_x^4 / 4`: the distance of the effective
    /// constraint from true arc-length preservation.
    pub deviation: f64,
}

/// Evaluates the effective-constraint identity
/// `(1 + u_x)^2 + w_x^2 = 1 + w_x^4/4` on the quadrature grid.
pub fn inextensibility_residual(
    basis: &ModeBasis,
    quad: &QuadratureContext,
    state: &ModalState,
) -> Result<InextensibilityReport> {
    let w_x = basis.combine(&state.q, 1, quad.nodes())?;
    let mut report = InextensibilityReport {
        algebraic_residual: 0.0,
        deviation: 0.0,
    };
    for wx in w_x {
        let u_x = -0.5 * wx * wx;
        let lhs = (1.0 + u_x) * (1.0 + u_x) + wx * wx;
        let quart = 0.25 * wx.powi(4);
        report.algebraic_residual = report.algebraic_residual.max((lhs - 1.0 - quart).abs());
        report.deviation = report.deviation.max(quart);
    }
    Ok(report)
}

/// First higher-order energy,
/// `E1 = 1/2 [ ||w_tt||^2 + D ||w_xxt||^2 + D ||w_xt w_xx||^2 + D ||w_x w_xxt||^2 ]`,
/// plus `1/2 ||u_tt||^2` when the inertia flag is on. Diagnostic only; needs
/// the acceleration from the solve.
pub fn higher_energy_e1(ops: &DiscreteOperators, state: &ModalState, accel: &[f64]) -> f64 {
    let n = ops.n_modes();
    debug_assert_eq!(accel.len(), n);
    let params = ops.params();
    let d = params.stiffness;
    let s = ops.stiffness_tensor();

    let wtt2: f64 = accel.iter().map(|a| a * a).sum();
    let wxxt2: f64 = state
        .v
        .iter()
        .zip(ops.kappa4())
        .map(|(v, k4)| k4 * v * v)
        .sum();
    // ||w_xt w_xx||^2: second derivatives carry q, first derivatives carry v.
    let mut mixed_qv = 0.0;
    // ||w_x w_xxt||^2: second derivatives carry v, first derivatives carry q.
    let mut mixed_vq = 0.0;
    for a in 0..n {
        for b in 0..n {
            let qq = state.q[a] * state.q[b];
            let vv = state.v[a] * state.v[b];
            for c in 0..n {
                for e in 0..n {
                    let t = s.get(a, b, c, e);
                    mixed_qv += qq * state.v[c] * state.v[e] * t;
                    mixed_vq += vv * state.q[c] * state.q[e] * t;
                }
            }
        }
    }
    let mut e1 = 0.5 * (wtt2 + d * wxxt2 + d * mixed_qv + d * mixed_vq);
    if params.iota {
        // u_tt = -sum_ab (v_a v_b + q_a a_b) F_ab
        let tensor = ops.inertia_tensor();
        let mut coeff = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                coeff[a * n + b] = state.v[a] * state.v[b] + state.q[a] * accel[b];
            }
        }
        let mut utt2 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let cab = coeff[a * n + b];
                if cab == 0.0 {
                    continue;
                }
                for c in 0..n {
                    for e in 0..n {
                        utt2 += cab * coeff[c * n + e] * tensor.get(a, b, c, e);
                    }
                }
            }
        }
        e1 += 0.5 * utt2;
    }
    e1
}

/// Exponential decay fit `E(t) ~ M exp(-omega t)` by least squares on
/// `(t, ln E)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecayFit {
    pub omega: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    pub samples_used: usize,
}

/// Fits a decay rate over `window = (t_start, t_end)`. Samples are truncated
/// at the first energy at or below `floor` (the tail under the floor is
/// round-off, not decay).
pub fn fit_decay_rate(
    samples: &[(f64, f64)],
    window: (f64, f64),
    floor: f64,
) -> Result<DecayFit> {
    let (t_start, t_end) = window;
    if t_end <= t_start || t_end.is_nan() || t_start.is_nan() {
        return Err(Error::InvalidSeries(format!(
            "decay window must have t_end > t_start, got [{t_start}, {t_end}]"
        )));
    }
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for &(t, e) in samples {
        if t < t_start || t > t_end {
            continue;
        }
        // the tail at or under the floor (and anything non-positive, where
        // the log is undefined) is round-off, not decay
        if e <= floor || e <= 0.0 {
            break;
        }
        pts.push((t, e.ln()));
    }
    if pts.len() < 2 {
        return Err(Error::EmptyWindow { t_start, t_end });
    }
    let (slope, intercept, r2) = linear_fit(&pts);
    Ok(DecayFit {
        omega: -slope,
        amplitude: intercept.exp(),
        r_squared: r2,
        samples_used: pts.len(),
    })
}

/// Fits a decay rate to the `E_total` series of a trajectory.
pub fn fit_trajectory_decay(
    trajectory: &Trajectory,
    window: (f64, f64),
    floor: f64,
) -> Result<DecayFit> {
    let series: Vec<(f64, f64)> = trajectory
        .records
        .iter()
        .map(|r| (r.energy.t, r.energy.e_total))
        .collect();
    fit_decay_rate(&series, window, floor)
}

/// Observed convergence order from `(dt, error)` pairs: the least-squares
/// slope of `ln error` against `ln dt`. Needs at least three points with
/// strictly decreasing `dt` and positive errors.
pub fn convergence_order(errors: &[(f64, f64)]) -> Result<f64> {
    if errors.len() < 3 {
        return Err(Error::InvalidSeries(format!(
            "convergence order needs >= 3 points, got {}",
            errors.len()
        )));
    }
    for pair in errors.windows(2) {
        if pair[1].0 >= pair[0].0 || pair[1].0.is_nan() {
            return Err(Error::InvalidSeries(
                "dt values must be strictly decreasing".into(),
            ));
        }
    }
    let mut pts = Vec::with_capacity(errors.len());
    for &(dt, err) in errors {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(Error::InvalidSeries(format!(
                "dt values must be positive and finite, got {dt}"
            )));
        }
        if err <= 0.0 || !err.is_finite() {
            return Err(Error::InvalidSeries(format!(
                "errors must be positive and finite, got {err} at dt = {dt}"
            )));
        }
        pts.push((dt.ln(), err.ln()));
    }
    let (slope, _, _) = linear_fit(&pts);
    Ok(slope)
}

/// Least squares `y = a + b x`; returns `(b, a, r^2)`.
fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in pts {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = pts
        .iter()
        .map(|&(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (slope, intercept, r2)
}
