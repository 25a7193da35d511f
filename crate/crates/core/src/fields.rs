//! Physical-space reconstruction of a modal state: the transverse field and
//! its x-derivatives, and the in-plane displacement slaved to it by the
//! effective inextensibility constraint,
//!
//! ```text
//! u    = -1/2 \int_0^x w_x^2,
//! u_t  =      -\int_0^x w_x w_xt,
//! u_tt =      -\int_0^x [ w_xt^2 + w_x w_xtt ].
//! ```
//!
//! The output grid is independent of the quadrature grid; the primitives at
//! output points are evaluated by per-panel Gauss accumulation up to the
//! containing panel plus a mapped partial rule.

use crate::basis::ModeBasis;
use crate::dynamics::ModalState;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureContext;
use serde::{Deserialize, Serialize};

pub const DEFAULT_GRID_POINTS: usize = 201;

/// Sampled physical fields at one time instant. `u_tt` is present only when
/// the acceleration was supplied to [`reconstruct`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSnapshot {
    pub t: f64,
    pub grid: Vec<f64>,
    pub w: Vec<f64>,
    pub w_x: Vec<f64>,
    pub w_xx: Vec<f64>,
    pub w_xxx: Vec<f64>,
    pub w_xxxx: Vec<f64>,
    pub u: Vec<f64>,
    pub u_t: Vec<f64>,
    pub u_tt: Option<Vec<f64>>,
    /// `w_x^4 / 4`, the deviation of the effective constraint from true
    /// inextensibility.
    pub inext_deviation: Vec<f64>,
}

/// Uniform output grid on `[0, length]` including both endpoints.
pub fn uniform_grid(length: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2);
    let h = length / (points - 1) as f64;
    (0..points)
        .map(|i| if i + 1 == points { length } else { i as f64 * h })
        .collect()
}

/// Reconstructs all fields of `state` on `grid`. Transverse derivatives come
/// from analytic mode evaluation; `w_xxxx` uses `s'''' = kappa^4 s`, exact
/// for the basis. In-plane fields are nested primitives of the transverse
/// ones; `u_tt` needs the acceleration vector.
pub fn reconstruct(
    basis: &ModeBasis,
    quad: &QuadratureContext,
    state: &ModalState,
    accel: Option<&[f64]>,
    grid: &[f64],
) -> Result<FieldSnapshot> {
    let n = basis.n_modes();
    if state.n_modes() != n {
        return Err(Error::InvalidParameter(format!(
            "state has {} modes, basis has {n}",
            state.n_modes()
        )));
    }
    if let Some(a) = accel {
        if a.len() != n {
            return Err(Error::InvalidParameter(format!(
                "acceleration vector has length {}, expected {n}",
                a.len()
            )));
        }
    }
    for &x in grid {
        if !(0.0..=basis.length()).contains(&x) {
            return Err(Error::InvalidParameter(format!(
                "grid point {x} outside [0, {}]",
                basis.length()
            )));
        }
    }

    let w = basis.combine(&state.q, 0, grid)?;
    let w_x = basis.combine(&state.q, 1, grid)?;
    let w_xx = basis.combine(&state.q, 2, grid)?;
    let w_xxx = basis.combine(&state.q, 3, grid)?;
    let q_k4: Vec<f64> = state
        .q
        .iter()
        .enumerate()
        .map(|(m, q)| q * basis.kappa4(m))
        .collect();
    let w_xxxx = basis.combine(&q_k4, 0, grid)?;

    // Closures over the analytic modal fields for the prefix integrals.
    let wx_at = |x: f64| -> f64 {
        (0..n)
            .map(|m| state.q[m] * eval_unchecked(basis, m, x, 1))
            .sum()
    };
    let wxt_at = |x: f64| -> f64 {
        (0..n)
            .map(|m| state.v[m] * eval_unchecked(basis, m, x, 1))
            .sum()
    };

    let u_integrand = |x: f64| {
        let wx = wx_at(x);
        wx * wx
    };
    let u: Vec<f64> = quad
        .prefix_at_points(&u_integrand, grid)
        .into_iter()
        .map(|v| -0.5 * v)
        .collect();

    let ut_integrand = |x: f64| wx_at(x) * wxt_at(x);
    let u_t: Vec<f64> = quad
        .prefix_at_points(&ut_integrand, grid)
        .into_iter()
        .map(|v| -v)
        .collect();

    let u_tt = match accel {
        Some(a) => {
            let wxtt_at = |x: f64| -> f64 {
                (0..n)
                    .map(|m| a[m] * eval_unchecked(basis, m, x, 1))
                    .sum()
            };
            let integrand = |x: f64| {
                let wxt = wxt_at(x);
                wxt * wxt + wx_at(x) * wxtt_at(x)
            };
            Some(
                quad.prefix_at_points(&integrand, grid)
                    .into_iter()
                    .map(|v| -v)
                    .collect(),
            )
        }
        None => None,
    };

    let inext_deviation = w_x.iter().map(|wx| 0.25 * wx.powi(4)).collect();

    Ok(FieldSnapshot {
        t: state.t,
        grid: grid.to_vec(),
        w,
        w_x,
        w_xx,
        w_xxx,
        w_xxxx,
        u,
        u_t,
        u_tt,
        inext_deviation,
    })
}

fn eval_unchecked(basis: &ModeBasis, mode: usize, x: f64, order: usize) -> f64 {
    basis.eval(mode, x, order).expect("mode index checked by caller")
}
