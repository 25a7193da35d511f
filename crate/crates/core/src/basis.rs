//! Clamped-free Euler-Bernoulli eigenfunctions, the Galerkin approximants.
//!
//! The mode shapes are
//!
//! ```text
//! s_n(x) = c_n [cos(k_n x) - cosh(k_n x)] + C_n [sin(k_n x) - sinh(k_n x)],
//! ```
//!
//! where `k_n L` runs over the positive roots of `cos(kL) cosh(kL) = -1`,
//! `C_n/c_n` is fixed by the free-end conditions and `c_n > 0` normalizes
//! `\int_0^L s_n^2 = 1`. They satisfy `s'''' = k^4 s`, so the eigenvalue of
//! the stiffness operator `D d^4/dx^4` associated with mode `n` is
//! `D k_n^4`; the shapes themselves do not depend on `D`.
//!
//! Two numerical points worth noting:
//!
//! * The characteristic function is evaluated as `cos(x) + sech(x)`, which
//!   has the same roots as `cos(x) cosh(x) + 1` but stays O(1). The raw
//!   product form overflows near `x = 710` and, well before that, cannot be
//!   driven to small residuals: stepping `x` by one ulp moves the product
//!   by about `ulp(x) * cosh(x)`, which already exceeds 1e-12 past
//!   `x ~ 10`, so no representable root satisfies the raw equation to that
//!   tolerance in f64.
//! * For `k x > 1` the shape is evaluated in an exponential regrouping
//!   `c [(cos + r sin) - (a e^{kx} + b e^{-kx})]` with `a = (1 + r)/2`
//!   computed from a cancellation-free closed form. The textbook
//!   `cos - cosh` grouping subtracts two numbers of size `e^{kx}/2` and
//!   destroys the free-end conditions in floating point from roughly the
//!   seventh mode on; the regrouped form is exact-to-rounding for every mode
//!   this crate admits.

use crate::error::{Error, Result};
use crate::quadrature::QuadratureContext;
use serde::{Deserialize, Serialize};

/// Hard cap on the retained mode count. The dense four-tensors grow as n^4
/// (n = 32 is ~8 MB per tensor); 16 is plenty at desk scale.
pub const MAX_MODES: usize = 32;

const CHAR_RESIDUAL_TOL: f64 = 1e-12;

/// One mode: wavenumber, shape coefficients, and the precomputed constants
/// of the numerically stable evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct Mode {
    kappa: f64,
    /// Normalization coefficient, > 0.
    c: f64,
    /// Companion coefficient, `C = ratio * c`.
    c_big: f64,
    /// `C/c = -(cos kL + cosh kL) / (sin kL + sinh kL)`.
    ratio: f64,
    /// `(1 + ratio)/2` in cancellation-free form.
    alpha: f64,
    /// `(1 - ratio)/2`.
    beta: f64,
}

/// The first `n` clamped-free modes on `[0, L]`, immutable after
/// construction and safe to share across threads.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeBasis {
    length: f64,
    modes: Vec<Mode>,
}

/// Characteristic function in the cosh-normalized form `cos x + sech x`.
/// Same zero set as `cos(x) cosh(x) + 1`, well conditioned for all x.
pub fn characteristic(x: f64) -> f64 {
    x.cos() + 1.0 / x.cosh()
}

/// The `n` smallest positive roots of `cos(kL) cosh(kL) = -1`, found by
/// bracketed bisection plus a secant polish on intervals centered at the
/// asymptotic guesses `kL = (2n - 1) pi / 2`. Residuals (in the normalized
/// form) are at most 1e-12.
pub fn solve_wavenumbers(n: usize, length: f64) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::InvalidParameter("mode count must be >= 1".into()));
    }
    if length <= 0.0 || !length.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "beam length must be positive and finite, got {length}"
        )));
    }
    let mut roots = Vec::with_capacity(n);
    for index in 1..=n {
        let center = (2.0 * index as f64 - 1.0) * std::f64::consts::FRAC_PI_2;
        let x = solve_one(index, center)?;
        roots.push(x / length);
    }
    Ok(roots)
}

fn solve_one(index: usize, center: f64) -> Result<f64> {
    let (lo0, hi0) = (center - 1.0, center + 1.0);
    let g_lo = characteristic(lo0);
    let g_mid = characteristic(center);
    let g_hi = characteristic(hi0);
    if !(g_lo.is_finite() && g_mid.is_finite() && g_hi.is_finite()) {
        return Err(Error::NonFinite {
            context: format!("evaluating characteristic function near mode {index}"),
        });
    }
    // g(center) = sech(center) > 0, so exactly one half-interval brackets.
    let (mut lo, mut hi, mut g_l, mut g_h) = if g_lo * g_mid < 0.0 {
        (lo0, center, g_lo, g_mid)
    } else if g_mid * g_hi < 0.0 {
        (center, hi0, g_mid, g_hi)
    } else {
        return Err(Error::BracketingFailure {
            index,
            lo: lo0,
            hi: hi0,
        });
    };

    let mut best_x = lo;
    let mut best_g = g_l.abs();
    let consider = |x: f64, g: f64, best_x: &mut f64, best_g: &mut f64| {
        if g.abs() < *best_g {
            *best_x = x;
            *best_g = g.abs();
        }
    };
    consider(hi, g_h, &mut best_x, &mut best_g);

    let mut evals = 0usize;
    while hi - lo > 2.0 * f64::EPSILON * hi && evals < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = characteristic(mid);
        evals += 1;
        if !g.is_finite() {
            return Err(Error::NonFinite {
                context: format!("bisection for mode {index} at x = {mid}"),
            });
        }
        consider(mid, g, &mut best_x, &mut best_g);
        if g == 0.0 {
            return Ok(mid);
        }
        if g_l * g < 0.0 {
            hi = mid;
            g_h = g;
        } else {
            lo = mid;
            g_l = g;
        }
    }

    // Secant polish from the bracket endpoints.
    let (mut x0, mut f0, mut x1, mut f1) = (lo, g_l, hi, g_h);
    for _ in 0..8 {
        if f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !x2.is_finite() || x2 < lo - 1.0 || x2 > hi + 1.0 {
            break;
        }
        let f2 = characteristic(x2);
        consider(x2, f2, &mut best_x, &mut best_g);
        if f2.abs() < 1e-15 {
            break;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
    }

    if best_g > CHAR_RESIDUAL_TOL {
        return Err(Error::RootTolerance {
            index,
            residual: best_g,
            target: CHAR_RESIDUAL_TOL,
        });
    }
    Ok(best_x)
}

/// Shape coefficients `(c, C)` for a wavenumber that solves the
/// characteristic equation: `C = -c (cos kL + cosh kL)/(sin kL + sinh kL)`,
/// with `c > 0` fixed so that `\int_0^L s^2 = 1` under `quad`.
pub fn shape_coefficients(
    kappa: f64,
    length: f64,
    quad: &QuadratureContext,
) -> Result<(f64, f64)> {
    let mode = Mode::unnormalized(kappa, length)?;
    let samples: Vec<f64> = quad.nodes().iter().map(|&x| mode.eval(x, 0)).collect();
    let norm2 = quad.inner_product(&samples, &samples)?;
    if norm2 <= 0.0 || !norm2.is_finite() {
        return Err(Error::NonFinite {
            context: format!("normalizing mode shape at kappa = {kappa}"),
        });
    }
    let c = 1.0 / norm2.sqrt();
    Ok((c, mode.ratio * c))
}

impl Mode {
    /// Mode with `c = 1`; the ratio and the stable-evaluation constants are
    /// derived from the free-end conditions.
    fn unnormalized(kappa: f64, length: f64) -> Result<Self> {
        let kl = kappa * length;
        let (sin, cos) = kl.sin_cos();
        let sinh = kl.sinh();
        let cosh = kl.cosh();
        let denom = sin + sinh;
        if denom.abs() < 1e-14 {
            return Err(Error::DegenerateShapeCoefficients { kappa_l: kl });
        }
        let ratio = -(cos + cosh) / denom;
        // (1 + ratio)/2 without forming 1 + ratio: the direct expression
        // loses all digits once kL > ~36 while this one is O(1)/O(e^{kL}).
        let alpha = ((sin - cos) - (-kl).exp()) / (2.0 * denom);
        let beta = (1.0 - ratio) / 2.0;
        Ok(Self {
            kappa,
            c: 1.0,
            c_big: ratio,
            ratio,
            alpha,
            beta,
        })
    }

    /// d^order s / dx^order, analytic differentiation of the closed form.
    /// Each derivative cycles the trig pair and multiplies by kappa; the
    /// fourth derivative returns kappa^4 * s.
    fn eval(&self, x: f64, order: usize) -> f64 {
        debug_assert!(order <= 4);
        let theta = self.kappa * x;
        let k_pow = self.kappa.powi((order % 4) as i32);
        let outer = if order == 4 {
            self.kappa.powi(4)
        } else {
            1.0
        };
        let shape = if theta <= 1.0 {
            // Direct grouping: exact zeros at the clamped end, no
            // cancellation for small arguments.
            let (sin, cos) = theta.sin_cos();
            let sinh = theta.sinh();
            let cosh = theta.cosh();
            let r = self.ratio;
            match order % 4 {
                0 => (cos - cosh) + r * (sin - sinh),
                1 => (-sin - sinh) + r * (cos - cosh),
                2 => (-cos - cosh) + r * (-sin - sinh),
                _ => (sin - sinh) + r * (-cos - cosh),
            }
        } else {
            // Exponential regrouping: cosh + r sinh = a e^t + b e^{-t} and
            // sinh + r cosh = a e^t - b e^{-t} with a = (1+r)/2, b = (1-r)/2.
            let (sin, cos) = theta.sin_cos();
            let r = self.ratio;
            let ep = self.alpha * theta.exp();
            let em = self.beta * (-theta).exp();
            match order % 4 {
                0 => (cos + r * sin) - (ep + em),
                1 => (-sin + r * cos) - (ep - em),
                2 => (-cos - r * sin) - (ep + em),
                _ => (sin - r * cos) - (ep - em),
            }
        };
        self.c * outer * k_pow * shape
    }
}

impl ModeBasis {
    /// Builds the first `n_modes` modes on `[0, length]`, normalized in L2
    /// under `quad` (which must cover the same interval).
    pub fn new(n_modes: usize, length: f64, quad: &QuadratureContext) -> Result<Self> {
        if !(1..=MAX_MODES).contains(&n_modes) {
            return Err(Error::InvalidParameter(format!(
                "n_modes must be in [1, {MAX_MODES}], got {n_modes}"
            )));
        }
        if quad.length() != length {
            return Err(Error::InvalidParameter(format!(
                "quadrature interval length {} does not match beam length {}",
                quad.length(),
                length
            )));
        }
        let wavenumbers = solve_wavenumbers(n_modes, length)?;
        let mut modes = Vec::with_capacity(n_modes);
        for &kappa in &wavenumbers {
            let mut mode = Mode::unnormalized(kappa, length)?;
            let samples: Vec<f64> = quad.nodes().iter().map(|&x| mode.eval(x, 0)).collect();
            let norm2 = quad.inner_product(&samples, &samples)?;
            if norm2 <= 0.0 || !norm2.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("normalizing mode shape at kappa = {kappa}"),
                });
            }
            let c = 1.0 / norm2.sqrt();
            mode.c = c;
            mode.c_big = mode.ratio * c;
            modes.push(mode);
        }
        Ok(Self { length, modes })
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Wavenumber of mode `mode` (0-based).
    pub fn wavenumber(&self, mode: usize) -> f64 {
        self.modes[mode].kappa
    }

    /// `kappa^4`, the `D`-free eigenvalue factor of mode `mode`; the
    /// stiffness operator's eigenvalue is `D * kappa^4`.
    pub fn kappa4(&self, mode: usize) -> f64 {
        self.modes[mode].kappa.powi(4)
    }

    /// Shape coefficients `(c, C)` of mode `mode`.
    pub fn coefficients(&self, mode: usize) -> (f64, f64) {
        (self.modes[mode].c, self.modes[mode].c_big)
    }

    /// Residual of the characteristic equation at mode `mode`, in the
    /// normalized form `|cos(kL) + sech(kL)|`.
    pub fn characteristic_residual(&self, mode: usize) -> f64 {
        characteristic(self.modes[mode].kappa * self.length).abs()
    }

    /// `d^order s_mode / dx^order (x)` for `order in 0..=4`.
    pub fn eval(&self, mode: usize, x: f64, order: usize) -> Result<f64> {
        if mode >= self.modes.len() {
            return Err(Error::ModeIndexOutOfRange {
                index: mode,
                n_modes: self.modes.len(),
            });
        }
        if order > 4 {
            return Err(Error::InvalidParameter(format!(
                "derivative order must be in 0..=4, got {order}"
            )));
        }
        Ok(self.modes[mode].eval(x, order))
    }

    /// Samples `d^order s_mode / dx^order` at the given positions.
    pub fn sample(&self, mode: usize, order: usize, xs: &[f64]) -> Result<Vec<f64>> {
        if mode >= self.modes.len() {
            return Err(Error::ModeIndexOutOfRange {
                index: mode,
                n_modes: self.modes.len(),
            });
        }
        if order > 4 {
            return Err(Error::InvalidParameter(format!(
                "derivative order must be in 0..=4, got {order}"
            )));
        }
        Ok(xs.iter().map(|&x| self.modes[mode].eval(x, order)).collect())
    }

    /// Reconstructs `sum_j coeffs[j] * d^order s_j / dx^order` at `xs`.
    pub fn combine(&self, coeffs: &[f64], order: usize, xs: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(coeffs.len(), self.modes.len());
        if order > 4 {
            return Err(Error::InvalidParameter(format!(
                "derivative order must be in 0..=4, got {order}"
            )));
        }
        let mut out = vec![0.0; xs.len()];
        for (mode, &c) in self.modes.iter().zip(coeffs) {
            if c == 0.0 {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(xs) {
                *o += c * mode.eval(x, order);
            }
        }
        Ok(out)
    }
}

/// Orthogonality/boundary-condition report from quadrature checks:
/// the caller compares the maxima against its own tolerances.
#[derive(Debug, Clone)]
pub struct BasisReport {
    /// max_ij |(s_i, s_j) - delta_ij|
    pub l2_gram_max_error: f64,
    /// max_i |(s_i'', s_i'') - kappa_i^4| / kappa_i^4
    pub h2_diag_max_rel_error: f64,
    /// max_{i != j} |(s_i'', s_j'')| / (kappa_i^2 kappa_j^2)
    pub h2_offdiag_max_scaled: f64,
    /// max_i |s_i''(L)| / kappa_i^2
    pub free_end_d2_max_scaled: f64,
    /// max_i |s_i'''(L)| / kappa_i^3
    pub free_end_d3_max_scaled: f64,
    /// max_i |cos(k_i L) + sech(k_i L)|
    pub char_residual_max: f64,
}

/// Measures L2 orthonormality, H2 orthogonality against `kappa^4`, the
/// free-end conditions, and the characteristic residuals of a basis.
pub fn verify_basis(basis: &ModeBasis, quad: &QuadratureContext) -> Result<BasisReport> {
    let n = basis.n_modes();
    let nodes = quad.nodes();
    let mut s0 = Vec::with_capacity(n);
    let mut s2 = Vec::with_capacity(n);
    for m in 0..n {
        s0.push(basis.sample(m, 0, nodes)?);
        s2.push(basis.sample(m, 2, nodes)?);
    }
    let mut report = BasisReport {
        l2_gram_max_error: 0.0,
        h2_diag_max_rel_error: 0.0,
        h2_offdiag_max_scaled: 0.0,
        free_end_d2_max_scaled: 0.0,
        free_end_d3_max_scaled: 0.0,
        char_residual_max: 0.0,
    };
    for i in 0..n {
        for j in i..n {
            let g = quad.inner_product(&s0[i], &s0[j])?;
            let h = quad.inner_product(&s2[i], &s2[j])?;
            let ki = basis.wavenumber(i);
            let kj = basis.wavenumber(j);
            if i == j {
                report.l2_gram_max_error = report.l2_gram_max_error.max((g - 1.0).abs());
                let k4 = ki.powi(4);
                report.h2_diag_max_rel_error =
                    report.h2_diag_max_rel_error.max(((h - k4) / k4).abs());
            } else {
                report.l2_gram_max_error = report.l2_gram_max_error.max(g.abs());
                report.h2_offdiag_max_scaled = report
                    .h2_offdiag_max_scaled
                    .max(h.abs() / (ki * ki * kj * kj));
            }
        }
        let l = basis.length();
        let ki = basis.wavenumber(i);
        let d2 = basis.eval(i, l, 2)?.abs() / (ki * ki);
        let d3 = basis.eval(i, l, 3)?.abs() / (ki * ki * ki);
        report.free_end_d2_max_scaled = report.free_end_d2_max_scaled.max(d2);
        report.free_end_d3_max_scaled = report.free_end_d3_max_scaled.max(d3);
        report.char_residual_max = report
            .char_residual_max
            .max(basis.characteristic_residual(i));
    }
    Ok(report)
}
