//! Transverse load presets and their modal projection `P_j(t) = (p(., t), s_j)`.
//!
//! All presets are separable, `p(x, t) = g(t) f(x)`, so the spatial
//! projection is computed once by quadrature and only the scalar time law is
//! evaluated during stepping.

use crate::basis::ModeBasis;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureContext;
use serde::{Deserialize, Serialize};

/// Forcing specification. Mode indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Forcing {
    /// `p = 0`.
    Zero,
    /// `p(x, t) = amplitude`, uniform in space and constant in time.
    Uniform { amplitude: f64 },
    /// `p(x, t) = amplitude * sin(omega t)`, uniform in space.
    UniformHarmonic { amplitude: f64, omega: f64 },
    /// `p(x, t) = amplitude * s_mode(x)`, optionally times `sin(omega t)`.
    Modal {
        mode: usize,
        amplitude: f64,
        omega: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy)]
enum TimeLaw {
    Zero,
    Constant,
    Harmonic { omega: f64 },
}

/// A forcing projected onto a basis: cached spatial load vector plus the
/// scalar time law.
#[derive(Debug, Clone)]
pub struct ModalForcing {
    spatial: Vec<f64>,
    law: TimeLaw,
}

impl Forcing {
    /// Projects the spatial profile onto every mode and caches it.
    pub fn prepare(&self, basis: &ModeBasis, quad: &QuadratureContext) -> Result<ModalForcing> {
        let n = basis.n_modes();
        let (spatial, law) = match self {
            Forcing::Zero => (vec![0.0; n], TimeLaw::Zero),
            Forcing::Uniform { amplitude } => {
                (project_profile(basis, quad, |_| 1.0, *amplitude)?, TimeLaw::Constant)
            }
            Forcing::UniformHarmonic { amplitude, omega } => (
                project_profile(basis, quad, |_| 1.0, *amplitude)?,
                TimeLaw::Harmonic { omega: *omega },
            ),
            Forcing::Modal {
                mode,
                amplitude,
                omega,
            } => {
                if *mode >= n {
                    return Err(Error::ModeIndexOutOfRange {
                        index: *mode,
                        n_modes: n,
                    });
                }
                let shape = basis.sample(*mode, 0, quad.nodes())?;
                let spatial = project_samples(basis, quad, &shape, *amplitude)?;
                let law = match omega {
                    Some(omega) => TimeLaw::Harmonic { omega: *omega },
                    None => TimeLaw::Constant,
                };
                (spatial, law)
            }
        };
        Ok(ModalForcing { spatial, law })
    }

    /// One-shot modal load vector `P_j = (p(., t), s_j)` at time `t`.
    pub fn project(&self, basis: &ModeBasis, quad: &QuadratureContext, t: f64) -> Result<Vec<f64>> {
        Ok(self.prepare(basis, quad)?.eval(t))
    }
}

fn project_profile(
    basis: &ModeBasis,
    quad: &QuadratureContext,
    profile: impl Fn(f64) -> f64,
    amplitude: f64,
) -> Result<Vec<f64>> {
    let samples = quad.sample(profile);
    project_samples(basis, quad, &samples, amplitude)
}

fn project_samples(
    basis: &ModeBasis,
    quad: &QuadratureContext,
    samples: &[f64],
    amplitude: f64,
) -> Result<Vec<f64>> {
    let mut spatial = Vec::with_capacity(basis.n_modes());
    for m in 0..basis.n_modes() {
        let shape = basis.sample(m, 0, quad.nodes())?;
        spatial.push(amplitude * quad.inner_product(samples, &shape)?);
    }
    Ok(spatial)
}

impl ModalForcing {
    /// Zero forcing for a system of `n` modes.
    pub fn zero(n: usize) -> Self {
        Self {
            spatial: vec![0.0; n],
            law: TimeLaw::Zero,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.spatial.len()
    }

    /// Modal load vector at time `t`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.spatial.len()];
        self.eval_into(t, &mut out);
        out
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let factor = match self.law {
            TimeLaw::Zero => 0.0,
            TimeLaw::Constant => 1.0,
            TimeLaw::Harmonic { omega } => (omega * t).sin(),
        };
        for (o, p) in out.iter_mut().zip(&self.spatial) {
            *o = factor * p;
        }
    }
}
