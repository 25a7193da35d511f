//! Precomputed discrete operators of the truncated system: the diagonal
//! linear stiffness/damping factors `kappa^4`, the stiffness four-tensor
//!
//! ```text
//! S[i][j][k][l] = \int_0^L s_i'' s_j'' s_k' s_l' dx,
//! ```
//!
//! and the inertia four-tensor
//!
//! ```text
//! I[i][j][k][l] = \int_0^L F_ij F_kl dx,   F_ab(x) = \int_0^x s_a' s_b',
//! ```
//!
//! which is the Gram matrix of the `F_ab` and therefore positive
//! semidefinite over index pairs. Entries are computed once per canonical
//! index tuple (i <= j, k <= l, and for `I` additionally (ij) <= (kl)) and
//! mirrored, which makes the symmetries exact by construction; the
//! asymmetry witness scans the stored tensor and reports any orbit spread.
//!
//! Cost: O(n^2 * nodes) for the cached mode samples and primitives, plus
//! O(n^4) contraction work for the canonical entries. At the desk-scale cap
//! (n = 16, 160 nodes) both tensors assemble in milliseconds.

use crate::basis::ModeBasis;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureContext;
use serde::{Deserialize, Serialize};

/// Physical and model constants of the beam equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamParameters {
    /// Flexural stiffness `D > 0` (mass-normalized).
    pub stiffness: f64,
    /// Beam length `L > 0`.
    pub length: f64,
    /// Kelvin-Voigt damping coefficient `k2 >= 0`.
    pub damping: f64,
    /// Enables the cubic stiffness nonlinearity.
    pub sigma: bool,
    /// Enables the nonlinear (nonlocal, quasilinear) inertia.
    pub iota: bool,
}

impl BeamParameters {
    /// Validated constructor. With the inertia flag on, undamped runs are
    /// refused: the implicit acceleration needs `k2 > 0` for a well-behaved
    /// solution theory. Use [`BeamParameters::new_with_options`] to opt out
    /// for exploration.
    pub fn new(stiffness: f64, length: f64, damping: f64, sigma: bool, iota: bool) -> Result<Self> {
        Self::new_with_options(stiffness, length, damping, sigma, iota, false)
    }

    pub fn new_with_options(
        stiffness: f64,
        length: f64,
        damping: f64,
        sigma: bool,
        iota: bool,
        allow_undamped_inertia: bool,
    ) -> Result<Self> {
        if stiffness <= 0.0 || !stiffness.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "stiffness D must be positive and finite, got {stiffness}"
            )));
        }
        if length <= 0.0 || !length.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "length L must be positive and finite, got {length}"
            )));
        }
        if damping < 0.0 || !damping.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "damping k2 must be non-negative and finite, got {damping}"
            )));
        }
        if iota && damping == 0.0 && !allow_undamped_inertia {
            return Err(Error::InvalidParameter(
                "nonlinear inertia (iota = 1) requires damping k2 > 0; \
                 pass allow_undamped_inertia to override for exploration"
                    .into(),
            ));
        }
        Ok(Self {
            stiffness,
            length,
            damping,
            sigma,
            iota,
        })
    }

    pub fn sigma_factor(&self) -> f64 {
        if self.sigma {
            1.0
        } else {
            0.0
        }
    }

    pub fn iota_factor(&self) -> f64 {
        if self.iota {
            1.0
        } else {
            0.0
        }
    }
}

/// Dense rank-4 tensor over mode indices, stored row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourTensor {
    n: usize,
    data: Vec<f64>,
}

impl FourTensor {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn from_flat(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n * n * n {
            return Err(Error::InvalidParameter(format!(
                "flat tensor length {} does not match n = {n}",
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(i, j, k, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, value: f64) {
        let at = self.idx(i, j, k, l);
        self.data[at] = value;
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest per-entry difference against another tensor, scaled by
    /// `max(1, |entry|)`.
    pub fn max_scaled_difference(&self, other: &FourTensor) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs() / a.abs().max(1.0)))
    }
}

impl std::ops::Index<(usize, usize, usize, usize)> for FourTensor {
    type Output = f64;
    fn index(&self, (i, j, k, l): (usize, usize, usize, usize)) -> &f64 {
        &self.data[self.idx(i, j, k, l)]
    }
}

/// Everything needed to evaluate the modal right-hand side.
#[derive(Debug, Clone)]
pub struct DiscreteOperators {
    n_modes: usize,
    kappa4: Vec<f64>,
    stiffness_tensor: FourTensor,
    inertia_tensor: FourTensor,
    params: BeamParameters,
    s_asymmetry_witness: f64,
    i_asymmetry_witness: f64,
}

impl DiscreteOperators {
    /// Assembles the operators for `basis` under `quad`. The parameter set
    /// must refer to the same beam length as the basis.
    pub fn assemble(
        basis: &ModeBasis,
        quad: &QuadratureContext,
        params: BeamParameters,
    ) -> Result<Self> {
        if params.length != basis.length() {
            return Err(Error::InvalidParameter(format!(
                "parameter length {} does not match basis length {}",
                params.length,
                basis.length()
            )));
        }
        let (stiffness_tensor, s_witness) = assemble_stiffness_tensor(basis, quad)?;
        let (inertia_tensor, i_witness) = assemble_inertia_tensor(basis, quad)?;
        let kappa4 = (0..basis.n_modes()).map(|m| basis.kappa4(m)).collect();
        Ok(Self {
            n_modes: basis.n_modes(),
            kappa4,
            stiffness_tensor,
            inertia_tensor,
            params,
            s_asymmetry_witness: s_witness,
            i_asymmetry_witness: i_witness,
        })
    }

    /// Rebuilds operators from previously assembled tensors (tensor cache).
    /// The tensors and `kappa4` do not depend on `D`, `k2`, or the flags, so
    /// cached values can be combined with any parameter set of matching
    /// length and mode count.
    pub fn from_parts(
        kappa4: Vec<f64>,
        stiffness_tensor: FourTensor,
        inertia_tensor: FourTensor,
        params: BeamParameters,
    ) -> Result<Self> {
        let n = kappa4.len();
        if stiffness_tensor.n() != n || inertia_tensor.n() != n || n == 0 {
            return Err(Error::InvalidParameter(
                "tensor dimensions do not match kappa4 length".into(),
            ));
        }
        let s_witness = symmetry_witness(&stiffness_tensor, false);
        let i_witness = symmetry_witness(&inertia_tensor, true);
        Ok(Self {
            n_modes: n,
            kappa4,
            stiffness_tensor,
            inertia_tensor,
            params,
            s_asymmetry_witness: s_witness,
            i_asymmetry_witness: i_witness,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn kappa4(&self) -> &[f64] {
        &self.kappa4
    }

    pub fn stiffness_tensor(&self) -> &FourTensor {
        &self.stiffness_tensor
    }

    pub fn inertia_tensor(&self) -> &FourTensor {
        &self.inertia_tensor
    }

    pub fn params(&self) -> &BeamParameters {
        &self.params
    }

    /// Replaces the parameter set (tensors are parameter-independent).
    pub fn with_params(mut self, params: BeamParameters) -> Result<Self> {
        if params.length != self.params.length {
            return Err(Error::InvalidParameter(
                "cannot change beam length without reassembling tensors".into(),
            ));
        }
        self.params = params;
        Ok(self)
    }

    /// Largest symmetry-orbit spread found in the stored stiffness tensor.
    pub fn stiffness_asymmetry_witness(&self) -> f64 {
        self.s_asymmetry_witness
    }

    /// Largest symmetry-orbit spread found in the stored inertia tensor.
    pub fn inertia_asymmetry_witness(&self) -> f64 {
        self.i_asymmetry_witness
    }
}

/// `S[i][j][k][l] = \int s_i'' s_j'' s_k' s_l'`, computed for canonical
/// quadruples (i <= j, k <= l) and mirrored. Returns the tensor and the
/// post-assembly asymmetry witness.
pub fn assemble_stiffness_tensor(
    basis: &ModeBasis,
    quad: &QuadratureContext,
) -> Result<(FourTensor, f64)> {
    let n = basis.n_modes();
    let nodes = quad.nodes();
    let weights = quad.weights();
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    for m in 0..n {
        d1.push(basis.sample(m, 1, nodes)?);
        d2.push(basis.sample(m, 2, nodes)?);
    }
    let mut tensor = FourTensor::zeros(n);
    let mut pair2 = vec![0.0; nodes.len()];
    for i in 0..n {
        for j in i..n {
            for (m, p) in pair2.iter_mut().enumerate() {
                *p = d2[i][m] * d2[j][m];
            }
            for k in 0..n {
                for l in k..n {
                    let mut acc = 0.0;
                    for m in 0..nodes.len() {
                        acc += weights[m] * pair2[m] * d1[k][m] * d1[l][m];
                    }
                    if !acc.is_finite() {
                        return Err(Error::NonFinite {
                            context: format!("stiffness tensor entry ({i},{j},{k},{l})"),
                        });
                    }
                    tensor.set(i, j, k, l, acc);
                    tensor.set(j, i, k, l, acc);
                    tensor.set(i, j, l, k, acc);
                    tensor.set(j, i, l, k, acc);
                }
            }
        }
    }
    let witness = symmetry_witness(&tensor, false);
    Ok((tensor, witness))
}

/// `I[i][j][k][l] = (F_ij, F_kl)` with `F_ab = \int_0^x s_a' s_b'`. The
/// primitives are computed once per pair (a <= b) and the Gram products once
/// per canonical pair-of-pairs, then mirrored.
pub fn assemble_inertia_tensor(
    basis: &ModeBasis,
    quad: &QuadratureContext,
) -> Result<(FourTensor, f64)> {
    let n = basis.n_modes();
    let nodes = quad.nodes();
    let mut d1 = Vec::with_capacity(n);
    for m in 0..n {
        d1.push(basis.sample(m, 1, nodes)?);
    }
    let n_pairs = n * (n + 1) / 2;
    let pair_id = |a: usize, b: usize| -> usize {
        // a <= b
        a * n - a * (a + 1) / 2 + b
    };
    let mut primitives = Vec::with_capacity(n_pairs);
    for a in 0..n {
        for b in a..n {
            let prod: Vec<f64> = d1[a].iter().zip(&d1[b]).map(|(x, y)| x * y).collect();
            primitives.push(quad.cumulative_primitive(&prod)?.node_values);
        }
    }
    let mut tensor = FourTensor::zeros(n);
    for a in 0..n {
        for b in a..n {
            let p = pair_id(a, b);
            for c in 0..n {
                for d in c..n {
                    let q = pair_id(c, d);
                    if q < p {
                        continue;
                    }
                    let val = quad.inner_product(&primitives[p], &primitives[q])?;
                    for (x, y) in [(a, b), (b, a)] {
                        for (z, w) in [(c, d), (d, c)] {
                            tensor.set(x, y, z, w, val);
                            tensor.set(z, w, x, y, val);
                        }
                    }
                }
            }
        }
    }
    let witness = symmetry_witness(&tensor, true);
    Ok((tensor, witness))
}

/// Scans a stored tensor for violations of the symmetries it is supposed to
/// carry: i<->j, k<->l, and for Gram-type tensors the pair swap
/// (ij)<->(kl). Returns the largest absolute spread.
pub fn symmetry_witness(tensor: &FourTensor, pair_swap: bool) -> f64 {
    let n = tensor.n();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = tensor.get(i, j, k, l);
                    worst = worst.max((v - tensor.get(j, i, k, l)).abs());
                    worst = worst.max((v - tensor.get(i, j, l, k)).abs());
                    if pair_swap {
                        worst = worst.max((v - tensor.get(k, l, i, j)).abs());
                    }
                }
            }
        }
    }
    worst
}
