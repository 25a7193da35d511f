//! Composite Gauss-Legendre quadrature on `[0, L]`, plus the nested
//! primitives `F(x) = \int_0^x f` needed by the inertia tensor and the
//! in-plane fields.
//!
//! The rule splits `[0, L]` into equal panels with a fixed Gauss-Legendre
//! rule per panel. All integrands in this crate are sampled on the node grid
//! once and reused; the cumulative primitive is evaluated on the same grid by
//! integrating the per-panel interpolating polynomial, so it is exact for
//! polynomials up to degree `points_per_panel - 1` and its endpoint value
//! matches `\int_0^L f` bit-for-bit with the plain rule.

use crate::error::{Error, Result};

pub const DEFAULT_PANELS: usize = 16;
pub const DEFAULT_POINTS_PER_PANEL: usize = 10;

/// Quadrature nodes/weights for `[0, L]`, immutable after construction.
#[derive(Debug, Clone)]
pub struct QuadratureContext {
    length: f64,
    panels: usize,
    points_per_panel: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Gauss-Legendre nodes on the reference panel [-1, 1].
    ref_nodes: Vec<f64>,
    /// Matching reference weights (sum to 2).
    ref_weights: Vec<f64>,
    /// Row-major m x m matrix B with B[i][j] = \int_{-1}^{x_i} l_j(s) ds,
    /// where l_j is the Lagrange basis on the reference nodes.
    prefix_matrix: Vec<f64>,
    panel_width: f64,
}

/// Cumulative primitive of a sampled function: values of `\int_0^x f` at
/// every quadrature node, plus the completed integral over `[0, L]`.
#[derive(Debug, Clone)]
pub struct CumulativePrimitive {
    pub node_values: Vec<f64>,
    pub total: f64,
}

impl QuadratureContext {
    /// Composite rule with `panels >= 1` equal panels of
    /// `points_per_panel in [2, 16]` Gauss-Legendre points each.
    /// Exact for polynomials of degree `2 * points_per_panel - 1` per panel.
    pub fn build(panels: usize, points_per_panel: usize, length: f64) -> Result<Self> {
        if panels < 1 {
            return Err(Error::InvalidParameter("quadrature needs panels >= 1".into()));
        }
        if !(2..=16).contains(&points_per_panel) {
            return Err(Error::InvalidParameter(format!(
                "points_per_panel must be in [2, 16], got {points_per_panel}"
            )));
        }
        if length <= 0.0 || !length.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "quadrature length must be positive and finite, got {length}"
            )));
        }
        let (ref_nodes, ref_weights) = gauss_legendre(points_per_panel);
        let prefix_matrix = reference_prefix_matrix(&ref_nodes, &ref_weights);
        let panel_width = length / panels as f64;
        let mut nodes = Vec::with_capacity(panels * points_per_panel);
        let mut weights = Vec::with_capacity(panels * points_per_panel);
        for p in 0..panels {
            let a = p as f64 * panel_width;
            for (x, w) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(a + (x + 1.0) * panel_width / 2.0);
                weights.push(w * panel_width / 2.0);
            }
        }
        Ok(Self {
            length,
            panels,
            points_per_panel,
            nodes,
            weights,
            ref_nodes,
            ref_weights,
            prefix_matrix,
            panel_width,
        })
    }

    pub fn with_defaults(length: f64) -> Result<Self> {
        Self::build(DEFAULT_PANELS, DEFAULT_POINTS_PER_PANEL, length)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn points_per_panel(&self) -> usize {
        self.points_per_panel
    }

    /// Polynomial degree integrated exactly within each panel.
    pub fn exactness_degree(&self) -> usize {
        2 * self.points_per_panel - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Samples a function at all quadrature nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    /// `\int_0^L f` from node samples.
    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        self.check_samples(f)?;
        Ok(self
            .weights
            .iter()
            .zip(f)
            .map(|(w, v)| w * v)
            .sum())
    }

    /// `\int_0^L f g` from node samples.
    pub fn inner_product(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        self.check_samples(f)?;
        self.check_samples(g)?;
        Ok(self
            .weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(w, (a, b))| w * a * b)
            .sum())
    }

    /// `F(x) = \int_0^x f` at every node, by per-panel Gauss accumulation:
    /// completed integrals of all preceding panels plus the integral of the
    /// current panel's interpolant from the panel start to the node.
    pub fn cumulative_primitive(&self, f: &[f64]) -> Result<CumulativePrimitive> {
        self.check_samples(f)?;
        let m = self.points_per_panel;
        let half = self.panel_width / 2.0;
        let mut node_values = vec![0.0; f.len()];
        let mut offset = 0.0;
        for p in 0..self.panels {
            let samples = &f[p * m..(p + 1) * m];
            for i in 0..m {
                let mut partial = 0.0;
                for (j, s) in samples.iter().enumerate() {
                    partial += self.prefix_matrix[i * m + j] * s;
                }
                node_values[p * m + i] = offset + half * partial;
            }
            let full: f64 = self
                .ref_weights
                .iter()
                .zip(samples)
                .map(|(w, s)| w * half * s)
                .sum();
            offset += full;
        }
        Ok(CumulativePrimitive {
            node_values,
            total: offset,
        })
    }

    /// `F(x) = \int_0^x f` at arbitrary points, for a function given as a
    /// closure. Full panels up to the containing panel use the standard rule
    /// on the node grid; the remainder uses the panel rule mapped onto
    /// `[panel start, x]`. Used for output grids that differ from the node
    /// grid.
    pub fn prefix_at_points(&self, f: &dyn Fn(f64) -> f64, xs: &[f64]) -> Vec<f64> {
        let m = self.points_per_panel;
        let half = self.panel_width / 2.0;
        // Completed integral up to each panel boundary.
        let mut boundary = vec![0.0; self.panels + 1];
        for p in 0..self.panels {
            let mut full = 0.0;
            for (i, w) in self.ref_weights.iter().enumerate() {
                full += w * half * f(self.nodes[p * m + i]);
            }
            boundary[p + 1] = boundary[p] + full;
        }
        xs.iter()
            .map(|&x| {
                let x = x.clamp(0.0, self.length);
                let p = ((x / self.panel_width) as usize).min(self.panels - 1);
                let a = p as f64 * self.panel_width;
                let scale = (x - a) / 2.0;
                let mut partial = 0.0;
                for (xi, w) in self.ref_nodes.iter().zip(&self.ref_weights) {
                    partial += w * scale * f(a + (xi + 1.0) * scale);
                }
                boundary[p] + partial
            })
            .collect()
    }

    fn check_samples(&self, f: &[f64]) -> Result<()> {
        assert_eq!(
            f.len(),
            self.nodes.len(),
            "sample vector length {} does not match node count {}",
            f.len(),
            self.nodes.len()
        );
        for (x, v) in self.nodes.iter().zip(f) {
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { x: *x });
            }
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], ascending nodes.
/// Newton iteration on the Legendre recurrence with the usual Chebyshev-like
/// initial guesses; converges to machine precision in a handful of steps.
fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p2, d2) = legendre_with_derivative(m, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// B[i][j] = \int_{-1}^{x_i} l_j, with l_j the Lagrange basis on the
/// reference nodes. Each entry is computed with the same m-point rule mapped
/// onto [-1, x_i], which is exact since deg(l_j) = m - 1 <= 2m - 1.
fn reference_prefix_matrix(ref_nodes: &[f64], _ref_weights: &[f64]) -> Vec<f64> {
    let m = ref_nodes.len();
    let (gx, gw) = gauss_legendre(m);
    // Barycentric weights for stable Lagrange evaluation.
    let mut bary = vec![1.0; m];
    for j in 0..m {
        for k in 0..m {
            if k != j {
                bary[j] /= ref_nodes[j] - ref_nodes[k];
            }
        }
    }
    let lagrange = |j: usize, x: f64| -> f64 {
        let mut prod = 1.0;
        for k in 0..m {
            if k != j {
                prod *= x - ref_nodes[k];
            }
        }
        prod * bary[j]
    };
    let mut b = vec![0.0; m * m];
    for i in 0..m {
        let scale = (ref_nodes[i] + 1.0) / 2.0;
        for j in 0..m {
            let mut acc = 0.0;
            for (x, w) in gx.iter().zip(&gw) {
                acc += w * scale * lagrange(j, -1.0 + (x + 1.0) * scale);
            }
            b[i * m + j] = acc;
        }
    }
    b
}
