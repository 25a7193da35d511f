//! Experiment configuration: a strict TOML schema with defaults, validation,
//! and resolution into engine objects. Unknown keys are rejected so that
//! typos in experiment definitions fail loudly, and the fully resolved
//! config is echoed next to the outputs for provenance.

use anyhow::{anyhow, bail, Context};
use inexbeam::{
    BeamParameters, DiscreteOperators, Forcing, IntegratorConfig, ModalForcing, ModalState,
    ModeBasis, QuadratureContext, Scheme,
};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Desk-scale cap on the retained modes for configured runs; the dense
/// tensors and the O(n^4) contractions stay cheap below it.
pub const MAX_CONFIG_MODES: usize = 16;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub n_modes: usize,
    /// Recorded for provenance of randomized studies; explicit value lists
    /// make sweeps deterministic regardless.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub beam: BeamSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    pub integrator: IntegratorSection,
    pub run: RunSection,
    #[serde(default)]
    pub initial: Vec<InitialMode>,
    #[serde(default)]
    pub forcing: ForcingSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamSection {
    /// Flexural stiffness D.
    pub d: f64,
    pub length: f64,
    /// Kelvin-Voigt damping coefficient.
    pub k2: f64,
    /// Cubic stiffness nonlinearity flag.
    pub sigma: bool,
    /// Nonlinear inertia flag.
    pub iota: bool,
}

impl Default for BeamSection {
    fn default() -> Self {
        Self {
            d: 1.0,
            length: 1.0,
            k2: 0.0,
            sigma: true,
            iota: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSection {
    pub panels: usize,
    pub points_per_panel: usize,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self {
            panels: inexbeam::quadrature::DEFAULT_PANELS,
            points_per_panel: inexbeam::quadrature::DEFAULT_POINTS_PER_PANEL,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    pub dt: f64,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_newton_max_iter")]
    pub newton_max_iter: usize,
}

fn default_scheme() -> Scheme {
    Scheme::ImplicitMidpoint
}
fn default_newton_tol() -> f64 {
    1e-10
}
fn default_newton_max_iter() -> usize {
    25
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub t_final: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_blowup_threshold")]
    pub blowup_threshold: f64,
    /// Output directory; the --out flag overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    #[serde(default = "default_snapshot_points")]
    pub snapshot_points: usize,
}

fn default_record_every() -> usize {
    1
}
fn default_blowup_threshold() -> f64 {
    1e8
}
fn default_snapshot_points() -> usize {
    inexbeam::fields::DEFAULT_GRID_POINTS
}

/// One initial-condition entry; `mode` is 1-based as in the printed tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialMode {
    pub mode: usize,
    #[serde(default)]
    pub q0: f64,
    #[serde(default)]
    pub v0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForcingSection {
    /// One of: zero | uniform | harmonic | modal.
    pub preset: String,
    pub amplitude: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// 1-based mode index for the modal preset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<usize>,
}

impl Default for ForcingSection {
    fn default() -> Self {
        Self {
            preset: "zero".into(),
            amplitude: 0.0,
            omega: None,
            mode: None,
        }
    }
}

/// Engine objects built from a validated config.
pub struct Resolved {
    pub params: BeamParameters,
    pub quad: QuadratureContext,
    pub basis: ModeBasis,
    pub prepared_forcing: ModalForcing,
    pub initial: ModalState,
    pub integrator: IntegratorConfig,
}

impl SimulationConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: SimulationConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(config)
    }

    /// Structural validation; everything that does not need the engine.
    pub fn validate(&self, allow_undamped_inertia: bool) -> anyhow::Result<()> {
        if self.n_modes < 1 || self.n_modes > MAX_CONFIG_MODES {
            bail!("n_modes must be in [1, {MAX_CONFIG_MODES}], got {}", self.n_modes);
        }
        BeamParameters::new_with_options(
            self.beam.d,
            self.beam.length,
            self.beam.k2,
            self.beam.sigma,
            self.beam.iota,
            allow_undamped_inertia,
        )
        .map_err(|e| anyhow!("beam: {e}"))?;
        if self.integrator.dt <= 0.0 || self.integrator.dt.is_nan() {
            bail!("integrator.dt must be positive, got {}", self.integrator.dt);
        }
        if self.run.t_final < 0.0 || self.run.t_final.is_nan() {
            bail!("run.t_final must be non-negative, got {}", self.run.t_final);
        }
        if self.run.record_every == 0 {
            bail!("run.record_every must be >= 1");
        }
        if self.run.snapshot_points < 2 {
            bail!("run.snapshot_points must be >= 2");
        }
        for (i, entry) in self.initial.iter().enumerate() {
            if entry.mode < 1 || entry.mode > self.n_modes {
                bail!(
                    "initial.{i}.mode = {} out of range (n_modes = {})",
                    entry.mode,
                    self.n_modes
                );
            }
        }
        match self.forcing.preset.as_str() {
            "zero" | "uniform" => {}
            "harmonic" => {
                if self.forcing.omega.is_none() {
                    bail!("forcing.preset = \"harmonic\" requires forcing.omega");
                }
            }
            "modal" => {
                let mode = self
                    .forcing
                    .mode
                    .ok_or_else(|| anyhow!("forcing.preset = \"modal\" requires forcing.mode"))?;
                if mode < 1 || mode > self.n_modes {
                    bail!("forcing.mode = {mode} out of range (n_modes = {})", self.n_modes);
                }
            }
            other => bail!(
                "unrecognized forcing.preset \"{other}\" (expected zero|uniform|harmonic|modal)"
            ),
        }
        Ok(())
    }

    pub fn forcing_spec(&self) -> Forcing {
        match self.forcing.preset.as_str() {
            "uniform" => Forcing::Uniform {
                amplitude: self.forcing.amplitude,
            },
            "harmonic" => Forcing::UniformHarmonic {
                amplitude: self.forcing.amplitude,
                omega: self.forcing.omega.expect("validated"),
            },
            "modal" => Forcing::Modal {
                mode: self.forcing.mode.expect("validated") - 1,
                amplitude: self.forcing.amplitude,
                omega: self.forcing.omega,
            },
            _ => Forcing::Zero,
        }
    }

    /// Builds all engine objects. Validation must have passed.
    pub fn resolve(&self, allow_undamped_inertia: bool) -> anyhow::Result<Resolved> {
        self.validate(allow_undamped_inertia)?;
        let quad = QuadratureContext::build(
            self.quadrature.panels,
            self.quadrature.points_per_panel,
            self.beam.length,
        )?;
        let basis = ModeBasis::new(self.n_modes, self.beam.length, &quad)?;
        let params = BeamParameters::new_with_options(
            self.beam.d,
            self.beam.length,
            self.beam.k2,
            self.beam.sigma,
            self.beam.iota,
            allow_undamped_inertia,
        )?;
        let forcing = self.forcing_spec();
        let prepared_forcing = forcing.prepare(&basis, &quad)?;
        let mut q = vec![0.0; self.n_modes];
        let mut v = vec![0.0; self.n_modes];
        for entry in &self.initial {
            q[entry.mode - 1] += entry.q0;
            v[entry.mode - 1] += entry.v0;
        }
        let initial = ModalState::new(0.0, q, v);
        let integrator = IntegratorConfig::new(self.integrator.scheme, self.integrator.dt)?
            .with_newton(self.integrator.newton_tol, self.integrator.newton_max_iter)?
            .with_blowup_threshold(self.run.blowup_threshold)?;
        Ok(Resolved {
            params,
            quad,
            basis,
            prepared_forcing,
            initial,
            integrator,
        })
    }

    /// Assembles operators, going through the tensor cache when a directory
    /// is given.
    pub fn operators(
        &self,
        resolved: &Resolved,
        tensor_cache: Option<&Path>,
    ) -> anyhow::Result<DiscreteOperators> {
        crate::output::assemble_with_cache(
            &resolved.basis,
            &resolved.quad,
            resolved.params,
            tensor_cache,
        )
    }

    /// Serializes the resolved configuration (defaults filled in).
    pub fn echo_toml(&self) -> anyhow::Result<String> {
        toml::to_string_pretty(self).context("serializing resolved config")
    }

    /// Sets a scalar field addressed by a dotted path, for sweeps.
    /// Supported paths: beam.d, beam.length, beam.k2, integrator.dt,
    /// integrator.newton_tol, run.t_final, run.blowup_threshold,
    /// forcing.amplitude, forcing.omega, initial.<index>.q0,
    /// initial.<index>.v0 (index is 0-based into the initial list).
    pub fn set_scalar(&mut self, path: &str, value: f64) -> anyhow::Result<()> {
        let parts: Vec<&str> = path.split('.').collect();
        match parts.as_slice() {
            ["beam", "d"] => self.beam.d = value,
            ["beam", "length"] => self.beam.length = value,
            ["beam", "k2"] => self.beam.k2 = value,
            ["integrator", "dt"] => self.integrator.dt = value,
            ["integrator", "newton_tol"] => self.integrator.newton_tol = value,
            ["run", "t_final"] => self.run.t_final = value,
            ["run", "blowup_threshold"] => self.run.blowup_threshold = value,
            ["forcing", "amplitude"] => self.forcing.amplitude = value,
            ["forcing", "omega"] => self.forcing.omega = Some(value),
            ["initial", index, field @ ("q0" | "v0")] => {
                let index: usize = index
                    .parse()
                    .map_err(|_| anyhow!("bad initial index in sweep path \"{path}\""))?;
                let entry = self
                    .initial
                    .get_mut(index)
                    .ok_or_else(|| anyhow!("initial.{index} does not exist in the config"))?;
                if *field == "q0" {
                    entry.q0 = value;
                } else {
                    entry.v0 = value;
                }
            }
            _ => bail!("unsupported sweep parameter path \"{path}\""),
        }
        Ok(())
    }
}
