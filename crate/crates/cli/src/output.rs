//! File formats: trajectory and snapshot CSVs, the run summary JSON, and
//! the tensor cache.
//!
//! All floats are written with Rust's shortest round-trip formatting, so a
//! written file reloads to bit-identical values and two identical runs
//! produce byte-identical output.

use anyhow::{anyhow, bail, Context};
use inexbeam::{
    BeamParameters, DiscreteOperators, FieldSnapshot, ModeBasis, QuadratureContext, Trajectory,
};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

pub fn write_trajectory_csv(path: &Path, trajectory: &Trajectory) -> anyhow::Result<()> {
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut out = std::io::BufWriter::new(file);
    let n = trajectory
        .records
        .first()
        .map(|r| r.state.n_modes())
        .unwrap_or(0);
    write!(out, "t")?;
    for j in 1..=n {
        write!(out, ",q_{j}")?;
    }
    for j in 1..=n {
        write!(out, ",v_{j}")?;
    }
    writeln!(
        out,
        ",E_kinetic,E_inertial,E_bend,E_nl,E_total,dissipation_accum,work_accum,identity_residual"
    )?;
    for rec in &trajectory.records {
        write!(out, "{}", rec.state.t)?;
        for q in &rec.state.q {
            write!(out, ",{q}")?;
        }
        for v in &rec.state.v {
            write!(out, ",{v}")?;
        }
        let e = &rec.energy;
        writeln!(
            out,
            ",{},{},{},{},{},{},{},{}",
            e.e_kinetic,
            e.e_inertial,
            e.e_bend,
            e.e_nl,
            e.e_total,
            e.dissipation_accum,
            e.work_accum,
            e.identity_residual
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_snapshot_csv(path: &Path, snapshot: &FieldSnapshot) -> anyhow::Result<()> {
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "x,w,w_x,w_xx,w_xxx,w_xxxx,u,u_t,u_tt,inext_deviation")?;
    for i in 0..snapshot.grid.len() {
        let u_tt = snapshot.u_tt.as_ref().map(|v| v[i]).unwrap_or(f64::NAN);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            snapshot.grid[i],
            snapshot.w[i],
            snapshot.w_x[i],
            snapshot.w_xx[i],
            snapshot.w_xxx[i],
            snapshot.w_xxxx[i],
            snapshot.u[i],
            snapshot.u_t[i],
            u_tt,
            snapshot.inext_deviation[i]
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_modes_csv<W: Write>(
    out: &mut W,
    basis: &ModeBasis,
) -> anyhow::Result<()> {
    writeln!(out, "n,kappa,kappa_l,c,C,residual")?;
    for m in 0..basis.n_modes() {
        let kappa = basis.wavenumber(m);
        let (c, c_big) = basis.coefficients(m);
        writeln!(
            out,
            "{},{},{},{},{},{}",
            m + 1,
            kappa,
            kappa * basis.length(),
            c,
            c_big,
            basis.characteristic_residual(m)
        )?;
    }
    Ok(())
}

/// Final energies and run outcome, for the summary JSON.
#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub scheme: String,
    pub dt: f64,
    pub n_modes: usize,
    pub t_end: f64,
    pub records: usize,
    pub e_kinetic: f64,
    pub e_inertial: f64,
    pub e_bend: f64,
    pub e_nl: f64,
    pub e_total: f64,
    pub max_identity_residual: f64,
    pub blowup: bool,
    pub blowup_time: Option<f64>,
    pub blowup_detail: Option<String>,
    pub wall_clock_seconds: f64,
}

impl RunSummary {
    pub fn from_trajectory(
        trajectory: &Trajectory,
        scheme: String,
        dt: f64,
        wall_clock_seconds: f64,
    ) -> Self {
        let last = trajectory.final_energy();
        Self {
            scheme,
            dt,
            n_modes: trajectory.final_state().n_modes(),
            t_end: last.t,
            records: trajectory.records.len(),
            e_kinetic: last.e_kinetic,
            e_inertial: last.e_inertial,
            e_bend: last.e_bend,
            e_nl: last.e_nl,
            e_total: last.e_total,
            max_identity_residual: inexbeam::diagnostics::max_identity_residual(trajectory),
            blowup: trajectory.blowup.is_some(),
            blowup_time: trajectory.blowup.as_ref().map(|b| b.t),
            blowup_detail: trajectory.blowup.as_ref().map(|b| b.detail.clone()),
            wall_clock_seconds,
        }
    }
}

pub fn write_summary_json(path: &Path, summary: &RunSummary) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(summary)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Generic CSV reader: returns (header, rows). Rows must be all-numeric.
pub fn read_csv_columns(path: &Path) -> anyhow::Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| anyhow!("{} is empty", path.display()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse::<f64>()).collect();
        let row = row.with_context(|| {
            format!("parsing {} line {}: \"{line}\"", path.display(), lineno + 2)
        })?;
        if row.len() != header.len() {
            bail!(
                "{} line {}: {} fields, expected {}",
                path.display(),
                lineno + 2,
                row.len(),
                header.len()
            );
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn column_index(header: &[String], name: &str) -> anyhow::Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| anyhow!("column \"{name}\" not found in header {header:?}"))
}

/// Tensor cache entry, keyed exactly by mode count, bit pattern of the
/// length, and the quadrature configuration. Any mismatch invalidates.
#[derive(Debug, Serialize, Deserialize)]
struct TensorCacheFile {
    n_modes: usize,
    length_bits: u64,
    panels: usize,
    points_per_panel: usize,
    kappa4: Vec<f64>,
    stiffness: Vec<f64>,
    inertia: Vec<f64>,
}

fn cache_path(dir: &Path, n_modes: usize, length: f64, panels: usize, points: usize) -> std::path::PathBuf {
    dir.join(format!(
        "tensors_n{n_modes}_q{panels}x{points}_L{:016x}.json",
        length.to_bits()
    ))
}

/// Assembles operators, reusing a cached tensor file when its key matches
/// exactly; otherwise assembles and stores.
pub fn assemble_with_cache(
    basis: &ModeBasis,
    quad: &QuadratureContext,
    params: BeamParameters,
    cache_dir: Option<&Path>,
) -> anyhow::Result<DiscreteOperators> {
    let Some(dir) = cache_dir else {
        return Ok(DiscreteOperators::assemble(basis, quad, params)?);
    };
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating tensor cache dir {}", dir.display()))?;
    let path = cache_path(
        dir,
        basis.n_modes(),
        basis.length(),
        quad.panels(),
        quad.points_per_panel(),
    );
    if path.exists() {
        let text = std::fs::read_to_string(&path)?;
        let cached: TensorCacheFile = serde_json::from_str(&text)
            .with_context(|| format!("parsing tensor cache {}", path.display()))?;
        let key_matches = cached.n_modes == basis.n_modes()
            && cached.length_bits == basis.length().to_bits()
            && cached.panels == quad.panels()
            && cached.points_per_panel == quad.points_per_panel();
        if key_matches {
            let n = cached.n_modes;
            let stiffness = inexbeam::FourTensor::from_flat(n, cached.stiffness)?;
            let inertia = inexbeam::FourTensor::from_flat(n, cached.inertia)?;
            return Ok(DiscreteOperators::from_parts(
                cached.kappa4,
                stiffness,
                inertia,
                params,
            )?);
        }
        // stale key under a colliding name: fall through and rewrite
    }
    let ops = DiscreteOperators::assemble(basis, quad, params)?;
    let file = TensorCacheFile {
        n_modes: basis.n_modes(),
        length_bits: basis.length().to_bits(),
        panels: quad.panels(),
        points_per_panel: quad.points_per_panel(),
        kappa4: ops.kappa4().to_vec(),
        stiffness: ops.stiffness_tensor().as_flat().to_vec(),
        inertia: ops.inertia_tensor().as_flat().to_vec(),
    };
    std::fs::write(&path, serde_json::to_string(&file)?)
        .with_context(|| format!("writing tensor cache {}", path.display()))?;
    Ok(ops)
}
