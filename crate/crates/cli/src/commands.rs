//! Subcommand implementations: modes, simulate, sweep, decay, converge.

use crate::config::SimulationConfig;
use crate::output::{
    column_index, read_csv_columns, write_modes_csv, write_snapshot_csv, write_summary_json,
    write_trajectory_csv, RunSummary,
};
use anyhow::{anyhow, bail, Context};
use inexbeam::diagnostics::{convergence_order, fit_decay_rate};
use inexbeam::dynamics::solve_acceleration;
use inexbeam::fields::{reconstruct, uniform_grid};
use inexbeam::integrate::run_simulation;
use inexbeam::{ModeBasis, QuadratureContext};
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// `modes`: table of (n, kappa, kappa L, c, C, residual) as CSV to stdout or
/// a file.
pub fn cmd_modes(
    config: Option<&SimulationConfig>,
    n_override: Option<usize>,
    length_override: Option<f64>,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let n = n_override.or(config.map(|c| c.n_modes)).unwrap_or(6);
    let length = length_override
        .or(config.map(|c| c.beam.length))
        .unwrap_or(1.0);
    let (panels, points) = config
        .map(|c| (c.quadrature.panels, c.quadrature.points_per_panel))
        .unwrap_or((
            inexbeam::quadrature::DEFAULT_PANELS,
            inexbeam::quadrature::DEFAULT_POINTS_PER_PANEL,
        ));
    let quad = QuadratureContext::build(panels, points, length)?;
    let basis = ModeBasis::new(n, length, &quad)?;
    match out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            let mut writer = std::io::BufWriter::new(file);
            write_modes_csv(&mut writer, &basis)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_modes_csv(&mut lock, &basis)?;
        }
    }
    Ok(())
}

/// `simulate`: one run into an output directory. Blow-up is an ordinary,
/// flagged outcome. Returns the summary for callers (sweep, tests).
pub fn cmd_simulate(
    config: &SimulationConfig,
    out_dir: &Path,
    tensor_cache: Option<&Path>,
    allow_undamped_inertia: bool,
) -> anyhow::Result<RunSummary> {
    let started = Instant::now();
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    // Echo the resolved config first; doubles as the writability check.
    std::fs::write(out_dir.join("config_resolved.toml"), config.echo_toml()?)
        .with_context(|| format!("writing to {}", out_dir.display()))?;

    let resolved = config.resolve(allow_undamped_inertia)?;
    let ops = config.operators(&resolved, tensor_cache)?;

    let initial = resolved.initial.clone();
    let grid = uniform_grid(config.beam.length, config.run.snapshot_points);
    let snapshot_of = |state: &inexbeam::ModalState| -> anyhow::Result<inexbeam::FieldSnapshot> {
        let load = resolved.prepared_forcing.eval(state.t);
        let accel = solve_acceleration(&ops, state, &load)?;
        Ok(reconstruct(
            &resolved.basis,
            &resolved.quad,
            state,
            Some(&accel),
            &grid,
        )?)
    };

    write_snapshot_csv(&out_dir.join("snapshot_initial.csv"), &snapshot_of(&initial)?)?;

    let trajectory = run_simulation(
        &ops,
        initial,
        &resolved.prepared_forcing,
        &resolved.integrator,
        config.run.t_final,
        config.run.record_every,
    )?;

    write_trajectory_csv(&out_dir.join("trajectory.csv"), &trajectory)?;
    write_snapshot_csv(
        &out_dir.join("snapshot_final.csv"),
        &snapshot_of(trajectory.final_state())?,
    )?;

    let summary = RunSummary::from_trajectory(
        &trajectory,
        resolved.integrator.scheme.to_string(),
        resolved.integrator.dt,
        started.elapsed().as_secs_f64(),
    );
    write_summary_json(&out_dir.join("summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug)]
struct SweepRow {
    value: f64,
    dir: String,
    status: &'static str,
    t_end: Option<f64>,
    e_total_final: Option<f64>,
    max_identity_residual: Option<f64>,
    blowup_time: Option<f64>,
    detail: String,
}

/// `sweep`: one independent run per value of a scalar config parameter,
/// executed in a worker pool; each run owns its directory, the coordinator
/// writes the combined index once all runs settle. Individual run errors are
/// recorded in the index and do not abort the sweep.
pub fn cmd_sweep(
    base: &SimulationConfig,
    param: &str,
    values: &[f64],
    out_dir: &Path,
    tensor_cache: Option<&Path>,
    allow_undamped_inertia: bool,
) -> anyhow::Result<()> {
    if values.is_empty() {
        bail!("sweep needs a non-empty --values list");
    }
    // Fail fast on an unknown parameter path before spawning runs.
    {
        let mut probe = base.clone();
        probe.set_scalar(param, values[0])?;
    }
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let safe_param = param.replace('.', "-");

    let rows: Vec<SweepRow> = values
        .par_iter()
        .enumerate()
        .map(|(i, &value)| {
            let dir_name = format!("run_{i:03}_{safe_param}_{value}");
            let run_dir = out_dir.join(&dir_name);
            let mut config = base.clone();
            let result = config
                .set_scalar(param, value)
                .and_then(|_| cmd_simulate(&config, &run_dir, tensor_cache, allow_undamped_inertia));
            match result {
                Ok(summary) => SweepRow {
                    value,
                    dir: dir_name,
                    status: if summary.blowup { "blowup" } else { "completed" },
                    t_end: Some(summary.t_end),
                    e_total_final: Some(summary.e_total),
                    max_identity_residual: Some(summary.max_identity_residual),
                    blowup_time: summary.blowup_time,
                    detail: summary.blowup_detail.unwrap_or_default(),
                },
                Err(err) => SweepRow {
                    value,
                    dir: dir_name,
                    status: "error",
                    t_end: None,
                    e_total_final: None,
                    max_identity_residual: None,
                    blowup_time: None,
                    detail: format!("{err:#}"),
                },
            }
        })
        .collect();

    use std::io::Write;
    let file = std::fs::File::create(out_dir.join("index.csv"))?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(
        out,
        "value,dir,status,t_end,e_total_final,max_identity_residual,blowup_time,detail"
    )?;
    for row in &rows {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.value,
            row.dir,
            row.status,
            opt(row.t_end),
            opt(row.e_total_final),
            opt(row.max_identity_residual),
            opt(row.blowup_time),
            row.detail.replace(',', ";")
        )?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct DecayOutput {
    omega: f64,
    amplitude: f64,
    r_squared: f64,
    samples_used: usize,
}

/// `decay`: fit `E ~ M exp(-omega t)` to the E_total column of a trajectory
/// CSV; JSON on stdout.
pub fn cmd_decay(
    input: &Path,
    window: Option<(f64, f64)>,
    floor: f64,
) -> anyhow::Result<()> {
    let (header, rows) = read_csv_columns(input)?;
    let t_col = column_index(&header, "t")?;
    let e_col = column_index(&header, "E_total")?;
    let series: Vec<(f64, f64)> = rows.iter().map(|r| (r[t_col], r[e_col])).collect();
    if series.is_empty() {
        bail!("{} has no data rows", input.display());
    }
    let window = window.unwrap_or((series[0].0, series[series.len() - 1].0));
    let fit = fit_decay_rate(&series, window, floor)?;
    let out = DecayOutput {
        omega: fit.omega,
        amplitude: fit.amplitude,
        r_squared: fit.r_squared,
        samples_used: fit.samples_used,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

#[derive(Serialize)]
struct ConvergeOutput {
    order: f64,
    points: Vec<(f64, f64)>,
}

/// `converge`: observed order from an explicit `(dt, error)` CSV, or from a
/// list of trajectory CSVs produced with the same `record_every` (the record
/// spacing then serves as the dt proxy, which leaves the fitted slope
/// unchanged) using the max |identity_residual| as the error measure.
pub fn cmd_converge(errors: Option<&Path>, trajectories: &[PathBuf]) -> anyhow::Result<()> {
    let points: Vec<(f64, f64)> = match (errors, trajectories.is_empty()) {
        (Some(path), _) => {
            let (header, rows) = read_csv_columns(path)?;
            let (dt_col, err_col) = if header.len() == 2 {
                (0, 1)
            } else {
                (column_index(&header, "dt")?, column_index(&header, "error")?)
            };
            rows.iter().map(|r| (r[dt_col], r[err_col])).collect()
        }
        (None, false) => trajectories
            .iter()
            .map(|path| -> anyhow::Result<(f64, f64)> {
                let (header, rows) = read_csv_columns(path)?;
                let t_col = column_index(&header, "t")?;
                let r_col = column_index(&header, "identity_residual")?;
                if rows.len() < 2 {
                    bail!("{} has fewer than two records", path.display());
                }
                let dt = rows[1][t_col] - rows[0][t_col];
                let err = rows
                    .iter()
                    .fold(0.0_f64, |m, row| m.max(row[r_col].abs()));
                Ok((dt, err))
            })
            .collect::<anyhow::Result<_>>()?,
        (None, true) => {
            bail!("converge needs either --errors <csv> or --trajectories <csv,csv,...>")
        }
    };
    let order = convergence_order(&points)?;
    let out = ConvergeOutput { order, points };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

/// Parses a `--window a,b` argument.
pub fn parse_window(arg: &str) -> anyhow::Result<(f64, f64)> {
    let parts: Vec<&str> = arg.split(',').collect();
    if parts.len() != 2 {
        bail!("--window expects \"t_start,t_end\", got \"{arg}\"");
    }
    let a: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| anyhow!("bad window start \"{}\"", parts[0]))?;
    let b: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| anyhow!("bad window end \"{}\"", parts[1]))?;
    Ok((a, b))
}
