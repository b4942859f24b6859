//! Command dispatch and output files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anlab::channels::{channel_experiment, decay_diagnostics, key_inequality_report};
use anlab::evolve::{
    evolve, small_scale_experiment, truncated_comparison, EvolveOptions, Termination,
    Trajectory,
};
use anlab::io::{csv_table, write_snapshot};
use anlab::stationary::sweep_entry;
use anlab::{Formulation, RadialGrid};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{Command, RunConfig};
use crate::data::builtin_data;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] anlab::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("could not serialize output: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Config(String),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Scientific outcome of a successful run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    BlowupDetected,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Completed => 0,
            RunStatus::BlowupDetected => 2,
        }
    }

    fn from_terminations<'a>(terms: impl IntoIterator<Item = &'a Termination>) -> Self {
        if terms
            .into_iter()
            .any(|t| matches!(t, Termination::BlowupDetected { .. }))
        {
            RunStatus::BlowupDetected
        } else {
            RunStatus::Completed
        }
    }

    fn worst(self, other: Self) -> Self {
        if self == RunStatus::BlowupDetected || other == RunStatus::BlowupDetected {
            RunStatus::BlowupDetected
        } else {
            RunStatus::Completed
        }
    }
}

/// Output directory that remembers the files written to it.
struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|source| RunError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), RunError> {
        let path = self.path(name);
        fs::write(&path, contents).map_err(|source| RunError::Io { path, source })?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), RunError> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.write(name, &text)
    }

    fn snapshot(&mut self, name: &str, state: &anlab::FieldState, grid: &RadialGrid) -> Result<(), RunError> {
        let path = self.path(name);
        write_snapshot(&path, state, grid).map_err(|e| match e {
            anlab::Error::Io(source) => RunError::Io { path, source },
            other => other.into(),
        })?;
        self.files.push(name.to_string());
        self.files.push(name.replace(".csv", ".json"));
        Ok(())
    }
}

/// SHA-256 of the canonical configuration text, in hex.
pub fn config_hash(config: &RunConfig) -> String {
    Sha256::digest(config.to_text().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn grid_of(config: &RunConfig) -> Result<RadialGrid, RunError> {
    Ok(RadialGrid::new(config.r_max, config.n_points)?)
}

fn evolve_options(config: &RunConfig) -> EvolveOptions {
    EvolveOptions {
        cfl: config.cfl,
        boundary: config.boundary,
        output_times: config.output_times.clone(),
        exterior_radii: config.radii.clone(),
        blowup_amplitude: config.blowup_threshold,
        energy_growth: config.energy_growth,
    }
}

/// Runs the configured command into `out` and writes `manifest.json` there.
/// `jobs = 0` uses one worker per core.
pub fn run(config: &RunConfig, out: &Path, jobs: usize) -> Result<RunStatus, RunError> {
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let mut output = Output::new(out)?;
    let status = pool.install(|| match config.command {
        Command::Evolve => run_evolve(config, &mut output),
        Command::Stationary => run_stationary(config, &mut output),
        Command::Channels => run_channels(config, &mut output),
        Command::Smallscale => run_smallscale(config, &mut output),
        Command::Truncated => run_truncated(config, &mut output),
        Command::Sweep => run_sweep(config, &mut output),
    })?;
    write_manifest(config, &mut output, status, started)?;
    Ok(status)
}

fn write_manifest(config: &RunConfig, output: &mut Output, status: RunStatus, started: Instant) -> Result<(), RunError> {
    let mut files = output.files.clone();
    files.sort();
    let manifest = json!({
        "command": config.command.name(),
        "config": config.to_text(),
        "config_sha256": config_hash(config),
        "versions": {
            "anlab": anlab::VERSION,
            "anlab-cli": env!("CARGO_PKG_VERSION"),
        },
        "wall_seconds": started.elapsed().as_secs_f64(),
        "exit_status": status.exit_code(),
        "files": files,
    });
    output.json("manifest.json", &manifest)
}

const DIAGNOSTIC_COLUMNS: [&str; 9] = [
    "t",
    "energy",
    "kinetic",
    "gradient",
    "sine_potential",
    "quintic_potential",
    "h_norm",
    "s_accumulator",
    "degree_residual",
];

/// Diagnostic table; the exterior-energy columns are `ext_energy_a1, …` in
/// the order of the configured radii.
pub fn diagnostics_csv(traj: &Trajectory) -> String {
    let mut header: Vec<String> = DIAGNOSTIC_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((1..=traj.exterior_radii.len()).map(|k| format!("ext_energy_a{k}")));
    let rows: Vec<Vec<f64>> = traj
        .diagnostics
        .iter()
        .map(|d| {
            let e = &d.energy;
            let mut row = vec![
                d.time,
                e.total,
                e.kinetic,
                e.gradient,
                e.sine_potential,
                e.quintic_potential,
                d.h_norm,
                d.s_accumulator,
                d.degree_residual,
            ];
            row.extend(&d.exterior);
            row
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_table(&header, rows.iter().map(Vec::as_slice))
}

fn run_evolve(config: &RunConfig, out: &mut Output) -> Result<RunStatus, RunError> {
    let grid = grid_of(config)?;
    let kind = config.equation;
    let data = builtin_data(&config.initial, &grid, kind.formulation())?;
    let traj = evolve(kind, &data, &grid, config.t_final, &evolve_options(config))?;
    out.write("diagnostics.csv", &diagnostics_csv(&traj))?;
    for (k, s) in traj.snapshots.iter().enumerate() {
        out.snapshot(&format!("snapshot_{k:03}.csv"), s, &grid)?;
    }
    out.json(
        "summary.json",
        &json!({
            "kind": kind.to_string(),
            "termination": traj.termination,
            "final_time": traj.final_time(),
            "wall_seconds": traj.wall_seconds,
            "radii": traj.exterior_radii,
        }),
    )?;
    Ok(RunStatus::from_terminations([&traj.termination]))
}

fn run_stationary(config: &RunConfig, out: &mut Output) -> Result<RunStatus, RunError> {
    let results: Vec<_> = config
        .alphas
        .par_iter()
        .map(|&alpha| sweep_entry(alpha, config.r_min, config.abort_threshold))
        .collect::<anlab::Result<_>>()?;
    let mut summary = Vec::with_capacity(results.len());
    for (k, (row, profile)) in results.iter().enumerate() {
        let name = format!("profile_{k:03}.csv");
        let rows: Vec<[f64; 3]> = (0..profile.len())
            .map(|i| [profile.r[i], profile.phi[i], profile.dphi_dr[i]])
            .collect();
        out.write(&name, &csv_table(&["r", "phi", "dphi_dr"], rows.iter().map(|r| &r[..])))?;
        summary.push(json!({
            "alpha": row.alpha,
            "file": name,
            "origin_class": row.origin_class,
            "tail_fit_slope": row.tail_fit_slope,
            "ode_residual": row.ode_residual,
            "phi_at_rmin": row.phi_at_rmin,
            "r_exit": profile.r_exit(),
            "r_end": profile.r_min(),
        }));
    }
    out.json(
        "stationary_summary.json",
        &json!({
            "r_min": config.r_min,
            "abort_threshold": config.abort_threshold,
            "profiles": summary,
        }),
    )?;
    Ok(RunStatus::Completed)
}

fn run_channels(config: &RunConfig, out: &mut Output) -> Result<RunStatus, RunError> {
    let grid = grid_of(config)?;
    let opts = evolve_options(config);
    let data = builtin_data(&config.initial, &grid, Formulation::U5d)?;
    let channel_opts = EvolveOptions {
        output_times: Vec::new(),
        exterior_radii: Vec::new(),
        ..opts.clone()
    };
    let report = channel_experiment(&data, &grid, config.channel_radius, config.horizon, &channel_opts)?;
    let rows: Vec<[f64; 5]> = report
        .rows
        .iter()
        .map(|r| [r.t, r.ext_plus, r.ext_minus, r.perp_norm_sq, r.ratio])
        .collect();
    out.write(
        "channels.csv",
        &csv_table(
            &["t", "ext_plus", "ext_minus", "perp_norm_sq", "ratio"],
            rows.iter().map(|r| &r[..]),
        ),
    )?;
    out.json(
        "channel_summary.json",
        &json!({
            "a": report.a,
            "horizon": report.horizon,
            "projection": report.projection,
            "terminal_plus": report.terminal_plus,
            "terminal_minus": report.terminal_minus,
            "terminal_max": report.terminal_max,
            "ratio": report.ratio,
            "energy_ratio": report.energy_ratio,
            "plateau": report.plateau,
            "forward_termination": report.forward_termination,
            "backward_termination": report.backward_termination,
        }),
    )?;

    let kind = config.equation;
    let start = builtin_data(&config.initial, &grid, kind.formulation())?;
    let traj = evolve(kind, &start, &grid, config.t_final, &opts)?;
    let radii = if config.key_radii.is_empty() {
        vec![config.channel_radius]
    } else {
        config.key_radii.clone()
    };
    let table = key_inequality_report(&traj, &grid, &radii)?;
    let rows: Vec<[f64; 5]> = table.iter().map(|r| [r.t, r.r, r.lhs, r.rhs, r.ratio]).collect();
    out.write(
        "key_inequality.csv",
        &csv_table(&["t", "R", "lhs", "rhs", "ratio"], rows.iter().map(|r| &r[..])),
    )?;

    let decay = decay_diagnostics(&data, &grid, config.decay_window)?;
    out.json(
        "decay.json",
        &json!({
            "ell0": decay.ell0,
            "v0_slope": decay.v0_slope,
            "v1_slope": decay.v1_slope,
            "window": [decay.window.0, decay.window.1],
            "v1_tail_bound": decay.v1_tail_bound,
        }),
    )?;
    let rows: Vec<[f64; 3]> = (0..decay.r.len())
        .map(|j| [decay.r[j], decay.v0[j], decay.v1[j]])
        .collect();
    out.write("decay.csv", &csv_table(&["r", "v0", "v1"], rows.iter().map(|r| &r[..])))?;

    Ok(RunStatus::from_terminations([
        &report.forward_termination,
        &report.backward_termination,
        &traj.termination,
    ]))
}

fn run_smallscale(config: &RunConfig, out: &mut Output) -> Result<RunStatus, RunError> {
    let grid = grid_of(config)?;
    let data = builtin_data(&config.initial, &grid, Formulation::U5d)?;
    let opts = evolve_options(config);
    let rows: Vec<_> = config
        .lambdas
        .par_iter()
        .map(|&l| small_scale_experiment(&data, &[l], &grid, config.horizon, &opts).map(|mut v| v.remove(0)))
        .collect::<anlab::Result<_>>()?;
    let table: Vec<[f64; 3]> = rows
        .iter()
        .map(|r| [r.lambda, r.sup_energy_diff, r.s_norm_diff])
        .collect();
    out.write(
        "smallscale.csv",
        &csv_table(&["lambda", "sup_energy_diff", "s_norm_diff"], table.iter().map(|r| &r[..])),
    )?;
    let ratios: Vec<f64> = rows
        .windows(2)
        .map(|w| w[1].sup_energy_diff / w[0].sup_energy_diff)
        .collect();
    let h_norm = anlab::model::h_norm(&data, &grid)?;
    out.json(
        "smallscale_summary.json",
        &json!({ "h_norm": h_norm, "horizon": config.horizon, "rows": rows, "successive_ratios": ratios }),
    )?;
    Ok(RunStatus::from_terminations(
        rows.iter()
            .flat_map(|r| [&r.an_termination, &r.quintic_termination]),
    ))
}

/// Least-squares slope of `log y` against `log x` over positive pairs.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn run_truncated(config: &RunConfig, out: &mut Output) -> Result<RunStatus, RunError> {
    let grid = grid_of(config)?;
    let data = builtin_data(&config.initial, &grid, Formulation::U5d)?;
    let rows = truncated_comparison(
        &data,
        &config.truncation_radii,
        &grid,
        config.horizon,
        config.small_data_threshold,
        &evolve_options(config),
    )?;
    let table: Vec<[f64; 2]> = rows.iter().map(|r| [r.r_cut, r.sup_diff]).collect();
    out.write("truncated.csv", &csv_table(&["R", "sup_diff"], table.iter().map(|r| &r[..])))?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.r_cut, r.sup_diff)).collect();
    out.json(
        "truncated_summary.json",
        &json!({
            "data_norm": anlab::model::h_norm_parts(&data, &grid)?.energy,
            "horizon": config.horizon,
            "rows": rows,
            "log_log_slope": log_log_slope(&pts),
        }),
    )?;
    Ok(RunStatus::from_terminations(
        rows.iter()
            .flat_map(|r| [&r.truncated_termination, &r.free_termination]),
    ))
}

fn run_sweep(config: &RunConfig, out: &mut Output) -> Result<RunStatus, RunError> {
    let runs: Vec<RunConfig> = (0..config.sweep_values.len())
        .map(|i| config.sweep_run(i).map_err(RunError::Config))
        .collect::<Result<_, _>>()?;
    let results: Vec<(String, RunStatus)> = runs
        .par_iter()
        .enumerate()
        .map(|(i, cfg)| {
            let name = format!("run_{i:03}");
            let started = Instant::now();
            let mut sub = Output::new(&out.path(&name))?;
            let status = run_evolve(cfg, &mut sub)?;
            write_manifest(cfg, &mut sub, status, started)?;
            Ok((name, status))
        })
        .collect::<Result<_, RunError>>()?;
    let mut status = RunStatus::Completed;
    let mut index = Vec::with_capacity(results.len());
    for ((name, s), value) in results.iter().zip(&config.sweep_values) {
        status = status.worst(*s);
        index.push(json!({ "dir": name, "value": value, "exit_status": s.exit_code() }));
    }
    out.json(
        "sweep_summary.json",
        &json!({ "key": config.sweep_key, "runs": index }),
    )?;
    Ok(status)
}
