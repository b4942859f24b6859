//! Comparison experiments built on [`evolve`](super::evolve).

use serde::Serialize;

use super::{evolve, EquationKind, EvolveOptions, Termination, Trajectory};
use crate::error::{invalid, Result};
use crate::grid::RadialGrid;
use crate::model::{self, FieldState, Formulation, SAccumulator};

/// `(λ^{−1/2} u(r/λ), λ^{−3/2} u_t(r/λ))` resampled on the same grid by
/// linear interpolation; values beyond `r_max` are clamped to the last node.
pub fn rescale(state: &FieldState, grid: &RadialGrid, lambda: f64) -> Result<FieldState> {
    state.require(Formulation::U5d, grid)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    let a = lambda.powf(-0.5);
    let b = lambda.powf(-1.5);
    let value = grid.sample(|r| a * grid.interpolate(&state.value, r / lambda));
    let velocity = grid.sample(|r| b * grid.interpolate(&state.velocity, r / lambda));
    Ok(FieldState {
        formulation: Formulation::U5d,
        value,
        velocity,
        time: state.time * lambda,
    })
}

/// Number of snapshots (besides the initial one) compared per run.
const COMPARISON_SAMPLES: usize = 40;

fn difference(a: &FieldState, b: &FieldState) -> FieldState {
    FieldState {
        formulation: Formulation::U5d,
        value: a.value.iter().zip(&b.value).map(|(x, y)| x - y).collect(),
        velocity: a.velocity.iter().zip(&b.velocity).map(|(x, y)| x - y).collect(),
        time: a.time,
    }
}

/// Sup-in-time Ḣ¹×L² distance and `L³_t` S-norm of the difference over the
/// snapshots common to both trajectories.
fn compare(a: &Trajectory, b: &Trajectory, grid: &RadialGrid) -> Result<(f64, f64)> {
    let mut sup: f64 = 0.0;
    let mut acc = SAccumulator::new();
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        let d = difference(x, y);
        sup = sup.max(model::h_norm_parts(&d, grid)?.energy);
        acc.push(d.time, model::s_norm_increment(&d, grid)?);
    }
    Ok((sup, acc.value()))
}

fn sample_times(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    (1..count)
        .map(|k| t0 + (t1 - t0) * k as f64 / count as f64)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmallScaleRow {
    pub lambda: f64,
    /// `sup_t ‖(u − v, u_t − v_t)‖_{Ḣ¹×L²}` over `[0, λ·horizon]`.
    pub sup_energy_diff: f64,
    /// `‖u − v‖_S` over the same interval, from the snapshots.
    pub s_norm_diff: f64,
    pub an_termination: Termination,
    pub quintic_termination: Termination,
}

/// Evolves the λ-rescaled data under `an_u` and `quintic5d` and measures
/// their distance. Each λ uses the grid scaled by λ (same node count), so
/// the rescaled data are the original samples multiplied by `λ^{−1/2}` and
/// `λ^{−3/2}` with no interpolation.
pub fn small_scale_experiment(
    data: &FieldState,
    lambdas: &[f64],
    grid: &RadialGrid,
    horizon: f64,
    options: &EvolveOptions,
) -> Result<Vec<SmallScaleRow>> {
    data.require(Formulation::U5d, grid)?;
    if !(horizon > 0.0) {
        return Err(invalid("horizon must be positive"));
    }
    lambdas
        .iter()
        .map(|&lambda| {
            if !(lambda > 0.0) {
                return Err(invalid(format!("lambda must be positive, got {lambda}")));
            }
            let g = RadialGrid::new(grid.r_max() * lambda, grid.n_points())?;
            let (a, b) = (lambda.powf(-0.5), lambda.powf(-1.5));
            let scaled = FieldState {
                formulation: Formulation::U5d,
                value: data.value.iter().map(|x| a * x).collect(),
                velocity: data.velocity.iter().map(|x| b * x).collect(),
                time: data.time * lambda,
            };
            let t1 = scaled.time + lambda * horizon;
            let opts = EvolveOptions {
                output_times: sample_times(scaled.time, t1, COMPARISON_SAMPLES),
                exterior_radii: Vec::new(),
                ..options.clone()
            };
            let an = evolve(EquationKind::AnU, &scaled, &g, t1, &opts)?;
            let quintic = evolve(EquationKind::Quintic5d, &scaled, &g, t1, &opts)?;
            let (sup, s) = compare(&an, &quintic, &g)?;
            Ok(SmallScaleRow {
                lambda,
                sup_energy_diff: sup,
                s_norm_diff: s,
                an_termination: an.termination,
                quintic_termination: quintic.termination,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncatedRow {
    pub r_cut: f64,
    /// `sup_t ‖h − h_L‖_{Ḣ¹×L²}`.
    pub sup_diff: f64,
    pub truncated_termination: Termination,
    pub free_termination: Termination,
}

/// Evolves the truncated problem for each radius and the free wave from the
/// same data, reporting their sup-in-time Ḣ¹×L² distance.
pub fn truncated_comparison(
    data: &FieldState,
    radii: &[f64],
    grid: &RadialGrid,
    horizon: f64,
    small_data_threshold: f64,
    options: &EvolveOptions,
) -> Result<Vec<TruncatedRow>> {
    data.require(Formulation::U5d, grid)?;
    let size = model::h_norm_parts(data, grid)?.energy;
    if size > small_data_threshold {
        return Err(invalid(format!(
            "data norm {size} exceeds the small-data threshold {small_data_threshold}"
        )));
    }
    if !(horizon > 0.0) {
        return Err(invalid("horizon must be positive"));
    }
    let t1 = data.time + horizon;
    let opts = EvolveOptions {
        output_times: sample_times(data.time, t1, COMPARISON_SAMPLES),
        exterior_radii: Vec::new(),
        ..options.clone()
    };
    let free = evolve(EquationKind::Free5d, data, grid, t1, &opts)?;
    radii
        .iter()
        .map(|&r_cut| {
            let kind = EquationKind::exterior_truncated(r_cut)?;
            let h = evolve(kind, data, grid, t1, &opts)?;
            Ok(TruncatedRow {
                r_cut,
                sup_diff: compare(&h, &free, grid)?.0,
                truncated_termination: h.termination,
                free_termination: free.termination,
            })
        })
        .collect()
}
