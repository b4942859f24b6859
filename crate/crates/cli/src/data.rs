//! Builtin initial-data families.

use anlab::evolve::{smooth_cutoff, turok_spergel};
use anlab::io::read_snapshot;
use anlab::model::convert;
use anlab::{Error, FieldState, Formulation, RadialGrid, Result};

use crate::config::DataSpec;

fn newton(r: f64, a: f64, amplitude: f64) -> f64 {
    if r > 0.0 {
        amplitude * smooth_cutoff(r, a) * r.powi(-3)
    } else {
        0.0
    }
}

/// Samples the family on `grid` and returns it in the requested formulation.
pub fn builtin_data(spec: &DataSpec, grid: &RadialGrid, formulation: Formulation) -> Result<FieldState> {
    let state = match spec {
        &DataSpec::GaussianBump { amplitude, center, width } => FieldState::from_fn(
            Formulation::U5d,
            grid,
            0.0,
            |r| amplitude * (-((r - center) / width).powi(2)).exp(),
            |_| 0.0,
        )?,
        &DataSpec::TurokSpergel { t0 } => {
            let mut value = Vec::with_capacity(grid.len());
            let mut velocity = Vec::with_capacity(grid.len());
            for r in grid.nodes() {
                let (psi, psi_t) = turok_spergel(t0, r)?;
                value.push(psi);
                velocity.push(psi_t);
            }
            FieldState::new(Formulation::Psi3d, value, velocity, t0)?
        }
        &DataSpec::NewtonTail { a, amplitude } => {
            FieldState::from_fn(Formulation::U5d, grid, 0.0, |r| newton(r, a, amplitude), |_| 0.0)?
        }
        &DataSpec::PlaneVelocity { a, amplitude } => {
            FieldState::from_fn(Formulation::U5d, grid, 0.0, |_| 0.0, |r| newton(r, a, amplitude))?
        }
        DataSpec::CustomFile { path } => {
            let (state, file_grid) = read_snapshot(path)?;
            let same = file_grid.n_points() == grid.n_points()
                && (file_grid.r_max() - grid.r_max()).abs() <= 1e-12 * grid.r_max();
            if !same {
                return Err(Error::InvalidArgument(format!(
                    "{} holds a grid (r_max = {}, n_points = {}) different from the configured one (r_max = {}, n_points = {})",
                    path.display(),
                    file_grid.r_max(),
                    file_grid.n_points(),
                    grid.r_max(),
                    grid.n_points()
                )));
            }
            state
        }
    };
    if state.formulation == formulation {
        Ok(state)
    } else {
        convert(&state, formulation, grid)
    }
}
