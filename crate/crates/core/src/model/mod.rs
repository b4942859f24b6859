//! Field states, the ψ = r·u dictionary, nonlinearities and conserved
//! functionals.

mod functionals;
mod inequalities;
mod nonlinearity;

pub use functionals::{
    energy, exterior_energy, h_norm, h_norm_parts, s_norm_increment, EnergyReport, HNormParts,
    SAccumulator,
};
pub use inequalities::{
    hardy_check, pointwise_bound_check, strauss_check, PointwiseBound, RatioReport,
};
pub use nonlinearity::{
    force_psi, force_u, g_primitive, quintic_density, sinc, sine_defect, z1, z2,
};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::RadialGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// Azimuth angle ψ on the 3d radial line.
    Psi3d,
    /// 5d field `u = ψ/r`.
    U5d,
}

impl Formulation {
    pub fn as_str(self) -> &'static str {
        match self {
            Formulation::Psi3d => "psi3d",
            Formulation::U5d => "u5d",
        }
    }
}

impl std::fmt::Display for Formulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "psi3d" => Ok(Formulation::Psi3d),
            "u5d" => Ok(Formulation::U5d),
            other => Err(invalid(format!("unknown formulation '{other}'"))),
        }
    }
}

/// Snapshot of a radial field and its time derivative on grid nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub formulation: Formulation,
    pub value: Vec<f64>,
    pub velocity: Vec<f64>,
    pub time: f64,
}

impl FieldState {
    pub fn new(
        formulation: Formulation,
        value: Vec<f64>,
        velocity: Vec<f64>,
        time: f64,
    ) -> Result<Self> {
        if value.len() != velocity.len() {
            return Err(invalid(format!(
                "value has {} samples but velocity has {}",
                value.len(),
                velocity.len()
            )));
        }
        let state = Self {
            formulation,
            value,
            velocity,
            time,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn zero(formulation: Formulation, grid: &RadialGrid, time: f64) -> Self {
        Self {
            formulation,
            value: vec![0.0; grid.len()],
            velocity: vec![0.0; grid.len()],
            time,
        }
    }

    /// Samples `value(r)` and `velocity(r)` on the grid.
    pub fn from_fn(
        formulation: Formulation,
        grid: &RadialGrid,
        time: f64,
        value: impl Fn(f64) -> f64,
        velocity: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        Self::new(formulation, grid.sample(value), grid.sample(velocity), time)
    }

    /// Checks the formulation-specific invariants: finite samples and, for
    /// the azimuth angle, the boundary condition at the origin.
    pub fn validate(&self) -> Result<()> {
        if self.value.len() != self.velocity.len() {
            return Err(Error::InvalidState("value/velocity length mismatch".into()));
        }
        if !self
            .value
            .iter()
            .chain(&self.velocity)
            .all(|x| x.is_finite())
        {
            return Err(Error::InvalidState("non-finite sample".into()));
        }
        self.check_origin()
    }

    fn check_origin(&self) -> Result<()> {
        if self.formulation == Formulation::Psi3d && self.value.first().copied() != Some(0.0) {
            return Err(Error::InvalidState(format!(
                "psi3d state must vanish at r = 0, got {:?}",
                self.value.first()
            )));
        }
        Ok(())
    }

    pub(crate) fn require(&self, formulation: Formulation, grid: &RadialGrid) -> Result<()> {
        if self.formulation != formulation {
            return Err(invalid(format!(
                "expected a {formulation} state, got {}",
                self.formulation
            )));
        }
        grid.check_len(&self.value)?;
        grid.check_len(&self.velocity)
    }
}

/// Even extrapolation to the origin from nodes 1 and 2, exact for
/// `a + b r²`.
#[inline]
pub(crate) fn even_origin(f1: f64, f2: f64) -> f64 {
    (4.0 * f1 - f2) / 3.0
}

/// Divides node samples by r, filling node 0 by even extrapolation.
pub(crate) fn divide_by_r(grid: &RadialGrid, psi: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = psi
        .iter()
        .enumerate()
        .map(|(j, &p)| if j == 0 { 0.0 } else { p / grid.r(j) })
        .collect();
    u[0] = even_origin(u[1], u[2]);
    u
}

pub(crate) fn multiply_by_r(grid: &RadialGrid, u: &[f64]) -> Vec<f64> {
    u.iter()
        .enumerate()
        .map(|(j, &x)| grid.r(j) * x)
        .collect()
}

/// Maps between `ψ` and `u = ψ/r`.
pub fn convert(state: &FieldState, to: Formulation, grid: &RadialGrid) -> Result<FieldState> {
    if state.formulation == to {
        return Err(invalid(format!("state is already {to}")));
    }
    state.require(state.formulation, grid)?;
    state.check_origin()?;
    let (value, velocity) = match to {
        Formulation::U5d => (
            divide_by_r(grid, &state.value),
            divide_by_r(grid, &state.velocity),
        ),
        Formulation::Psi3d => (
            multiply_by_r(grid, &state.value),
            multiply_by_r(grid, &state.velocity),
        ),
    };
    Ok(FieldState {
        formulation: to,
        value,
        velocity,
        time: state.time,
    })
}

/// Topological degree `n` with `ψ(∞) = nπ`, read off at the outer node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DegreeReport {
    pub degree: i64,
    pub residual: f64,
}

pub const DEGREE_TOLERANCE: f64 = 0.25;

pub fn degree(state: &FieldState, grid: &RadialGrid) -> Result<DegreeReport> {
    state.require(Formulation::Psi3d, grid)?;
    let ratio = state.value[grid.n_points()] / std::f64::consts::PI;
    let n = ratio.round();
    let residual = (ratio - n).abs();
    if !(residual <= DEGREE_TOLERANCE) {
        return Err(Error::IllDefinedDegree { ratio, residual });
    }
    Ok(DegreeReport {
        degree: n as i64,
        residual,
    })
}
