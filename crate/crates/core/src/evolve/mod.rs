//! Method-of-lines integration of the radial wave equations.
//!
//! Every equation is discretized through the 5d field. The 3d equations
//! (`an_psi`, `wave_map`, `linearized3d`) evolve ψ but compute their
//! acceleration as `r (Δ₅u − F(r, u))` with `u = ψ/r`, which is the same
//! operator as `ψ_rr + (2/r)ψ_r − (zeroth-order term)` written in the
//! dictionary variable. Node 0 of a 3d field is pinned to zero.

mod exact;
mod experiments;

pub use exact::{exact_free5d, turok_spergel, GaussianProfile, PolynomialBump, Profile};
pub use experiments::{
    rescale, small_scale_experiment, truncated_comparison, SmallScaleRow, TruncatedRow,
};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{Parity, RadialGrid};
use crate::model::{
    self, even_origin, force_u, quintic_density, z1, EnergyReport, FieldState,
    Formulation, SAccumulator,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationKind {
    AnPsi,
    AnU,
    WaveMap,
    Quintic5d,
    Free5d,
    Linearized3d,
    ExteriorTruncated { r_cut: f64 },
}

impl EquationKind {
    pub fn exterior_truncated(r_cut: f64) -> Result<Self> {
        if !(r_cut.is_finite() && r_cut > 0.0) {
            return Err(invalid(format!("truncation radius must be positive, got {r_cut}")));
        }
        Ok(EquationKind::ExteriorTruncated { r_cut })
    }

    pub fn formulation(self) -> Formulation {
        match self {
            EquationKind::AnPsi | EquationKind::WaveMap | EquationKind::Linearized3d => {
                Formulation::Psi3d
            }
            _ => Formulation::U5d,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EquationKind::AnPsi => "an_psi",
            EquationKind::AnU => "an_u",
            EquationKind::WaveMap => "wave_map",
            EquationKind::Quintic5d => "quintic5d",
            EquationKind::Free5d => "free5d",
            EquationKind::Linearized3d => "linearized3d",
            EquationKind::ExteriorTruncated { .. } => "exterior_truncated",
        }
    }

    /// Zeroth-order term `F(r, u)` in `u_tt = Δ₅u − F`, with the cutoff value
    /// `chi` used only by the truncated problem.
    #[inline]
    fn force(self, r: f64, u: f64, chi: f64) -> f64 {
        match self {
            EquationKind::AnPsi | EquationKind::AnU => force_u(r, u),
            EquationKind::WaveMap => z1(r * u) * u * u * u,
            EquationKind::Quintic5d => 4.0 / 3.0 * u.powi(5),
            EquationKind::Free5d | EquationKind::Linearized3d => 0.0,
            EquationKind::ExteriorTruncated { .. } => {
                if chi == 0.0 {
                    0.0
                } else {
                    chi * force_u(r, u)
                }
            }
        }
    }
}

impl fmt::Display for EquationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquationKind::ExteriorTruncated { r_cut } => write!(f, "exterior_truncated({r_cut})"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for EquationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Ok(match s {
            "an_psi" => EquationKind::AnPsi,
            "an_u" => EquationKind::AnU,
            "wave_map" => EquationKind::WaveMap,
            "quintic5d" => EquationKind::Quintic5d,
            "free5d" => EquationKind::Free5d,
            "linearized3d" => EquationKind::Linearized3d,
            _ => {
                let inner = s
                    .strip_prefix("exterior_truncated(")
                    .and_then(|rest| rest.strip_suffix(')'))
                    .ok_or_else(|| invalid(format!("unknown equation '{s}'")))?;
                let r_cut = inner
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| invalid(format!("bad truncation radius in '{s}'")))?;
                EquationKind::exterior_truncated(r_cut)?
            }
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// The outer node keeps its velocity (zero acceleration); the grid must
    /// contain the cone.
    #[default]
    None,
    /// First-order outgoing condition `u_t + u_r + 2u/r = 0`.
    Sommerfeld,
}

impl FromStr for BoundaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(BoundaryMode::None),
            "sommerfeld" => Ok(BoundaryMode::Sommerfeld),
            other => Err(invalid(format!("unknown boundary mode '{other}'"))),
        }
    }
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryMode::None => "none",
            BoundaryMode::Sommerfeld => "sommerfeld",
        })
    }
}

/// `χ(r/R)` with `χ = 0` on `[0, 1/2]`, `χ = 1` on `[1, ∞)` and the
/// `e^{−1/s}` transition in between.
pub fn smooth_cutoff(r: f64, r_cut: f64) -> f64 {
    cutoff_with_derivative(r, r_cut).0
}

/// `(χ_R(r), dχ_R/dr)`.
pub fn cutoff_with_derivative(r: f64, r_cut: f64) -> (f64, f64) {
    let s = 2.0 * (r / r_cut - 0.5);
    if s <= 0.0 {
        return (0.0, 0.0);
    }
    if s >= 1.0 {
        return (1.0, 0.0);
    }
    let a = (-1.0 / s).exp();
    let b = (-1.0 / (1.0 - s)).exp();
    let chi = a / (a + b);
    let dchi_ds = a * b * (1.0 / (s * s) + 1.0 / ((1.0 - s) * (1.0 - s))) / ((a + b) * (a + b));
    (chi, 2.0 / r_cut * dchi_ds)
}

/// Largest Courant number for which RK4 is stable on the discrete 5d
/// Laplacian (spectral radius ≈ 8.45/dr², RK4 imaginary-axis limit 2√2).
pub const MAX_STABLE_CFL: f64 = 0.97;
pub const DEFAULT_CFL: f64 = 0.45;
pub const DEFAULT_BLOWUP_AMPLITUDE: f64 = 1e6;
pub const DEFAULT_ENERGY_GROWTH: f64 = 10.0;

/// Precomputed per-node data for the right-hand side.
struct Operator {
    kind: EquationKind,
    boundary: BoundaryMode,
    n: usize,
    dr: f64,
    r: Vec<f64>,
    chi: Vec<f64>,
    /// Scratch: the 5d field and its Laplacian.
    u: Vec<f64>,
    lap: Vec<f64>,
}

impl Operator {
    fn new(kind: EquationKind, boundary: BoundaryMode, grid: &RadialGrid) -> Self {
        let r: Vec<f64> = grid.nodes().collect();
        let chi = match kind {
            EquationKind::ExteriorTruncated { r_cut } => {
                r.iter().map(|&x| smooth_cutoff(x, r_cut)).collect()
            }
            _ => vec![1.0; r.len()],
        };
        Self {
            kind,
            boundary,
            n: grid.n_points(),
            dr: grid.dr(),
            r,
            chi,
            u: vec![0.0; grid.len()],
            lap: vec![0.0; grid.len()],
        }
    }

    fn is_3d(&self) -> bool {
        self.kind.formulation() == Formulation::Psi3d
    }

    /// Acceleration for the given value and velocity; returns `max |u|`.
    fn accel(&mut self, grid: &RadialGrid, value: &[f64], velocity: &[f64], out: &mut [f64]) -> f64 {
        let n = self.n;
        let three_d = self.is_3d();
        if three_d {
            for j in 1..=n {
                self.u[j] = value[j] / self.r[j];
            }
            self.u[0] = even_origin(self.u[1], self.u[2]);
        } else {
            self.u.copy_from_slice(value);
        }
        grid.laplacian_5d_into(&self.u, &mut self.lap);
        let mut amp: f64 = 0.0;
        for j in 0..=n {
            let u = self.u[j];
            amp = amp.max(u.abs());
            let a = self.lap[j] - self.kind.force(self.r[j], u, self.chi[j]);
            out[j] = if three_d { self.r[j] * a } else { a };
        }
        if self.boundary == BoundaryMode::None {
            // The last node moves with constant velocity. Both generators
            // r⁻³ and t·r⁻³ of the Newton plane satisfy this exactly, and
            // it is a stable reflecting closure otherwise.
            out[n] = 0.0;
        } else {
            // u_tt = −(u_t)_r − 2 u_t / r at the outer node
            let rn = self.r[n];
            let w = |j: usize| {
                if three_d {
                    velocity[j] / self.r[j]
                } else {
                    velocity[j]
                }
            };
            let w_r = (3.0 * w(n) - 4.0 * w(n - 1) + w(n - 2)) / (2.0 * self.dr);
            let a = -(w_r + 2.0 * w(n) / rn);
            out[n] = if three_d { rn * a } else { a };
        }
        if three_d {
            out[0] = 0.0;
        }
        amp
    }
}

/// Discrete acceleration `∂_t²` of the field for the given equation.
pub fn rhs(
    kind: EquationKind,
    state: &FieldState,
    grid: &RadialGrid,
    boundary: BoundaryMode,
) -> Result<Vec<f64>> {
    check_kind(kind, state, grid)?;
    let mut op = Operator::new(kind, boundary, grid);
    let mut out = vec![0.0; grid.len()];
    op.accel(grid, &state.value, &state.velocity, &mut out);
    Ok(out)
}

fn check_kind(kind: EquationKind, state: &FieldState, grid: &RadialGrid) -> Result<()> {
    if state.formulation != kind.formulation() {
        return Err(invalid(format!(
            "{} evolves {} states, got {}",
            kind.name(),
            kind.formulation(),
            state.formulation
        )));
    }
    state.require(state.formulation, grid)
}

/// Conserved energy of the given equation, split into the four reported
/// components. For the truncated problem the cutoff-weighted potential is
/// rewritten through ψ = r·h so that every component is nonnegative.
pub fn kind_energy(kind: EquationKind, state: &FieldState, grid: &RadialGrid) -> Result<EnergyReport> {
    check_kind(kind, state, grid)?;
    let sq = |v: &[f64]| v.iter().map(|x| 0.5 * x * x).collect::<Vec<_>>();
    match kind {
        EquationKind::AnPsi => model::energy(state, grid),
        EquationKind::AnU => model::energy(&model::convert(state, Formulation::Psi3d, grid)?, grid),
        EquationKind::WaveMap | EquationKind::Linearized3d => {
            let psi_r = grid.d_dr_fourth(&state.value, Parity::Odd)?;
            let potential: Vec<f64> = state
                .value
                .iter()
                .map(|&p| {
                    if kind == EquationKind::WaveMap {
                        p.sin().powi(2)
                    } else {
                        p * p
                    }
                })
                .collect();
            Ok(EnergyReport::new(
                grid.trapezoid_unchecked(&sq(&state.velocity), 2),
                grid.trapezoid_unchecked(&sq(&psi_r), 2),
                grid.trapezoid_unchecked(&potential, 0),
                0.0,
            ))
        }
        EquationKind::Free5d | EquationKind::Quintic5d => {
            let u_r = grid.d_dr_fourth(&state.value, Parity::Even)?;
            let quintic = if kind == EquationKind::Quintic5d {
                let density: Vec<f64> = state.value.iter().map(|u| 2.0 / 9.0 * u.powi(6)).collect();
                grid.trapezoid_unchecked(&density, 4)
            } else {
                0.0
            };
            Ok(EnergyReport::new(
                grid.trapezoid_unchecked(&sq(&state.velocity), 4),
                grid.trapezoid_unchecked(&sq(&u_r), 4),
                0.0,
                quintic,
            ))
        }
        EquationKind::ExteriorTruncated { r_cut } => {
            let u = &state.value;
            let u_r = grid.d_dr_fourth(u, Parity::Even)?;
            let psi: Vec<f64> = grid.nodes().zip(u).map(|(r, x)| r * x).collect();
            let psi_r = grid.d_dr_fourth(&psi, Parity::Odd)?;
            let mut grad = vec![0.0; grid.len()];
            let mut sine = vec![0.0; grid.len()];
            let mut quintic = vec![0.0; grid.len()];
            for (j, r) in grid.nodes().enumerate() {
                let (chi, dchi) = cutoff_with_derivative(r, r_cut);
                // ½(1−χ)u_r² r⁴ + ½χ ψ_r² r² + ½χ′ r³ u²
                grad[j] = 0.5 * (1.0 - chi) * u_r[j] * u_r[j] * r.powi(4)
                    + 0.5 * chi * psi_r[j] * psi_r[j] * r * r
                    + 0.5 * dchi * r.powi(3) * u[j] * u[j];
                sine[j] = chi * psi[j].sin().powi(2);
                quintic[j] = chi * quintic_density(r, psi[j]);
            }
            Ok(EnergyReport::new(
                grid.trapezoid_unchecked(&sq(&state.velocity), 4),
                grid.trapezoid_unchecked(&grad, 0),
                grid.trapezoid_unchecked(&sine, 0),
                grid.trapezoid_unchecked(&quintic, 0),
            ))
        }
    }
}

/// Options for [`evolve`].
#[derive(Clone, Debug, PartialEq)]
pub struct EvolveOptions {
    pub cfl: f64,
    pub boundary: BoundaryMode,
    /// Requested snapshot times strictly between the initial and final time.
    pub output_times: Vec<f64>,
    /// Base radii `a` of the exterior-energy diagnostics on `r ≥ a + |t − t₀|`.
    pub exterior_radii: Vec<f64>,
    /// Blow-up is declared when `max |u|` of the 5d field exceeds this.
    pub blowup_amplitude: f64,
    /// Blow-up is declared when the energy grows by this factor.
    pub energy_growth: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            cfl: DEFAULT_CFL,
            boundary: BoundaryMode::None,
            output_times: Vec::new(),
            exterior_radii: Vec::new(),
            blowup_amplitude: DEFAULT_BLOWUP_AMPLITUDE,
            energy_growth: DEFAULT_ENERGY_GROWTH,
        }
    }
}

impl EvolveOptions {
    pub fn with_cfl(cfl: f64) -> Self {
        Self {
            cfl,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    BlowupDetected { time: f64 },
    CflViolation,
}

impl Termination {
    pub fn name(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::BlowupDetected { .. } => "blowup_detected",
            Termination::CflViolation => "cfl_violation",
        }
    }
}

/// Diagnostics recorded with every snapshot.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub time: f64,
    pub energy: EnergyReport,
    pub h_norm: f64,
    pub s_accumulator: f64,
    /// Distance of `ψ(r_max)/π` from the nearest integer.
    pub degree_residual: f64,
    /// Exterior energies on `r ≥ a + |t − t₀|`; NaN once the cone leaves the grid.
    pub exterior: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub kind: EquationKind,
    /// Snapshots ordered along the direction of integration.
    pub snapshots: Vec<FieldState>,
    pub diagnostics: Vec<DiagnosticRow>,
    pub termination: Termination,
    pub exterior_radii: Vec<f64>,
    pub steps: usize,
    pub wall_seconds: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &FieldState {
        self.snapshots.last().expect("trajectory has a snapshot")
    }

    pub fn final_time(&self) -> f64 {
        self.final_state().time
    }

    /// Snapshot whose time is closest to `t`.
    pub fn snapshot_near(&self, t: f64) -> &FieldState {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.time - t).abs().total_cmp(&(b.time - t).abs()))
            .expect("trajectory has a snapshot")
    }

    /// The snapshots as 5d fields.
    pub fn u_snapshots(&self, grid: &RadialGrid) -> Result<Vec<FieldState>> {
        self.snapshots.iter().map(|s| to_u5d(s, grid)).collect()
    }
}

pub(crate) fn to_u5d(state: &FieldState, grid: &RadialGrid) -> Result<FieldState> {
    match state.formulation {
        Formulation::U5d => Ok(state.clone()),
        Formulation::Psi3d => model::convert(state, Formulation::U5d, grid),
    }
}

fn to_psi3d(state: &FieldState, grid: &RadialGrid) -> Result<FieldState> {
    match state.formulation {
        Formulation::Psi3d => Ok(state.clone()),
        Formulation::U5d => model::convert(state, Formulation::Psi3d, grid),
    }
}

struct Recorder<'a> {
    grid: &'a RadialGrid,
    t0: f64,
    radii: Vec<f64>,
    s_acc: SAccumulator,
}

impl Recorder<'_> {
    fn s_push(&mut self, state: &FieldState) -> Result<()> {
        let u = to_u5d(state, self.grid)?;
        self.s_acc.push(state.time, model::s_norm_increment(&u, self.grid)?);
        Ok(())
    }

    fn row(&self, state: &FieldState, energy: EnergyReport) -> Result<DiagnosticRow> {
        let grid = self.grid;
        let u = to_u5d(state, grid)?;
        let psi_end = to_psi3d(state, grid)?.value[grid.n_points()] / std::f64::consts::PI;
        let elapsed = (state.time - self.t0).abs();
        let exterior = self
            .radii
            .iter()
            .map(|&a| {
                let radius = a + elapsed;
                if radius < grid.r_max() {
                    model::exterior_energy(&u, grid, radius)
                } else {
                    Ok(f64::NAN)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DiagnosticRow {
            time: state.time,
            energy,
            h_norm: model::h_norm(&u, grid)?,
            s_accumulator: self.s_acc.value(),
            degree_residual: (psi_end - psi_end.round()).abs(),
            exterior,
        })
    }
}

/// Classical RK4 on `(value, velocity)` with `dt = cfl·dr`, from
/// `initial.time` to `t_final` (either direction).
pub fn evolve(
    kind: EquationKind,
    initial: &FieldState,
    grid: &RadialGrid,
    t_final: f64,
    options: &EvolveOptions,
) -> Result<Trajectory> {
    let started = Instant::now();
    check_kind(kind, initial, grid)?;
    initial.validate()?;
    let cfl = options.cfl;
    if !(cfl > 0.0 && cfl < 1.0) {
        return Err(invalid(format!("cfl must lie in (0, 1), got {cfl}")));
    }
    if !t_final.is_finite() {
        return Err(invalid("t_final must be finite"));
    }
    let t0 = initial.time;
    let direction = if t_final >= t0 { 1.0 } else { -1.0 };
    let mut targets: Vec<f64> = Vec::new();
    for &t in &options.output_times {
        let ahead = (t - t0) * direction;
        if !(ahead >= 0.0 && (t_final - t) * direction >= 0.0) {
            return Err(invalid(format!(
                "output time {t} lies outside [{t0}, {t_final}]"
            )));
        }
        if ahead > 0.0 && t != t_final {
            targets.push(t);
        }
    }
    targets.sort_by(|a, b| ((a - t0) * direction).total_cmp(&((b - t0) * direction)));
    targets.dedup();
    if t_final != t0 {
        targets.push(t_final);
    }

    let mut rec = Recorder {
        grid,
        t0,
        radii: options.exterior_radii.clone(),
        s_acc: SAccumulator::new(),
    };
    let mut state = initial.clone();
    if kind.formulation() == Formulation::Psi3d {
        state.velocity[0] = 0.0;
    }
    let e0 = kind_energy(kind, &state, grid)?;
    rec.s_push(&state)?;
    let mut snapshots = vec![state.clone()];
    let mut diagnostics = vec![rec.row(&state, e0)?];
    let finish = |snapshots, diagnostics, termination, steps| Trajectory {
        kind,
        snapshots,
        diagnostics,
        termination,
        exterior_radii: options.exterior_radii.clone(),
        steps,
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    if cfl > MAX_STABLE_CFL {
        return Ok(finish(snapshots, diagnostics, Termination::CflViolation, 0));
    }

    let dt_max = cfl * grid.dr();
    let mut op = Operator::new(kind, options.boundary, grid);
    let mut stepper = Rk4::new(grid.len());
    let mut steps = 0usize;
    let energy_ref = e0.total.abs();
    let mut termination = Termination::Completed;
    'targets: for &target in &targets {
        loop {
            let remaining = (target - state.time) * direction;
            if remaining <= 1e-12 * dt_max {
                break;
            }
            let landing = remaining <= dt_max * (1.0 + 1e-9);
            let dt = if landing { remaining } else { dt_max } * direction;
            let amp = stepper.step(&mut op, grid, &mut state, dt);
            steps += 1;
            if landing {
                state.time = target;
            }
            let finite = state
                .value
                .iter()
                .chain(&state.velocity)
                .all(|x| x.is_finite());
            let mut blown = !finite || amp > options.blowup_amplitude;
            if !blown && (landing || steps % 16 == 0) && energy_ref > 0.0 {
                let e = kind_energy(kind, &state, grid)?.total;
                blown = !e.is_finite() || e.abs() > options.energy_growth * energy_ref;
            }
            if blown {
                termination = Termination::BlowupDetected { time: state.time };
                if finite {
                    rec.s_push(&state)?;
                    let e = kind_energy(kind, &state, grid)?;
                    diagnostics.push(rec.row(&state, e)?);
                    snapshots.push(state.clone());
                }
                break 'targets;
            }
            rec.s_push(&state)?;
        }
        let e = kind_energy(kind, &state, grid)?;
        diagnostics.push(rec.row(&state, e)?);
        snapshots.push(state.clone());
    }
    Ok(finish(snapshots, diagnostics, termination, steps))
}

struct Rk4 {
    k_val: [Vec<f64>; 4],
    k_vel: [Vec<f64>; 4],
    val: Vec<f64>,
    vel: Vec<f64>,
}

impl Rk4 {
    fn new(len: usize) -> Self {
        let z = || vec![0.0; len];
        Self {
            k_val: [z(), z(), z(), z()],
            k_vel: [z(), z(), z(), z()],
            val: z(),
            vel: z(),
        }
    }

    /// Advances in place; returns the largest 5d amplitude seen in the stages.
    fn step(&mut self, op: &mut Operator, grid: &RadialGrid, state: &mut FieldState, dt: f64) -> f64 {
        let three_d = op.is_3d();
        let mut amp: f64 = 0.0;
        let coef = [0.0, 0.5, 0.5, 1.0];
        for stage in 0..4 {
            if stage == 0 {
                self.val.copy_from_slice(&state.value);
                self.vel.copy_from_slice(&state.velocity);
            } else {
                let c = coef[stage] * dt;
                let (pv, pw) = (&self.k_val[stage - 1], &self.k_vel[stage - 1]);
                for j in 0..self.val.len() {
                    self.val[j] = state.value[j] + c * pv[j];
                    self.vel[j] = state.velocity[j] + c * pw[j];
                }
            }
            self.k_val[stage].copy_from_slice(&self.vel);
            if three_d {
                self.k_val[stage][0] = 0.0;
            }
            let (val, vel) = (&self.val, &self.vel);
            amp = amp.max(op.accel(grid, val, vel, &mut self.k_vel[stage]));
        }
        let w = dt / 6.0;
        for j in 0..state.value.len() {
            state.value[j] += w
                * (self.k_val[0][j] + 2.0 * self.k_val[1][j] + 2.0 * self.k_val[2][j] + self.k_val[3][j]);
            state.velocity[j] += w
                * (self.k_vel[0][j] + 2.0 * self.k_vel[1][j] + 2.0 * self.k_vel[2][j] + self.k_vel[3][j]);
        }
        state.time += dt;
        amp
    }
}

/// `max_r G(ψ) − 𝓔` bound along a trajectory of a 3d kind.
pub fn trajectory_pointwise_bound(
    traj: &Trajectory,
    grid: &RadialGrid,
    relative_slack: f64,
) -> Result<Vec<model::PointwiseBound>> {
    traj.snapshots
        .iter()
        .map(|s| {
            let psi = to_psi3d(s, grid)?;
            let e = model::energy(&psi, grid)?.total;
            Ok(model::PointwiseBound::evaluate(
                &psi.value,
                e,
                relative_slack * e.abs(),
            ))
        })
        .collect()
}
