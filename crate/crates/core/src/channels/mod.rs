//! Exterior-energy diagnostics for 5d radial data: the projections onto the
//! plane `P(a) = {(c₁r⁻³, c₂r⁻³)}` in `Ḣ¹×L²(r > a)`, free-wave channel
//! measurements, the projection inequality along trajectories and the
//! spatial decay profiles `v₀`, `v₁`.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::evolve::{evolve, EquationKind, EvolveOptions, Termination, Trajectory};
use crate::grid::RadialGrid;
use crate::model::{FieldState, Formulation};
use crate::stationary::least_squares_slope;

/// Exterior inner products on `r ≥ a`: trapezoid on `[a, r_max]` (the
/// integrand interpolated linearly at `a`) plus the contribution of the
/// Newton-tail continuation `f(r_max)(r_max/r)³` beyond the grid.
struct Exterior<'g> {
    grid: &'g RadialGrid,
    a: f64,
}

impl Exterior<'_> {
    /// `∫ f_r h_r r⁴` from derivative samples `df`, `dh` and values `f`, `h`.
    fn h1(&self, df: &[f64], dh: &[f64], f: &[f64], h: &[f64]) -> f64 {
        let g = self.grid;
        let integrand: Vec<f64> = g
            .nodes()
            .zip(df.iter().zip(dh))
            .map(|(r, (x, y))| x * y * r.powi(4))
            .collect();
        let n = g.n_points();
        let rm = g.r_max();
        g.integrate_from_unchecked(&integrand, self.a) + 3.0 * f[n] * h[n] * rm.powi(3)
    }

    /// `∫ f h r⁴`.
    fn l2(&self, f: &[f64], h: &[f64]) -> f64 {
        let g = self.grid;
        let integrand: Vec<f64> = g
            .nodes()
            .zip(f.iter().zip(h))
            .map(|(r, (x, y))| x * y * r.powi(4))
            .collect();
        let n = g.n_points();
        g.integrate_from_unchecked(&integrand, self.a) + f[n] * h[n] * g.r_max().powi(5)
    }
}

/// `r⁻³` on the nodes, with the origin sample copied from the first node.
fn newton_samples(grid: &RadialGrid) -> Vec<f64> {
    let mut q = grid.sample(|r| if r > 0.0 { r.powi(-3) } else { 0.0 });
    q[0] = q[1];
    q
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExteriorProjection {
    pub a: f64,
    /// `π_a(f, g) = (c₁ r⁻³, c₂ r⁻³)` on `r > a`.
    pub c1: f64,
    pub c2: f64,
    pub norm_pi_sq: f64,
    pub norm_perp_sq: f64,
    /// `‖(f, g)‖²_{Ḣ¹×L²(r > a)}` with the same quadrature.
    pub exterior_norm_sq: f64,
    /// `3a³f(a)² + a(∫_a^∞ ρ g dρ)²` from the interpolated `f(a)` and the
    /// trapezoid moment of g.
    pub closed_form_pi_sq: f64,
}

impl ExteriorProjection {
    /// The plane component `(c₁ r⁻³, c₂ r⁻³)` sampled on the grid.
    pub fn plane_part(&self, grid: &RadialGrid, time: f64) -> FieldState {
        let q = newton_samples(grid);
        FieldState {
            formulation: Formulation::U5d,
            value: q.iter().map(|x| self.c1 * x).collect(),
            velocity: q.iter().map(|x| self.c2 * x).collect(),
            time,
        }
    }
}

/// Orthogonal projection onto `P(a)` with respect to the discrete exterior
/// inner product, so that `norm_pi_sq + norm_perp_sq = exterior_norm_sq`
/// holds to rounding. The coefficients approximate `c₁ = a³f(a)` and
/// `c₂ = a∫_a^∞ ρ g dρ` to quadrature accuracy.
pub fn project(data: &FieldState, grid: &RadialGrid, a: f64) -> Result<ExteriorProjection> {
    data.require(Formulation::U5d, grid)?;
    if !(a > 0.0 && a < grid.r_max()) {
        return Err(invalid(format!(
            "projection radius {a} must lie in (0, r_max = {})",
            grid.r_max()
        )));
    }
    let ext = Exterior { grid, a };
    let (f, g) = (&data.value, &data.velocity);
    let q = newton_samples(grid);
    let df = grid.d_dr(f)?;
    let dq = grid.d_dr(&q)?;

    let qq_h = ext.h1(&dq, &dq, &q, &q);
    let qq_l = ext.l2(&q, &q);
    let c1 = ext.h1(&df, &dq, f, &q) / qq_h;
    let c2 = ext.l2(g, &q) / qq_l;
    let norm_pi_sq = c1 * c1 * qq_h + c2 * c2 * qq_l;
    let exterior_norm_sq = ext.h1(&df, &df, f, f) + ext.l2(g, g);
    let norm_perp_sq = (exterior_norm_sq - norm_pi_sq).max(0.0);

    let f_a = grid.interpolate(f, a);
    let rho_g: Vec<f64> = grid.nodes().zip(g).map(|(r, x)| r * x).collect();
    let n = grid.n_points();
    let moment = grid.integrate_from_unchecked(&rho_g, a) + g[n] * grid.r_max().powi(2);
    let closed_form_pi_sq = 3.0 * a.powi(3) * f_a * f_a + a * moment * moment;

    Ok(ExteriorProjection {
        a,
        c1,
        c2,
        norm_pi_sq,
        norm_perp_sq,
        exterior_norm_sq,
        closed_form_pi_sq,
    })
}

/// Number of sampling intervals per direction in [`channel_experiment`].
pub const CHANNEL_SAMPLES: usize = 50;
/// Relative tolerance of the plateau test.
pub const PLATEAU_TOLERANCE: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChannelRow {
    /// Elapsed time `|t − t₀|`.
    pub t: f64,
    pub ext_plus: f64,
    pub ext_minus: f64,
    pub perp_norm_sq: f64,
    /// `max(ext_plus, ext_minus)/perp_norm_sq`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChannelReport {
    pub a: f64,
    pub horizon: f64,
    pub projection: ExteriorProjection,
    pub rows: Vec<ChannelRow>,
    pub terminal_plus: f64,
    pub terminal_minus: f64,
    pub terminal_max: f64,
    /// `terminal_max / norm_perp_sq`.
    pub ratio: f64,
    /// `terminal_max` over the exterior energy on `r ≥ a` at the initial time.
    pub energy_ratio: f64,
    /// The larger side's terminal value is within 5% of its value at
    /// `0.8·horizon`.
    pub plateau: bool,
    pub forward_termination: Termination,
    pub backward_termination: Termination,
}

fn safe_ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

fn exterior_series(traj: &Trajectory) -> Vec<f64> {
    traj.diagnostics.iter().map(|d| d.exterior[0]).collect()
}

/// Evolves the free 5d wave from `data` to `t₀ ± horizon` and records the
/// energy on `r ≥ a + |t − t₀|` along both runs.
pub fn channel_experiment(
    data: &FieldState,
    grid: &RadialGrid,
    a: f64,
    horizon: f64,
    options: &EvolveOptions,
) -> Result<ChannelReport> {
    data.require(Formulation::U5d, grid)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    if !(a > 0.0 && a + horizon < grid.r_max()) {
        return Err(invalid(format!(
            "grid too small: need 0 < a and a + horizon < r_max (a = {a}, horizon = {horizon}, r_max = {})",
            grid.r_max()
        )));
    }
    let projection = project(data, grid, a)?;
    let t0 = data.time;
    let run = |sign: f64| {
        let opts = EvolveOptions {
            output_times: (1..CHANNEL_SAMPLES)
                .map(|k| t0 + sign * horizon * k as f64 / CHANNEL_SAMPLES as f64)
                .collect(),
            exterior_radii: vec![a],
            ..options.clone()
        };
        evolve(EquationKind::Free5d, data, grid, t0 + sign * horizon, &opts)
    };
    let forward = run(1.0)?;
    let backward = run(-1.0)?;
    let plus = exterior_series(&forward);
    let minus = exterior_series(&backward);
    let perp = projection.norm_perp_sq;
    let rows: Vec<ChannelRow> = plus
        .iter()
        .zip(&minus)
        .zip(&forward.diagnostics)
        .map(|((&p, &m), d)| ChannelRow {
            t: (d.time - t0).abs(),
            ext_plus: p,
            ext_minus: m,
            perp_norm_sq: perp,
            ratio: safe_ratio(p.max(m), perp),
        })
        .collect();
    let terminal_plus = *plus.last().expect("trajectory has a snapshot");
    let terminal_minus = *minus.last().expect("trajectory has a snapshot");
    let terminal_max = terminal_plus.max(terminal_minus);
    let side = if terminal_plus >= terminal_minus { &plus } else { &minus };
    let k80 = (0.8 * CHANNEL_SAMPLES as f64).round() as usize;
    let plateau = match side.get(k80) {
        Some(&v80) if side.len() == CHANNEL_SAMPLES + 1 => {
            let last = side[CHANNEL_SAMPLES];
            (last - v80).abs() <= PLATEAU_TOLERANCE * last.abs()
        }
        _ => false,
    };
    Ok(ChannelReport {
        a,
        horizon,
        rows,
        terminal_plus,
        terminal_minus,
        terminal_max,
        ratio: safe_ratio(terminal_max, perp),
        energy_ratio: safe_ratio(terminal_max, plus[0]),
        plateau,
        projection,
        forward_termination: forward.termination,
        backward_termination: backward.termination,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KeyInequalityRow {
    pub t: f64,
    #[serde(rename = "R")]
    pub r: f64,
    /// `‖π_R⊥ u(t)‖`.
    pub lhs: f64,
    /// `R⁻¹‖π_R u(t)‖³`.
    pub rhs: f64,
    pub ratio: f64,
}

/// Both sides of `‖π_R⊥ u(t)‖ ≲ R⁻¹‖π_R u(t)‖³` for every snapshot and
/// radius. This measures; it does not assert the inequality.
pub fn key_inequality_report(
    trajectory: &Trajectory,
    grid: &RadialGrid,
    radii: &[f64],
) -> Result<Vec<KeyInequalityRow>> {
    let mut rows = Vec::with_capacity(trajectory.snapshots.len() * radii.len());
    for u in trajectory.u_snapshots(grid)? {
        for &r in radii {
            let p = project(&u, grid, r)?;
            let lhs = p.norm_perp_sq.sqrt();
            let rhs = p.norm_pi_sq.sqrt().powi(3) / r;
            rows.push(KeyInequalityRow {
                t: u.time,
                r,
                lhs,
                rhs,
                ratio: safe_ratio(lhs, rhs),
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayDiagnostics {
    pub r: Vec<f64>,
    /// `r³ u₀(r)`.
    pub v0: Vec<f64>,
    /// `r ∫_r^{r_max} u₁(ρ) ρ dρ`; the integral beyond the grid is dropped.
    pub v1: Vec<f64>,
    /// Mean of `v₀` over the window.
    pub ell0: f64,
    /// Exponent p in `v₀ − ℓ₀ ≈ C r^p`, from the log-log slope of `|v₀′|`
    /// plus one; `None` when `v₀` is flat on the window.
    pub v0_slope: Option<f64>,
    /// Log-log slope of `|v₁|` over the window.
    pub v1_slope: Option<f64>,
    pub window: (f64, f64),
    /// Bound on the dropped part of `v₁` over the window, assuming
    /// `|u₁| ≤ |u₁(r_max)|(r_max/r)⁵` beyond the grid.
    pub v1_tail_bound: f64,
}

/// Flatness threshold for `v₀` relative to `max(1, |ℓ₀|)`.
const FLAT: f64 = 1e-12;

pub fn decay_diagnostics(data: &FieldState, grid: &RadialGrid, window: (f64, f64)) -> Result<DecayDiagnostics> {
    data.require(Formulation::U5d, grid)?;
    let (lo, hi) = window;
    if !(lo > 0.0 && lo < hi && hi <= grid.r_max()) {
        return Err(invalid(format!(
            "fit window ({lo}, {hi}) must satisfy 0 < r_lo < r_hi ≤ r_max = {}",
            grid.r_max()
        )));
    }
    let r: Vec<f64> = grid.nodes().collect();
    let inside: Vec<usize> = (0..r.len()).filter(|&j| r[j] >= lo && r[j] <= hi).collect();
    if inside.len() < 3 {
        return Err(invalid("fit window holds fewer than three nodes"));
    }
    let v0: Vec<f64> = r.iter().zip(&data.value).map(|(x, u)| x.powi(3) * u).collect();
    let n = grid.n_points();
    let mut moment = vec![0.0; n + 1];
    for j in (0..n).rev() {
        moment[j] = moment[j + 1]
            + 0.5 * grid.dr() * (data.velocity[j] * r[j] + data.velocity[j + 1] * r[j + 1]);
    }
    let v1: Vec<f64> = r.iter().zip(&moment).map(|(x, m)| x * m).collect();

    let ell0 = inside.iter().map(|&j| v0[j]).sum::<f64>() / inside.len() as f64;
    let spread = inside.iter().map(|&j| (v0[j] - ell0).abs()).fold(0.0, f64::max);
    let v0_slope = if spread <= FLAT * ell0.abs().max(1.0) {
        None
    } else {
        let dv0 = grid.d_dr(&v0)?;
        let pts: Vec<(f64, f64)> = inside
            .iter()
            .filter(|&&j| dv0[j] != 0.0)
            .map(|&j| (r[j].ln(), dv0[j].abs().ln()))
            .collect();
        least_squares_slope(&pts).map(|s| s + 1.0)
    };
    let pts: Vec<(f64, f64)> = inside
        .iter()
        .filter(|&&j| v1[j] != 0.0)
        .map(|&j| (r[j].ln(), v1[j].abs().ln()))
        .collect();
    let rm = grid.r_max();
    Ok(DecayDiagnostics {
        v1_tail_bound: hi * data.velocity[n].abs() * rm * rm / 3.0,
        r,
        v0,
        v1,
        ell0,
        v0_slope,
        v1_slope: least_squares_slope(&pts),
        window,
    })
}

#[cfg(test)]
mod tests;
