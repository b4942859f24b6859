//! The one-parameter family φ_α of stationary solutions.
//!
//! With `s = log r` and `g = e^{s/2} φ` the stationary equation becomes
//! `g'' − (9/4) g = N(s, g)`. The decaying solution with `g ≈ α e^{−3s/2}`
//! is built on a tail `[s0, s_max]` by successive approximation of the
//! variation-of-constants integral equation, then continued toward the
//! origin by an adaptive Runge–Kutta integration of the equation for φ(s).

mod diagnostics;
mod integrate;

pub use diagnostics::{
    fornberg_weights, ode_residual, origin_classifier, pohozaev_report, PohozaevReport,
};
pub use integrate::{extend_inward, phi_acceleration};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{z1, z2};

pub const DEFAULT_S0: f64 = 3.0;
pub const DEFAULT_TAIL_SPAN: f64 = 12.0;
pub const DEFAULT_TOL: f64 = 1e-14;
pub const DEFAULT_ABORT: f64 = 1e3;
/// Target spacing of the tail mesh in s.
const TAIL_DS: f64 = 1e-3;
const MAX_S0_INCREASES: usize = 5;
const MAX_ITERATIONS: usize = 200;

/// Decaying fundamental solution `e^{−3s/2}`.
#[inline]
pub fn f1(s: f64) -> f64 {
    (-1.5 * s).exp()
}

/// Growing fundamental solution `e^{3s/2}`.
#[inline]
pub fn f2(s: f64) -> f64 {
    (1.5 * s).exp()
}

/// `N1 + N2 = e^{s/2} Z1(x) x³ + e^{−3s/2} Z2(x) x⁵` with `x = e^{−s/2} g`.
pub fn tail_nonlinearity(s: f64, g: f64) -> f64 {
    let x = (-0.5 * s).exp() * g;
    let x3 = x * x * x;
    (0.5 * s).exp() * z1(x) * x3 + (-1.5 * s).exp() * z2(x) * x3 * x * x
}

/// Picard fixed point on the tail.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailSolution {
    pub alpha: f64,
    pub s0: f64,
    pub s_max: f64,
    pub ds: f64,
    /// `g_α` on the uniform mesh `s0 + k·ds`.
    pub g: Vec<f64>,
    /// `g_α'` on the same mesh.
    pub dg: Vec<f64>,
    /// `g_α − α e^{−3s/2}`, kept separately to avoid cancellation.
    pub correction: Vec<f64>,
    pub iterations: usize,
    /// Sup-norm change of the last iterate.
    pub residual: f64,
    /// Sup-norm changes of all iterates, in order.
    pub differences: Vec<f64>,
}

impl TailSolution {
    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn s(&self, k: usize) -> f64 {
        if k + 1 == self.g.len() {
            self.s_max
        } else {
            self.s0 + k as f64 * self.ds
        }
    }

    /// `φ(s) = e^{−s/2} g(s)`.
    pub fn phi(&self, k: usize) -> f64 {
        (-0.5 * self.s(k)).exp() * self.g[k]
    }

    /// `φ_s = e^{−s/2}(g' − g/2)`.
    pub fn phi_s(&self, k: usize) -> f64 {
        (-0.5 * self.s(k)).exp() * (self.dg[k] - 0.5 * self.g[k])
    }

    /// Least-squares slope of `log|r² φ − α|` against `log r` over
    /// `[s0, s0 + window]`; `None` when the correction vanishes.
    pub fn tail_fit_slope(&self, window: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = (0..self.len())
            .map(|k| (self.s(k), (1.5 * self.s(k)).exp() * self.correction[k]))
            .take_while(|(s, _)| *s <= self.s0 + window)
            .filter(|(_, c)| *c != 0.0)
            .map(|(s, c)| (s, c.abs().ln()))
            .collect();
        least_squares_slope(&pts)
    }
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

struct TailMesh {
    s: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
}

impl TailMesh {
    fn new(s0: f64, s_max: f64) -> (Self, f64) {
        let m = ((s_max - s0) / TAIL_DS).ceil().max(1.0) as usize;
        let ds = (s_max - s0) / m as f64;
        let s: Vec<f64> = (0..=m)
            .map(|k| if k == m { s_max } else { s0 + k as f64 * ds })
            .collect();
        let mesh = Self {
            f1: s.iter().map(|&x| f1(x)).collect(),
            f2: s.iter().map(|&x| f2(x)).collect(),
            s,
        };
        (mesh, ds)
    }

    /// One application of the integral map to `g`; returns `(G, g')` where
    /// `G` is the correction `(1/3)[f1 I2 − f2 I1]`.
    fn apply(&self, alpha: f64, g: &[f64], ds: f64) -> (Vec<f64>, Vec<f64>) {
        let m = self.s.len() - 1;
        let nl: Vec<f64> = self
            .s
            .iter()
            .zip(g)
            .map(|(&s, &x)| tail_nonlinearity(s, x))
            .collect();
        // I_k(s) = ∫_s^{s_max} f_k N, cumulative trapezoid from the right
        let mut i1 = vec![0.0; m + 1];
        let mut i2 = vec![0.0; m + 1];
        for k in (0..m).rev() {
            i1[k] = i1[k + 1] + 0.5 * ds * (self.f1[k] * nl[k] + self.f1[k + 1] * nl[k + 1]);
            i2[k] = i2[k + 1] + 0.5 * ds * (self.f2[k] * nl[k] + self.f2[k + 1] * nl[k + 1]);
        }
        let corr: Vec<f64> = (0..=m)
            .map(|k| (self.f1[k] * i2[k] - self.f2[k] * i1[k]) / 3.0)
            .collect();
        let dg: Vec<f64> = (0..=m)
            .map(|k| -1.5 * alpha * self.f1[k] - 0.5 * (self.f1[k] * i2[k] + self.f2[k] * i1[k]))
            .collect();
        (corr, dg)
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Successive approximation of `g = α f1 + (1/3)[f1 I2 − f2 I1]` on
/// `[s0, s_max]`, starting from `α f1`. When the first two differences do
/// not contract by 1/2, `s0` and `s_max` are shifted right by one, at most
/// five times.
pub fn picard_tail(alpha: f64, s0: f64, s_max: f64, tol: f64) -> Result<TailSolution> {
    if !(alpha.is_finite() && s0.is_finite() && s_max > s0 && tol > 0.0) {
        return Err(invalid(format!(
            "picard_tail needs finite alpha, s_max > s0 and tol > 0 (alpha = {alpha}, s0 = {s0}, s_max = {s_max}, tol = {tol})"
        )));
    }
    let span = s_max - s0;
    let mut last_ratio = f64::NAN;
    for shift in 0..=MAX_S0_INCREASES {
        let start = s0 + shift as f64;
        match picard_at(alpha, start, start + span, tol) {
            Ok(tail) => return Ok(tail),
            Err(ratio) => last_ratio = ratio,
        }
    }
    Err(Error::NoConvergence {
        s0: s0 + MAX_S0_INCREASES as f64,
        ratio: last_ratio,
    })
}

/// Inner loop for a fixed `s0`; `Err(ratio)` signals non-contraction.
fn picard_at(alpha: f64, s0: f64, s_max: f64, tol: f64) -> std::result::Result<TailSolution, f64> {
    let (mesh, ds) = TailMesh::new(s0, s_max);
    let base: Vec<f64> = mesh.f1.iter().map(|f| alpha * f).collect();
    let mut g = base.clone();
    let mut differences = Vec::new();
    for it in 1..=MAX_ITERATIONS {
        let (corr, dg) = mesh.apply(alpha, &g, ds);
        let next: Vec<f64> = base.iter().zip(&corr).map(|(b, x)| b + x).collect();
        let diff = sup_diff(&next, &g);
        if !diff.is_finite() {
            return Err(f64::INFINITY);
        }
        differences.push(diff);
        g = next;
        if differences.len() == 2 && differences[0] > 0.0 {
            let ratio = differences[1] / differences[0];
            if ratio > 0.5 {
                return Err(ratio);
            }
        }
        if diff <= tol {
            return Ok(TailSolution {
                alpha,
                s0,
                s_max,
                ds,
                g,
                dg,
                correction: corr,
                iterations: it,
                residual: diff,
                differences,
            });
        }
    }
    // stagnated above tol: report the last contraction ratio
    let k = differences.len();
    Err(differences[k - 1] / differences[k - 2])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OriginClass {
    Vanishes,
    Nonvanishing,
    BlowsUp,
}

impl OriginClass {
    pub fn name(self) -> &'static str {
        match self {
            OriginClass::Vanishes => "vanishes",
            OriginClass::Nonvanishing => "nonvanishing",
            OriginClass::BlowsUp => "blows_up",
        }
    }
}

/// Samples of φ_α in r, ordered by increasing r. Indices `0..=exit_index`
/// come from the inward integration, the rest from the Picard tail.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationaryProfile {
    pub alpha: f64,
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi_dr: Vec<f64>,
    /// Index of `r_exit = e^{s0}`, where the inward integration starts.
    pub exit_index: usize,
    /// True when the integration stopped because `|φ|` crossed the threshold.
    pub aborted: bool,
    pub origin_class: OriginClass,
}

impl StationaryProfile {
    pub fn r_exit(&self) -> f64 {
        self.r[self.exit_index]
    }

    pub fn r_min(&self) -> f64 {
        self.r[0]
    }

    pub fn phi_at_rmin(&self) -> f64 {
        self.phi[0]
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Copy of the profile with φ negated, the expected profile for −α.
    pub fn negated(&self) -> Self {
        Self {
            alpha: -self.alpha,
            phi: self.phi.iter().map(|x| -x).collect(),
            dphi_dr: self.dphi_dr.iter().map(|x| -x).collect(),
            ..self.clone()
        }
    }
}

/// Inner radius used by sweeps.
pub const DEFAULT_R_MIN: f64 = 0.05;
/// Width in s of the window used for the tail-fit slope.
pub const TAIL_FIT_WINDOW: f64 = 6.0;

/// Tail plus inward continuation with the default tail parameters.
pub fn stationary_profile(alpha: f64, r_min: f64, abort_threshold: f64) -> Result<StationaryProfile> {
    let tail = picard_tail(alpha, DEFAULT_S0, DEFAULT_S0 + DEFAULT_TAIL_SPAN, DEFAULT_TOL)?;
    extend_inward(&tail, r_min, abort_threshold)
}

/// Per-α summary of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub origin_class: OriginClass,
    pub tail_fit_slope: Option<f64>,
    pub ode_residual: f64,
    pub phi_at_rmin: f64,
}

/// Builds the profile for one α and summarises it.
pub fn sweep_entry(alpha: f64, r_min: f64, abort_threshold: f64) -> Result<(SweepRow, StationaryProfile)> {
    let tail = picard_tail(alpha, DEFAULT_S0, DEFAULT_S0 + DEFAULT_TAIL_SPAN, DEFAULT_TOL)?;
    let profile = extend_inward(&tail, r_min, abort_threshold)?;
    let row = SweepRow {
        alpha,
        origin_class: profile.origin_class,
        tail_fit_slope: tail.tail_fit_slope(TAIL_FIT_WINDOW),
        ode_residual: ode_residual(&profile),
        phi_at_rmin: profile.phi_at_rmin(),
    };
    Ok((row, profile))
}
