//! Residual checks and the origin classifier for stored profiles.

use serde::Serialize;

use super::{least_squares_slope, OriginClass, StationaryProfile};
use crate::model::z2;

/// Finite-difference weights for derivatives `0..=m` at `x0` from the
/// nodes `xs` (Fornberg's recursion). `w[d][j]` multiplies `f(xs[j])`.
pub fn fornberg_weights(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut w = vec![vec![0.0; n]; m + 1];
    w[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    w[k][i] = c1 * (k as f64 * w[k - 1][i - 1] - c5 * w[k][i - 1]) / c2;
                }
                w[0][i] = -c1 * c5 * w[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                w[k][j] = (c4 * w[k][j] - k as f64 * w[k - 1][j]) / c3;
            }
            w[0][j] = c4 * w[0][j] / c3;
        }
        c1 = c2;
    }
    w
}

/// Five-point window around `i`, shifted inward near the ends.
fn window(i: usize, n: usize) -> std::ops::Range<usize> {
    let lo = i.saturating_sub(2).min(n - 5);
    lo..lo + 5
}

/// First and second s-derivatives of `values` at node `i`, with `s = log r`.
fn s_derivatives(s: &[f64], values: &[f64], i: usize) -> (f64, f64) {
    let win = window(i, s.len());
    let w = fornberg_weights(s[i], &s[win.clone()], 2);
    let d1 = win.clone().enumerate().map(|(j, k)| w[1][j] * values[k]).sum();
    let d2 = win.enumerate().map(|(j, k)| w[2][j] * values[k]).sum();
    (d1, d2)
}

fn log_radii(profile: &StationaryProfile) -> Vec<f64> {
    profile.r.iter().map(|r| r.ln()).collect()
}

/// Maximum over the interior samples of two scaled residuals: the equation
/// `φ_ss + φ_s − sin 2φ − e^{−2s}(φ − sin φ cos φ)(1 − cos 2φ)` divided by one
/// plus the sum of the magnitudes of its terms, and the mismatch between the
/// stored `φ_s = r φ_r` and the five-point difference of the φ samples,
/// divided by `1 + |φ_s|`. Differences are taken in `s = log r`; `φ_ss` is the
/// difference of the stored `φ_s`. In the radial variable the equation
/// residual is `r²(φ_rr + 2φ_r/r − RHS)`.
pub fn ode_residual(profile: &StationaryProfile) -> f64 {
    let n = profile.len();
    if n < 5 {
        return 0.0;
    }
    let s = log_radii(profile);
    let phi_s: Vec<f64> = profile.r.iter().zip(&profile.dphi_dr).map(|(r, d)| r * d).collect();
    let mut worst: f64 = 0.0;
    for i in 2..n - 2 {
        let d1 = s_derivatives(&s, &profile.phi, i).0;
        let d2 = s_derivatives(&s, &phi_s, i).0;
        let p = profile.phi[i];
        let sine = (2.0 * p).sin();
        let quintic = (-2.0 * s[i]).exp() * z2(p) * p.powi(5);
        let eq = (d2 + phi_s[i] - sine - quintic).abs();
        let scale = 1.0 + d2.abs() + phi_s[i].abs() + sine.abs() + quintic.abs();
        let consistency = (d1 - phi_s[i]).abs() / (1.0 + phi_s[i].abs());
        worst = worst.max(eq / scale).max(consistency);
    }
    worst
}

/// `Φ = r⁴φ_r² − 2r² sin²φ − (φ − sin φ cos φ)²`, written with `r φ_r = φ_s`,
/// together with the sum of the magnitudes of its three terms.
fn big_phi(r: f64, phi: f64, dphi_dr: f64) -> (f64, f64) {
    let rp = r * dphi_dr;
    let sp = phi.sin();
    let defect = phi - sp * phi.cos();
    let (a, b, c) = (r * r * rp * rp, 2.0 * r * r * sp * sp, defect * defect);
    (a - b - c, a + b + c)
}

/// Relative slack for the monotonicity check, matched to the integrator
/// tolerance.
const MONOTONE_SLACK: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PohozaevReport {
    /// `max |Φ_r + 4r sin²φ|` over the interior samples.
    pub identity_residual: f64,
    /// The same residual divided by `1 + (r⁴φ_r² + 2r² sin²φ + (φ − sin φ cos φ)²)/r`.
    pub scaled_residual: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    /// `Φ(r_exit)`.
    pub phi_exit: f64,
    /// `4∫_{r_exit}^∞ ρ sin²φ dρ`, which equals `Φ(r_exit)` when `Φ → 0`.
    pub exterior_integral: f64,
    /// True when Φ never increases along r by more than `1e−8` times the
    /// size of its terms.
    pub monotone: bool,
    /// Least-squares slope of `log|Φ|` against `log r` along the tail; `None`
    /// when Φ vanishes there.
    pub decay_slope: Option<f64>,
}

/// Checks `Φ′(r) = −4r sin²φ` on the stored samples and the consistency of
/// `Φ(r_exit)` with the integral of `4ρ sin²φ` beyond it.
pub fn pohozaev_report(profile: &StationaryProfile) -> PohozaevReport {
    let n = profile.len();
    let (values, sizes): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|i| big_phi(profile.r[i], profile.phi[i], profile.dphi_dr[i]))
        .unzip();
    let s = log_radii(profile);
    let mut identity: f64 = 0.0;
    let mut scaled: f64 = 0.0;
    if n >= 5 {
        for i in 2..n - 2 {
            let r = profile.r[i];
            let sp = profile.phi[i].sin();
            let d_phi_dr = s_derivatives(&s, &values, i).0 / r;
            let res = (d_phi_dr + 4.0 * r * sp * sp).abs();
            identity = identity.max(res);
            scaled = scaled.max(res / (1.0 + sizes[i] / r));
        }
    }
    let phi_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let phi_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let monotone = (0..n.saturating_sub(1))
        .all(|i| values[i + 1] <= values[i] + MONOTONE_SLACK * (1.0 + sizes[i]));

    let e = profile.exit_index;
    let density = |i: usize| {
        let sp = profile.phi[i].sin();
        4.0 * profile.r[i] * sp * sp
    };
    let mut exterior: f64 = (e..n - 1)
        .map(|i| 0.5 * (profile.r[i + 1] - profile.r[i]) * (density(i) + density(i + 1)))
        .sum();
    // beyond the last sample sin²φ ≈ α² r⁻⁴
    let r_end = profile.r[n - 1];
    exterior += 2.0 * profile.alpha * profile.alpha / (r_end * r_end);

    let tail: Vec<(f64, f64)> = (e..n)
        .filter(|&i| values[i] != 0.0)
        .map(|i| (s[i], values[i].abs().ln()))
        .collect();
    PohozaevReport {
        identity_residual: identity,
        scaled_residual: scaled,
        phi_min,
        phi_max,
        phi_exit: values[e],
        exterior_integral: exterior,
        monotone,
        decay_slope: least_squares_slope(&tail),
    }
}

/// `blows_up` when the integration was aborted; `vanishes` when
/// `|φ(r_min)| ≤ 10·r_min·max|φ′|` with φ′ finite; `nonvanishing` otherwise.
pub fn origin_classifier(profile: &StationaryProfile) -> OriginClass {
    if profile.aborted {
        return OriginClass::BlowsUp;
    }
    let max_d = profile.dphi_dr.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if max_d.is_finite() && profile.phi[0].abs() <= 10.0 * profile.r[0] * max_d {
        OriginClass::Vanishes
    } else {
        OriginClass::Nonvanishing
    }
}
