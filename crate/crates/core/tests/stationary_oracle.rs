//! Inward profiles checked against a separate fixed-order integrator.

use anlab::stationary::{
    extend_inward, picard_tail, OriginClass, DEFAULT_ABORT, DEFAULT_S0, DEFAULT_TAIL_SPAN,
    DEFAULT_TOL,
};

type State = [f64; 2];

/// `φ_ss = −φ_s + sin 2φ + e^{−2s}(φ − sin φ cos φ)(1 − cos 2φ)`, written
/// directly from the trigonometric form.
fn field(s: f64, y: State) -> State {
    let p = y[0];
    let quintic = (-2.0 * s).exp() * (p - p.sin() * p.cos()) * (1.0 - (2.0 * p).cos());
    [y[1], -y[1] + (2.0 * p).sin() + quintic]
}

fn rk4(s: f64, y: State, h: f64) -> State {
    let k1 = field(s, y);
    let k2 = field(s + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
    let k3 = field(s + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
    let k4 = field(s + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Classical RK4 with step doubling and Richardson extrapolation, landing
/// exactly on each target (targets decreasing in s).
fn step_doubling(s0: f64, y0: State, targets: &[f64], tol: f64) -> Vec<f64> {
    let (mut s, mut y) = (s0, y0);
    let mut h: f64 = -1e-3;
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        while s > t {
            let hh = if s + h < t { t - s } else { h };
            let full = rk4(s, y, hh);
            let half = rk4(s + hh / 2.0, rk4(s, y, hh / 2.0), hh / 2.0);
            let err = (0..2)
                .map(|i| (full[i] - half[i]).abs() / half[i].abs().max(1e-3))
                .fold(0.0, f64::max);
            if err <= tol {
                s += hh;
                y = [
                    half[0] + (half[0] - full[0]) / 15.0,
                    half[1] + (half[1] - full[1]) / 15.0,
                ];
                if hh == h {
                    h *= (0.9 * (tol / err.max(1e-300)).powf(0.2)).min(2.0);
                }
            } else {
                h *= (0.9 * (tol / err).powf(0.2)).max(0.1);
            }
        }
        out.push(y[0]);
    }
    out
}

#[test]
fn two_integrators_agree() {
    for &alpha in &[0.5, -0.5, 1.0, -1.0] {
        let tail = picard_tail(alpha, DEFAULT_S0, DEFAULT_S0 + DEFAULT_TAIL_SPAN, DEFAULT_TOL).unwrap();
        let p = extend_inward(&tail, 0.05, DEFAULT_ABORT).unwrap();
        assert!(p.r_min() <= 0.05 + 1e-12 || p.origin_class == OriginClass::BlowsUp);
        let idx: Vec<usize> = (0..=p.exit_index).rev().step_by(101).chain([0]).collect();
        let targets: Vec<f64> = idx.iter().map(|&i| p.r[i].ln()).collect();
        let oracle = step_doubling(tail.s0, [tail.phi(0), tail.phi_s(0)], &targets, 1e-12);
        for (k, &i) in idx.iter().enumerate() {
            let rel = (oracle[k] - p.phi[i]).abs() / p.phi[i].abs();
            assert!(rel <= 1e-8, "alpha = {alpha}, r = {}: {rel}", p.r[i]);
        }
    }
}
