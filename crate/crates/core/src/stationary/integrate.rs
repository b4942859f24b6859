//! Inward continuation of the tail by the Dormand–Prince 5(4) pair.

use super::{OriginClass, StationaryProfile, TailSolution};
use crate::error::{invalid, Error, Result};
use crate::model::z2;

const RTOL: f64 = 1e-10;
const ATOL: f64 = 1e-14;
/// Largest step in s.
const MAX_STEP: f64 = 1e-3;
/// Largest change of φ allowed in one step, through `|h φ_s|`.
const MAX_PHI_CHANGE: f64 = 1e-2;
const MIN_STEP: f64 = 1e-14;
const MAX_STEPS: usize = 50_000_000;

/// `φ_ss` from the s-form of the stationary equation,
/// `φ_ss = −φ_s + sin 2φ + e^{−2s}(φ − sin φ cos φ)(1 − cos 2φ)`.
pub fn phi_acceleration(s: f64, phi: f64, phi_s: f64) -> f64 {
    // (φ − sin φ cos φ)(1 − cos 2φ) = Z2(φ) φ⁵, free of cancellation near 0
    let p2 = phi * phi;
    -phi_s + (2.0 * phi).sin() + (-2.0 * s).exp() * z2(phi) * p2 * p2 * phi
}

type State = [f64; 2];

fn field(s: f64, y: State) -> State {
    [y[1], phi_acceleration(s, y[0], y[1])]
}

fn axpy(y: State, h: f64, terms: &[(f64, State)]) -> State {
    let mut out = y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// One Dormand–Prince step; returns the fifth-order solution and the
/// embedded error estimate.
fn dopri_step(s: f64, y: State, h: f64) -> (State, State) {
    let k1 = field(s, y);
    let k2 = field(s + h / 5.0, axpy(y, h, &[(1.0 / 5.0, k1)]));
    let k3 = field(
        s + 3.0 * h / 10.0,
        axpy(y, h, &[(3.0 / 40.0, k1), (9.0 / 40.0, k2)]),
    );
    let k4 = field(
        s + 4.0 * h / 5.0,
        axpy(y, h, &[(44.0 / 45.0, k1), (-56.0 / 15.0, k2), (32.0 / 9.0, k3)]),
    );
    let k5 = field(
        s + 8.0 * h / 9.0,
        axpy(
            y,
            h,
            &[
                (19372.0 / 6561.0, k1),
                (-25360.0 / 2187.0, k2),
                (64448.0 / 6561.0, k3),
                (-212.0 / 729.0, k4),
            ],
        ),
    );
    let k6 = field(
        s + h,
        axpy(
            y,
            h,
            &[
                (9017.0 / 3168.0, k1),
                (-355.0 / 33.0, k2),
                (46732.0 / 5247.0, k3),
                (49.0 / 176.0, k4),
                (-5103.0 / 18656.0, k5),
            ],
        ),
    );
    let y5 = axpy(
        y,
        h,
        &[
            (35.0 / 384.0, k1),
            (500.0 / 1113.0, k3),
            (125.0 / 192.0, k4),
            (-2187.0 / 6784.0, k5),
            (11.0 / 84.0, k6),
        ],
    );
    let k7 = field(s + h, y5);
    // difference between the fifth- and fourth-order weights
    let e = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let ks = [k1, k2, k3, k4, k5, k6, k7];
    let mut err = [0.0; 2];
    for (c, k) in e.iter().zip(&ks) {
        err[0] += h * c * k[0];
        err[1] += h * c * k[1];
    }
    (y5, err)
}

fn error_norm(y: State, y_new: State, err: State) -> f64 {
    let mut acc = 0.0;
    for i in 0..2 {
        let sc = ATOL + RTOL * y[i].abs().max(y_new[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / 2.0).sqrt()
}

fn step_cap(y: State) -> f64 {
    if y[1] == 0.0 {
        MAX_STEP
    } else {
        MAX_STEP.min(MAX_PHI_CHANGE / y[1].abs())
    }
}

/// Integrates from `s0 = tail.s0` down to `log r_min`, recording every
/// accepted step. The returned profile holds the inward samples followed by
/// the tail samples, ordered by increasing r.
pub fn extend_inward(tail: &TailSolution, r_min: f64, abort_threshold: f64) -> Result<StationaryProfile> {
    if tail.is_empty() {
        return Err(invalid("empty tail"));
    }
    if !(r_min > 0.0 && r_min.is_finite()) {
        return Err(invalid(format!("r_min must be positive, got {r_min}")));
    }
    if !(abort_threshold > 0.0) {
        return Err(invalid("abort threshold must be positive"));
    }
    let s_end = r_min.ln();
    if s_end >= tail.s0 {
        return Err(invalid(format!(
            "r_min = {r_min} is not below the tail start r = {}",
            tail.s0.exp()
        )));
    }
    let mut s = tail.s0;
    let mut y: State = [tail.phi(0), tail.phi_s(0)];
    let mut inward: Vec<(f64, State)> = vec![(s, y)];
    let mut h = -step_cap(y);
    let mut aborted = false;
    let mut failure = None;
    for _ in 0..MAX_STEPS {
        if s <= s_end {
            break;
        }
        h = -h.abs().min(step_cap(y));
        let last = s + h <= s_end;
        if last {
            h = s_end - s;
        }
        let (y_new, err) = dopri_step(s, y, h);
        let norm = error_norm(y, y_new, err);
        if !norm.is_finite() || !y_new.iter().all(|v| v.is_finite()) {
            h *= 0.2;
        } else if norm <= 1.0 {
            s = if last { s_end } else { s + h };
            y = y_new;
            inward.push((s, y));
            if y[0].abs() > abort_threshold {
                aborted = true;
                break;
            }
            let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
        } else {
            h *= (0.9 * norm.powf(-0.2)).max(0.2);
        }
        if h.abs() < MIN_STEP && s > s_end {
            failure = Some(format!("step size underflow ({})", h.abs()));
            break;
        }
    }
    if failure.is_none() && !aborted && s > s_end {
        failure = Some("step budget exhausted".to_string());
    }
    let profile = assemble(tail, &inward, aborted);
    match failure {
        Some(reason) => Err(Error::IntegrationFailure {
            s,
            reason,
            partial: Some(Box::new(profile)),
        }),
        None => Ok(profile),
    }
}

fn assemble(tail: &TailSolution, inward: &[(f64, State)], aborted: bool) -> StationaryProfile {
    let total = inward.len() + tail.len() - 1;
    let mut r = Vec::with_capacity(total);
    let mut phi = Vec::with_capacity(total);
    let mut dphi_dr = Vec::with_capacity(total);
    for &(s, y) in inward.iter().rev() {
        let x = s.exp();
        r.push(x);
        phi.push(y[0]);
        dphi_dr.push(y[1] / x);
    }
    let exit_index = r.len() - 1;
    for k in 1..tail.len() {
        let x = tail.s(k).exp();
        r.push(x);
        phi.push(tail.phi(k));
        dphi_dr.push(tail.phi_s(k) / x);
    }
    let mut profile = StationaryProfile {
        alpha: tail.alpha,
        r,
        phi,
        dphi_dr,
        exit_index,
        aborted,
        origin_class: OriginClass::Nonvanishing,
    };
    profile.origin_class = super::origin_classifier(&profile);
    profile
}
