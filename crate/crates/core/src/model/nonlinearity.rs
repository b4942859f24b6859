//! Closed-form nonlinearities of the azimuth-angle and 5d equations.
//!
//! `Z1(ρ) = (sin 2ρ − 2ρ)/ρ³` and `Z2(ρ) = (ρ − sin ρ cos ρ)(1 − cos 2ρ)/ρ⁵`
//! both have removable singularities at the origin. Both are built from the
//! single helper `(sin x − x)/x³`, which switches to its Taylor series for
//! `|x| < 1`; there the series has converged to machine precision and the
//! closed form has lost at most a couple of digits to cancellation.

use crate::error::{invalid, Result};

/// Below this |x| the sine defect is evaluated by its Taylor series.
const SERIES_RADIUS: f64 = 1.0;

/// Taylor coefficients of `(sin x − x)/x³` in powers of x², through x²⁰.
const DEFECT_COEFFS: [f64; 11] = defect_coeffs();

const fn defect_coeffs() -> [f64; 11] {
    let mut c = [0.0; 11];
    // coefficient of x^{2k−2} is (−1)^k/(2k+1)!
    let mut fact = 6.0;
    let mut k = 1;
    while k <= 11 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        c[k - 1] = sign / fact;
        fact *= ((2 * k + 2) * (2 * k + 3)) as f64;
        k += 1;
    }
    c
}

/// `(sin x − x)/x³`, even, equal to −1/6 at the origin.
#[inline]
pub fn sine_defect(x: f64) -> f64 {
    if x.abs() < SERIES_RADIUS {
        let y = x * x;
        DEFECT_COEFFS.iter().rev().fold(0.0, |acc, &c| acc * y + c)
    } else {
        (x.sin() - x) / (x * x * x)
    }
}

/// `sin x / x` with the value 1 at the origin.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// `Z1(ρ) = (sin 2ρ − 2ρ)/ρ³`; `Z1(0) = −4/3`.
#[inline]
pub fn z1(rho: f64) -> f64 {
    8.0 * sine_defect(2.0 * rho)
}

/// `Z2(ρ) = (ρ − sin ρ cos ρ)(1 − cos 2ρ)/ρ⁵`; `Z2(0) = 4/3`.
///
/// Uses `ρ − sin ρ cos ρ = −Z1(ρ) ρ³ / 2` and `1 − cos 2ρ = 2 sin² ρ`.
#[inline]
pub fn z2(rho: f64) -> f64 {
    let s = sinc(rho);
    -z1(rho) * s * s
}

/// `G(ρ) = (ρ² − sin² ρ)/2`, the primitive of `θ − sin θ cos θ`.
pub fn g_primitive(rho: f64) -> f64 {
    // ρ² − sin²ρ = −(sin ρ − ρ)(sin ρ + ρ) = −D(ρ) ρ⁴ (1 + sinc ρ)
    -0.5 * sine_defect(rho) * rho.powi(4) * (1.0 + sinc(rho))
}

/// Zeroth-order term of the azimuth-angle equation,
/// `sin(2ψ)/r² + (ψ − sin ψ cos ψ)(1 − cos 2ψ)/r⁴`.
pub fn force_psi(r: f64, psi: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid(format!("force_psi needs r > 0, got {r}")));
    }
    let r2 = r * r;
    Ok((2.0 * psi).sin() / r2
        + (psi - psi.sin() * psi.cos()) * (1.0 - (2.0 * psi).cos()) / (r2 * r2))
}

/// Nonlinearity of the 5d equation, `Z1(ru) u³ + Z2(ru) u⁵`.
#[inline]
pub fn force_u(r: f64, u: f64) -> f64 {
    let rho = r * u;
    let u2 = u * u;
    let u3 = u2 * u;
    z1(rho) * u3 + z2(rho) * u3 * u2
}

/// `(ψ − sin ψ cos ψ)² / (2 r²)`, the quintic energy density (weight r² already
/// divided out), with the limit 0 at `r = 0` for data vanishing at the origin.
pub fn quintic_density(r: f64, psi: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    // ψ − sin ψ cos ψ = −Z1(ψ) ψ³ / 2
    let d = -0.5 * z1(psi) * psi.powi(3);
    d * d / (2.0 * r * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn values_at_origin() {
        assert!((z1(0.0) + 4.0 / 3.0).abs() < 1e-15);
        assert!((z2(0.0) - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(g_primitive(0.0), 0.0);
    }

    #[test]
    fn closed_form_values() {
        assert!((z1(PI / 2.0) + 8.0 / (PI * PI)).abs() < 1e-14);
        assert!((z2(PI / 2.0) - 32.0 / PI.powi(4)).abs() < 1e-14);
        assert!((g_primitive(PI) - PI * PI / 2.0).abs() < 1e-13);
        assert!((g_primitive(-PI) - PI * PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn large_argument_magnitude() {
        assert!(z1(1e6).abs() <= 3e-12);
        assert!(z2(1e6).abs() <= 3e-24);
    }

    #[test]
    fn z2_near_origin() {
        // 40-digit evaluation of 4/3 − Z2(0.01) from the closed form
        let oracle = 7.110_937_568_733_659e-5;
        let delta = 4.0 / 3.0 - z2(0.01);
        assert!(delta > 0.0 && delta < 1e-3);
        assert!((delta - oracle).abs() < 1e-15, "{delta}");
    }

    #[test]
    fn branches_agree_at_switch() {
        // Series and closed form evaluated on either side of |x| = 1.
        for x in [0.999_999, 1.0, 1.000_001, -1.0] {
            let closed = (f64::sin(x) - x) / (x * x * x);
            assert!((sine_defect(x) - closed).abs() < 1e-13, "x = {x}");
        }
        let below = sine_defect(1.0 - 1e-12);
        let above = sine_defect(1.0 + 1e-12);
        assert!((below - above).abs() < 1e-13);
    }

    #[test]
    fn force_psi_examples() {
        assert!(force_psi(1.0, PI).unwrap().abs() < 1e-14);
        assert!((force_psi(1.0, PI / 2.0).unwrap() - PI).abs() < 1e-14);
        assert!(force_psi(0.0, 1.0).is_err());
        assert!(force_psi(-1.0, 1.0).is_err());
    }

    #[test]
    fn force_u_at_origin() {
        for u in [0.3f64, -1.2, 2.0] {
            let expected = -4.0 / 3.0 * u * u * u + 4.0 / 3.0 * u.powi(5);
            assert!((force_u(0.0, u) - expected).abs() < 1e-13);
        }
        assert_eq!(force_u(3.7, 0.0), 0.0);
    }

    #[test]
    fn g_is_positive_away_from_zero() {
        for k in 1..200 {
            let rho = k as f64 * 0.05;
            assert!(g_primitive(rho) > 0.0);
            assert_eq!(g_primitive(rho), g_primitive(-rho));
        }
    }

    #[test]
    fn z_bounds_are_uniform() {
        // log-spaced sweep ρ ∈ [1e-8, 1e8]
        let mut c1: f64 = 0.0;
        let mut c2: f64 = 0.0;
        for k in 0..=1600 {
            let rho = 10f64.powf(-8.0 + k as f64 * 0.01);
            let bracket = 1.0 + rho * rho;
            c1 = c1.max(z1(rho).abs() * bracket);
            c2 = c2.max(z2(rho).abs() * bracket * bracket);
        }
        assert!(c1.is_finite() && c1 < 3.0, "C1 = {c1}");
        assert!(c2.is_finite() && c2 < 5.0, "C2 = {c2}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn parity(rho in -50.0f64..50.0, r in 0.0f64..50.0, u in -5.0f64..5.0) {
                prop_assert_eq!(z1(rho), z1(-rho));
                prop_assert_eq!(z2(rho), z2(-rho));
                prop_assert_eq!(g_primitive(rho), g_primitive(-rho));
                prop_assert_eq!(force_u(r, -u), -force_u(r, u));
            }

            #[test]
            fn cross_formulation_identity(r in 1e-3f64..50.0, u in -5.0f64..5.0) {
                let lhs = force_psi(r, r * u).unwrap();
                let linear = 2.0 * u / r;
                let nonlinear = r * force_u(r, u);
                // relative to the size of the summands, which may cancel
                let scale = linear.abs().max(nonlinear.abs()).max(lhs.abs());
                prop_assert!((lhs - linear - nonlinear).abs() <= 1e-11 * scale, "{} vs {}", lhs, linear + nonlinear);
            }
        }
    }
}
