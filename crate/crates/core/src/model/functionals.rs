use serde::{Deserialize, Serialize};

use super::nonlinearity::quintic_density;
use super::{FieldState, Formulation};
use crate::error::{invalid, Result};
use crate::grid::{Parity, RadialGrid};

/// Components of a conserved energy. `total` is their sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub kinetic: f64,
    pub gradient: f64,
    pub sine_potential: f64,
    pub quintic_potential: f64,
    pub total: f64,
}

impl EnergyReport {
    pub fn new(kinetic: f64, gradient: f64, sine_potential: f64, quintic_potential: f64) -> Self {
        Self {
            kinetic,
            gradient,
            sine_potential,
            quintic_potential,
            total: kinetic + gradient + sine_potential + quintic_potential,
        }
    }
}

/// Energy of the azimuth-angle equation,
/// `∫ [½(ψ_t² + ψ_r²) + sin²ψ/r² + (ψ − sinψ cosψ)²/(2r⁴)] r² dr`.
///
/// ψ_r uses the fourth-order stencil: every integrand is even in r, so the
/// trapezoid sum is already high order and the derivative dominates the
/// error when a pulse focuses at the origin.
pub fn energy(state: &FieldState, grid: &RadialGrid) -> Result<EnergyReport> {
    state.require(Formulation::Psi3d, grid)?;
    let psi = &state.value;
    let psi_r = grid.d_dr_fourth(psi, Parity::Odd)?;
    let half_sq = |v: &[f64]| v.iter().map(|x| 0.5 * x * x).collect::<Vec<_>>();
    let kinetic = grid.trapezoid_unchecked(&half_sq(&state.velocity), 2);
    let gradient = grid.trapezoid_unchecked(&half_sq(&psi_r), 2);
    let sine: Vec<f64> = psi.iter().map(|p| p.sin().powi(2)).collect();
    let quintic: Vec<f64> = grid
        .nodes()
        .zip(psi)
        .map(|(r, &p)| quintic_density(r, p))
        .collect();
    Ok(EnergyReport::new(
        kinetic,
        gradient,
        grid.trapezoid_unchecked(&sine, 0),
        grid.trapezoid_unchecked(&quintic, 0),
    ))
}

/// Square roots of the two halves of the 𝓗 = (Ḣ²×Ḣ¹) ∩ (Ḣ¹×L²) norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HNormParts {
    /// `‖(u, u_t)‖_{Ḣ¹×L²}`
    pub energy: f64,
    /// `‖(u, u_t)‖_{Ḣ²×Ḣ¹}` with `Δ₅u` standing in for the Ḣ² seminorm.
    pub critical: f64,
}

impl HNormParts {
    pub fn total(&self) -> f64 {
        self.energy + self.critical
    }
}

pub fn h_norm_parts(state: &FieldState, grid: &RadialGrid) -> Result<HNormParts> {
    state.require(Formulation::U5d, grid)?;
    let u_r = grid.d_dr(&state.value)?;
    let lap = grid.laplacian_5d(&state.value)?;
    let ut_r = grid.d_dr(&state.velocity)?;
    let low: Vec<f64> = u_r
        .iter()
        .zip(&state.velocity)
        .map(|(a, b)| a * a + b * b)
        .collect();
    let high: Vec<f64> = lap.iter().zip(&ut_r).map(|(a, b)| a * a + b * b).collect();
    Ok(HNormParts {
        energy: grid.trapezoid_unchecked(&low, 4).sqrt(),
        critical: grid.trapezoid_unchecked(&high, 4).sqrt(),
    })
}

pub fn h_norm(state: &FieldState, grid: &RadialGrid) -> Result<f64> {
    Ok(h_norm_parts(state, grid)?.total())
}

/// `∫_a^{r_max} (u_t² + u_r²) r⁴ dr`.
pub fn exterior_energy(state: &FieldState, grid: &RadialGrid, a: f64) -> Result<f64> {
    state.require(Formulation::U5d, grid)?;
    if !(a >= 0.0 && a < grid.r_max()) {
        return Err(invalid(format!(
            "exterior radius {a} must lie in [0, r_max = {})",
            grid.r_max()
        )));
    }
    let u_r = grid.d_dr(&state.value)?;
    let integrand: Vec<f64> = grid
        .nodes()
        .zip(u_r.iter().zip(&state.velocity))
        .map(|(r, (a, b))| (a * a + b * b) * r.powi(4))
        .collect();
    Ok(grid.integrate_from_unchecked(&integrand, a))
}

const S_EXPONENT: f64 = 30.0 / 7.0;

/// `|x|^p` through exp/log, with 0 mapped to 0.
fn abs_pow(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (p * x.abs().ln()).exp()
    }
}

/// Spatial part of the Strichartz norm,
/// `‖u‖_{L^{30/7}} + ‖u_r‖_{L^{30/7}}` with radial weight r⁴.
pub fn s_norm_increment(state: &FieldState, grid: &RadialGrid) -> Result<f64> {
    state.require(Formulation::U5d, grid)?;
    let u_r = grid.d_dr(&state.value)?;
    let lp = |v: &[f64]| {
        let powered: Vec<f64> = v.iter().map(|&x| abs_pow(x, S_EXPONENT)).collect();
        abs_pow(grid.trapezoid_unchecked(&powered, 4), 1.0 / S_EXPONENT)
    };
    Ok(lp(&state.value) + lp(&u_r))
}

/// Running `L³` in time of [`s_norm_increment`], by the trapezoid rule.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SAccumulator {
    integral: f64,
    last: Option<(f64, f64)>,
}

impl SAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: f64, increment: f64) {
        let cube = increment.powi(3);
        if let Some((t0, c0)) = self.last {
            self.integral += 0.5 * (c0 + cube) * (t - t0).abs();
        }
        self.last = Some((t, cube));
    }

    pub fn value(&self) -> f64 {
        self.integral.cbrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Adaptive Simpson quadrature used as an independent oracle.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
    }

    #[test]
    fn zero_state_has_zero_functionals() {
        let g = RadialGrid::new(5.0, 64).unwrap();
        let psi = FieldState::zero(Formulation::Psi3d, &g, 0.0);
        assert_eq!(energy(&psi, &g).unwrap(), EnergyReport::default());
        let u = FieldState::zero(Formulation::U5d, &g, 0.0);
        assert_eq!(h_norm(&u, &g).unwrap(), 0.0);
        assert_eq!(s_norm_increment(&u, &g).unwrap(), 0.0);
        assert_eq!(exterior_energy(&u, &g, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn energy_of_degree_one_profile() {
        let g = RadialGrid::new(20.0, 40_000).unwrap();
        let psi =
            FieldState::from_fn(Formulation::Psi3d, &g, 0.0, |r| 2.0 * r.atan(), |_| 0.0).unwrap();
        let e = energy(&psi, &g).unwrap();
        let density = |r: f64| {
            let p = 2.0 * r.atan();
            let pr = 2.0 / (1.0 + r * r);
            let q = if r == 0.0 {
                0.0
            } else {
                (p - p.sin() * p.cos()).powi(2) / (2.0 * r * r)
            };
            0.5 * pr * pr * r * r + p.sin().powi(2) + q
        };
        let oracle = simpson(&density, 0.0, 20.0, 1e-12);
        assert!(((e.total - oracle) / oracle).abs() < 1e-6, "{} vs {oracle}", e.total);
        assert_eq!(e.total, e.kinetic + e.gradient + e.sine_potential + e.quintic_potential);
    }

    #[test]
    fn kinetic_energy_closed_form() {
        let g = RadialGrid::new(8.0, 4000).unwrap();
        let psi =
            FieldState::from_fn(Formulation::Psi3d, &g, 0.0, |_| 0.0, |r| r * (-r * r).exp()).unwrap();
        let e = energy(&psi, &g).unwrap();
        // ½ ∫ r⁴ e^{−2r²} dr = ½ · 3√π / (8 · 2^{5/2})
        let exact = 0.5 * 3.0 * PI.sqrt() / (8.0 * 2f64.powf(2.5));
        assert!((e.kinetic - exact).abs() < 1e-8);
        assert_eq!(e.gradient, 0.0);
    }

    #[test]
    fn h_norm_of_gaussian() {
        let g = RadialGrid::new(8.0, 8000).unwrap();
        let u = FieldState::from_fn(Formulation::U5d, &g, 0.0, |r| (-r * r).exp(), |_| 0.0).unwrap();
        let low = simpson(&|r: f64| (2.0 * r * (-r * r).exp()).powi(2) * r.powi(4), 0.0, 8.0, 1e-13);
        // Δ₅ e^{−r²} = (4r² − 10) e^{−r²}
        let high = simpson(
            &|r: f64| ((4.0 * r * r - 10.0) * (-r * r).exp()).powi(2) * r.powi(4),
            0.0,
            8.0,
            1e-13,
        );
        let oracle = low.sqrt() + high.sqrt();
        let got = h_norm(&u, &g).unwrap();
        assert!(((got - oracle) / oracle).abs() < 1e-6, "{got} vs {oracle}");
    }

    #[test]
    fn s_norm_of_gaussian() {
        let g = RadialGrid::new(8.0, 8000).unwrap();
        let u = FieldState::from_fn(Formulation::U5d, &g, 0.0, |r| (-r * r).exp(), |_| 0.0).unwrap();
        let p = 30.0 / 7.0;
        let a = simpson(&|r: f64| (-r * r).exp().powf(p) * r.powi(4), 0.0, 8.0, 1e-14);
        let b = simpson(&|r: f64| (2.0 * r * (-r * r).exp()).powf(p) * r.powi(4), 0.0, 8.0, 1e-14);
        let oracle = a.powf(1.0 / p) + b.powf(1.0 / p);
        let got = s_norm_increment(&u, &g).unwrap();
        assert!(((got - oracle) / oracle).abs() < 1e-6, "{got} vs {oracle}");
    }

    #[test]
    fn accumulator_on_constant_state() {
        let mut acc = SAccumulator::new();
        let s = 0.7;
        for k in 0..=50 {
            acc.push(k as f64 * 0.1, s);
        }
        assert!((acc.value() - 5f64.cbrt() * s).abs() < 1e-12);
    }

    #[test]
    fn exterior_energy_cases() {
        let g = RadialGrid::new(200.0, 200_000).unwrap();
        let tail = FieldState::from_fn(
            Formulation::U5d,
            &g,
            0.0,
            |r| if r > 0.0 { r.powi(-3) } else { 0.0 },
            |_| 0.0,
        )
        .unwrap();
        let e = exterior_energy(&tail, &g, 1.0).unwrap();
        assert!((e - 3.0).abs() < 1e-3, "{e}");

        let g = RadialGrid::new(10.0, 1000).unwrap();
        let bump = FieldState::from_fn(
            Formulation::U5d,
            &g,
            0.0,
            |r| if r < 2.0 { (2.0 - r).powi(3) } else { 0.0 },
            |r| if r < 2.0 { 2.0 - r } else { 0.0 },
        )
        .unwrap();
        assert_eq!(exterior_energy(&bump, &g, 3.0).unwrap(), 0.0);
        let full = exterior_energy(&bump, &g, 0.0).unwrap();
        let parts = h_norm_parts(&bump, &g).unwrap();
        assert!((full - parts.energy.powi(2)).abs() < 1e-12 * full);
        assert!(exterior_energy(&bump, &g, 10.0).is_err());
        let psi = FieldState::zero(Formulation::Psi3d, &g, 0.0);
        assert!(exterior_energy(&psi, &g, 1.0).is_err());
    }

    #[test]
    fn critical_part_is_scale_invariant() {
        let g = RadialGrid::new(40.0, 16_000).unwrap();
        let lam: f64 = 0.5;
        let base = FieldState::from_fn(Formulation::U5d, &g, 0.0, |r| (-r * r).exp(), |_| 0.0).unwrap();
        let scaled = FieldState::from_fn(
            Formulation::U5d,
            &g,
            0.0,
            |r| lam.powf(-0.5) * (-(r / lam).powi(2)).exp(),
            |_| 0.0,
        )
        .unwrap();
        let a = h_norm_parts(&base, &g).unwrap();
        let b = h_norm_parts(&scaled, &g).unwrap();
        assert!(((b.critical - a.critical) / a.critical).abs() < 1e-3);
        assert!((b.energy / a.energy - lam).abs() < 1e-2 * lam);
    }
}
