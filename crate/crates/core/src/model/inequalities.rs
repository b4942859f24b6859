use serde::Serialize;

use super::functionals::energy;
use super::nonlinearity::g_primitive;
use super::FieldState;
use crate::error::Result;
use crate::grid::RadialGrid;

/// Outcome of the check `max_r G(ψ(r)) ≤ 𝓔(ψ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointwiseBound {
    pub max_g: f64,
    pub energy: f64,
    /// `max_g − energy`; nonpositive when the bound holds exactly.
    pub excess: f64,
    pub slack: f64,
    pub passed: bool,
}

/// Compares the largest node value of `G(ψ)` with the total energy, allowing
/// an absolute `slack` for discretization error.
pub fn pointwise_bound_check(
    state: &FieldState,
    grid: &RadialGrid,
    slack: f64,
) -> Result<PointwiseBound> {
    let e = energy(state, grid)?.total;
    Ok(PointwiseBound::evaluate(&state.value, e, slack))
}

impl PointwiseBound {
    /// Compares `max G(ψ)` over the given samples against a known energy.
    pub fn evaluate(psi: &[f64], energy: f64, slack: f64) -> Self {
        let max_g = psi.iter().map(|&p| g_primitive(p)).fold(0.0, f64::max);
        let excess = max_g - energy;
        Self {
            max_g,
            energy,
            excess,
            slack,
            passed: excess <= slack,
        }
    }
}

/// Left side, right side and their quotient for a functional inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl RatioReport {
    fn new(lhs: f64, rhs: f64) -> Self {
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        Self { lhs, rhs, ratio }
    }
}

fn h1_norm_5d(samples: &[f64], grid: &RadialGrid) -> Result<f64> {
    let f_r = grid.d_dr(samples)?;
    let sq: Vec<f64> = f_r.iter().map(|x| x * x).collect();
    Ok(grid.trapezoid_unchecked(&sq, 4).sqrt())
}

/// `‖f/r‖_{L²(ℝ⁵)} / ‖f‖_{Ḣ¹(ℝ⁵)}` for a radial profile. The sharp
/// constant is 2/3.
pub fn hardy_check(samples: &[f64], grid: &RadialGrid) -> Result<RatioReport> {
    let rhs = h1_norm_5d(samples, grid)?;
    let sq: Vec<f64> = samples.iter().map(|x| x * x).collect();
    let lhs = grid.trapezoid_unchecked(&sq, 2).sqrt();
    Ok(RatioReport::new(lhs, rhs))
}

/// `sup_r r^{3/2}|f(r)| / ‖f‖_{Ḣ¹(ℝ⁵)}` for a radial profile. The sharp
/// constant is 1/√3.
pub fn strauss_check(samples: &[f64], grid: &RadialGrid) -> Result<RatioReport> {
    let rhs = h1_norm_5d(samples, grid)?;
    let lhs = grid
        .nodes()
        .zip(samples)
        .map(|(r, f)| r.powf(1.5) * f.abs())
        .fold(0.0, f64::max);
    Ok(RatioReport::new(lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Formulation;

    #[test]
    fn zero_state_passes() {
        let g = RadialGrid::new(5.0, 100).unwrap();
        let z = FieldState::zero(Formulation::Psi3d, &g, 0.0);
        let rep = pointwise_bound_check(&z, &g, 0.0).unwrap();
        assert_eq!(rep.max_g, 0.0);
        assert!(rep.passed);
    }

    #[test]
    fn large_constant_fails() {
        // A continuum state with ψ ≡ 10 always carries energy above G(10);
        // the violation has to be synthesized by pairing it with a tiny energy.
        let psi = vec![10.0; 64];
        let rep = PointwiseBound::evaluate(&psi, 1e-3, 1e-6);
        assert!(!rep.passed);
        assert!(rep.excess > 49.0);
    }

    #[test]
    fn bound_holds_for_smooth_profile() {
        let g = RadialGrid::new(30.0, 6000).unwrap();
        let s = FieldState::from_fn(
            Formulation::Psi3d,
            &g,
            0.0,
            |r| 2.0 * r * (-(r - 2.0).powi(2)).exp(),
            |r| r * (-r * r).exp(),
        )
        .unwrap();
        let rep = pointwise_bound_check(&s, &g, 0.0).unwrap();
        assert!(rep.passed && rep.max_g > 0.0);
    }

    #[test]
    fn ratios_for_gaussian() {
        let g = RadialGrid::new(10.0, 4000).unwrap();
        let f = g.sample(|r| (-r * r).exp());
        let s = strauss_check(&f, &g).unwrap();
        assert!(s.ratio > 0.0 && s.ratio <= 1.0 / 3f64.sqrt());
        let h = hardy_check(&f, &g).unwrap();
        assert!(h.ratio > 0.0 && h.ratio <= 2.0 / 3.0);
        // ∫ e^{−2r²} r² = √(π/2)/8, ∫ 4r² e^{−2r²} r⁴ = 15√(π/2)/32
        let expected = (1.0f64 / 8.0 / (15.0 / 32.0)).sqrt();
        assert!((h.ratio - expected).abs() < 1e-5);
    }

    #[test]
    fn zero_profile_ratio_is_zero() {
        let g = RadialGrid::new(10.0, 100).unwrap();
        let f = vec![0.0; g.len()];
        assert_eq!(hardy_check(&f, &g).unwrap().ratio, 0.0);
        assert_eq!(strauss_check(&f, &g).unwrap().ratio, 0.0);
    }
}
