//! Uniform radial mesh with weighted trapezoid quadrature and second-order
//! finite-difference stencils.
//!
//! Nodes are `r_j = j * dr` for `j = 0..=n_points`, so every sample vector
//! has `n_points + 1` entries and the first node sits exactly at the origin.

use crate::error::{invalid, Result};

/// Smallest mesh accepted by [`RadialGrid::new`].
pub const MIN_POINTS: usize = 16;

/// Reflection symmetry of a radial profile through the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    n_points: usize,
    dr: f64,
    r_max: f64,
}

impl RadialGrid {
    pub fn new(r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(invalid(format!("r_max must be positive, got {r_max}")));
        }
        if n_points < MIN_POINTS {
            return Err(invalid(format!(
                "n_points must be at least {MIN_POINTS}, got {n_points}"
            )));
        }
        Ok(Self {
            n_points,
            dr: r_max / n_points as f64,
            r_max,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Number of samples, `n_points + 1`.
    pub fn len(&self) -> usize {
        self.n_points + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    #[inline]
    pub fn r(&self, j: usize) -> f64 {
        if j == self.n_points {
            self.r_max
        } else {
            j as f64 * self.dr
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.len()).map(move |j| self.r(j))
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes().map(f).collect()
    }

    pub(crate) fn check_len(&self, samples: &[f64]) -> Result<()> {
        if samples.len() != self.len() {
            return Err(invalid(format!(
                "expected {} samples, got {}",
                self.len(),
                samples.len()
            )));
        }
        Ok(())
    }

    /// Trapezoid approximation of `∫_0^{r_max} f(r) r^p dr`.
    pub fn integrate_weighted(&self, samples: &[f64], p: i32) -> Result<f64> {
        self.check_len(samples)?;
        if !matches!(p, 0 | 2 | 4) {
            return Err(invalid(format!("weight exponent must be 0, 2 or 4, got {p}")));
        }
        Ok(self.trapezoid_unchecked(samples, p))
    }

    pub(crate) fn trapezoid_unchecked(&self, samples: &[f64], p: i32) -> f64 {
        let n = self.n_points;
        let mut sum = 0.0;
        for (j, &f) in samples.iter().enumerate() {
            let w = if j == 0 || j == n { 0.5 } else { 1.0 };
            sum += w * f * self.r(j).powi(p);
        }
        sum * self.dr
    }

    /// Trapezoid integral of already-weighted `integrand` over `[a, r_max]`.
    /// The integrand is interpolated linearly inside the cell containing `a`.
    pub fn integrate_from(&self, integrand: &[f64], a: f64) -> Result<f64> {
        self.check_len(integrand)?;
        if !(a >= 0.0 && a < self.r_max) {
            return Err(invalid(format!(
                "lower limit {a} must lie in [0, r_max = {})",
                self.r_max
            )));
        }
        Ok(self.integrate_from_unchecked(integrand, a))
    }

    pub(crate) fn integrate_from_unchecked(&self, integrand: &[f64], a: f64) -> f64 {
        let n = self.n_points;
        let k = ((a / self.dr).floor() as usize).min(n - 1);
        let theta = (a - self.r(k)) / self.dr;
        let f_a = (1.0 - theta) * integrand[k] + theta * integrand[k + 1];
        let mut sum = 0.5 * (f_a + integrand[k + 1]) * (self.r(k + 1) - a);
        for j in (k + 1)..n {
            sum += 0.5 * (integrand[j] + integrand[j + 1]) * self.dr;
        }
        sum
    }

    /// Linear interpolation of node samples at radius `r`, clamped to the mesh.
    pub fn interpolate(&self, samples: &[f64], r: f64) -> f64 {
        if r <= 0.0 {
            return samples[0];
        }
        if r >= self.r_max {
            return samples[self.n_points];
        }
        let k = ((r / self.dr).floor() as usize).min(self.n_points - 1);
        let theta = (r - self.r(k)) / self.dr;
        (1.0 - theta) * samples[k] + theta * samples[k + 1]
    }

    /// First derivative: central differences inside, one-sided second order
    /// at both ends.
    pub fn d_dr(&self, samples: &[f64]) -> Result<Vec<f64>> {
        self.check_len(samples)?;
        let mut out = vec![0.0; self.len()];
        self.d_dr_into(samples, &mut out);
        Ok(out)
    }

    pub(crate) fn d_dr_into(&self, f: &[f64], out: &mut [f64]) {
        let n = self.n_points;
        let h2 = 2.0 * self.dr;
        out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / h2;
        for j in 1..n {
            out[j] = (f[j + 1] - f[j - 1]) / h2;
        }
        out[n] = (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) / h2;
    }

    /// Second derivative: central differences inside, four-point one-sided
    /// second-order stencils at both ends.
    pub fn d2_dr2(&self, samples: &[f64]) -> Result<Vec<f64>> {
        self.check_len(samples)?;
        let f = samples;
        let n = self.n_points;
        let h2 = self.dr * self.dr;
        let mut out = vec![0.0; self.len()];
        out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
        for j in 1..n {
            out[j] = (f[j + 1] - 2.0 * f[j] + f[j - 1]) / h2;
        }
        out[n] = (2.0 * f[n] - 5.0 * f[n - 1] + 4.0 * f[n - 2] - f[n - 3]) / h2;
        Ok(out)
    }

    /// Fourth-order central first derivative. Near the origin the ghost
    /// values come from the reflection `f(−r) = ±f(r)` given by `parity`;
    /// the last two nodes fall back to the second-order stencils.
    pub fn d_dr_fourth(&self, samples: &[f64], parity: Parity) -> Result<Vec<f64>> {
        self.check_len(samples)?;
        let f = samples;
        let n = self.n_points;
        let sign = match parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        };
        let at = |j: isize| -> f64 {
            if j < 0 {
                sign * f[(-j) as usize]
            } else {
                f[j as usize]
            }
        };
        let h12 = 12.0 * self.dr;
        let mut out = vec![0.0; self.len()];
        for j in 0..n - 1 {
            let i = j as isize;
            out[j] = (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / h12;
        }
        out[n - 1] = (f[n] - f[n - 2]) / (2.0 * self.dr);
        out[n] = (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) / (2.0 * self.dr);
        Ok(out)
    }

    /// 5d radial Laplacian `u_rr + (4/r) u_r`. The origin uses the even
    /// extension limit `10 (u_1 − u_0)/dr²`; the outer node uses one-sided
    /// stencils.
    pub fn laplacian_5d(&self, samples: &[f64]) -> Result<Vec<f64>> {
        self.check_len(samples)?;
        let mut out = vec![0.0; self.len()];
        self.laplacian_5d_into(samples, &mut out);
        Ok(out)
    }

    pub(crate) fn laplacian_5d_into(&self, u: &[f64], out: &mut [f64]) {
        let n = self.n_points;
        let h = self.dr;
        let h2 = h * h;
        out[0] = 10.0 * (u[1] - u[0]) / h2;
        for j in 1..n {
            let d2 = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / h2;
            let d1 = (u[j + 1] - u[j - 1]) / (2.0 * h);
            out[j] = d2 + 4.0 * d1 / (j as f64 * h);
        }
        let d2 = (2.0 * u[n] - 5.0 * u[n - 1] + 4.0 * u[n - 2] - u[n - 3]) / h2;
        let d1 = (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * h);
        out[n] = d2 + 4.0 * d1 / self.r_max;
    }
}
