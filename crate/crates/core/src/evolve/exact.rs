//! Closed-form solutions used as oracles for the integrator.

use crate::error::{invalid, Result};

/// Self-similar wave map `ψ = 2 arctan(r/t)` and its time derivative.
pub fn turok_spergel(t: f64, r: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(invalid(format!("turok_spergel needs t > 0, got {t}")));
    }
    Ok((2.0 * (r / t).atan(), -2.0 * r / (t * t + r * r)))
}

/// A smooth scalar profile with derivatives of every order on demand.
pub trait Profile: Sync {
    /// `f^{(n)}(s)`.
    fn derivative(&self, n: usize, s: f64) -> f64;

    /// Length scale below which the closed-form 5d solution is replaced by
    /// its Taylor expansion in r.
    fn scale(&self) -> f64;

    fn value(&self, s: f64) -> f64 {
        self.derivative(0, s)
    }
}

/// `A exp(−((s − c)/w)²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianProfile {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl Profile for GaussianProfile {
    fn derivative(&self, n: usize, s: f64) -> f64 {
        // d^n/dx^n e^{−x²} = (−1)^n H_n(x) e^{−x²}
        let x = (s - self.center) / self.width;
        let (mut h0, mut h1) = (1.0, 2.0 * x);
        let hn = match n {
            0 => h0,
            _ => {
                for k in 1..n {
                    let next = 2.0 * x * h1 - 2.0 * k as f64 * h0;
                    h0 = h1;
                    h1 = next;
                }
                h1
            }
        };
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        self.amplitude * sign * hn * (-x * x).exp() / self.width.powi(n as i32)
    }

    fn scale(&self) -> f64 {
        self.width
    }
}

/// `A (1 − ((s − c)/w)²)^p` on `|s − c| < w`, zero outside; `C^{p−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialBump {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    /// Coefficients of `(1 − x²)^p` in powers of x.
    coeffs: Vec<f64>,
}

impl PolynomialBump {
    pub fn new(amplitude: f64, center: f64, width: f64, power: u32) -> Result<Self> {
        if !(width > 0.0) || power < 2 {
            return Err(invalid("bump needs width > 0 and power ≥ 2"));
        }
        let p = power as usize;
        let mut coeffs = vec![0.0; 2 * p + 1];
        let mut binom = 1.0;
        for j in 0..=p {
            coeffs[2 * j] = if j % 2 == 0 { binom } else { -binom };
            binom = binom * (p - j) as f64 / (j + 1) as f64;
        }
        Ok(Self {
            amplitude,
            center,
            width,
            coeffs,
        })
    }
}

impl Profile for PolynomialBump {
    fn derivative(&self, n: usize, s: f64) -> f64 {
        let x = (s - self.center) / self.width;
        if x.abs() >= 1.0 || n >= self.coeffs.len() {
            return 0.0;
        }
        // n-th derivative of Σ c_k x^k, Horner from the top
        let mut acc = 0.0;
        for k in (n..self.coeffs.len()).rev() {
            let falling: f64 = ((k - n + 1)..=k).map(|i| i as f64).product();
            acc = acc * x + self.coeffs[k] * falling;
        }
        self.amplitude * acc / self.width.powi(n as i32)
    }

    fn scale(&self) -> f64 {
        self.width
    }
}

/// Radius, relative to the profile scale, below which the series is used.
const SERIES_CUTOFF: f64 = 0.05;
/// Highest odd derivative kept in the small-r series.
const SERIES_ORDER: usize = 15;

/// 5d radial free wave built from a 1d profile by dimensional descent:
/// `u = r⁻¹ ∂_r [(f(t − r) − f(t + r))/r]`. Returns `(u, u_t)`.
pub fn exact_free5d(profile: &dyn Profile, t: f64, r: f64) -> (f64, f64) {
    (descent(profile, 0, t, r), descent(profile, 1, t, r))
}

/// The descent operator applied to `f^{(m)}`.
fn descent(profile: &dyn Profile, m: usize, t: f64, r: f64) -> f64 {
    let r = r.abs();
    if r < SERIES_CUTOFF * profile.scale() {
        // −2 Σ_{k odd ≥ 3} (k − 1) r^{k−3} f^{(k)}(t)/k!
        let mut sum = 0.0;
        let mut fact = 6.0;
        let mut rp = 1.0;
        let mut k = 3;
        while k <= SERIES_ORDER {
            sum += (k - 1) as f64 * rp * profile.derivative(k + m, t) / fact;
            fact *= ((k + 1) * (k + 2)) as f64;
            rp *= r * r;
            k += 2;
        }
        -2.0 * sum
    } else {
        let f = |n: usize, s: f64| profile.derivative(n + m, s);
        -(f(1, t - r) + f(1, t + r)) / (r * r) - (f(0, t - r) - f(0, t + r)) / (r * r * r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn turok_spergel_values() {
        let (p, pt) = turok_spergel(1.0, 1.0).unwrap();
        assert!((p - PI / 2.0).abs() < 1e-15);
        assert!((pt + 1.0).abs() < 1e-15);
        assert_eq!(turok_spergel(0.7, 0.0).unwrap(), (0.0, 0.0));
        assert!(turok_spergel(0.0, 1.0).is_err());
        assert!(turok_spergel(-1.0, 1.0).is_err());
    }

    #[test]
    fn turok_spergel_solves_wave_map() {
        // Hand-derived derivatives of 2 arctan(r/t); sin 4θ written through tan θ.
        for &(t, r) in &[(0.3f64, 0.1f64), (1.0, 2.5), (2.0, 7.0), (0.05, 3.0), (5.0, 0.01)] {
            let d = t * t + r * r;
            let psi_tt = 4.0 * r * t / (d * d);
            let psi_r = 2.0 * t / d;
            let psi_rr = -4.0 * r * t / (d * d);
            let x = r / t;
            let sin_2psi = 4.0 * x * (1.0 - x * x) / ((1.0 + x * x) * (1.0 + x * x));
            let res = psi_tt - psi_rr - 2.0 * psi_r / r + sin_2psi / (r * r);
            let scale = psi_rr.abs() + (2.0 * psi_r / r).abs() + (sin_2psi / (r * r)).abs();
            assert!(res.abs() < 1e-10 * scale.max(1.0), "({t}, {r}): {res}");
            let (p, pt) = turok_spergel(t, r).unwrap();
            assert!(((2.0 * p).sin() - sin_2psi).abs() < 1e-12);
            assert!((pt + 2.0 * r / d).abs() < 1e-15);
        }
    }

    #[test]
    fn hermite_derivatives_match_differences() {
        let g = GaussianProfile {
            amplitude: 1.3,
            center: 0.4,
            width: 0.8,
        };
        let h = 1e-4;
        for n in 0..6 {
            for &s in &[-1.0, 0.2, 0.9, 2.0] {
                let fd = (g.derivative(n, s + h) - g.derivative(n, s - h)) / (2.0 * h);
                let an = g.derivative(n + 1, s);
                assert!((fd - an).abs() < 1e-5 * (1.0 + an.abs()), "n = {n}, s = {s}");
            }
        }
    }

    #[test]
    fn bump_derivatives_match_differences() {
        let b = PolynomialBump::new(2.0, 1.0, 0.5, 8).unwrap();
        let h = 1e-5;
        for n in 0..5 {
            for &s in &[0.6, 0.9, 1.2, 1.45] {
                let fd = (b.derivative(n, s + h) - b.derivative(n, s - h)) / (2.0 * h);
                let an = b.derivative(n + 1, s);
                assert!((fd - an).abs() < 1e-4 * (1.0 + an.abs()), "n = {n}, s = {s}");
            }
        }
        assert_eq!(b.derivative(0, 1.6), 0.0);
        assert_eq!(b.derivative(0, 1.0), 2.0);
    }

    #[test]
    fn compact_profile_vanishes_outside_cone() {
        let b = PolynomialBump::new(1.0, 0.0, 1.0, 6).unwrap();
        // f supported in |s| < 1 so u(0, r) = 0 for r > 1
        for &r in &[1.01, 2.0, 5.0] {
            assert_eq!(exact_free5d(&b, 0.0, r), (0.0, 0.0));
        }
        // and at time t the support is r < 1 + |t|
        for &r in &[3.01, 4.0] {
            assert_eq!(exact_free5d(&b, 2.0, r), (0.0, 0.0));
        }
    }

    #[test]
    fn series_and_closed_form_agree() {
        let g = GaussianProfile {
            amplitude: 1.0,
            center: 0.0,
            width: 1.0,
        };
        for &t in &[-0.7, 0.0, 0.4, 1.5] {
            let r = SERIES_CUTOFF;
            let below = exact_free5d(&g, t, r * (1.0 - 1e-9));
            let above = exact_free5d(&g, t, r * (1.0 + 1e-9));
            assert!((below.0 - above.0).abs() < 1e-9, "t = {t}");
            assert!((below.1 - above.1).abs() < 1e-9, "t = {t}");
            // at the origin: −(2/3) f‴(t)
            let (u0, _) = exact_free5d(&g, t, 0.0);
            assert!((u0 + 2.0 / 3.0 * g.derivative(3, t)).abs() < 1e-13);
        }
    }

    /// Eighth-order central second derivative.
    fn d2(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        let c = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
        let mut acc = c[0] * f(x);
        for k in 1..5 {
            let kh = k as f64 * h;
            acc += c[k] * (f(x + kh) + f(x - kh));
        }
        acc / (h * h)
    }

    fn d1(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        let c = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
        let mut acc = 0.0;
        for k in 1..5 {
            let kh = k as f64 * h;
            acc += c[k - 1] * (f(x + kh) - f(x - kh));
        }
        acc / h
    }

    #[test]
    fn descent_solution_solves_free_wave() {
        let g = GaussianProfile {
            amplitude: 1.0,
            center: 2.0,
            width: 0.7,
        };
        let pts = [(0.0, 0.3), (0.5, 1.7), (1.2, 2.4), (-0.8, 0.9), (2.0, 4.1), (0.3, 0.2)];
        for &(t, r) in &pts {
            let h = 1e-2;
            let u_tt = d2(&|s| exact_free5d(&g, s, r).0, t, h);
            let u_rr = d2(&|s| exact_free5d(&g, t, s).0, r, h);
            let u_r = d1(&|s| exact_free5d(&g, t, s).0, r, h);
            let res = u_tt - u_rr - 4.0 * u_r / r;
            assert!(res.abs() < 1e-9, "({t}, {r}): {res}");
            let u_t = d1(&|s| exact_free5d(&g, s, r).0, t, h);
            assert!((u_t - exact_free5d(&g, t, r).1).abs() < 1e-9);
        }
    }
}
