//! Double-exponential quadrature on the line and half-line.
//!
//! The integrands here (wavefunction moments) are analytic and decay like
//! `exp(-2g|x|^3/3)`, so the mapped trapezoidal rule converges
//! geometrically; 400 points reach the 1e-13..1e-15 range. Sums are
//! accumulated with Neumaier compensation to keep them deterministic and
//! digit-stable.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not converge: doubling {points} -> {points2} points moved the result by {delta:e} (tolerance {tol:e})")]
    NotConverged { points: usize, points2: usize, delta: f64, tol: f64 },
}

/// Quadrature controls: node count, relative tolerance for the doubling
/// check, and the optional core-width mapping scale (auto-set from the
/// approximant when absent).
#[derive(Clone, Copy, Debug)]
pub struct QuadratureSpec {
    pub points: usize,
    pub rel_tol: f64,
    pub mapping_scale: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { points: 400, rel_tol: 1e-13, mapping_scale: None }
    }
}

impl QuadratureSpec {
    pub fn with_points(points: usize) -> QuadratureSpec {
        QuadratureSpec { points, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.points < 63 {
            return Err(format!("quadrature needs at least 63 points, got {}", self.points));
        }
        if !(self.rel_tol > 1e-16 && self.rel_tol < 1e-6) {
            return Err(format!("rel_tol {} outside (1e-16, 1e-6)", self.rel_tol));
        }
        Ok(())
    }

    /// Scale from the Gaussian core width, `min(1, 1/sqrt(B))`.
    pub fn scale_for(&self, b: f64) -> f64 {
        self.mapping_scale.unwrap_or_else(|| 1.0f64.min(1.0 / b.sqrt()))
    }
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

const T_RANGE: f64 = 3.6;

/// Nodes and weights of the line rule `x = M sinh((pi/2) sinh t)`,
/// trapezoid in `t` over `[-T, T]`.
pub fn line_rule(points: usize, scale: f64) -> Vec<(f64, f64)> {
    let h = 2.0 * T_RANGE / (points - 1) as f64;
    (0..points)
        .map(|k| {
            let t = -T_RANGE + k as f64 * h;
            let s = (std::f64::consts::FRAC_PI_2) * t.sinh();
            let x = scale * s.sinh();
            let w = h * scale * (std::f64::consts::FRAC_PI_2) * t.cosh() * s.cosh();
            (x, w)
        })
        .collect()
}

/// Nodes and weights of the half-line rule `r = M exp((pi/2) sinh t)`.
pub fn half_line_rule(points: usize, scale: f64) -> Vec<(f64, f64)> {
    let h = 2.0 * T_RANGE / (points - 1) as f64;
    (0..points)
        .map(|k| {
            let t = -T_RANGE + k as f64 * h;
            let s = (std::f64::consts::FRAC_PI_2) * t.sinh();
            let r = scale * s.exp();
            let w = h * r * (std::f64::consts::FRAC_PI_2) * t.cosh();
            (r, w)
        })
        .collect()
}

/// Integrate `f` over the whole line.
pub fn integrate_line(f: impl Fn(f64) -> f64, points: usize, scale: f64) -> f64 {
    let mut acc = Accumulator::default();
    for (x, w) in line_rule(points, scale) {
        let v = f(x);
        if v != 0.0 && v.is_finite() {
            acc.add(w * v);
        }
    }
    acc.value()
}

/// Integrate `f` over `(0, infinity)`.
pub fn integrate_half_line(f: impl Fn(f64) -> f64, points: usize, scale: f64) -> f64 {
    let mut acc = Accumulator::default();
    for (r, w) in half_line_rule(points, scale) {
        let v = f(r);
        if v != 0.0 && v.is_finite() {
            acc.add(w * v);
        }
    }
    acc.value()
}

/// Gauss-Legendre nodes/weights on `[a, b]` (Newton on the Legendre
/// recurrence; used for the finite-interval prefix integrals in the
/// nonlinearization corrections).
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    let m = (n + 1) / 2;
    for i in 0..m {
        // Tricomi initial guess, then Newton
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
        if i != n - 1 - i {
            out.push((-x, w));
        }
    }
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut mapped: Vec<(f64, f64)> = out.into_iter().map(|(x, w)| (mid + half * x, half * w)).collect();
    mapped.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    mapped
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments_on_line() {
        let sp = std::f64::consts::PI.sqrt();
        let i0 = integrate_line(|x| (-x * x).exp(), 400, 1.0);
        assert!((i0 - sp).abs() < 1e-14 * sp);
        let i2 = integrate_line(|x| x * x * (-x * x).exp(), 400, 1.0);
        assert!((i2 - sp / 2.0).abs() < 1e-14 * sp);
    }

    #[test]
    fn quartic_tail_decay() {
        // int exp(-x^4) = Gamma(1/4)/2
        let expect = 3.6256099082219083 / 2.0;
        let v = integrate_line(|x| (-x.powi(4)).exp(), 400, 1.0);
        assert!((v - expect).abs() < 1e-13, "{v}");
    }

    #[test]
    fn half_line_gamma() {
        // int_0^inf r^3 exp(-r^2) dr = 1/2
        let v = integrate_half_line(|r| r.powi(3) * (-r * r).exp(), 400, 1.0);
        assert!((v - 0.5).abs() < 1e-13, "{v}");
    }

    #[test]
    fn doubling_stability() {
        let a = integrate_line(|x| (-x * x).exp() * (1.0 + x * x), 400, 0.7);
        let b = integrate_line(|x| (-x * x).exp() * (1.0 + x * x), 800, 0.7);
        assert!((a - b).abs() < 1e-13 * a.abs());
    }

    #[test]
    fn gauss_legendre_polynomial_exactness() {
        // degree-7 polynomial integrated exactly by 4-point rule
        let rule = gauss_legendre(4, 0.0, 2.0);
        let f = |x: f64| 3.0 * x.powi(7) - x.powi(4) + 2.0 * x - 5.0;
        let val: f64 = rule.iter().map(|(x, w)| w * f(*x)).sum();
        let exact = 3.0 * 256.0 / 8.0 - 32.0 / 5.0 + 4.0 - 10.0;
        assert!((val - exact).abs() < 1e-12 * exact.abs());
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::with_points(62).validate().is_err());
        assert!(QuadratureSpec::default().validate().is_ok());
        let s = QuadratureSpec { rel_tol: 1e-5, ..Default::default() };
        assert!(s.validate().is_err());
    }
}
