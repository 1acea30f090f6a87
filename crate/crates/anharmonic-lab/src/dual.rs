//! Second-order dual numbers: exact value/first/second derivative
//! propagation through the closed-form wavefunction expressions.
//!
//! Finite differences on `log Psi` lose ~8 digits in the second
//! derivative, which is fatal for the nonlinearization corrections (the
//! integrand there is a near-cancellation of `V` against `Psi''/Psi`).
//! Dual arithmetic keeps both derivatives at full machine precision.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Truncated jet `(f, f', f'')` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Dual2 {
    /// The independent variable: value `x`, derivative 1.
    #[inline]
    pub fn var(x: f64) -> Dual2 {
        Dual2 { v: x, d1: 1.0, d2: 0.0 }
    }

    #[inline]
    pub fn con(c: f64) -> Dual2 {
        Dual2 { v: c, d1: 0.0, d2: 0.0 }
    }

    #[inline]
    pub fn sqrt(self) -> Dual2 {
        let r = self.v.sqrt();
        let d1 = self.d1 / (2.0 * r);
        Dual2 {
            v: r,
            d1,
            d2: self.d2 / (2.0 * r) - self.d1 * self.d1 / (4.0 * r * r * r),
        }
    }

    #[inline]
    pub fn ln(self) -> Dual2 {
        let inv = 1.0 / self.v;
        Dual2 {
            v: self.v.ln(),
            d1: self.d1 * inv,
            d2: self.d2 * inv - self.d1 * self.d1 * inv * inv,
        }
    }

    /// Natural log of |self|.
    #[inline]
    pub fn ln_abs(self) -> Dual2 {
        let inv = 1.0 / self.v;
        Dual2 {
            v: self.v.abs().ln(),
            d1: self.d1 * inv,
            d2: self.d2 * inv - self.d1 * self.d1 * inv * inv,
        }
    }
}

impl Add for Dual2 {
    type Output = Dual2;
    #[inline]
    fn add(self, o: Dual2) -> Dual2 {
        Dual2 { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}

impl Sub for Dual2 {
    type Output = Dual2;
    #[inline]
    fn sub(self, o: Dual2) -> Dual2 {
        Dual2 { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }
}

impl Mul for Dual2 {
    type Output = Dual2;
    #[inline]
    fn mul(self, o: Dual2) -> Dual2 {
        Dual2 {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

impl Div for Dual2 {
    type Output = Dual2;
    #[inline]
    fn div(self, o: Dual2) -> Dual2 {
        let inv = 1.0 / o.v;
        let v = self.v * inv;
        let d1 = (self.d1 - v * o.d1) * inv;
        let d2 = (self.d2 - 2.0 * d1 * o.d1 - v * o.d2) * inv;
        Dual2 { v, d1, d2 }
    }
}

impl Neg for Dual2 {
    type Output = Dual2;
    #[inline]
    fn neg(self) -> Dual2 {
        Dual2 { v: -self.v, d1: -self.d1, d2: -self.d2 }
    }
}

impl Mul<f64> for Dual2 {
    type Output = Dual2;
    #[inline]
    fn mul(self, c: f64) -> Dual2 {
        Dual2 { v: self.v * c, d1: self.d1 * c, d2: self.d2 * c }
    }
}

impl Add<f64> for Dual2 {
    type Output = Dual2;
    #[inline]
    fn add(self, c: f64) -> Dual2 {
        Dual2 { v: self.v + c, ..self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn polynomial_jet() {
        // f = x^3 + 2x: f' = 3x^2 + 2, f'' = 6x
        let x = Dual2::var(1.7);
        let f = x * x * x + x * 2.0;
        assert!(close(f.v, 1.7f64.powi(3) + 3.4, 1e-15));
        assert!(close(f.d1, 3.0 * 1.7 * 1.7 + 2.0, 1e-15));
        assert!(close(f.d2, 6.0 * 1.7, 1e-15));
    }

    #[test]
    fn log_sqrt_chain() {
        // f = ln(sqrt(1 + x^2)): f' = x/(1+x^2), f'' = (1-x^2)/(1+x^2)^2
        let xv = 0.83;
        let x = Dual2::var(xv);
        let f = ((x * x) + 1.0).sqrt().ln();
        let den = 1.0 + xv * xv;
        assert!(close(f.d1, xv / den, 1e-14));
        assert!(close(f.d2, (1.0 - xv * xv) / (den * den), 1e-14));
    }

    #[test]
    fn quotient_second_derivative() {
        // f = 1/(1+x): f'' = 2/(1+x)^3
        let x = Dual2::var(0.4);
        let f = Dual2::con(1.0) / (x + 1.0);
        assert!(close(f.d2, 2.0 / 1.4f64.powi(3), 1e-14));
    }
}
