//! Double-double arithmetic: an unevaluated sum of two `f64` giving
//! roughly 32 significant digits.
//!
//! Used by the mesh oracle to polish quadrature nodes and to refine
//! eigenvalues through extended-precision Rayleigh quotients, where plain
//! `f64` matrix assembly would cap the attainable accuracy near
//! `eps * ||H||`. Only the operations the oracle needs are implemented.

/// Double-double number `hi + lo`, with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// Error-free sum: `a + b = s + e` exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Error-free sum assuming `|a| >= |b|`.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Error-free product via fused multiply-add: `a * b = p + e` exactly.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact product of two `f64` as a `Dd`.
    #[inline]
    pub fn prod(a: f64, b: f64) -> Dd {
        let (p, e) = two_prod(a, b);
        Dd { hi: p, lo: e }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, rhs: Dd) -> Dd {
        let (s1, e1) = two_sum(self.hi, rhs.hi);
        let (s2, e2) = two_sum(self.lo, rhs.lo);
        let (s1, e3) = quick_two_sum(s1, e1 + s2);
        let (hi, lo) = quick_two_sum(s1, e3 + e2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, rhs: f64) -> Dd {
        let (s1, e1) = two_sum(self.hi, rhs);
        let (hi, lo) = quick_two_sum(s1, e1 + self.lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn sub(self, rhs: Dd) -> Dd {
        self.add(rhs.neg())
    }

    #[inline]
    pub fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, rhs: f64) -> Dd {
        let (p, e) = two_prod(self.hi, rhs);
        let (hi, lo) = quick_two_sum(p, e + self.lo * rhs);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div(self, rhs: Dd) -> Dd {
        // One Newton step on the f64 quotient.
        let q1 = self.hi / rhs.hi;
        let r = self.sub(rhs.mul_f64(q1));
        let q2 = r.hi / rhs.hi;
        let r = r.sub(rhs.mul_f64(q2));
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add_f64(q3)
    }

    #[inline]
    pub fn recip(self) -> Dd {
        Dd::ONE.div(self)
    }

    #[inline]
    pub fn sqr(self) -> Dd {
        self.mul(self)
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::from_f64(self.hi.sqrt());
        }
        // Newton on y = sqrt(x): y' = 0.5 (y + x / y).
        let y = Dd::from_f64(self.hi.sqrt());
        let y = y.add(self.div(y)).mul_f64(0.5);
        y.add(self.div(y)).mul_f64(0.5)
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }
}

/// Compensated (dd-accumulated) dot product of two `f64` slices.
pub fn dot(a: &[f64], b: &[f64]) -> Dd {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Dd::ZERO;
    for (&x, &y) in a.iter().zip(b.iter()) {
        acc = acc.add(Dd::prod(x, y));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_tracks_tiny_terms() {
        let one = Dd::ONE;
        let tiny = Dd::from_f64(1e-25);
        let s = one.add(tiny).sub(one);
        assert_eq!(s.to_f64(), 1e-25);
    }

    #[test]
    fn mul_exact_product() {
        let a = Dd::prod(1.0 + 2f64.powi(-30), 1.0 - 2f64.powi(-30));
        let expect = -(2f64.powi(-60));
        assert_eq!(a.sub(Dd::ONE).to_f64(), expect);
    }

    #[test]
    fn div_roundtrip() {
        let a = Dd::from_f64(std::f64::consts::PI);
        let b = Dd::from_f64(std::f64::consts::E);
        let q = a.div(b).mul(b).sub(a);
        assert!(q.to_f64().abs() < 1e-30);
    }

    #[test]
    fn sqrt_squares_back() {
        let a = Dd::from_f64(2.0);
        let r = a.sqrt().sqr().sub(a);
        assert!(r.to_f64().abs() < 1e-30);
    }

    #[test]
    fn dot_beats_f64_cancellation() {
        // sum of (1, 1e-20, -1): plain f64 loses the 1e-20.
        let a = [1.0, 1e-20, -1.0];
        let b = [1.0, 1.0, 1.0];
        assert_eq!(dot(&a, &b).to_f64(), 1e-20);
    }
}
