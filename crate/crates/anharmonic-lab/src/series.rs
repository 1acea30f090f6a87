//! Weak-coupling perturbation theory for the Riccati-Bloch equation.
//!
//! With `m = 1/2`, `hbar = 1` the logarithmic derivative `Y = -(log Psi)'`
//! of the ground state satisfies
//!
//! ```text
//! Y' - Y^2 = eps(l^2) - v^2 - l^2 v^4,      l = hbar^(1/2) g,
//! ```
//!
//! and the expansions `eps = sum l^(2n) eps_n`, `Y = sum l^(2n) Y_n(v)`
//! close order by order: each `Y_n = v P_n(v^2)` is an odd polynomial of
//! degree `2n+1` and each `eps_n` is rational. The order-`n` relation
//!
//! ```text
//! Y_n' - 2 Y_0 Y_n = eps_n - delta_{n,1} v^4 + sum_{k=1}^{n-1} Y_k Y_{n-k}
//! ```
//!
//! is solved by equating coefficients of `v^{2j}`: a triangular
//! back-substitution fixes the polynomial, and the `v^0` balance fixes
//! `eps_n`. No integration, no truncation error.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

pub type Rational = BigRational;

fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Odd polynomial `v * P(v^2)`: `coeffs[k]` multiplies `v^(2k+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OddPolynomial {
    pub coeffs: Vec<Rational>,
}

impl OddPolynomial {
    /// Degree in `v` (for `Y_n` this is exactly `2n+1`).
    pub fn degree(&self) -> usize {
        2 * (self.coeffs.len() - 1) + 1
    }

    /// Evaluate at real `v` by Horner's scheme in `v^2`.
    pub fn eval(&self, v: f64) -> f64 {
        let v2 = v * v;
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * v2 + c.to_f64().unwrap();
        }
        acc * v
    }

    /// Coefficient of `v^(2k+1)`, or zero beyond the stored degree.
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }
}

/// Truncated perturbation series: energies `eps_0..eps_N` and the odd
/// polynomials `Y_0..Y_N`.
#[derive(Clone, Debug)]
pub struct PtSeries {
    pub order: usize,
    pub eps: Vec<Rational>,
    pub y_terms: Vec<OddPolynomial>,
}

/// Generate the hierarchy through order `n_max` in exact arithmetic.
///
/// `eps[0] = 1`, `eps[1] = 3/4`, `Y_0 = v`, `Y_1 = v^3/2 + 3v/4`, and the
/// signs of `eps_n` alternate from `n = 1` on (the series has zero radius
/// of convergence; the coefficients grow factorially).
pub fn rb_coefficients(n_max: usize) -> PtSeries {
    let mut eps: Vec<Rational> = vec![Rational::one()];
    let mut ys: Vec<OddPolynomial> = vec![OddPolynomial { coeffs: vec![Rational::one()] }];

    for n in 1..=n_max {
        // Right-hand side even polynomial, rhs[j] multiplying v^(2j),
        // excluding the unknown eps_n.
        let mut rhs: Vec<Rational> = vec![Rational::zero(); n + 2];
        if n == 1 {
            rhs[2] -= Rational::one();
        }
        for k in 1..n {
            let (a, b) = (&ys[k].coeffs, &ys[n - k].coeffs);
            for (i, ai) in a.iter().enumerate() {
                for (j, bj) in b.iter().enumerate() {
                    rhs[i + j + 1] += ai * bj;
                }
            }
        }
        // (2j+1) c_j - 2 c_{j-1} = rhs[j]; the v^(2n+2) row has no c_{n+1}.
        let mut c: Vec<Rational> = vec![Rational::zero(); n + 1];
        c[n] = -&rhs[n + 1] / rat(2, 1);
        for j in (1..=n).rev() {
            let lhs = rat(2 * j as i64 + 1, 1) * &c[j] - &rhs[j];
            c[j - 1] = lhs / rat(2, 1);
        }
        // v^0 balance: c_0 = eps_n + rhs[0].
        let e = &c[0] - &rhs[0];
        eps.push(e);
        ys.push(OddPolynomial { coeffs: c });
    }

    PtSeries { order: n_max, eps, y_terms: ys }
}

/// Evaluate the truncated sums `(eps(l), Y(l, v))` in floating point.
pub fn rb_eval(series: &PtSeries, lambda: f64, v: f64) -> (f64, f64) {
    let l2 = lambda * lambda;
    let mut e = 0.0;
    let mut y = 0.0;
    for n in (0..=series.order).rev() {
        e = e * l2 + series.eps[n].to_f64().unwrap();
        y = y * l2 + series.y_terms[n].eval(v);
    }
    (e, y)
}

/// Residual of the order-`n` defining relation as an exact polynomial;
/// all-zero output certifies the hierarchy at that order.
pub fn order_residual(series: &PtSeries, n: usize) -> Vec<Rational> {
    assert!(n >= 1 && n <= series.order);
    let y = &series.y_terms[n].coeffs;
    // lhs = Y_n' - 2 v Y_n as even polynomial in v.
    let mut lhs: Vec<Rational> = vec![Rational::zero(); n + 2];
    for (k, ck) in y.iter().enumerate() {
        lhs[k] += rat(2 * k as i64 + 1, 1) * ck;
        lhs[k + 1] -= rat(2, 1) * ck;
    }
    // rhs
    let mut rhs: Vec<Rational> = vec![Rational::zero(); n + 2];
    rhs[0] = series.eps[n].clone();
    if n == 1 {
        rhs[2] -= Rational::one();
    }
    for k in 1..n {
        let (a, b) = (&series.y_terms[k].coeffs, &series.y_terms[n - k].coeffs);
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                rhs[i + j + 1] += ai * bj;
            }
        }
    }
    lhs.iter().zip(rhs.iter()).map(|(l, r)| l - r).collect()
}

/// Odd Taylor coefficients `c_1, c_3, ...` of the solution of the
/// Riccati-Bloch equation at fixed energy `eps` and coupling `lambda`:
/// `c_1 = eps`, `c_3 = (eps^2-1)/3`, and the quartic term feeds in at
/// `v^5`. Returns `order` coefficients.
pub fn small_v_series(eps: f64, lambda: f64, order: usize) -> Vec<f64> {
    assert!(order >= 1);
    let l2 = lambda * lambda;
    let mut c = Vec::with_capacity(order);
    c.push(eps);
    for j in 1..order {
        // (2j+1) c_{2j+1} = [v^{2j}](eps - v^2 - l^2 v^4) + sum_{a+b=j-1} c_a c_b
        let mut rhs = 0.0;
        if j == 1 {
            rhs -= 1.0;
        }
        if j == 2 {
            rhs -= l2;
        }
        for a in 0..j {
            rhs += c[a] * c[j - 1 - a];
        }
        c.push(rhs / (2 * j + 1) as f64);
    }
    c
}

/// Serializable form: rationals as `"num/den"` strings, `y[n][k]`
/// multiplying `v^(2k+1)`.
#[derive(Serialize)]
pub struct SeriesExport {
    pub order: usize,
    pub eps: Vec<String>,
    pub y: Vec<Vec<String>>,
}

pub fn rational_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl PtSeries {
    pub fn export(&self) -> SeriesExport {
        SeriesExport {
            order: self.order,
            eps: self.eps.iter().map(rational_string).collect(),
            y: self
                .y_terms
                .iter()
                .map(|p| p.coeffs.iter().map(rational_string).collect())
                .collect(),
        }
    }

    /// Sign pattern of the divergent series: `(-1)^(n+1) eps_n > 0`.
    pub fn sign_pattern_holds(&self) -> bool {
        (1..=self.order).all(|n| {
            let s = if n % 2 == 1 { self.eps[n].clone() } else { -self.eps[n].clone() };
            s.is_positive()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_zero_is_harmonic() {
        let s = rb_coefficients(0);
        assert_eq!(s.eps, vec![Rational::one()]);
        assert_eq!(s.y_terms[0].coeffs, vec![Rational::one()]);
    }

    #[test]
    fn first_order_matches_closed_form() {
        // eps = [1, 3/4], Y_1 = v^3/2 + 3v/4
        let s = rb_coefficients(1);
        assert_eq!(s.eps[1], rat(3, 4));
        assert_eq!(s.y_terms[1].coeffs, vec![rat(3, 4), rat(1, 2)]);
    }

    #[test]
    fn second_order_hand_recursion() {
        // eps_2 = -21/16, Y_2 = -21/16 v - 11/16 v^3 - 1/8 v^5,
        // worked out by collecting v^6, v^4, v^2 in the order-2 relation
        // with Y_1^2 = v^6/4 + 3v^4/4 + 9v^2/16.
        let s = rb_coefficients(2);
        assert_eq!(s.eps[2], rat(-21, 16));
        assert_eq!(s.y_terms[2].coeffs, vec![rat(-21, 16), rat(-11, 16), rat(-1, 8)]);
    }

    #[test]
    fn known_higher_orders() {
        let s = rb_coefficients(4);
        assert_eq!(s.eps[3], rat(333, 64));
        assert_eq!(s.eps[4], rat(-30885, 1024));
    }

    #[test]
    fn residuals_vanish_exactly() {
        let s = rb_coefficients(10);
        for n in 1..=10 {
            for r in order_residual(&s, n) {
                assert!(r.is_zero(), "nonzero residual at order {n}");
            }
        }
    }

    #[test]
    fn degree_law_and_nonzero_coefficients() {
        let s = rb_coefficients(10);
        for n in 1..=10 {
            assert_eq!(s.y_terms[n].degree(), 2 * n + 1);
            assert!(s.y_terms[n].coeffs.iter().all(|c| !c.is_zero()));
        }
    }

    #[test]
    fn sign_pattern_to_order_20() {
        let s = rb_coefficients(20);
        assert!(s.sign_pattern_holds());
    }

    #[test]
    fn eval_harmonic_and_unit_coupling() {
        let s = rb_coefficients(1);
        let (e, y) = rb_eval(&s, 0.0, 2.0);
        assert_eq!((e, y), (1.0, 2.0));
        let (e, y) = rb_eval(&s, 1.0, 1.0);
        assert!((e - 1.75).abs() < 1e-15);
        assert!((y - 2.25).abs() < 1e-15);
    }

    #[test]
    fn eval_second_order_at_origin() {
        let s = rb_coefficients(2);
        let (e, _) = rb_eval(&s, 0.1, 0.0);
        let expect = 1.0 + 0.75e-2 - (21.0 / 16.0) * 1e-4;
        assert!((e - expect).abs() < 1e-15);
    }

    #[test]
    fn small_v_closed_forms() {
        assert_eq!(small_v_series(1.0, 0.0, 2), vec![1.0, 0.0]);
        assert_eq!(small_v_series(2.0, 0.0, 2), vec![2.0, 1.0]);
        // c_5 = (2 eps c_3 - l^2)/5
        let c = small_v_series(1.75, 1.0, 3);
        let c3 = (1.75f64 * 1.75 - 1.0) / 3.0;
        assert!((c[2] - (2.0 * 1.75 * c3 - 1.0) / 5.0).abs() < 1e-15);
    }

    #[test]
    fn small_v_matches_truncated_series_taylor() {
        // At small coupling the Taylor coefficients of the truncated Y
        // series (exact sums of polynomial coefficients) and the
        // coefficients generated from the truncated eps agree through the
        // truncation error O(l^(2N+2)) -- whose prefactor is large (the
        // series diverges), hence the modest coupling here.
        let s = rb_coefficients(6);
        let lambda = 0.05;
        let (e, _) = rb_eval(&s, lambda, 0.0);
        let c = small_v_series(e, lambda, 4);
        let l2 = lambda * lambda;
        for k in 0..4 {
            let mut exact = 0.0;
            for n in (0..=6).rev() {
                exact = exact * l2 + s.y_terms[n].coeff(k).to_f64().unwrap();
            }
            assert!(
                (c[k] - exact).abs() < 1e-10,
                "coefficient v^{} mismatch: {} vs {}",
                2 * k + 1,
                c[k],
                exact
            );
        }
    }

    #[test]
    fn json_export_shape() {
        let s = rb_coefficients(1);
        let j = serde_json::to_string(&s.export()).unwrap();
        assert_eq!(j, r#"{"order":1,"eps":["1","3/4"],"y":[["1"],["3/4","1/2"]]}"#);
    }
}
