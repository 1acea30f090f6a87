//! Semiclassical hierarchy of the generalized Bloch equation.
//!
//! In the classical coordinate `u = g x` the logarithmic derivative
//! `Z = -g (log Psi)'` of the ground state satisfies
//!
//! ```text
//! l^2 Z' - Z^2 = l^2 eps(l^2) - u^2 - u^4,
//! ```
//!
//! and expanding `Z = sum l^(2n) Z_n(u)` gives `Z_0 = u sqrt(1+u^2)` (the
//! classical momentum at zero energy) and, for `n >= 1`,
//!
//! ```text
//! 2 Z_0 Z_n = Z_{n-1}' - eps_{n-1} - sum_{k=1}^{n-1} Z_k Z_{n-k}.
//! ```
//!
//! Every correction is carried exactly as an element of the quotient ring
//! `Q[u,w]/(w^2 - 1 - u^2)` divided by a monomial `u^a w^b`. Products,
//! derivatives (`w' = u/w`) and the recursion close in this
//! representation, which makes two structural facts decidable: each `Z_n`
//! is finite at `u = 0` for the ground state, and no `Z_n` with `n >= 2`
//! carries a `1/u` residue (at zero or at infinity), so the phase
//! integral acquires no logarithms beyond the first-order ones.

use crate::series::{rational_string, rb_coefficients, Rational};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BlochError {
    #[error("evaluation point |u| = {u} is below the series-fallback threshold and the term has a pole at u = 0")]
    DegenerateInput { u: f64 },
}

fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

// ---- dense polynomials in u with rational coefficients ----

type UPoly = Vec<Rational>;

fn trim(p: &mut UPoly) {
    while p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
}

fn poly_add(a: &UPoly, b: &UPoly) -> UPoly {
    let mut out = vec![Rational::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] += c;
    }
    trim(&mut out);
    out
}

fn poly_neg(a: &UPoly) -> UPoly {
    a.iter().map(|c| -c.clone()).collect()
}

fn poly_mul(a: &UPoly, b: &UPoly) -> UPoly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    trim(&mut out);
    out
}

fn poly_scale(a: &UPoly, c: &Rational) -> UPoly {
    a.iter().map(|x| x * c).collect()
}

fn poly_derivative(a: &UPoly) -> UPoly {
    if a.len() <= 1 {
        return vec![];
    }
    let mut out = Vec::with_capacity(a.len() - 1);
    for (i, c) in a.iter().enumerate().skip(1) {
        out.push(c * rat(i as i64, 1));
    }
    trim(&mut out);
    out
}

/// Multiply by u^k.
fn poly_shift(a: &UPoly, k: usize) -> UPoly {
    if a.is_empty() {
        return vec![];
    }
    let mut out = vec![Rational::zero(); k];
    out.extend_from_slice(a);
    out
}

fn poly_valuation(a: &UPoly) -> Option<usize> {
    a.iter().position(|c| !c.is_zero())
}

/// Exact division by (1 + u^2); None if it does not divide.
fn poly_div_one_plus_u2(a: &UPoly) -> Option<UPoly> {
    if a.is_empty() {
        return Some(vec![]);
    }
    let mut rem = a.clone();
    let mut q = vec![Rational::zero(); a.len().saturating_sub(2).max(1)];
    // synthetic division from the top: rem - c*u^(d-2)*(1+u^2)
    let mut d = rem.len();
    while d >= 3 {
        let c = rem[d - 1].clone();
        if !c.is_zero() {
            q[d - 3] = c.clone();
            rem[d - 1] = Rational::zero();
            rem[d - 3] -= c;
        }
        d -= 1;
    }
    trim(&mut rem);
    if rem.is_empty() {
        trim(&mut q);
        Some(q)
    } else {
        None
    }
}

// ---- ring elements ----

/// Element `(p(u) + q(u) w) / (u^a w^b)` of the quotient ring with
/// `w^2 = 1 + u^2`.
#[derive(Clone, Debug)]
pub struct BlochTerm {
    p: UPoly,
    q: UPoly,
    pub u_pole: usize,
    pub w_pole: usize,
}

impl BlochTerm {
    pub fn zero() -> BlochTerm {
        BlochTerm { p: vec![], q: vec![], u_pole: 0, w_pole: 0 }
    }

    pub fn constant(c: Rational) -> BlochTerm {
        let mut t = BlochTerm { p: vec![c], q: vec![], u_pole: 0, w_pole: 0 };
        t.normalize();
        t
    }

    /// `Z_0 = u w`.
    pub fn classical_momentum() -> BlochTerm {
        BlochTerm { p: vec![], q: vec![Rational::zero(), Rational::one()], u_pole: 0, w_pole: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_empty() && self.q.is_empty()
    }

    fn normalize(&mut self) {
        trim(&mut self.p);
        trim(&mut self.q);
        if self.is_zero() {
            self.u_pole = 0;
            self.w_pole = 0;
            return;
        }
        // cancel common powers of u against the u-pole
        let vp = poly_valuation(&self.p).unwrap_or(usize::MAX);
        let vq = poly_valuation(&self.q).unwrap_or(usize::MAX);
        let m = vp.min(vq).min(self.u_pole);
        if m > 0 {
            self.p = self.p.iter().skip(m).cloned().collect();
            self.q = self.q.iter().skip(m).cloned().collect();
            self.u_pole -= m;
        }
        // cancel w^2 = 1 + u^2 against pairs of w-poles
        while self.w_pole >= 2 {
            match (poly_div_one_plus_u2(&self.p), poly_div_one_plus_u2(&self.q)) {
                (Some(p2), Some(q2)) => {
                    self.p = p2;
                    self.q = q2;
                    self.w_pole -= 2;
                }
                _ => break,
            }
        }
        // divide numerator by w when possible: (p + q w)/w = q + (p/(1+u^2)) w
        while self.w_pole >= 1 {
            match poly_div_one_plus_u2(&self.p) {
                Some(p2) => {
                    let q_old = std::mem::take(&mut self.q);
                    self.p = q_old;
                    self.q = p2;
                    self.w_pole -= 1;
                }
                None => break,
            }
        }
    }

    /// Lift the numerator so the denominator becomes `u^a w^b`.
    fn lifted(&self, a: usize, b: usize) -> (UPoly, UPoly) {
        assert!(a >= self.u_pole && b >= self.w_pole);
        let mut p = poly_shift(&self.p, a - self.u_pole);
        let mut q = poly_shift(&self.q, a - self.u_pole);
        let mut db = b - self.w_pole;
        // multiply numerator by w^db
        let one_u2: UPoly = vec![Rational::one(), Rational::zero(), Rational::one()];
        while db >= 2 {
            p = poly_mul(&p, &one_u2);
            q = poly_mul(&q, &one_u2);
            db -= 2;
        }
        if db == 1 {
            let new_p = poly_mul(&q, &one_u2);
            let new_q = p;
            p = new_p;
            q = new_q;
        }
        (p, q)
    }

    pub fn add(&self, o: &BlochTerm) -> BlochTerm {
        let a = self.u_pole.max(o.u_pole);
        let b = self.w_pole.max(o.w_pole);
        let (p1, q1) = self.lifted(a, b);
        let (p2, q2) = o.lifted(a, b);
        let mut t = BlochTerm { p: poly_add(&p1, &p2), q: poly_add(&q1, &q2), u_pole: a, w_pole: b };
        t.normalize();
        t
    }

    pub fn neg(&self) -> BlochTerm {
        BlochTerm {
            p: poly_neg(&self.p),
            q: poly_neg(&self.q),
            u_pole: self.u_pole,
            w_pole: self.w_pole,
        }
    }

    pub fn sub(&self, o: &BlochTerm) -> BlochTerm {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &BlochTerm) -> BlochTerm {
        // (p1 + q1 w)(p2 + q2 w) = p1p2 + q1q2 (1+u^2) + (p1q2 + q1p2) w
        let one_u2: UPoly = vec![Rational::one(), Rational::zero(), Rational::one()];
        let p = poly_add(&poly_mul(&self.p, &o.p), &poly_mul(&poly_mul(&self.q, &o.q), &one_u2));
        let q = poly_add(&poly_mul(&self.p, &o.q), &poly_mul(&self.q, &o.p));
        let mut t = BlochTerm {
            p,
            q,
            u_pole: self.u_pole + o.u_pole,
            w_pole: self.w_pole + o.w_pole,
        };
        t.normalize();
        t
    }

    /// d/du with `w' = u / w`.
    pub fn derivative(&self) -> BlochTerm {
        let (a, b) = (self.u_pole as i64, self.w_pole as i64);
        let one_u2: UPoly = vec![Rational::one(), Rational::zero(), Rational::one()];
        let u: UPoly = vec![Rational::zero(), Rational::one()];
        let u2: UPoly = vec![Rational::zero(), Rational::zero(), Rational::one()];
        let apb = rat(a + b, 1);
        // denominator scale: a + (a+b) u^2, as coefficients
        let scale: UPoly = {
            let mut s = vec![rat(a, 1), Rational::zero(), apb];
            trim(&mut s);
            s
        };
        let pp = poly_derivative(&self.p);
        let qp = poly_derivative(&self.q);
        let num_p = {
            let t1 = poly_mul(&poly_mul(&pp, &u), &one_u2);
            let t2 = poly_mul(&self.p, &scale);
            poly_add(&t1, &poly_neg(&t2))
        };
        let num_q = {
            let t1 = poly_mul(&poly_mul(&qp, &u), &one_u2);
            let t2 = poly_mul(&self.q, &u2);
            let t3 = poly_mul(&self.q, &scale);
            poly_add(&poly_add(&t1, &t2), &poly_neg(&t3))
        };
        let mut t = BlochTerm {
            p: num_p,
            q: num_q,
            u_pole: self.u_pole + 1,
            w_pole: self.w_pole + 2,
        };
        t.normalize();
        t
    }

    /// Divide by `c * u^du * w^dw`.
    pub fn div_monomial(&self, c: &Rational, du: usize, dw: usize) -> BlochTerm {
        let inv = Rational::one() / c;
        let mut t = BlochTerm {
            p: poly_scale(&self.p, &inv),
            q: poly_scale(&self.q, &inv),
            u_pole: self.u_pole + du,
            w_pole: self.w_pole + dw,
        };
        t.normalize();
        t
    }

    pub fn equals(&self, o: &BlochTerm) -> bool {
        self.sub(o).is_zero()
    }

    /// Laurent expansion around `u = 0` (branch `w = +sqrt(1+u^2)`);
    /// returns `(min_power, coeffs)` with `coeffs[k]` multiplying
    /// `u^(min_power + k)`, carried to `n_terms` coefficients.
    pub fn laurent_at_zero(&self, n_terms: usize) -> (i64, Vec<Rational>) {
        let keep = n_terms + self.u_pole + 2;
        // numerator series: p + q * (1+u^2)^(1/2)
        let sqrt_series = binomial_series(rat(1, 2), keep);
        let mut num = series_add(
            &series_from_poly(&self.p, keep),
            &series_mul(&series_from_poly(&self.q, keep), &sqrt_series, keep),
            keep,
        );
        // times (1+u^2)^(-w_pole/2)
        let wb = binomial_series(rat(-(self.w_pole as i64), 2), keep);
        num = series_mul(&num, &wb, keep);
        (-(self.u_pole as i64), num)
    }

    /// Laurent expansion in `t = 1/u` as `u -> +infinity`; returns
    /// `(min_power, coeffs)` with `coeffs[k]` multiplying `t^(min_power+k)`.
    /// The coefficient of `t^1` is the `1/u` residue at infinity.
    pub fn laurent_at_infinity(&self, n_terms: usize) -> (i64, Vec<Rational>) {
        let dp = self.p.len() as i64 - 1;
        let dq = self.q.len() as i64 - 1;
        let base = self.u_pole as i64 + self.w_pole as i64;
        let lead = (if self.p.is_empty() { i64::MAX } else { base - dp })
            .min(if self.q.is_empty() { i64::MAX } else { base - dq - 1 });
        if lead == i64::MAX {
            return (0, vec![]);
        }
        let keep = n_terms + 2;
        // reversed polynomials give series in t
        let prev: UPoly = self.p.iter().rev().cloned().collect();
        let qrev: UPoly = self.q.iter().rev().cloned().collect();
        let sqrt_series = binomial_series(rat(1, 2), keep); // (1+t^2)^(1/2)
        let wb = binomial_series(rat(-(self.w_pole as i64), 2), keep);
        // E = t^(base-dp) prev(t) (1+t^2)^(-b/2) + t^(base-dq-1) qrev(t) (1+t^2)^((1-b)/2)
        let mut out = vec![Rational::zero(); n_terms];
        let mut accumulate = |series: Vec<Rational>, offset: i64| {
            for (k, c) in series.into_iter().enumerate() {
                let pw = offset + k as i64 - lead;
                if pw >= 0 && (pw as usize) < n_terms {
                    out[pw as usize] += c;
                }
            }
        };
        if !self.p.is_empty() {
            accumulate(series_mul(&series_from_poly(&prev, keep), &wb, keep), base - dp);
        }
        if !self.q.is_empty() {
            let qs = series_mul(
                &series_mul(&series_from_poly(&qrev, keep), &sqrt_series, keep),
                &wb,
                keep,
            );
            accumulate(qs, base - dq - 1);
        }
        (lead, out)
    }

    /// Coefficient of `1/u` in the Laurent expansion at `u = 0`.
    pub fn residue_at_zero(&self) -> Rational {
        let (min_pow, coeffs) = self.laurent_at_zero(self.u_pole + 2);
        let idx = -1 - min_pow;
        if idx < 0 || idx as usize >= coeffs.len() {
            Rational::zero()
        } else {
            coeffs[idx as usize].clone()
        }
    }

    /// Coefficient of `1/u` in the expansion at infinity.
    pub fn residue_at_infinity(&self) -> Rational {
        let (min_pow, coeffs) = self.laurent_at_infinity(8);
        let idx = 1 - min_pow;
        if idx < 0 || idx as usize >= coeffs.len() {
            Rational::zero()
        } else {
            coeffs[idx as usize].clone()
        }
    }

    /// True when the expansion at `u = 0` has no negative powers.
    pub fn finite_at_zero(&self) -> bool {
        let (min_pow, coeffs) = self.laurent_at_zero(self.u_pole + 4);
        for (k, c) in coeffs.iter().enumerate() {
            if min_pow + (k as i64) < 0 && !c.is_zero() {
                return false;
            }
        }
        true
    }

    /// Evaluate at real `u` through the radical form.
    fn eval_direct(&self, u: f64) -> f64 {
        let w = (1.0 + u * u).sqrt();
        let horner = |p: &UPoly| {
            let mut acc = 0.0;
            for c in p.iter().rev() {
                acc = acc * u + c.to_f64().unwrap();
            }
            acc
        };
        let num = horner(&self.p) + horner(&self.q) * w;
        num / (u.powi(self.u_pole as i32) * w.powi(self.w_pole as i32))
    }

    /// Evaluate through the Taylor expansion at `u = 0` (ground-state
    /// terms only; errors if the term has a genuine pole).
    fn eval_series(&self, u: f64, n_terms: usize) -> Result<f64, BlochError> {
        let (min_pow, coeffs) = self.laurent_at_zero(n_terms);
        for (k, c) in coeffs.iter().enumerate() {
            if min_pow + (k as i64) < 0 && !c.is_zero() {
                return Err(BlochError::DegenerateInput { u });
            }
        }
        // negative-power slots are all zero here; Horner over the rest
        let skip = (-min_pow).max(0) as usize;
        let mut acc = 0.0;
        for c in coeffs.iter().skip(skip).rev() {
            acc = acc * u + c.to_f64().unwrap();
        }
        let base = (min_pow + skip as i64) as i32;
        Ok(acc * u.powi(base))
    }

    /// JSON form: monomials `[coeff, deg_u, deg_w]` with `deg_w <= 1`.
    pub fn export(&self) -> BlochTermExport {
        let mut num = Vec::new();
        for (i, c) in self.p.iter().enumerate() {
            if !c.is_zero() {
                num.push((rational_string(c), i, 0));
            }
        }
        for (i, c) in self.q.iter().enumerate() {
            if !c.is_zero() {
                num.push((rational_string(c), i, 1));
            }
        }
        BlochTermExport { num, u_pole: self.u_pole, w_pole: self.w_pole }
    }
}

#[derive(Serialize)]
pub struct BlochTermExport {
    pub num: Vec<(String, usize, usize)>,
    pub u_pole: usize,
    pub w_pole: usize,
}

// ---- truncated power series helpers (dense, length = keep) ----

fn series_from_poly(p: &UPoly, keep: usize) -> Vec<Rational> {
    let mut s = vec![Rational::zero(); keep];
    for (i, c) in p.iter().enumerate().take(keep) {
        s[i] = c.clone();
    }
    s
}

fn series_add(a: &[Rational], b: &[Rational], keep: usize) -> Vec<Rational> {
    (0..keep)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(Rational::zero);
            let y = b.get(i).cloned().unwrap_or_else(Rational::zero);
            x + y
        })
        .collect()
}

fn series_mul(a: &[Rational], b: &[Rational], keep: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); keep];
    for i in 0..a.len().min(keep) {
        if a[i].is_zero() {
            continue;
        }
        for j in 0..b.len().min(keep - i) {
            if !b[j].is_zero() {
                out[i + j] += &a[i] * &b[j];
            }
        }
    }
    out
}

/// Taylor coefficients of `(1 + u^2)^alpha` to `keep` terms.
fn binomial_series(alpha: Rational, keep: usize) -> Vec<Rational> {
    let mut s = vec![Rational::zero(); keep];
    let mut c = Rational::one();
    let mut k = 0usize;
    while 2 * k < keep {
        s[2 * k] = c.clone();
        let kk = rat(k as i64, 1);
        c = c * (alpha.clone() - kk) / rat(k as i64 + 1, 1);
        k += 1;
    }
    s
}

// ---- the hierarchy ----

/// Generate `Z_0 .. Z_n` exactly.
pub fn gb_terms(order: usize) -> Vec<BlochTerm> {
    let eps = rb_coefficients(order.saturating_sub(1).max(0)).eps;
    let mut z: Vec<BlochTerm> = vec![BlochTerm::classical_momentum()];
    for n in 1..=order {
        let mut rhs = z[n - 1].derivative();
        rhs = rhs.sub(&BlochTerm::constant(eps[n - 1].clone()));
        for k in 1..n {
            rhs = rhs.sub(&z[k].mul(&z[n - k]));
        }
        z.push(rhs.div_monomial(&rat(2, 1), 1, 1));
    }
    z
}

/// Series-fallback threshold for evaluation near the removable
/// singularity at the origin.
pub const SERIES_FALLBACK_U: f64 = 1e-4;
const SERIES_TERMS: usize = 24;

/// Evaluate the truncated sum `sum_n l^(2n) Z_n(u)`.
///
/// Close to the origin the closed forms are 0/0; below
/// [`SERIES_FALLBACK_U`] (and, for accuracy, well before the terms lose
/// digits to cancellation) the exact Taylor expansion is used instead.
pub fn gb_eval(terms: &[BlochTerm], lambda: f64, u: f64) -> Result<f64, BlochError> {
    let l2 = lambda * lambda;
    let mut acc = 0.0;
    let mut pw = 1.0;
    for (n, z) in terms.iter().enumerate() {
        // direct evaluation of Z_n loses ~4n digits near u = 0 to
        // cancellation in the numerator; widen the series region with n.
        let threshold = SERIES_FALLBACK_U.max(0.05 * n as f64).min(0.45);
        let v = if u.abs() <= threshold {
            if u == 0.0 {
                // odd functions vanish at the origin, but an actual pole
                // must still be reported
                if z.finite_at_zero() {
                    0.0
                } else {
                    return Err(BlochError::DegenerateInput { u });
                }
            } else {
                z.eval_series(u, SERIES_TERMS + 4 * n)?
            }
        } else {
            z.eval_direct(u)
        };
        acc += pw * v;
        pw *= l2;
    }
    Ok(acc)
}

/// The three closed-form phase terms valid at large distance:
/// `(1/3g^2)(1+g^2x^2)^(3/2) + (1/4)log(1+g^2x^2)
///  + (2n+p+1/2) log[1 + (1+g^2x^2)^(1/2)]`.
pub fn phase_leading(x: f64, g: f64, n: u32, p: u8) -> f64 {
    assert!(g > 0.0, "phase expansion requires g > 0");
    let z = 1.0 + g * g * x * x;
    let nu = 2.0 * n as f64 + p as f64 + 0.5;
    z.powf(1.5) / (3.0 * g * g) + 0.25 * z.ln() + nu * (1.0 + z.sqrt()).ln()
}

/// Universal large-distance growth
/// `g x^2 |x| / 3 + |x|/(2g) + (n + p/2 + 1/2) log(x^2)`.
pub fn large_x_asymptote(x: f64, g: f64, n: u32, p: u8) -> f64 {
    let ax = x.abs();
    g * x * x * ax / 3.0 + ax / (2.0 * g) + (n as f64 + p as f64 / 2.0 + 0.5) * (x * x).ln()
}

/// Phase expansion bookkeeping for one state.
#[derive(Clone, Debug)]
pub struct PhaseExpansion {
    pub n: u32,
    pub p: u8,
    pub g: f64,
}

impl PhaseExpansion {
    pub fn new(n: u32, p: u8, g: f64) -> PhaseExpansion {
        assert!(g > 0.0);
        PhaseExpansion { n, p, g }
    }

    /// The three closed-form terms at `x`.
    pub fn leading(&self, x: f64) -> f64 {
        phase_leading(x, self.g, self.n, self.p)
    }

    /// Numerically integrated higher semiclassical terms
    /// `(1/g^2) sum_{m=2}^{m_max} l^(2m) int_0^{gx} Z_m du` (ground state;
    /// `l = g` at `hbar = 1`). Composite Simpson is plenty: the integrand
    /// is smooth and the result is a small correction.
    pub fn higher_terms(&self, x: f64, m_max: usize) -> Result<f64, BlochError> {
        assert_eq!((self.n, self.p), (0, 0), "higher phase terms implemented for the ground state");
        if m_max < 2 {
            return Ok(0.0);
        }
        let terms = gb_terms(m_max);
        let g = self.g;
        let upper = g * x;
        let steps = 256;
        let h = upper / steps as f64;
        let mut acc = 0.0;
        for m in 2..=m_max {
            let l2m = (g * g).powi(m as i32);
            let z = &terms[m];
            let f = |u: f64| -> Result<f64, BlochError> {
                let threshold = SERIES_FALLBACK_U.max(0.05 * m as f64).min(0.45);
                if u.abs() <= threshold {
                    if u == 0.0 {
                        Ok(0.0)
                    } else {
                        z.eval_series(u, SERIES_TERMS + 4 * m)
                    }
                } else {
                    Ok(z.eval_direct(u))
                }
            };
            let mut s = f(0.0)? + f(upper)?;
            for i in 1..steps {
                let u = i as f64 * h;
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(u)?;
            }
            acc += l2m * s * h / 3.0;
        }
        Ok(acc / (g * g))
    }
}

/// Exact power-series coefficients (in `lambda`) of the re-expansion
/// difference `sum_n l^(2n) Z_n(l v)/l  -  sum_n l^(2n) Y_n(v)` at fixed
/// rational `v`, through `lambda^max_power`. The first `2n_max` orders
/// cancel identically; the leading survivor sits at `lambda^(2n_max+2)`.
pub fn reexpansion_coefficients(n_max: usize, v: &Rational, max_power: usize) -> Vec<Rational> {
    let z = gb_terms(n_max);
    let y = rb_coefficients(n_max);
    let mut out = vec![Rational::zero(); max_power + 1];
    let mut vpow: Vec<Rational> = Vec::with_capacity(max_power + 2);
    let mut acc = Rational::one();
    for _ in 0..=max_power + 1 {
        vpow.push(acc.clone());
        acc *= v;
    }
    for (n, zn) in z.iter().enumerate() {
        let (min_pow, coeffs) = zn.laurent_at_zero(max_power + 2);
        for (k, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let pw = min_pow + k as i64;
            debug_assert!(pw >= 0, "ground-state terms are finite at the origin");
            let upow = pw as usize;
            if 2 * n + upow == 0 {
                continue;
            }
            // l^(2n) * (l v)^upow / l contributes at l^(2n + upow - 1)
            let lp = 2 * n + upow - 1;
            if lp <= max_power {
                out[lp] += c * &vpow[upow];
            }
        }
    }
    for (n, yn) in y.y_terms.iter().enumerate() {
        let lp = 2 * n;
        if lp > max_power {
            continue;
        }
        for (k, c) in yn.coeffs.iter().enumerate() {
            out[lp] -= c * &vpow[2 * k + 1];
        }
    }
    out
}

/// Exact value of the re-expansion difference at rational `lambda`, `v`
/// (used for슬 slope fits far below f64 cancellation limits). Taylor
/// truncation is pushed far beyond the target resolution.
pub fn reexpansion_difference(n_max: usize, v: &Rational, lambda: &Rational) -> Rational {
    let z = gb_terms(n_max);
    let y = rb_coefficients(n_max);
    let u = lambda * v;
    let terms = 140;
    let mut total = Rational::zero();
    let l2 = lambda * lambda;
    let mut lpow = Rational::one() / lambda; // l^(2n - 1)
    for zn in z.iter() {
        let (min_pow, coeffs) = zn.laurent_at_zero(terms);
        let skip = (-min_pow).max(0) as usize;
        let mut val = Rational::zero();
        let mut up = power(&u, (min_pow + skip as i64) as usize);
        for c in coeffs.iter().skip(skip) {
            if !c.is_zero() {
                val += c * &up;
            }
            up *= &u;
        }
        total += val * &lpow;
        lpow *= &l2;
    }
    let mut lpow = Rational::one();
    for yn in y.y_terms.iter() {
        let mut val = Rational::zero();
        let mut vp = v.clone();
        for c in yn.coeffs.iter() {
            val += c * &vp;
            vp *= v * v;
        }
        total -= val * &lpow;
        lpow *= &l2;
    }
    total
}

fn power(x: &Rational, k: usize) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..k {
        acc *= x;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> Rational {
        rat(1, 2)
    }

    #[test]
    fn z0_is_classical_momentum() {
        let z = gb_terms(0);
        // Z_0^2 = u^2 + u^4 exactly
        let sq = z[0].mul(&z[0]);
        let expect = BlochTerm {
            p: vec![Rational::zero(), Rational::zero(), Rational::one(), Rational::zero(), Rational::one()],
            q: vec![],
            u_pole: 0,
            w_pole: 0,
        };
        assert!(sq.equals(&expect));
    }

    #[test]
    fn z1_closed_form() {
        // Z_1 = (1 + 2u^2 - w) / (2 u w^2)
        let z = gb_terms(1);
        let expect = BlochTerm {
            p: vec![half(), Rational::zero(), Rational::one()],
            q: vec![-half()],
            u_pole: 1,
            w_pole: 2,
        };
        assert!(z[1].equals(&expect), "Z1 = {:?}", z[1]);
    }

    #[test]
    fn z2_closed_form_hand_derived() {
        // 2 Z0 Z2 = Z1' - eps_1 - Z1^2 worked through by hand:
        // Z2 = (-4 - 10u^2 - 14u^4 - 3u^6 + (4 + 8u^2) w) / (8 u^3 w^5),
        // cross-checked numerically at u=1 against the recursion.
        let z = gb_terms(2);
        let expect = BlochTerm {
            p: vec![rat(-1, 2), Rational::zero(), rat(-5, 4), Rational::zero(), rat(-7, 4), Rational::zero(), rat(-3, 8)],
            q: vec![half(), Rational::zero(), Rational::one()],
            u_pole: 3,
            w_pole: 5,
        };
        assert!(z[2].equals(&expect), "Z2 = {:?}", z[2]);
    }

    #[test]
    fn recursion_relations_hold_in_ring() {
        let n_max = 6;
        let z = gb_terms(n_max);
        let eps = rb_coefficients(n_max).eps;
        for n in 1..=n_max {
            let mut rhs = z[n - 1].derivative();
            rhs = rhs.sub(&BlochTerm::constant(eps[n - 1].clone()));
            for k in 1..n {
                rhs = rhs.sub(&z[k].mul(&z[n - k]));
            }
            let lhs = BlochTerm::constant(rat(2, 1)).mul(&z[0]).mul(&z[n]);
            assert!(lhs.equals(&rhs), "order {n} relation violated");
        }
    }

    #[test]
    fn z1_small_u_slope() {
        // Z_1 -> (3/4) u, matching the lambda^2, v^1 coefficient of the
        // perturbative series
        let z = gb_terms(1);
        let (min_pow, c) = z[1].laurent_at_zero(6);
        let idx = (1 - min_pow) as usize;
        assert_eq!(c[idx], rat(3, 4));
        // no actual pole: everything below u^1 vanishes
        for (k, ck) in c.iter().enumerate().take(idx) {
            assert!(ck.is_zero(), "unexpected u^{} term", min_pow + k as i64);
        }
    }

    #[test]
    fn z2_finite_at_origin_with_linear_slope() {
        let z = gb_terms(2);
        assert!(z[2].finite_at_zero());
        let v = gb_eval(&z[..3], 0.0, 0.0).unwrap();
        assert_eq!(v, 0.0);
        // O(u) behavior near the origin; slope equals eps_2 = -21/16
        let u = 1e-6;
        let val = z[2].eval_series(u, 16).unwrap();
        assert!((val / u + 21.0 / 16.0).abs() < 1e-9, "val={val}");
    }

    #[test]
    fn eval_closed_points() {
        let z = gb_terms(1);
        let v0 = gb_eval(&z[..1], 0.7, 1.0).unwrap();
        assert!((v0 - 2f64.sqrt()).abs() < 1e-15);
        let v1 = gb_eval(&z, 1.0, 1.0).unwrap();
        let expect = 2f64.sqrt() + (3.0 - 2f64.sqrt()) / 4.0;
        assert!((v1 - expect).abs() < 1e-15);
        let v2 = gb_eval(&z, 0.5, 0.0).unwrap();
        assert_eq!(v2, 0.0);
    }

    #[test]
    fn series_and_direct_agree_mid_range() {
        let z = gb_terms(4);
        for n in 1..=4 {
            let u = 0.46;
            let a = z[n].eval_direct(u);
            let b = z[n].eval_series(u, 90).unwrap();
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "Z_{n}: {a} vs {b}");
        }
    }

    #[test]
    fn no_new_logs_beyond_first_order() {
        let z = gb_terms(6);
        // Z_1 is the log generator: unit residue at infinity
        assert_eq!(z[1].residue_at_infinity(), Rational::one());
        for n in 2..=6 {
            assert!(z[n].finite_at_zero(), "Z_{n} singular at origin");
            assert!(z[n].residue_at_zero().is_zero());
            assert!(z[n].residue_at_infinity().is_zero(), "Z_{n} grows a log at infinity");
        }
    }

    #[test]
    fn phase_leading_closed_values() {
        let v = phase_leading(0.0, 1.0, 0, 0);
        assert!((v - (1.0 / 3.0 + 0.5 * 2f64.ln())).abs() < 1e-15);
        let v = phase_leading(0.0, 2.0, 1, 1);
        assert!((v - (1.0 / 12.0 + 3.5 * 2f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn asymptote_closed_values_and_parity() {
        let v = large_x_asymptote(1.0, 1.0, 0, 0);
        assert!((v - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(
            large_x_asymptote(3.7, 1.3, 2, 1),
            large_x_asymptote(-3.7, 1.3, 2, 1)
        );
    }

    #[test]
    fn phase_approaches_asymptote() {
        // difference tends to a constant at rate O(1/x): the drift over
        // [x, 2x] is ~ (nu/g + 1/(8g^3)) / (2x) and halves with x
        let d = |x: f64| phase_leading(x, 1.0, 0, 0) - large_x_asymptote(x, 1.0, 0, 0);
        let d1 = (d(100.0) - d(50.0)).abs();
        let d2 = (d(200.0) - d(100.0)).abs();
        assert!(d2 < d1 && d1 < 1e-2, "d1={d1} d2={d2}");
        assert!((d2 / d1 - 0.5).abs() < 0.05);
    }

    #[test]
    fn reexpansion_cancels_through_order_2n() {
        let v = half();
        let n_max = 3;
        let c = reexpansion_coefficients(n_max, &v, 2 * n_max + 2);
        for (m, cm) in c.iter().enumerate().take(2 * n_max + 1) {
            assert!(cm.is_zero(), "lambda^{m} coefficient {} nonzero", cm);
        }
        assert!(!c[2 * n_max + 2].is_zero());
    }

    #[test]
    fn reexpansion_difference_matches_leading_coefficient() {
        let v = Rational::one();
        let n_max = 2;
        let c = reexpansion_coefficients(n_max, &v, 2 * n_max + 4);
        let lam = rat(1, 100);
        let d = reexpansion_difference(n_max, &v, &lam);
        let lead = &c[2 * n_max + 2] * power(&lam, 2 * n_max + 2);
        let ratio = (d.clone() / lead).to_f64().unwrap();
        assert!((ratio - 1.0).abs() < 1e-3, "ratio {ratio}");
    }

    #[test]
    fn export_schema_fields() {
        let z = gb_terms(1);
        let e = z[1].export();
        let j = serde_json::to_string(&e).unwrap();
        assert!(j.contains("\"u_pole\":1") && j.contains("\"w_pole\":2"), "{j}");
    }
}
