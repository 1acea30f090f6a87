//! Radial quartic anharmonic oscillator `V(r) = r^2 + g^2 r^4` in `D`
//! dimensions: the matched approximant
//!
//! ```text
//!            r^l P_{n_r}(r^2)
//! Psi = ----------------------------------------------
//!       (B^2+g^2r^2)^(1/4) (B + sqrt(B^2+g^2r^2))^(2n_r+l+D/2)
//!
//!       * exp( -[A + (B^2+3)r^2/6 + g^2r^4/3]/sqrt(B^2+g^2r^2) + A/B )
//! ```
//!
//! and its variational optimization. Energies are computed for the
//! reduced function `Phi = Psi / r^l` against the measure `r^(D'-1) dr`
//! with `D' = D + 2l`, which removes both the first-derivative term and
//! the centrifugal singularity (for `D = 2`, `l = 0` the naive reduced
//! form has an attractive `-1/(4r^2)` whose kinetic/centrifugal pieces
//! diverge separately).

use crate::approximant::ab_interpolation;
use crate::dual::Dual2;
use crate::optim::{nelder_mead_restarts, NelderMeadOptions};
use crate::quadrature::{half_line_rule, Accumulator, QuadError, QuadratureSpec};
use crate::variational::VarError;
use serde::{Deserialize, Serialize};

/// Parameters of the radial approximant.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialParams {
    pub d: u32,
    pub n_r: u32,
    pub ell: u32,
    pub g2: f64,
    pub a: f64,
    pub b: f64,
    /// `a_2, a_4, ...` of `P_{n_r}` in the alternating-sign convention.
    pub node_poly: Vec<f64>,
}

impl RadialParams {
    pub fn new(d: u32, n_r: u32, ell: u32, g2: f64, a: f64, b: f64) -> RadialParams {
        RadialParams { d, n_r, ell, g2, a, b, node_poly: vec![0.0; n_r as usize] }
    }

    /// Denominator exponent `2 n_r + l + D/2`.
    pub fn nu(&self) -> f64 {
        2.0 * self.n_r as f64 + self.ell as f64 + self.d as f64 / 2.0
    }
}

/// Evaluator for the radial approximant.
pub struct RadialApproximant {
    pub params: RadialParams,
}

impl RadialApproximant {
    pub fn new(params: RadialParams) -> Result<RadialApproximant, VarError> {
        if !(params.b > 0.0) || !(params.g2 > 0.0) {
            return Err(crate::approximant::ApproximantError::InvalidParams(format!(
                "need B > 0 and g^2 > 0, got B = {}, g^2 = {}",
                params.b, params.g2
            ))
            .into());
        }
        Ok(RadialApproximant { params })
    }

    fn node_poly_jet(&self, z: Dual2) -> Dual2 {
        let mut acc = Dual2::con(0.0);
        for (k, a) in self.params.node_poly.iter().enumerate().rev() {
            let sign = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
            acc = (acc + sign * *a) * z;
        }
        acc + 1.0
    }

    /// Smooth envelope jet: `log(Psi / (r^l P(r^2)))` (same stable
    /// `A`-term assembly as the one-dimensional approximant).
    pub fn envelope_jet(&self, r: f64) -> Dual2 {
        let pr = &self.params;
        let rd = Dual2::var(r);
        let z = rd * rd;
        let t = (z * pr.g2 + pr.b * pr.b).sqrt();
        let rr = z * ((pr.b * pr.b + 3.0) / 6.0) + z * z * (pr.g2 / 3.0);
        let a_term = (z * (pr.g2 * pr.a / pr.b)) / (t * (t + pr.b));
        -(z * pr.g2 + pr.b * pr.b).ln() * 0.25 - (t + pr.b).ln() * pr.nu() + a_term - rr / t
    }

    /// `log Psi(r)` for `r > 0` away from nodes.
    pub fn log_psi(&self, r: f64) -> f64 {
        let rd = Dual2::var(r);
        let poly = self.node_poly_jet(rd * rd);
        self.envelope_jet(r).v + poly.v.abs().ln() + self.params.ell as f64 * r.abs().ln()
    }

    /// `(Phi, Phi') e^{-shift}` with `Phi = Psi / r^l` smooth at the
    /// origin.
    pub fn phi_jet_scaled(&self, r: f64, shift: f64) -> (f64, f64) {
        let rd = Dual2::var(r);
        let q = self.node_poly_jet(rd * rd);
        let env = self.envelope_jet(r);
        let w = (env.v - shift).exp();
        if w == 0.0 || !w.is_finite() {
            return (0.0, 0.0);
        }
        (q.v * w, (q.d1 + q.v * env.d1) * w)
    }
}

/// Rayleigh quotient of the reduced radial problem at one resolution.
pub fn radial_rayleigh(apx: &RadialApproximant, points: usize, scale: f64) -> f64 {
    let pr = &apx.params;
    let d_eff = (pr.d + 2 * pr.ell) as f64;
    let g2 = pr.g2;
    let rule = half_line_rule(points, scale);
    let lmax = rule
        .iter()
        .map(|&(r, _)| apx.envelope_jet(r).v)
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut num = Accumulator::default();
    let mut den = Accumulator::default();
    for (r, w) in rule {
        let (phi, dphi) = apx.phi_jet_scaled(r, lmax);
        if phi == 0.0 && dphi == 0.0 {
            continue;
        }
        let meas = w * r.powf(d_eff - 1.0);
        let v = r * r + g2 * r * r * r * r;
        num.add(meas * (dphi * dphi + v * phi * phi));
        den.add(meas * phi * phi);
    }
    num.value() / den.value()
}

/// Radial expectation energy with the point-doubling gate.
pub fn radial_expectation_energy(
    params: &RadialParams,
    quad: &QuadratureSpec,
) -> Result<f64, VarError> {
    let apx = RadialApproximant::new(params.clone())?;
    let scale = quad.scale_for(params.b);
    let e1 = radial_rayleigh(&apx, quad.points, scale);
    let e2 = radial_rayleigh(&apx, quad.points * 2, scale);
    if (e1 - e2).abs() > quad.rel_tol * e2.abs() {
        return Err(QuadError::NotConverged {
            points: quad.points,
            points2: quad.points * 2,
            delta: (e1 - e2).abs(),
            tol: quad.rel_tol,
        }
        .into());
    }
    Ok(e2)
}

/// Variational ground-state optimization (`n_r = 0`) of the radial
/// approximant. Excited radial states are deliberately out of scope.
pub fn optimize_radial(
    d: u32,
    n_r: u32,
    ell: u32,
    g2: f64,
    quad: &QuadratureSpec,
    seed: u64,
) -> Result<RadialVariationalResult, VarError> {
    if n_r != 0 {
        return Err(crate::approximant::ApproximantError::InvalidParams(
            "radial excited states (n_r >= 1) are not supported".into(),
        )
        .into());
    }
    // initial guess reuses the one-dimensional interpolation at N = 2n_r + l
    let (a0, b0) = ab_interpolation(g2, n_r, (ell % 2) as u8);
    let objective = |q: &[f64]| -> f64 {
        if q[1] <= 0.0 {
            return f64::INFINITY;
        }
        let params = RadialParams::new(d, n_r, ell, g2, q[0], q[1]);
        match RadialApproximant::new(params) {
            Ok(apx) => radial_rayleigh(&apx, quad.points, quad.scale_for(q[1])),
            Err(_) => f64::INFINITY,
        }
    };
    let steps = [0.1 * a0.abs().max(0.3), 0.1 * b0.abs().max(0.3)];
    let run = nelder_mead_restarts(objective, &[a0, b0], &steps, 3, seed, NelderMeadOptions::default());
    if !run.converged {
        return Err(VarError::OptimizerStalled { spread: f64::NAN });
    }
    let params = RadialParams::new(d, n_r, ell, g2, run.x[0], run.x[1]);
    let e_var = radial_expectation_energy(&params, quad)?;
    Ok(RadialVariationalResult { params, e_var })
}

#[derive(Clone, Debug, Serialize)]
pub struct RadialVariationalResult {
    pub params: RadialParams,
    pub e_var: f64,
}

/// One row of the ground-state table grid.
#[derive(Clone, Debug, Serialize)]
pub struct TableRow {
    pub d: u32,
    pub g2: f64,
    pub e_var: f64,
    pub e_mesh: f64,
    pub rel_deviation: f64,
}

/// The `D in {1,2,3,6} x g^2 in {0.1,1,10}` ground-state grid with
/// oracle deviations. `D = 1` runs through the one-dimensional pipeline.
pub fn table1(quad: &QuadratureSpec, seed: u64, mesh_points: usize) -> Result<Vec<TableRow>, String> {
    let mut rows = Vec::new();
    for &d in &[1u32, 2, 3, 6] {
        for &g2 in &[0.1f64, 1.0, 10.0] {
            let e_var = if d == 1 {
                let mut cache = crate::variational::StateCache::new(*quad, seed);
                cache.solve(0, 0, g2).map_err(|e| e.to_string())?.e_var
            } else {
                optimize_radial(d, 0, 0, g2, quad, seed).map_err(|e| e.to_string())?.e_var
            };
            let e_mesh = crate::mesh::radial_mesh_energy(d, 0, g2, mesh_points, 0)
                .map_err(|e| e.to_string())?
                .energy;
            rows.push(TableRow { d, g2, e_var, e_mesh, rel_deviation: (e_var - e_mesh) / e_mesh });
        }
    }
    Ok(rows)
}

/// Printed reference values (as strings, to preserve the digit counts)
/// for the ground-state table; the last printed digit defines the
/// comparison unit.
pub const TABLE1_PRINTED: [(u32, f64, &str); 12] = [
    (1, 0.1, "1.06528550954"),
    (1, 1.0, "1.392351642"),
    (1, 10.0, "2.44917407"),
    (2, 0.1, "2.1685972113"),
    (2, 1.0, "2.952050092"),
    (2, 10.0, "5.34935282"),
    (3, 0.1, "3.3068720132"),
    (3, 1.0, "4.648812704"),
    (3, 10.0, "8.59900346"),
    (6, 0.1, "6.9083321112"),
    (6, 1.0, "10.390627296"),
    (6, 10.0, "19.9369004"),
];

/// Unit in the last printed decimal of a reference string.
pub fn printed_unit(printed: &str) -> f64 {
    let decimals = printed.len() - printed.find('.').map(|i| i + 1).unwrap_or(printed.len());
    10f64.powi(-(decimals as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::radial_mesh_energy;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn exponent_identity_with_line_form() {
        // D=1, l=p: 2n_r + l + D/2 == 2n + p + 1/2
        let r = RadialParams::new(1, 2, 1, 1.0, 0.0, 1.0);
        assert_eq!(r.nu(), 2.0 * 2.0 + 1.0 + 0.5);
    }

    #[test]
    fn log_psi_matches_line_approximant_at_d1() {
        let rp = RadialParams::new(1, 0, 1, 2.0, -0.4, 1.8);
        let ra = RadialApproximant::new(rp).unwrap();
        let lp = ApproximantParams::new(0, 1, 2.0, -0.4, 1.8);
        let la = crate::approximant::Approximant::new(lp).unwrap();
        for x in [0.3, 1.0, 2.4] {
            let a = ra.log_psi(x);
            let b = la.log_psi(x).unwrap();
            assert!((a - b).abs() < 1e-13, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn harmonic_limit_radial_gaussian() {
        let g2 = 1e-10;
        let rp = RadialParams::new(3, 0, 2, g2, 1.0 / (3.0 * g2), 1.0);
        let ra = RadialApproximant::new(rp).unwrap();
        let c = ra.log_psi(1.0) + 0.5 - 2.0 * 1.0f64.ln();
        for r in [0.5, 1.5, 3.0] {
            let v = ra.log_psi(r) - c;
            let expect = 2.0 * r.ln() - r * r / 2.0;
            assert!((v - expect).abs() < 1e-6, "r={r}: {v} vs {expect}");
        }
    }

    #[test]
    fn finite_at_origin_without_centrifugal_blowup() {
        let rp = RadialParams::new(3, 0, 0, 1.0, 0.0, 1.0);
        let ra = RadialApproximant::new(rp).unwrap();
        assert!(ra.log_psi(1e-12).is_finite());
        let (phi, dphi) = ra.phi_jet_scaled(0.0, 0.0);
        assert!(phi.is_finite() && dphi.is_finite());
    }

    #[test]
    fn ground_state_table_column_d2() {
        let r = optimize_radial(2, 0, 0, 1.0, &quad(), 7).unwrap();
        assert!((r.e_var - 2.952050092).abs() < 3e-9, "E = {}", r.e_var);
    }

    #[test]
    fn ground_state_table_column_d6() {
        let r = optimize_radial(6, 0, 0, 10.0, &quad(), 7).unwrap();
        assert!((r.e_var - 19.9369004).abs() < 3e-7, "E = {}", r.e_var);
    }

    #[test]
    fn d3_weak_coupling() {
        let r = optimize_radial(3, 0, 0, 0.1, &quad(), 7).unwrap();
        let mesh = radial_mesh_energy(3, 0, 0.1, 90, 0).unwrap().energy;
        assert!(((r.e_var - mesh) / mesh).abs() < 1e-8, "rel {:e}", (r.e_var - mesh) / mesh);
    }

    #[test]
    fn d1_reduction_matches_line_pipeline() {
        let mut cache = crate::variational::StateCache::new(quad(), 7);
        let line = cache.solve(0, 0, 1.0).unwrap().e_var;
        let rad = optimize_radial(1, 0, 0, 1.0, &quad(), 7).unwrap().e_var;
        assert!((line - rad).abs() < 1e-10 * line, "{line} vs {rad}");
    }

    #[test]
    fn monotonic_in_dimension() {
        let mut prev = 0.0;
        for d in [1u32, 2, 3, 6] {
            let e = optimize_radial(d, 0, 0, 1.0, &quad(), 7).unwrap().e_var;
            assert!(e > prev, "D={d}: {e} not increasing");
            prev = e;
        }
    }

    #[test]
    fn excited_radial_rejected() {
        assert!(optimize_radial(3, 1, 0, 1.0, &quad(), 7).is_err());
    }

    #[test]
    fn printed_unit_parses() {
        assert_eq!(printed_unit("1.06528550954"), 1e-11);
        assert_eq!(printed_unit("19.9369004"), 1e-7);
    }
}
