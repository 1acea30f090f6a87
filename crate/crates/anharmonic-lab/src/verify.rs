//! Acceptance suite: every claimed accuracy, checked against the mesh
//! oracle and the exact engines, one pass/fail line per criterion.
//!
//! The same code backs the `verify` CLI subcommand and the `acceptance`
//! integration test target.

use crate::approximant::{
    harmonic_node_coeffs, strong_coupling_node_fit, Approximant,
    ApproximantParams, FitTables,
};
use crate::bloch::reexpansion_difference;
use crate::dd::Dd;
use crate::mesh::{mesh_energy, radial_mesh_energy, MeshConfig, PURE_QUARTIC_GROUND};
use crate::quadrature::QuadratureSpec;
use crate::radial::{optimize_radial, printed_unit, TABLE1_PRINTED};
use crate::series::{rb_coefficients, Rational};
use crate::tolerances as tol;
use crate::variational::{expectation_energy, StateCache};
use crate::variational::VariationalResult;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub details: String,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2}: {} — {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.details
        )
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub quad: QuadratureSpec,
    pub seed: u64,
    pub mesh_points: usize,
    pub threads: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { quad: QuadratureSpec::default(), seed: 0x5eed, mesh_points: 75, threads: 4 }
    }
}

/// One optimized case of the six-state grid.
#[derive(Clone, Debug)]
pub struct GridCase {
    pub n: u32,
    pub p: u8,
    pub g2: f64,
    pub result: VariationalResult,
    pub e_mesh: f64,
}

pub const GRID_COUPLINGS: [f64; 5] = [0.1, 1.0, 10.0, 20.0, 100.0];

/// Optimize the full 30-case grid (six states, five couplings), one
/// worker per coupling; same-parity states are solved in increasing `n`
/// inside each worker.
pub fn solve_grid(opts: &VerifyOptions) -> Result<Vec<GridCase>, String> {
    let threads = opts.threads.max(1);
    let mut out: Vec<Option<Vec<GridCase>>> = vec![None; GRID_COUPLINGS.len()];
    let n_workers = threads.min(GRID_COUPLINGS.len());
    let mut chunks: Vec<Vec<usize>> = vec![Vec::new(); n_workers];
    for i in 0..GRID_COUPLINGS.len() {
        chunks[i % n_workers].push(i);
    }
    let results: Vec<(usize, Result<Vec<GridCase>, String>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|chunk| {
                let opts = *opts;
                scope.spawn(move || {
                    let mut local = Vec::new();
                    for &gi in chunk {
                        let g2 = GRID_COUPLINGS[gi];
                        let mut cache = StateCache::new(opts.quad, opts.seed);
                        let mut cases = Vec::new();
                        for p in [0u8, 1] {
                            for n in 0..3u32 {
                                let r = match cache.solve(n, p, g2) {
                                    Ok(r) => r,
                                    Err(e) => {
                                        return vec![(gi, Err(format!("state ({n},{p}) g2={g2}: {e}")))]
                                    }
                                };
                                let k = (2 * n + p as u32) as usize;
                                let mut cfg = MeshConfig::one_dim(g2);
                                cfg.points = opts.mesh_points.max(75);
                                let mesh = match mesh_energy(&cfg, k) {
                                    Ok(m) => m,
                                    Err(e) => {
                                        return vec![(gi, Err(format!("mesh k={k} g2={g2}: {e}")))]
                                    }
                                };
                                cases.push(GridCase { n, p, g2, result: r, e_mesh: mesh.energy });
                            }
                        }
                        local.push((gi, Ok(cases)));
                    }
                    local
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("grid worker panicked")).collect()
    });
    for (gi, res) in results {
        out[gi] = Some(res?);
    }
    Ok(out.into_iter().flatten().flatten().collect())
}

fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

/// Criterion 1: exact low-order perturbation coefficients, plus the
/// mesh cross-validation of `eps_2`.
pub fn criterion_1(_opts: &VerifyOptions) -> CriterionReport {
    let t0 = Instant::now();
    let s = rb_coefficients(2);
    let exact = s.eps[0] == rat(1, 1)
        && s.eps[1] == rat(3, 4)
        && s.eps[2] == rat(-21, 16)
        && s.y_terms[1].coeffs == vec![rat(3, 4), rat(1, 2)];
    let elapsed = t0.elapsed();

    // eps_2 from mesh energies: remove the exact eps_0, eps_1 and
    // extrapolate f(t) = (eps(t) - 1 - 3t/4)/t^2 quadratically to t = 0
    let lambdas = [0.02f64, 0.04, 0.06];
    let mut ts = Vec::new();
    let mut fs = Vec::new();
    for &l in &lambdas {
        let g2 = l * l;
        let cfg = MeshConfig::one_dim(g2);
        let e = match mesh_energy(&cfg, 0) {
            Ok(m) => m.energy,
            Err(e) => {
                return CriterionReport {
                    id: 1,
                    name: "exact PT coefficients",
                    pass: false,
                    details: format!("mesh failure: {e}"),
                }
            }
        };
        // dd arithmetic: the subtraction cancels ~10 digits
        let t = Dd::prod(l, l);
        let resid = Dd::from_f64(e).sub(Dd::ONE).sub(t.mul_f64(0.75));
        ts.push(t.to_f64());
        fs.push(resid.div(t.mul(t)).to_f64());
    }
    // quadratic interpolation through three points, value at t = 0
    let (t0_, t1, t2) = (ts[0], ts[1], ts[2]);
    let c0 = fs[0] * (t1 * t2) / ((t0_ - t1) * (t0_ - t2))
        + fs[1] * (t0_ * t2) / ((t1 - t0_) * (t1 - t2))
        + fs[2] * (t0_ * t1) / ((t2 - t0_) * (t2 - t1));
    let fit_err = (c0 + 21.0 / 16.0).abs();
    let pass = exact && elapsed.as_secs_f64() < 1.0 && fit_err <= tol::EPS2_FIT_ABS;
    CriterionReport {
        id: 1,
        name: "exact PT coefficients",
        pass,
        details: format!(
            "eps = [1, 3/4, -21/16] exact: {exact}; runtime {:.3}s; |eps2_fit - eps2| = {fit_err:.2e} (tol {:.0e})",
            elapsed.as_secs_f64(),
            tol::EPS2_FIT_ABS
        ),
    }
}

/// Criterion 2: all twelve printed table entries within one unit in the
/// last printed digit.
pub fn criterion_2(_opts: &VerifyOptions) -> CriterionReport {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_entry = String::new();
    for (d, g2, printed) in TABLE1_PRINTED {
        let r = match radial_mesh_energy(d, 0, g2, 90, 0) {
            Ok(r) => r,
            Err(e) => {
                return CriterionReport {
                    id: 2,
                    name: "mesh oracle vs printed table",
                    pass: false,
                    details: format!("D={d} g2={g2}: {e}"),
                }
            }
        };
        let reference: f64 = printed.parse().unwrap();
        let units = (r.energy - reference).abs() / printed_unit(printed);
        if units > worst {
            worst = units;
            worst_entry = format!("D={d}, g2={g2}");
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    let pass = worst <= tol::TABLE_LAST_DIGIT_UNITS && elapsed < 60.0;
    CriterionReport {
        id: 2,
        name: "mesh oracle vs printed table",
        pass,
        details: format!(
            "worst deviation {worst:.3} last-digit units ({worst_entry}); runtime {elapsed:.2}s"
        ),
    }
}

/// Criterion 3: thirty-case variational grid at 1e-8 relative.
pub fn criterion_3(grid: &[GridCase]) -> CriterionReport {
    let mut worst = 0.0f64;
    let mut worst_case = String::new();
    for c in grid {
        let rel = ((c.result.e_var - c.e_mesh) / c.e_mesh).abs();
        if rel > worst {
            worst = rel;
            worst_case = format!("({},{}) g2={}", c.n, c.p, c.g2);
        }
    }
    CriterionReport {
        id: 3,
        name: "variational accuracy, 1-D grid",
        pass: worst <= tol::VARIATIONAL_REL && grid.len() == 30,
        details: format!(
            "{} cases; worst |E_var - E_mesh|/E = {worst:.2e} at {worst_case} (tol {:.0e})",
            grid.len(),
            tol::VARIATIONAL_REL
        ),
    }
}

/// Criterion 4: radial ground states against the oracle.
pub fn criterion_4(opts: &VerifyOptions) -> CriterionReport {
    let mut worst = 0.0f64;
    let mut worst_case = String::new();
    for &d in &[2u32, 3, 6] {
        for &g2 in &[0.1f64, 1.0, 10.0] {
            let var = match optimize_radial(d, 0, 0, g2, &opts.quad, opts.seed) {
                Ok(v) => v.e_var,
                Err(e) => {
                    return CriterionReport {
                        id: 4,
                        name: "variational accuracy, radial",
                        pass: false,
                        details: format!("D={d} g2={g2}: {e}"),
                    }
                }
            };
            let mesh = match radial_mesh_energy(d, 0, g2, 90, 0) {
                Ok(m) => m.energy,
                Err(e) => {
                    return CriterionReport {
                        id: 4,
                        name: "variational accuracy, radial",
                        pass: false,
                        details: format!("mesh D={d} g2={g2}: {e}"),
                    }
                }
            };
            let rel = ((var - mesh) / mesh).abs();
            if rel > worst {
                worst = rel;
                worst_case = format!("D={d}, g2={g2}");
            }
        }
    }
    CriterionReport {
        id: 4,
        name: "variational accuracy, radial",
        pass: worst <= tol::VARIATIONAL_REL,
        details: format!("worst rel {worst:.2e} at {worst_case} (tol {:.0e})", tol::VARIATIONAL_REL),
    }
}

/// Criterion 5: nonlinearization corrections over the grid.
pub fn criterion_5(grid: &[GridCase]) -> CriterionReport {
    let mut phi_worst = 0.0f64;
    let mut e2_positive = 0usize;
    let mut improved = 0usize;
    for c in grid {
        phi_worst = phi_worst.max(c.result.phi1_sup);
        if c.result.e2 > 0.0 {
            e2_positive += 1;
        }
        let before = (c.result.e_var - c.e_mesh).abs();
        let after = (c.result.e_var + c.result.e2 + c.result.e3 - c.e_mesh).abs();
        if after < before {
            improved += 1;
        }
    }
    let phi_ok = phi_worst <= tol::PHI1_SUP;
    let pass = phi_ok && e2_positive == 0 && improved >= 28;
    CriterionReport {
        id: 5,
        name: "nonlinearization corrections",
        pass,
        details: format!(
            "sup|phi1| = {phi_worst:.2e} (tol {:.0e}); E2 <= 0 in {}/{}; corrections improved {improved}/{} (need >= 28)",
            tol::PHI1_SUP,
            grid.len() - e2_positive,
            grid.len(),
            grid.len()
        ),
    }
}

/// Criterion 6: printed ground-state interpolants without optimization.
pub fn criterion_6(opts: &VerifyOptions) -> CriterionReport {
    let mut worst = 0.0f64;
    for &g2 in &[0.1f64, 1.0, 10.0, 100.0] {
        let (a, b) = FitTables::ground_state_ab(g2);
        let params = ApproximantParams::new(0, 0, g2, a, b);
        let e = match expectation_energy(&params, &opts.quad) {
            Ok(e) => e,
            Err(e) => {
                return CriterionReport {
                    id: 6,
                    name: "printed interpolants",
                    pass: false,
                    details: format!("g2={g2}: {e}"),
                }
            }
        };
        let mesh = match mesh_energy(&MeshConfig::one_dim(g2), 0) {
            Ok(m) => m.energy,
            Err(e) => {
                return CriterionReport {
                    id: 6,
                    name: "printed interpolants",
                    pass: false,
                    details: format!("mesh g2={g2}: {e}"),
                }
            }
        };
        worst = worst.max(((e - mesh) / mesh).abs());
    }
    CriterionReport {
        id: 6,
        name: "printed interpolants",
        pass: worst <= tol::PRINTED_INTERPOLANT_REL,
        details: format!("worst rel deviation {worst:.2e} (tol {:.0e})", tol::PRINTED_INTERPOLANT_REL),
    }
}

/// Criterion 7: truncated series vs oracle scaling `~ lambda^14`.
pub fn criterion_7(_opts: &VerifyOptions) -> CriterionReport {
    let series = rb_coefficients(6);
    let eps_dd: Vec<Dd> = series
        .eps
        .iter()
        .map(|r| {
            Dd::from_f64(r.numer().to_f64().unwrap()).div(Dd::from_f64(r.denom().to_f64().unwrap()))
        })
        .collect();
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for &l in &[0.03f64, 0.05, 0.08] {
        let g2 = l * l;
        let mesh = match mesh_energy(&MeshConfig::one_dim(g2), 0) {
            Ok(m) => m,
            Err(e) => {
                return CriterionReport {
                    id: 7,
                    name: "series/oracle consistency",
                    pass: false,
                    details: format!("mesh g2={g2}: {e}"),
                }
            }
        };
        let t = Dd::prod(l, l);
        let mut sum = Dd::ZERO;
        for c in eps_dd.iter().rev() {
            sum = sum.mul(t).add(*c);
        }
        let diff = sum.sub(Dd::from_f64(mesh.energy)).abs().to_f64();
        lx.push(l.ln());
        ly.push(diff.ln());
    }
    let slope = least_squares_slope(&lx, &ly);
    let (lo, hi) = tol::SERIES_SLOPE;
    CriterionReport {
        id: 7,
        name: "series/oracle consistency",
        pass: slope >= lo && slope <= hi,
        details: format!("fitted truncation exponent {slope:.2} (expect 14 +- 1)"),
    }
}

/// Criterion 8: RB/GB re-expansion discrepancy scaling `~ lambda^(2N+2)`.
pub fn criterion_8(_opts: &VerifyOptions) -> CriterionReport {
    let n_max = 3;
    let lambdas = [rat(1, 1000), rat(1, 320), rat(1, 100), rat(1, 32), rat(1, 10)];
    let mut all_ok = true;
    let mut details = Vec::new();
    for v in [rat(1, 2), rat(1, 1)] {
        let mut lx = Vec::new();
        let mut ly = Vec::new();
        for lam in &lambdas {
            let d = reexpansion_difference(n_max, &v, lam);
            let d_abs = d.to_f64().unwrap().abs();
            lx.push(lam.to_f64().unwrap().ln());
            ly.push(d_abs.ln());
        }
        let slope = least_squares_slope(&lx, &ly);
        let (lo, hi) = tol::REEXPANSION_SLOPE;
        if !(slope >= lo && slope <= hi) {
            all_ok = false;
        }
        details.push(format!("v={}: slope {slope:.3}", v.to_f64().unwrap()));
    }
    CriterionReport {
        id: 8,
        name: "RB/GB correspondence",
        pass: all_ok,
        details: format!("{} (expect 8 +- 0.5)", details.join("; ")),
    }
}

/// Criterion 9: strong-coupling scaling against the pure-quartic
/// reference.
pub fn criterion_9(_opts: &VerifyOptions) -> CriterionReport {
    let g2 = 1e6;
    let mesh = match mesh_energy(&MeshConfig::one_dim(g2), 0) {
        Ok(m) => m,
        Err(e) => {
            return CriterionReport {
                id: 9,
                name: "strong-coupling limit",
                pass: false,
                details: format!("mesh: {e}"),
            }
        }
    };
    let scaled = mesh.energy / g2.cbrt();
    let dev = (scaled - PURE_QUARTIC_GROUND.value).abs();
    CriterionReport {
        id: 9,
        name: "strong-coupling limit",
        pass: dev <= tol::STRONG_COUPLING_ABS,
        details: format!(
            "E(1e6) g^(-2/3) = {scaled:.7} vs quartic {:.7} (|diff| = {dev:.1e}, certificate N={}, drift {:.1e})",
            PURE_QUARTIC_GROUND.value, PURE_QUARTIC_GROUND.n, PURE_QUARTIC_GROUND.delta
        ),
    }
}

/// Criterion 10: harmonic-limit reduction to the Laguerre forms for all
/// six states.
pub fn criterion_10(_opts: &VerifyOptions) -> CriterionReport {
    let g2 = 1e-6;
    let mut worst = 0.0f64;
    let mut worst_state = String::new();
    for p in [0u8, 1] {
        for n in 0..3u32 {
            let mut params = ApproximantParams::new(n, p, g2, 1.0 / (3.0 * g2), 1.0);
            params.node_poly =
                harmonic_node_coeffs(n, p).iter().map(|r| r.to_f64().unwrap()).collect();
            let apx = Approximant::new(params).unwrap();
            // reference: x^p L_n^(p - 1/2)(x^2) e^(-x^2/2)
            let alpha = p as f64 - 0.5;
            let lag = |z: f64| laguerre_value(n, alpha, z);
            let norm = lag(0.0);
            let reference = |x: f64| {
                p as f64 * x.abs().ln() + (lag(x * x) / norm).abs().ln() - x * x / 2.0
            };
            let x0 = 1.3;
            let offset = apx.log_jet(x0).v - reference(x0);
            let mut sup = 0.0f64;
            for i in 0..=800 {
                let x = -4.0 + 8.0 * i as f64 / 800.0;
                // skip the nodes of the polynomial factor (both sides
                // share them exactly; the log difference is 0/0 there)
                let polyval = x.powi(p as i32) * apx.node_poly_value(x * x);
                if polyval.abs() < 1e-4 {
                    continue;
                }
                let d = (apx.log_jet(x).v - reference(x) - offset).abs();
                if d > sup {
                    sup = d;
                }
            }
            if sup > worst {
                worst = sup;
                worst_state = format!("({n},{p})");
            }
        }
    }
    CriterionReport {
        id: 10,
        name: "harmonic-limit reduction",
        pass: worst <= tol::HARMONIC_LIMIT_SUP,
        details: format!(
            "worst sup |log Psi - log Psi_harmonic| = {worst:.2e} at {worst_state} (tol {:.0e})",
            tol::HARMONIC_LIMIT_SUP
        ),
    }
}

fn laguerre_value(n: u32, alpha: f64, z: f64) -> f64 {
    let mut lm = 0.0;
    let mut l = 1.0;
    for k in 0..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - z) * l - (kf + alpha) * lm) / (kf + 1.0);
        lm = l;
        l = next;
    }
    l
}

/// Criterion 11: printed fit formulas, and the strong-coupling
/// amplitudes of the optimized parameters at `g^2 = 100`.
pub fn criterion_11(grid: &[GridCase]) -> CriterionReport {
    // symbolic spot checks of the printed forms
    let mut symbolic = true;
    symbolic &= (FitTables::a_fit(0, 0).powi(3) - 8.869).abs() < 1e-10;
    symbolic &= (FitTables::a_fit(1, 1).powi(3)
        - (8.869 + 23.120 * 3.0 + 7.856 * 9.0 + 4.140 * 27.0 + 0.262 * 81.0))
        .abs()
        < 1e-10;
    symbolic &= (FitTables::b_fit(2, 0).powi(3) - (10.040 + 3.255 * 4.0)).abs() < 1e-10;
    symbolic &= strong_coupling_node_fit(1, 0).unwrap().0 - 18.244f64.cbrt() == 0.0;
    symbolic &= strong_coupling_node_fit(1, 1).unwrap().0 - 1.607f64.cbrt() == 0.0;

    let g23 = 100.0f64.cbrt();
    let mut a_worst = 0.0f64;
    let mut b_worst = 0.0f64;
    for c in grid.iter().filter(|c| c.g2 == 100.0) {
        let a_lim = -c.result.params.a / g23;
        let b_lim = c.result.params.b / g23;
        let a_rel = (a_lim / FitTables::a_fit(c.n, c.p) - 1.0).abs();
        let b_rel = (b_lim / FitTables::b_fit(c.n, c.p) - 1.0).abs();
        a_worst = a_worst.max(a_rel);
        b_worst = b_worst.max(b_rel);
    }
    let pass = symbolic && a_worst <= tol::FIT_AGREEMENT_REL && b_worst <= tol::FIT_AGREEMENT_REL;
    CriterionReport {
        id: 11,
        name: "parameter fit formulas",
        pass,
        details: format!(
            "symbolic forms: {symbolic}; at g2=100: worst A-amplitude dev {a_worst:.2e}, worst B-amplitude dev {b_worst:.2e} (tol {:.0e})",
            tol::FIT_AGREEMENT_REL
        ),
    }
}

/// Run the full suite in order.
pub fn run_all(opts: &VerifyOptions) -> Vec<CriterionReport> {
    let mut reports = Vec::new();
    reports.push(criterion_1(opts));
    reports.push(criterion_2(opts));
    let grid = match solve_grid(opts) {
        Ok(g) => g,
        Err(e) => {
            for id in [3usize, 5, 11] {
                reports.push(CriterionReport {
                    id,
                    name: "grid-dependent criterion",
                    pass: false,
                    details: format!("grid solve failed: {e}"),
                });
            }
            reports.sort_by_key(|r| r.id);
            return reports;
        }
    };
    reports.push(criterion_3(&grid));
    reports.push(criterion_4(opts));
    reports.push(criterion_5(&grid));
    reports.push(criterion_6(opts));
    reports.push(criterion_7(opts));
    reports.push(criterion_8(opts));
    reports.push(criterion_9(opts));
    reports.push(criterion_10(opts));
    reports.push(criterion_11(&grid));
    reports.sort_by_key(|r| r.id);
    reports
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laguerre_recurrence_values() {
        // L_1^(a)(z) = 1 + a - z
        assert_eq!(laguerre_value(1, -0.5, 0.25), 0.25);
        // L_2^(0)(z) = 1 - 2z + z^2/2
        let z = 0.7;
        assert!((laguerre_value(2, 0.0, z) - (1.0 - 2.0 * z + z * z / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn slope_fit() {
        let xs = [1.0f64, 2.0, 3.0];
        let ys = [2.0f64, 4.0, 6.0];
        assert!((least_squares_slope(&xs, &ys) - 2.0).abs() < 1e-14);
    }
}
