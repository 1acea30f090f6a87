//! Lagrange-mesh eigenvalue oracle.
//!
//! One-dimensional problems use the Hermite mesh: collocation points at
//! the roots of `H_N`, closed-form kinetic matrix
//!
//! ```text
//! T_ii = (2N + 1 - x_i^2)/3,   T_ij = (-1)^(i-j) 2/(x_i - x_j)^2,
//! ```
//!
//! which solves the harmonic oscillator exactly at any `N` -- the test
//! that pins every convention here. Radial problems are solved in
//! `s = r^2` on a generalized-Laguerre mesh (`alpha = D'/2 - 1` with the
//! effective dimension `D' = D + 2l`), where the reduced operator
//! `-4 s phi'' - 2 D' phi' + V(s)` has no centrifugal singularity for any
//! `D >= 1`; its kinetic matrix is assembled as `C^T C` from the exact
//! first-derivative collocation matrix, so it is symmetric positive
//! semidefinite by construction.
//!
//! The mesh scale `h` is auto-tuned by minimizing the `N` vs `N-10`
//! eigenvalue drift (the raw eigenvalue itself is not variational in `h`
//! and can undershoot off-plateau, so minimizing it picks wrong scales).
//! Final eigenvalues are refined by a double-double Rayleigh quotient
//! over the f64 eigenvector, pushing the solver floor from
//! `eps * ||H||` to the mesh truncation level.

use crate::dd::{self, Dd};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("Newton iteration for mesh point {index} of {n} did not converge")]
    RootFindingFailed { n: usize, index: usize },
    #[error("mesh energy not converged: |E({n}) - E({n_prev})| = {delta:e} exceeds {tol:e} * |E|")]
    NotConverged { n: usize, n_prev: usize, delta: f64, tol: f64 },
    #[error("invalid angular data: {0}")]
    InvalidAngular(String),
}

/// Which spectral problem the oracle solves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeshProblem {
    /// `-d^2/dx^2 + x^2 + g^2 x^4` on the line.
    OneDim { g2: f64 },
    /// `-d^2/dx^2 + x^4` on the line (strong-coupling reference).
    PureQuartic,
    /// Radial quartic `r^2 + g^2 r^4` in `D` dimensions, angular momentum
    /// `ell`, reduced to the s-mesh problem.
    Radial { d: u32, ell: u32, g2: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct MeshConfig {
    pub points: usize,
    /// Fixed mesh scale; `None` auto-tunes on the convergence plateau.
    pub scale: Option<f64>,
    pub problem: MeshProblem,
    /// Required relative agreement between the `N` and `N-10` runs.
    pub rel_tol: f64,
}

impl MeshConfig {
    pub fn one_dim(g2: f64) -> MeshConfig {
        MeshConfig { points: 75, scale: None, problem: MeshProblem::OneDim { g2 }, rel_tol: 1e-10 }
    }

    pub fn radial(d: u32, ell: u32, g2: f64) -> MeshConfig {
        MeshConfig {
            points: 90,
            scale: None,
            problem: MeshProblem::Radial { d, ell, g2 },
            rel_tol: 1e-10,
        }
    }

    pub fn pure_quartic(points: usize) -> MeshConfig {
        MeshConfig { points, scale: None, problem: MeshProblem::PureQuartic, rel_tol: 1e-10 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MeshResult {
    /// Full computed spectrum, ascending; only the lower half is
    /// converged to oracle quality.
    pub eigenvalues: Vec<f64>,
    /// The requested eigenvalue after extended-precision refinement.
    pub energy: f64,
    pub k: usize,
    pub n_used: usize,
    pub convergence_delta: f64,
    pub scale_used: f64,
}

// ---- Hermite mesh ----

/// Orthonormal-Hermite values `(p_N, p_{N-1})` at `x` (no Gaussian
/// weight; fine in f64 up to N ~ 200).
fn hermite_pair(n: usize, x: f64) -> (f64, f64) {
    let mut pm = 0.0f64;
    let mut p = std::f64::consts::PI.powf(-0.25);
    for k in 0..n {
        let next = x * (2.0 / (k as f64 + 1.0)).sqrt() * p
            - (k as f64 / (k as f64 + 1.0)).sqrt() * pm;
        pm = p;
        p = next;
    }
    (p, pm)
}

fn hermite_pair_dd(n: usize, x: Dd, c1: &[Dd], c2: &[Dd]) -> (Dd, Dd) {
    let mut pm = Dd::ZERO;
    let mut p = Dd::from_f64(std::f64::consts::PI.powf(-0.25));
    for k in 0..n {
        let next = x.mul(c1[k]).mul(p).sub(c2[k].mul(pm));
        pm = p;
        p = next;
    }
    (p, pm)
}

/// Roots of `H_N` to double-double accuracy: Jacobi-matrix eigenvalues
/// for the initial guesses, then Newton on the orthonormal recurrence
/// (`p_N' = sqrt(2N) p_{N-1}`), keeping the exact +- symmetry.
pub fn hermite_roots_dd(n: usize) -> Result<Vec<Dd>, MeshError> {
    assert!(n >= 2);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        jac[(k - 1, k)] = b;
        jac[(k, k - 1)] = b;
    }
    let mut init: Vec<f64> = jac.symmetric_eigenvalues().iter().cloned().collect();
    init.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let c1: Vec<Dd> = (0..n).map(|k| Dd::from_f64(2.0).div(Dd::from_f64(k as f64 + 1.0)).sqrt()).collect();
    let c2: Vec<Dd> = (0..n)
        .map(|k| Dd::from_f64(k as f64).div(Dd::from_f64(k as f64 + 1.0)).sqrt())
        .collect();
    let dnorm = Dd::from_f64(2.0 * n as f64).sqrt();

    let mut roots = vec![Dd::ZERO; n];
    for i in 0..n {
        if 2 * i + 1 == n {
            continue; // odd N: exact root at the origin
        }
        if init[i] > 0.0 {
            break;
        }
        let mut x = Dd::from_f64(init[i]);
        let mut ok = false;
        let mut prev_step = f64::INFINITY;
        for _ in 0..100 {
            let (p, pm) = hermite_pair_dd(n, x, &c1, &c2);
            let dp = dnorm.mul(pm);
            let step = p.div(dp);
            let s = step.to_f64().abs();
            // quadratic convergence bottoms out at the dd noise floor;
            // a stalled step certifies it (and is not applied)
            if s >= prev_step {
                ok = true;
                break;
            }
            x = x.sub(step);
            if s <= 1e-29 * x.to_f64().abs().max(1e-3) {
                ok = true;
                break;
            }
            prev_step = s;
        }
        if !ok {
            return Err(MeshError::RootFindingFailed { n, index: i });
        }
        roots[i] = x;
        roots[n - 1 - i] = x.neg();
    }
    Ok(roots)
}

/// Hermite mesh points and the closed-form kinetic matrix for
/// `-d^2/dx^2` at unit scale.
pub fn hermite_mesh(n: usize) -> Result<(Vec<f64>, DMatrix<f64>), MeshError> {
    let roots = hermite_roots_dd(n)?;
    let x: Vec<f64> = roots.iter().map(|r| r.to_f64()).collect();
    let mut t = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                t[(i, i)] = (2.0 * n as f64 + 1.0 - x[i] * x[i]) / 3.0;
            } else {
                let d = x[i] - x[j];
                let sign = if (i as i64 - j as i64) % 2 == 0 { 1.0 } else { -1.0 };
                t[(i, j)] = sign * 2.0 / (d * d);
            }
        }
    }
    Ok((x, t))
}

fn potential(problem: MeshProblem, x: f64) -> f64 {
    match problem {
        MeshProblem::OneDim { g2 } => x * x + g2 * x * x * x * x,
        MeshProblem::PureQuartic => x * x * x * x,
        MeshProblem::Radial { .. } => unreachable!("radial uses the s-mesh assembly"),
    }
}

/// f64 spectrum of the 1-D problem at mesh size `n`, scale `h`.
fn one_dim_spectrum(
    problem: MeshProblem,
    n: usize,
    h: f64,
) -> Result<(Vec<f64>, DMatrix<f64>, Vec<f64>), MeshError> {
    let (x, t) = hermite_mesh(n)?;
    let mut ham = t / (h * h);
    for i in 0..n {
        ham[(i, i)] += potential(problem, h * x[i]);
    }
    let se = nalgebra::SymmetricEigen::new(ham.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let eigs: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vecs = DMatrix::from_columns(&order.iter().map(|&i| se.eigenvectors.column(i)).collect::<Vec<_>>());
    Ok((eigs, vecs, x))
}

/// Double-double Rayleigh quotient of the 1-D Hamiltonian over `v`.
fn refine_one_dim(problem: MeshProblem, n: usize, h: f64, v: &DVector<f64>) -> Result<f64, MeshError> {
    let roots = hermite_roots_dd(n)?;
    let h_dd = Dd::from_f64(h);
    let inv_h2 = Dd::ONE.div(h_dd.mul(h_dd));
    let mut num = Dd::ZERO;
    // kinetic part
    for i in 0..n {
        let xi = roots[i];
        let diag = Dd::from_f64(2.0 * n as f64 + 1.0).sub(xi.mul(xi)).div(Dd::from_f64(3.0));
        num = num.add(diag.mul(inv_h2).mul(Dd::prod(v[i], v[i])));
        for j in (i + 1)..n {
            let d = xi.sub(roots[j]);
            let sign = if (i as i64 - j as i64) % 2 == 0 { 1.0 } else { -1.0 };
            let tij = Dd::from_f64(2.0 * sign).div(d.mul(d)).mul(inv_h2);
            num = num.add(tij.mul(Dd::prod(v[i], v[j])).mul_f64(2.0));
        }
    }
    // potential part
    for i in 0..n {
        let hx = h_dd.mul(roots[i]);
        let hx2 = hx.mul(hx);
        let vx = match problem {
            MeshProblem::OneDim { g2 } => hx2.add(hx2.mul(hx2).mul_f64(g2)),
            MeshProblem::PureQuartic => hx2.mul(hx2),
            MeshProblem::Radial { .. } => unreachable!(),
        };
        num = num.add(vx.mul(Dd::prod(v[i], v[i])));
    }
    let den = dd::dot(v.as_slice(), v.as_slice());
    Ok(num.div(den).to_f64())
}

// ---- generalized-Laguerre s-mesh for radial problems ----

/// Nodes of `L_N^(alpha)` to dd accuracy (Jacobi initial guesses, Newton
/// with `x L_N' = N L_N - sqrt(N(N+alpha)) L_{N-1}` in orthonormal form).
fn laguerre_roots_dd(n: usize, alpha: f64) -> Result<Vec<Dd>, MeshError> {
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jac[(k, k)] = 2.0 * k as f64 + alpha + 1.0;
        if k > 0 {
            let b = (k as f64 * (k as f64 + alpha)).sqrt();
            jac[(k - 1, k)] = b;
            jac[(k, k - 1)] = b;
        }
    }
    let mut init: Vec<f64> = jac.symmetric_eigenvalues().iter().cloned().collect();
    init.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let a_dd = Dd::from_f64(alpha);
    let bcoef: Vec<Dd> = (0..=n)
        .map(|k| {
            let kf = Dd::from_f64(k as f64);
            kf.mul(kf.add(a_dd)).sqrt()
        })
        .collect();
    let dfac = Dd::from_f64(n as f64).mul(Dd::from_f64(n as f64).add(a_dd)).sqrt();

    // scaled recurrence values (common positive per-point factor drops
    // out of every ratio used later)
    let pair = |x: Dd| -> (Dd, Dd) {
        let mut pm = Dd::ZERO;
        let mut p = Dd::ONE;
        for k in 0..n {
            let ak = Dd::from_f64(2.0 * k as f64 + alpha + 1.0);
            let next = x.sub(ak).mul(p).sub(bcoef[k].mul(pm)).div(bcoef[k + 1]);
            pm = p;
            p = next;
        }
        (p, pm)
    };

    let mut roots = Vec::with_capacity(n);
    for (i, &x0) in init.iter().enumerate() {
        let mut x = Dd::from_f64(x0);
        let mut ok = false;
        let mut prev_step = f64::INFINITY;
        for _ in 0..100 {
            let (p, pm) = pair(x);
            // recurrence polynomials are (-1)^k * (orthonormal Laguerre),
            // so the derivative identity picks up a plus sign:
            // x p_N' = N p_N + sqrt(N(N+alpha)) p_{N-1}
            let dp = Dd::from_f64(n as f64).mul(p).add(dfac.mul(pm)).div(x);
            let step = p.div(dp);
            let s = step.to_f64().abs();
            if s >= prev_step {
                // stalled at the dd noise floor
                ok = true;
                break;
            }
            x = x.sub(step);
            if s <= 1e-29 * x.to_f64().abs() {
                ok = true;
                break;
            }
            prev_step = s;
        }
        if !ok {
            return Err(MeshError::RootFindingFailed { n, index: i });
        }
        roots.push(x);
    }
    Ok(roots)
}

/// Assembly of the s-mesh first-derivative factor `C` (so the kinetic
/// quadratic form is `C^T C`), in the requested arithmetic.
///
/// All per-node normalizations are formed from recurrence values scaled
/// by an exact power of two near `e^{-s/2}`, which keeps every
/// intermediate O(1)-bounded without introducing any rounding of its
/// own; the scale factors cancel identically in the ratios below.
struct SMesh {
    s: Vec<f64>,
    c: DMatrix<f64>,
}

fn laguerre_scaled_table(n: usize, alpha: f64, roots: &[Dd]) -> (Vec<Dd>, Vec<Dd>) {
    // returns (W_k = sum_j r_j^2, rN1_k = r_{N-1}(s_k)) with
    // r_j = p_j * 2^(-m_k)
    let a_dd = Dd::from_f64(alpha);
    let bcoef: Vec<Dd> = (0..=n)
        .map(|k| {
            let kf = Dd::from_f64(k as f64);
            kf.mul(kf.add(a_dd)).sqrt()
        })
        .collect();
    let mut w = Vec::with_capacity(n);
    let mut rn1 = Vec::with_capacity(n);
    for &x in roots {
        let m = (x.to_f64() / (2.0 * std::f64::consts::LN_2)).floor() as i32;
        let scale = (2.0f64).powi(-m);
        let mut pm = Dd::ZERO;
        let mut p = Dd::from_f64(scale);
        let mut acc = p.mul(p);
        for k in 0..n - 1 {
            let ak = Dd::from_f64(2.0 * k as f64 + alpha + 1.0);
            let next = x.sub(ak).mul(p).sub(bcoef[k].mul(pm)).div(bcoef[k + 1]);
            pm = p;
            p = next;
            acc = acc.add(p.mul(p));
        }
        w.push(acc);
        rn1.push(p);
    }
    (w, rn1)
}

fn smesh_assemble(n: usize, alpha: f64) -> Result<(SMesh, Vec<Dd>, DMatrix<Dd>), MeshError> {
    let roots = laguerre_roots_dd(n, alpha)?;
    let (w, rn1) = laguerre_scaled_table(n, alpha, &roots);
    let s: Vec<f64> = roots.iter().map(|r| r.to_f64()).collect();

    let mut c_dd = DMatrix::<Dd>::from_element(n, n, Dd::ZERO);
    for k in 0..n {
        let sk = roots[k];
        for i in 0..n {
            if i == k {
                // 2 sqrt(s_k) (sum_{m != k} 1/(s_k - s_m) - 1/2)
                let mut sum = Dd::ZERO;
                for m in 0..n {
                    if m != k {
                        sum = sum.add(Dd::ONE.div(sk.sub(roots[m])));
                    }
                }
                c_dd[(k, i)] = sk.sqrt().mul_f64(2.0).mul(sum.add_f64(-0.5));
            } else {
                // 2 sqrt(W_i/W_k) rN1_k s_i / (rN1_i sqrt(s_k) (s_k - s_i))
                let ratio = w[i].div(w[k]).sqrt().mul(rn1[k]).div(rn1[i]);
                let val = ratio
                    .mul(roots[i])
                    .div(sk.sqrt())
                    .div(sk.sub(roots[i]))
                    .mul_f64(2.0);
                c_dd[(k, i)] = val;
            }
        }
    }
    let c = DMatrix::<f64>::from_fn(n, n, |k, i| c_dd[(k, i)].to_f64());
    Ok((SMesh { s, c }, roots, c_dd))
}

/// f64 spectrum of the radial problem at scale `hs` (in `s = r^2`).
fn radial_spectrum(
    mesh: &SMesh,
    g2: f64,
    hs: f64,
) -> (Vec<f64>, DMatrix<f64>) {
    let n = mesh.s.len();
    let mut ham = mesh.c.transpose() * &mesh.c / hs;
    for i in 0..n {
        let s = hs * mesh.s[i];
        ham[(i, i)] += s + g2 * s * s;
    }
    let se = nalgebra::SymmetricEigen::new(ham);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let eigs: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vecs =
        DMatrix::from_columns(&order.iter().map(|&i| se.eigenvectors.column(i)).collect::<Vec<_>>());
    (eigs, vecs)
}

fn refine_radial(
    roots: &[Dd],
    c_dd: &DMatrix<Dd>,
    g2: f64,
    hs: f64,
    v: &DVector<f64>,
) -> f64 {
    let n = roots.len();
    let hs_dd = Dd::from_f64(hs);
    // kinetic: |C v|^2 / hs
    let mut num = Dd::ZERO;
    for k in 0..n {
        let mut row = Dd::ZERO;
        for i in 0..n {
            row = row.add(c_dd[(k, i)].mul_f64(v[i]));
        }
        num = num.add(row.mul(row));
    }
    num = num.div(hs_dd);
    for i in 0..n {
        let s = hs_dd.mul(roots[i]);
        let pot = s.add(s.mul(s).mul_f64(g2));
        num = num.add(pot.mul(Dd::prod(v[i], v[i])));
    }
    let den = dd::dot(v.as_slice(), v.as_slice());
    num.div(den).to_f64()
}

// ---- tuning and the public entry points ----

/// Scale selection from a coarse grid of `N` vs `N-10` drifts: take the
/// log-midpoint of the contiguous near-minimal run around the argmin, so
/// that doubling or halving the returned scale stays on the plateau.
fn plateau_center(hs: &[f64], deltas: &[f64]) -> f64 {
    let mut best = 0;
    for (i, d) in deltas.iter().enumerate() {
        if *d < deltas[best] {
            best = i;
        }
    }
    let thresh = (deltas[best] * 50.0).max(1e-300);
    let mut lo = best;
    while lo > 0 && deltas[lo - 1] <= thresh {
        lo -= 1;
    }
    let mut hi = best;
    while hi + 1 < deltas.len() && deltas[hi + 1] <= thresh {
        hi += 1;
    }
    (hs[lo] * hs[hi]).sqrt()
}

/// `k`-th eigenvalue of the configured problem with plateau-tuned scale
/// and extended-precision refinement.
pub fn mesh_energy(config: &MeshConfig, k: usize) -> Result<MeshResult, MeshError> {
    match config.problem {
        MeshProblem::Radial { d, ell, g2 } => {
            if d < 1 {
                return Err(MeshError::InvalidAngular(format!("dimension D = {d} must be >= 1")));
            }
            radial_energy_impl(config, d, ell, g2, k)
        }
        _ => one_dim_energy_impl(config, k),
    }
}

fn one_dim_energy_impl(config: &MeshConfig, k: usize) -> Result<MeshResult, MeshError> {
    let n = config.points;
    assert!(n >= 10, "mesh needs at least 10 points");
    assert!(k < n / 2, "only the lower half of the spectrum is trusted");
    let n_prev = n - 10;

    let delta_at = |h: f64| -> Result<f64, MeshError> {
        let (e1, _, _) = one_dim_spectrum(config.problem, n, h)?;
        let (e0, _, _) = one_dim_spectrum(config.problem, n_prev, h)?;
        Ok((e1[k] - e0[k]).abs())
    };

    let h = match config.scale {
        Some(h) => h,
        None => {
            let grid = 25;
            let mut hs = Vec::with_capacity(grid);
            let mut ds = Vec::with_capacity(grid);
            for i in 0..grid {
                let h = 0.08 * (40.0f64).powf(i as f64 / (grid - 1) as f64);
                hs.push(h);
                ds.push(delta_at(h)?);
            }
            plateau_center(&hs, &ds)
        }
    };

    let (eigs, vecs, _) = one_dim_spectrum(config.problem, n, h)?;
    let (eigs_prev, _, _) = one_dim_spectrum(config.problem, n_prev, h)?;
    let delta = (eigs[k] - eigs_prev[k]).abs();
    if delta > config.rel_tol * eigs[k].abs().max(1e-300) {
        return Err(MeshError::NotConverged { n, n_prev, delta, tol: config.rel_tol });
    }
    let v = DVector::from_column_slice(vecs.column(k).as_slice());
    let energy = refine_one_dim(config.problem, n, h, &v)?;
    Ok(MeshResult {
        eigenvalues: eigs,
        energy,
        k,
        n_used: n,
        convergence_delta: delta,
        scale_used: h,
    })
}

fn radial_energy_impl(
    config: &MeshConfig,
    d: u32,
    ell: u32,
    g2: f64,
    k: usize,
) -> Result<MeshResult, MeshError> {
    let n = config.points;
    assert!(n >= 10 && k < n / 2);
    let n_prev = n - 10;
    let d_eff = d + 2 * ell; // radial l-problem == s-wave in D + 2l dims
    let alpha = d_eff as f64 / 2.0 - 1.0;

    let (mesh_n, roots_n, cdd_n) = smesh_assemble(n, alpha)?;
    let (mesh_p, _, _) = smesh_assemble(n_prev, alpha)?;

    let delta_at = |hs: f64| -> f64 {
        let (e1, _) = radial_spectrum(&mesh_n, g2, hs);
        let (e0, _) = radial_spectrum(&mesh_p, g2, hs);
        (e1[k] - e0[k]).abs()
    };

    let hs = match config.scale {
        Some(h) => h,
        None => {
            // s-scale spans widely with g2: search [2e-3, 5]
            let grid = 29;
            let mut hv = Vec::with_capacity(grid);
            let mut dv = Vec::with_capacity(grid);
            for i in 0..grid {
                let h = 2e-3 * (2500.0f64).powf(i as f64 / (grid - 1) as f64);
                hv.push(h);
                dv.push(delta_at(h));
            }
            plateau_center(&hv, &dv)
        }
    };

    let (eigs, vecs) = radial_spectrum(&mesh_n, g2, hs);
    let (eigs_prev, _) = radial_spectrum(&mesh_p, g2, hs);
    let delta = (eigs[k] - eigs_prev[k]).abs();
    if delta > config.rel_tol * eigs[k].abs().max(1e-300) {
        return Err(MeshError::NotConverged { n, n_prev, delta, tol: config.rel_tol });
    }
    let v = DVector::from_column_slice(vecs.column(k).as_slice());
    let energy = refine_radial(&roots_n, &cdd_n, g2, hs, &v);
    Ok(MeshResult {
        eigenvalues: eigs,
        energy,
        k,
        n_used: n,
        convergence_delta: delta,
        scale_used: hs,
    })
}

/// Radial oracle: `k`-th eigenvalue of the reduced problem
/// `-u'' + [L(L+1)/r^2 + r^2 + g^2 r^4] u = E u`, `L = ell + (D-3)/2`.
pub fn radial_mesh_energy(
    d: u32,
    ell: u32,
    g2: f64,
    n: usize,
    k: usize,
) -> Result<MeshResult, MeshError> {
    let config = MeshConfig {
        points: n,
        scale: None,
        problem: MeshProblem::Radial { d, ell, g2 },
        rel_tol: 1e-9,
    };
    mesh_energy(&config, k)
}

/// Ground energy of `-d^2/dx^2 + x^4`, computed by this oracle at
/// `N = 150`, with its convergence certificate (`N=150` vs `N=140`
/// drift). Used for the strong-coupling scaling checks.
pub struct QuarticCertificate {
    pub value: f64,
    pub n: usize,
    pub delta: f64,
}

pub const PURE_QUARTIC_GROUND: QuarticCertificate =
    QuarticCertificate { value: 1.0603620904841829, n: 150, delta: 2.3e-15 };

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_mesh_is_h2_roots() {
        let (x, _) = hermite_mesh(2).unwrap();
        let r = 0.5f64.sqrt();
        assert!((x[0] + r).abs() < 1e-15 && (x[1] - r).abs() < 1e-15);
    }

    #[test]
    fn kinetic_matrix_symmetric() {
        let (_, t) = hermite_mesh(21).unwrap();
        for i in 0..21 {
            for j in 0..21 {
                assert_eq!(t[(i, j)], t[(j, i)]);
            }
        }
    }

    #[test]
    fn harmonic_spectrum_exact_on_mesh() {
        // the Hermite mesh at unit scale represents the first N harmonic
        // states exactly: eigenvalues 1, 3, 5, ...
        let (eigs, _, _) = one_dim_spectrum(MeshProblem::OneDim { g2: 0.0 }, 12, 1.0).unwrap();
        for (k, e) in eigs.iter().enumerate().take(12) {
            assert!((e - (2 * k + 1) as f64).abs() < 2e-12, "k={k}: {e}");
        }
    }

    #[test]
    fn ground_energy_unit_coupling() {
        let r = mesh_energy(&MeshConfig::one_dim(1.0), 0).unwrap();
        assert!((r.energy - 1.392351641530).abs() < 1e-11, "{}", r.energy);
        assert!(r.convergence_delta < 1e-12);
    }

    #[test]
    fn fifty_points_match_seventyfive() {
        let mut c = MeshConfig::one_dim(1.0);
        c.points = 50;
        let e50 = mesh_energy(&c, 0).unwrap();
        c.points = 75;
        let e75 = mesh_energy(&c, 0).unwrap();
        assert!((e50.energy - e75.energy).abs() <= 1e-13 * e75.energy.abs());
    }

    #[test]
    fn eigenvalue_ordering_and_nodeless_ground() {
        let n = 60;
        let (eigs, vecs, _) = one_dim_spectrum(MeshProblem::OneDim { g2: 2.0 }, n, 0.6).unwrap();
        for w in eigs.windows(2).take(n / 2) {
            assert!(w[1] > w[0]);
        }
        let v = vecs.column(0);
        let vmax = v.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        let pos = v.iter().filter(|&&x| x > 1e-12 * vmax).count();
        let neg = v.iter().filter(|&&x| x < -1e-12 * vmax).count();
        assert!(pos == 0 || neg == 0, "ground eigenvector changes sign");
    }

    #[test]
    fn scale_plateau() {
        let r = mesh_energy(&MeshConfig::one_dim(1.0), 0).unwrap();
        for factor in [0.5, 2.0] {
            // fixed-scale run: bypass the convergence gate (rel_tol) to
            // probe the energy itself
            let c = MeshConfig {
                scale: Some(r.scale_used * factor),
                rel_tol: 1e-6,
                ..MeshConfig::one_dim(1.0)
            };
            let e = mesh_energy(&c, 0).unwrap();
            assert!(
                (e.energy - r.energy).abs() < 1e-12 * r.energy,
                "factor {factor}: {} vs {}",
                e.energy,
                r.energy
            );
        }
    }

    #[test]
    fn radial_harmonic_exact() {
        for d in [1u32, 2, 3, 6] {
            let c = MeshConfig {
                points: 40,
                scale: Some(1.0),
                problem: MeshProblem::Radial { d, ell: 0, g2: 0.0 },
                rel_tol: 1e-9,
            };
            let r = mesh_energy(&c, 0).unwrap();
            assert!((r.energy - d as f64).abs() < 1e-12, "D={d}: {}", r.energy);
        }
    }

    #[test]
    fn radial_matches_table_entries() {
        let r = radial_mesh_energy(3, 0, 1.0, 80, 0).unwrap();
        assert!((r.energy - 4.648812704212).abs() < 1e-9, "{}", r.energy);
        let r = radial_mesh_energy(6, 0, 10.0, 80, 0).unwrap();
        assert!((r.energy - 19.93690037401).abs() < 1e-7, "{}", r.energy);
    }

    #[test]
    fn radial_reductions_match_line_mesh() {
        // D=1 even sector == 1-D ground; D=3 s-wave == first odd level
        let line = mesh_energy(&MeshConfig::one_dim(1.0), 0).unwrap();
        let rad = radial_mesh_energy(1, 0, 1.0, 80, 0).unwrap();
        assert!((line.energy - rad.energy).abs() < 5e-12 * line.energy, "{} vs {}", line.energy, rad.energy);
        let line1 = mesh_energy(&MeshConfig::one_dim(1.0), 1).unwrap();
        let rad3 = radial_mesh_energy(3, 0, 1.0, 80, 0).unwrap();
        assert!((line1.energy - rad3.energy).abs() < 5e-12 * line1.energy);
    }

    #[test]
    fn strong_coupling_scaling() {
        // E(g^2) g^(-2/3) -> pure-quartic ground energy
        let g2 = 1e6;
        let r = mesh_energy(&MeshConfig::one_dim(g2), 0).unwrap();
        let scaled = r.energy * g2.cbrt().recip();
        assert!(
            (scaled - PURE_QUARTIC_GROUND.value).abs() < 1e-4,
            "scaled = {scaled}"
        );
    }

    #[test]
    fn pure_quartic_certificate_reproduces() {
        let mut c = MeshConfig::pure_quartic(150);
        c.rel_tol = 1e-10;
        let a = mesh_energy(&c, 0).unwrap();
        assert!(
            (a.energy - PURE_QUARTIC_GROUND.value).abs() < 1e-12,
            "{} vs {}",
            a.energy,
            PURE_QUARTIC_GROUND.value
        );
        let mut c2 = MeshConfig::pure_quartic(140);
        c2.rel_tol = 1e-10;
        let b = mesh_energy(&c2, 0).unwrap();
        assert!((a.energy - b.energy).abs() <= 10.0 * PURE_QUARTIC_GROUND.delta);
    }

    #[test]
    fn invalid_dimension_rejected() {
        let c = MeshConfig { problem: MeshProblem::Radial { d: 0, ell: 0, g2: 1.0 }, ..MeshConfig::radial(0, 0, 1.0) };
        assert!(matches!(mesh_energy(&c, 0), Err(MeshError::InvalidAngular(_))));
    }
}

/// Test/debug hook: the s-mesh nodes and `C` factor at unit scale.
pub fn debug_smesh_c(n: usize, alpha: f64) -> (Vec<f64>, DMatrix<f64>) {
    let (m, _, _) = smesh_assemble(n, alpha).unwrap();
    (m.s, m.c)
}

/// Debug hook: scaled Christoffel sums and top-polynomial values.
pub fn debug_smesh_table(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<i32>) {
    let roots = laguerre_roots_dd(n, alpha).unwrap();
    let (w, rn1) = laguerre_scaled_table(n, alpha, &roots);
    let ms: Vec<i32> = roots
        .iter()
        .map(|x| (x.to_f64() / (2.0 * std::f64::consts::LN_2)).floor() as i32)
        .collect();
    (
        roots.iter().map(|r| r.to_f64()).collect(),
        w.iter().map(|v| v.to_f64()).collect(),
        rn1.iter().map(|v| v.to_f64()).collect(),
        ms,
    )
}

/// Debug hook: one dd entry of the s-mesh `C` with split components.
pub fn debug_smesh_c_entry(n: usize, alpha: f64, k: usize, i: usize) -> (f64, f64) {
    let (_, _, c_dd) = smesh_assemble(n, alpha).unwrap();
    (c_dd[(k, i)].hi, c_dd[(k, i)].lo)
}

/// Debug hook: dd node and table values with split components.
pub fn debug_smesh_parts(n: usize, alpha: f64, idx: usize) -> [(f64, f64); 3] {
    let roots = laguerre_roots_dd(n, alpha).unwrap();
    let (w, rn1) = laguerre_scaled_table(n, alpha, &roots);
    [
        (roots[idx].hi, roots[idx].lo),
        (w[idx].hi, w[idx].lo),
        (rn1[idx].hi, rn1[idx].lo),
    ]
}
