//! Derivative-free simplex minimization (Nelder-Mead) with seeded
//! restarts.
//!
//! The variational landscape over `(A, B)` is smooth and two-dimensional,
//! but the objective is a quadrature, so gradients are noisy at the
//! 1e-13 level; a simplex with tight spread tolerance is the right tool.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Clone, Copy, Debug)]
pub struct NelderMeadOptions {
    /// Converged when the spread of simplex values drops below
    /// `f_tol * max(1, |f_best|)`.
    pub f_tol: f64,
    pub max_iters: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { f_tol: 1e-13, max_iters: 4000 }
    }
}

#[derive(Clone, Debug)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2) from an initial point with per-coordinate simplex steps.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    steps: &[f64],
    opts: NelderMeadOptions,
) -> MinimizeResult {
    let dim = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut p = x0.to_vec();
        p[i] += steps[i];
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| eval(p, &mut evals)).collect();

    let mut converged = false;
    for _ in 0..opts.max_iters {
        // order ascending by value
        let mut idx: Vec<usize> = (0..=dim).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let reorder: Vec<Vec<f64>> = idx.iter().map(|&i| simplex[i].clone()).collect();
        let revals: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        simplex = reorder;
        values = revals;

        let spread = values[dim] - values[0];
        if spread.abs() <= opts.f_tol * values[0].abs().max(1.0) {
            converged = true;
            break;
        }

        // centroid of all but worst
        let mut cen = vec![0.0; dim];
        for p in simplex.iter().take(dim) {
            for (c, v) in cen.iter_mut().zip(p.iter()) {
                *c += v;
            }
        }
        for c in cen.iter_mut() {
            *c /= dim as f64;
        }

        let worst = simplex[dim].clone();
        let mix = |t: f64| -> Vec<f64> {
            cen.iter().zip(worst.iter()).map(|(c, w)| c + t * (c - w)).collect()
        };

        let xr = mix(1.0);
        let fr = eval(&xr, &mut evals);
        if fr < values[0] {
            let xe = mix(2.0);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[dim] = xe;
                values[dim] = fe;
            } else {
                simplex[dim] = xr;
                values[dim] = fr;
            }
        } else if fr < values[dim - 1] {
            simplex[dim] = xr;
            values[dim] = fr;
        } else {
            let (xc, fc) = if fr < values[dim] {
                let xc = mix(0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = mix(-0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < values[dim].min(fr) {
                simplex[dim] = xc;
                values[dim] = fc;
            } else {
                // shrink toward best
                for i in 1..=dim {
                    let best = simplex[0].clone();
                    for (s, b) in simplex[i].iter_mut().zip(best.iter()) {
                        *s = b + 0.5 * (*s - b);
                    }
                    values[i] = eval(&simplex[i].clone(), &mut evals);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=dim {
        if values[i] < values[best] {
            best = i;
        }
    }
    MinimizeResult { x: simplex[best].clone(), f: values[best], evals, converged }
}

/// Nelder-Mead with `restarts` seeded relaunches, each from the incumbent
/// best perturbed by up to +-20 percent per coordinate. Deterministic for
/// a fixed seed.
pub fn nelder_mead_restarts(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    steps: &[f64],
    restarts: usize,
    seed: u64,
    opts: NelderMeadOptions,
) -> MinimizeResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = move || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);

    let mut best = nelder_mead(&mut f, x0, steps, opts);
    let mut total_evals = best.evals;
    for _ in 0..restarts {
        let start: Vec<f64> = best
            .x
            .iter()
            .map(|&v| {
                let r = 2.0 * uniform() - 1.0;
                v * (1.0 + 0.2 * r) + if v == 0.0 { 0.05 * r } else { 0.0 }
            })
            .collect();
        let shrunk: Vec<f64> = steps.iter().map(|s| 0.25 * s).collect();
        let run = nelder_mead(&mut f, &start, &shrunk, opts);
        total_evals += run.evals;
        if run.f < best.f {
            best = run;
        }
    }
    best.evals = total_evals;
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let r = nelder_mead(
            |x| (x[0] - 1.5) * (x[0] - 1.5) + 3.0 * (x[1] + 0.5) * (x[1] + 0.5),
            &[0.0, 0.0],
            &[0.5, 0.5],
            NelderMeadOptions::default(),
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.5).abs() < 1e-6 && (r.x[1] + 0.5).abs() < 1e-6);
    }

    #[test]
    fn rosenbrock_with_restarts() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead_restarts(f, &[-1.2, 1.0], &[0.4, 0.4], 3, 7, NelderMeadOptions::default());
        assert!(r.f < 1e-12, "f = {}", r.f);
    }

    #[test]
    fn deterministic_given_seed() {
        let f = |x: &[f64]| x[0].powi(4) + (x[1] - 2.0).powi(2) + 0.3 * (x[0] * x[1]).sin();
        let a = nelder_mead_restarts(f, &[1.0, 1.0], &[0.3, 0.3], 3, 42, NelderMeadOptions::default());
        let b = nelder_mead_restarts(f, &[1.0, 1.0], &[0.3, 0.3], 3, 42, NelderMeadOptions::default());
        assert_eq!(a.x, b.x);
        assert_eq!(a.f, b.f);
    }

    #[test]
    fn infinity_guard_regions() {
        // objective infinite for x[1] <= 0: the simplex must stay in the
        // feasible half-plane and still find the minimum
        let f = |x: &[f64]| {
            if x[1] <= 0.0 {
                f64::INFINITY
            } else {
                (x[0] - 0.3).powi(2) + (x[1].ln()).powi(2)
            }
        };
        let r = nelder_mead(f, &[0.0, 2.0], &[0.3, 0.3], NelderMeadOptions::default());
        assert!((r.x[0] - 0.3).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5);
    }
}
