//! Bound-constrained nonlinear programming with inequality constraints.
//!
//! The decoupled design problem and the coupled threshold problem are both
//! small, smooth, derivative-free programs. They are solved with a
//! multistart augmented-Lagrangian loop around a bound-clipped Nelder-Mead
//! local search: constraints h_j(x) ≤ 0 are normalized by their magnitude at
//! the first initial point, folded into the objective with
//! Powell-Hestenes-Rockafellar multipliers, and the penalty weight escalates
//! only while feasibility stalls.

pub mod neldermead;

use crate::error::{Error, Result};
use crate::sampling::sobol_points;
use neldermead::nelder_mead;

pub type ScalarFn<'a> = Box<dyn Fn(&[f64]) -> f64 + 'a>;

/// Minimization problem: objective, inequality constraints h_j(x) ≤ 0,
/// finite box bounds, and one or more starting points.
pub struct NlpProblem<'a> {
    pub objective: ScalarFn<'a>,
    pub constraints: Vec<ScalarFn<'a>>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub initial: Vec<Vec<f64>>,
}

impl<'a> NlpProblem<'a> {
    fn validate(&self) -> Result<()> {
        let n = self.lower.len();
        if n == 0 || self.upper.len() != n {
            return Err(Error::Optimizer(
                "bounds must be non-empty and consistent".into(),
            ));
        }
        for (l, u) in self.lower.iter().zip(&self.upper) {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::Optimizer(format!(
                    "invalid bound pair ({l}, {u}); need finite lower < upper"
                )));
            }
        }
        for p in &self.initial {
            if p.len() != n {
                return Err(Error::Optimizer("initial point dimension mismatch".into()));
            }
            for ((x, l), u) in p.iter().zip(&self.lower).zip(&self.upper) {
                if !(l - 1e-12 <= *x && *x <= u + 1e-12) {
                    return Err(Error::Optimizer(format!(
                        "initial point coordinate {x} outside [{l}, {u}]"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Solver knobs. `max_eval` limits local-search iterations per start
/// (0 → 200 per dimension). `seed` is kept for interface stability; starts
/// come from an unscrambled Sobol set and are already deterministic.
#[derive(Debug, Clone)]
pub struct NlpConfig {
    pub multistarts: usize,
    pub tol: f64,
    pub max_eval: usize,
    pub seed: u64,
    pub constraint_tol: f64,
    pub al_rounds: usize,
}

impl Default for NlpConfig {
    fn default() -> Self {
        Self {
            multistarts: 8,
            tol: 1e-8,
            max_eval: 0,
            seed: 0,
            constraint_tol: 1e-6,
            al_rounds: 8,
        }
    }
}

/// Best point found. `converged` means the normalized constraint violation
/// is within tolerance; when false, `x` is the least-violating point seen.
#[derive(Debug, Clone, PartialEq)]
pub struct NlpSolution {
    pub x: Vec<f64>,
    pub f: f64,
    pub max_violation: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

pub fn minimize(problem: &NlpProblem, config: &NlpConfig) -> Result<NlpSolution> {
    problem.validate()?;
    let n = self_dim(problem);
    let m = problem.constraints.len();
    let nm_maxiter = if config.max_eval == 0 {
        200 * n
    } else {
        config.max_eval
    };

    // normalization anchors from the first start
    let anchor: Vec<f64> = problem.initial.first().cloned().unwrap_or_else(|| {
        problem
            .lower
            .iter()
            .zip(&problem.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    });
    let fscale = (problem.objective)(&anchor).abs().max(1.0);
    let hscale: Vec<f64> = problem
        .constraints
        .iter()
        .map(|h| h(&anchor).abs().max(1.0))
        .collect();

    let mut starts: Vec<Vec<f64>> = problem.initial.clone();
    if starts.is_empty() {
        starts.push(anchor.clone());
    }
    if config.multistarts > 0 {
        for p in sobol_points(n, config.multistarts, 0)? {
            let mapped: Vec<f64> = p
                .iter()
                .zip(problem.lower.iter().zip(&problem.upper))
                .map(|(t, (l, u))| l + (u - l) * t)
                .collect();
            starts.push(mapped);
        }
    }

    let mut best: Option<NlpSolution> = None;
    let mut total_iters = 0usize;
    let mut total_evals = 0usize;
    for start in &starts {
        let local = solve_from(
            problem, config, start, fscale, &hscale, nm_maxiter, m,
        );
        total_iters += local.iterations;
        total_evals += local.evaluations;
        let better = match &best {
            None => true,
            Some(b) => match (local.converged, b.converged) {
                (true, false) => true,
                (false, true) => false,
                (true, true) => local.f < b.f,
                (false, false) => local.max_violation < b.max_violation,
            },
        };
        if better {
            best = Some(local);
        }
    }
    let mut out = best.expect("at least one start");
    out.iterations = total_iters;
    out.evaluations = total_evals;
    Ok(out)
}

fn self_dim(problem: &NlpProblem) -> usize {
    problem.lower.len()
}

fn solve_from(
    problem: &NlpProblem,
    config: &NlpConfig,
    start: &[f64],
    fscale: f64,
    hscale: &[f64],
    nm_maxiter: usize,
    m: usize,
) -> NlpSolution {
    let range: Vec<f64> = problem
        .lower
        .iter()
        .zip(&problem.upper)
        .map(|(l, u)| u - l)
        .collect();
    let clamp = |x: &[f64]| -> Vec<f64> {
        x.iter()
            .zip(problem.lower.iter().zip(&problem.upper))
            .map(|(v, (l, u))| v.clamp(*l, *u))
            .collect()
    };
    let normalized_h = |x: &[f64], j: usize| (problem.constraints[j])(x) / hscale[j];
    let max_viol = |x: &[f64]| -> f64 {
        (0..m)
            .map(|j| normalized_h(x, j))
            .fold(0.0f64, f64::max)
    };

    let mut lambda = vec![0.0f64; m];
    let mut mu = 10.0f64;
    let mut x = start.to_vec();
    let mut iterations = 0usize;
    let mut evaluations = 0usize;
    let mut prev_viol = f64::INFINITY;
    let rounds = if m == 0 { 1 } else { config.al_rounds };
    let augmented = |xi: &[f64], lam: &[f64], mu: f64| -> f64 {
        let xc = clamp(xi);
        // distance-to-box penalty keeps the simplex from drifting into
        // the clipped flat region
        let mut out_of_box = 0.0;
        for ((v, c), r) in xi.iter().zip(&xc).zip(&range) {
            out_of_box += ((v - c) / r).powi(2);
        }
        let mut val = (problem.objective)(&xc) / fscale + 1e3 * out_of_box;
        for j in 0..m {
            let h = normalized_h(&xc, j);
            let t = (lam[j] + mu * h).max(0.0);
            val += (t * t - lam[j] * lam[j]) / (2.0 * mu);
        }
        val
    };
    for _ in 0..rounds {
        let lam = lambda.clone();
        let res = nelder_mead(
            |xi| augmented(xi, &lam, mu),
            &x,
            config.tol,
            config.tol,
            nm_maxiter,
        );
        iterations += res.iterations;
        evaluations += res.evaluations;
        let x_new = clamp(&res.x);
        let step = x_new
            .iter()
            .zip(&x)
            .zip(&range)
            .map(|((a, b), r)| (a - b).abs() / r)
            .fold(0.0f64, f64::max);
        x = x_new;

        if m == 0 {
            break;
        }
        let viol = max_viol(&x);
        for (j, l) in lambda.iter_mut().enumerate() {
            *l = (*l + mu * normalized_h(&x, j)).max(0.0);
        }
        // stop only once feasible AND the iterate has stopped moving, so the
        // multipliers settle and the point slides to the constrained optimum
        // instead of freezing at the first feasible iterate
        if viol <= config.constraint_tol && step <= 1e-7 {
            break;
        }
        // escalate the penalty only while feasibility stalls
        if viol > 0.25 * prev_viol && viol > config.constraint_tol {
            mu = (mu * 10.0).min(1e8);
        }
        prev_viol = viol;
    }
    // fresh-simplex polish at tighter tolerance with frozen multipliers;
    // restarting Nelder-Mead from its own optimum recovers residual accuracy
    // lost to simplex collapse
    let polish = nelder_mead(
        |xi| augmented(xi, &lambda, mu),
        &x,
        0.1 * config.tol,
        0.1 * config.tol,
        nm_maxiter,
    );
    iterations += polish.iterations;
    evaluations += polish.evaluations;
    let x_polished = clamp(&polish.x);
    let keep = if m == 0 {
        (problem.objective)(&x_polished) <= (problem.objective)(&x)
    } else {
        let better_al = augmented(&x_polished, &lambda, mu) <= augmented(&x, &lambda, mu);
        better_al && max_viol(&x_polished) <= max_viol(&x).max(config.constraint_tol)
    };
    if keep {
        x = x_polished;
    }

    let viol = max_viol(&x);
    NlpSolution {
        f: (problem.objective)(&x),
        max_violation: viol.max(0.0),
        converged: viol <= config.constraint_tol,
        x,
        iterations,
        evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_box(n: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        (vec![lo; n], vec![hi; n])
    }

    #[test]
    fn unconstrained_quadratic() {
        let (lo, hi) = unit_box(1, 0.0, 3.0);
        let p = NlpProblem {
            objective: Box::new(|x| (x[0] - 1.0).powi(2)),
            constraints: vec![],
            lower: lo,
            upper: hi,
            initial: vec![vec![2.5]],
        };
        let s = minimize(&p, &NlpConfig::default()).unwrap();
        assert!(s.converged);
        assert_abs_diff_eq!(s.x[0], 1.0, epsilon = 1e-6);
        assert!(s.f < 1e-10);
    }

    #[test]
    fn active_linear_constraint_hits_kkt_point() {
        // projection of (3.7, 4) onto d1 + d2 = 3 is (1.35, 1.65)
        let p = NlpProblem {
            objective: Box::new(|d| (d[0] - 3.7).powi(2) + (d[1] - 4.0).powi(2)),
            constraints: vec![Box::new(|d| d[0] + d[1] - 3.0)],
            lower: vec![0.0, 0.0],
            upper: vec![3.7, 4.0],
            initial: vec![vec![1.0, 1.0]],
        };
        let s = minimize(&p, &NlpConfig::default()).unwrap();
        assert!(s.converged);
        assert_abs_diff_eq!(s.x[0], 1.35, epsilon = 1e-5);
        assert_abs_diff_eq!(s.x[1], 1.65, epsilon = 1e-5);
        assert!(s.max_violation <= 1e-6);
    }

    #[test]
    fn oscillatory_deterministic_design() {
        // design problem of the first benchmark with unshifted thresholds:
        // minimize distance to (3.7, 4) subject to both exceedance functions
        // staying nonpositive
        let g1 = |d: &[f64]| d[0] * (4.0 * d[0]).sin() + 1.1 * d[1] * (2.0 * d[1]).sin();
        let g2 = |d: &[f64]| 3.0 - d[0] - d[1];
        let p = NlpProblem {
            objective: Box::new(|d| (d[0] - 3.7).powi(2) + (d[1] - 4.0).powi(2)),
            constraints: vec![Box::new(g1), Box::new(g2)],
            lower: vec![0.0, 0.0],
            upper: vec![3.7, 4.0],
            initial: vec![vec![1.85, 2.0]],
        };
        let s = minimize(&p, &NlpConfig::default()).unwrap();
        assert!(s.converged);
        // cross-checked with an independent SQP implementation from a 12x12
        // start grid: optimum (2.9710911, 3.4035295), f = 0.88708526, on the
        // first constraint's boundary
        assert_abs_diff_eq!(s.f, 0.88708526, epsilon = 1e-5);
        assert_abs_diff_eq!(s.x[0], 2.9710911, epsilon = 1e-3);
        assert_abs_diff_eq!(s.x[1], 3.4035295, epsilon = 1e-3);
        assert!(s.max_violation <= 1e-6);
    }

    #[test]
    fn projection_battery_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut unif = |lo: f64, hi: f64| {
            lo + (hi - lo) * (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
        };
        for case in 0..20 {
            let n = 2 + (case % 3);
            let p: Vec<f64> = (0..n).map(|_| unif(-2.0, 2.0)).collect();
            let a: Vec<f64> = (0..n).map(|_| unif(0.2, 1.5)).collect();
            let b = unif(-1.0, 1.0);
            let adp: f64 = a.iter().zip(&p).map(|(ai, pi)| ai * pi).sum();
            let na: f64 = a.iter().map(|v| v * v).sum();
            // expected KKT point: projection of p onto a·x ≤ b
            let expect: Vec<f64> = if adp <= b {
                p.clone()
            } else {
                p.iter()
                    .zip(&a)
                    .map(|(pi, ai)| pi - ai * (adp - b) / na)
                    .collect()
            };
            if expect.iter().any(|v| v.abs() > 9.0) {
                continue;
            }
            let pc = p.clone();
            let ac = a.clone();
            let prob = NlpProblem {
                objective: Box::new(move |x| {
                    x.iter().zip(&pc).map(|(xi, pi)| (xi - pi).powi(2)).sum()
                }),
                constraints: vec![Box::new(move |x| {
                    x.iter().zip(&ac).map(|(xi, ai)| xi * ai).sum::<f64>() - b
                })],
                lower: vec![-10.0; n],
                upper: vec![10.0; n],
                initial: vec![vec![0.0; n]],
            };
            let s = minimize(&prob, &NlpConfig::default()).unwrap();
            assert!(s.converged, "case {case}");
            for (got, want) in s.x.iter().zip(&expect) {
                assert_abs_diff_eq!(*got, *want, epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn multistart_never_hurts() {
        // rippled bowl with many local minima
        let f = |x: &[f64]| {
            (x[0] - 6.8).powi(2) + (x[1] - 2.2).powi(2)
                + 4.0 * ((3.0 * x[0]).sin().powi(2) + (3.0 * x[1]).sin().powi(2))
        };
        let mk = |starts: usize| {
            let p = NlpProblem {
                objective: Box::new(f),
                constraints: vec![],
                lower: vec![0.0, 0.0],
                upper: vec![10.0, 10.0],
                initial: vec![vec![0.5, 9.5]],
            };
            let cfg = NlpConfig {
                multistarts: starts,
                ..NlpConfig::default()
            };
            minimize(&p, &cfg).unwrap().f
        };
        assert!(mk(8) <= mk(0) + 1e-12);
    }

    #[test]
    fn infeasible_problem_reports_least_violating_point() {
        let p = NlpProblem {
            objective: Box::new(|x| x[0]),
            constraints: vec![Box::new(|x| x[0] + 10.0)], // x ≤ -10 impossible in [0,1]
            lower: vec![0.0],
            upper: vec![1.0],
            initial: vec![vec![0.7]],
        };
        let s = minimize(&p, &NlpConfig::default()).unwrap();
        assert!(!s.converged);
        assert!(s.max_violation > 0.5);
        assert_abs_diff_eq!(s.x[0], 0.0, epsilon = 1e-4); // pushes toward least violation
    }

    #[test]
    fn bad_bounds_rejected() {
        let p = NlpProblem {
            objective: Box::new(|x| x[0]),
            constraints: vec![],
            lower: vec![1.0],
            upper: vec![0.0],
            initial: vec![],
        };
        assert!(minimize(&p, &NlpConfig::default()).is_err());
    }

    #[test]
    fn initial_point_outside_bounds_rejected() {
        let p = NlpProblem {
            objective: Box::new(|x| x[0]),
            constraints: vec![],
            lower: vec![0.0],
            upper: vec![1.0],
            initial: vec![vec![2.0]],
        };
        assert!(minimize(&p, &NlpConfig::default()).is_err());
    }

    #[test]
    fn solution_stays_inside_bounds() {
        // unconstrained minimum at 5.0 lies outside the box; solver must pin
        // to the upper bound
        let p = NlpProblem {
            objective: Box::new(|x| (x[0] - 5.0).powi(2)),
            constraints: vec![],
            lower: vec![0.0],
            upper: vec![2.0],
            initial: vec![vec![1.0]],
        };
        let s = minimize(&p, &NlpConfig::default()).unwrap();
        assert_abs_diff_eq!(s.x[0], 2.0, epsilon = 1e-6);
    }
}
