//! Derivative-free simplex minimizer.
//!
//! Standard Nelder-Mead with the usual reflection/expansion/contraction
//! coefficients (1, 2, 0.5, 0.5) and the conventional initial simplex (5%
//! perturbation per coordinate, 2.5e-4 for zero coordinates). Deterministic:
//! same inputs, same iterates.

/// Result of one simplex run.
#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Minimize `f` starting from `x0`. Stops when the simplex collapses below
/// `xatol`/`fatol` in both coordinates and values, or after `maxiter`
/// iterations.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    xatol: f64,
    fatol: f64,
    maxiter: usize,
) -> SimplexResult {
    let n = x0.len();
    assert!(n > 0);
    const RHO: f64 = 1.0;
    const CHI: f64 = 2.0;
    const PSI: f64 = 0.5;
    const SIGMA: f64 = 0.5;
    const NONZDELT: f64 = 0.05;
    const ZDELT: f64 = 0.00025;

    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut sim: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    sim.push(x0.to_vec());
    for k in 0..n {
        let mut y = x0.to_vec();
        if y[k] != 0.0 {
            y[k] *= 1.0 + NONZDELT;
        } else {
            y[k] = ZDELT;
        }
        sim.push(y);
    }
    let mut fsim: Vec<f64> = sim.iter().map(|x| eval(x, &mut evaluations)).collect();
    sort_simplex(&mut sim, &mut fsim);

    let mut iterations = 0usize;
    while iterations < maxiter {
        let xspread = sim[1..]
            .iter()
            .flat_map(|s| s.iter().zip(&sim[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        let fspread = fsim[1..]
            .iter()
            .map(|v| (v - fsim[0]).abs())
            .fold(0.0f64, f64::max);
        if xspread <= xatol && fspread <= fatol {
            break;
        }

        let mut xbar = vec![0.0; n];
        for s in &sim[..n] {
            for (b, v) in xbar.iter_mut().zip(s) {
                *b += v;
            }
        }
        for b in &mut xbar {
            *b /= n as f64;
        }
        let worst = sim[n].clone();
        let lerp = |t: f64| -> Vec<f64> {
            // point at xbar + t*(xbar - worst)
            xbar.iter()
                .zip(&worst)
                .map(|(b, w)| b + t * (b - w))
                .collect()
        };

        let xr = lerp(RHO);
        let fr = eval(&xr, &mut evaluations);
        let mut shrink = false;
        if fr < fsim[0] {
            let xe = lerp(RHO * CHI);
            let fe = eval(&xe, &mut evaluations);
            if fe < fr {
                sim[n] = xe;
                fsim[n] = fe;
            } else {
                sim[n] = xr;
                fsim[n] = fr;
            }
        } else if fr < fsim[n - 1] {
            sim[n] = xr;
            fsim[n] = fr;
        } else if fr < fsim[n] {
            let xc = lerp(PSI * RHO);
            let fc = eval(&xc, &mut evaluations);
            if fc <= fr {
                sim[n] = xc;
                fsim[n] = fc;
            } else {
                shrink = true;
            }
        } else {
            let xcc = lerp(-PSI);
            let fcc = eval(&xcc, &mut evaluations);
            if fcc < fsim[n] {
                sim[n] = xcc;
                fsim[n] = fcc;
            } else {
                shrink = true;
            }
        }
        if shrink {
            let best = sim[0].clone();
            for j in 1..=n {
                for (s, b) in sim[j].iter_mut().zip(&best) {
                    *s = b + SIGMA * (*s - b);
                }
                fsim[j] = eval(&sim[j], &mut evaluations);
            }
        }
        sort_simplex(&mut sim, &mut fsim);
        iterations += 1;
    }

    SimplexResult {
        x: sim[0].clone(),
        f: fsim[0],
        iterations,
        evaluations,
    }
}

fn sort_simplex(sim: &mut [Vec<f64>], fsim: &mut [f64]) {
    let mut order: Vec<usize> = (0..fsim.len()).collect();
    order.sort_by(|&a, &b| fsim[a].total_cmp(&fsim[b]));
    let sim_old: Vec<Vec<f64>> = sim.to_vec();
    let fsim_old = fsim.to_vec();
    for (dst, &src) in order.iter().enumerate() {
        sim[dst] = sim_old[src].clone();
        fsim[dst] = fsim_old[src];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quadratic_bowl() {
        let r = nelder_mead(
            |x| (x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            1e-10,
            1e-10,
            600,
        );
        assert_abs_diff_eq!(r.x[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(r.x[1], -2.0, epsilon = 1e-6);
        assert!(r.f < 1e-10);
    }

    #[test]
    fn rosenbrock_valley() {
        let rosen =
            |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let r = nelder_mead(rosen, &[-1.2, 1.0], 1e-10, 1e-10, 2000);
        assert_abs_diff_eq!(r.x[0], 1.0, epsilon = 1e-5);
        assert_abs_diff_eq!(r.x[1], 1.0, epsilon = 1e-5);
    }

    #[test]
    fn one_dimensional() {
        let r = nelder_mead(|x| (x[0] - 3.5).powi(2) + 0.25, &[0.0], 1e-12, 1e-12, 400);
        assert_abs_diff_eq!(r.x[0], 3.5, epsilon = 1e-6);
        assert_abs_diff_eq!(r.f, 0.25, epsilon = 1e-10);
    }

    #[test]
    fn respects_iteration_budget() {
        let mut calls = 0usize;
        let r = nelder_mead(
            |x| {
                calls += 1;
                x[0].powi(2)
            },
            &[10.0],
            1e-16,
            1e-16,
            5,
        );
        assert!(r.iterations <= 5);
        assert_eq!(calls, r.evaluations);
    }

    #[test]
    fn nan_objective_treated_as_worst() {
        let r = nelder_mead(
            |x| {
                if x[0] < 0.0 {
                    f64::NAN
                } else {
                    (x[0] - 0.5).powi(2)
                }
            },
            &[1.0],
            1e-10,
            1e-10,
            400,
        );
        assert_abs_diff_eq!(r.x[0], 0.5, epsilon = 1e-5);
    }

    #[test]
    fn deterministic_across_runs() {
        let run = || {
            nelder_mead(
                |x| (x[0] - 0.3).powi(2) * (1.0 + (5.0 * x[1]).sin().powi(2)) + x[1].powi(2),
                &[2.0, 2.0],
                1e-9,
                1e-9,
                800,
            )
        };
        let a = run();
        let b = run();
        assert_eq!(a.x, b.x);
        assert_eq!(a.f.to_bits(), b.f.to_bits());
    }
}
