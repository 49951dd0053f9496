//! `M2` — the map from threshold vectors to reliability indices — and the
//! calibration problem solved on it.

use crate::error::{Error, Result};
use crate::optimizer::{minimize, NlpConfig, NlpProblem, ScalarFn};
use crate::surrogate::{fit_opc_kriging, BasisFamily, OpcSettings, PcKrigingModel};
use nalgebra::{DMatrix, DVector};

/// Per-active-constraint models β̂_i(c_s) over a shared Legendre scaling box.
/// The box tracks the training data span, not the search bounds: the
/// calibration solver is allowed past the data (that is how unreachable
/// targets get diagnosed), and extrapolation quality is the enrichment
/// loop's problem, not the scaling's.
#[derive(Debug, Clone)]
pub struct Surrogate2 {
    models: Vec<PcKrigingModel>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Surrogate2 {
    pub fn n_constraints(&self) -> usize {
        self.models.len()
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn models(&self) -> &[PcKrigingModel] {
        &self.models
    }

    fn scale(&self, c: &[f64], out: &mut [f64]) {
        for i in 0..self.lo.len() {
            out[i] = 2.0 * (c[i] - self.lo[i]) / (self.hi[i] - self.lo[i]) - 1.0;
        }
    }

    /// Predicted reliability index of active constraint `i` at threshold
    /// vector `c` (physical units).
    pub fn predict_beta(&self, i: usize, c: &[f64]) -> f64 {
        let mut scaled = vec![0.0; self.lo.len()];
        self.scale(c, &mut scaled);
        self.models[i].predict_mean(&scaled)
    }
}

/// Fit one model per β column on the shared threshold rows. `rows` are
/// threshold vectors restricted to the active set; `beta_columns[i]` holds
/// constraint i's indices, one per row.
pub fn fit_surrogate2(
    rows: &[Vec<f64>],
    beta_columns: &[Vec<f64>],
    max_degree: u32,
) -> Result<Surrogate2> {
    let n = rows.len();
    if n < 3 {
        return Err(Error::Fit(format!(
            "threshold table has {n} usable rows; need at least 3"
        )));
    }
    let dim = rows[0].len();
    if dim == 0 || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Fit("ragged threshold rows".into()));
    }
    // data-span scaling box; degenerate spans widen to a unit interval so the
    // Legendre coordinates stay finite (the dimension is then constant and
    // carries no trend signal, which is the honest representation)
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for r in rows {
        for (i, &v) in r.iter().enumerate() {
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }
    for i in 0..dim {
        if !(hi[i] - lo[i] > 1e-12 * hi[i].abs().max(1.0)) {
            hi[i] = lo[i] + 1.0;
        }
    }
    let mut x = DMatrix::zeros(n, dim);
    for (r, row) in rows.iter().enumerate() {
        for i in 0..dim {
            x[(r, i)] = 2.0 * (row[i] - lo[i]) / (hi[i] - lo[i]) - 1.0;
        }
    }
    let families = vec![BasisFamily::Legendre; dim];
    let settings = OpcSettings {
        max_degree,
        ..OpcSettings::default()
    };
    let mut models = Vec::with_capacity(beta_columns.len());
    for (i, col) in beta_columns.iter().enumerate() {
        if col.len() != n {
            return Err(Error::Fit(format!(
                "beta column {i} has {} entries for {n} rows",
                col.len()
            )));
        }
        let y = DVector::from_row_slice(col);
        models.push(fit_opc_kriging(&x, &y, &families, &settings)?);
    }
    Ok(Surrogate2 { models, lo, hi })
}

/// Outcome of one calibration solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSolution {
    pub thresholds: Vec<f64>,
    /// β̂ at the returned thresholds, per active constraint.
    pub predicted_beta: Vec<f64>,
    /// False when no point satisfied every predicted target and the
    /// least-violating point is returned instead.
    pub feasible: bool,
    /// Lower-bound doublings that were needed (0 when the empirical bounds
    /// held).
    pub expansions: usize,
}

/// Hard cap on lower-bound doublings; the span grows by 2^60, far past any
/// meaningful extrapolation, so hitting the cap means the surrogate simply
/// cannot reach the targets.
const MAX_EXPANSIONS: usize = 60;

/// Minimize `Σ_i (β_Tar,i − β̂_i(c))²` subject to `β_Tar,i − β̂_i(c) ≤ 0`
/// over the threshold box, restricted to the `vary` components; the rest stay
/// frozen at `warm`. The coupled update varies everything; the uncoupled
/// ablation varies one component at a time.
///
/// When no feasible point exists inside the box, the lower bounds double away
/// from the (fixed) upper bounds — the empirical bounds are a guess, and the
/// optimum may lie below them. Expansion stops early once it stops helping.
pub fn solve_threshold_subset(
    s2: &Surrogate2,
    targets: &[f64],
    lower: &[f64],
    upper: &[f64],
    warm: &[f64],
    vary: &[usize],
    config: &NlpConfig,
) -> Result<ThresholdSolution> {
    let dim = s2.dim();
    if targets.len() != dim || lower.len() != dim || upper.len() != dim || warm.len() != dim {
        return Err(Error::Problem(
            "calibration inputs must all match the active-set dimension".into(),
        ));
    }
    if vary.is_empty() || vary.iter().any(|&i| i >= dim) {
        return Err(Error::Problem("invalid vary-component set".into()));
    }
    let assemble = |v: &[f64]| -> Vec<f64> {
        let mut c = warm.to_vec();
        for (k, &i) in vary.iter().enumerate() {
            c[i] = v[k];
        }
        c
    };
    let assemble = &assemble;
    let mut lb: Vec<f64> = vary.iter().map(|&i| lower[i]).collect();
    let ub: Vec<f64> = vary.iter().map(|&i| upper[i]).collect();
    for (l, u) in lb.iter_mut().zip(&ub) {
        if !(*l < *u) {
            // a base threshold exactly at its lower bound still needs an
            // interval to search
            *l = *u - 1.0;
        }
    }

    let mut best: Option<(Vec<f64>, f64, f64)> = None; // (full c, violation, objective)
    let mut expansions = 0;
    loop {
        let objective: ScalarFn = Box::new(move |v: &[f64]| {
            let c = assemble(v);
            vary.iter()
                .map(|&i| {
                    let gap = targets[i] - s2.predict_beta(i, &c);
                    gap * gap
                })
                .sum()
        });
        let constraints: Vec<ScalarFn> = vary
            .iter()
            .map(|&i| -> ScalarFn {
                Box::new(move |v: &[f64]| {
                    let c = assemble(v);
                    targets[i] - s2.predict_beta(i, &c)
                })
            })
            .collect();
        // upper-corner start first so flat (degenerate) objectives tie-break
        // to the original thresholds; warm start second
        let warm_clamped: Vec<f64> = vary
            .iter()
            .enumerate()
            .map(|(k, &i)| warm[i].clamp(lb[k], ub[k]))
            .collect();
        let sol = minimize(
            &NlpProblem {
                objective,
                constraints,
                lower: lb.clone(),
                upper: ub.clone(),
                initial: vec![ub.clone(), warm_clamped],
            },
            config,
        )?;
        let full = assemble(&sol.x);
        let improved = match &best {
            None => true,
            Some((_, v, f)) => {
                sol.max_violation < v * (1.0 - 1e-9) || (sol.max_violation <= *v && sol.f < *f)
            }
        };
        if improved {
            best = Some((full, sol.max_violation, sol.f));
        }
        if sol.converged {
            break;
        }
        if !improved || expansions >= MAX_EXPANSIONS {
            break;
        }
        for (l, u) in lb.iter_mut().zip(&ub) {
            *l = *u - 2.0 * (*u - *l);
        }
        expansions += 1;
    }
    let (thresholds, violation, _) = best.expect("at least one solve ran");
    let predicted_beta = (0..dim).map(|i| s2.predict_beta(i, &thresholds)).collect();
    Ok(ThresholdSolution {
        thresholds,
        predicted_beta,
        feasible: violation <= config.constraint_tol,
        expansions,
    })
}

/// The coupled calibration problem: all components vary simultaneously.
pub fn solve_threshold_problem(
    s2: &Surrogate2,
    targets: &[f64],
    lower: &[f64],
    upper: &[f64],
    warm: &[f64],
    config: &NlpConfig,
) -> Result<ThresholdSolution> {
    let vary: Vec<usize> = (0..s2.dim()).collect();
    solve_threshold_subset(s2, targets, lower, upper, warm, &vary, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// A fitted monotone 1-D beta map over c in [-3, 0].
    fn monotone_1d() -> Surrogate2 {
        let rows: Vec<Vec<f64>> = (0..9).map(|i| vec![-3.0 + 0.375 * i as f64]).collect();
        // true map beta(c) = -1.2 c + 0.1 c^2 (decreasing in c on [-3,0])
        let beta: Vec<f64> = rows.iter().map(|r| -1.2 * r[0] + 0.1 * r[0] * r[0]).collect();
        fit_surrogate2(&rows, &[beta], 5).unwrap()
    }

    /// Bisection on the fitted model itself: the solver must match what the
    /// model's own root implies, independent of how well the model fits.
    fn bisect_beta(s2: &Surrogate2, i: usize, target: f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let mut c = vec![0.0; s2.dim()];
            c[i] = mid;
            if s2.predict_beta(i, &c) >= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn single_constraint_hits_target_like_bisection() {
        let s2 = monotone_1d();
        let sol = solve_threshold_problem(
            &s2,
            &[2.0],
            &[-3.0],
            &[0.0],
            &[0.0],
            &NlpConfig::default(),
        )
        .unwrap();
        assert!(sol.feasible);
        assert_eq!(sol.expansions, 0);
        assert_abs_diff_eq!(sol.predicted_beta[0], 2.0, epsilon = 1e-3);
        let oracle = bisect_beta(&s2, 0, 2.0, -3.0, 0.0);
        assert_abs_diff_eq!(sol.thresholds[0], oracle, epsilon = 1e-3);
    }

    #[test]
    fn flat_map_tie_breaks_to_upper_bound() {
        // constant beta exactly at target: objective 0 and feasible everywhere
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![-3.0 + 0.6 * i as f64]).collect();
        let beta = vec![2.0; 6];
        let s2 = fit_surrogate2(&rows, &[beta], 5).unwrap();
        let sol = solve_threshold_problem(
            &s2,
            &[2.0],
            &[-3.0],
            &[0.0],
            &[-1.5],
            &NlpConfig::default(),
        )
        .unwrap();
        assert!(sol.feasible);
        assert_abs_diff_eq!(sol.thresholds[0], 0.0, epsilon = 1e-6);
    }

    #[test]
    fn separable_two_constraint_solve_matches_componentwise_bisection() {
        // beta_i depends only on c_i; the coupled solve must land where two
        // independent bisections land
        let mut rows = Vec::new();
        let (mut b0, mut b1) = (Vec::new(), Vec::new());
        for i in 0..7 {
            for j in 0..7 {
                let c0 = -3.0 + i as f64 * 0.5;
                let c1 = -3.0 + j as f64 * 0.5;
                rows.push(vec![c0, c1]);
                b0.push(-1.5 * c0 + 0.2);
                b1.push(-0.8 * c1 - 0.1 * c1 * c1);
            }
        }
        let s2 = fit_surrogate2(&rows, &[b0, b1], 5).unwrap();
        let sol = solve_threshold_problem(
            &s2,
            &[2.0, 1.5],
            &[-3.0, -3.0],
            &[0.0, 0.0],
            &[0.0, 0.0],
            &NlpConfig::default(),
        )
        .unwrap();
        assert!(sol.feasible);
        let c0 = bisect_beta(&s2, 0, 2.0, -3.0, 0.0);
        // component oracle for constraint 1 must hold c0 fixed at the answer
        let mut lo = -3.0;
        let mut hi = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if s2.predict_beta(1, &[sol.thresholds[0], mid]) >= 1.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c1 = 0.5 * (lo + hi);
        assert_abs_diff_eq!(sol.thresholds[0], c0, epsilon = 2e-3);
        assert_abs_diff_eq!(sol.thresholds[1], c1, epsilon = 2e-3);
    }

    #[test]
    fn unreachable_target_expands_below_the_box() {
        let s2 = monotone_1d();
        // beta(-3) well below 20: the box cannot reach it, expansion must
        // kick in and either find it by extrapolation or come back flagged
        let sol = solve_threshold_problem(
            &s2,
            &[20.0],
            &[-3.0],
            &[0.0],
            &[0.0],
            &NlpConfig::default(),
        )
        .unwrap();
        assert!(sol.expansions > 0);
        if sol.feasible {
            assert!(sol.thresholds[0] < -3.0, "found {}", sol.thresholds[0]);
        }
    }

    #[test]
    fn subset_solve_freezes_the_other_components() {
        let mut rows = Vec::new();
        let (mut b0, mut b1) = (Vec::new(), Vec::new());
        for i in 0..7 {
            for j in 0..7 {
                let c0 = -3.0 + i as f64 * 0.5;
                let c1 = -3.0 + j as f64 * 0.5;
                rows.push(vec![c0, c1]);
                b0.push(-1.5 * c0 + 0.2);
                b1.push(-0.8 * c1);
            }
        }
        let s2 = fit_surrogate2(&rows, &[b0, b1], 5).unwrap();
        let warm = vec![-0.7, -0.9];
        let sol = solve_threshold_subset(
            &s2,
            &[2.0, 1.5],
            &[-3.0, -3.0],
            &[0.0, 0.0],
            &warm,
            &[0],
            &NlpConfig::default(),
        )
        .unwrap();
        assert_eq!(sol.thresholds[1], -0.9);
        assert_abs_diff_eq!(
            s2.predict_beta(0, &sol.thresholds),
            2.0,
            epsilon = 1e-3
        );
    }

    #[test]
    fn too_few_rows_is_a_fit_error() {
        let rows = vec![vec![0.0], vec![-1.0]];
        let beta = vec![vec![1.0, 2.0]];
        assert!(matches!(
            fit_surrogate2(&rows, &beta, 5),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn degenerate_column_span_still_fits() {
        // second component constant across rows: scaling must not divide by 0
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|i| vec![-3.0 + 0.4 * i as f64, -1.0])
            .collect();
        let beta: Vec<f64> = rows.iter().map(|r| -r[0]).collect();
        let s2 = fit_surrogate2(&rows, &[beta], 5).unwrap();
        let b = s2.predict_beta(0, &[-2.0, -1.0]);
        assert_abs_diff_eq!(b, 2.0, epsilon = 1e-4);
    }
}
