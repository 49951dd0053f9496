//! Training and use of `M1`, the limit-state surrogate bank.

use super::inputs::InputMap;
use super::{RbdoProblem, TsmConfig};
use crate::error::{Error, Result};
use crate::optimizer::{minimize, NlpConfig, NlpProblem, NlpSolution, ScalarFn};
use crate::sampling::{sobol_points, ReliabilityAnalyzer, ReliabilityEstimate};
use crate::surrogate::{fit_opc_kriging, OpcSettings, PcKrigingModel};
use nalgebra::{DMatrix, DVector};

/// One fitted `M1` model per probabilistic constraint, plus the coordinate
/// maps they were trained in and the true-function-call bill.
#[derive(Debug, Clone)]
pub struct TrainedSurrogates {
    pub models: Vec<PcKrigingModel>,
    pub maps: Vec<InputMap>,
    /// True limit-state evaluations spent on training = Σ DoE sizes.
    pub calls: usize,
}

fn opc_settings(config: &TsmConfig) -> OpcSettings {
    OpcSettings {
        max_degree: config.max_degree,
        ..OpcSettings::default()
    }
}

/// Fit every constraint's `M1` on a Sobol design over (design box) ×
/// (noise quantile box). This is the only place a standard run evaluates the
/// true limit states.
pub fn train_surrogate1(problem: &RbdoProblem, config: &TsmConfig) -> Result<TrainedSurrogates> {
    problem.validate()?;
    config.validate()?;
    let dim = problem.space.dim();
    let mut models = Vec::with_capacity(problem.n_constraints());
    let mut maps = Vec::with_capacity(problem.n_constraints());
    let mut calls = 0usize;
    for c in &problem.constraints {
        let map = InputMap::for_space(&problem.space, c.noise_quantile_mass)?;
        let points = sobol_points(dim, c.doe_size, 0)?;
        let mut x = DMatrix::zeros(c.doe_size, dim);
        let mut y = DVector::zeros(c.doe_size);
        for (r, p) in points.iter().enumerate() {
            let (phys, scaled) = map.doe_row(p);
            let val = c.g.eval(&phys);
            if !val.is_finite() {
                return Err(Error::Problem(format!(
                    "constraint `{}`: limit state returned {val} at training point {phys:?}",
                    c.name
                )));
            }
            for (col, &s) in scaled.iter().enumerate() {
                x[(r, col)] = s;
            }
            y[r] = val;
        }
        calls += c.doe_size;
        let model = fit_opc_kriging(&x, &y, map.families(), &opc_settings(config))?;
        models.push(model);
        maps.push(map);
    }
    Ok(TrainedSurrogates { models, maps, calls })
}

impl TrainedSurrogates {
    /// `ĝ_j(d, noise at means)` — the deterministic design problem's
    /// constraint value before threshold subtraction.
    pub fn predict_at_mean_noise(&self, j: usize, d: &[f64]) -> f64 {
        let coords = self.maps[j].scaled_at_mean_noise(d);
        self.models[j].predict_mean(&coords)
    }

    /// Per-sample scaled noise coordinates for constraint `j` over the
    /// analyzer's frozen matrix, row-major `n × n_noise`. Computing these
    /// once per run keeps marginal quantile maps out of the per-design loop.
    pub fn noise_columns(&self, j: usize, analyzer: &ReliabilityAnalyzer) -> Vec<f64> {
        noise_columns_for_map(&self.maps[j], analyzer)
    }

    /// Monte Carlo `P(ĝ_j > base_threshold)` at design `d`, over the
    /// analyzer's common random numbers. `noise_cols` must come from
    /// [`TrainedSurrogates::noise_columns`] for the same constraint and
    /// analyzer.
    pub fn estimate_beta(
        &self,
        problem: &RbdoProblem,
        j: usize,
        d: &[f64],
        analyzer: &ReliabilityAnalyzer,
        noise_cols: &[f64],
    ) -> ReliabilityEstimate {
        let map = &self.maps[j];
        let model = &self.models[j];
        let nd = map.n_design();
        let nn = map.n_noise();
        let dim = map.dim();
        assert_eq!(analyzer.dim(), dim);
        assert_eq!(noise_cols.len(), analyzer.n() * nn);
        let stds: Vec<f64> = problem
            .space
            .design
            .iter()
            .zip(d)
            .map(|(v, &di)| v.std_at(di))
            .collect();
        let (a, b) = map.design_affine(d, &stds);
        let c0 = problem.constraints[j].base_threshold;
        analyzer.estimate_with(|chunk, first_row| {
            let mut scratch = model.scratch();
            let mut coords = vec![0.0; dim];
            let rows = chunk.len() / dim;
            let mut fails = 0u64;
            for r in 0..rows {
                let u = &chunk[r * dim..(r + 1) * dim];
                for i in 0..nd {
                    coords[i] = a[i] + b[i] * u[i];
                }
                coords[nd..].copy_from_slice(&noise_cols[(first_row + r) * nn..][..nn]);
                if model.predict_mean_with(&coords, &mut scratch) > c0 {
                    fails += 1;
                }
            }
            fails
        })
    }
}

pub(crate) fn noise_columns_for_map(map: &InputMap, analyzer: &ReliabilityAnalyzer) -> Vec<f64> {
    let dim = map.dim();
    let nd = map.n_design();
    let nn = map.n_noise();
    debug_assert_eq!(analyzer.dim(), dim);
    let samples = analyzer.samples();
    let mut cols = vec![0.0; analyzer.n() * nn];
    for r in 0..analyzer.n() {
        let u = &samples[r * dim..(r + 1) * dim];
        for j in 0..nn {
            cols[r * nn + j] = map.noise_coord(j, u[nd + j]);
        }
    }
    cols
}

/// Minimize cost over the design box subject to
/// `ĝ_j(d, noise at means) ≤ thresholds[j]` on `M1` (plus any deterministic
/// constraints). `extra_starts` are appended after the problem's initial
/// design, clamped into the box — the driver passes the previous iterate.
pub fn solve_deterministic_design(
    problem: &RbdoProblem,
    thresholds: &[f64],
    surrogates: &TrainedSurrogates,
    config: &NlpConfig,
    extra_starts: &[Vec<f64>],
) -> Result<NlpSolution> {
    let predictors: Vec<ScalarFn> = (0..problem.n_constraints())
        .map(|j| -> ScalarFn {
            let t = thresholds[j];
            Box::new(move |d: &[f64]| surrogates.predict_at_mean_noise(j, d) - t)
        })
        .collect();
    solve_design_with(problem, predictors, config, extra_starts)
}

/// Shared deterministic-design plumbing; `constraint_fns` already include the
/// threshold subtraction.
pub(crate) fn solve_design_with<'a>(
    problem: &'a RbdoProblem,
    mut constraint_fns: Vec<ScalarFn<'a>>,
    config: &NlpConfig,
    extra_starts: &[Vec<f64>],
) -> Result<NlpSolution> {
    if constraint_fns.len() != problem.n_constraints() {
        return Err(Error::Problem(format!(
            "{} constraint evaluators for {} constraints",
            constraint_fns.len(),
            problem.n_constraints()
        )));
    }
    for h in &problem.deterministic {
        let h = h.clone();
        constraint_fns.push(Box::new(move |d: &[f64]| h.eval(d)));
    }
    let lower = problem.space.lower_bounds();
    let upper = problem.space.upper_bounds();
    let mut initial = vec![problem.initial_design.clone()];
    for s in extra_starts {
        let clamped: Vec<f64> = s
            .iter()
            .zip(&lower)
            .zip(&upper)
            .map(|((&x, &l), &u)| x.clamp(l, u))
            .collect();
        initial.push(clamped);
    }
    let cost = problem.cost.clone();
    let nlp = NlpProblem {
        objective: Box::new(move |d: &[f64]| cost.eval(d)),
        constraints: constraint_fns,
        lower,
        upper,
        initial,
    };
    minimize(&nlp, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probspace::{DesignVariable, Dispersion, ProblemSpace};
    use crate::tsm::ProbabilisticConstraint;
    use approx::assert_abs_diff_eq;

    fn toy_problem() -> RbdoProblem {
        // cost (d1-2)^2 + (d2-2)^2, one linear limit state with exceedance
        // failure 3 - x1 - x2 > 0, one saturated-safe limit state.
        let space = ProblemSpace {
            design: vec![
                DesignVariable {
                    name: "d1".into(),
                    lower: 0.0,
                    upper: 4.0,
                    dispersion: Dispersion::Std(0.1),
                },
                DesignVariable {
                    name: "d2".into(),
                    lower: 0.0,
                    upper: 4.0,
                    dispersion: Dispersion::Std(0.1),
                },
            ],
            noise: vec![],
        };
        RbdoProblem {
            name: "toy".into(),
            cost: super::super::Evaluator::new(|d: &[f64]| {
                (d[0] - 2.0).powi(2) + (d[1] - 2.0).powi(2)
            }),
            constraints: vec![
                ProbabilisticConstraint::new("sum", |x: &[f64]| 3.0 - x[0] - x[1], 0.0, 2.0, 24),
                ProbabilisticConstraint::new("far", |x: &[f64]| x[0] - 50.0, 0.0, 2.0, 12),
            ],
            space,
            deterministic: vec![],
            initial_design: vec![2.0, 2.0],
        }
    }

    #[test]
    fn training_bills_exactly_the_doe_sizes() {
        let ts = train_surrogate1(&toy_problem(), &TsmConfig::default()).unwrap();
        assert_eq!(ts.calls, 36);
        assert_eq!(ts.models.len(), 2);
        assert_eq!(ts.models[0].training_inputs().nrows(), 24);
        assert_eq!(ts.models[1].training_inputs().nrows(), 12);
    }

    #[test]
    fn linear_limit_state_is_recovered() {
        let ts = train_surrogate1(&toy_problem(), &TsmConfig::default()).unwrap();
        // 3 - d1 - d2 at mean noise, exactly linear, so the surrogate should
        // be interpolatory to fitting tolerance everywhere
        for d in [[1.0, 1.0], [2.5, 0.5], [0.3, 3.4]] {
            assert_abs_diff_eq!(
                ts.predict_at_mean_noise(0, &d),
                3.0 - d[0] - d[1],
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn non_finite_limit_state_names_the_point() {
        let mut p = toy_problem();
        p.constraints[0] =
            ProbabilisticConstraint::new("bad", |_x: &[f64]| f64::NAN, 0.0, 2.0, 8);
        let err = train_surrogate1(&p, &TsmConfig::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad") && msg.contains("training point"), "{msg}");
    }

    #[test]
    fn beta_on_surrogate_matches_closed_form() {
        let p = toy_problem();
        let ts = train_surrogate1(&p, &TsmConfig::default()).unwrap();
        let analyzer = ReliabilityAnalyzer::new(2, 200_000, 5);
        let cols = ts.noise_columns(0, &analyzer);
        // failure (3 - x1 - x2) > 0 at design (d, d) with sigma 0.1 each:
        // beta = (2d - 3) / (0.1 sqrt 2) exactly, and the surrogate is
        // linear-exact; both probed values keep pf large enough for Monte
        // Carlo to resolve well below the tolerance
        for (d, exact) in [
            (1.4, -0.2 / (0.1 * 2.0f64.sqrt())),
            (1.55, 0.1 / (0.1 * 2.0f64.sqrt())),
        ] {
            let est = ts.estimate_beta(&p, 0, &[d, d], &analyzer, &cols);
            assert!(
                (est.beta - exact).abs() < 0.03,
                "beta {} vs {exact} at d = {d}",
                est.beta
            );
        }
    }

    #[test]
    fn design_solve_respects_shifted_thresholds() {
        let p = toy_problem();
        let ts = train_surrogate1(&p, &TsmConfig::default()).unwrap();
        let cfg = NlpConfig::default();
        // threshold -0.5 on "3 - x1 - x2 <= c" forces d1 + d2 >= 3.5; the
        // cost pulls toward (2,2) which already satisfies it
        let sol = solve_deterministic_design(&p, &[-0.5, 0.0], &ts, &cfg, &[]).unwrap();
        assert!(sol.converged);
        assert_abs_diff_eq!(sol.x[0], 2.0, epsilon = 1e-3);
        assert_abs_diff_eq!(sol.x[1], 2.0, epsilon = 1e-3);
        // threshold -1.5 forces d1 + d2 >= 4.5: active constraint, symmetric
        // optimum at (2.25, 2.25)
        let sol = solve_deterministic_design(&p, &[-1.5, 0.0], &ts, &cfg, &[]).unwrap();
        assert!(sol.converged);
        assert_abs_diff_eq!(sol.x[0] + sol.x[1], 4.5, epsilon = 5e-3);
    }

    #[test]
    fn infeasible_thresholds_come_back_flagged() {
        let p = toy_problem();
        let ts = train_surrogate1(&p, &TsmConfig::default()).unwrap();
        // requires d1 + d2 >= 53 inside [0,4]^2: impossible
        let sol =
            solve_deterministic_design(&p, &[-50.0, 0.0], &ts, &NlpConfig::default(), &[]).unwrap();
        assert!(!sol.converged);
        assert!(sol.max_violation > 0.0);
    }
}
