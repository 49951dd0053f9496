//! The outer calibration loop and its variants.

use super::surrogate1::{noise_columns_for_map, solve_design_with, solve_deterministic_design};
use super::threshold::{solve_threshold_problem, solve_threshold_subset, ThresholdSolution};
use super::{
    determine_threshold_bounds, fit_surrogate2, select_active_constraints, train_surrogate1,
    BetaTable, IterationRecord, RbdoProblem, ThresholdBounds, TrainedSurrogates, TsmConfig,
    TsmResult,
};
use crate::error::{Error, Result};
use crate::optimizer::{NlpConfig, NlpSolution, ScalarFn};
use crate::sampling::{sobol_points, ReliabilityAnalyzer, ReliabilityEstimate};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

/// Which modification of the full method to switch off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationMode {
    /// Solve each active threshold in its own 1-D problem against the
    /// previous iterate instead of the coupled simultaneous problem.
    NoCoupling,
    /// Bypass `M1`: deterministic designs and Monte Carlo run on the true
    /// limit states, and the function-call bill counts every evaluation.
    NoSurrogate,
    /// Skip active-set selection and calibrate every constraint.
    NoActiveSet,
}

struct Knobs {
    coupled: bool,
    use_m1: bool,
    active_set: bool,
}

/// Uniform access to "the limit states as the driver sees them": either the
/// `M1` bank or the true evaluators with a call meter.
enum GSource<'a> {
    Models {
        trained: &'a TrainedSurrogates,
        /// Per-constraint scaled noise columns over the analyzer's frozen
        /// matrix; shared between constraints with identical scaling.
        noise_cols: Vec<Arc<Vec<f64>>>,
    },
    TrueFns {
        counter: AtomicUsize,
        noise_means: Vec<f64>,
    },
}

impl<'a> GSource<'a> {
    fn from_models(trained: &'a TrainedSurrogates, analyzer: &ReliabilityAnalyzer) -> Self {
        let mut noise_cols: Vec<Arc<Vec<f64>>> = Vec::with_capacity(trained.maps.len());
        for j in 0..trained.maps.len() {
            match (0..j).find(|&k| trained.maps[k].same_scaling(&trained.maps[j])) {
                Some(k) => noise_cols.push(noise_cols[k].clone()),
                None => noise_cols.push(Arc::new(noise_columns_for_map(&trained.maps[j], analyzer))),
            }
        }
        GSource::Models { trained, noise_cols }
    }

    fn from_true(problem: &RbdoProblem) -> Self {
        GSource::TrueFns {
            counter: AtomicUsize::new(0),
            noise_means: problem.space.noise.iter().map(|(_, m)| m.mean()).collect(),
        }
    }

    fn calls(&self) -> usize {
        match self {
            GSource::Models { trained, .. } => trained.calls,
            GSource::TrueFns { counter, .. } => counter.load(Ordering::Relaxed),
        }
    }

    fn beta(
        &self,
        problem: &RbdoProblem,
        j: usize,
        d: &[f64],
        analyzer: &ReliabilityAnalyzer,
    ) -> Result<ReliabilityEstimate> {
        match self {
            GSource::Models { trained, noise_cols } => {
                Ok(trained.estimate_beta(problem, j, d, analyzer, &noise_cols[j]))
            }
            GSource::TrueFns { counter, .. } => {
                let g = &problem.constraints[j].g;
                analyzer.estimate_physical(
                    |x| {
                        counter.fetch_add(1, Ordering::Relaxed);
                        g.eval(x)
                    },
                    problem.constraints[j].base_threshold,
                    &problem.space,
                    d,
                )
            }
        }
    }

    fn design_solve(
        &self,
        problem: &RbdoProblem,
        thresholds: &[f64],
        config: &NlpConfig,
        extra_starts: &[Vec<f64>],
    ) -> Result<NlpSolution> {
        match self {
            GSource::Models { trained, .. } => {
                solve_deterministic_design(problem, thresholds, trained, config, extra_starts)
            }
            GSource::TrueFns { counter, noise_means } => {
                let fns: Vec<ScalarFn> = (0..problem.n_constraints())
                    .map(|j| -> ScalarFn {
                        let g = problem.constraints[j].g.clone();
                        let t = thresholds[j];
                        Box::new(move |d: &[f64]| {
                            counter.fetch_add(1, Ordering::Relaxed);
                            let mut x = d.to_vec();
                            x.extend_from_slice(noise_means);
                            g.eval(&x) - t
                        })
                    })
                    .collect();
                solve_design_with(problem, fns, config, extra_starts)
            }
        }
    }
}

/// Fewest usable rows `M2` can be fitted on.
const MIN_M2_ROWS: usize = 3;
/// Extra rows attempted when the Sobol box turns out mostly infeasible.
const TOPUP_ATTEMPTS: usize = 24;

fn build_beta_table(
    problem: &RbdoProblem,
    source: &GSource,
    bounds: &ThresholdBounds,
    n_rows: usize,
    config: &TsmConfig,
    analyzer: &ReliabilityAnalyzer,
) -> Result<BetaTable> {
    let np = problem.n_constraints();
    let mut table = BetaTable {
        thresholds: Vec::new(),
        betas: Vec::new(),
        designs: Vec::new(),
        feasible: Vec::new(),
    };
    let mut violations: Vec<f64> = Vec::new();
    let add_row = |table: &mut BetaTable, violations: &mut Vec<f64>, c: Vec<f64>| -> Result<()> {
        let sol = source.design_solve(problem, &c, &config.nlp, &[])?;
        if sol.converged {
            let mut beta_row = Vec::with_capacity(np);
            for j in 0..np {
                beta_row.push(source.beta(problem, j, &sol.x, analyzer)?.beta);
            }
            table.betas.push(beta_row);
            table.feasible.push(true);
            violations.push(0.0);
        } else {
            table.betas.push(vec![f64::NAN; np]);
            table.feasible.push(false);
            violations.push(sol.max_violation);
        }
        table.thresholds.push(c);
        table.designs.push(sol.x);
        Ok(())
    };

    // anchored so the first Sobol point (all zeros) lands exactly on the
    // original thresholds: that row is the plain deterministic optimum
    for p in sobol_points(np, n_rows, 0)? {
        let c: Vec<f64> = (0..np)
            .map(|i| bounds.upper[i] + (bounds.lower[i] - bounds.upper[i]) * p[i])
            .collect();
        add_row(&mut table, &mut violations, c)?;
    }

    // when the box is mostly infeasible (tight base thresholds), walk the
    // least-violating rows back toward the original thresholds until M2 has
    // something to train on
    let mut attempts = 0;
    while table.feasible_rows() < MIN_M2_ROWS + 1 && attempts < TOPUP_ATTEMPTS {
        let worst = table
            .feasible
            .iter()
            .enumerate()
            .filter(|(_, &ok)| !ok)
            .min_by(|(a, _), (b, _)| violations[*a].total_cmp(&violations[*b]))
            .map(|(r, _)| r);
        let Some(r) = worst else { break };
        let c: Vec<f64> = table.thresholds[r]
            .iter()
            .zip(&bounds.upper)
            .map(|(&v, &u)| 0.5 * (v + u))
            .collect();
        add_row(&mut table, &mut violations, c)?;
        attempts += 1;
    }
    Ok(table)
}

/// The threshold-table step on its own: Sobol threshold vectors over the
/// bounds box, a deterministic design per vector, Monte Carlo reliability
/// indices per feasible design. Builds its own sample matrix from the
/// config seed, so a driver run with the same config sees identical numbers.
pub fn generate_beta_table(
    problem: &RbdoProblem,
    surrogates: &TrainedSurrogates,
    bounds: &ThresholdBounds,
    n_rows: usize,
    config: &TsmConfig,
) -> Result<BetaTable> {
    problem.validate()?;
    config.validate()?;
    let analyzer =
        ReliabilityAnalyzer::new(problem.space.dim(), config.mcs_samples, config.seed);
    let source = GSource::from_models(surrogates, &analyzer);
    build_beta_table(problem, &source, bounds, n_rows, config, &analyzer)
}

fn run_core(
    problem: &RbdoProblem,
    config: &TsmConfig,
    knobs: Knobs,
    pretrained: Option<TrainedSurrogates>,
) -> Result<TsmResult> {
    problem.validate()?;
    config.validate()?;
    let np = problem.n_constraints();
    let c0 = problem.base_thresholds();
    let targets = problem.beta_targets();

    let trained = match pretrained {
        Some(t) => {
            if t.models.len() != np {
                return Err(Error::Problem(format!(
                    "pretrained bank has {} models for {np} constraints",
                    t.models.len()
                )));
            }
            if t.maps.iter().any(|m| m.dim() != problem.space.dim()) {
                return Err(Error::Problem(
                    "pretrained bank dimension does not match the problem space".into(),
                ));
            }
            Some(t)
        }
        None if knobs.use_m1 => Some(train_surrogate1(problem, config)?),
        None => None,
    };
    let analyzer =
        ReliabilityAnalyzer::new(problem.space.dim(), config.mcs_samples, config.seed);
    let source = match &trained {
        Some(t) => GSource::from_models(t, &analyzer),
        None => GSource::from_true(problem),
    };

    let bounds = determine_threshold_bounds(&c0, config.alpha)?;
    let table = build_beta_table(
        problem,
        &source,
        &bounds,
        config.table_rows(np),
        config,
        &analyzer,
    )?;
    let active: Vec<usize> = if knobs.active_set {
        select_active_constraints(&table, &targets, config.eps_active)
    } else {
        (0..np).collect()
    };

    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut converged = false;
    let mut fallback_feasible = true;

    let design = if active.is_empty() {
        // every constraint is comfortably reliable everywhere the table
        // looked: the problem degenerates to its deterministic counterpart,
        // and the post-hoc check below still verifies the result
        let sol = source.design_solve(problem, &c0, &config.nlp, &[])?;
        fallback_feasible = sol.converged;
        sol.x
    } else {
        let n_ac = active.len();
        let t_act: Vec<f64> = active.iter().map(|&i| targets[i]).collect();
        let lb_act: Vec<f64> = active.iter().map(|&i| bounds.lower[i]).collect();
        let ub_act: Vec<f64> = active.iter().map(|&i| bounds.upper[i]).collect();
        let mut c_rows: Vec<Vec<f64>> = Vec::new();
        let mut b_cols: Vec<Vec<f64>> = vec![Vec::new(); n_ac];
        for (r, ok) in table.feasible.iter().enumerate() {
            if *ok {
                c_rows.push(active.iter().map(|&i| table.thresholds[r][i]).collect());
                for (k, &i) in active.iter().enumerate() {
                    b_cols[k].push(table.betas[r][i]);
                }
            }
        }
        if c_rows.len() < MIN_M2_ROWS {
            return Err(Error::Problem(format!(
                "only {} feasible threshold rows after {} attempts; cannot train the \
                 threshold surrogate (base thresholds may be unattainable)",
                c_rows.len(),
                table.rows()
            )));
        }

        let mut c_s = c0.clone();
        let mut last_d = problem.initial_design.clone();
        for _ in 0..config.max_iterations {
            let s2 = fit_surrogate2(&c_rows, &b_cols, config.max_degree)?;
            let warm_act: Vec<f64> = active.iter().map(|&i| c_s[i]).collect();
            let th = if knobs.coupled || n_ac == 1 {
                solve_threshold_problem(&s2, &t_act, &lb_act, &ub_act, &warm_act, &config.nlp)?
            } else {
                // one 1-D problem per constraint, all against the previous
                // iterate, combined afterwards
                let mut vals = warm_act.clone();
                let mut feasible = true;
                let mut expansions = 0;
                for k in 0..n_ac {
                    let s = solve_threshold_subset(
                        &s2,
                        &t_act,
                        &lb_act,
                        &ub_act,
                        &warm_act,
                        &[k],
                        &config.nlp,
                    )?;
                    vals[k] = s.thresholds[k];
                    feasible &= s.feasible;
                    expansions = expansions.max(s.expansions);
                }
                let predicted_beta =
                    (0..n_ac).map(|i| s2.predict_beta(i, &vals)).collect();
                ThresholdSolution {
                    thresholds: vals,
                    predicted_beta,
                    feasible,
                    expansions,
                }
            };
            for (k, &i) in active.iter().enumerate() {
                c_s[i] = th.thresholds[k];
            }
            let dsol = source.design_solve(problem, &c_s, &config.nlp, &[last_d.clone()])?;
            let design_flagged = !dsol.converged;
            let d = dsol.x;
            let mut beta_active = Vec::with_capacity(n_ac);
            for &i in &active {
                beta_active.push(source.beta(problem, i, &d, &analyzer)?.beta);
            }
            // enrichment: the true (threshold, beta) pair of this iteration
            // joins the training data whether or not the solves were clean —
            // a least-violating point teaches M2 the most about where the
            // map actually is
            c_rows.push(th.thresholds.clone());
            for (k, &b) in beta_active.iter().enumerate() {
                b_cols[k].push(b);
            }
            trace.push(IterationRecord {
                thresholds: c_s.clone(),
                design: d.clone(),
                beta_active: beta_active.clone(),
                threshold_flagged: !th.feasible,
                design_flagged,
            });
            last_d = d;
            let min_abs = beta_active
                .iter()
                .zip(&t_act)
                .map(|(b, t)| (t - b).abs())
                .fold(f64::INFINITY, f64::min);
            let max_gap = beta_active
                .iter()
                .zip(&t_act)
                .map(|(b, t)| t - b)
                .fold(f64::NEG_INFINITY, f64::max);
            if min_abs <= config.eps_tol && max_gap <= 0.0 {
                converged = true;
                break;
            }
        }
        last_d
    };

    let mut beta = Vec::with_capacity(np);
    for j in 0..np {
        beta.push(source.beta(problem, j, &design, &analyzer)?.beta);
    }
    let mut bad = Vec::new();
    for j in 0..np {
        if !active.contains(&j) && beta[j] < targets[j] {
            bad.push(format!(
                "`{}`: final beta {:.3} below target {:.3}",
                problem.constraints[j].name, beta[j], targets[j]
            ));
        }
    }
    if !bad.is_empty() {
        return Err(Error::InactiveConstraintViolation(bad.join("; ")));
    }
    if active.is_empty() {
        // post-hoc betas just passed for every constraint
        converged = fallback_feasible;
    }
    let cost = problem.cost.eval(&design);
    let iterations = trace.len();
    Ok(TsmResult {
        design,
        cost,
        beta,
        active,
        trace,
        table,
        function_calls: source.calls(),
        iterations,
        converged,
    })
}

/// The full method: train `M1`, build the threshold table, select active
/// constraints, and iterate coupled calibration against deterministic design
/// until every active constraint meets its target and at least one sits on
/// it.
pub fn run_ds_tsm(problem: &RbdoProblem, config: &TsmConfig) -> Result<TsmResult> {
    run_core(
        problem,
        config,
        Knobs {
            coupled: true,
            use_m1: true,
            active_set: true,
        },
        None,
    )
}

/// The full method on an externally trained surrogate bank (for example one
/// fitted from an ingested sample table). No true limit-state evaluations
/// happen; the result bills the bank's own training-call count.
pub fn run_ds_tsm_with_models(
    problem: &RbdoProblem,
    config: &TsmConfig,
    trained: TrainedSurrogates,
) -> Result<TsmResult> {
    run_core(
        problem,
        config,
        Knobs {
            coupled: true,
            use_m1: true,
            active_set: true,
        },
        Some(trained),
    )
}

/// The method with one of its three modifications switched off.
pub fn run_ablation(
    problem: &RbdoProblem,
    config: &TsmConfig,
    mode: AblationMode,
) -> Result<TsmResult> {
    let knobs = match mode {
        AblationMode::NoCoupling => Knobs {
            coupled: false,
            use_m1: true,
            active_set: true,
        },
        AblationMode::NoSurrogate => Knobs {
            coupled: true,
            use_m1: false,
            active_set: true,
        },
        AblationMode::NoActiveSet => Knobs {
            coupled: true,
            use_m1: true,
            active_set: false,
        },
    };
    run_core(problem, config, knobs, None)
}

/// Plain deterministic design optimization on the true limit states (noise
/// at means, original thresholds), with post-hoc Monte Carlo reliability.
#[derive(Debug, Clone, PartialEq)]
pub struct DdoResult {
    pub solution: NlpSolution,
    pub cost: f64,
    /// Post-hoc Monte Carlo β per constraint.
    pub beta: Vec<f64>,
    /// True when the reliability (and the design constraints) ran on `M1`
    /// instead of the true limit states.
    pub on_surrogate: bool,
    /// True when the cost function does not depend on the design at all.
    pub degenerate_cost: bool,
}

fn cost_is_degenerate(problem: &RbdoProblem) -> bool {
    let lo = problem.space.lower_bounds();
    let hi = problem.space.upper_bounds();
    let mid: Vec<f64> = lo.iter().zip(&hi).map(|(l, u)| 0.5 * (l + u)).collect();
    let probes = [&lo, &mid, &hi];
    let vals: Vec<f64> = probes.iter().map(|p| problem.cost.eval(p)).collect();
    let spread = vals.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v))
        - vals.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    spread.abs() <= 1e-12 * vals[1].abs().max(1.0)
}

pub fn run_ddo(problem: &RbdoProblem, config: &TsmConfig) -> Result<DdoResult> {
    problem.validate()?;
    config.validate()?;
    let source = GSource::from_true(problem);
    let solution = source.design_solve(problem, &problem.base_thresholds(), &config.nlp, &[])?;
    let analyzer =
        ReliabilityAnalyzer::new(problem.space.dim(), config.mcs_samples, config.seed);
    let mut beta = Vec::with_capacity(problem.n_constraints());
    for j in 0..problem.n_constraints() {
        beta.push(source.beta(problem, j, &solution.x, &analyzer)?.beta);
    }
    let cost = problem.cost.eval(&solution.x);
    Ok(DdoResult {
        solution,
        cost,
        beta,
        on_surrogate: false,
        degenerate_cost: cost_is_degenerate(problem),
    })
}

/// Deterministic design optimization against `M1`, for problems whose true
/// limit states cannot be evaluated directly (ingested sample tables).
pub fn run_ddo_on_models(
    problem: &RbdoProblem,
    config: &TsmConfig,
    surrogates: &TrainedSurrogates,
) -> Result<DdoResult> {
    problem.validate()?;
    config.validate()?;
    let analyzer =
        ReliabilityAnalyzer::new(problem.space.dim(), config.mcs_samples, config.seed);
    let source = GSource::from_models(surrogates, &analyzer);
    let solution = source.design_solve(problem, &problem.base_thresholds(), &config.nlp, &[])?;
    let mut beta = Vec::with_capacity(problem.n_constraints());
    for j in 0..problem.n_constraints() {
        beta.push(source.beta(problem, j, &solution.x, &analyzer)?.beta);
    }
    let cost = problem.cost.eval(&solution.x);
    Ok(DdoResult {
        solution,
        cost,
        beta,
        on_surrogate: true,
        degenerate_cost: cost_is_degenerate(problem),
    })
}
