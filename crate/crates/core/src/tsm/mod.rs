//! The threshold shift driver.
//!
//! An RBDO problem asks for the cheapest design whose failure probabilities
//! stay below target. The driver decouples it: a deterministic design problem
//! whose constraint thresholds have been shifted downward, and a calibration
//! problem that picks the shifts so the resulting designs hit their target
//! reliability indices. Thresholds and designs talk to each other only
//! through two surrogates: `M1` stands in for the limit states, `M2` for the
//! map from threshold vectors to reliability indices.
//!
//! Everything downstream of the `M1` training samples is surrogate work, so
//! the true-function-call count of a run equals the sum of the `M1` design-
//! of-experiments sizes, no matter how many iterations the calibration takes.

mod driver;
mod inputs;
mod report;
mod surrogate1;
mod threshold;

pub use driver::{
    generate_beta_table, run_ablation, run_ddo, run_ddo_on_models, run_ds_tsm,
    run_ds_tsm_with_models, AblationMode, DdoResult,
};
pub use inputs::InputMap;
pub use report::{beta_display, ddo_report_text, report_text, trace_text};
pub use surrogate1::{solve_deterministic_design, train_surrogate1, TrainedSurrogates};
pub use threshold::{fit_surrogate2, solve_threshold_problem, Surrogate2, ThresholdSolution};

use crate::error::{Error, Result};
use crate::optimizer::NlpConfig;
use crate::probspace::ProblemSpace;
use std::fmt;
use std::sync::Arc;

/// A shared-ownership scalar evaluator. Limit states and cost functions are
/// stored this way so problems stay cloneable and evaluation can run from
/// parallel workers.
#[derive(Clone)]
pub struct Evaluator(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>);

impl Evaluator {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
}

impl fmt::Debug for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Evaluator(<fn>)")
    }
}

/// One probabilistic constraint: `P(g(d, X) > base_threshold) ≤ Φ(−beta_target)`.
///
/// The evaluator is exceedance-canonicalized — callers encode their limit
/// state so that values *above* `base_threshold` mean failure. It receives
/// the full physical input vector (design-linked inputs first, then noise,
/// in [`ProblemSpace`] order).
#[derive(Debug, Clone)]
pub struct ProbabilisticConstraint {
    pub name: String,
    pub g: Evaluator,
    /// Original threshold `c_{s,0}`, in limit-state units.
    pub base_threshold: f64,
    /// Target reliability index, strictly positive.
    pub beta_target: f64,
    /// Training-sample budget for this constraint's `M1` model.
    pub doe_size: usize,
    /// Central probability mass covered by the noise-variable training box
    /// (per marginal). 0.9999 puts the box at the 5e-5 / 1-5e-5 quantiles.
    pub noise_quantile_mass: f64,
}

impl ProbabilisticConstraint {
    pub fn new<F>(name: &str, g: F, base_threshold: f64, beta_target: f64, doe_size: usize) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            g: Evaluator::new(g),
            base_threshold,
            beta_target,
            doe_size,
            noise_quantile_mass: 0.9999,
        }
    }
}

/// A full RBDO problem: cost over designs, probabilistic constraints over the
/// joint (design, noise) space, and the input-space description linking them.
#[derive(Debug, Clone)]
pub struct RbdoProblem {
    pub name: String,
    /// Cost evaluated on the design vector (the means of the design-linked
    /// inputs).
    pub cost: Evaluator,
    pub constraints: Vec<ProbabilisticConstraint>,
    pub space: ProblemSpace,
    /// Optional deterministic constraints `h(d) ≤ 0` on the design vector.
    pub deterministic: Vec<Evaluator>,
    pub initial_design: Vec<f64>,
}

impl RbdoProblem {
    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn base_thresholds(&self) -> Vec<f64> {
        self.constraints.iter().map(|c| c.base_threshold).collect()
    }

    pub fn beta_targets(&self) -> Vec<f64> {
        self.constraints.iter().map(|c| c.beta_target).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.space.validate()?;
        if self.constraints.is_empty() {
            return Err(Error::Problem(
                "at least one probabilistic constraint required".into(),
            ));
        }
        if self.initial_design.len() != self.space.n_design() {
            return Err(Error::Problem(format!(
                "initial design has {} entries for {} design variables",
                self.initial_design.len(),
                self.space.n_design()
            )));
        }
        for (x, v) in self.initial_design.iter().zip(&self.space.design) {
            if !(v.lower - 1e-12 <= *x && *x <= v.upper + 1e-12) {
                return Err(Error::Problem(format!(
                    "initial design coordinate {x} outside [{}, {}] for `{}`",
                    v.lower, v.upper, v.name
                )));
            }
        }
        for c in &self.constraints {
            if !(c.beta_target > 0.0) {
                return Err(Error::Problem(format!(
                    "constraint `{}`: beta target must be positive, got {}",
                    c.name, c.beta_target
                )));
            }
            if c.doe_size < 3 {
                return Err(Error::Problem(format!(
                    "constraint `{}`: M1 DoE size {} below the 3-sample fitting minimum",
                    c.name, c.doe_size
                )));
            }
            if !(c.noise_quantile_mass > 0.0 && c.noise_quantile_mass < 1.0) {
                return Err(Error::Problem(format!(
                    "constraint `{}`: noise quantile mass must lie in (0,1)",
                    c.name
                )));
            }
            if !c.base_threshold.is_finite() {
                return Err(Error::Problem(format!(
                    "constraint `{}`: base threshold must be finite",
                    c.name
                )));
            }
        }
        Ok(())
    }
}

/// Driver configuration. Defaults reproduce the reference settings used by
/// every benchmark: α = 1/3, ε₁ = 2.5, ε_tol = 10⁻³, 100 iterations,
/// 10⁶ Monte Carlo samples, degree-5 chaos trends.
#[derive(Debug, Clone)]
pub struct TsmConfig {
    /// Lower-bound fraction for positive base thresholds (Algorithm bounds
    /// rule: `c_L = α·c_{s,0}` when `c_{s,0} > 0`).
    pub alpha: f64,
    /// Active-set factor: a constraint is active when some table row shows
    /// β ≤ eps_active · beta_target.
    pub eps_active: f64,
    /// Convergence tolerance on |beta_target − β*| over the active set.
    pub eps_tol: f64,
    pub max_iterations: usize,
    pub mcs_samples: usize,
    /// Threshold-table row count; `None` means `max(16, 8·n_p)`.
    pub n_s2: Option<usize>,
    pub seed: u64,
    /// Maximum total degree of the polynomial-chaos trends (both surrogates).
    pub max_degree: u32,
    pub nlp: NlpConfig,
}

impl Default for TsmConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0 / 3.0,
            eps_active: 2.5,
            eps_tol: 1e-3,
            max_iterations: 100,
            mcs_samples: 1_000_000,
            n_s2: None,
            seed: 1,
            max_degree: 5,
            nlp: NlpConfig::default(),
        }
    }
}

impl TsmConfig {
    pub fn table_rows(&self, n_constraints: usize) -> usize {
        self.n_s2.unwrap_or_else(|| 16usize.max(8 * n_constraints))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Problem(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        if !(self.eps_active > 1.0) {
            return Err(Error::Problem(format!(
                "active-set factor must exceed 1, got {}",
                self.eps_active
            )));
        }
        if !(self.eps_tol > 0.0) {
            return Err(Error::Problem(format!(
                "convergence tolerance must be positive, got {}",
                self.eps_tol
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Problem("need at least one iteration".into()));
        }
        if self.mcs_samples < 10_000 {
            return Err(Error::Problem(format!(
                "Monte Carlo sample count {} below the 10^4 minimum",
                self.mcs_samples
            )));
        }
        if self.max_degree == 0 {
            return Err(Error::Problem("trend degree cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-constraint threshold search interval `[lower, upper]` with
/// `upper = c_{s,0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Search bounds for the calibration problem. The upper bound is always the
/// original threshold; the lower bound is `α·c_{s,0}` for positive
/// thresholds and −3 otherwise (an empirical floor — the calibration solver
/// expands past it when a target is unreachable inside). Base thresholds at
/// or below the floor push the floor down by the same 3-unit margin so the
/// interval stays proper.
pub fn determine_threshold_bounds(base_thresholds: &[f64], alpha: f64) -> Result<ThresholdBounds> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Problem(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    let mut lower = Vec::with_capacity(base_thresholds.len());
    for &c0 in base_thresholds {
        if !c0.is_finite() {
            return Err(Error::Problem(format!("non-finite base threshold {c0}")));
        }
        lower.push(if c0 > 0.0 {
            alpha * c0
        } else if c0 > -3.0 {
            -3.0
        } else {
            c0 - 3.0
        });
    }
    Ok(ThresholdBounds {
        lower,
        upper: base_thresholds.to_vec(),
    })
}

/// Threshold-vector / reliability-index training table for `M2`.
///
/// Row r: thresholds[r] was fed to the deterministic design problem, which
/// produced designs[r]; betas[r][i] is the Monte Carlo reliability index of
/// constraint i at that design (against the *original* thresholds). Rows
/// whose design problem had no feasible point carry `feasible = false`, keep
/// the least-violating design for audit, and hold NaN betas; they are
/// excluded from `M2` training and from active-set column minima.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaTable {
    pub thresholds: Vec<Vec<f64>>,
    pub betas: Vec<Vec<f64>>,
    pub designs: Vec<Vec<f64>>,
    pub feasible: Vec<bool>,
}

impl BetaTable {
    pub fn rows(&self) -> usize {
        self.thresholds.len()
    }

    pub fn feasible_rows(&self) -> usize {
        self.feasible.iter().filter(|&&f| f).count()
    }

    /// Smallest β seen for a constraint over feasible rows; `None` when no
    /// row is feasible.
    pub fn column_min(&self, constraint: usize) -> Option<f64> {
        self.betas
            .iter()
            .zip(&self.feasible)
            .filter(|(_, &ok)| ok)
            .map(|(row, _)| row[constraint])
            .fold(None, |acc, b| {
                Some(match acc {
                    None => b,
                    Some(a) if b < a => b,
                    Some(a) => a,
                })
            })
    }
}

/// Constraints whose table column dips to or below `eps_active · beta_target`
/// are active; the rest are safely over-reliable everywhere the table looked.
/// Columns with no feasible rows are conservatively kept active.
pub fn select_active_constraints(table: &BetaTable, beta_targets: &[f64], eps_active: f64) -> Vec<usize> {
    (0..beta_targets.len())
        .filter(|&i| match table.column_min(i) {
            Some(min) => min <= eps_active * beta_targets[i],
            None => true,
        })
        .collect()
}

/// One outer iteration of the calibration loop.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Full threshold vector used this iteration (inactive slots keep
    /// `c_{s,0}`).
    pub thresholds: Vec<f64>,
    pub design: Vec<f64>,
    /// β* per *active* constraint, Monte Carlo on `M1`.
    pub beta_active: Vec<f64>,
    /// True when the threshold solver could not reach predicted feasibility
    /// and returned its least-violating point.
    pub threshold_flagged: bool,
    /// True when the design problem had no feasible point under these
    /// thresholds.
    pub design_flagged: bool,
}

/// Driver output: the final design with its cost, Monte Carlo reliability
/// indices for every constraint, and the full audit trail.
#[derive(Debug, Clone, PartialEq)]
pub struct TsmResult {
    pub design: Vec<f64>,
    pub cost: f64,
    /// Final β per constraint (all of them, active or not), Monte Carlo at
    /// `design`.
    pub beta: Vec<f64>,
    pub active: Vec<usize>,
    pub trace: Vec<IterationRecord>,
    pub table: BetaTable,
    /// True limit-state evaluations consumed by the run.
    pub function_calls: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl TsmResult {
    /// The convergence gaps `beta_target − β*` of the last iteration, in
    /// active-set order. Empty when the active set is empty (pure
    /// deterministic fallback).
    pub fn final_gaps(&self, beta_targets: &[f64]) -> Vec<f64> {
        match self.trace.last() {
            Some(rec) => self
                .active
                .iter()
                .zip(&rec.beta_active)
                .map(|(&i, &b)| beta_targets[i] - b)
                .collect(),
            None => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bounds_rule_exact_cases() {
        let b = determine_threshold_bounds(&[1.0, 0.0, -2.0], 1.0 / 3.0).unwrap();
        assert_abs_diff_eq!(b.lower[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(b.upper[0], 1.0);
        assert_eq!(b.lower[1], -3.0);
        assert_eq!(b.upper[1], 0.0);
        assert_eq!(b.lower[2], -3.0);
        assert_eq!(b.upper[2], -2.0);
    }

    #[test]
    fn deep_negative_threshold_keeps_interval_proper() {
        let b = determine_threshold_bounds(&[-5.0], 1.0 / 3.0).unwrap();
        assert_eq!(b.lower[0], -8.0);
        assert_eq!(b.upper[0], -5.0);
    }

    #[test]
    fn bounds_reject_bad_alpha() {
        assert!(determine_threshold_bounds(&[1.0], 0.0).is_err());
        assert!(determine_threshold_bounds(&[1.0], 1.0).is_err());
        assert!(determine_threshold_bounds(&[f64::NAN], 0.5).is_err());
    }

    fn table_with_columns(mins: &[f64]) -> BetaTable {
        // two feasible rows per column: the requested min and min + 1
        BetaTable {
            thresholds: vec![vec![0.0; mins.len()]; 2],
            betas: vec![mins.to_vec(), mins.iter().map(|m| m + 1.0).collect()],
            designs: vec![vec![0.0]; 2],
            feasible: vec![true, true],
        }
    }

    #[test]
    fn saturated_column_is_inactive() {
        let t = table_with_columns(&[8.0]);
        assert!(select_active_constraints(&t, &[2.0], 2.5).is_empty());
    }

    #[test]
    fn boundary_column_is_active_inclusive() {
        let t = table_with_columns(&[5.0]);
        assert_eq!(select_active_constraints(&t, &[2.0], 2.5), vec![0]);
    }

    #[test]
    fn zero_columns_all_active() {
        let t = table_with_columns(&[0.0, 0.0, 0.0]);
        assert_eq!(
            select_active_constraints(&t, &[2.0, 3.0, 1.5], 2.5),
            vec![0, 1, 2]
        );
    }

    #[test]
    fn infeasible_rows_do_not_vote() {
        let t = BetaTable {
            thresholds: vec![vec![0.0], vec![-1.0]],
            betas: vec![vec![8.0], vec![f64::NAN]],
            designs: vec![vec![0.0], vec![0.0]],
            feasible: vec![true, false],
        };
        assert_eq!(t.column_min(0), Some(8.0));
        assert!(select_active_constraints(&t, &[2.0], 2.5).is_empty());
    }

    #[test]
    fn all_rows_infeasible_keeps_constraint_active() {
        let t = BetaTable {
            thresholds: vec![vec![0.0]],
            betas: vec![vec![f64::NAN]],
            designs: vec![vec![0.0]],
            feasible: vec![false],
        };
        assert_eq!(t.column_min(0), None);
        assert_eq!(select_active_constraints(&t, &[2.0], 2.5), vec![0]);
    }

    #[test]
    fn config_validation_catches_bad_knobs() {
        let ok = TsmConfig::default();
        assert!(ok.validate().is_ok());
        assert!(TsmConfig { alpha: 1.0, ..ok.clone() }.validate().is_err());
        assert!(TsmConfig { eps_active: 1.0, ..ok.clone() }.validate().is_err());
        assert!(TsmConfig { eps_tol: 0.0, ..ok.clone() }.validate().is_err());
        assert!(TsmConfig { mcs_samples: 100, ..ok.clone() }.validate().is_err());
        assert!(TsmConfig { max_iterations: 0, ..ok }.validate().is_err());
    }

    #[test]
    fn default_table_rows_scale_with_constraints() {
        let c = TsmConfig::default();
        assert_eq!(c.table_rows(1), 16);
        assert_eq!(c.table_rows(2), 16);
        assert_eq!(c.table_rows(3), 24);
        assert_eq!(c.table_rows(10), 80);
        assert_eq!(TsmConfig { n_s2: Some(5), ..c }.table_rows(3), 5);
    }
}
