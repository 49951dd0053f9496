//! Reliability-based design optimization (RBDO) through a dual-surrogate
//! threshold shift method.
//!
//! The toolkit decouples an RBDO problem
//!
//! ```text
//! min  cost(d)   s.t.  P(G_i(d, X) > c_{s,0}^i) <= Phi(-beta_target^i),   d in [d_lo, d_hi]
//! ```
//!
//! into two cheaper problems that are iterated to convergence:
//!
//! 1. a deterministic design problem whose constraint thresholds have been
//!    shifted from `c_{s,0}` to calibrated values `c_s`, and
//! 2. a threshold-calibration problem that picks `c_s` so that the reliability
//!    indices of the resulting designs hit their targets.
//!
//! Two PC-Kriging surrogates make the iteration affordable: `M1` replaces the
//! limit states `G_i` (trained once on a Sobol design), and `M2` maps threshold
//! vectors to reliability indices (enriched by one row per outer iteration).
//! All reliability indices are computed by Monte Carlo simulation on `M1`;
//! the only true-function evaluations are the `M1` training samples.
//!
//! Crate layout:
//! - [`probspace`]: marginal distributions, moment parameterization, standard-normal transforms
//! - [`sampling`]: Sobol / Latin-hypercube designs and Monte Carlo reliability estimation
//! - [`expr`]: the arithmetic expression language limit states are written in
//! - [`surrogate`]: PC-Kriging and OPC-Kriging (LAR-selected sparse trend)
//! - [`optimizer`]: derivative-free constrained minimization (augmented Lagrangian over Nelder-Mead)
//! - [`tsm`]: the threshold shift driver, ablation modes, and deterministic design baseline
//! - [`benchmarks`]: five ready-made benchmark problems plus literature reference records

pub mod error;
pub mod expr;
mod fastmath;
pub mod optimizer;
pub mod probspace;
pub mod sampling;
pub mod special;
pub mod surrogate;
pub mod benchmarks;
pub mod tsm;

pub use error::{Error, Result};
pub use probspace::{DesignVariable, Dispersion, MarginalDistribution, ProblemSpace};
pub use sampling::{ReliabilityAnalyzer, ReliabilityEstimate};
pub use surrogate::PcKrigingModel;
pub use tsm::{ProbabilisticConstraint, RbdoProblem, TsmConfig, TsmResult};
