//! Surrogate models: PC-Kriging and its sparse-trend (OPC) variant.
//!
//! A polynomial-chaos trend captures the global shape of a limit state and a
//! Matérn-5/2 Gaussian process absorbs what the trend misses. The module is
//! agnostic to what the inputs mean; callers map physical variables into the
//! model's scaled space (box-scaled [-1, 1] per Legendre dimension,
//! standard-normal units per Hermite dimension) and back.

pub mod basis;
pub mod kriging;
pub mod lar;
pub mod opc;
pub mod serialize;

pub use basis::{BasisFamily, MultiIndex, MultiIndexSet};
pub use kriging::{
    fit_kriging, loo_dubrule, loo_refit, FitSettings, KrigingKernel, PcKrigingModel,
    PredictScratch,
};
pub use lar::{lar_rank, LarRanking};
pub use opc::{fit_opc_kriging, OpcSettings};
pub use serialize::{from_json, to_json, ModelRecord};
