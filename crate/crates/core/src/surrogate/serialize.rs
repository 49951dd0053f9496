//! Versioned on-disk form of a fitted model.
//!
//! The record is JSON with an explicit format tag and version. It carries
//! everything needed to rebuild the model exactly — basis families, retained
//! multi-indices, length-scales, nugget, and the training data — plus the
//! fitted coefficients and variance for audit. Loading refits the
//! factorization from the stored inputs and cross-checks the stored
//! coefficients, so a corrupted or hand-edited record is rejected rather
//! than silently producing a different surrogate.

use super::basis::{BasisFamily, MultiIndex};
use super::kriging::PcKrigingModel;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub const MODEL_FORMAT: &str = "pc-kriging";
pub const MODEL_VERSION: u32 = 1;

/// Serializable image of a fitted model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelRecord {
    pub format: String,
    pub version: u32,
    /// 1-D polynomial family per input dimension; also identifies the input
    /// space (box-scaled for legendre, standard-normal for hermite).
    pub families: Vec<BasisFamily>,
    /// Retained trend multi-indices, in selection order.
    pub indices: Vec<MultiIndex>,
    /// Trend coefficients, one per retained index (audit; recomputed on load).
    pub gamma: Vec<f64>,
    /// Matérn-5/2 length-scales per input dimension, scaled units.
    pub theta: Vec<f64>,
    /// Diagonal jitter added to the correlation matrix.
    pub nugget: f64,
    /// Process variance (audit; recomputed on load).
    pub sigma2: f64,
    /// Mean squared leave-one-out error of the accepted fit.
    pub loo_mse: f64,
    /// Training inputs in the model's scaled space, row per point.
    pub training_inputs: Vec<Vec<f64>>,
    /// Training outputs, one per row.
    pub training_outputs: Vec<f64>,
}

pub fn to_record(model: &PcKrigingModel) -> ModelRecord {
    let x = model.training_inputs();
    ModelRecord {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        families: model.families().to_vec(),
        indices: model.indices().to_vec(),
        gamma: model.gamma().to_vec(),
        theta: model.kernel().theta().to_vec(),
        nugget: model.kernel().nugget(),
        sigma2: model.sigma2(),
        loo_mse: model.loo_mse(),
        training_inputs: (0..x.nrows())
            .map(|i| (0..x.ncols()).map(|d| x[(i, d)]).collect())
            .collect(),
        training_outputs: model.training_outputs().iter().copied().collect(),
    }
}

pub fn from_record(record: &ModelRecord) -> Result<PcKrigingModel> {
    if record.format != MODEL_FORMAT {
        return Err(Error::Serialization(format!(
            "unknown model format `{}`",
            record.format
        )));
    }
    if record.version != MODEL_VERSION {
        return Err(Error::Serialization(format!(
            "unsupported model version {} (expected {MODEL_VERSION})",
            record.version
        )));
    }
    let n = record.training_inputs.len();
    let dim = record.families.len();
    if n == 0 || record.training_inputs.iter().any(|r| r.len() != dim) {
        return Err(Error::Serialization(
            "training inputs must be rectangular and match the family list".into(),
        ));
    }
    if record.training_outputs.len() != n {
        return Err(Error::Serialization(
            "training outputs must match training inputs".into(),
        ));
    }
    let x = DMatrix::from_fn(n, dim, |i, d| record.training_inputs[i][d]);
    let y = DVector::from_column_slice(&record.training_outputs);
    let model = PcKrigingModel::from_parts(
        record.families.clone(),
        record.indices.clone(),
        record.theta.clone(),
        record.nugget,
        x,
        y,
        record.loo_mse,
    )
    .map_err(|e| Error::Serialization(format!("record does not define a valid model: {e}")))?;

    // the stored coefficients must agree with the rebuilt fit
    if model.gamma().len() != record.gamma.len() {
        return Err(Error::Serialization(
            "stored coefficient count disagrees with the index list".into(),
        ));
    }
    for (got, want) in model.gamma().iter().zip(&record.gamma) {
        if (got - want).abs() > 1e-9 * (1.0 + want.abs()) {
            return Err(Error::Serialization(
                "stored trend coefficients disagree with the training data".into(),
            ));
        }
    }
    if (model.sigma2() - record.sigma2).abs() > 1e-9 * (1.0 + record.sigma2.abs()) {
        return Err(Error::Serialization(
            "stored process variance disagrees with the training data".into(),
        ));
    }
    Ok(model)
}

pub fn to_json(model: &PcKrigingModel) -> Result<String> {
    serde_json::to_string_pretty(&to_record(model))
        .map_err(|e| Error::Serialization(e.to_string()))
}

pub fn from_json(text: &str) -> Result<PcKrigingModel> {
    let record: ModelRecord =
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
    from_record(&record)
}
