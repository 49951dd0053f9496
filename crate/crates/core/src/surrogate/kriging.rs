//! Universal Kriging with a sparse polynomial-chaos trend.
//!
//! The model is y(x) = Σ γ_j ψ_j(x) + Z(x) with Z a stationary Gaussian
//! process under an anisotropic Matérn-5/2 correlation. Trend coefficients
//! come from generalized least squares at fixed length-scales; length-scales
//! come from multistart Nelder-Mead on the concentrated log-likelihood in
//! log-θ space, clipped to [1e-2, 1e2] per (scaled) input dimension.

use super::basis::{basis_row_into, BasisFamily, BasisScratch, MultiIndex};
use crate::error::{Error, Result};
use crate::fastmath::exp_fast;
use crate::optimizer::neldermead::nelder_mead;
use crate::sampling::sobol_points;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

pub const THETA_MIN: f64 = 1e-2;
pub const THETA_MAX: f64 = 1e2;
pub const NUGGET_MIN: f64 = 1e-12;
pub const NUGGET_MAX: f64 = 1e-4;
pub(crate) const NLL_FAIL: f64 = 1e30;
const SQRT5: f64 = 2.236_067_977_499_79;

/// Stationary correlation: Matérn-5/2 over the anisotropically scaled
/// distance h = sqrt(Σ ((a_k−b_k)/θ_k)²), plus a diagonal nugget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrigingKernel {
    theta: Vec<f64>,
    nugget: f64,
}

impl KrigingKernel {
    pub fn new(theta: Vec<f64>, nugget: f64) -> Result<Self> {
        if theta.is_empty() || theta.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::Fit("length-scales must be positive and finite".into()));
        }
        if !(NUGGET_MIN..=NUGGET_MAX).contains(&nugget) {
            return Err(Error::Fit(format!(
                "nugget {nugget} outside [{NUGGET_MIN}, {NUGGET_MAX}]"
            )));
        }
        Ok(Self { theta, nugget })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    /// Correlation between two points (without the nugget).
    pub fn correlation(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut h2 = 0.0;
        for ((x, y), t) in a.iter().zip(b).zip(&self.theta) {
            let d = (x - y) / t;
            h2 += d * d;
        }
        matern52(h2)
    }
}

#[inline]
fn matern52(h2: f64) -> f64 {
    let s = SQRT5 * h2.sqrt();
    (1.0 + s + 5.0 * h2 / 3.0) * exp_fast(-s)
}

/// Dense correlation matrix with nugget on the diagonal; `rows` is
/// row-major `n × dim`.
fn corr_matrix(rows: &[f64], n: usize, dim: usize, theta: &[f64], nugget: f64) -> DMatrix<f64> {
    let mut inv_t = vec![0.0; dim];
    for (s, t) in inv_t.iter_mut().zip(theta) {
        *s = 1.0 / t;
    }
    let mut r = DMatrix::zeros(n, n);
    for i in 0..n {
        r[(i, i)] = 1.0 + nugget;
        let a = &rows[i * dim..(i + 1) * dim];
        for j in 0..i {
            let b = &rows[j * dim..(j + 1) * dim];
            let mut h2 = 0.0;
            for k in 0..dim {
                let d = (a[k] - b[k]) * inv_t[k];
                h2 += d * d;
            }
            let c = matern52(h2);
            r[(i, j)] = c;
            r[(j, i)] = c;
        }
    }
    r
}

struct GlsFit {
    chol: Cholesky<f64, Dyn>,
    gamma: DVector<f64>,
    sigma2: f64,
    log_det: f64,
}

/// Whitened generalized least squares at fixed correlation; `None` when the
/// correlation matrix is not positive definite or the whitened design is
/// rank-deficient.
fn gls(rows: &[f64], n: usize, dim: usize, theta: &[f64], nugget: f64, f_mat: &DMatrix<f64>, y: &DVector<f64>) -> Option<GlsFit> {
    let r = corr_matrix(rows, n, dim, theta, nugget);
    let chol = Cholesky::new(r)?;
    let l = chol.l_dirty();
    let mut log_det = 0.0;
    for i in 0..n {
        log_det += l[(i, i)].ln();
    }
    let log_det = 2.0 * log_det;
    let a = l.solve_lower_triangular(y)?;
    let b = l.solve_lower_triangular(f_mat)?;
    let qr = b.clone().qr();
    let rt = qr.r();
    let mut dmax = 0.0f64;
    for i in 0..rt.nrows().min(rt.ncols()) {
        dmax = dmax.max(rt[(i, i)].abs());
    }
    for i in 0..rt.nrows().min(rt.ncols()) {
        if rt[(i, i)].abs() <= 1e-12 * dmax {
            return None;
        }
    }
    let qta = qr.q().transpose() * &a;
    let gamma = rt.solve_upper_triangular(&qta)?;
    let resid = a - b * &gamma;
    let sigma2 = (resid.dot(&resid) / n as f64).max(1e-300);
    Some(GlsFit {
        chol,
        gamma,
        sigma2,
        log_det,
    })
}

/// Concentrated negative log-likelihood at log length-scales `lt`.
fn concentrated_nll(
    rows: &[f64],
    n: usize,
    dim: usize,
    lt: &[f64],
    nugget: f64,
    f_mat: &DMatrix<f64>,
    y: &DVector<f64>,
) -> f64 {
    let theta: Vec<f64> = lt.iter().map(|v| v.exp()).collect();
    if theta.iter().any(|t| !t.is_finite() || *t <= 0.0) {
        return NLL_FAIL;
    }
    match gls(rows, n, dim, &theta, nugget, f_mat, y) {
        Some(fit) => 0.5 * (n as f64 * fit.sigma2.ln() + fit.log_det),
        None => NLL_FAIL,
    }
}

#[derive(Debug, Clone)]
pub(crate) struct MleOutcome {
    pub nll: f64,
    pub log_theta: Vec<f64>,
}

/// Multistart MLE over log-θ. Results are clipped to the search box and
/// re-scored there; the best (strictly smallest, earliest start on ties)
/// wins, which keeps the procedure deterministic.
pub(crate) fn mle_theta(
    rows: &[f64],
    n: usize,
    dim: usize,
    nugget: f64,
    f_mat: &DMatrix<f64>,
    y: &DVector<f64>,
    starts: &[Vec<f64>],
    maxiter: usize,
    xatol: f64,
    fatol: f64,
) -> MleOutcome {
    let lo = THETA_MIN.ln();
    let hi = THETA_MAX.ln();
    let mut best: Option<MleOutcome> = None;
    for start in starts {
        let res = nelder_mead(
            |lt| concentrated_nll(rows, n, dim, lt, nugget, f_mat, y),
            start,
            xatol,
            fatol,
            maxiter,
        );
        let clipped: Vec<f64> = res.x.iter().map(|v| v.clamp(lo, hi)).collect();
        let f = concentrated_nll(rows, n, dim, &clipped, nugget, f_mat, y);
        if best.as_ref().map_or(true, |b| f < b.nll) {
            best = Some(MleOutcome {
                nll: f,
                log_theta: clipped,
            });
        }
    }
    best.expect("at least one start")
}

/// Sobol multistart points in log-θ space over the full search box.
pub(crate) fn theta_starts(dim: usize, count: usize) -> Result<Vec<Vec<f64>>> {
    let lo = THETA_MIN.ln();
    let hi = THETA_MAX.ln();
    Ok(sobol_points(dim, count, 0)?
        .into_iter()
        .map(|p| p.iter().map(|t| lo + (hi - lo) * t).collect())
        .collect())
}

/// Closed-form leave-one-out mean squared error (Dubrule): with
/// B = R⁻¹ − R⁻¹F(FᵀR⁻¹F)⁻¹FᵀR⁻¹, the LOO residual at point i is
/// (By)_i / B_ii.
pub fn loo_dubrule(
    rows: &[f64],
    n: usize,
    dim: usize,
    theta: &[f64],
    nugget: f64,
    f_mat: &DMatrix<f64>,
    y: &DVector<f64>,
) -> Result<f64> {
    let r = corr_matrix(rows, n, dim, theta, nugget);
    let chol = Cholesky::new(r)
        .ok_or_else(|| Error::Fit("correlation matrix not positive definite".into()))?;
    let rinv = chol.inverse();
    let rf = &rinv * f_mat;
    let g = f_mat.transpose() * &rf;
    let cholg = Cholesky::new(g)
        .ok_or_else(|| Error::Fit("trend normal matrix not positive definite".into()))?;
    let w = cholg.solve(&rf.transpose());
    let b11 = rinv - &rf * w;
    let by = &b11 * y;
    let mut dmax = 0.0f64;
    for i in 0..n {
        dmax = dmax.max(b11[(i, i)]);
    }
    if !(dmax > 0.0) {
        return Err(Error::Fit("leave-one-out denominators degenerate".into()));
    }
    let mut acc = 0.0;
    for i in 0..n {
        let d = b11[(i, i)];
        if !(d > 1e-12 * dmax) {
            return Err(Error::Fit("leave-one-out denominators degenerate".into()));
        }
        let e = by[i] / d;
        acc += e * e;
    }
    let mse = acc / n as f64;
    if mse.is_finite() {
        Ok(mse)
    } else {
        Err(Error::Fit("leave-one-out error overflowed".into()))
    }
}

/// Reference LOO path: N explicit refits at the same length-scales. Slow but
/// assumption-free; used when the closed form is numerically suspect.
pub fn loo_refit(
    rows: &[f64],
    n: usize,
    dim: usize,
    theta: &[f64],
    nugget: f64,
    f_mat: &DMatrix<f64>,
    y: &DVector<f64>,
) -> Result<f64> {
    let k = f_mat.ncols();
    let mut acc = 0.0;
    for leave in 0..n {
        let mut sub_rows = Vec::with_capacity((n - 1) * dim);
        let mut sub_f = DMatrix::zeros(n - 1, k);
        let mut sub_y = DVector::zeros(n - 1);
        let mut at = 0;
        for i in 0..n {
            if i == leave {
                continue;
            }
            sub_rows.extend_from_slice(&rows[i * dim..(i + 1) * dim]);
            for j in 0..k {
                sub_f[(at, j)] = f_mat[(i, j)];
            }
            sub_y[at] = y[i];
            at += 1;
        }
        let fit = gls(&sub_rows, n - 1, dim, theta, nugget, &sub_f, &sub_y)
            .ok_or_else(|| Error::Fit("leave-one-out refit failed".into()))?;
        let resid_phys = &sub_y - &sub_f * &fit.gamma;
        let alpha = fit.chol.solve(&resid_phys);
        let x_i = &rows[leave * dim..(leave + 1) * dim];
        let kernel = KrigingKernel {
            theta: theta.to_vec(),
            nugget,
        };
        let mut pred = 0.0;
        for j in 0..k {
            pred += f_mat[(leave, j)] * fit.gamma[j];
        }
        for (i, a) in alpha.iter().enumerate() {
            pred += a * kernel.correlation(x_i, &sub_rows[i * dim..(i + 1) * dim]);
        }
        let e = y[leave] - pred;
        acc += e * e;
    }
    Ok(acc / n as f64)
}

/// Closed-form LOO with automatic fallback to explicit refits.
pub(crate) fn loo_mse(
    rows: &[f64],
    n: usize,
    dim: usize,
    theta: &[f64],
    nugget: f64,
    f_mat: &DMatrix<f64>,
    y: &DVector<f64>,
) -> Result<f64> {
    match loo_dubrule(rows, n, dim, theta, nugget, f_mat, y) {
        Ok(v) => Ok(v),
        Err(_) => loo_refit(rows, n, dim, theta, nugget, f_mat, y),
    }
}

/// Fitted PC-Kriging model. Inputs live in the model's scaled space:
/// box-scaled [-1, 1] coordinates for Legendre dimensions, standard-normal
/// coordinates for Hermite dimensions.
#[derive(Debug, Clone)]
pub struct PcKrigingModel {
    families: Vec<BasisFamily>,
    indices: Vec<MultiIndex>,
    gamma: DVector<f64>,
    kernel: KrigingKernel,
    sigma2: f64,
    loo_mse: f64,
    x_train: DMatrix<f64>,
    y_train: DVector<f64>,
    max_degree: u32,
    // derived at construction, never serialized
    rows: Vec<f64>,
    alpha: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    rinv_diag: DVector<f64>,
}

/// Reusable per-thread buffers for prediction.
#[derive(Debug, Clone)]
pub struct PredictScratch {
    basis: BasisScratch,
    row: Vec<f64>,
}

impl PcKrigingModel {
    /// Assemble a model from its persistent parts, recomputing the cached
    /// factorization. Used by fitting and by deserialization.
    pub fn from_parts(
        families: Vec<BasisFamily>,
        indices: Vec<MultiIndex>,
        theta: Vec<f64>,
        nugget: f64,
        x_train: DMatrix<f64>,
        y_train: DVector<f64>,
        loo_mse: f64,
    ) -> Result<Self> {
        let n = x_train.nrows();
        let dim = x_train.ncols();
        if n < 2 || dim == 0 {
            return Err(Error::Fit("need at least two training points".into()));
        }
        if families.len() != dim {
            return Err(Error::Fit("one basis family per input dimension required".into()));
        }
        if indices.is_empty() || indices.iter().any(|i| i.len() != dim) {
            return Err(Error::Fit("trend indices must match input dimension".into()));
        }
        if y_train.len() != n {
            return Err(Error::Fit("outputs must match training points".into()));
        }
        let kernel = KrigingKernel::new(theta, nugget)?;
        let rows = matrix_rows(&x_train);
        let f_mat = super::basis::basis_matrix(&families, &indices, &x_train);
        let fit = gls(&rows, n, dim, kernel.theta(), nugget, &f_mat, &y_train)
            .ok_or_else(|| Error::Fit("ill-conditioned correlation matrix".into()))?;
        let resid_phys = &y_train - &f_mat * &fit.gamma;
        let alpha = fit.chol.solve(&resid_phys);
        let rinv = fit.chol.inverse();
        let rinv_diag = DVector::from_fn(n, |i, _| rinv[(i, i)]);
        let max_degree = indices
            .iter()
            .flat_map(|i| i.iter().copied())
            .max()
            .unwrap_or(0);
        Ok(Self {
            families,
            indices,
            gamma: fit.gamma,
            kernel,
            sigma2: fit.sigma2,
            loo_mse,
            x_train,
            y_train,
            max_degree,
            rows,
            alpha,
            chol: fit.chol,
            rinv_diag,
        })
    }

    pub fn families(&self) -> &[BasisFamily] {
        &self.families
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn gamma(&self) -> &[f64] {
        self.gamma.as_slice()
    }

    pub fn kernel(&self) -> &KrigingKernel {
        &self.kernel
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn loo_mse(&self) -> f64 {
        self.loo_mse
    }

    pub fn dim(&self) -> usize {
        self.x_train.ncols()
    }

    pub fn training_inputs(&self) -> &DMatrix<f64> {
        &self.x_train
    }

    pub fn training_outputs(&self) -> &DVector<f64> {
        &self.y_train
    }

    pub fn scratch(&self) -> PredictScratch {
        PredictScratch {
            basis: BasisScratch::new(self.dim(), self.max_degree),
            row: vec![0.0; self.indices.len()],
        }
    }

    /// Trend value at `x` (the far-field limit of the mean).
    pub fn trend_value(&self, x: &[f64]) -> f64 {
        let mut scratch = self.scratch();
        self.trend_with(x, &mut scratch)
    }

    fn trend_with(&self, x: &[f64], scratch: &mut PredictScratch) -> f64 {
        basis_row_into(
            &self.families,
            &self.indices,
            x,
            &mut scratch.basis,
            &mut scratch.row,
        );
        scratch
            .row
            .iter()
            .zip(self.gamma.iter())
            .map(|(p, g)| p * g)
            .sum()
    }

    /// Posterior mean using caller-provided scratch; the hot path for
    /// sampling loops.
    pub fn predict_mean_with(&self, x: &[f64], scratch: &mut PredictScratch) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        let mut acc = self.trend_with(x, scratch);
        let dim = self.dim();
        for (i, a) in self.alpha.iter().enumerate() {
            acc += a * self.kernel.correlation(x, &self.rows[i * dim..(i + 1) * dim]);
        }
        acc
    }

    pub fn predict_mean(&self, x: &[f64]) -> f64 {
        let mut scratch = self.scratch();
        self.predict_mean_with(x, &mut scratch)
    }

    /// Posterior mean and variance. The variance is the process-variance
    /// reduction σ²(1 − rᵀR⁻¹r), clamped at zero; trend-coefficient
    /// uncertainty is not added, so the far-field limit is exactly σ².
    ///
    /// A query that coincides bit-for-bit with a training point takes a
    /// closed form, σ²τ(1 − τ(R⁻¹)_ii): the generic expression loses that
    /// O(τ) value to cancellation.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let mut scratch = self.scratch();
        let mean = self.predict_mean_with(x, &mut scratch);
        let dim = self.dim();
        let tau = self.kernel.nugget();
        for i in 0..self.x_train.nrows() {
            if x == &self.rows[i * dim..(i + 1) * dim] {
                let var = self.sigma2 * tau * (1.0 - tau * self.rinv_diag[i]);
                return (mean, var.max(0.0));
            }
        }
        let n = self.x_train.nrows();
        let r = DVector::from_fn(n, |i, _| {
            self.kernel.correlation(x, &self.rows[i * dim..(i + 1) * dim])
        });
        let var = match self.chol.l_dirty().solve_lower_triangular(&r) {
            Some(rw) => self.sigma2 * (1.0 - rw.dot(&rw)),
            None => self.sigma2,
        };
        (mean, var.max(0.0))
    }
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<f64> {
    let mut rows = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            rows.push(m[(i, j)]);
        }
    }
    rows
}

/// Merge bitwise-identical input rows, averaging their outputs.
pub(crate) fn merge_duplicates(
    inputs: &DMatrix<f64>,
    outputs: &DVector<f64>,
) -> (DMatrix<f64>, DVector<f64>) {
    let n = inputs.nrows();
    let dim = inputs.ncols();
    let mut groups: Vec<(Vec<u64>, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let key: Vec<u64> = (0..dim).map(|d| inputs[(i, d)].to_bits()).collect();
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(i),
            None => groups.push((key, vec![i])),
        }
    }
    if groups.len() == n {
        return (inputs.clone(), outputs.clone());
    }
    let m = groups.len();
    let mut xi = DMatrix::zeros(m, dim);
    let mut yi = DVector::zeros(m);
    for (g, (_, members)) in groups.iter().enumerate() {
        for d in 0..dim {
            xi[(g, d)] = inputs[(members[0], d)];
        }
        yi[g] = members.iter().map(|&i| outputs[i]).sum::<f64>() / members.len() as f64;
    }
    (xi, yi)
}

/// Knobs for a fixed-trend fit.
#[derive(Debug, Clone)]
pub struct FitSettings {
    pub mle_starts: usize,
    pub mle_maxiter: usize,
    pub mle_xatol: f64,
    pub mle_fatol: f64,
    pub nugget_start: f64,
    pub nugget_max: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self {
            mle_starts: 5,
            mle_maxiter: 400,
            mle_xatol: 1e-8,
            mle_fatol: 1e-8,
            nugget_start: 1e-10,
            nugget_max: NUGGET_MAX,
        }
    }
}

/// Fit a PC-Kriging model with the given trend indices. The nugget starts
/// small and escalates tenfold whenever the correlation matrix resists
/// factorization.
pub fn fit_kriging(
    inputs: &DMatrix<f64>,
    outputs: &DVector<f64>,
    families: &[BasisFamily],
    indices: &[MultiIndex],
    settings: &FitSettings,
) -> Result<PcKrigingModel> {
    if inputs.nrows() != outputs.len() {
        return Err(Error::Fit("inputs and outputs must have equal length".into()));
    }
    let (inputs, outputs) = merge_duplicates(inputs, outputs);
    let n = inputs.nrows();
    let dim = inputs.ncols();
    if n < indices.len() + 2 {
        return Err(Error::Fit(format!(
            "{n} training points cannot support {} trend terms (need k + 2)",
            indices.len()
        )));
    }
    let f_mat = super::basis::basis_matrix(families, indices, &inputs);
    let rows = matrix_rows(&inputs);
    let starts = theta_starts(dim, settings.mle_starts)?;

    let mut nugget = settings.nugget_start;
    loop {
        let outcome = mle_theta(
            &rows,
            n,
            dim,
            nugget,
            &f_mat,
            &outputs,
            &starts,
            settings.mle_maxiter,
            settings.mle_xatol,
            settings.mle_fatol,
        );
        if outcome.nll < NLL_FAIL / 2.0 {
            let theta: Vec<f64> = outcome.log_theta.iter().map(|v| v.exp()).collect();
            if let Ok(loo) = loo_mse(&rows, n, dim, &theta, nugget, &f_mat, &outputs) {
                if let Ok(model) = PcKrigingModel::from_parts(
                    families.to_vec(),
                    indices.to_vec(),
                    theta,
                    nugget,
                    inputs.clone(),
                    outputs.clone(),
                    loo,
                ) {
                    return Ok(model);
                }
            }
        }
        nugget *= 10.0;
        if nugget > settings.nugget_max {
            return Err(Error::Fit(
                "correlation matrix stayed ill-conditioned after nugget escalation".into(),
            ));
        }
    }
}
