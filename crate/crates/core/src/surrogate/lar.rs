//! Least-angle regression used as a ranking device.
//!
//! The sparse-trend sweep only needs the order in which candidate basis
//! functions become active, not the regression path itself. Columns are
//! standardized and raced against the centered outputs; the constant column
//! is excluded from the race and always ranked first. Candidates the race
//! never reaches (numerical breakdown, zero residual) are appended in their
//! original graded-lexicographic order, which doubles as the deterministic
//! tie-break.

use nalgebra::{Cholesky, DMatrix, DVector};

/// Outcome of ranking: `order` lists candidate column positions, constant
/// column first; `degenerate` lists zero-variance columns dropped from
/// consideration entirely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LarRanking {
    pub order: Vec<usize>,
    pub degenerate: Vec<usize>,
}

/// Rank candidate columns of `psi` (column 0 must be the constant basis) by
/// least-angle entry order against `y`.
pub fn lar_rank(psi: &DMatrix<f64>, y: &DVector<f64>) -> LarRanking {
    let n = psi.nrows();
    let p = psi.ncols();
    assert!(n >= 2, "need at least two rows to rank columns");
    assert!(p >= 1, "need at least the constant column");

    // standardize racing columns; racing index r maps to column r+1 of psi
    let mut racing: Vec<usize> = Vec::with_capacity(p - 1);
    let mut degenerate = Vec::new();
    let mut xs = DMatrix::zeros(n, p - 1);
    for col in 1..p {
        let c = psi.column(col);
        let mean = c.sum() / n as f64;
        let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        if sd <= 0.0 || !sd.is_finite() {
            degenerate.push(col);
            continue;
        }
        let r = racing.len();
        for i in 0..n {
            xs[(i, r)] = (c[i] - mean) / sd;
        }
        racing.push(col);
    }
    let m = racing.len();
    let xs = xs.columns(0, m).into_owned();

    let ymean = y.sum() / n as f64;
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - ymean));

    let mut corr = xs.transpose() * &yc; // running correlations with residual
    let mut active: Vec<usize> = Vec::new(); // racing indices, entry order
    let mut in_active = vec![false; m];
    let max_active = m.min(n.saturating_sub(1));
    let tol = 1e-10 * (1.0 + yc.amax());

    while active.len() < max_active {
        // strongest remaining correlation; ties resolved toward the earlier
        // column, i.e. lower degree then lexicographic
        let mut best: Option<(usize, f64)> = None;
        for r in 0..m {
            if in_active[r] {
                continue;
            }
            let a = corr[r].abs();
            if best.map_or(true, |(_, b)| a > b) {
                best = Some((r, a));
            }
        }
        let (j, cmax) = match best {
            Some(b) => b,
            None => break,
        };
        if cmax <= tol || !cmax.is_finite() {
            break;
        }
        active.push(j);
        in_active[j] = true;

        // equiangular direction over the signed active columns
        let k = active.len();
        let mut xa = DMatrix::zeros(n, k);
        for (pos, &r) in active.iter().enumerate() {
            let s = corr[r].signum();
            for i in 0..n {
                xa[(i, pos)] = s * xs[(i, r)];
            }
        }
        let gram = xa.transpose() * &xa;
        let chol = match Cholesky::new(gram) {
            Some(c) => c,
            None => break, // collinear active set: ranking beyond here is noise
        };
        let w = chol.solve(&DVector::from_element(k, 1.0));
        let denom = w.sum();
        if !(denom > 0.0) {
            break;
        }
        let aa = denom.sqrt().recip();
        let u = &xa * (w * aa);
        let a_corr = xs.transpose() * &u;

        // step length to the next entry point
        let mut gamma = cmax / aa;
        for r in 0..m {
            if in_active[r] {
                continue;
            }
            for cand in [
                (cmax - corr[r]) / (aa - a_corr[r]),
                (cmax + corr[r]) / (aa + a_corr[r]),
            ] {
                if cand > 1e-14 && cand.is_finite() && cand < gamma {
                    gamma = cand;
                }
            }
        }
        for r in 0..m {
            corr[r] -= gamma * a_corr[r];
        }
    }

    let mut order = Vec::with_capacity(1 + m);
    order.push(0);
    order.extend(active.iter().map(|&r| racing[r]));
    for (r, &col) in racing.iter().enumerate() {
        if !in_active[r] {
            order.push(col);
        }
    }
    LarRanking { order, degenerate }
}
