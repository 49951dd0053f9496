//! Tensor-product polynomial basis for the chaos trend.
//!
//! Each input dimension carries its own 1-D family: orthonormal Legendre on
//! [-1, 1] for box-scaled inputs, orthonormal probabilists' Hermite for
//! standard-normal inputs. A basis function is the product of one 1-D
//! polynomial per dimension, addressed by a multi-index of degrees.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// 1-D polynomial family attached to one input dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisFamily {
    /// Orthonormal Legendre, uniform measure on [-1, 1]; for inputs that are
    /// affinely box-scaled.
    Legendre,
    /// Orthonormal probabilists' Hermite, standard-normal measure; for inputs
    /// kept in u-space.
    Hermite,
}

/// Degrees per dimension identifying one tensor-product basis function.
pub type MultiIndex = Vec<u32>;

/// All multi-indices with total degree ≤ `max_degree`, in graded
/// lexicographic order: ascending total degree, then ascending tuple order
/// within a degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiIndexSet {
    dim: usize,
    max_degree: u32,
    indices: Vec<MultiIndex>,
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
    }
    acc as u64
}

impl MultiIndexSet {
    /// Build the total-degree set for `dim` inputs and maximum degree
    /// `max_degree`.
    pub fn total_degree(dim: usize, max_degree: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("basis needs at least one dimension".into()));
        }
        let mut indices = Vec::new();
        let mut scratch = vec![0u32; dim];
        for degree in 0..=max_degree {
            push_fixed_degree(&mut indices, &mut scratch, 0, degree);
        }
        debug_assert_eq!(
            indices.len() as u64,
            binomial(dim as u64 + max_degree as u64, max_degree as u64)
        );
        Ok(Self {
            dim,
            max_degree,
            indices,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn index(&self, pos: usize) -> &MultiIndex {
        &self.indices[pos]
    }
}

fn push_fixed_degree(out: &mut Vec<MultiIndex>, scratch: &mut [u32], dim: usize, rem: u32) {
    if dim + 1 == scratch.len() {
        scratch[dim] = rem;
        out.push(scratch.to_vec());
        return;
    }
    for v in 0..=rem {
        scratch[dim] = v;
        push_fixed_degree(out, scratch, dim + 1, rem - v);
    }
}

/// Orthonormal Legendre value: sqrt(2k+1)·P_k(t).
pub fn legendre_orthonormal(k: u32, t: f64) -> f64 {
    let degree = k as usize;
    let mut vals = vec![0.0; degree + 1];
    legendre_table(k, t, &mut vals);
    vals[degree]
}

/// Orthonormal probabilists' Hermite value: He_k(u)/sqrt(k!).
pub fn hermite_orthonormal(k: u32, u: f64) -> f64 {
    let degree = k as usize;
    let mut vals = vec![0.0; degree + 1];
    hermite_table(k, u, &mut vals);
    vals[degree]
}

/// Fill `out[0..=k]` with orthonormal Legendre values at `t`.
fn legendre_table(k: u32, t: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if k == 0 {
        return;
    }
    // raw P_j recurrence, then scale each entry by sqrt(2j+1)
    let mut pm1 = 1.0;
    let mut p = t;
    out[1] = (3.0f64).sqrt() * p;
    for j in 2..=k {
        let jf = j as f64;
        let next = ((2.0 * jf - 1.0) * t * p - (jf - 1.0) * pm1) / jf;
        pm1 = p;
        p = next;
        out[j as usize] = (2.0 * jf + 1.0).sqrt() * p;
    }
}

/// Fill `out[0..=k]` with orthonormal Hermite values at `u`.
fn hermite_table(k: u32, u: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if k == 0 {
        return;
    }
    let mut hm1 = 1.0;
    let mut h = u;
    let mut fact = 1.0f64;
    out[1] = u;
    for j in 2..=k {
        let jf = j as f64;
        let next = u * h - (jf - 1.0) * hm1;
        hm1 = h;
        h = next;
        fact *= jf;
        out[j as usize] = h / fact.sqrt();
    }
}

/// Per-point scratch: 1-D polynomial values for every dimension and degree.
///
/// Reusable across calls to avoid allocation in sampling loops.
#[derive(Debug, Clone)]
pub struct BasisScratch {
    max_degree: usize,
    tables: Vec<f64>, // dim-major: tables[d * (max_degree+1) + degree]
}

impl BasisScratch {
    pub fn new(dim: usize, max_degree: u32) -> Self {
        Self {
            max_degree: max_degree as usize,
            tables: vec![0.0; dim * (max_degree as usize + 1)],
        }
    }

    fn fill(&mut self, families: &[BasisFamily], x: &[f64]) {
        let width = self.max_degree + 1;
        for (d, (&family, &xd)) in families.iter().zip(x).enumerate() {
            let slot = &mut self.tables[d * width..(d + 1) * width];
            match family {
                BasisFamily::Legendre => legendre_table(self.max_degree as u32, xd, slot),
                BasisFamily::Hermite => hermite_table(self.max_degree as u32, xd, slot),
            }
        }
    }

    fn product(&self, index: &[u32]) -> f64 {
        let width = self.max_degree + 1;
        let mut acc = 1.0;
        for (d, &deg) in index.iter().enumerate() {
            if deg > 0 {
                acc *= self.tables[d * width + deg as usize];
            }
        }
        acc
    }
}

/// Evaluate every listed basis function at one point, writing into `row`.
pub fn basis_row_into(
    families: &[BasisFamily],
    indices: &[MultiIndex],
    x: &[f64],
    scratch: &mut BasisScratch,
    row: &mut [f64],
) {
    scratch.fill(families, x);
    for (slot, idx) in row.iter_mut().zip(indices) {
        *slot = scratch.product(idx);
    }
}

/// Dense design matrix: one row per input point, one column per basis
/// function.
pub fn basis_matrix(
    families: &[BasisFamily],
    indices: &[MultiIndex],
    points: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = points.nrows();
    let max_degree = indices
        .iter()
        .flat_map(|i| i.iter().copied())
        .max()
        .unwrap_or(0);
    let mut scratch = BasisScratch::new(points.ncols(), max_degree);
    let mut out = DMatrix::zeros(n, indices.len());
    let mut xrow = vec![0.0; points.ncols()];
    let mut brow = vec![0.0; indices.len()];
    for i in 0..n {
        for d in 0..points.ncols() {
            xrow[d] = points[(i, d)];
        }
        basis_row_into(families, indices, &xrow, &mut scratch, &mut brow);
        for (j, &v) in brow.iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    out
}

/// Evaluate one basis product without scratch reuse (tests, cold paths).
pub fn basis_value(families: &[BasisFamily], index: &[u32], x: &[f64]) -> f64 {
    let max_degree = index.iter().copied().max().unwrap_or(0);
    let mut scratch = BasisScratch::new(families.len(), max_degree);
    scratch.fill(families, x);
    scratch.product(index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // probabilists' Gauss-Hermite rule, weights normalized to the standard
    // normal measure
    const GH20: [(f64, f64); 20] = [
        (-7.6190485416797582, 1.2578006724379264e-13),
        (-6.5105901570136542, 2.4820623623151797e-10),
        (-5.5787388058932015, 6.127490259982928e-08),
        (-4.7345813340460552, 4.4021210902308646e-06),
        (-3.9439673506573163, 0.00012882627996192942),
        (-3.1890148165533896, 0.0018301031310804924),
        (-2.4586636111723679, 0.013997837447100996),
        (-1.7452473208141268, 0.061506372063976959),
        (-1.0429453488027509, 0.16173933398400003),
        (-0.34696415708135592, 0.26079306344955477),
        (0.34696415708135592, 0.26079306344955477),
        (1.0429453488027509, 0.16173933398400003),
        (1.7452473208141268, 0.061506372063976959),
        (2.4586636111723679, 0.013997837447100996),
        (3.1890148165533896, 0.0018301031310804924),
        (3.9439673506573163, 0.00012882627996192942),
        (4.7345813340460552, 4.4021210902308646e-06),
        (5.5787388058932015, 6.127490259982928e-08),
        (6.5105901570136542, 2.4820623623151797e-10),
        (7.6190485416797582, 1.2578006724379264e-13),
    ];

    // Gauss-Legendre rule, weights normalized to the uniform measure on [-1,1]
    const GL16: [(f64, f64); 16] = [
        (-0.98940093499164994, 0.013576229705877019),
        (-0.9445750230732326, 0.031126761969323853),
        (-0.86563120238783176, 0.047579255841246296),
        (-0.755404408355003, 0.062314485627767015),
        (-0.61787624440264377, 0.074797994408288382),
        (-0.45801677765722737, 0.08457825969750131),
        (-0.28160355077925892, 0.091301707522461806),
        (-0.095012509837637454, 0.094725305227534293),
        (0.095012509837637454, 0.094725305227534293),
        (0.28160355077925892, 0.091301707522461806),
        (0.45801677765722737, 0.08457825969750131),
        (0.61787624440264377, 0.074797994408288382),
        (0.755404408355003, 0.062314485627767015),
        (0.86563120238783176, 0.047579255841246296),
        (0.9445750230732326, 0.031126761969323853),
        (0.98940093499164994, 0.013576229705877019),
    ];

    #[test]
    fn graded_lex_ordering_two_dims() {
        let set = MultiIndexSet::total_degree(2, 2).unwrap();
        let expect: Vec<MultiIndex> = vec![
            vec![0, 0],
            vec![0, 1],
            vec![1, 0],
            vec![0, 2],
            vec![1, 1],
            vec![2, 0],
        ];
        assert_eq!(set.indices(), expect.as_slice());
    }

    #[test]
    fn cardinality_matches_binomial() {
        for (n, p) in [(1usize, 5u32), (2, 5), (3, 4), (6, 5), (8, 5)] {
            let set = MultiIndexSet::total_degree(n, p).unwrap();
            assert_eq!(
                set.len() as u64,
                binomial(n as u64 + p as u64, p as u64),
                "n={n} p={p}"
            );
            // no duplicates
            let mut seen = std::collections::HashSet::new();
            for idx in set.indices() {
                assert!(seen.insert(idx.clone()));
                assert!(idx.iter().sum::<u32>() <= p);
            }
        }
    }

    #[test]
    fn hermite_low_degrees_match_closed_forms() {
        let u = 2.0;
        assert_abs_diff_eq!(hermite_orthonormal(0, u), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hermite_orthonormal(1, u), 2.0, epsilon = 1e-15);
        // He_2(u)/sqrt(2!) = (u^2-1)/sqrt(2) = 3/sqrt(2)
        assert_abs_diff_eq!(
            hermite_orthonormal(2, u),
            3.0 / 2.0f64.sqrt(),
            epsilon = 1e-14
        );
        // He_3(u)/sqrt(6) = (u^3-3u)/sqrt(6)
        assert_abs_diff_eq!(
            hermite_orthonormal(3, u),
            2.0 / 6.0f64.sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn legendre_low_degrees_match_closed_forms() {
        let t = 0.6;
        assert_abs_diff_eq!(legendre_orthonormal(0, t), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(legendre_orthonormal(1, t), 3.0f64.sqrt() * t, epsilon = 1e-15);
        let p2 = 0.5 * (3.0 * t * t - 1.0);
        assert_abs_diff_eq!(legendre_orthonormal(2, t), 5.0f64.sqrt() * p2, epsilon = 1e-14);
    }

    #[test]
    fn hermite_tensor_basis_is_orthonormal_under_quadrature() {
        // all pairs with total degree ≤ 5, up to 3 dimensions
        for n in 1..=3usize {
            let set = MultiIndexSet::total_degree(n, 5).unwrap();
            let fams = vec![BasisFamily::Hermite; n];
            for a in 0..set.len() {
                for b in a..set.len() {
                    let mut acc = 0.0;
                    integrate_tensor(&GH20, n, &mut vec![0.0; n], 0, 1.0, &mut |x, w| {
                        acc += w
                            * basis_value(&fams, set.index(a), x)
                            * basis_value(&fams, set.index(b), x);
                    });
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!(
                        (acc - expect).abs() <= 1e-10,
                        "n={n} a={:?} b={:?} got {acc}",
                        set.index(a),
                        set.index(b)
                    );
                }
            }
        }
    }

    #[test]
    fn legendre_basis_is_orthonormal_under_quadrature() {
        let set = MultiIndexSet::total_degree(2, 5).unwrap();
        let fams = vec![BasisFamily::Legendre; 2];
        for a in 0..set.len() {
            for b in a..set.len() {
                let mut acc = 0.0;
                integrate_tensor(&GL16, 2, &mut vec![0.0; 2], 0, 1.0, &mut |x, w| {
                    acc += w
                        * basis_value(&fams, set.index(a), x)
                        * basis_value(&fams, set.index(b), x);
                });
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((acc - expect).abs() <= 1e-10);
            }
        }
    }

    fn integrate_tensor(
        rule: &[(f64, f64)],
        n: usize,
        x: &mut Vec<f64>,
        dim: usize,
        w: f64,
        f: &mut impl FnMut(&[f64], f64),
    ) {
        if dim == n {
            f(x, w);
            return;
        }
        for &(xi, wi) in rule {
            x[dim] = xi;
            integrate_tensor(rule, n, x, dim + 1, w * wi, f);
        }
    }

    #[test]
    fn mixed_family_row_matches_factor_product() {
        let fams = [BasisFamily::Legendre, BasisFamily::Hermite];
        let set = MultiIndexSet::total_degree(2, 3).unwrap();
        let x = [0.4, -1.3];
        let mut scratch = BasisScratch::new(2, 3);
        let mut row = vec![0.0; set.len()];
        basis_row_into(&fams, set.indices(), &x, &mut scratch, &mut row);
        for (j, idx) in set.indices().iter().enumerate() {
            let expect = legendre_orthonormal(idx[0], x[0]) * hermite_orthonormal(idx[1], x[1]);
            assert_abs_diff_eq!(row[j], expect, epsilon = 1e-13);
        }
    }

    #[test]
    fn basis_matrix_constant_column_first() {
        let pts = DMatrix::from_row_slice(3, 2, &[0.1, 0.2, -0.5, 0.8, 0.0, 0.0]);
        let set = MultiIndexSet::total_degree(2, 2).unwrap();
        let fams = vec![BasisFamily::Legendre; 2];
        let m = basis_matrix(&fams, set.indices(), &pts);
        for i in 0..3 {
            assert_abs_diff_eq!(m[(i, 0)], 1.0, epsilon = 0.0);
        }
        assert_eq!(m.ncols(), 6);
    }
}
