//! Experimental designs (Sobol, Latin hypercube) and Monte Carlo reliability
//! estimation.

mod reliability;
mod sobol;
mod sobol_data;

pub use reliability::{estimate_reliability, ReliabilityAnalyzer, ReliabilityEstimate};
pub use sobol::{sobol_points, SobolSequence};

use crate::error::{Error, Result};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// How a design-of-experiments matrix was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Sobol,
    Lhs,
    User,
}

/// A design of experiments on the unit hypercube: one sample point per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DoeMatrix {
    pub points: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl DoeMatrix {
    pub fn sobol(dim: usize, n: usize, skip: usize) -> Result<Self> {
        Ok(Self {
            points: sobol_points(dim, n, skip)?,
            provenance: Provenance::Sobol,
        })
    }

    pub fn rows(&self) -> usize {
        self.points.len()
    }
}

/// Latin hypercube design: per dimension, one point uniformly placed in each
/// of `n` equal strata, with independently shuffled stratum order.
/// Deterministic for a given seed.
pub fn lhs_points(dim: usize, n: usize, seed: u64) -> DoeMatrix {
    assert!(dim >= 1 && n >= 1);
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[16] = 0x1b; // domain tag: LHS stream
    let mut rng = ChaCha8Rng::from_seed(key);
    let mut uniform = || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);

    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut perm: Vec<usize> = (0..n).collect();
        // Fisher-Yates
        for i in (1..n).rev() {
            let j = (uniform() * (i + 1) as f64) as usize;
            perm.swap(i, j.min(i));
        }
        let col = perm
            .into_iter()
            .map(|stratum| (stratum as f64 + uniform()) / n as f64)
            .collect();
        cols.push(col);
    }
    let points = (0..n)
        .map(|r| (0..dim).map(|d| cols[d][r]).collect())
        .collect();
    DoeMatrix {
        points,
        provenance: Provenance::Lhs,
    }
}

/// Affine map of unit-hypercube points onto the box `[lower, upper)`.
pub fn scale_doe(points: &[Vec<f64>], lower: &[f64], upper: &[f64]) -> Result<Vec<Vec<f64>>> {
    if lower.len() != upper.len() {
        return Err(Error::Config(format!(
            "bound dimension mismatch: {} vs {}",
            lower.len(),
            upper.len()
        )));
    }
    for (d, (lo, hi)) in lower.iter().zip(upper).enumerate() {
        if !(lo < hi) {
            return Err(Error::Config(format!(
                "bounds inverted in dimension {d}: [{lo}, {hi}]"
            )));
        }
    }
    points
        .iter()
        .map(|row| {
            if row.len() != lower.len() {
                return Err(Error::Config(format!(
                    "point dimension {} does not match bounds dimension {}",
                    row.len(),
                    lower.len()
                )));
            }
            Ok(row
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&p, (&lo, &hi))| lo + (hi - lo) * p)
                .collect())
        })
        .collect()
}
