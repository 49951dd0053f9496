//! Sobol low-discrepancy sequence, 30-bit Gray-code construction.
//!
//! Conventions (pinned by tests): the first point of the sequence is the
//! all-zeros point, successive points are generated by the Gray-code update,
//! and values are `x / 2^30`. These match the widely used unscrambled
//! reference implementations built from the Joe-Kuo direction numbers, so the
//! designs are reproducible outside this crate.

use super::sobol_data::{BITS, DIRECTIONS, MAX_DIM};
use crate::error::{Error, Result};

pub struct SobolSequence {
    dim: usize,
    state: Vec<u32>,
    index: u64,
}

impl SobolSequence {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::SobolDimension {
                requested: dim,
                max: MAX_DIM,
            });
        }
        Ok(Self {
            dim,
            state: vec![0; dim],
            index: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The next point of the sequence in [0, 1)^dim.
    pub fn next_point(&mut self) -> Vec<f64> {
        if self.index > 0 {
            // Gray-code update: flip direction c, where c is the number of
            // trailing one-bits of (index - 1).
            let c = (self.index - 1).trailing_ones() as usize;
            debug_assert!(c < BITS as usize, "sequence longer than 2^30 points");
            for (d, s) in self.state.iter_mut().enumerate() {
                *s ^= DIRECTIONS[d][c];
            }
        }
        self.index += 1;
        let scale = 1.0 / (1u64 << BITS) as f64;
        self.state.iter().map(|&x| x as f64 * scale).collect()
    }

    pub fn skip(&mut self, n: usize) {
        for _ in 0..n {
            self.next_point();
        }
    }
}

/// First `n` points (after skipping `skip`) of the `dim`-dimensional sequence.
pub fn sobol_points(dim: usize, n: usize, skip: usize) -> Result<Vec<Vec<f64>>> {
    let mut seq = SobolSequence::new(dim)?;
    seq.skip(skip);
    Ok((0..n).map(|_| seq.next_point()).collect())
}
