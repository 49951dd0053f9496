//! Monte Carlo reliability estimation with common random numbers.
//!
//! A [`ReliabilityAnalyzer`] owns one frozen matrix of standard-normal
//! samples. Every estimate made through the same analyzer reuses that matrix,
//! re-centered for whatever design is being assessed, so reliability
//! differences between designs reflect the designs and not sampling noise.
//! The matrix is generated in fixed-size blocks with per-block substreams;
//! the result is bit-identical however many worker threads process it.

use crate::error::{Error, Result};
use crate::probspace::ProblemSpace;
use crate::special::beta_from_pf;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::sync::Mutex;

/// Rows per generation/evaluation block.
const BLOCK_ROWS: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityEstimate {
    /// Estimated probability of failure (exceedance probability).
    pub pf: f64,
    /// Reliability index, `-Phi^-1(pf)` saturated to [-8, 8].
    pub beta: f64,
    /// Sample count.
    pub n: usize,
    /// Binomial standard error of `pf`.
    pub std_err: f64,
}

impl ReliabilityEstimate {
    fn from_failures(failures: u64, n: usize) -> Self {
        let pf = failures as f64 / n as f64;
        Self {
            pf,
            beta: beta_from_pf(pf),
            n,
            std_err: (pf * (1.0 - pf) / n as f64).sqrt(),
        }
    }
}

/// Frozen standard-normal sample matrix plus the machinery to count
/// exceedances over it.
pub struct ReliabilityAnalyzer {
    dim: usize,
    n: usize,
    samples: Vec<f64>, // row-major, n x dim
}

impl ReliabilityAnalyzer {
    /// Generate the frozen sample matrix for `n` samples of `dim` independent
    /// standard normals. Blocks are seeded independently from `(seed, block)`,
    /// so the matrix content does not depend on thread count or generation
    /// order.
    pub fn new(dim: usize, n: usize, seed: u64) -> Self {
        assert!(dim >= 1 && n >= 1);
        let blocks = n.div_ceil(BLOCK_ROWS);
        let mut samples = vec![0.0f64; n * dim];
        samples
            .par_chunks_mut(BLOCK_ROWS * dim)
            .enumerate()
            .for_each(|(b, chunk)| {
                debug_assert!(b < blocks);
                fill_block_standard_normal(seed, b as u64, chunk);
            });
        Self { dim, n, samples }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The frozen sample matrix, row-major `n × dim`. Read-only: callers may
    /// precompute per-sample transforms (e.g. marginal quantile maps) that
    /// stay valid for every estimate made through this analyzer.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Iterate the sample blocks in parallel; `count` maps a block
    /// (row-major `rows x dim`, plus the global index of its first row) to
    /// the number of failed samples it contains. Returns the estimate built
    /// from the total count. Counting is exact integer work, so the reduction
    /// order cannot change the result.
    pub fn estimate_with<F>(&self, count: F) -> ReliabilityEstimate
    where
        F: Fn(&[f64], usize) -> u64 + Sync,
    {
        let failures: u64 = self
            .samples
            .par_chunks(BLOCK_ROWS * self.dim)
            .enumerate()
            .map(|(b, chunk)| count(chunk, b * BLOCK_ROWS))
            .sum();
        ReliabilityEstimate::from_failures(failures, self.n)
    }

    /// Estimate `P(g(x) > c)` for a scalar limit state over physical inputs.
    ///
    /// Design-linked inputs are realized as `d_i + std_i(d) * u`, noise inputs
    /// through their marginal's inverse isoprobabilistic map. A non-finite
    /// evaluator value aborts the estimate and names the sample index.
    pub fn estimate_physical<G>(
        &self,
        g: G,
        c: f64,
        space: &ProblemSpace,
        design: &[f64],
    ) -> Result<ReliabilityEstimate>
    where
        G: Fn(&[f64]) -> f64 + Sync,
    {
        assert_eq!(space.dim(), self.dim);
        assert_eq!(space.n_design(), design.len());
        let nd = space.n_design();
        let stds: Vec<f64> = space
            .design
            .iter()
            .zip(design)
            .map(|(v, &d)| v.std_at(d))
            .collect();
        let bad: Mutex<Option<usize>> = Mutex::new(None);
        let est = self.estimate_with(|chunk, first_row| {
            let rows = chunk.len() / self.dim;
            let mut x = vec![0.0f64; self.dim];
            let mut fails = 0u64;
            for r in 0..rows {
                let u = &chunk[r * self.dim..(r + 1) * self.dim];
                for i in 0..nd {
                    x[i] = design[i] + stds[i] * u[i];
                }
                for (j, (_, marginal)) in space.noise.iter().enumerate() {
                    x[nd + j] = marginal.from_standard_normal(u[nd + j]);
                }
                let val = g(&x);
                if !val.is_finite() {
                    let mut guard = bad.lock().unwrap();
                    let idx = first_row + r;
                    if guard.map_or(true, |prev| idx < prev) {
                        *guard = Some(idx);
                    }
                    continue;
                }
                if val > c {
                    fails += 1;
                }
            }
            fails
        });
        if let Some(idx) = *bad.lock().unwrap() {
            return Err(Error::Problem(format!(
                "limit-state evaluator returned a non-finite value at sample {idx}"
            )));
        }
        Ok(est)
    }
}

/// Fill `chunk` (row-major) with standard normals from substream
/// `(seed, block)` via Box-Muller over ChaCha8 uniforms.
fn fill_block_standard_normal(seed: u64, block: u64, chunk: &mut [f64]) {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&block.to_le_bytes());
    key[16] = 0x5b; // domain tag: reliability sample stream
    let mut rng = ChaCha8Rng::from_seed(key);
    let mut i = 0;
    while i < chunk.len() {
        // u1 in (0, 1] so the log is finite; u2 in [0, 1).
        let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        chunk[i] = r * c;
        i += 1;
        if i < chunk.len() {
            chunk[i] = r * s;
            i += 1;
        }
    }
}

/// One-call form: estimate `P(g > c)` at `design` with a fresh sample matrix.
pub fn estimate_reliability<G>(
    g: G,
    c: f64,
    space: &ProblemSpace,
    design: &[f64],
    n: usize,
    seed: u64,
) -> Result<ReliabilityEstimate>
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    if n < 10_000 {
        return Err(Error::Problem(format!(
            "Monte Carlo sample count {n} below the 10^4 minimum"
        )));
    }
    ReliabilityAnalyzer::new(space.dim(), n, seed).estimate_physical(g, c, space, design)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probspace::{DesignVariable, Dispersion, MarginalDistribution};
    use crate::special::{norm_cdf, pf_from_beta};
    use approx::assert_abs_diff_eq;

    fn two_design_space(std: f64) -> ProblemSpace {
        ProblemSpace {
            design: vec![
                DesignVariable {
                    name: "x1".into(),
                    lower: 0.0,
                    upper: 10.0,
                    dispersion: Dispersion::Std(std),
                },
                DesignVariable {
                    name: "x2".into(),
                    lower: 0.0,
                    upper: 10.0,
                    dispersion: Dispersion::Std(std),
                },
            ],
            noise: vec![],
        }
    }

    #[test]
    fn saturated_linear_constraint_reports_cap() {
        // failure (3 - x1 - x2) > 0 at design (2.86, 3.21), sigma = 0.1:
        // analytic beta = 3.07 / (0.1 sqrt(2)) = 21.7, far past the cap.
        let space = two_design_space(0.1);
        let est = estimate_reliability(
            |x| 3.0 - x[0] - x[1],
            0.0,
            &space,
            &[2.86, 3.21],
            100_000,
            7,
        )
        .unwrap();
        assert_eq!(est.pf, 0.0);
        assert_eq!(est.beta, 8.0);
    }

    #[test]
    fn symmetric_constraint_beta_near_zero() {
        let space = ProblemSpace {
            design: vec![DesignVariable {
                name: "x1".into(),
                lower: -5.0,
                upper: 5.0,
                dispersion: Dispersion::Std(1.0),
            }],
            noise: vec![],
        };
        let est = estimate_reliability(|x| x[0], 0.0, &space, &[0.0], 1_000_000, 11).unwrap();
        // 3 binomial standard errors in beta units near beta = 0.
        let tol = 3.0 * est.std_err / 0.398_942;
        assert!(est.beta.abs() < tol, "beta {} tol {tol}", est.beta);
    }

    #[test]
    fn infinite_threshold_gives_cap() {
        let space = two_design_space(0.1);
        let est = estimate_reliability(|x| x[0], f64::INFINITY, &space, &[1.0, 1.0], 50_000, 3)
            .unwrap();
        assert_eq!(est.pf, 0.0);
        assert_eq!(est.beta, 8.0);
    }

    #[test]
    fn linear_gaussian_matches_closed_form() {
        // g = a1 x1 + a2 x2 + b with xi ~ N(di, s^2); failure g > c.
        // beta = (c - mean) / std with mean = a.d + b, std = |a| s.
        let cases = [
            (1.0, 2.0, 0.5, 1.2, 0.4, 1.0, 3.0),
            (-1.5, 0.7, 0.0, 2.0, 1.0, 0.25, -1.0),
            (0.3, -0.9, 2.0, 0.5, 3.0, 0.5, 1.5),
            (2.0, 2.0, -3.0, 1.0, 1.0, 0.15, 1.4),
            (1.0, -1.0, 0.0, 4.0, 3.5, 0.3, 1.2),
        ];
        for (i, &(a1, a2, b, d1, d2, s, c)) in cases.iter().enumerate() {
            let space = ProblemSpace {
                design: vec![
                    DesignVariable {
                        name: "x1".into(),
                        lower: -10.0,
                        upper: 10.0,
                        dispersion: Dispersion::Std(s),
                    },
                    DesignVariable {
                        name: "x2".into(),
                        lower: -10.0,
                        upper: 10.0,
                        dispersion: Dispersion::Std(s),
                    },
                ],
                noise: vec![],
            };
            let est = estimate_reliability(
                |x| a1 * x[0] + a2 * x[1] + b,
                c,
                &space,
                &[d1, d2],
                1_000_000,
                100 + i as u64,
            )
            .unwrap();
            let mean = a1 * d1 + a2 * d2 + b;
            let std = (a1 * a1 + a2 * a2).sqrt() * s;
            let pf_exact = norm_cdf(-(c - mean) / std);
            let se = (pf_exact * (1.0 - pf_exact) / 1e6).sqrt();
            assert!(
                (est.pf - pf_exact).abs() <= 3.0 * se,
                "case {i}: pf {} exact {pf_exact} (3se {})",
                est.pf,
                3.0 * se
            );
        }
    }

    #[test]
    fn noise_marginal_transform_is_applied() {
        // Pure-noise lognormal: P(X > median) should be 1/2.
        let space = ProblemSpace {
            design: vec![DesignVariable {
                name: "d".into(),
                lower: 0.0,
                upper: 1.0,
                dispersion: Dispersion::Std(1.0),
            }],
            noise: vec![(
                "L".into(),
                MarginalDistribution::from_moments(
                    crate::probspace::Family::Lognormal,
                    225.0,
                    Dispersion::Cov(0.08),
                )
                .unwrap(),
            )],
        };
        let median = 224.28343767062812;
        let est =
            estimate_reliability(|x| x[1], median, &space, &[0.5], 1_000_000, 42).unwrap();
        assert!((est.pf - 0.5).abs() < 3.0 * est.std_err.max(5e-4));
    }

    #[test]
    fn common_random_numbers_monotone_in_threshold() {
        let space = two_design_space(0.5);
        let analyzer = ReliabilityAnalyzer::new(2, 200_000, 9);
        let count_at = |c: f64| {
            analyzer
                .estimate_physical(|x| x[0] + x[1], c, &space, &[1.0, 1.0])
                .unwrap()
        };
        let mut last_pf = f64::INFINITY;
        for c in [0.5, 1.0, 1.5, 2.0, 2.5] {
            let est = count_at(c);
            assert!(est.pf <= last_pf, "pf must fall as threshold rises");
            last_pf = est.pf;
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let space = two_design_space(0.3);
        let a = estimate_reliability(|x| x[0] * x[1], 2.0, &space, &[1.4, 1.5], 100_000, 5)
            .unwrap();
        let b = estimate_reliability(|x| x[0] * x[1], 2.0, &space, &[1.4, 1.5], 100_000, 5)
            .unwrap();
        assert_eq!(a.pf, b.pf);
        assert_eq!(a.beta, b.beta);
    }

    #[test]
    fn sample_moments_are_standard_normal() {
        let analyzer = ReliabilityAnalyzer::new(3, 1_000_000, 17);
        let n = analyzer.n() * analyzer.dim();
        let (sum, sumsq) = analyzer
            .samples
            .iter()
            .fold((0.0, 0.0), |(s, q), &v| (s + v, q + v * v));
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(mean.abs() < 3.0 / (n as f64).sqrt(), "mean {mean}");
        assert_abs_diff_eq!(var, 1.0, epsilon = 0.01);
    }

    #[test]
    fn non_finite_evaluator_names_sample_index() {
        let space = two_design_space(0.1);
        let err = estimate_reliability(
            |x| if x[0] > 1.0 { f64::NAN } else { 0.0 },
            0.5,
            &space,
            &[1.0, 1.0],
            50_000,
            1,
        )
        .unwrap_err();
        assert!(err.to_string().contains("sample"));
    }

    // Sweep limited to beta >= -4.75: below that the pf representation next to
    // 1.0 quantizes harder than 1e-10 allows; special::tests covers the far
    // range against the quantization bound.
    #[test]
    fn beta_identity_through_pf() {
        let mut beta = -4.75f64;
        while beta <= 8.0 {
            assert_abs_diff_eq!(
                crate::special::beta_from_pf(pf_from_beta(beta)),
                beta,
                epsilon = 1e-10
            );
            beta += 0.5;
        }
    }
}
