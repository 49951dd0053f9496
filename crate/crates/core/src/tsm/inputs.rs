//! The coordinate system `M1` lives in.
//!
//! Surrogate inputs are scaled per dimension: design-linked inputs are
//! box-scaled to [-1, 1] over their design interval (Legendre trend), normal
//! noise inputs are kept in standard-normal units (Hermite trend), and
//! non-normal noise inputs are box-scaled over their central quantile
//! interval (Legendre trend). Keeping non-normal inputs in physical units
//! matters: limit states that are near-polynomial in the physical variable
//! become transcendental when composed with the quantile transform, and a
//! degree-capped trend loses them.

use crate::error::{Error, Result};
use crate::probspace::{Family, MarginalDistribution, ProblemSpace};
use crate::special::norm_quantile;
use crate::surrogate::BasisFamily;

#[derive(Debug, Clone)]
enum NoiseCoord {
    /// Standard-normal coordinate, passed through (Hermite dimension).
    Unit,
    /// Physical coordinate box-scaled over the central quantile interval
    /// (Legendre dimension).
    Box { lo: f64, hi: f64 },
}

/// Maps between physical inputs, standard-normal noise, and `M1`'s scaled
/// training space. One map serves one constraint (maps differ only when
/// constraints request different noise-box masses).
#[derive(Debug, Clone)]
pub struct InputMap {
    design_lo: Vec<f64>,
    design_hi: Vec<f64>,
    noise: Vec<NoiseCoord>,
    marginals: Vec<MarginalDistribution>,
    families: Vec<BasisFamily>,
    noise_mean_coords: Vec<f64>,
    /// Half-width of the training range in u for Hermite dimensions.
    u_half_width: f64,
}

impl InputMap {
    pub fn for_space(space: &ProblemSpace, quantile_mass: f64) -> Result<Self> {
        if !(quantile_mass > 0.0 && quantile_mass < 1.0) {
            return Err(Error::Problem(format!(
                "quantile mass must lie in (0,1), got {quantile_mass}"
            )));
        }
        let p_lo = 0.5 * (1.0 - quantile_mass);
        let p_hi = 1.0 - p_lo;
        let u_half_width = norm_quantile(p_hi);
        let mut families: Vec<BasisFamily> =
            vec![BasisFamily::Legendre; space.n_design()];
        let mut noise = Vec::with_capacity(space.n_noise());
        let mut noise_mean_coords = Vec::with_capacity(space.n_noise());
        let mut marginals = Vec::with_capacity(space.n_noise());
        for (_, m) in &space.noise {
            match m.family() {
                Family::Normal => {
                    families.push(BasisFamily::Hermite);
                    noise.push(NoiseCoord::Unit);
                    noise_mean_coords.push(0.0);
                }
                _ => {
                    let lo = m.quantile(p_lo)?;
                    let hi = m.quantile(p_hi)?;
                    if !(lo < hi) {
                        return Err(Error::Problem(format!(
                            "degenerate quantile box [{lo}, {hi}]"
                        )));
                    }
                    families.push(BasisFamily::Legendre);
                    noise_mean_coords.push(2.0 * (m.mean() - lo) / (hi - lo) - 1.0);
                    noise.push(NoiseCoord::Box { lo, hi });
                }
            }
            marginals.push(m.clone());
        }
        Ok(Self {
            design_lo: space.lower_bounds(),
            design_hi: space.upper_bounds(),
            noise,
            marginals,
            families,
            noise_mean_coords,
            u_half_width,
        })
    }

    pub fn families(&self) -> &[BasisFamily] {
        &self.families
    }

    pub fn dim(&self) -> usize {
        self.families.len()
    }

    pub fn n_design(&self) -> usize {
        self.design_lo.len()
    }

    pub fn n_noise(&self) -> usize {
        self.noise.len()
    }

    pub fn u_half_width(&self) -> f64 {
        self.u_half_width
    }

    /// Turn one unit-hypercube point into a physical evaluation point and its
    /// scaled training coordinates.
    pub fn doe_row(&self, p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        debug_assert_eq!(p.len(), self.dim());
        let nd = self.n_design();
        let mut phys = vec![0.0; self.dim()];
        let mut scaled = vec![0.0; self.dim()];
        for i in 0..nd {
            phys[i] = self.design_lo[i] + (self.design_hi[i] - self.design_lo[i]) * p[i];
            scaled[i] = 2.0 * p[i] - 1.0;
        }
        for (j, nc) in self.noise.iter().enumerate() {
            let pj = p[nd + j];
            match nc {
                NoiseCoord::Unit => {
                    let u = self.u_half_width * (2.0 * pj - 1.0);
                    phys[nd + j] = self.marginals[j].from_standard_normal(u);
                    scaled[nd + j] = u;
                }
                NoiseCoord::Box { lo, hi } => {
                    phys[nd + j] = lo + (hi - lo) * pj;
                    scaled[nd + j] = 2.0 * pj - 1.0;
                }
            }
        }
        (phys, scaled)
    }

    /// Scaled coordinates of design `d` with every noise variable at its
    /// mean — the evaluation point of the deterministic design problem.
    pub fn scaled_at_mean_noise(&self, d: &[f64]) -> Vec<f64> {
        debug_assert_eq!(d.len(), self.n_design());
        let mut coords = vec![0.0; self.dim()];
        for i in 0..self.n_design() {
            coords[i] = self.scale_design(i, d[i]);
        }
        coords[self.n_design()..].copy_from_slice(&self.noise_mean_coords);
        coords
    }

    #[inline]
    pub fn scale_design(&self, i: usize, x: f64) -> f64 {
        2.0 * (x - self.design_lo[i]) / (self.design_hi[i] - self.design_lo[i]) - 1.0
    }

    /// Affine form of the design-coordinate scaling under sampling:
    /// the scaled coordinate of `d_i + std_i·u` is `a_i + b_i·u`.
    pub fn design_affine(&self, d: &[f64], stds: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut a = vec![0.0; self.n_design()];
        let mut b = vec![0.0; self.n_design()];
        for i in 0..self.n_design() {
            let w = self.design_hi[i] - self.design_lo[i];
            a[i] = 2.0 * (d[i] - self.design_lo[i]) / w - 1.0;
            b[i] = 2.0 * stds[i] / w;
        }
        (a, b)
    }

    /// Scaled coordinate of noise variable `j` at physical value `x` — the
    /// inverse of the sampling direction, for externally supplied tables.
    pub fn scale_physical_noise(&self, j: usize, x: f64) -> f64 {
        match &self.noise[j] {
            NoiseCoord::Unit => self.marginals[j].to_standard_normal(x),
            NoiseCoord::Box { lo, hi } => 2.0 * (x - lo) / (hi - lo) - 1.0,
        }
    }

    /// Scaled coordinate of noise variable `j` at standard-normal value `u`.
    pub fn noise_coord(&self, j: usize, u: f64) -> f64 {
        match &self.noise[j] {
            NoiseCoord::Unit => u,
            NoiseCoord::Box { lo, hi } => {
                let x = self.marginals[j].from_standard_normal(u);
                2.0 * (x - lo) / (hi - lo) - 1.0
            }
        }
    }

    /// True when both maps scale identically (same structure and boxes);
    /// used to share per-sample noise coordinates between constraints.
    pub fn same_scaling(&self, other: &InputMap) -> bool {
        self.design_lo == other.design_lo
            && self.design_hi == other.design_hi
            && self.u_half_width == other.u_half_width
            && self.noise.len() == other.noise.len()
            && self
                .noise
                .iter()
                .zip(&other.noise)
                .all(|(a, b)| match (a, b) {
                    (NoiseCoord::Unit, NoiseCoord::Unit) => true,
                    (
                        NoiseCoord::Box { lo: a_lo, hi: a_hi },
                        NoiseCoord::Box { lo: b_lo, hi: b_hi },
                    ) => a_lo == b_lo && a_hi == b_hi,
                    _ => false,
                })
    }
}
