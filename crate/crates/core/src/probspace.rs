//! Marginal distributions parameterized by moments, and their maps to and
//! from standard-normal space.
//!
//! Every random input is specified the way the benchmark tables specify them:
//! a family plus `(mean, std)` or `(mean, COV)`. Natural parameters are
//! derived at construction. Only independent marginals are supported.
//!
//! Standard-normal coordinates are clamped to [-8, 8]; the clamp mirrors the
//! reliability-index saturation used everywhere else in the crate.

use crate::error::{Error, Result};
use crate::special::{gamma_fn, norm_cdf, norm_quantile, BETA_CAP};
use serde::{Deserialize, Serialize};

/// Euler-Mascheroni constant (Gumbel mean = loc + gamma * scale).
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Dispersion of a random quantity: absolute standard deviation or
/// coefficient of variation (std / mean).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Dispersion {
    Std(f64),
    Cov(f64),
}

impl Dispersion {
    /// Standard deviation implied for a quantity with the given mean.
    pub fn std_for_mean(&self, mean: f64) -> f64 {
        match *self {
            Dispersion::Std(s) => s,
            Dispersion::Cov(c) => c * mean.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Normal,
    Lognormal,
    Gumbel,
    Weibull,
}

/// Natural parameters derived from the moment specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NaturalParams {
    Normal { loc: f64, scale: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Gumbel { loc: f64, scale: f64 },
    Weibull { shape: f64, scale: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalDistribution {
    family: Family,
    mean: f64,
    std: f64,
    params: NaturalParams,
}

impl MarginalDistribution {
    pub fn normal(mean: f64, std: f64) -> Result<Self> {
        Self::from_moments(Family::Normal, mean, Dispersion::Std(std))
    }

    /// Build a marginal from its family and first two moments.
    pub fn from_moments(family: Family, mean: f64, dispersion: Dispersion) -> Result<Self> {
        let std = dispersion.std_for_mean(mean);
        if !(std > 0.0) || !std.is_finite() {
            return Err(Error::Distribution(format!(
                "standard deviation must be positive and finite, got {std}"
            )));
        }
        if matches!(family, Family::Lognormal | Family::Weibull | Family::Gumbel) && !(mean != 0.0)
        {
            return Err(Error::Distribution(
                "non-normal families need a nonzero mean".into(),
            ));
        }
        if matches!(family, Family::Lognormal | Family::Weibull) && mean <= 0.0 {
            return Err(Error::Distribution(format!(
                "{family:?} requires a positive mean, got {mean}"
            )));
        }
        let params = moments_to_natural_params(family, mean, std)?;
        Ok(Self {
            family,
            mean,
            std,
            params,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    pub fn params(&self) -> NaturalParams {
        self.params
    }

    /// Inverse CDF. `p` must lie strictly inside (0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Distribution(format!(
                "quantile probability must lie in (0,1), got {p}"
            )));
        }
        Ok(match self.params {
            NaturalParams::Normal { loc, scale } => loc + scale * norm_quantile(p),
            NaturalParams::Lognormal { mu, sigma } => (mu + sigma * norm_quantile(p)).exp(),
            NaturalParams::Gumbel { loc, scale } => loc - scale * (-p.ln()).ln(),
            NaturalParams::Weibull { shape, scale } => {
                // -ln(1-p) via ln_1p for accuracy at small p
                scale * (-(-p).ln_1p()).powf(1.0 / shape)
            }
        })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self.params {
            NaturalParams::Normal { loc, scale } => norm_cdf((x - loc) / scale),
            NaturalParams::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    norm_cdf((x.ln() - mu) / sigma)
                }
            }
            NaturalParams::Gumbel { loc, scale } => (-(-(x - loc) / scale).exp()).exp(),
            NaturalParams::Weibull { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / scale).powf(shape)).exp_m1()
                }
            }
        }
    }

    /// Survival function `1 - cdf(x)`, computed without cancellation.
    fn survival(&self, x: f64) -> f64 {
        match self.params {
            NaturalParams::Normal { loc, scale } => norm_cdf(-(x - loc) / scale),
            NaturalParams::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    norm_cdf(-(x.ln() - mu) / sigma)
                }
            }
            NaturalParams::Gumbel { loc, scale } => {
                -(-(-(x - loc) / scale).exp()).exp_m1()
            }
            NaturalParams::Weibull { shape, scale } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-(x / scale).powf(shape)).exp()
                }
            }
        }
    }

    /// Isoprobabilistic map to standard-normal space, `u = Phi^(-1)(F(x))`,
    /// clamped to [-8, 8]. The boolean is true when the clamp engaged.
    pub fn to_standard_normal_checked(&self, x: f64) -> (f64, bool) {
        // Exact affine / log-affine branches avoid CDF round-trips.
        let u = match self.params {
            NaturalParams::Normal { loc, scale } => (x - loc) / scale,
            NaturalParams::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    return (-BETA_CAP, true);
                }
                (x.ln() - mu) / sigma
            }
            _ => {
                let p = self.cdf(x);
                if p <= 0.0 {
                    return (-BETA_CAP, true);
                }
                let s = self.survival(x);
                if s <= 0.0 {
                    return (BETA_CAP, true);
                }
                // Work in whichever tail is better conditioned.
                if p <= 0.5 {
                    norm_quantile(p)
                } else {
                    -norm_quantile(s)
                }
            }
        };
        if u < -BETA_CAP {
            (-BETA_CAP, true)
        } else if u > BETA_CAP {
            (BETA_CAP, true)
        } else {
            (u, false)
        }
    }

    pub fn to_standard_normal(&self, x: f64) -> f64 {
        self.to_standard_normal_checked(x).0
    }

    /// Inverse isoprobabilistic map, `x = F^(-1)(Phi(u))`.
    pub fn from_standard_normal(&self, u: f64) -> f64 {
        match self.params {
            NaturalParams::Normal { loc, scale } => loc + scale * u,
            NaturalParams::Lognormal { mu, sigma } => (mu + sigma * u).exp(),
            NaturalParams::Gumbel { loc, scale } => {
                if u <= 0.0 {
                    let p = norm_cdf(u);
                    loc - scale * (-p.ln()).ln()
                } else {
                    // F = 1 - s with s = Phi(-u); -ln F = -ln_1p(-s)
                    let s = norm_cdf(-u);
                    loc - scale * (-(-s).ln_1p()).ln()
                }
            }
            NaturalParams::Weibull { shape, scale } => {
                if u <= 0.0 {
                    let p = norm_cdf(u);
                    scale * (-(-p).ln_1p()).powf(1.0 / shape)
                } else {
                    let s = norm_cdf(-u);
                    scale * (-s.ln()).powf(1.0 / shape)
                }
            }
        }
    }
}

/// Derive natural parameters from `(mean, std)` for the given family.
pub fn moments_to_natural_params(family: Family, mean: f64, std: f64) -> Result<NaturalParams> {
    Ok(match family {
        Family::Normal => NaturalParams::Normal {
            loc: mean,
            scale: std,
        },
        Family::Lognormal => {
            let cov = std / mean;
            let sigma2 = (1.0 + cov * cov).ln();
            NaturalParams::Lognormal {
                mu: mean.ln() - 0.5 * sigma2,
                sigma: sigma2.sqrt(),
            }
        }
        Family::Gumbel => {
            let scale = std * 6.0f64.sqrt() / std::f64::consts::PI;
            NaturalParams::Gumbel {
                loc: mean - EULER_GAMMA * scale,
                scale,
            }
        }
        Family::Weibull => {
            let cov = std / mean;
            let shape = weibull_shape_from_cov(cov)?;
            NaturalParams::Weibull {
                shape,
                scale: mean / gamma_fn(1.0 + 1.0 / shape),
            }
        }
    })
}

/// Weibull COV as a function of shape: strictly decreasing in k.
fn weibull_cov(k: f64) -> f64 {
    let g1 = gamma_fn(1.0 + 1.0 / k);
    let g2 = gamma_fn(1.0 + 2.0 / k);
    (g2 / (g1 * g1) - 1.0).max(0.0).sqrt()
}

/// Solve `COV(k) = cov` by bisection on k in [0.1, 50].
fn weibull_shape_from_cov(cov: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.1f64, 50.0f64);
    if !(cov > weibull_cov(hi) && cov < weibull_cov(lo)) {
        return Err(Error::Distribution(format!(
            "weibull COV {cov} outside solvable bracket ({:.3e}, {:.3e})",
            weibull_cov(hi),
            weibull_cov(lo)
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if weibull_cov(mid) > cov {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) / hi < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// An ordered collection of independent marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomVector {
    pub marginals: Vec<MarginalDistribution>,
}

impl RandomVector {
    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    /// Inverse-CDF transform of unit-hypercube points, column-wise.
    pub fn sample(&self, points01: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        points01
            .iter()
            .map(|row| {
                if row.len() != self.dim() {
                    return Err(Error::Distribution(format!(
                        "point dimension {} != random-vector dimension {}",
                        row.len(),
                        self.dim()
                    )));
                }
                row.iter()
                    .zip(&self.marginals)
                    .map(|(&p, m)| m.quantile(p))
                    .collect()
            })
            .collect()
    }
}

/// A design variable: the mean of a normally dispersed random input, bounded
/// to a design interval. The realized input is `N(d, std(d))` where the
/// dispersion is either a fixed standard deviation or a fixed COV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignVariable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub dispersion: Dispersion,
}

impl DesignVariable {
    pub fn std_at(&self, d: f64) -> f64 {
        self.dispersion.std_for_mean(d)
    }
}

/// The full input space of an RBDO problem: design-linked normal variables
/// (means controlled by the optimizer) followed by pure noise variables with
/// fixed marginals. Expression environments use the same order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpace {
    pub design: Vec<DesignVariable>,
    pub noise: Vec<(String, MarginalDistribution)>,
}

impl ProblemSpace {
    pub fn n_design(&self) -> usize {
        self.design.len()
    }

    pub fn n_noise(&self) -> usize {
        self.noise.len()
    }

    pub fn dim(&self) -> usize {
        self.design.len() + self.noise.len()
    }

    pub fn variable_names(&self) -> Vec<String> {
        self.design
            .iter()
            .map(|d| d.name.clone())
            .chain(self.noise.iter().map(|(n, _)| n.clone()))
            .collect()
    }

    pub fn lower_bounds(&self) -> Vec<f64> {
        self.design.iter().map(|d| d.lower).collect()
    }

    pub fn upper_bounds(&self) -> Vec<f64> {
        self.design.iter().map(|d| d.upper).collect()
    }

    /// Standard-normal coordinates of the noise means (the "noise at means"
    /// point used by deterministic design evaluations). Nonzero for skewed
    /// families, where the mean is not the median.
    pub fn noise_mean_u(&self) -> Vec<f64> {
        self.noise
            .iter()
            .map(|(_, m)| m.to_standard_normal(m.mean()))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        for d in &self.design {
            if !(d.lower < d.upper) {
                return Err(Error::Problem(format!(
                    "design variable `{}`: lower bound {} not below upper {}",
                    d.name, d.lower, d.upper
                )));
            }
            let worst_mean = match d.dispersion {
                Dispersion::Std(s) => {
                    if !(s > 0.0) {
                        return Err(Error::Problem(format!(
                            "design variable `{}`: dispersion must be positive",
                            d.name
                        )));
                    }
                    d.lower
                }
                Dispersion::Cov(c) => {
                    if !(c > 0.0) {
                        return Err(Error::Problem(format!(
                            "design variable `{}`: dispersion must be positive",
                            d.name
                        )));
                    }
                    if d.lower <= 0.0 {
                        return Err(Error::Problem(format!(
                            "design variable `{}`: COV dispersion needs positive bounds",
                            d.name
                        )));
                    }
                    d.lower
                }
            };
            let _ = worst_mean;
        }
        Ok(())
    }
}
