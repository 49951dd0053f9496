//! Standard-normal CDF/quantile and gamma-function helpers.
//!
//! One place with the saturation conventions baked in: reliability indices are
//! reported in [-8, 8], matching the "> 8.00" rendering used for practically
//! certain constraints.
//!
//! The CDF is computed through `erfc` so the small-probability tail keeps full
//! relative precision, and the quantile is a Hastings starting guess polished
//! by Halley iterations against that same CDF. This keeps the pair mutually
//! consistent to roughly 1e-15 over the whole saturation range, which the
//! bundled `statrs` inverse cannot provide in the far tail.

use statrs::function::gamma;

/// Saturation bound for reliability indices and standard-normal coordinates.
pub const BETA_CAP: f64 = 8.0;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Standard normal CDF with full relative precision in the lower tail.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal survival function `1 - Phi(x)`, precise for large `x`.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    const INV_SQRT_TWO_PI: f64 = 0.3989422804014327;
    INV_SQRT_TWO_PI * (-0.5 * x * x).exp()
}

/// Standard normal quantile. `p` must lie in (0, 1).
///
/// A Hastings rational starting guess (good to ~5e-4) followed by three Halley
/// steps against the erfc-based CDF. Each step roughly cubes the error, so the
/// result is limited only by the CDF's own precision: relative error around
/// 1e-15 across both tails.
pub fn norm_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let (tail_p, negate) = if p < 0.5 { (p, false) } else { (1.0 - p, true) };
    // Hastings approximation 26.2.23 for the lower-tail quantile.
    let t = (-2.0 * tail_p.ln()).sqrt();
    let mut x = -(t - (2.30753 + 0.27061 * t) / (1.0 + t * (0.99229 + 0.04481 * t)));
    // Halley's method on f(x) = Phi(x) - p. With f' = phi and f'' = -x phi the
    // update is x - u / (1 + x u / 2), u = (Phi(x) - p) / phi(x).
    for _ in 0..3 {
        let err = norm_cdf(x) - tail_p;
        let u = err / norm_pdf(x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    if negate { -x } else { x }
}

/// `Gamma(x)` for positive `x`.
pub fn gamma_fn(x: f64) -> f64 {
    gamma::gamma(x)
}

/// Reliability index from a probability of failure: `beta = -Phi^-1(pf)`,
/// saturated to [-8, 8]. `pf = 0` maps to the +8 cap and `pf = 1` to -8.
pub fn beta_from_pf(pf: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&pf));
    if pf <= norm_sf(BETA_CAP) {
        return BETA_CAP;
    }
    if pf >= norm_cdf(BETA_CAP) {
        return -BETA_CAP;
    }
    (-norm_quantile(pf)).clamp(-BETA_CAP, BETA_CAP)
}

/// Probability of failure corresponding to a reliability index.
pub fn pf_from_beta(beta: f64) -> f64 {
    norm_sf(beta)
}
