//! Problem configuration files.
//!
//! A config is a TOML document describing one RBDO problem: design variables
//! (bounds plus dispersion), noise variables (family plus moments), a cost
//! expression over the design variables, and one or more probabilistic
//! constraints whose limit states are expressions over design and noise
//! variables in declaration order. Expressions use the operators
//! `+ - * / ^`, the functions `sin cos sqrt ln exp abs min max`, parentheses,
//! the built-in constant `pi`, and any constants declared under
//! `[constants]`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use tsm_rbdo::benchmarks;
use tsm_rbdo::error::{Error, Result};
use tsm_rbdo::expr::parse_expr;
use tsm_rbdo::probspace::{
    DesignVariable, Dispersion, Family, MarginalDistribution, ProblemSpace,
};
use tsm_rbdo::tsm::Evaluator;
use tsm_rbdo::{ProbabilisticConstraint, RbdoProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub name: String,
    /// Cost expression over the design variables.
    pub cost: String,
    /// Starting design for the deterministic solves; defaults to the box
    /// midpoint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_design: Option<Vec<f64>>,
    /// Named constants available to every expression.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, f64>,
    pub design: Vec<DesignConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub noise: Vec<NoiseConfig>,
    pub constraint: Vec<ConstraintConfig>,
}

/// A design variable: box bounds and the dispersion of the normal scatter
/// around the design value. Exactly one of `std` / `cov` must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov: Option<f64>,
}

/// A noise variable: marginal family and moments. Exactly one of `std` /
/// `cov` must be present; `family` is one of `normal`, `lognormal`,
/// `gumbel`, `weibull`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub name: String,
    pub family: String,
    pub mean: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov: Option<f64>,
}

/// One probabilistic constraint: failure is `g > threshold`, required
/// reliability `beta_target`, surrogate training budget `doe`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintConfig {
    pub name: String,
    pub g: String,
    #[serde(default)]
    pub threshold: f64,
    pub beta_target: f64,
    pub doe: usize,
    /// Central probability mass of the noise box non-normal marginals are
    /// trained over; defaults to the standard 0.9999.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantile_mass: Option<f64>,
}

fn dispersion(
    what: &str,
    name: &str,
    std: Option<f64>,
    cov: Option<f64>,
) -> Result<Dispersion> {
    match (std, cov) {
        (Some(s), None) => Ok(Dispersion::Std(s)),
        (None, Some(c)) => Ok(Dispersion::Cov(c)),
        (None, None) => Err(Error::Config(format!(
            "{what} `{name}`: one of `std` or `cov` is required"
        ))),
        (Some(_), Some(_)) => Err(Error::Config(format!(
            "{what} `{name}`: `std` and `cov` are mutually exclusive"
        ))),
    }
}

fn family(name: &str, text: &str) -> Result<Family> {
    match text {
        "normal" => Ok(Family::Normal),
        "lognormal" => Ok(Family::Lognormal),
        "gumbel" => Ok(Family::Gumbel),
        "weibull" => Ok(Family::Weibull),
        other => Err(Error::Config(format!(
            "noise `{name}`: unknown family `{other}` (expected normal, lognormal, gumbel, or weibull)"
        ))),
    }
}

impl ProblemConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Rebuild a config from a named builtin problem, using the stock
    /// expression encodings.
    pub fn from_builtin(name: &str) -> Option<Self> {
        let p = benchmarks::builtin(name)?;
        let enc = benchmarks::builtin_expressions(name)?;
        let design = p
            .space
            .design
            .iter()
            .map(|d| {
                let (std, cov) = match d.dispersion {
                    Dispersion::Std(s) => (Some(s), None),
                    Dispersion::Cov(c) => (None, Some(c)),
                };
                DesignConfig {
                    name: d.name.clone(),
                    lower: d.lower,
                    upper: d.upper,
                    std,
                    cov,
                }
            })
            .collect();
        let noise = p
            .space
            .noise
            .iter()
            .map(|(n, m)| NoiseConfig {
                name: n.clone(),
                family: match m.family() {
                    Family::Normal => "normal",
                    Family::Lognormal => "lognormal",
                    Family::Gumbel => "gumbel",
                    Family::Weibull => "weibull",
                }
                .into(),
                mean: m.mean(),
                std: Some(m.std()),
                cov: None,
            })
            .collect();
        let constraint = p
            .constraints
            .iter()
            .zip(&enc.limit_states)
            .map(|(c, g)| ConstraintConfig {
                name: c.name.clone(),
                g: (*g).into(),
                threshold: c.base_threshold,
                beta_target: c.beta_target,
                doe: c.doe_size,
                quantile_mass: None,
            })
            .collect();
        Some(ProblemConfig {
            name: p.name.clone(),
            cost: enc.cost.into(),
            initial_design: Some(p.initial_design.clone()),
            constants: BTreeMap::new(),
            design,
            noise,
            constraint,
        })
    }

    /// Compile into a runnable problem.
    pub fn to_problem(&self) -> Result<RbdoProblem> {
        if self.design.is_empty() {
            return Err(Error::Config("at least one design variable is required".into()));
        }
        if self.constraint.is_empty() {
            return Err(Error::Config("at least one constraint is required".into()));
        }
        let mut design = Vec::with_capacity(self.design.len());
        for d in &self.design {
            if !(d.lower < d.upper) {
                return Err(Error::Config(format!(
                    "design `{}`: bounds [{}, {}] are inverted or empty",
                    d.name, d.lower, d.upper
                )));
            }
            design.push(DesignVariable {
                name: d.name.clone(),
                lower: d.lower,
                upper: d.upper,
                dispersion: dispersion("design", &d.name, d.std, d.cov)?,
            });
        }
        let mut noise = Vec::with_capacity(self.noise.len());
        for n in &self.noise {
            let m = MarginalDistribution::from_moments(
                family(&n.name, &n.family)?,
                n.mean,
                dispersion("noise", &n.name, n.std, n.cov)?,
            )?;
            noise.push((n.name.clone(), m));
        }
        let space = ProblemSpace { design, noise };

        let consts: Vec<(&str, f64)> =
            self.constants.iter().map(|(k, &v)| (k.as_str(), v)).collect();
        let all_names = space.variable_names();
        let all_refs: Vec<&str> = all_names.iter().map(|s| s.as_str()).collect();
        let design_refs = &all_refs[..space.n_design()];

        let cost_expr = parse_expr(&self.cost, design_refs, &consts)?;
        let cost = Evaluator::new(move |d: &[f64]| cost_expr.eval(d));

        let mut constraints = Vec::with_capacity(self.constraint.len());
        for c in &self.constraint {
            let g_expr = parse_expr(&c.g, &all_refs, &consts)?;
            let mut pc = ProbabilisticConstraint::new(
                &c.name,
                move |x: &[f64]| g_expr.eval(x),
                c.threshold,
                c.beta_target,
                c.doe,
            );
            if let Some(mass) = c.quantile_mass {
                pc.noise_quantile_mass = mass;
            }
            constraints.push(pc);
        }

        let initial_design = match &self.initial_design {
            Some(d) => d.clone(),
            None => space
                .design
                .iter()
                .map(|v| 0.5 * (v.lower + v.upper))
                .collect(),
        };

        let problem = RbdoProblem {
            name: self.name.clone(),
            cost,
            constraints,
            space,
            deterministic: vec![],
            initial_design,
        };
        problem.validate()?;
        Ok(problem)
    }
}

/// Parse a TOML problem description into a validated problem.
pub fn parse_problem_config(text: &str) -> Result<RbdoProblem> {
    ProblemConfig::from_toml(text)?.to_problem()
}
