//! Five ready-made benchmark problems and published reference results.
//!
//! Each constructor returns a fully wired [`RbdoProblem`] with the standard
//! training budgets, targets, and initial design. The stress / displacement
//! problems encode their limit states as log margins (`ln(demand/capacity)`,
//! failure above 0): the failure events and thresholds are identical to the
//! raw-margin forms, but the response surface a degree-bounded trend has to
//! learn stays O(1) across the whole training box instead of blowing up at
//! the thin-section corners.
//!
//! [`builtin_expressions`] carries the same limit states in the expression
//! language used by config files; tests pin the two representations to each
//! other so they cannot drift.

use crate::probspace::{
    DesignVariable, Dispersion, Family, MarginalDistribution, ProblemSpace,
};
use crate::tsm::{Evaluator, ProbabilisticConstraint, RbdoProblem};

/// A published result row for one of the benchmark problems. These are
/// literature records for comparison, not values this toolkit computed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceResult {
    pub method: &'static str,
    /// Optimum design as published (empty when the row reports no design).
    pub design: Vec<f64>,
    pub cost: f64,
    /// Reliability indices as published; 8.0 stands for "> 8".
    pub beta: Vec<f64>,
    pub function_calls: Option<usize>,
    pub iterations: Option<usize>,
    /// Method family, for grouping in comparisons.
    pub tag: &'static str,
}

pub const BUILTIN_NAMES: [&str; 5] = [
    "nonlinear-2d",
    "highly-nonlinear",
    "ibeam-axle",
    "bracket",
    "roof-truss",
];

/// Look up a benchmark by its CLI name. `roof-truss` defaults to the
/// target-3 variant; retarget via [`problem_roof_truss`] or by editing the
/// returned problem's constraints.
pub fn builtin(name: &str) -> Option<RbdoProblem> {
    match name {
        "nonlinear-2d" => Some(problem_nonlinear_2d()),
        "highly-nonlinear" => Some(problem_highly_nonlinear()),
        "ibeam-axle" => Some(problem_ibeam_axle()),
        "bracket" => Some(problem_bracket()),
        "roof-truss" => Some(problem_roof_truss(3.0)),
        _ => None,
    }
}

/// Cost and limit-state encodings in the expression language, in problem
/// variable order, for config export.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuiltinExpressions {
    pub cost: &'static str,
    pub limit_states: Vec<&'static str>,
}

pub fn builtin_expressions(name: &str) -> Option<BuiltinExpressions> {
    match name {
        "nonlinear-2d" => Some(BuiltinExpressions {
            cost: "(x1 - 3.7)^2 + (x2 - 4)^2",
            limit_states: vec![
                "x1*sin(4*x1) + 1.1*x2*sin(2*x2)",
                "3 - x1 - x2",
            ],
        }),
        "highly-nonlinear" => Some(BuiltinExpressions {
            cost: "-(x1 + x2 - 10)^2/30 - (x1 - x2 + 10)^2/120",
            limit_states: vec![
                "1 - x1^2*x2/20",
                "-1 + (0.9063*x1 + 0.4226*x2 - 6)^2 + (0.9063*x1 + 0.4226*x2 - 6)^3 \
                 - 0.6*(0.9063*x1 + 0.4226*x2 - 6)^4 + 0.4226*x1 - 0.9063*x2",
                "1 - 80/(x1^2 + 8*x2 + 5)",
            ],
        }),
        "ibeam-axle" => Some(BuiltinExpressions {
            cost: "b*t + 2*(h - t)*a",
            limit_states: vec![
                "ln(sqrt((m/(t*(b - 2*a)^3/(6*b) + h/(6*b)*(b^3 - (b - 2*a)^3)))^2 \
                 + 3*(tq/(0.8*h*a^2 + 0.4*t^3*(b - 2*a)/a))^2)/460)",
            ],
        }),
        "bracket" => Some(BuiltinExpressions {
            cost: "7860*5*(t*0.001)*(4*sqrt(3)/9*(wab*0.001) + wcd*0.001)",
            limit_states: vec![
                "ln(6*(p*l/3 + rho*9.81*(wcd*0.001)*(t*0.001)*l^2/18)\
                 /((wcd*0.001)*(t*0.001)^2*sy))",
                "ln(2*(3*p/2 + 3*rho*9.81*(wcd*0.001)*(t*0.001)*l/4)\
                 /(9*pi^2*e*(t*0.001)*(wab*0.001)^3*(3/4)/(48*l^2)))",
            ],
        }),
        "roof-truss" => Some(BuiltinExpressions {
            cost: "20224*as + 364*ac",
            limit_states: vec!["ln((q*l^2/2)*(3.81/(ac*ec) + 1.13/(as*es))/0.03)"],
        }),
        _ => None,
    }
}

fn normal(mean: f64, std: f64) -> MarginalDistribution {
    MarginalDistribution::normal(mean, std).unwrap()
}

/// Two trigonometric limit states over two normal design-linked inputs;
/// failure below zero, so both are flipped into exceedance form.
pub fn problem_nonlinear_2d() -> RbdoProblem {
    let space = ProblemSpace {
        design: vec![
            DesignVariable {
                name: "x1".into(),
                lower: 0.0,
                upper: 3.7,
                dispersion: Dispersion::Std(0.1),
            },
            DesignVariable {
                name: "x2".into(),
                lower: 0.0,
                upper: 4.0,
                dispersion: Dispersion::Std(0.1),
            },
        ],
        noise: vec![],
    };
    RbdoProblem {
        name: "nonlinear-2d".into(),
        cost: Evaluator::new(|d: &[f64]| (d[0] - 3.7).powi(2) + (d[1] - 4.0).powi(2)),
        constraints: vec![
            ProbabilisticConstraint::new(
                "g1",
                |x: &[f64]| x[0] * (4.0 * x[0]).sin() + 1.1 * x[1] * (2.0 * x[1]).sin(),
                0.0,
                2.0,
                32,
            ),
            ProbabilisticConstraint::new("g2", |x: &[f64]| 3.0 - x[0] - x[1], 0.0, 2.0, 10),
        ],
        space,
        deterministic: vec![],
        // box midpoint; the problem statement fixes no starting design
        initial_design: vec![1.85, 2.0],
    }
}

pub fn references_nonlinear_2d() -> Vec<ReferenceResult> {
    vec![
        ReferenceResult {
            method: "ddo",
            design: vec![2.97, 3.41],
            cost: 0.89,
            beta: vec![-0.10, 8.0],
            function_calls: Some(70),
            iterations: Some(10),
            tag: "deterministic",
        },
        ReferenceResult {
            method: "brute-force",
            design: vec![2.84, 3.23],
            cost: 1.33,
            beta: vec![2.00, 8.0],
            function_calls: Some(10_000_000),
            iterations: Some(10),
            tag: "sampling",
        },
        ReferenceResult {
            method: "pma",
            design: vec![2.82, 3.30],
            cost: 1.26,
            beta: vec![1.67, 8.0],
            function_calls: Some(296),
            iterations: Some(7),
            tag: "double-loop",
        },
        ReferenceResult {
            method: "pma-kriging",
            design: vec![2.82, 3.30],
            cost: 1.26,
            beta: vec![1.67, 8.0],
            function_calls: Some(90),
            iterations: Some(7),
            tag: "double-loop",
        },
        ReferenceResult {
            method: "meta-rbdo",
            design: vec![2.81, 3.25],
            cost: 1.35,
            beta: vec![2.00, 8.0],
            function_calls: Some(90),
            iterations: Some(10),
            tag: "surrogate",
        },
        ReferenceResult {
            method: "ds-tsm",
            design: vec![2.86, 3.21],
            cost: 1.33,
            beta: vec![2.00, 8.0],
            function_calls: Some(42),
            iterations: Some(10),
            tag: "surrogate",
        },
    ]
}

/// Three polynomial / rational limit states in exceedance form over two
/// normal design-linked inputs; the quartic runs along a rotated axis.
pub fn problem_highly_nonlinear() -> RbdoProblem {
    let space = ProblemSpace {
        design: vec![
            DesignVariable {
                name: "x1".into(),
                lower: 0.0,
                upper: 10.0,
                dispersion: Dispersion::Std(0.3),
            },
            DesignVariable {
                name: "x2".into(),
                lower: 0.0,
                upper: 10.0,
                dispersion: Dispersion::Std(0.3),
            },
        ],
        noise: vec![],
    };
    RbdoProblem {
        name: "highly-nonlinear".into(),
        cost: Evaluator::new(|d: &[f64]| {
            -(d[0] + d[1] - 10.0).powi(2) / 30.0 - (d[0] - d[1] + 10.0).powi(2) / 120.0
        }),
        constraints: vec![
            ProbabilisticConstraint::new(
                "g1",
                |x: &[f64]| 1.0 - x[0] * x[0] * x[1] / 20.0,
                0.0,
                3.0,
                32,
            ),
            ProbabilisticConstraint::new(
                "g2",
                |x: &[f64]| {
                    let w = 0.9063 * x[0] + 0.4226 * x[1] - 6.0;
                    let z = 0.4226 * x[0] - 0.9063 * x[1];
                    -1.0 + w * w + w.powi(3) - 0.6 * w.powi(4) + z
                },
                0.0,
                3.0,
                128,
            ),
            ProbabilisticConstraint::new(
                "g3",
                |x: &[f64]| 1.0 - 80.0 / (x[0] * x[0] + 8.0 * x[1] + 5.0),
                0.0,
                3.0,
                64,
            ),
        ],
        space,
        deterministic: vec![],
        initial_design: vec![5.0, 5.0],
    }
}

pub fn references_highly_nonlinear() -> Vec<ReferenceResult> {
    vec![
        ReferenceResult {
            method: "ddo",
            design: vec![5.197, 0.741],
            cost: -2.29,
            beta: vec![-0.022],
            function_calls: Some(110),
            iterations: Some(35),
            tag: "deterministic",
        },
        ReferenceResult {
            method: "brute-force",
            design: vec![4.689, 1.908],
            cost: -1.747,
            beta: vec![3.0],
            function_calls: Some(30_000_000),
            iterations: Some(8),
            tag: "sampling",
        },
        ReferenceResult {
            method: "hcc",
            design: vec![4.558, 1.964],
            cost: -1.724,
            beta: vec![2.95],
            function_calls: Some(1629),
            iterations: Some(10),
            tag: "chaos-control",
        },
        ReferenceResult {
            method: "acc",
            design: vec![4.558, 1.964],
            cost: -1.724,
            beta: vec![2.95],
            function_calls: Some(861),
            iterations: Some(10),
            tag: "chaos-control",
        },
        ReferenceResult {
            method: "mmv",
            design: vec![4.558, 1.964],
            cost: -1.724,
            beta: vec![2.95],
            function_calls: Some(1593),
            iterations: Some(10),
            tag: "chaos-control",
        },
        ReferenceResult {
            method: "ds-tsm",
            design: vec![4.607, 1.949],
            cost: -1.731,
            beta: vec![3.00],
            function_calls: Some(224),
            iterations: Some(12),
            tag: "surrogate",
        },
    ]
}

/// Von-Mises stress in an I-section under bending and torsion, as a log
/// margin against the 460 MPa allowable. Design variables follow the
/// parameter-table naming `(a, b, t, h)`; inside the section formulas they
/// act as flange thickness `t_f = a`, depth `h_f = b`, web thickness
/// `a_f = t`, and width `b_f = h`.
pub fn problem_ibeam_axle() -> RbdoProblem {
    let space = ProblemSpace {
        design: vec![
            DesignVariable {
                name: "a".into(),
                lower: 10.0,
                upper: 20.0,
                dispersion: Dispersion::Std(0.060),
            },
            DesignVariable {
                name: "b".into(),
                lower: 70.0,
                upper: 120.0,
                dispersion: Dispersion::Std(0.325),
            },
            DesignVariable {
                name: "t".into(),
                lower: 10.0,
                upper: 20.0,
                dispersion: Dispersion::Std(0.070),
            },
            DesignVariable {
                name: "h".into(),
                lower: 60.0,
                upper: 100.0,
                dispersion: Dispersion::Std(0.425),
            },
        ],
        noise: vec![
            ("m".into(), normal(3.5e6, 1.75e5)),
            ("tq".into(), normal(3.1e6, 1.55e5)),
        ],
    };
    RbdoProblem {
        name: "ibeam-axle".into(),
        cost: Evaluator::new(|d: &[f64]| d[1] * d[2] + 2.0 * (d[3] - d[2]) * d[0]),
        constraints: vec![ProbabilisticConstraint::new(
            "stress",
            |x: &[f64]| {
                let (a, b, t, h) = (x[0], x[1], x[2], x[3]);
                let (m, tq) = (x[4], x[5]);
                let core = b - 2.0 * a;
                let wx = t * core.powi(3) / (6.0 * b) + h / (6.0 * b) * (b.powi(3) - core.powi(3));
                let wr = 0.8 * h * a * a + 0.4 * t.powi(3) * core / a;
                let sm = m / wx;
                let tau = tq / wr;
                ((sm * sm + 3.0 * tau * tau).sqrt() / 460.0).ln()
            },
            0.0,
            3.0,
            128,
        )],
        space,
        deterministic: vec![],
        initial_design: vec![12.0, 75.0, 12.0, 85.0],
    }
}

pub fn references_ibeam_axle() -> Vec<ReferenceResult> {
    vec![
        ReferenceResult {
            method: "hcc",
            design: vec![10.0, 70.0, 16.497, 60.0],
            cost: 2024.832,
            beta: vec![],
            function_calls: Some(1303),
            iterations: Some(6),
            tag: "chaos-control",
        },
        ReferenceResult {
            method: "acc",
            design: vec![10.0, 70.0, 16.497, 60.0],
            cost: 2024.832,
            beta: vec![],
            function_calls: Some(415),
            iterations: Some(6),
            tag: "chaos-control",
        },
        ReferenceResult {
            method: "smcc",
            design: vec![10.0, 70.0, 16.497, 60.0],
            cost: 2024.832,
            beta: vec![],
            function_calls: Some(1637),
            iterations: Some(6),
            tag: "chaos-control",
        },
        ReferenceResult {
            method: "ds-tsm",
            design: vec![10.0, 70.0, 16.303, 60.0],
            cost: 2015.144,
            beta: vec![],
            function_calls: Some(128),
            iterations: Some(8),
            tag: "surrogate",
        },
    ]
}

/// Two-member bracket under a vertical load and self weight: a bending
/// stress margin against lognormal yield, and an axial force margin against
/// Euler buckling, both as log margins. Designs are section dimensions in mm
/// with 5% dispersion; the member angle is fixed at 60 degrees, so
/// `1/cos = 2` and `sin^2 = 3/4` exactly.
pub fn problem_bracket() -> RbdoProblem {
    let mm = |name: &str| DesignVariable {
        name: name.into(),
        lower: 50.0,
        upper: 300.0,
        dispersion: Dispersion::Cov(0.05),
    };
    let space = ProblemSpace {
        design: vec![mm("wab"), mm("wcd"), mm("t")],
        noise: vec![
            (
                "p".into(),
                MarginalDistribution::from_moments(Family::Gumbel, 1e5, Dispersion::Cov(0.15))
                    .unwrap(),
            ),
            (
                "e".into(),
                MarginalDistribution::from_moments(Family::Gumbel, 2e11, Dispersion::Cov(0.08))
                    .unwrap(),
            ),
            (
                "sy".into(),
                MarginalDistribution::from_moments(Family::Lognormal, 225e6, Dispersion::Cov(0.08))
                    .unwrap(),
            ),
            (
                "rho".into(),
                MarginalDistribution::from_moments(Family::Weibull, 7860.0, Dispersion::Cov(0.10))
                    .unwrap(),
            ),
            ("l".into(), normal(5.0, 0.25)),
        ],
    };
    RbdoProblem {
        name: "bracket".into(),
        cost: Evaluator::new(|d: &[f64]| {
            7860.0 * 5.0 * (d[2] * 0.001) * (4.0 * 3.0f64.sqrt() / 9.0 * (d[0] * 0.001) + d[1] * 0.001)
        }),
        constraints: vec![
            ProbabilisticConstraint::new(
                "stress",
                |x: &[f64]| {
                    let (wcd, t) = (x[1] * 0.001, x[2] * 0.001);
                    let (p, sy, rho, l) = (x[3], x[5], x[6], x[7]);
                    let mb = p * l / 3.0 + rho * 9.81 * wcd * t * l * l / 18.0;
                    (6.0 * mb / (wcd * t * t * sy)).ln()
                },
                0.0,
                2.0,
                128,
            ),
            ProbabilisticConstraint::new(
                "buckling",
                |x: &[f64]| {
                    let (wab, wcd, t) = (x[0] * 0.001, x[1] * 0.001, x[2] * 0.001);
                    let (p, e, rho, l) = (x[3], x[4], x[6], x[7]);
                    let fab = 2.0 * (3.0 * p / 2.0 + 3.0 * rho * 9.81 * wcd * t * l / 4.0);
                    let fb = 9.0 * std::f64::consts::PI.powi(2) * e * t * wab.powi(3) * (3.0 / 4.0)
                        / (48.0 * l * l);
                    (fab / fb).ln()
                },
                0.0,
                2.0,
                64,
            ),
        ],
        space,
        deterministic: vec![],
        // box midpoint; the problem statement fixes no starting design
        initial_design: vec![175.0, 175.0, 175.0],
    }
}

pub fn references_bracket() -> Vec<ReferenceResult> {
    vec![
        ReferenceResult {
            method: "ddo-psf",
            design: vec![61.0, 202.0, 269.0],
            cost: 2632.0,
            beta: vec![4.83, 2.83],
            function_calls: Some(40),
            iterations: None,
            tag: "deterministic",
        },
        ReferenceResult {
            method: "sora",
            design: vec![61.0, 157.0, 209.0],
            cost: 1675.0,
            beta: vec![1.96, 1.98],
            function_calls: Some(1340),
            iterations: None,
            tag: "decoupled",
        },
        ReferenceResult {
            method: "nested-form",
            design: vec![61.0, 157.0, 209.0],
            cost: 1675.0,
            beta: vec![1.96, 1.98],
            function_calls: Some(2340),
            iterations: None,
            tag: "double-loop",
        },
        ReferenceResult {
            method: "meta-rbdo",
            design: vec![58.0, 128.0, 209.0],
            cost: 1584.0,
            beta: vec![1.98, 1.94],
            function_calls: Some(250),
            iterations: None,
            tag: "surrogate",
        },
        // the prose total (172) disagrees with the listed per-constraint
        // training sizes (128 + 64 = 192); the published total is kept here
        // as-is, while runs of this toolkit bill 192
        ReferenceResult {
            method: "ds-tsm",
            design: vec![54.75, 84.715, 300.0],
            cost: 1495.0,
            beta: vec![2.41, 2.19],
            function_calls: Some(172),
            iterations: Some(40),
            tag: "surrogate",
        },
    ]
}

/// Roof truss midspan deflection against the 0.03 m limit, as a log margin.
/// Design variables are the steel and concrete section areas in m²; the
/// target reliability index is a run parameter (2 and 3 are the published
/// settings).
pub fn problem_roof_truss(beta_target: f64) -> RbdoProblem {
    let space = ProblemSpace {
        design: vec![
            DesignVariable {
                name: "as".into(),
                lower: 0.0006,
                upper: 0.0012,
                dispersion: Dispersion::Std(5.9853e-5),
            },
            DesignVariable {
                name: "ac".into(),
                lower: 0.018,
                upper: 0.063,
                dispersion: Dispersion::Std(0.0048),
            },
        ],
        noise: vec![
            ("q".into(), normal(20000.0, 1400.0)),
            ("l".into(), normal(12.0, 0.12)),
            ("es".into(), normal(1e11, 6e9)),
            ("ec".into(), normal(2e10, 1.2e9)),
        ],
    };
    RbdoProblem {
        name: "roof-truss".into(),
        cost: Evaluator::new(|d: &[f64]| 20224.0 * d[0] + 364.0 * d[1]),
        constraints: vec![ProbabilisticConstraint::new(
            "deflection",
            |x: &[f64]| {
                let (a_s, a_c) = (x[0], x[1]);
                let (q, l, es, ec) = (x[2], x[3], x[4], x[5]);
                let disp = (q * l * l / 2.0) * (3.81 / (a_c * ec) + 1.13 / (a_s * es));
                (disp / 0.03).ln()
            },
            0.0,
            beta_target,
            164,
        )],
        space,
        deterministic: vec![],
        initial_design: vec![0.001, 0.042],
    }
}

/// Published rows for the target-3 and target-2 roof-truss runs. Section
/// areas for concrete were printed in the wrong power of ten in the source
/// table (3.24e-4 m² would sit far below the 0.018 m² lower bound); they are
/// recorded here in the bound-consistent 1e-2 scale.
pub fn references_roof_truss(beta_target: f64) -> Vec<ReferenceResult> {
    if beta_target == 2.0 {
        vec![
            ReferenceResult {
                method: "dcc",
                design: vec![10.1e-4, 3.45e-2],
                cost: 32.97,
                beta: vec![1.989],
                function_calls: Some(1702),
                iterations: Some(13),
                tag: "chaos-control",
            },
            ReferenceResult {
                method: "ds-tsm",
                design: vec![10.59e-4, 3.24e-2],
                cost: 33.22,
                beta: vec![2.02],
                function_calls: Some(164),
                iterations: Some(11),
                tag: "surrogate",
            },
            ReferenceResult {
                method: "weighted-sampling",
                design: vec![9.975e-4, 3.54e-2],
                cost: 33.054,
                beta: vec![2.02],
                function_calls: Some(40_000),
                iterations: None,
                tag: "sampling",
            },
        ]
    } else {
        vec![
            ReferenceResult {
                method: "smcc",
                design: vec![6.0e-4, 3.0e-2],
                cost: 23.066,
                beta: vec![1.65],
                function_calls: Some(5224),
                iterations: Some(35),
                tag: "chaos-control",
            },
            ReferenceResult {
                method: "hsmv",
                design: vec![6.0e-4, 4.19e-2],
                cost: 27.398,
                beta: vec![2.30],
                function_calls: Some(16_437),
                iterations: Some(16),
                tag: "chaos-control",
            },
            ReferenceResult {
                method: "dcc",
                design: vec![11.0e-4, 3.87e-2],
                cost: 36.311,
                beta: vec![3.00],
                function_calls: Some(1102),
                iterations: Some(12),
                tag: "chaos-control",
            },
            ReferenceResult {
                method: "ds-tsm",
                design: vec![11.6e-4, 3.57e-2],
                cost: 36.504,
                beta: vec![3.00],
                function_calls: Some(164),
                iterations: Some(10),
                tag: "surrogate",
            },
            ReferenceResult {
                method: "weighted-sampling",
                design: vec![10.68e-4, 4.05e-2],
                cost: 36.24,
                beta: vec![3.01],
                function_calls: Some(40_000),
                iterations: None,
                tag: "sampling",
            },
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use approx::assert_abs_diff_eq;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_problems() -> Vec<RbdoProblem> {
        vec![
            problem_nonlinear_2d(),
            problem_highly_nonlinear(),
            problem_ibeam_axle(),
            problem_bracket(),
            problem_roof_truss(3.0),
            problem_roof_truss(2.0),
        ]
    }

    #[test]
    fn every_builtin_validates() {
        for p in all_problems() {
            p.validate().unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
    }

    #[test]
    fn builtin_lookup_covers_the_name_list() {
        for name in BUILTIN_NAMES {
            let p = builtin(name).unwrap_or_else(|| panic!("missing {name}"));
            assert_eq!(p.name, name);
            assert!(builtin_expressions(name).is_some(), "{name}");
        }
        assert!(builtin("no-such-problem").is_none());
        assert!(builtin_expressions("no-such-problem").is_none());
    }

    #[test]
    fn training_budgets_sum_to_the_published_call_counts() {
        let totals: Vec<(usize, &str)> = vec![
            (42, "nonlinear-2d"),
            (224, "highly-nonlinear"),
            (128, "ibeam-axle"),
            (192, "bracket"),
            (164, "roof-truss"),
        ];
        for (want, name) in totals {
            let p = builtin(name).unwrap();
            let got: usize = p.constraints.iter().map(|c| c.doe_size).sum();
            assert_eq!(got, want, "{name}");
        }
    }

    /// The expression-language encodings and the compiled closures must be
    /// the same functions; a handful of space-filling points per problem is
    /// enough to catch any transcription drift.
    #[test]
    fn expressions_match_closures() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut unif = move || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        for p in all_problems().into_iter().take(5) {
            let enc = builtin_expressions(&p.name).unwrap();
            let names = p.space.variable_names();
            let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
            let design_names: Vec<&str> = name_refs[..p.space.n_design()].to_vec();
            let cost_expr = parse_expr(enc.cost, &design_names, &[]).unwrap();
            let g_exprs: Vec<_> = enc
                .limit_states
                .iter()
                .map(|s| parse_expr(s, &name_refs, &[]).unwrap())
                .collect();
            assert_eq!(g_exprs.len(), p.n_constraints(), "{}", p.name);
            let lo = p.space.lower_bounds();
            let hi = p.space.upper_bounds();
            for _ in 0..40 {
                let d: Vec<f64> = lo
                    .iter()
                    .zip(&hi)
                    .map(|(&l, &u)| l + (u - l) * unif())
                    .collect();
                let mut x = d.clone();
                for (_, m) in &p.space.noise {
                    // stay inside the central range where every marginal is
                    // comfortably defined
                    x.push(m.quantile(0.05 + 0.90 * unif()).unwrap());
                }
                let ce = cost_expr.eval(&d);
                let cc = p.cost.eval(&d);
                assert!(
                    (ce - cc).abs() <= 1e-12 * cc.abs().max(1.0),
                    "{} cost: expr {ce} vs closure {cc}",
                    p.name
                );
                for (j, (gx, c)) in g_exprs.iter().zip(&p.constraints).enumerate() {
                    let ge = gx.eval(&x);
                    let gc = c.g.eval(&x);
                    assert!(
                        (ge - gc).abs() <= 1e-12 * gc.abs().max(1.0),
                        "{} g{}: expr {ge} vs closure {gc} at {x:?}",
                        p.name,
                        j + 1
                    );
                }
            }
        }
    }

    /// Limit states at a published optimum (noise at means) must sit on the
    /// safe side whenever the published reliability meets its target —
    /// otherwise the encoding disagrees with the record.
    #[test]
    fn published_optima_sit_on_the_safe_side() {
        let cases: Vec<(RbdoProblem, Vec<ReferenceResult>)> = vec![
            (problem_nonlinear_2d(), references_nonlinear_2d()),
            (problem_highly_nonlinear(), references_highly_nonlinear()),
            (problem_ibeam_axle(), references_ibeam_axle()),
            (problem_bracket(), references_bracket()),
            (problem_roof_truss(3.0), references_roof_truss(3.0)),
            (problem_roof_truss(2.0), references_roof_truss(2.0)),
        ];
        let mut checked = 0;
        for (p, refs) in cases {
            let noise_means: Vec<f64> = p.space.noise.iter().map(|(_, m)| m.mean()).collect();
            for r in refs {
                if r.design.is_empty() || r.beta.len() != p.n_constraints() {
                    continue;
                }
                let mut x = r.design.clone();
                x.extend_from_slice(&noise_means);
                for (j, c) in p.constraints.iter().enumerate() {
                    if r.beta[j] >= c.beta_target {
                        let g = c.g.eval(&x);
                        assert!(
                            g < c.base_threshold,
                            "{} {}: g{} = {g} not safe at published optimum",
                            p.name,
                            r.method,
                            j + 1
                        );
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked >= 10, "only {checked} rows checked");
    }

    /// Cost at each published design must reproduce the published cost.
    /// Both figures are printed rounded, so the tolerance is 0.5% plus the
    /// largest drift the design rounding alone can cause (forward-difference
    /// gradient times half an ulp of the printed decimals).
    #[test]
    fn published_costs_reproduce_from_the_encodings() {
        let cases: Vec<(RbdoProblem, Vec<ReferenceResult>, Vec<f64>)> = vec![
            (
                problem_nonlinear_2d(),
                references_nonlinear_2d(),
                vec![0.005, 0.005],
            ),
            (
                problem_highly_nonlinear(),
                references_highly_nonlinear(),
                vec![0.0005, 0.0005],
            ),
            (
                problem_ibeam_axle(),
                references_ibeam_axle(),
                vec![0.05, 0.05, 0.0005, 0.05],
            ),
            (
                problem_bracket(),
                references_bracket(),
                vec![0.005, 0.0005, 0.5],
            ),
            (
                problem_roof_truss(3.0),
                references_roof_truss(3.0),
                vec![0.005e-4, 0.005e-2],
            ),
            (
                problem_roof_truss(2.0),
                references_roof_truss(2.0),
                vec![0.005e-4, 0.005e-2],
            ),
        ];
        let mut checked = 0;
        for (p, refs, half_ulp) in cases {
            for r in refs {
                if r.design.is_empty() {
                    continue;
                }
                // the bracket meta-rbdo row is quoted from an external study
                // whose weight accounting differs: its design evaluates to
                // ~1418 kg under the cost stated here, not the quoted 1584
                if p.name == "bracket" && r.method == "meta-rbdo" {
                    continue;
                }
                let c = p.cost.eval(&r.design);
                let mut rounding_drift = 0.0;
                for i in 0..r.design.len() {
                    let mut probe = r.design.clone();
                    probe[i] += half_ulp[i];
                    rounding_drift += (p.cost.eval(&probe) - c).abs();
                }
                let tol = 0.005 * r.cost.abs() + rounding_drift;
                assert!(
                    (c - r.cost).abs() <= tol,
                    "{} {}: cost {c} vs published {} (tol {tol})",
                    p.name,
                    r.method,
                    r.cost
                );
                checked += 1;
            }
        }
        assert!(checked >= 15, "only {checked} rows checked");
    }

    #[test]
    fn ibeam_cost_at_the_initial_design_is_exact() {
        // b t + 2 (h - t) a at (a, b, t, h) = (12, 75, 12, 85):
        // 75*12 + 2*73*12 = 2652
        let p = problem_ibeam_axle();
        assert_abs_diff_eq!(p.cost.eval(&p.initial_design), 2652.0, epsilon = 1e-12);
    }

    #[test]
    fn roof_truss_target_is_a_parameter() {
        assert_eq!(problem_roof_truss(2.0).constraints[0].beta_target, 2.0);
        assert_eq!(problem_roof_truss(3.0).constraints[0].beta_target, 3.0);
        assert_eq!(builtin("roof-truss").unwrap().constraints[0].beta_target, 3.0);
    }
}
