//! Plain-text reports over driver results. The format is fixed: two runs
//! that produced equal results produce byte-identical reports.

use super::driver::DdoResult;
use super::{RbdoProblem, TsmResult};
use crate::special::pf_from_beta;
use std::fmt::Write;

/// Reliability indices come out of Monte Carlo saturated to [-8, 8]; the
/// saturated values print as one-sided bounds instead of pretending the
/// estimator resolved them.
pub fn beta_display(beta: f64) -> String {
    if beta >= 8.0 {
        ">8.00".into()
    } else if beta <= -8.0 {
        "<-8.00".into()
    } else {
        format!("{beta:.2}")
    }
}

fn pf_display(beta: f64) -> String {
    if beta >= 8.0 {
        "<1e-15".into()
    } else if beta <= -8.0 {
        ">1-1e-15".into()
    } else {
        format!("{:.3e}", pf_from_beta(beta))
    }
}

fn join_fixed(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.6}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn join_beta(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| beta_display(v))
        .collect::<Vec<_>>()
        .join(" ")
}

fn pad(s: &str, width: usize) -> String {
    format!("{s:<width$}")
}

fn constraint_block(problem: &RbdoProblem, betas: &[f64]) -> String {
    let name_w = problem
        .constraints
        .iter()
        .map(|c| c.name.len())
        .max()
        .unwrap_or(0)
        .max("constraint".len());
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}  target  beta    pf",
        pad("constraint", name_w)
    );
    for (c, &b) in problem.constraints.iter().zip(betas) {
        let _ = writeln!(
            out,
            "{}  {:<6}  {}  {}",
            pad(&c.name, name_w),
            format!("{:.2}", c.beta_target),
            pad(&beta_display(b), 6),
            pf_display(b)
        );
    }
    out
}

/// The per-iteration audit table. Thresholds are the full vector fed to the
/// design problem; beta* covers the active set in its stored order. Flags:
/// `t` = calibration solve returned its least-violating point, `d` = design
/// problem had no feasible point.
pub fn trace_text(result: &TsmResult) -> String {
    if result.trace.is_empty() {
        return "(no calibration iterations)\n".into();
    }
    let rows: Vec<(String, String, String, String)> = result
        .trace
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let flags = format!(
                "{}{}",
                if rec.threshold_flagged { "t" } else { "-" },
                if rec.design_flagged { "d" } else { "-" }
            );
            (
                format!("{:>4}", i + 1),
                flags,
                join_fixed(&rec.thresholds),
                format!(
                    "{}  |  {}",
                    join_beta(&rec.beta_active),
                    join_fixed(&rec.design)
                ),
            )
        })
        .collect();
    let thr_w = rows
        .iter()
        .map(|r| r.2.len())
        .max()
        .unwrap_or(0)
        .max("thresholds".len());
    let mut out = String::new();
    let _ = writeln!(
        out,
        "iter  fl  {}  beta*  |  design",
        pad("thresholds", thr_w)
    );
    for (i, fl, thr, rest) in rows {
        let _ = writeln!(out, "{i}  {fl}  {}  {rest}", pad(&thr, thr_w));
    }
    out
}

fn status_line(result: &TsmResult) -> String {
    if result.active.is_empty() {
        if result.converged {
            "deterministic fallback (all constraints over-reliable)".into()
        } else {
            "deterministic fallback, design problem flagged infeasible".into()
        }
    } else if result.converged {
        format!(
            "converged ({} iteration{})",
            result.iterations,
            if result.iterations == 1 { "" } else { "s" }
        )
    } else {
        format!("iteration cap reached ({} iterations)", result.iterations)
    }
}

/// Full report for a driver run. `mode` is a short label for the variant
/// that produced the result ("ds-tsm", "no-coupling", ...).
pub fn report_text(problem: &RbdoProblem, result: &TsmResult, mode: &str) -> String {
    let active_names = if result.active.is_empty() {
        "(none)".to_string()
    } else {
        result
            .active
            .iter()
            .map(|&i| problem.constraints[i].name.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut out = String::new();
    let _ = writeln!(out, "=== {} [{mode}] ===", problem.name);
    let _ = writeln!(out, "status          : {}", status_line(result));
    let _ = writeln!(out, "function calls  : {}", result.function_calls);
    let _ = writeln!(
        out,
        "threshold table : {} rows ({} feasible)",
        result.table.rows(),
        result.table.feasible_rows()
    );
    let _ = writeln!(out, "active set      : {active_names}");
    let _ = writeln!(out, "design          : {}", join_fixed(&result.design));
    let _ = writeln!(out, "cost            : {:.6}", result.cost);
    let _ = writeln!(out);
    out.push_str(&constraint_block(problem, &result.beta));
    let _ = writeln!(out);
    out.push_str(&trace_text(result));
    out
}

/// Report for a plain deterministic design run.
pub fn ddo_report_text(problem: &RbdoProblem, ddo: &DdoResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "=== {} [ddo] ===", problem.name);
    let _ = writeln!(
        out,
        "status          : {}",
        if ddo.solution.converged {
            "converged"
        } else {
            "no feasible point (least-violating design shown)"
        }
    );
    let _ = writeln!(
        out,
        "reliability via : {}",
        if ddo.on_surrogate {
            "surrogate bank"
        } else {
            "true limit states"
        }
    );
    if ddo.degenerate_cost {
        let _ = writeln!(out, "note            : cost does not depend on the design");
    }
    let _ = writeln!(out, "design          : {}", join_fixed(&ddo.solution.x));
    let _ = writeln!(out, "cost            : {:.6}", ddo.cost);
    let _ = writeln!(out);
    out.push_str(&constraint_block(problem, &ddo.beta));
    out
}
