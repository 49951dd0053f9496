//! Run artifacts: a human-readable summary plus machine-readable CSV traces.
//!
//! Every float in a CSV is printed with 17 significant digits, so re-parsing
//! reproduces the in-memory values bit for bit. Files use ',' delimiters,
//! '.' decimals, LF line endings, and a mandatory header row.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use tsm_rbdo::error::Result;
use tsm_rbdo::tsm::{ddo_report_text, report_text, DdoResult};
use tsm_rbdo::{RbdoProblem, TsmResult};

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Iteration trace, one row per outer iteration: thresholds, per-active-
/// constraint reliability, design, and the two solver flags (0/1).
pub fn trace_csv(problem: &RbdoProblem, result: &TsmResult) -> String {
    let mut header = vec!["iteration".to_string()];
    for c in &problem.constraints {
        header.push(format!("c_{}", c.name));
    }
    for &i in &result.active {
        header.push(format!("beta_{}", problem.constraints[i].name));
    }
    for d in &problem.space.design {
        header.push(format!("d_{}", d.name));
    }
    header.push("threshold_flagged".into());
    header.push("design_flagged".into());
    let mut out = header.join(",");
    out.push('\n');
    for (it, rec) in result.trace.iter().enumerate() {
        let mut cells = vec![(it + 1).to_string()];
        cells.extend(rec.thresholds.iter().map(|&v| f(v)));
        cells.extend(rec.beta_active.iter().map(|&v| f(v)));
        cells.extend(rec.design.iter().map(|&v| f(v)));
        cells.push((rec.threshold_flagged as u8).to_string());
        cells.push((rec.design_flagged as u8).to_string());
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Plot data: iteration vs reliability index per active constraint.
pub fn plot_beta_csv(problem: &RbdoProblem, result: &TsmResult) -> String {
    let mut header = vec!["iteration".to_string()];
    for &i in &result.active {
        header.push(format!("beta_{}", problem.constraints[i].name));
    }
    let mut out = header.join(",");
    out.push('\n');
    for (it, rec) in result.trace.iter().enumerate() {
        let mut cells = vec![(it + 1).to_string()];
        cells.extend(rec.beta_active.iter().map(|&v| f(v)));
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Plot data: iteration vs cost of that iteration's design.
pub fn plot_cost_csv(problem: &RbdoProblem, result: &TsmResult) -> String {
    let mut out = String::from("iteration,cost\n");
    for (it, rec) in result.trace.iter().enumerate() {
        let _ = writeln!(out, "{},{}", it + 1, f(problem.cost.eval(&rec.design)));
    }
    out
}

/// Write the full artifact set for a calibration run into `dir` (created if
/// missing): `summary.txt`, `trace.csv`, `plot_beta.csv`, `plot_cost.csv`.
/// Returns the written paths.
pub fn emit_report(
    problem: &RbdoProblem,
    result: &TsmResult,
    mode: &str,
    footnote: Option<&str>,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut summary = report_text(problem, result, mode);
    if let Some(note) = footnote {
        summary.push('\n');
        summary.push_str(note);
        summary.push('\n');
    }
    let files = [
        ("summary.txt", summary),
        ("trace.csv", trace_csv(problem, result)),
        ("plot_beta.csv", plot_beta_csv(problem, result)),
        ("plot_cost.csv", plot_cost_csv(problem, result)),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}

/// Write the single-file artifact for a deterministic baseline run.
pub fn emit_ddo_report(
    problem: &RbdoProblem,
    result: &DdoResult,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let path = dir.join("summary.txt");
    fs::write(&path, ddo_report_text(problem, result))?;
    Ok(vec![path])
}

#[cfg(test)]
mod tests {
    use super::*;
    use tsm_rbdo::tsm::{BetaTable, IterationRecord};

    fn fake_result() -> (RbdoProblem, TsmResult) {
        let problem = tsm_rbdo::benchmarks::problem_nonlinear_2d();
        let rec = |k: f64| IterationRecord {
            thresholds: vec![-0.1 * k - 0.017, 0.0],
            design: vec![2.9 + k * 1e-3, 3.2 - k * 1e-3],
            beta_active: vec![1.9 + 0.05 * k],
            threshold_flagged: false,
            design_flagged: k == 1.0,
        };
        let result = TsmResult {
            design: vec![2.86, 3.21],
            cost: 1.33,
            beta: vec![2.0, 8.0],
            active: vec![0],
            trace: vec![rec(1.0), rec(2.0)],
            table: BetaTable {
                thresholds: vec![vec![0.0, 0.0]],
                betas: vec![vec![0.3, 8.0]],
                designs: vec![vec![2.97, 3.41]],
                feasible: vec![true],
            },
            function_calls: 42,
            iterations: 2,
            converged: true,
        };
        (problem, result)
    }

    #[test]
    fn trace_csv_round_trips_bit_for_bit() {
        let (problem, result) = fake_result();
        let text = trace_csv(&problem, &result);
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(
            header,
            [
                "iteration",
                "c_g1",
                "c_g2",
                "beta_g1",
                "d_x1",
                "d_x2",
                "threshold_flagged",
                "design_flagged"
            ]
        );
        for (row, rec) in lines.zip(&result.trace) {
            let cells: Vec<&str> = row.split(',').collect();
            let parsed: Vec<f64> = cells[1..6].iter().map(|c| c.parse().unwrap()).collect();
            let expect = [
                rec.thresholds[0],
                rec.thresholds[1],
                rec.beta_active[0],
                rec.design[0],
                rec.design[1],
            ];
            for (p, e) in parsed.iter().zip(expect) {
                assert_eq!(p.to_bits(), e.to_bits());
            }
            assert_eq!(cells[7], if rec.design_flagged { "1" } else { "0" });
        }
    }

    #[test]
    fn emitted_files_land_in_the_directory() {
        let (problem, result) = fake_result();
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&problem, &result, "tsm", None, dir.path()).unwrap();
        assert_eq!(files.len(), 4);
        for path in &files {
            assert!(path.exists(), "{path:?}");
        }
        let summary = std::fs::read_to_string(&files[0]).unwrap();
        assert!(summary.contains("nonlinear-2d"));
        let cost_csv = std::fs::read_to_string(dir.path().join("plot_cost.csv")).unwrap();
        assert_eq!(cost_csv.lines().count(), 3);
    }

    #[test]
    fn footnote_is_appended_to_ablation_summaries() {
        let (problem, result) = fake_result();
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(
            &problem,
            &result,
            "ablate:a",
            Some("Thresholds for each constraint computed separately."),
            dir.path(),
        )
        .unwrap();
        let summary = std::fs::read_to_string(&files[0]).unwrap();
        assert!(summary
            .trim_end()
            .ends_with("Thresholds for each constraint computed separately."));
    }
}
