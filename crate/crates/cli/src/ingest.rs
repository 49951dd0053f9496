//! External sample tables: train the limit-state surrogate bank from a file
//! instead of evaluating the limit states directly. This is the route for
//! problems whose responses come from an external solver: run the solver
//! over a design of experiments once, save the joint table, and calibrate
//! from the table.

use nalgebra::{DMatrix, DVector};
use tsm_rbdo::error::{Error, Result};
use tsm_rbdo::surrogate::{fit_opc_kriging, OpcSettings};
use tsm_rbdo::tsm::{InputMap, TrainedSurrogates};
use tsm_rbdo::{RbdoProblem, TsmConfig};

/// A parsed delimited sample table: a header row of unique column names and
/// a rectangular numeric body. Inputs come first (one column per problem
/// variable, design then noise, in declaration order), followed by one
/// column per limit state.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalSampleTable {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Parse comma-delimited text with a mandatory header row.
pub fn parse_sample_table(text: &str) -> Result<ExternalSampleTable> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Ingest("empty table: a header row is required".into()))?;
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    if names.iter().any(|n| n.is_empty()) {
        return Err(Error::Ingest("header has an empty column name".into()));
    }
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(Error::Ingest(format!("duplicate column name `{n}`")));
        }
    }
    let mut rows = Vec::new();
    for (data_row, (_, line)) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != names.len() {
            return Err(Error::Ingest(format!(
                "row {}: {} cells but {} header columns",
                data_row + 1,
                cells.len(),
                names.len()
            )));
        }
        let mut row = Vec::with_capacity(cells.len());
        for (cell, name) in cells.iter().zip(&names) {
            row.push(cell.parse::<f64>().map_err(|_| {
                Error::Ingest(format!(
                    "row {}: column `{name}`: cannot parse `{cell}` as a number",
                    data_row + 1
                ))
            })?);
        }
        rows.push(row);
    }
    Ok(ExternalSampleTable { names, rows })
}

/// Fit one limit-state surrogate per constraint from a joint sample table.
///
/// The table's input columns must match the problem's variables by name and
/// order; the remaining columns are limit-state responses, one per
/// constraint. Every constraint trains on all rows, and the run's
/// function-call bill becomes the row count: the table stands for one batch
/// of true evaluations that produced every response at once.
pub fn ingest_samples(
    table: &ExternalSampleTable,
    problem: &RbdoProblem,
    config: &TsmConfig,
) -> Result<TrainedSurrogates> {
    problem.validate()?;
    let dim = problem.space.dim();
    let np = problem.n_constraints();
    let expected = problem.space.variable_names();
    if table.names.len() != dim + np {
        return Err(Error::Ingest(format!(
            "table has {} columns; expected {} ({} inputs + {} limit states)",
            table.names.len(),
            dim + np,
            dim,
            np
        )));
    }
    if table.names[..dim] != expected[..] {
        return Err(Error::Ingest(format!(
            "input columns {:?} do not match problem variables {:?}",
            &table.names[..dim],
            expected
        )));
    }
    let n = table.rows.len();
    if n < 3 {
        return Err(Error::Ingest(format!(
            "{n} data rows; at least 3 are required to fit a surrogate"
        )));
    }

    let nd = problem.space.n_design();
    let settings = OpcSettings {
        max_degree: config.max_degree,
        ..OpcSettings::default()
    };
    let mut models = Vec::with_capacity(np);
    let mut maps = Vec::with_capacity(np);
    for (j, c) in problem.constraints.iter().enumerate() {
        let map = InputMap::for_space(&problem.space, c.noise_quantile_mass)?;
        let mut x = DMatrix::zeros(n, dim);
        let mut y = DVector::zeros(n);
        for (r, row) in table.rows.iter().enumerate() {
            for i in 0..nd {
                x[(r, i)] = map.scale_design(i, row[i]);
            }
            for k in 0..dim - nd {
                x[(r, nd + k)] = map.scale_physical_noise(k, row[nd + k]);
            }
            let val = row[dim + j];
            if !val.is_finite() {
                return Err(Error::Ingest(format!(
                    "row {}: non-finite value in limit-state column `{}`",
                    r + 1,
                    table.names[dim + j]
                )));
            }
            y[r] = val;
        }
        let model = fit_opc_kriging(&x, &y, map.families(), &settings).map_err(|e| {
            Error::Ingest(format!(
                "limit-state column `{}`: {e}",
                table.names[dim + j]
            ))
        })?;
        models.push(model);
        maps.push(map);
    }
    Ok(TrainedSurrogates {
        models,
        maps,
        calls: n,
    })
}

/// Render a joint table for `problem` by evaluating its true limit states on
/// a Sobol design of `n` rows (the same box the built-in training would
/// use). Useful for tests and for seeding external-solver workflows.
pub fn render_true_table(problem: &RbdoProblem, n: usize) -> Result<String> {
    use std::fmt::Write as _;
    let map = InputMap::for_space(
        &problem.space,
        problem.constraints[0].noise_quantile_mass,
    )?;
    let dim = problem.space.dim();
    let points = tsm_rbdo::sampling::sobol_points(dim, n, 0)?;
    let mut out = String::new();
    let mut header = problem.space.variable_names();
    for c in &problem.constraints {
        header.push(c.name.clone());
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for p in &points {
        let (phys, _) = map.doe_row(p);
        let mut cells: Vec<String> = phys.iter().map(|v| format!("{v:.16e}")).collect();
        for c in &problem.constraints {
            cells.push(format!("{:.16e}", c.g.eval(&phys)));
        }
        let _ = writeln!(out, "{}", cells.join(","));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tsm_rbdo::benchmarks::problem_nonlinear_2d;

    fn toy_table() -> String {
        // x1, x2 over the nonlinear-2d box with a linear g column appended
        let p = problem_nonlinear_2d();
        render_true_table(&p, 12).unwrap()
    }

    #[test]
    fn header_and_rows_parse() {
        let t = parse_sample_table(&toy_table()).unwrap();
        assert_eq!(t.names, ["x1", "x2", "g1", "g2"]);
        assert_eq!(t.rows.len(), 12);
        assert!(t.rows.iter().all(|r| r.len() == 4));
    }

    #[test]
    fn malformed_cell_names_the_row() {
        let text = "x1,x2,g1,g2\n1,2,3,4\n1,2,oops,4\n";
        let err = parse_sample_table(text).unwrap_err().to_string();
        assert!(err.contains("row 2") && err.contains("g1") && err.contains("oops"), "{err}");
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let text = "x1,x2,g1,g2\n1,2,3\n";
        let err = parse_sample_table(text).unwrap_err().to_string();
        assert!(err.contains("row 1") && err.contains("3 cells"), "{err}");
    }

    #[test]
    fn column_mismatch_lists_both_sides() {
        let p = problem_nonlinear_2d();
        let text = "x1,zz,g1,g2\n1,2,3,4\n1,2,3,4\n1,2,3,4\n";
        let t = parse_sample_table(text).unwrap();
        let err = ingest_samples(&t, &p, &TsmConfig::default())
            .unwrap_err()
            .to_string();
        assert!(err.contains("zz") && err.contains("x2"), "{err}");
    }

    #[test]
    fn wrong_column_count_is_reported() {
        let p = problem_nonlinear_2d();
        let t = parse_sample_table("x1,x2,g1\n1,2,3\n1,2,3\n1,2,3\n").unwrap();
        let err = ingest_samples(&t, &p, &TsmConfig::default())
            .unwrap_err()
            .to_string();
        assert!(err.contains("3 columns") && err.contains("expected 4"), "{err}");
    }

    #[test]
    fn fitted_bank_bills_the_row_count_and_interpolates() {
        let p = problem_nonlinear_2d();
        let text = render_true_table(&p, 24).unwrap();
        let t = parse_sample_table(&text).unwrap();
        let bank = ingest_samples(&t, &p, &TsmConfig::default()).unwrap();
        assert_eq!(bank.calls, 24);
        assert_eq!(bank.models.len(), 2);
        // surrogates interpolate the table rows they were trained on
        for row in t.rows.iter().step_by(7) {
            for (j, m) in bank.models.iter().enumerate() {
                let coords: Vec<f64> = (0..2)
                    .map(|i| bank.maps[j].scale_design(i, row[i]))
                    .collect();
                let pred = m.predict_mean(&coords);
                assert!(
                    (pred - row[2 + j]).abs() < 1e-6,
                    "g{} at {:?}: {pred} vs {}",
                    j + 1,
                    &row[..2],
                    row[2 + j]
                );
            }
        }
    }

    #[test]
    fn constant_limit_state_column_still_fits() {
        let p = problem_nonlinear_2d();
        let base = render_true_table(&p, 16).unwrap();
        // overwrite the g2 column with a constant
        let mut lines: Vec<String> = base.lines().map(String::from).collect();
        for line in lines.iter_mut().skip(1) {
            let mut cells: Vec<&str> = line.split(',').collect();
            cells[3] = "4.25";
            *line = cells.join(",");
        }
        let t = parse_sample_table(&lines.join("\n")).unwrap();
        let bank = ingest_samples(&t, &p, &TsmConfig::default()).unwrap();
        let c = bank.maps[1].scaled_at_mean_noise(&[1.85, 2.0]);
        assert!((bank.models[1].predict_mean(&c) - 4.25).abs() < 1e-6);
    }
}
