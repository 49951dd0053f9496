use clap::{Args, Parser, Subcommand};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use tsm_rbdo::benchmarks;
use tsm_rbdo::error::Error;
use tsm_rbdo::tsm::{
    ddo_report_text, report_text, run_ablation, run_ddo, run_ds_tsm, run_ds_tsm_with_models,
    AblationMode,
};
use tsm_rbdo::{RbdoProblem, TsmConfig, TsmResult};
use tsm_rbdo_cli::artifacts::{emit_ddo_report, emit_report};
use tsm_rbdo_cli::config::{parse_problem_config, ProblemConfig};
use tsm_rbdo_cli::ingest::{ingest_samples, parse_sample_table};

/// Reliability-based design optimization through threshold calibration.
///
/// Exit codes: 0 converged / succeeded, 2 finished without convergence,
/// 3 configuration or input error, 4 numeric failure during the run.
#[derive(Parser)]
#[command(name = "tsm-rbdo", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SourceArgs {
    /// Built-in problem name (see `--problem help` for the list).
    #[arg(long, conflicts_with = "config")]
    problem: Option<String>,
    /// TOML problem description file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Joint sample table (CSV) to train the limit-state surrogates from
    /// instead of evaluating the limit states.
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Override every constraint's target reliability index.
    #[arg(long)]
    beta_target: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Random seed for training designs and Monte Carlo (default 1).
    #[arg(long)]
    seed: Option<u64>,
    /// Directory to write summary.txt and trace CSVs into.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Full dual-surrogate run: calibrate thresholds until every active
    /// constraint meets its target.
    Run(RunArgs),
    /// Deterministic design baseline (noise at means), with post-hoc
    /// Monte Carlo reliability.
    Ddo(RunArgs),
    /// Full run with one modification switched off.
    Ablate {
        #[command(flatten)]
        run: RunArgs,
        /// a = no coupled calibration, b = no limit-state surrogate,
        /// c = no active-set selection.
        #[arg(long)]
        mode: String,
    },
    /// Run every built-in problem and diff against the recorded reference
    /// results.
    Bench {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a built-in problem as a TOML config.
    ExportProblem {
        /// Built-in problem name.
        #[arg(long)]
        problem: String,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const CONFIG_ERROR: u8 = 3;
const NUMERIC_ERROR: u8 = 4;
const NOT_CONVERGED: u8 = 2;

fn fail(code: u8, err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(code)
}

fn load_problem(source: &SourceArgs) -> Result<RbdoProblem, Error> {
    let mut problem = match (&source.problem, &source.config) {
        (Some(name), None) => benchmarks::builtin(name).ok_or_else(|| {
            Error::Config(format!(
                "unknown builtin `{name}` (available: {})",
                benchmarks::BUILTIN_NAMES.join(", ")
            ))
        })?,
        (None, Some(path)) => parse_problem_config(&fs::read_to_string(path)?)?,
        (None, None) => {
            return Err(Error::Config(
                "one of --problem or --config is required".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    if let Some(target) = source.beta_target {
        for c in &mut problem.constraints {
            c.beta_target = target;
        }
    }
    Ok(problem)
}

fn make_config(seed: Option<u64>) -> TsmConfig {
    let mut config = TsmConfig::default();
    if let Some(s) = seed {
        config.seed = s;
    }
    config
}

fn run_calibration(args: &RunArgs, mode: Option<AblationMode>) -> ExitCode {
    let problem = match load_problem(&args.source) {
        Ok(p) => p,
        Err(e) => return fail(CONFIG_ERROR, &e),
    };
    let config = make_config(args.seed);

    let outcome: Result<TsmResult, Error> = match (&args.source.samples, mode) {
        (Some(path), None) => (|| {
            let text = fs::read_to_string(path)?;
            let table = parse_sample_table(&text)?;
            let bank = ingest_samples(&table, &problem, &config)?;
            run_ds_tsm_with_models(&problem, &config, bank)
        })(),
        (Some(_), Some(_)) => {
            return fail(
                CONFIG_ERROR,
                &Error::Config("--samples cannot be combined with ablations".into()),
            )
        }
        (None, None) => run_ds_tsm(&problem, &config),
        (None, Some(m)) => run_ablation(&problem, &config, m),
    };
    let result = match outcome {
        Ok(r) => r,
        Err(e @ (Error::Config(_) | Error::Ingest(_) | Error::Io(_))) => {
            return fail(CONFIG_ERROR, &e)
        }
        Err(e) => return fail(NUMERIC_ERROR, &e),
    };

    let (tag, footnote) = mode_tag(mode);
    print!("{}", report_text(&problem, &result, tag));
    if let Some(note) = footnote {
        println!("{note}");
    }
    if let Some(dir) = &args.out {
        if let Err(e) = emit_report(&problem, &result, tag, footnote, dir) {
            return fail(NUMERIC_ERROR, &e);
        }
    }
    if result.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(NOT_CONVERGED)
    }
}

fn mode_tag(mode: Option<AblationMode>) -> (&'static str, Option<&'static str>) {
    match mode {
        None => ("tsm", None),
        Some(AblationMode::NoCoupling) => (
            "ablate:a",
            Some("Thresholds for each constraint computed separately."),
        ),
        Some(AblationMode::NoSurrogate) => (
            "ablate:b",
            Some("No surrogate model is used to approximate the limit state function."),
        ),
        Some(AblationMode::NoActiveSet) => (
            "ablate:c",
            Some("Active constraint algorithm has not been utilized."),
        ),
    }
}

fn run_ddo_cmd(args: &RunArgs) -> ExitCode {
    let problem = match load_problem(&args.source) {
        Ok(p) => p,
        Err(e) => return fail(CONFIG_ERROR, &e),
    };
    if args.source.samples.is_some() {
        return fail(
            CONFIG_ERROR,
            &Error::Config("--samples applies to `run`, not `ddo`".into()),
        );
    }
    let config = make_config(args.seed);
    let result = match run_ddo(&problem, &config) {
        Ok(r) => r,
        Err(e) => return fail(NUMERIC_ERROR, &e),
    };
    print!("{}", ddo_report_text(&problem, &result));
    if let Some(dir) = &args.out {
        if let Err(e) = emit_ddo_report(&problem, &result, dir) {
            return fail(NUMERIC_ERROR, &e);
        }
    }
    if result.solution.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(NOT_CONVERGED)
    }
}

fn run_bench(seed: Option<u64>, out: Option<&PathBuf>) -> ExitCode {
    let jobs: Vec<(RbdoProblem, Vec<benchmarks::ReferenceResult>, &str)> = vec![
        (
            benchmarks::problem_nonlinear_2d(),
            benchmarks::references_nonlinear_2d(),
            "nonlinear-2d",
        ),
        (
            benchmarks::problem_highly_nonlinear(),
            benchmarks::references_highly_nonlinear(),
            "highly-nonlinear",
        ),
        (
            benchmarks::problem_ibeam_axle(),
            benchmarks::references_ibeam_axle(),
            "ibeam-axle",
        ),
        (
            benchmarks::problem_bracket(),
            benchmarks::references_bracket(),
            "bracket",
        ),
        (
            benchmarks::problem_roof_truss(3.0),
            benchmarks::references_roof_truss(3.0),
            "roof-truss-b3",
        ),
        (
            benchmarks::problem_roof_truss(2.0),
            benchmarks::references_roof_truss(2.0),
            "roof-truss-b2",
        ),
    ];
    let config = make_config(seed);
    let mut all_converged = true;
    println!("problem           ours        reference   delta     calls (ours/ref)");
    for (problem, refs, label) in jobs {
        let result = match run_ds_tsm(&problem, &config) {
            Ok(r) => r,
            Err(e) => return fail(NUMERIC_ERROR, &e),
        };
        all_converged &= result.converged;
        let reference = refs.iter().find(|r| r.method == "ds-tsm");
        match reference {
            Some(r) => {
                let delta = 100.0 * (result.cost - r.cost) / r.cost.abs();
                println!(
                    "{label:<17} {:<11.4} {:<11.4} {delta:+.2}%   {} / {}",
                    result.cost,
                    r.cost,
                    result.function_calls,
                    r.function_calls.map_or("-".into(), |c| c.to_string()),
                );
            }
            None => println!("{label:<17} {:<11.4} (no reference row)", result.cost),
        }
        if let Some(dir) = out {
            if let Err(e) = emit_report(&problem, &result, "tsm", None, &dir.join(label)) {
                return fail(NUMERIC_ERROR, &e);
            }
        }
    }
    if all_converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(NOT_CONVERGED)
    }
}

fn run_export(problem: &str, out: Option<&PathBuf>) -> ExitCode {
    let Some(cfg) = ProblemConfig::from_builtin(problem) else {
        return fail(
            CONFIG_ERROR,
            &Error::Config(format!(
                "unknown builtin `{problem}` (available: {})",
                benchmarks::BUILTIN_NAMES.join(", ")
            )),
        );
    };
    let text = match cfg.to_toml() {
        Ok(t) => t,
        Err(e) => return fail(CONFIG_ERROR, &e),
    };
    match out {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                return fail(CONFIG_ERROR, &Error::Io(e));
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => run_calibration(&args, None),
        Command::Ddo(args) => run_ddo_cmd(&args),
        Command::Ablate { run, mode } => {
            let mode = match mode.as_str() {
                "a" => AblationMode::NoCoupling,
                "b" => AblationMode::NoSurrogate,
                "c" => AblationMode::NoActiveSet,
                other => {
                    return fail(
                        CONFIG_ERROR,
                        &Error::Config(format!("unknown ablation mode `{other}` (a, b, or c)")),
                    )
                }
            };
            run_calibration(&run, Some(mode))
        }
        Command::Bench { seed, out } => run_bench(seed, out.as_ref()),
        Command::ExportProblem { problem, out } => run_export(&problem, out.as_ref()),
    }
}
