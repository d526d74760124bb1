use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use slelab::experiment::{self, formula_checks, Format, IDENTITY_KAPPAS};
use slelab::{ExperimentConfig, ExperimentReport};

#[derive(Parser)]
#[command(name = "lab", version, about = "Run SLE dimension experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        /// Experiment config file.
        config: PathBuf,
        /// Output directory (defaults to the config's `output`, then `.`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (defaults to the config's `workers`, then the core count).
        #[arg(long)]
        workers: Option<usize>,
        /// Comma-separated output formats: csv, json, svg.
        #[arg(long, value_delimiter = ',', default_value = "json")]
        format: Vec<Format>,
    },
    /// Check the dimension-formula identities on a grid of dimensions.
    CheckFormulas {
        /// Number of points in the dimension grid.
        #[arg(long, default_value_t = 1000)]
        grid: usize,
    },
}

fn summary(report: &ExperimentReport) -> String {
    let verdict = if report.pass { "PASS" } else { "FAIL" };
    match (report.mean, report.prediction) {
        (Some(mean), Some(prediction)) => {
            let failed = report
                .replicas
                .iter()
                .filter(|r| r.estimate.is_none())
                .count();
            format!(
                "{}: mean {:.4} ± {:.4} over {} replicas ({} failed), prediction {:.4}, tolerance {}: {}",
                report.config.experiment.name(),
                mean,
                report.stderr.unwrap_or(0.0),
                report.replicas.len() - failed,
                failed,
                prediction,
                report.tolerance,
                verdict
            )
        }
        _ => format!("{}: {}", report.config.experiment.name(), verdict),
    }
}

fn run(
    config: PathBuf,
    out: Option<PathBuf>,
    workers: Option<usize>,
    formats: Vec<Format>,
) -> slelab::Result<bool> {
    let config = ExperimentConfig::load(&config)?;
    let workers = workers
        .or(config.workers)
        .unwrap_or_else(experiment::default_workers);
    if workers == 0 {
        return Err(slelab::LabError::Config {
            field: "workers".into(),
            message: "must be at least 1".into(),
        });
    }
    let report = experiment::run_with_workers(&config, workers)?;
    for check in &report.checks {
        println!("{}", check_line(check));
    }
    println!("{}", summary(&report));
    let dir = out
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    for path in experiment::emit(&report, &formats, &dir)? {
        println!("wrote {}", path.display());
    }
    Ok(report.pass)
}

fn check_line(check: &experiment::FormulaCheck) -> String {
    let error = check
        .max_error
        .map_or_else(|| "n/a".to_string(), |e| format!("{e:.3e}"));
    let verdict = match (check.pass, check.gate) {
        (true, _) => "PASS",
        (false, true) => "FAIL",
        (false, false) => "FAIL (not gating)",
    };
    let mut line = format!("{:<30} max error {:>10}  {}", check.name, error, verdict);
    if let Some(note) = &check.note {
        line.push_str(&format!("  [{note}]"));
    }
    line
}

fn check_formulas(grid: usize) -> slelab::Result<bool> {
    if grid < 2 {
        return Err(slelab::LabError::Config {
            field: "grid".into(),
            message: "need at least 2 points".into(),
        });
    }
    let checks = formula_checks(grid, &IDENTITY_KAPPAS, 1e-10)?;
    for check in &checks {
        println!("{}", check_line(check));
    }
    Ok(checks.iter().filter(|c| c.gate).all(|c| c.pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            out,
            workers,
            format,
        } => run(config, out, workers, format),
        Command::CheckFormulas { grid } => check_formulas(grid),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
