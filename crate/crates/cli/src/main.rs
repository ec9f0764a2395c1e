//! Command-line driver: validate scenario documents, run studies, sweep
//! parameters.
//!
//! Exit codes: 0 pass, 1 usage or parse error, 2 model-invalid, 3 solver
//! failure, 4 study ran but a pass criterion failed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eddylab::document::{ScenarioDocument, StudyKind};
use eddylab::report::StudyReport;
use eddylab::Error;

#[derive(Parser)]
#[command(name = "eddylab", version, about = "Transient Maxwell / eddy-current limit laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a scenario document and print DOF counts and the
    /// well-posedness constant.
    Check {
        /// Scenario document (JSON)
        file: PathBuf,
    },
    /// Run one named study and write report.json plus CSV tables.
    Run {
        /// Scenario document (JSON)
        file: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run the document's study once per value of a swept axis.
    Sweep {
        /// Scenario document (JSON)
        file: PathBuf,
        /// Axis to sweep: rho, tau or grid
        #[arg(long)]
        axis: String,
        /// Comma-separated values for the axis
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunOpts {
    /// Study to run: structure, bound, causality, identity, rate, smoothed
    #[arg(long)]
    study: String,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Override the document's RNG seed
    #[arg(long)]
    seed: Option<u64>,
}

const EXIT_PASS: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_MODEL_INVALID: u8 = 2;
const EXIT_SOLVER_FAILURE: u8 = 3;
const EXIT_CRITERIA_FAILED: u8 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check { file } => cmd_check(&file),
        Command::Run { file, opts } => cmd_run(&file, &opts),
        Command::Sweep {
            file,
            axis,
            values,
            out,
        } => cmd_sweep(&file, &axis, &values, &out),
    };
    ExitCode::from(code)
}

fn load_document(path: &Path) -> Result<ScenarioDocument, u8> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(EXIT_USAGE);
        }
    };
    match serde_json::from_str::<ScenarioDocument>(&text) {
        Ok(doc) => Ok(doc),
        Err(e) => {
            eprintln!(
                "error: {} is not a valid scenario document (line {}, column {}): {e}",
                path.display(),
                e.line(),
                e.column()
            );
            Err(EXIT_USAGE)
        }
    }
}

fn classify(err: &Error) -> u8 {
    match err {
        Error::ModelInvalid { .. } => EXIT_MODEL_INVALID,
        Error::SolverFailure { .. } => EXIT_SOLVER_FAILURE,
        _ => EXIT_USAGE,
    }
}

fn cmd_check(file: &Path) -> u8 {
    let doc = match load_document(file) {
        Ok(d) => d,
        Err(code) => return code,
    };
    match doc.check() {
        Ok(summary) => {
            println!(
                "scenario ok: {}x{}x{} cells (h = {}), {} E DOFs, {} H DOFs, {} steps",
                summary.cells[0],
                summary.cells[1],
                summary.cells[2],
                summary.spacing,
                summary.e_dofs,
                summary.h_dofs,
                summary.steps
            );
            println!("wellposedness constant c = {}", summary.wellposedness_constant);
            println!("digest = {}", summary.digest);
            EXIT_PASS
        }
        Err(e) => {
            eprintln!("error: {e}");
            classify(&e)
        }
    }
}

fn cmd_run(file: &Path, opts: &RunOpts) -> u8 {
    let mut doc = match load_document(file) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let Some(kind) = StudyKind::parse(&opts.study) else {
        eprintln!(
            "error: unknown study '{}'; expected one of structure, bound, causality, identity, rate, smoothed",
            opts.study
        );
        return EXIT_USAGE;
    };
    doc.study.kind = kind;
    if let Some(seed) = opts.seed {
        doc.study.seed = seed;
    }
    match doc.run_study() {
        Ok(report) => {
            if let Err(e) = write_report(&report, &opts.out) {
                eprintln!("error: cannot write report: {e}");
                return EXIT_USAGE;
            }
            print_report_summary(&report);
            if report.passed {
                EXIT_PASS
            } else {
                EXIT_CRITERIA_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            classify(&e)
        }
    }
}

fn write_report(report: &StudyReport, out: &Path) -> eddylab::Result<()> {
    report.write_files(out)?;
    Ok(())
}

fn print_report_summary(report: &StudyReport) {
    println!(
        "study {}: {}",
        report.study_kind,
        if report.passed { "pass" } else { "FAIL" }
    );
    for check in &report.checks {
        if check.op == "recorded" {
            println!("  {} = {} (recorded)", check.name, check.value);
        } else {
            println!(
                "  {} {} {} {}: {}",
                check.name,
                check.value,
                check.op,
                check.threshold,
                if check.passed { "pass" } else { "FAIL" }
            );
        }
    }
    if let Some(rate) = &report.fitted_rate {
        println!(
            "  fitted slope = {} (95% CI [{}, {}])",
            rate.slope, rate.ci_low, rate.ci_high
        );
    }
}

fn cmd_sweep(file: &Path, axis: &str, values: &[String], out: &Path) -> u8 {
    let doc = match load_document(file) {
        Ok(d) => d,
        Err(code) => return code,
    };
    if values.is_empty() {
        eprintln!("error: sweep needs at least one value");
        return EXIT_USAGE;
    }
    if !matches!(axis, "rho" | "tau" | "grid") {
        eprintln!("error: unknown sweep axis '{axis}'; expected rho, tau or grid");
        return EXIT_USAGE;
    }

    let mut aggregate = String::from("axis,value,study,passed,metric,metric_name\n");
    let mut worst = EXIT_PASS;
    for value in values {
        let derived = match derive_document(&doc, axis, value) {
            Ok(d) => d,
            Err(msg) => {
                eprintln!("error: {msg}");
                return EXIT_USAGE;
            }
        };
        let label = format!("{axis}_{value}");
        match derived.run_study() {
            Ok(report) => {
                let dir = out.join(&label);
                if let Err(e) = write_report(&report, &dir) {
                    eprintln!("error: cannot write report: {e}");
                    return EXIT_USAGE;
                }
                let (metric, metric_name) = headline_metric(&report);
                aggregate.push_str(&format!(
                    "{axis},{value},{},{},{},{}\n",
                    report.study_kind, report.passed, metric, metric_name
                ));
                println!("{label}: {}", if report.passed { "pass" } else { "FAIL" });
                if !report.passed {
                    worst = worst.max(EXIT_CRITERIA_FAILED);
                }
            }
            Err(e) => {
                eprintln!("error at {label}: {e}");
                return classify(&e);
            }
        }
    }
    if let Err(e) = std::fs::create_dir_all(out)
        .and_then(|_| std::fs::write(out.join("sweep.csv"), aggregate))
    {
        eprintln!("error: cannot write sweep aggregate: {e}");
        return EXIT_USAGE;
    }
    worst
}

fn derive_document(
    doc: &ScenarioDocument,
    axis: &str,
    value: &str,
) -> Result<ScenarioDocument, String> {
    match axis {
        "rho" => {
            let rho: f64 = value
                .parse()
                .map_err(|_| format!("cannot parse rho value '{value}'"))?;
            let mut d = doc.clone();
            d.weight.rho = rho;
            Ok(d)
        }
        "tau" => {
            let tau: f64 = value
                .parse()
                .map_err(|_| format!("cannot parse tau value '{value}'"))?;
            let mut d = doc.clone();
            d.discretization.tau = tau;
            Ok(d)
        }
        "grid" => {
            let n: usize = value
                .parse()
                .map_err(|_| format!("cannot parse grid resolution '{value}'"))?;
            doc.with_grid_resolution(n).map_err(|e| e.to_string())
        }
        _ => unreachable!("axis validated by caller"),
    }
}

/// One number summarizing a report for the sweep aggregate.
fn headline_metric(report: &StudyReport) -> (f64, &'static str) {
    if let Some(rate) = &report.fitted_rate {
        return (rate.slope, "fitted_slope");
    }
    let max_ratio = report
        .rows
        .iter()
        .map(|r| r.ratio)
        .fold(f64::NAN, f64::max);
    if max_ratio.is_finite() {
        (max_ratio, "max_ratio")
    } else if let Some(check) = report.checks.first() {
        (check.value, "first_check_value")
    } else {
        (f64::NAN, "none")
    }
}
