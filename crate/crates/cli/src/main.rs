use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use loqe::file::{MeasureName, ToleranceSpec};
use loqe::run::{self, Overrides, Report, Settings, Source};
use loqe::{CliError, ScenarioFile};

#[derive(Parser)]
#[command(name = "loqe", version, about = "Loss-efficiency measures for multimode optical states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate efficiency measures of states in a scenario file.
    Efficiency {
        #[arg(long)]
        file: PathBuf,
        /// Name of a state in the file's `states` table.
        #[arg(long, requires = "measure")]
        state: Option<String>,
        #[arg(long, value_enum)]
        measure: Option<MeasureName>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Check the efficiency bound on scenarios, sweeps or a named suite.
    Verify {
        #[arg(long, conflicts_with = "suite", required_unless_present = "suite")]
        file: Option<PathBuf>,
        /// Built-in suite such as `decomposition-1000`, `theorem-200` or `catalysis-200`.
        #[arg(long)]
        suite: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Print every intermediate matrix of the decomposition for one scenario.
    Trace {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        scenario: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the file's Fock cutoff.
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    bisect_tol: Option<f64>,
    #[arg(long)]
    psd_tol: Option<f64>,
    #[arg(long)]
    recon_tol: Option<f64>,
    #[arg(long)]
    d_starts: Option<usize>,
    #[arg(long)]
    u_starts: Option<usize>,
    #[arg(long)]
    u_max_evals: Option<usize>,
    #[arg(long)]
    prob_floor: Option<f64>,
    #[arg(long)]
    outcome_floor: Option<f64>,
    #[arg(long)]
    violation_slack: Option<f64>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            cutoff: self.cutoff,
            jobs: self.jobs,
            tolerances: ToleranceSpec {
                bisect_tol: self.bisect_tol,
                psd_tol: self.psd_tol,
                recon_tol: self.recon_tol,
                d_starts: self.d_starts,
                u_starts: self.u_starts,
                u_max_evals: self.u_max_evals,
                prob_floor: self.prob_floor,
                outcome_floor: self.outcome_floor,
                violation_slack: self.violation_slack,
                catalysis_bisect_tol: None,
            },
        }
    }
}

fn load(path: &Path) -> Result<ScenarioFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ScenarioFile::parse(&text)
}

fn execute(command: &Command) -> Result<(Report, &Common), CliError> {
    Ok(match command {
        Command::Efficiency { file, state, measure, k, common } => {
            let f = load(file)?;
            let settings = Settings::new(Some(&f), &common.overrides());
            let target = match (state, measure) {
                (Some(s), Some(m)) => Some((s.as_str(), *m, *k)),
                _ => None,
            };
            (run::efficiency(&f, target, &settings)?, common)
        }
        Command::Verify { file, suite, common } => match (file, suite) {
            (Some(path), _) => {
                let f = load(path)?;
                let settings = Settings::new(Some(&f), &common.overrides());
                (run::verify(Source::File(&f), &settings)?, common)
            }
            (None, Some(name)) => {
                let settings = Settings::new(None, &common.overrides());
                (run::verify(Source::Suite(name), &settings)?, common)
            }
            (None, None) => return Err(CliError::Config("need --file or --suite".into())),
        },
        Command::Trace { file, scenario, common } => {
            let f = load(file)?;
            let settings = Settings::new(Some(&f), &common.overrides());
            (run::trace(&f, scenario, &settings)?, common)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let (mut report, common) = match execute(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("loqe: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    report.set_wall_time(start.elapsed().as_secs_f64());
    let text = match common.format {
        Format::Json => report.json(),
        Format::Csv => report.csv(),
    };
    match &common.output {
        Some(path) => {
            if let Err(source) = std::fs::write(path, &text) {
                let e = CliError::Io { path: path.display().to_string(), source };
                eprintln!("loqe: {e}");
                return ExitCode::from(e.exit_code());
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(report.exit_code())
}
