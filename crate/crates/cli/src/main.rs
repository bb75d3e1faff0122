use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mdirand::solver::SolverOptions;
use mdirand_cli::{cmd_rate, cmd_sweep, cmd_validate, CliError, SweepParam, SweepSpec};

/// Certified randomness rates for measurement-device-independent setups.
#[derive(Parser)]
#[command(name = "mdirand", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certified rate of a scenario file, at each of its noise values.
    Rate {
        scenario: PathBuf,
        /// Overrides the file's noise_eta.
        #[arg(long)]
        eta: Option<f64>,
        #[command(flatten)]
        solver: SolverFlags,
        /// Also write the results as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rate along a parameter grid, as CSV.
    Sweep {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        param: Param,
        #[arg(long, requires_all = ["to", "steps"])]
        from: Option<f64>,
        #[arg(long, requires_all = ["from", "steps"])]
        to: Option<f64>,
        #[arg(long, requires_all = ["from", "to"])]
        steps: Option<usize>,
        #[command(flatten)]
        solver: SolverFlags,
        /// Worker threads; defaults to the number of processors.
        #[arg(long)]
        jobs: Option<usize>,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks states, POVM, unbiasedness, extremality and statistics.
    Validate { scenario: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Param {
    Eta,
    Alpha,
    Q,
}

/// Solver settings; each can also come from the environment.
#[derive(Args)]
struct SolverFlags {
    #[arg(long, env = "MDIRAND_GAP_TOL", default_value_t = SolverOptions::DEFAULT.gap_tol)]
    gap_tol: f64,
    #[arg(long, env = "MDIRAND_FEAS_TOL", default_value_t = SolverOptions::DEFAULT.feas_tol)]
    feas_tol: f64,
    #[arg(long, env = "MDIRAND_MAX_ITER", default_value_t = SolverOptions::DEFAULT.max_iter)]
    max_iter: usize,
    /// Relaxation of the statistics constraints; 0 solves them exactly.
    #[arg(long, env = "MDIRAND_RELAX", default_value_t = SolverOptions::DEFAULT.relax)]
    relax: f64,
}

impl From<&SolverFlags> for SolverOptions {
    fn from(f: &SolverFlags) -> Self {
        SolverOptions {
            gap_tol: f.gap_tol,
            feas_tol: f.feas_tol,
            max_iter: f.max_iter,
            relax: f.relax,
        }
    }
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Rate {
            scenario,
            eta,
            solver,
            out,
        } => {
            let records = cmd_rate(&scenario, eta, &SolverOptions::from(&solver))?;
            let text: Vec<String> = records.iter().map(|r| r.render()).collect();
            print!("{}", text.join("\n"));
            if let Some(path) = out {
                write_file(&path, &(serde_json::to_string_pretty(&records).expect("records serialize") + "\n"))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            scenario,
            param,
            from,
            to,
            steps,
            solver,
            jobs,
            out,
        } => {
            let spec = SweepSpec {
                param: match param {
                    Param::Eta => SweepParam::Eta,
                    Param::Alpha => SweepParam::Alpha,
                    Param::Q => SweepParam::Q,
                },
                grid: from.zip(to).zip(steps).map(|((a, b), n)| (a, b, n)),
            };
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(j) = jobs {
                pool = pool.num_threads(j.max(1));
            }
            let pool = pool.build().map_err(|e| CliError::Sweep(e.to_string()))?;
            let opts = SolverOptions::from(&solver);
            let output = pool.install(|| cmd_sweep(&scenario, &spec, &opts))?;
            match out {
                Some(path) => write_file(&path, &output.csv)?,
                None => print!("{}", output.csv),
            }
            if output.failures > 0 {
                eprintln!("{} grid point(s) failed; see the status column", output.failures);
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { scenario } => {
            for check in cmd_validate(&scenario)? {
                println!("{}", check.render());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
