use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cellwear_cli::fit::{cmd_fit, FitArgs};
use cellwear_cli::simulate::{cmd_simulate, SimulateArgs};
use cellwear_cli::tvd::cmd_tvd;
use cellwear_cli::validate::cmd_validate;
use cellwear_cli::CliError;

#[derive(Parser)]
#[command(
    name = "cellwear",
    version,
    about = "Lithium-ion degradation twin for V2G duty cycles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Subcommand)]
enum Command {
    /// Run lifetimes for every cell, scenario and drive combination.
    Simulate {
        /// Bundled cell names or paths to cell TOML files, comma separated.
        #[arg(long, num_args = 1.., default_value = "nmc111,nmc622_25c,nmc622_45c")]
        cells: Vec<String>,
        /// no_v2g, v2g_moderate, v2g_early, v2g_late; comma separated.
        #[arg(long, num_args = 1.., default_value = "no_v2g,v2g_moderate,v2g_early,v2g_late")]
        scenarios: Vec<String>,
        /// long, short; comma separated.
        #[arg(long, num_args = 1.., default_value = "long")]
        drive: Vec<String>,
        #[arg(long, default_value = "accelerated")]
        mode: String,
        /// Capacity change allowed per extrapolated jump, as a fraction of nominal capacity.
        #[arg(long, default_value_t = 0.02)]
        tol_jump: f64,
        /// Stop runs that have not reached end of life after this many days.
        #[arg(long)]
        max_days: Option<u32>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
    },
    /// Fit the degradation parameters of a cell to aging datasets.
    Fit {
        /// Directory of dataset CSV files.
        datasets: PathBuf,
        /// Bundled cell name or cell TOML path supplying fixed parameters and starting values.
        #[arg(long)]
        cells: String,
        #[arg(long, default_value = "fit")]
        out: PathBuf,
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
    },
    /// Compare V2G runs with their baselines and write the TvD report and trend table.
    Tvd {
        /// Directory searched recursively for run summaries.
        results: PathBuf,
        /// Where to write the report; defaults to the results directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run self-checks on the bundled cells and fixtures.
    Validate,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            cells,
            scenarios,
            drive,
            mode,
            tol_jump,
            max_days,
            out,
            jobs,
        } => cmd_simulate(&SimulateArgs {
            cells,
            scenarios,
            drives: drive,
            mode,
            tol_jump,
            out,
            jobs,
            max_days,
        }),
        Command::Fit {
            datasets,
            cells,
            out,
            jobs,
        } => cmd_fit(&FitArgs {
            datasets,
            cell: cells,
            out,
            jobs,
        }),
        Command::Tvd { results, out } => cmd_tvd(&results, out.as_deref()),
        Command::Validate => cmd_validate(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CELLWEAR_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
