//! Calibrate a cell file against a directory of aging datasets.

use std::path::{Path, PathBuf};

use cellwear_core::params::CellParameters;
use cellwear_fit::dataset::{load_dir, AgingDataset};
use cellwear_fit::parameter::{patch_cell_file, FitParameter};
use cellwear_fit::pipeline::{fit_pipeline, FitOptions, FitReport};

use crate::{thread_pool, CliError};

pub const REPORT_FILE: &str = "fit_report.json";

#[derive(Debug, Clone)]
pub struct FitArgs {
    pub datasets: PathBuf,
    pub cell: String,
    pub out: PathBuf,
    pub jobs: usize,
}

/// TOML text of the cell, from the bundle or from disk.
fn cell_source(spec: &str) -> Result<String, CliError> {
    if let Ok(text) = CellParameters::bundled_source(spec) {
        return Ok(text.to_string());
    }
    std::fs::read_to_string(spec).map_err(|e| CliError::Config(format!("cell `{spec}`: {e}")))
}

/// Start each free parameter from the cell file's value when it lies inside the bounds.
pub fn starting_point(cell: &CellParameters) -> FitOptions {
    let mut opts = FitOptions::default();
    for p in FitParameter::ALL {
        let v = p.get(cell);
        let (lo, hi) = p.default_bounds();
        if v >= lo && v <= hi {
            opts.start.insert(p, v);
        }
    }
    opts
}

pub fn run_fit(
    cell: &CellParameters,
    datasets: &[AgingDataset],
    opts: &FitOptions,
) -> Result<(CellParameters, FitReport), CliError> {
    fit_pipeline(cell, datasets, opts).map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn fitted_cell_path(out: &Path, cell: &str) -> PathBuf {
    out.join(format!("{cell}_fitted.toml"))
}

pub fn cmd_fit(args: &FitArgs) -> Result<(), CliError> {
    let text = cell_source(&args.cell)?;
    let cell = crate::load_cell(&args.cell)?;
    if args.jobs == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    let datasets: Vec<AgingDataset> = load_dir(&args.datasets)
        .map_err(|e| CliError::Config(e.to_string()))?
        .into_iter()
        .map(|(_, d)| d)
        .collect();
    for d in datasets.iter().filter(|d| d.cell != cell.name) {
        log::warn!("dataset for `{}` fitted to cell `{}`", d.cell, cell.name);
    }
    let opts = starting_point(&cell);
    let (_, report) = thread_pool(args.jobs)?.install(|| run_fit(&cell, &datasets, &opts))?;

    let fitted: Vec<(FitParameter, f64)> = report.fitted().into_iter().collect();
    let patched = patch_cell_file(&text, &fitted).map_err(|e| CliError::Runtime(format!("patching cell file: {e}")))?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", args.out.display())))?;
    let write = |path: PathBuf, body: String| {
        std::fs::write(&path, body).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
    };
    write(fitted_cell_path(&args.out, &cell.name), patched)?;
    let mut json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    json.push('\n');
    write(args.out.join(REPORT_FILE), json)?;
    for s in &report.stages {
        println!(
            "{}: {} datasets, {} evaluations, residual {:.3e} -> {:.3e} (exhaustive {:.3e})",
            s.stage, s.datasets, s.evaluations, s.initial_norm, s.final_norm, s.verification.exhaustive_norm
        );
    }
    for (p, v) in &fitted {
        println!("{p:<18} {v:.4e}");
    }
    Ok(())
}
