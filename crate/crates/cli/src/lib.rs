//! Command-line front end for the set-membership filtering benchmarks.

pub mod config;
pub mod output;
pub mod presets;
pub mod svg;

use std::path::PathBuf;

use thiserror::Error;

use smadp_core::experiment::{run_monte_carlo, ExperimentError, LearningCurve};

use crate::config::{ConfigError, RunConfig};
use crate::output::OutputError;
use crate::svg::SvgOptions;

pub const CURVES_FILE: &str = "curves.csv";
pub const SVG_FILE: &str = "learning_curves.svg";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Output(#[from] OutputError),
}

impl CliError {
    /// 1 for configuration problems, 2 for runtime failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Experiment(ExperimentError::Config(_)) => 1,
            _ => 2,
        }
    }
}

/// Command-line settings that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub svg: bool,
}

impl Overrides {
    pub fn apply(&self, run: &mut RunConfig) -> Result<(), ConfigError> {
        if let Some(runs) = self.runs {
            if runs == 0 {
                return Err(ConfigError::Semantic("--runs must be at least 1".into()));
            }
            run.experiment.runs = runs;
        }
        if let Some(seed) = self.seed {
            run.experiment.master_seed = seed;
        }
        if let Some(out) = &self.out {
            run.output.dir = out.clone();
        }
        if self.svg {
            run.output.svg = true;
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct RunArtifacts {
    pub curves: Vec<LearningCurve>,
    pub curves_csv: PathBuf,
    pub summary_csv: PathBuf,
    pub svg: Option<PathBuf>,
}

/// Runs the experiment and writes every requested output.
pub fn execute(run: &RunConfig) -> Result<RunArtifacts, CliError> {
    let curves = run_monte_carlo(&run.experiment)?;
    std::fs::create_dir_all(&run.output.dir).map_err(|source| OutputError::Io {
        path: run.output.dir.clone(),
        source,
    })?;
    let curves_csv = run.output.dir.join(CURVES_FILE);
    let summary_csv = output::emit_csv(&curves, &run.experiment, &curves_csv, run.output.db)?;
    let svg = if run.output.svg {
        let path = run.output.dir.join(SVG_FILE);
        let options = SvgOptions {
            title: format!("{}: MSE learning curves", run.preset),
            ..SvgOptions::default()
        };
        svg::emit_svg(&curves, &path, &options)?;
        Some(path)
    } else {
        None
    };
    Ok(RunArtifacts {
        curves,
        curves_csv,
        summary_csv,
        svg,
    })
}
