//! CSV learning curves and the per-phase summary table.
//!
//! `curves.csv` is long format, linear units:
//!
//! ```text
//! algorithm,iteration,mse,msd,updated_frac
//! SM-NLMS,0,1.0312457834539813e0,9.8476211900213452e-1,1.0000000000000000e0
//! ```
//!
//! Iterations are 0-based. Floats carry 17 significant digits and round-trip
//! exactly. The sibling `<stem>_summary.csv` has one row per
//! (algorithm, phase) with steady-state MSE/MSD and update rates.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use smadp_core::experiment::{to_db, ExperimentConfig, LearningCurve};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("nothing to write: curve list is empty")]
    NoCurves,
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot read curves from {path}: {message}")]
    Read { path: PathBuf, message: String },
}

pub const CURVES_HEADER: &str = "algorithm,iteration,mse,msd,updated_frac";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Path of the summary written next to `curves_path`.
pub fn summary_path(curves_path: &Path) -> PathBuf {
    let stem = curves_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "curves".into());
    curves_path.with_file_name(format!("{stem}_summary.csv"))
}

/// Writes the long-format curves to `path` and the summary next to it.
pub fn emit_csv(
    curves: &[LearningCurve],
    config: &ExperimentConfig,
    path: &Path,
    db: bool,
) -> Result<PathBuf, OutputError> {
    if curves.is_empty() {
        return Err(OutputError::NoCurves);
    }
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    write_curves(&mut w, curves).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))?;

    let spath = summary_path(path);
    let file = File::create(&spath).map_err(io_err(&spath))?;
    let mut w = BufWriter::new(file);
    write_summary(&mut w, curves, config, db).map_err(io_err(&spath))?;
    w.flush().map_err(io_err(&spath))?;
    Ok(spath)
}

pub fn write_curves(w: &mut impl Write, curves: &[LearningCurve]) -> std::io::Result<()> {
    writeln!(w, "{CURVES_HEADER}")?;
    for c in curves {
        for i in 0..c.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                c.label,
                i,
                fmt_f64(c.mse[i]),
                fmt_f64(c.msd[i]),
                fmt_f64(c.updated_frac[i])
            )?;
        }
    }
    Ok(())
}

pub fn write_summary(
    w: &mut impl Write,
    curves: &[LearningCurve],
    config: &ExperimentConfig,
    db: bool,
) -> std::io::Result<()> {
    let (mse_col, msd_col) = if db {
        ("steady_mse_db", "steady_msd_db")
    } else {
        ("steady_mse", "steady_msd")
    };
    writeln!(
        w,
        "algorithm,phase,system,iterations,{mse_col},{msd_col},update_rate,steady_update_rate,successful_runs,failed_runs"
    )?;
    let fraction = config.steady_state_fraction;
    for c in curves {
        for (p, phase) in config.schedule.phases().iter().enumerate() {
            let (mse, msd) = (
                c.steady_state_mse(p, fraction),
                c.steady_state_msd(p, fraction),
            );
            let (mse, msd) = if db {
                (to_db(mse), to_db(msd))
            } else {
                (mse, msd)
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                c.label,
                p,
                phase.system.name(),
                phase.iterations,
                fmt_f64(mse),
                fmt_f64(msd),
                fmt_f64(c.phase_update_rate(p)),
                fmt_f64(c.steady_state_update_rate(p, fraction)),
                c.successful_runs,
                c.failed_runs
            )?;
        }
    }
    Ok(())
}

/// One parsed row of `curves.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub algorithm: String,
    pub iteration: usize,
    pub mse: f64,
    pub msd: f64,
    pub updated_frac: f64,
}

pub fn read_curves_csv(path: &Path) -> Result<Vec<CurveRow>, OutputError> {
    let read_err = |message: String| OutputError::Read {
        path: path.to_path_buf(),
        message,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| read_err(e.to_string()))?;
    let headers = rdr.headers().map_err(|e| read_err(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>().join(",") != CURVES_HEADER {
        return Err(read_err(format!("unexpected header {headers:?}")));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| read_err(e.to_string()))?;
        let num = |i: usize| -> Result<f64, OutputError> {
            rec[i]
                .parse()
                .map_err(|e| read_err(format!("line {:?}: {e}", rec.position())))
        };
        rows.push(CurveRow {
            algorithm: rec[0].to_string(),
            iteration: rec[1]
                .parse()
                .map_err(|e| read_err(format!("line {:?}: {e}", rec.position())))?,
            mse: num(2)?,
            msd: num(3)?,
            updated_frac: num(4)?,
        });
    }
    Ok(rows)
}

/// Plain-text report printed after a run.
pub fn report(curves: &[LearningCurve], config: &ExperimentConfig) -> String {
    let mut s = format!(
        "runs: {} | gamma: {:.6} | sigma_n: {} | input: {} | achieved SNR: {:.2} dB | noise floor: {:.2} dB\n",
        config.runs,
        config.gamma,
        config.noise.sigma_n,
        config.input.kind.name(),
        config.snr_db(),
        to_db(config.noise.sigma_n * config.noise.sigma_n),
    );
    for c in curves {
        s.push_str(&format!(
            "{} ({} ok, {} failed)\n",
            c.label, c.successful_runs, c.failed_runs
        ));
        for (summary, phase) in c
            .phase_summary(config.steady_state_fraction)
            .iter()
            .zip(config.schedule.phases())
        {
            s.push_str(&format!("  [{}] {summary}\n", phase.system.name()));
        }
    }
    s
}
