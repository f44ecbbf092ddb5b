//! `run` and `analyze`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::{parse_config, RunConfig};
use super::io::{self, META_FILE, SNAPSHOT_FILE, TIMESERIES_FILE};
use crate::analysis::{self, VerificationReport};
use crate::error::{Error, Result};
use crate::model::Mode;
use crate::solver::{self, SolverStats, Trajectory};

pub const REPORT_FILE: &str = "report.txt";
pub const SUMMARY_FILE: &str = "summary.txt";

/// What a finished `run` produced.
#[derive(Debug)]
pub enum RunStatus {
    Completed { out_dir: PathBuf, trajectory: Trajectory },
    /// The integration stopped early; the reason is in the run metadata.
    BlewUp { out_dir: PathBuf, error: Error },
}

impl RunStatus {
    pub fn success(&self) -> bool {
        matches!(self, RunStatus::Completed { .. })
    }
}

fn meta_text(config: &RunConfig, status: &str, stats: Option<&SolverStats>, samples: usize) -> String {
    let mut s = String::from("[config]\n");
    s.push_str(&config.to_text());
    s.push_str("[stats]\n");
    let _ = writeln!(s, "status={status}");
    let _ = writeln!(s, "samples={samples}");
    if let Some(st) = stats {
        let _ = writeln!(s, "steps={}", st.steps);
        let _ = writeln!(s, "linear_solves={}", st.linear_solves);
        let _ = writeln!(s, "cg_iterations={}", st.cg_iterations);
        let _ = writeln!(s, "max_cg_residual={:e}", st.max_cg_residual);
    }
    s
}

/// Extracts the `[config]` section of a run metadata file.
pub fn parse_meta_config(text: &str) -> Result<RunConfig> {
    let mut body = String::new();
    let mut inside = false;
    for line in text.lines() {
        match line.trim() {
            "[config]" => inside = true,
            l if l.starts_with('[') => inside = false,
            _ if inside => {
                body.push_str(line);
                body.push('\n');
            }
            _ => {}
        }
    }
    parse_config(&body)
}

/// Integrates the configured problem and writes the time series, the
/// final snapshot and the run metadata into `config.out_dir`.
pub fn cmd_run(config: &RunConfig) -> Result<RunStatus> {
    let out_dir = config.out_dir.clone();
    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let (domain, grid) = config.grid()?;
    let params = config.params()?;
    let solver_cfg = config.solver_config()?;
    let initial = config.initial_fields(&grid)?;
    let meta_path = out_dir.join(META_FILE);
    let write = |path: &Path, text: String| fs::write(path, text).map_err(|e| Error::io(path, e));

    match solver::run(&initial, &params, &grid, &domain, &solver_cfg) {
        Ok(trajectory) => {
            io::write_timeseries(&out_dir.join(TIMESERIES_FILE), &trajectory.samples)?;
            io::write_snapshot(&out_dir.join(SNAPSHOT_FILE), &grid, &trajectory.final_fields)?;
            write(
                &meta_path,
                meta_text(config, "ok", Some(&trajectory.stats), trajectory.samples.len()),
            )?;
            Ok(RunStatus::Completed { out_dir, trajectory })
        }
        Err(error @ (Error::NumericalBlowup { .. } | Error::LinSolveFailure { .. } | Error::NotPositive { .. })) => {
            write(&meta_path, meta_text(config, &format!("failed: {error}"), None, 0))?;
            Ok(RunStatus::BlewUp { out_dir, error })
        }
        Err(e) => Err(e),
    }
}

/// Run configuration from a metadata file next to the time series.
fn sibling_config(timeseries: &Path) -> Option<RunConfig> {
    let meta = timeseries.parent()?.join(META_FILE);
    let text = fs::read_to_string(meta).ok()?;
    parse_meta_config(&text).ok()
}

/// Analyzes a recorded time series and writes `report.txt` and
/// `summary.txt` beside it.
pub fn cmd_analyze(timeseries: &Path, mode: Mode, dimension: usize) -> Result<VerificationReport> {
    let samples = io::read_timeseries(timeseries)?;
    let sibling = sibling_config(timeseries).and_then(|cfg| {
        let (domain, grid) = cfg.grid().ok()?;
        Some((cfg.params().ok()?, domain.poincare_constant(), 1.0 / grid.spectral_gap()))
    });
    let mut report = analysis::analyze(&samples, mode, dimension, sibling.as_ref().map(|(p, c, _)| (p, *c)))?;
    if let Some((params, _, discrete)) = &sibling {
        report.discrete_bound_violations = Some(analysis::bound_violations(&samples, Some((params, *discrete))));
    }
    let dir = timeseries.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let rp = dir.join(REPORT_FILE);
    fs::write(&rp, report.to_text()).map_err(|e| Error::io(&rp, e))?;
    let sp = dir.join(SUMMARY_FILE);
    fs::write(&sp, report.to_summary()).map_err(|e| Error::io(&sp, e))?;
    Ok(report)
}
