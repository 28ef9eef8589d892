//! The run loop and its output files.
//!
//! A run directory contains:
//!
//! * `summary.csv`: `step,t,dt,theta,total_mass,total_entropy,maincond_violations,worst_margin`,
//!   one row per step. Row 0 is the initial state; its `dt`, `theta` and
//!   `worst_margin` are `NaN`.
//! * `snapshots/step_<n>.csv`: `i,x_left,x_right,h,u,v,M_i,maincond_rhs,entropy_residual`,
//!   one row per cell, written for step 0, every `snapshot_every` steps and the
//!   final step. The three diagnostic columns describe the step that produced
//!   the snapshot and are `NaN` at step 0.
//! * `run_meta.txt`: the resolved configuration, in the input format.
//!
//! Reals are written with 17 significant digits (`{:.16e}`), which round-trips.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::{load_config, RunConfig};
use crate::diagnostics::StepReport;
use crate::error::{Error, Result};
use crate::evolve::{mas_step, MasState};
use crate::exec::ExecMode;

/// Environment variable holding the default output root.
pub const OUTPUT_ROOT_ENV: &str = "ADAPTIVE_FV_OUTPUT_ROOT";
pub const DEFAULT_OUTPUT_ROOT: &str = "runs";

pub const SUMMARY_HEADER: &str =
    "step,t,dt,theta,total_mass,total_entropy,maincond_violations,worst_margin";
pub const SNAPSHOT_HEADER: &str = "i,x_left,x_right,h,u,v,M_i,maincond_rhs,entropy_residual";

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub steps: usize,
    pub t_final: f64,
    /// True when the run stopped at `max_steps` before reaching `t_end`.
    pub truncated: bool,
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Runs `config` from its initial state, calling `observe` with the initial
/// state (no report) and after every step.
pub fn simulate<F>(config: &RunConfig, mut observe: F) -> Result<(MasState, bool)>
where
    F: FnMut(&MasState, Option<&StepReport>) -> Result<()>,
{
    let mesh = config.mesh()?;
    let u = config.initial.cell_averages(&mesh)?;
    let mut state = MasState::new(mesh, u)?;
    let cfg = config.mas_config();
    observe(&state, None)?;
    while state.t < config.t_end {
        if state.step >= config.max_steps {
            return Ok((state, true));
        }
        let remaining = config.t_end - state.t;
        let at = |e: Error, s: &MasState| Error::AtStep {
            step: s.step + 1,
            t: s.t,
            source: Box::new(e),
        };
        let (mut next, mut report) =
            mas_step(&state, &cfg, remaining).map_err(|e| at(e, &state))?;
        if report.dt <= 0.0 {
            let e = Error::Internal(format!("time step collapsed to {:e}", report.dt));
            return Err(at(e, &state));
        }
        if report.dt >= remaining {
            next.t = config.t_end;
            report.t = config.t_end;
        }
        observe(&next, Some(&report))?;
        state = next;
    }
    Ok((state, false))
}

/// Output directory for `config`: its `output_dir`, else
/// `$ADAPTIVE_FV_OUTPUT_ROOT/<name>` (root defaults to `runs`).
pub fn resolve_output_dir(config: &RunConfig, name: &str) -> PathBuf {
    match &config.output_dir {
        Some(dir) => PathBuf::from(dir),
        None => {
            let root = std::env::var_os(OUTPUT_ROOT_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT));
            root.join(name)
        }
    }
}

fn snapshot_text(state: &MasState, report: Option<&StepReport>) -> String {
    let mut s = String::with_capacity(160 * (state.mesh.n_cells() + 1));
    s.push_str(SNAPSHOT_HEADER);
    s.push('\n');
    let x = state.mesh.interfaces();
    let nan = f64::NAN;
    for i in 0..state.mesh.n_cells() {
        let (m, rhs, res) = match report {
            Some(r) => (r.m[i], r.maincond_rhs[i], r.entropy_residual[i]),
            None => (nan, nan, nan),
        };
        let _ = writeln!(
            s,
            "{i},{},{},{},{},{},{},{},{}",
            real(x[i]),
            real(x[i + 1]),
            real(state.mesh.width(i)),
            real(state.u[i]),
            real(state.reference.v[i]),
            real(m),
            real(rhs),
            real(res)
        );
    }
    s
}

fn summary_row(state: &MasState, entropy: f64, report: Option<&StepReport>) -> String {
    let (dt, theta, violations, worst) = match report {
        Some(r) => (r.dt, r.theta, r.violations, r.worst_margin),
        None => (f64::NAN, f64::NAN, 0, f64::NAN),
    };
    format!(
        "{},{},{},{},{},{},{},{}\n",
        state.step,
        real(state.t),
        real(dt),
        real(theta),
        real(state.mass()),
        real(entropy),
        violations,
        real(worst)
    )
}

/// Runs `config` and writes its output files into `output_dir`.
pub fn run(config: &RunConfig, output_dir: &Path) -> Result<RunSummary> {
    let snap_dir = output_dir.join("snapshots");
    fs::create_dir_all(&snap_dir).map_err(|e| Error::io(&snap_dir, e))?;
    let meta = output_dir.join("run_meta.txt");
    fs::write(&meta, config.to_text()).map_err(|e| Error::io(&meta, e))?;

    let summary_path = output_dir.join("summary.csv");
    let file = fs::File::create(&summary_path).map_err(|e| Error::io(&summary_path, e))?;
    let mut summary = BufWriter::new(file);
    let io = |e| Error::io(&summary_path, e);
    writeln!(summary, "{SUMMARY_HEADER}").map_err(io)?;

    let problem = config.problem();
    let every = config.snapshot_every;
    let mut last_written = None;
    let write_snapshot = |state: &MasState, report: Option<&StepReport>| -> Result<()> {
        let path = snap_dir.join(format!("step_{}.csv", state.step));
        fs::write(&path, snapshot_text(state, report)).map_err(|e| Error::io(&path, e))
    };
    let mut last: Option<(MasState, Option<StepReport>)> = None;
    let (final_state, truncated) = simulate(config, |state, report| {
        summary
            .write_all(summary_row(state, state.entropy(&problem), report).as_bytes())
            .map_err(io)?;
        if state.step == 0 || (every > 0 && state.step % every == 0) {
            write_snapshot(state, report)?;
            last_written = Some(state.step);
        }
        last = Some((state.clone(), report.cloned()));
        Ok(())
    })?;
    if last_written != Some(final_state.step) {
        if let Some((state, report)) = &last {
            write_snapshot(state, report.as_ref())?;
        }
    }
    summary.flush().map_err(io)?;
    Ok(RunSummary {
        output_dir: output_dir.to_path_buf(),
        steps: final_state.step,
        t_final: final_state.t,
        truncated,
    })
}

/// Reads a sweep file: one configuration path per line (relative paths are
/// taken relative to the sweep file), `#` comments and blank lines ignored.
pub fn read_sweep(path: &Path) -> Result<Vec<PathBuf>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| base.join(l))
        .collect())
}

/// One job of a batch: a configuration and where its outputs go.
#[derive(Clone, Debug)]
pub struct Job {
    pub config: RunConfig,
    pub output_dir: PathBuf,
}

impl Job {
    /// Loads `path` with `overrides`; the output directory defaults to the
    /// file stem under the output root.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let config = load_config(path, overrides)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into());
        let output_dir = resolve_output_dir(&config, &name);
        Ok(Self { config, output_dir })
    }
}

/// Runs independent jobs, concurrently in [`ExecMode::Parallel`].
pub fn run_batch(jobs: &[Job], mode: ExecMode) -> Vec<Result<RunSummary>> {
    mode.map_jobs(jobs, |job| run(&job.config, &job.output_dir))
}

/// Final states of independent runs, without writing any files.
pub fn simulate_batch(configs: &[RunConfig], mode: ExecMode) -> Vec<Result<MasState>> {
    mode.map_jobs(configs, |c| simulate(c, |_, _| Ok(())).map(|(s, _)| s))
}
