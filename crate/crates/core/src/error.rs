use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch in {what}: expected {expected}, found {found}")]
    Size {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("expected a field in the {expected:?} frame, got {found:?}")]
    Frame {
        expected: crate::Frame,
        found: crate::Frame,
    },

    #[error(
        "displacement cap violated at interface {interface}: |dx| = {displacement:e} is not below min(h_left, h_right) = {limit:e}"
    )]
    CapViolated {
        interface: usize,
        displacement: f64,
        limit: f64,
    },

    #[error("time step {dt:e} exceeds the {bound} bound {limit:e}")]
    Cfl {
        dt: f64,
        limit: f64,
        bound: &'static str,
    },

    #[error("mesh-motion entropy condition cannot be met even without mesh motion; violating cells: {cells:?}")]
    Infeasible { cells: Vec<usize> },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("configuration error{}: {msg}", fmt_location(.line, .key))]
    Config {
        line: Option<usize>,
        key: Option<String>,
        msg: String,
    },

    #[error("step {step} (t = {t}): {source}")]
    AtStep {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn fmt_location(line: &Option<usize>, key: &Option<String>) -> String {
    match (line, key) {
        (Some(l), Some(k)) => format!(" at line {l} (key `{k}`)"),
        (Some(l), None) => format!(" at line {l}"),
        (None, Some(k)) => format!(" (key `{k}`)"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn config(line: Option<usize>, key: Option<&str>, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            key: key.map(str::to_string),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Size {
            what,
            expected,
            found,
        });
    }
    Ok(())
}

pub(crate) fn check_finite(what: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { what, index }),
        None => Ok(()),
    }
}
