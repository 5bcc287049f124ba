use std::io;
use std::path::PathBuf;

use relaysim_core::planner::PlanError;
use relaysim_core::pow::PowError;
use relaysim_core::relkin::RelError;
use relaysim_core::{SimError, TopoError};
use thiserror::Error;

/// Process exit statuses.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const IO: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const GRAPH: i32 = 3;
    pub const NUMERIC: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    /// Well-formed input that names things inconsistently.
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    /// A value outside its numeric domain.
    #[error("{field}: {message}")]
    Domain { field: String, message: String },
    #[error(transparent)]
    Topology(#[from] TopoError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Relativity(#[from] RelError),
    #[error(transparent)]
    Pow(#[from] PowError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn invalid(field: impl Into<String>, message: impl ToString) -> Self {
        CliError::Invalid { field: field.into(), message: message.to_string() }
    }

    pub fn domain(field: impl Into<String>, message: impl ToString) -> Self {
        CliError::Domain { field: field.into(), message: message.to_string() }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Invalid { .. } => exit::PARSE,
            CliError::Domain { .. } | CliError::Relativity(_) | CliError::Pow(_) => exit::NUMERIC,
            CliError::Topology(e) => topo_code(e),
            CliError::Simulation(e) => match e {
                SimError::Graph(g) => topo_code(g),
                SimError::LengthMismatch(..) | SimError::InvalidTransaction(_) | SimError::UnknownNode(_) => {
                    exit::PARSE
                }
                SimError::Workers(_) => exit::IO,
                _ => exit::NUMERIC,
            },
            CliError::Plan(e) => match e {
                PlanError::Graph(g) => topo_code(g),
                PlanError::TooFewRadii(_) => exit::PARSE,
                _ => exit::NUMERIC,
            },
            CliError::Io { .. } => exit::IO,
        }
    }
}

fn topo_code(e: &TopoError) -> i32 {
    match e {
        TopoError::InvalidDelay(..)
        | TopoError::InvalidHashpower(..)
        | TopoError::SuperluminalOrbit { .. }
        | TopoError::InvalidOrbit(_)
        | TopoError::NonPositiveDelay(_) => exit::NUMERIC,
        _ => exit::GRAPH,
    }
}
