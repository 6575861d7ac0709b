//! Command-line front end for `qcc-core`. A run spec names a command and its
//! parameters; every command produces a [`Report`] that is rendered as JSON,
//! CSV or SVG with the spec hash, seed and version embedded.

use std::path::PathBuf;

use serde::Serialize;

pub mod commands;
pub mod diagram;
pub mod output;
pub mod runspec;
pub mod suite;

pub use output::Format;
pub use runspec::{Command, RunSpec};

pub const EXIT_INVALID: u8 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn invalid(msg: impl std::fmt::Display) -> Self {
        CliError::Invalid(msg.to_string())
    }
}

macro_rules! invalid_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::invalid(e)
            }
        }
    )*};
}

invalid_from!(
    qcc_core::exponents::ExponentError,
    qcc_core::norms::NormError,
    qcc_core::profiles::ProfileError,
    qcc_core::radial_maps::MapError,
    qcc_core::sharpness::SharpnessError,
    serde_json::Error
);

/// How a command that produced an artifact finished.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// The theorem's hypotheses fail (`q ≤ 1`, infeasible witness).
    Rejected,
    /// A check that should hold did not.
    Failed,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Rejected => 2,
            Status::Failed => 3,
        }
    }
}

/// A plain table for CSV output.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub status: Status,
    pub result: serde_json::Value,
    pub table: Option<Table>,
    /// SVG body, without the enclosing `<svg>` element.
    pub svg: Option<String>,
}

/// Command-line overrides applied on top of a run spec.
#[derive(Clone, Debug, Default)]
pub struct Invocation {
    pub command: Option<Command>,
    pub spec: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
}

impl Invocation {
    pub fn resolve(&self) -> Result<RunSpec, CliError> {
        let mut spec = match &self.spec {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|source| CliError::Io { path: path.clone(), source })?;
                let spec = RunSpec::parse(&text)?;
                if let Some(cmd) = self.command {
                    if cmd != spec.command {
                        return Err(CliError::invalid(format!(
                            "command {cmd} does not match the spec's {}",
                            spec.command
                        )));
                    }
                }
                spec
            }
            None => match self.command {
                Some(cmd) => RunSpec::new(cmd),
                None => return Err(CliError::invalid("give a command or --spec")),
            },
        };
        if self.out.is_some() || self.format.is_some() {
            let out = spec.output.get_or_insert_with(Default::default);
            if let Some(path) = &self.out {
                out.path = Some(path.clone());
            }
            if let Some(f) = self.format {
                out.format = Some(f);
            }
        }
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        if let Some(t) = self.tolerance {
            spec.tolerance = Some(t);
        }
        spec.validate()?;
        Ok(spec)
    }
}

pub fn dispatch(spec: &RunSpec) -> Result<Report, CliError> {
    match spec.command {
        Command::Exponents => commands::exponents(spec),
        Command::Diagram => diagram::command(spec),
        Command::Jacobian => commands::jacobian(spec),
        Command::Witness => commands::witness(spec),
        Command::Verify => commands::verify(spec),
        Command::Norms => commands::norms(spec),
        Command::Suite => suite::command(spec),
    }
}

/// Resolves, runs and writes; the returned status decides the exit code.
pub fn run(inv: &Invocation) -> Result<Status, CliError> {
    let spec = inv.resolve()?;
    let report = dispatch(&spec)?;
    output::emit(&spec, &report)?;
    Ok(report.status)
}
