//! Experiment commands. Each one resolves its configuration against a table
//! of defaults, runs the computation, writes CSVs and reports a verdict.

use std::path::{Path, PathBuf};

use bridgelab_core::{Error as CoreError, GridSpec, KernelParams};
use thiserror::Error;

use crate::catalog::CatalogError;
use crate::config::{Config, ConfigError, RawConfig};
use crate::csv::{CsvError, Table};

pub mod bridge;
pub mod gamma;
pub mod jko;
pub mod particles;
pub mod seminorm;
pub mod tildeq;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Error)]
pub enum CmdError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => EXIT_CONFIG,
            CmdError::Solver(_) | CmdError::Output(_) => EXIT_SOLVER,
        }
    }
}

impl From<ConfigError> for CmdError {
    fn from(e: ConfigError) -> Self {
        CmdError::Config(e.to_string())
    }
}

impl From<CatalogError> for CmdError {
    fn from(e: CatalogError) -> Self {
        CmdError::Config(e.to_string())
    }
}

impl From<CsvError> for CmdError {
    fn from(e: CsvError) -> Self {
        CmdError::Output(e.to_string())
    }
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> Self {
        use CoreError::*;
        match e {
            NotConverged { .. } | PotentialOverflow { .. } | NewtonNotConverged { .. } | MonotonicityViolation { .. } | VanishingMarginal { .. } => {
                CmdError::Solver(e.to_string())
            }
            _ => CmdError::Config(e.to_string()),
        }
    }
}

/// Verdict and diagnostics of a finished command.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub pass: bool,
    /// Informational lines.
    pub notes: Vec<String>,
    /// One line per violated check, naming the check and the values.
    pub failures: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    fn new() -> Self {
        Self { pass: true, ..Self::default() }
    }

    fn note(&mut self, line: String) {
        self.notes.push(line);
    }

    fn check(&mut self, ok: bool, line: impl FnOnce() -> String) {
        if !ok {
            self.pass = false;
            self.failures.push(line());
        }
    }

    fn write(&mut self, table: &Table, dir: &Path, name: &str) -> Result<(), CmdError> {
        self.files.push(table.write(dir, name)?);
        Ok(())
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    GammaSweep,
    JkoRun,
    ParticlesRun,
    BridgeSolve,
    SeminormCheck,
    TildeqReport,
}

impl Command {
    pub const ALL: [Command; 6] =
        [Command::GammaSweep, Command::JkoRun, Command::ParticlesRun, Command::BridgeSolve, Command::SeminormCheck, Command::TildeqReport];

    pub fn name(self) -> &'static str {
        match self {
            Command::GammaSweep => "gamma-sweep",
            Command::JkoRun => "jko-run",
            Command::ParticlesRun => "particles-run",
            Command::BridgeSolve => "bridge-solve",
            Command::SeminormCheck => "seminorm-check",
            Command::TildeqReport => "tildeq-report",
        }
    }

    pub fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Command::GammaSweep => gamma::DEFAULTS,
            Command::JkoRun => jko::DEFAULTS,
            Command::ParticlesRun => particles::DEFAULTS,
            Command::BridgeSolve => bridge::DEFAULTS,
            Command::SeminormCheck => seminorm::DEFAULTS,
            Command::TildeqReport => tildeq::DEFAULTS,
        }
    }

    pub fn resolve(self, raw: &RawConfig) -> Result<Config, CmdError> {
        Ok(raw.resolve(self.defaults())?)
    }

    pub fn run(self, raw: &RawConfig, out: &Path) -> Result<Outcome, CmdError> {
        let cfg = self.resolve(raw)?;
        match self {
            Command::GammaSweep => gamma::run(&cfg, out),
            Command::JkoRun => jko::run(&cfg, out),
            Command::ParticlesRun => particles::run(&cfg, out),
            Command::BridgeSolve => bridge::run(&cfg, out),
            Command::SeminormCheck => seminorm::run(&cfg, out),
            Command::TildeqReport => tildeq::run(&cfg, out),
        }
    }
}

/// `[origin, origin + length]` with `n` cells, from keys `length`, `n` and
/// (if present) `origin`.
pub(crate) fn grid_from(cfg: &Config, n_key: &str, origin: f64) -> Result<GridSpec, CmdError> {
    let length = cfg.f64("length")?;
    let n = cfg.usize(n_key)?;
    GridSpec::new(origin, length, n).map_err(|e| CmdError::Config(format!("grid: {e}")))
}

/// Nonempty, positive, strictly decreasing, every entry at least
/// `MIN_EPSILON_CELLS` cells.
pub fn validate_ladder(epsilons: &[f64], grid: &GridSpec) -> Result<Vec<KernelParams>, CmdError> {
    if epsilons.is_empty() {
        return Err(CmdError::Config("epsilon ladder is empty".into()));
    }
    for w in epsilons.windows(2) {
        if !(w[1] < w[0]) {
            return Err(CmdError::Config(format!("epsilon ladder must be strictly decreasing: {} then {}", w[0], w[1])));
        }
    }
    let min = bridgelab_core::bridge::MIN_EPSILON_CELLS * grid.dx();
    epsilons
        .iter()
        .map(|&e| {
            if !(e > 0.0) {
                return Err(CmdError::Config(format!("epsilon {e} must be positive")));
            }
            if e < min {
                return Err(CmdError::Config(format!(
                    "epsilon {e} is below {} grid cells ({min}) for {} cells on length {}",
                    bridgelab_core::bridge::MIN_EPSILON_CELLS,
                    grid.n_cells,
                    grid.length
                )));
            }
            Ok(KernelParams::from_epsilon(e)?)
        })
        .collect()
}
