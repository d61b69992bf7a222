//! Batch driver for twist-map scenarios.
//!
//! Every command reads a [`Scenario`], writes its artifacts atomically into
//! an output directory and returns a [`RunReport`] whose verdicts decide the
//! exit code (0 all pass, 2 a verdict failed, 1 execution error).

pub mod commands;
pub mod io;
pub mod report;
pub mod scenario;
pub mod svg;

pub use commands::{
    cmd_barrier, cmd_check, cmd_destroy, cmd_minimal, cmd_orbit, cmd_plot, recompute_verdicts, Options,
    POSITIVITY_FLOOR,
};
pub use report::{RunReport, Verdict};
pub use scenario::{Base, Scenario};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error(transparent)]
    Core(#[from] twistcore::Error),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("base system fails its preconditions:\n{0}")]
    Precondition(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        1
    }
}
