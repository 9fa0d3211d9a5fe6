//! Experiment harness for `polyqaoa`: configuration, single runs, sweeps
//! over formulation, bit resolution, layer count and seed, and summary
//! statistics.

pub mod config;
pub mod run;
pub mod stats;
pub mod sweep;

use polyqaoa::circuit::CircuitError;
use polyqaoa::encoding::EncodingError;
use polyqaoa::optimize::OptimizeError;
use polyqaoa::parser::ObjectiveError;
use polyqaoa::poly::PolyError;
use polyqaoa::quadratize::QuadError;
use polyqaoa::sim::SimError;

pub use config::{ExperimentConfig, Formulation, Problem, RunSettings, SweepPoint};
pub use run::{brute_force, run_single, BruteForce, ExperimentRecord, Instance};
pub use sweep::{run_sweep, SweepOutcome};

/// Version of the record and summary file layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Quadratize(#[from] QuadError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub fn is_capacity(&self) -> bool {
        match self {
            HarnessError::Poly(e) => e.is_capacity(),
            HarnessError::Quadratize(e) => e.is_capacity(),
            HarnessError::Sim(e) => e.is_capacity(),
            HarnessError::Optimize(e) => e.is_capacity(),
            HarnessError::Encoding(EncodingError::Poly(e)) => e.is_capacity(),
            HarnessError::Objective(ObjectiveError::Poly(e)) => e.is_capacity(),
            _ => false,
        }
    }

    /// Process exit status: 1 for bad input, 3 for capacity limits, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.is_capacity() {
            return 3;
        }
        match self {
            HarnessError::Config(_) | HarnessError::Objective(_) | HarnessError::Encoding(_) => 1,
            _ => 2,
        }
    }
}
