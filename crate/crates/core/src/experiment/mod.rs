//! Experiment runners: demonstration generation, offline sweeps and the
//! simi-product field analog.
//!
//! Output files (all CSV with a header row):
//!
//! * `profiles.csv`: the simulated products (see [`crate::market::io`]).
//! * `demos.csv`: logged transitions (see [`crate::mdp::transition`]).
//! * `sweep.csv`: [`SWEEP_COLUMNS`], one row per setting and repetition.
//! * `did.csv`: [`crate::eval::DID_COLUMNS`], one row per day and group.
//! * `field_summary.csv`: [`FIELD_COLUMNS`], one row per group.

mod baseline;
mod config;
mod field;
mod generate;
mod sweep;
mod world;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::agents::AgentError;
use crate::eval::EvalError;
use crate::market::MarketError;
use crate::mdp::MdpError;

pub use baseline::ManagerPolicy;
pub use config::{
    AgentConfig, AgentKind, BaselineConfig, DemoConfig, FieldConfig, ProductsConfig, Scenario,
    ScenarioConfig, SweepAxis, SweepConfig,
};
pub use field::{
    run_field_analog, run_field_with, FieldGroup, FieldOutput, GroupPolicy, FIELD_COLUMNS,
};
pub use generate::{build_products, run_generate, simulate_demonstrations, GenerateOutput};
pub use sweep::{
    build_agent, prepare_sets, run_evaluate, run_sweep, sweep_settings, sweep_to_dir,
    write_sweep_csv, EvaluateOutput, PreparedSets, PricingAgent, Setting, SweepRow, SWEEP_COLUMNS,
};
pub use world::{ProductTrack, World};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("config: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Path {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Market(#[from] MarketError),

    #[error(transparent)]
    Mdp(#[from] MdpError),

    #[error(transparent)]
    Agent(#[from] AgentError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Create `dir` (and parents) with a path-naming error.
pub(crate) fn ensure_dir(dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(|source| ExperimentError::Path {
        path: dir.to_path_buf(),
        source,
    })
}

/// Open `path` for writing with a path-naming error.
pub(crate) fn create_file(path: &Path) -> Result<fs::File, ExperimentError> {
    fs::File::create(path).map_err(|source| ExperimentError::Path {
        path: path.to_path_buf(),
        source,
    })
}
