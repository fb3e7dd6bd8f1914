//! Demonstrations, pre-training, offline policy evaluation and the
//! difference-in-differences index.

mod demos;
mod did;
mod offline;
mod pretrain;

use std::path::PathBuf;

use thiserror::Error;

use crate::agents::AgentError;
use crate::mdp::MdpError;

pub use demos::{group_records, load_demonstrations, DemonstrationSet};
pub use did::{did_index, write_did_csv, DidReport, GroupSeries, ProductSeries, DID_COLUMNS};
pub use offline::{evaluate_policy, evaluate_pooled, EvalConfig, EvalTally};
pub use pretrain::{pretrain, Learner, PretrainReport};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("split {split} must satisfy 0 < D < T = {total}")]
    Split { split: usize, total: usize },

    #[error("product {product}: {reason}")]
    Demo { product: u32, reason: String },

    #[error("epsilon must be > 0, got {0}")]
    Epsilon(f64),

    #[error("product {product} has no baseline for period {period}")]
    MissingBaseline { product: u32, period: u32 },

    #[error("group {0} has no products")]
    EmptyGroup(u32),

    #[error("control mean {0} cannot be rescaled to 1")]
    DegenerateControl(f64),

    #[error("series lengths differ: {0}")]
    Length(String),

    #[error("{path}: {source}")]
    File { path: PathBuf, source: MdpError },

    #[error(transparent)]
    Mdp(#[from] MdpError),

    #[error(transparent)]
    Agent(#[from] AgentError),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
