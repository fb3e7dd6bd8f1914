//! Small dense networks with analytic backpropagation.
//!
//! Used for Q-networks, actors and critics. Everything is `f64` and
//! single-sample; batches are handled by accumulating gradients.

mod io;
mod network;
mod optimizer;

use thiserror::Error;

pub use io::{from_text, load_network, save_network, to_text};
pub use network::{
    copy_into, soft_update, Activation, Dense, Gradients, LayerGrad, Network, Trace,
};
pub use optimizer::{apply_update, Optimizer, OptimizerKind};

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("network has no layers")]
    Empty,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("networks have different architectures")]
    ArchitectureMismatch,

    #[error("invalid rate {0}")]
    InvalidRate(f64),

    #[error("non-finite parameter")]
    NonFinite,

    #[error("network file line {line}: {reason}")]
    Format { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
