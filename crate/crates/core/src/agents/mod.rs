//! Pricing agents: DQN over price buckets and DDPG over continuous prices.
//!
//! Agents are pooled across products. A DQN agent emits a bucket index that
//! is meaningful under any product's bounds; a DDPG agent works internally in
//! the `[-1, 1]` unit coordinate and is mapped onto each product's range on
//! the way out (see [`PricingPolicy`]).

mod checkpoint;
mod ddpg;
mod dqn;
mod replay;

use std::path::PathBuf;

use thiserror::Error;

use crate::mdp::{ActionSpaceSpec, MarketState, MdpError, PricingAction};
use crate::neural::NeuralError;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_MANIFEST};
pub use ddpg::{ActionValue, DdpgAgent, DdpgConfig};
pub use dqn::{DqnAgent, DqnConfig};
pub use replay::ReplayBuffer;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid agent configuration: {0}")]
    Config(String),

    #[error("replay buffer is empty")]
    EmptyBuffer,

    #[error("need {needed} transitions, buffer holds {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("state has {got} features, agent expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("action does not fit this agent's action space")]
    KindMismatch,

    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },

    #[error(transparent)]
    Neural(#[from] NeuralError),

    #[error(transparent)]
    Mdp(#[from] MdpError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Deterministic (non-exploring) decision for a product with action space `space`.
pub trait PricingPolicy {
    fn decide(
        &self,
        state: &MarketState,
        space: &ActionSpaceSpec,
    ) -> Result<PricingAction, AgentError>;
}

impl<P: PricingPolicy + ?Sized> PricingPolicy for &P {
    fn decide(
        &self,
        state: &MarketState,
        space: &ActionSpaceSpec,
    ) -> Result<PricingAction, AgentError> {
        (**self).decide(state, space)
    }
}

fn check_dim(expected: usize, state: &[f64]) -> Result<(), AgentError> {
    if state.len() != expected {
        return Err(AgentError::DimensionMismatch {
            expected,
            got: state.len(),
        });
    }
    Ok(())
}

fn check_unit_interval(name: &str, v: f64) -> Result<(), AgentError> {
    if !(0.0..=1.0).contains(&v) {
        return Err(AgentError::Config(format!(
            "{name} must lie in [0, 1], got {v}"
        )));
    }
    Ok(())
}
