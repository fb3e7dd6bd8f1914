//! MDP vocabulary: states, pricing actions, rewards and transitions.

mod action;
mod reward;
pub mod state;
pub mod transition;

use thiserror::Error;

pub use action::{ActionKind, ActionSpaceSpec, PriceGrid, PricingAction};
pub use reward::{RateSample, RewardKind, RewardValue};
pub use state::{
    build_state, raw_features, GroupContext, MarketState, StateContext, StateNormalizer, StateSpec,
    DEFAULT_WINDOW, STATE_DIM,
};
pub use transition::{Transition, TransitionRecord};

#[derive(Debug, Error)]
pub enum MdpError {
    #[error("invalid price bounds [{p_min}, {p_max}]")]
    InvalidBounds { p_min: f64, p_max: f64 },

    #[error("discrete action space needs K >= 2, got {0}")]
    TooFewBuckets(u32),

    #[error("price {price} outside [{p_min}, {p_max}]")]
    PriceOutOfBounds { price: f64, p_min: f64, p_max: f64 },

    #[error("bucket {bucket} outside 1..={buckets}")]
    BucketOutOfRange { bucket: u32, buckets: u32 },

    #[error("action does not match the action space kind")]
    KindMismatch,

    #[error("DRCR needs tau >= 1")]
    InvalidTau,

    #[error("unknown reward kind {0:?}")]
    UnknownReward(String),

    #[error("state needs at least one completed period")]
    EmptyHistory,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value")]
    NonFinite,

    #[error("transition file line {line}: {reason}")]
    Format { line: u64, reason: String },

    #[error("cannot open {path}: {source}")]
    Missing {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
