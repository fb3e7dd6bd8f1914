//! Seeded synthetic e-commerce market.
//!
//! Each product draws daily unique visitors from a seasonal log-normal
//! traffic process and converts them at a price-dependent rate. Luxury
//! products follow a logistic demand curve (revenue per visitor has an
//! interior maximum and falls steeply at high prices); FMCG products have
//! weak price coupling and an autonomous weekly oscillation. All draws come
//! from `(product, period, purpose)` sub-streams, so simulations are pure
//! functions of profile, price path and seed.

mod groups;
pub mod io;
mod profile;
mod sim;

use thiserror::Error;

pub use groups::make_simi_groups;
pub use profile::{ProductProfile, Regime};
pub use sim::{
    conversion_rate, draw_uv, mean_conversion, PeriodObservables, ProductEpisode, SimClock,
    FMCG_CONVERSION_SWING, LUXURY_CURVE_MIDPOINT, UV_SEASON_AMPLITUDE,
};

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("price {price} outside [{p_min}, {p_max}]")]
    PriceOutOfBounds { price: f64, p_min: f64, p_max: f64 },

    #[error("product {id}: invalid {field}: {reason}")]
    InvalidProfile {
        id: u32,
        field: &'static str,
        reason: String,
    },

    #[error("product {id}: episode already finished at period {t}")]
    EpisodeFinished { id: u32, t: u32 },

    #[error("need at least 2 simi-product groups, got {0}")]
    TooFewGroups(usize),

    #[error("expected {expected} group sizes, got {got}")]
    GroupSizes { expected: usize, got: usize },

    #[error("invalid scale range [{0}, {1}]")]
    InvalidScale(f64, f64),

    #[error("profile file line {line}: {reason}")]
    Format { line: u64, reason: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
