//! State construction.
//!
//! Feature layout (`STATE_DIM = 14`), computed from the observables of the
//! periods before the decision:
//!
//! | idx | block           | feature                                         |
//! |-----|-----------------|-------------------------------------------------|
//! | 0   | price           | last price position `(p - p_min)/(p_max - p_min)` |
//! | 1   | price           | discount vs `p_max`: `1 - p/p_max`              |
//! | 2   | price           | coupon / demand-shock indicator (0 or 1)        |
//! | 3   | sales           | last sales volume                               |
//! | 4   | sales           | last revenue                                    |
//! | 5   | sales           | last revenue per visitor                        |
//! | 6   | sales           | trailing mean sales volume                      |
//! | 7   | sales           | trailing mean revenue                           |
//! | 8   | sales           | remaining stock fraction (1 when unlimited)     |
//! | 9   | traffic         | last unique visitors                            |
//! | 10  | traffic         | trailing mean unique visitors                   |
//! | 11  | traffic         | last buyers per visitor                         |
//! | 12  | competitiveness | group-mates' mean price position                |
//! | 13  | competitiveness | group-mates' mean conversion                    |
//!
//! Trailing means cover the last `window` periods (default 7). Raw features
//! are min-max scaled by a [`StateNormalizer`] fitted on the pre-training
//! window and clipped to `[0, 1]` afterwards.

use serde::{Deserialize, Serialize};

use super::MdpError;
use crate::market::{PeriodObservables, ProductProfile};

pub const STATE_DIM: usize = 14;
pub const DEFAULT_WINDOW: usize = 7;

pub const FEATURE_NAMES: [&str; STATE_DIM] = [
    "price_position",
    "discount_rate",
    "coupon",
    "sales_volume",
    "revenue",
    "revenue_per_visitor",
    "trailing_sales",
    "trailing_revenue",
    "stock_fraction",
    "uv",
    "trailing_uv",
    "buyer_rate",
    "mates_price_position",
    "mates_conversion",
];

/// Index ranges of the four feature blocks.
pub const PRICE_BLOCK: std::ops::Range<usize> = 0..3;
pub const SALES_BLOCK: std::ops::Range<usize> = 3..9;
pub const TRAFFIC_BLOCK: std::ops::Range<usize> = 9..12;
pub const COMPETITIVENESS_BLOCK: std::ops::Range<usize> = 12..14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    pub features: Vec<f64>,
    /// Period the state precedes.
    pub period: u32,
}

impl MarketState {
    pub fn dim(&self) -> usize {
        self.features.len()
    }
}

/// Product-level facts needed to build a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateContext {
    pub p_min: f64,
    pub p_max: f64,
    pub initial_stock: Option<u32>,
    /// Whether a coupon / demand shock was active in the last period.
    pub coupon: bool,
}

impl StateContext {
    pub fn for_profile(p: &ProductProfile) -> Self {
        StateContext {
            p_min: p.p_min,
            p_max: p.p_max,
            initial_stock: (!p.is_unlimited()).then_some(p.initial_stock),
            coupon: false,
        }
    }
}

/// Summary of simi-product group-mates' last period.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroupContext {
    pub mates_price_position: f64,
    pub mates_conversion: f64,
}

/// Raw, unnormalized feature vector.
pub fn raw_features(
    history: &[PeriodObservables],
    product: &StateContext,
    group: &GroupContext,
    window: usize,
) -> Result<Vec<f64>, MdpError> {
    let last = history.last().ok_or(MdpError::EmptyHistory)?;
    let window = window.max(1);
    let tail = &history[history.len().saturating_sub(window)..];
    let n = tail.len() as f64;
    let mean = |f: fn(&PeriodObservables) -> f64| tail.iter().map(f).sum::<f64>() / n;

    let stock_fraction = match (product.initial_stock, last.stock_remaining) {
        (Some(initial), Some(left)) if initial > 0 => f64::from(left) / f64::from(initial),
        _ => 1.0,
    };
    let features = vec![
        (last.price_paid - product.p_min) / (product.p_max - product.p_min),
        1.0 - last.price_paid / product.p_max,
        if product.coupon { 1.0 } else { 0.0 },
        f64::from(last.sales_volume),
        last.revenue,
        last.revenue_conversion(),
        mean(|o| f64::from(o.sales_volume)),
        mean(|o| o.revenue),
        stock_fraction,
        f64::from(last.uv),
        mean(|o| f64::from(o.uv)),
        last.conversion(),
        group.mates_price_position,
        group.mates_conversion,
    ];
    if features.iter().any(|v| !v.is_finite()) {
        return Err(MdpError::NonFinite);
    }
    Ok(features)
}

/// Per-feature min-max scaling with clipping to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateNormalizer {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl StateNormalizer {
    /// Pass-through scaling on `[0, 1]` (values are still clipped).
    pub fn unit(dim: usize) -> Self {
        StateNormalizer {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
        }
    }

    /// Bounds from the observed extrema of `rows`.
    pub fn fit<'a, I>(rows: I) -> Result<Self, MdpError>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut it = rows.into_iter();
        let first = it.next().ok_or(MdpError::EmptyHistory)?;
        let mut lo = first.to_vec();
        let mut hi = first.to_vec();
        for row in it {
            if row.len() != lo.len() {
                return Err(MdpError::DimensionMismatch {
                    expected: lo.len(),
                    got: row.len(),
                });
            }
            for (i, &v) in row.iter().enumerate() {
                lo[i] = lo[i].min(v);
                hi[i] = hi[i].max(v);
            }
        }
        Ok(StateNormalizer { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Degenerate features (`hi == lo`) map to 0 at or below the bound and 1 above.
    pub fn apply(&self, raw: &[f64]) -> Result<Vec<f64>, MdpError> {
        if raw.len() != self.dim() {
            return Err(MdpError::DimensionMismatch {
                expected: self.dim(),
                got: raw.len(),
            });
        }
        Ok(raw
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&v, (&lo, &hi))| {
                let span = hi - lo;
                if span <= 1e-12 {
                    if v > lo {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    ((v - lo) / span).clamp(0.0, 1.0)
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub window: usize,
    pub normalizer: StateNormalizer,
}

impl Default for StateSpec {
    fn default() -> Self {
        StateSpec {
            window: DEFAULT_WINDOW,
            normalizer: StateNormalizer::unit(STATE_DIM),
        }
    }
}

/// Normalized state preceding the period after the last entry of `history`.
pub fn build_state(
    history: &[PeriodObservables],
    product: &StateContext,
    group: &GroupContext,
    spec: &StateSpec,
) -> Result<MarketState, MdpError> {
    let raw = raw_features(history, product, group, spec.window)?;
    let period = history.last().map_or(1, |o| o.period_index + 1);
    Ok(MarketState {
        features: spec.normalizer.apply(&raw)?,
        period,
    })
}
