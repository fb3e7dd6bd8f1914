use serde::{Deserialize, Serialize};

use super::MdpError;

/// How a discrete bucket maps to a representative price.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceGrid {
    /// `[p_min, p_max]` split into `K` half-open equal-width buckets,
    /// bucket `k` represented by its midpoint.
    Uniform,
    /// Bucket `k` is the price `k/(K+1) · p_max` (with `K = 9`: 10%..90% of
    /// `p_max`), clamped into `[p_min, p_max]`.
    DiscountOfMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Discrete { buckets: u32, grid: PriceGrid },
    Continuous,
}

/// One pricing decision: a bucket in `1..=K` or a price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PricingAction {
    Bucket(u32),
    Price(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionSpaceSpec {
    pub p_min: f64,
    pub p_max: f64,
    pub kind: ActionKind,
}

impl ActionSpaceSpec {
    pub fn new(p_min: f64, p_max: f64, kind: ActionKind) -> Result<Self, MdpError> {
        if !(p_min.is_finite() && p_max.is_finite() && p_min < p_max) {
            return Err(MdpError::InvalidBounds { p_min, p_max });
        }
        if let ActionKind::Discrete { buckets, .. } = kind {
            if buckets < 2 {
                return Err(MdpError::TooFewBuckets(buckets));
            }
        }
        Ok(ActionSpaceSpec { p_min, p_max, kind })
    }

    pub fn discrete(p_min: f64, p_max: f64, buckets: u32) -> Result<Self, MdpError> {
        Self::new(
            p_min,
            p_max,
            ActionKind::Discrete {
                buckets,
                grid: PriceGrid::Uniform,
            },
        )
    }

    pub fn discount_grid(p_min: f64, p_max: f64, levels: u32) -> Result<Self, MdpError> {
        Self::new(
            p_min,
            p_max,
            ActionKind::Discrete {
                buckets: levels,
                grid: PriceGrid::DiscountOfMax,
            },
        )
    }

    pub fn continuous(p_min: f64, p_max: f64) -> Result<Self, MdpError> {
        Self::new(p_min, p_max, ActionKind::Continuous)
    }

    /// Same kind, different bounds.
    pub fn with_bounds(&self, p_min: f64, p_max: f64) -> Result<Self, MdpError> {
        Self::new(p_min, p_max, self.kind)
    }

    pub fn buckets(&self) -> Option<u32> {
        match self.kind {
            ActionKind::Discrete { buckets, .. } => Some(buckets),
            ActionKind::Continuous => None,
        }
    }

    pub fn width(&self) -> f64 {
        self.p_max - self.p_min
    }

    fn check_price(&self, price: f64) -> Result<(), MdpError> {
        if price.is_finite() && price >= self.p_min && price <= self.p_max {
            Ok(())
        } else {
            Err(MdpError::PriceOutOfBounds {
                price,
                p_min: self.p_min,
                p_max: self.p_max,
            })
        }
    }

    fn discrete_parts(&self) -> Result<(u32, PriceGrid), MdpError> {
        match self.kind {
            ActionKind::Discrete { buckets, grid } => Ok((buckets, grid)),
            ActionKind::Continuous => Err(MdpError::KindMismatch),
        }
    }

    /// Bucket containing `price`; `p_max` maps to `K`.
    pub fn bucket_index(&self, price: f64) -> Result<u32, MdpError> {
        let (k, grid) = self.discrete_parts()?;
        self.check_price(price)?;
        let idx = match grid {
            PriceGrid::Uniform => {
                let pos = f64::from(k) * (price - self.p_min) / self.width();
                1 + pos.floor() as u32
            }
            PriceGrid::DiscountOfMax => {
                (price / self.p_max * f64::from(k + 1)).round().max(1.0) as u32
            }
        };
        Ok(idx.min(k))
    }

    /// Representative price of bucket `k`.
    pub fn bucket_price(&self, bucket: u32) -> Result<f64, MdpError> {
        let (k, grid) = self.discrete_parts()?;
        if bucket < 1 || bucket > k {
            return Err(MdpError::BucketOutOfRange { bucket, buckets: k });
        }
        Ok(match grid {
            PriceGrid::Uniform => {
                self.p_min + self.width() * (f64::from(bucket) - 0.5) / f64::from(k)
            }
            PriceGrid::DiscountOfMax => {
                (f64::from(bucket) / f64::from(k + 1) * self.p_max).clamp(self.p_min, self.p_max)
            }
        })
    }

    pub fn price_of(&self, action: PricingAction) -> Result<f64, MdpError> {
        match (action, self.kind) {
            (PricingAction::Bucket(b), ActionKind::Discrete { .. }) => self.bucket_price(b),
            (PricingAction::Price(p), ActionKind::Continuous) => {
                self.check_price(p)?;
                Ok(p)
            }
            _ => Err(MdpError::KindMismatch),
        }
    }

    /// Express a logged price as an action of this space.
    pub fn action_for_price(&self, price: f64) -> Result<PricingAction, MdpError> {
        match self.kind {
            ActionKind::Discrete { .. } => self.bucket_index(price).map(PricingAction::Bucket),
            ActionKind::Continuous => {
                self.check_price(price)?;
                Ok(PricingAction::Price(price))
            }
        }
    }

    pub fn contains(&self, action: PricingAction) -> bool {
        self.price_of(action).is_ok()
    }

    /// Distance in normalized units: bucket distance over `K`, or price
    /// distance over `p_max - p_min`.
    pub fn distance(&self, a: PricingAction, b: PricingAction) -> Result<f64, MdpError> {
        match (a, b, self.kind) {
            (
                PricingAction::Bucket(x),
                PricingAction::Bucket(y),
                ActionKind::Discrete { buckets, .. },
            ) => Ok(f64::from(x.abs_diff(y)) / f64::from(buckets)),
            (PricingAction::Price(x), PricingAction::Price(y), ActionKind::Continuous) => {
                Ok((x - y).abs() / self.width())
            }
            _ => Err(MdpError::KindMismatch),
        }
    }

    /// Map a price to `[-1, 1]` (the actor/critic action coordinate).
    pub fn to_unit(&self, price: f64) -> f64 {
        2.0 * (price - self.p_min) / self.width() - 1.0
    }

    pub fn from_unit(&self, u: f64) -> f64 {
        (self.p_min + (u + 1.0) * 0.5 * self.width()).clamp(self.p_min, self.p_max)
    }
}
