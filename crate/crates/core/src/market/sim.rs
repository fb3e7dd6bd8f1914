use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{MarketError, ProductProfile, Regime};
use crate::rng::{Purpose, SeedStream};

/// Relative amplitude of the seasonal swing in customer traffic.
pub const UV_SEASON_AMPLITUDE: f64 = 0.15;
/// Relative amplitude of the autonomous FMCG conversion oscillation.
pub const FMCG_CONVERSION_SWING: f64 = 0.3;
/// Normalized price at which the luxury logistic curve is centred.
pub const LUXURY_CURVE_MIDPOINT: f64 = 0.3;

/// Outcome of one pricing period for one product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodObservables {
    pub uv: u32,
    pub sales_volume: u32,
    pub revenue: f64,
    pub profit: f64,
    pub price_paid: f64,
    /// `None` for unlimited supply.
    pub stock_remaining: Option<u32>,
    pub period_index: u32,
}

impl PeriodObservables {
    /// Revenue per visitor; 0 when there were no visitors.
    pub fn revenue_conversion(&self) -> f64 {
        if self.uv == 0 {
            0.0
        } else {
            self.revenue / f64::from(self.uv)
        }
    }

    pub fn conversion(&self) -> f64 {
        if self.uv == 0 {
            0.0
        } else {
            f64::from(self.sales_volume) / f64::from(self.uv)
        }
    }
}

/// Period counter; one period is one day.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimClock {
    pub t: u32,
    pub horizon: u32,
}

impl SimClock {
    pub fn new(horizon: u32) -> Self {
        SimClock { t: 1, horizon }
    }

    /// Clock whose first period is `start` and last period is `horizon`.
    pub fn starting_at(start: u32, horizon: u32) -> Self {
        SimClock {
            t: start.max(1),
            horizon,
        }
    }

    pub fn finished(&self) -> bool {
        self.t > self.horizon
    }
}

fn lognormal_factor(rng: &mut impl Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 1.0;
    }
    let z: f64 = rng.sample(StandardNormal);
    (sigma * z - 0.5 * sigma * sigma).exp()
}

fn seasonal(period: u32, t: u32) -> f64 {
    if period == 0 {
        0.0
    } else {
        (2.0 * PI * f64::from(t) / f64::from(period)).sin()
    }
}

/// Unique visitors for period `t`: a seasonal baseline with mean-one
/// log-normal noise, rounded to an integer.
pub fn draw_uv(profile: &ProductProfile, t: u32, streams: &SeedStream) -> u32 {
    let mean =
        profile.base_uv * (1.0 + UV_SEASON_AMPLITUDE * seasonal(profile.seasonality_period, t));
    let mut rng = streams.draw_stream(profile.id, t, Purpose::Traffic).rng();
    let uv = mean * lognormal_factor(&mut rng, profile.uv_volatility);
    uv.round().max(0.0) as u32
}

/// Noise-free mean conversion at `price` in period `t`.
///
/// Luxury: logistic in the normalized price, scaled so the value at `p_min`
/// is `base_conversion`. Fmcg: `base_conversion · (p_min/price)^elasticity`
/// times an autonomous sinusoid of period `seasonality_period`.
/// Both carry the year-on-year drift `(1 + annual_growth)^((t-1)/365)`.
pub fn mean_conversion(profile: &ProductProfile, price: f64, t: u32) -> f64 {
    let growth = (1.0 + profile.annual_growth).powf(f64::from(t.saturating_sub(1)) / 365.0);
    let level = match profile.regime {
        Regime::Luxury => {
            let x = profile.price_position(price);
            let k = profile.demand_elasticity;
            let norm = 1.0 + (-k * LUXURY_CURVE_MIDPOINT).exp();
            profile.base_conversion * norm / (1.0 + (k * (x - LUXURY_CURVE_MIDPOINT)).exp())
        }
        Regime::Fmcg => {
            let coupling = (profile.p_min / price).powf(profile.demand_elasticity);
            let swing = 1.0 + FMCG_CONVERSION_SWING * seasonal(profile.seasonality_period, t);
            profile.base_conversion * coupling * swing
        }
    };
    (level * growth).clamp(0.0, 1.0)
}

/// Realized conversion probability: [`mean_conversion`] times mean-one
/// log-normal noise of scale `demand_noise`, clipped to `[0, 1]`.
pub fn conversion_rate(
    profile: &ProductProfile,
    price: f64,
    t: u32,
    streams: &SeedStream,
) -> Result<f64, MarketError> {
    profile.check_price(price)?;
    let mean = mean_conversion(profile, price, t);
    let mut rng = streams
        .draw_stream(profile.id, t, Purpose::Conversion)
        .rng();
    Ok((mean * lognormal_factor(&mut rng, profile.demand_noise)).clamp(0.0, 1.0))
}

/// Explicit per-product simulation state.
#[derive(Debug, Clone)]
pub struct ProductEpisode {
    profile: ProductProfile,
    clock: SimClock,
    stock_remaining: Option<u32>,
    done: bool,
}

impl ProductEpisode {
    pub fn new(profile: ProductProfile, clock: SimClock) -> Result<Self, MarketError> {
        profile.validate()?;
        let stock_remaining = (!profile.is_unlimited()).then_some(profile.initial_stock);
        let done = clock.finished();
        Ok(ProductEpisode {
            profile,
            clock,
            stock_remaining,
            done,
        })
    }

    pub fn profile(&self) -> &ProductProfile {
        &self.profile
    }

    pub fn clock(&self) -> SimClock {
        self.clock
    }

    pub fn stock_remaining(&self) -> Option<u32> {
        self.stock_remaining
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Simulate the current period at `price`.
    pub fn step(
        &mut self,
        price: f64,
        streams: &SeedStream,
    ) -> Result<(PeriodObservables, bool), MarketError> {
        self.step_with_lift(price, 1.0, streams)
    }

    /// Like [`step`](Self::step) with conversion multiplied by `lift`
    /// (a bounded demand shock such as a coupon campaign).
    pub fn step_with_lift(
        &mut self,
        price: f64,
        lift: f64,
        streams: &SeedStream,
    ) -> Result<(PeriodObservables, bool), MarketError> {
        if self.done {
            return Err(MarketError::EpisodeFinished {
                id: self.profile.id,
                t: self.clock.t,
            });
        }
        let t = self.clock.t;
        let uv = draw_uv(&self.profile, t, streams);
        let conversion =
            (conversion_rate(&self.profile, price, t, streams)? * lift).clamp(0.0, 1.0);
        let mut sales = if uv == 0 || conversion == 0.0 {
            0
        } else {
            let mut rng = streams
                .draw_stream(self.profile.id, t, Purpose::Sales)
                .rng();
            Binomial::new(u64::from(uv), conversion)
                .expect("conversion clamped to [0, 1]")
                .sample(&mut rng) as u32
        };
        if let Some(stock) = self.stock_remaining.as_mut() {
            sales = sales.min(*stock);
            *stock -= sales;
        }
        let volume = f64::from(sales);
        let obs = PeriodObservables {
            uv,
            sales_volume: sales,
            revenue: price * volume,
            profit: (price - self.profile.unit_cost) * volume,
            price_paid: price,
            stock_remaining: self.stock_remaining,
            period_index: t,
        };
        self.clock.t += 1;
        self.done = self.stock_remaining == Some(0) || self.clock.finished();
        Ok((obs, self.done))
    }
}
