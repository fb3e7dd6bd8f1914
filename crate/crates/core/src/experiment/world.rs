use rand::Rng;

use super::ExperimentError;
use crate::market::{draw_uv, PeriodObservables, ProductEpisode, ProductProfile, SimClock};
use crate::mdp::state::SALES_BLOCK;
use crate::mdp::{raw_features, GroupContext, StateContext, DEFAULT_WINDOW};
use crate::rng::{Purpose, SeedStream};

/// Index of the remaining-stock feature.
const STOCK_FEATURE: usize = SALES_BLOCK.end - 1;

/// One product's simulated history.
#[derive(Debug, Clone)]
pub struct ProductTrack {
    pub profile: ProductProfile,
    episode: ProductEpisode,
    /// Observables of periods `1..` in order.
    pub history: Vec<PeriodObservables>,
    /// Raw state seen before each period's decision (`None` for period 1).
    pub states: Vec<Option<Vec<f64>>>,
    /// Whether a coupon campaign ran in each period.
    pub coupons: Vec<bool>,
    /// Periods in which the stock ran out.
    pub stock_outs: Vec<u32>,
}

impl ProductTrack {
    /// Whether the current episode can still sell.
    pub fn is_active(&self) -> bool {
        !self.episode.is_done()
    }

    pub fn stock_remaining(&self) -> Option<u32> {
        self.episode.stock_remaining()
    }
}

/// Products simulated in lockstep, one period at a time.
///
/// Decisions for period `t` see only periods before `t`, including the
/// group-mates' last observations. A product that sold out keeps logging
/// zero-sales days (or starts a fresh season when restocking is on).
#[derive(Debug, Clone)]
pub struct World {
    tracks: Vec<ProductTrack>,
    streams: SeedStream,
    t: u32,
    horizon: u32,
    restock: bool,
    coupon: Option<(f64, f64)>,
}

impl World {
    pub fn new(
        profiles: Vec<ProductProfile>,
        horizon: u32,
        streams: SeedStream,
    ) -> Result<Self, ExperimentError> {
        let tracks = profiles
            .into_iter()
            .map(|profile| {
                let episode = ProductEpisode::new(profile.clone(), SimClock::new(horizon))?;
                Ok(ProductTrack {
                    profile,
                    episode,
                    history: Vec::new(),
                    states: Vec::new(),
                    coupons: Vec::new(),
                    stock_outs: Vec::new(),
                })
            })
            .collect::<Result<Vec<_>, ExperimentError>>()?;
        Ok(World {
            tracks,
            streams,
            t: 1,
            horizon,
            restock: false,
            coupon: None,
        })
    }

    /// Start a new season with full stock whenever a product sells out.
    pub fn set_restock(&mut self, on: bool) {
        self.restock = on;
    }

    /// Random coupon campaigns: each product-period runs one with probability
    /// `rate`, multiplying conversion by `1 + lift`.
    pub fn set_coupons(&mut self, coupon: Option<(f64, f64)>) {
        self.coupon = coupon;
    }

    pub fn tracks(&self) -> &[ProductTrack] {
        &self.tracks
    }

    pub fn into_tracks(self) -> Vec<ProductTrack> {
        self.tracks
    }

    /// Next period to simulate.
    pub fn period(&self) -> u32 {
        self.t
    }

    pub fn streams(&self) -> &SeedStream {
        &self.streams
    }

    /// Refill every product's stock from the next period on.
    pub fn restock_all(&mut self) -> Result<(), ExperimentError> {
        for track in &mut self.tracks {
            if !track.profile.is_unlimited() {
                track.episode = ProductEpisode::new(
                    track.profile.clone(),
                    SimClock::starting_at(self.t, self.horizon),
                )?;
            }
        }
        Ok(())
    }

    fn group_context(&self, i: usize) -> GroupContext {
        let group = self.tracks[i].profile.group_id;
        let (mut n, mut price, mut conversion) = (0.0, 0.0, 0.0);
        for (j, mate) in self.tracks.iter().enumerate() {
            if j == i || mate.profile.group_id != group {
                continue;
            }
            if let Some(last) = mate.history.last() {
                n += 1.0;
                price += mate.profile.price_position(last.price_paid);
                conversion += last.conversion();
            }
        }
        if n == 0.0 {
            GroupContext::default()
        } else {
            GroupContext {
                mates_price_position: price / n,
                mates_conversion: conversion / n,
            }
        }
    }

    /// Raw state of product `i` before the next period, `None` before period 1.
    pub fn raw_state(&self, i: usize) -> Result<Option<Vec<f64>>, ExperimentError> {
        let track = &self.tracks[i];
        if track.history.is_empty() {
            return Ok(None);
        }
        let ctx = StateContext {
            coupon: track.coupons.last().copied().unwrap_or(false),
            ..StateContext::for_profile(&track.profile)
        };
        let mut features =
            raw_features(&track.history, &ctx, &self.group_context(i), DEFAULT_WINDOW)?;
        if let (Some(initial), Some(left)) = (ctx.initial_stock, track.episode.stock_remaining()) {
            features[STOCK_FEATURE] = f64::from(left) / f64::from(initial);
        }
        Ok(Some(features))
    }

    /// Simulate one period. `decide(i, track, raw_state)` prices every product
    /// that can still sell.
    pub fn step<F>(&mut self, mut decide: F) -> Result<(), ExperimentError>
    where
        F: FnMut(usize, &ProductTrack, Option<&[f64]>) -> Result<f64, ExperimentError>,
    {
        let t = self.t;
        if t > self.horizon {
            return Err(ExperimentError::Invalid {
                field: "horizon".into(),
                reason: format!("period {t} is past the simulated horizon {}", self.horizon),
            });
        }
        let states = (0..self.tracks.len())
            .map(|i| self.raw_state(i))
            .collect::<Result<Vec<_>, _>>()?;
        for (i, state) in states.into_iter().enumerate() {
            let track = &self.tracks[i];
            let (obs, coupon) = if track.is_active() {
                let price = decide(i, track, state.as_deref())?;
                let coupon = match self.coupon {
                    Some((rate, _)) => {
                        self.streams
                            .draw_stream(track.profile.id, t, Purpose::Shock)
                            .rng()
                            .random::<f64>()
                            < rate
                    }
                    None => false,
                };
                let lift = match (coupon, self.coupon) {
                    (true, Some((_, lift))) => 1.0 + lift,
                    _ => 1.0,
                };
                let track = &mut self.tracks[i];
                let (obs, _) = track.episode.step_with_lift(price, lift, &self.streams)?;
                (obs, coupon)
            } else {
                let last_price = track
                    .history
                    .last()
                    .map_or(track.profile.p_max, |o| o.price_paid);
                let obs = PeriodObservables {
                    uv: draw_uv(&track.profile, t, &self.streams),
                    sales_volume: 0,
                    revenue: 0.0,
                    profit: 0.0,
                    price_paid: last_price,
                    stock_remaining: track.episode.stock_remaining(),
                    period_index: t,
                };
                (obs, false)
            };
            let track = &mut self.tracks[i];
            let sold_out_now =
                !track.is_active() && obs.stock_remaining == Some(0) && obs.sales_volume > 0;
            track.history.push(obs);
            track.states.push(state);
            track.coupons.push(coupon);
            if sold_out_now {
                track.stock_outs.push(t);
                if self.restock && t < self.horizon {
                    track.episode = ProductEpisode::new(
                        track.profile.clone(),
                        SimClock::starting_at(t + 1, self.horizon),
                    )?;
                }
            }
        }
        self.t += 1;
        Ok(())
    }
}
