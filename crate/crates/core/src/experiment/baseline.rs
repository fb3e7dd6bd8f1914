use rand::Rng;
use rand_distr::StandardNormal;

use super::BaselineConfig;
use crate::market::ProductProfile;
use crate::rng::{Purpose, SeedStream};

/// Rule-based behavior policy standing in for human category managers.
///
/// At the start of each month a list price level (a position in
/// `[p_min, p_max]`) is drawn; daily prices jitter around it. Once the first
/// `review_window` days of the month have set a revenue expectation, the level
/// is cut by `markdown_step` whenever trailing revenue drops below
/// `markdown_threshold` times that expectation (or to zero), then held for
/// another window.
///
/// Draws come from the product's `(period, Behavior)` stream, so the price
/// path depends only on the seed and the observed revenues.
#[derive(Debug, Clone, PartialEq)]
pub struct ManagerPolicy {
    cfg: BaselineConfig,
    level: Option<f64>,
    revenue: Vec<f64>,
    expectation: Option<f64>,
    cooldown: u32,
}

impl ManagerPolicy {
    pub fn new(cfg: BaselineConfig) -> Self {
        ManagerPolicy {
            cfg,
            level: None,
            revenue: Vec::new(),
            expectation: None,
            cooldown: 0,
        }
    }

    /// Current list price level, once one has been drawn.
    pub fn level(&self) -> Option<f64> {
        self.level
    }

    /// Price for period `t`. Call once per period, in order, each followed by
    /// [`observe`](Self::observe).
    pub fn price(&mut self, profile: &ProductProfile, t: u32, streams: &SeedStream) -> f64 {
        let mut rng = streams.draw_stream(profile.id, t, Purpose::Behavior).rng();
        let [lo, hi] = self.cfg.level_range;
        if self.level.is_none() || t.saturating_sub(1).is_multiple_of(self.cfg.month_length) {
            self.level = Some(if hi > lo {
                rng.random_range(lo..=hi)
            } else {
                lo
            });
            self.revenue.clear();
            self.expectation = None;
            self.cooldown = 0;
        }
        let z: f64 = rng.sample(StandardNormal);
        let pos = (self.level.unwrap_or(lo) + self.cfg.jitter * z).clamp(0.0, 1.0);
        profile.p_min + pos * (profile.p_max - profile.p_min)
    }

    /// Feed back the revenue of the period just priced.
    pub fn observe(&mut self, revenue: f64) {
        self.revenue.push(revenue);
        let w = self.cfg.review_window as usize;
        let trailing = || {
            self.revenue[self.revenue.len().saturating_sub(w)..]
                .iter()
                .sum::<f64>()
                / w as f64
        };
        match self.expectation {
            None if self.revenue.len() >= w => self.expectation = Some(trailing()),
            None => {}
            Some(_) if self.cooldown > 0 => self.cooldown -= 1,
            Some(expected) => {
                let recent = trailing();
                if recent < self.cfg.markdown_threshold * expected || recent == 0.0 {
                    self.level = self.level.map(|l| (l - self.cfg.markdown_step).max(0.0));
                    self.cooldown = self.cfg.review_window;
                }
            }
        }
    }
}
