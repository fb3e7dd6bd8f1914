use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::MdpError;
use crate::market::PeriodObservables;

/// The per-period quantities rewards are computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSample {
    pub period: u32,
    pub revenue: f64,
    pub uv: u32,
    pub profit: f64,
}

impl RateSample {
    /// Revenue per visitor, 0 when `uv = 0`.
    pub fn revenue_rate(&self) -> f64 {
        if self.uv == 0 {
            0.0
        } else {
            self.revenue / f64::from(self.uv)
        }
    }

    /// Profit per visitor, 0 when `uv = 0`.
    pub fn profit_rate(&self) -> f64 {
        if self.uv == 0 {
            0.0
        } else {
            self.profit / f64::from(self.uv)
        }
    }
}

impl From<&PeriodObservables> for RateSample {
    fn from(o: &PeriodObservables) -> Self {
        RateSample {
            period: o.period_index,
            revenue: o.revenue,
            uv: o.uv,
            profit: o.profit,
        }
    }
}

/// Reward functions.
///
/// * `Rcr`: `revenue_t / uv_t`
/// * `Drcr { tau }`: `revenue_t / uv_t - revenue_{t-tau} / uv_{t-tau}`
/// * `ProfitCr`: `profit_t / uv_t`
///
/// A period with no visitors yields reward 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RewardKind {
    Rcr,
    Drcr { tau: u32 },
    ProfitCr,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardValue {
    Ready(f64),
    /// Not enough history yet (`Drcr` before period `tau + 1`).
    Pending,
}

impl RewardValue {
    pub fn ready(self) -> Option<f64> {
        match self {
            RewardValue::Ready(r) => Some(r),
            RewardValue::Pending => None,
        }
    }
}

impl RewardKind {
    pub fn drcr(tau: u32) -> Result<Self, MdpError> {
        if tau == 0 {
            Err(MdpError::InvalidTau)
        } else {
            Ok(RewardKind::Drcr { tau })
        }
    }

    /// Periods of history needed before a reward can be emitted.
    pub fn lookback(&self) -> u32 {
        match self {
            RewardKind::Drcr { tau } => *tau,
            _ => 0,
        }
    }

    /// Reward for `current` given earlier periods in `history` (any order;
    /// looked up by period index).
    pub fn reward(&self, current: &RateSample, history: &[RateSample]) -> RewardValue {
        match *self {
            RewardKind::Rcr => RewardValue::Ready(current.revenue_rate()),
            RewardKind::ProfitCr => RewardValue::Ready(current.profit_rate()),
            RewardKind::Drcr { tau } => {
                let Some(base_period) = current.period.checked_sub(tau) else {
                    return RewardValue::Pending;
                };
                match history.iter().rev().find(|h| h.period == base_period) {
                    None => RewardValue::Pending,
                    Some(_) if current.uv == 0 => RewardValue::Ready(0.0),
                    Some(base) => RewardValue::Ready(current.revenue_rate() - base.revenue_rate()),
                }
            }
        }
    }
}

impl fmt::Display for RewardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewardKind::Rcr => write!(f, "rcr"),
            RewardKind::Drcr { tau } => write!(f, "drcr:{tau}"),
            RewardKind::ProfitCr => write!(f, "profit_cr"),
        }
    }
}

impl FromStr for RewardKind {
    type Err = MdpError;

    /// Accepts `rcr`, `profit_cr`, `drcr` (tau = 1) and `drcr:<tau>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "rcr" => Ok(RewardKind::Rcr),
            "profit_cr" | "profitcr" | "pcr" => Ok(RewardKind::ProfitCr),
            "drcr" => Ok(RewardKind::Drcr { tau: 1 }),
            other => match other.strip_prefix("drcr:") {
                Some(tau) => {
                    let tau = tau
                        .parse()
                        .map_err(|_| MdpError::UnknownReward(s.clone()))?;
                    RewardKind::drcr(tau)
                }
                None => Err(MdpError::UnknownReward(s.clone())),
            },
        }
    }
}

impl TryFrom<String> for RewardKind {
    type Error = MdpError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<RewardKind> for String {
    fn from(k: RewardKind) -> String {
        k.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(period: u32, revenue: f64, uv: u32) -> RateSample {
        RateSample {
            period,
            revenue,
            uv,
            profit: 0.0,
        }
    }

    #[test]
    fn drcr_equal_rates_is_zero() {
        let hist = [sample(4, 80.0, 40)];
        let r = RewardKind::Drcr { tau: 1 }.reward(&sample(5, 100.0, 50), &hist);
        assert_eq!(r, RewardValue::Ready(0.0));
    }

    #[test]
    fn drcr_pending_without_history() {
        let r = RewardKind::Drcr { tau: 3 }.reward(&sample(5, 100.0, 50), &[sample(4, 1.0, 1)]);
        assert_eq!(r, RewardValue::Pending);
        let r = RewardKind::Drcr { tau: 7 }.reward(&sample(5, 100.0, 50), &[]);
        assert_eq!(r, RewardValue::Pending);
    }

    #[test]
    fn rcr_zero_revenue() {
        assert_eq!(
            RewardKind::Rcr.reward(&sample(1, 0.0, 30), &[]),
            RewardValue::Ready(0.0)
        );
    }

    #[test]
    fn no_visitors_means_zero_reward() {
        let hist = [sample(1, 50.0, 10)];
        for kind in [
            RewardKind::Rcr,
            RewardKind::ProfitCr,
            RewardKind::Drcr { tau: 1 },
        ] {
            assert_eq!(
                kind.reward(&sample(2, 0.0, 0), &hist),
                RewardValue::Ready(0.0)
            );
        }
    }

    #[test]
    fn profit_below_cost_is_negative() {
        // price 8 below unit cost 10, 3 units sold to 20 visitors
        let s = RateSample {
            period: 1,
            revenue: 24.0,
            uv: 20,
            profit: (8.0 - 10.0) * 3.0,
        };
        match RewardKind::ProfitCr.reward(&s, &[]) {
            RewardValue::Ready(r) => assert!(r < 0.0),
            RewardValue::Pending => panic!("pending"),
        }
    }

    #[test]
    fn parse_and_display() {
        for k in [
            RewardKind::Rcr,
            RewardKind::ProfitCr,
            RewardKind::Drcr { tau: 365 },
        ] {
            assert_eq!(k.to_string().parse::<RewardKind>().unwrap(), k);
        }
        assert_eq!(
            "DRCR".parse::<RewardKind>().unwrap(),
            RewardKind::Drcr { tau: 1 }
        );
        assert!("drcr:0".parse::<RewardKind>().is_err());
        assert!("revenue".parse::<RewardKind>().is_err());
    }

    proptest! {
        #[test]
        fn drcr_telescopes(values in prop::collection::vec((0.0f64..1e4, 1u32..5000), 2..120)) {
            let samples: Vec<RateSample> = values
                .iter()
                .enumerate()
                .map(|(i, &(rev, uv))| sample(i as u32 + 1, rev, uv))
                .collect();
            let kind = RewardKind::Drcr { tau: 1 };
            let total: f64 = (1..samples.len())
                .map(|i| kind.reward(&samples[i], &samples[..i]).ready().unwrap())
                .sum();
            let expect = samples.last().unwrap().revenue_rate() - samples[0].revenue_rate();
            let scale = samples.iter().map(RateSample::revenue_rate).fold(1.0, f64::max);
            prop_assert!((total - expect).abs() <= 1e-13 * scale * samples.len() as f64);
        }
    }
}
