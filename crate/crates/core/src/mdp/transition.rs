//! Transitions and their line-delimited file format.
//!
//! One CSV record per transition, header line first, columns in this order:
//!
//! ```text
//! product,period,p_min,p_max,action_kind,action,reward,done,
//! revenue,uv,profit,prev_revenue,prev_uv,prev_profit,
//! s_0..s_{m-1},n_0..n_{m-1}
//! ```
//!
//! * `action_kind` is `price` or `bucket`; `action` holds the price or the
//!   1-based bucket.
//! * `revenue,uv,profit` are the outcome of period `period`; the `prev_*`
//!   columns hold period `period - 1` and may be empty.
//! * `s_*` / `n_*` are the state and next state (raw or normalized, as
//!   written); the width `m` is read from the header.
//! * `done` is `0` or `1`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MarketState, MdpError, PricingAction, RateSample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: MarketState,
    pub action: PricingAction,
    pub reward: f64,
    pub next_state: MarketState,
    pub done: bool,
}

impl Transition {
    pub fn validate(&self) -> Result<(), MdpError> {
        if !self.reward.is_finite() {
            return Err(MdpError::NonFinite);
        }
        if self.state.dim() != self.next_state.dim() {
            return Err(MdpError::DimensionMismatch {
                expected: self.state.dim(),
                got: self.next_state.dim(),
            });
        }
        Ok(())
    }
}

/// A transition plus the product context and raw outcome it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub product: u32,
    pub period: u32,
    pub p_min: f64,
    pub p_max: f64,
    pub transition: Transition,
    pub outcome: RateSample,
    pub previous: Option<RateSample>,
}

const FIXED_COLUMNS: [&str; 14] = [
    "product",
    "period",
    "p_min",
    "p_max",
    "action_kind",
    "action",
    "reward",
    "done",
    "revenue",
    "uv",
    "profit",
    "prev_revenue",
    "prev_uv",
    "prev_profit",
];

fn header(m: usize) -> Vec<String> {
    FIXED_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain((0..m).map(|i| format!("s_{i}")))
        .chain((0..m).map(|i| format!("n_{i}")))
        .collect()
}

pub fn write_records<W: Write>(writer: W, records: &[TransitionRecord]) -> Result<(), MdpError> {
    let m = records.first().map_or(0, |r| r.transition.state.dim());
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header(m))?;
    for r in records {
        let t = &r.transition;
        t.validate()?;
        if t.state.dim() != m {
            return Err(MdpError::DimensionMismatch {
                expected: m,
                got: t.state.dim(),
            });
        }
        let (kind, action) = match t.action {
            PricingAction::Price(p) => ("price", p.to_string()),
            PricingAction::Bucket(b) => ("bucket", b.to_string()),
        };
        let (pr, pu, pp) = match &r.previous {
            Some(p) => (
                p.revenue.to_string(),
                p.uv.to_string(),
                p.profit.to_string(),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        let mut row = vec![
            r.product.to_string(),
            r.period.to_string(),
            r.p_min.to_string(),
            r.p_max.to_string(),
            kind.to_string(),
            action,
            t.reward.to_string(),
            u8::from(t.done).to_string(),
            r.outcome.revenue.to_string(),
            r.outcome.uv.to_string(),
            r.outcome.profit.to_string(),
            pr,
            pu,
            pp,
        ];
        row.extend(t.state.features.iter().map(f64::to_string));
        row.extend(t.next_state.features.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

struct Fields<'a> {
    rec: &'a csv::StringRecord,
    line: u64,
}

impl Fields<'_> {
    fn raw(&self, idx: usize) -> Result<&str, MdpError> {
        self.rec.get(idx).ok_or_else(|| MdpError::Format {
            line: self.line,
            reason: format!("missing column {idx}"),
        })
    }

    fn parse<T: std::str::FromStr>(&self, idx: usize, name: &str) -> Result<T, MdpError> {
        let raw = self.raw(idx)?;
        raw.trim().parse().map_err(|_| MdpError::Format {
            line: self.line,
            reason: format!("invalid {name}: {raw:?}"),
        })
    }

    fn finite(&self, idx: usize, name: &str) -> Result<f64, MdpError> {
        let v: f64 = self.parse(idx, name)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(MdpError::Format {
                line: self.line,
                reason: format!("non-finite {name}"),
            })
        }
    }
}

pub fn read_records<R: Read>(reader: R) -> Result<Vec<TransitionRecord>, MdpError> {
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let head: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if head.len() < FIXED_COLUMNS.len() || head[..FIXED_COLUMNS.len()] != FIXED_COLUMNS {
        return Err(MdpError::Format {
            line: 1,
            reason: format!("header must start with {}", FIXED_COLUMNS.join(",")),
        });
    }
    let extra = head.len() - FIXED_COLUMNS.len();
    if !extra.is_multiple_of(2) || head != header(extra / 2) {
        return Err(MdpError::Format {
            line: 1,
            reason: "state columns must be s_0..s_{m-1},n_0..n_{m-1}".into(),
        });
    }
    let m = extra / 2;

    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != head.len() {
            return Err(MdpError::Format {
                line,
                reason: format!("expected {} fields, found {}", head.len(), rec.len()),
            });
        }
        let f = Fields { rec: &rec, line };
        let period: u32 = f.parse(1, "period")?;
        let action = match f.raw(4)? {
            "price" => PricingAction::Price(f.finite(5, "action")?),
            "bucket" => PricingAction::Bucket(f.parse(5, "action")?),
            other => {
                return Err(MdpError::Format {
                    line,
                    reason: format!("unknown action_kind {other:?}"),
                })
            }
        };
        let done = match f.raw(7)? {
            "0" => false,
            "1" => true,
            other => {
                return Err(MdpError::Format {
                    line,
                    reason: format!("invalid done flag {other:?}"),
                })
            }
        };
        let previous = if f.raw(11)?.is_empty() {
            None
        } else {
            Some(RateSample {
                period: period.saturating_sub(1),
                revenue: f.finite(11, "prev_revenue")?,
                uv: f.parse(12, "prev_uv")?,
                profit: f.finite(13, "prev_profit")?,
            })
        };
        let base = FIXED_COLUMNS.len();
        let state = (0..m)
            .map(|i| f.finite(base + i, "state feature"))
            .collect::<Result<Vec<_>, _>>()?;
        let next = (0..m)
            .map(|i| f.finite(base + m + i, "next-state feature"))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(TransitionRecord {
            product: f.parse(0, "product")?,
            period,
            p_min: f.finite(2, "p_min")?,
            p_max: f.finite(3, "p_max")?,
            transition: Transition {
                state: MarketState {
                    features: state,
                    period,
                },
                action,
                reward: f.finite(6, "reward")?,
                next_state: MarketState {
                    features: next,
                    period: period + 1,
                },
                done,
            },
            outcome: RateSample {
                period,
                revenue: f.finite(8, "revenue")?,
                uv: f.parse(9, "uv")?,
                profit: f.finite(10, "profit")?,
            },
            previous,
        });
    }
    Ok(out)
}

pub fn save_records(path: &Path, records: &[TransitionRecord]) -> Result<(), MdpError> {
    write_records(File::create(path)?, records)
}

pub fn load_records(path: &Path) -> Result<Vec<TransitionRecord>, MdpError> {
    let file = File::open(path).map_err(|e| MdpError::Missing {
        path: path.display().to_string(),
        source: e,
    })?;
    read_records(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(period: u32, reward: f64, action: PricingAction, m: usize) -> TransitionRecord {
        let feats = |off: f64| (0..m).map(|i| off + i as f64 * 0.1).collect::<Vec<_>>();
        TransitionRecord {
            product: 3,
            period,
            p_min: 8.0,
            p_max: 10.0,
            transition: Transition {
                state: MarketState {
                    features: feats(0.3),
                    period,
                },
                action,
                reward,
                next_state: MarketState {
                    features: feats(0.7),
                    period: period + 1,
                },
                done: period.is_multiple_of(2),
            },
            outcome: RateSample {
                period,
                revenue: 90.0,
                uv: 100,
                profit: 40.0,
            },
            previous: (period > 1).then_some(RateSample {
                period: period - 1,
                revenue: 80.0,
                uv: 90,
                profit: 30.0,
            }),
        }
    }

    #[test]
    fn non_numeric_reward_names_line() {
        let recs = vec![
            record(1, 0.25, PricingAction::Price(9.0), 2),
            record(2, 0.75, PricingAction::Price(9.0), 2),
        ];
        let mut buf = Vec::new();
        write_records(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf).unwrap().replace(",0.75,", ",abc,");
        match read_records(text.as_bytes()) {
            Err(MdpError::Format { line, reason }) => {
                assert_eq!(line, 3);
                assert!(reason.contains("reward"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_header() {
        assert!(read_records("a,b,c\n1,2,3\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(
            rewards in prop::collection::vec(-1e6f64..1e6, 1..12),
            m in 1usize..20,
            bucket in 1u32..200,
            price in 8.0f64..10.0,
        ) {
            let recs: Vec<_> = rewards
                .iter()
                .enumerate()
                .map(|(i, &r)| {
                    let a = if i % 2 == 0 { PricingAction::Price(price) } else { PricingAction::Bucket(bucket) };
                    record(i as u32 + 1, r, a, m)
                })
                .collect();
            let mut buf = Vec::new();
            write_records(&mut buf, &recs).unwrap();
            prop_assert_eq!(read_records(buf.as_slice()).unwrap(), recs);
        }
    }
}
