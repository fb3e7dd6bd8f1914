//! Difference-in-differences over groups of similar products.
//!
//! Each product's daily index is its revenue-per-visitor change against the
//! same day `tau` periods earlier. Group series are cross-product daily means,
//! and every group is rescaled by the control group's overall mean so the
//! control reads exactly 1.

use std::collections::BTreeMap;
use std::io::Write;

use super::EvalError;
use crate::mdp::{RateSample, RewardKind};

pub const DID_COLUMNS: [&str; 4] = ["day", "group", "index", "rescaled"];

/// One product's observed window plus the earlier periods its baselines
/// come from.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSeries {
    pub product: u32,
    pub group: u32,
    pub current: Vec<RateSample>,
    pub baseline: Vec<RateSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSeries {
    pub group: u32,
    pub products: usize,
    /// Daily cross-product mean index.
    pub index: Vec<f64>,
    /// `index` divided by the control mean.
    pub rescaled: Vec<f64>,
    pub mean: f64,
    pub rescaled_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DidReport {
    pub tau: u32,
    pub control: u32,
    pub days: Vec<u32>,
    pub groups: Vec<GroupSeries>,
}

impl DidReport {
    pub fn group(&self, id: u32) -> Option<&GroupSeries> {
        self.groups.iter().find(|g| g.group == id)
    }

    /// Rescaled mean of group `id` (the control is 1).
    pub fn ratio(&self, id: u32) -> Option<f64> {
        self.group(id).map(|g| g.rescaled_mean)
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Build the report; `control` names the control group.
pub fn did_index(series: &[ProductSeries], control: u32, tau: u32) -> Result<DidReport, EvalError> {
    let kind = RewardKind::drcr(tau)?;
    let first = series.first().ok_or(EvalError::EmptyGroup(control))?;
    let days: Vec<u32> = first.current.iter().map(|s| s.period).collect();
    if days.is_empty() {
        return Err(EvalError::Length("no observed days".into()));
    }

    let mut sums: BTreeMap<u32, (usize, Vec<f64>)> = BTreeMap::new();
    for p in series {
        let p_days: Vec<u32> = p.current.iter().map(|s| s.period).collect();
        if p_days != days {
            return Err(EvalError::Length(format!(
                "product {} covers different days than product {}",
                p.product, first.product
            )));
        }
        let mut history = p.baseline.clone();
        history.extend_from_slice(&p.current);
        let entry = sums
            .entry(p.group)
            .or_insert_with(|| (0, vec![0.0; days.len()]));
        entry.0 += 1;
        for (acc, cur) in entry.1.iter_mut().zip(&p.current) {
            *acc += kind
                .reward(cur, &history)
                .ready()
                .ok_or(EvalError::MissingBaseline {
                    product: p.product,
                    period: cur.period.saturating_sub(tau),
                })?;
        }
    }

    let control_mean = match sums.get(&control) {
        Some((n, total)) => mean(&total.iter().map(|v| v / *n as f64).collect::<Vec<_>>()),
        None => return Err(EvalError::EmptyGroup(control)),
    };
    if !control_mean.is_finite() || control_mean.abs() < 1e-12 {
        return Err(EvalError::DegenerateControl(control_mean));
    }

    let groups = sums
        .into_iter()
        .map(|(group, (n, total))| {
            let index: Vec<f64> = total.iter().map(|v| v / n as f64).collect();
            let rescaled: Vec<f64> = index.iter().map(|v| v / control_mean).collect();
            let m = mean(&index);
            GroupSeries {
                group,
                products: n,
                rescaled_mean: if group == control {
                    1.0
                } else {
                    m / control_mean
                },
                mean: m,
                index,
                rescaled,
            }
        })
        .collect();
    Ok(DidReport {
        tau,
        control,
        days,
        groups,
    })
}

/// CSV with [`DID_COLUMNS`], one row per (day, group).
pub fn write_did_csv<W: Write>(writer: W, report: &DidReport) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(DID_COLUMNS)?;
    for (d, day) in report.days.iter().enumerate() {
        for g in &report.groups {
            w.write_record([
                day.to_string(),
                g.group.to_string(),
                g.index[d].to_string(),
                g.rescaled[d].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
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

    /// Baseline days 1..=5 at rate 1, current days 6..=10 at rate `level`.
    fn product(id: u32, group: u32, level: f64) -> ProductSeries {
        ProductSeries {
            product: id,
            group,
            baseline: (1..=5).map(|t| sample(t, 100.0, 100)).collect(),
            current: (6..=10).map(|t| sample(t, 100.0 * level, 100)).collect(),
        }
    }

    #[test]
    fn identical_groups_have_ratio_one() {
        let s = vec![product(1, 0, 1.5), product(2, 1, 1.5)];
        let r = did_index(&s, 0, 5).unwrap();
        assert_eq!(r.ratio(0), Some(1.0));
        assert!((r.ratio(1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_tracks_relative_growth() {
        // control grows 0.5 per visitor, treatment 1.0 → ratio 2
        let s = vec![product(1, 0, 1.5), product(2, 0, 1.5), product(3, 1, 2.0)];
        let r = did_index(&s, 0, 5).unwrap();
        assert!((r.ratio(1).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(r.group(0).unwrap().products, 2);
        assert_eq!(r.days, vec![6, 7, 8, 9, 10]);
    }

    #[test]
    fn missing_baseline_is_an_error() {
        let mut p = product(1, 0, 1.5);
        p.baseline.remove(2);
        assert!(matches!(
            did_index(&[p], 0, 5),
            Err(EvalError::MissingBaseline {
                product: 1,
                period: 3
            })
        ));
    }

    #[test]
    fn degenerate_control_is_an_error() {
        let s = vec![product(1, 0, 1.0), product(2, 1, 1.5)];
        assert!(matches!(
            did_index(&s, 0, 5),
            Err(EvalError::DegenerateControl(_))
        ));
        assert!(matches!(did_index(&s, 9, 5), Err(EvalError::EmptyGroup(9))));
    }

    #[test]
    fn csv_has_one_row_per_day_and_group() {
        let s = vec![product(1, 0, 1.5), product(2, 1, 2.0)];
        let r = did_index(&s, 0, 5).unwrap();
        let mut buf = Vec::new();
        write_did_csv(&mut buf, &r).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 5 * 2);
        assert_eq!(text.lines().next().unwrap(), "day,group,index,rescaled");
    }

    proptest! {
        #[test]
        fn control_mean_is_exactly_one(levels in prop::collection::vec(1.01f64..5.0, 2..8)) {
            let s: Vec<ProductSeries> = levels.iter().enumerate().map(|(i, &l)| product(i as u32, (i % 2) as u32, l)).collect();
            let r = did_index(&s, 0, 5).unwrap();
            prop_assert_eq!(r.ratio(0), Some(1.0));
        }
    }
}
