use std::collections::BTreeMap;
use std::path::Path;

use super::EvalError;
use crate::mdp::transition::load_records;
use crate::mdp::{RateSample, RewardKind, StateNormalizer, Transition, TransitionRecord};

/// One product's logged tuples in period order. Tuples `[0, split)` are for
/// pre-training, `[split, total)` for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct DemonstrationSet {
    pub product: u32,
    pub p_min: f64,
    pub p_max: f64,
    records: Vec<TransitionRecord>,
    split: usize,
}

impl DemonstrationSet {
    pub fn new(records: Vec<TransitionRecord>, split: usize) -> Result<Self, EvalError> {
        let total = records.len();
        if split == 0 || split >= total {
            return Err(EvalError::Split { split, total });
        }
        let first = &records[0];
        let (product, p_min, p_max) = (first.product, first.p_min, first.p_max);
        for r in &records {
            if r.product != product || r.p_min != p_min || r.p_max != p_max {
                return Err(EvalError::Demo {
                    product,
                    reason: format!(
                        "record for period {} has a different product or price range",
                        r.period
                    ),
                });
            }
            r.transition.validate()?;
        }
        Ok(DemonstrationSet {
            product,
            p_min,
            p_max,
            records,
            split,
        })
    }

    /// `D`, the number of pre-training tuples.
    pub fn split(&self) -> usize {
        self.split
    }

    /// `T`, the number of tuples.
    pub fn total(&self) -> usize {
        self.records.len()
    }

    pub fn records(&self) -> &[TransitionRecord] {
        &self.records
    }

    pub fn pretrain_slice(&self) -> &[TransitionRecord] {
        &self.records[..self.split]
    }

    pub fn eval_slice(&self) -> &[TransitionRecord] {
        &self.records[self.split..]
    }

    pub fn transitions(&self) -> impl Iterator<Item = &Transition> {
        self.records.iter().map(|r| &r.transition)
    }

    /// Min-max bounds fitted on the pre-training slice only.
    pub fn fit_normalizer(&self) -> Result<StateNormalizer, EvalError> {
        let rows = self.pretrain_slice().iter().flat_map(|r| {
            [
                r.transition.state.features.as_slice(),
                r.transition.next_state.features.as_slice(),
            ]
        });
        Ok(StateNormalizer::fit(rows)?)
    }

    /// Copy with every state passed through `norm`.
    pub fn normalized(&self, norm: &StateNormalizer) -> Result<Self, EvalError> {
        let mut out = self.clone();
        for r in &mut out.records {
            r.transition.state.features = norm.apply(&r.transition.state.features)?;
            r.transition.next_state.features = norm.apply(&r.transition.next_state.features)?;
        }
        Ok(out)
    }

    /// Normalize with bounds fitted on this set's own pre-training slice.
    pub fn self_normalized(&self) -> Result<Self, EvalError> {
        self.normalized(&self.fit_normalizer()?)
    }
}

/// Group records by product (in order of first appearance), recompute each
/// reward under `reward`, drop tuples whose reward is still pending, and
/// split each product at `split`.
///
/// The history for a record is its `previous` sample plus the outcomes of
/// the same product's earlier records.
pub fn group_records(
    records: Vec<TransitionRecord>,
    reward: RewardKind,
    split: usize,
) -> Result<Vec<DemonstrationSet>, EvalError> {
    let mut order = Vec::new();
    let mut by_product: BTreeMap<u32, Vec<TransitionRecord>> = BTreeMap::new();
    for r in records {
        by_product
            .entry(r.product)
            .or_insert_with(|| {
                order.push(r.product);
                Vec::new()
            })
            .push(r);
    }
    order
        .into_iter()
        .map(|product| {
            let recs = by_product.remove(&product).expect("grouped above");
            let mut history: Vec<RateSample> = Vec::with_capacity(recs.len() + 1);
            let mut kept = Vec::with_capacity(recs.len());
            for mut r in recs {
                if let Some(prev) = r.previous {
                    if !history.iter().any(|h| h.period == prev.period) {
                        history.push(prev);
                    }
                }
                let outcome = r.outcome;
                if let Some(v) = reward.reward(&outcome, &history).ready() {
                    r.transition.reward = v;
                    kept.push(r);
                }
                history.push(outcome);
            }
            DemonstrationSet::new(kept, split).map_err(|e| match e {
                EvalError::Split { split, total } => EvalError::Demo {
                    product,
                    reason: format!("split {split} must satisfy 0 < D < T = {total}"),
                },
                other => other,
            })
        })
        .collect()
}

/// Read a demonstration file; see [`group_records`].
pub fn load_demonstrations(
    path: &Path,
    reward: RewardKind,
    split: usize,
) -> Result<Vec<DemonstrationSet>, EvalError> {
    let records = load_records(path).map_err(|source| EvalError::File {
        path: path.to_path_buf(),
        source,
    })?;
    group_records(records, reward, split)
}
