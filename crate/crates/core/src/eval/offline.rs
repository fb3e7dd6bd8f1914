//! Offline policy evaluation against logged demonstrations.
//!
//! Each evaluation tuple is visited once, in order. A tuple counts only when
//! the policy's action lies strictly within `epsilon` of the logged action,
//! measured in normalized units: bucket distance over `K` for discrete
//! spaces, price distance over `p_max - p_min` for continuous ones. The
//! estimate is the mean reward over counted tuples, or 0 if none count.

use super::{DemonstrationSet, EvalError};
use crate::agents::PricingPolicy;
use crate::mdp::{ActionSpaceSpec, PricingAction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub epsilon: f64,
}

impl EvalConfig {
    pub fn new(epsilon: f64) -> Result<Self, EvalError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(EvalError::Epsilon(epsilon));
        }
        Ok(EvalConfig { epsilon })
    }
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { epsilon: 0.05 }
    }
}

/// Running reward sum `R` and match count `N`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvalTally {
    pub reward_sum: f64,
    pub matched: usize,
    pub visited: usize,
}

impl EvalTally {
    /// `R / N`, or 0 when nothing matched.
    pub fn value(&self) -> f64 {
        if self.matched > 0 {
            self.reward_sum / self.matched as f64
        } else {
            0.0
        }
    }

    pub fn match_rate(&self) -> f64 {
        if self.visited == 0 {
            0.0
        } else {
            self.matched as f64 / self.visited as f64
        }
    }

    fn absorb(&mut self, other: EvalTally) {
        self.reward_sum += other.reward_sum;
        self.matched += other.matched;
        self.visited += other.visited;
    }
}

/// Logged action in `space` coordinates.
fn logged_action(
    space: &ActionSpaceSpec,
    action: PricingAction,
) -> Result<PricingAction, EvalError> {
    Ok(match (action, space.buckets()) {
        (PricingAction::Price(p), _) => space.action_for_price(p)?,
        (PricingAction::Bucket(b), Some(_)) => {
            space.bucket_price(b)?;
            action
        }
        (PricingAction::Bucket(_), None) => return Err(crate::mdp::MdpError::KindMismatch.into()),
    })
}

/// Run the evaluator over `set`'s evaluation slice. `space` supplies the
/// action kind; its bounds are replaced by the product's.
pub fn evaluate_policy<P: PricingPolicy + ?Sized>(
    policy: &P,
    set: &DemonstrationSet,
    space: &ActionSpaceSpec,
    cfg: &EvalConfig,
) -> Result<EvalTally, EvalError> {
    let space = space.with_bounds(set.p_min, set.p_max)?;
    let mut tally = EvalTally::default();
    for r in set.eval_slice() {
        let t = &r.transition;
        let logged = logged_action(&space, t.action)?;
        let chosen = policy.decide(&t.state, &space)?;
        tally.visited += 1;
        if space.distance(chosen, logged)? < cfg.epsilon {
            tally.reward_sum += t.reward;
            tally.matched += 1;
        }
    }
    Ok(tally)
}

/// One estimate over several products: sums and counts are pooled before
/// dividing.
pub fn evaluate_pooled<P: PricingPolicy + ?Sized>(
    policy: &P,
    sets: &[DemonstrationSet],
    space: &ActionSpaceSpec,
    cfg: &EvalConfig,
) -> Result<EvalTally, EvalError> {
    let mut total = EvalTally::default();
    for set in sets {
        total.absorb(evaluate_policy(policy, set, space, cfg)?);
    }
    Ok(total)
}
