use super::{DemonstrationSet, EvalError};
use crate::agents::{AgentError, DdpgAgent, DqnAgent, ReplayBuffer};
use crate::mdp::{ActionKind, PricingAction};
use crate::rng::SimRng;

/// What pre-training needs from an agent.
pub trait Learner {
    fn batch_size(&self) -> usize;

    fn buffer_capacity(&self) -> usize;

    /// A logged action of a product priced in `[p_min, p_max]`, expressed in
    /// this agent's training coordinates.
    fn demo_action(
        &self,
        logged: PricingAction,
        p_min: f64,
        p_max: f64,
    ) -> Result<PricingAction, AgentError>;

    /// One sampled train step; returns the (critic) loss.
    fn learn(
        &mut self,
        buffer: &ReplayBuffer,
        batch: usize,
        rng: &mut SimRng,
    ) -> Result<f64, AgentError>;
}

impl Learner for DqnAgent {
    fn batch_size(&self) -> usize {
        self.config().batch_size
    }

    fn buffer_capacity(&self) -> usize {
        self.config().buffer_capacity
    }

    fn demo_action(
        &self,
        logged: PricingAction,
        p_min: f64,
        p_max: f64,
    ) -> Result<PricingAction, AgentError> {
        let space = self.space().with_bounds(p_min, p_max)?;
        match logged {
            PricingAction::Price(p) => Ok(space.action_for_price(p)?),
            PricingAction::Bucket(b) => {
                space.bucket_price(b)?;
                Ok(logged)
            }
        }
    }

    fn learn(
        &mut self,
        buffer: &ReplayBuffer,
        batch: usize,
        rng: &mut SimRng,
    ) -> Result<f64, AgentError> {
        self.train_step(buffer, batch, rng)
    }
}

impl Learner for DdpgAgent {
    fn batch_size(&self) -> usize {
        self.config().batch_size
    }

    fn buffer_capacity(&self) -> usize {
        self.config().buffer_capacity
    }

    fn demo_action(
        &self,
        logged: PricingAction,
        p_min: f64,
        p_max: f64,
    ) -> Result<PricingAction, AgentError> {
        let product = self.space().with_bounds(p_min, p_max)?;
        debug_assert_eq!(product.kind, ActionKind::Continuous);
        match logged {
            PricingAction::Price(p) => {
                product.price_of(logged)?;
                Ok(PricingAction::Price(
                    self.space().from_unit(product.to_unit(p)),
                ))
            }
            PricingAction::Bucket(_) => Err(AgentError::KindMismatch),
        }
    }

    fn learn(
        &mut self,
        buffer: &ReplayBuffer,
        batch: usize,
        rng: &mut SimRng,
    ) -> Result<f64, AgentError> {
        self.train_step(buffer, batch, rng).map(|(loss, _)| loss)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PretrainReport {
    pub tuples: usize,
    pub steps: usize,
    /// Loss of the last step (0 when no step ran).
    pub last_loss: f64,
}

/// Replay the pre-training slices of `sets` through a fresh buffer.
///
/// Each epoch is `ceil(tuples / batch)` sampled train steps, with the batch
/// capped at the number of stored tuples. Evaluation slices are never read.
pub fn pretrain<L: Learner + ?Sized>(
    agent: &mut L,
    sets: &[DemonstrationSet],
    epochs: usize,
    rng: &mut SimRng,
) -> Result<PretrainReport, EvalError> {
    let mut buffer = ReplayBuffer::new(agent.buffer_capacity())?;
    for set in sets {
        for r in set.pretrain_slice() {
            let mut t = r.transition.clone();
            t.action = agent.demo_action(t.action, set.p_min, set.p_max)?;
            buffer.push(t);
        }
    }
    let tuples = buffer.len();
    let mut report = PretrainReport {
        tuples,
        steps: 0,
        last_loss: 0.0,
    };
    if epochs == 0 || tuples == 0 {
        return Ok(report);
    }
    let batch = agent.batch_size().min(tuples);
    let per_epoch = tuples.div_ceil(batch);
    for _ in 0..epochs * per_epoch {
        report.last_loss = agent.learn(&buffer, batch, rng)?;
        report.steps += 1;
    }
    Ok(report)
}
