use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{check_dim, check_unit_interval, AgentError, PricingPolicy, ReplayBuffer};
use crate::mdp::{ActionKind, ActionSpaceSpec, MarketState, PricingAction, Transition};
use crate::neural::{
    soft_update, Activation, Gradients, Network, NeuralError, Optimizer, OptimizerKind,
};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdpgConfig {
    pub gamma: f64,
    /// Exploration noise, as a fraction of `p_max - p_min`.
    pub sigma: f64,
    /// Target update interval, in train steps.
    pub target_interval: u64,
    /// Target mixing rate; `1` is a hard copy.
    pub target_rho: f64,
    pub actor_optimizer: OptimizerKind,
    pub critic_optimizer: OptimizerKind,
    pub hidden: Vec<usize>,
    /// Output-layer initialization scale for actor and critic.
    pub out_init: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
}

impl Default for DdpgConfig {
    fn default() -> Self {
        DdpgConfig {
            gamma: 0.99,
            sigma: 0.1,
            target_interval: 1,
            target_rho: 0.005,
            actor_optimizer: OptimizerKind::adam(1e-3),
            critic_optimizer: OptimizerKind::adam(1e-3),
            hidden: vec![64, 64],
            out_init: 3e-3,
            batch_size: 64,
            buffer_capacity: 100_000,
        }
    }
}

impl DdpgConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        check_unit_interval("gamma", self.gamma)?;
        check_unit_interval("target_rho", self.target_rho)?;
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(AgentError::Config(format!(
                "sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        if self.target_interval == 0 {
            return Err(AgentError::Config("target_interval must be >= 1".into()));
        }
        if self.batch_size == 0 || self.buffer_capacity == 0 {
            return Err(AgentError::Config(
                "batch_size and buffer_capacity must be >= 1".into(),
            ));
        }
        if self.hidden.contains(&0) {
            return Err(AgentError::Config(
                "hidden layer widths must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// A state-action value with its slope in the action.
pub trait ActionValue {
    /// `(Q(s, a), ∂Q/∂a)` at unit action `a`.
    fn value_and_slope(&self, state: &[f64], action: f64) -> Result<(f64, f64), AgentError>;
}

/// Critic networks take `[state.., action]` and return one value.
impl ActionValue for Network {
    fn value_and_slope(&self, state: &[f64], action: f64) -> Result<(f64, f64), AgentError> {
        let input = critic_input(state, action);
        let trace = self.forward_trace(&input)?;
        let (_, dx) = self.backward(&trace, &[1.0])?;
        Ok((trace.output()[0], dx[state.len()]))
    }
}

fn critic_input(state: &[f64], action: f64) -> Vec<f64> {
    let mut x = Vec::with_capacity(state.len() + 1);
    x.extend_from_slice(state);
    x.push(action);
    x
}

/// Deterministic actor-critic over a continuous price.
///
/// The actor emits `u = tanh(..)` in `[-1, 1]`; the price is
/// `space.from_unit(u)`. The critic sees the action in the same unit
/// coordinate.
#[derive(Debug, Clone)]
pub struct DdpgAgent {
    config: DdpgConfig,
    space: ActionSpaceSpec,
    actor: Network,
    critic: Network,
    actor_target: Network,
    critic_target: Network,
    actor_opt: Optimizer,
    critic_opt: Optimizer,
    steps: u64,
}

impl DdpgAgent {
    pub fn new(
        state_dim: usize,
        space: ActionSpaceSpec,
        config: DdpgConfig,
        rng: &mut SimRng,
    ) -> Result<Self, AgentError> {
        let actor = Network::mlp(
            state_dim,
            &config.hidden,
            1,
            Activation::Relu,
            Activation::Tanh,
            config.out_init,
            rng,
        );
        let critic = Network::mlp(
            state_dim + 1,
            &config.hidden,
            1,
            Activation::Relu,
            Activation::Identity,
            config.out_init,
            rng,
        );
        Self::with_networks(actor, critic, space, config)
    }

    /// Wrap existing networks; targets start as exact copies.
    pub fn with_networks(
        actor: Network,
        critic: Network,
        space: ActionSpaceSpec,
        config: DdpgConfig,
    ) -> Result<Self, AgentError> {
        config.validate()?;
        if space.kind != ActionKind::Continuous {
            return Err(AgentError::KindMismatch);
        }
        if actor.out_dim() != 1 || critic.out_dim() != 1 || critic.in_dim() != actor.in_dim() + 1 {
            return Err(AgentError::Config(format!(
                "actor {}→{} and critic {}→{} do not fit together",
                actor.in_dim(),
                actor.out_dim(),
                critic.in_dim(),
                critic.out_dim()
            )));
        }
        Ok(DdpgAgent {
            actor_opt: Optimizer::new(config.actor_optimizer)?,
            critic_opt: Optimizer::new(config.critic_optimizer)?,
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
            config,
            space,
            steps: 0,
        })
    }

    pub(crate) fn restore(
        mut self,
        actor_target: Network,
        critic_target: Network,
        steps: u64,
    ) -> Result<Self, AgentError> {
        if !actor_target.same_architecture(&self.actor)
            || !critic_target.same_architecture(&self.critic)
        {
            return Err(NeuralError::ArchitectureMismatch.into());
        }
        self.actor_target = actor_target;
        self.critic_target = critic_target;
        self.steps = steps;
        Ok(self)
    }

    pub fn config(&self) -> &DdpgConfig {
        &self.config
    }

    pub fn space(&self) -> &ActionSpaceSpec {
        &self.space
    }

    pub fn state_dim(&self) -> usize {
        self.actor.in_dim()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn actor(&self) -> &Network {
        &self.actor
    }

    pub fn actor_mut(&mut self) -> &mut Network {
        &mut self.actor
    }

    pub fn critic(&self) -> &Network {
        &self.critic
    }

    pub fn critic_mut(&mut self) -> &mut Network {
        &mut self.critic
    }

    pub fn actor_target(&self) -> &Network {
        &self.actor_target
    }

    pub fn critic_target(&self) -> &Network {
        &self.critic_target
    }

    /// Actor output `μ(s)` in unit coordinates.
    pub fn unit_action(&self, state: &[f64]) -> Result<f64, AgentError> {
        check_dim(self.state_dim(), state)?;
        Ok(self.actor.forward(state)?[0])
    }

    /// Price for a product with action space `space`, with Gaussian noise of
    /// standard deviation `sigma·(p_max − p_min)` when exploring.
    pub fn act_in(
        &self,
        state: &MarketState,
        space: &ActionSpaceSpec,
        explore: bool,
        rng: &mut SimRng,
    ) -> Result<PricingAction, AgentError> {
        let mut u = self.unit_action(&state.features)?;
        if explore && self.config.sigma > 0.0 {
            // σ·width in price is 2σ in the unit coordinate.
            let noise = Normal::new(0.0, 2.0 * self.config.sigma).expect("sigma validated");
            u += noise.sample(rng);
        }
        Ok(PricingAction::Price(space.from_unit(u)))
    }

    pub fn act(
        &self,
        state: &MarketState,
        explore: bool,
        rng: &mut SimRng,
    ) -> Result<PricingAction, AgentError> {
        self.act_in(state, &self.space, explore, rng)
    }

    fn unit_of(&self, action: PricingAction) -> Result<f64, AgentError> {
        match action {
            PricingAction::Price(p) => {
                self.space.price_of(action)?;
                Ok(self.space.to_unit(p))
            }
            PricingAction::Bucket(_) => Err(AgentError::KindMismatch),
        }
    }

    /// Gradient of `−mean Q(s, μ(s))` over `states` with respect to the
    /// actor parameters, chained through `critic`'s action slope. Also
    /// returns the objective `mean Q(s, μ(s))`.
    pub fn actor_gradient(
        &self,
        states: &[&[f64]],
        critic: &dyn ActionValue,
    ) -> Result<(Gradients, f64), AgentError> {
        if states.is_empty() {
            return Err(AgentError::EmptyBuffer);
        }
        let scale = 1.0 / states.len() as f64;
        let mut grads = self.actor.zero_gradients();
        let mut objective = 0.0;
        for s in states {
            check_dim(self.state_dim(), s)?;
            let trace = self.actor.forward_trace(s)?;
            let (q, slope) = critic.value_and_slope(s, trace.output()[0])?;
            objective += q * scale;
            self.actor
                .accumulate_backward(&trace, &[-slope * scale], &mut grads)?;
        }
        Ok((grads, objective))
    }

    /// One actor ascent step against `critic`; returns the pre-step objective.
    pub fn actor_step(
        &mut self,
        states: &[&[f64]],
        critic: &dyn ActionValue,
    ) -> Result<f64, AgentError> {
        let (grads, objective) = self.actor_gradient(states, critic)?;
        self.actor_opt.apply(&mut self.actor, &grads)?;
        Ok(objective)
    }

    /// Critic step on `½·mean(δ²)` with
    /// `y = r + γ·Q'(s', μ'(s'))` (no bootstrap on terminal transitions).
    /// Returns `mean(δ²)` before the step.
    pub fn critic_step(&mut self, batch: &[&Transition]) -> Result<f64, AgentError> {
        if batch.is_empty() {
            return Err(AgentError::EmptyBuffer);
        }
        let scale = 1.0 / batch.len() as f64;
        let mut grads = self.critic.zero_gradients();
        let mut loss = 0.0;
        for t in batch {
            check_dim(self.state_dim(), &t.state.features)?;
            check_dim(self.state_dim(), &t.next_state.features)?;
            let a = self.unit_of(t.action)?;
            let mut y = t.reward;
            if !t.done && self.config.gamma > 0.0 {
                let a_next = self.actor_target.forward(&t.next_state.features)?[0];
                let q_next = self
                    .critic_target
                    .forward(&critic_input(&t.next_state.features, a_next))?[0];
                y += self.config.gamma * q_next;
            }
            let trace = self
                .critic
                .forward_trace(&critic_input(&t.state.features, a))?;
            let delta = y - trace.output()[0];
            loss += delta * delta * scale;
            self.critic
                .accumulate_backward(&trace, &[-delta * scale], &mut grads)?;
        }
        self.critic_opt.apply(&mut self.critic, &grads)?;
        Ok(loss)
    }

    /// Critic step, actor step, then the target update when due.
    /// Returns `(critic loss, actor objective)`.
    pub fn train_on_batch(&mut self, batch: &[&Transition]) -> Result<(f64, f64), AgentError> {
        let critic_loss = self.critic_step(batch)?;
        let states: Vec<&[f64]> = batch.iter().map(|t| t.state.features.as_slice()).collect();
        let critic = self.critic.clone();
        let objective = self.actor_step(&states, &critic)?;
        self.steps += 1;
        if self.steps.is_multiple_of(self.config.target_interval) {
            soft_update(&mut self.actor_target, &self.actor, self.config.target_rho)?;
            soft_update(
                &mut self.critic_target,
                &self.critic,
                self.config.target_rho,
            )?;
        }
        Ok((critic_loss, objective))
    }

    pub fn train_step(
        &mut self,
        buffer: &ReplayBuffer,
        batch_size: usize,
        rng: &mut SimRng,
    ) -> Result<(f64, f64), AgentError> {
        let batch = buffer.sample(batch_size, rng)?;
        self.train_on_batch(&batch)
    }
}

impl PricingPolicy for DdpgAgent {
    fn decide(
        &self,
        state: &MarketState,
        space: &ActionSpaceSpec,
    ) -> Result<PricingAction, AgentError> {
        if space.kind != ActionKind::Continuous {
            return Err(AgentError::KindMismatch);
        }
        Ok(PricingAction::Price(
            space.from_unit(self.unit_action(&state.features)?),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::Dense;
    use crate::rng::SeedStream;
    use rand::Rng;

    /// `Q(s, a) = −(a − target)²`.
    struct Bowl {
        target: f64,
    }

    impl ActionValue for Bowl {
        fn value_and_slope(&self, _: &[f64], a: f64) -> Result<(f64, f64), AgentError> {
            Ok((-(a - self.target).powi(2), -2.0 * (a - self.target)))
        }
    }

    fn space() -> ActionSpaceSpec {
        ActionSpaceSpec::continuous(8.0, 10.0).unwrap()
    }

    fn agent(seed: u64, config: DdpgConfig) -> DdpgAgent {
        let mut rng = SeedStream::new(seed).rng();
        DdpgAgent::new(3, space(), config, &mut rng).unwrap()
    }

    fn zero_actor(agent: &mut DdpgAgent) {
        for p in agent.actor_mut().params_mut() {
            *p = 0.0;
        }
    }

    #[test]
    fn zero_output_is_midpoint() {
        let mut a = agent(1, DdpgConfig::default());
        zero_actor(&mut a);
        let s = MarketState {
            features: vec![0.5; 3],
            period: 1,
        };
        let mut rng = SeedStream::new(0).rng();
        assert_eq!(
            a.act(&s, false, &mut rng).unwrap(),
            PricingAction::Price(9.0)
        );
    }

    #[test]
    fn noisy_prices_stay_in_bounds() {
        let a = agent(
            2,
            DdpgConfig {
                sigma: 5.0,
                ..DdpgConfig::default()
            },
        );
        let mut rng = SeedStream::new(3).rng();
        for _ in 0..2_000 {
            let s = MarketState {
                features: (0..3).map(|_| rng.random()).collect(),
                period: 1,
            };
            match a.act(&s, true, &mut rng).unwrap() {
                PricingAction::Price(p) => assert!((8.0..=10.0).contains(&p)),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn zero_sigma_equals_greedy() {
        let a = agent(
            4,
            DdpgConfig {
                sigma: 0.0,
                ..DdpgConfig::default()
            },
        );
        let s = MarketState {
            features: vec![0.1, 0.9, 0.4],
            period: 1,
        };
        let mut rng = SeedStream::new(0).rng();
        assert_eq!(
            a.act(&s, true, &mut rng).unwrap(),
            a.act(&s, false, &mut rng).unwrap()
        );
    }

    #[test]
    fn actor_climbs_frozen_bowl() {
        let target = 0.4;
        let mut a = agent(5, DdpgConfig::default());
        let states: Vec<Vec<f64>> = (0..8)
            .map(|i| vec![f64::from(i) / 8.0, 0.5, 1.0 - f64::from(i) / 8.0])
            .collect();
        let refs: Vec<&[f64]> = states.iter().map(Vec::as_slice).collect();
        for _ in 0..3_000 {
            a.actor_step(&refs, &Bowl { target }).unwrap();
        }
        for s in &refs {
            let u = a.unit_action(s).unwrap();
            assert!((u - target).abs() < 1e-2, "μ = {u}");
        }
    }

    #[test]
    fn actor_gradient_matches_finite_differences() {
        let root = SeedStream::new(40);
        for case in 0..5 {
            let mut rng = root.child(case).rng();
            let config = DdpgConfig {
                hidden: vec![6, 5],
                out_init: 1.0,
                ..DdpgConfig::default()
            };
            let a = DdpgAgent::new(3, space(), config, &mut rng).unwrap();
            let states: Vec<Vec<f64>> = (0..4)
                .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let refs: Vec<&[f64]> = states.iter().map(Vec::as_slice).collect();
            let critic = a.critic().clone();
            let (g, _) = a.actor_gradient(&refs, &critic).unwrap();
            let objective = |actor: &Network| -> f64 {
                refs.iter()
                    .map(|s| {
                        let u = actor.forward(s).unwrap()[0];
                        critic.forward(&critic_input(s, u)).unwrap()[0]
                    })
                    .sum::<f64>()
                    / refs.len() as f64
            };
            let h = 1e-5;
            let mut probe = a.actor().clone();
            let numeric: Vec<f64> = (0..probe.num_params())
                .map(|i| {
                    let orig = *probe.params_mut().nth(i).unwrap();
                    *probe.params_mut().nth(i).unwrap() = orig + h;
                    let up = objective(&probe);
                    *probe.params_mut().nth(i).unwrap() = orig - h;
                    let down = objective(&probe);
                    *probe.params_mut().nth(i).unwrap() = orig;
                    // descent gradient of −objective
                    -(up - down) / (2.0 * h)
                })
                .collect();
            let analytic: Vec<f64> = g.values().copied().collect();
            let diff = analytic
                .iter()
                .zip(&numeric)
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt();
            let norm = analytic.iter().map(|x| x * x).sum::<f64>().sqrt()
                + numeric.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(
                diff / norm.max(1e-12) < 1e-3,
                "case {case}: {}",
                diff / norm
            );
        }
    }

    #[test]
    fn critic_fixed_point_without_discount() {
        let mut a = agent(
            6,
            DdpgConfig {
                gamma: 0.0,
                ..DdpgConfig::default()
            },
        );
        let s = MarketState {
            features: vec![0.3, 0.6, 0.9],
            period: 1,
        };
        let t = Transition {
            state: s.clone(),
            action: PricingAction::Price(9.5),
            reward: 0.7,
            next_state: s.clone(),
            done: false,
        };
        for _ in 0..2_000 {
            a.critic_step(&[&t]).unwrap();
        }
        let (q, _) = a
            .critic()
            .value_and_slope(&s.features, space().to_unit(9.5))
            .unwrap();
        assert!((q - 0.7).abs() < 1e-2, "Q = {q}");
    }

    #[test]
    fn targets_follow_soft_updates() {
        let mut a = agent(
            7,
            DdpgConfig {
                target_rho: 1.0,
                target_interval: 3,
                ..DdpgConfig::default()
            },
        );
        let s = MarketState {
            features: vec![0.3, 0.6, 0.9],
            period: 1,
        };
        let t = Transition {
            state: s.clone(),
            action: PricingAction::Price(8.5),
            reward: 0.2,
            next_state: s,
            done: false,
        };
        let frozen = a.actor_target().clone();
        a.train_on_batch(&[&t]).unwrap();
        a.train_on_batch(&[&t]).unwrap();
        assert_eq!(a.actor_target(), &frozen);
        a.train_on_batch(&[&t]).unwrap();
        assert_eq!(a.actor_target(), a.actor());
        assert_eq!(a.critic_target(), a.critic());
    }

    #[test]
    fn rejects_mismatched_parts() {
        let mut rng = SeedStream::new(0).rng();
        assert!(DdpgAgent::new(
            3,
            ActionSpaceSpec::discrete(1.0, 2.0, 4).unwrap(),
            DdpgConfig::default(),
            &mut rng
        )
        .is_err());
        let actor = Network::new(vec![Dense::zeros(3, 1, Activation::Tanh, true)]).unwrap();
        let critic = Network::new(vec![Dense::zeros(3, 1, Activation::Identity, true)]).unwrap();
        assert!(DdpgAgent::with_networks(actor, critic, space(), DdpgConfig::default()).is_err());
        let mut a = agent(1, DdpgConfig::default());
        let s = MarketState {
            features: vec![0.0; 3],
            period: 1,
        };
        let t = Transition {
            state: s.clone(),
            action: PricingAction::Bucket(2),
            reward: 0.0,
            next_state: s,
            done: true,
        };
        assert!(matches!(
            a.critic_step(&[&t]),
            Err(AgentError::KindMismatch)
        ));
    }
}
