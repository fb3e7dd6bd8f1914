use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_dim, check_unit_interval, AgentError, PricingPolicy, ReplayBuffer};
use crate::mdp::{ActionKind, ActionSpaceSpec, MarketState, PricingAction, Transition};
use crate::neural::{copy_into, Activation, Dense, Network, Optimizer, OptimizerKind};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DqnConfig {
    /// Discount factor.
    pub gamma: f64,
    /// Q-iteration rate. Drives the optimizer only in tabular mode.
    pub alpha: f64,
    /// Target network sync interval, in train steps.
    pub target_sync: u64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Train steps over which epsilon decays linearly.
    pub epsilon_decay_steps: u64,
    pub optimizer: OptimizerKind,
    pub hidden: Vec<usize>,
    pub batch_size: usize,
    pub buffer_capacity: usize,
}

impl Default for DqnConfig {
    fn default() -> Self {
        DqnConfig {
            gamma: 0.99,
            alpha: 0.01,
            target_sync: 100,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_steps: 1_000,
            optimizer: OptimizerKind::adam(1e-3),
            hidden: vec![64, 64],
            batch_size: 64,
            buffer_capacity: 100_000,
        }
    }
}

impl DqnConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        check_unit_interval("gamma", self.gamma)?;
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(AgentError::Config(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.target_sync == 0 {
            return Err(AgentError::Config("target_sync must be >= 1".into()));
        }
        check_unit_interval("epsilon_start", self.epsilon_start)?;
        check_unit_interval("epsilon_end", self.epsilon_end)?;
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

    /// Exploration rate after `steps` train steps.
    pub fn epsilon_at(&self, steps: u64) -> f64 {
        if self.epsilon_decay_steps == 0 || steps >= self.epsilon_decay_steps {
            return self.epsilon_end;
        }
        let frac = steps as f64 / self.epsilon_decay_steps as f64;
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
    }
}

/// Deep Q-network over `K` price buckets. Output `k - 1` of the network is
/// `Q(s, bucket k)`.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    config: DqnConfig,
    space: ActionSpaceSpec,
    q_net: Network,
    q_target: Network,
    optimizer: Optimizer,
    steps: u64,
}

impl DqnAgent {
    pub fn new(
        state_dim: usize,
        space: ActionSpaceSpec,
        config: DqnConfig,
        rng: &mut SimRng,
    ) -> Result<Self, AgentError> {
        let k = discrete_buckets(&space)?;
        let q_net = Network::mlp(
            state_dim,
            &config.hidden,
            k as usize,
            Activation::Relu,
            Activation::Identity,
            0.1,
            rng,
        );
        Self::with_network(q_net, space, config)
    }

    /// Wrap an existing Q-network; the target starts as an exact copy.
    pub fn with_network(
        q_net: Network,
        space: ActionSpaceSpec,
        config: DqnConfig,
    ) -> Result<Self, AgentError> {
        config.validate()?;
        let k = discrete_buckets(&space)?;
        if q_net.out_dim() != k as usize {
            return Err(AgentError::Config(format!(
                "Q-network has {} outputs for {k} buckets",
                q_net.out_dim()
            )));
        }
        let optimizer = Optimizer::new(config.optimizer)?;
        Ok(DqnAgent {
            q_target: q_net.clone(),
            q_net,
            optimizer,
            config,
            space,
            steps: 0,
        })
    }

    /// Tabular form: one-hot states, a bias-free linear layer initialised
    /// to zero and plain SGD at rate `alpha`. A single-transition train step
    /// is then exactly one Q-iteration update.
    pub fn tabular(
        n_states: usize,
        space: ActionSpaceSpec,
        gamma: f64,
        alpha: f64,
        target_sync: u64,
    ) -> Result<Self, AgentError> {
        let k = discrete_buckets(&space)?;
        let q_net = Network::new(vec![Dense::zeros(
            n_states,
            k as usize,
            Activation::Identity,
            false,
        )])?;
        let config = DqnConfig {
            gamma,
            alpha,
            target_sync,
            optimizer: OptimizerKind::Sgd { lr: alpha },
            hidden: Vec::new(),
            batch_size: 1,
            ..DqnConfig::default()
        };
        Self::with_network(q_net, space, config)
    }

    pub(crate) fn restore(mut self, q_target: Network, steps: u64) -> Result<Self, AgentError> {
        if !q_target.same_architecture(&self.q_net) {
            return Err(crate::neural::NeuralError::ArchitectureMismatch.into());
        }
        self.q_target = q_target;
        self.steps = steps;
        Ok(self)
    }

    pub fn config(&self) -> &DqnConfig {
        &self.config
    }

    pub fn space(&self) -> &ActionSpaceSpec {
        &self.space
    }

    pub fn buckets(&self) -> u32 {
        self.q_net.out_dim() as u32
    }

    pub fn state_dim(&self) -> usize {
        self.q_net.in_dim()
    }

    pub fn q_net(&self) -> &Network {
        &self.q_net
    }

    /// Mutable access to the online network. The target is left untouched.
    pub fn q_net_mut(&mut self) -> &mut Network {
        &mut self.q_net
    }

    pub fn q_target(&self) -> &Network {
        &self.q_target
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn epsilon(&self) -> f64 {
        self.config.epsilon_at(self.steps)
    }

    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>, AgentError> {
        check_dim(self.state_dim(), state)?;
        Ok(self.q_net.forward(state)?)
    }

    /// Greedy bucket; ties go to the lowest index.
    pub fn greedy(&self, state: &[f64]) -> Result<u32, AgentError> {
        Ok(argmax(&self.q_values(state)?) + 1)
    }

    /// Bucket choice, epsilon-greedy when `explore` is set.
    pub fn act(
        &self,
        state: &MarketState,
        explore: bool,
        rng: &mut SimRng,
    ) -> Result<PricingAction, AgentError> {
        check_dim(self.state_dim(), &state.features)?;
        if explore && rng.random::<f64>() < self.epsilon() {
            return Ok(PricingAction::Bucket(rng.random_range(1..=self.buckets())));
        }
        self.greedy(&state.features).map(PricingAction::Bucket)
    }

    fn bucket_of(&self, action: PricingAction) -> Result<usize, AgentError> {
        match action {
            PricingAction::Bucket(b) if (1..=self.buckets()).contains(&b) => Ok(b as usize - 1),
            PricingAction::Bucket(b) => Err(crate::mdp::MdpError::BucketOutOfRange {
                bucket: b,
                buckets: self.buckets(),
            }
            .into()),
            PricingAction::Price(_) => Err(AgentError::KindMismatch),
        }
    }

    /// One gradient step on `½·mean(δ²)` with `δ = y − Q(s, a)` and
    /// `y = r + γ·max_a' Q_target(s', a')` (no bootstrap on terminal
    /// transitions). Returns the batch `mean(δ²)` before the step.
    pub fn train_on_batch(&mut self, batch: &[&Transition]) -> Result<f64, AgentError> {
        if batch.is_empty() {
            return Err(AgentError::EmptyBuffer);
        }
        let k = self.buckets() as usize;
        let scale = 1.0 / batch.len() as f64;
        let mut grads = self.q_net.zero_gradients();
        let mut loss = 0.0;
        let mut upstream = vec![0.0; k];
        for t in batch {
            check_dim(self.state_dim(), &t.state.features)?;
            check_dim(self.state_dim(), &t.next_state.features)?;
            let a = self.bucket_of(t.action)?;
            let mut y = t.reward;
            if !t.done && self.config.gamma > 0.0 {
                let next = self.q_target.forward(&t.next_state.features)?;
                y += self.config.gamma * next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            }
            let trace = self.q_net.forward_trace(&t.state.features)?;
            let delta = y - trace.output()[a];
            loss += delta * delta * scale;
            upstream.fill(0.0);
            upstream[a] = -delta * scale;
            self.q_net
                .accumulate_backward(&trace, &upstream, &mut grads)?;
        }
        self.optimizer.apply(&mut self.q_net, &grads)?;
        self.steps += 1;
        if self.steps.is_multiple_of(self.config.target_sync) {
            copy_into(&mut self.q_target, &self.q_net)?;
        }
        Ok(loss)
    }

    /// Sample `batch_size` transitions and train on them.
    pub fn train_step(
        &mut self,
        buffer: &ReplayBuffer,
        batch_size: usize,
        rng: &mut SimRng,
    ) -> Result<f64, AgentError> {
        let batch = buffer.sample(batch_size, rng)?;
        self.train_on_batch(&batch)
    }
}

impl PricingPolicy for DqnAgent {
    fn decide(
        &self,
        state: &MarketState,
        space: &ActionSpaceSpec,
    ) -> Result<PricingAction, AgentError> {
        if space.buckets() != Some(self.buckets()) {
            return Err(AgentError::KindMismatch);
        }
        self.greedy(&state.features).map(PricingAction::Bucket)
    }
}

fn discrete_buckets(space: &ActionSpaceSpec) -> Result<u32, AgentError> {
    match space.kind {
        ActionKind::Discrete { buckets, .. } => Ok(buckets),
        ActionKind::Continuous => Err(AgentError::KindMismatch),
    }
}

fn argmax(values: &[f64]) -> u32 {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best as u32
}
