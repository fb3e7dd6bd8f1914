//! Scenario configuration, read from TOML.
//!
//! Every section and field is optional; omitted values take the defaults
//! below. A minimal daily-pricing file:
//!
//! ```toml
//! scenario = "daily"
//! seed = 7
//! out_dir = "runs/daily"
//!
//! [agent]
//! kind = "dqn"
//! reward = "drcr:1"
//! gamma = 0.99
//! buckets = 100
//!
//! [sweep]
//! axis = "gamma"
//! gamma = [0.5, 0.7, 0.9, 0.99]
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::agents::{DdpgConfig, DqnConfig};
use crate::mdp::{ActionSpaceSpec, RewardKind};
use crate::neural::OptimizerKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Unlimited-supply Fmcg products repriced every day.
    Daily,
    /// Limited-stock luxury products cleared on a discount grid.
    Markdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Dqn,
    Ddpg,
}

impl AgentKind {
    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Dqn => "dqn",
            AgentKind::Ddpg => "ddpg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProductsConfig {
    /// Profile CSV; when set, the generator fields are ignored.
    pub file: Option<PathBuf>,
    pub count: usize,
    /// Generated products are split evenly into this many simi-groups.
    pub groups: usize,
    /// Range of the per-product traffic multiplier.
    pub uv_scale: [f64; 2],
    /// Stock per luxury product (markdown scenario).
    pub stock: u32,
}

impl Default for ProductsConfig {
    fn default() -> Self {
        ProductsConfig {
            file: None,
            count: 50,
            groups: 5,
            uv_scale: [0.5, 2.0],
            stock: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub kind: AgentKind,
    pub reward: RewardKind,
    pub gamma: f64,
    /// Q-iteration rate; used as the SGD rate only by tabular agents.
    pub alpha: f64,
    pub buckets: u32,
    pub target_sync: u64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay_steps: u64,
    pub sigma: f64,
    pub target_rho: f64,
    pub target_interval: u64,
    /// Adam rate for every network.
    pub learning_rate: f64,
    pub hidden: Vec<usize>,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Pre-training passes over the demonstrations.
    pub epochs: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            kind: AgentKind::Dqn,
            reward: RewardKind::Drcr { tau: 1 },
            gamma: 0.99,
            alpha: 0.01,
            buckets: 100,
            target_sync: 100,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_steps: 1_000,
            sigma: 0.1,
            target_rho: 0.005,
            target_interval: 1,
            learning_rate: 1e-3,
            hidden: vec![64, 64],
            batch_size: 64,
            buffer_capacity: 100_000,
            epochs: 20,
        }
    }
}

impl AgentConfig {
    pub fn dqn_config(&self) -> DqnConfig {
        DqnConfig {
            gamma: self.gamma,
            alpha: self.alpha,
            target_sync: self.target_sync,
            epsilon_start: self.epsilon_start,
            epsilon_end: self.epsilon_end,
            epsilon_decay_steps: self.epsilon_decay_steps,
            optimizer: OptimizerKind::adam(self.learning_rate),
            hidden: self.hidden.clone(),
            batch_size: self.batch_size,
            buffer_capacity: self.buffer_capacity,
        }
    }

    pub fn ddpg_config(&self) -> DdpgConfig {
        DdpgConfig {
            gamma: self.gamma,
            sigma: self.sigma,
            target_interval: self.target_interval,
            target_rho: self.target_rho,
            actor_optimizer: OptimizerKind::adam(self.learning_rate),
            critic_optimizer: OptimizerKind::adam(self.learning_rate),
            hidden: self.hidden.clone(),
            batch_size: self.batch_size,
            buffer_capacity: self.buffer_capacity,
            ..DdpgConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoConfig {
    /// `T`: simulated periods per product. The first seeds the state, so a
    /// product yields `T - 1` tuples.
    pub periods: u32,
    /// `D`: tuples per product used for pre-training.
    pub split: usize,
    pub epsilon_match: f64,
    /// Reward the evaluator scores with; defaults to the training reward.
    pub eval_reward: Option<RewardKind>,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            periods: 60,
            split: 30,
            epsilon_match: 0.05,
            eval_reward: None,
        }
    }
}

/// The rule-based "manager" behavior policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    /// A new list price is drawn at the start of every month.
    pub month_length: u32,
    /// List prices are drawn uniformly from this range of price positions.
    pub level_range: [f64; 2],
    /// Daily price noise, in price positions.
    pub jitter: f64,
    /// Days of revenue used for the expectation and the trailing check.
    pub review_window: u32,
    /// Cut the price when trailing revenue falls below this share of the
    /// month's expectation.
    pub markdown_threshold: f64,
    /// Size of one cut, in price positions.
    pub markdown_step: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            month_length: 30,
            level_range: [0.0, 1.0],
            jitter: 0.1,
            review_window: 7,
            markdown_threshold: 0.9,
            markdown_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    /// Deployment periods `N`.
    pub periods: u32,
    /// Lookback of the DID index; defaults to 365 for daily pricing and to
    /// `periods` for markdown seasons.
    pub tau_index: Option<u32>,
    pub products_per_group: usize,
    /// Agents deployed, one treatment group each; empty means every group
    /// follows the baseline.
    pub agents: Vec<AgentKind>,
    /// Extra baseline-priced groups besides the control.
    pub extra_control_groups: usize,
    /// Random coupon campaigns during deployment.
    pub coupon: bool,
    pub coupon_rate: f64,
    pub coupon_lift: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            periods: 30,
            tau_index: None,
            products_per_group: 50,
            agents: vec![AgentKind::Dqn],
            extra_control_groups: 0,
            coupon: false,
            coupon_rate: 0.1,
            coupon_lift: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Gamma,
    Buckets,
    /// Every reward crossed with every gamma.
    Reward,
    Agent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub gamma: Vec<f64>,
    pub buckets: Vec<u32>,
    pub rewards: Vec<RewardKind>,
    pub agents: Vec<AgentKind>,
    /// Independent agent seeds per setting.
    pub repetitions: u32,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            axis: SweepAxis::Gamma,
            gamma: vec![0.5, 0.6, 0.7, 0.8, 0.9, 0.99],
            buckets: vec![10, 20, 50, 100, 200],
            rewards: vec![RewardKind::Rcr, RewardKind::Drcr { tau: 1 }],
            agents: vec![AgentKind::Dqn, AgentKind::Ddpg],
            repetitions: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub products: ProductsConfig,
    pub agent: AgentConfig,
    pub demos: DemoConfig,
    pub baseline: BaselineConfig,
    pub field: FieldConfig,
    pub sweep: SweepConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: Scenario::Daily,
            seed: 0,
            out_dir: PathBuf::from("out"),
            products: ProductsConfig::default(),
            agent: AgentConfig::default(),
            demos: DemoConfig::default(),
            baseline: BaselineConfig::default(),
            field: FieldConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> ExperimentError {
    ExperimentError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn check_gamma(field: &str, g: f64) -> Result<(), ExperimentError> {
    if g > 0.0 && g <= 1.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must lie in (0, 1], got {g}")))
    }
}

fn check_rate(field: &str, v: f64) -> Result<(), ExperimentError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid(field, format!("must lie in [0, 1], got {v}")))
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Parse(e.to_string()))
    }

    /// Parse and validate; relative product files resolve against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(|e| ExperimentError::Path {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(file), Some(dir)) = (cfg.products.file.as_mut(), path.parent()) {
            if file.is_relative() {
                *file = dir.join(&*file);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reward the evaluator scores with.
    pub fn eval_reward(&self) -> RewardKind {
        self.demos.eval_reward.unwrap_or(self.agent.reward)
    }

    /// Lookback of the DID index.
    pub fn field_tau(&self) -> u32 {
        match (self.field.tau_index, self.scenario) {
            (Some(tau), _) => tau,
            (None, Scenario::Daily) => 365,
            (None, Scenario::Markdown) => self.field.periods,
        }
    }

    /// Action space template for `kind` with `buckets` discrete levels.
    /// Bounds are placeholders; products substitute their own.
    pub fn action_template(
        &self,
        kind: AgentKind,
        buckets: u32,
    ) -> Result<ActionSpaceSpec, ExperimentError> {
        Ok(match (kind, self.scenario) {
            (AgentKind::Ddpg, _) => ActionSpaceSpec::continuous(0.0, 1.0)?,
            (AgentKind::Dqn, Scenario::Daily) => ActionSpaceSpec::discrete(0.0, 1.0, buckets)?,
            (AgentKind::Dqn, Scenario::Markdown) => {
                ActionSpaceSpec::discount_grid(0.0, 1.0, buckets)?
            }
        })
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let a = &self.agent;
        check_gamma("agent.gamma", a.gamma)?;
        if !(a.alpha > 0.0 && a.alpha <= 1.0) {
            return Err(invalid(
                "agent.alpha",
                format!("must lie in (0, 1], got {}", a.alpha),
            ));
        }
        if a.buckets < 2 {
            return Err(invalid("agent.buckets", "K must be >= 2"));
        }
        if a.target_sync == 0 {
            return Err(invalid("agent.target_sync", "C must be >= 1"));
        }
        if a.target_interval == 0 {
            return Err(invalid("agent.target_interval", "must be >= 1"));
        }
        check_rate("agent.epsilon_start", a.epsilon_start)?;
        check_rate("agent.epsilon_end", a.epsilon_end)?;
        check_rate("agent.target_rho", a.target_rho)?;
        if !(a.sigma.is_finite() && a.sigma >= 0.0) {
            return Err(invalid(
                "agent.sigma",
                format!("must be >= 0, got {}", a.sigma),
            ));
        }
        if !(a.learning_rate.is_finite() && a.learning_rate > 0.0) {
            return Err(invalid("agent.learning_rate", "must be > 0"));
        }
        if a.hidden.contains(&0) {
            return Err(invalid("agent.hidden", "layer widths must be >= 1"));
        }
        if a.batch_size == 0 {
            return Err(invalid("agent.batch_size", "must be >= 1"));
        }
        if a.buffer_capacity == 0 {
            return Err(invalid("agent.buffer_capacity", "must be >= 1"));
        }

        let d = &self.demos;
        if d.periods < 3 {
            return Err(invalid("demos.periods", "T must be >= 3"));
        }
        let tuples = d.periods as usize - 1;
        if d.split == 0 || d.split >= tuples {
            return Err(invalid(
                "demos.split",
                format!("D must satisfy 0 < D < {tuples} (T - 1 tuples)"),
            ));
        }
        if !(d.epsilon_match.is_finite() && d.epsilon_match > 0.0) {
            return Err(invalid("demos.epsilon_match", "must be > 0"));
        }
        for (field, reward) in [
            ("agent.reward", Some(a.reward)),
            ("demos.eval_reward", d.eval_reward),
        ] {
            if let Some(RewardKind::Drcr { tau }) = reward {
                if tau as usize >= tuples {
                    return Err(invalid(
                        field,
                        format!("tau = {tau} leaves no tuples in {} periods", d.periods),
                    ));
                }
            }
        }

        let p = &self.products;
        match &p.file {
            Some(file) if !file.is_file() => {
                return Err(invalid(
                    "products.file",
                    format!("{} does not exist", file.display()),
                ));
            }
            Some(_) => {}
            None if p.count == 0 => return Err(invalid("products.count", "must be >= 1")),
            None if p.groups == 0 => return Err(invalid("products.groups", "must be >= 1")),
            None => {}
        }
        let [lo, hi] = p.uv_scale;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(invalid(
                "products.uv_scale",
                format!("need 0 < lo <= hi, got [{lo}, {hi}]"),
            ));
        }
        if self.scenario == Scenario::Markdown && p.stock == 0 {
            return Err(invalid(
                "products.stock",
                "markdown products need stock >= 1",
            ));
        }

        let b = &self.baseline;
        if b.month_length == 0 {
            return Err(invalid("baseline.month_length", "must be >= 1"));
        }
        if b.review_window == 0 {
            return Err(invalid("baseline.review_window", "must be >= 1"));
        }
        let [lo, hi] = b.level_range;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(invalid("baseline.level_range", "need 0 <= lo <= hi <= 1"));
        }
        if !(b.jitter.is_finite() && b.jitter >= 0.0) {
            return Err(invalid("baseline.jitter", "must be >= 0"));
        }
        check_rate("baseline.markdown_threshold", b.markdown_threshold)?;
        check_rate("baseline.markdown_step", b.markdown_step)?;

        let f = &self.field;
        if f.periods == 0 {
            return Err(invalid("field.periods", "N must be >= 1"));
        }
        if f.tau_index == Some(0) {
            return Err(invalid("field.tau_index", "must be >= 1"));
        }
        if self.field_tau() < f.periods {
            return Err(invalid(
                "field.tau_index",
                "must be >= field.periods so baseline days precede deployment",
            ));
        }
        if f.products_per_group == 0 {
            return Err(invalid("field.products_per_group", "must be >= 1"));
        }
        if 1 + f.extra_control_groups + f.agents.len() < 2 {
            return Err(invalid(
                "field.agents",
                "need at least two groups (add an agent or an extra control group)",
            ));
        }
        check_rate("field.coupon_rate", f.coupon_rate)?;
        if !(f.coupon_lift.is_finite() && (0.0..=1.0).contains(&f.coupon_lift)) {
            return Err(invalid("field.coupon_lift", "must lie in [0, 1]"));
        }

        let s = &self.sweep;
        for g in &s.gamma {
            check_gamma("sweep.gamma", *g)?;
        }
        if s.buckets.iter().any(|&k| k < 2) {
            return Err(invalid("sweep.buckets", "every K must be >= 2"));
        }
        if s.repetitions == 0 {
            return Err(invalid("sweep.repetitions", "must be >= 1"));
        }
        let empty = match s.axis {
            SweepAxis::Gamma => s.gamma.is_empty(),
            SweepAxis::Buckets => s.buckets.is_empty(),
            SweepAxis::Reward => s.rewards.is_empty() || s.gamma.is_empty(),
            SweepAxis::Agent => s.agents.is_empty(),
        };
        if empty {
            return Err(invalid("sweep.axis", "the selected axis has no settings"));
        }
        Ok(())
    }
}
