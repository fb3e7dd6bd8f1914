use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{
    create_file, ensure_dir, AgentConfig, AgentKind, ExperimentError, ScenarioConfig, SweepAxis,
};
use crate::agents::{
    load_checkpoint, save_checkpoint, AgentError, Checkpoint, DdpgAgent, DqnAgent, PricingPolicy,
};
use crate::eval::{
    evaluate_pooled, group_records, pretrain, DemonstrationSet, EvalConfig, EvalTally,
    PretrainReport,
};
use crate::mdp::transition::load_records;
use crate::mdp::{
    ActionSpaceSpec, MarketState, PricingAction, RewardKind, StateNormalizer, TransitionRecord,
};
use crate::rng::{Purpose, SeedStream, SimRng};

pub const SWEEP_COLUMNS: [&str; 11] = [
    "setting",
    "agent",
    "reward",
    "gamma",
    "buckets",
    "repetition",
    "r_pi",
    "matched",
    "visited",
    "pretrain_steps",
    "final_loss",
];

/// Either agent, pooled across products.
#[derive(Debug, Clone)]
pub enum PricingAgent {
    Dqn(DqnAgent),
    Ddpg(DdpgAgent),
}

impl PricingAgent {
    pub fn kind(&self) -> AgentKind {
        match self {
            PricingAgent::Dqn(_) => AgentKind::Dqn,
            PricingAgent::Ddpg(_) => AgentKind::Ddpg,
        }
    }

    /// Action space with the agent's kind; bounds are placeholders.
    pub fn template(&self) -> &ActionSpaceSpec {
        match self {
            PricingAgent::Dqn(a) => a.space(),
            PricingAgent::Ddpg(a) => a.space(),
        }
    }

    pub fn pretrain(
        &mut self,
        sets: &[DemonstrationSet],
        epochs: usize,
        rng: &mut SimRng,
    ) -> Result<PretrainReport, ExperimentError> {
        Ok(match self {
            PricingAgent::Dqn(a) => pretrain(a, sets, epochs, rng)?,
            PricingAgent::Ddpg(a) => pretrain(a, sets, epochs, rng)?,
        })
    }

    /// Greedy price for a product priced in `[p_min, p_max]`.
    pub fn price(
        &self,
        state: &MarketState,
        p_min: f64,
        p_max: f64,
    ) -> Result<f64, ExperimentError> {
        let space = self.template().with_bounds(p_min, p_max)?;
        let action = self.decide(state, &space)?;
        Ok(space.price_of(action)?)
    }

    pub fn save(&self, dir: &Path) -> Result<(), ExperimentError> {
        let checkpoint = match self {
            PricingAgent::Dqn(a) => Checkpoint::Dqn(a.clone()),
            PricingAgent::Ddpg(a) => Checkpoint::Ddpg(a.clone()),
        };
        Ok(save_checkpoint(dir, &checkpoint)?)
    }

    pub fn load(dir: &Path) -> Result<Self, ExperimentError> {
        Ok(match load_checkpoint(dir)? {
            Checkpoint::Dqn(a) => PricingAgent::Dqn(a),
            Checkpoint::Ddpg(a) => PricingAgent::Ddpg(a),
        })
    }
}

impl PricingPolicy for PricingAgent {
    fn decide(
        &self,
        state: &MarketState,
        space: &ActionSpaceSpec,
    ) -> Result<PricingAction, AgentError> {
        match self {
            PricingAgent::Dqn(a) => a.decide(state, space),
            PricingAgent::Ddpg(a) => a.decide(state, space),
        }
    }
}

/// Fresh agent of `kind` for `state_dim` features.
pub fn build_agent(
    cfg: &ScenarioConfig,
    kind: AgentKind,
    agent: &AgentConfig,
    state_dim: usize,
    rng: &mut SimRng,
) -> Result<PricingAgent, ExperimentError> {
    let template = cfg.action_template(kind, agent.buckets)?;
    Ok(match kind {
        AgentKind::Dqn => {
            PricingAgent::Dqn(DqnAgent::new(state_dim, template, agent.dqn_config(), rng)?)
        }
        AgentKind::Ddpg => PricingAgent::Ddpg(DdpgAgent::new(
            state_dim,
            template,
            agent.ddpg_config(),
            rng,
        )?),
    })
}

/// Per-product demonstration sets for training and for scoring, with states
/// normalized by bounds fitted on each product's pre-training slice.
#[derive(Debug, Clone)]
pub struct PreparedSets {
    pub train: Vec<DemonstrationSet>,
    pub eval: Vec<DemonstrationSet>,
    /// One per product, aligned with `train`.
    pub normalizers: Vec<StateNormalizer>,
}

impl PreparedSets {
    pub fn state_dim(&self) -> usize {
        self.train
            .first()
            .and_then(|s| s.transitions().next())
            .map_or(0, |t| t.state.dim())
    }
}

pub fn prepare_sets(
    records: &[TransitionRecord],
    train_reward: RewardKind,
    eval_reward: RewardKind,
    split: usize,
) -> Result<PreparedSets, ExperimentError> {
    let train_raw = group_records(records.to_vec(), train_reward, split)?;
    let eval_raw = group_records(records.to_vec(), eval_reward, split)?;
    let mut train = Vec::with_capacity(train_raw.len());
    let mut eval = Vec::with_capacity(eval_raw.len());
    let mut normalizers = Vec::with_capacity(train_raw.len());
    for (t, e) in train_raw.iter().zip(&eval_raw) {
        let last_pretrain = t.pretrain_slice().last().map_or(0, |r| r.period);
        let first_eval = e.eval_slice().first().map_or(u32::MAX, |r| r.period);
        if first_eval <= last_pretrain {
            return Err(ExperimentError::Invalid {
                field: "demos.eval_reward".into(),
                reason: format!(
                    "product {}: evaluation would reuse pre-training period {first_eval} under {eval_reward}",
                    t.product
                ),
            });
        }
        let norm = t.fit_normalizer()?;
        train.push(t.normalized(&norm)?);
        eval.push(e.normalized(&norm)?);
        normalizers.push(norm);
    }
    Ok(PreparedSets {
        train,
        eval,
        normalizers,
    })
}

/// One point on the sweep axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Setting {
    pub label: String,
    pub kind: AgentKind,
    pub reward: RewardKind,
    pub gamma: f64,
    pub buckets: u32,
}

impl Setting {
    fn agent_config(&self, base: &AgentConfig) -> AgentConfig {
        AgentConfig {
            kind: self.kind,
            reward: self.reward,
            gamma: self.gamma,
            buckets: self.buckets,
            ..base.clone()
        }
    }
}

/// Settings along the configured axis, in config order. Parameters off the
/// axis come from `[agent]`.
pub fn sweep_settings(cfg: &ScenarioConfig) -> Vec<Setting> {
    let a = &cfg.agent;
    let s = &cfg.sweep;
    let make =
        |kind: AgentKind, reward: RewardKind, gamma: f64, buckets: u32, label: String| Setting {
            label,
            kind,
            reward,
            gamma,
            buckets,
        };
    match s.axis {
        SweepAxis::Gamma => s
            .gamma
            .iter()
            .map(|&g| make(a.kind, a.reward, g, a.buckets, format!("gamma={g}")))
            .collect(),
        SweepAxis::Buckets => s
            .buckets
            .iter()
            .map(|&k| make(a.kind, a.reward, a.gamma, k, format!("K={k}")))
            .collect(),
        SweepAxis::Reward => s
            .rewards
            .iter()
            .flat_map(|&r| {
                s.gamma
                    .iter()
                    .map(move |&g| make(a.kind, r, g, a.buckets, format!("reward={r} gamma={g}")))
            })
            .collect(),
        SweepAxis::Agent => s
            .agents
            .iter()
            .map(|&k| {
                make(
                    k,
                    a.reward,
                    a.gamma,
                    a.buckets,
                    format!("agent={}", k.name()),
                )
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub setting: String,
    pub agent: AgentKind,
    pub reward: RewardKind,
    pub gamma: f64,
    pub buckets: u32,
    pub repetition: u32,
    pub tally: EvalTally,
    pub pretrain: PretrainReport,
}

impl SweepRow {
    pub fn r_pi(&self) -> f64 {
        self.tally.value()
    }
}

/// Agent seed streams for repetition `rep`; identical across settings.
pub(crate) fn agent_streams(cfg: &ScenarioConfig, rep: u32) -> (SimRng, SimRng) {
    let root = SeedStream::new(cfg.seed).child(0xa9e7);
    (
        root.purpose(Purpose::Init).child(u64::from(rep)).rng(),
        root.purpose(Purpose::Replay).child(u64::from(rep)).rng(),
    )
}

/// Pre-train one agent per setting and repetition on the first `D` tuples
/// of every product and score it on the rest. Settings run in parallel;
/// rows come back in setting order, repetitions innermost.
pub fn run_sweep(
    cfg: &ScenarioConfig,
    records: &[TransitionRecord],
) -> Result<Vec<SweepRow>, ExperimentError> {
    let settings = sweep_settings(cfg);
    let eval_reward = cfg.eval_reward();
    let mut rewards: Vec<RewardKind> = settings.iter().map(|s| s.reward).collect();
    rewards.dedup();
    let mut prepared: Vec<(RewardKind, PreparedSets)> = Vec::new();
    for r in rewards {
        if !prepared.iter().any(|(k, _)| *k == r) {
            prepared.push((r, prepare_sets(records, r, eval_reward, cfg.demos.split)?));
        }
    }
    let eval_cfg = EvalConfig::new(cfg.demos.epsilon_match)?;
    let jobs: Vec<(&Setting, u32)> = settings
        .iter()
        .flat_map(|s| (0..cfg.sweep.repetitions).map(move |rep| (s, rep)))
        .collect();
    jobs.par_iter()
        .map(|&(setting, rep)| {
            let sets = &prepared
                .iter()
                .find(|(k, _)| *k == setting.reward)
                .expect("prepared above")
                .1;
            let (mut init, mut replay) = agent_streams(cfg, rep);
            let agent_cfg = setting.agent_config(&cfg.agent);
            let mut agent =
                build_agent(cfg, setting.kind, &agent_cfg, sets.state_dim(), &mut init)?;
            let report = agent.pretrain(&sets.train, agent_cfg.epochs, &mut replay)?;
            let tally = evaluate_pooled(&agent, &sets.eval, agent.template(), &eval_cfg)?;
            Ok(SweepRow {
                setting: setting.label.clone(),
                agent: setting.kind,
                reward: setting.reward,
                gamma: setting.gamma,
                buckets: setting.buckets,
                repetition: rep,
                tally,
                pretrain: report,
            })
        })
        .collect()
}

/// CSV with [`SWEEP_COLUMNS`].
pub fn write_sweep_csv<W: Write>(writer: W, rows: &[SweepRow]) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.setting.clone(),
            r.agent.name().to_string(),
            r.reward.to_string(),
            r.gamma.to_string(),
            r.buckets.to_string(),
            r.repetition.to_string(),
            r.r_pi().to_string(),
            r.tally.matched.to_string(),
            r.tally.visited.to_string(),
            r.pretrain.steps.to_string(),
            r.pretrain.last_loss.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Logged demonstrations from `path`, or freshly simulated from the config.
pub(crate) fn demonstrations(
    cfg: &ScenarioConfig,
    path: Option<&Path>,
) -> Result<Vec<TransitionRecord>, ExperimentError> {
    match path {
        Some(p) => load_records(p).map_err(|source| {
            crate::eval::EvalError::File {
                path: p.to_path_buf(),
                source,
            }
            .into()
        }),
        None => {
            let streams = SeedStream::new(cfg.seed);
            let profiles = super::build_products(cfg, &streams)?;
            super::simulate_demonstrations(&profiles, cfg, &streams)
        }
    }
}

/// Run the sweep and write `sweep.csv`; returns the rows and the file path.
pub fn sweep_to_dir(
    cfg: &ScenarioConfig,
    demos: Option<&Path>,
) -> Result<(Vec<SweepRow>, PathBuf), ExperimentError> {
    let records = demonstrations(cfg, demos)?;
    let rows = run_sweep(cfg, &records)?;
    ensure_dir(&cfg.out_dir)?;
    let path = cfg.out_dir.join("sweep.csv");
    write_sweep_csv(create_file(&path)?, &rows)?;
    Ok((rows, path))
}

#[derive(Debug, Clone)]
pub struct EvaluateOutput {
    pub agent: AgentKind,
    pub tally: EvalTally,
    /// `None` when the agent came from a checkpoint.
    pub pretrain: Option<PretrainReport>,
    /// Where the (pre-trained) agent was saved.
    pub checkpoint: Option<PathBuf>,
}

/// Score one agent with the offline evaluator. The agent is loaded from
/// `checkpoint` or pre-trained from `[agent]` and saved under
/// `<out_dir>/agent`.
pub fn run_evaluate(
    cfg: &ScenarioConfig,
    demos: Option<&Path>,
    checkpoint: Option<&Path>,
) -> Result<EvaluateOutput, ExperimentError> {
    let records = demonstrations(cfg, demos)?;
    let sets = prepare_sets(
        &records,
        cfg.agent.reward,
        cfg.eval_reward(),
        cfg.demos.split,
    )?;
    let eval_cfg = EvalConfig::new(cfg.demos.epsilon_match)?;
    let (agent, pretrain, saved) = match checkpoint {
        Some(dir) => (PricingAgent::load(dir)?, None, None),
        None => {
            let (mut init, mut replay) = agent_streams(cfg, 0);
            let mut agent =
                build_agent(cfg, cfg.agent.kind, &cfg.agent, sets.state_dim(), &mut init)?;
            let report = agent.pretrain(&sets.train, cfg.agent.epochs, &mut replay)?;
            let dir = cfg.out_dir.join("agent");
            ensure_dir(&dir)?;
            agent.save(&dir)?;
            (agent, Some(report), Some(dir))
        }
    };
    let tally = evaluate_pooled(&agent, &sets.eval, agent.template(), &eval_cfg)?;
    Ok(EvaluateOutput {
        agent: agent.kind(),
        tally,
        pretrain,
        checkpoint: saved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{build_products, simulate_demonstrations};

    fn quick(kind: AgentKind) -> ScenarioConfig {
        let mut cfg = ScenarioConfig {
            seed: 21,
            ..ScenarioConfig::default()
        };
        cfg.products.count = 6;
        cfg.demos.periods = 30;
        cfg.demos.split = 15;
        cfg.agent.kind = kind;
        cfg.agent.hidden = vec![8];
        cfg.agent.epochs = 2;
        cfg.agent.batch_size = 16;
        cfg
    }

    fn records(cfg: &ScenarioConfig) -> Vec<TransitionRecord> {
        let streams = SeedStream::new(cfg.seed);
        simulate_demonstrations(&build_products(cfg, &streams).unwrap(), cfg, &streams).unwrap()
    }

    #[test]
    fn bucket_axis_gives_one_row_per_k() {
        let mut cfg = quick(AgentKind::Dqn);
        cfg.sweep.axis = SweepAxis::Buckets;
        let rows = run_sweep(&cfg, &records(&cfg)).unwrap();
        assert_eq!(
            rows.iter().map(|r| r.buckets).collect::<Vec<_>>(),
            vec![10, 20, 50, 100, 200]
        );
        for r in &rows {
            assert_eq!(r.tally.visited, 6 * (29 - 15));
            assert!(r.tally.matched <= r.tally.visited);
        }
    }

    #[test]
    fn gamma_axis_and_repetitions() {
        let mut cfg = quick(AgentKind::Ddpg);
        cfg.sweep.gamma = vec![0.5, 0.9];
        cfg.sweep.repetitions = 2;
        let rows = run_sweep(&cfg, &records(&cfg)).unwrap();
        let keys: Vec<(String, u32)> = rows
            .iter()
            .map(|r| (r.setting.clone(), r.repetition))
            .collect();
        assert_eq!(
            keys,
            vec![
                ("gamma=0.5".into(), 0),
                ("gamma=0.5".into(), 1),
                ("gamma=0.9".into(), 0),
                ("gamma=0.9".into(), 1)
            ]
        );
    }

    #[test]
    fn reward_axis_crosses_gamma() {
        let mut cfg = quick(AgentKind::Dqn);
        cfg.sweep.axis = SweepAxis::Reward;
        cfg.sweep.gamma = vec![0.5, 0.9, 0.99];
        assert_eq!(sweep_settings(&cfg).len(), 6);
        cfg.sweep.axis = SweepAxis::Agent;
        let kinds: Vec<AgentKind> = sweep_settings(&cfg).iter().map(|s| s.kind).collect();
        assert_eq!(kinds, vec![AgentKind::Dqn, AgentKind::Ddpg]);
    }

    #[test]
    fn csv_is_reproducible() {
        let cfg = quick(AgentKind::Dqn);
        let recs = records(&cfg);
        let write = || {
            let mut buf = Vec::new();
            write_sweep_csv(&mut buf, &run_sweep(&cfg, &recs).unwrap()).unwrap();
            buf
        };
        let a = write();
        assert_eq!(a, write());
        let text = String::from_utf8(a).unwrap();
        assert_eq!(text.lines().next().unwrap(), SWEEP_COLUMNS.join(","));
        assert_eq!(text.lines().count(), 1 + cfg.sweep.gamma.len());
    }

    #[test]
    fn eval_sets_use_the_yardstick_reward() {
        let cfg = quick(AgentKind::Dqn);
        let sets = prepare_sets(
            &records(&cfg),
            RewardKind::Drcr { tau: 1 },
            RewardKind::Rcr,
            15,
        )
        .unwrap();
        let r = &sets.eval[0].eval_slice()[0];
        assert_eq!(r.transition.reward, r.outcome.revenue_rate());
        let t = &sets.train[0].pretrain_slice()[1];
        let prev = t.previous.unwrap();
        assert_eq!(
            t.transition.reward,
            t.outcome.revenue_rate() - prev.revenue_rate()
        );
        assert!(sets.train.iter().flat_map(|s| s.transitions()).all(|t| t
            .state
            .features
            .iter()
            .all(|v| (0.0..=1.0).contains(v))));
    }

    #[test]
    fn evaluate_saves_and_reloads_the_agent() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = quick(AgentKind::Dqn);
        cfg.out_dir = dir.path().to_path_buf();
        let trained = run_evaluate(&cfg, None, None).unwrap();
        let saved = trained.checkpoint.clone().unwrap();
        let reloaded = run_evaluate(&cfg, None, Some(&saved)).unwrap();
        assert_eq!(trained.tally, reloaded.tally);
        assert!(reloaded.pretrain.is_none());
    }
}
