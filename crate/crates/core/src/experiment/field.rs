//! Field-experiment analog on simi-product groups.
//!
//! All groups run the baseline policy until deployment day `S`, where `S` is
//! the larger of the DID lookback and the demonstration length `T`. Each
//! agent group then gets a frozen agent, pre-trained on the first `D` of the
//! last `T` periods logged by every product, and prices the next `N` days.
//! Group 0 keeps the baseline throughout and is the DID control.

use std::collections::BTreeMap;
use std::path::PathBuf;

use super::generate::{build_products, track_records};
use super::sweep::{agent_streams, build_agent, prepare_sets, PricingAgent};
use super::{
    create_file, ensure_dir, AgentKind, ExperimentError, ManagerPolicy, ProductTrack, Scenario,
    ScenarioConfig, World,
};
use crate::eval::{did_index, write_did_csv, DidReport, ProductSeries};
use crate::market::{make_simi_groups, ProductProfile};
use crate::mdp::{MarketState, RateSample, StateNormalizer};
use crate::rng::SeedStream;

pub const FIELD_COLUMNS: [&str; 7] = [
    "group",
    "policy",
    "products",
    "rescaled_mean",
    "mean_rcr",
    "mean_price_position",
    "mean_selling_days",
];

/// What prices one group during deployment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupPolicy {
    Baseline,
    /// Copies, every day, the price position the control product of the
    /// same rank was given.
    Replay,
    Agent(AgentKind),
}

impl GroupPolicy {
    pub fn name(self) -> &'static str {
        match self {
            GroupPolicy::Baseline => "baseline",
            GroupPolicy::Replay => "replay",
            GroupPolicy::Agent(k) => k.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldGroup {
    pub group: u32,
    pub policy: GroupPolicy,
    pub products: usize,
    pub rescaled_mean: f64,
    /// Revenue per visitor over the deployment days.
    pub mean_rcr: f64,
    pub mean_price_position: f64,
    /// Per product: deployment days up to and including stock-out (or `N`).
    pub selling_days: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct FieldOutput {
    pub report: DidReport,
    pub groups: Vec<FieldGroup>,
    /// First deployment day.
    pub start: u32,
    pub tracks: Vec<ProductTrack>,
    pub did_path: PathBuf,
    pub summary_path: PathBuf,
}

fn template(cfg: &ScenarioConfig) -> Result<ProductProfile, ExperimentError> {
    if cfg.products.file.is_some() {
        let products = build_products(cfg, &SeedStream::new(cfg.seed))?;
        return products
            .into_iter()
            .next()
            .ok_or_else(|| ExperimentError::Invalid {
                field: "products.file".into(),
                reason: "no products".into(),
            });
    }
    Ok(match cfg.scenario {
        Scenario::Daily => ProductProfile::fmcg_template(),
        Scenario::Markdown => ProductProfile {
            initial_stock: cfg.products.stock,
            ..ProductProfile::luxury_template()
        },
    })
}

/// Deploy the configured agents, one treatment group each, with extra
/// baseline groups as configured.
pub fn run_field_analog(cfg: &ScenarioConfig) -> Result<FieldOutput, ExperimentError> {
    let mut plan = vec![GroupPolicy::Baseline; 1 + cfg.field.extra_control_groups];
    plan.extend(cfg.field.agents.iter().map(|&k| GroupPolicy::Agent(k)));
    run_field_with(cfg, &plan)
}

/// Run the field analog with `plan[g]` pricing group `g`. Group 0 is the
/// DID control and must be [`GroupPolicy::Baseline`].
pub fn run_field_with(
    cfg: &ScenarioConfig,
    plan: &[GroupPolicy],
) -> Result<FieldOutput, ExperimentError> {
    if plan.len() < 2 {
        return Err(ExperimentError::Invalid {
            field: "field.agents".into(),
            reason: "need at least two groups".into(),
        });
    }
    if plan[0] != GroupPolicy::Baseline {
        return Err(ExperimentError::Invalid {
            field: "field".into(),
            reason: "group 0 must be the baseline control".into(),
        });
    }
    let f = &cfg.field;
    let tau = cfg.field_tau();
    let t_demo = cfg.demos.periods;
    let start = tau.max(t_demo) + 1;
    let horizon = start + f.periods - 1;
    let streams = SeedStream::new(cfg.seed).child(0xf1e1d);

    let sizes = vec![f.products_per_group; plan.len()];
    let uv = (cfg.products.uv_scale[0], cfg.products.uv_scale[1]);
    let profiles: Vec<ProductProfile> =
        make_simi_groups(&template(cfg)?, plan.len(), &sizes, uv, 0, &streams)?
            .into_iter()
            .flatten()
            .collect();
    let group_of: Vec<usize> = profiles.iter().map(|p| p.group_id as usize).collect();
    let per_group = f.products_per_group;
    // today's control price positions, filled before any other group decides
    let mut control = vec![0.0_f64; per_group];
    let mut manage =
        |i: usize, profile: &ProductProfile, t: u32, managers: &mut [ManagerPolicy]| {
            let price = managers[i].price(profile, t, &streams);
            match plan[group_of[i]] {
                GroupPolicy::Replay => {
                    profile.p_min
                        + control[i % per_group].clamp(0.0, 1.0) * (profile.p_max - profile.p_min)
                }
                _ => {
                    if group_of[i] == 0 {
                        control[i] = profile.price_position(price);
                    }
                    price
                }
            }
        };

    let mut world = World::new(profiles.clone(), horizon, streams)?;
    world.set_restock(cfg.scenario == Scenario::Markdown);
    let mut managers = vec![ManagerPolicy::new(cfg.baseline.clone()); profiles.len()];
    for t in 1..start {
        world.step(|i, track, _| Ok(manage(i, &track.profile, t, &mut managers)))?;
        for (m, track) in managers.iter_mut().zip(world.tracks()) {
            m.observe(track.history.last().map_or(0.0, |o| o.revenue));
        }
    }

    // demonstrations from the last T pre-deployment periods of every product
    let first = (start - t_demo) as usize;
    let mut records = Vec::new();
    for i in 0..profiles.len() {
        let final_state = world.raw_state(i)?;
        records.extend(track_records(
            &world.tracks()[i],
            first,
            start as usize - 2,
            final_state.as_deref(),
            cfg.agent.reward,
        )?);
    }
    let sets = prepare_sets(
        &records,
        cfg.agent.reward,
        cfg.agent.reward,
        cfg.demos.split,
    )?;
    let normalizers: BTreeMap<u32, StateNormalizer> = sets
        .train
        .iter()
        .zip(&sets.normalizers)
        .map(|(s, n)| (s.product, n.clone()))
        .collect();
    let mut agents: Vec<Option<PricingAgent>> = Vec::with_capacity(plan.len());
    for (g, policy) in plan.iter().enumerate() {
        agents.push(match policy {
            GroupPolicy::Baseline | GroupPolicy::Replay => None,
            GroupPolicy::Agent(kind) => {
                let (mut init, mut replay) = agent_streams(cfg, g as u32);
                let mut agent = build_agent(cfg, *kind, &cfg.agent, sets.state_dim(), &mut init)?;
                agent.pretrain(&sets.train, cfg.agent.epochs, &mut replay)?;
                Some(agent)
            }
        });
    }

    if cfg.scenario == Scenario::Markdown {
        world.restock_all()?;
        world.set_restock(false);
    }
    if f.coupon {
        world.set_coupons(Some((f.coupon_rate, f.coupon_lift)));
    }
    for t in start..=horizon {
        world.step(|i, track, state| match &agents[group_of[i]] {
            None => Ok(manage(i, &track.profile, t, &mut managers)),
            Some(agent) => {
                let raw = state.ok_or_else(|| ExperimentError::Invalid {
                    field: "field".into(),
                    reason: format!(
                        "product {} has no history before deployment",
                        track.profile.id
                    ),
                })?;
                let features = normalizers[&track.profile.id].apply(raw)?;
                agent.price(
                    &MarketState {
                        features,
                        period: t,
                    },
                    track.profile.p_min,
                    track.profile.p_max,
                )
            }
        })?;
        for (m, track) in managers.iter_mut().zip(world.tracks()) {
            m.observe(track.history.last().map_or(0.0, |o| o.revenue));
        }
    }

    let tracks = world.into_tracks();
    let deployed = (start - 1) as usize..horizon as usize;
    let lookback = (start - tau - 1) as usize..(horizon - tau) as usize;
    let series: Vec<ProductSeries> = tracks
        .iter()
        .map(|track| ProductSeries {
            product: track.profile.id,
            group: track.profile.group_id,
            current: track.history[deployed.clone()]
                .iter()
                .map(RateSample::from)
                .collect(),
            baseline: track.history[lookback.clone()]
                .iter()
                .map(RateSample::from)
                .collect(),
        })
        .collect();
    let report = did_index(&series, 0, tau)?;

    let groups = plan
        .iter()
        .enumerate()
        .map(|(g, &policy)| {
            let members: Vec<_> = tracks
                .iter()
                .filter(|t| t.profile.group_id as usize == g)
                .collect();
            let days: Vec<_> = members
                .iter()
                .flat_map(|t| &t.history[deployed.clone()])
                .collect();
            let n = days.len() as f64;
            let selling_days = members
                .iter()
                .map(|t| {
                    t.stock_outs
                        .iter()
                        .find(|&&d| d >= start)
                        .map_or(f.periods, |d| d - start + 1)
                })
                .collect();
            FieldGroup {
                group: g as u32,
                policy,
                products: members.len(),
                rescaled_mean: report.ratio(g as u32).unwrap_or(f64::NAN),
                mean_rcr: days.iter().map(|o| o.revenue_conversion()).sum::<f64>() / n,
                mean_price_position: members
                    .iter()
                    .flat_map(|t| {
                        t.history[deployed.clone()]
                            .iter()
                            .map(|o| t.profile.price_position(o.price_paid))
                    })
                    .sum::<f64>()
                    / n,
                selling_days,
            }
        })
        .collect::<Vec<_>>();

    ensure_dir(&cfg.out_dir)?;
    let did_path = cfg.out_dir.join("did.csv");
    write_did_csv(create_file(&did_path)?, &report)?;
    let summary_path = cfg.out_dir.join("field_summary.csv");
    let mut w = csv::Writer::from_writer(create_file(&summary_path)?);
    w.write_record(FIELD_COLUMNS)?;
    for g in &groups {
        let mean_days =
            g.selling_days.iter().map(|&d| f64::from(d)).sum::<f64>() / g.selling_days.len() as f64;
        w.write_record([
            g.group.to_string(),
            g.policy.name().to_string(),
            g.products.to_string(),
            g.rescaled_mean.to_string(),
            g.mean_rcr.to_string(),
            g.mean_price_position.to_string(),
            mean_days.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(FieldOutput {
        report,
        groups,
        start,
        tracks,
        did_path,
        summary_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::RewardKind;

    fn small(out: PathBuf) -> ScenarioConfig {
        let mut cfg = ScenarioConfig {
            out_dir: out,
            seed: 5,
            ..ScenarioConfig::default()
        };
        cfg.field.products_per_group = 6;
        cfg.field.periods = 10;
        cfg.field.tau_index = Some(20);
        cfg.demos.periods = 20;
        cfg.demos.split = 10;
        cfg.agent.hidden = vec![8];
        cfg.agent.epochs = 2;
        cfg
    }

    #[test]
    fn control_reads_one_and_files_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(dir.path().to_path_buf());
        let out = run_field_analog(&cfg).unwrap();
        assert_eq!(out.start, 21);
        assert_eq!(out.report.days, (21..=30).collect::<Vec<_>>());
        assert_eq!(out.groups[0].rescaled_mean, 1.0);
        assert_eq!(out.groups[1].policy, GroupPolicy::Agent(AgentKind::Dqn));
        let did = std::fs::read_to_string(&out.did_path).unwrap();
        assert_eq!(did.lines().count(), 1 + 10 * 2);
        let summary = std::fs::read_to_string(&out.summary_path).unwrap();
        assert_eq!(summary.lines().count(), 3);
    }

    #[test]
    fn baseline_replay_tracks_control() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(dir.path().to_path_buf());
        cfg.field.products_per_group = 25;
        cfg.field.periods = 30;
        cfg.field.tau_index = None;
        let out = run_field_with(&cfg, &[GroupPolicy::Baseline, GroupPolicy::Replay]).unwrap();
        let ratio = out.groups[1].rescaled_mean;
        assert!((ratio - 1.0).abs() < 0.05, "ratio {ratio}");
        let (a, b) = (&out.tracks[3], &out.tracks[25 + 3]);
        for (x, y) in a.history.iter().zip(&b.history) {
            assert!(
                (a.profile.price_position(x.price_paid) - b.profile.price_position(y.price_paid))
                    .abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn control_must_be_baseline() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(dir.path().to_path_buf());
        assert!(run_field_with(&cfg, &[GroupPolicy::Replay, GroupPolicy::Baseline]).is_err());
    }

    #[test]
    fn markdown_seasons_end_at_stock_out() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(dir.path().to_path_buf());
        cfg.scenario = Scenario::Markdown;
        cfg.agent.reward = RewardKind::ProfitCr;
        cfg.agent.buckets = 9;
        cfg.field.tau_index = None;
        cfg.products.stock = 4;
        let out = run_field_analog(&cfg).unwrap();
        for g in &out.groups {
            assert!(g
                .selling_days
                .iter()
                .all(|&d| d >= 1 && d <= cfg.field.periods));
        }
        for track in &out.tracks {
            let season = &track.history[out.start as usize - 1..];
            let sold: u32 = season.iter().map(|o| o.sales_volume).sum();
            assert!(sold <= 4);
            if let Some(pos) = season.iter().position(|o| o.stock_remaining == Some(0)) {
                assert!(season[pos + 1..].iter().all(|o| o.sales_volume == 0));
            }
            if track.profile.group_id == 1 {
                // DQN prices sit on the 10%..90% discount levels
                for o in season.iter().filter(|o| o.sales_volume > 0) {
                    let level = o.price_paid / track.profile.p_max * 10.0;
                    assert!(
                        (level - level.round()).abs() < 1e-9
                            && (1.0..=9.0).contains(&level.round()),
                        "{level}"
                    );
                }
            }
        }
    }
}
