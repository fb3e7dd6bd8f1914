use std::path::PathBuf;

use super::world::ProductTrack;
use super::{
    create_file, ensure_dir, ExperimentError, ManagerPolicy, Scenario, ScenarioConfig, World,
};
use crate::market::io::{load_profiles, write_profiles};
use crate::market::{make_simi_groups, ProductProfile};
use crate::mdp::transition::write_records;
use crate::mdp::{
    MarketState, PricingAction, RateSample, RewardKind, Transition, TransitionRecord,
};
use crate::rng::SeedStream;

#[derive(Debug, Clone)]
pub struct GenerateOutput {
    pub profiles: Vec<ProductProfile>,
    pub records: Vec<TransitionRecord>,
    pub profiles_path: PathBuf,
    pub demos_path: PathBuf,
}

/// Products from the configured file, or generated from the scenario's
/// template.
pub fn build_products(
    cfg: &ScenarioConfig,
    streams: &SeedStream,
) -> Result<Vec<ProductProfile>, ExperimentError> {
    let p = &cfg.products;
    if let Some(file) = &p.file {
        return Ok(load_profiles(file)?);
    }
    let template = match cfg.scenario {
        Scenario::Daily => ProductProfile::fmcg_template(),
        Scenario::Markdown => ProductProfile {
            initial_stock: p.stock,
            ..ProductProfile::luxury_template()
        },
    };
    let groups = p.groups.max(2);
    let sizes: Vec<usize> = (0..groups)
        .map(|g| p.count / groups + usize::from(g < p.count % groups))
        .collect();
    let products = make_simi_groups(
        &template,
        groups,
        &sizes,
        (p.uv_scale[0], p.uv_scale[1]),
        0,
        streams,
    )?;
    Ok(products.into_iter().flatten().collect())
}

/// Transitions whose outcomes are `track.history[first..=last]`.
///
/// The state of each is the raw state seen before that period's decision;
/// `final_state` follows the last simulated period. Transitions end an
/// episode at stock-out and at `last`.
pub(crate) fn track_records(
    track: &ProductTrack,
    first: usize,
    last: usize,
    final_state: Option<&[f64]>,
    reward: RewardKind,
) -> Result<Vec<TransitionRecord>, ExperimentError> {
    let samples: Vec<RateSample> = track.history.iter().map(RateSample::from).collect();
    let missing = |period: u32| ExperimentError::Invalid {
        field: "demos.periods".into(),
        reason: format!(
            "product {} has no state before period {period}",
            track.profile.id
        ),
    };
    let mut out = Vec::with_capacity(last + 1 - first);
    for idx in first.max(1)..=last {
        let obs = &track.history[idx];
        let t = obs.period_index;
        let state = track.states[idx].clone().ok_or_else(|| missing(t))?;
        let next = match track.states.get(idx + 1) {
            Some(s) => s.clone(),
            None => final_state.map(<[f64]>::to_vec),
        }
        .ok_or_else(|| missing(t + 1))?;
        let outcome = samples[idx];
        out.push(TransitionRecord {
            product: track.profile.id,
            period: t,
            p_min: track.profile.p_min,
            p_max: track.profile.p_max,
            transition: Transition {
                state: MarketState {
                    features: state,
                    period: t,
                },
                action: PricingAction::Price(obs.price_paid),
                reward: reward
                    .reward(&outcome, &samples[..idx])
                    .ready()
                    .unwrap_or(0.0),
                next_state: MarketState {
                    features: next,
                    period: t + 1,
                },
                done: idx == last || obs.stock_remaining == Some(0),
            },
            outcome,
            previous: Some(samples[idx - 1]),
        });
    }
    Ok(out)
}

/// Simulate `periods` days of the baseline policy on every product and log
/// one transition per period after the first. Limited-stock products are
/// restocked when they sell out, so each log is a run of seasons.
pub fn simulate_demonstrations(
    profiles: &[ProductProfile],
    cfg: &ScenarioConfig,
    streams: &SeedStream,
) -> Result<Vec<TransitionRecord>, ExperimentError> {
    let periods = cfg.demos.periods;
    let mut world = World::new(profiles.to_vec(), periods, *streams)?;
    world.set_restock(cfg.scenario == Scenario::Markdown);
    let mut managers = vec![ManagerPolicy::new(cfg.baseline.clone()); profiles.len()];
    for t in 1..=periods {
        world.step(|i, track, _| Ok(managers[i].price(&track.profile, t, streams)))?;
        for (m, track) in managers.iter_mut().zip(world.tracks()) {
            m.observe(track.history.last().map_or(0.0, |o| o.revenue));
        }
    }
    let mut records = Vec::new();
    for i in 0..world.tracks().len() {
        let final_state = world.raw_state(i)?;
        let track = &world.tracks()[i];
        records.extend(track_records(
            track,
            1,
            track.history.len() - 1,
            final_state.as_deref(),
            cfg.agent.reward,
        )?);
    }
    Ok(records)
}

/// Simulate the products and write `profiles.csv` and `demos.csv` into the
/// output directory.
pub fn run_generate(cfg: &ScenarioConfig) -> Result<GenerateOutput, ExperimentError> {
    let streams = SeedStream::new(cfg.seed);
    let profiles = build_products(cfg, &streams)?;
    let records = simulate_demonstrations(&profiles, cfg, &streams)?;
    ensure_dir(&cfg.out_dir)?;
    let profiles_path = cfg.out_dir.join("profiles.csv");
    write_profiles(create_file(&profiles_path)?, &profiles)?;
    let demos_path = cfg.out_dir.join("demos.csv");
    write_records(create_file(&demos_path)?, &records)?;
    Ok(GenerateOutput {
        profiles,
        records,
        profiles_path,
        demos_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::load_demonstrations;
    use std::fs;

    fn small(out: PathBuf) -> ScenarioConfig {
        let mut cfg = ScenarioConfig {
            out_dir: out,
            seed: 11,
            ..ScenarioConfig::default()
        };
        cfg.products.count = 1;
        cfg.demos.periods = 60;
        cfg
    }

    #[test]
    fn sixty_periods_give_fifty_nine_transitions() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_generate(&small(dir.path().to_path_buf())).unwrap();
        assert_eq!(out.profiles.len(), 1);
        assert_eq!(out.records.len(), 59);
        assert_eq!(out.records[0].period, 2);
        assert!(out.records[58].transition.done);
        assert!(out.records[..58].iter().all(|r| !r.transition.done));
        let text = fs::read_to_string(&out.demos_path).unwrap();
        assert_eq!(text.lines().count(), 60);
    }

    #[test]
    fn same_seed_same_files() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let mut cfg = small(a.path().to_path_buf());
        cfg.products.count = 6;
        let first = run_generate(&cfg).unwrap();
        cfg.out_dir = b.path().to_path_buf();
        let second = run_generate(&cfg).unwrap();
        for (x, y) in [
            (&first.demos_path, &second.demos_path),
            (&first.profiles_path, &second.profiles_path),
        ] {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
        }
        cfg.seed += 1;
        cfg.out_dir = a.path().join("other");
        let third = run_generate(&cfg).unwrap();
        assert_ne!(
            fs::read(&first.demos_path).unwrap(),
            fs::read(&third.demos_path).unwrap()
        );
    }

    #[test]
    fn recomputed_rewards_match_generation() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(dir.path().to_path_buf());
        cfg.products.count = 3;
        cfg.agent.reward = RewardKind::Drcr { tau: 1 };
        let out = run_generate(&cfg).unwrap();
        let sets = load_demonstrations(&out.demos_path, RewardKind::Drcr { tau: 1 }, 30).unwrap();
        let loaded: Vec<f64> = sets
            .iter()
            .flat_map(|s| s.transitions().map(|t| t.reward))
            .collect();
        let generated: Vec<f64> = out.records.iter().map(|r| r.transition.reward).collect();
        assert_eq!(loaded, generated);
        // independent oracle: revenue per visitor minus the previous day's
        for r in &out.records {
            let rate = |rev: f64, uv: u32| if uv == 0 { 0.0 } else { rev / f64::from(uv) };
            let prev = r.previous.unwrap();
            let want = if r.outcome.uv == 0 {
                0.0
            } else {
                rate(r.outcome.revenue, r.outcome.uv) - rate(prev.revenue, prev.uv)
            };
            assert_eq!(r.transition.reward, want);
        }
    }

    #[test]
    fn states_follow_their_periods() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(dir.path().to_path_buf());
        cfg.products.count = 2;
        let out = run_generate(&cfg).unwrap();
        for pair in out
            .records
            .windows(2)
            .filter(|w| w[0].product == w[1].product)
        {
            assert_eq!(
                pair[0].transition.next_state.features,
                pair[1].transition.state.features
            );
            // the logged price is the next state's last-price feature
            let pos = (pair[0].p_min, pair[0].p_max);
            let PricingAction::Price(p) = pair[0].transition.action else {
                panic!()
            };
            assert!(
                ((p - pos.0) / (pos.1 - pos.0) - pair[1].transition.state.features[0]).abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn markdown_logs_runs_of_seasons() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(dir.path().to_path_buf());
        cfg.scenario = crate::experiment::Scenario::Markdown;
        cfg.products.count = 2;
        let out = run_generate(&cfg).unwrap();
        assert_eq!(out.records.len(), 2 * 59);
        let mut sold = 0;
        for r in &out.records {
            let PricingAction::Price(p) = r.transition.action else {
                panic!()
            };
            sold += (r.outcome.revenue / p).round() as u32;
            assert!(sold <= cfg.products.stock);
            if r.transition.done {
                sold = 0;
            }
        }
    }

    #[test]
    fn unwritable_output_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let cfg = small(blocker.join("sub"));
        match run_generate(&cfg) {
            Err(ExperimentError::Path { path, .. }) => assert_eq!(path, blocker.join("sub")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
