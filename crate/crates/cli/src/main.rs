use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use dynprice::experiment::{
    run_evaluate, run_field_analog, run_generate, sweep_to_dir, ScenarioConfig, SweepAxis,
};

/// Dynamic pricing experiments on a simulated market.
#[derive(Debug, Parser)]
#[command(name = "dynprice", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file (TOML); defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the baseline managers and write profiles.csv and demos.csv.
    Generate(Common),
    /// Pre-train and offline-evaluate one agent per setting; writes sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Sweep axis, overriding the config.
        #[arg(long, value_parser = parse_axis)]
        axis: Option<SweepAxis>,
        /// Logged demonstrations to use instead of simulating them.
        #[arg(long)]
        demos: Option<PathBuf>,
    },
    /// Simi-group field analog; writes did.csv and field_summary.csv.
    FieldAnalog(Common),
    /// Offline-evaluate the configured agent, pre-trained or from a checkpoint.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        demos: Option<PathBuf>,
        /// Checkpoint directory written by an earlier `evaluate`.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    match s {
        "gamma" => Ok(SweepAxis::Gamma),
        "buckets" => Ok(SweepAxis::Buckets),
        "reward" => Ok(SweepAxis::Reward),
        "agent" => Ok(SweepAxis::Agent),
        other => Err(format!(
            "unknown axis {other:?} (gamma, buckets, reward, agent)"
        )),
    }
}

fn load(common: &Common) -> Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            ScenarioConfig::load(path).with_context(|| format!("loading {}", path.display()))?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(common) => {
            let cfg = load(&common)?;
            let out = run_generate(&cfg)?;
            println!(
                "{} products, {} transitions",
                out.profiles.len(),
                out.records.len()
            );
            println!("wrote {}", out.profiles_path.display());
            println!("wrote {}", out.demos_path.display());
        }
        Command::Sweep {
            common,
            axis,
            demos,
        } => {
            let mut cfg = load(&common)?;
            if let Some(axis) = axis {
                cfg.sweep.axis = axis;
                cfg.validate()?;
            }
            let (rows, path) = sweep_to_dir(&cfg, demos.as_deref())?;
            for r in &rows {
                println!(
                    "{:<28} rep {:>2}  R_pi {:>10.6}  matched {}/{}",
                    r.setting,
                    r.repetition,
                    r.r_pi(),
                    r.tally.matched,
                    r.tally.visited
                );
            }
            println!("wrote {}", path.display());
        }
        Command::FieldAnalog(common) => {
            let cfg = load(&common)?;
            let out = run_field_analog(&cfg)?;
            println!(
                "deployment days {}..{}",
                out.start,
                out.start + cfg.field.periods - 1
            );
            for g in &out.groups {
                println!(
                    "group {} {:<8} rescaled {:>8.4}  rcr {:.4}  price position {:.3}",
                    g.group,
                    g.policy.name(),
                    g.rescaled_mean,
                    g.mean_rcr,
                    g.mean_price_position
                );
            }
            println!("wrote {}", out.did_path.display());
            println!("wrote {}", out.summary_path.display());
        }
        Command::Evaluate {
            common,
            demos,
            checkpoint,
        } => {
            let cfg = load(&common)?;
            let out = run_evaluate(&cfg, demos.as_deref(), checkpoint.as_deref())?;
            if let Some(report) = &out.pretrain {
                println!(
                    "pre-trained on {} tuples, {} steps, last loss {:.6}",
                    report.tuples, report.steps, report.last_loss
                );
            }
            println!(
                "{} R_pi {:.6} (matched {}/{})",
                out.agent.name(),
                out.tally.value(),
                out.tally.matched,
                out.tally.visited
            );
            if let Some(dir) = out.checkpoint.as_deref().map(Path::display) {
                println!("saved agent to {dir}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
