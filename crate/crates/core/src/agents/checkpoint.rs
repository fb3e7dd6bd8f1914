//! Agent checkpoints.
//!
//! A checkpoint is a directory holding `manifest.toml` and one network file
//! per network (see [`crate::neural::to_text`]). The manifest records the
//! agent kind, action space, hyperparameters and train-step counter:
//!
//! ```toml
//! format = "dynprice-checkpoint"
//! version = 1
//! kind = "dqn"            # or "ddpg"
//! steps = 1200
//! networks = ["q_net.txt", "q_target.txt"]
//!
//! [space]                 # ActionSpaceSpec
//! [dqn]                   # DqnConfig (or [ddpg] for DdpgConfig)
//! ```
//!
//! Optimizer moments are not saved; a restored agent restarts them.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AgentError, DdpgAgent, DdpgConfig, DqnAgent, DqnConfig};
use crate::mdp::ActionSpaceSpec;
use crate::neural::{load_network, save_network, Network};

pub const CHECKPOINT_MANIFEST: &str = "manifest.toml";
const FORMAT: &str = "dynprice-checkpoint";
const VERSION: u32 = 1;
const DQN_FILES: [&str; 2] = ["q_net.txt", "q_target.txt"];
const DDPG_FILES: [&str; 4] = [
    "actor.txt",
    "critic.txt",
    "actor_target.txt",
    "critic_target.txt",
];

#[derive(Debug, Clone)]
pub enum Checkpoint {
    Dqn(DqnAgent),
    Ddpg(DdpgAgent),
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format: String,
    version: u32,
    kind: String,
    steps: u64,
    networks: Vec<String>,
    space: ActionSpaceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dqn: Option<DqnConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ddpg: Option<DdpgConfig>,
}

pub fn save_checkpoint(dir: &Path, agent: &Checkpoint) -> Result<(), AgentError> {
    fs::create_dir_all(dir)?;
    let (manifest, nets): (Manifest, Vec<&Network>) = match agent {
        Checkpoint::Dqn(a) => (
            Manifest {
                format: FORMAT.into(),
                version: VERSION,
                kind: "dqn".into(),
                steps: a.steps(),
                networks: DQN_FILES.iter().map(|s| s.to_string()).collect(),
                space: *a.space(),
                dqn: Some(a.config().clone()),
                ddpg: None,
            },
            vec![a.q_net(), a.q_target()],
        ),
        Checkpoint::Ddpg(a) => (
            Manifest {
                format: FORMAT.into(),
                version: VERSION,
                kind: "ddpg".into(),
                steps: a.steps(),
                networks: DDPG_FILES.iter().map(|s| s.to_string()).collect(),
                space: *a.space(),
                dqn: None,
                ddpg: Some(a.config().clone()),
            },
            vec![a.actor(), a.critic(), a.actor_target(), a.critic_target()],
        ),
    };
    for (name, net) in manifest.networks.iter().zip(nets) {
        save_network(&dir.join(name), net)?;
    }
    let text = toml::to_string(&manifest).map_err(|e| AgentError::Checkpoint {
        path: dir.join(CHECKPOINT_MANIFEST),
        reason: e.to_string(),
    })?;
    fs::write(dir.join(CHECKPOINT_MANIFEST), text)?;
    Ok(())
}

pub fn load_checkpoint(dir: &Path) -> Result<Checkpoint, AgentError> {
    let path = dir.join(CHECKPOINT_MANIFEST);
    let bad = |reason: String| AgentError::Checkpoint {
        path: path.clone(),
        reason,
    };
    let text = fs::read_to_string(&path).map_err(|e| bad(e.to_string()))?;
    let m: Manifest = toml::from_str(&text).map_err(|e| bad(e.to_string()))?;
    if m.format != FORMAT || m.version != VERSION {
        return Err(bad(format!(
            "unsupported format {} v{}",
            m.format, m.version
        )));
    }
    let load = |files: &[&str]| -> Result<Vec<Network>, AgentError> {
        if m.networks.len() != files.len() {
            return Err(bad(format!("expected {} network files", files.len())));
        }
        m.networks
            .iter()
            .map(|f| Ok(load_network(&dir.join(f))?))
            .collect()
    };
    match (m.kind.as_str(), m.dqn.clone(), m.ddpg.clone()) {
        ("dqn", Some(config), None) => {
            let mut nets = load(&DQN_FILES)?.into_iter();
            let (q, target) = (nets.next().expect("two"), nets.next().expect("two"));
            Ok(Checkpoint::Dqn(
                DqnAgent::with_network(q, m.space, config)?.restore(target, m.steps)?,
            ))
        }
        ("ddpg", None, Some(config)) => {
            let mut nets = load(&DDPG_FILES)?.into_iter();
            let mut take = || nets.next().expect("four");
            let (actor, critic, at, ct) = (take(), take(), take(), take());
            Ok(Checkpoint::Ddpg(
                DdpgAgent::with_networks(actor, critic, m.space, config)?
                    .restore(at, ct, m.steps)?,
            ))
        }
        (kind, _, _) => Err(bad(format!(
            "kind {kind:?} does not match its config tables"
        ))),
    }
}
