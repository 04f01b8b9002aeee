//! Asynchronous actor-learner training: rollout workers feed whole episodes
//! to a single master that owns replay, the learner and the success
//! predictor, and publishes immutable parameter snapshots back.

mod checkpoint;
mod driver;
mod master;
mod worker;

pub use driver::{Trainer, TrainingSummary};
pub use master::Master;
pub use worker::Worker;

use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::curriculum::{SuccessNet, TaskType};
use crate::nn::DenseNet;
use crate::sac::Actor;
use crate::world::{DollySpec, RewardWeights, RobotSpec, Task, TaskBounds, DEFAULT_MAX_STEPS};

/// How start states are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    NavaclQ,
    RandomStarts,
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "navacl_q" => Ok(Variant::NavaclQ),
            "random_starts" => Ok(Variant::RandomStarts),
            _ => Err(format!(
                "unknown variant {s:?} (expected navacl_q or random_starts)"
            )),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::NavaclQ => "navacl_q",
            Variant::RandomStarts => "random_starts",
        })
    }
}

/// Everything needed to build and randomize an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    pub robot: RobotSpec,
    pub dolly: DollySpec,
    pub reward: RewardWeights,
    pub task: TaskBounds,
    pub max_steps: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            robot: RobotSpec::default(),
            dolly: DollySpec::default(),
            reward: RewardWeights::default(),
            task: TaskBounds::default(),
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self, errors: &mut Vec<String>) {
        self.robot.validate(errors);
        self.dolly.validate(&self.robot, errors);
        self.task.validate(errors);
        if self.max_steps == 0 {
            errors.push("world.max_steps must be at least 1".into());
        }
    }

    pub fn observation_len(&self) -> usize {
        self.robot.observation_len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub seed: u64,
    pub workers: usize,
    /// Episode budget.
    pub episodes: u64,
    /// Gradient steps owed per ingested episode.
    pub updates_per_episode: usize,
    pub queue_capacity: usize,
    pub variant: Variant,
    /// Wall-clock limit in seconds; unlimited when absent.
    pub time_limit: Option<f64>,
    /// Run one worker inline, strictly alternating episodes and updates.
    pub synchronous: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            workers: 4,
            episodes: 20_000,
            updates_per_episode: 32,
            queue_capacity: 64,
            variant: Variant::NavaclQ,
            time_limit: None,
            synchronous: false,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self, errors: &mut Vec<String>) {
        if self.workers == 0 {
            errors.push("training.workers must be at least 1".into());
        }
        if self.queue_capacity == 0 {
            errors.push("training.queue_capacity must be at least 1".into());
        }
        if self.time_limit.is_some_and(|t| !(t > 0.0)) {
            errors.push("training.time_limit must be positive".into());
        }
    }
}

/// One environment step as stored in replay. Observations are shared with
/// the neighbouring transition of the same episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Arc<[f32]>,
    pub action: [f64; 2],
    pub reward: f64,
    pub next_obs: Arc<[f32]>,
    /// True when the episode ended by goal or collision; timeouts still bootstrap.
    pub terminal: bool,
    pub worker_id: u32,
}

/// A finished rollout as delivered to the master.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub worker_id: u32,
    pub snapshot_version: u64,
    pub transitions: Vec<Transition>,
    pub task: Task,
    pub task_type: TaskType,
    pub features: [f64; 5],
    pub prediction: f64,
    pub success: bool,
    pub episode_return: f64,
}

/// Immutable parameter set shipped from master to workers.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSnapshot {
    pub version: u64,
    pub actor: Actor,
    pub critic: DenseNet,
    pub success: SuccessNet,
}

/// Single-publisher, multi-reader slot holding the latest snapshot.
#[derive(Debug)]
pub struct SnapshotBoard {
    slot: RwLock<Arc<ParameterSnapshot>>,
}

impl SnapshotBoard {
    pub fn new(initial: Arc<ParameterSnapshot>) -> Self {
        Self {
            slot: RwLock::new(initial),
        }
    }

    /// Replaces the published snapshot. Readers holding the old one keep it.
    pub fn publish(&self, snapshot: Arc<ParameterSnapshot>) {
        *self.slot.write().unwrap_or_else(|e| e.into_inner()) = snapshot;
    }

    pub fn latest(&self) -> Arc<ParameterSnapshot> {
        self.slot.read().unwrap_or_else(|e| e.into_inner()).clone()
    }
}

/// One row of the training telemetry file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: u64,
    pub worker_id: u32,
    #[serde(rename = "return")]
    pub episode_return: f64,
    pub steps: usize,
    pub success: bool,
    pub task_type: TaskType,
    pub snapshot_version: u64,
    pub goal_distance: f64,
    pub agent_clearance: f64,
    pub goal_clearance: f64,
    pub relative_angle: f64,
    pub q0: f64,
    pub prediction: f64,
}
