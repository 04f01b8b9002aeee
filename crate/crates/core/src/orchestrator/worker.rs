//! Rollout side: task selection and episode collection.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{EnvConfig, Episode, ParameterSnapshot, Transition, Variant};
use crate::curriculum::{fit_normal, get_dynamic_task, initial_q_feature, NavAclConfig, TaskType};
use crate::sac::ActMode;
use crate::world::{sample_task, Action, Task, World};
use crate::Result;

/// A task picked for the next episode with its predictor inputs and output.
#[derive(Debug, Clone, PartialEq)]
pub struct ChosenTask {
    pub task: Task,
    pub task_type: TaskType,
    pub features: [f64; 5],
    pub prediction: f64,
}

#[derive(Debug, Clone)]
pub struct Worker {
    pub id: u32,
    pub rng: ChaCha8Rng,
    pub episodes: u64,
    env: EnvConfig,
    nav: NavAclConfig,
    variant: Variant,
}

pub(super) fn to_f32(v: &[f64]) -> Arc<[f32]> {
    v.iter().map(|&x| x as f32).collect()
}

impl Worker {
    /// The worker's stream is seeded with `base_seed + id`.
    pub fn new(
        id: u32,
        base_seed: u64,
        env: EnvConfig,
        nav: NavAclConfig,
        variant: Variant,
    ) -> Self {
        Self {
            id,
            rng: ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(id as u64)),
            episodes: 0,
            env,
            nav,
            variant,
        }
    }

    pub fn env(&self) -> &EnvConfig {
        &self.env
    }

    pub fn world(&self, task: &Task) -> World {
        World::new(
            self.env.robot.clone(),
            self.env.dolly.clone(),
            self.env.reward.clone(),
            task.config.clone(),
            self.env.max_steps,
        )
    }

    fn features(&self, snap: &ParameterSnapshot, task: &Task) -> Result<[f64; 5]> {
        let obs = self.world(task).observation().flatten();
        Ok(task.features(initial_q_feature(&snap.critic, &snap.actor, &obs)?))
    }

    /// Scores candidates, fits the filter and draws a task of a random type.
    /// The random-starts variant skips the filter and takes one uniform draw.
    pub fn choose_task(&mut self, snap: &ParameterSnapshot) -> Result<ChosenTask> {
        let env = &self.env;
        let mut sampler =
            |rng: &mut ChaCha8Rng| sample_task(rng, &env.task, &env.robot, &env.dolly);
        if self.variant == Variant::RandomStarts {
            let task = sampler(&mut self.rng)?;
            let features = self.features(snap, &task)?;
            let prediction = snap.success.predict(&features)?;
            return Ok(ChosenTask {
                task,
                task_type: TaskType::Random,
                features,
                prediction,
            });
        }
        let mut scores = Vec::with_capacity(self.nav.candidates);
        for _ in 0..self.nav.candidates {
            let task = sampler(&mut self.rng)?;
            scores.push(snap.success.predict(&self.features(snap, &task)?)?);
        }
        let stats = fit_normal(&scores)?;
        let task_type = TaskType::draw(&self.nav, &mut self.rng);
        let mut predict = |task: &Task| snap.success.predict(&self.features(snap, task)?);
        let mut rng = self.rng.clone();
        let picked = get_dynamic_task(
            task_type,
            &mut sampler,
            &mut predict,
            stats,
            &self.nav,
            &mut rng,
        )?;
        self.rng = rng;
        let features = self.features(snap, &picked.task)?;
        Ok(ChosenTask {
            task: picked.task,
            task_type,
            features,
            prediction: picked.prediction,
        })
    }

    /// Rolls out one episode with actions sampled from the snapshot policy.
    pub fn run_episode(&mut self, snap: &ParameterSnapshot) -> Result<Episode> {
        let chosen = self.choose_task(snap)?;
        let mut world = self.world(&chosen.task);
        let mut obs = world.observation().flatten();
        let mut obs_shared = to_f32(&obs);
        let mut transitions = Vec::new();
        let mut episode_return = 0.0;
        let success = loop {
            let (a, _) = snap.actor.act(&obs, ActMode::Sample, &mut self.rng)?;
            let out = world.step(Action::new(a[0], a[1]))?;
            let next = out.observation.flatten();
            let next_shared = to_f32(&next);
            transitions.push(Transition {
                obs: obs_shared,
                action: [a[0], a[1]],
                reward: out.reward,
                next_obs: next_shared.clone(),
                terminal: out.terminal && !out.truncated,
                worker_id: self.id,
            });
            episode_return += out.reward;
            if out.terminal {
                break out.flags.goal;
            }
            obs = next;
            obs_shared = next_shared;
        };
        self.episodes += 1;
        Ok(Episode {
            worker_id: self.id,
            snapshot_version: snap.version,
            transitions,
            task: chosen.task,
            task_type: chosen.task_type,
            features: chosen.features,
            prediction: chosen.prediction,
            success,
            episode_return,
        })
    }
}
