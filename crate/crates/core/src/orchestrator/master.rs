//! Learner side: replay ingestion, gradient updates, predictor training.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Episode, EpisodeRecord, ParameterSnapshot, TrainingConfig, Transition};
use crate::curriculum::{NavAclConfig, SuccessNet};
use crate::per::{PerConfig, PrioritizedReplay};
use crate::sac::{Batch, Sac, SacConfig, UpdateStats};
use crate::Result;

pub const ACTION_DIM: usize = 2;

#[derive(Debug, Clone)]
pub struct Master {
    pub sac: Sac,
    pub replay: PrioritizedReplay<Transition>,
    pub success: SuccessNet,
    /// Predictor results waiting for a full training batch.
    pub pending: Vec<([f64; 5], bool)>,
    pub rng: ChaCha8Rng,
    pub version: u64,
    pub episodes: u64,
    pub transitions: u64,
    pub owed_updates: usize,
    pub predictor_steps: u64,
    nav: NavAclConfig,
    training: TrainingConfig,
}

/// Stacks sampled transitions into learner matrices.
pub fn make_batch(items: &[&Transition]) -> Batch {
    let n = items.len();
    let d = items.first().map_or(0, |t| t.obs.len());
    let mut obs = Array2::zeros((n, d));
    let mut next_obs = Array2::zeros((n, d));
    let mut actions = Array2::zeros((n, ACTION_DIM));
    let mut rewards = Array1::zeros(n);
    let mut terminal = Array1::zeros(n);
    for (i, t) in items.iter().enumerate() {
        for (j, (&a, &b)) in t.obs.iter().zip(t.next_obs.iter()).enumerate() {
            obs[[i, j]] = a as f64;
            next_obs[[i, j]] = b as f64;
        }
        actions[[i, 0]] = t.action[0];
        actions[[i, 1]] = t.action[1];
        rewards[i] = t.reward;
        terminal[i] = if t.terminal { 1.0 } else { 0.0 };
    }
    Batch {
        obs,
        actions,
        rewards,
        next_obs,
        terminal,
    }
}

impl Master {
    pub fn new(
        obs_dim: usize,
        sac: SacConfig,
        per: PerConfig,
        nav: NavAclConfig,
        training: TrainingConfig,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(training.seed);
        rng.set_stream(1);
        let success = SuccessNet::new(&nav.hidden, nav.lr, &mut rng);
        let sac = Sac::new(sac, obs_dim, ACTION_DIM, &mut rng);
        Ok(Self {
            sac,
            replay: PrioritizedReplay::new(per)?,
            success,
            pending: Vec::new(),
            rng,
            version: 0,
            episodes: 0,
            transitions: 0,
            owed_updates: 0,
            predictor_steps: 0,
            nav,
            training,
        })
    }

    pub fn training(&self) -> &TrainingConfig {
        &self.training
    }

    pub fn nav(&self) -> &NavAclConfig {
        &self.nav
    }

    /// Deep copy of the current parameters under a fresh version number.
    pub fn snapshot(&mut self) -> Arc<ParameterSnapshot> {
        self.version += 1;
        Arc::new(ParameterSnapshot {
            version: self.version,
            actor: self.sac.actor.clone(),
            critic: self.sac.critics.q1.clone(),
            success: self.success.clone(),
        })
    }

    /// Moves an episode into replay, records its curriculum result and
    /// accrues the episode's gradient steps.
    pub fn ingest(&mut self, episode: Episode) -> Result<EpisodeRecord> {
        self.episodes += 1;
        let steps = episode.transitions.len();
        self.transitions += steps as u64;
        for t in episode.transitions {
            self.replay.push(t);
        }
        self.pending.push((episode.features, episode.success));
        if self.pending.len() >= self.nav.batch {
            self.flush_predictor()?;
        }
        self.owed_updates += self.training.updates_per_episode;
        let f = episode.features;
        Ok(EpisodeRecord {
            episode: self.episodes,
            worker_id: episode.worker_id,
            episode_return: episode.episode_return,
            steps,
            success: episode.success,
            task_type: episode.task_type,
            snapshot_version: episode.snapshot_version,
            goal_distance: f[0],
            agent_clearance: f[1],
            goal_clearance: f[2],
            relative_angle: f[3],
            q0: f[4],
            prediction: episode.prediction,
        })
    }

    /// One predictor step on everything pending.
    pub fn flush_predictor(&mut self) -> Result<()> {
        if self.pending.is_empty() {
            return Ok(());
        }
        self.success.train(&self.pending)?;
        self.pending.clear();
        self.predictor_steps += 1;
        Ok(())
    }

    pub fn can_update(&self) -> bool {
        self.replay.len() >= self.sac.config.batch_size
    }

    pub fn progress(&self) -> f64 {
        if self.training.episodes == 0 {
            1.0
        } else {
            (self.episodes as f64 / self.training.episodes as f64).min(1.0)
        }
    }

    /// Sample, learn, reprioritize.
    pub fn update_once(&mut self) -> Result<UpdateStats> {
        let b = self.replay.config().anneal_b(self.progress());
        let sampled = self
            .replay
            .sample(self.sac.config.batch_size, b, &mut self.rng)?;
        let batch = make_batch(&sampled.items);
        let weights = Array1::from_vec(sampled.weights);
        let indices = sampled.indices;
        let stats = self.sac.update(&batch, weights.view(), &mut self.rng)?;
        self.replay.update_priorities(&indices, &stats.td_errors)?;
        Ok(stats)
    }

    /// Performs the owed gradient steps. Steps owed while replay holds less
    /// than one batch are dropped.
    pub fn train_owed(&mut self) -> Result<usize> {
        if !self.can_update() {
            self.owed_updates = 0;
            return Ok(0);
        }
        let n = self.owed_updates;
        for _ in 0..n {
            self.update_once()?;
        }
        self.owed_updates = 0;
        Ok(n)
    }
}
