//! Episode lifecycle: reset, step, observation assembly.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::kinematics::integrate;
use super::reward::{compute_reward, EventFlags, RewardWeights};
use super::sensors::{lidar_scan, semantic_scan, Scene};
use super::{
    Action, DollySpec, Pose, RobotSpec, WorldConfig, GOAL_TOLERANCE, HISTORY_LEN, STEP_DURATION,
};
use crate::{Error, Result};

/// Sensor readings plus the recent action and reward history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Oldest frame first; each frame is `rays x (depth, dolly flag)`.
    pub semantic_frames: Vec<f64>,
    pub lidar: Vec<f64>,
    /// Oldest first, (v, omega) pairs.
    pub action_history: Vec<f64>,
    pub reward_history: Vec<f64>,
}

impl Observation {
    pub fn len(&self) -> usize {
        self.semantic_frames.len()
            + self.lidar.len()
            + self.action_history.len()
            + self.reward_history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Concatenation in the order frames, lidar, actions, rewards.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&self.semantic_frames);
        v.extend_from_slice(&self.lidar);
        v.extend_from_slice(&self.action_history);
        v.extend_from_slice(&self.reward_history);
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: f64,
    pub terminal: bool,
    /// True when the episode ended only because of the step cap.
    pub truncated: bool,
    pub flags: EventFlags,
    pub pose: Pose,
}

/// A single episode in progress.
#[derive(Debug, Clone)]
pub struct World {
    robot: RobotSpec,
    dolly: DollySpec,
    weights: RewardWeights,
    config: WorldConfig,
    scene: Scene,
    pose: Pose,
    steps: usize,
    max_steps: usize,
    terminal: bool,
    frames: VecDeque<Vec<f64>>,
    actions: VecDeque<[f64; 2]>,
    rewards: VecDeque<f64>,
}

impl World {
    pub fn new(
        robot: RobotSpec,
        dolly: DollySpec,
        weights: RewardWeights,
        config: WorldConfig,
        max_steps: usize,
    ) -> Self {
        let scene = Scene::new(&config, &dolly);
        let pose = config.robot_start;
        let mut w = Self {
            robot,
            dolly,
            weights,
            config,
            scene,
            pose,
            steps: 0,
            max_steps,
            terminal: false,
            frames: VecDeque::with_capacity(HISTORY_LEN),
            actions: VecDeque::with_capacity(HISTORY_LEN),
            rewards: VecDeque::with_capacity(HISTORY_LEN),
        };
        w.reset();
        w
    }

    /// Restores the start configuration.
    pub fn reset(&mut self) -> Observation {
        self.pose = self.config.robot_start;
        self.steps = 0;
        self.terminal = false;
        self.actions.clear();
        self.rewards.clear();
        self.frames.clear();
        let frame = self.frame();
        for _ in 0..HISTORY_LEN {
            self.frames.push_back(frame.clone());
        }
        self.observation()
    }

    pub fn pose(&self) -> Pose {
        self.pose
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn robot(&self) -> &RobotSpec {
        &self.robot
    }

    pub fn dolly(&self) -> &DollySpec {
        &self.dolly
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    /// True when the start pose already touches something.
    pub fn start_is_blocked(&self) -> bool {
        let f = self.contact(&self.config.robot_start);
        f.collision_dolly || f.collision_other
    }

    fn frame(&self) -> Vec<f64> {
        semantic_scan(&self.scene, &self.robot, &self.pose)
            .into_iter()
            .flatten()
            .collect()
    }

    pub fn observation(&self) -> Observation {
        let mut action_history = vec![0.0; 2 * HISTORY_LEN];
        let pad = HISTORY_LEN - self.actions.len();
        for (i, a) in self.actions.iter().enumerate() {
            action_history[2 * (pad + i)] = a[0];
            action_history[2 * (pad + i) + 1] = a[1];
        }
        let mut reward_history = vec![0.0; HISTORY_LEN];
        let pad = HISTORY_LEN - self.rewards.len();
        for (i, r) in self.rewards.iter().enumerate() {
            reward_history[pad + i] = *r;
        }
        Observation {
            semantic_frames: self.frames.iter().flatten().copied().collect(),
            lidar: lidar_scan(&self.scene, &self.robot, &self.pose),
            action_history,
            reward_history,
        }
    }

    fn contact(&self, pose: &Pose) -> EventFlags {
        let fp = self.robot.footprint(pose);
        EventFlags {
            collision_other: fp.leaves(&self.scene.room)
                || self.scene.obstacles.iter().any(|b| fp.overlaps_aabb(b)),
            collision_dolly: self.scene.legs.iter().any(|c| fp.overlaps_circle(c)),
            ..EventFlags::default()
        }
    }

    /// Advances the episode by one 0.18 s action.
    ///
    /// Contacts are checked at thirds of the motion so a fast step cannot
    /// skip over a dolly leg. A contact ends the episode and suppresses the
    /// goal event.
    pub fn step(&mut self, action: Action) -> Result<StepOutcome> {
        if self.terminal {
            return Err(Error::EpisodeTerminated);
        }
        if !action.is_finite() {
            return Err(Error::NonFinite("action"));
        }
        let a = action.clamped();
        let mut flags = EventFlags::default();
        for k in 1..=3 {
            let p = integrate(&self.pose, a.v, a.omega, STEP_DURATION * k as f64 / 3.0);
            let c = self.contact(&p);
            flags.collision_dolly |= c.collision_dolly;
            flags.collision_other |= c.collision_other;
            if c.any_collision() {
                break;
            }
        }
        self.pose = integrate(&self.pose, a.v, a.omega, STEP_DURATION);
        self.steps += 1;
        flags.slow = a.v < self.weights.forward_threshold;
        flags.goal = !flags.any_collision()
            && self.pose.position().distance(self.config.dolly.position()) < GOAL_TOLERANCE;

        let reward = compute_reward(&flags, &self.weights);
        let done = flags.goal || flags.any_collision();
        let truncated = !done && self.steps >= self.max_steps;
        self.terminal = done || truncated;

        let frame = self.frame();
        push_bounded(&mut self.frames, frame);
        push_bounded(&mut self.actions, [a.v, a.omega]);
        push_bounded(&mut self.rewards, reward);

        Ok(StepOutcome {
            observation: self.observation(),
            reward,
            terminal: self.terminal,
            truncated,
            flags,
            pose: self.pose,
        })
    }
}

fn push_bounded<T>(q: &mut VecDeque<T>, v: T) {
    if q.len() == HISTORY_LEN {
        q.pop_front();
    }
    q.push_back(v);
}
