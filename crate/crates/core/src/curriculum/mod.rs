//! Automatic start-state curriculum driven by a learned success predictor.
//!
//! Each episode a worker scores a pool of random candidate tasks, fits a
//! normal distribution to the predicted success probabilities, then draws an
//! *easy*, *frontier* or *random* task relative to that distribution.

mod success_net;

pub use success_net::{bce_loss, RunningStats, SuccessNet, FEATURES};

use ndarray::ArrayView2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::nn::DenseNet;
use crate::sac::{q_values, Actor};
use crate::world::Task;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NavAclConfig {
    /// Width of the easy band in standard deviations.
    pub beta: f64,
    /// Half-width of the frontier band in standard deviations.
    pub gamma_f: f64,
    /// Predictions above this always count as easy.
    pub chi: f64,
    pub max_trials: usize,
    /// Results gathered before one predictor training step.
    pub batch: usize,
    /// Candidate tasks scored per episode for the filter statistics.
    pub candidates: usize,
    pub p_easy: f64,
    pub p_frontier: f64,
    pub p_random: f64,
    pub lr: f64,
    pub hidden: Vec<usize>,
}

impl Default for NavAclConfig {
    fn default() -> Self {
        Self {
            beta: 1.0,
            gamma_f: 0.1,
            chi: 0.95,
            max_trials: 100,
            batch: 16,
            candidates: 100,
            p_easy: 1.0 / 3.0,
            p_frontier: 1.0 / 3.0,
            p_random: 1.0 / 3.0,
            lr: 4e-4,
            hidden: vec![32, 32],
        }
    }
}

impl NavAclConfig {
    pub fn validate(&self, errors: &mut Vec<String>) {
        let probs = [self.p_easy, self.p_frontier, self.p_random];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p))
            || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            errors.push(format!(
                "curriculum task-type probabilities must be in [0, 1] and sum to 1, got {probs:?}"
            ));
        }
        if self.max_trials == 0 {
            errors.push("curriculum.max_trials must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.chi) {
            errors.push(format!(
                "curriculum.chi must be in [0, 1), got {}",
                self.chi
            ));
        }
        if !(self.beta >= 0.0) || !(self.gamma_f >= 0.0) {
            errors.push("curriculum.beta and curriculum.gamma_f must be non-negative".into());
        }
        if self.batch == 0 {
            errors.push("curriculum.batch must be at least 1".into());
        }
        if self.candidates < 2 {
            errors.push("curriculum.candidates must be at least 2".into());
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            errors.push(format!("curriculum.lr must be positive, got {}", self.lr));
        }
        if self.hidden.contains(&0) {
            errors.push("curriculum.hidden layer sizes must be positive".into());
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FilterStats {
    pub mean: f64,
    pub std: f64,
}

/// Mean and population standard deviation.
pub fn fit_normal(values: &[f64]) -> Result<FilterStats> {
    if values.len() < 2 {
        return Err(Error::InsufficientSamples {
            requested: 2,
            available: values.len(),
        });
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok(FilterStats {
        mean,
        std: var.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskType {
    Easy,
    Frontier,
    Random,
}

impl TaskType {
    pub fn as_str(&self) -> &'static str {
        match self {
            TaskType::Easy => "easy",
            TaskType::Frontier => "frontier",
            TaskType::Random => "random",
        }
    }

    /// Draws a type with the configured probabilities.
    pub fn draw<R: Rng + ?Sized>(config: &NavAclConfig, rng: &mut R) -> Self {
        let u: f64 = rng.random();
        if u < config.p_easy {
            TaskType::Easy
        } else if u < config.p_easy + config.p_frontier {
            TaskType::Frontier
        } else {
            TaskType::Random
        }
    }

    pub fn accepts(&self, c: Classification) -> bool {
        match self {
            TaskType::Easy => c.easy,
            TaskType::Frontier => c.frontier,
            TaskType::Random => true,
        }
    }
}

impl std::fmt::Display for TaskType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A task can be both easy and frontier when the bands overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Classification {
    pub easy: bool,
    pub frontier: bool,
}

pub fn classify(f: f64, stats: FilterStats, config: &NavAclConfig) -> Classification {
    let FilterStats { mean, std } = stats;
    let upper = mean + config.beta * std;
    let easy = if upper < 1.0 {
        f > upper || f > config.chi
    } else {
        f > mean
    };
    let band = config.gamma_f * std;
    Classification {
        easy,
        frontier: mean - band < f && f < mean + band,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicTask {
    pub task: Task,
    pub task_type: TaskType,
    pub prediction: f64,
    /// Sampler calls made, including a fallback draw.
    pub sampler_calls: usize,
    pub fell_back: bool,
}

/// Draws up to `max_trials` candidates and returns the first whose
/// classification matches `task_type`; falls back to one more random draw.
/// A random type returns the first draw.
pub fn get_dynamic_task<R, S, P>(
    task_type: TaskType,
    sampler: &mut S,
    predict: &mut P,
    stats: FilterStats,
    config: &NavAclConfig,
    rng: &mut R,
) -> Result<DynamicTask>
where
    R: Rng + ?Sized,
    S: FnMut(&mut R) -> Result<Task>,
    P: FnMut(&Task) -> Result<f64>,
{
    let mut calls = 0;
    for _ in 0..config.max_trials {
        let task = sampler(rng)?;
        calls += 1;
        let prediction = predict(&task)?;
        if task_type.accepts(classify(prediction, stats, config)) {
            return Ok(DynamicTask {
                task,
                task_type,
                prediction,
                sampler_calls: calls,
                fell_back: false,
            });
        }
    }
    let task = sampler(rng)?;
    let prediction = predict(&task)?;
    Ok(DynamicTask {
        task,
        task_type,
        prediction,
        sampler_calls: calls + 1,
        fell_back: true,
    })
}

/// Critic value at the start observation and the policy's mean action there.
pub fn initial_q_feature(critic: &DenseNet, actor: &Actor, obs: &[f64]) -> Result<f64> {
    let view = ArrayView2::from_shape((1, obs.len()), obs)
        .map_err(|_| Error::InvalidArgument("observation shape".into()))?;
    let a = actor.mean_action(view)?;
    Ok(q_values(critic, view, a.view())?[0])
}

/// One row of the curriculum telemetry file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurriculumRecord {
    pub episode: u64,
    pub task_type: TaskType,
    pub goal_distance: f64,
    pub agent_clearance: f64,
    pub goal_clearance: f64,
    pub relative_angle: f64,
    pub q0: f64,
    pub prediction: f64,
    pub success: bool,
}
