use serde::{Deserialize, Serialize};

/// Events observed during one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EventFlags {
    pub goal: bool,
    pub collision_dolly: bool,
    pub collision_other: bool,
    pub slow: bool,
}

impl EventFlags {
    pub fn any_collision(&self) -> bool {
        self.collision_dolly || self.collision_other
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardWeights {
    pub step: f64,
    pub collision_dolly: f64,
    pub collision_other: f64,
    pub not_forward: f64,
    pub goal: f64,
    /// Forward speed below which `not_forward` applies.
    pub forward_threshold: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            step: -0.1,
            collision_dolly: -0.1,
            collision_other: -10.0,
            not_forward: -0.05,
            goal: 10.0,
            forward_threshold: 0.3,
        }
    }
}

const NANO: f64 = 1e9;

/// Sum of the per-step penalty and every indicator term that fired.
///
/// Terms are accumulated in integer nano-units so decimal composites such as
/// -0.15 come out as the nearest double rather than -0.15000000000000002.
pub fn compute_reward(flags: &EventFlags, weights: &RewardWeights) -> f64 {
    let nano = |w: f64| (w * NANO).round() as i64;
    let mut r = nano(weights.step);
    if flags.collision_dolly {
        r += nano(weights.collision_dolly);
    }
    if flags.collision_other {
        r += nano(weights.collision_other);
    }
    if flags.slow {
        r += nano(weights.not_forward);
    }
    if flags.goal {
        r += nano(weights.goal);
    }
    r as f64 / NANO
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(goal: bool, cd: bool, co: bool, v: f64) -> EventFlags {
        EventFlags {
            goal,
            collision_dolly: cd,
            collision_other: co,
            slow: v < 0.3,
        }
    }

    #[test]
    fn reference_values() {
        let w = RewardWeights::default();
        assert_eq!(compute_reward(&flags(false, false, false, 0.5), &w), -0.1);
        assert_eq!(compute_reward(&flags(false, false, true, 0.5), &w), -10.1);
        assert_eq!(compute_reward(&flags(true, false, false, 0.4), &w), 9.9);
        assert_eq!(compute_reward(&flags(false, false, false, 0.1), &w), -0.15);
        assert_eq!(compute_reward(&flags(false, true, false, 0.5), &w), -0.2);
    }
}
