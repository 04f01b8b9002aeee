//! Deterministic 2D warehouse simulator.
//!
//! A differential-drive robot has to park underneath a four-legged dolly.
//! The robot senses its surroundings through two corner-mounted LiDARs and a
//! narrow frontal "semantic" ray fan that reports depth plus whether the ray
//! hit the dolly.

pub mod geometry;
pub mod kinematics;
pub mod reward;
pub mod sensors;
pub mod sim;
pub mod task;
pub mod trajectory;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use geometry::{wrap_angle, Aabb, Circle, OrientedRect, Vec2};
pub use kinematics::integrate;
pub use reward::{compute_reward, EventFlags, RewardWeights};
pub use sensors::{lidar_scan, semantic_scan, HitKind, RayHit, Scene};
pub use sim::{Observation, StepOutcome, World};
pub use task::{geometric_properties, sample_task, GeometricFeatures, Task, TaskBounds};
pub use trajectory::TrajectoryRecord;

/// Simulated duration of one action.
pub const STEP_DURATION: f64 = 0.18;
/// Episode step cap (~90 s of simulated time).
pub const DEFAULT_MAX_STEPS: usize = 500;
/// Center-to-center distance under which the robot counts as docked.
pub const GOAL_TOLERANCE: f64 = 0.3;
/// Number of stacked semantic frames and history slots.
pub const HISTORY_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Heading in (-pi, pi], counter-clockwise from +x.
    pub yaw: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self {
            x,
            y,
            yaw: wrap_angle(yaw),
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobotSpec {
    pub length: f64,
    pub width: f64,
    pub max_speed: f64,
    pub lidar_beams_per_sensor: usize,
    /// Degrees.
    pub lidar_fov: f64,
    pub lidar_max_range: f64,
    /// Degrees.
    pub camera_fov: f64,
    pub semantic_rays: usize,
}

impl Default for RobotSpec {
    fn default() -> Self {
        Self {
            length: 1.273,
            width: 0.63,
            max_speed: 1.2,
            lidar_beams_per_sensor: 128,
            lidar_fov: 225.0,
            lidar_max_range: 6.0,
            camera_fov: 47.0,
            semantic_rays: 32,
        }
    }
}

impl RobotSpec {
    pub fn footprint(&self, pose: &Pose) -> OrientedRect {
        OrientedRect {
            center: pose.position(),
            yaw: pose.yaw,
            half_length: self.length / 2.0,
            half_width: self.width / 2.0,
        }
    }

    pub fn observation_len(&self) -> usize {
        HISTORY_LEN * self.semantic_rays * 2 + 2 * self.lidar_beams_per_sensor + HISTORY_LEN * 3
    }

    pub fn validate(&self, errors: &mut Vec<String>) {
        if !(self.length > self.width && self.width > 0.0) {
            errors.push(format!(
                "robot: need length > width > 0 (got {} x {})",
                self.length, self.width
            ));
        }
        if !(self.lidar_max_range > 0.0) {
            errors.push("robot.lidar_max_range must be > 0".into());
        }
        if self.semantic_rays < 1 {
            errors.push("robot.semantic_rays must be >= 1".into());
        }
        if self.lidar_beams_per_sensor < 2 {
            errors.push("robot.lidar_beams_per_sensor must be >= 2".into());
        }
        if !(self.lidar_fov > 0.0 && self.lidar_fov <= 360.0) {
            errors.push("robot.lidar_fov must be in (0, 360]".into());
        }
        if !(self.camera_fov > 0.0 && self.camera_fov < 180.0) {
            errors.push("robot.camera_fov must be in (0, 180)".into());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DollySpec {
    pub length: f64,
    pub width: f64,
    pub leg_radius: f64,
}

impl Default for DollySpec {
    fn default() -> Self {
        Self {
            length: 1.23,
            width: 0.82,
            leg_radius: 0.03,
        }
    }
}

impl DollySpec {
    /// Leg circles, inset so each lies inside the footprint corner.
    pub fn legs(&self, pose: &Pose) -> [Circle; 4] {
        let hl = self.length / 2.0 - self.leg_radius;
        let hw = self.width / 2.0 - self.leg_radius;
        let c = pose.position();
        [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)].map(|(a, b)| Circle {
            center: c + Vec2::new(a, b).rotate(pose.yaw),
            radius: self.leg_radius,
        })
    }

    pub fn validate(&self, robot: &RobotSpec, errors: &mut Vec<String>) {
        if !(self.width > robot.width) {
            errors.push(format!(
                "dolly.width {} must exceed robot.width {}",
                self.width, robot.width
            ));
        }
        if !(self.leg_radius > 0.0) {
            errors.push("dolly.leg_radius must be > 0".into());
        }
        if !(self.length > 4.0 * self.leg_radius) {
            errors.push("dolly.length too small for its legs".into());
        }
    }
}

/// Initial layout of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub room: Aabb,
    pub obstacles: Vec<Aabb>,
    pub dolly: Pose,
    pub robot_start: Pose,
    pub rng_seed: u64,
}

/// Differential-drive command, already normalized to [-1, 1] per component.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Action {
    /// m/s
    pub v: f64,
    /// rad/s
    pub omega: f64,
}

impl Action {
    pub const BOUND: f64 = 1.0;

    pub fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }

    pub fn clamped(self) -> Self {
        Self {
            v: self.v.clamp(-Self::BOUND, Self::BOUND),
            omega: self.omega.clamp(-Self::BOUND, Self::BOUND),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.omega.is_finite()
    }
}

pub fn deg(d: f64) -> f64 {
    d * PI / 180.0
}
