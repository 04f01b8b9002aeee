//! Episode randomization and the geometric task descriptors.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{wrap_angle, Aabb, Vec2};
use super::{deg, DollySpec, Pose, RobotSpec, WorldConfig};
use crate::{Error, Result};

/// Randomization ranges for new episodes. Angles are in degrees; yaw ranges
/// are measured relative to facing along +y, towards the dolly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskBounds {
    pub room_side: [f64; 2],
    pub robot_yaw: [f64; 2],
    pub dolly_yaw: [f64; 2],
    pub obstacle_count: [usize; 2],
    pub obstacle_distance: [f64; 2],
    pub obstacle_side: [f64; 2],
    /// Uniform jitter (+-) of the robot start on both axes.
    pub robot_jitter: f64,
    /// Distance of the robot's nominal start from the near wall.
    pub start_margin: f64,
    pub goal_distance: [f64; 2],
    /// Central angle of the circle segment the dolly is placed on.
    pub goal_sector: f64,
    pub retry_cap: usize,
}

impl Default for TaskBounds {
    fn default() -> Self {
        Self {
            room_side: [8.0, 12.0],
            robot_yaw: [-90.0, 90.0],
            dolly_yaw: [-15.0, 15.0],
            obstacle_count: [1, 4],
            obstacle_distance: [2.0, 5.0],
            obstacle_side: [0.5, 1.5],
            robot_jitter: 0.5,
            start_margin: 1.5,
            goal_distance: [1.5, 5.0],
            goal_sector: 30.0,
            retry_cap: 1000,
        }
    }
}

impl TaskBounds {
    pub fn validate(&self, errors: &mut Vec<String>) {
        let mut range = |name: &str, r: [f64; 2], lo: f64, hi: f64| {
            if !(r[0] <= r[1] && r[0] >= lo && r[1] <= hi) {
                errors.push(format!(
                    "task.{name} = {r:?} must be an ordered range within [{lo}, {hi}]"
                ));
            }
        };
        range("room_side", self.room_side, 2.0, 100.0);
        range("robot_yaw", self.robot_yaw, -180.0, 180.0);
        range("dolly_yaw", self.dolly_yaw, -180.0, 180.0);
        range("obstacle_distance", self.obstacle_distance, 0.0, 50.0);
        range("obstacle_side", self.obstacle_side, 0.01, 10.0);
        range("goal_distance", self.goal_distance, 0.0, 50.0);
        if self.obstacle_count[0] > self.obstacle_count[1] || self.obstacle_count[1] > 16 {
            errors.push(format!(
                "task.obstacle_count = {:?} must be an ordered range within [0, 16]",
                self.obstacle_count
            ));
        }
        if !(self.robot_jitter >= 0.0) {
            errors.push("task.robot_jitter must be >= 0".into());
        }
        if !(self.goal_sector >= 0.0 && self.goal_sector <= 360.0) {
            errors.push("task.goal_sector must be in [0, 360]".into());
        }
        if self.retry_cap == 0 {
            errors.push("task.retry_cap must be >= 1".into());
        }
    }

    /// Bounds for an obstacle-free arena with a restricted start distribution.
    pub fn open_arena(goal_distance: [f64; 2], max_relative_angle: f64) -> Self {
        let sector = 30.0_f64.min(max_relative_angle);
        let yaw = max_relative_angle - sector / 2.0;
        Self {
            obstacle_count: [0, 0],
            goal_distance,
            goal_sector: sector,
            robot_yaw: [-yaw, yaw],
            ..Self::default()
        }
    }
}

/// Geometric descriptors of a start configuration. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricFeatures {
    pub goal_distance: f64,
    pub agent_clearance: f64,
    pub goal_clearance: f64,
    pub relative_angle: f64,
}

impl GeometricFeatures {
    pub fn with_q(&self, q0: f64) -> [f64; 5] {
        [
            self.goal_distance,
            self.agent_clearance,
            self.goal_clearance,
            self.relative_angle,
            q0,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub config: WorldConfig,
    pub geometry: GeometricFeatures,
}

impl Task {
    pub fn new(config: WorldConfig) -> Self {
        let geometry = geometric_features(&config);
        Self { config, geometry }
    }

    /// All five success-predictor inputs, given the critic's initial value.
    pub fn features(&self, q0: f64) -> [f64; 5] {
        self.geometry.with_q(q0)
    }
}

/// (distance, agent clearance, goal clearance, relative angle, q0).
pub fn geometric_properties(task: &Task, q0: f64) -> [f64; 5] {
    task.features(q0)
}

fn clearance(config: &WorldConfig, p: Vec2) -> f64 {
    config
        .obstacles
        .iter()
        .map(|o| o.distance_to(p))
        .fold(config.room.interior_clearance(p), f64::min)
}

pub fn geometric_features(config: &WorldConfig) -> GeometricFeatures {
    let s0 = config.robot_start.position();
    let g = config.dolly.position();
    GeometricFeatures {
        goal_distance: s0.distance(g),
        agent_clearance: clearance(config, s0),
        goal_clearance: clearance(config, g),
        relative_angle: wrap_angle((g - s0).angle() - config.robot_start.yaw),
    }
}

#[derive(Debug, Default)]
struct Rejections {
    start_outside: usize,
    start_collision: usize,
    dolly_outside: usize,
    obstacle: usize,
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, r: [f64; 2]) -> f64 {
    if r[0] < r[1] {
        rng.random_range(r[0]..=r[1])
    } else {
        r[0]
    }
}

/// Draws a random start configuration within `bounds`.
///
/// The robot starts near the middle of one wall, the dolly sits on a circle
/// segment ahead of it, and obstacles are placed to the dolly's left and
/// right. Draws violating any layout invariant are rejected.
pub fn sample_task<R: Rng + ?Sized>(
    rng: &mut R,
    bounds: &TaskBounds,
    robot: &RobotSpec,
    dolly: &DollySpec,
) -> Result<Task> {
    let mut rej = Rejections::default();
    for _ in 0..bounds.retry_cap {
        let w = uniform(rng, bounds.room_side);
        let l = uniform(rng, bounds.room_side);
        let room = Aabb {
            min: Vec2::new(0.0, 0.0),
            max: Vec2::new(w, l),
        };

        let jx = uniform(rng, [-bounds.robot_jitter, bounds.robot_jitter]);
        let jy = uniform(rng, [-bounds.robot_jitter, bounds.robot_jitter]);
        let robot_yaw = FRAC_PI_2 + deg(uniform(rng, bounds.robot_yaw));
        let start = Pose::new(w / 2.0 + jx, bounds.start_margin + jy, robot_yaw);

        let r = uniform(rng, bounds.goal_distance);
        let half = bounds.goal_sector / 2.0;
        let bearing = FRAC_PI_2 + deg(uniform(rng, [-half, half]));
        let g = start.position() + Vec2::from_angle(bearing) * r;
        let dolly_pose = Pose::new(g.x, g.y, FRAC_PI_2 + deg(uniform(rng, bounds.dolly_yaw)));

        let footprint = robot.footprint(&start);
        if footprint.leaves(&room) {
            rej.start_outside += 1;
            continue;
        }
        let legs = dolly.legs(&dolly_pose);
        if legs
            .iter()
            .any(|c| !room.contains(c.center) || room.interior_clearance(c.center) < c.radius)
        {
            rej.dolly_outside += 1;
            continue;
        }
        if legs.iter().any(|c| footprint.overlaps_circle(c)) {
            rej.start_collision += 1;
            continue;
        }

        let count = if bounds.obstacle_count[0] < bounds.obstacle_count[1] {
            rng.random_range(bounds.obstacle_count[0]..=bounds.obstacle_count[1])
        } else {
            bounds.obstacle_count[0]
        };
        let lateral = Vec2::from_angle(dolly_pose.yaw + FRAC_PI_2);
        let mut obstacles = Vec::with_capacity(count);
        let mut placed_all = true;
        for _ in 0..count {
            let mut placed = false;
            for _ in 0..50 {
                let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                let d = uniform(rng, bounds.obstacle_distance);
                let ow = uniform(rng, bounds.obstacle_side);
                let oh = uniform(rng, bounds.obstacle_side);
                let b = Aabb::from_center(g + lateral * (side * d), ow, oh);
                let inside = b.min.x > room.min.x
                    && b.min.y > room.min.y
                    && b.max.x < room.max.x
                    && b.max.y < room.max.y;
                if inside
                    && !footprint.overlaps_aabb(&b)
                    && b.distance_to(start.position()) > 0.0
                    && legs.iter().all(|c| b.distance_to(c.center) > c.radius)
                {
                    obstacles.push(b);
                    placed = true;
                    break;
                }
                rej.obstacle += 1;
            }
            if !placed {
                placed_all = false;
                break;
            }
        }
        if !placed_all {
            continue;
        }

        let config = WorldConfig {
            room,
            obstacles,
            dolly: dolly_pose,
            robot_start: start,
            rng_seed: rng.random(),
        };
        return Ok(Task::new(config));
    }
    Err(Error::SamplingExhausted {
        attempts: bounds.retry_cap,
        diagnostics: format!(
            "start outside room: {}, dolly outside room: {}, start collides with dolly: {}, obstacle placements rejected: {}",
            rej.start_outside, rej.dolly_outside, rej.start_collision, rej.obstacle
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn empty_room() -> WorldConfig {
        WorldConfig {
            room: Aabb {
                min: Vec2::new(-5.0, -5.0),
                max: Vec2::new(5.0, 5.0),
            },
            obstacles: vec![],
            dolly: Pose::new(0.0, 3.0, FRAC_PI_2),
            robot_start: Pose::new(0.0, 0.0, FRAC_PI_2),
            rng_seed: 0,
        }
    }

    #[test]
    fn facing_the_goal() {
        let f = geometric_properties(&Task::new(empty_room()), 1.5);
        assert_eq!(f[0], 3.0);
        assert_eq!(f[3], 0.0);
        assert_eq!(f[4], 1.5);
        assert_eq!(f[1], 5.0);
        assert_eq!(f[2], 2.0);
    }

    #[test]
    fn goal_to_the_left() {
        let mut c = empty_room();
        c.robot_start.yaw = 0.0;
        let f = geometric_properties(&Task::new(c), 0.0);
        assert!((f[3] - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            sample_task(
                &mut rng,
                &TaskBounds::default(),
                &RobotSpec::default(),
                &DollySpec::default(),
            )
            .unwrap()
        };
        let (a, b) = (draw(), draw());
        assert_eq!(
            serde_json::to_vec(&a).unwrap(),
            serde_json::to_vec(&b).unwrap()
        );
    }

    #[test]
    fn impossible_bounds_report_diagnostics() {
        let bounds = TaskBounds {
            room_side: [2.0, 2.0],
            retry_cap: 5,
            ..TaskBounds::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        match sample_task(
            &mut rng,
            &bounds,
            &RobotSpec::default(),
            &DollySpec::default(),
        ) {
            Err(Error::SamplingExhausted {
                attempts: 5,
                diagnostics,
            }) => assert!(diagnostics.contains("outside")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn open_arena_limits_relative_angle() {
        let bounds = TaskBounds::open_arena([1.5, 3.0], 45.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let t = sample_task(
                &mut rng,
                &bounds,
                &RobotSpec::default(),
                &DollySpec::default(),
            )
            .unwrap();
            assert!(t.config.obstacles.is_empty());
            assert!(t.geometry.relative_angle.abs() <= deg(45.0) + 1e-9);
            assert!((1.5 - 1e-9..=3.0 + 1e-9).contains(&t.geometry.goal_distance));
        }
    }
}
