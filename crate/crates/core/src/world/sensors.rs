//! LiDAR and semantic ray sensing.

use super::geometry::{ray_aabb, ray_circle, ray_room_exit, Aabb, Circle, Vec2};
use super::{deg, DollySpec, Pose, RobotSpec, WorldConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HitKind {
    Wall,
    Obstacle,
    Dolly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub distance: f64,
    pub kind: HitKind,
}

/// Static geometry that rays and footprints interact with.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub room: Aabb,
    pub obstacles: Vec<Aabb>,
    pub legs: Vec<Circle>,
}

impl Scene {
    pub fn new(config: &WorldConfig, dolly: &DollySpec) -> Self {
        Self {
            room: config.room,
            obstacles: config.obstacles.clone(),
            legs: dolly.legs(&config.dolly).to_vec(),
        }
    }

    /// Nearest hit along a unit-direction ray starting inside the room.
    pub fn cast(&self, origin: Vec2, dir: Vec2) -> RayHit {
        let mut best = RayHit {
            distance: ray_room_exit(origin, dir, &self.room),
            kind: HitKind::Wall,
        };
        for b in &self.obstacles {
            if let Some(t) = ray_aabb(origin, dir, b) {
                if t < best.distance {
                    best = RayHit {
                        distance: t,
                        kind: HitKind::Obstacle,
                    };
                }
            }
        }
        for c in &self.legs {
            if let Some(t) = ray_circle(origin, dir, c) {
                if t < best.distance {
                    best = RayHit {
                        distance: t,
                        kind: HitKind::Dolly,
                    };
                }
            }
        }
        best
    }
}

/// Evenly spaced ray headings covering `fov` around `center`.
pub fn fan(center: f64, fov: f64, count: usize) -> impl Iterator<Item = f64> {
    let step = if count > 1 {
        fov / (count - 1) as f64
    } else {
        0.0
    };
    let mid = (count as f64 - 1.0) / 2.0;
    (0..count).map(move |i| center + step * (i as f64 - mid))
}

/// Origins and outward headings of the two LiDARs (front-left, rear-right corner).
pub fn lidar_mounts(robot: &RobotSpec, pose: &Pose) -> [(Vec2, f64); 2] {
    let corners = robot.footprint(pose).corners();
    let c = pose.position();
    [corners[0], corners[2]].map(|p| (p, (p - c).angle()))
}

/// Readings of both LiDARs, each range clamped and divided by the max range.
pub fn lidar_scan(scene: &Scene, robot: &RobotSpec, pose: &Pose) -> Vec<f64> {
    let max = robot.lidar_max_range;
    let mut out = Vec::with_capacity(2 * robot.lidar_beams_per_sensor);
    for (origin, heading) in lidar_mounts(robot, pose) {
        for a in fan(heading, deg(robot.lidar_fov), robot.lidar_beams_per_sensor) {
            let hit = scene.cast(origin, Vec2::from_angle(a));
            out.push(hit.distance.min(max) / max);
        }
    }
    out
}

/// Frontal fan from the chassis center: (normalized depth, dolly flag) per ray.
pub fn semantic_scan(scene: &Scene, robot: &RobotSpec, pose: &Pose) -> Vec<[f64; 2]> {
    let max = robot.lidar_max_range;
    fan(pose.yaw, deg(robot.camera_fov), robot.semantic_rays)
        .map(|a| {
            let hit = scene.cast(pose.position(), Vec2::from_angle(a));
            if hit.distance >= max {
                [1.0, 0.0]
            } else {
                [
                    hit.distance / max,
                    if hit.kind == HitKind::Dolly { 1.0 } else { 0.0 },
                ]
            }
        })
        .collect()
}
