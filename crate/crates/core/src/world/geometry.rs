//! Planar primitives, ray casting and footprint collision tests.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector pointing along `angle` (radians, counter-clockwise from +x).
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c, s)
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Self) -> f64 {
        (self - o).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Rotates counter-clockwise by `angle`.
    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec2,
    pub max: Vec2,
}

impl Aabb {
    pub fn from_center(center: Vec2, width: f64, height: f64) -> Self {
        let h = Vec2::new(width / 2.0, height / 2.0);
        Self {
            min: center - h,
            max: center + h,
        }
    }

    pub fn center(&self) -> Vec2 {
        (self.min + self.max) * 0.5
    }

    pub fn corners(&self) -> [Vec2; 4] {
        [
            self.min,
            Vec2::new(self.max.x, self.min.y),
            self.max,
            Vec2::new(self.min.x, self.max.y),
        ]
    }

    pub fn edges(&self) -> [Segment; 4] {
        let c = self.corners();
        [
            Segment { a: c[0], b: c[1] },
            Segment { a: c[1], b: c[2] },
            Segment { a: c[2], b: c[3] },
            Segment { a: c[3], b: c[0] },
        ]
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Euclidean distance from `p` to the rectangle; zero inside.
    pub fn distance_to(&self, p: Vec2) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        dx.hypot(dy)
    }

    /// Distance from an interior point to the nearest side (the room walls).
    pub fn interior_clearance(&self, p: Vec2) -> f64 {
        (p.x - self.min.x)
            .min(self.max.x - p.x)
            .min(p.y - self.min.y)
            .min(self.max.y - p.y)
    }

    pub fn intersects(&self, o: &Aabb) -> bool {
        self.min.x < o.max.x && o.min.x < self.max.x && self.min.y < o.max.y && o.min.y < self.max.y
    }
}

/// Rectangle with arbitrary heading, used for the robot footprint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedRect {
    pub center: Vec2,
    pub yaw: f64,
    pub half_length: f64,
    pub half_width: f64,
}

impl OrientedRect {
    pub fn axes(&self) -> (Vec2, Vec2) {
        let fwd = Vec2::from_angle(self.yaw);
        (fwd, Vec2::new(-fwd.y, fwd.x))
    }

    /// Corners in counter-clockwise order starting front-left.
    pub fn corners(&self) -> [Vec2; 4] {
        let (f, l) = self.axes();
        let fl = f * self.half_length;
        let wl = l * self.half_width;
        [
            self.center + fl + wl,
            self.center - fl + wl,
            self.center - fl - wl,
            self.center + fl - wl,
        ]
    }

    pub fn to_local(&self, p: Vec2) -> Vec2 {
        let (f, l) = self.axes();
        let d = p - self.center;
        Vec2::new(d.dot(f), d.dot(l))
    }

    pub fn distance_to_point(&self, p: Vec2) -> f64 {
        let q = self.to_local(p);
        let dx = (q.x.abs() - self.half_length).max(0.0);
        let dy = (q.y.abs() - self.half_width).max(0.0);
        dx.hypot(dy)
    }

    pub fn overlaps_circle(&self, c: &Circle) -> bool {
        self.distance_to_point(c.center) < c.radius
    }

    /// Separating-axis test against an axis-aligned rectangle.
    pub fn overlaps_aabb(&self, b: &Aabb) -> bool {
        let corners = self.corners();
        let (f, l) = self.axes();
        let axes = [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), f, l];
        let box_corners = b.corners();
        axes.iter().all(|&axis| {
            let (a0, a1) = project(&corners, axis);
            let (b0, b1) = project(&box_corners, axis);
            a0 < b1 && b0 < a1
        })
    }

    /// True when any part of the footprint leaves `room`.
    pub fn leaves(&self, room: &Aabb) -> bool {
        self.corners().iter().any(|&c| {
            c.x <= room.min.x || c.x >= room.max.x || c.y <= room.min.y || c.y >= room.max.y
        })
    }
}

fn project(points: &[Vec2; 4], axis: Vec2) -> (f64, f64) {
    points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            let d = p.dot(axis);
            (lo.min(d), hi.max(d))
        })
}

/// Distance along a unit-direction ray to a segment, if it is hit.
pub fn ray_segment(origin: Vec2, dir: Vec2, seg: &Segment) -> Option<f64> {
    let e = seg.b - seg.a;
    let denom = dir.cross(e);
    if denom.abs() < 1e-15 {
        return None;
    }
    let w = seg.a - origin;
    let t = w.cross(e) / denom;
    let s = w.cross(dir) / denom;
    (t >= 0.0 && (0.0..=1.0).contains(&s)).then_some(t)
}

/// Distance along a unit-direction ray to the first crossing of a circle boundary.
pub fn ray_circle(origin: Vec2, dir: Vec2, c: &Circle) -> Option<f64> {
    let m = origin - c.center;
    let b = m.dot(dir);
    let cc = m.dot(m) - c.radius * c.radius;
    if cc > 0.0 && b > 0.0 {
        return None;
    }
    let disc = b * b - cc;
    if disc < 0.0 {
        return None;
    }
    let t = -b - disc.sqrt();
    Some(t.max(0.0))
}

/// Slab test: entry distance of a ray into an axis-aligned rectangle.
pub fn ray_aabb(origin: Vec2, dir: Vec2, b: &Aabb) -> Option<f64> {
    let mut t0 = 0.0_f64;
    let mut t1 = f64::INFINITY;
    for (o, d, lo, hi) in [
        (origin.x, dir.x, b.min.x, b.max.x),
        (origin.y, dir.y, b.min.y, b.max.y),
    ] {
        if d.abs() < 1e-15 {
            if o < lo || o > hi {
                return None;
            }
        } else {
            let inv = 1.0 / d;
            let (mut near, mut far) = ((lo - o) * inv, (hi - o) * inv);
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return None;
            }
        }
    }
    Some(t0)
}

/// Exit distance of a ray that starts inside `room`.
pub fn ray_room_exit(origin: Vec2, dir: Vec2, room: &Aabb) -> f64 {
    let mut t = f64::INFINITY;
    if dir.x > 1e-15 {
        t = t.min((room.max.x - origin.x) / dir.x);
    } else if dir.x < -1e-15 {
        t = t.min((room.min.x - origin.x) / dir.x);
    }
    if dir.y > 1e-15 {
        t = t.min((room.max.y - origin.y) / dir.y);
    } else if dir.y < -1e-15 {
        t = t.min((room.min.y - origin.y) / dir.y);
    }
    t.max(0.0)
}

/// Normalizes an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}
