use super::Pose;

/// Exact unicycle integration of a constant (v, omega) command over `dt`.
pub fn integrate(pose: &Pose, v: f64, omega: f64, dt: f64) -> Pose {
    let th = pose.yaw;
    if omega.abs() > 1e-9 {
        let th1 = th + omega * dt;
        let r = v / omega;
        Pose::new(
            pose.x + r * (th1.sin() - th.sin()),
            pose.y - r * (th1.cos() - th.cos()),
            th1,
        )
    } else {
        Pose::new(
            pose.x + v * dt * th.cos(),
            pose.y + v * dt * th.sin(),
            th + omega * dt,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::STEP_DURATION;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn euler(pose: &Pose, v: f64, omega: f64, dt: f64, n: usize) -> (f64, f64, f64) {
        let h = dt / n as f64;
        let (mut x, mut y, mut th) = (pose.x, pose.y, pose.yaw);
        for _ in 0..n {
            // midpoint heading keeps the oracle second-order
            let mid = th + 0.5 * omega * h;
            x += v * h * mid.cos();
            y += v * h * mid.sin();
            th += omega * h;
        }
        (x, y, th)
    }

    #[test]
    fn straight_and_rotation() {
        let p = integrate(&Pose::default(), 1.0, 0.0, STEP_DURATION);
        assert_eq!((p.x, p.y, p.yaw), (0.18, 0.0, 0.0));
        let p = integrate(&Pose::default(), 0.0, 1.0, STEP_DURATION);
        assert_eq!((p.x, p.y), (0.0, 0.0));
        assert!((p.yaw - 0.18).abs() < 1e-15);
    }

    #[test]
    fn unit_arc_closed_form() {
        let p = integrate(&Pose::default(), 1.0, 1.0, STEP_DURATION);
        assert!((p.x - 0.18f64.sin()).abs() < 1e-15);
        assert!((p.y - (1.0 - 0.18f64.cos())).abs() < 1e-15);
        assert!((p.yaw - 0.18).abs() < 1e-15);
        let (x, y, th) = euler(&Pose::default(), 1.0, 1.0, STEP_DURATION, 100_000);
        assert!((p.x - x).abs() < 1e-6 && (p.y - y).abs() < 1e-6 && (p.yaw - th).abs() < 1e-9);
    }

    #[test]
    fn matches_fine_euler_on_random_commands() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let pose = Pose::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-3.0..3.0),
            );
            let v = rng.random_range(-1.0..1.0);
            let w = rng.random_range(-1.0..1.0);
            let p = integrate(&pose, v, w, STEP_DURATION);
            let (x, y, _) = euler(&pose, v, w, STEP_DURATION, 100_000);
            assert!((p.x - x).abs() < 1e-6, "x {} vs {}", p.x, x);
            assert!((p.y - y).abs() < 1e-6, "y {} vs {}", p.y, y);
        }
    }
}
