//! Independent oracles shared by the integration and acceptance suites.
#![allow(dead_code)]

use dollynav::curriculum::{FilterStats, NavAclConfig};
use dollynav::nn::DenseNet;
use dollynav::sac::{Batch, Sac, SacConfig};
use dollynav::world::{
    sample_task, DollySpec, HitKind, Pose, RobotSpec, Scene, TaskBounds, Vec2, WorldConfig,
};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- raycasting

/// Ray/segment hit by Cramer's rule on `o + t d = a + s (b - a)`.
pub fn segment_hit(o: (f64, f64), d: (f64, f64), a: (f64, f64), b: (f64, f64)) -> Option<f64> {
    let e = (b.0 - a.0, b.1 - a.1);
    let det = -d.0 * e.1 + e.0 * d.1;
    if det.abs() < 1e-14 {
        return None;
    }
    let r = (a.0 - o.0, a.1 - o.1);
    let t = (-r.0 * e.1 + e.0 * r.1) / det;
    let s = (d.0 * r.1 - d.1 * r.0) / det;
    (t >= 0.0 && (0.0..=1.0).contains(&s)).then_some(t)
}

/// Smallest non-negative root of `|o + t d - c|^2 = r^2`.
pub fn circle_hit(o: (f64, f64), d: (f64, f64), c: (f64, f64), r: f64) -> Option<f64> {
    let m = (o.0 - c.0, o.1 - c.1);
    let qa = d.0 * d.0 + d.1 * d.1;
    let qb = 2.0 * (d.0 * m.0 + d.1 * m.1);
    let qc = m.0 * m.0 + m.1 * m.1 - r * r;
    if qc <= 0.0 {
        return Some(0.0);
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)]
        .into_iter()
        .filter(|t| *t >= 0.0)
        .reduce(f64::min)
}

fn rect_edges(min: Vec2, max: Vec2) -> [((f64, f64), (f64, f64)); 4] {
    [
        ((min.x, min.y), (max.x, min.y)),
        ((max.x, min.y), (max.x, max.y)),
        ((max.x, max.y), (min.x, max.y)),
        ((min.x, max.y), (min.x, min.y)),
    ]
}

/// Nearest hit over every primitive in the scene, enumerated one by one.
pub fn oracle_cast(scene: &Scene, o: (f64, f64), d: (f64, f64)) -> (f64, HitKind) {
    let mut best = (f64::INFINITY, HitKind::Wall);
    for (a, b) in rect_edges(scene.room.min, scene.room.max) {
        if let Some(t) = segment_hit(o, d, a, b) {
            if t < best.0 {
                best = (t, HitKind::Wall);
            }
        }
    }
    for ob in &scene.obstacles {
        for (a, b) in rect_edges(ob.min, ob.max) {
            if let Some(t) = segment_hit(o, d, a, b) {
                if t < best.0 {
                    best = (t, HitKind::Obstacle);
                }
            }
        }
    }
    for leg in &scene.legs {
        if let Some(t) = circle_hit(o, d, (leg.center.x, leg.center.y), leg.radius) {
            if t < best.0 {
                best = (t, HitKind::Dolly);
            }
        }
    }
    best
}

fn fan_angles(center: f64, fov_deg: f64, n: usize) -> Vec<f64> {
    let fov = fov_deg.to_radians();
    (0..n)
        .map(|i| center - fov / 2.0 + fov * i as f64 / (n - 1).max(1) as f64)
        .collect()
}

/// Raw LiDAR ranges (meters, unclamped) from both corner mounts.
pub fn oracle_lidar(scene: &Scene, robot: &RobotSpec, pose: &Pose) -> Vec<f64> {
    let (c, s) = (pose.yaw.cos(), pose.yaw.sin());
    let hl = robot.length / 2.0;
    let hw = robot.width / 2.0;
    let mut out = Vec::new();
    // front-left and rear-right corners
    for (lx, ly) in [(hl, hw), (-hl, -hw)] {
        let o = (pose.x + c * lx - s * ly, pose.y + s * lx + c * ly);
        let heading = (o.1 - pose.y).atan2(o.0 - pose.x);
        for a in fan_angles(heading, robot.lidar_fov, robot.lidar_beams_per_sensor) {
            out.push(oracle_cast(scene, o, (a.cos(), a.sin())).0);
        }
    }
    out
}

/// Raw semantic (range, is_dolly) from the chassis center.
pub fn oracle_semantic(scene: &Scene, robot: &RobotSpec, pose: &Pose) -> Vec<(f64, HitKind)> {
    fan_angles(pose.yaw, robot.camera_fov, robot.semantic_rays)
        .into_iter()
        .map(|a| oracle_cast(scene, (pose.x, pose.y), (a.cos(), a.sin())))
        .collect()
}

/// A random training layout plus a random collision-free robot pose in it.
pub fn random_scene(seed: u64) -> (WorldConfig, Pose) {
    let mut r = rng(seed);
    let robot = RobotSpec::default();
    let dolly = DollySpec::default();
    let task = sample_task(&mut r, &TaskBounds::default(), &robot, &dolly).expect("task");
    let cfg = task.config;
    let scene = Scene::new(&cfg, &dolly);
    loop {
        let p = Pose::new(
            r.random_range(cfg.room.min.x..cfg.room.max.x),
            r.random_range(cfg.room.min.y..cfg.room.max.y),
            r.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        );
        let fp = robot.footprint(&p);
        let free = !fp.leaves(&scene.room)
            && !scene.obstacles.iter().any(|b| fp.overlaps_aabb(b))
            && !scene.legs.iter().any(|c| fp.overlaps_circle(c));
        if free {
            return (cfg, p);
        }
    }
}

// ---------------------------------------------------------------- gradients

/// Norm-wise relative error `|a - n| / max(|a|, |n|)` between an analytic
/// gradient and central differences over every parameter of `net`.
pub fn fd_relative_error<F>(net: &mut DenseNet, analytic: &[Vec<f64>], h: f64, mut loss: F) -> f64
where
    F: FnMut(&DenseNet) -> f64,
{
    let mut diff = 0.0;
    let mut na = 0.0;
    let mut nn = 0.0;
    let blocks = net
        .param_blocks()
        .iter()
        .map(|b| b.len())
        .collect::<Vec<_>>();
    for (bi, &len) in blocks.iter().enumerate() {
        for j in 0..len {
            let orig = net.param_blocks()[bi][j];
            net.param_blocks_mut()[bi][j] = orig + h;
            let up = loss(net);
            net.param_blocks_mut()[bi][j] = orig - h;
            let down = loss(net);
            net.param_blocks_mut()[bi][j] = orig;
            let numeric = (up - down) / (2.0 * h);
            let a = analytic[bi][j];
            diff += (a - numeric).powi(2);
            na += a * a;
            nn += numeric * numeric;
        }
    }
    diff.sqrt() / na.sqrt().max(nn.sqrt()).max(1e-300)
}

/// Smallest |pre-activation| over the hidden layers for input `x`. Central
/// differences are only meaningful when every ReLU stays on one side of its
/// kink within the step, so generators redraw setups with a small margin.
pub fn kink_margin(net: &DenseNet, x: &Array2<f64>) -> f64 {
    let mut cur = x.clone();
    let mut m = f64::INFINITY;
    let layers = net.layers();
    for l in &layers[..layers.len() - 1] {
        let z = cur.dot(&l.weight) + &l.bias;
        m = z.iter().fold(m, |m, v| m.min(v.abs()));
        cur = z.mapv(|v| v.max(0.0));
    }
    m
}

const KINK_MARGIN: f64 = 1e-3;

fn smooth_rng(seed: u64, ok: impl Fn(&mut ChaCha8Rng) -> bool) -> ChaCha8Rng {
    (0u64..)
        .map(|attempt| rng(seed.wrapping_mul(1_000_003).wrapping_add(attempt)))
        .find(|r| ok(&mut r.clone()))
        .unwrap()
}

pub fn grads_to_vecs(g: &dollynav::nn::Gradients) -> Vec<Vec<f64>> {
    g.blocks().into_iter().map(|b| b.to_vec()).collect()
}

pub fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || r.random_range(-scale..scale))
}

// ---------------------------------------------------------------- curriculum

/// Algorithm-1 predicate evaluated literally, one condition at a time.
pub fn brute_force_classify(f: f64, mean: f64, std: f64, cfg: &NavAclConfig) -> (bool, bool) {
    let easy = if mean + cfg.beta * std < 1.0 {
        let above_band = f > mean + cfg.beta * std;
        let above_chi = f > cfg.chi;
        above_band || above_chi
    } else {
        f > mean
    };
    let lo = mean - cfg.gamma_f * std;
    let hi = mean + cfg.gamma_f * std;
    let frontier = f > lo && f < hi;
    (easy, frontier)
}

pub fn random_filter_case(r: &mut ChaCha8Rng) -> (f64, FilterStats, NavAclConfig) {
    let mean = r.random_range(0.0..1.0);
    let std = r.random_range(0.0..0.5);
    let cfg = NavAclConfig {
        beta: r.random_range(0.0..3.0),
        gamma_f: r.random_range(0.0..1.0),
        chi: r.random_range(0.5..1.0),
        ..NavAclConfig::default()
    };
    let f = r.random_range(0.0..1.0);
    (f, FilterStats { mean, std }, cfg)
}

// ---------------------------------------------------------------- SAC toys

/// Uniform replay for the toy problems.
pub struct ToyReplay {
    obs: Vec<Vec<f64>>,
    actions: Vec<Vec<f64>>,
    rewards: Vec<f64>,
    next: Vec<Vec<f64>>,
    terminal: Vec<f64>,
}

impl ToyReplay {
    pub fn new() -> Self {
        Self {
            obs: vec![],
            actions: vec![],
            rewards: vec![],
            next: vec![],
            terminal: vec![],
        }
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn push(&mut self, o: Vec<f64>, a: Vec<f64>, r: f64, n: Vec<f64>, done: bool) {
        self.obs.push(o);
        self.actions.push(a);
        self.rewards.push(r);
        self.next.push(n);
        self.terminal.push(if done { 1.0 } else { 0.0 });
    }

    pub fn sample(&self, n: usize, r: &mut ChaCha8Rng) -> Batch {
        let idx: Vec<usize> = (0..n).map(|_| r.random_range(0..self.len())).collect();
        let stack = |v: &Vec<Vec<f64>>| {
            let cols = v[0].len();
            Array2::from_shape_fn((n, cols), |(i, j)| v[idx[i]][j])
        };
        Batch {
            obs: stack(&self.obs),
            actions: stack(&self.actions),
            rewards: Array1::from_iter(idx.iter().map(|&i| self.rewards[i])),
            next_obs: stack(&self.next),
            terminal: Array1::from_iter(idx.iter().map(|&i| self.terminal[i])),
        }
    }
}

/// 1D drive-to-origin: position starts at +-1, each step moves by `0.25 a`,
/// costs 0.1 and pays 1 on reaching |x| <= 0.15. Four full-speed steps are
/// necessary and sufficient, so the best return is 1 - 4 * 0.1 = 0.6.
pub struct DriveToOrigin {
    pub x: f64,
    pub t: usize,
}

impl DriveToOrigin {
    pub const OPTIMAL_RETURN: f64 = 0.6;
    pub const HORIZON: usize = 20;

    pub fn new(x: f64) -> Self {
        Self { x, t: 0 }
    }

    pub fn obs(&self) -> Vec<f64> {
        vec![self.x, self.t as f64 / Self::HORIZON as f64]
    }

    /// (reward, terminal, timeout)
    pub fn step(&mut self, a: f64) -> (f64, bool, bool) {
        self.x = (self.x + 0.25 * a.clamp(-1.0, 1.0)).clamp(-2.0, 2.0);
        self.t += 1;
        let goal = self.x.abs() <= 0.15;
        let r = if goal { 0.9 } else { -0.1 };
        (r, goal, !goal && self.t >= Self::HORIZON)
    }
}

pub fn toy_config() -> SacConfig {
    SacConfig {
        gamma: 0.99,
        lr_actor: 1e-3,
        lr_critic: 1e-3,
        lr_alpha: 1e-3,
        initial_alpha: 0.2,
        target_entropy: None,
        target_update_interval: 50,
        batch_size: 64,
        hidden: vec![32, 32],
    }
}

/// Deterministic mean-action return averaged over both starts.
pub fn drive_eval(sac: &Sac) -> f64 {
    let mut total = 0.0;
    for x0 in [1.0, -1.0] {
        let mut env = DriveToOrigin::new(x0);
        loop {
            let o = env.obs();
            let a = sac
                .actor
                .mean_action(ndarray::ArrayView2::from_shape((1, 2), &o).unwrap())
                .unwrap()[[0, 0]];
            let (r, done, timeout) = env.step(a);
            total += r;
            if done || timeout {
                break;
            }
        }
    }
    total / 2.0
}

/// Trains on the drive-to-origin toy, evaluating every 1000 steps; returns
/// (environment steps used, best-so-far evaluation at that point).
pub fn train_drive(seed: u64, max_steps: usize) -> (usize, f64) {
    let mut r = rng(seed);
    let cfg = toy_config();
    let mut sac = Sac::new(cfg.clone(), 2, 1, &mut r);
    let mut replay = ToyReplay::new();
    let mut env = DriveToOrigin::new(if r.random_bool(0.5) { 1.0 } else { -1.0 });
    let weights = Array1::ones(cfg.batch_size);
    let mut last = f64::NEG_INFINITY;
    for step in 1..=max_steps {
        let o = env.obs();
        let (a, _) = sac
            .actor
            .act(&o, dollynav::sac::ActMode::Sample, &mut r)
            .unwrap();
        let (rew, done, timeout) = env.step(a[0]);
        replay.push(o, a, rew, env.obs(), done);
        if done || timeout {
            env = DriveToOrigin::new(if r.random_bool(0.5) { 1.0 } else { -1.0 });
        }
        if replay.len() >= cfg.batch_size {
            let batch = replay.sample(cfg.batch_size, &mut r);
            sac.update(&batch, weights.view(), &mut r).unwrap();
        }
        if step % 1000 == 0 {
            last = drive_eval(&sac);
            if last >= DriveToOrigin::OPTIMAL_RETURN * 0.95 {
                return (step, last);
            }
        }
    }
    (max_steps, last)
}

/// One-state bandit with a 2D action and reward `-|a - a*|^2`.
pub const BANDIT_OPTIMUM: [f64; 2] = [0.3, -0.4];

pub struct BanditOutcome {
    pub mean_action: [f64; 2],
    pub entropy: f64,
    pub target_entropy: f64,
}

pub fn train_bandit(seed: u64, updates: usize) -> BanditOutcome {
    let mut r = rng(seed);
    let cfg = SacConfig {
        lr_alpha: 3e-3,
        ..toy_config()
    };
    let mut sac = Sac::new(cfg.clone(), 1, 2, &mut r);
    let weights = Array1::ones(cfg.batch_size);
    let obs = Array2::ones((cfg.batch_size, 1));
    for _ in 0..updates {
        let s = sac.actor.sample(obs.view(), &mut r).unwrap();
        let actions = s.action.clone();
        let rewards =
            Array1::from_iter(actions.rows().into_iter().map(|a| {
                -((a[0] - BANDIT_OPTIMUM[0]).powi(2) + (a[1] - BANDIT_OPTIMUM[1]).powi(2))
            }));
        let batch = Batch {
            obs: obs.clone(),
            actions,
            rewards,
            next_obs: obs.clone(),
            terminal: Array1::ones(cfg.batch_size),
        };
        sac.update(&batch, weights.view(), &mut r).unwrap();
    }
    let one = Array2::ones((1, 1));
    let m = sac.actor.mean_action(one.view()).unwrap();
    let entropy =
        dollynav::sac::policy_entropy(&sac.actor, Array2::ones((2000, 1)).view(), 10, &mut r)
            .unwrap();
    BanditOutcome {
        mean_action: [m[[0, 0]], m[[0, 1]]],
        entropy,
        target_entropy: sac.target_entropy,
    }
}

// ---------------------------------------------------------------- gradient suites

const FD_STEP: f64 = 1e-5;

/// Worst relative error of both critics' loss gradients for one random setup.
pub fn critic_grad_error(seed: u64) -> f64 {
    use dollynav::sac::{critic_loss, CriticPair};
    let (obs_dim, act_dim, n) = (6, 2, 8);
    let setup = |r: &mut ChaCha8Rng| {
        let critics = CriticPair::new(obs_dim, act_dim, &[16, 16], r);
        let obs = random_matrix(r, n, obs_dim, 1.0);
        let actions = random_matrix(r, n, act_dim, 1.0);
        (critics, obs, actions)
    };
    let mut r = smooth_rng(seed, |r| {
        let (c, o, a) = setup(r);
        let x = ndarray::concatenate(ndarray::Axis(1), &[o.view(), a.view()]).unwrap();
        kink_margin(&c.q1, &x).min(kink_margin(&c.q2, &x)) > KINK_MARGIN
    });
    let (mut critics, obs, actions) = setup(&mut r);
    let targets = Array1::from_shape_simple_fn(n, || r.random_range(-2.0..2.0));
    let weights = Array1::from_shape_simple_fn(n, || r.random_range(0.1..1.0));
    let c = critic_loss(
        &critics,
        obs.view(),
        actions.view(),
        targets.view(),
        weights.view(),
    )
    .unwrap();
    let g1 = grads_to_vecs(&c.grads_q1);
    let g2 = grads_to_vecs(&c.grads_q2);
    let mut net = critics.q1.clone();
    let e1 = fd_relative_error(&mut net, &g1, FD_STEP, |q| {
        let mut cp = critics.clone();
        cp.q1 = q.clone();
        critic_loss(
            &cp,
            obs.view(),
            actions.view(),
            targets.view(),
            weights.view(),
        )
        .unwrap()
        .loss
    });
    let mut net = critics.q2.clone();
    let e2 = fd_relative_error(&mut net, &g2, FD_STEP, |q| {
        critics.q2 = q.clone();
        critic_loss(
            &critics,
            obs.view(),
            actions.view(),
            targets.view(),
            weights.view(),
        )
        .unwrap()
        .loss
    });
    e1.max(e2)
}

/// Relative error of the actor gradient through the reparameterized,
/// squashed sample with the noise held fixed.
pub fn actor_grad_error(seed: u64) -> f64 {
    use dollynav::sac::{actor_loss, standard_normal, Actor, CriticPair};
    let (obs_dim, act_dim, n) = (6, 2, 8);
    let setup = |r: &mut ChaCha8Rng| {
        let actor = Actor::new(obs_dim, &[16, 16], act_dim, r);
        let critics = CriticPair::new(obs_dim, act_dim, &[16, 16], r);
        let obs = random_matrix(r, n, obs_dim, 1.0);
        let noise = standard_normal(r, n, act_dim);
        (actor, critics, obs, noise)
    };
    let mut r = smooth_rng(seed, |r| {
        let (actor, c, o, e) = setup(r);
        let s = actor.sample_with_noise(o.view(), e.view()).unwrap();
        let x = ndarray::concatenate(ndarray::Axis(1), &[o.view(), s.action.view()]).unwrap();
        kink_margin(&actor.net, &o)
            .min(kink_margin(&c.q1, &x))
            .min(kink_margin(&c.q2, &x))
            > KINK_MARGIN
    });
    let (actor, critics, obs, noise) = setup(&mut r);
    let alpha = r.random_range(0.05..1.0);
    let a = actor_loss(&actor, &critics, obs.view(), alpha, noise.view()).unwrap();
    let g = grads_to_vecs(&a.grads);
    let mut net = actor.net.clone();
    fd_relative_error(&mut net, &g, FD_STEP, |p| {
        let act = Actor::from_net(p.clone()).unwrap();
        actor_loss(&act, &critics, obs.view(), alpha, noise.view())
            .unwrap()
            .loss
    })
}

/// Relative error of the temperature gradient in log alpha.
pub fn alpha_grad_error(seed: u64) -> f64 {
    use dollynav::sac::alpha_loss;
    let mut r = rng(seed);
    let lp = Array1::from_shape_simple_fn(16, || r.random_range(-4.0..2.0));
    let la = r.random_range(-3.0..1.0);
    let h = -2.0;
    let (_, g) = alpha_loss(lp.view(), la, h);
    let numeric = (alpha_loss(lp.view(), la + FD_STEP, h).0
        - alpha_loss(lp.view(), la - FD_STEP, h).0)
        / (2.0 * FD_STEP);
    (g - numeric).abs() / g.abs().max(numeric.abs()).max(1e-300)
}

/// Relative error of the success-predictor BCE gradient.
pub fn bce_grad_error(seed: u64) -> f64 {
    use dollynav::curriculum::bce_loss;
    use dollynav::nn::Activation;
    let setup = |r: &mut ChaCha8Rng| {
        let net = DenseNet::new(&[5, 32, 32, 1], Activation::Relu, Activation::Identity, r);
        let x = random_matrix(r, 16, 5, 2.0);
        (net, x)
    };
    let mut r = smooth_rng(seed, |r| {
        let (net, x) = setup(r);
        kink_margin(&net, &x) > KINK_MARGIN
    });
    let (mut net, x) = setup(&mut r);
    let labels: Vec<f64> = (0..16)
        .map(|_| if r.random_bool(0.5) { 1.0 } else { 0.0 })
        .collect();
    let (_, g) = bce_loss(&net, x.view(), &labels).unwrap();
    let g = grads_to_vecs(&g);
    fd_relative_error(&mut net, &g, FD_STEP, |p| {
        bce_loss(p, x.view(), &labels).unwrap().0
    })
}

// ---------------------------------------------------------------- sum tree

/// First index whose running sum exceeds `mass`, by linear scan.
pub fn linear_scan(leaves: &[f64], mass: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in leaves.iter().enumerate() {
        acc += p;
        if acc > mass {
            return i;
        }
    }
    leaves.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Number of (integer priorities, draw) cases where the tree descent and
/// the linear scan disagree.
pub fn descent_mismatches(cases: usize, seed: u64) -> usize {
    use dollynav::per::SumTree;
    let mut r = rng(seed);
    let mut bad = 0;
    for _ in 0..cases {
        let cap = 1usize << r.random_range(0..8);
        let n = r.random_range(1..=cap);
        let mut tree = SumTree::new(cap).unwrap();
        let mut leaves = vec![0.0; cap];
        for leaf in leaves.iter_mut().take(n) {
            let p = r.random_range(0..6) as f64;
            tree.push(p);
            *leaf = p;
        }
        let total: f64 = leaves.iter().sum();
        if total == 0.0 {
            continue;
        }
        // Integer draws hit interval boundaries exactly; fractional ones land inside.
        let mass = if r.random_bool(0.5) {
            r.random_range(0..total as u64) as f64
        } else {
            r.random_range(0.0..total)
        };
        if tree.find(mass) != linear_scan(&leaves, mass) {
            bad += 1;
        }
    }
    bad
}

/// Largest relative gap between sampling frequency and normalized priority
/// over `draws` stratified draws.
pub fn stratified_frequency_error(draws: usize, seed: u64) -> f64 {
    use dollynav::per::{PerConfig, PrioritizedReplay};
    let mut r = rng(seed);
    let mut replay = PrioritizedReplay::new(PerConfig {
        capacity: 16,
        ..PerConfig::default()
    })
    .unwrap();
    let priorities: Vec<f64> = (0..16).map(|_| r.random_range(0.5..4.0)).collect();
    for (i, &p) in priorities.iter().enumerate() {
        replay.push_with_priority(i, p);
    }
    let batch = 16;
    let mut counts = [0usize; 16];
    for _ in 0..draws / batch {
        for i in replay.sample(batch, 0.4, &mut r).unwrap().indices {
            counts[i] += 1;
        }
    }
    let total: f64 = priorities.iter().sum();
    let drawn = (draws / batch * batch) as f64;
    priorities
        .iter()
        .zip(counts)
        .map(|(p, c)| ((c as f64 / drawn) - p / total).abs() / (p / total))
        .fold(0.0, f64::max)
}

/// |root - fresh sum of leaves| after `mutations` random pushes and updates.
pub fn root_drift(mutations: usize, seed: u64) -> f64 {
    use dollynav::per::SumTree;
    let mut r = rng(seed);
    let mut tree = SumTree::new(1024).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..mutations {
        if tree.is_empty() || r.random_bool(0.5) {
            tree.push(r.random_range(0.0..10.0));
        } else {
            let i = r.random_range(0..tree.len());
            tree.set(i, r.random_range(0.0..10.0));
        }
        let fresh: f64 = tree.leaves().iter().sum();
        worst = worst.max((tree.total() - fresh).abs());
    }
    worst
}

/// (mismatches, cases on the saturated branch, cases accepted through chi)
pub fn classify_mismatches(cases: usize, seed: u64) -> (usize, usize, usize) {
    use dollynav::curriculum::classify;
    let mut r = rng(seed);
    let (mut bad, mut saturated, mut via_chi) = (0, 0, 0);
    for _ in 0..cases {
        let (f, stats, cfg) = random_filter_case(&mut r);
        let got = classify(f, stats, &cfg);
        let (easy, frontier) = brute_force_classify(f, stats.mean, stats.std, &cfg);
        if got.easy != easy || got.frontier != frontier {
            bad += 1;
        }
        if stats.mean + cfg.beta * stats.std > 1.0 {
            saturated += 1;
        } else if f > cfg.chi && f <= stats.mean + cfg.beta * stats.std {
            via_chi += 1;
        }
    }
    (bad, saturated, via_chi)
}

/// Largest sampler-call count of `get_dynamic_task` over `runs` draws with
/// a predictor that rarely matches, plus whether every accepted task's
/// classification re-checks against the brute-force predicate.
pub fn dynamic_task_calls(runs: usize, seed: u64) -> (usize, bool) {
    use dollynav::curriculum::{get_dynamic_task, TaskType};
    let mut r = rng(seed);
    let robot = RobotSpec::default();
    let dolly = DollySpec::default();
    let bounds = TaskBounds::default();
    let task = sample_task(&mut r, &bounds, &robot, &dolly).unwrap();
    let mut worst = 0;
    let mut consistent = true;
    for k in 0..runs {
        let (_, stats, cfg) = random_filter_case(&mut r);
        let ty = [TaskType::Easy, TaskType::Frontier, TaskType::Random][k % 3];
        let mut sampler = |_: &mut ChaCha8Rng| Ok(task.clone());
        let mut predict = |_: &dollynav::world::Task| Ok(r.random_range(0.0..1.0));
        let mut inner = rng(seed ^ k as u64);
        let d = get_dynamic_task(ty, &mut sampler, &mut predict, stats, &cfg, &mut inner).unwrap();
        worst = worst.max(d.sampler_calls);
        if !d.fell_back {
            let (easy, frontier) = brute_force_classify(d.prediction, stats.mean, stats.std, &cfg);
            consistent &= match ty {
                TaskType::Easy => easy,
                TaskType::Frontier => frontier,
                TaskType::Random => d.sampler_calls == 1,
            };
        } else {
            consistent &= d.sampler_calls == cfg.max_trials + 1;
        }
    }
    (worst, consistent)
}

// ---------------------------------------------------------------- training

pub type Parts = (
    dollynav::orchestrator::EnvConfig,
    SacConfig,
    dollynav::per::PerConfig,
    NavAclConfig,
    dollynav::orchestrator::TrainingConfig,
);

/// Small, fast configuration for orchestration tests.
pub fn small_parts(seed: u64, workers: usize, synchronous: bool, episodes: u64) -> Parts {
    use dollynav::orchestrator::{EnvConfig, TrainingConfig};
    use dollynav::per::PerConfig;
    let env = EnvConfig {
        max_steps: 40,
        ..EnvConfig::default()
    };
    let sac = SacConfig {
        batch_size: 16,
        hidden: vec![16, 16],
        target_update_interval: 20,
        ..SacConfig::default()
    };
    let per = PerConfig {
        capacity: 1 << 14,
        ..PerConfig::default()
    };
    let nav = NavAclConfig {
        hidden: vec![8, 8],
        ..NavAclConfig::default()
    };
    let training = TrainingConfig {
        seed,
        workers,
        episodes,
        updates_per_episode: 4,
        synchronous,
        ..TrainingConfig::default()
    };
    (env, sac, per, nav, training)
}

pub fn build(p: Parts) -> dollynav::orchestrator::Trainer {
    dollynav::orchestrator::Trainer::new(p.0, p.1, p.2, p.3, p.4).unwrap()
}

pub fn small_trainer(
    seed: u64,
    workers: usize,
    synchronous: bool,
    episodes: u64,
) -> dollynav::orchestrator::Trainer {
    build(small_parts(seed, workers, synchronous, episodes))
}
