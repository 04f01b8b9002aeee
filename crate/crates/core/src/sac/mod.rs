//! Soft actor-critic with twin critics, hard target copies and a learned
//! temperature.

mod policy;

pub use policy::{
    log_prob_terms, squashed_log_density, standard_normal, ActMode, Actor, PolicySample,
};
pub use policy::{LOG_STD_MAX, LOG_STD_MIN, TANH_EPS};

use ndarray::{concatenate, s, Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::nn::codec::{Decoder, Encoder};
use crate::nn::{adam_step, Activation, AdamConfig, AdamState, DenseNet, Gradients};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SacConfig {
    pub gamma: f64,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub lr_alpha: f64,
    pub initial_alpha: f64,
    /// Defaults to minus the action dimension.
    pub target_entropy: Option<f64>,
    pub target_update_interval: u64,
    pub batch_size: usize,
    pub hidden: Vec<usize>,
}

impl Default for SacConfig {
    fn default() -> Self {
        Self {
            gamma: 0.999,
            lr_actor: 2e-4,
            lr_critic: 2e-4,
            lr_alpha: 2e-4,
            initial_alpha: 0.2,
            target_entropy: None,
            target_update_interval: 1000,
            batch_size: 256,
            hidden: vec![128, 128],
        }
    }
}

impl SacConfig {
    pub fn validate(&self, errors: &mut Vec<String>) {
        if !(0.0..1.0).contains(&self.gamma) {
            errors.push(format!("sac.gamma must be in [0, 1), got {}", self.gamma));
        }
        for (name, lr) in [
            ("lr_actor", self.lr_actor),
            ("lr_critic", self.lr_critic),
            ("lr_alpha", self.lr_alpha),
        ] {
            if !(lr > 0.0 && lr.is_finite()) {
                errors.push(format!("sac.{name} must be positive, got {lr}"));
            }
        }
        if !(self.initial_alpha > 0.0 && self.initial_alpha.is_finite()) {
            errors.push(format!(
                "sac.initial_alpha must be positive, got {}",
                self.initial_alpha
            ));
        }
        if self.target_entropy.is_some_and(|h| !h.is_finite()) {
            errors.push("sac.target_entropy must be finite".into());
        }
        if self.target_update_interval == 0 {
            errors.push("sac.target_update_interval must be at least 1".into());
        }
        if self.batch_size == 0 {
            errors.push("sac.batch_size must be at least 1".into());
        }
        if self.hidden.contains(&0) {
            errors.push("sac.hidden layer sizes must be positive".into());
        }
    }
}

/// Minibatch in row-major matrices. `terminal` is 1.0 where bootstrapping stops.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub obs: Array2<f64>,
    pub actions: Array2<f64>,
    pub rewards: Array1<f64>,
    pub next_obs: Array2<f64>,
    pub terminal: Array1<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

fn critic_input(obs: ArrayView2<f64>, actions: ArrayView2<f64>) -> Result<Array2<f64>> {
    if obs.nrows() != actions.nrows() {
        return Err(Error::Dimension {
            expected: obs.nrows(),
            actual: actions.nrows(),
        });
    }
    concatenate(Axis(1), &[obs, actions]).map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn column(a: Array2<f64>) -> Array1<f64> {
    a.index_axis_move(Axis(1), 0)
}

/// Evaluates one critic network on (observation, action) rows.
pub fn q_values(
    critic: &DenseNet,
    obs: ArrayView2<f64>,
    actions: ArrayView2<f64>,
) -> Result<Array1<f64>> {
    Ok(column(critic.forward(critic_input(obs, actions)?.view())?))
}

/// Twin Q networks over (observation, action) plus their target copies.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticPair {
    pub q1: DenseNet,
    pub q2: DenseNet,
    pub target1: DenseNet,
    pub target2: DenseNet,
}

impl CriticPair {
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        action_dim: usize,
        hidden: &[usize],
        rng: &mut R,
    ) -> Self {
        let mut sizes = vec![obs_dim + action_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let q1 = DenseNet::new(&sizes, Activation::Relu, Activation::Identity, rng);
        let q2 = DenseNet::new(&sizes, Activation::Relu, Activation::Identity, rng);
        Self {
            target1: q1.clone(),
            target2: q2.clone(),
            q1,
            q2,
        }
    }

    pub fn q1_values(&self, obs: ArrayView2<f64>, actions: ArrayView2<f64>) -> Result<Array1<f64>> {
        q_values(&self.q1, obs, actions)
    }

    /// Elementwise min of the two target critics.
    pub fn target_min(
        &self,
        obs: ArrayView2<f64>,
        actions: ArrayView2<f64>,
    ) -> Result<Array1<f64>> {
        let x = critic_input(obs, actions)?;
        let a = column(self.target1.forward(x.view())?);
        let b = column(self.target2.forward(x.view())?);
        Ok(Zip::from(&a).and(&b).map_collect(|&p, &q| p.min(q)))
    }

    pub fn hard_target_update(&mut self) {
        self.target1.clone_from(&self.q1);
        self.target2.clone_from(&self.q2);
    }
}

/// Bootstrapped soft targets `r + gamma (min Qbar(s', a') - alpha log pi(a'|s'))`,
/// with `a'` drawn from the current policy using `noise`.
pub fn td_target(
    batch: &Batch,
    critics: &CriticPair,
    actor: &Actor,
    alpha: f64,
    gamma: f64,
    noise: ArrayView2<f64>,
) -> Result<Array1<f64>> {
    let next = actor.sample_with_noise(batch.next_obs.view(), noise)?;
    let q = critics.target_min(batch.next_obs.view(), next.action.view())?;
    Ok(td_target_from_parts(
        batch.rewards.view(),
        batch.terminal.view(),
        q.view(),
        next.log_prob.view(),
        alpha,
        gamma,
    ))
}

pub fn td_target_from_parts(
    rewards: ArrayView1<f64>,
    terminal: ArrayView1<f64>,
    min_target_q: ArrayView1<f64>,
    next_log_prob: ArrayView1<f64>,
    alpha: f64,
    gamma: f64,
) -> Array1<f64> {
    let mut y = rewards.to_owned();
    Zip::from(&mut y)
        .and(terminal)
        .and(min_target_q)
        .and(next_log_prob)
        .for_each(|y, &d, &q, &lp| {
            if d == 0.0 {
                *y += gamma * (q - alpha * lp);
            }
        });
    y
}

#[derive(Debug, Clone)]
pub struct CriticLoss {
    /// Sum of both critics' weighted half squared errors, each averaged over the batch.
    pub loss: f64,
    /// |Q1 - y| per sample.
    pub td_errors: Array1<f64>,
    pub grads_q1: Gradients,
    pub grads_q2: Gradients,
}

pub fn critic_loss(
    critics: &CriticPair,
    obs: ArrayView2<f64>,
    actions: ArrayView2<f64>,
    targets: ArrayView1<f64>,
    weights: ArrayView1<f64>,
) -> Result<CriticLoss> {
    let n = targets.len();
    if weights.len() != n || obs.nrows() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: weights.len().min(obs.nrows()),
        });
    }
    let x = critic_input(obs, actions)?;
    let mut loss = 0.0;
    let mut td_errors = Array1::zeros(n);
    let mut grads = Vec::with_capacity(2);
    for (k, net) in [&critics.q1, &critics.q2].into_iter().enumerate() {
        let tape = net.forward_recorded(x.view())?;
        let q = tape.output().column(0);
        let mut adj = Array2::zeros((n, 1));
        for i in 0..n {
            let d = q[i] - targets[i];
            loss += weights[i] * 0.5 * d * d / n as f64;
            adj[[i, 0]] = weights[i] * d / n as f64;
            if k == 0 {
                td_errors[i] = d.abs();
            }
        }
        grads.push(net.backward(&tape, adj.view()).0);
    }
    let grads_q2 = grads.pop().unwrap();
    let grads_q1 = grads.pop().unwrap();
    Ok(CriticLoss {
        loss,
        td_errors,
        grads_q1,
        grads_q2,
    })
}

#[derive(Debug, Clone)]
pub struct ActorLoss {
    pub loss: f64,
    pub grads: Gradients,
    pub log_probs: Array1<f64>,
}

/// `mean(alpha log pi(a|s) - min(Q1, Q2)(s, a))` with `a` reparameterized
/// through `noise`; gradients flow into the actor only.
pub fn actor_loss(
    actor: &Actor,
    critics: &CriticPair,
    obs: ArrayView2<f64>,
    alpha: f64,
    noise: ArrayView2<f64>,
) -> Result<ActorLoss> {
    let n = obs.nrows();
    let d = actor.action_dim();
    let sample = actor.sample_with_noise(obs, noise)?;
    let x = critic_input(obs, sample.action.view())?;
    let t1 = critics.q1.forward_recorded(x.view())?;
    let t2 = critics.q2.forward_recorded(x.view())?;
    let q1 = t1.output().column(0);
    let q2 = t2.output().column(0);

    let mut loss = 0.0;
    let mut pick1 = Array2::zeros((n, 1));
    let mut pick2 = Array2::zeros((n, 1));
    for i in 0..n {
        let q = if q1[i] <= q2[i] {
            pick1[[i, 0]] = 1.0;
            q1[i]
        } else {
            pick2[[i, 0]] = 1.0;
            q2[i]
        };
        loss += (alpha * sample.log_prob[i] - q) / n as f64;
    }
    // dQ/da for the selected critic, per sample.
    let (_, gx1) = critics.q1.backward(&t1, pick1.view());
    let (_, gx2) = critics.q2.backward(&t2, pick2.view());
    let obs_dim = obs.ncols();
    let dq_da = &gx1.slice(s![.., obs_dim..]) + &gx2.slice(s![.., obs_dim..]);

    let mut out_grad = Array2::zeros((n, 2 * d));
    let inv_n = 1.0 / n as f64;
    for i in 0..n {
        for j in 0..d {
            let a = sample.action[[i, j]];
            let e = sample.noise[[i, j]];
            let std = sample.log_std[[i, j]].exp();
            let one_minus = 1.0 - a * a;
            let g = 2.0 * a * one_minus / (one_minus + TANH_EPS);
            let dq_du = dq_da[[i, j]] * one_minus;
            out_grad[[i, j]] = inv_n * (alpha * g - dq_du);
            out_grad[[i, d + j]] = inv_n
                * sample.log_std_live[[i, j]]
                * (alpha * (g * std * e - 1.0) - dq_du * std * e);
        }
    }
    let (grads, _) = actor.net.backward(&sample.tape, out_grad.view());
    Ok(ActorLoss {
        loss,
        grads,
        log_probs: sample.log_prob,
    })
}

/// `mean(-exp(log_alpha) (log pi + target_entropy))` and its derivative in log_alpha.
pub fn alpha_loss(log_probs: ArrayView1<f64>, log_alpha: f64, target_entropy: f64) -> (f64, f64) {
    let n = log_probs.len().max(1) as f64;
    let alpha = log_alpha.exp();
    let loss = log_probs
        .iter()
        .map(|lp| -alpha * (lp + target_entropy))
        .sum::<f64>()
        / n;
    // d/d log_alpha of -exp(la) c is -exp(la) c, so the loss is its own derivative.
    (loss, loss)
}

/// Monte-Carlo policy entropy estimate `-E[log pi]` at each observation.
pub fn policy_entropy<R: Rng + ?Sized>(
    actor: &Actor,
    obs: ArrayView2<f64>,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut total = 0.0;
    for _ in 0..samples {
        total -= actor.sample(obs, rng)?.log_prob.mean().unwrap_or(0.0);
    }
    Ok(total / samples.max(1) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_loss: f64,
    pub alpha_loss: f64,
    pub alpha: f64,
    pub td_errors: Vec<f64>,
    pub mean_log_prob: f64,
    pub target_copied: bool,
}

/// Learner state: networks, optimizers, temperature and the update counter.
#[derive(Debug, Clone, PartialEq)]
pub struct Sac {
    pub config: SacConfig,
    pub actor: Actor,
    pub critics: CriticPair,
    pub log_alpha: f64,
    pub target_entropy: f64,
    pub actor_opt: AdamState,
    pub q1_opt: AdamState,
    pub q2_opt: AdamState,
    pub alpha_opt: AdamState,
    pub updates: u64,
}

impl Sac {
    pub fn new<R: Rng + ?Sized>(
        config: SacConfig,
        obs_dim: usize,
        action_dim: usize,
        rng: &mut R,
    ) -> Self {
        let actor = Actor::new(obs_dim, &config.hidden, action_dim, rng);
        let critics = CriticPair::new(obs_dim, action_dim, &config.hidden, rng);
        let actor_opt = AdamState::for_net(AdamConfig::with_lr(config.lr_actor), &actor.net);
        let q1_opt = AdamState::for_net(AdamConfig::with_lr(config.lr_critic), &critics.q1);
        let q2_opt = AdamState::for_net(AdamConfig::with_lr(config.lr_critic), &critics.q2);
        let alpha_opt = AdamState::new(AdamConfig::with_lr(config.lr_alpha), &[1]);
        Self {
            log_alpha: config.initial_alpha.ln(),
            target_entropy: config.target_entropy.unwrap_or(-(action_dim as f64)),
            config,
            actor,
            critics,
            actor_opt,
            q1_opt,
            q2_opt,
            alpha_opt,
            updates: 0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }

    /// One gradient step on both critics, the actor and the temperature.
    /// `weights` are importance-sampling weights (all ones without PER).
    pub fn update<R: Rng + ?Sized>(
        &mut self,
        batch: &Batch,
        weights: ArrayView1<f64>,
        rng: &mut R,
    ) -> Result<UpdateStats> {
        let n = batch.len();
        let d = self.actor.action_dim();
        let alpha = self.alpha();

        let noise = standard_normal(rng, n, d);
        let targets = td_target(
            batch,
            &self.critics,
            &self.actor,
            alpha,
            self.config.gamma,
            noise.view(),
        )?;
        let c = critic_loss(
            &self.critics,
            batch.obs.view(),
            batch.actions.view(),
            targets.view(),
            weights,
        )?;
        if !c.loss.is_finite() {
            return Err(Error::Diverged(format!(
                "critic loss {} at update {}",
                c.loss, self.updates
            )));
        }
        adam_step(&mut self.critics.q1, &c.grads_q1, &mut self.q1_opt)?;
        adam_step(&mut self.critics.q2, &c.grads_q2, &mut self.q2_opt)?;

        let noise = standard_normal(rng, n, d);
        let a = actor_loss(
            &self.actor,
            &self.critics,
            batch.obs.view(),
            alpha,
            noise.view(),
        )?;
        if !a.loss.is_finite() {
            return Err(Error::Diverged(format!(
                "actor loss {} at update {}",
                a.loss, self.updates
            )));
        }
        adam_step(&mut self.actor.net, &a.grads, &mut self.actor_opt)?;

        let (al, ag) = alpha_loss(a.log_probs.view(), self.log_alpha, self.target_entropy);
        if !al.is_finite() {
            return Err(Error::Diverged(format!(
                "temperature loss {al} at update {}",
                self.updates
            )));
        }
        let mut la = [self.log_alpha];
        self.alpha_opt.update(&mut [&mut la[..]], &[&[ag][..]])?;
        self.log_alpha = la[0];

        self.updates += 1;
        let target_copied = self
            .updates
            .is_multiple_of(self.config.target_update_interval);
        if target_copied {
            self.critics.hard_target_update();
        }
        Ok(UpdateStats {
            critic_loss: c.loss,
            actor_loss: a.loss,
            alpha_loss: al,
            alpha: self.alpha(),
            td_errors: c.td_errors.to_vec(),
            mean_log_prob: a.log_probs.mean().unwrap_or(0.0),
            target_copied,
        })
    }

    pub fn encode(&self, e: &mut Encoder) {
        e.tag(b"SAC ");
        e.net(&self.actor.net);
        e.net(&self.critics.q1);
        e.net(&self.critics.q2);
        e.net(&self.critics.target1);
        e.net(&self.critics.target2);
        e.adam(&self.actor_opt);
        e.adam(&self.q1_opt);
        e.adam(&self.q2_opt);
        e.adam(&self.alpha_opt);
        e.f64(self.log_alpha);
        e.f64(self.target_entropy);
        e.u64(self.updates);
    }

    /// Reads the learner state written by [`encode`](Self::encode); `config`
    /// supplies the non-serialized hyperparameters.
    pub fn decode(d: &mut Decoder, config: SacConfig) -> Result<Self> {
        d.tag(b"SAC ")?;
        let actor = Actor::from_net(d.net()?)?;
        let critics = CriticPair {
            q1: d.net()?,
            q2: d.net()?,
            target1: d.net()?,
            target2: d.net()?,
        };
        Ok(Self {
            config,
            actor,
            critics,
            actor_opt: d.adam()?,
            q1_opt: d.adam()?,
            q2_opt: d.adam()?,
            alpha_opt: d.adam()?,
            log_alpha: d.f64()?,
            target_entropy: d.f64()?,
            updates: d.u64()?,
        })
    }
}
