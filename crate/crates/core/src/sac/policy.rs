//! Tanh-squashed diagonal Gaussian policy.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::nn::{Activation, DenseNet, Tape};
use crate::{Error, Result};

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;
/// Keeps the tanh Jacobian term finite when |u| is large.
pub const TANH_EPS: f64 = 1e-6;
const HALF_LOG_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActMode {
    Sample,
    Mean,
}

/// Network mapping an observation to per-dimension (mean, log std).
#[derive(Debug, Clone, PartialEq)]
pub struct Actor {
    pub net: DenseNet,
    action_dim: usize,
}

/// A batch of reparameterized draws with everything needed for the
/// backward pass through the squashing.
#[derive(Debug, Clone)]
pub struct PolicySample {
    pub tape: Tape,
    pub mean: Array2<f64>,
    pub log_std: Array2<f64>,
    /// 1.0 where the raw log std was inside the clamp range.
    pub log_std_live: Array2<f64>,
    pub noise: Array2<f64>,
    pub pre_tanh: Array2<f64>,
    pub action: Array2<f64>,
    pub log_prob: Array1<f64>,
}

impl Actor {
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        hidden: &[usize],
        action_dim: usize,
        rng: &mut R,
    ) -> Self {
        let mut sizes = vec![obs_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(2 * action_dim);
        Self {
            net: DenseNet::new(&sizes, Activation::Relu, Activation::Identity, rng),
            action_dim,
        }
    }

    pub fn from_net(net: DenseNet) -> Result<Self> {
        let out = net.output_dim();
        if out == 0 || !out.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "actor output width {out} is not 2 x action_dim"
            )));
        }
        Ok(Self {
            net,
            action_dim: out / 2,
        })
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn obs_dim(&self) -> usize {
        self.net.input_dim()
    }

    fn split(&self, out: &Array2<f64>) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
        let d = self.action_dim;
        let mean = out.slice(s![.., ..d]).to_owned();
        let raw = out.slice(s![.., d..]);
        let log_std = raw.mapv(|v| v.clamp(LOG_STD_MIN, LOG_STD_MAX));
        let live = raw.mapv(|v| {
            if (LOG_STD_MIN..=LOG_STD_MAX).contains(&v) {
                1.0
            } else {
                0.0
            }
        });
        (mean, log_std, live)
    }

    /// Mean and clamped log std for a batch of observations.
    pub fn distribution(&self, obs: ArrayView2<f64>) -> Result<(Array2<f64>, Array2<f64>)> {
        let out = self.net.forward(obs)?;
        let (m, l, _) = self.split(&out);
        Ok((m, l))
    }

    /// Reparameterized batch draw `u = mean + std * noise`, recorded for backprop.
    pub fn sample_with_noise(
        &self,
        obs: ArrayView2<f64>,
        noise: ArrayView2<f64>,
    ) -> Result<PolicySample> {
        let tape = self.net.forward_recorded(obs)?;
        let (mean, log_std, log_std_live) = self.split(tape.output());
        if noise.dim() != mean.dim() {
            return Err(Error::Dimension {
                expected: mean.len(),
                actual: noise.len(),
            });
        }
        let pre_tanh = &mean + &(log_std.mapv(f64::exp) * noise);
        let action = pre_tanh.mapv(f64::tanh);
        let log_prob = log_prob_terms(noise, log_std.view(), action.view()).sum_axis(Axis(1));
        Ok(PolicySample {
            tape,
            mean,
            log_std,
            log_std_live,
            noise: noise.to_owned(),
            pre_tanh,
            action,
            log_prob,
        })
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        obs: ArrayView2<f64>,
        rng: &mut R,
    ) -> Result<PolicySample> {
        let noise = standard_normal(rng, obs.nrows(), self.action_dim);
        self.sample_with_noise(obs, noise.view())
    }

    /// Single-observation action and its log-density under the squashed policy.
    pub fn act<R: Rng + ?Sized>(
        &self,
        obs: &[f64],
        mode: ActMode,
        rng: &mut R,
    ) -> Result<(Vec<f64>, f64)> {
        let view = ArrayView2::from_shape((1, obs.len()), obs)
            .map_err(|_| Error::InvalidArgument("observation shape".into()))?;
        let noise = match mode {
            ActMode::Sample => standard_normal(rng, 1, self.action_dim),
            ActMode::Mean => Array2::zeros((1, self.action_dim)),
        };
        let s = self.sample_with_noise(view, noise.view())?;
        let action = s.action.row(0).mapv(|a| a.clamp(-1.0, 1.0)).to_vec();
        Ok((action, s.log_prob[0]))
    }

    /// Deterministic action (tanh of the mean) for a batch.
    pub fn mean_action(&self, obs: ArrayView2<f64>) -> Result<Array2<f64>> {
        let (m, _) = self.distribution(obs)?;
        Ok(m.mapv(f64::tanh))
    }
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.sample::<f64, _>(StandardNormal))
}

/// Per-dimension log-density of a squashed sample: Gaussian density of the
/// pre-tanh value minus log(1 - tanh^2 + eps).
pub fn log_prob_terms(
    noise: ArrayView2<f64>,
    log_std: ArrayView2<f64>,
    action: ArrayView2<f64>,
) -> Array2<f64> {
    let mut out = Array2::zeros(noise.raw_dim());
    ndarray::Zip::from(&mut out)
        .and(noise)
        .and(log_std)
        .and(action)
        .for_each(|o, &e, &ls, &a| {
            *o = -0.5 * e * e - ls - HALF_LOG_2PI - (1.0 - a * a + TANH_EPS).ln();
        });
    out
}

/// Log-density of the squashed policy at pre-tanh value `u` for one dimension.
pub fn squashed_log_density(u: f64, mean: f64, log_std: f64) -> f64 {
    let std = log_std.exp();
    let z = (u - mean) / std;
    let t = u.tanh();
    -0.5 * z * z - log_std - HALF_LOG_2PI - (1.0 - t * t + TANH_EPS).ln()
}
