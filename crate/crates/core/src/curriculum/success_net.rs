//! Success-probability predictor over task features.

use ndarray::{Array2, ArrayView2};
use rand::Rng;

use crate::nn::codec::{Decoder, Encoder};
use crate::nn::{adam_step, sigmoid, Activation, AdamConfig, AdamState, DenseNet, Gradients};
use crate::{Error, Result};

pub const FEATURES: usize = 5;
/// Predictions are kept this far inside (0, 1).
const OUTPUT_MARGIN: f64 = 1e-12;

/// Welford running mean and variance per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningStats {
    pub count: u64,
    pub mean: [f64; FEATURES],
    pub m2: [f64; FEATURES],
}

impl Default for RunningStats {
    fn default() -> Self {
        Self {
            count: 0,
            mean: [0.0; FEATURES],
            m2: [0.0; FEATURES],
        }
    }
}

impl RunningStats {
    pub fn observe(&mut self, x: &[f64; FEATURES]) {
        self.count += 1;
        let n = self.count as f64;
        for i in 0..FEATURES {
            let d = x[i] - self.mean[i];
            self.mean[i] += d / n;
            self.m2[i] += d * (x[i] - self.mean[i]);
        }
    }

    pub fn std(&self) -> [f64; FEATURES] {
        let mut s = [1.0; FEATURES];
        if self.count >= 2 {
            for (i, v) in s.iter_mut().enumerate() {
                let sd = (self.m2[i] / self.count as f64).sqrt();
                if sd > 1e-8 {
                    *v = sd;
                }
            }
        }
        s
    }

    pub fn standardize(&self, x: &[f64; FEATURES]) -> [f64; FEATURES] {
        let sd = self.std();
        let mut out = [0.0; FEATURES];
        for i in 0..FEATURES {
            out[i] = (x[i] - self.mean[i]) / sd[i];
        }
        out
    }
}

/// Feed-forward classifier with running input standardization.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessNet {
    pub net: DenseNet,
    pub stats: RunningStats,
    pub opt: AdamState,
}

impl SuccessNet {
    pub fn new<R: Rng + ?Sized>(hidden: &[usize], lr: f64, rng: &mut R) -> Self {
        let mut sizes = vec![FEATURES];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let net = DenseNet::new(&sizes, Activation::Relu, Activation::Identity, rng);
        let opt = AdamState::for_net(AdamConfig::with_lr(lr), &net);
        Self {
            net,
            stats: RunningStats::default(),
            opt,
        }
    }

    fn inputs(&self, features: &[[f64; FEATURES]]) -> Result<Array2<f64>> {
        let mut x = Array2::zeros((features.len(), FEATURES));
        for (i, f) in features.iter().enumerate() {
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("task features"));
            }
            for (j, v) in self.stats.standardize(f).into_iter().enumerate() {
                x[[i, j]] = v;
            }
        }
        Ok(x)
    }

    /// Predicted success probability, strictly inside (0, 1).
    pub fn predict(&self, features: &[f64; FEATURES]) -> Result<f64> {
        Ok(self.predict_batch(std::slice::from_ref(features))?[0])
    }

    pub fn predict_batch(&self, features: &[[f64; FEATURES]]) -> Result<Vec<f64>> {
        let logits = self.net.forward(self.inputs(features)?.view())?;
        Ok(logits
            .iter()
            .map(|&z| sigmoid(z).clamp(OUTPUT_MARGIN, 1.0 - OUTPUT_MARGIN))
            .collect())
    }

    /// One BCE step on a batch of (features, success). Statistics absorb the
    /// batch first. Returns the mean loss before the step.
    pub fn train(&mut self, batch: &[([f64; FEATURES], bool)]) -> Result<f64> {
        if batch.is_empty() {
            return Ok(0.0);
        }
        if batch.iter().any(|(f, _)| f.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite("task features"));
        }
        for (f, _) in batch {
            self.stats.observe(f);
        }
        let feats: Vec<[f64; FEATURES]> = batch.iter().map(|(f, _)| *f).collect();
        let labels: Vec<f64> = batch
            .iter()
            .map(|(_, s)| if *s { 1.0 } else { 0.0 })
            .collect();
        let x = self.inputs(&feats)?;
        let (loss, grads) = bce_loss(&self.net, x.view(), &labels)?;
        if !loss.is_finite() {
            return Err(Error::Diverged(format!("success predictor loss {loss}")));
        }
        adam_step(&mut self.net, &grads, &mut self.opt)?;
        Ok(loss)
    }

    pub fn encode(&self, e: &mut Encoder) {
        e.tag(b"FPI ");
        e.net(&self.net);
        e.u64(self.stats.count);
        e.f64s(&self.stats.mean);
        e.f64s(&self.stats.m2);
        e.adam(&self.opt);
    }

    pub fn decode(d: &mut Decoder) -> Result<Self> {
        d.tag(b"FPI ")?;
        let net = d.net()?;
        let count = d.u64()?;
        let arr = |v: Vec<f64>| -> Result<[f64; FEATURES]> {
            v.try_into()
                .map_err(|_| Error::Checkpoint("feature statistics length".into()))
        };
        let mean = arr(d.f64s()?)?;
        let m2 = arr(d.f64s()?)?;
        Ok(Self {
            net,
            stats: RunningStats { count, mean, m2 },
            opt: d.adam()?,
        })
    }
}

/// Mean binary cross-entropy of `sigmoid(net(x))` against `labels`,
/// computed from logits, and its parameter gradients.
pub fn bce_loss(net: &DenseNet, x: ArrayView2<f64>, labels: &[f64]) -> Result<(f64, Gradients)> {
    let n = labels.len();
    if x.nrows() != n {
        return Err(Error::Dimension {
            expected: x.nrows(),
            actual: n,
        });
    }
    let tape = net.forward_recorded(x)?;
    let mut adj = Array2::zeros((n, 1));
    let mut loss = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        let z = tape.output()[[i, 0]];
        loss += (z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()) / n as f64;
        adj[[i, 0]] = (sigmoid(z) - y) / n as f64;
    }
    let (grads, _) = net.backward(&tape, adj.view());
    Ok((loss, grads))
}
