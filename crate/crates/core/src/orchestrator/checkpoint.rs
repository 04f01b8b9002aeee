//! Whole-trainer checkpoints: learner, predictor, replay, counters and
//! every RNG stream.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{EnvConfig, Master, Trainer, TrainingConfig, Transition, Worker};
use crate::curriculum::{NavAclConfig, SuccessNet};
use crate::nn::codec::{Decoder, Encoder};
use crate::per::{PerConfig, PrioritizedReplay, SumTree};
use crate::sac::{Sac, SacConfig};
use crate::{Error, Result};

const KIND: &str = "trainer";

fn encode_rng(e: &mut Encoder, rng: &ChaCha8Rng) {
    e.bytes(&rng.get_seed());
    e.u64(rng.get_stream());
    let pos = rng.get_word_pos();
    e.u64(pos as u64);
    e.u64((pos >> 64) as u64);
}

fn decode_rng(d: &mut Decoder) -> Result<ChaCha8Rng> {
    let seed: [u8; 32] = d
        .bytes()?
        .try_into()
        .map_err(|_| Error::Checkpoint("rng seed length".into()))?;
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(d.u64()?);
    let lo = d.u64()? as u128;
    let hi = d.u64()? as u128;
    rng.set_word_pos(lo | (hi << 64));
    Ok(rng)
}

fn encode_replay(e: &mut Encoder, replay: &PrioritizedReplay<Transition>) {
    e.tag(b"PER ");
    let tree = replay.tree();
    e.usize(tree.capacity());
    e.usize(tree.cursor());
    e.usize(tree.len());
    e.f64s(tree.leaves());
    // Observations are shared between consecutive transitions; store each once.
    let mut ids: HashMap<*const f32, usize> = HashMap::new();
    let mut table: Vec<&Arc<[f32]>> = Vec::new();
    let mut id = |a: &'_ Arc<[f32]>, table: &mut Vec<&'_ Arc<[f32]>>| -> usize {
        let key = a.as_ptr();
        *ids.entry(key).or_insert_with(|| table.len())
    };
    let mut refs = Vec::with_capacity(replay.len());
    for t in replay.items() {
        let o = id(&t.obs, &mut table);
        if o == table.len() {
            table.push(&t.obs);
        }
        let n = id(&t.next_obs, &mut table);
        if n == table.len() {
            table.push(&t.next_obs);
        }
        refs.push((o, n));
    }
    e.usize(table.len());
    for obs in &table {
        e.f32s(obs);
    }
    e.usize(refs.len());
    for (t, (o, n)) in replay.items().iter().zip(refs) {
        e.usize(o);
        e.usize(n);
        e.f64(t.action[0]);
        e.f64(t.action[1]);
        e.f64(t.reward);
        e.bool(t.terminal);
        e.u32(t.worker_id);
    }
}

fn decode_replay(d: &mut Decoder, per: PerConfig) -> Result<PrioritizedReplay<Transition>> {
    d.tag(b"PER ")?;
    let capacity = d.usize()?;
    if capacity != per.capacity {
        return Err(Error::Checkpoint(format!(
            "replay capacity {capacity} differs from configured {}",
            per.capacity
        )));
    }
    let cursor = d.usize()?;
    let len = d.usize()?;
    let leaves = d.f64s()?;
    let tree = SumTree::from_leaves(capacity, &leaves, cursor, len)
        .map_err(|e| Error::Checkpoint(e.to_string()))?;
    let n_obs = d.usize()?;
    let mut table: Vec<Arc<[f32]>> = Vec::with_capacity(n_obs.min(1 << 20));
    for _ in 0..n_obs {
        table.push(d.f32s()?.into());
    }
    let n = d.usize()?;
    let mut items = Vec::with_capacity(n.min(capacity));
    let get = |i: usize| {
        table
            .get(i)
            .cloned()
            .ok_or_else(|| Error::Checkpoint("observation index out of range".into()))
    };
    for _ in 0..n {
        let obs = get(d.usize()?)?;
        let next_obs = get(d.usize()?)?;
        items.push(Transition {
            obs,
            next_obs,
            action: [d.f64()?, d.f64()?],
            reward: d.f64()?,
            terminal: d.bool()?,
            worker_id: d.u32()?,
        });
    }
    PrioritizedReplay::from_parts(per, tree, items).map_err(|e| Error::Checkpoint(e.to_string()))
}

impl Trainer {
    pub fn to_bytes(&self) -> Vec<u8> {
        let m = &self.master;
        let mut e = Encoder::new(KIND);
        m.sac.encode(&mut e);
        m.success.encode(&mut e);
        encode_replay(&mut e, &m.replay);
        e.tag(b"MSTR");
        e.usize(m.pending.len());
        for (f, s) in &m.pending {
            e.f64s(f);
            e.bool(*s);
        }
        encode_rng(&mut e, &m.rng);
        e.u64(m.version);
        e.u64(m.episodes);
        e.u64(m.transitions);
        e.usize(m.owed_updates);
        e.u64(m.predictor_steps);
        e.tag(b"WRKR");
        e.usize(self.workers.len());
        for w in &self.workers {
            e.u32(w.id);
            e.u64(w.episodes);
            encode_rng(&mut e, &w.rng);
        }
        e.finish()
    }

    /// Rebuilds a trainer from checkpoint bytes and the run configuration.
    pub fn from_bytes(
        data: &[u8],
        env: EnvConfig,
        sac: SacConfig,
        per: PerConfig,
        nav: NavAclConfig,
        training: TrainingConfig,
    ) -> Result<Self> {
        let mut t = Trainer::new(env, sac, per, nav, training)?;
        let mut d = Decoder::new(data, KIND)?;
        let learner = Sac::decode(&mut d, t.sac.clone())?;
        if learner.actor.obs_dim() != t.env.observation_len() {
            return Err(Error::Checkpoint(format!(
                "checkpoint observation width {} differs from configured {}",
                learner.actor.obs_dim(),
                t.env.observation_len()
            )));
        }
        let success = SuccessNet::decode(&mut d)?;
        let replay = decode_replay(&mut d, t.per)?;
        d.tag(b"MSTR")?;
        let n = d.usize()?;
        let mut pending = Vec::with_capacity(n.min(1024));
        for _ in 0..n {
            let f: [f64; 5] = d
                .f64s()?
                .try_into()
                .map_err(|_| Error::Checkpoint("feature length".into()))?;
            pending.push((f, d.bool()?));
        }
        let m: &mut Master = &mut t.master;
        m.sac = learner;
        m.success = success;
        m.replay = replay;
        m.pending = pending;
        m.rng = decode_rng(&mut d)?;
        m.version = d.u64()?;
        m.episodes = d.u64()?;
        m.transitions = d.u64()?;
        m.owed_updates = d.usize()?;
        m.predictor_steps = d.u64()?;
        d.tag(b"WRKR")?;
        let count = d.usize()?;
        let mut states = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            states.push((d.u32()?, d.u64()?, decode_rng(&mut d)?));
        }
        if !d.is_exhausted() {
            return Err(Error::Checkpoint("trailing bytes".into()));
        }
        let workers: Vec<Worker> = t.workers.drain(..).collect();
        for (id, episodes, rng) in states {
            let mut w = workers
                .iter()
                .find(|w| w.id == id)
                .cloned()
                .unwrap_or_else(|| {
                    Worker::new(
                        id,
                        t.training.seed,
                        t.env.clone(),
                        t.nav.clone(),
                        t.training.variant,
                    )
                });
            w.episodes = episodes;
            w.rng = rng;
            t.workers.push(w);
        }
        for w in workers {
            if !t.workers.iter().any(|x| x.id == w.id) {
                t.workers.push(w);
            }
        }
        t.workers.sort_by_key(|w| w.id);
        Ok(t)
    }

    /// Writes a checkpoint atomically (temporary file, then rename).
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.to_bytes())?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn restore(
        path: &Path,
        env: EnvConfig,
        sac: SacConfig,
        per: PerConfig,
        nav: NavAclConfig,
        training: TrainingConfig,
    ) -> Result<Self> {
        let data = std::fs::read(path)?;
        Self::from_bytes(&data, env, sac, per, nav, training)
    }
}
