//! Binary checkpoint layout.
//!
//! ```text
//! magic "DNAVCKPT" | format version u32 | kind tag (u32 len + utf8) | payload | sha256(all previous bytes)
//! ```
//!
//! All integers and floats are little-endian; floats are IEEE-754 binary64
//! unless a block is explicitly written as f32. Networks are written with a
//! layer-size header followed by weights (row-major, inputs x outputs) and
//! biases.

use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};

use super::adam::{AdamConfig, AdamState};
use super::{Activation, Dense, DenseNet};
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"DNAVCKPT";
pub const FORMAT_VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;

#[derive(Debug, Default)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new(kind: &str) -> Self {
        let mut e = Self { buf: Vec::new() };
        e.buf.extend_from_slice(MAGIC);
        e.u32(FORMAT_VERSION);
        e.str(kind);
        e
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn bool(&mut self, v: bool) {
        self.u8(v as u8);
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64s(&mut self, v: &[f64]) {
        self.usize(v.len());
        for x in v {
            self.f64(*x);
        }
    }

    pub fn f32s(&mut self, v: &[f32]) {
        self.usize(v.len());
        for x in v {
            self.buf.extend_from_slice(&x.to_le_bytes());
        }
    }

    pub fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }

    pub fn bytes(&mut self, b: &[u8]) {
        self.usize(b.len());
        self.buf.extend_from_slice(b);
    }

    /// Section marker checked on decode.
    pub fn tag(&mut self, t: &[u8; 4]) {
        self.buf.extend_from_slice(t);
    }

    pub fn net(&mut self, net: &DenseNet) {
        self.tag(b"DNET");
        let layers = net.layers();
        self.u32(layers.len() as u32);
        for l in layers {
            self.u32(l.inputs() as u32);
            self.u32(l.outputs() as u32);
            self.u8(l.activation.code());
        }
        for l in layers {
            for w in l.weight.iter() {
                self.f64(*w);
            }
            for b in l.bias.iter() {
                self.f64(*b);
            }
        }
    }

    pub fn adam(&mut self, st: &AdamState) {
        self.tag(b"ADAM");
        self.f64(st.config.lr);
        self.f64(st.config.beta1);
        self.f64(st.config.beta2);
        self.f64(st.config.eps);
        self.u64(st.step);
        self.usize(st.m.len());
        for (m, v) in st.m.iter().zip(&st.v) {
            self.f64s(m);
            self.f64s(v);
        }
    }

    /// Appends the checksum and returns the finished file contents.
    pub fn finish(mut self) -> Vec<u8> {
        let digest = Sha256::digest(&self.buf);
        self.buf.extend_from_slice(&digest);
        self.buf
    }
}

pub struct Decoder<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    /// Verifies magic, version, checksum and kind before any payload is read.
    pub fn new(data: &'a [u8], kind: &str) -> Result<Self> {
        if data.len() < MAGIC.len() + 4 + DIGEST_LEN {
            return Err(Error::Checkpoint("file too short".into()));
        }
        if &data[..MAGIC.len()] != MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let (body, digest) = data.split_at(data.len() - DIGEST_LEN);
        if Sha256::digest(body).as_slice() != digest {
            return Err(Error::Checkpoint("checksum mismatch".into()));
        }
        let mut d = Self {
            buf: body,
            pos: MAGIC.len(),
        };
        let version = d.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {version} (expected {FORMAT_VERSION})"
            )));
        }
        let found = d.str()?;
        if found != kind {
            return Err(Error::Checkpoint(format!(
                "expected a {kind} checkpoint, found {found}"
            )));
        }
        Ok(d)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Checkpoint("unexpected end of data".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn is_exhausted(&self) -> bool {
        self.pos == self.buf.len()
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn bool(&mut self) -> Result<bool> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(Error::Checkpoint(format!("invalid bool byte {b}"))),
        }
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Checkpoint("length overflow".into()))
    }

    fn len(&mut self, elem: usize) -> Result<usize> {
        let n = self.usize()?;
        if n.saturating_mul(elem) > self.buf.len() - self.pos {
            return Err(Error::Checkpoint("length exceeds data".into()));
        }
        Ok(n)
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.len(8)?;
        (0..n).map(|_| self.f64()).collect()
    }

    pub fn f32s(&mut self) -> Result<Vec<f32>> {
        let n = self.len(4)?;
        (0..n)
            .map(|_| Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap())))
            .collect()
    }

    pub fn str(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::Checkpoint("invalid utf8".into()))
    }

    pub fn bytes(&mut self) -> Result<Vec<u8>> {
        let n = self.len(1)?;
        Ok(self.take(n)?.to_vec())
    }

    pub fn tag(&mut self, t: &[u8; 4]) -> Result<()> {
        let got = self.take(4)?;
        if got != t {
            return Err(Error::Checkpoint(format!(
                "expected section {}, found {}",
                String::from_utf8_lossy(t),
                String::from_utf8_lossy(got)
            )));
        }
        Ok(())
    }

    pub fn net(&mut self) -> Result<DenseNet> {
        self.tag(b"DNET")?;
        let n = self.u32()? as usize;
        let mut shapes = Vec::with_capacity(n.min(1024));
        for _ in 0..n {
            let i = self.u32()? as usize;
            let o = self.u32()? as usize;
            let act = Activation::from_code(self.u8()?)
                .ok_or_else(|| Error::Checkpoint("unknown activation".into()))?;
            shapes.push((i, o, act));
        }
        let mut layers = Vec::with_capacity(n);
        for (i, o, activation) in shapes {
            if i.saturating_mul(o).saturating_mul(8) > self.buf.len() - self.pos {
                return Err(Error::Checkpoint("layer larger than file".into()));
            }
            let w: Vec<f64> = (0..i * o).map(|_| self.f64()).collect::<Result<_>>()?;
            let b: Vec<f64> = (0..o).map(|_| self.f64()).collect::<Result<_>>()?;
            layers.push(Dense {
                weight: Array2::from_shape_vec((i, o), w)
                    .map_err(|e| Error::Checkpoint(e.to_string()))?,
                bias: Array1::from_vec(b),
                activation,
            });
        }
        DenseNet::from_layers(layers)
            .map_err(|e| Error::Checkpoint(format!("inconsistent layer sizes: {e}")))
    }

    pub fn adam(&mut self) -> Result<AdamState> {
        self.tag(b"ADAM")?;
        let config = AdamConfig {
            lr: self.f64()?,
            beta1: self.f64()?,
            beta2: self.f64()?,
            eps: self.f64()?,
        };
        let step = self.u64()?;
        let n = self.len(16)?;
        let mut m = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            m.push(self.f64s()?);
            v.push(self.f64s()?);
        }
        Ok(AdamState { config, step, m, v })
    }
}

/// Standalone network file.
pub fn encode_net(net: &DenseNet) -> Vec<u8> {
    let mut e = Encoder::new("dense-net");
    e.net(net);
    e.finish()
}

pub fn decode_net(data: &[u8]) -> Result<DenseNet> {
    let mut d = Decoder::new(data, "dense-net")?;
    let net = d.net()?;
    if !d.is_exhausted() {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }
    Ok(net)
}
