//! Binary checkpoints: run config, parameters, and optimizer state.
//!
//! The layout is little-endian and self-describing enough to fail loudly:
//! magic, format version, the config dump that produced the model, step
//! counters, then name/shape/data triples for every parameter followed by
//! both Adam moment vectors in the same order. Everything is f64, so a
//! load reproduces training bit for bit.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor;
use crate::nn::{AdamState, ParamSet};

pub const MAGIC: &[u8; 8] = b"MANETCKP";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub config_text: String,
    pub global_step: u64,
    pub epoch: u32,
    pub opt_step: u64,
    pub params: Vec<(String, Tensor)>,
    pub first_moments: Vec<Tensor>,
    pub second_moments: Vec<Tensor>,
}

impl Checkpoint {
    pub fn capture(
        config_text: String,
        global_step: u64,
        epoch: u32,
        params: &ParamSet,
        opt: &AdamState,
    ) -> Checkpoint {
        let (first, second) = opt.moments();
        Checkpoint {
            config_text,
            global_step,
            epoch,
            opt_step: opt.step_count(),
            params: params
                .iter()
                .map(|(_, p)| (p.name().to_string(), p.value().clone()))
                .collect(),
            first_moments: first.to_vec(),
            second_moments: second.to_vec(),
        }
    }

    /// Copy stored values into a freshly built model. The parameter list
    /// must match in order, name, and shape; anything else means the
    /// checkpoint belongs to a different architecture.
    pub fn apply_to(&self, params: &mut ParamSet) -> Result<()> {
        if self.params.len() != params.len() {
            return Err(Error::Integrity(format!(
                "checkpoint has {} parameters, model has {}",
                self.params.len(),
                params.len()
            )));
        }
        let ids: Vec<_> = params.iter().map(|(id, _)| id).collect();
        for (id, (name, stored)) in ids.into_iter().zip(&self.params) {
            if params.name(id) != name {
                return Err(Error::Integrity(format!(
                    "checkpoint parameter {name:?} does not match model parameter {:?}",
                    params.name(id)
                )));
            }
            let target = params.value_mut(id);
            if target.shape() != stored.shape() {
                return Err(Error::Integrity(format!(
                    "parameter {name}: checkpoint shape {:?} vs model shape {:?}",
                    stored.shape(),
                    target.shape()
                )));
            }
            target.data_mut().copy_from_slice(stored.data());
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        put_u32(&mut buf, VERSION);
        put_bytes(&mut buf, self.config_text.as_bytes());
        put_u64(&mut buf, self.global_step);
        put_u32(&mut buf, self.epoch);
        put_u64(&mut buf, self.opt_step);
        put_u64(&mut buf, self.params.len() as u64);
        for (name, value) in &self.params {
            put_bytes(&mut buf, name.as_bytes());
            put_tensor(&mut buf, value);
        }
        for t in self.first_moments.iter().chain(&self.second_moments) {
            put_tensor(&mut buf, t);
        }
        // Write-then-rename so a crash cannot leave a half checkpoint at
        // the target path.
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, &buf).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut r = Reader { buf: &buf, at: 0 };
        let magic = r.take(8)?;
        if magic != MAGIC {
            return Err(Error::Integrity(format!("{}: not a checkpoint file", path.display())));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Version(format!(
                "checkpoint format {version}, this build reads {VERSION}"
            )));
        }
        let config_text = String::from_utf8(r.bytes()?.to_vec())
            .map_err(|_| Error::Integrity("config block is not UTF-8".into()))?;
        let global_step = r.u64()?;
        let epoch = r.u32()?;
        let opt_step = r.u64()?;
        let count = r.u64()? as usize;
        let mut params = Vec::with_capacity(count);
        for _ in 0..count {
            let name = String::from_utf8(r.bytes()?.to_vec())
                .map_err(|_| Error::Integrity("parameter name is not UTF-8".into()))?;
            params.push((name, r.tensor()?));
        }
        let first_moments: Vec<Tensor> = (0..count).map(|_| r.tensor()).collect::<Result<_>>()?;
        let second_moments: Vec<Tensor> = (0..count).map(|_| r.tensor()).collect::<Result<_>>()?;
        if r.at != buf.len() {
            return Err(Error::Integrity(format!(
                "{} trailing bytes after checkpoint payload",
                buf.len() - r.at
            )));
        }
        Ok(Checkpoint {
            config_text,
            global_step,
            epoch,
            opt_step,
            params,
            first_moments,
            second_moments,
        })
    }
}

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_bytes(buf: &mut Vec<u8>, b: &[u8]) {
    put_u64(buf, b.len() as u64);
    buf.extend_from_slice(b);
}

fn put_tensor(buf: &mut Vec<u8>, t: &Tensor) {
    put_u32(buf, t.shape().len() as u32);
    for &d in t.shape() {
        put_u64(buf, d as u64);
    }
    for &v in t.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.at + n > self.buf.len() {
            return Err(Error::Integrity(format!(
                "truncated checkpoint: wanted {n} bytes at offset {}, file has {}",
                self.at,
                self.buf.len()
            )));
        }
        let s = &self.buf[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn bytes(&mut self) -> Result<&'a [u8]> {
        let n = self.u64()? as usize;
        self.take(n)
    }

    fn tensor(&mut self) -> Result<Tensor> {
        let rank = self.u32()? as usize;
        let mut shape = Vec::with_capacity(rank);
        let mut len = 1usize;
        for _ in 0..rank {
            let d = self.u64()? as usize;
            len = len.checked_mul(d).ok_or_else(|| {
                Error::Integrity("tensor shape overflows".into())
            })?;
            shape.push(d);
        }
        let raw = self.take(len * 8)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Tensor::new(&shape, data))
    }
}
