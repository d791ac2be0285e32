//! Binary checkpoint format.
//!
//! ```text
//! "ZXNN"                      magic
//! u32                         format version
//! u32                         counter count
//!   u32 len, bytes, u64       name and value, per counter
//! u32                         tensor count
//!   u32 len, bytes            name
//!   u32 ndim, u64 × ndim      shape
//!   f64 × prod(shape)         row-major data
//! ```
//!
//! All integers and floats are little-endian.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::adam::{Adam, AdamConfig};
use crate::net::{CriticNet, NetConfig, Network, PolicyNet};
use crate::NnError;

pub const MAGIC: &[u8; 4] = b"ZXNN";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Checkpoint {
    pub counters: BTreeMap<String, u64>,
    pub tensors: Vec<(String, Tensor)>,
}

impl Checkpoint {
    pub fn counter(&self, name: &str) -> Result<u64, NnError> {
        self.counters.get(name).copied().ok_or_else(|| NnError::Checkpoint(format!("missing counter {name}")))
    }

    pub fn tensor(&self, name: &str) -> Result<&Tensor, NnError> {
        self.tensors
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
            .ok_or_else(|| NnError::Checkpoint(format!("missing tensor {name}")))
    }

    pub fn push(&mut self, name: impl Into<String>, shape: Vec<usize>, data: Vec<f64>) {
        self.tensors.push((name.into(), Tensor { shape, data }));
    }

    pub fn add_network<N: Network>(&mut self, net: &N) {
        for (name, d) in net.dense_layers() {
            self.push(format!("{name}/w"), vec![d.w.nrows(), d.w.ncols()], d.w.iter().copied().collect());
            self.push(format!("{name}/b"), vec![d.b.len()], d.b.to_vec());
        }
    }

    /// Overwrites the parameters of `net` with the stored ones.
    pub fn load_network<N: Network>(&self, net: &mut N) -> Result<(), NnError> {
        let names: Vec<String> = net.dense_layers().into_iter().map(|(n, _)| n).collect();
        for (name, d) in names.iter().zip(net.dense_layers_mut()) {
            let w = self.tensor(&format!("{name}/w"))?;
            let b = self.tensor(&format!("{name}/b"))?;
            if w.shape != [d.w.nrows(), d.w.ncols()] || b.shape != [d.b.len()] {
                return Err(NnError::Checkpoint(format!("shape mismatch for {name}")));
            }
            d.w = Array2::from_shape_vec(d.w.raw_dim(), w.data.clone()).expect("shape checked");
            d.b = Array1::from(b.data.clone());
        }
        Ok(())
    }

    pub fn add_adam(&mut self, prefix: &str, adam: &Adam) {
        self.counters.insert(format!("{prefix}/t"), adam.t);
        self.push(format!("{prefix}/m"), vec![adam.m.len()], adam.m.clone());
        self.push(format!("{prefix}/v"), vec![adam.v.len()], adam.v.clone());
    }

    pub fn load_adam(&self, prefix: &str, config: AdamConfig, num_params: usize) -> Result<Adam, NnError> {
        let m = self.tensor(&format!("{prefix}/m"))?;
        let v = self.tensor(&format!("{prefix}/v"))?;
        if m.data.len() != num_params || v.data.len() != num_params {
            return Err(NnError::Checkpoint(format!("optimizer state {prefix} has the wrong size")));
        }
        Ok(Adam { config, t: self.counter(&format!("{prefix}/t"))?, m: m.data.clone(), v: v.data.clone() })
    }

    /// Stores the architecture so networks can be rebuilt on load.
    pub fn add_net_config(&mut self, cfg: NetConfig) {
        self.counters.insert("net/hidden".into(), cfg.hidden as u64);
        self.counters.insert("net/depth".into(), cfg.depth as u64);
    }

    pub fn net_config(&self) -> Result<NetConfig, NnError> {
        Ok(NetConfig { hidden: self.counter("net/hidden")? as usize, depth: self.counter("net/depth")? as usize })
    }

    /// Rebuilds the policy stored in this checkpoint.
    pub fn policy(&self) -> Result<PolicyNet, NnError> {
        let mut rng = StdRng::seed_from_u64(0);
        let mut net = PolicyNet::new(self.net_config()?, &mut rng);
        self.load_network(&mut net)?;
        Ok(net)
    }

    pub fn critic(&self) -> Result<CriticNet, NnError> {
        let mut rng = StdRng::seed_from_u64(0);
        let mut net = CriticNet::new(self.net_config()?, &mut rng);
        self.load_network(&mut net)?;
        Ok(net)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.counters.len() as u32).to_le_bytes());
        for (name, value) in &self.counters {
            write_name(&mut out, name);
            out.extend_from_slice(&value.to_le_bytes());
        }
        out.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for (name, t) in &self.tensors {
            write_name(&mut out, name);
            out.extend_from_slice(&(t.shape.len() as u32).to_le_bytes());
            for &d in &t.shape {
                out.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for &x in &t.data {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint, NnError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(NnError::Checkpoint("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(NnError::Checkpoint(format!("unsupported version {version}")));
        }
        let mut ck = Checkpoint::default();
        for _ in 0..r.u32()? {
            let name = r.name()?;
            ck.counters.insert(name, r.u64()?);
        }
        for _ in 0..r.u32()? {
            let name = r.name()?;
            let ndim = r.u32()? as usize;
            let shape = (0..ndim).map(|_| r.u64().map(|d| d as usize)).collect::<Result<Vec<_>, _>>()?;
            let len = shape.iter().product::<usize>();
            let data = (0..len).map(|_| r.u64().map(f64::from_bits)).collect::<Result<Vec<_>, _>>()?;
            ck.tensors.push((name, Tensor { shape, data }));
        }
        if r.pos != bytes.len() {
            return Err(NnError::Checkpoint("trailing bytes".into()));
        }
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<(), NnError> {
        let tmp = path.with_extension("tmp");
        std::fs::File::create(&tmp)?.write_all(&self.to_bytes())?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint, NnError> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Checkpoint::from_bytes(&bytes)
    }
}

fn write_name(out: &mut Vec<u8>, name: &str) {
    out.extend_from_slice(&(name.len() as u32).to_le_bytes());
    out.extend_from_slice(name.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NnError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| NnError::Checkpoint("truncated file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, NnError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, NnError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn name(&mut self) -> Result<String, NnError> {
        let len = self.u32()? as usize;
        String::from_utf8(self.take(len)?.to_vec()).map_err(|_| NnError::Checkpoint("tensor name is not UTF-8".into()))
    }
}
