//! Binary container and JSON debug mirror for tensor trains.
//!
//! Binary layout, all integers `u64` little-endian:
//! `"TTAC1"`, `L`, then `(d[l], chi[l+1])` for each site, then every core in
//! row-major `(chi[l], d[l], chi[l+1])` order as interleaved `(re, im)` `f64` pairs.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tt::{TensorTrain, C64};

pub const MAGIC: &[u8; 5] = b"TTAC1";

pub fn write_binary<W: Write>(tt: &TensorTrain, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(tt.len() as u64).to_le_bytes())?;
    for c in tt.cores() {
        let (_, d, cr) = c.dim();
        w.write_all(&(d as u64).to_le_bytes())?;
        w.write_all(&(cr as u64).to_le_bytes())?;
    }
    for c in tt.cores() {
        for z in c.iter() {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

fn to_usize(v: u64, what: &str) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::Format(format!("{} {} does not fit in memory", what, v)))
}

pub fn read_binary<R: Read>(mut r: R) -> Result<TensorTrain> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let n = to_usize(read_u64(&mut r)?, "length")?;
    if n == 0 {
        return Err(Error::Format("zero-length train".into()));
    }
    let mut shapes = Vec::with_capacity(n.min(1 << 16));
    let mut left = 1usize;
    for _ in 0..n {
        let d = to_usize(read_u64(&mut r)?, "local dimension")?;
        let cr = to_usize(read_u64(&mut r)?, "bond dimension")?;
        left.checked_mul(d)
            .and_then(|x| x.checked_mul(cr))
            .ok_or_else(|| Error::Format("core size overflows".into()))?;
        shapes.push((left, d, cr));
        left = cr;
    }
    let mut cores = Vec::with_capacity(n);
    for &(cl, d, cr) in &shapes {
        let mut data = Vec::new();
        for _ in 0..cl * d * cr {
            let re = read_f64(&mut r)?;
            data.push(C64::new(re, read_f64(&mut r)?));
        }
        cores.push(Array3::from_shape_vec((cl, d, cr), data).expect("shape matches data"));
    }
    TensorTrain::new(cores).map_err(|e| Error::Format(e.to_string()))
}

pub fn to_bytes(tt: &TensorTrain) -> Vec<u8> {
    let mut v = Vec::new();
    write_binary(tt, &mut v).expect("writing to a Vec cannot fail");
    v
}

pub fn from_bytes(bytes: &[u8]) -> Result<TensorTrain> {
    read_binary(bytes)
}

pub fn save(tt: &TensorTrain, path: impl AsRef<Path>) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_binary(tt, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<TensorTrain> {
    read_binary(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct TtJson {
    pub magic: String,
    pub length: usize,
    pub local_dims: Vec<usize>,
    /// Right bond of each site.
    pub bond_dims: Vec<usize>,
    /// Each core flattened row-major as interleaved `(re, im)`.
    pub cores: Vec<Vec<f64>>,
}

impl From<&TensorTrain> for TtJson {
    fn from(tt: &TensorTrain) -> Self {
        TtJson {
            magic: String::from_utf8_lossy(MAGIC).into_owned(),
            length: tt.len(),
            local_dims: tt.local_dims(),
            bond_dims: tt.bond_dims()[1..].to_vec(),
            cores: tt.cores().iter().map(|c| c.iter().flat_map(|z| [z.re, z.im]).collect()).collect(),
        }
    }
}

impl TryFrom<TtJson> for TensorTrain {
    type Error = Error;

    fn try_from(j: TtJson) -> Result<Self> {
        if j.magic.as_bytes() != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        if j.local_dims.len() != j.length || j.bond_dims.len() != j.length || j.cores.len() != j.length {
            return Err(Error::Format("field lengths disagree".into()));
        }
        let mut left = 1;
        let mut cores = Vec::with_capacity(j.length);
        for ((&d, &cr), flat) in j.local_dims.iter().zip(&j.bond_dims).zip(j.cores) {
            if flat.len() != 2 * left * d * cr {
                return Err(Error::Format(format!("core of {} floats, expected {}", flat.len(), 2 * left * d * cr)));
            }
            let data = flat.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect();
            cores.push(Array3::from_shape_vec((left, d, cr), data).expect("checked length"));
            left = cr;
        }
        TensorTrain::new(cores).map_err(|e| Error::Format(e.to_string()))
    }
}

pub fn to_json(tt: &TensorTrain) -> Result<String> {
    Ok(serde_json::to_string_pretty(&TtJson::from(tt))?)
}

pub fn from_json(s: &str) -> Result<TensorTrain> {
    serde_json::from_str::<TtJson>(s)?.try_into()
}
