//! On-disk formats.
//!
//! `TNSR` binary tensors:
//!
//! ```text
//! b"TNSR" | 0x01 | u32 LE order N | N x u32 LE dims | prod(dims) x f64 LE (last index fastest)
//! ```
//!
//! Manifests are UTF-8 `key=value` lines separated by LF. Keys keep their
//! insertion order so that rewritten files are byte-identical.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::tensor::DenseTensor;

pub const TNSR_MAGIC: &[u8; 4] = b"TNSR";
pub const TNSR_VERSION: u8 = 1;

pub fn encode_tensor(t: &DenseTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(9 + 4 * t.order() + 8 * t.len());
    out.extend_from_slice(TNSR_MAGIC);
    out.push(TNSR_VERSION);
    out.extend_from_slice(&(t.order() as u32).to_le_bytes());
    for &d in t.dims() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for &v in t.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_tensor(bytes: &[u8]) -> Result<DenseTensor> {
    let mut r = bytes;
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("truncated header".into()))?;
    if &magic != TNSR_MAGIC {
        return Err(Error::Format("bad magic, expected TNSR".into()));
    }
    let mut ver = [0u8; 1];
    r.read_exact(&mut ver)
        .map_err(|_| Error::Format("truncated header".into()))?;
    if ver[0] != TNSR_VERSION {
        return Err(Error::Format(format!("unsupported TNSR version {}", ver[0])));
    }
    let order = read_u32(&mut r)? as usize;
    if order == 0 {
        return Err(Error::Format("order must be at least 1".into()));
    }
    let dims = (0..order)
        .map(|_| read_u32(&mut r).map(|d| d as usize))
        .collect::<Result<Vec<_>>>()?;
    let len = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Format("dims overflow".into()))?;
    if r.len() != len * 8 {
        return Err(Error::Format(format!(
            "payload holds {} bytes, dims {dims:?} need {}",
            r.len(),
            len * 8
        )));
    }
    let data = r
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    DenseTensor::new(dims, data).map_err(|e| Error::Format(e.to_string()))
}

fn read_u32(r: &mut &[u8]) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|_| Error::Format("truncated header".into()))?;
    Ok(u32::from_le_bytes(b))
}

pub fn write_tensor(path: impl AsRef<Path>, t: &DenseTensor) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_tensor(t))?;
    Ok(())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<DenseTensor> {
    decode_tensor(&fs::read(path)?)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    write_tensor(path, &DenseTensor::from_matrix(m))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    read_tensor(path)?.to_matrix()
}

/// Ordered `key=value` record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `key`, replacing an earlier value in place.
    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        let key = key.into();
        let value = value.to_string();
        if let Some(e) = self.entries.iter_mut().find(|(k, _)| *k == key) {
            e.1 = value;
        } else {
            self.entries.push((key, value));
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Format(format!("manifest is missing `{key}`")))
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        let v = self.require(key)?;
        v.parse()
            .map_err(|_| Error::Format(format!("`{key}` is not a number: {v}")))
    }

    pub fn get_usize_list(&self, key: &str) -> Result<Vec<usize>> {
        parse_usize_list(self.require(key)?)
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            s.push_str(k);
            s.push('=');
            s.push_str(v);
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = Manifest::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Format(format!("line {}: expected key=value", lineno + 1))
            })?;
            m.set(k.trim(), v.trim());
        }
        Ok(m)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }
}

pub fn join_list<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("not a nonnegative integer: `{p}`")))
        })
        .collect()
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("not a number: `{p}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_is_exact() {
        let t = DenseTensor::new(vec![1, 2], vec![1.0, -2.5]).unwrap();
        let b = encode_tensor(&t);
        assert_eq!(&b[..4], b"TNSR");
        assert_eq!(b[4], 1);
        assert_eq!(&b[5..9], &2u32.to_le_bytes());
        assert_eq!(&b[9..13], &1u32.to_le_bytes());
        assert_eq!(&b[13..17], &2u32.to_le_bytes());
        assert_eq!(&b[17..25], &1.0f64.to_le_bytes());
        assert_eq!(&b[25..33], &(-2.5f64).to_le_bytes());
        assert_eq!(b.len(), 33);
        assert_eq!(decode_tensor(&b).unwrap(), t);
    }

    #[test]
    fn rejects_malformed() {
        let t = DenseTensor::new(vec![2], vec![1.0, 2.0]).unwrap();
        let mut b = encode_tensor(&t);
        assert!(decode_tensor(&b[..b.len() - 1]).is_err());
        b[4] = 2;
        assert!(decode_tensor(&b).is_err());
        b[4] = 1;
        b[0] = b'X';
        assert!(decode_tensor(&b).is_err());
        assert!(decode_tensor(b"TNS").is_err());
    }

    #[test]
    fn manifest_text_round_trip() {
        let mut m = Manifest::new();
        m.set("order", 3).set("ranks", "2,2,2").set("fit_error", 0.125);
        m.set("order", 4);
        let text = m.to_text();
        assert_eq!(text, "order=4\nranks=2,2,2\nfit_error=0.125\n");
        let back = Manifest::parse(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.get_usize_list("ranks").unwrap(), vec![2, 2, 2]);
    }
}
