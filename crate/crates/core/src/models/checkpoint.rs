//! Binary checkpoint container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   b"SKSGCKPT"
//! version u32            (= 1)
//! spec    u64 length + UTF-8 JSON of the ModelSpec
//! count   u32            number of tensors
//! tensor* u32 name length, name bytes, u32 rank, rank × u64 dims,
//!         product(dims) × f64 values
//! ```
//!
//! Values are stored as raw IEEE-754 bits, so save → load is bit-exact.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::{Model, ModelSpec};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"SKSGCKPT";
const VERSION: u32 = 1;

pub fn write_checkpoint(model: &Model, mut out: impl Write) -> Result<()> {
    let io = |e| Error::Checkpoint(format!("write failed: {e}"));
    let spec = serde_json::to_vec(model.spec())
        .map_err(|e| Error::Checkpoint(format!("cannot encode spec: {e}")))?;
    let params = model.named_parameters();
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(spec.len() as u64).to_le_bytes());
    buf.extend_from_slice(&spec);
    buf.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for (name, t) in params {
        buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
        buf.extend_from_slice(name.as_bytes());
        buf.extend_from_slice(&(t.shape().len() as u32).to_le_bytes());
        for &d in t.shape() {
            buf.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for v in t.values() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    out.write_all(&buf).map_err(io)
}

struct Cursor<'a> {
    bytes: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() < n {
            return Err(Error::Checkpoint("truncated file".into()));
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn len(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Checkpoint("length overflow".into()))
    }
}

pub fn read_checkpoint(mut input: impl Read) -> Result<Model> {
    let mut bytes = Vec::new();
    input
        .read_to_end(&mut bytes)
        .map_err(|e| Error::Checkpoint(format!("read failed: {e}")))?;
    let mut cur = Cursor { bytes: &bytes };
    if cur.take(8)? != MAGIC {
        return Err(Error::Checkpoint("not a skelsign checkpoint".into()));
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let spec_len = cur.len()?;
    let spec: ModelSpec = serde_json::from_slice(cur.take(spec_len)?)
        .map_err(|e| Error::Checkpoint(format!("bad spec: {e}")))?;
    let mut model = Model::build(spec)?;
    let names: Vec<(String, Vec<usize>)> = model
        .named_parameters()
        .into_iter()
        .map(|(n, t)| (n, t.shape().to_vec()))
        .collect();
    let count = cur.u32()? as usize;
    if count != names.len() {
        return Err(Error::Checkpoint(format!(
            "{count} tensors stored, model has {}",
            names.len()
        )));
    }
    for ((expected_name, expected_shape), param) in names.iter().zip(model.parameters_mut()) {
        let name_len = cur.u32()? as usize;
        let name = String::from_utf8_lossy(cur.take(name_len)?).into_owned();
        let rank = cur.u32()? as usize;
        let shape = (0..rank).map(|_| cur.len()).collect::<Result<Vec<_>>>()?;
        if &name != expected_name || &shape != expected_shape {
            return Err(Error::Checkpoint(format!(
                "tensor `{name}` {shape:?} does not match `{expected_name}` {expected_shape:?}"
            )));
        }
        for v in param.values_mut() {
            *v = f64::from_le_bytes(cur.take(8)?.try_into().expect("8 bytes"));
        }
    }
    if !cur.bytes.is_empty() {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }
    Ok(model)
}

pub fn save_checkpoint(model: &Model, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_checkpoint(model, &mut buf)?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Model> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(std::io::BufReader::new(file))
}
