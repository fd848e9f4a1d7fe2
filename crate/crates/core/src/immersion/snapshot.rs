//! Binary snapshot of a discrete immersion.
//!
//! Layout: the 8 bytes `CPSNAP01`, the header length as a little-endian `u64`,
//! a UTF-8 JSON header `{"dims", "topology", "time", "step"}`, then for every
//! node in row-major multi-index order the `m + 1` homogeneous coordinates as
//! little-endian `f64` pairs `(re, im)`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::grid::GridTopology;
use super::DiscreteImmersion;
use crate::ambient::{normalize_point, CVec, Dimensions, C64};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"CPSNAP01";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotHeader {
    pub dims: Dimensions,
    pub topology: GridTopology,
    pub time: f64,
    pub step: u64,
}

pub fn write_snapshot<W: Write>(mut w: W, im: &DiscreteImmersion, time: f64, step: u64) -> Result<()> {
    let header = SnapshotHeader { dims: im.dims(), topology: im.topology().clone(), time, step };
    let json = serde_json::to_vec(&header)?;
    w.write_all(MAGIC)?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    let mut buf = Vec::with_capacity(im.len() * (im.dims().m + 1) * 16);
    for p in im.nodes() {
        for c in p.coords().iter() {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<(SnapshotHeader, DiscreteImmersion)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len);
    if len > 1 << 24 {
        return Err(Error::Snapshot(format!("header length {len} too large")));
    }
    let mut json = vec![0u8; len as usize];
    r.read_exact(&mut json)?;
    let header: SnapshotHeader =
        serde_json::from_slice(&json).map_err(|e| Error::Snapshot(format!("header: {e}")))?;
    let topology = GridTopology::new(header.topology.kind, header.topology.axes.clone())?;
    let size = header.dims.m + 1;
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    if data.len() != topology.len() * size * 16 {
        return Err(Error::Snapshot(format!(
            "{} payload bytes for {} nodes in CP^{}",
            data.len(),
            topology.len(),
            header.dims.m
        )));
    }
    let f = |k: usize| f64::from_le_bytes(data[8 * k..8 * k + 8].try_into().expect("8 bytes"));
    let nodes = (0..topology.len())
        .map(|node| {
            let z = CVec::from_fn(size, |i, _| {
                let k = 2 * (node * size + i);
                C64::new(f(k), f(k + 1))
            });
            normalize_point(z)
        })
        .collect::<Result<Vec<_>>>()?;
    let im = DiscreteImmersion::new(topology, header.dims, nodes)?;
    Ok((header, im))
}
