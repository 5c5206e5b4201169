//! Flat binary field dumps: little-endian f64, row-major with x₁ slowest,
//! components one after another, plus a JSON header.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub n: usize,
    pub kind: String,
    pub seed: Option<u64>,
    pub components: usize,
    pub layout: String,
}

pub const LAYOUT: &str = "f64-le, row-major x1 x2 x3, component-major";

impl SnapshotHeader {
    pub fn new(n: usize, kind: impl Into<String>, seed: Option<u64>, components: usize) -> Self {
        Self {
            n,
            kind: kind.into(),
            seed,
            components,
            layout: LAYOUT.to_string(),
        }
    }
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("bin"), stem.with_extension("json"))
}

/// Writes `<stem>.bin` and `<stem>.json`.
pub fn write_snapshot(stem: &Path, header: &SnapshotHeader, components: &[&[f64]]) -> Result<()> {
    let len = header.n * header.n * header.n;
    if components.len() != header.components || components.iter().any(|c| c.len() != len) {
        return Err(Error::InvalidGrid("snapshot component shapes do not match the header".into()));
    }
    let mut bytes = Vec::with_capacity(len * components.len() * 8);
    for c in components {
        for v in c.iter() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    let (bin, json) = paths(stem);
    fs::write(bin, bytes)?;
    fs::write(json, serde_json::to_vec_pretty(header)?)?;
    Ok(())
}

pub fn read_snapshot(stem: &Path) -> Result<(SnapshotHeader, Vec<Vec<f64>>)> {
    let (bin, json) = paths(stem);
    let header: SnapshotHeader = serde_json::from_slice(&fs::read(json)?)?;
    let bytes = fs::read(bin)?;
    let len = header.n * header.n * header.n;
    if bytes.len() != len * header.components * 8 {
        return Err(Error::InvalidGrid(format!(
            "snapshot holds {} bytes, header implies {}",
            bytes.len(),
            len * header.components * 8
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
        .collect();
    Ok((header, values.chunks(len).map(|c| c.to_vec()).collect()))
}
