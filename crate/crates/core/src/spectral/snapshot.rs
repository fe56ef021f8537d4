//! `NSEF1` velocity snapshots.
//!
//! Layout (little endian): magic `NSEF`, `u32` version 1, `f64 ℓ₁`, `f64 ℓ₂`,
//! `u32 n₁`, `u32 n₂`, then the `n₁ × n₂` row-major nodal samples of `u₁`
//! followed by those of `u₂` (`sample[i·n₂ + j] = u(x_i, y_j)`).

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::{GridSpec, VelocityField};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"NSEF";
pub const VERSION: u32 = 1;

pub fn encode(v: &VelocityField) -> Result<Vec<u8>> {
    let g = v.grid();
    let (a, b) = v.to_physical(1)?;
    let mut out = Vec::with_capacity(32 + 16 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&g.ell1.to_le_bytes());
    out.extend_from_slice(&g.ell2.to_le_bytes());
    out.extend_from_slice(&(g.n1 as u32).to_le_bytes());
    out.extend_from_slice(&(g.n2 as u32).to_le_bytes());
    for s in a.iter().chain(&b) {
        out.extend_from_slice(&s.to_le_bytes());
    }
    Ok(out)
}

/// Decodes a snapshot. The dealiasing fraction is not stored; the default
/// two-thirds rule is attached to the returned grid.
pub fn decode(mut bytes: &[u8]) -> Result<VelocityField> {
    let mut take = |n: usize| -> Result<&[u8]> {
        if bytes.len() < n {
            return Err(Error::Snapshot("truncated file".into()));
        }
        let (head, tail) = bytes.split_at(n);
        bytes = tail;
        Ok(head)
    };
    if take(4)? != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().expect("4 bytes"));
    let f64_at = |s: &[u8]| f64::from_le_bytes(s.try_into().expect("8 bytes"));
    let version = u32_at(take(4)?);
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let ell1 = f64_at(take(8)?);
    let ell2 = f64_at(take(8)?);
    let n1 = u32_at(take(4)?) as usize;
    let n2 = u32_at(take(4)?) as usize;
    let grid = GridSpec::new(ell1, ell2, n1, n2)
        .map_err(|e| Error::Snapshot(format!("invalid header: {e}")))?;
    let mut read = |count: usize| -> Result<Vec<f64>> {
        let raw = take(8 * count)?;
        Ok(raw.chunks_exact(8).map(f64_at).collect())
    };
    let a = read(grid.len())?;
    let b = read(grid.len())?;
    if !bytes.is_empty() {
        return Err(Error::Snapshot(format!("{} trailing bytes", bytes.len())));
    }
    if a.iter().chain(&b).any(|x| !x.is_finite()) {
        return Err(Error::Snapshot("non-finite sample".into()));
    }
    VelocityField::from_physical(grid, &a, &b)
}

/// Writes a snapshot atomically (temporary file + rename).
pub fn save(v: &VelocityField, path: &Path) -> Result<()> {
    let bytes = encode(v)?;
    let tmp = path.with_extension("nsef.tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Loads a snapshot and re-checks the velocity invariants (zero mean,
/// divergence-free).
pub fn load(path: &Path) -> Result<VelocityField> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let v = decode(&bytes)?;
    if !v.is_zero_mean() {
        let (m1, m2) = v.mean();
        return Err(Error::NonzeroMean { mean: m1.hypot(m2) });
    }
    v.require_solenoidal()?;
    Ok(v)
}
