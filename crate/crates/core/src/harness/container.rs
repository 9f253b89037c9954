//! Binary grid container: `BREG1`, a `u8` rank, `u32` little-endian
//! dimensions, then the row-major `f64` little-endian payload. Metadata
//! lives next to it in `<stem>.meta.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::{Error, Result};
use crate::radon::{GeometrySpec, Sinogram, Volume};

pub const MAGIC: &[u8; 5] = b"BREG1";

pub fn encode(dims: &[usize], data: &[f64]) -> Result<Vec<u8>> {
    if dims.is_empty() || dims.len() > u8::MAX as usize {
        return Err(Error::Format(format!("rank {} is not storable", dims.len())));
    }
    if dims.iter().product::<usize>() != data.len() {
        return Err(Error::Format(format!("dims {dims:?} do not hold {} values", data.len())));
    }
    let mut out = Vec::with_capacity(6 + 4 * dims.len() + 8 * data.len());
    out.extend_from_slice(MAGIC);
    out.push(dims.len() as u8);
    for d in dims {
        let d = u32::try_from(*d).map_err(|_| Error::Format(format!("dimension {d} exceeds u32")))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<(Vec<usize>, Vec<f64>)> {
    if bytes.len() < 6 || &bytes[..5] != MAGIC {
        return Err(Error::Format("missing BREG1 header".into()));
    }
    let ndim = bytes[5] as usize;
    let header = 6 + 4 * ndim;
    if ndim == 0 || bytes.len() < header {
        return Err(Error::Format("truncated dimension list".into()));
    }
    let dims: Vec<usize> = bytes[6..header]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")) as usize)
        .collect();
    let count = dims
        .iter()
        .try_fold(1usize, |acc, d| acc.checked_mul(*d))
        .ok_or_else(|| Error::Format("dimension product overflows".into()))?;
    let payload = &bytes[header..];
    if count.checked_mul(8) != Some(payload.len()) {
        return Err(Error::Format(format!(
            "payload has {} bytes, dims {dims:?} need {}",
            payload.len(),
            count.saturating_mul(8)
        )));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((dims, data))
}

pub fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

pub fn write(path: &Path, dims: &[usize], data: &[f64], meta: Option<&Value>) -> Result<()> {
    fs::write(path, encode(dims, data)?)?;
    if let Some(m) = meta {
        fs::write(meta_path(path), serde_json::to_string_pretty(m)? + "\n")?;
    }
    Ok(())
}

pub fn read(path: &Path) -> Result<(Vec<usize>, Vec<f64>)> {
    decode(&fs::read(path)?)
}

/// The sidecar, or `None` when there is none.
pub fn read_meta(path: &Path) -> Result<Option<Value>> {
    let p = meta_path(path);
    if !p.exists() {
        return Ok(None);
    }
    Ok(Some(serde_json::from_str(&fs::read_to_string(p)?)?))
}

/// Saves a volume as `(n_time, size, size)` and records its horizon and
/// any extra fields in the sidecar.
pub fn write_volume(path: &Path, vol: &Volume, extra: Option<Value>) -> Result<()> {
    let mut meta = serde_json::json!({ "kind": "volume", "horizon": vol.horizon });
    if let (Value::Object(m), Some(Value::Object(extra))) = (&mut meta, extra) {
        m.extend(extra);
    }
    write(path, &[vol.n_time, vol.size, vol.size], &vol.values, Some(&meta))
}

pub fn read_volume(path: &Path) -> Result<Volume> {
    let (dims, data) = read(path)?;
    if dims.len() != 3 || dims[1] != dims[2] {
        return Err(Error::Format(format!("dims {dims:?} are not a (t, n, n) volume")));
    }
    let horizon = read_meta(path)?
        .and_then(|m| m.get("horizon").and_then(Value::as_f64))
        .unwrap_or(1.0);
    Volume::new(dims[0], dims[1], horizon, data)
}

/// Saves a sinogram as `(n_time, n_angles, n_offsets)`; the geometry goes
/// into the sidecar under `geometry`.
pub fn write_sinogram(path: &Path, sino: &Sinogram, extra: Option<Value>) -> Result<()> {
    let g = &sino.geometry;
    let mut meta = serde_json::json!({ "kind": "sinogram", "geometry": g });
    if let (Value::Object(m), Some(Value::Object(extra))) = (&mut meta, extra) {
        m.extend(extra);
    }
    write(path, &[g.n_time_steps, g.n_angles_per_step, g.n_offsets], &sino.values, Some(&meta))
}

pub fn read_sinogram(path: &Path) -> Result<(Sinogram, Value)> {
    let (dims, data) = read(path)?;
    let meta = read_meta(path)?.ok_or_else(|| Error::Format("sinogram without a .meta.json sidecar".into()))?;
    let geometry: GeometrySpec = serde_json::from_value(
        meta.get("geometry")
            .cloned()
            .ok_or_else(|| Error::Format("sidecar lacks `geometry`".into()))?,
    )?;
    if dims != [geometry.n_time_steps, geometry.n_angles_per_step, geometry.n_offsets] {
        return Err(Error::Format(format!("dims {dims:?} disagree with the sidecar geometry")));
    }
    Ok((Sinogram::new(geometry, data)?, meta))
}
