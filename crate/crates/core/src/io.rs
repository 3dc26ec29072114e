//! Binary trace container.
//!
//! Layout (little-endian): magic `SQZB`, version `u32`, sample_rate `f64`,
//! n_samples `u64`, sweep_period `f64`, phase_offset `f64`, kind `u8`,
//! then n_samples IEEE-754 `f64` values.

use crate::types::{AcquisitionConfig, BroadbandTrace, Error, Result, TraceKind};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"SQZB";
pub const VERSION: u32 = 1;

pub fn write_trace(path: &Path, trace: &BroadbandTrace) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_trace_to(&mut w, trace)?;
    w.flush()?;
    Ok(())
}

pub fn write_trace_to<W: Write>(w: &mut W, trace: &BroadbandTrace) -> Result<()> {
    if !trace.samples.iter().all(|v| v.is_finite()) {
        return Err(Error::Data("refusing to write non-finite samples".into()));
    }
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&trace.config.sample_rate.to_le_bytes())?;
    w.write_all(&(trace.samples.len() as u64).to_le_bytes())?;
    w.write_all(&trace.config.sweep_period.to_le_bytes())?;
    w.write_all(&trace.config.phase_offset.to_le_bytes())?;
    w.write_all(&[trace.kind.as_u8()])?;
    for v in &trace.samples {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Read a trace file. Band count is not part of the container and must be
/// supplied by the caller's configuration.
pub fn read_trace(path: &Path, n_bands: usize) -> Result<BroadbandTrace> {
    let mut r = BufReader::new(File::open(path)?);
    read_trace_from(&mut r, n_bands)
}

pub fn read_trace_from<R: Read>(r: &mut R, n_bands: usize) -> Result<BroadbandTrace> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Data("bad magic; not a trace file".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Data(format!("unsupported trace version {version}")));
    }
    let sample_rate = read_f64(r)?;
    let n_samples = read_u64(r)? as usize;
    let sweep_period = read_f64(r)?;
    let phase_offset = read_f64(r)?;
    let mut kind = [0u8; 1];
    r.read_exact(&mut kind)?;
    let kind = TraceKind::from_u8(kind[0])?;

    let mut samples = vec![0.0f64; n_samples];
    let mut buf = [0u8; 8];
    for v in samples.iter_mut() {
        r.read_exact(&mut buf)?;
        *v = f64::from_le_bytes(buf);
    }
    let config = AcquisitionConfig {
        sample_rate,
        n_samples,
        sweep_period,
        phase_offset,
        adc_bits: None,
        n_bands,
    };
    BroadbandTrace::new(samples, config, kind)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
