//! LLR streams for external decoders.
//!
//! Binary layout, all little-endian: 8-byte magic [`LLR_MAGIC`], `u32` version,
//! `u32` bits per symbol, `u64` record count, then records of
//! `u64` symbol index, `u32` bit index, `f64` LLR (20 bytes each).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

pub const LLR_MAGIC: [u8; 8] = *b"VCLLRBIN";
pub const LLR_VERSION: u32 = 1;

/// One exported LLR.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlrRecord {
    pub symbol: u64,
    pub bit: u32,
    pub llr: f64,
}

/// Writes a `symbol,bit,llr` CSV with LLRs at 12 significant digits.
pub fn write_llr_csv<W: Write>(w: W, records: &[LlrRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["symbol", "bit", "llr"])?;
    for r in records {
        wr.write_record([
            r.symbol.to_string(),
            r.bit.to_string(),
            format!("{:.11e}", r.llr),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Writes the binary stream.
pub fn write_llr_binary<W: Write>(
    mut w: W,
    bits_per_symbol: u32,
    records: &[LlrRecord],
) -> Result<()> {
    w.write_all(&LLR_MAGIC)?;
    w.write_all(&LLR_VERSION.to_le_bytes())?;
    w.write_all(&bits_per_symbol.to_le_bytes())?;
    w.write_all(&(records.len() as u64).to_le_bytes())?;
    for r in records {
        w.write_all(&r.symbol.to_le_bytes())?;
        w.write_all(&r.bit.to_le_bytes())?;
        w.write_all(&r.llr.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

/// Reads a binary stream: `(bits per symbol, records)`.
pub fn read_llr_binary<R: Read>(mut r: R) -> Result<(u32, Vec<LlrRecord>)> {
    if take::<8, _>(&mut r)? != LLR_MAGIC {
        return Err(Error::Config("not an LLR stream (bad magic)".into()));
    }
    let version = u32::from_le_bytes(take(&mut r)?);
    if version != LLR_VERSION {
        return Err(Error::Config(format!(
            "unsupported LLR stream version {version}"
        )));
    }
    let bits = u32::from_le_bytes(take(&mut r)?);
    let count = u64::from_le_bytes(take(&mut r)?);
    let mut out = Vec::with_capacity(count.min(1 << 24) as usize);
    for _ in 0..count {
        out.push(LlrRecord {
            symbol: u64::from_le_bytes(take(&mut r)?),
            bit: u32::from_le_bytes(take(&mut r)?),
            llr: f64::from_le_bytes(take(&mut r)?),
        });
    }
    Ok((bits, out))
}
