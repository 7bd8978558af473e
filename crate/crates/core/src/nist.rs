//! Three SP 800-22 tests (Frequency, Block Frequency, Runs) and bitstream
//! export for the full external suite.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

use crate::error::{invalid, Error, Result};

pub const ALPHA: f64 = 0.01;
pub const MIN_BITS: usize = 100_000;
pub const BLOCK_LEN: usize = 128;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NistResult {
    pub name: &'static str,
    pub p_value: f64,
    pub pass: bool,
    /// False when a precondition failed and the statistic was not computed.
    pub applicable: bool,
}

impl NistResult {
    fn from_p(name: &'static str, p: f64) -> Self {
        NistResult {
            name,
            p_value: p,
            pass: p >= ALPHA,
            applicable: true,
        }
    }

    fn not_applicable(name: &'static str) -> Self {
        NistResult {
            name,
            p_value: 0.0,
            pass: false,
            applicable: false,
        }
    }
}

/// Monobit test, `p = erfc(|S_n| / sqrt(2n))`.
pub fn frequency(bits: &[bool]) -> f64 {
    let n = bits.len() as f64;
    let s: i64 = bits.iter().map(|&b| if b { 1 } else { -1 }).sum();
    erfc(s.unsigned_abs() as f64 / n.sqrt() / std::f64::consts::SQRT_2)
}

/// Frequency within blocks of `m` bits; the tail that does not fill a block
/// is discarded.
pub fn block_frequency(bits: &[bool], m: usize) -> f64 {
    let blocks = bits.len() / m;
    if blocks == 0 {
        return 0.0;
    }
    let chi2: f64 = bits
        .chunks_exact(m)
        .map(|blk| {
            let pi = blk.iter().filter(|&&b| b).count() as f64 / m as f64;
            (pi - 0.5).powi(2)
        })
        .sum::<f64>()
        * 4.0
        * m as f64;
    if chi2 <= 0.0 {
        return 1.0;
    }
    gamma_ur(blocks as f64 / 2.0, chi2 / 2.0)
}

/// Runs test. `None` when the monobit precondition `|π - 1/2| < 2/sqrt(n)` fails.
pub fn runs(bits: &[bool]) -> Option<f64> {
    let n = bits.len() as f64;
    let pi = bits.iter().filter(|&&b| b).count() as f64 / n;
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        return None;
    }
    let v_obs = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let num = (v_obs as f64 - 2.0 * n * pi * (1.0 - pi)).abs();
    let den = 2.0 * (2.0 * n).sqrt() * pi * (1.0 - pi);
    Some(erfc(num / den))
}

pub fn nist_subset(bits: &[bool]) -> Result<Vec<NistResult>> {
    if bits.len() < MIN_BITS {
        return Err(invalid(format!(
            "NIST subset needs at least {MIN_BITS} bits, got {}",
            bits.len()
        )));
    }
    Ok(vec![
        NistResult::from_p("Frequency", frequency(bits)),
        NistResult::from_p("Block Frequency", block_frequency(bits, BLOCK_LEN)),
        match runs(bits) {
            Some(p) => NistResult::from_p("Runs", p),
            None => NistResult::not_applicable("Runs"),
        },
    ])
}

/// ASCII `0`/`1`, no separators.
pub fn write_bits<W: Write>(bits: &[bool], w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    for chunk in bits.chunks(8192) {
        let ascii: Vec<u8> = chunk.iter().map(|&b| if b { b'1' } else { b'0' }).collect();
        w.write_all(&ascii)?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_bits(bits: &[bool], path: &Path) -> Result<()> {
    write_bits(bits, File::create(path)?)
}

pub fn read_bits(path: &Path) -> Result<Vec<bool>> {
    let mut text = Vec::new();
    File::open(path)?.read_to_end(&mut text)?;
    text.into_iter()
        .filter(|c| !c.is_ascii_whitespace())
        .map(|c| match c {
            b'0' => Ok(false),
            b'1' => Ok(true),
            other => Err(Error::Format(format!(
                "unexpected byte {other:#04x} in bit file"
            ))),
        })
        .collect()
}
