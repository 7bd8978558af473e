//! The DNA-coding image cipher.
//!
//! Per channel (R, G, B in that order):
//!
//! 1. the selected region is zero-padded to multiples of 4 (`A1`);
//! 2. `H'·W'` values of sequence A become key bytes, reshaped like `A1` (`A2`);
//! 3. each 4×4 block of `A1` is DNA-encoded with a rule from X, the matching
//!    block of `A2` with a rule from Y;
//! 4. the two are combined base by base with Add, Sub or Xor chosen by H,
//!    evaluated under the X rule;
//! 5. the result is decoded with the X rule;
//! 6. rows are shuffled by the sort order of V, columns by that of M.
//!
//! Channel `k` reads A at offset `k·H'·W'`, X/Y/H at `k·B` (B blocks per
//! channel, one value per block in row-major block order), V at `k·H'` and
//! M at `k·W'`. Decryption replays the same consumption.

use crate::dna::{decode_byte, encode_byte, op_bases, DnaOp, DnaRule, BLOCK_SIDE};
use crate::error::{Error, Result};
use crate::keystream::{
    generate_sequences, index_stream, quantize_bytes, sort_permutation, CipherKey, Permutation,
    Sequences,
};
use crate::raster::{Region, RgbImage};

pub const MAGIC: &[u8; 4] = b"CHK1";
pub const FORMAT_VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 4 * 4 + 2 * 4;

fn pad4(n: usize) -> usize {
    n.div_ceil(BLOCK_SIDE) * BLOCK_SIDE
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CipherImage {
    pub version: u8,
    pub region: Region,
    pub original_width: usize,
    pub original_height: usize,
    /// Padded `H'×W'` planes, row-major.
    pub channels: [Vec<u8>; 3],
}

impl CipherImage {
    pub fn padded_width(&self) -> usize {
        pad4(self.region.w)
    }

    pub fn padded_height(&self) -> usize {
        pad4(self.region.h)
    }

    /// The padded planes viewed as an image, for statistics.
    pub fn as_image(&self) -> RgbImage {
        RgbImage {
            width: self.padded_width(),
            height: self.padded_height(),
            channels: self.channels.clone(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let plane = self.padded_width() * self.padded_height();
        let mut out = Vec::with_capacity(HEADER_LEN + 3 * plane);
        out.extend_from_slice(MAGIC);
        out.push(self.version);
        for v in [
            self.region.x,
            self.region.y,
            self.region.w,
            self.region.h,
            self.original_width,
            self.original_height,
        ] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        for ch in &self.channels {
            out.extend_from_slice(ch);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<CipherImage> {
        let fmt = |m: &str| Error::Format(m.to_string());
        if bytes.len() < HEADER_LEN {
            return Err(fmt("container shorter than its header"));
        }
        if &bytes[..4] != MAGIC {
            return Err(fmt("bad magic"));
        }
        let version = bytes[4];
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported container version {version}"
            )));
        }
        let word = |i: usize| {
            let o = 5 + 4 * i;
            u32::from_le_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]]) as usize
        };
        let region = Region {
            x: word(0),
            y: word(1),
            w: word(2),
            h: word(3),
        };
        let (ow, oh) = (word(4), word(5));
        region
            .check_within(ow, oh)
            .map_err(|e| Error::Format(format!("region metadata: {e}")))?;
        let plane = pad4(region.w)
            .checked_mul(pad4(region.h))
            .ok_or_else(|| fmt("dimensions overflow"))?;
        let expected = plane
            .checked_mul(3)
            .and_then(|p| p.checked_add(HEADER_LEN))
            .ok_or_else(|| fmt("dimensions overflow"))?;
        if bytes.len() != expected {
            return Err(Error::Format(format!(
                "container holds {} bytes, header implies {expected}",
                bytes.len()
            )));
        }
        let body = &bytes[HEADER_LEN..];
        let channels = [0, 1, 2].map(|k| body[k * plane..(k + 1) * plane].to_vec());
        Ok(CipherImage {
            version,
            region,
            original_width: ow,
            original_height: oh,
            channels,
        })
    }
}

/// Keystream material for one padded channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelKeystream {
    pub width: usize,
    pub height: usize,
    /// `A2`, row-major `height×width`.
    pub key_bytes: Vec<u8>,
    /// One entry per 4×4 block, row-major block order.
    pub plain_rules: Vec<DnaRule>,
    pub key_rules: Vec<DnaRule>,
    pub ops: Vec<DnaOp>,
    pub rows: Permutation,
    pub cols: Permutation,
}

impl ChannelKeystream {
    /// Slices channel `k`'s material out of the key's sequences.
    pub fn from_sequences(
        seqs: &Sequences,
        k: usize,
        width: usize,
        height: usize,
        scale: f64,
    ) -> Result<Self> {
        debug_assert!(width.is_multiple_of(BLOCK_SIDE) && height.is_multiple_of(BLOCK_SIDE));
        let plane = width * height;
        let blocks = plane / (BLOCK_SIDE * BLOCK_SIDE);
        let slice = |x: &[f64], len: usize| -> Result<Vec<f64>> {
            x.get(k * len..(k + 1) * len)
                .map(|s| s.to_vec())
                .ok_or_else(|| crate::error::invalid("keystream too short for channel"))
        };
        let rules = |x: &[f64]| -> Result<Vec<DnaRule>> {
            Ok(index_stream(&slice(x, blocks)?, 8, scale)?
                .into_iter()
                .map(DnaRule::from_index)
                .collect())
        };
        Ok(ChannelKeystream {
            width,
            height,
            key_bytes: quantize_bytes(&slice(&seqs.a, plane)?, scale),
            plain_rules: rules(&seqs.x)?,
            key_rules: rules(&seqs.y)?,
            ops: index_stream(&slice(&seqs.h, blocks)?, 3, scale)?
                .into_iter()
                .map(DnaOp::from_index)
                .collect(),
            rows: sort_permutation(&slice(&seqs.v, height)?),
            cols: sort_permutation(&slice(&seqs.m, width)?),
        })
    }

    fn block_index(&self, x: usize, y: usize) -> usize {
        (y / BLOCK_SIDE) * (self.width / BLOCK_SIDE) + x / BLOCK_SIDE
    }
}

fn substitute(plane: &mut [u8], ks: &ChannelKeystream, decrypt: bool) {
    for y in 0..ks.height {
        for x in 0..ks.width {
            let i = y * ks.width + x;
            let b = ks.block_index(x, y);
            let rule = ks.plain_rules[b];
            let op = if decrypt {
                ks.ops[b].inverse()
            } else {
                ks.ops[b]
            };
            let px = encode_byte(plane[i], rule);
            let key = encode_byte(ks.key_bytes[i], ks.key_rules[b]);
            plane[i] = decode_byte(&op_bases(&px, &key, op, rule), rule);
        }
    }
}

/// Encrypts one padded plane with explicit keystream material.
pub fn encrypt_channel(plane: &[u8], ks: &ChannelKeystream) -> Vec<u8> {
    let mut tmp = plane.to_vec();
    substitute(&mut tmp, ks, false);
    let w = ks.width;
    let mut out = Vec::with_capacity(tmp.len());
    for &r in &ks.rows.indices {
        for &c in &ks.cols.indices {
            out.push(tmp[r * w + c]);
        }
    }
    out
}

pub fn decrypt_channel(cipher: &[u8], ks: &ChannelKeystream) -> Vec<u8> {
    let w = ks.width;
    let mut tmp = vec![0u8; cipher.len()];
    for (i, &r) in ks.rows.indices.iter().enumerate() {
        for (j, &c) in ks.cols.indices.iter().enumerate() {
            tmp[r * w + c] = cipher[i * w + j];
        }
    }
    substitute(&mut tmp, ks, true);
    tmp
}

fn channel_keystreams(
    key: &CipherKey,
    width: usize,
    height: usize,
) -> Result<Vec<ChannelKeystream>> {
    let seqs = generate_sequences(key, 3 * width * height)?;
    let scale = key.quantizer_scale as f64;
    (0..3)
        .map(|k| ChannelKeystream::from_sequences(&seqs, k, width, height, scale))
        .collect()
}

pub fn encrypt_image(
    img: &RgbImage,
    key: &CipherKey,
    region: Option<Region>,
) -> Result<CipherImage> {
    let region = region.unwrap_or(Region::whole(img.width, img.height));
    let sub = img.crop(region)?;
    let (pw, ph) = (pad4(region.w), pad4(region.h));
    let streams = channel_keystreams(key, pw, ph)?;
    let mut channels: [Vec<u8>; 3] = Default::default();
    for (k, out) in channels.iter_mut().enumerate() {
        let mut padded = vec![0u8; pw * ph];
        for y in 0..region.h {
            padded[y * pw..y * pw + region.w]
                .copy_from_slice(&sub.channels[k][y * region.w..(y + 1) * region.w]);
        }
        *out = encrypt_channel(&padded, &streams[k]);
    }
    Ok(CipherImage {
        version: FORMAT_VERSION,
        region,
        original_width: img.width,
        original_height: img.height,
        channels,
    })
}

/// Recovers the selected region. A wrong key is not detected; it yields noise.
pub fn decrypt_image(c: &CipherImage, key: &CipherKey) -> Result<RgbImage> {
    let (pw, ph) = (c.padded_width(), c.padded_height());
    if c.channels.iter().any(|ch| ch.len() != pw * ph) {
        return Err(Error::Format("channel size disagrees with region".into()));
    }
    let streams = channel_keystreams(key, pw, ph)?;
    let r = c.region;
    let mut channels: [Vec<u8>; 3] = Default::default();
    for (k, out) in channels.iter_mut().enumerate() {
        let padded = decrypt_channel(&c.channels[k], &streams[k]);
        *out = (0..r.h)
            .flat_map(|y| padded[y * pw..y * pw + r.w].iter().copied())
            .collect();
    }
    RgbImage::new(r.w, r.h, channels)
}
