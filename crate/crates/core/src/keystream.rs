//! Cipher keys and the chaotic keystream.
//!
//! A key fixes the system parameters, the initial state, which six state
//! components serve as the A, X, Y, H, V and M sequences, and how real
//! values are quantized. Sequences are the post-transient samples of those
//! components, so the same key always regenerates the same keystream.

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::modbus::crc16;
use crate::raster::RgbImage;
use crate::system::{fmt_g17, Orbit, State, SystemParams, DEFAULT_DT, DEFAULT_TRANSIENT, DIM};

pub const DEFAULT_SCALE: u64 = 10_000;
pub const DEFAULT_SEQ_INDICES: [usize; 6] = [0, 1, 2, 4, 5, 8];
const INIT_SPACING: f64 = 0.0101;
const KEY_FORMAT: &str = "chaokey-key-1";

#[derive(Clone, Debug, PartialEq)]
pub struct CipherKey {
    pub params: SystemParams<f64>,
    pub init: State<f64>,
    /// State components used as A, X, Y, H, V, M (zero-based, distinct).
    pub seq_indices: [usize; 6],
    pub transient_steps: usize,
    pub dt: f64,
    pub quantizer_scale: u64,
}

impl Default for CipherKey {
    fn default() -> Self {
        CipherKey {
            params: SystemParams::standard(),
            init: State::splat(0.1),
            seq_indices: DEFAULT_SEQ_INDICES,
            transient_steps: DEFAULT_TRANSIENT,
            dt: DEFAULT_DT,
            quantizer_scale: DEFAULT_SCALE,
        }
    }
}

fn frac(x: f64) -> f64 {
    x - x.floor()
}

impl CipherKey {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !self.init.is_finite() {
            return Err(invalid("key initial state must be finite"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("key dt must be positive"));
        }
        if self.quantizer_scale == 0 {
            return Err(invalid("quantizer scale must be positive"));
        }
        for (i, &a) in self.seq_indices.iter().enumerate() {
            if a >= DIM {
                return Err(invalid(format!("sequence index {a} out of range")));
            }
            if self.seq_indices[..i].contains(&a) {
                return Err(invalid("sequence indices must be distinct"));
            }
        }
        Ok(())
    }

    /// Every initial component shifted by `delta`.
    pub fn perturbed(&self, delta: f64) -> CipherKey {
        CipherKey {
            init: State(self.init.0.map(|u| u + delta)),
            ..self.clone()
        }
    }

    /// Flat `name=value` text, one field per line, closed by a CRC-16 line
    /// over everything before it.
    pub fn to_key_file(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "format={KEY_FORMAT}");
        let _ = writeln!(s, "a={}", fmt_g17(self.params.a));
        let _ = writeln!(s, "b={}", fmt_g17(self.params.b));
        let _ = writeln!(s, "c={}", fmt_g17(self.params.c));
        let _ = writeln!(s, "include_u4u8={}", self.params.include_u4u8);
        for (i, u) in self.init.0.iter().enumerate() {
            let _ = writeln!(s, "u{}={}", i + 1, fmt_g17(*u));
        }
        let idx: Vec<String> = self.seq_indices.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "seq_indices={}", idx.join(","));
        let _ = writeln!(s, "transient_steps={}", self.transient_steps);
        let _ = writeln!(s, "dt={}", fmt_g17(self.dt));
        let _ = writeln!(s, "quantizer_scale={}", self.quantizer_scale);
        let crc = crc16(s.as_bytes());
        let _ = writeln!(s, "checksum={crc:04X}");
        s
    }

    pub fn from_key_file(text: &str) -> Result<CipherKey> {
        let bad = |msg: String| Error::KeyFile(msg);
        let body_end = text
            .rfind("checksum=")
            .ok_or_else(|| bad("missing checksum line".into()))?;
        let (body, tail) = text.split_at(body_end);
        let stored = tail
            .trim()
            .strip_prefix("checksum=")
            .and_then(|h| u16::from_str_radix(h, 16).ok())
            .ok_or_else(|| bad("malformed checksum line".into()))?;
        if crc16(body.as_bytes()) != stored {
            return Err(bad("checksum mismatch".into()));
        }

        let mut fields = std::collections::BTreeMap::new();
        for line in body.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line `{line}` is not name=value")))?;
            fields.insert(k.trim(), v.trim());
        }
        let get = |name: &str| {
            fields
                .get(name)
                .copied()
                .ok_or_else(|| bad(format!("missing field `{name}`")))
        };
        let float = |name: &str| -> Result<f64> {
            get(name)?
                .parse::<f64>()
                .map_err(|_| bad(format!("field `{name}` is not a number")))
        };
        if get("format")? != KEY_FORMAT {
            return Err(bad("unsupported key format".into()));
        }
        let include_u4u8 = match get("include_u4u8")? {
            "true" => true,
            "false" => false,
            other => return Err(bad(format!("include_u4u8 `{other}` is not a bool"))),
        };
        let mut init = State::zeros();
        for i in 0..DIM {
            init[i] = float(&format!("u{}", i + 1))?;
        }
        let idx: Vec<usize> = get("seq_indices")?
            .split(',')
            .map(|x| x.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("seq_indices malformed".into()))?;
        let seq_indices: [usize; 6] = idx
            .try_into()
            .map_err(|_| bad("seq_indices needs six entries".into()))?;
        let key = CipherKey {
            params: SystemParams {
                a: float("a")?,
                b: float("b")?,
                c: float("c")?,
                include_u4u8,
            },
            init,
            seq_indices,
            transient_steps: get("transient_steps")?
                .parse()
                .map_err(|_| bad("transient_steps malformed".into()))?,
            dt: float("dt")?,
            quantizer_scale: get("quantizer_scale")?
                .parse()
                .map_err(|_| bad("quantizer_scale malformed".into()))?,
        };
        key.validate().map_err(|e| bad(e.to_string()))?;
        Ok(key)
    }
}

/// Key from the mean pixel value of `image`, optionally mixed with a user
/// secret.
pub fn derive_key(image: &RgbImage, user_seed: Option<&[u8]>) -> Result<CipherKey> {
    if image.is_empty() {
        return Err(invalid("cannot derive a key from an empty image"));
    }
    let total: u64 = image
        .channels
        .iter()
        .flat_map(|c| c.iter())
        .map(|&b| b as u64)
        .sum();
    let mean = total as f64 / (3 * image.pixel_count()) as f64;
    let nonzero = |u: f64| if u == 0.0 { 0.5 } else { u };
    let mut init = State(std::array::from_fn(|i| {
        nonzero(frac(mean / 255.0 + (i + 1) as f64 * INIT_SPACING))
    }));
    if let Some(seed) = user_seed.filter(|s| !s.is_empty()) {
        for i in 0..DIM {
            let byte = seed[i % seed.len()] as f64;
            init[i] = nonzero(frac(init[i] + byte / 256.0));
        }
    }
    Ok(CipherKey {
        init,
        ..CipherKey::default()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    A,
    X,
    Y,
    H,
    V,
    M,
}

/// The six named chaotic sequences, equal length.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Sequences {
    pub a: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub h: Vec<f64>,
    pub v: Vec<f64>,
    pub m: Vec<f64>,
}

impl Sequences {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn get(&self, role: Role) -> &[f64] {
        match role {
            Role::A => &self.a,
            Role::X => &self.x,
            Role::Y => &self.y,
            Role::H => &self.h,
            Role::V => &self.v,
            Role::M => &self.m,
        }
    }

    fn push(&mut self, s: &State<f64>, idx: &[usize; 6]) {
        self.a.push(s[idx[0]]);
        self.x.push(s[idx[1]]);
        self.y.push(s[idx[2]]);
        self.h.push(s[idx[3]]);
        self.v.push(s[idx[4]]);
        self.m.push(s[idx[5]]);
    }
}

/// Sequences that grow on demand by continuing the integration.
pub struct SequenceStream {
    params: SystemParams<f64>,
    state: State<f64>,
    dt: f64,
    indices: [usize; 6],
    steps_done: usize,
    seqs: Sequences,
}

impl SequenceStream {
    pub fn new(key: &CipherKey) -> Result<Self> {
        key.validate()?;
        let mut orbit = Orbit::new(&key.params, key.init, key.dt);
        orbit.skip_steps(key.transient_steps)?;
        Ok(SequenceStream {
            params: key.params,
            state: *orbit.state(),
            dt: key.dt,
            indices: key.seq_indices,
            steps_done: key.transient_steps,
            seqs: Sequences::default(),
        })
    }

    /// Makes at least `len` samples available.
    pub fn ensure(&mut self, len: usize) -> Result<&Sequences> {
        let have = self.seqs.len();
        if len > have {
            let mut orbit = Orbit::new(&self.params, self.state, self.dt);
            for _ in have..len {
                let s = orbit
                    .next()
                    .expect("orbit yields until failure")
                    .map_err(|e| match e {
                        Error::NonFinite { step } => Error::NonFinite {
                            step: self.steps_done + step,
                        },
                        other => other,
                    })?;
                self.seqs.push(&s, &self.indices);
            }
            self.steps_done += len - have;
            self.state = *orbit.state();
        }
        Ok(&self.seqs)
    }

    pub fn into_sequences(self) -> Sequences {
        self.seqs
    }
}

pub fn generate_sequences(key: &CipherKey, len: usize) -> Result<Sequences> {
    if len == 0 {
        return Err(invalid("sequence length must be positive"));
    }
    let mut stream = SequenceStream::new(key)?;
    stream.ensure(len)?;
    Ok(stream.into_sequences())
}

/// `floor(frac(|x| · scale) · 256)`, clamped to 255.
#[inline]
pub fn quantize_byte(x: f64, scale: f64) -> u8 {
    let f = frac(x.abs() * scale);
    ((f * 256.0).floor() as i64).clamp(0, 255) as u8
}

pub fn quantize_bytes(x: &[f64], scale: f64) -> Vec<u8> {
    x.iter().map(|&v| quantize_byte(v, scale)).collect()
}

/// Eight bits per value, most significant first.
pub fn quantize_bits(x: &[f64], scale: f64) -> Vec<bool> {
    bytes_to_bits(&quantize_bytes(x, scale))
}

pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1 == 1))
        .collect()
}

/// `quantize_byte(x_i) mod m`.
pub fn index_stream(x: &[f64], m: u8, scale: f64) -> Result<Vec<u8>> {
    if m == 0 {
        return Err(invalid("index modulus must be at least 1"));
    }
    Ok(x.iter().map(|&v| quantize_byte(v, scale) % m).collect())
}

/// A bijection on `0..n`; `apply` puts element `indices[i]` at position `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    pub indices: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            indices: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.indices.len()];
        for (i, &p) in self.indices.iter().enumerate() {
            inv[p] = i;
        }
        Permutation { indices: inv }
    }

    pub fn apply<T: Clone>(&self, v: &[T]) -> Vec<T> {
        self.indices.iter().map(|&i| v[i].clone()).collect()
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.indices.len()];
        self.indices
            .iter()
            .all(|&i| i < seen.len() && !std::mem::replace(&mut seen[i], true))
    }
}

/// Ascending argsort, ties kept in original order.
pub fn sort_permutation(x: &[f64]) -> Permutation {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    Permutation { indices: idx }
}
