//! Deterministic synthetic test images.
//!
//! [`natural`] mimics a photograph: smooth low-frequency structure, a few
//! soft-edged blobs, and mild sensor noise, so neighbouring pixels are strongly
//! (but not perfectly) correlated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::raster::{Channel, RgbImage};

pub fn natural(width: usize, height: usize, seed: u64) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (width.max(1) as f64, height.max(1) as f64);

    let waves: Vec<[f64; 4]> = (0..6)
        .map(|_| {
            [
                rng.random_range(0.5..4.0),
                rng.random_range(0.5..4.0),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(10.0..30.0),
            ]
        })
        .collect();
    let blobs: Vec<[f64; 4]> = (0..5)
        .map(|_| {
            [
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
                rng.random_range(0.05..0.2),
                rng.random_range(-60.0..60.0),
            ]
        })
        .collect();
    let tint = [
        1.0,
        rng.random_range(0.8..0.95),
        rng.random_range(0.6..0.85),
    ];

    let mut channels: [Vec<u8>; 3] = Default::default();
    for c in &mut channels {
        c.reserve(width * height);
    }
    for y in 0..height {
        for x in 0..width {
            let (u, v) = (x as f64 / w, y as f64 / h);
            let mut base = 110.0 + 40.0 * (u - v);
            for [fx, fy, ph, amp] in &waves {
                base += amp * (std::f64::consts::TAU * (fx * u + fy * v) + ph).sin();
            }
            for [bx, by, r, amp] in &blobs {
                let d2 = ((u - bx).powi(2) + (v - by).powi(2)) / (r * r);
                base += amp * (-d2).exp();
            }
            for (k, c) in channels.iter_mut().enumerate() {
                let noise: f64 = rng.random_range(-16.0..16.0);
                let val = base * tint[k] + 20.0 * k as f64 + noise;
                c.push(val.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    RgbImage {
        width,
        height,
        channels,
    }
}

pub fn natural_gray(width: usize, height: usize, seed: u64) -> Channel {
    let img = natural(width, height, seed);
    img.channel(0)
}

/// Horizontal ramp `(x * 255 / (w - 1))` replicated to all channels.
pub fn ramp(width: usize, height: usize) -> RgbImage {
    let row: Vec<u8> = (0..width)
        .map(|x| (x * 255 / width.saturating_sub(1).max(1)) as u8)
        .collect();
    let data: Vec<u8> = (0..height).flat_map(|_| row.iter().copied()).collect();
    RgbImage {
        width,
        height,
        channels: [data.clone(), data.clone(), data],
    }
}

pub fn constant(width: usize, height: usize, v: u8) -> RgbImage {
    RgbImage::filled(width, height, [v; 3])
}
