//! Image statistics used to judge a cipher: histogram and its chi-square,
//! adjacent-pixel correlation, information entropy, global SSIM and pixel
//! differences.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::nist::NistResult;
use crate::raster::{Channel, RgbImage};

/// Chi-square critical value for 255 degrees of freedom at the 0.01 level.
pub const CHI2_255_CRIT_01: f64 = 310.457;
pub const DEFAULT_PAIRS: usize = 3000;

pub fn histogram(data: &[u8]) -> [u64; 256] {
    let mut h = [0u64; 256];
    for &b in data {
        h[b as usize] += 1;
    }
    h
}

/// Pearson chi-square of a histogram against the uniform distribution.
pub fn chi_square_uniform(hist: &[u64; 256]) -> f64 {
    let n: u64 = hist.iter().sum();
    let expected = n as f64 / 256.0;
    hist.iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum()
}

/// Shannon entropy in bits of the gray-level distribution, over all 256 levels.
pub fn information_entropy(data: &[u8]) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let n = data.len() as f64;
    let h = histogram(data)
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>();
    h.max(0.0)
}

/// Correlation coefficient with population moments (`1/N`).
pub fn correlation(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() || u.is_empty() {
        return Err(Error::DimensionMismatch(
            "correlation needs equal, non-empty series".into(),
        ));
    }
    let n = u.len() as f64;
    let eu = u.iter().sum::<f64>() / n;
    let ev = v.iter().sum::<f64>() / n;
    let du = u.iter().map(|x| (x - eu).powi(2)).sum::<f64>() / n;
    let dv = v.iter().map(|x| (x - ev).powi(2)).sum::<f64>() / n;
    let cov = u
        .iter()
        .zip(v)
        .map(|(x, y)| (x - eu) * (y - ev))
        .sum::<f64>()
        / n;
    if du <= 0.0 || dv <= 0.0 {
        return Err(Error::DegenerateInput(
            "zero variance, correlation undefined".into(),
        ));
    }
    Ok((cov / (du.sqrt() * dv.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Horizontal,
    Vertical,
    Diagonal,
}

impl Direction {
    pub const ALL: [Direction; 3] = [
        Direction::Horizontal,
        Direction::Vertical,
        Direction::Diagonal,
    ];

    fn offset(self) -> (usize, usize) {
        match self {
            Direction::Horizontal => (1, 0),
            Direction::Vertical => (0, 1),
            Direction::Diagonal => (1, 1),
        }
    }

    /// Number of pixels that have a neighbour in this direction.
    pub fn positions(self, ch: &Channel) -> usize {
        let (dx, dy) = self.offset();
        ch.width.saturating_sub(dx) * ch.height.saturating_sub(dy)
    }
}

/// Correlation of `n_pairs` distinct, randomly chosen adjacent pixel pairs.
pub fn adjacent_correlation(
    ch: &Channel,
    dir: Direction,
    n_pairs: usize,
    seed: u64,
) -> Result<f64> {
    let (dx, dy) = dir.offset();
    let cols = ch.width.saturating_sub(dx);
    let total = dir.positions(ch);
    if n_pairs == 0 || total < n_pairs {
        return Err(invalid(format!(
            "{n_pairs} pairs requested but only {total} {dir:?} positions exist"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = Vec::with_capacity(n_pairs);
    let mut v = Vec::with_capacity(n_pairs);
    for pos in sample(&mut rng, total, n_pairs) {
        let (x, y) = (pos % cols, pos / cols);
        u.push(ch.get(x, y) as f64);
        v.push(ch.get(x + dx, y + dy) as f64);
    }
    correlation(&u, &v)
}

fn check_same(x: &Channel, y: &Channel) -> Result<()> {
    if x.width != y.width || x.height != y.height || x.data.len() != y.data.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            x.width, x.height, y.width, y.height
        )));
    }
    if x.data.is_empty() {
        return Err(invalid("empty channel"));
    }
    Ok(())
}

/// Single-window SSIM: luminance, contrast and structure terms over the whole
/// channel, `D1 = (0.01·255)²`, `D2 = (0.03·255)²`, `D3 = D1/2`.
pub fn ssim(x: &Channel, y: &Channel) -> Result<f64> {
    check_same(x, y)?;
    let n = x.data.len() as f64;
    let mx = x.data.iter().map(|&v| v as f64).sum::<f64>() / n;
    let my = y.data.iter().map(|&v| v as f64).sum::<f64>() / n;
    let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.data.iter().zip(&y.data) {
        let (da, db) = (a as f64 - mx, b as f64 - my);
        vx += da * da;
        vy += db * db;
        cxy += da * db;
    }
    let (vx, vy, cxy) = (vx / n, vy / n, cxy / n);
    let (sx, sy) = (vx.sqrt(), vy.sqrt());
    let d1 = (0.01f64 * 255.0).powi(2);
    let d2 = (0.03f64 * 255.0).powi(2);
    let d3 = d1 / 2.0;
    let lum = (2.0 * mx * my + d1) / (mx * mx + my * my + d1);
    let con = (2.0 * sx * sy + d2) / (vx + vy + d2);
    let st = (cxy + d3) / (sx * sy + d3);
    Ok(lum * con * st)
}

/// Mean of per-channel SSIM.
pub fn ssim_rgb(x: &RgbImage, y: &RgbImage) -> Result<f64> {
    let mut acc = 0.0;
    for k in 0..3 {
        acc += ssim(&x.channel(k), &y.channel(k))?;
    }
    Ok(acc / 3.0)
}

/// `(max |x - y|, number of differing samples)`.
pub fn pixel_diff(x: &Channel, y: &Channel) -> Result<(u8, usize)> {
    check_same(x, y)?;
    Ok(x.data
        .iter()
        .zip(&y.data)
        .fold((0u8, 0usize), |(m, n), (&a, &b)| {
            let d = a.abs_diff(b);
            (m.max(d), n + (d != 0) as usize)
        }))
}

/// Pixel differences over all three channels; a pixel differs if any channel does.
pub fn pixel_diff_rgb(x: &RgbImage, y: &RgbImage) -> Result<(u8, usize)> {
    if x.width != y.width || x.height != y.height {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            x.width, x.height, y.width, y.height
        )));
    }
    let mut max = 0u8;
    let mut count = 0usize;
    for i in 0..x.pixel_count() {
        let d = (0..3)
            .map(|k| x.channels[k][i].abs_diff(y.channels[k][i]))
            .max()
            .unwrap_or(0);
        max = max.max(d);
        count += (d != 0) as usize;
    }
    Ok((max, count))
}

#[derive(Clone, Debug, Serialize)]
pub struct Correlations {
    pub horizontal: Option<f64>,
    pub vertical: Option<f64>,
    pub diagonal: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChannelReport {
    pub name: &'static str,
    pub histogram: Vec<u64>,
    pub chi_square: f64,
    pub entropy: f64,
    /// Pairs actually sampled per direction.
    pub pairs: usize,
    pub correlation: Correlations,
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub ssim: f64,
    pub ssim_per_channel: [f64; 3],
    pub max_abs_diff: u8,
    pub differing_pixels: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct MetricsReport {
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    pub channels: Vec<ChannelReport>,
    pub comparison: Option<Comparison>,
    pub nist: Vec<NistResult>,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

const CHANNEL_NAMES: [&str; 3] = ["R", "G", "B"];

pub fn channel_report(
    ch: &Channel,
    name: &'static str,
    n_pairs: usize,
    seed: u64,
) -> ChannelReport {
    let hist = histogram(&ch.data);
    let pairs = Direction::ALL
        .iter()
        .map(|d| d.positions(ch))
        .min()
        .unwrap_or(0)
        .min(n_pairs);
    let corr = |d: Direction| {
        if pairs == 0 {
            None
        } else {
            adjacent_correlation(ch, d, pairs, seed).ok()
        }
    };
    ChannelReport {
        name,
        histogram: hist.to_vec(),
        chi_square: chi_square_uniform(&hist),
        entropy: information_entropy(&ch.data),
        pairs,
        correlation: Correlations {
            horizontal: corr(Direction::Horizontal),
            vertical: corr(Direction::Vertical),
            diagonal: corr(Direction::Diagonal),
        },
    }
}

/// Report on `img`; with `other` the SSIM and pixel differences against it are
/// added.
pub fn image_report(
    img: &RgbImage,
    other: Option<&RgbImage>,
    n_pairs: usize,
    seed: u64,
) -> Result<MetricsReport> {
    let channels = (0..3)
        .map(|k| channel_report(&img.channel(k), CHANNEL_NAMES[k], n_pairs, seed))
        .collect();
    let comparison = match other {
        None => None,
        Some(o) => {
            let mut per = [0.0; 3];
            for (k, p) in per.iter_mut().enumerate() {
                *p = ssim(&img.channel(k), &o.channel(k))?;
            }
            let (max_abs_diff, differing_pixels) = pixel_diff_rgb(img, o)?;
            Some(Comparison {
                ssim: per.iter().sum::<f64>() / 3.0,
                ssim_per_channel: per,
                max_abs_diff,
                differing_pixels,
            })
        }
    };
    Ok(MetricsReport {
        width: img.width,
        height: img.height,
        seed,
        channels,
        comparison,
        nist: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ch(w: usize, h: usize, f: impl Fn(usize, usize) -> u8) -> Channel {
        let data = (0..w * h).map(|i| f(i % w, i / w)).collect();
        Channel::new(w, h, data).unwrap()
    }

    #[test]
    fn histogram_cases() {
        let zero = Channel::filled(10, 10, 0);
        let h = histogram(&zero.data);
        assert_eq!(h[0], 100);
        assert_eq!(h.iter().sum::<u64>(), 100);
        let ramp = ch(256, 256, |x, _| x as u8);
        assert!(histogram(&ramp.data).iter().all(|&c| c == 256));
        assert_eq!(chi_square_uniform(&histogram(&ramp.data)), 0.0);
    }

    #[test]
    fn entropy_cases() {
        assert_eq!(information_entropy(&[9u8; 50]), 0.0);
        let uniform: Vec<u8> = (0..=255u8).cycle().take(256 * 4).collect();
        assert!((information_entropy(&uniform) - 8.0).abs() < 1e-12);
        assert!((information_entropy(&[0, 1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_cases() {
        let u = [1.0, 2.0, 4.0, 8.0];
        assert!((correlation(&u, &u).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        assert!((correlation(&u, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(
            correlation(&[1.0, 1.0], &[1.0, 2.0]),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn adjacent_correlation_cases() {
        // horizontal neighbours are equal
        let stripes = ch(64, 64, |_, y| (y * 3) as u8);
        let r = adjacent_correlation(&stripes, Direction::Horizontal, 100, 1).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert!(matches!(
            adjacent_correlation(&Channel::filled(64, 64, 3), Direction::Horizontal, 100, 1),
            Err(Error::DegenerateInput(_))
        ));
        let smooth = ch(64, 64, |x, y| (x + 2 * y) as u8);
        let r = adjacent_correlation(&smooth, Direction::Vertical, 3000, 1).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert!(adjacent_correlation(&smooth, Direction::Diagonal, 64 * 64, 1).is_err());
        let a = adjacent_correlation(&smooth, Direction::Diagonal, 500, 9).unwrap();
        let b = adjacent_correlation(&smooth, Direction::Diagonal, 500, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ssim_cases() {
        let x = ch(32, 32, |x, y| ((x * 5 + y * 3) % 200 + 20) as u8);
        assert!((ssim(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        let inv = Channel::new(32, 32, x.data.iter().map(|v| 255 - v).collect()).unwrap();
        assert!(ssim(&x, &inv).unwrap() < 0.3);
        let c = Channel::filled(8, 8, 90);
        assert!((ssim(&c, &c).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(ssim(&x, &c), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn pixel_diff_cases() {
        let x = ch(16, 16, |x, y| (x * y) as u8);
        assert_eq!(pixel_diff(&x, &x).unwrap(), (0, 0));
        let mut y = x.clone();
        y.data[17] = y.data[17].wrapping_add(1);
        assert_eq!(pixel_diff(&x, &y).unwrap(), (1, 1));
        let z = Channel::new(16, 16, x.data.iter().map(|v| v + 1).collect()).unwrap();
        assert_eq!(pixel_diff(&x, &z).unwrap(), (1, 256));
        assert!(pixel_diff(&x, &Channel::filled(4, 4, 0)).is_err());
    }

    #[test]
    fn report_is_deterministic_json() {
        let img = RgbImage::from_gray(ch(40, 30, |x, y| (x * 3 + y) as u8));
        let a = image_report(&img, Some(&img), 500, 4).unwrap().to_json();
        let b = image_report(&img, Some(&img), 500, 4).unwrap().to_json();
        assert_eq!(a, b);
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["comparison"]["ssim"], 1.0);
        assert_eq!(v["channels"][0]["histogram"].as_array().unwrap().len(), 256);
        let keys: Vec<&str> = a
            .lines()
            .filter(|l| l.starts_with("  \""))
            .map(|l| l.trim())
            .collect();
        assert!(keys[0].starts_with("\"width\""));
    }

    proptest! {
        #[test]
        fn correlation_affine_invariant(
            u in prop::collection::vec(0.0f64..255.0, 3..60),
            shift in -50.0f64..50.0,
            scale in 0.1f64..10.0,
        ) {
            let v: Vec<f64> = u.iter().rev().copied().collect();
            if let Ok(r) = correlation(&u, &v) {
                prop_assert!((-1.0..=1.0).contains(&r));
                let u2: Vec<f64> = u.iter().map(|x| x * scale + shift).collect();
                let v2: Vec<f64> = v.iter().map(|x| x * scale - shift).collect();
                prop_assert!((correlation(&u2, &v2).unwrap() - r).abs() < 1e-9);
            }
        }

        #[test]
        fn ssim_symmetric_and_entropy_bounded(
            a in prop::collection::vec(any::<u8>(), 64),
            b in prop::collection::vec(any::<u8>(), 64),
        ) {
            let x = Channel::new(8, 8, a).unwrap();
            let y = Channel::new(8, 8, b).unwrap();
            prop_assert!((ssim(&x, &y).unwrap() - ssim(&y, &x).unwrap()).abs() < 1e-12);
            prop_assert!((ssim(&x, &x).unwrap() - 1.0).abs() < 1e-12);
            let e = information_entropy(&x.data);
            prop_assert!((0.0..=8.0).contains(&e));
        }
    }
}
