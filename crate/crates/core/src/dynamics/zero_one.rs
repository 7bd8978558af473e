//! Gottwald–Melbourne 0-1 test for chaos, correlation variant.
//!
//! For a frequency `c` the series drives the translation variables
//! `p(n) = Σ x(j) cos(jc)` and `s(n) = Σ x(j) sin(jc)`. Their mean-square
//! displacement grows linearly for chaotic input and stays bounded for
//! regular input. `K_c` is the correlation between `n` and the displacement
//! (minus its bounded oscillatory part), and `K` is the median of `K_c` over
//! random frequencies.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

pub const MIN_LEN: usize = 1000;
pub const N_FREQUENCIES: usize = 100;
/// Integrator steps between retained samples at `dt = 1e-3`. The test needs
/// a few samples per oscillation; at a spacing of 0.01 time units the series
/// is so oversampled that `K` collapses to 0 even for chaotic flows.
pub const SAMPLE_STRIDE: usize = 100;

#[derive(Clone, Debug)]
pub struct ZeroOneResult<T> {
    pub k: T,
    /// Frequency the reported `p`, `s` were computed at.
    pub c: T,
    pub p: Vec<T>,
    pub s: Vec<T>,
    /// `K_c` for every frequency tried, in draw order.
    pub k_per_c: Vec<T>,
}

/// `(p(n), s(n))` for `n = 1..=N`.
pub fn translation<T: Scalar>(x: &[T], c: T) -> (Vec<T>, Vec<T>) {
    let mut p = Vec::with_capacity(x.len());
    let mut s = Vec::with_capacity(x.len());
    let (mut pa, mut sa) = (T::zero(), T::zero());
    for (j, &xj) in x.iter().enumerate() {
        let phase = T::from_usize_lossy(j + 1) * c;
        pa = pa + xj * phase.cos();
        sa = sa + xj * phase.sin();
        p.push(pa);
        s.push(sa);
    }
    (p, s)
}

fn correlation<T: Scalar>(x: &[T], y: &[T]) -> Option<T> {
    let n = T::from_usize_lossy(x.len());
    let mx = x.iter().fold(T::zero(), |a, &v| a + v) / n;
    let my = y.iter().fold(T::zero(), |a, &v| a + v) / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy = sxy + da * db;
        sxx = sxx + da * da;
        syy = syy + db * db;
    }
    let denom = (sxx * syy).sqrt();
    (denom > T::zero()).then(|| sxy / denom)
}

/// `K_c` for one frequency. A series with no displacement at all counts as
/// regular (`0`).
pub fn k_for_frequency<T: Scalar>(x: &[T], c: T) -> T {
    let n_total = x.len();
    let ncut = n_total / 10;
    let (p, s) = translation(x, c);
    let mean = x.iter().fold(T::zero(), |a, &v| a + v) / T::from_usize_lossy(n_total);
    let denom_osc = T::one() - c.cos();

    let mut lags = Vec::with_capacity(ncut);
    let mut disp = Vec::with_capacity(ncut);
    for n in 1..=ncut {
        let m = n_total - n;
        let mut acc = T::zero();
        for j in 0..m {
            let dp = p[j + n] - p[j];
            let ds = s[j + n] - s[j];
            acc = acc + dp * dp + ds * ds;
        }
        let msd = acc / T::from_usize_lossy(m);
        let osc = mean * mean * (T::one() - (T::from_usize_lossy(n) * c).cos()) / denom_osc;
        lags.push(T::from_usize_lossy(n));
        disp.push(msd - osc);
    }
    correlation(&lags, &disp).unwrap_or_else(T::zero)
}

fn median<T: Scalar>(mut v: Vec<T>) -> T {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
    }
}

/// Runs the test. With `c01 = Some(c)` only that frequency is used; otherwise
/// `K` is the median over [`N_FREQUENCIES`] draws from `(π/5, 4π/5)` seeded
/// by `seed`, and `p`, `s` are reported at the draw closest to the median.
pub fn zero_one_test<T: Scalar>(x: &[T], c01: Option<T>, seed: u64) -> Result<ZeroOneResult<T>> {
    if x.len() < MIN_LEN {
        return Err(invalid(format!(
            "0-1 test needs at least {MIN_LEN} samples, got {}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(invalid("0-1 test input must be finite"));
    }
    let freqs: Vec<T> = match c01 {
        Some(c) => {
            if !(c > T::zero() && c.as_f64() < PI) {
                return Err(invalid(format!("c must lie in (0, pi), got {c}")));
            }
            vec![c]
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..N_FREQUENCIES)
                .map(|_| T::lit(rng.random_range(PI / 5.0..4.0 * PI / 5.0)))
                .collect()
        }
    };
    let k_per_c: Vec<T> = freqs.par_iter().map(|&c| k_for_frequency(x, c)).collect();
    let k = median(k_per_c.clone());
    let (best, _) = k_per_c
        .iter()
        .enumerate()
        .map(|(i, &kc)| (i, (kc - k).abs()))
        .fold(
            (0, T::infinity()),
            |acc, cur| if cur.1 < acc.1 { cur } else { acc },
        );
    let c = freqs[best];
    let (p, s) = translation(x, c);
    Ok(ZeroOneResult {
        k,
        c,
        p,
        s,
        k_per_c,
    })
}
