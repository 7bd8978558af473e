//! Spectral entropy (SE) and C0 complexity of scalar series, and the
//! two-parameter (a, c) complexity grid.

use std::io::Write;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{FftNum, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::system::{fmt_g17, simulate_flow, State, SystemParams};

pub const MIN_LEN: usize = 256;
/// Coefficients with power at most `r` times the mean power are irregular.
pub const DEFAULT_C0_RATIO: f64 = 5.0;

pub trait FftScalar: Scalar + FftNum {}
impl<T: Scalar + FftNum> FftScalar for T {}

fn check_len<T: Scalar>(x: &[T]) -> Result<()> {
    if x.len() < MIN_LEN {
        return Err(invalid(format!(
            "complexity measures need at least {MIN_LEN} samples, got {}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(invalid("complexity input must be finite"));
    }
    Ok(())
}

fn forward<T: FftScalar>(x: impl Iterator<Item = T>, n: usize) -> Vec<Complex<T>> {
    let mut buf: Vec<Complex<T>> = x.map(|v| Complex::new(v, T::zero())).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf
}

/// Normalized Shannon entropy of the power spectrum over bins `1..=N/2`
/// after mean removal. In `[0, 1]`.
pub fn spectral_entropy<T: FftScalar>(x: &[T]) -> Result<T> {
    check_len(x)?;
    let n = x.len();
    let mean = x.iter().fold(T::zero(), |a, &v| a + v) / T::from_usize_lossy(n);
    let spec = forward(x.iter().map(|&v| v - mean), n);
    let power: Vec<T> = spec[1..=n / 2].iter().map(|z| z.norm_sqr()).collect();
    let total = power.iter().fold(T::zero(), |a, &v| a + v);
    if !(total > T::zero()) {
        return Err(Error::DegenerateInput(
            "series is constant, spectrum undefined".into(),
        ));
    }
    let h = power.iter().fold(T::zero(), |acc, &pw| {
        let q = pw / total;
        if q > T::zero() {
            acc - q * q.ln()
        } else {
            acc
        }
    });
    let bins = T::from_usize_lossy(power.len());
    Ok((h / bins.ln()).max(T::zero()).min(T::one()))
}

pub fn c0_complexity<T: FftScalar>(x: &[T]) -> Result<T> {
    c0_complexity_with(x, T::lit(DEFAULT_C0_RATIO))
}

/// Energy fraction of `x` left after keeping only the Fourier coefficients
/// whose power exceeds `r` times the mean power.
pub fn c0_complexity_with<T: FftScalar>(x: &[T], r: T) -> Result<T> {
    check_len(x)?;
    let n = x.len();
    let energy = x.iter().fold(T::zero(), |a, &v| a + v * v);
    if !(energy > T::zero()) {
        return Err(Error::DegenerateInput("series has zero energy".into()));
    }
    let mut spec = forward(x.iter().copied(), n);
    let mean_power = spec.iter().fold(T::zero(), |a, z| a + z.norm_sqr()) / T::from_usize_lossy(n);
    let threshold = r * mean_power;
    for z in spec.iter_mut() {
        if z.norm_sqr() <= threshold {
            *z = Complex::new(T::zero(), T::zero());
        }
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    let scale = T::one() / T::from_usize_lossy(n);
    let residual = x.iter().zip(spec.iter()).fold(T::zero(), |a, (&v, z)| {
        let d = v - z.re * scale;
        a + d * d
    });
    Ok((residual / energy).max(T::zero()).min(T::one()))
}

#[derive(Clone, Copy, Debug)]
pub struct GridConfig<T> {
    pub init: State<T>,
    pub dt: T,
    pub transient: usize,
    /// Samples per cell after decimation.
    pub len: usize,
    /// Integrator steps per retained sample.
    pub stride: usize,
    /// Observed component (0 for u1).
    pub component: usize,
}

impl<T: Scalar> Default for GridConfig<T> {
    fn default() -> Self {
        GridConfig {
            init: State::splat(T::lit(0.1)),
            dt: T::lit(1e-3),
            transient: 50_000,
            len: 8192,
            stride: 10,
            component: 0,
        }
    }
}

/// `SE` and `C0` indexed `[a][c]`; `None` where the run diverged or the
/// series was degenerate.
#[derive(Clone, Debug)]
pub struct ComplexityGrid<T> {
    pub a_values: Vec<T>,
    pub c_values: Vec<T>,
    pub se: Vec<Vec<Option<T>>>,
    pub c0: Vec<Vec<Option<T>>>,
}

/// The decimated observable the grid evaluates at one `(a, c)` cell.
pub fn cell_sequence<T: Scalar>(a: T, b: T, c: T, cfg: &GridConfig<T>) -> Result<Vec<T>> {
    let p = SystemParams::new(a, b, c)?;
    let tr = simulate_flow(&p, cfg.init, cfg.dt, cfg.len, cfg.transient, cfg.stride)?;
    Ok(tr.column(cfg.component))
}

pub fn complexity_grid<T: FftScalar>(
    a_range: (T, T),
    c_range: (T, T),
    b: T,
    resolution: (usize, usize),
    cfg: &GridConfig<T>,
) -> Result<ComplexityGrid<T>> {
    if !(a_range.0 < a_range.1) || !(c_range.0 < c_range.1) {
        return Err(invalid("grid ranges must be non-degenerate"));
    }
    if resolution.0 < 2 || resolution.1 < 2 {
        return Err(invalid("grid needs at least two points per axis"));
    }
    if cfg.len < MIN_LEN {
        return Err(invalid(format!(
            "per-cell length must be at least {MIN_LEN}"
        )));
    }
    let a_values = super::linspace(a_range.0, a_range.1, resolution.0);
    let c_values = super::linspace(c_range.0, c_range.1, resolution.1);
    let cells: Vec<(Option<T>, Option<T>)> = (0..resolution.0 * resolution.1)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / resolution.1, idx % resolution.1);
            match cell_sequence(a_values[i], b, c_values[j], cfg) {
                Ok(x) => (spectral_entropy(&x).ok(), c0_complexity(&x).ok()),
                Err(_) => (None, None),
            }
        })
        .collect();
    let mut se = vec![vec![None; resolution.1]; resolution.0];
    let mut c0 = se.clone();
    for (idx, (s, z)) in cells.into_iter().enumerate() {
        se[idx / resolution.1][idx % resolution.1] = s;
        c0[idx / resolution.1][idx % resolution.1] = z;
    }
    Ok(ComplexityGrid {
        a_values,
        c_values,
        se,
        c0,
    })
}

impl<T: Scalar> ComplexityGrid<T> {
    /// Matrix CSV: the header row carries the c axis, the first column the a
    /// axis. Missing cells are empty fields.
    pub fn write_csv<W: Write>(&self, values: &[Vec<Option<T>>], mut w: W) -> Result<()> {
        write!(w, "a\\c")?;
        for c in &self.c_values {
            write!(w, ",{}", fmt_g17(c.as_f64()))?;
        }
        writeln!(w)?;
        for (a, row) in self.a_values.iter().zip(values) {
            write!(w, "{}", fmt_g17(a.as_f64()))?;
            for v in row {
                match v {
                    Some(v) => write!(w, ",{}", fmt_g17(v.as_f64()))?,
                    None => write!(w, ",")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
