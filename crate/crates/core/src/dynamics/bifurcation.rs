use std::io::Write;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::system::{fmt_g17, simulate, State, SystemParams, DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamName {
    A,
    B,
    C,
}

impl ParamName {
    pub fn apply<T: Scalar>(self, base: &SystemParams<T>, value: T) -> SystemParams<T> {
        let mut p = *base;
        match self {
            ParamName::A => p.a = value,
            ParamName::B => p.b = value,
            ParamName::C => p.c = value,
        }
        p
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::A => "a",
            ParamName::B => "b",
            ParamName::C => "c",
        }
    }
}

impl std::str::FromStr for ParamName {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(ParamName::A),
            "b" => Ok(ParamName::B),
            "c" => Ok(ParamName::C),
            other => Err(invalid(format!(
                "unknown parameter `{other}`, expected a, b or c"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BifurcationColumn<T> {
    pub value: T,
    /// Local maxima of the observed component; `None` if the run diverged.
    pub maxima: Option<Vec<T>>,
}

#[derive(Clone, Debug)]
pub struct BifurcationData<T> {
    pub param: ParamName,
    pub component: usize,
    pub columns: Vec<BifurcationColumn<T>>,
}

impl<T: Scalar> BifurcationData<T> {
    /// `param,value` rows, one per extremum. Diverged columns emit nothing.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "param,value")?;
        for col in &self.columns {
            for m in col.maxima.iter().flatten() {
                writeln!(w, "{},{}", fmt_g17(col.value.as_f64()), fmt_g17(m.as_f64()))?;
            }
        }
        Ok(())
    }
}

/// Samples `x[m]` with `x[m-1] < x[m] > x[m+1]`.
pub fn local_maxima<T: Scalar>(x: &[T]) -> Vec<T> {
    x.windows(3)
        .filter(|w| w[0] < w[1] && w[1] > w[2])
        .map(|w| w[1])
        .collect()
}

#[derive(Clone, Copy, Debug)]
pub struct ScanConfig<T> {
    pub init: State<T>,
    pub dt: T,
    pub steps: usize,
    pub transient: usize,
}

impl<T: Scalar> Default for ScanConfig<T> {
    fn default() -> Self {
        ScanConfig {
            init: State::splat(T::lit(0.1)),
            dt: T::lit(1e-3),
            steps: 100_000,
            transient: 50_000,
        }
    }
}

/// Evenly spaced values `lo..=hi`, `n >= 2`.
pub fn linspace<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    let denom = T::from_usize_lossy(n - 1);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * T::from_usize_lossy(i) / denom
            }
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn bifurcation_scan<T: Scalar>(
    base: &SystemParams<T>,
    vary: ParamName,
    lo: T,
    hi: T,
    n_points: usize,
    component: usize,
    cfg: &ScanConfig<T>,
) -> Result<BifurcationData<T>> {
    if !(lo < hi) {
        return Err(invalid("bifurcation range needs lo < hi"));
    }
    if n_points < 2 {
        return Err(invalid("bifurcation scan needs at least two points"));
    }
    if component >= DIM {
        return Err(invalid(format!("component index {component} out of range")));
    }
    let values = linspace(lo, hi, n_points);
    let columns = values
        .par_iter()
        .map(|&value| {
            let p = vary.apply(base, value);
            let maxima = p
                .validate()
                .and_then(|_| simulate(cfg.init, &p, cfg.dt, cfg.steps, cfg.transient))
                .ok()
                .map(|tr| local_maxima(&tr.column(component)));
            BifurcationColumn { value, maxima }
        })
        .collect();
    Ok(BifurcationData {
        param: vary,
        component,
        columns,
    })
}
