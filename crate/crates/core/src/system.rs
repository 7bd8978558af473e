//! The nine-dimensional quaternion extension of the complex Chen system,
//! its Jacobian, and a fixed-step RK4 integrator.
//!
//! With `x1 = u1 + i u2 + j u3 + k u4`, `x2 = u5 + i u6 + j u7 + k u8` and
//! `x3 = u9`, the real form is
//!
//! ```text
//! u1' = a(u5 - u1)                 u5' = (b - a)u1 + b u5 - u1 u9
//! u2' = a(u6 - u2)                 u6' = (b - a)u2 + b u6 - u2 u9
//! u3' = a(u7 - u3)                 u7' = (b - a)u3 + b u7 - u3 u9
//! u4' = a(u8 - u4)                 u8' = (b - a)u4 + b u8 - u4 u9
//! u9' = u1 u5 + u2 u6 + u3 u7 - c u9
//! ```
//!
//! The ninth equation carries no `u4 u8` term. [`SystemParams::include_u4u8`]
//! switches it on for experiments.

use std::io::Write;
use std::ops::{Index, IndexMut};

use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix9;
use crate::scalar::Scalar;

pub const DIM: usize = 9;

/// Default integration step.
pub const DEFAULT_DT: f64 = 1e-3;
/// Default number of discarded transient steps.
pub const DEFAULT_TRANSIENT: usize = 50_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    /// Adds `u4 u8` to the ninth component.
    pub include_u4u8: bool,
}

impl<T: Scalar> SystemParams<T> {
    pub fn new(a: T, b: T, c: T) -> Result<Self> {
        let p = SystemParams {
            a,
            b,
            c,
            include_u4u8: false,
        };
        p.validate()?;
        Ok(p)
    }

    /// `(a, b, c) = (27, 23, 1)`, the chaotic operating point.
    pub fn standard() -> Self {
        SystemParams {
            a: T::lit(27.0),
            b: T::lit(23.0),
            c: T::one(),
            include_u4u8: false,
        }
    }

    pub fn with_u4u8(mut self, on: bool) -> Self {
        self.include_u4u8 = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: T| x.is_finite() && x > T::zero();
        if ok(self.a) && ok(self.b) && ok(self.c) {
            Ok(())
        } else {
            Err(invalid(format!(
                "system parameters must be positive and finite, got a={}, b={}, c={}",
                self.a, self.b, self.c
            )))
        }
    }

    /// Trace of the Jacobian, `4(b - a) - c`. Independent of the state.
    pub fn divergence(&self) -> T {
        T::lit(4.0) * (self.b - self.a) - self.c
    }
}

/// A point `(u1, ..., u9)` in phase space.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct State<T>(pub [T; DIM]);

impl<T: Scalar> State<T> {
    pub fn zeros() -> Self {
        State([T::zero(); DIM])
    }

    pub fn splat(v: T) -> Self {
        State([v; DIM])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn dot(&self, rhs: &Self) -> T {
        self.0
            .iter()
            .zip(rhs.0.iter())
            .fold(T::zero(), |acc, (&x, &y)| acc + x * y)
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        State(self.0.map(|x| x * s))
    }

    /// `self + s * rhs`
    pub fn add_scaled(&self, s: T, rhs: &Self) -> Self {
        let mut out = self.0;
        for (o, &r) in out.iter_mut().zip(rhs.0.iter()) {
            *o = *o + s * r;
        }
        State(out)
    }

    pub fn distance(&self, rhs: &Self) -> T {
        self.add_scaled(-T::one(), rhs).norm()
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }
}

impl<T> Index<usize> for State<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for State<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

/// A smooth vector field on the nine-dimensional state space together with
/// its Jacobian. The Lyapunov machinery works against this trait so it can be
/// exercised on systems with known exponents.
pub trait Flow<T: Scalar> {
    fn derivative(&self, s: &State<T>) -> State<T>;
    fn jacobian(&self, s: &State<T>) -> Matrix9<T>;
}

impl<T: Scalar> Flow<T> for SystemParams<T> {
    fn derivative(&self, s: &State<T>) -> State<T> {
        derivative(s, self)
    }

    fn jacobian(&self, s: &State<T>) -> Matrix9<T> {
        jacobian(s, self)
    }
}

pub fn derivative<T: Scalar>(s: &State<T>, p: &SystemParams<T>) -> State<T> {
    let u = &s.0;
    let (a, b, c) = (p.a, p.b, p.c);
    let mut d = [T::zero(); DIM];
    for i in 0..4 {
        d[i] = a * (u[i + 4] - u[i]);
        d[i + 4] = (b - a) * u[i] + b * u[i + 4] - u[i] * u[8];
    }
    let mut coupling = u[0] * u[4] + u[1] * u[5] + u[2] * u[6];
    if p.include_u4u8 {
        coupling = coupling + u[3] * u[7];
    }
    d[8] = coupling - c * u[8];
    State(d)
}

pub fn jacobian<T: Scalar>(s: &State<T>, p: &SystemParams<T>) -> Matrix9<T> {
    let u = &s.0;
    let (a, b, c) = (p.a, p.b, p.c);
    let mut m = Matrix9::zeros();
    for i in 0..4 {
        m[(i, i)] = -a;
        m[(i, i + 4)] = a;
        m[(i + 4, i)] = (b - a) - u[8];
        m[(i + 4, i + 4)] = b;
        m[(i + 4, 8)] = -u[i];
    }
    let pairs = if p.include_u4u8 { 4 } else { 3 };
    for i in 0..pairs {
        m[(8, i)] = u[i + 4];
        m[(8, i + 4)] = u[i];
    }
    m[(8, 8)] = -c;
    m
}

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step<T: Scalar, F: Flow<T> + ?Sized>(flow: &F, s: &State<T>, dt: T) -> Result<State<T>> {
    let next = rk4_raw(flow, s, dt);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::NonFinite { step: 1 })
    }
}

#[inline]
pub(crate) fn rk4_raw<T: Scalar, F: Flow<T> + ?Sized>(flow: &F, s: &State<T>, dt: T) -> State<T> {
    let half = dt * T::lit(0.5);
    let k1 = flow.derivative(s);
    let k2 = flow.derivative(&s.add_scaled(half, &k1));
    let k3 = flow.derivative(&s.add_scaled(half, &k2));
    let k4 = flow.derivative(&s.add_scaled(dt, &k3));
    let sixth = dt / T::lit(6.0);
    let mut out = s.0;
    for i in 0..DIM {
        out[i] = out[i] + sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]);
    }
    State(out)
}

/// Iterator over successive RK4 states. Yields `Err(NonFinite)` once and
/// then stops if the solution blows up.
pub struct Orbit<'a, T: Scalar, F: Flow<T> + ?Sized> {
    flow: &'a F,
    state: State<T>,
    dt: T,
    step: usize,
    failed: bool,
}

impl<'a, T: Scalar, F: Flow<T> + ?Sized> Orbit<'a, T, F> {
    pub fn new(flow: &'a F, init: State<T>, dt: T) -> Self {
        Orbit {
            flow,
            state: init,
            dt,
            step: 0,
            failed: false,
        }
    }

    pub fn state(&self) -> &State<T> {
        &self.state
    }

    /// Advances `n` steps without yielding.
    pub fn skip_steps(&mut self, n: usize) -> Result<()> {
        for _ in 0..n {
            self.next().transpose()?;
        }
        Ok(())
    }
}

impl<T: Scalar, F: Flow<T> + ?Sized> Iterator for Orbit<'_, T, F> {
    type Item = Result<State<T>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        self.step += 1;
        let next = rk4_raw(self.flow, &self.state, self.dt);
        if !next.is_finite() {
            self.failed = true;
            return Some(Err(Error::NonFinite { step: self.step }));
        }
        self.state = next;
        Some(Ok(next))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub dt: T,
    pub transient_steps: usize,
    /// Every `stride`-th retained state.
    pub stride: usize,
    pub samples: Vec<State<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time stamp of sample `k`, counted from the initial condition.
    pub fn time(&self, k: usize) -> T {
        T::from_usize_lossy(self.transient_steps + (k + 1) * self.stride) * self.dt
    }

    pub fn column(&self, i: usize) -> Vec<T> {
        self.samples.iter().map(|s| s[i]).collect()
    }

    /// CSV with header `t,u1,...,u9`, floats with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "t")?;
        for i in 1..=DIM {
            write!(w, ",u{i}")?;
        }
        writeln!(w)?;
        for (k, s) in self.samples.iter().enumerate() {
            write!(w, "{}", fmt_g17(self.time(k).as_f64()))?;
            for x in s.0.iter() {
                write!(w, ",{}", fmt_g17(x.as_f64()))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Formats with 17 significant digits, which round-trips any `f64`.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Integrates `transient + steps` RK4 steps and keeps the last `steps`.
pub fn simulate<T: Scalar>(
    init: State<T>,
    p: &SystemParams<T>,
    dt: T,
    steps: usize,
    transient: usize,
) -> Result<Trajectory<T>> {
    p.validate()?;
    simulate_flow(p, init, dt, steps, transient, 1)
}

/// Like [`simulate`] for any [`Flow`], keeping every `stride`-th state after
/// the transient (`steps` samples, so `steps * stride` integration steps).
pub fn simulate_flow<T: Scalar, F: Flow<T> + ?Sized>(
    flow: &F,
    init: State<T>,
    dt: T,
    steps: usize,
    transient: usize,
    stride: usize,
) -> Result<Trajectory<T>> {
    if steps == 0 {
        return Err(invalid("steps must be positive"));
    }
    if stride == 0 {
        return Err(invalid("stride must be positive"));
    }
    if !(dt.is_finite() && dt > T::zero()) {
        return Err(invalid("dt must be positive"));
    }
    if !init.is_finite() {
        return Err(invalid("initial state must be finite"));
    }
    let mut orbit = Orbit::new(flow, init, dt);
    orbit.skip_steps(transient)?;
    let mut samples = Vec::with_capacity(steps);
    for _ in 0..steps {
        orbit.skip_steps(stride - 1)?;
        let s = orbit.next().expect("orbit is infinite until failure")?;
        samples.push(s);
    }
    Ok(Trajectory {
        dt,
        transient_steps: transient,
        stride,
        samples,
    })
}
