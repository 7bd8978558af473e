//! Full Lyapunov spectrum by the Benettin method: the state and a 9×9
//! tangent frame are integrated together with RK4, and the frame is
//! re-orthonormalized by QR every few steps. Exponents are the time averages
//! of `ln |R_ii|` accumulated after the transient.

use std::io::Write;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix9;
use crate::scalar::Scalar;
use crate::system::{fmt_g17, Flow, State, DIM};

#[derive(Clone, Copy, Debug)]
pub struct LyapunovConfig<T> {
    pub dt: T,
    pub total_time: T,
    pub transient_time: T,
    /// Steps between QR re-orthonormalizations.
    pub reorth_every: usize,
    /// Record the running estimate every this many re-orthonormalizations
    /// (0 disables the trace).
    pub trace_every: usize,
}

impl<T: Scalar> Default for LyapunovConfig<T> {
    fn default() -> Self {
        LyapunovConfig {
            dt: T::lit(1e-3),
            total_time: T::lit(500.0),
            transient_time: T::lit(50.0),
            reorth_every: 10,
            trace_every: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TracePoint<T> {
    pub time: T,
    pub exponents: [T; DIM],
}

#[derive(Clone, Debug, Serialize)]
pub struct LyapunovSpectrum<T> {
    /// Sorted descending, nats per time unit.
    pub exponents: [T; DIM],
    /// Averaging window length (total minus transient).
    pub settle_time: T,
    pub trace: Vec<TracePoint<T>>,
}

impl<T: Scalar> LyapunovSpectrum<T> {
    pub fn sum(&self) -> T {
        self.exponents.iter().fold(T::zero(), |acc, &x| acc + x)
    }

    /// Writes `time,LE1..LE9` rows of the convergence trace.
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "time")?;
        for i in 1..=DIM {
            write!(w, ",LE{i}")?;
        }
        writeln!(w)?;
        for pt in &self.trace {
            write!(w, "{}", fmt_g17(pt.time.as_f64()))?;
            for x in pt.exponents.iter() {
                write!(w, ",{}", fmt_g17(x.as_f64()))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn sorted_desc<T: Scalar>(mut v: [T; DIM]) -> [T; DIM] {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// One RK4 step of the joint system `u' = f(u)`, `Φ' = J(u) Φ`.
fn tangent_rk4<T: Scalar, F: Flow<T> + ?Sized>(
    flow: &F,
    u: &State<T>,
    phi: &Matrix9<T>,
    dt: T,
) -> (State<T>, Matrix9<T>) {
    let half = dt * T::lit(0.5);
    let eval = |u: &State<T>, phi: &Matrix9<T>| (flow.derivative(u), flow.jacobian(u).mul_mat(phi));

    let (k1, l1) = eval(u, phi);
    let (k2, l2) = eval(&u.add_scaled(half, &k1), &phi.add_scaled(half, &l1));
    let (k3, l3) = eval(&u.add_scaled(half, &k2), &phi.add_scaled(half, &l2));
    let (k4, l4) = eval(&u.add_scaled(dt, &k3), &phi.add_scaled(dt, &l3));

    let sixth = dt / T::lit(6.0);
    let two = T::lit(2.0);
    let u_next = u
        .add_scaled(sixth, &k1)
        .add_scaled(sixth * two, &k2)
        .add_scaled(sixth * two, &k3)
        .add_scaled(sixth, &k4);
    let phi_next = phi
        .add_scaled(sixth, &l1)
        .add_scaled(sixth * two, &l2)
        .add_scaled(sixth * two, &l3)
        .add_scaled(sixth, &l4);
    (u_next, phi_next)
}

pub fn lyapunov_spectrum<T: Scalar, F: Flow<T> + ?Sized>(
    flow: &F,
    init: State<T>,
    cfg: &LyapunovConfig<T>,
) -> Result<LyapunovSpectrum<T>> {
    let LyapunovConfig {
        dt,
        total_time,
        transient_time,
        reorth_every,
        trace_every,
    } = *cfg;
    if !(dt.is_finite() && dt > T::zero()) {
        return Err(invalid("dt must be positive"));
    }
    if !(transient_time >= T::zero() && total_time > transient_time) {
        return Err(invalid("need total_time > transient_time >= 0"));
    }
    if reorth_every == 0 {
        return Err(invalid("reorth_every must be positive"));
    }
    if !init.is_finite() {
        return Err(invalid("initial state must be finite"));
    }
    let total_steps = (total_time / dt).round().to_usize().unwrap_or(0);
    let transient_steps = (transient_time / dt).round().to_usize().unwrap_or(0);

    let mut u = init;
    let mut phi = Matrix9::identity();
    let mut log_sums = [T::zero(); DIM];
    let mut averaged_steps = 0usize;
    let mut n_reorth = 0usize;
    let mut last_reorth = 0usize;
    let mut trace = Vec::new();

    for step in 1..=total_steps {
        let (u_next, phi_next) = tangent_rk4(flow, &u, &phi, dt);
        if !u_next.is_finite() || !phi_next.is_finite() {
            return Err(Error::NonFinite { step });
        }
        u = u_next;
        phi = phi_next;

        // windows never straddle the end of the transient
        if step % reorth_every != 0 && step != transient_steps && step != total_steps {
            continue;
        }
        let r = phi.orthonormalize();
        let counted = step - last_reorth;
        last_reorth = step;
        if step <= transient_steps {
            continue;
        }
        for (acc, &rii) in log_sums.iter_mut().zip(r.iter()) {
            if rii <= T::zero() {
                return Err(Error::DegenerateInput("tangent frame collapsed".into()));
            }
            *acc = *acc + rii.ln();
        }
        averaged_steps += counted;
        n_reorth += 1;
        if trace_every > 0 && n_reorth.is_multiple_of(trace_every) {
            let elapsed = T::from_usize_lossy(averaged_steps) * dt;
            trace.push(TracePoint {
                time: T::from_usize_lossy(step) * dt,
                exponents: sorted_desc(log_sums.map(|s| s / elapsed)),
            });
        }
    }

    if averaged_steps == 0 {
        return Err(invalid("averaging window is empty"));
    }
    let elapsed = T::from_usize_lossy(averaged_steps) * dt;
    Ok(LyapunovSpectrum {
        exponents: sorted_desc(log_sums.map(|s| s / elapsed)),
        settle_time: elapsed,
        trace,
    })
}
