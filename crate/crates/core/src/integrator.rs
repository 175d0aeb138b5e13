//! Shared fixed-step 4th-order Runge-Kutta kernel and sampling grid.
//!
//! All three integrators (dense master equation, per-orbit entrywise system,
//! classical consensus network) run the exact same scheme so that their
//! trajectories are directly comparable sample by sample.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lindblad::StepParams;

/// Hard rejection bound: a step is refused when step * stiffness > this.
pub const STABILITY_LIMIT: f64 = 0.1;

/// Factor used when choosing a step automatically: step = factor / stiffness.
/// Keeps the 4th-order phase error on the fastest rotating entry below the
/// verification tolerances over the default horizons.
pub const DEFAULT_STEP_FACTOR: f64 = 0.02;

/// Step chosen automatically from a stiffness bound.
pub fn auto_step(stiffness: f64) -> f64 {
    if stiffness <= 0.0 {
        STABILITY_LIMIT
    } else {
        DEFAULT_STEP_FACTOR / stiffness
    }
}

/// Uniform integration grid: `n_steps` steps of `dt` landing exactly on the
/// horizon, recording every `record_every` steps (plus the final step).
#[derive(Clone, Copy, Debug)]
pub(crate) struct GridPlan {
    pub dt: f64,
    pub n_steps: usize,
    pub record_every: usize,
}

pub(crate) fn plan_grid(params: &StepParams, stiffness: f64) -> Result<GridPlan> {
    params.check()?;
    if params.step * stiffness > STABILITY_LIMIT {
        return Err(Error::StepTooLarge {
            step: params.step,
            bound: STABILITY_LIMIT / stiffness,
            stiffness,
            limit: STABILITY_LIMIT,
        });
    }
    let n_steps = (params.horizon / params.step).ceil().max(1.0) as usize;
    let dt = params.horizon / n_steps as f64;
    let record_every = ((params.stride / dt).round() as usize).max(1);
    Ok(GridPlan {
        dt,
        n_steps,
        record_every,
    })
}

impl GridPlan {
    pub fn records(&self, step_index: usize) -> bool {
        (step_index + 1).is_multiple_of(self.record_every) || step_index + 1 == self.n_steps
    }

    pub fn time_of(&self, step_index: usize) -> f64 {
        (step_index + 1) as f64 * self.dt
    }
}

/// State vector usable by the shared RK4 kernel.
pub(crate) trait Rk4State: Clone {
    /// self + factor * k
    fn shifted(&self, factor: f64, k: &Self) -> Self;
    /// self + dt/6 * (k1 + 2 k2 + 2 k3 + k4), with the elementwise
    /// expression evaluated identically across implementations.
    fn rk4_combine(&self, dt: f64, k1: &Self, k2: &Self, k3: &Self, k4: &Self) -> Self;
}

#[inline]
fn combine_element(
    y: Complex64,
    sixth: f64,
    k1: Complex64,
    k2: Complex64,
    k3: Complex64,
    k4: Complex64,
) -> Complex64 {
    y + (k1 + (k2 + k3) * 2.0 + k4) * sixth
}

impl Rk4State for DMatrix<Complex64> {
    fn shifted(&self, factor: f64, k: &Self) -> Self {
        let mut out = self.clone();
        out.zip_apply(k, |y, kv| *y += kv * factor);
        out
    }

    fn rk4_combine(&self, dt: f64, k1: &Self, k2: &Self, k3: &Self, k4: &Self) -> Self {
        let sixth = dt / 6.0;
        Self::from_fn(self.nrows(), self.ncols(), |r, c| {
            combine_element(
                self[(r, c)],
                sixth,
                k1[(r, c)],
                k2[(r, c)],
                k3[(r, c)],
                k4[(r, c)],
            )
        })
    }
}

impl Rk4State for Vec<Complex64> {
    fn shifted(&self, factor: f64, k: &Self) -> Self {
        self.iter()
            .zip(k)
            .map(|(&y, &kv)| y + kv * factor)
            .collect()
    }

    fn rk4_combine(&self, dt: f64, k1: &Self, k2: &Self, k3: &Self, k4: &Self) -> Self {
        let sixth = dt / 6.0;
        (0..self.len())
            .map(|i| combine_element(self[i], sixth, k1[i], k2[i], k3[i], k4[i]))
            .collect()
    }
}

/// One classical 4th-order Runge-Kutta step.
pub(crate) fn rk4_step<S: Rk4State>(y: &S, dt: f64, rhs: impl Fn(&S) -> S) -> S {
    let k1 = rhs(y);
    let k2 = rhs(&y.shifted(0.5 * dt, &k1));
    let k3 = rhs(&y.shifted(0.5 * dt, &k2));
    let k4 = rhs(&y.shifted(dt, &k3));
    y.rk4_combine(dt, &k1, &k2, &k3, &k4)
}
