//! Unitary propagators for `i ∂_s U = H(s) U`.
//!
//! Two integrators: a fixed-step fourth-order Magnus scheme (two Gauss
//! points per step, exact unitarity per step) and an adaptive
//! Dormand–Prince 5(4) scheme whose accepted steps are re-unitarized.

use num_complex::Complex64;
use thiserror::Error;

use crate::numkernel::{expm_anti_hermitian, max_abs, reunitarize, ComplexMatrix, KernelError};

#[derive(Debug, Error)]
pub enum PropagateError {
    #[error("integrator failed to reach tolerance {tolerance:e} at s = {s} (step {step:e})")]
    StepUnderflow { tolerance: f64, s: f64, step: f64 },
    #[error("integrator exceeded {0} steps")]
    TooManySteps(usize),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Fixed-step fourth-order Magnus propagator from `s0` to `s1`.
pub fn magnus4<F>(h: F, u0: &ComplexMatrix, s0: f64, s1: f64, steps: usize) -> Result<ComplexMatrix, KernelError>
where
    F: Fn(f64) -> ComplexMatrix,
{
    let steps = steps.max(1);
    let dt = (s1 - s0) / steps as f64;
    let offset = 3f64.sqrt() / 6.0;
    let c = 3f64.sqrt() / 12.0 * dt * dt;
    let minus_i = Complex64::new(0.0, -1.0);
    let mut u = u0.clone();
    for k in 0..steps {
        let s = s0 + k as f64 * dt;
        // generator of the linear ODE: A = −i H
        let a1 = h(s + (0.5 - offset) * dt).map(|z| z * minus_i);
        let a2 = h(s + (0.5 + offset) * dt).map(|z| z * minus_i);
        let omega = (&a1 + &a2).scale(0.5 * dt) + (&a2 * &a1 - &a1 * &a2).scale(c);
        let omega = (&omega - omega.adjoint()).scale(0.5);
        u = expm_anti_hermitian(&omega)? * u;
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub tolerance: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            initial_step: 1e-3,
            min_step: 1e-12,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdaptiveOutcome {
    pub propagator: ComplexMatrix,
    pub accepted: usize,
    pub rejected: usize,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// error coefficients: fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// `base + dt · Σ c_i k_i`.
fn combine(base: &ComplexMatrix, dt: f64, terms: &[(f64, &ComplexMatrix)]) -> ComplexMatrix {
    let mut out = base.clone();
    for (c, k) in terms {
        out.zip_apply(*k, |o, x| *o += x * (c * dt));
    }
    out
}

/// Adaptive Dormand–Prince 5(4) integration of `i ∂_s U = H(s) U`, with the
/// state projected back onto the unitary group after every accepted step.
pub fn dormand_prince<F>(
    h: F,
    u0: &ComplexMatrix,
    s0: f64,
    s1: f64,
    opts: AdaptiveOptions,
) -> Result<AdaptiveOutcome, PropagateError>
where
    F: Fn(f64) -> ComplexMatrix,
{
    let minus_i = Complex64::new(0.0, -1.0);
    let rhs = |s: f64, u: &ComplexMatrix| -> ComplexMatrix { (h(s) * u).map(|z| z * minus_i) };
    let mut s = s0;
    let mut u = u0.clone();
    let mut dt = opts.initial_step.min(s1 - s0);
    let mut accepted = 0;
    let mut rejected = 0;
    let mut k1 = rhs(s, &u);
    while s < s1 {
        if accepted + rejected > opts.max_steps {
            return Err(PropagateError::TooManySteps(opts.max_steps));
        }
        let last = s + dt >= s1;
        if last {
            dt = s1 - s;
        }
        let k2 = rhs(s + 0.2 * dt, &combine(&u, dt, &[(A21, &k1)]));
        let k3 = rhs(s + 0.3 * dt, &combine(&u, dt, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(s + 0.8 * dt, &combine(&u, dt, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(
            s + 8.0 / 9.0 * dt,
            &combine(&u, dt, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            s + dt,
            &combine(&u, dt, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let next = combine(&u, dt, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = rhs(s + dt, &next);
        let zero = ComplexMatrix::zeros(u.nrows(), u.ncols());
        let err_m = combine(&zero, dt, &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)]);
        let err = max_abs(&err_m) / opts.tolerance;
        if err <= 1.0 {
            s = if last { s1 } else { s + dt };
            u = reunitarize(&next)?;
            k1 = rhs(s, &u);
            accepted += 1;
        } else {
            rejected += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        dt *= factor;
        if dt < opts.min_step && s < s1 {
            return Err(PropagateError::StepUnderflow {
                tolerance: opts.tolerance,
                s,
                step: dt,
            });
        }
    }
    Ok(AdaptiveOutcome {
        propagator: u,
        accepted,
        rejected,
    })
}
