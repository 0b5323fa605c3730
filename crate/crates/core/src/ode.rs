//! Classical fourth-order stepping of 2×2 matrix ODEs on a uniform grid.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::Mat2;

/// Largest trace correction applied per step before the drift counts as an error.
pub const TRACE_RENORM_BOUND: f64 = 1e-9;

/// Interpolates nodal samples to the midpoint of interval [n, n+1] with a cubic
/// through four neighbouring nodes (linear when fewer than four exist).
pub fn midpoint<T>(samples: &[T], n: usize) -> T
where
    T: Copy + core::ops::Mul<f64, Output = T> + core::ops::Add<Output = T>,
{
    let len = samples.len();
    if len < 4 {
        return samples[n] * 0.5 + samples[n + 1] * 0.5;
    }
    let (start, w) = if n == 0 {
        (0, [0.3125, 0.9375, -0.3125, 0.0625])
    } else if n + 2 >= len {
        (len - 4, [0.0625, -0.3125, 0.9375, 0.3125])
    } else {
        (n - 1, [-0.0625, 0.5625, 0.5625, -0.0625])
    };
    samples[start] * w[0]
        + samples[start + 1] * w[1]
        + samples[start + 2] * w[2]
        + samples[start + 3] * w[3]
}

/// Nodal samples interleaved with cubic midpoints: entry 2n is node n, 2n+1 the midpoint.
pub fn with_midpoints<T>(samples: &[T]) -> Vec<T>
where
    T: Copy + core::ops::Mul<f64, Output = T> + core::ops::Add<Output = T>,
{
    let mut out = Vec::with_capacity(2 * samples.len());
    for n in 0..samples.len() {
        out.push(samples[n]);
        if n + 1 < samples.len() {
            out.push(midpoint(samples, n));
        }
    }
    out
}

/// Outcome of a marched propagation.
pub struct March {
    pub states: Vec<Mat2>,
    /// Index of the node at which marching stopped early, if any.
    pub halted_at: Option<usize>,
}

/// RK4 over `n_steps` steps. `rhs(j, ρ)` evaluates the generator at half-step index j
/// (j = 2n is node n, j = 2n+1 its midpoint). `stop(n)` ends the march before
/// node n is entered. Trace drift is renormalized up to [`TRACE_RENORM_BOUND`].
pub fn rk4_march(
    rho0: Mat2,
    n_steps: usize,
    step: f64,
    rhs: impl Fn(usize, &Mat2) -> Mat2,
    stop: impl Fn(usize) -> bool,
) -> Result<March> {
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(rho0);
    let mut rho = rho0;
    for n in 0..n_steps {
        if stop(n + 1) {
            return Ok(March {
                states,
                halted_at: Some(n + 1),
            });
        }
        let k1 = rhs(2 * n, &rho);
        let k2 = rhs(2 * n + 1, &(rho + k1.scale_re(0.5 * step)));
        let k3 = rhs(2 * n + 1, &(rho + k2.scale_re(0.5 * step)));
        let k4 = rhs(2 * n + 2, &(rho + k3.scale_re(step)));
        rho += (k1 + k2.scale_re(2.0) + k3.scale_re(2.0) + k4).scale_re(step / 6.0);
        let tr = rho.trace();
        let dev = (tr - C64::new(1.0, 0.0)).norm();
        if !dev.is_finite() {
            return Err(Error::Accuracy {
                what: "trace",
                value: f64::INFINITY,
                bound: TRACE_RENORM_BOUND,
            });
        }
        if dev > TRACE_RENORM_BOUND {
            return Err(Error::Accuracy {
                what: "trace drift per step",
                value: dev,
                bound: TRACE_RENORM_BOUND,
            });
        }
        rho = rho.scale(C64::new(1.0, 0.0) / tr);
        // Restore exact Hermiticity lost to round-off.
        rho = (rho + rho.dagger()).scale_re(0.5);
        states.push(rho);
    }
    Ok(March {
        states,
        halted_at: None,
    })
}

pub fn check_rho0(rho0: &Mat2) -> Result<()> {
    if rho0.hermiticity_defect() > 1e-12 {
        return Err(Error::Domain(format!(
            "initial state not Hermitian (defect {:e})",
            rho0.hermiticity_defect()
        )));
    }
    let tr = rho0.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(Error::Domain(format!("initial state trace {tr} ≠ 1")));
    }
    let min = rho0.hermitian_eigen().values[0];
    if min < -1e-9 {
        return Err(Error::Domain(format!(
            "initial state has negative eigenvalue {min:e}"
        )));
    }
    Ok(())
}
