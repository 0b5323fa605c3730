//! Lindblad equation with constant rate Γ/2 per dissipator term.

use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::exact::DensityMatrix;
use crate::kernel::TimeGrid;
use crate::linalg::Mat2;
use crate::observables::{EvolutionTrace, Method};
use crate::ode::{check_rho0, rk4_march};

/// −i[Δσ₊σ₋ + Ωσx, ρ] + (Γ/2)(2σ₋ρσ₊ − {σ₊σ₋, ρ}).
pub fn lindblad_generator(detuning: f64, drive: f64, gamma: f64, rho: &Mat2) -> Mat2 {
    let sm = Mat2::sigma_minus();
    let sp = Mat2::sigma_plus();
    let h = Mat2::real(detuning, drive, drive, 0.0);
    let jump = (sm * *rho * sp).scale_re(2.0) - (sp * sm).anticommutator(rho);
    h.commutator(rho).scale(C64::new(0.0, -1.0)) + jump.scale_re(0.5 * gamma)
}

pub fn propagate_markovian(
    rho0: &DensityMatrix,
    detuning: f64,
    drive: f64,
    gamma: f64,
    grid: &TimeGrid,
) -> Result<EvolutionTrace> {
    propagate_lindblad_as(rho0, detuning, drive, gamma, grid, Method::Markovian)
}

pub(crate) fn propagate_lindblad_as(
    rho0: &DensityMatrix,
    detuning: f64,
    drive: f64,
    gamma: f64,
    grid: &TimeGrid,
    method: Method,
) -> Result<EvolutionTrace> {
    check_rho0(&rho0.0)?;
    let march = rk4_march(
        rho0.0,
        grid.n_steps,
        grid.step(),
        |_, rho| lindblad_generator(detuning, drive, gamma, rho),
        |_| false,
    )?;
    Ok(EvolutionTrace::new(
        *grid,
        march.states.into_iter().map(DensityMatrix).collect(),
        method,
    ))
}
