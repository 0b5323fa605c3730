//! Second-order time-convolutionless equation, in the operator form
//! dρ/dt = −i[H_S,ρ] + (A(t)ρσ₊ − σ₊A(t)ρ) + h.c. with A(t) = ∫₀ᵗ f(τ)σ₋(−τ)dτ,
//! and in the expanded dressed-basis form −i[H_S − H₁,ρ] + D(ρ) + D₁(ρ).
//!
//! The coefficient R_m(t) = 2∫₀ᵗ f(τ)e^{−imW0τ}dτ enters the operator form as
//! R_m/2, and the expanded form through P_m = Re R_m, Q_m = −Im R_m.

use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::exact::DensityMatrix;
use crate::kernel::TimeGrid;
use crate::linalg::Mat2;
use crate::observables::{EvolutionTrace, Method};
use crate::ode::{check_rho0, rk4_march, with_midpoints};
use crate::perturbative::dressed::DressedBasis;
use crate::spectral::{KernelMode, KernelTable, SpectralDensity};

const ZERO: C64 = C64::new(0.0, 0.0);
const NEG_I: C64 = C64::new(0.0, -1.0);

/// N_m = Δ − δ + mW0.
pub fn lorentzian_frequency(m: i32, detuning: f64, delta: f64, w0: f64) -> f64 {
    detuning - delta + m as f64 * w0
}

/// Closed-form R_m(t) = Γλ/(λ + iN_m)·(1 − e^{−(λ+iN_m)t}) for a Lorentzian bath.
pub fn tcl_coefficient(
    m: i32,
    t: f64,
    spec: &SpectralDensity,
    detuning: f64,
    w0: f64,
) -> Result<C64> {
    match *spec {
        SpectralDensity::Lorentzian { gamma, width, detuning: delta } => {
            let a = C64::new(width, lorentzian_frequency(m, detuning, delta, w0));
            Ok((1.0 - (-a * t).exp()) * (gamma * width) / a)
        }
        SpectralDensity::FlatMemoryless { gamma } => Ok(C64::new(gamma, 0.0)),
        SpectralDensity::SpinBoson { .. } => Err(Error::config(
            "model",
            "closed-form TCL coefficients exist only for the Lorentzian; tabulate the kernel instead",
        )),
    }
}

/// ∫₀ᵗ R_m(τ)dτ in closed form for a Lorentzian bath.
pub fn integrated_tcl_coefficient(
    m: i32,
    t: f64,
    spec: &SpectralDensity,
    detuning: f64,
    w0: f64,
) -> Result<C64> {
    match *spec {
        SpectralDensity::Lorentzian {
            gamma,
            width,
            detuning: delta,
        } => {
            let a = C64::new(width, lorentzian_frequency(m, detuning, delta, w0));
            let decay = (1.0 - (-a * t).exp()) / a;
            Ok((C64::new(t, 0.0) - decay) * (gamma * width) / a)
        }
        _ => Err(Error::config(
            "model",
            "the positivity witness is defined for the Lorentzian bath",
        )),
    }
}

/// R_m(t) for m = −1, 0, +1 at every half step (index 2n is node n, 2n+1 its midpoint).
#[derive(Debug, Clone)]
pub struct TclCoefficients {
    pub grid: TimeGrid,
    pub w0: f64,
    pub r: Vec<[C64; 3]>,
}

impl TclCoefficients {
    /// R_m at half-step index j, with m ∈ {−1, 0, 1}.
    pub fn r(&self, j: usize, m: i32) -> C64 {
        self.r[j][(m + 1) as usize]
    }

    pub fn p(&self, j: usize, m: i32) -> f64 {
        self.r(j, m).re
    }

    pub fn q(&self, j: usize, m: i32) -> f64 {
        -self.r(j, m).im
    }

    /// Closed form for the Lorentzian and flat baths.
    pub fn closed_form(
        spec: &SpectralDensity,
        detuning: f64,
        w0: f64,
        grid: &TimeGrid,
    ) -> Result<Self> {
        let h = grid.step();
        let r = (0..2 * grid.n_steps + 1)
            .map(|j| {
                let t = 0.5 * h * j as f64;
                let mut out = [ZERO; 3];
                for m in -1..=1 {
                    out[(m + 1) as usize] = tcl_coefficient(m, t, spec, detuning, w0)?;
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TclCoefficients { grid: *grid, w0, r })
    }

    /// Cumulative trapezoid of the tabulated kernel, cubic midpoints.
    pub fn from_table(kernel: &KernelTable, w0: f64, grid: &TimeGrid) -> Result<Self> {
        let values = match kernel {
            KernelTable::Flat { gamma } => {
                return Ok(TclCoefficients {
                    grid: *grid,
                    w0,
                    r: alloc::vec![[C64::new(*gamma, 0.0); 3]; 2 * grid.n_steps + 1],
                })
            }
            KernelTable::Sampled { values, .. } => values,
        };
        if values.len() != grid.len() {
            return Err(Error::config(
                "grid",
                "kernel table does not match the grid",
            ));
        }
        let h = grid.step();
        let mut nodes: Vec<[C64; 3]> = Vec::with_capacity(grid.len());
        nodes.push([ZERO; 3]);
        for n in 1..grid.len() {
            let mut next = nodes[n - 1];
            for m in -1..=1 {
                let rot =
                    |k: usize| values[k] * C64::from_polar(1.0, -(m as f64) * w0 * h * k as f64);
                next[(m + 1) as usize] += (rot(n - 1) + rot(n)) * h;
            }
            nodes.push(next);
        }
        let columns: Vec<Vec<C64>> = (0..3)
            .map(|i| with_midpoints(&nodes.iter().map(|x| x[i]).collect::<Vec<_>>()))
            .collect();
        let r = (0..columns[0].len())
            .map(|j| [columns[0][j], columns[1][j], columns[2][j]])
            .collect();
        Ok(TclCoefficients { grid: *grid, w0, r })
    }

    pub fn build(
        spec: &SpectralDensity,
        detuning: f64,
        mode: &KernelMode,
        w0: f64,
        grid: &TimeGrid,
    ) -> Result<Self> {
        match spec {
            SpectralDensity::Lorentzian { .. }
                if mode.quadrature == crate::spectral::Quadrature::ClosedForm =>
            {
                Self::closed_form(spec, detuning, w0, grid)
            }
            SpectralDensity::FlatMemoryless { .. } => Self::closed_form(spec, detuning, w0, grid),
            _ => Self::from_table(&KernelTable::build(spec, detuning, mode, grid)?, w0, grid),
        }
    }
}

/// Which algebraic form of the TCL generator to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TclForm {
    TimeLocal,
    Expanded { secular: bool },
}

struct Operators {
    h_s: Mat2,
    sigma_plus: Mat2,
    /// (c_m, X_m, X_m†, m) for m = −1, 0, 1.
    parts: [(f64, Mat2, Mat2, i32); 3],
}

impl Operators {
    fn new(basis: &DressedBasis) -> Self {
        let parts = basis
            .sigma_minus_components()
            .map(|(c, x, m)| (c, x, x.dagger(), m));
        Operators {
            h_s: basis.hamiltonian(),
            sigma_plus: Mat2::sigma_plus(),
            parts,
        }
    }

    fn time_local(&self, coeffs: &TclCoefficients, j: usize, rho: &Mat2) -> Mat2 {
        let a = self.parts.iter().fold(Mat2::ZERO, |acc, (c, x, _, m)| {
            acc + x.scale(coeffs.r(j, *m) * (0.5 * c))
        });
        let term = a * *rho * self.sigma_plus - self.sigma_plus * a * *rho;
        self.h_s.commutator(rho).scale(NEG_I) + term + term.dagger()
    }

    fn expanded(&self, coeffs: &TclCoefficients, j: usize, rho: &Mat2, secular: bool) -> Mat2 {
        let mut h1 = Mat2::ZERO;
        let mut dissipator = Mat2::ZERO;
        for (c, x, xd, m) in &self.parts {
            let xdx = *xd * *x;
            h1 += xdx.scale_re(c * c * 0.5 * coeffs.q(j, *m));
            dissipator += (*x * *rho * *xd - xdx.anticommutator(rho).scale_re(0.5))
                .scale_re(c * c * coeffs.p(j, *m));
        }
        let mut out = (self.h_s - h1).commutator(rho).scale(NEG_I) + dissipator;
        if !secular {
            let mut nonsecular = Mat2::ZERO;
            for (cm, xm, _, m) in &self.parts {
                for (cn, _, xnd, n) in &self.parts {
                    if m == n {
                        continue;
                    }
                    let term = (*xm * *rho * *xnd - *xnd * *xm * *rho)
                        .scale(coeffs.r(j, *m) * (0.5 * cm * cn));
                    nonsecular += term + term.dagger();
                }
            }
            out += nonsecular;
        }
        out
    }
}

fn propagate_with(
    rho0: &DensityMatrix,
    basis: &DressedBasis,
    coeffs: &TclCoefficients,
    form: TclForm,
) -> Result<EvolutionTrace> {
    check_rho0(&rho0.0)?;
    let ops = Operators::new(basis);
    let grid = coeffs.grid;
    let march = rk4_march(
        rho0.0,
        grid.n_steps,
        grid.step(),
        |j, rho| match form {
            TclForm::TimeLocal => ops.time_local(coeffs, j, rho),
            TclForm::Expanded { secular } => ops.expanded(coeffs, j, rho, secular),
        },
        |_| false,
    )?;
    let method = if form == (TclForm::Expanded { secular: true }) {
        Method::TclSecular
    } else {
        Method::Tcl
    };
    Ok(EvolutionTrace::new(
        grid,
        march.states.into_iter().map(DensityMatrix).collect(),
        method,
    ))
}

/// Propagates a TCL form with precomputed coefficients.
pub fn propagate_tcl_with(
    rho0: &DensityMatrix,
    detuning: f64,
    drive: f64,
    coeffs: &TclCoefficients,
    form: TclForm,
) -> Result<EvolutionTrace> {
    let basis = DressedBasis::new(detuning, drive)?;
    propagate_with(rho0, &basis, coeffs, form)
}

pub fn propagate_tcl_timelocal(
    rho0: &DensityMatrix,
    detuning: f64,
    drive: f64,
    spec: &SpectralDensity,
    mode: &KernelMode,
    grid: &TimeGrid,
) -> Result<EvolutionTrace> {
    let basis = DressedBasis::new(detuning, drive)?;
    let coeffs = TclCoefficients::build(spec, detuning, mode, basis.w0, grid)?;
    propagate_with(rho0, &basis, &coeffs, TclForm::TimeLocal)
}

pub fn propagate_tcl_expanded(
    rho0: &DensityMatrix,
    detuning: f64,
    drive: f64,
    spec: &SpectralDensity,
    mode: &KernelMode,
    grid: &TimeGrid,
    secular: bool,
) -> Result<EvolutionTrace> {
    let basis = DressedBasis::new(detuning, drive)?;
    let coeffs = TclCoefficients::build(spec, detuning, mode, basis.w0, grid)?;
    propagate_with(rho0, &basis, &coeffs, TclForm::Expanded { secular })
}
