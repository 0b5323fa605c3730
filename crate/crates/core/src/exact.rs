//! The exact time-local master equation
//! dρ/dt = −i[H(t),ρ] + γ(t)(2σ₋ρσ₊ − {σ₊σ₋,ρ}), H(t) = sσ₊σ₋ + rσ₊ + r*σ₋,
//! with coefficients derived from the kernel amplitudes through m = u̇/u.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::kernel::{KernelSolution, TimeGrid};
use crate::linalg::Mat2;
use crate::observables::{EvolutionTrace, Halt, Method};
use crate::ode::{check_rho0, rk4_march, with_midpoints};

/// Two-level density matrix in the (|e⟩, |g⟩) basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(pub Mat2);

impl DensityMatrix {
    pub fn excited() -> Self {
        DensityMatrix(Mat2::real(1.0, 0.0, 0.0, 0.0))
    }

    pub fn ground() -> Self {
        DensityMatrix(Mat2::real(0.0, 0.0, 0.0, 1.0))
    }

    /// |+⟩⟨+| with |+⟩ = (|e⟩ + |g⟩)/√2.
    pub fn plus() -> Self {
        DensityMatrix(Mat2::real(0.5, 0.5, 0.5, 0.5))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat2::real(0.5, 0.0, 0.0, 0.5))
    }

    /// Physical state from ρ_ee and ρ_eg.
    pub fn from_entries(rho_ee: f64, rho_eg: C64) -> Result<Self> {
        let m = Mat2::new(rho_ee.into(), rho_eg, rho_eg.conj(), (1.0 - rho_ee).into());
        check_rho0(&m)?;
        Ok(DensityMatrix(m))
    }

    pub fn from_matrix(m: Mat2) -> Result<Self> {
        check_rho0(&m)?;
        Ok(DensityMatrix(m))
    }

    pub fn rho_ee(&self) -> f64 {
        self.0 .0[0][0].re
    }

    pub fn rho_gg(&self) -> f64 {
        self.0 .0[1][1].re
    }

    pub fn rho_eg(&self) -> C64 {
        self.0 .0[0][1]
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn trace_deviation(&self) -> f64 {
        (self.0.trace() - C64::new(1.0, 0.0)).norm()
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        self.0.hermitian_eigen().values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }
}

/// Exact-equation coefficients on the kernel grid.
#[derive(Debug, Clone)]
pub struct CoefficientTrack {
    pub grid: TimeGrid,
    pub s: Vec<f64>,
    pub gamma: Vec<f64>,
    pub r: Vec<C64>,
    pub singular: Vec<bool>,
}

impl CoefficientTrack {
    pub fn first_singular(&self) -> Option<usize> {
        self.singular.iter().position(|&s| s)
    }
}

pub const DEFAULT_U_FLOOR: f64 = 1e-6;

/// s = −Im m, γ = −Re m, r = i(ḣ − h m) with m = u̇/u; nodes with |u| < `u_floor`
/// are flagged and filled by linear extrapolation from regular neighbours.
pub fn build_coefficients(ks: &KernelSolution, u_floor: f64) -> Result<CoefficientTrack> {
    let n = ks.u.len();
    let singular: Vec<bool> = ks.u.iter().map(|u| u.norm() < u_floor).collect();
    if singular.iter().all(|&s| s) {
        return Err(Error::Singular);
    }
    let mut s = alloc::vec![0.0; n];
    let mut gamma = alloc::vec![0.0; n];
    let mut r = alloc::vec![C64::new(0.0, 0.0); n];
    for k in (0..n).filter(|&k| !singular[k]) {
        let m = ks.u_dot[k] / ks.u[k];
        s[k] = -m.im;
        gamma[k] = -m.re;
        r[k] = C64::new(0.0, 1.0) * (ks.h_dot[k] - ks.h[k] * m);
    }
    let regular: Vec<usize> = (0..n).filter(|&k| !singular[k]).collect();
    for k in (0..n).filter(|&k| singular[k]) {
        let left: Vec<usize> = regular
            .iter()
            .copied()
            .filter(|&j| j < k)
            .rev()
            .take(2)
            .collect();
        let right: Vec<usize> = regular.iter().copied().filter(|&j| j > k).take(2).collect();
        let pair = if left.len() == 2 {
            Some((left[1], left[0]))
        } else if right.len() == 2 {
            Some((right[0], right[1]))
        } else {
            None
        };
        match pair {
            Some((a, b)) => {
                let w = (k as f64 - a as f64) / (b as f64 - a as f64);
                s[k] = s[a] + w * (s[b] - s[a]);
                gamma[k] = gamma[a] + w * (gamma[b] - gamma[a]);
                r[k] = r[a] + (r[b] - r[a]) * w;
            }
            None => {
                let j = regular[0];
                s[k] = s[j];
                gamma[k] = gamma[j];
                r[k] = r[j];
            }
        }
    }
    Ok(CoefficientTrack {
        grid: ks.grid,
        s,
        gamma,
        r,
        singular,
    })
}

/// Generator of the exact equation for given (s, γ, r).
pub fn exact_generator(s: f64, gamma: f64, r: C64, rho: &Mat2) -> Mat2 {
    let sm = Mat2::sigma_minus();
    let sp = Mat2::sigma_plus();
    let h = Mat2::new(s.into(), r, r.conj(), C64::new(0.0, 0.0));
    let unitary = h.commutator(rho).scale(C64::new(0.0, -1.0));
    let jump = (sm * *rho * sp).scale_re(2.0) - (sp * sm).anticommutator(rho);
    unitary + jump.scale_re(gamma)
}

/// RK4 propagation of the exact master equation; halts before the first singular node.
pub fn propagate_exact(rho0: &DensityMatrix, ct: &CoefficientTrack) -> Result<EvolutionTrace> {
    check_rho0(&rho0.0)?;
    let s = with_midpoints(&ct.s);
    let gamma = with_midpoints(&ct.gamma);
    let r = with_midpoints(&ct.r);
    if ct.singular[0] {
        return Err(Error::Singular);
    }
    let march = rk4_march(
        rho0.0,
        ct.grid.n_steps,
        ct.grid.step(),
        |j, rho| exact_generator(s[j], gamma[j], r[j], rho),
        |n| ct.singular[n],
    )?;
    let halt = march.halted_at.map(|k| Halt {
        index: k,
        time: ct.grid.time(k),
        reason: format!("|u| below floor at t = {}", ct.grid.time(k)),
    });
    let mut trace = EvolutionTrace::new(
        ct.grid,
        march.states.into_iter().map(DensityMatrix).collect(),
        Method::Exact,
    );
    trace.halt = halt;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::solve_kernel;
    use crate::spectral::{KernelMode, SpectralDensity};

    #[test]
    fn flat_coefficients_are_constant() {
        let grid = TimeGrid::new(0.0, 3.0, 300).unwrap();
        let spec = SpectralDensity::FlatMemoryless { gamma: 1.0 };
        let ks = solve_kernel(&spec, 0.3, 0.02, &KernelMode::closed_form(), &grid).unwrap();
        let ct = build_coefficients(&ks, DEFAULT_U_FLOOR).unwrap();
        for k in 0..grid.len() {
            assert!((ct.s[k] - 0.3).abs() < 1e-10);
            assert!((ct.gamma[k] - 0.5).abs() < 1e-10);
            assert!((ct.r[k] - C64::new(0.02, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn initial_coefficients_for_memory_kernel() {
        let grid = TimeGrid::new(0.0, 1.0, 1000).unwrap();
        let spec = SpectralDensity::Lorentzian {
            gamma: 1.0,
            width: 1.0,
            detuning: 0.01,
        };
        let ks = solve_kernel(&spec, 0.3, 0.2, &KernelMode::closed_form(), &grid).unwrap();
        let ct = build_coefficients(&ks, DEFAULT_U_FLOOR).unwrap();
        assert!(ct.gamma[0].abs() < 1e-15);
        assert!((ct.s[0] - 0.3).abs() < 1e-15);
        assert!((ct.r[0] - C64::new(0.2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ground_state_is_dark() {
        let grid = TimeGrid::new(0.0, 5.0, 500).unwrap();
        let spec = SpectralDensity::Lorentzian {
            gamma: 1.0,
            width: 1.0,
            detuning: 0.01,
        };
        let ks = solve_kernel(&spec, 0.3, 0.0, &KernelMode::closed_form(), &grid).unwrap();
        let ct = build_coefficients(&ks, DEFAULT_U_FLOOR).unwrap();
        let trace = propagate_exact(&DensityMatrix::ground(), &ct).unwrap();
        assert!(trace
            .rho
            .iter()
            .all(|r| (r.0 - DensityMatrix::ground().0).max_abs() < 1e-15));
    }

    #[test]
    fn singular_nodes_are_extrapolated_and_halt_propagation() {
        let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let spec = SpectralDensity::FlatMemoryless { gamma: 1.0 };
        let mut ks = solve_kernel(&spec, 0.3, 0.0, &KernelMode::closed_form(), &grid).unwrap();
        ks.u[6] = C64::new(0.0, 0.0);
        let ct = build_coefficients(&ks, DEFAULT_U_FLOOR).unwrap();
        assert!(ct.singular[6]);
        assert!((ct.gamma[6] - 0.5).abs() < 1e-12);
        let trace = propagate_exact(&DensityMatrix::excited(), &ct).unwrap();
        assert_eq!(trace.rho.len(), 6);
        assert_eq!(trace.halt.as_ref().unwrap().index, 6);
        ks.u.iter_mut().for_each(|u| *u = C64::new(0.0, 0.0));
        assert_eq!(
            build_coefficients(&ks, DEFAULT_U_FLOOR).unwrap_err(),
            Error::Singular
        );
    }

    #[test]
    fn rejects_unphysical_initial_state() {
        assert!(DensityMatrix::from_entries(1.2, C64::new(0.0, 0.0)).is_err());
        assert!(DensityMatrix::from_entries(0.5, C64::new(0.6, 0.0)).is_err());
        assert!(DensityMatrix::from_entries(0.5, C64::new(0.3, 0.2)).is_ok());
    }
}
