//! Second-order Nakajima-Zwanzig equation
//! dρ/dt = −i[H_S,ρ] + ∫₀ᵗ {f(t−s)[U(t−s)σ₋ρ(s)U†(t−s), σ₊] + h.c.} ds, U(τ) = e^{−iH_Sτ}.

use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::exact::DensityMatrix;
use crate::kernel::TimeGrid;
use crate::linalg::{Mat2, Super4};
use crate::observables::{EvolutionTrace, Method};
use crate::ode::check_rho0;
use crate::perturbative::dressed::DressedBasis;
use crate::perturbative::markov::propagate_lindblad_as;
use crate::spectral::{KernelMode, KernelTable, SpectralDensity};

/// Memory superoperator K(τ)X = f[UσXU†, σ₊] + f*[σ₋, UXσ₊U†].
pub fn memory_superoperator(basis: &DressedBasis, f: C64, tau: f64) -> Super4 {
    let u = basis.propagator(tau);
    let ud = u.dagger();
    let sm = Mat2::sigma_minus();
    let sp = Mat2::sigma_plus();
    Super4::from_map(|x| {
        let forward = u * sm * *x * ud;
        let backward = u * *x * sp * ud;
        forward.commutator(&sp).scale(f) + sm.commutator(&backward).scale(f.conj())
    })
}

pub fn propagate_nz(
    rho0: &DensityMatrix,
    detuning: f64,
    drive: f64,
    spec: &SpectralDensity,
    mode: &KernelMode,
    grid: &TimeGrid,
) -> Result<EvolutionTrace> {
    let kernel = KernelTable::build(spec, detuning, mode, grid)?;
    propagate_nz_tabulated(rho0, detuning, drive, &kernel, grid)
}

/// Trapezoidal-history integration. The free evolution is taken exactly over
/// each step and the memory integral by the trapezoidal rule, with the
/// diagonal history node solved implicitly.
pub fn propagate_nz_tabulated(
    rho0: &DensityMatrix,
    detuning: f64,
    drive: f64,
    kernel: &KernelTable,
    grid: &TimeGrid,
) -> Result<EvolutionTrace> {
    check_rho0(&rho0.0)?;
    let basis = DressedBasis::new(detuning, drive)?;
    let f = match kernel {
        KernelTable::Flat { gamma } => {
            // A delta kernel with half weight at the endpoint turns the memory term into the Lindblad dissipator.
            return propagate_lindblad_as(rho0, detuning, drive, *gamma, grid, Method::Nz);
        }
        KernelTable::Sampled { values, .. } => values,
    };
    if f.len() != grid.len() {
        return Err(Error::config(
            "grid",
            "kernel table does not match the grid",
        ));
    }
    let h = grid.step();
    let memory: Vec<[[C64; 4]; 4]> = f
        .iter()
        .enumerate()
        .map(|(k, &fk)| memory_superoperator(&basis, fk, h * k as f64).0)
        .collect();
    let v = basis.propagator(h);
    let vd = v.dagger();
    let free = Super4::from_map(|x| v * *x * vd);
    let implicit = Super4::identity()
        .sub(&Super4(memory[0]).scale(C64::new(0.25 * h * h, 0.0)))
        .inverse()
        .ok_or(Error::Numeric {
            what: "NZ implicit step",
            achieved: f64::INFINITY,
        })?;

    let n_nodes = grid.len();
    let mut rho: Vec<[C64; 4]> = Vec::with_capacity(n_nodes);
    rho.push(rho0.0.to_vec4());
    let mut mem_prev = [C64::new(0.0, 0.0); 4];
    for n in 1..n_nodes {
        // History part of h·Σ w_j K(t_n − t_j)ρ_j without the j = n node.
        let mut hist = [C64::new(0.0, 0.0); 4];
        accumulate(&mut hist, &memory[n], &rho[0], 0.5);
        for j in 1..n {
            accumulate(&mut hist, &memory[n - j], &rho[j], 1.0);
        }
        hist.iter_mut().for_each(|x| *x *= h);
        let mut rhs = [C64::new(0.0, 0.0); 4];
        accumulate(&mut rhs, &free.0, &rho[n - 1], 1.0);
        let mut carried = [C64::new(0.0, 0.0); 4];
        accumulate(&mut carried, &free.0, &mem_prev, 1.0);
        for i in 0..4 {
            rhs[i] += 0.5 * h * (carried[i] + hist[i]);
        }
        let mut next = [C64::new(0.0, 0.0); 4];
        accumulate(&mut next, &implicit.0, &rhs, 1.0);
        let mut diag = [C64::new(0.0, 0.0); 4];
        accumulate(&mut diag, &memory[0], &next, 0.5 * h);
        for i in 0..4 {
            mem_prev[i] = hist[i] + diag[i];
        }
        rho.push(next);
    }
    let states = rho
        .into_iter()
        .map(|v| DensityMatrix(Mat2::from_vec4(v)))
        .collect();
    Ok(EvolutionTrace::new(*grid, states, Method::Nz))
}

#[inline]
fn accumulate(acc: &mut [C64; 4], m: &[[C64; 4]; 4], x: &[C64; 4], weight: f64) {
    for (row, a) in m.iter().zip(acc.iter_mut()) {
        *a += (row[0] * x[0] + row[1] * x[1] + row[2] * x[2] + row[3] * x[3]) * weight;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::sigma_z;

    #[test]
    fn coupling_off_gives_rabi_flopping() {
        let grid = TimeGrid::new(0.0, 5.0, 1000).unwrap();
        let kernel =
            KernelTable::from_samples(alloc::vec![C64::new(0.0, 0.0); grid.len()], 0.0, &grid)
                .unwrap();
        let tr =
            propagate_nz_tabulated(&DensityMatrix::excited(), 0.0, 1.0, &kernel, &grid).unwrap();
        for (k, rho) in tr.rho.iter().enumerate() {
            let t = grid.time(k);
            assert!((sigma_z(rho) - (2.0 * t).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn memory_superoperator_is_traceless() {
        let basis = DressedBasis::new(0.3, 0.4).unwrap();
        let k = memory_superoperator(&basis, C64::new(0.3, -0.2), 0.7);
        let x = Mat2::real(0.6, 0.2, 0.2, 0.4);
        assert!(k.apply(&x).trace().norm() < 1e-15);
    }
}
