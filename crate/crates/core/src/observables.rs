//! Observables, fidelity, physicality diagnostics and regime classification.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exact::DensityMatrix;
use crate::kernel::TimeGrid;
use crate::perturbative::dressed::DressedBasis;
use crate::perturbative::tcl::integrated_tcl_coefficient;
use crate::spectral::SpectralDensity;

/// Tolerance for calling a state unphysical.
pub const PHYSICALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Exact,
    Nz,
    Tcl,
    TclSecular,
    Markovian,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Exact,
        Method::Nz,
        Method::Tcl,
        Method::TclSecular,
        Method::Markovian,
        Method::Oracle,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Nz => "nz",
            Method::Tcl => "tcl",
            Method::TclSecular => "tcl_secular",
            Method::Markovian => "markovian",
            Method::Oracle => "oracle",
        }
    }

    pub fn from_label(label: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.label() == label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalityFlags {
    pub trace_dev: f64,
    pub min_eigenvalue: f64,
    pub sz_bound_violation: bool,
}

impl PhysicalityFlags {
    pub fn of(rho: &DensityMatrix) -> Self {
        PhysicalityFlags {
            trace_dev: rho.trace_deviation(),
            min_eigenvalue: rho.min_eigenvalue(),
            sz_bound_violation: sigma_z(rho).abs() > 1.0 + PHYSICALITY_TOL,
        }
    }

    pub fn is_physical(&self) -> bool {
        self.trace_dev <= PHYSICALITY_TOL
            && self.min_eigenvalue >= -PHYSICALITY_TOL
            && !self.sz_bound_violation
    }
}

/// Early stop of a propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct Halt {
    pub index: usize,
    pub time: f64,
    pub reason: String,
}

/// Density-matrix time series produced by one method.
#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub grid: TimeGrid,
    /// One state per grid node, shorter than the grid only after a halt.
    pub rho: Vec<DensityMatrix>,
    pub method: Method,
    pub flags: Vec<PhysicalityFlags>,
    pub halt: Option<Halt>,
    pub warnings: Vec<String>,
}

impl EvolutionTrace {
    pub fn new(grid: TimeGrid, rho: Vec<DensityMatrix>, method: Method) -> Self {
        let flags = rho.iter().map(PhysicalityFlags::of).collect();
        EvolutionTrace {
            grid,
            rho,
            method,
            flags,
            halt: None,
            warnings: Vec::new(),
        }
    }

    pub fn sigma_z(&self) -> Vec<f64> {
        self.rho.iter().map(sigma_z).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.rho.len()).map(|k| self.grid.time(k)).collect()
    }
}

/// ⟨σz⟩ = ρ_ee − ρ_gg.
pub fn sigma_z(rho: &DensityMatrix) -> f64 {
    rho.rho_ee() - rho.rho_gg()
}

/// Uhlmann fidelity Tr√(√ρ1 ρ2 √ρ1) via 2×2 eigendecompositions.
pub fn fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    let e1 = rho1.0.hermitian_eigen();
    let e2 = rho2.0.hermitian_eigen();
    for (name, e) in [("first", &e1), ("second", &e2)] {
        if e.values[0] < -PHYSICALITY_TOL {
            return Err(Error::Domain(format!(
                "{name} state has eigenvalue {:e}",
                e.values[0]
            )));
        }
    }
    let root = e1.map(|x| x.max(0.0).sqrt());
    let inner = root * rho2.0 * root;
    let f: f64 = inner
        .hermitian_eigen()
        .values
        .iter()
        .map(|&x| x.max(0.0).sqrt())
        .sum();
    Ok(f.min(1.0))
}

/// Complete-positivity witness 2α(t) + β(t) for a Lorentzian bath, with
/// α = 2∫[g1²P₋₁ + g2²P₊₁ + 4g0²P₀] and β = 4∫[g1²P₋₁ + g2²P₊₁].
pub fn positivity_witness(
    spec: &SpectralDensity,
    detuning: f64,
    drive: f64,
    t: f64,
) -> Result<f64> {
    let basis = DressedBasis::new(detuning, drive)?;
    let p = |m: i32| -> Result<f64> {
        Ok(integrated_tcl_coefficient(m, t, spec, detuning, basis.w0)?.re)
    };
    let (pm, p0, pp) = (p(-1)?, p(0)?, p(1)?);
    let (g0, g1, g2) = (basis.g0, basis.g1, basis.g2);
    let alpha = 2.0 * (g1 * g1 * pm + g2 * g2 * pp + 4.0 * g0 * g0 * p0);
    let beta = 4.0 * (g1 * g1 * pm + g2 * g2 * pp);
    Ok(2.0 * alpha + beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Markovianity {
    Markovian,
    NonMarkovian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Secularity {
    SecularOk,
    NonsecularRequired,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    I,
    II,
    III,
    IV,
}

impl Region {
    pub fn label(&self) -> &'static str {
        match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
            Region::IV => "IV",
        }
    }
}

/// Ratios standing in for "≫": Markovian iff λ ≥ κ_markov·Γ, secular iff min|N_m| ≥ κ_secular·λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    pub kappa_markov: f64,
    pub kappa_secular: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds {
            kappa_markov: 10.0,
            kappa_secular: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeLabel {
    pub markovianity: Markovianity,
    pub secularity: Secularity,
    pub region: Region,
    /// τR/τL = Γ/λ.
    pub tau_r_over_tau_l: f64,
    /// τR/τS = min|N_m|/λ.
    pub tau_r_over_tau_s: f64,
}

pub fn classify_regime(
    detuning: f64,
    drive: f64,
    gamma: f64,
    width: f64,
    delta: f64,
    thresholds: RegimeThresholds,
) -> Result<RegimeLabel> {
    let basis = DressedBasis::new(detuning, drive)?;
    let min_n = [-1.0, 0.0, 1.0]
        .iter()
        .map(|m| (detuning - delta + m * basis.w0).abs())
        .fold(f64::INFINITY, f64::min);
    let tau_r_over_tau_l = gamma / width;
    let tau_r_over_tau_s = min_n / width;
    // Relative slack keeps the label invariant under rescaling at exact boundaries.
    let slack = 1.0 + 1e-12;
    let markovianity = if tau_r_over_tau_l * thresholds.kappa_markov <= slack {
        Markovianity::Markovian
    } else {
        Markovianity::NonMarkovian
    };
    let secularity = if tau_r_over_tau_s * slack >= thresholds.kappa_secular {
        Secularity::SecularOk
    } else {
        Secularity::NonsecularRequired
    };
    let region = match (markovianity, secularity) {
        (Markovianity::Markovian, Secularity::SecularOk) => Region::I,
        (Markovianity::Markovian, Secularity::NonsecularRequired) => Region::II,
        (Markovianity::NonMarkovian, Secularity::SecularOk) => Region::III,
        (Markovianity::NonMarkovian, Secularity::NonsecularRequired) => Region::IV,
    };
    Ok(RegimeLabel {
        markovianity,
        secularity,
        region,
        tau_r_over_tau_l,
        tau_r_over_tau_s,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalitySummary {
    pub flags: Vec<PhysicalityFlags>,
    pub first_violation: Option<(usize, f64)>,
    pub max_trace_dev: f64,
    pub min_eigenvalue: f64,
    pub max_abs_sz: f64,
}

impl PhysicalitySummary {
    pub fn is_clean(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Recomputes per-node diagnostics from the states themselves.
pub fn physicality_scan(trace: &EvolutionTrace) -> PhysicalitySummary {
    let flags: Vec<PhysicalityFlags> = trace.rho.iter().map(PhysicalityFlags::of).collect();
    let first_violation = flags
        .iter()
        .position(|f| !f.is_physical())
        .map(|k| (k, trace.grid.time(k)));
    PhysicalitySummary {
        first_violation,
        max_trace_dev: flags.iter().map(|f| f.trace_dev).fold(0.0, f64::max),
        min_eigenvalue: flags
            .iter()
            .map(|f| f.min_eigenvalue)
            .fold(f64::INFINITY, f64::min),
        max_abs_sz: trace
            .rho
            .iter()
            .map(|r| sigma_z(r).abs())
            .fold(0.0, f64::max),
        flags,
    }
}

/// Indices of strict local extrema of a series.
pub fn strict_local_extrema(series: &[f64]) -> Vec<usize> {
    (1..series.len().saturating_sub(1))
        .filter(|&k| {
            let (a, b, c) = (series[k - 1], series[k], series[k + 1]);
            (b > a && b > c) || (b < a && b < c)
        })
        .collect()
}

/// max_k |a_k − b_k| over the common prefix.
pub fn max_abs_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;

    #[test]
    fn sigma_z_examples() {
        assert_eq!(sigma_z(&DensityMatrix::excited()), 1.0);
        assert_eq!(sigma_z(&DensityMatrix::maximally_mixed()), 0.0);
        let rho = DensityMatrix::from_entries(0.3, C64::new(0.0, 0.0)).unwrap();
        assert!((sigma_z(&rho) + 0.4).abs() < 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let e = DensityMatrix::excited();
        let g = DensityMatrix::ground();
        assert!((fidelity(&e, &e).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&e, &g).unwrap().abs() < 1e-12);
        let f = fidelity(&e, &DensityMatrix::maximally_mixed()).unwrap();
        assert!((f - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn fidelity_rejects_unphysical_input() {
        let bad = DensityMatrix(crate::linalg::Mat2::real(1.2, 0.0, 0.0, -0.2));
        assert!(matches!(
            fidelity(&bad, &DensityMatrix::excited()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn extrema_counting() {
        assert_eq!(
            strict_local_extrema(&[0.0, 1.0, 0.0, 1.0, 1.0, 0.0]),
            alloc::vec![1, 2]
        );
        assert!(strict_local_extrema(&[1.0, 0.5, 0.2]).is_empty());
    }

    #[test]
    fn method_labels_round_trip() {
        for m in Method::ALL {
            assert_eq!(Method::from_label(m.label()), Some(m));
        }
    }
}
