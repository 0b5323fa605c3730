//! Brute-force reference: a finite set of bath modes and the full system-plus-bath
//! state vector in an excitation-truncated Fock space.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::exact::DensityMatrix;
use crate::kernel::TimeGrid;
use crate::linalg::Mat2;
use crate::observables::{EvolutionTrace, Method};
use crate::ode::check_rho0;
use crate::spectral::{KernelMode, KernelTable, LowerLimit, SpectralDensity};

/// Minimum fraction of ∫J that [`discretize`] insists the window covers.
pub const MIN_COVERAGE: f64 = 0.99;

/// Bath modes in the rotating frame with real couplings g_k ≥ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedBath {
    pub frequencies: Vec<f64>,
    pub couplings: Vec<f64>,
    pub window: (f64, f64),
    /// Fraction of the continuum spectral mass inside the window.
    pub coverage: f64,
}

impl DiscretizedBath {
    /// Midpoint sampling g_k² = J(x_k)Δx on a window, without a coverage requirement.
    pub fn uniform(
        spec: &SpectralDensity,
        detuning: f64,
        window: (f64, f64),
        n_modes: usize,
    ) -> Result<Self> {
        spec.validate()?;
        let (lo, hi) = window;
        if !(hi > lo) {
            return Err(Error::config(
                "window",
                format!("empty window [{lo}, {hi}]"),
            ));
        }
        if n_modes < 1 {
            return Err(Error::config("n_modes", "need at least one mode"));
        }
        let dx = (hi - lo) / n_modes as f64;
        let frequencies: Vec<f64> = (0..n_modes).map(|k| lo + (k as f64 + 0.5) * dx).collect();
        let couplings = frequencies
            .iter()
            .map(|&x| (spec.rotating_density(x, detuning) * dx).sqrt())
            .collect();
        let total = spec.total_mass(detuning)?;
        let inside = spec.mass_above(lo, detuning)? - spec.mass_above(hi, detuning)?;
        Ok(DiscretizedBath {
            frequencies,
            couplings,
            window,
            coverage: inside / total,
        })
    }

    /// A single mode of frequency x and coupling g.
    pub fn single_mode(frequency: f64, coupling: f64) -> Self {
        DiscretizedBath {
            frequencies: alloc::vec![frequency],
            couplings: alloc::vec![coupling],
            window: (frequency, frequency),
            coverage: f64::NAN,
        }
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Σ g_k² e^{−ix_k t}.
    pub fn kernel(&self, t: f64) -> C64 {
        self.frequencies
            .iter()
            .zip(&self.couplings)
            .map(|(&x, &g)| C64::from_polar(g * g, -x * t))
            .sum()
    }

    /// max |Σg_k²e^{−ix_k t} − f(t)| over `samples` + 1 equally spaced times in [0, horizon],
    /// against the continuum kernel with the lower limit at −∞.
    pub fn kernel_error(
        &self,
        spec: &SpectralDensity,
        detuning: f64,
        horizon: f64,
        samples: usize,
    ) -> Result<f64> {
        let mode = KernelMode::preferred(spec, LowerLimit::MinusInfinity);
        let grid = TimeGrid::new(0.0, horizon, samples.max(2))?;
        let reference = KernelTable::build(spec, detuning, &mode, &grid)?;
        let values = reference
            .values()
            .ok_or_else(|| Error::config("model", "the flat spectrum has no kernel samples"))?;
        Ok(grid
            .times()
            .zip(values)
            .map(|(t, &f)| (self.kernel(t) - f).norm())
            .fold(0.0, f64::max))
    }

    pub fn total_weight(&self) -> f64 {
        self.couplings.iter().map(|g| g * g).sum()
    }
}

/// Uniform midpoint discretization of a window holding at least 99% of ∫J.
pub fn discretize(
    spec: &SpectralDensity,
    detuning: f64,
    window: (f64, f64),
    n_modes: usize,
) -> Result<DiscretizedBath> {
    if n_modes < 2 {
        return Err(Error::config(
            "n_modes",
            format!("need at least 2 modes, got {n_modes}"),
        ));
    }
    let bath = DiscretizedBath::uniform(spec, detuning, window, n_modes)?;
    if bath.coverage < MIN_COVERAGE {
        return Err(Error::config(
            "window",
            format!(
                "covers {:.4} of the spectral mass, need {MIN_COVERAGE}",
                bath.coverage
            ),
        ));
    }
    Ok(bath)
}

/// Truncated basis {|s⟩⊗|n⟩ : exc(s) + Σn_k ≤ n_max}; bath states are sorted mode multisets.
#[derive(Debug, Clone)]
pub struct TruncatedBasis {
    pub states: Vec<(bool, Vec<u16>)>,
    index: BTreeMap<(bool, Vec<u16>), usize>,
    pub n_max: usize,
}

impl TruncatedBasis {
    pub fn new(n_modes: usize, n_max: usize) -> Result<Self> {
        if n_modes > u16::MAX as usize {
            return Err(Error::config("n_modes", "too many modes"));
        }
        let mut states = Vec::new();
        for excited in [false, true] {
            let budget = n_max.saturating_sub(excited as usize);
            if excited && n_max == 0 {
                continue;
            }
            let mut stack: Vec<Vec<u16>> = alloc::vec![Vec::new()];
            while let Some(config) = stack.pop() {
                if config.len() < budget {
                    let start = config.last().copied().unwrap_or(0);
                    for k in (start..n_modes as u16).rev() {
                        let mut next = config.clone();
                        next.push(k);
                        stack.push(next);
                    }
                }
                states.push((excited, config));
            }
        }
        states.sort_by(|a, b| (a.1.len(), a.0, &a.1).cmp(&(b.1.len(), b.0, &b.1)));
        let index = states
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        Ok(TruncatedBasis {
            states,
            index,
            n_max,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn find(&self, excited: bool, config: &[u16]) -> Option<usize> {
        self.index.get(&(excited, config.to_vec())).copied()
    }

    pub fn excitation(&self, i: usize) -> usize {
        let (e, n) = &self.states[i];
        *e as usize + n.len()
    }
}

/// Real symmetric matrix in compressed-row form.
#[derive(Debug, Clone)]
struct Csr {
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl Csr {
    fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_start = alloc::vec![0; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("previous entry") += v;
                continue;
            }
            cols.push(c);
            values.push(v);
            row_start[r + 1] = cols.len();
            last = Some((r, c));
        }
        for r in 1..=n {
            row_start[r] = row_start[r].max(row_start[r - 1]);
        }
        Csr {
            row_start,
            cols,
            values,
        }
    }

    /// out = −i·H·x.
    fn apply_minus_i(&self, x: &[C64], out: &mut [C64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for idx in self.row_start[r]..self.row_start[r + 1] {
                acc += x[self.cols[idx]] * self.values[idx];
            }
            *o = C64::new(acc.im, -acc.re);
        }
    }

    fn gershgorin(&self) -> f64 {
        (0..self.row_start.len() - 1)
            .map(|r| {
                self.values[self.row_start[r]..self.row_start[r + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Diagnostics of a truncated propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleDiagnostics {
    /// Largest population of the highest retained excitation shell.
    pub top_shell_population: f64,
    /// Duhamel bound ∫‖QHψ‖dt on the amplitude lost to states beyond the truncation.
    pub leak_amplitude_bound: f64,
    /// Largest |‖ψ‖² − 1| over the run.
    pub norm_drift: f64,
    pub basis_size: usize,
    pub substeps: usize,
}

#[derive(Debug, Clone)]
pub struct OracleRun {
    pub trace: EvolutionTrace,
    pub diagnostics: OracleDiagnostics,
}

/// Threshold on the top-shell population above which a warning is attached.
pub const LEAK_WARNING: f64 = 1e-3;

/// RK4 substep so that ‖H‖·dt stays below this, keeping the norm error of the
/// non-unitary stepper well under 10⁻⁸ per unit time.
const STEP_NORM: f64 = 0.02;

struct PureRun {
    rho: Vec<Mat2>,
    top_shell: f64,
    leak: f64,
    norm_drift: f64,
}

/// Full propagation under H = Δσ₊σ₋ + Ωσx + Σx_k a†a + Σ g_k(σ₊a_k + σ₋a_k†),
/// traced back to the two-level system.
pub fn propagate_full(
    rho0: &DensityMatrix,
    bath: &DiscretizedBath,
    detuning: f64,
    drive: f64,
    n_max: usize,
    grid: &TimeGrid,
) -> Result<OracleRun> {
    check_rho0(&rho0.0)?;
    if n_max < 1 {
        return Err(Error::config("n_max", "need at least one excitation"));
    }
    let basis = TruncatedBasis::new(bath.len(), n_max)?;
    let mut triplets = Vec::new();
    // Drive matrix elements from shell n_max to the first excluded shell.
    let mut leak_rows: Vec<(usize, f64)> = Vec::new();
    for (i, (excited, config)) in basis.states.iter().enumerate() {
        let energy = if *excited { detuning } else { 0.0 }
            + config
                .iter()
                .map(|&k| bath.frequencies[k as usize])
                .sum::<f64>();
        triplets.push((i, i, energy));
        if !*excited && drive != 0.0 {
            match basis.find(true, config) {
                Some(j) => {
                    triplets.push((i, j, drive));
                    triplets.push((j, i, drive));
                }
                None => leak_rows.push((i, drive)),
            }
        }
        if !*excited {
            // σ₊a_k|g, n⟩ = √n_k |e, n − 1_k⟩.
            let mut k_prev = None;
            for (pos, &k) in config.iter().enumerate() {
                if k_prev == Some(k) {
                    continue;
                }
                k_prev = Some(k);
                let n_k = config.iter().filter(|&&q| q == k).count() as f64;
                let mut lowered = config.clone();
                lowered.remove(pos);
                if let Some(j) = basis.find(true, &lowered) {
                    let g = bath.couplings[k as usize] * n_k.sqrt();
                    triplets.push((i, j, g));
                    triplets.push((j, i, g));
                }
            }
        }
    }
    let n_states = basis.len();
    let h = Csr::from_triplets(n_states, triplets);

    let substeps = ((grid.step() * h.gershgorin()) / STEP_NORM).ceil().max(1.0) as usize;
    let eg_pairs: Vec<(usize, usize)> = (0..n_states)
        .filter(|&i| basis.states[i].0)
        .filter_map(|i| basis.find(false, &basis.states[i].1).map(|j| (i, j)))
        .collect();
    let top: Vec<usize> = (0..n_states)
        .filter(|&i| basis.excitation(i) == n_max)
        .collect();
    let vacuum_g = basis.find(false, &[]).expect("vacuum");
    let vacuum_e = basis.find(true, &[]).expect("excited vacuum");

    let eigen = rho0.0.hermitian_eigen();
    let mut total = alloc::vec![Mat2::ZERO; grid.len()];
    let mut diagnostics = OracleDiagnostics {
        top_shell_population: 0.0,
        leak_amplitude_bound: 0.0,
        norm_drift: 0.0,
        basis_size: n_states,
        substeps,
    };
    for k in 0..2 {
        let weight = eigen.values[k];
        if weight <= 1e-14 {
            continue;
        }
        let mut psi = alloc::vec![C64::new(0.0, 0.0); n_states];
        psi[vacuum_e] = eigen.vectors[k][0];
        psi[vacuum_g] = eigen.vectors[k][1];
        let run = run_pure(&h, psi, grid, substeps, &eg_pairs, &top, &leak_rows);
        for (acc, r) in total.iter_mut().zip(&run.rho) {
            *acc += r.scale_re(weight);
        }
        diagnostics.top_shell_population = diagnostics.top_shell_population.max(run.top_shell);
        diagnostics.leak_amplitude_bound += weight * run.leak;
        diagnostics.norm_drift = diagnostics.norm_drift.max(run.norm_drift);
    }
    let mut trace = EvolutionTrace::new(
        *grid,
        total.into_iter().map(DensityMatrix).collect(),
        Method::Oracle,
    );
    if drive != 0.0 && diagnostics.top_shell_population > LEAK_WARNING {
        trace.warnings.push(format!(
            "population {:.3e} in the top excitation shell exceeds {LEAK_WARNING:e}",
            diagnostics.top_shell_population
        ));
    }
    Ok(OracleRun { trace, diagnostics })
}

fn run_pure(
    h: &Csr,
    mut psi: Vec<C64>,
    grid: &TimeGrid,
    substeps: usize,
    eg_pairs: &[(usize, usize)],
    top: &[usize],
    leak_rows: &[(usize, f64)],
) -> PureRun {
    let n = psi.len();
    let dt = grid.step() / substeps as f64;
    let mut k1 = alloc::vec![C64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    let reduce = |psi: &[C64]| {
        let mut ee = 0.0;
        let mut eg = C64::new(0.0, 0.0);
        for &(e, g) in eg_pairs {
            ee += psi[e].norm_sqr();
            eg += psi[e] * psi[g].conj();
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        Mat2::new(ee.into(), eg, eg.conj(), (norm - ee).into())
    };
    // ‖QHψ‖: only the drive acting on |g, n⟩ in the top shell leaves the space,
    // since the coupling conserves the excitation number.
    let leak_rate = |psi: &[C64]| {
        leak_rows
            .iter()
            .map(|&(i, w)| w * w * psi[i].norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let top_pop = |psi: &[C64]| top.iter().map(|&i| psi[i].norm_sqr()).sum::<f64>();
    let mut rho = Vec::with_capacity(grid.len());
    rho.push(reduce(&psi));
    let mut top_shell = top_pop(&psi);
    let mut leak = 0.0;
    let mut norm_drift: f64 = 0.0;
    let mut rate_prev = leak_rate(&psi);
    for _ in 0..grid.n_steps {
        for _ in 0..substeps {
            h.apply_minus_i(&psi, &mut k1);
            for i in 0..n {
                tmp[i] = psi[i] + k1[i] * (0.5 * dt);
            }
            h.apply_minus_i(&tmp, &mut k2);
            for i in 0..n {
                tmp[i] = psi[i] + k2[i] * (0.5 * dt);
            }
            h.apply_minus_i(&tmp, &mut k3);
            for i in 0..n {
                tmp[i] = psi[i] + k3[i] * dt;
            }
            h.apply_minus_i(&tmp, &mut k4);
            for i in 0..n {
                psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
            }
            let rate = leak_rate(&psi);
            leak += 0.5 * dt * (rate + rate_prev);
            rate_prev = rate;
        }
        let r = reduce(&psi);
        norm_drift = norm_drift.max((r.trace().re - 1.0).abs());
        top_shell = top_shell.max(top_pop(&psi));
        rho.push(r);
    }
    PureRun {
        rho,
        top_shell,
        leak,
        norm_drift,
    }
}

/// ρ_ee(t) = |u|²ρ_ee(0), ρ_eg(t) = uρ_eg(0): the undriven map.
pub fn undriven_analytic(
    rho0: &DensityMatrix,
    u: &[C64],
    grid: &TimeGrid,
) -> Result<EvolutionTrace> {
    check_rho0(&rho0.0)?;
    if u.len() != grid.len() {
        return Err(Error::config(
            "grid",
            "amplitude series does not match the grid",
        ));
    }
    let states = u
        .iter()
        .map(|&uk| {
            let ee = uk.norm_sqr() * rho0.rho_ee();
            let eg = uk * rho0.rho_eg();
            DensityMatrix(Mat2::new(ee.into(), eg, eg.conj(), (1.0 - ee).into()))
        })
        .collect();
    Ok(EvolutionTrace::new(*grid, states, Method::Oracle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::sigma_z;

    #[test]
    fn basis_sizes() {
        // |g⟩ with ≤ 2 quanta in 40 modes (1 + 40 + 820) plus |e⟩ with ≤ 1 (1 + 40).
        assert_eq!(TruncatedBasis::new(40, 2).unwrap().len(), 861 + 41);
        assert_eq!(TruncatedBasis::new(400, 1).unwrap().len(), 402);
    }

    #[test]
    fn single_mode_kernel_has_constant_modulus() {
        let bath = DiscretizedBath::single_mode(0.3, 0.2);
        for t in [0.0, 1.0, 7.5] {
            assert!((bath.kernel(t).norm() - 0.04).abs() < 1e-15);
        }
    }

    #[test]
    fn decoupled_bath_gives_rabi_oscillation() {
        let mut bath = DiscretizedBath::single_mode(0.5, 0.0);
        bath.couplings[0] = 0.0;
        let grid = TimeGrid::new(0.0, 4.0, 400).unwrap();
        let run = propagate_full(&DensityMatrix::excited(), &bath, 0.0, 1.0, 2, &grid).unwrap();
        for (k, rho) in run.trace.rho.iter().enumerate() {
            assert!((sigma_z(rho) - (2.0 * grid.time(k)).cos()).abs() < 1e-9);
        }
        assert!(run.diagnostics.norm_drift < 1e-9);
    }

    #[test]
    fn reconstructed_kernel_matches_continuum() {
        let spec = SpectralDensity::Lorentzian {
            gamma: 1.0,
            width: 1.0,
            detuning: 0.01,
        };
        let peak = spec.peak(0.3);
        let bath = discretize(&spec, 0.3, (peak - 100.0, peak + 100.0), 400).unwrap();
        assert!(bath.kernel_error(&spec, 0.3, 5.0, 500).unwrap() <= 5e-3);
        assert!((bath.total_weight() / 0.5 - 1.0).abs() < 0.01);
    }

    #[test]
    fn coverage_requirement_enforced() {
        let spec = SpectralDensity::Lorentzian {
            gamma: 1.0,
            width: 1.0,
            detuning: 0.0,
        };
        assert!(matches!(
            discretize(&spec, 0.0, (-5.0, 5.0), 100),
            Err(Error::Config { .. })
        ));
        assert!(discretize(&spec, 0.0, (-100.0, 100.0), 400).is_ok());
    }

    #[test]
    fn undriven_map_examples() {
        let grid = TimeGrid::new(0.0, 1.0, 4).unwrap();
        let u: Vec<C64> = grid
            .times()
            .map(|t| C64::new((-0.5 * t).exp(), 0.0))
            .collect();
        let g = undriven_analytic(&DensityMatrix::ground(), &u, &grid).unwrap();
        assert!(g.rho.iter().all(|r| *r == DensityMatrix::ground()));
        let e = undriven_analytic(&DensityMatrix::excited(), &u, &grid).unwrap();
        assert!((e.rho[4].rho_ee() - (-1.0f64).exp()).abs() < 1e-15);
        let p = undriven_analytic(&DensityMatrix::plus(), &u, &grid).unwrap();
        assert!((p.rho[2].rho_eg().norm() - u[2].norm() / 2.0).abs() < 1e-15);
    }
}
