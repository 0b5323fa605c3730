use tlsme_core::exact::DEFAULT_U_FLOOR;
use tlsme_core::kernel::{closed_form_u, solve_kernel, solve_u, solve_u1};
use tlsme_core::observables::{max_abs_difference, positivity_witness};
use tlsme_core::oracle::undriven_analytic;
use tlsme_core::perturbative::{
    propagate_markovian, propagate_tcl_expanded, propagate_tcl_timelocal,
};
use tlsme_core::*;

fn lorentzian(width: f64, delta: f64) -> SpectralDensity {
    SpectralDensity::Lorentzian {
        gamma: 1.0,
        width,
        detuning: delta,
    }
}

fn exact(
    spec: &SpectralDensity,
    detuning: f64,
    drive: f64,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
) -> EvolutionTrace {
    let mode = KernelMode::preferred(spec, LowerLimit::MinusInfinity);
    let ks = solve_kernel(spec, detuning, drive, &mode, grid).unwrap();
    propagate_exact(rho0, &build_coefficients(&ks, DEFAULT_U_FLOOR).unwrap()).unwrap()
}

#[test]
fn kernel_solver_matches_closed_form_with_second_order_convergence() {
    for (width, detuning, delta) in [(25.0, 0.3, 0.01), (1.0, 10.0, 0.2), (0.05, 3.5, 0.01)] {
        let spec = lorentzian(width, delta);
        let err = |n: usize| {
            let grid = TimeGrid::new(0.0, 10.0, n).unwrap();
            let u = solve_u(&spec, detuning, &KernelMode::closed_form(), &grid).unwrap();
            u.values
                .iter()
                .enumerate()
                .map(|(k, v)| (v - closed_form_u(1.0, width, detuning, delta, grid.time(k))).norm())
                .fold(0.0, f64::max)
        };
        let (fine, coarse) = (err(10_000), err(5_000));
        let order = (coarse / fine).log2();
        assert!(fine <= 1e-6, "λ={width}: {fine:e}");
        assert!((1.8..=2.2).contains(&order), "λ={width}: order {order}");
    }
}

#[test]
fn derivative_matches_closed_form() {
    let (width, detuning, delta) = (1.0, 0.3, 0.01);
    let grid = TimeGrid::new(0.0, 5.0, 5000).unwrap();
    let u = solve_u(
        &lorentzian(width, delta),
        detuning,
        &KernelMode::closed_form(),
        &grid,
    )
    .unwrap();
    let h = 1e-5;
    for k in (0..grid.len()).step_by(500).skip(1) {
        let t = grid.time(k);
        let fd = (closed_form_u(1.0, width, detuning, delta, t + h)
            - closed_form_u(1.0, width, detuning, delta, t - h))
            / (2.0 * h);
        assert!((u.derivative[k] - fd).norm() < 1e-5, "t={t}");
    }
}

#[test]
fn markovian_reduction() {
    let grid = TimeGrid::new(0.0, 10.0, 4000).unwrap();
    let spec = SpectralDensity::FlatMemoryless { gamma: 1.0 };
    for (detuning, drive) in [(0.0, 0.0), (0.3, 0.02), (1.0, 0.7)] {
        let ks = solve_kernel(&spec, detuning, drive, &KernelMode::closed_form(), &grid).unwrap();
        let ct = build_coefficients(&ks, DEFAULT_U_FLOOR).unwrap();
        for k in 0..grid.len() {
            assert!((ct.s[k] - detuning).abs() < 1e-10);
            assert!((ct.gamma[k] - 0.5).abs() < 1e-10);
            assert!((ct.r[k] - drive).norm() < 1e-10);
        }
        let a = propagate_exact(&DensityMatrix::excited(), &ct).unwrap();
        let b =
            propagate_markovian(&DensityMatrix::excited(), detuning, drive, 1.0, &grid).unwrap();
        let d = a
            .rho
            .iter()
            .zip(&b.rho)
            .map(|(x, y)| (x.0 - y.0).max_abs())
            .fold(0.0, f64::max);
        assert!(d <= 1e-8, "{d:e}");
    }
}

#[test]
fn undriven_exact_equation_reproduces_the_analytic_map() {
    let grid = TimeGrid::new(0.0, 10.0, 10_000).unwrap();
    let rho0 = DensityMatrix::from_entries(0.7, C64::new(0.2, -0.3)).unwrap();
    for width in [25.0, 1.0, 0.05] {
        let spec = lorentzian(width, 0.01);
        let ks = solve_kernel(&spec, 0.3, 0.0, &KernelMode::closed_form(), &grid).unwrap();
        let trace =
            propagate_exact(&rho0, &build_coefficients(&ks, DEFAULT_U_FLOOR).unwrap()).unwrap();
        let analytic = undriven_analytic(&rho0, &ks.u, &grid).unwrap();
        let d = trace
            .rho
            .iter()
            .zip(&analytic.rho)
            .map(|(a, b)| (a.0 - b.0).max_abs())
            .fold(0.0, f64::max);
        assert!(d <= 1e-6, "λ={width}: {d:e}");
    }
}

#[test]
fn backward_amplitude_is_reversed_conjugate() {
    let grid = TimeGrid::new(0.0, 10.0, 10_000).unwrap();
    for (spec, detuning) in [
        (lorentzian(1.0, 0.01), 0.3),
        (lorentzian(25.0, 10.0), 1.0),
        (SpectralDensity::FlatMemoryless { gamma: 1.0 }, 0.0),
    ] {
        let mode = KernelMode::preferred(&spec, LowerLimit::MinusInfinity);
        let u = solve_u(&spec, detuning, &mode, &grid).unwrap();
        let u1 = solve_u1(&spec, detuning, &mode, &grid).unwrap();
        let last = grid.n_steps;
        assert!((u1[last] - C64::new(1.0, 0.0)).norm() < 1e-15);
        let d = (0..=last)
            .map(|k| (u1[k] - u.values[last - k].conj()).norm())
            .fold(0.0, f64::max);
        assert!(d <= 1e-6, "{spec:?}: {d:e}");
    }
}

#[test]
fn tcl_forms_agree() {
    let grid = TimeGrid::new(0.0, 10.0, 5000).unwrap();
    let rho0 = DensityMatrix::plus();
    for (width, detuning, drive, delta) in [(25.0, 0.3, 1.0, 0.01), (0.8, 0.05, 0.1, 1.8)] {
        let spec = lorentzian(width, delta);
        let mode = KernelMode::closed_form();
        let a = propagate_tcl_timelocal(&rho0, detuning, drive, &spec, &mode, &grid).unwrap();
        let b = propagate_tcl_expanded(&rho0, detuning, drive, &spec, &mode, &grid, false).unwrap();
        let d = a
            .rho
            .iter()
            .zip(&b.rho)
            .map(|(x, y)| (x.0 - y.0).max_abs())
            .fold(0.0, f64::max);
        assert!(d <= 1e-10, "{d:e}");
    }
}

#[test]
fn positivity_witness_is_non_negative() {
    for (width, detuning, drive, delta) in [(1.0, 0.3, 0.02, 0.01), (0.05, 0.3, 0.02, 0.01)] {
        let spec = lorentzian(width, delta);
        for k in 0..=200 {
            let w = positivity_witness(&spec, detuning, drive, k as f64 * 0.05).unwrap();
            assert!(w >= -1e-10, "t={}: {w:e}", k as f64 * 0.05);
        }
    }
}

#[test]
fn numeric_kernel_reproduces_closed_form_dynamics() {
    let grid = TimeGrid::new(0.0, 10.0, 2000).unwrap();
    let spec = lorentzian(1.0, 0.01);
    let rho0 = DensityMatrix::excited();
    let closed = exact(&spec, 0.3, 0.02, &rho0, &grid);
    let ks = solve_kernel(
        &spec,
        0.3,
        0.02,
        &KernelMode::numeric(LowerLimit::MinusInfinity),
        &grid,
    )
    .unwrap();
    let numeric =
        propagate_exact(&rho0, &build_coefficients(&ks, DEFAULT_U_FLOOR).unwrap()).unwrap();
    let d = max_abs_difference(&closed.sigma_z(), &numeric.sigma_z());
    assert!(d <= 1e-4, "{d:e}");
}
