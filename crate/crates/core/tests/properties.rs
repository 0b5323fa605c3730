use proptest::prelude::*;
use tlsme_core::exact::DEFAULT_U_FLOOR;
use tlsme_core::kernel::{solve_kernel, solve_kernel_tabulated};
use tlsme_core::observables::{classify_regime, fidelity, physicality_scan, RegimeThresholds};
use tlsme_core::perturbative::{
    dressed_basis, propagate_markovian, propagate_nz, propagate_nz_tabulated,
    propagate_tcl_timelocal,
};
use tlsme_core::spectral::KernelTable;
use tlsme_core::*;

fn state() -> impl Strategy<Value = DensityMatrix> {
    (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(ee, frac, phase)| {
        let radius = frac * (ee * (1.0 - ee)).sqrt();
        DensityMatrix::from_entries(ee, C64::from_polar(radius, phase)).unwrap()
    })
}

fn max_state_diff(a: &EvolutionTrace, b: &EvolutionTrace) -> f64 {
    a.rho
        .iter()
        .zip(&b.rho)
        .map(|(x, y)| (x.0 - y.0).max_abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fidelity_is_symmetric_and_bounded(a in state(), b in state()) {
        let ab = fidelity(&a, &b).unwrap();
        let ba = fidelity(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-7);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn regime_label_is_scale_covariant(
        detuning in -20.0f64..20.0,
        drive in 0.01f64..5.0,
        width in 0.01f64..50.0,
        delta in -60.0f64..60.0,
        scale in 0.01f64..100.0,
    ) {
        let t = RegimeThresholds::default();
        let a = classify_regime(detuning, drive, 1.0, width, delta, t).unwrap();
        let b = classify_regime(
            scale * detuning, scale * drive, scale, scale * width, scale * delta, t,
        ).unwrap();
        prop_assert_eq!(a.region, b.region);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn flat_spectrum_makes_all_methods_agree(
        detuning in -2.0f64..2.0,
        drive in 0.05f64..2.0,
        rho0 in state(),
    ) {
        let grid = TimeGrid::new(0.0, 5.0, 1000).unwrap();
        let spec = SpectralDensity::FlatMemoryless { gamma: 1.0 };
        let mode = KernelMode::closed_form();
        let ks = solve_kernel(&spec, detuning, drive, &mode, &grid).unwrap();
        let exact = propagate_exact(&rho0, &build_coefficients(&ks, DEFAULT_U_FLOOR).unwrap()).unwrap();
        let lindblad = propagate_markovian(&rho0, detuning, drive, 1.0, &grid).unwrap();
        let tcl = propagate_tcl_timelocal(&rho0, detuning, drive, &spec, &mode, &grid).unwrap();
        let nz = propagate_nz(&rho0, detuning, drive, &spec, &mode, &grid).unwrap();
        for other in [&exact, &tcl, &nz] {
            prop_assert!(max_state_diff(other, &lindblad) < 1e-8);
        }
    }

    #[test]
    fn coupling_off_gives_unitary_evolution(
        detuning in -2.0f64..2.0,
        drive in 0.05f64..2.0,
        rho0 in state(),
    ) {
        let grid = TimeGrid::new(0.0, 5.0, 1000).unwrap();
        let zero = KernelTable::from_samples(vec![C64::new(0.0, 0.0); grid.len()], detuning, &grid).unwrap();
        let spec = SpectralDensity::Lorentzian { gamma: 1.0, width: 1.0, detuning: 0.0 };
        let ks = solve_kernel_tabulated(&spec, &zero, detuning, drive, &KernelMode::closed_form(), &grid).unwrap();
        let exact = propagate_exact(&rho0, &build_coefficients(&ks, DEFAULT_U_FLOOR).unwrap()).unwrap();
        let nz = propagate_nz_tabulated(&rho0, detuning, drive, &zero, &grid).unwrap();
        let basis = dressed_basis(detuning, drive).unwrap();
        let analytic = |k: usize| {
            let u = basis.propagator(grid.time(k));
            u * rho0.0 * u.dagger()
        };
        let deviation = |trace: &EvolutionTrace| {
            (0..grid.len()).map(|k| (trace.rho[k].0 - analytic(k)).max_abs()).fold(0.0, f64::max)
        };
        prop_assert!(deviation(&exact) < 1e-7);
        prop_assert!(deviation(&nz) < 1e-12);
        let purity0 = (rho0.0 * rho0.0).trace().re;
        let last = nz.rho.last().unwrap().0;
        prop_assert!(((last * last).trace().re - purity0).abs() < 1e-12);
    }

    #[test]
    fn exact_lorentzian_dynamics_stay_physical(
        width in 0.5f64..30.0,
        detuning in -3.0f64..3.0,
        drive in 0.0f64..1.5,
        delta in -1.0f64..1.0,
        rho0 in state(),
    ) {
        let grid = TimeGrid::new(0.0, 5.0, 2000).unwrap();
        let spec = SpectralDensity::Lorentzian { gamma: 1.0, width, detuning: delta };
        let ks = solve_kernel(&spec, detuning, drive, &KernelMode::closed_form(), &grid).unwrap();
        let trace = propagate_exact(&rho0, &build_coefficients(&ks, DEFAULT_U_FLOOR).unwrap()).unwrap();
        prop_assume!(trace.halt.is_none());
        let scan = physicality_scan(&trace);
        prop_assert!(scan.max_trace_dev < 1e-9);
        prop_assert!(scan.min_eigenvalue > -1e-6, "{}", scan.min_eigenvalue);
    }
}
