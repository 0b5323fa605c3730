//! Invariant suite behind the `validate` subcommand.

use std::fmt;

use serde::Serialize;
use tlsme_core::exact::DEFAULT_U_FLOOR;
use tlsme_core::kernel::{closed_form_u, solve_kernel, solve_u};
use tlsme_core::observables::max_abs_difference;
use tlsme_core::oracle::{discretize, propagate_full, DiscretizedBath, LEAK_WARNING};
use tlsme_core::perturbative::{
    propagate_markovian, propagate_tcl_expanded, propagate_tcl_timelocal,
};
use tlsme_core::{
    build_coefficients, propagate_exact, DensityMatrix, KernelMode, SpectralDensity, TimeGrid,
};

use crate::presets;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    InsufficientResolution,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::InsufficientResolution => "insufficient resolution",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub value: f64,
    pub bound: f64,
    pub detail: String,
}

impl Check {
    fn compare(name: &'static str, value: f64, bound: f64, detail: String) -> Self {
        Check {
            name,
            status: if value <= bound {
                Status::Pass
            } else {
                Status::Fail
            },
            value,
            bound,
            detail,
        }
    }

    fn error(name: &'static str, e: impl fmt::Display) -> Self {
        Check {
            name,
            status: Status::Fail,
            value: f64::NAN,
            bound: f64::NAN,
            detail: format!("solver error: {e}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    /// Grid used by the convergence and Markovian-reduction checks on t ∈ [0, 10].
    pub n_steps: usize,
    /// Debug hook: negate γ(t) before propagating the exact equation.
    pub flip_gamma_sign: bool,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            n_steps: 10_000,
            flip_gamma_sign: false,
        }
    }
}

/// Largest h·λ at which the convergence check is meaningful.
pub const MAX_STEP_WIDTH: f64 = 0.1;

fn lorentzian(lambda: f64, delta: f64) -> SpectralDensity {
    SpectralDensity::Lorentzian {
        gamma: 1.0,
        width: lambda,
        detuning: delta,
    }
}

pub fn kernel_convergence(n_steps: usize) -> Check {
    const NAME: &str = "kernel_convergence";
    let (detuning, _, delta) = presets::FIG2[0];
    let lambda = presets::FIG2_LAMBDA;
    let t_end = 10.0;
    let h = t_end / n_steps.max(1) as f64;
    if n_steps < 4 || h * lambda > MAX_STEP_WIDTH {
        return Check {
            name: NAME,
            status: Status::InsufficientResolution,
            value: h * lambda,
            bound: MAX_STEP_WIDTH,
            detail: format!(
                "insufficient resolution: h·λ = {:.3} with {n_steps} steps",
                h * lambda
            ),
        };
    }
    let spec = lorentzian(lambda, delta);
    let error_at = |n: usize| -> tlsme_core::Result<f64> {
        let grid = TimeGrid::new(0.0, t_end, n)?;
        let u = solve_u(&spec, detuning, &KernelMode::closed_form(), &grid)?;
        Ok(u.values
            .iter()
            .enumerate()
            .map(|(k, v)| (v - closed_form_u(1.0, lambda, detuning, delta, grid.time(k))).norm())
            .fold(0.0, f64::max))
    };
    let coarse = n_steps / 2;
    let (fine_err, coarse_err) = match (error_at(2 * coarse), error_at(coarse)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return Check::error(NAME, e),
    };
    let order = (coarse_err / fine_err).log2();
    let mut check = Check::compare(
        NAME,
        fine_err,
        1e-6,
        format!(
            "L∞ error {fine_err:.3e} at {} steps, observed order {order:.3}",
            2 * coarse
        ),
    );
    if !(1.8..=2.2).contains(&order) {
        check.status = Status::Fail;
    }
    check
}

pub fn markovian_reduction(n_steps: usize, flip_gamma_sign: bool) -> Check {
    const NAME: &str = "markovian_reduction";
    let (gamma, detuning, drive) = (1.0, 0.3, 1.0);
    let spec = SpectralDensity::FlatMemoryless { gamma };
    let run = || -> tlsme_core::Result<(f64, f64)> {
        let grid = TimeGrid::new(0.0, 10.0, n_steps.max(1))?;
        let ks = solve_kernel(&spec, detuning, drive, &KernelMode::closed_form(), &grid)?;
        let mut ct = build_coefficients(&ks, DEFAULT_U_FLOOR)?;
        if flip_gamma_sign {
            ct.gamma.iter_mut().for_each(|g| *g = -*g);
        }
        let coeff_dev = (0..grid.len())
            .map(|k| {
                (ct.s[k] - detuning)
                    .abs()
                    .max((ct.gamma[k] - 0.5 * gamma).abs())
                    .max((ct.r[k] - drive).norm())
            })
            .fold(0.0, f64::max);
        let rho0 = DensityMatrix::excited();
        let exact = propagate_exact(&rho0, &ct)?;
        let lindblad = propagate_markovian(&rho0, detuning, drive, gamma, &grid)?;
        let trace_dev = exact
            .rho
            .iter()
            .zip(&lindblad.rho)
            .map(|(a, b)| (a.0 - b.0).max_abs())
            .fold(0.0, f64::max);
        Ok((trace_dev, coeff_dev))
    };
    match run() {
        Ok((trace_dev, coeff_dev)) => {
            let mut check = Check::compare(
                NAME,
                trace_dev,
                1e-8,
                format!("state deviation {trace_dev:.3e}, coefficient deviation {coeff_dev:.3e}"),
            );
            if !(coeff_dev <= 1e-10) {
                check.status = Status::Fail;
            }
            check
        }
        Err(e) => Check::error(NAME, e),
    }
}

pub fn tcl_dual_form() -> Check {
    const NAME: &str = "tcl_dual_form";
    let figures = [
        (presets::FIG2_LAMBDA, &presets::FIG2[..], 10.0),
        (presets::FIG3_LAMBDA, &presets::FIG3[..], 10.0),
        (
            presets::FIG5_LAMBDA,
            &presets::FIG5[..],
            presets::FIG5_T_END,
        ),
        (presets::FIG7_LAMBDA, &presets::FIG7[..], 10.0),
        (presets::FIG8_LAMBDA, &presets::FIG8[..], 10.0),
    ];
    let run = || -> tlsme_core::Result<(f64, usize)> {
        let mut worst = 0.0f64;
        let mut count = 0;
        let rho0 = DensityMatrix::excited();
        let mode = KernelMode::closed_form();
        for (lambda, panels, t_end) in figures {
            let grid = TimeGrid::new(0.0, t_end, 10_000)?;
            for &(detuning, drive, delta) in panels {
                let spec = lorentzian(lambda, delta);
                let a = propagate_tcl_timelocal(&rho0, detuning, drive, &spec, &mode, &grid)?;
                let b = propagate_tcl_expanded(&rho0, detuning, drive, &spec, &mode, &grid, false)?;
                let d = a
                    .rho
                    .iter()
                    .zip(&b.rho)
                    .map(|(x, y)| (x.0 - y.0).max_abs())
                    .fold(0.0, f64::max);
                worst = worst.max(d);
                count += 1;
            }
        }
        Ok((worst, count))
    };
    match run() {
        Ok((worst, count)) => Check::compare(
            NAME,
            worst,
            1e-6,
            format!("largest state deviation {worst:.3e} over {count} scenarios"),
        ),
        Err(e) => Check::error(NAME, e),
    }
}

pub fn undriven_oracle() -> Check {
    const NAME: &str = "undriven_oracle";
    let (detuning, delta, lambda) = (0.3, 0.01, 1.0);
    let spec = lorentzian(lambda, delta);
    let run = || -> tlsme_core::Result<(f64, f64)> {
        let peak = spec.peak(detuning);
        let bath = discretize(
            &spec,
            detuning,
            (peak - 100.0 * lambda, peak + 100.0 * lambda),
            400,
        )?;
        let grid = TimeGrid::new(0.0, 5.0, 500)?;
        let oracle = propagate_full(&DensityMatrix::excited(), &bath, detuning, 0.0, 1, &grid)?;
        let u = solve_u(&spec, detuning, &KernelMode::closed_form(), &grid)?;
        let dev = oracle
            .trace
            .rho
            .iter()
            .zip(&u.values)
            .map(|(rho, u)| (rho.rho_ee() - u.norm_sqr()).abs())
            .fold(0.0, f64::max);
        Ok((dev, bath.coverage))
    };
    match run() {
        Ok((dev, coverage)) => Check::compare(
            NAME,
            dev,
            1e-3,
            format!("max |ρ_ee − |u|²| = {dev:.3e}, 400 modes, coverage {coverage:.4}"),
        ),
        Err(e) => Check::error(NAME, e),
    }
}

/// Band half-width, mode count and truncation of the driven oracle comparison.
pub const DRIVEN_BAND: f64 = 20.0;
pub const DRIVEN_MODES: usize = 40;
pub const DRIVEN_N_MAX: usize = 2;

/// Driven comparison at the Fig. 2(a) parameters: σz agreement and truncation leak.
pub fn driven_oracle() -> Vec<Check> {
    let (detuning, drive, delta) = presets::FIG2[0];
    let spec = lorentzian(presets::FIG2_LAMBDA, delta);
    let run = || -> tlsme_core::Result<(f64, f64, f64, f64)> {
        let grid = TimeGrid::new(0.0, 5.0, 5000)?;
        let peak = spec.peak(detuning);
        let bath = DiscretizedBath::uniform(
            &spec,
            detuning,
            (peak - DRIVEN_BAND, peak + DRIVEN_BAND),
            DRIVEN_MODES,
        )?;
        let rho0 = DensityMatrix::excited();
        let oracle = propagate_full(&rho0, &bath, detuning, drive, DRIVEN_N_MAX, &grid)?;
        let ks = solve_kernel(&spec, detuning, drive, &KernelMode::closed_form(), &grid)?;
        let exact = propagate_exact(&rho0, &build_coefficients(&ks, DEFAULT_U_FLOOR)?)?;
        let dev = max_abs_difference(&exact.sigma_z(), &oracle.trace.sigma_z());
        let d = oracle.diagnostics;
        Ok((
            dev,
            d.top_shell_population,
            d.leak_amplitude_bound,
            bath.coverage,
        ))
    };
    match run() {
        Ok((dev, top, bound, coverage)) => vec![
            Check::compare(
                "driven_oracle",
                dev,
                5e-2,
                format!(
                    "max |Δσz| = {dev:.3e}, {DRIVEN_MODES} modes on peak ± {DRIVEN_BAND}, coverage {coverage:.3}"
                ),
            ),
            Check {
                status: if top < LEAK_WARNING { Status::Pass } else { Status::Fail },
                ..Check::compare(
                    "driven_oracle_leak",
                    top,
                    LEAK_WARNING,
                    format!("top-shell population {top:.3e}, Duhamel leak bound {bound:.3e}"),
                )
            },
        ],
        Err(e) => vec![Check::error("driven_oracle", e)],
    }
}

pub fn run_all(opts: &ValidateOptions) -> Vec<Check> {
    let mut checks = vec![
        kernel_convergence(opts.n_steps),
        markovian_reduction(opts.n_steps, opts.flip_gamma_sign),
        tcl_dual_form(),
        undriven_oracle(),
    ];
    checks.extend(driven_oracle());
    checks
}

/// Tab-separated table with a header row.
pub fn render_table(checks: &[Check]) -> String {
    let mut out = String::from("check\tstatus\tvalue\tbound\tdetail\n");
    for c in checks {
        out.push_str(&format!(
            "{}\t{}\t{:.6e}\t{:.1e}\t{}\n",
            c.name, c.status, c.value, c.bound, c.detail
        ));
    }
    out
}
