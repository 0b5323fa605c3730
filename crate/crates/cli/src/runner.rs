//! Scenario execution, CSV emission and run summaries.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Serialize;
use tlsme_core::exact::DEFAULT_U_FLOOR;
use tlsme_core::kernel::solve_kernel_tabulated;
use tlsme_core::observables::{fidelity, physicality_scan, Markovianity, Secularity};
use tlsme_core::oracle::{discretize, propagate_full, DiscretizedBath, OracleDiagnostics};
use tlsme_core::perturbative::tcl::propagate_tcl_with;
use tlsme_core::perturbative::{
    dressed_basis, propagate_markovian, propagate_nz_tabulated, TclCoefficients, TclForm,
};
use tlsme_core::spectral::KernelTable;
use tlsme_core::{
    build_coefficients, propagate_exact, CoefficientTrack, EvolutionTrace, Method, Quadrature,
    SpectralDensity,
};

use crate::config::Scenario;
use crate::error::{CliError, Result};

pub const CSV_HEADER: [&str; 13] = [
    "t",
    "method",
    "sz",
    "rho_ee_re",
    "rho_eg_re",
    "rho_eg_im",
    "gamma",
    "s",
    "r_re",
    "r_im",
    "fidelity_vs_exact",
    "min_eig",
    "trace_dev",
];

/// Oracle bands without an explicit width span this many characteristic widths each side of the peak.
pub const ORACLE_WINDOW_WIDTHS: f64 = 100.0;

#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub trace: EvolutionTrace,
    pub coefficients: Option<CoefficientTrack>,
    pub oracle: Option<(OracleDiagnostics, f64)>,
    pub runtime: Duration,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub scenario: Scenario,
    pub runs: Vec<MethodRun>,
    pub kernel_runtime: Duration,
}

impl ScenarioRun {
    pub fn get(&self, method: Method) -> Option<&MethodRun> {
        self.runs.iter().find(|r| r.method == method)
    }

    pub fn sigma_z(&self, method: Method) -> Option<Vec<f64>> {
        self.get(method).map(|r| r.trace.sigma_z())
    }
}

fn tcl_uses_table(s: &Scenario) -> bool {
    !matches!(
        (s.spec, s.mode.quadrature),
        (SpectralDensity::Lorentzian { .. }, Quadrature::ClosedForm)
            | (SpectralDensity::FlatMemoryless { .. }, _)
    )
}

fn needs_table(s: &Scenario) -> bool {
    s.methods.iter().any(|m| match m {
        Method::Exact | Method::Nz => true,
        Method::Tcl | Method::TclSecular => tcl_uses_table(s),
        _ => false,
    })
}

pub fn run_scenario(s: &Scenario) -> Result<ScenarioRun> {
    let start = Instant::now();
    let table = if needs_table(s) {
        Some(
            KernelTable::build(&s.spec, s.detuning, &s.mode, &s.grid)
                .map_err(|e| CliError::solver("kernel", e))?,
        )
    } else {
        None
    };
    let kernel_runtime = start.elapsed();
    let mut tcl_coeffs: Option<TclCoefficients> = None;
    let mut runs = Vec::with_capacity(s.methods.len());
    for &method in &s.methods {
        let start = Instant::now();
        let label = method.label();
        let fail = |e| CliError::solver(label, e);
        let mut coefficients = None;
        let mut oracle = None;
        let mut warnings = Vec::new();
        let trace = match method {
            Method::Exact => {
                let table = table.as_ref().expect("table built for exact");
                let ks =
                    solve_kernel_tabulated(&s.spec, table, s.detuning, s.drive, &s.mode, &s.grid)
                        .map_err(fail)?;
                warnings.extend(ks.warnings.iter().cloned());
                let ct = build_coefficients(&ks, DEFAULT_U_FLOOR).map_err(fail)?;
                let trace = propagate_exact(&s.rho0, &ct).map_err(fail)?;
                coefficients = Some(ct);
                trace
            }
            Method::Nz => {
                let table = table.as_ref().expect("table built for nz");
                propagate_nz_tabulated(&s.rho0, s.detuning, s.drive, table, &s.grid)
                    .map_err(fail)?
            }
            Method::Tcl | Method::TclSecular => {
                if tcl_coeffs.is_none() {
                    let w0 = dressed_basis(s.detuning, s.drive).map_err(fail)?.w0;
                    tcl_coeffs = Some(
                        match &table {
                            Some(t) if tcl_uses_table(s) => {
                                TclCoefficients::from_table(t, w0, &s.grid)
                            }
                            _ => TclCoefficients::build(&s.spec, s.detuning, &s.mode, w0, &s.grid),
                        }
                        .map_err(fail)?,
                    );
                }
                let form = TclForm::Expanded {
                    secular: method == Method::TclSecular,
                };
                let mut trace = propagate_tcl_with(
                    &s.rho0,
                    s.detuning,
                    s.drive,
                    tcl_coeffs.as_ref().expect("coefficients built"),
                    form,
                )
                .map_err(fail)?;
                trace.method = method;
                trace
            }
            Method::Markovian => {
                propagate_markovian(&s.rho0, s.detuning, s.drive, s.gamma, &s.grid).map_err(fail)?
            }
            Method::Oracle => {
                let bath = oracle_bath(s).map_err(fail)?;
                let run =
                    propagate_full(&s.rho0, &bath, s.detuning, s.drive, s.oracle.n_max, &s.grid)
                        .map_err(fail)?;
                oracle = Some((run.diagnostics, bath.coverage));
                run.trace
            }
        };
        warnings.extend(trace.warnings.iter().cloned());
        runs.push(MethodRun {
            method,
            trace,
            coefficients,
            oracle,
            runtime: start.elapsed(),
            warnings,
        });
    }
    Ok(ScenarioRun {
        scenario: s.clone(),
        runs,
        kernel_runtime,
    })
}

fn oracle_bath(s: &Scenario) -> tlsme_core::Result<DiscretizedBath> {
    let peak = s.spec.peak(s.detuning);
    match s.oracle.band {
        Some(band) => DiscretizedBath::uniform(
            &s.spec,
            s.detuning,
            (peak - band, peak + band),
            s.oracle.modes,
        ),
        None => {
            let half = ORACLE_WINDOW_WIDTHS * s.spec.characteristic_width();
            discretize(
                &s.spec,
                s.detuning,
                (peak - half, peak + half),
                s.oracle.modes,
            )
        }
    }
}

fn num(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

/// Writes the fixed-schema CSV: one row per method per grid node reached.
pub fn write_csv<W: Write>(run: &ScenarioRun, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let exact = run.get(Method::Exact).map(|r| &r.trace);
    for r in &run.runs {
        for (k, rho) in r.trace.rho.iter().enumerate() {
            let flags = &r.trace.flags[k];
            let coeff = |f: &dyn Fn(&CoefficientTrack) -> f64| {
                r.coefficients
                    .as_ref()
                    .map(|c| num(f(c)))
                    .unwrap_or_default()
            };
            let fid = match exact {
                Some(ex) if r.method != Method::Exact && k < ex.rho.len() => {
                    fidelity(&ex.rho[k], rho).map(num).unwrap_or_default()
                }
                _ => String::new(),
            };
            w.write_record([
                num(r.trace.grid.time(k)),
                r.method.label().to_string(),
                num(rho.rho_ee() - rho.rho_gg()),
                num(rho.rho_ee()),
                num(rho.rho_eg().re),
                num(rho.rho_eg().im),
                coeff(&|c| c.gamma[k]),
                coeff(&|c| c.s[k]),
                coeff(&|c| c.r[k].re),
                coeff(&|c| c.r[k].im),
                fid,
                num(flags.min_eigenvalue),
                num(flags.trace_dev),
            ])?;
        }
    }
    w.flush().map_err(|e| CliError::io("csv", e))?;
    Ok(())
}

pub fn write_csv_file(run: &ScenarioRun, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_csv(run, std::io::BufWriter::new(file))
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeSummary {
    pub region: &'static str,
    pub markovian: bool,
    pub secular: bool,
    pub tau_r_over_tau_l: f64,
    pub tau_r_over_tau_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSummary {
    pub coverage: f64,
    pub top_shell_population: f64,
    pub leak_amplitude_bound: f64,
    pub norm_drift: f64,
    pub basis_size: usize,
    pub substeps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: &'static str,
    pub runtime_s: f64,
    pub physical: bool,
    pub first_violation_t: Option<f64>,
    pub min_eigenvalue: f64,
    pub max_abs_sz: f64,
    pub max_trace_dev: f64,
    pub halted_at: Option<f64>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub csv: Option<String>,
    pub regime: Option<RegimeSummary>,
    pub kernel_runtime_s: f64,
    pub methods: Vec<MethodSummary>,
}

pub fn summarize(run: &ScenarioRun, csv: Option<&Path>) -> ScenarioSummary {
    let regime = run.scenario.regime().map(|r| RegimeSummary {
        region: r.region.label(),
        markovian: r.markovianity == Markovianity::Markovian,
        secular: r.secularity == Secularity::SecularOk,
        tau_r_over_tau_l: r.tau_r_over_tau_l,
        tau_r_over_tau_s: r.tau_r_over_tau_s,
    });
    let methods = run
        .runs
        .iter()
        .map(|r| {
            let scan = physicality_scan(&r.trace);
            MethodSummary {
                method: r.method.label(),
                runtime_s: r.runtime.as_secs_f64(),
                physical: scan.is_clean(),
                first_violation_t: scan.first_violation.map(|(_, t)| t),
                min_eigenvalue: scan.min_eigenvalue,
                max_abs_sz: scan.max_abs_sz,
                max_trace_dev: scan.max_trace_dev,
                halted_at: r.trace.halt.as_ref().map(|h| h.time),
                warnings: r.warnings.clone(),
                oracle: r.oracle.map(|(d, coverage)| OracleSummary {
                    coverage,
                    top_shell_population: d.top_shell_population,
                    leak_amplitude_bound: d.leak_amplitude_bound,
                    norm_drift: d.norm_drift,
                    basis_size: d.basis_size,
                    substeps: d.substeps,
                }),
            }
        })
        .collect();
    ScenarioSummary {
        name: run.scenario.name.clone(),
        csv: csv.map(|p| p.display().to_string()),
        regime,
        kernel_runtime_s: run.kernel_runtime.as_secs_f64(),
        methods,
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

/// `out/fig2a.csv` → `out/fig2a_summary.json`.
pub fn summary_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    csv.with_file_name(format!("{stem}_summary.json"))
}
