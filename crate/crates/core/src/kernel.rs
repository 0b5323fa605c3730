//! Volterra integro-differential equations for the amplitudes u(t), u₁(τ) and h(t).
//!
//! u̇ + iΔu + ∫₀ᵗ f(t−s)u(s)ds = 0 with u(0) = 1, and h = −iΩ∫₀ᵗ u.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::spectral::{KernelMode, KernelMoments, KernelTable, SpectralDensity};

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Uniform time grid t_k = t0 + k·h, k = 0..=n_steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t_end: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t0.is_finite() && t_end.is_finite() && t_end > t0) {
            return Err(Error::config(
                "t_end",
                format!("need t_end > t0, got [{t0}, {t_end}]"),
            ));
        }
        if n_steps < 2 {
            return Err(Error::config(
                "n_steps",
                format!("need at least 2 steps, got {n_steps}"),
            ));
        }
        Ok(TimeGrid { t0, t_end, n_steps })
    }

    /// Grid on [0, t_end] with the given step (rounded to a whole number of steps).
    pub fn with_step(t_end: f64, step: f64) -> Result<Self> {
        TimeGrid::new(0.0, t_end, (t_end / step).round() as usize)
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t0) / self.n_steps as f64
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_end
        } else {
            self.t0 + k as f64 * self.step()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.time(k))
    }
}

/// Gridded solution of the kernel equations.
#[derive(Debug, Clone)]
pub struct KernelSolution {
    pub grid: TimeGrid,
    pub u: Vec<C64>,
    pub u_dot: Vec<C64>,
    pub h: Vec<C64>,
    pub h_dot: Vec<C64>,
    pub detuning: f64,
    pub drive: f64,
    pub spec: SpectralDensity,
    pub mode: KernelMode,
    pub warnings: Vec<String>,
}

/// u(t) and u̇(t) on a grid.
#[derive(Debug, Clone)]
pub struct Amplitude {
    pub grid: TimeGrid,
    pub values: Vec<C64>,
    pub derivative: Vec<C64>,
    pub detuning: f64,
    pub warnings: Vec<String>,
}

/// ∫₀^{t_n} g(t_n − s)y(s)ds for piecewise-linear y, from the interval moments of g.
pub fn product_memory(moments: &KernelMoments, y: &[C64], n: usize) -> C64 {
    let mut acc = ZERO;
    for j in 0..n {
        acc += moments.near[j] * y[n - j] + moments.far[j] * y[n - j - 1];
    }
    acc
}

/// Product trapezoidal solve of v(t) = S(t) − ∫₀ᵗ G(t−s)v(s)ds with G(τ) = ∫₀^τ g,
/// the integrated form of v̇ = Ṡ − ∫g(t−s)v(s)ds. Returns v and the memory
/// integral ∫g(t_n−s)v(s)ds at every node.
fn volterra_march(
    moments: &KernelMoments,
    step: f64,
    source: impl Fn(usize) -> C64,
) -> (Vec<C64>, Vec<C64>) {
    let n_nodes = moments.len() + 1;
    // Interval moments of G, using G(jh) = Σ_{i<j} ∫g over interval i.
    let mut g_near = Vec::with_capacity(n_nodes - 1);
    let mut g_far = Vec::with_capacity(n_nodes - 1);
    let mut big_g = ZERO;
    for j in 0..n_nodes - 1 {
        g_near.push((big_g * 0.5 + moments.tail[j]) * step);
        g_far.push((big_g * 0.5 + moments.near[j] - moments.tail[j]) * step);
        big_g += moments.near[j] + moments.far[j];
    }
    // Combined weight of v_{n−i} from the two intervals adjacent to lag i.
    let combined: Vec<C64> = (0..n_nodes - 1)
        .map(|i| {
            if i == 0 {
                ZERO
            } else {
                g_near[i] + g_far[i - 1]
            }
        })
        .collect();
    let combined_f: Vec<C64> = (0..n_nodes - 1)
        .map(|i| {
            if i == 0 {
                ZERO
            } else {
                moments.near[i] + moments.far[i - 1]
            }
        })
        .collect();
    let mut v = Vec::with_capacity(n_nodes);
    let mut memory = Vec::with_capacity(n_nodes);
    v.push(source(0));
    memory.push(ZERO);
    let diag = C64::new(1.0, 0.0) + g_near[0];
    for n in 1..n_nodes {
        let mut hist = g_far[n - 1] * v[0];
        let mut mem = moments.far[n - 1] * v[0];
        for i in 1..n {
            hist += combined[i] * v[n - i];
            mem += combined_f[i] * v[n - i];
        }
        let vn = (source(n) - hist) / diag;
        v.push(vn);
        memory.push(mem + moments.near[0] * vn);
    }
    (v, memory)
}

fn check_table(kernel: &KernelTable, grid: &TimeGrid) -> Result<()> {
    match kernel {
        KernelTable::Sampled {
            values, moments, ..
        } if values.len() != grid.len() || moments.len() != grid.n_steps => Err(Error::config(
            "grid",
            format!("kernel has {} nodes, grid has {}", values.len(), grid.len()),
        )),
        _ => Ok(()),
    }
}

/// Solves the first kernel equation on a pre-tabulated kernel.
///
/// Product trapezoidal integration: u is taken piecewise linear and integrated
/// exactly against the kernel, in the frame rotating at Δ.
pub fn solve_u_tabulated(
    kernel: &KernelTable,
    detuning: f64,
    grid: &TimeGrid,
) -> Result<Amplitude> {
    check_table(kernel, grid)?;
    let times: Vec<f64> = grid.times().map(|t| t - grid.t0).collect();
    let (values, derivative, warnings) = match kernel {
        KernelTable::Flat { gamma } => {
            let a = C64::new(0.5 * gamma, detuning);
            let u: Vec<C64> = times.iter().map(|&t| (-a * t).exp()).collect();
            let du = u.iter().map(|&x| -a * x).collect();
            (u, du, Vec::new())
        }
        KernelTable::Sampled {
            values: f, moments, ..
        } => {
            let step = grid.step();
            let (v, memory) = volterra_march(moments, step, |_| C64::new(1.0, 0.0));
            let mut u = Vec::with_capacity(v.len());
            let mut du = Vec::with_capacity(v.len());
            for (k, (&vk, &mk)) in v.iter().zip(&memory).enumerate() {
                let phase = C64::from_polar(1.0, -detuning * times[k]);
                u.push(phase * vk);
                du.push(phase * (-mk) - I * detuning * phase * vk);
            }
            let mut warnings = Vec::new();
            let stiffness = f[0].norm() * step * step;
            if stiffness > 1e-3 {
                warnings.push(format!(
                    "grid may be too coarse for the kernel: f(0)·h² = {stiffness:.2e}"
                ));
            }
            (u, du, warnings)
        }
    };
    Ok(Amplitude {
        grid: *grid,
        values,
        derivative,
        detuning,
        warnings,
    })
}

/// Solves u̇ + iΔu + ∫₀ᵗ f(t−s)u(s)ds = 0, u(0) = 1.
pub fn solve_u(
    spec: &SpectralDensity,
    detuning: f64,
    mode: &KernelMode,
    grid: &TimeGrid,
) -> Result<Amplitude> {
    let kernel = KernelTable::build(spec, detuning, mode, grid)?;
    solve_u_tabulated(&kernel, detuning, grid)
}

/// h(t) = −iΩ∫₀ᵗ u by end-corrected trapezoid, with ḣ from the third kernel equation.
pub fn solve_h(u: &Amplitude, kernel: &KernelTable, drive: f64) -> Result<(Vec<C64>, Vec<C64>)> {
    check_table(kernel, &u.grid)?;
    let n_nodes = u.values.len();
    if drive == 0.0 {
        return Ok((alloc::vec![ZERO; n_nodes], alloc::vec![ZERO; n_nodes]));
    }
    let step = u.grid.step();
    let mut h = Vec::with_capacity(n_nodes);
    let mut integral = ZERO;
    h.push(ZERO);
    for n in 1..n_nodes {
        let (a, b) = (n - 1, n);
        integral += (u.values[a] + u.values[b]) * (0.5 * step)
            + (u.derivative[a] - u.derivative[b]) * (step * step / 12.0);
        h.push(-I * drive * integral);
    }
    let h_dot = match kernel {
        KernelTable::Flat { gamma } => {
            let a = C64::new(0.5 * gamma, u.detuning);
            h.iter().map(|&x| -I * drive - a * x).collect()
        }
        KernelTable::Sampled { moments, .. } => {
            let rotated: Vec<C64> = h
                .iter()
                .enumerate()
                .map(|(k, &x)| x * C64::from_polar(1.0, u.detuning * k as f64 * step))
                .collect();
            (0..n_nodes)
                .map(|n| {
                    let memory = product_memory(moments, &rotated, n)
                        * C64::from_polar(1.0, -u.detuning * n as f64 * step);
                    -I * drive - I * u.detuning * h[n] - memory
                })
                .collect()
        }
    };
    Ok((h, h_dot))
}

/// Direct trapezoidal solve of ḣ = −iΩ − iΔh − ∫f·h, h(0) = 0 (consistency check for [`solve_h`]).
pub fn solve_h_direct(
    kernel: &KernelTable,
    detuning: f64,
    drive: f64,
    grid: &TimeGrid,
) -> Result<Vec<C64>> {
    check_table(kernel, grid)?;
    let times: Vec<f64> = grid.times().map(|t| t - grid.t0).collect();
    match kernel {
        KernelTable::Flat { gamma } => {
            let a = C64::new(0.5 * gamma, detuning);
            Ok(times
                .iter()
                .map(|&t| -I * drive * (1.0 - (-a * t).exp()) / a)
                .collect())
        }
        KernelTable::Sampled { moments, .. } => {
            // Exact integral of the rotated source −iΩe^{iΔt}.
            let source = |n: usize| {
                let t = times[n];
                if detuning == 0.0 {
                    -I * drive * t
                } else {
                    -(C64::from_polar(1.0, detuning * t) - 1.0) * (drive / detuning)
                }
            };
            let (w, _) = volterra_march(moments, grid.step(), source);
            Ok(w.iter()
                .zip(&times)
                .map(|(&wk, &t)| wk * C64::from_polar(1.0, -detuning * t))
                .collect())
        }
    }
}

/// Backward equation u̇₁(τ) + iΔu₁(τ) − ∫_τ^t f(τ−τ′)u₁(τ′)dτ′ = 0 with u₁(t) = 1,
/// marched from τ = t down to τ = 0 on the grid, using f(−s) = f(s)*.
pub fn solve_u1(
    spec: &SpectralDensity,
    detuning: f64,
    mode: &KernelMode,
    grid: &TimeGrid,
) -> Result<Vec<C64>> {
    let kernel = KernelTable::build(spec, detuning, mode, grid)?;
    solve_u1_tabulated(&kernel, detuning, grid)
}

pub fn solve_u1_tabulated(
    kernel: &KernelTable,
    detuning: f64,
    grid: &TimeGrid,
) -> Result<Vec<C64>> {
    check_table(kernel, grid)?;
    let last = grid.n_steps;
    let times: Vec<f64> = grid.times().collect();
    let t_final = times[last];
    match kernel {
        KernelTable::Flat { gamma } => {
            let a = C64::new(0.5 * gamma, -detuning);
            Ok(times
                .iter()
                .map(|&tau| (-a * (t_final - tau)).exp())
                .collect())
        }
        KernelTable::Sampled { moments, .. } => {
            // In reversed time σ = t − τ the equation reads
            // dy/dσ = iΔy − ∫₀^σ f*(σ−σ′) y(σ′)dσ′ with y(0) = 1, whose kernel in the
            // frame rotating at −Δ is the conjugate of the forward rotated kernel.
            let (y, _) = volterra_march(&moments.conj(), grid.step(), |_| C64::new(1.0, 0.0));
            let mut u1 = alloc::vec![ZERO; grid.len()];
            for (k, yk) in y.into_iter().enumerate() {
                let sigma = times[k] - times[0];
                u1[last - k] = yk * C64::from_polar(1.0, detuning * sigma);
            }
            Ok(u1)
        }
    }
}

/// Closed-form Lorentzian amplitude
/// u(t) = k(t)[cosh(dt/2) + ((λ−iδ)/d)sinh(dt/2)], k = e^{−(λ+2iΔ−iδ)t/2}, d = √((λ−iδ)² − 2Γλ).
pub fn closed_form_u(gamma: f64, width: f64, detuning: f64, delta: f64, t: f64) -> C64 {
    let lam = C64::new(width, -delta);
    let d = (lam * lam - 2.0 * gamma * width).sqrt();
    let k = (-C64::new(width, 2.0 * detuning - delta) * (0.5 * t)).exp();
    let x = d * (0.5 * t);
    let sinh_over_d = if d.norm() < 1e-8 {
        // sinh(dt/2)/d → t/2 (1 + (dt/2)²/6).
        (1.0 + x * x / 6.0) * (0.5 * t)
    } else {
        x.sinh() / d
    };
    k * (x.cosh() + lam * sinh_over_d)
}

/// Solves for u, u̇, h and ḣ.
pub fn solve_kernel(
    spec: &SpectralDensity,
    detuning: f64,
    drive: f64,
    mode: &KernelMode,
    grid: &TimeGrid,
) -> Result<KernelSolution> {
    let kernel = KernelTable::build(spec, detuning, mode, grid)?;
    solve_kernel_tabulated(spec, &kernel, detuning, drive, mode, grid)
}

pub fn solve_kernel_tabulated(
    spec: &SpectralDensity,
    kernel: &KernelTable,
    detuning: f64,
    drive: f64,
    mode: &KernelMode,
    grid: &TimeGrid,
) -> Result<KernelSolution> {
    if !drive.is_finite() {
        return Err(Error::config("drive", "must be finite"));
    }
    if !detuning.is_finite() {
        return Err(Error::config("detuning", "must be finite"));
    }
    let amplitude = solve_u_tabulated(kernel, detuning, grid)?;
    let (h, h_dot) = solve_h(&amplitude, kernel, drive)?;
    let mut warnings = amplitude.warnings;
    if let KernelTable::Sampled {
        truncated_mass,
        quadrature_error,
        ..
    } = kernel
    {
        if *truncated_mass > 1e-3 {
            warnings.push(format!(
                "kernel quadrature window omits spectral mass {truncated_mass:.3e}"
            ));
        }
        if *quadrature_error > 1e-6 {
            warnings.push(format!(
                "kernel quadrature error estimate {quadrature_error:.3e}"
            ));
        }
    }
    Ok(KernelSolution {
        grid: *grid,
        u: amplitude.values,
        u_dot: amplitude.derivative,
        h,
        h_dot,
        detuning,
        drive,
        spec: *spec,
        mode: *mode,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::KernelMode;

    #[test]
    fn closed_form_starts_at_one() {
        for (g, l, d, dl) in [
            (1.0, 25.0, 0.3, 0.01),
            (1.0, 0.05, 10.0, 0.08),
            (1.0, 0.5, 0.0, 0.0),
        ] {
            assert_eq!(closed_form_u(g, l, d, dl, 0.0), C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn closed_form_degenerate_d_limit() {
        // (λ − iδ)² = 2Γλ at λ = 2Γ, δ = 0.
        let t = 1.7;
        let u = closed_form_u(1.0, 2.0, 0.0, 0.0, t);
        assert!((u - C64::new((-t).exp() * (1.0 + t), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 10).is_err());
        let g = TimeGrid::new(0.0, 2.0, 4).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.time(4), 2.0);
        assert_eq!(g.step(), 0.5);
    }

    #[test]
    fn flat_branch_is_analytic() {
        let grid = TimeGrid::new(0.0, 5.0, 50).unwrap();
        let spec = SpectralDensity::FlatMemoryless { gamma: 1.0 };
        let ks = solve_kernel(&spec, 0.3, 0.02, &KernelMode::closed_form(), &grid).unwrap();
        for (k, t) in grid.times().enumerate() {
            let a = C64::new(0.5, 0.3);
            assert!((ks.u[k] - (-a * t).exp()).norm() < 1e-15);
            let h = -I * 0.02 * (1.0 - (-a * t).exp()) / a;
            assert!((ks.h[k] - h).norm() < 1e-6);
        }
    }

    #[test]
    fn boundary_conditions_and_zero_drive() {
        let grid = TimeGrid::new(0.0, 2.0, 200).unwrap();
        let spec = SpectralDensity::Lorentzian {
            gamma: 1.0,
            width: 1.0,
            detuning: 0.01,
        };
        let ks = solve_kernel(&spec, 0.3, 0.0, &KernelMode::closed_form(), &grid).unwrap();
        assert_eq!(ks.u[0], C64::new(1.0, 0.0));
        assert!(ks.h.iter().chain(&ks.h_dot).all(|z| *z == ZERO));
        let ks = solve_kernel(&spec, 0.3, 0.5, &KernelMode::closed_form(), &grid).unwrap();
        assert_eq!(ks.h[0], ZERO);
        assert!((ks.h_dot[0] - C64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn mismatched_grid_is_a_config_error() {
        let grid = TimeGrid::new(0.0, 2.0, 200).unwrap();
        let other = TimeGrid::new(0.0, 2.0, 100).unwrap();
        let spec = SpectralDensity::Lorentzian {
            gamma: 1.0,
            width: 1.0,
            detuning: 0.01,
        };
        let table = KernelTable::build(&spec, 0.3, &KernelMode::closed_form(), &grid).unwrap();
        assert!(matches!(
            solve_u_tabulated(&table, 0.3, &other),
            Err(Error::Config { .. })
        ));
    }
}
