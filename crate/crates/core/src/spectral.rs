//! Bath spectral densities and the two-time correlation kernel f(t).
//!
//! Frequencies passed to the kernel live in the frame rotating at the laser
//! frequency ωL, so that x = ω − ωL and Δ = ω0 − ωL.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::kernel::TimeGrid;
use crate::quadrature::{build_oscillatory_mesh, integrate_to_infinity, PanelMesh};

/// Bath model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralDensity {
    /// Lorentzian of height Γλ²/(2π) and half-width λ, centred at ωc = ω0 − δ.
    Lorentzian {
        gamma: f64,
        width: f64,
        detuning: f64,
    },
    /// Damped-oscillator density (1/M)·ωλ/((ω² − ω0²)² + ω²λ²) on ω ≥ 0.
    SpinBoson { mass: f64, width: f64, omega0: f64 },
    /// Memoryless bath, f(t) = Γδ(t).
    FlatMemoryless { gamma: f64 },
}

impl SpectralDensity {
    pub fn validate(&self) -> Result<()> {
        let positive = |field, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(
                    field,
                    format!("must be positive and finite, got {v}"),
                ))
            }
        };
        match *self {
            SpectralDensity::Lorentzian {
                gamma,
                width,
                detuning,
            } => {
                positive("gamma", gamma)?;
                positive("width", width)?;
                if !detuning.is_finite() {
                    return Err(Error::config("delta", "must be finite"));
                }
                Ok(())
            }
            SpectralDensity::SpinBoson {
                mass,
                width,
                omega0,
            } => {
                positive("mass", mass)?;
                positive("width", width)?;
                positive("omega0", omega0)
            }
            SpectralDensity::FlatMemoryless { gamma } => positive("gamma", gamma),
        }
    }

    /// J(ω). For the Lorentzian, ω is measured from the atomic transition ω0;
    /// for the spin-boson density it is the absolute frequency.
    pub fn density_at(&self, omega: f64) -> Result<f64> {
        match *self {
            SpectralDensity::Lorentzian {
                gamma,
                width,
                detuning,
            } => {
                let x = omega + detuning;
                Ok(gamma / (2.0 * PI) * width * width / (x * x + width * width))
            }
            SpectralDensity::SpinBoson {
                mass,
                width,
                omega0,
            } => {
                if omega < 0.0 {
                    return Err(Error::Domain(format!(
                        "spin-boson density needs ω ≥ 0, got {omega}"
                    )));
                }
                let d = omega * omega - omega0 * omega0;
                Ok(omega * width / (mass * (d * d + omega * omega * width * width)))
            }
            SpectralDensity::FlatMemoryless { gamma } => Ok(gamma / (2.0 * PI)),
        }
    }

    /// Density at rotating-frame frequency x, given the atom-laser detuning Δ.
    /// The spin-boson density vanishes below zero absolute frequency.
    pub fn rotating_density(&self, x: f64, detuning: f64) -> f64 {
        match *self {
            SpectralDensity::Lorentzian { .. } | SpectralDensity::FlatMemoryless { .. } => {
                self.density_at(x - detuning).unwrap_or(0.0)
            }
            SpectralDensity::SpinBoson { omega0, .. } => {
                self.density_at(x + omega0 - detuning).unwrap_or(0.0)
            }
        }
    }

    /// Rotating-frame position of the spectral peak.
    pub fn peak(&self, detuning: f64) -> f64 {
        match *self {
            SpectralDensity::Lorentzian {
                detuning: delta, ..
            } => detuning - delta,
            SpectralDensity::SpinBoson { .. } | SpectralDensity::FlatMemoryless { .. } => detuning,
        }
    }

    /// Frequency scale used to size quadrature windows: λ for the Lorentzian,
    /// max(λ, ω0) for the spin-boson density whose tail decays only as ω⁻³.
    pub fn characteristic_width(&self) -> f64 {
        match *self {
            SpectralDensity::Lorentzian { width, .. } => width,
            SpectralDensity::SpinBoson { width, omega0, .. } => width.max(omega0),
            SpectralDensity::FlatMemoryless { gamma } => gamma,
        }
    }

    /// Mass of J in the rotating frame between `lo` and +∞.
    pub fn mass_above(&self, lo: f64, detuning: f64) -> Result<f64> {
        match *self {
            SpectralDensity::Lorentzian { gamma, width, .. } => {
                let z = (lo - self.peak(detuning)) / width;
                Ok(gamma * width / (2.0 * PI) * (FRAC_PI_2 - z.atan()))
            }
            SpectralDensity::SpinBoson { omega0, .. } => {
                let lab_lo = (lo + omega0 - detuning).max(0.0);
                integrate_to_infinity(
                    |w| self.density_at(w).unwrap_or(0.0),
                    lab_lo,
                    1e-13,
                    200_000,
                )
                .map(|(v, _)| v)
            }
            SpectralDensity::FlatMemoryless { .. } => {
                Err(Error::config("model", "flat spectrum has infinite mass"))
            }
        }
    }

    /// Mass of J in the rotating frame below `hi`.
    pub fn mass_below(&self, hi: f64, detuning: f64) -> Result<f64> {
        Ok(self.total_mass(detuning)? - self.mass_above(hi, detuning)?)
    }

    /// ∫J over its whole support, equal to f(0) for the full kernel.
    pub fn total_mass(&self, detuning: f64) -> Result<f64> {
        match *self {
            SpectralDensity::Lorentzian { gamma, width, .. } => Ok(gamma * width / 2.0),
            SpectralDensity::SpinBoson { omega0, .. } => {
                self.mass_above(detuning - omega0, detuning)
            }
            SpectralDensity::FlatMemoryless { .. } => {
                Err(Error::config("model", "flat spectrum has infinite mass"))
            }
        }
    }
}

/// Lower limit of the frequency integral defining f(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LowerLimit {
    MinusInfinity,
    /// Cut at zero absolute frequency, x = −ωL.
    MinusOmegaL(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quadrature {
    ClosedForm,
    Numeric { max_points: usize, abs_tol: f64 },
}

/// How f(t) is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMode {
    pub lower_limit: LowerLimit,
    pub quadrature: Quadrature,
    /// Upper cutoff of numeric quadrature, in units of the characteristic width above the peak.
    pub cutoff_widths: f64,
}

impl KernelMode {
    pub const DEFAULT_CUTOFF_WIDTHS: f64 = 50.0;
    pub const DEFAULT_MAX_POINTS: usize = 4_000_000;
    pub const DEFAULT_ABS_TOL: f64 = 1e-9;

    pub fn closed_form() -> Self {
        KernelMode {
            lower_limit: LowerLimit::MinusInfinity,
            quadrature: Quadrature::ClosedForm,
            cutoff_widths: Self::DEFAULT_CUTOFF_WIDTHS,
        }
    }

    pub fn numeric(lower_limit: LowerLimit) -> Self {
        KernelMode {
            lower_limit,
            quadrature: Quadrature::Numeric {
                max_points: Self::DEFAULT_MAX_POINTS,
                abs_tol: Self::DEFAULT_ABS_TOL,
            },
            cutoff_widths: Self::DEFAULT_CUTOFF_WIDTHS,
        }
    }

    pub fn with_cutoff_widths(mut self, widths: f64) -> Self {
        self.cutoff_widths = widths;
        self
    }

    pub fn with_tolerance(mut self, max_points: usize, abs_tol: f64) -> Self {
        self.quadrature = Quadrature::Numeric {
            max_points,
            abs_tol,
        };
        self
    }

    /// Closed form where it exists, numeric quadrature otherwise.
    pub fn preferred(spec: &SpectralDensity, lower_limit: LowerLimit) -> Self {
        match (spec, lower_limit) {
            (SpectralDensity::Lorentzian { .. }, LowerLimit::MinusInfinity) => Self::closed_form(),
            _ => Self::numeric(lower_limit),
        }
    }

    pub fn validate(&self, spec: &SpectralDensity) -> Result<()> {
        if let LowerLimit::MinusOmegaL(wl) = self.lower_limit {
            if !(wl > 0.0 && wl.is_finite()) {
                return Err(Error::config(
                    "omega_l",
                    format!("must be positive, got {wl}"),
                ));
            }
        }
        match self.quadrature {
            Quadrature::ClosedForm => {
                if matches!(spec, SpectralDensity::SpinBoson { .. }) {
                    return Err(Error::config(
                        "quadrature",
                        "no closed form for the spin-boson density",
                    ));
                }
                if self.lower_limit != LowerLimit::MinusInfinity {
                    return Err(Error::config(
                        "quadrature",
                        "closed form requires the −∞ lower limit",
                    ));
                }
            }
            Quadrature::Numeric {
                max_points,
                abs_tol,
            } => {
                if max_points < 15 {
                    return Err(Error::config("max_points", "must allow at least one panel"));
                }
                if !(abs_tol > 0.0) {
                    return Err(Error::config("abs_tol", "must be positive"));
                }
                if !(self.cutoff_widths > 0.0) {
                    return Err(Error::config("cutoff_widths", "must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// Closed-form Lorentzian kernel (λΓ/2)·exp[−(λ + iΔ − iδ)t].
pub fn lorentzian_kernel(gamma: f64, width: f64, delta: f64, detuning: f64, t: f64) -> C64 {
    C64::new(-width * t, -(detuning - delta) * t).exp() * (0.5 * gamma * width)
}

/// Numeric representation of f(t) = ∫ J(x) e^{−ixt} dx as weighted nodes.
#[derive(Debug, Clone)]
pub struct KernelQuadrature {
    mesh: PanelMesh,
    /// Spectral mass outside the integration window that the lower limit would include.
    pub truncated_mass: f64,
    pub window: (f64, f64),
}

impl KernelQuadrature {
    /// Builds a mesh accurate for 0 ≤ |t| ≤ `t_max`.
    pub fn build(
        spec: &SpectralDensity,
        detuning: f64,
        mode: &KernelMode,
        t_max: f64,
    ) -> Result<Self> {
        spec.validate()?;
        mode.validate(spec)?;
        let (max_points, abs_tol) = match mode.quadrature {
            Quadrature::Numeric {
                max_points,
                abs_tol,
            } => (max_points, abs_tol),
            Quadrature::ClosedForm => {
                return Err(Error::config(
                    "quadrature",
                    "closed form has no quadrature mesh",
                ))
            }
        };
        if matches!(spec, SpectralDensity::FlatMemoryless { .. }) {
            return Err(Error::config(
                "model",
                "the flat spectrum has a delta kernel and cannot be sampled",
            ));
        }
        let width = spec.characteristic_width();
        let peak = spec.peak(detuning);
        let hi = peak + mode.cutoff_widths * width;
        let physical_lo = match spec {
            SpectralDensity::SpinBoson { omega0, .. } => Some(detuning - omega0),
            _ => None,
        };
        let lo = match (mode.lower_limit, physical_lo) {
            (LowerLimit::MinusOmegaL(wl), Some(p)) => (-wl).max(p),
            (LowerLimit::MinusOmegaL(wl), None) => -wl,
            (LowerLimit::MinusInfinity, Some(p)) => p,
            (LowerLimit::MinusInfinity, None) => peak - mode.cutoff_widths * width,
        };
        if lo >= hi {
            return Err(Error::config(
                "omega_l",
                "lower limit lies above the quadrature cutoff",
            ));
        }
        let mut truncated_mass = spec.mass_above(hi, detuning)?;
        if mode.lower_limit == LowerLimit::MinusInfinity && physical_lo.is_none() {
            truncated_mass += spec.mass_below(lo, detuning)?;
        }
        let oscillation_width = if t_max > 0.0 {
            PI / (4.0 * t_max.abs())
        } else {
            f64::INFINITY
        };
        let resolution_width = 0.5
            * match *spec {
                SpectralDensity::SpinBoson { width, omega0, .. } => width.min(omega0),
                _ => width,
            };
        let max_width = oscillation_width.min(resolution_width);
        let weight = |x: f64| spec.rotating_density(x, detuning);
        let mesh = build_oscillatory_mesh(
            weight,
            lo,
            hi,
            max_width,
            &[0.0, t_max.abs()],
            abs_tol,
            max_points,
        )?;
        Ok(KernelQuadrature {
            mesh,
            truncated_mass,
            window: (lo, hi),
        })
    }

    pub fn error_estimate(&self) -> f64 {
        self.mesh.error_estimate
    }

    pub fn len(&self) -> usize {
        self.mesh.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mesh.nodes.is_empty()
    }

    /// f(t) for any real t; negative t gives the analytic extension f(−t) = f(t)*.
    pub fn evaluate(&self, t: f64) -> C64 {
        self.mesh
            .nodes
            .iter()
            .zip(&self.mesh.weights)
            .map(|(&x, &w)| C64::from_polar(w, -x * t))
            .sum()
    }

    /// f(t_k) on every grid node, by phase recurrence with periodic resynchronisation.
    pub fn tabulate(&self, grid: &TimeGrid) -> Vec<C64> {
        self.tabulate_impl(grid, None).0
    }

    /// f(t_k) together with the exact interval moments of f(σ)e^{iΔσ}.
    pub fn tabulate_with_moments(
        &self,
        grid: &TimeGrid,
        detuning: f64,
    ) -> (Vec<C64>, KernelMoments) {
        let (values, moments) = self.tabulate_impl(grid, Some(detuning));
        (values, moments.expect("moments requested"))
    }

    fn tabulate_impl(
        &self,
        grid: &TimeGrid,
        detuning: Option<f64>,
    ) -> (Vec<C64>, Option<KernelMoments>) {
        const RESYNC: usize = 256;
        let h = grid.step();
        let nodes = &self.mesh.nodes;
        let weights = &self.mesh.weights;
        let padded = nodes.len().div_ceil(LANES) * LANES;
        let pad = |v: Vec<f64>| {
            let mut v = v;
            v.resize(padded, 0.0);
            v
        };
        let weight = pad(weights.clone());
        let node = pad(nodes.clone());
        let rot_re = pad(nodes.iter().map(|&x| (x * h).cos()).collect());
        let rot_im = pad(nodes.iter().map(|&x| -(x * h).sin()).collect());
        let mut shape: [Vec<f64>; 6] = Default::default();
        if let Some(d) = detuning {
            let e: Vec<[C64; 3]> = nodes
                .iter()
                .map(|&x| interval_shape(C64::new(0.0, (x - d) * h)).map(|e| e * h))
                .collect();
            for (m, col) in shape.iter_mut().enumerate() {
                *col = pad(e
                    .iter()
                    .map(|ek| {
                        if m % 2 == 0 {
                            ek[m / 2].re
                        } else {
                            ek[m / 2].im
                        }
                    })
                    .collect());
            }
        }
        // Node blocks small enough to stay in cache for the whole time march.
        let n_moments = if detuning.is_some() { grid.n_steps } else { 0 };
        let mut sums = alloc::vec![[0.0f64; 8]; grid.len()];
        for start in (0..padded).step_by(BLOCK) {
            let r = start..(start + BLOCK).min(padded);
            let mut re = weight[r.clone()].to_vec();
            let mut im = alloc::vec![0.0; re.len()];
            let (qr, qi) = (&rot_re[r.clone()], &rot_im[r.clone()]);
            let block_shape: [&[f64]; 6] = core::array::from_fn(|m| {
                if shape[m].is_empty() {
                    &shape[m][..]
                } else {
                    &shape[m][r.clone()]
                }
            });
            for (k, total) in sums.iter_mut().enumerate() {
                if k > 0 && k % RESYNC == 0 {
                    let t = k as f64 * h;
                    for (i, j) in r.clone().enumerate() {
                        re[i] = weight[j] * (node[j] * t).cos();
                        im[i] = -weight[j] * (node[j] * t).sin();
                    }
                }
                let acc = if k < n_moments {
                    phasor_step::<true>(&mut re, &mut im, qr, qi, &block_shape)
                } else {
                    phasor_step::<false>(&mut re, &mut im, qr, qi, &block_shape)
                };
                for (t, a) in total.iter_mut().zip(acc) {
                    *t += a;
                }
            }
        }
        let out = sums.iter().map(|a| C64::new(a[0], a[1])).collect();
        let moments = detuning.map(|d| {
            let mut m = KernelMoments::with_capacity(n_moments);
            for (k, a) in sums.iter().take(n_moments).enumerate() {
                let rot = C64::from_polar(1.0, d * k as f64 * h);
                m.near.push(C64::new(a[2], a[3]) * rot);
                m.far.push(C64::new(a[4], a[5]) * rot);
                m.tail.push(C64::new(a[6], a[7]) * rot);
            }
            m
        });
        (out, moments)
    }
}

const BLOCK: usize = 2048;
const LANES: usize = 8;

/// Sums the phasors (and, if requested, their products with the three shape columns),
/// then advances every phasor by one rotor. Lane-wise accumulation keeps the loop vectorisable.
fn phasor_step<const MOMENTS: bool>(
    re: &mut [f64],
    im: &mut [f64],
    rot_re: &[f64],
    rot_im: &[f64],
    shape: &[&[f64]; 6],
) -> [f64; 8] {
    let mut acc = [[0.0f64; LANES]; 8];
    let chunks = re.len() / LANES;
    for c in 0..chunks {
        let r = c * LANES..(c + 1) * LANES;
        let (pr, pi) = (&mut re[r.clone()], &mut im[r.clone()]);
        let (qr, qi) = (&rot_re[r.clone()], &rot_im[r.clone()]);
        if MOMENTS {
            for m in 0..3 {
                let (er, ei) = (&shape[2 * m][r.clone()], &shape[2 * m + 1][r.clone()]);
                for l in 0..LANES {
                    acc[2 + 2 * m][l] += pr[l] * er[l] - pi[l] * ei[l];
                    acc[3 + 2 * m][l] += pr[l] * ei[l] + pi[l] * er[l];
                }
            }
        }
        for l in 0..LANES {
            acc[0][l] += pr[l];
            acc[1][l] += pi[l];
            let (a, b) = (pr[l], pi[l]);
            pr[l] = a * qr[l] - b * qi[l];
            pi[l] = a * qi[l] + b * qr[l];
        }
    }
    acc.map(|lanes| lanes.iter().sum())
}

/// [∫₀¹e^{−zφ}(1−φ)dφ, ∫₀¹e^{−zφ}φ dφ, ∫₀¹e^{−zφ}(1−φ)²/2 dφ].
pub fn interval_shape(z: C64) -> [C64; 3] {
    if z.norm() < 0.5 {
        // Power series; the k-th terms are (−z)^k/k! times the moments of φ^k.
        let mut out = [C64::new(0.0, 0.0); 3];
        let mut term = C64::new(1.0, 0.0);
        for k in 0..24 {
            let kf = k as f64;
            out[0] += term / ((kf + 1.0) * (kf + 2.0));
            out[1] += term / (kf + 2.0);
            out[2] += term / ((kf + 1.0) * (kf + 2.0) * (kf + 3.0));
            term *= -z / (kf + 1.0);
        }
        out
    } else {
        let e = (-z).exp();
        let z2 = z * z;
        let first = (1.0 - e * (1.0 + z)) / z2;
        let zeroth = (1.0 - e) / z - first;
        let tail = (1.0 / z - 2.0 / z2 + (1.0 - e) * 2.0 / (z2 * z)) * 0.5;
        [zeroth, first, tail]
    }
}

/// Product-integration moments of g(σ) = f(σ)e^{iΔσ} on each interval [jh, (j+1)h],
/// with φ = σ/h − j: `near` weights (1−φ), `far` weights φ and `tail` weights (1−φ)²/2.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KernelMoments {
    pub near: Vec<C64>,
    pub far: Vec<C64>,
    pub tail: Vec<C64>,
}

impl KernelMoments {
    fn with_capacity(n: usize) -> Self {
        KernelMoments {
            near: Vec::with_capacity(n),
            far: Vec::with_capacity(n),
            tail: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.near.len()
    }

    pub fn is_empty(&self) -> bool {
        self.near.is_empty()
    }

    /// Moments of the single exponential c·e^{−βσ}.
    pub fn exponential(c: C64, beta: C64, step: f64, n_intervals: usize) -> Self {
        let e = interval_shape(beta * step);
        let mut m = KernelMoments::with_capacity(n_intervals);
        for j in 0..n_intervals {
            let a = c * (-beta * (j as f64 * step)).exp() * step;
            m.near.push(a * e[0]);
            m.far.push(a * e[1]);
            m.tail.push(a * e[2]);
        }
        m
    }

    /// Moments of the piecewise-linear interpolant of samples g(jh).
    pub fn from_samples(g: &[C64], step: f64) -> Self {
        let mut m = KernelMoments::with_capacity(g.len().saturating_sub(1));
        for w in g.windows(2) {
            m.near.push((w[0] / 3.0 + w[1] / 6.0) * step);
            m.far.push((w[0] / 6.0 + w[1] / 3.0) * step);
            m.tail.push((w[0] / 8.0 + w[1] / 24.0) * step);
        }
        m
    }

    /// Moments of g*(σ).
    pub fn conj(&self) -> Self {
        let c = |v: &Vec<C64>| v.iter().map(|z| z.conj()).collect();
        KernelMoments {
            near: c(&self.near),
            far: c(&self.far),
            tail: c(&self.tail),
        }
    }
}

/// Single evaluation of the correlation kernel.
pub fn correlation_kernel(
    spec: &SpectralDensity,
    detuning: f64,
    mode: &KernelMode,
    t: f64,
) -> Result<C64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!(
            "kernel time must be non-negative, got {t}"
        )));
    }
    spec.validate()?;
    mode.validate(spec)?;
    match (mode.quadrature, *spec) {
        (
            Quadrature::ClosedForm,
            SpectralDensity::Lorentzian {
                gamma,
                width,
                detuning: delta,
            },
        ) => Ok(lorentzian_kernel(gamma, width, delta, detuning, t)),
        _ => Ok(KernelQuadrature::build(spec, detuning, mode, t)?.evaluate(t)),
    }
}

/// Kernel sampled on a time grid, or the symbolic delta kernel of a flat bath.
#[derive(Debug, Clone)]
pub enum KernelTable {
    Flat {
        gamma: f64,
    },
    Sampled {
        values: Vec<C64>,
        /// Interval moments in the frame rotating at the detuning the table was built for.
        moments: KernelMoments,
        truncated_mass: f64,
        quadrature_error: f64,
    },
}

impl KernelTable {
    pub fn build(
        spec: &SpectralDensity,
        detuning: f64,
        mode: &KernelMode,
        grid: &TimeGrid,
    ) -> Result<Self> {
        spec.validate()?;
        mode.validate(spec)?;
        match (mode.quadrature, *spec) {
            (_, SpectralDensity::FlatMemoryless { gamma }) => Ok(KernelTable::Flat { gamma }),
            (
                Quadrature::ClosedForm,
                SpectralDensity::Lorentzian {
                    gamma,
                    width,
                    detuning: delta,
                },
            ) => {
                let values = grid
                    .times()
                    .map(|t| lorentzian_kernel(gamma, width, delta, detuning, t - grid.t0))
                    .collect();
                let moments = KernelMoments::exponential(
                    C64::new(0.5 * gamma * width, 0.0),
                    C64::new(width, -delta),
                    grid.step(),
                    grid.n_steps,
                );
                Ok(KernelTable::Sampled {
                    values,
                    moments,
                    truncated_mass: 0.0,
                    quadrature_error: 0.0,
                })
            }
            _ => {
                let q = KernelQuadrature::build(spec, detuning, mode, grid.t_end - grid.t0)?;
                let (values, moments) = q.tabulate_with_moments(grid, detuning);
                Ok(KernelTable::Sampled {
                    values,
                    moments,
                    truncated_mass: q.truncated_mass,
                    quadrature_error: q.error_estimate(),
                })
            }
        }
    }

    /// Table from kernel samples f(t_k) alone; the moments use linear interpolation.
    pub fn from_samples(values: Vec<C64>, detuning: f64, grid: &TimeGrid) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::config(
                "grid",
                format!("kernel has {} nodes, grid has {}", values.len(), grid.len()),
            ));
        }
        let step = grid.step();
        let g: Vec<C64> = values
            .iter()
            .enumerate()
            .map(|(k, &f)| f * C64::from_polar(1.0, detuning * k as f64 * step))
            .collect();
        Ok(KernelTable::Sampled {
            moments: KernelMoments::from_samples(&g, step),
            values,
            truncated_mass: 0.0,
            quadrature_error: 0.0,
        })
    }

    pub fn values(&self) -> Option<&[C64]> {
        match self {
            KernelTable::Flat { .. } => None,
            KernelTable::Sampled { values, .. } => Some(values),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lorentzian_peak_and_half_height() {
        let j = SpectralDensity::Lorentzian {
            gamma: 1.0,
            width: 1.0,
            detuning: 0.0,
        };
        assert!((j.density_at(0.0).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((j.density_at(1.0).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((j.density_at(-1.0).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn spin_boson_vanishes_at_zero_and_rejects_negative() {
        let j = SpectralDensity::SpinBoson {
            mass: 5.0,
            width: 0.05,
            omega0: 1.3,
        };
        assert_eq!(j.density_at(0.0).unwrap(), 0.0);
        assert!(matches!(j.density_at(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn closed_form_kernel_values() {
        let j = SpectralDensity::Lorentzian {
            gamma: 1.0,
            width: 1.0,
            detuning: 0.01,
        };
        let f0 = correlation_kernel(&j, 0.3, &KernelMode::closed_form(), 0.0).unwrap();
        assert_eq!(f0, C64::new(0.5, 0.0));
        for t in [0.5, 2.0, 7.3] {
            let f = correlation_kernel(&j, 0.3, &KernelMode::closed_form(), t).unwrap();
            assert!((f.norm() - 0.5 * (-t).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_rejected_outside_its_domain() {
        let sb = SpectralDensity::SpinBoson {
            mass: 5.0,
            width: 1.0,
            omega0: 1.3,
        };
        assert!(matches!(
            correlation_kernel(&sb, 0.3, &KernelMode::closed_form(), 1.0),
            Err(Error::Config { .. })
        ));
        let lz = SpectralDensity::Lorentzian {
            gamma: 1.0,
            width: 1.0,
            detuning: 0.0,
        };
        let mut mode = KernelMode::closed_form();
        mode.lower_limit = LowerLimit::MinusOmegaL(1.0);
        assert!(matches!(
            correlation_kernel(&lz, 0.3, &mode, 1.0),
            Err(Error::Config { .. })
        ));
        let flat = SpectralDensity::FlatMemoryless { gamma: 1.0 };
        assert!(correlation_kernel(
            &flat,
            0.3,
            &KernelMode::numeric(LowerLimit::MinusInfinity),
            1.0
        )
        .is_err());
    }

    #[test]
    fn lorentzian_masses_add_up() {
        let j = SpectralDensity::Lorentzian {
            gamma: 1.0,
            width: 2.0,
            detuning: 0.3,
        };
        let above = j.mass_above(0.7, 0.1).unwrap();
        let below = j.mass_below(0.7, 0.1).unwrap();
        assert!((above + below - 1.0).abs() < 1e-14);
        assert!((j.mass_above(j.peak(0.1), 0.1).unwrap() - 0.5).abs() < 1e-14);
    }
}
