//! Exact and perturbative master equations for a driven, damped two-level
//! system coupled to a bosonic reservoir at zero temperature.
//!
//! The exact equation is propagated as a time-local ODE whose coefficients come
//! from the Volterra kernel equations; Nakajima-Zwanzig, time-convolutionless and
//! Lindblad equations are available for comparison, together with a brute-force
//! system-plus-bath oracle.
//!
//! All rates and frequencies are in units of a reference decay rate.
#![no_std]

extern crate alloc;

pub mod error;
pub mod exact;
pub mod kernel;
pub mod linalg;
pub mod observables;
pub mod oracle;
pub mod perturbative;
pub mod quadrature;
pub mod spectral;

mod ode;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use exact::{build_coefficients, propagate_exact, CoefficientTrack, DensityMatrix};
pub use kernel::{KernelSolution, TimeGrid};
pub use observables::{EvolutionTrace, Method};
pub use spectral::{KernelMode, LowerLimit, Quadrature, SpectralDensity};
