//! Eigenbasis of the free Hamiltonian H_S = Δσ₊σ₋ + Ω(σ₊ + σ₋).

use alloc::format;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::Mat2;

/// Dressed states φ1 (upper, eigenvalue λ1) and φ2 (lower, λ2) in the (|e⟩, |g⟩) basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedBasis {
    pub detuning: f64,
    pub drive: f64,
    /// Generalized Rabi frequency √(Δ² + 4Ω²).
    pub w0: f64,
    /// Mixing angle arctan(Δ/2Ω).
    pub theta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub phi1: [f64; 2],
    pub phi2: [f64; 2],
    pub g0: f64,
    pub g1: f64,
    pub g2: f64,
    /// ⟨φj|σ₋|φk⟩, indices j, k ∈ {0, 1} for states 1, 2.
    pub sigma: [[f64; 2]; 2],
}

impl DressedBasis {
    pub fn new(detuning: f64, drive: f64) -> Result<Self> {
        if !(detuning.is_finite() && drive.is_finite()) {
            return Err(Error::config("drive", "parameters must be finite"));
        }
        if drive < 0.0 {
            return Err(Error::Domain(format!(
                "drive strength must be non-negative, got {drive}"
            )));
        }
        let w0 = detuning.hypot(2.0 * drive);
        if w0 == 0.0 {
            return Err(Error::DegenerateBasis);
        }
        let sin = detuning / w0;
        let a = (0.5 * (1.0 + sin)).max(0.0).sqrt();
        let b = (0.5 * (1.0 - sin)).max(0.0).sqrt();
        let phi1 = [a, b];
        let phi2 = [b, -a];
        let sigma = [
            [phi1[1] * phi1[0], phi1[1] * phi2[0]],
            [phi2[1] * phi1[0], phi2[1] * phi2[0]],
        ];
        Ok(DressedBasis {
            detuning,
            drive,
            w0,
            theta: detuning.atan2(2.0 * drive),
            lambda1: 0.5 * (detuning + w0),
            lambda2: 0.5 * (detuning - w0),
            phi1,
            phi2,
            g0: drive / w0,
            g1: (w0 + detuning) / (2.0 * w0),
            g2: (w0 - detuning) / (2.0 * w0),
            sigma,
        })
    }

    fn state(&self, j: usize) -> [C64; 2] {
        let v = if j == 0 { self.phi1 } else { self.phi2 };
        [v[0].into(), v[1].into()]
    }

    /// |φj⟩⟨φk| in the bare basis.
    pub fn projector(&self, j: usize, k: usize) -> Mat2 {
        Mat2::outer(self.state(j), self.state(k))
    }

    /// S₊ = |φ1⟩⟨φ2|.
    pub fn s_plus(&self) -> Mat2 {
        self.projector(0, 1)
    }

    /// S₋ = |φ2⟩⟨φ1|.
    pub fn s_minus(&self) -> Mat2 {
        self.projector(1, 0)
    }

    /// Sz = |φ1⟩⟨φ1| − |φ2⟩⟨φ2|.
    pub fn s_z(&self) -> Mat2 {
        self.projector(0, 0) - self.projector(1, 1)
    }

    pub fn hamiltonian(&self) -> Mat2 {
        Mat2::real(self.detuning, self.drive, self.drive, 0.0)
    }

    /// U(τ) = exp(−iH_S τ).
    pub fn propagator(&self, tau: f64) -> Mat2 {
        self.projector(0, 0)
            .scale(C64::from_polar(1.0, -self.lambda1 * tau))
            + self
                .projector(1, 1)
                .scale(C64::from_polar(1.0, -self.lambda2 * tau))
    }

    /// σ₋ = g0·Sz + g2·S₊ − g1·S₋ as (coefficient, operator, m) with X_m rotating as e^{imW0τ}.
    pub fn sigma_minus_components(&self) -> [(f64, Mat2, i32); 3] {
        [
            (-self.g1, self.s_minus(), -1),
            (self.g0, self.s_z(), 0),
            (self.g2, self.s_plus(), 1),
        ]
    }
}

pub fn dressed_basis(detuning: f64, drive: f64) -> Result<DressedBasis> {
    DressedBasis::new(detuning, drive)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_case() {
        let b = dressed_basis(0.0, 1.0).unwrap();
        assert_eq!(b.w0, 2.0);
        assert_eq!(b.theta, 0.0);
        assert!((b.lambda1 - 1.0).abs() < 1e-15 && (b.lambda2 + 1.0).abs() < 1e-15);
        for g in [b.g0, b.g1, b.g2] {
            assert!((g - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn weak_drive_limit() {
        let b = dressed_basis(1.0, 1e-9).unwrap();
        assert!((b.theta - core::f64::consts::FRAC_PI_2).abs() < 1e-8);
        assert!((b.lambda1 - 1.0).abs() < 1e-12 && b.lambda2.abs() < 1e-12);
        assert!((b.g1 - 1.0).abs() < 1e-12 && b.g2.abs() < 1e-12 && b.g0.abs() < 1e-8);
    }

    #[test]
    fn generalized_rabi_frequency() {
        let b = dressed_basis(0.3, 0.02).unwrap();
        assert!((b.w0 - 0.0916f64.sqrt()).abs() < 1e-15);
        assert!((b.w0 - 0.30265).abs() < 1e-5);
    }

    #[test]
    fn degenerate_and_negative_drive_rejected() {
        assert_eq!(dressed_basis(0.0, 0.0).unwrap_err(), Error::DegenerateBasis);
        assert!(matches!(dressed_basis(0.3, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn sigma_elements_match_weights() {
        let b = dressed_basis(0.7, 0.4).unwrap();
        assert!((b.sigma[0][0] - b.g0).abs() < 1e-14);
        assert!((b.sigma[0][1] - b.g2).abs() < 1e-14);
        assert!((b.sigma[1][0] + b.g1).abs() < 1e-14);
        assert!((b.sigma[1][1] + b.g0).abs() < 1e-14);
        let rebuilt = b
            .sigma_minus_components()
            .iter()
            .fold(Mat2::ZERO, |acc, (c, x, _)| acc + x.scale_re(*c));
        assert!((rebuilt - Mat2::sigma_minus()).max_abs() < 1e-14);
    }
}
