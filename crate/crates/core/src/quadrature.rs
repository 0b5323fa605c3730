//! Adaptive Gauss-Kronrod quadrature.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
/// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// The 15 Kronrod abscissae and weights mapped onto [a, b].
pub fn kronrod_nodes(a: f64, b: f64) -> [(f64, f64); 15] {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 15];
    for k in 0..7 {
        out[2 * k] = (c - r * XGK[k], r * WGK[k]);
        out[2 * k + 1] = (c + r * XGK[k], r * WGK[k]);
    }
    out[14] = (c, r * WGK[7]);
    out
}

/// Kronrod estimate and |Kronrod − Gauss| on [a, b].
pub fn gk15(f: &impl Fn(f64) -> C64, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for k in 0..7 {
        let pair = f(c - r * XGK[k]) + f(c + r * XGK[k]);
        kron += pair * WGK[k];
        if k % 2 == 1 {
            gauss += pair * WG[k / 2];
        }
    }
    (kron * r, ((kron - gauss) * r).norm())
}

struct Panel {
    a: f64,
    b: f64,
    value: C64,
    err: f64,
}

/// Globally adaptive integral of a complex integrand over a finite interval.
///
/// Returns the value and the summed error estimate.
pub fn integrate_complex(
    f: impl Fn(f64) -> C64,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_evals: usize,
) -> Result<(C64, f64)> {
    if a == b {
        return Ok((C64::new(0.0, 0.0), 0.0));
    }
    let (value, err) = gk15(&f, a, b);
    let mut panels = alloc::vec![Panel { a, b, value, err }];
    let mut evals = 15;
    loop {
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        if total_err <= abs_tol {
            let value = panels.iter().map(|p| p.value).sum();
            return Ok((value, total_err));
        }
        if evals + 30 > max_evals {
            return Err(Error::Numeric {
                what: "adaptive quadrature",
                achieved: total_err,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("non-empty");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(Error::Numeric {
                what: "adaptive quadrature",
                achieved: total_err,
            });
        }
        for (lo, hi) in [(p.a, mid), (mid, p.b)] {
            let (value, err) = gk15(&f, lo, hi);
            panels.push(Panel {
                a: lo,
                b: hi,
                value,
                err,
            });
        }
        evals += 30;
    }
}

/// Real-valued counterpart of [`integrate_complex`].
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_evals: usize,
) -> Result<(f64, f64)> {
    integrate_complex(|x| C64::new(f(x), 0.0), a, b, abs_tol, max_evals).map(|(v, e)| (v.re, e))
}

/// ∫_a^∞ f, through the substitution x = a + s/(1 − s).
pub fn integrate_to_infinity(
    f: impl Fn(f64) -> f64,
    a: f64,
    abs_tol: f64,
    max_evals: usize,
) -> Result<(f64, f64)> {
    let g = |s: f64| {
        let one_minus = 1.0 - s;
        if one_minus <= 0.0 {
            return 0.0;
        }
        f(a + s / one_minus) / (one_minus * one_minus)
    };
    integrate(g, 0.0, 1.0, abs_tol, max_evals)
}

/// A fixed set of weighted abscissae covering an interval.
#[derive(Debug, Clone)]
pub struct PanelMesh {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub error_estimate: f64,
}

/// Builds a panel mesh for ∫ w(x) e^{−ixt} dx that is accurate for every probe time.
///
/// Panels start no wider than `max_width` and are bisected until the
/// Gauss-Kronrod error of each panel is below its share of `abs_tol`.
pub fn build_oscillatory_mesh(
    weight: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    max_width: f64,
    probe_times: &[f64],
    abs_tol: f64,
    max_points: usize,
) -> Result<PanelMesh> {
    let length = hi - lo;
    let initial = Float::max((length / max_width).ceil(), 1.0) as usize;
    let mut stack: Vec<(f64, f64)> = (0..initial)
        .rev()
        .map(|k| {
            let a = lo + length * k as f64 / initial as f64;
            let b = lo + length * (k + 1) as f64 / initial as f64;
            (a, b)
        })
        .collect();
    let mut accepted: Vec<(f64, f64)> = Vec::new();
    let mut error_estimate = 0.0;
    while let Some((a, b)) = stack.pop() {
        let err = probe_times
            .iter()
            .map(|&t| gk15(&|x| C64::from_polar(weight(x), -x * t), a, b).1)
            .fold(0.0, f64::max);
        let share = abs_tol * (b - a) / length;
        let mid = 0.5 * (a + b);
        if err <= share || mid <= a || mid >= b {
            accepted.push((a, b));
            error_estimate += err;
        } else {
            stack.push((mid, b));
            stack.push((a, mid));
        }
        if 15 * (accepted.len() + stack.len()) > max_points {
            let pending: f64 = stack.len() as f64 * share;
            return Err(Error::Numeric {
                what: "kernel quadrature mesh",
                achieved: error_estimate + pending,
            });
        }
    }
    accepted.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut nodes = Vec::with_capacity(15 * accepted.len());
    let mut weights = Vec::with_capacity(15 * accepted.len());
    for (a, b) in accepted {
        for (x, w) in kronrod_nodes(a, b) {
            nodes.push(x);
            weights.push(w * weight(x));
        }
    }
    Ok(PanelMesh {
        nodes,
        weights,
        error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        let (v, _) = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-12, 1000).unwrap();
        assert!((v - (64.0 - 1.0) / 6.0 + 9.0).abs() < 1e-12);
    }

    #[test]
    fn integrates_to_infinity() {
        let (v, _) = integrate_to_infinity(|x| 1.0 / (1.0 + x * x), 0.0, 1e-12, 10_000).unwrap();
        assert!((v - core::f64::consts::FRAC_PI_2).abs() < 1e-11);
    }

    #[test]
    fn reports_failure_with_achieved_tolerance() {
        let res = integrate(|x| (1.0 / x).sin(), 1e-6, 1.0, 1e-14, 100);
        assert!(matches!(res, Err(Error::Numeric { achieved, .. }) if achieved > 1e-14));
    }

    #[test]
    fn mesh_integrates_gaussian_fourier_transform() {
        let mesh = build_oscillatory_mesh(
            |x| (-x * x).exp(),
            -12.0,
            12.0,
            0.5,
            &[0.0, 4.0],
            1e-12,
            100_000,
        )
        .unwrap();
        for t in [0.0, 1.0, 4.0] {
            let v: C64 = mesh
                .nodes
                .iter()
                .zip(&mesh.weights)
                .map(|(&x, &w)| C64::from_polar(w, -x * t))
                .sum();
            let exact = core::f64::consts::PI.sqrt() * (-t * t / 4.0).exp();
            assert!((v - exact).norm() < 1e-11, "t={t}");
        }
    }
}
