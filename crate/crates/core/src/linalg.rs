//! Dense 2×2 matrices and 4×4 superoperators over the basis (|e⟩, |g⟩).

use core::ops::{Add, AddAssign, Mul, Neg, Sub};
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64 as C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major 2×2 complex matrix; index 0 is the excited state, 1 the ground state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    /// σ₋ = |g⟩⟨e|.
    pub fn sigma_minus() -> Self {
        Mat2::real(0.0, 0.0, 1.0, 0.0)
    }

    /// σ₊ = |e⟩⟨g|.
    pub fn sigma_plus() -> Self {
        Mat2::real(0.0, 1.0, 0.0, 0.0)
    }

    /// |ψ⟩⟨φ| for column vectors ψ, φ.
    pub fn outer(psi: [C64; 2], phi: [C64; 2]) -> Self {
        let mut m = Mat2::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = psi[i] * phi[j].conj();
            }
        }
        m
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Mat2::new(
            m[0][0].conj(),
            m[1][0].conj(),
            m[0][1].conj(),
            m[1][1].conj(),
        )
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn scale(&self, z: C64) -> Self {
        let m = &self.0;
        Mat2::new(z * m[0][0], z * m[0][1], z * m[1][0], z * m[1][1])
    }

    pub fn scale_re(&self, x: f64) -> Self {
        self.scale(C64::new(x, 0.0))
    }

    pub fn commutator(&self, other: &Mat2) -> Self {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Mat2) -> Self {
        *self * *other + *other * *self
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Distance from Hermiticity, max |m_ij − m_ji*|.
    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.dagger()).max_abs()
    }

    /// Flattened row-major entries (the vectorization used by [`Super4`]).
    pub fn to_vec4(&self) -> [C64; 4] {
        [self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]]
    }

    pub fn from_vec4(v: [C64; 4]) -> Self {
        Mat2::new(v[0], v[1], v[2], v[3])
    }

    /// Eigen-decomposition of the Hermitian part, eigenvalues ascending.
    pub fn hermitian_eigen(&self) -> HermitianEigen {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = (self.0[0][1] + self.0[1][0].conj()) * 0.5;
        let mean = 0.5 * (a + d);
        let half = 0.5 * (a - d);
        let radius = half.hypot(b.norm());
        let values = [mean - radius, mean + radius];
        if b.norm() <= 1e-300 {
            let (lo, hi) = if a <= d { (0, 1) } else { (1, 0) };
            let mut vectors = [[ZERO; 2]; 2];
            vectors[0][lo] = ONE;
            vectors[1][hi] = ONE;
            return HermitianEigen { values, vectors };
        }
        let mut vectors = [[ZERO; 2]; 2];
        for (k, &lam) in values.iter().enumerate() {
            // Two algebraically equivalent candidates; take the better conditioned one.
            let v1 = [b, C64::new(lam - a, 0.0)];
            let v2 = [C64::new(lam - d, 0.0), b.conj()];
            let n1 = (v1[0].norm_sqr() + v1[1].norm_sqr()).sqrt();
            let n2 = (v2[0].norm_sqr() + v2[1].norm_sqr()).sqrt();
            let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
            vectors[k] = [v[0] / n, v[1] / n];
        }
        HermitianEigen { values, vectors }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HermitianEigen {
    pub values: [f64; 2],
    pub vectors: [[C64; 2]; 2],
}

impl HermitianEigen {
    /// Σ φ(λ_k) |v_k⟩⟨v_k|.
    pub fn map(&self, phi: impl Fn(f64) -> f64) -> Mat2 {
        let mut out = Mat2::ZERO;
        for k in 0..2 {
            out += Mat2::outer(self.vectors[k], self.vectors[k]).scale_re(phi(self.values[k]));
        }
        out
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut m = self;
        m += rhs;
        m
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, rhs: Mat2) {
        for i in 0..2 {
            for j in 0..2 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale_re(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut m = Mat2::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        m
    }
}

/// Linear map on 2×2 matrices in the row-major vectorization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Super4(pub [[C64; 4]; 4]);

impl Super4 {
    pub const ZERO: Super4 = Super4([[ZERO; 4]; 4]);

    pub fn identity() -> Self {
        let mut s = Super4::ZERO;
        for i in 0..4 {
            s.0[i][i] = ONE;
        }
        s
    }

    /// Matrix of a linear map, built column by column from the matrix units.
    pub fn from_map(map: impl Fn(&Mat2) -> Mat2) -> Self {
        let mut s = Super4::ZERO;
        for col in 0..4 {
            let mut unit = [ZERO; 4];
            unit[col] = ONE;
            let image = map(&Mat2::from_vec4(unit)).to_vec4();
            for row in 0..4 {
                s.0[row][col] = image[row];
            }
        }
        s
    }

    pub fn apply(&self, x: &Mat2) -> Mat2 {
        let v = x.to_vec4();
        let mut out = [ZERO; 4];
        for (row, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|c| self.0[row][c] * v[c]).sum();
        }
        Mat2::from_vec4(out)
    }

    pub fn scale(&self, z: C64) -> Self {
        let mut s = *self;
        s.0.iter_mut().flatten().for_each(|x| *x *= z);
        s
    }

    pub fn sub(&self, other: &Super4) -> Self {
        let mut s = *self;
        for i in 0..4 {
            for j in 0..4 {
                s.0[i][j] -= other.0[i][j];
            }
        }
        s
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Option<Super4> {
        let mut a = self.0;
        let mut inv = Super4::identity().0;
        for col in 0..4 {
            let pivot = (col..4).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))?;
            if a[pivot][col].norm() < 1e-300 {
                return None;
            }
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let p = ONE / a[col][col];
            for j in 0..4 {
                a[col][j] *= p;
                inv[col][j] *= p;
            }
            for row in 0..4 {
                if row != col {
                    let factor = a[row][col];
                    for j in 0..4 {
                        a[row][j] -= factor * a[col][j];
                        inv[row][j] -= factor * inv[col][j];
                    }
                }
            }
        }
        Some(Super4(inv))
    }
}

impl Mul for Super4 {
    type Output = Super4;
    fn mul(self, rhs: Super4) -> Super4 {
        let mut s = Super4::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                s.0[i][j] = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_reconstructs_matrix() {
        let m = Mat2::new(
            C64::new(0.7, 0.0),
            C64::new(0.1, -0.2),
            C64::new(0.1, 0.2),
            C64::new(0.3, 0.0),
        );
        let e = m.hermitian_eigen();
        assert!(e.values[0] <= e.values[1]);
        assert!((e.map(|x| x) - m).max_abs() < 1e-14);
        assert!((e.values[0] + e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_of_diagonal_matrix() {
        let e = Mat2::real(0.2, 0.0, 0.0, 0.8).hermitian_eigen();
        assert!((e.values[0] - 0.2).abs() < 1e-15 && (e.values[1] - 0.8).abs() < 1e-15);
        assert!(
            (e.map(f64::sqrt) - Mat2::real(0.2f64.sqrt(), 0.0, 0.0, 0.8f64.sqrt())).max_abs()
                < 1e-15
        );
    }

    #[test]
    fn superoperator_matches_map_and_inverts() {
        let sm = Mat2::sigma_minus();
        let sp = Mat2::sigma_plus();
        let map = |x: &Mat2| x.scale_re(2.0) + sm * *x * sp;
        let s = Super4::from_map(map);
        let x = Mat2::new(
            C64::new(0.3, 0.1),
            C64::new(-0.2, 0.5),
            C64::new(1.0, 0.0),
            C64::new(0.0, -0.4),
        );
        assert!((s.apply(&x) - map(&x)).max_abs() < 1e-15);
        let back = s.inverse().unwrap().apply(&s.apply(&x));
        assert!((back - x).max_abs() < 1e-14);
    }
}
