//! 2x2 unitaries acting on the chirality qubit, basis order (|R>, |L>).

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::Mul;

use num_complex::Complex64;

use crate::noise::NoiseSample;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Below this rotation angle `sin(r)/r` is evaluated by its Taylor series.
pub const SMALL_ANGLE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinMatrix {
    m: [[Complex64; 2]; 2],
}

impl CoinMatrix {
    /// Builds a matrix from rows `[[m00, m01], [m10, m11]]`. No unitarity check.
    pub const fn from_rows(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    pub const fn identity() -> Self {
        Self::from_rows([[ONE, ZERO], [ZERO, ONE]])
    }

    pub const fn hadamard() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let mh = Complex64::new(-FRAC_1_SQRT_2, 0.0);
        Self::from_rows([[h, h], [h, mh]])
    }

    pub fn rows(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    /// Applies the matrix to the column vector `(r, l)`.
    #[inline(always)]
    pub fn apply(&self, r: Complex64, l: Complex64) -> (Complex64, Complex64) {
        (
            self.m[0][0] * r + self.m[0][1] * l,
            self.m[1][0] * r + self.m[1][1] * l,
        )
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::from_rows([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn determinant(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Largest entrywise modulus of `M^dagger M - I`.
    pub fn unitarity_error(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::identity())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        worst
    }
}

impl Mul for CoinMatrix {
    type Output = CoinMatrix;

    fn mul(self, rhs: CoinMatrix) -> CoinMatrix {
        let a = &self.m;
        let b = &rhs.m;
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        CoinMatrix { m: out }
    }
}

pub fn hadamard_coin() -> CoinMatrix {
    CoinMatrix::hadamard()
}

/// `exp(i (a1 s1 + a2 s2 + a3 s3))` in closed form.
///
/// With `r = |a|` this is `cos(r) I + i sin(r)/r (a . sigma)`.
pub fn su2_exponential(sample: &NoiseSample) -> CoinMatrix {
    let NoiseSample {
        alpha1: a1,
        alpha2: a2,
        alpha3: a3,
    } = *sample;
    let r2 = a1 * a1 + a2 * a2 + a3 * a3;
    let r = r2.sqrt();
    let sinc = if r < SMALL_ANGLE {
        1.0 - r2 / 6.0 + r2 * r2 / 120.0
    } else {
        r.sin() / r
    };
    let c = r.cos();
    let (x, y, z) = (sinc * a1, sinc * a2, sinc * a3);
    // i * (x s1 + y s2 + z s3) = [[i z, i x + y], [i x - y, -i z]]
    CoinMatrix::from_rows([
        [Complex64::new(c, z), Complex64::new(y, x)],
        [Complex64::new(-y, x), Complex64::new(c, -z)],
    ])
}

/// Noisy coin `H * noise_rotation`: the rotation acts first, then the Hadamard.
pub fn compose_coin(noise_rotation: &CoinMatrix) -> CoinMatrix {
    CoinMatrix::hadamard() * *noise_rotation
}
