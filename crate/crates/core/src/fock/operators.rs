use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::SpectralScalar;

/// Largest entry of `H − H†` accepted for a Hermitian operator.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Dense Hermitian operator on `spin_dim` copies of an `n_cut`-level Fock
/// space. Basis index is `spin · n_cut + n` with spin 0 = ↓.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator<T: SpectralScalar> {
    matrix: DMatrix<Complex<T>>,
    n_cut: usize,
    spin_dim: usize,
}

impl<T: SpectralScalar> HermitianOperator<T> {
    pub fn new(matrix: DMatrix<Complex<T>>, n_cut: usize, spin_dim: usize) -> Result<Self> {
        let dim = n_cut * spin_dim;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        let op = Self {
            matrix,
            n_cut,
            spin_dim,
        };
        let residual = op.hermiticity_residual();
        if !(residual < T::cst(HERMITICITY_TOL)) {
            return Err(Error::NotHermitian {
                residual: residual.as_f64(),
            });
        }
        Ok(op)
    }

    /// Wraps a real symmetric matrix.
    pub fn from_real(matrix: &DMatrix<T>, n_cut: usize, spin_dim: usize) -> Result<Self> {
        Self::new(matrix.map(|x| Complex::new(x, T::zero())), n_cut, spin_dim)
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.matrix
    }

    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    pub fn spin_dim(&self) -> usize {
        self.spin_dim
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |H_jk − conj(H_kj)|`.
    pub fn hermiticity_residual(&self) -> T {
        let n = self.matrix.nrows();
        let mut worst = T::zero();
        for j in 0..n {
            for k in j..n {
                let d = self.matrix[(j, k)] - self.matrix[(k, j)].conj();
                worst = Float::max(worst, d.norm());
            }
        }
        worst
    }

    /// Real part, provided the imaginary part vanishes.
    pub fn real_matrix(&self) -> Result<DMatrix<T>> {
        if self.matrix.iter().any(|c| c.im != T::zero()) {
            return Err(Error::ComplexOperator);
        }
        Ok(self.matrix.map(|c| c.re))
    }
}

fn sqrt_usize<T: SpectralScalar>(n: usize) -> T {
    Float::sqrt(T::from_usize(n).unwrap())
}

/// Annihilation operator `a` with `a_{n−1,n} = √n`.
pub fn annihilation<T: SpectralScalar>(n_cut: usize) -> DMatrix<T> {
    DMatrix::from_fn(n_cut, n_cut, |i, j| if j == i + 1 { sqrt_usize(j) } else { T::zero() })
}

/// Number operator `a†a`.
pub fn number<T: SpectralScalar>(n_cut: usize) -> DMatrix<T> {
    DMatrix::from_fn(
        n_cut,
        n_cut,
        |i, j| if i == j { T::from_usize(i).unwrap() } else { T::zero() },
    )
}

/// Position quadrature `X = (a + a†)/√2`.
pub fn position<T: SpectralScalar>(n_cut: usize) -> DMatrix<T> {
    let h = T::FRAC_1_SQRT_2();
    DMatrix::from_fn(n_cut, n_cut, |i, j| {
        if j == i + 1 {
            h * sqrt_usize(j)
        } else if i == j + 1 {
            h * sqrt_usize(i)
        } else {
            T::zero()
        }
    })
}

/// `(2n + 1)/2 ± (a² + a†²)/2` with exact matrix elements; the sign selects
/// `X²` (+) or `P²` (−).
fn quadratic_band<T: SpectralScalar>(n_cut: usize, sign: T) -> DMatrix<T> {
    let half = T::cst(0.5);
    DMatrix::from_fn(n_cut, n_cut, |i, j| {
        if i == j {
            half * T::from_usize(2 * i + 1).unwrap()
        } else if j == i + 2 {
            sign * half * sqrt_usize(j * (j - 1))
        } else if i == j + 2 {
            sign * half * sqrt_usize(i * (i - 1))
        } else {
            T::zero()
        }
    })
}

/// `X²` with the matrix elements of the untruncated operator.
pub fn position_squared<T: SpectralScalar>(n_cut: usize) -> DMatrix<T> {
    quadratic_band(n_cut, T::one())
}

/// `P²` with the matrix elements of the untruncated operator.
pub fn momentum_squared<T: SpectralScalar>(n_cut: usize) -> DMatrix<T> {
    quadratic_band(n_cut, -T::one())
}

/// `spin ⊗ boson` in the `spin · n_cut + n` ordering.
pub fn spin_kron<T: SpectralScalar>(spin: [[T; 2]; 2], boson: &DMatrix<T>) -> DMatrix<T> {
    let n = boson.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| spin[i / n][j / n] * boson[(i % n, j % n)])
}

/// `σz` with ↓ = index 0.
pub fn sigma_z<T: SpectralScalar>() -> [[T; 2]; 2] {
    [[-T::one(), T::zero()], [T::zero(), T::one()]]
}

pub fn sigma_x<T: SpectralScalar>() -> [[T; 2]; 2] {
    [[T::zero(), T::one()], [T::one(), T::zero()]]
}

pub fn spin_identity<T: SpectralScalar>() -> [[T; 2]; 2] {
    [[T::one(), T::zero()], [T::zero(), T::one()]]
}
