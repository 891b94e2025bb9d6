//! Scalar abstractions.
//!
//! The closed-form engine and the moment integrator only need ordinary
//! floating-point arithmetic and are written against [`Real`]. The Fock-space
//! oracle additionally needs dense linear algebra and is written against
//! [`SpectralScalar`].

use std::fmt::{Debug, Display};

use nalgebra::{DMatrix, DVector, RealField};
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar used by every analytic formula in the crate.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn cst(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Lossy conversion to `f64`, used for diagnostics and error payloads.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Scalar usable by the dense Fock-space oracle.
///
/// `symmetric_eigen` returns eigenvalues in ascending order together with the
/// orthonormal eigenvectors stored column-wise.
pub trait SpectralScalar: Real + RealField + Copy {
    fn symmetric_eigen(matrix: DMatrix<Self>) -> (DVector<Self>, DMatrix<Self>) {
        let eig = matrix.symmetric_eigen();
        sort_ascending(eig.eigenvalues, eig.eigenvectors)
    }
}

impl SpectralScalar for f32 {}

impl SpectralScalar for f64 {
    fn symmetric_eigen(matrix: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let n = matrix.nrows();
        if n == 0 {
            return (DVector::zeros(0), DMatrix::zeros(0, 0));
        }
        let m = faer::Mat::<f64>::from_fn(n, n, |i, j| matrix[(i, j)]);
        let evd = m.selfadjoint_eigendecomposition(faer::Side::Lower);
        let s = evd.s().column_vector();
        let u = evd.u();
        let values = DVector::from_fn(n, |i, _| s.read(i));
        let vectors = DMatrix::from_fn(n, n, |i, j| u.read(i, j));
        sort_ascending(values, vectors)
    }
}

fn sort_ascending<T: SpectralScalar>(values: DVector<T>, vectors: DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
    if order.iter().enumerate().all(|(i, &k)| i == k) {
        return (values, vectors);
    }
    let sorted_values = DVector::from_fn(n, |i, _| values[order[i]]);
    let sorted_vectors = DMatrix::from_fn(vectors.nrows(), n, |r, c| vectors[(r, order[c])]);
    (sorted_values, sorted_vectors)
}
