use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest Fock dimension a probe state may be given in; quadratic operators
/// connect `|n⟩` to `|n ± 2⟩`.
pub const MIN_FOCK_DIM: usize = 5;

/// Initial boson state `Σ c_n |n⟩` on `|0⟩ … |n_max⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct BosonInitialState<T> {
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> BosonInitialState<T> {
    pub fn new(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.len() < MIN_FOCK_DIM {
            return Err(Error::CutoffTooSmall {
                reason: format!(
                    "state given on {} Fock levels, need at least {MIN_FOCK_DIM}",
                    amplitudes.len()
                ),
            });
        }
        let norm_sqr = amplitudes.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr());
        let tol = T::cst(1e-12).max(T::cst(100.0) * T::epsilon());
        if !((norm_sqr - T::one()).abs() <= tol) {
            return Err(Error::NotNormalized {
                norm_sqr: norm_sqr.as_f64(),
            });
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes arbitrary amplitudes before building the state.
    pub fn normalized(mut amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let norm = amplitudes.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr()).sqrt();
        if !(norm > T::zero()) {
            return Err(Error::NotNormalized {
                norm_sqr: (norm * norm).as_f64(),
            });
        }
        for c in &mut amplitudes {
            *c = *c / norm;
        }
        Self::new(amplitudes)
    }

    /// Fock state `|k⟩` embedded in `dim` levels.
    pub fn fock(k: usize, dim: usize) -> Result<Self> {
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); dim.max(k + 1)];
        amplitudes[k] = Complex::new(T::one(), T::zero());
        Self::new(amplitudes)
    }

    /// `(|0⟩ + i|1⟩)/√2`, the default probe state.
    pub fn zero_plus_i_one() -> Self {
        let h = T::FRAC_1_SQRT_2();
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); 8];
        amplitudes[0] = Complex::new(h, T::zero());
        amplitudes[1] = Complex::new(T::zero(), h);
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    /// Highest representable Fock index.
    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    /// Highest occupied Fock index.
    pub fn max_occupied(&self) -> usize {
        self.amplitudes
            .iter()
            .rposition(|c| c.norm_sqr() > T::zero())
            .unwrap_or(0)
    }

    /// Amplitudes zero-padded (or truncated) to `dim` levels.
    pub fn padded(&self, dim: usize) -> Vec<Complex<T>> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); dim];
        for (o, a) in out.iter_mut().zip(&self.amplitudes) {
            *o = *a;
        }
        out
    }

    /// Variance of `αP² + βX²` evaluated from exact Fock matrix elements.
    ///
    /// With `P² = (2n+1 − a² − a†²)/2` and `X² = (2n+1 + a² + a†²)/2` the
    /// operator is pentadiagonal, so one extra pair of levels makes the
    /// result exact.
    pub fn quadratic_variance(&self, p_coeff: T, x_coeff: T) -> T {
        let half = T::cst(0.5);
        let diag = |n: usize| half * (p_coeff + x_coeff) * T::from_usize(2 * n + 1).unwrap();
        let off = |n: usize| half * (x_coeff - p_coeff) * T::from_usize((n + 1) * (n + 2)).unwrap().sqrt();
        let psi = self.padded(self.amplitudes.len() + 2);
        let dim = psi.len();
        let zero = Complex::new(T::zero(), T::zero());
        let mut applied = vec![zero; dim];
        for n in 0..dim {
            let mut acc = psi[n] * diag(n);
            if n + 2 < dim {
                acc = acc + psi[n + 2] * off(n);
            }
            if n >= 2 {
                acc = acc + psi[n - 2] * off(n - 2);
            }
            applied[n] = acc;
        }
        let mean = psi.iter().zip(&applied).fold(zero, |acc, (a, b)| acc + a.conj() * b).re;
        let second = applied.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr());
        (second - mean * mean).max(T::zero())
    }
}
