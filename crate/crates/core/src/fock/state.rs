use nalgebra::DVector;
use num_complex::Complex;
use num_traits::Float;

use crate::closed_form::BosonInitialState;
use crate::error::{Error, Result};
use crate::scalar::SpectralScalar;

/// Norm tolerance for oracle states (widened to `100 ε_mach` for narrow
/// scalar types).
pub const NORM_TOL: f64 = 1e-10;

/// Default bound on the probability in the top tenth of the Fock levels.
pub const DEFAULT_LEAK_THRESHOLD: f64 = 1e-8;

/// Amplitudes over `spin_dim` copies of `n_cut` Fock levels, index
/// `spin · n_cut + n` with spin 0 = ↓. `spin_dim = 1` is the boson-only space
/// of the effective oscillator.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState<T: SpectralScalar> {
    amplitudes: DVector<Complex<T>>,
    n_cut: usize,
    spin_dim: usize,
}

impl<T: SpectralScalar> JointState<T> {
    pub fn new(amplitudes: DVector<Complex<T>>, n_cut: usize, spin_dim: usize) -> Result<Self> {
        if !(spin_dim == 1 || spin_dim == 2) {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: spin_dim,
            });
        }
        if amplitudes.len() != n_cut * spin_dim {
            return Err(Error::DimensionMismatch {
                expected: n_cut * spin_dim,
                found: amplitudes.len(),
            });
        }
        let state = Self {
            amplitudes,
            n_cut,
            spin_dim,
        };
        let norm_sqr = state.norm_sqr();
        let tol = Float::max(T::cst(NORM_TOL), T::cst(100.0) * T::epsilon());
        if !(Float::abs(norm_sqr - T::one()) <= tol) {
            return Err(Error::NotNormalized {
                norm_sqr: norm_sqr.as_f64(),
            });
        }
        Ok(state)
    }

    /// Boson-only state `|φ⟩` padded to `n_cut` levels.
    pub fn boson(initial: &BosonInitialState<T>, n_cut: usize) -> Result<Self> {
        Self::embed(initial, n_cut, 1)
    }

    /// `|↓⟩ ⊗ |φ⟩` in the spin⊗boson space.
    pub fn spin_down(initial: &BosonInitialState<T>, n_cut: usize) -> Result<Self> {
        Self::embed(initial, n_cut, 2)
    }

    fn embed(initial: &BosonInitialState<T>, n_cut: usize, spin_dim: usize) -> Result<Self> {
        if initial.max_occupied() >= n_cut {
            return Err(Error::CutoffTooSmall {
                reason: format!("state occupies |{}⟩ but n_cut = {n_cut}", initial.max_occupied()),
            });
        }
        let mut amplitudes = DVector::from_element(n_cut * spin_dim, Complex::new(T::zero(), T::zero()));
        for (k, c) in initial.amplitudes().iter().enumerate().take(n_cut) {
            amplitudes[k] = *c;
        }
        Self::new(amplitudes, n_cut, spin_dim)
    }

    pub(crate) fn from_parts_unchecked(amplitudes: DVector<Complex<T>>, n_cut: usize, spin_dim: usize) -> Self {
        Self {
            amplitudes,
            n_cut,
            spin_dim,
        }
    }

    pub fn amplitudes(&self) -> &DVector<Complex<T>> {
        &self.amplitudes
    }

    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    pub fn spin_dim(&self) -> usize {
        self.spin_dim
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }

    /// First Fock index counted as tail: the top tenth of the levels.
    pub fn tail_start(&self) -> usize {
        self.n_cut - self.n_cut.div_ceil(10)
    }

    /// Probability in the top tenth of the Fock levels, summed over spin.
    pub fn tail_mass(&self) -> T {
        let start = self.tail_start();
        let mut mass = T::zero();
        for s in 0..self.spin_dim {
            for n in start..self.n_cut {
                mass += self.amplitudes[s * self.n_cut + n].norm_sqr();
            }
        }
        mass
    }

    pub fn check_leak(&self, threshold: T) -> Result<()> {
        let tail = self.tail_mass();
        if !(tail <= threshold) {
            return Err(Error::TruncationLeak {
                n_cut: self.n_cut,
                tail: tail.as_f64(),
                threshold: threshold.as_f64(),
            });
        }
        Ok(())
    }

    /// Probability of spin ↓.
    pub fn spin_down_population(&self) -> T {
        (0..self.n_cut).fold(T::zero(), |acc, n| acc + self.amplitudes[n].norm_sqr())
    }

    /// `(⟨X⟩, ⟨X²⟩)` with untruncated matrix elements.
    pub fn quadrature_moments(&self) -> (T, T) {
        let x = self.cross_position(&self.amplitudes);
        let mut xx = T::zero();
        let half = T::cst(0.5);
        for s in 0..self.spin_dim {
            let off = s * self.n_cut;
            for n in 0..self.n_cut {
                let c = self.amplitudes[off + n];
                xx += half * T::from_usize(2 * n + 1).unwrap() * c.norm_sqr();
                if n + 2 < self.n_cut {
                    let m = Float::sqrt(T::from_usize((n + 1) * (n + 2)).unwrap());
                    // ⟨n|a²|n+2⟩ and its conjugate
                    xx += m * (c.conj() * self.amplitudes[off + n + 2]).re;
                }
            }
        }
        (x, xx)
    }

    /// `Re⟨ψ|X|χ⟩`; with `χ = ∂ψ` twice this is `∂⟨X⟩`.
    pub fn cross_position(&self, other: &DVector<Complex<T>>) -> T {
        let h = T::FRAC_1_SQRT_2();
        let mut acc = T::zero();
        for s in 0..self.spin_dim {
            let off = s * self.n_cut;
            for n in 0..self.n_cut.saturating_sub(1) {
                let m = h * Float::sqrt(T::from_usize(n + 1).unwrap());
                let a = self.amplitudes[off + n];
                let b = self.amplitudes[off + n + 1];
                acc += m * ((a.conj() * other[off + n + 1]).re + (b.conj() * other[off + n]).re);
            }
        }
        acc
    }
}
