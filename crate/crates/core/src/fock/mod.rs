//! Exact numerics in a truncated Fock space.
//!
//! Operators are dense and real symmetric; states are complex. Evolution is
//! by eigendecomposition, split into the invariant (parity) blocks of each
//! Hamiltonian, so it is unitary to rounding at any time.

mod cutoff;
mod dynamics;
mod operators;
mod qfi;
mod spectrum;
mod state;

pub use cutoff::{scaled_change, Converged, CutoffPolicy, Tracked};
pub use dynamics::{
    finite_frequency_discrepancy, quadrature_track, quadrature_track_converged, FrequencyDiscrepancy,
    DERIVATIVE_HALVING_TOL,
};
pub use operators::{
    annihilation, momentum_squared, number, position, position_squared, sigma_x, sigma_z, spin_identity, spin_kron,
    HermitianOperator, HERMITICITY_TOL,
};
pub use qfi::{
    generator_qfi, generator_qfi_converged, overlap_deficit, qfi_overlap, reciprocal_residual,
    verify_reciprocal_relation, MAX_OVERLAP_DEFICIT,
};
pub use spectrum::Spectrum;
pub use state::{JointState, DEFAULT_LEAK_THRESHOLD, NORM_TOL};

use nalgebra::DMatrix;
use num_traits::Float;

use crate::closed_form::BosonInitialState;
use crate::error::{Error, Result};
use crate::model::{ModelParams, Regime};
use crate::scalar::SpectralScalar;

/// Smallest cutoff accepted by the Hamiltonian builders.
pub const MIN_CUTOFF: usize = 4;

fn require_cutoff(n_cut: usize) -> Result<()> {
    if n_cut < MIN_CUTOFF {
        return Err(Error::CutoffTooSmall {
            reason: format!("n_cut = {n_cut}, need at least {MIN_CUTOFF}"),
        });
    }
    Ok(())
}

/// Which Hamiltonian the oracle evolves under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OracleModel {
    /// `(ω̄/2)(P² + ζX²)` on the boson alone.
    Effective,
    /// The lab-frame Hamiltonian with the `λ(a + a†)²` term.
    Full,
    /// The lab-frame Hamiltonian after the squeeze that removes `λ(a + a†)²`.
    Squeezed,
}

impl OracleModel {
    pub fn hamiltonian<T: SpectralScalar>(self, params: &ModelParams<T>, n_cut: usize) -> Result<HermitianOperator<T>> {
        match self {
            Self::Effective => build_effective_hamiltonian(params, n_cut),
            Self::Full => build_full_hamiltonian(params, n_cut),
            Self::Squeezed => build_squeezed_hamiltonian(params, n_cut),
        }
    }

    /// `∂H/∂g`.
    pub fn g_derivative<T: SpectralScalar>(
        self,
        params: &ModelParams<T>,
        n_cut: usize,
    ) -> Result<HermitianOperator<T>> {
        require_cutoff(n_cut)?;
        match self {
            Self::Effective => {
                let (_, dzeta) = stiffness_and_slope(params, "effective g-derivative")?;
                let m = position_squared::<T>(n_cut) * (params.omega_bar() / T::cst(2.0) * dzeta);
                HermitianOperator::from_real(&m, n_cut, 1)
            }
            Self::Full | Self::Squeezed => {
                let mut amp = Float::sqrt(params.omega * params.qubit_omega) / T::cst(2.0) * T::SQRT_2();
                if self == Self::Squeezed {
                    amp *= Float::powf(params.stiffness_ratio(), T::cst(-0.25));
                }
                let m = spin_kron(sigma_x(), &(position::<T>(n_cut) * amp));
                HermitianOperator::from_real(&m, n_cut, 2)
            }
        }
    }

    /// The probe embedded in the model's Hilbert space (`|↓⟩ ⊗ |φ⟩` for the
    /// spin-boson models).
    pub fn initial_state<T: SpectralScalar>(
        self,
        initial: &BosonInitialState<T>,
        n_cut: usize,
    ) -> Result<JointState<T>> {
        match self {
            Self::Effective => JointState::boson(initial, n_cut),
            Self::Full | Self::Squeezed => JointState::spin_down(initial, n_cut),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Effective => "effective",
            Self::Full => "full",
            Self::Squeezed => "squeezed",
        }
    }
}

/// `(ζ, ∂ζ/∂g)` of the effective oscillator on the current side of the
/// critical point.
pub(crate) fn stiffness_and_slope<T: SpectralScalar>(
    params: &ModelParams<T>,
    operation: &'static str,
) -> Result<(T, T)> {
    match params.regime() {
        Regime::Normal => Ok((params.epsilon_g(), params.d_epsilon_g_dg())),
        Regime::Superradiant => Ok((params.epsilon_g_alpha(), params.d_epsilon_g_alpha_dg())),
        Regime::Critical => Err(Error::Regime {
            operation,
            expected: Regime::Normal,
            found: Regime::Critical,
            epsilon_g: params.epsilon_g().as_f64(),
        }),
    }
}

/// `(ω̄/2)(P² + ζX²)` on `n_cut` levels.
pub fn build_quadratic_oscillator<T: SpectralScalar>(
    omega_bar: T,
    zeta: T,
    n_cut: usize,
) -> Result<HermitianOperator<T>> {
    require_cutoff(n_cut)?;
    let half = omega_bar / T::cst(2.0);
    let m = (momentum_squared::<T>(n_cut) + position_squared::<T>(n_cut) * zeta) * half;
    HermitianOperator::from_real(&m, n_cut, 1)
}

/// Effective oscillator `(ω̄/2)(P² + ε_g X²)`, with `ε_g^α` in place of `ε_g`
/// beyond the critical point.
pub fn build_effective_hamiltonian<T: SpectralScalar>(
    params: &ModelParams<T>,
    n_cut: usize,
) -> Result<HermitianOperator<T>> {
    let (zeta, _) = stiffness_and_slope(params, "build_effective_hamiltonian")?;
    build_quadratic_oscillator(params.omega_bar(), zeta, n_cut)
}

fn spin_boson<T: SpectralScalar>(
    boson: DMatrix<T>,
    coupling: T,
    params: &ModelParams<T>,
    n_cut: usize,
) -> Result<HermitianOperator<T>> {
    let half_omega = params.qubit_omega / T::cst(2.0);
    let mut h = spin_kron(spin_identity(), &boson);
    h += spin_kron(sigma_z(), &(DMatrix::<T>::identity(n_cut, n_cut) * half_omega));
    h += spin_kron(sigma_x(), &(position::<T>(n_cut) * (coupling * T::SQRT_2())));
    HermitianOperator::from_real(&h, n_cut, 2)
}

/// `ω a†a + (Ω/2)σz + (√(ωΩ)/2) g (a + a†) σx + λ (a + a†)²`.
pub fn build_full_hamiltonian<T: SpectralScalar>(
    params: &ModelParams<T>,
    n_cut: usize,
) -> Result<HermitianOperator<T>> {
    require_cutoff(n_cut)?;
    params.validate()?;
    let boson = number::<T>(n_cut) * params.omega + position_squared::<T>(n_cut) * (T::cst(2.0) * params.lambda);
    let coupling = Float::sqrt(params.omega * params.qubit_omega) / T::cst(2.0) * params.g;
    spin_boson(boson, coupling, params, n_cut)
}

/// The full Hamiltonian after the squeeze `S(r)`, `r = ¼ ln(1 + 4λ/ω)`:
/// `ω̄ a†a + (ω̄ − ω)/2 + (Ω/2)σz + (√(ωΩ)/2) g (1 + 4λ/ω)^{-1/4} (a + a†) σx`.
pub fn build_squeezed_hamiltonian<T: SpectralScalar>(
    params: &ModelParams<T>,
    n_cut: usize,
) -> Result<HermitianOperator<T>> {
    require_cutoff(n_cut)?;
    params.validate()?;
    let omega_bar = params.omega_bar();
    let shift = (omega_bar - params.omega) / T::cst(2.0);
    let boson = number::<T>(n_cut) * omega_bar + DMatrix::<T>::identity(n_cut, n_cut) * shift;
    let coupling = Float::sqrt(params.omega * params.qubit_omega) / T::cst(2.0)
        * params.g
        * Float::powf(params.stiffness_ratio(), T::cst(-0.25));
    spin_boson(boson, coupling, params, n_cut)
}

/// `e^{−iHt}ψ₀` by eigendecomposition, rejecting leaks into the top tenth of
/// the Fock levels.
pub fn evolve<T: SpectralScalar>(h: &HermitianOperator<T>, psi0: &JointState<T>, t: T) -> Result<JointState<T>> {
    Spectrum::new(h)?.evolve(psi0, t)
}

#[cfg(test)]
mod tests;
