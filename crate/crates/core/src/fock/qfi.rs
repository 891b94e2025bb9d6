use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use num_traits::Float;

use super::cutoff::{Converged, CutoffPolicy};
use super::operators::{momentum_squared, position_squared, HermitianOperator};
use super::spectrum::Spectrum;
use super::{build_quadratic_oscillator, stiffness_and_slope, JointState, OracleModel};
use crate::closed_form::BosonInitialState;
use crate::error::{invalid, Error, Result};
use crate::model::{ModelParams, Regime};
use crate::scalar::SpectralScalar;

/// Largest `1 − |⟨ψ_−|ψ_+⟩|` accepted by [`qfi_overlap`].
pub const MAX_OVERLAP_DEFICIT: f64 = 1e-2;

/// `1 − |⟨a|b⟩|/(‖a‖‖b‖)`.
///
/// The Gram determinant `‖a‖²‖b‖² − |⟨a|b⟩|²` equals
/// `‖a‖²‖b − a‖² − |⟨a|b − a⟩|²`, which keeps its precision when the two
/// states nearly coincide.
pub fn overlap_deficit<T: SpectralScalar>(a: &DVector<Complex<T>>, b: &DVector<Complex<T>>) -> T {
    let zero = Complex::new(T::zero(), T::zero());
    let na = a.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr());
    let nb = b.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr());
    let mut nd = T::zero();
    let mut ad = zero;
    for (x, y) in a.iter().zip(b.iter()) {
        let d = *y - *x;
        nd += d.norm_sqr();
        ad += x.conj() * d;
    }
    let gram = Float::max(na * nd - ad.norm_sqr(), T::zero());
    let infidelity = gram / (na * nb);
    let fidelity = Float::sqrt(Float::max(T::one() - infidelity, T::zero()));
    infidelity / (T::one() + fidelity)
}

/// QFI about g from the fidelity of states evolved at `g ± dg/2`:
/// `F ≈ 8 (1 − |⟨ψ_{g−dg/2}(t)|ψ_{g+dg/2}(t)⟩|)/dg²`.
///
/// The relative bias is of the order of the deficit `F dg²/8`.
pub fn qfi_overlap<T: SpectralScalar>(
    params: &ModelParams<T>,
    t: T,
    psi0: &BosonInitialState<T>,
    dg: T,
    model: OracleModel,
    n_cut: usize,
) -> Result<T> {
    if !(dg > T::zero()) || dg / T::cst(2.0) > params.g {
        return Err(invalid("dg", format!("must lie in (0, 2g], got {dg}")));
    }
    let state = model.initial_state(psi0, n_cut)?;
    if t == T::zero() {
        return Ok(T::zero());
    }
    let half = dg / T::cst(2.0);
    let mut evolved = Vec::with_capacity(2);
    for g in [params.g - half, params.g + half] {
        let h = model.hamiltonian(&params.with_g(g), n_cut)?;
        evolved.push(Spectrum::new(&h)?.evolve(&state, t)?);
    }
    let deficit = overlap_deficit(evolved[0].amplitudes(), evolved[1].amplitudes());
    if !(deficit < T::cst(MAX_OVERLAP_DEFICIT)) {
        return Err(Error::StepTooLarge {
            step: dg.as_f64(),
            reason: format!("overlap deficit {deficit} is not below {MAX_OVERLAP_DEFICIT}"),
        });
    }
    Ok(T::cst(8.0) * deficit / (dg * dg))
}

/// Exact QFI about g under the effective oscillator from the generator
/// `h_ζ = ∫₀ᵗ e^{iH_ζ s} H₁ e^{−iH_ζ s} ds` with `H₁ = (ω̄/2)X²`:
/// `F_g = (∂ζ/∂g)² · 4 Var[h_ζ]`.
pub fn generator_qfi<T: SpectralScalar>(
    params: &ModelParams<T>,
    t: T,
    psi0: &BosonInitialState<T>,
    n_cut: usize,
) -> Result<T> {
    let (zeta, dzeta) = stiffness_and_slope(params, "generator_qfi")?;
    let omega_bar = params.omega_bar();
    let h = build_quadratic_oscillator(omega_bar, zeta, n_cut)?;
    let h1 = HermitianOperator::from_real(&(position_squared::<T>(n_cut) * (omega_bar / T::cst(2.0))), n_cut, 1)?;
    let spectrum = Spectrum::new(&h)?;
    let state = JointState::boson(psi0, n_cut)?;
    spectrum.evolve(&state, t)?;
    let var = spectrum.generator_variance(&state, &h1, t)?;
    Ok(dzeta * dzeta * T::cst(4.0) * var)
}

/// [`generator_qfi`] at an automatically selected cutoff.
pub fn generator_qfi_converged<T: SpectralScalar>(
    params: &ModelParams<T>,
    t: T,
    psi0: &BosonInitialState<T>,
    policy: &CutoffPolicy,
) -> Result<Converged<f64>> {
    policy.converge(|n_cut| generator_qfi(params, t, psi0, n_cut).map(|v| v.as_f64()))
}

/// Largest entry of `[H_ζ, Λ] − √ε Λ` over the leading `rows × rows` block,
/// with `Λ = i√ε M − N`, `M = −i[H₀, H₁]`, `N = −[H_ζ, [H₀, H₁]]`,
/// `H₀ = (ω̄/2)P²`, `H₁ = (ω̄/2)X²`, `H_ζ = H₀ + ε_g H₁`.
///
/// All of these are real: `i√ε M = √ε [H₀, H₁]`.
pub fn reciprocal_residual<T: SpectralScalar>(params: &ModelParams<T>, n_cut: usize, rows: usize) -> Result<T> {
    let regime = params.regime();
    if regime != Regime::Normal {
        return Err(Error::Regime {
            operation: "reciprocal_residual",
            expected: Regime::Normal,
            found: regime,
            epsilon_g: params.epsilon_g().as_f64(),
        });
    }
    if rows > n_cut {
        return Err(Error::DimensionMismatch {
            expected: n_cut,
            found: rows,
        });
    }
    let osc = params.effective_oscillator();
    let half = osc.omega_bar / T::cst(2.0);
    let h0: DMatrix<T> = momentum_squared::<T>(n_cut) * half;
    let h1: DMatrix<T> = position_squared::<T>(n_cut) * half;
    let hz = &h0 + &h1 * osc.epsilon_g;
    let root = Float::sqrt(osc.epsilon);
    let c = &h0 * &h1 - &h1 * &h0;
    let n = -(&hz * &c - &c * &hz);
    let lambda = &c * root - n;
    let r = &hz * &lambda - &lambda * &hz - &lambda * root;
    let mut worst = T::zero();
    for j in 0..rows {
        for i in 0..rows {
            worst = Float::max(worst, Float::abs(r[(i, j)]));
        }
    }
    Ok(worst)
}

/// [`reciprocal_residual`] over the lowest 80% of the Fock levels, where
/// truncation does not reach.
pub fn verify_reciprocal_relation<T: SpectralScalar>(params: &ModelParams<T>, n_cut: usize) -> Result<T> {
    reciprocal_residual(params, n_cut, n_cut * 4 / 5)
}
