use num_traits::Float;

use super::cutoff::{scaled_change, Converged, CutoffPolicy, Tracked};
use super::spectrum::Spectrum;
use super::OracleModel;
use crate::closed_form::{self, BosonInitialState, QuadratureSample};
use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;
use crate::scalar::{Real, SpectralScalar};

/// Accepted relative change of `∂_g⟨X⟩` when the finite-difference step is
/// halved.
pub const DERIVATIVE_HALVING_TOL: f64 = 1e-5;

impl<T: Real> Tracked for Vec<QuadratureSample<T>> {
    /// `⟨X⟩` is compared on the scale of the quadrature's spread, since it
    /// passes through zero at every peak of the inverted variance.
    fn change_from(&self, previous: &Self) -> f64 {
        if self.len() != previous.len() {
            return f64::INFINITY;
        }
        let spread = self
            .iter()
            .map(|s| s.x_mean.as_f64().abs().max(s.x_var.as_f64().max(0.0).sqrt()))
            .fold(0.0, f64::max);
        let mean_change = self
            .iter()
            .zip(previous)
            .map(|(a, b)| (a.x_mean - b.x_mean).as_f64().abs())
            .fold(0.0, f64::max);
        let mean_change = if spread > 0.0 {
            mean_change / spread
        } else {
            mean_change
        };
        let columns: [fn(&QuadratureSample<T>) -> T; 3] = [|s| s.x_deriv_g, |s| s.x_var, |s| s.inv_var];
        columns
            .iter()
            .map(|col| {
                let a: Vec<f64> = previous.iter().map(|s| col(s).as_f64()).collect();
                let b: Vec<f64> = self.iter().map(|s| col(s).as_f64()).collect();
                scaled_change(&a, &b)
            })
            .fold(mean_change, f64::max)
    }
}

/// `⟨X⟩`, `∂_g⟨X⟩`, `(ΔX)²` and `I_g` along `times` for the probe evolved
/// under `model`. The g-derivative of the state is taken from the spectral
/// representation of `∂H/∂g`, so no finite difference is involved.
pub fn quadrature_track<T: SpectralScalar>(
    model: OracleModel,
    params: &ModelParams<T>,
    psi0: &BosonInitialState<T>,
    times: &[T],
    n_cut: usize,
) -> Result<Vec<QuadratureSample<T>>> {
    let h = model.hamiltonian(params, n_cut)?;
    let dh = model.g_derivative(params, n_cut)?;
    let spectrum = Spectrum::new(&h)?;
    let state = model.initial_state(psi0, n_cut)?;
    times
        .iter()
        .map(|&t| {
            let (psi, dpsi) = spectrum.evolve_with_derivative(&state, &dh, t)?;
            let (x, xx) = psi.quadrature_moments();
            let var = xx - x * x;
            let d = T::cst(2.0) * psi.cross_position(&dpsi);
            Ok(QuadratureSample {
                t,
                x_mean: x,
                x_deriv_g: d,
                x_var: var,
                inv_var: d * d / var,
            })
        })
        .collect()
}

/// [`quadrature_track`] at an automatically selected cutoff.
pub fn quadrature_track_converged<T: SpectralScalar>(
    model: OracleModel,
    params: &ModelParams<T>,
    psi0: &BosonInitialState<T>,
    times: &[T],
    policy: &CutoffPolicy,
) -> Result<Converged<Vec<QuadratureSample<T>>>> {
    policy.converge(|n_cut| quadrature_track(model, params, psi0, times, n_cut))
}

/// Result of one finite-frequency comparison at `τ_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyDiscrepancy {
    pub eta: f64,
    pub n: usize,
    pub tau: f64,
    pub x_mean: f64,
    pub x_var: f64,
    pub x_deriv_g: f64,
    /// Inverted variance at frequency ratio η.
    pub inv_var_finite: f64,
    /// Closed-form peak `I_g(τ_n)` of the low-frequency limit.
    pub inv_var_limit: f64,
    /// `(I_g^η(τ_n) − I_g(τ_n))/I_g(τ_n)`.
    pub delta: f64,
    pub n_cut: usize,
    pub dg: f64,
}

/// `(⟨X⟩, ⟨X²⟩, ∂⟨X⟩|_{dg}, ∂⟨X⟩|_{dg/2})` at time `t` under the squeezed-frame
/// spin-boson Hamiltonian, derivatives by centered differences.
fn finite_frequency_observables<T: SpectralScalar>(
    params: &ModelParams<T>,
    psi0: &BosonInitialState<T>,
    t: T,
    dg: T,
    n_cut: usize,
) -> Result<Vec<f64>> {
    let model = OracleModel::Squeezed;
    let state = model.initial_state(psi0, n_cut)?;
    let moments_at = |g: T| -> Result<(T, T)> {
        let h = model.hamiltonian(&params.with_g(g), n_cut)?;
        Ok(Spectrum::new(&h)?.evolve(&state, t)?.quadrature_moments())
    };
    let (x, xx) = moments_at(params.g)?;
    let mut out = vec![x.as_f64(), xx.as_f64()];
    for step in [dg, dg / T::cst(2.0)] {
        let (plus, _) = moments_at(params.g + step)?;
        let (minus, _) = moments_at(params.g - step)?;
        out.push(((plus - minus) / (T::cst(2.0) * step)).as_f64());
    }
    Ok(out)
}

/// Relative deviation of the finite-frequency inverted variance from the
/// closed-form peak at `τ_n` (the effective theory's optimal time).
///
/// The probe `|↓⟩ ⊗ (|0⟩ + i|1⟩)/√2` is evolved under the squeezed-frame
/// spin-boson Hamiltonian with `Ω = η ω`; `∂_g⟨X⟩` is a centered difference
/// with `dg = 10⁻⁵ max(g, 0.01)`, checked against the halved step.
pub fn finite_frequency_discrepancy<T: SpectralScalar>(
    params: &ModelParams<T>,
    eta: T,
    n: usize,
    policy: &CutoffPolicy,
) -> Result<FrequencyDiscrepancy> {
    if !(eta >= T::cst(10.0)) {
        return Err(invalid("eta", format!("must be at least 10, got {eta}")));
    }
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let params = params.with_frequency_ratio(eta).validate()?;
    let tau = closed_form::optimal_time(&params, n)?;
    let limit = closed_form::inverted_variance_peak(&params, n)?;
    let dg = T::cst(1e-5) * Float::max(params.g, T::cst(0.01));
    let psi0 = BosonInitialState::zero_plus_i_one();
    let converged = policy.converge(|n_cut| finite_frequency_observables(&params, &psi0, tau, dg, n_cut))?;
    let v = &converged.values;
    let (x, xx, d, d_half) = (v[0], v[1], v[2], v[3]);
    let halving = (d - d_half).abs() / d_half.abs().max(f64::MIN_POSITIVE);
    if !(halving < DERIVATIVE_HALVING_TOL) {
        return Err(Error::StepTooLarge {
            step: dg.as_f64(),
            reason: format!("halving the step changed the derivative by {halving:e}"),
        });
    }
    let var = xx - x * x;
    let finite = d * d / var;
    let limit = limit.as_f64();
    Ok(FrequencyDiscrepancy {
        eta: eta.as_f64(),
        n,
        tau: tau.as_f64(),
        x_mean: x,
        x_var: var,
        x_deriv_g: d,
        inv_var_finite: finite,
        inv_var_limit: limit,
        delta: (finite - limit) / limit,
        n_cut: converged.n_cut,
        dg: dg.as_f64(),
    })
}
