//! Analytic results of the effective-oscillator theory.
//!
//! All functions are pure and take the model parameters by reference. The
//! quantum Fisher information formulas keep only the leading `ε⁻³`
//! divergence; they are asymptotic in `ε → 0` at `√ε t = O(1)` and are
//! checked against the exact oracle in [`crate::fock`].

mod state;

pub use state::{BosonInitialState, MIN_FOCK_DIM};

use crate::error::{invalid, Error, Result};
use crate::model::{ModelParams, Regime};
use crate::scalar::Real;

/// One sample of the quantum Fisher information about g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiSample<T> {
    pub t: T,
    pub value: T,
}

/// Quadrature observables at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSample<T> {
    pub t: T,
    pub x_mean: T,
    pub x_deriv_g: T,
    pub x_var: T,
    pub inv_var: T,
}

fn require_normal<T: Real>(params: &ModelParams<T>, operation: &'static str) -> Result<()> {
    let regime = params.regime();
    if regime != Regime::Normal {
        return Err(Error::Regime {
            operation,
            expected: Regime::Normal,
            found: regime,
            epsilon_g: params.epsilon_g().as_f64(),
        });
    }
    Ok(())
}

fn require_beyond<T: Real>(params: &ModelParams<T>, operation: &'static str) -> Result<()> {
    let regime = params.regime();
    if regime != Regime::Superradiant {
        return Err(Error::Regime {
            operation,
            expected: Regime::Superradiant,
            found: regime,
            epsilon_g: params.epsilon_g().as_f64(),
        });
    }
    Ok(())
}

/// Below this argument `sin x − x` is evaluated from its Taylor series.
pub fn series_threshold<T: Real>() -> T {
    T::cst(1e-4).max(T::cst(10.0) * T::epsilon().cbrt())
}

/// `[sin(√ε t) − √ε t]² / ε³`, stable as `√ε t → 0`.
///
/// For small `x = √ε t` the bracket is `−x³(1/6 − x²/120 + x⁴/5040)`, so the
/// ratio becomes `t⁶ (1/6 − x²/120 + x⁴/5040)²` and ε drops out.
pub fn growth_kernel<T: Real>(epsilon: T, t: T) -> T {
    let x = epsilon.sqrt() * t;
    if x < series_threshold() {
        let x2 = x * x;
        let s = T::cst(1.0 / 6.0) - x2 / T::cst(120.0) + x2 * x2 / T::cst(5040.0);
        let t3 = t * t * t;
        t3 * t3 * s * s
    } else {
        growth_kernel_naive(epsilon, t)
    }
}

/// Direct evaluation of `[sin x − x]²/ε³`; loses precision for small `x`.
pub fn growth_kernel_naive<T: Real>(epsilon: T, t: T) -> T {
    let x = epsilon.sqrt() * t;
    let d = x.sin() - x;
    d * d / (epsilon * epsilon * epsilon)
}

/// `Var[N]` with `N = (ω² + 4λω)^{3/2}(P² − ζX²)` over the initial state.
fn scaled_var_n<T: Real>(state: &BosonInitialState<T>, params: &ModelParams<T>, zeta: T) -> Result<T> {
    if state.max_occupied() + 2 > state.n_max() {
        return Err(Error::CutoffTooSmall {
            reason: format!(
                "state occupies |{}⟩ but is given only up to |{}⟩",
                state.max_occupied(),
                state.n_max()
            ),
        });
    }
    let wb2 = params.omega * (params.omega + T::cst(4.0) * params.lambda);
    Ok(wb2 * wb2 * wb2 * state.quadratic_variance(T::one(), -zeta))
}

/// `Var[N]` for the normal regime, `ζ = ε_g`.
pub fn var_n<T: Real>(state: &BosonInitialState<T>, params: &ModelParams<T>) -> Result<T> {
    scaled_var_n(state, params, params.epsilon_g())
}

/// `Var[N_α]` for the regime beyond the critical point, `ζ = ε_g^α`.
pub fn var_n_beyond<T: Real>(state: &BosonInitialState<T>, params: &ModelParams<T>) -> Result<T> {
    scaled_var_n(state, params, params.epsilon_g_alpha())
}

/// Leading-order QFI about g for `g < g_c`:
/// `F_g ≈ 16 (ωg/(ω+4λ))² [sin(√ε t) − √ε t]²/ε³ · Var[N]`.
pub fn qfi_g<T: Real>(params: &ModelParams<T>, t: T, var_n: T) -> Result<QfiSample<T>> {
    require_normal(params, "qfi_g")?;
    if !(var_n >= T::zero()) {
        return Err(invalid("var_n", format!("must be non-negative, got {var_n}")));
    }
    let c = params.coupling_slope();
    let osc = params.effective_oscillator();
    Ok(QfiSample {
        t,
        value: T::cst(16.0) * c * c * growth_kernel(osc.epsilon, t) * var_n,
    })
}

/// Leading-order QFI about g for `g > g_c`:
/// `F_g^α ≈ 64 ((1 − ε_g^α)/g)² [sin(√ε_α t) − √ε_α t]²/ε_α³ · Var[N_α]`.
pub fn qfi_g_beyond<T: Real>(params: &ModelParams<T>, t: T, var_n_alpha: T) -> Result<QfiSample<T>> {
    require_beyond(params, "qfi_g_beyond")?;
    if !(var_n_alpha >= T::zero()) {
        return Err(invalid(
            "var_n_alpha",
            format!("must be non-negative, got {var_n_alpha}"),
        ));
    }
    let frame = params.beyond_critical_frame()?;
    let pref = (T::one() - frame.epsilon_g_alpha) / params.g;
    Ok(QfiSample {
        t,
        value: T::cst(64.0) * pref * pref * growth_kernel(frame.epsilon_alpha, t) * var_n_alpha,
    })
}

/// QFI on whichever side of the critical point `params` lies.
pub fn qfi_g_any<T: Real>(state: &BosonInitialState<T>, params: &ModelParams<T>, t: T) -> Result<QfiSample<T>> {
    match params.regime() {
        Regime::Normal => qfi_g(params, t, var_n(state, params)?),
        Regime::Superradiant => qfi_g_beyond(params, t, var_n_beyond(state, params)?),
        Regime::Critical => Err(Error::Regime {
            operation: "qfi_g_any",
            expected: Regime::Normal,
            found: Regime::Critical,
            epsilon_g: params.epsilon_g().as_f64(),
        }),
    }
}

/// Value approached by [`qfi_g`] as `ε_g → 0⁺` at fixed t:
/// `16 (ωg/(ω+4λ))² t⁶/36 · Var[N]`.
pub fn qfi_g_critical_limit<T: Real>(state: &BosonInitialState<T>, params: &ModelParams<T>, t: T) -> Result<T> {
    let c = params.coupling_slope();
    let var = scaled_var_n(state, params, T::zero())?;
    let t3 = t * t * t;
    Ok(T::cst(16.0) * c * c * t3 * t3 / T::cst(36.0) * var)
}

fn half_phase<T: Real>(epsilon: T, t: T) -> T {
    epsilon.sqrt() * t / T::cst(2.0)
}

/// `⟨X⟩_t = (√2/2) ε_g^{-1/2} sin(√ε t/2)` for the probe `(|0⟩ + i|1⟩)/√2`.
pub fn x_mean<T: Real>(params: &ModelParams<T>, t: T) -> Result<T> {
    require_normal(params, "x_mean")?;
    let osc = params.effective_oscillator();
    Ok(T::FRAC_1_SQRT_2() / osc.epsilon_g.sqrt() * half_phase(osc.epsilon, t).sin())
}

/// `⟨X⟩_t^α = (2ε_g^α)^{-1/2} sin(√ε_α t/2)`.
pub fn x_mean_beyond<T: Real>(params: &ModelParams<T>, t: T) -> Result<T> {
    require_beyond(params, "x_mean_beyond")?;
    let frame = params.beyond_critical_frame()?;
    Ok((T::cst(2.0) * frame.epsilon_g_alpha).sqrt().recip() * half_phase(frame.epsilon_alpha, t).sin())
}

/// `sin φ − φ cos φ` with `φ = √ε t/2`.
pub(crate) fn deriv_bracket<T: Real>(epsilon: T, t: T) -> T {
    let phi = half_phase(epsilon, t);
    phi.sin() - phi * phi.cos()
}

/// `∂_g⟨X⟩_t = (√2 ωg/(2(ω+4λ))) ε_g^{-3/2} [sin φ − φ cos φ]`.
pub fn x_deriv_g<T: Real>(params: &ModelParams<T>, t: T) -> Result<T> {
    require_normal(params, "x_deriv_g")?;
    let osc = params.effective_oscillator();
    Ok(T::FRAC_1_SQRT_2() * params.coupling_slope() * osc.epsilon_g.powf(T::cst(-1.5)) * deriv_bracket(osc.epsilon, t))
}

/// `⟨X²⟩_t = 1 + 4ω²g² ε⁻¹ sin²(√ε t/2)`.
pub fn x_second_moment<T: Real>(params: &ModelParams<T>, t: T) -> Result<T> {
    require_normal(params, "x_second_moment")?;
    let osc = params.effective_oscillator();
    let s = half_phase(osc.epsilon, t).sin();
    let wg = params.omega * params.g;
    Ok(T::one() + T::cst(4.0) * wg * wg / osc.epsilon * s * s)
}

/// `(ΔX)² = 1 + (1/(2ε_g) − 1) sin²(√ε t/2)`.
pub fn x_variance<T: Real>(params: &ModelParams<T>, t: T) -> Result<T> {
    require_normal(params, "x_variance")?;
    let osc = params.effective_oscillator();
    let s = half_phase(osc.epsilon, t).sin();
    Ok(T::one() + (T::cst(0.5) / osc.epsilon_g - T::one()) * s * s)
}

/// Inverted variance `I_g(t) = (∂_g⟨X⟩_t)²/(ΔX)²` in its explicit form
/// `ω²g²[sin φ − φ cos φ]² / ((ω+4λ)² ε_g³ [2 + (ε_g⁻¹ − 2) sin² φ])`.
pub fn inverted_variance<T: Real>(params: &ModelParams<T>, t: T) -> Result<T> {
    require_normal(params, "inverted_variance")?;
    let osc = params.effective_oscillator();
    let c = params.coupling_slope();
    let b = deriv_bracket(osc.epsilon, t);
    let s = half_phase(osc.epsilon, t).sin();
    let eg = osc.epsilon_g;
    Ok(c * c * b * b / (eg * eg * eg * (T::cst(2.0) + (eg.recip() - T::cst(2.0)) * s * s)))
}

/// All quadrature observables at time `t`.
pub fn quadrature_sample<T: Real>(params: &ModelParams<T>, t: T) -> Result<QuadratureSample<T>> {
    Ok(QuadratureSample {
        t,
        x_mean: x_mean(params, t)?,
        x_deriv_g: x_deriv_g(params, t)?,
        x_var: x_variance(params, t)?,
        inv_var: inverted_variance(params, t)?,
    })
}

/// Optimal read-out times `τ_n = 2nπ/√ε` for `n = 1..=n_max`.
pub fn optimal_times<T: Real>(params: &ModelParams<T>, n_max: usize) -> Result<Vec<T>> {
    require_normal(params, "optimal_times")?;
    if n_max == 0 {
        return Err(invalid("n_max", "must be at least 1"));
    }
    let root = params.effective_oscillator().epsilon.sqrt();
    Ok((1..=n_max)
        .map(|n| T::cst(2.0) * T::from_usize(n).unwrap() * T::PI() / root)
        .collect())
}

/// Single optimal time `τ_n`.
pub fn optimal_time<T: Real>(params: &ModelParams<T>, n: usize) -> Result<T> {
    require_normal(params, "optimal_time")?;
    let root = params.effective_oscillator().epsilon.sqrt();
    Ok(T::cst(2.0) * T::from_usize(n).unwrap() * T::PI() / root)
}

/// Peak inverted variance `I_g(τ_n) = n²π²ω²g²/(2(ω+4λ)²) · ε_g⁻³`.
pub fn inverted_variance_peak<T: Real>(params: &ModelParams<T>, n: usize) -> Result<T> {
    require_normal(params, "inverted_variance_peak")?;
    let eg = params.epsilon_g();
    let c = params.coupling_slope();
    let npi = T::from_usize(n).unwrap() * T::PI();
    Ok(npi * npi * c * c / (T::cst(2.0) * eg * eg * eg))
}

/// Scaling factor `I_g(τ_n)/F_g(τ_n) ≈ 1/(2 Var[P² − ε_g X²])`.
pub fn ig_fg_ratio<T: Real>(state: &BosonInitialState<T>, params: &ModelParams<T>) -> Result<T> {
    let wb2 = params.omega * (params.omega + T::cst(4.0) * params.lambda);
    let var = var_n(state, params)? / (wb2 * wb2 * wb2);
    Ok((T::cst(2.0) * var).recip())
}
