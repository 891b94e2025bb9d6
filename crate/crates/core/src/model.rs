//! Model parameters and the derived scalars of the low-frequency reduction.
//!
//! The Hamiltonian is
//!
//! ```text
//! H = ω a†a + (Ω/2) σz + (√(ωΩ)/2) g (a + a†) σx + λ (a + a†)²
//! ```
//!
//! A squeeze with `r = ¼ ln(1 + 4λ/ω)` removes the quadratic term and
//! renormalizes the boson frequency to `ω̄ = √(ω² + 4λω)`. In the limit
//! `Ω/ω → ∞` the spin-down sector reduces to the oscillator
//! `H_np = (ω̄/2)(P² + ε_g X²)` with stiffness `ε_g = 1 − ωg²/(ω + 4λ)`,
//! which softens at `g_c = √(1 + 4λ/ω)`.
//!
//! Every formula keeps `ω` explicit; all of them are dimensionally
//! consistent, so callers may pick any unit of energy.

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Tolerance on `ε_g` below which the oscillator is classified as critical.
pub const REGIME_TOL: f64 = 1e-12;

/// Parameters `(ω, Ω, g, λ)` of the Rabi model with a quadratic term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    /// Boson frequency ω.
    pub omega: T,
    /// Qubit splitting Ω.
    pub qubit_omega: T,
    /// Normalized coupling g.
    pub g: T,
    /// Strength λ of the quadratic term λ(a + a†)².
    pub lambda: T,
}

/// Which side of the critical point a parameter set lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Normal,
    Critical,
    Superradiant,
}

/// The effective oscillator `H_np = (ω̄/2)(P² + ε_g X²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveOscillator<T> {
    /// Renormalized frequency ω̄ = √(ω² + 4λω).
    pub omega_bar: T,
    /// Stiffness ε_g = 1 − ωg²/(ω + 4λ).
    pub epsilon_g: T,
    /// Gap parameter ε = 4ω̄²ε_g; the oscillator frequency is √ε/2.
    pub epsilon: T,
    pub regime: Regime,
}

/// Displaced and spin-rotated frame used beyond the critical point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeyondCriticalFrame<T> {
    /// Displacement amplitude α of the boson mode.
    pub alpha: T,
    /// Spin rotation angle θ ∈ [0, π/4).
    pub theta: T,
    /// Rotated qubit splitting Ω_α = Ωωg²/(ω + 4λ).
    pub omega_alpha: T,
    /// Rotated coupling g_α = g⁻²(1 + 4λ/ω)^{3/2}.
    pub g_alpha: T,
    /// Stiffness ε_g^α = 1 − ((ω + 4λ)/(ωg²))².
    pub epsilon_g_alpha: T,
    /// Gap parameter ε_α = 4ω(ω + 4λ)ε_g^α.
    pub epsilon_alpha: T,
}

impl<T: Real> ModelParams<T> {
    /// Builds and validates a parameter set.
    pub fn new(omega: T, qubit_omega: T, g: T, lambda: T) -> Result<Self> {
        Self {
            omega,
            qubit_omega,
            g,
            lambda,
        }
        .validate()
    }

    /// Returns `self` unchanged when every invariant holds.
    pub fn validate(self) -> Result<Self> {
        for (field, v) in [
            ("omega", self.omega),
            ("qubit_omega", self.qubit_omega),
            ("g", self.g),
            ("lambda", self.lambda),
        ] {
            if !v.is_finite() {
                return Err(invalid(field, format!("must be finite, got {v}")));
            }
        }
        if self.omega <= T::zero() {
            return Err(invalid("omega", format!("must be positive, got {}", self.omega)));
        }
        if self.qubit_omega <= T::zero() {
            return Err(invalid(
                "qubit_omega",
                format!("must be positive, got {}", self.qubit_omega),
            ));
        }
        if self.g < T::zero() {
            return Err(invalid("g", format!("must be non-negative, got {}", self.g)));
        }
        if self.stiffness_ratio() <= T::zero() {
            return Err(invalid(
                "lambda",
                format!(
                    "1 + 4λ/ω = {} must be positive (unphysical squeeze)",
                    self.stiffness_ratio()
                ),
            ));
        }
        Ok(self)
    }

    /// Copy with a different coupling.
    pub fn with_g(self, g: T) -> Self {
        Self { g, ..self }
    }

    /// Copy with a different quadratic strength.
    pub fn with_lambda(self, lambda: T) -> Self {
        Self { lambda, ..self }
    }

    /// Copy with the qubit splitting set to `eta · ω`.
    pub fn with_frequency_ratio(self, eta: T) -> Self {
        Self {
            qubit_omega: eta * self.omega,
            ..self
        }
    }

    /// Frequency ratio η = Ω/ω.
    pub fn frequency_ratio(&self) -> T {
        self.qubit_omega / self.omega
    }

    /// `1 + 4λ/ω`, the factor by which the quadratic term stiffens the mode.
    pub fn stiffness_ratio(&self) -> T {
        T::one() + T::cst(4.0) * self.lambda / self.omega
    }

    /// Squeezing parameter r = ¼ ln(1 + 4λ/ω).
    pub fn squeeze_parameter(&self) -> T {
        self.stiffness_ratio().ln() / T::cst(4.0)
    }

    /// Critical coupling g_c = √(1 + 4λ/ω).
    pub fn critical_coupling(&self) -> T {
        self.stiffness_ratio().sqrt()
    }

    /// Renormalized frequency ω̄ = √(ω² + 4λω).
    pub fn omega_bar(&self) -> T {
        (self.omega * (self.omega + T::cst(4.0) * self.lambda)).sqrt()
    }

    /// `ωg/(ω + 4λ)`, equal to `−½ ∂ε_g/∂g`.
    pub fn coupling_slope(&self) -> T {
        self.omega * self.g / (self.omega + T::cst(4.0) * self.lambda)
    }

    /// `∂ε_g/∂g = −2ωg/(ω + 4λ)`.
    pub fn d_epsilon_g_dg(&self) -> T {
        -T::cst(2.0) * self.coupling_slope()
    }

    /// Stiffness ε_g = 1 − ωg²/(ω + 4λ).
    pub fn epsilon_g(&self) -> T {
        T::one() - self.coupling_slope() * self.g
    }

    pub fn regime(&self) -> Regime {
        classify(self.epsilon_g())
    }

    pub fn effective_oscillator(&self) -> EffectiveOscillator<T> {
        let omega_bar = self.omega_bar();
        let epsilon_g = self.epsilon_g();
        EffectiveOscillator {
            omega_bar,
            epsilon_g,
            epsilon: T::cst(4.0) * omega_bar * omega_bar * epsilon_g,
            regime: classify(epsilon_g),
        }
    }

    /// `ε_g^α = 1 − ((ω + 4λ)/(ωg²))²`, defined for any g > 0.
    pub fn epsilon_g_alpha(&self) -> T {
        let q = (self.omega + T::cst(4.0) * self.lambda) / (self.omega * self.g * self.g);
        T::one() - q * q
    }

    /// `∂ε_g^α/∂g = 4(1 − ε_g^α)/g`.
    pub fn d_epsilon_g_alpha_dg(&self) -> T {
        T::cst(4.0) * (T::one() - self.epsilon_g_alpha()) / self.g
    }

    /// Frame of the displaced, spin-rotated Hamiltonian for `g > g_c`.
    ///
    /// The displacement is the minimum of the semiclassical energy
    /// `ω̄α² − √(Ω²/4 + 4c²α²)` with `c = (√(ωΩ)/2) g (1 + 4λ/ω)^{-1/4}`,
    /// i.e. `4α² = (Ω/ω) g⁻² (1 + 4λ/ω)^{-3/2} [g⁴ − (1 + 4λ/ω)²]`. This is
    /// the value for which the rotated splitting equals `Ωωg²/(ω + 4λ)`.
    pub fn beyond_critical_frame(&self) -> Result<BeyondCriticalFrame<T>> {
        let g_c = self.critical_coupling();
        if !(self.g > g_c) {
            return Err(Error::NotInSuperradiantRegime {
                g: self.g.as_f64(),
                g_c: g_c.as_f64(),
            });
        }
        let s = self.stiffness_ratio();
        let g2 = self.g * self.g;
        let eta = self.frequency_ratio();
        let four_alpha_sq = eta / g2 * s.powf(T::cst(-1.5)) * (g2 * g2 - s * s);
        let alpha = (four_alpha_sq / T::cst(4.0)).sqrt();
        let tan_2theta = T::cst(2.0) * self.g * alpha * (self.omega / self.qubit_omega).sqrt() * s.powf(T::cst(-0.25));
        let theta = tan_2theta.atan() / T::cst(2.0);
        let epsilon_g_alpha = self.epsilon_g_alpha();
        Ok(BeyondCriticalFrame {
            alpha,
            theta,
            omega_alpha: self.qubit_omega * self.omega * g2 / (self.omega + T::cst(4.0) * self.lambda),
            g_alpha: s.powf(T::cst(1.5)) / g2,
            epsilon_g_alpha,
            epsilon_alpha: T::cst(4.0) * self.omega * (self.omega + T::cst(4.0) * self.lambda) * epsilon_g_alpha,
        })
    }
}

/// Quadratic strength that places the critical point at `g_target`:
/// `λ_c = (g_target² − 1) ω/4`.
pub fn lambda_for_target_critical<T: Real>(g_target: T, omega: T) -> Result<T> {
    if !(g_target > T::zero()) || !g_target.is_finite() {
        return Err(invalid("g_target", format!("must be positive, got {g_target}")));
    }
    if !(omega > T::zero()) || !omega.is_finite() {
        return Err(invalid("omega", format!("must be positive, got {omega}")));
    }
    Ok((g_target * g_target - T::one()) * omega / T::cst(4.0))
}

/// Classifies a stiffness value with the tolerance [`REGIME_TOL`].
pub fn classify<T: Real>(epsilon_g: T) -> Regime {
    let tol = T::cst(REGIME_TOL);
    if epsilon_g > tol {
        Regime::Normal
    } else if epsilon_g < -tol {
        Regime::Superradiant
    } else {
        Regime::Critical
    }
}
