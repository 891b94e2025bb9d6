//! Open-system dynamics of the effective oscillator under decay (rate γ_a)
//! and heating (rate γ_h), through the closed system of first and second
//! moments of `X`, `P` and `G = XP + PX`.

use crate::closed_form::{self, BosonInitialState, QuadratureSample};
use crate::error::{invalid, Error, Result};
use crate::model::{ModelParams, Regime};
use crate::scalar::Real;

/// Decay and heating rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates<T> {
    pub gamma_a: T,
    pub gamma_h: T,
}

impl<T: Real> DecayRates<T> {
    pub fn new(gamma_a: T, gamma_h: T) -> Result<Self> {
        if !(gamma_a >= T::zero()) || !gamma_a.is_finite() {
            return Err(invalid(
                "gamma_a",
                format!("must be finite and non-negative, got {gamma_a}"),
            ));
        }
        if !(gamma_h >= T::zero()) || !gamma_h.is_finite() {
            return Err(invalid(
                "gamma_h",
                format!("must be finite and non-negative, got {gamma_h}"),
            ));
        }
        Ok(Self { gamma_a, gamma_h })
    }

    /// Rates from `γ_+ = γ_a + γ_h` and `γ_− = γ_a − γ_h`.
    pub fn from_sum_difference(gamma_plus: T, gamma_minus: T) -> Result<Self> {
        let two = T::cst(2.0);
        Self::new((gamma_plus + gamma_minus) / two, (gamma_plus - gamma_minus) / two)
    }

    pub fn zero() -> Self {
        Self {
            gamma_a: T::zero(),
            gamma_h: T::zero(),
        }
    }

    pub fn gamma_plus(&self) -> T {
        self.gamma_a + self.gamma_h
    }

    pub fn gamma_minus(&self) -> T {
        self.gamma_a - self.gamma_h
    }
}

/// `(⟨X⟩, ⟨P⟩, ⟨X²⟩, ⟨P²⟩, ⟨G⟩)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentVector<T> {
    pub x: T,
    pub p: T,
    pub xx: T,
    pub pp: T,
    pub gg: T,
}

impl<T: Real> MomentVector<T> {
    pub fn new(x: T, p: T, xx: T, pp: T, gg: T) -> Self {
        Self { x, p, xx, pp, gg }
    }

    /// Exact moments of a Fock-space state.
    pub fn from_boson_state(state: &BosonInitialState<T>) -> Self {
        let c = state.padded(state.amplitudes().len() + 2);
        let half = T::cst(0.5);
        let (mut a1_re, mut a1_im) = (T::zero(), T::zero());
        let (mut a2_re, mut a2_im) = (T::zero(), T::zero());
        let mut number_half = T::zero();
        for n in 0..c.len() {
            number_half = number_half + half * T::from_usize(2 * n + 1).unwrap() * c[n].norm_sqr();
            if n + 1 < c.len() {
                let v = c[n].conj() * c[n + 1] * T::from_usize(n + 1).unwrap().sqrt();
                a1_re = a1_re + v.re;
                a1_im = a1_im + v.im;
            }
            if n + 2 < c.len() {
                let v = c[n].conj() * c[n + 2] * T::from_usize((n + 1) * (n + 2)).unwrap().sqrt();
                a2_re = a2_re + v.re;
                a2_im = a2_im + v.im;
            }
        }
        let root2 = T::SQRT_2();
        Self {
            x: root2 * a1_re,
            p: root2 * a1_im,
            xx: number_half + a2_re,
            pp: number_half - a2_re,
            gg: T::cst(2.0) * a2_im,
        }
    }

    pub fn to_array(self) -> [T; 5] {
        [self.x, self.p, self.xx, self.pp, self.gg]
    }

    pub fn from_array(a: [T; 5]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4])
    }

    pub fn x_variance(&self) -> T {
        self.xx - self.x * self.x
    }

    pub fn p_variance(&self) -> T {
        self.pp - self.p * self.p
    }

    /// `G̃ = ⟨G⟩ − 2⟨X⟩⟨P⟩`, twice the symmetrized covariance.
    pub fn covariance(&self) -> T {
        self.gg - T::cst(2.0) * self.x * self.p
    }

    /// `(ΔX)²(ΔP)² − (G̃/2)²`, at least ¼ for a physical state.
    pub fn uncertainty_determinant(&self) -> T {
        let c = self.covariance() / T::cst(2.0);
        self.x_variance() * self.p_variance() - c * c
    }

    /// Positivity of both variances and the Robertson–Schrödinger bound.
    pub fn is_physical(&self) -> bool {
        let slack = T::cst(1e-10);
        self.x_variance() >= -slack
            && self.p_variance() >= -slack
            && self.uncertainty_determinant() >= T::cst(0.25) * (T::one() - T::cst(1e-8))
    }

    fn axpy(self, a: T, other: Self) -> Self {
        Self::new(
            self.x + a * other.x,
            self.p + a * other.p,
            self.xx + a * other.xx,
            self.pp + a * other.pp,
            self.gg + a * other.gg,
        )
    }
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

/// Coefficients of the moment system: `(ω̄, ε/(4ω̄), γ_−, γ_+)`.
fn coefficients<T: Real>(params: &ModelParams<T>, rates: &DecayRates<T>) -> (T, T, T, T) {
    let osc = params.effective_oscillator();
    (
        osc.omega_bar,
        osc.epsilon / (T::cst(4.0) * osc.omega_bar),
        rates.gamma_minus(),
        rates.gamma_plus(),
    )
}

fn rhs_with<T: Real>(m: &MomentVector<T>, (wb, k, gm, gp): (T, T, T, T)) -> MomentVector<T> {
    let half = T::cst(0.5);
    let two = T::cst(2.0);
    MomentVector {
        x: wb * m.p - half * gm * m.x,
        p: -k * m.x - half * gm * m.p,
        xx: -gm * m.xx + wb * m.gg + half * gp,
        pp: -gm * m.pp - k * m.gg + half * gp,
        gg: -gm * m.gg + two * wb * m.pp - two * k * m.xx,
    }
}

/// Time derivative of the moments under `H_np` and the two dissipators.
pub fn moment_rhs<T: Real>(
    m: &MomentVector<T>,
    params: &ModelParams<T>,
    rates: &DecayRates<T>,
) -> Result<MomentVector<T>> {
    require_normal(params, "moment_rhs")?;
    Ok(rhs_with(m, coefficients(params, rates)))
}

/// Moments at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSample<T> {
    pub t: T,
    pub moments: MomentVector<T>,
}

/// Initial RK4 step in units of the fastest rate.
pub const INITIAL_STEP_FRACTION: f64 = 0.05;
/// Accepted change, relative to each moment's scale, when the step is halved.
pub const STEP_HALVING_TOL: f64 = 1e-8;
/// Number of step halvings attempted before giving up.
pub const MAX_STEP_HALVINGS: usize = 12;

fn rk4_track<T: Real>(m0: MomentVector<T>, coeffs: (T, T, T, T), grid: &[T], h_max: T) -> Vec<MomentSample<T>> {
    let mut out = Vec::with_capacity(grid.len());
    let mut m = m0;
    let mut t_prev = grid[0];
    out.push(MomentSample { t: t_prev, moments: m });
    let half = T::cst(0.5);
    let sixth = T::cst(1.0 / 6.0);
    for &t in &grid[1..] {
        let span = t - t_prev;
        let steps = (span / h_max).ceil().to_usize().unwrap_or(1).max(1);
        let h = span / T::from_usize(steps).unwrap();
        for _ in 0..steps {
            let k1 = rhs_with(&m, coeffs);
            let k2 = rhs_with(&m.axpy(half * h, k1), coeffs);
            let k3 = rhs_with(&m.axpy(half * h, k2), coeffs);
            let k4 = rhs_with(&m.axpy(h, k3), coeffs);
            m = m
                .axpy(sixth * h, k1)
                .axpy(T::cst(2.0) * sixth * h, k2)
                .axpy(T::cst(2.0) * sixth * h, k3)
                .axpy(sixth * h, k4);
        }
        out.push(MomentSample { t, moments: m });
        t_prev = t;
    }
    out
}

/// Largest change of any moment between two tracks, relative to that
/// moment's largest magnitude along the track.
fn track_change<T: Real>(a: &[MomentSample<T>], b: &[MomentSample<T>]) -> T {
    let mut worst = T::zero();
    for k in 0..5 {
        let mut scale = T::zero();
        let mut diff = T::zero();
        for (sa, sb) in a.iter().zip(b) {
            let (va, vb) = (sa.moments.to_array()[k], sb.moments.to_array()[k]);
            scale = scale.max(vb.abs());
            diff = diff.max((va - vb).abs());
        }
        if scale > T::zero() {
            worst = worst.max(diff / scale);
        }
    }
    worst
}

/// Classical fourth-order Runge–Kutta integration of the moment system onto
/// `t_grid`.
///
/// The step starts at `0.05 / max(ω̄, √ε, γ_+)` and is halved until halving it
/// once more changes every moment by less than `1e-8` of its scale; the finer
/// track is returned.
pub fn integrate_moments<T: Real>(
    m0: &MomentVector<T>,
    params: &ModelParams<T>,
    rates: &DecayRates<T>,
    t_grid: &[T],
) -> Result<Vec<MomentSample<T>>> {
    require_normal(params, "integrate_moments")?;
    if t_grid.is_empty() {
        return Err(Error::InvalidGrid("time grid is empty".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid(
            "times must be finite and strictly increasing".into(),
        ));
    }
    let coeffs = coefficients(params, rates);
    let osc = params.effective_oscillator();
    let rate = osc.omega_bar.max(osc.epsilon.sqrt()).max(rates.gamma_plus());
    let mut h = T::cst(INITIAL_STEP_FRACTION) / rate;
    let mut coarse = rk4_track(*m0, coeffs, t_grid, h);
    let mut change = T::infinity();
    for _ in 0..MAX_STEP_HALVINGS {
        h = h / T::cst(2.0);
        let fine = rk4_track(*m0, coeffs, t_grid, h);
        change = track_change(&coarse, &fine);
        if change < T::cst(STEP_HALVING_TOL) {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::StepUnstable {
        step: h.as_f64(),
        change: change.as_f64(),
    })
}

fn require_closed_form_rates<T: Real>(rates: &DecayRates<T>) -> Result<()> {
    if rates.gamma_minus() < T::zero() {
        return Err(invalid(
            "gamma_minus",
            format!(
                "the dissipative closed forms need γ_a ≥ γ_h, got γ_− = {}",
                rates.gamma_minus()
            ),
        ));
    }
    Ok(())
}

fn damping<T: Real>(rates: &DecayRates<T>, t: T) -> T {
    (-rates.gamma_minus() * t / T::cst(2.0)).exp()
}

/// `⟨X⟩_t = (√2/2) ε_g^{-1/2} sin(√ε t/2) e^{−γ_− t/2}`.
pub fn x_mean_dissipative<T: Real>(params: &ModelParams<T>, rates: &DecayRates<T>, t: T) -> Result<T> {
    require_closed_form_rates(rates)?;
    Ok(closed_form::x_mean(params, t)? * damping(rates, t))
}

/// `∂_g⟨X⟩_t` of the closed system times `e^{−γ_− t/2}`; the rates do not
/// depend on g.
pub fn x_deriv_g_dissipative<T: Real>(params: &ModelParams<T>, rates: &DecayRates<T>, t: T) -> Result<T> {
    require_closed_form_rates(rates)?;
    Ok(closed_form::x_deriv_g(params, t)? * damping(rates, t))
}

/// `(e^{γt} − 1)/γ`, equal to `t` at `γ = 0`.
fn growth<T: Real>(gamma: T, t: T) -> T {
    if gamma == T::zero() {
        t
    } else {
        (gamma * t).exp_m1() / gamma
    }
}

/// Closed-form `(ΔX)²` under decoherence:
///
/// ```text
/// ¼ { 2 + 1/ε_g + A + γ_+(2γ_−² + ε + 4ω̄²)(e^{γ_− t} − 1)/(γ_−(γ_−² + ε))
///     + [2 − 1/ε_g − A] cos(√ε t) − 4ω²g²γ_+ sin(√ε t)/(√ε(γ_−² + ε)) } e^{−γ_− t}
/// ```
///
/// with `A = γ_−γ_+(ε − 4ω̄²)/(ε(γ_−² + ε))`.
pub fn x_variance_dissipative<T: Real>(params: &ModelParams<T>, rates: &DecayRates<T>, t: T) -> Result<T> {
    require_normal(params, "x_variance_dissipative")?;
    require_closed_form_rates(rates)?;
    let osc = params.effective_oscillator();
    let (eps, eg, wb2) = (osc.epsilon, osc.epsilon_g, osc.omega_bar * osc.omega_bar);
    let (gm, gp) = (rates.gamma_minus(), rates.gamma_plus());
    let four = T::cst(4.0);
    let two = T::cst(2.0);
    let root = eps.sqrt();
    let denom = gm * gm + eps;
    let a = gm * gp * (eps - four * wb2) / (eps * denom);
    let wg = params.omega * params.g;
    let braces = two
        + eg.recip()
        + a
        + gp * (two * gm * gm + eps + four * wb2) / denom * growth(gm, t)
        + (two - eg.recip() - a) * (root * t).cos()
        - four * wg * wg * gp / (root * denom) * (root * t).sin();
    Ok(braces * (-gm * t).exp() / four)
}

/// `I_g(t) = (∂_g⟨X⟩_t)²/(ΔX)²` under decoherence.
pub fn inverted_variance_dissipative<T: Real>(params: &ModelParams<T>, rates: &DecayRates<T>, t: T) -> Result<T> {
    let d = x_deriv_g_dissipative(params, rates, t)?;
    Ok(d * d / x_variance_dissipative(params, rates, t)?)
}

/// All dissipative quadrature observables at time `t`.
pub fn dissipative_sample<T: Real>(
    params: &ModelParams<T>,
    rates: &DecayRates<T>,
    t: T,
) -> Result<QuadratureSample<T>> {
    let x_deriv_g = x_deriv_g_dissipative(params, rates, t)?;
    let x_var = x_variance_dissipative(params, rates, t)?;
    Ok(QuadratureSample {
        t,
        x_mean: x_mean_dissipative(params, rates, t)?,
        x_deriv_g,
        x_var,
        inv_var: x_deriv_g * x_deriv_g / x_var,
    })
}
