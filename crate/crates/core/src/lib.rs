//! Critical quantum metrology in the quantum Rabi model with a quadratic
//! bosonic term `λ(a + a†)²`.
//!
//! Two engines answer the same questions. [`closed_form`] evaluates the
//! analytic results of the low-frequency effective oscillator;
//! [`fock`] computes the same quantities exactly in a truncated Fock space.
//! [`lindblad`] adds decay and heating through the moment equations.
//!
//! Everything is generic over the scalar type; the aliases below fix it to
//! `f64`.

// `!(x < bound)` rejects NaN together with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod error;
pub mod fock;
pub mod lindblad;
pub mod model;
pub mod scalar;
pub mod series;

pub use error::{Error, Result};
pub use model::{classify, lambda_for_target_critical, Regime, REGIME_TOL};
pub use scalar::{Real, SpectralScalar};
pub use series::Engine;

/// Version of this crate, recorded in experiment metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Params = model::ModelParams<f64>;
pub type EffectiveOscillator = model::EffectiveOscillator<f64>;
pub type BeyondCriticalFrame = model::BeyondCriticalFrame<f64>;
pub type BosonState = closed_form::BosonInitialState<f64>;
pub type QfiSample = closed_form::QfiSample<f64>;
pub type QuadratureSample = closed_form::QuadratureSample<f64>;
pub type JointState = fock::JointState<f64>;
pub type HermitianOperator = fock::HermitianOperator<f64>;
pub type Spectrum = fock::Spectrum<f64>;
pub type DecayRates = lindblad::DecayRates<f64>;
pub type MomentVector = lindblad::MomentVector<f64>;
pub type MomentSample = lindblad::MomentSample<f64>;
pub type TimeSeries = series::TimeSeries<f64>;
