use crate::model::Regime;

/// Errors raised by the model, the closed-form engine, the Fock-space oracle
/// and the moment integrator.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("g = {g} is not beyond the critical coupling g_c = {g_c}")]
    NotInSuperradiantRegime { g: f64, g_c: f64 },

    #[error("{operation} requires the {expected:?} regime but epsilon_g = {epsilon_g} ({found:?})")]
    Regime {
        operation: &'static str,
        expected: Regime,
        found: Regime,
        epsilon_g: f64,
    },

    #[error("Fock cutoff too small: {reason}")]
    CutoffTooSmall { reason: String },

    #[error("truncation leak at n_cut = {n_cut}: tail mass {tail:e} exceeds {threshold:e}")]
    TruncationLeak { n_cut: usize, tail: f64, threshold: f64 },

    #[error("observables did not converge up to n_cut = {max_cut} (last relative change {last_change:e})")]
    CutoffNotConverged { max_cut: usize, last_change: f64 },

    #[error("finite-difference step {step:e} too large: {reason}")]
    StepTooLarge { step: f64, reason: String },

    #[error("integration step {step:e} unstable: halving changed results by {change:e}")]
    StepUnstable { step: f64, change: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state not normalized: squared norm {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("operator is not Hermitian: residual {residual:e}")]
    NotHermitian { residual: f64 },

    #[error("operator couples blocks that the Hamiltonian keeps separate")]
    BlockMismatch,

    #[error("spectral decomposition needs a real symmetric operator")]
    ComplexOperator,

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParams {
        field,
        reason: reason.into(),
    }
}
