use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the physics layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid probability weights (w0={w0}, w1={w1}): need w0,w1 >= 0 and w0+w1 = 1")]
    WeightDomain { w0: f64, w1: f64 },

    #[error("Bloch vector length {norm} exceeds 1")]
    BlochOutOfRange { norm: f64 },

    #[error("{what} is not a valid {kind}: {reason}")]
    InvalidValue {
        what: &'static str,
        kind: &'static str,
        reason: String,
    },

    #[error("field is zero; a pi-pulse needs a nonzero field")]
    ZeroField,

    #[error("step count {steps} is too small (need at least 2)")]
    StepCount { steps: usize },

    #[error("evolution is not cyclic for this state: |<initial|final>| = {overlap:.3e}")]
    NotCyclic { overlap: f64 },

    #[error("adiabaticity violated: population leakage {leakage:.3e} exceeds {limit:.1e}")]
    Adiabaticity { leakage: f64, limit: f64 },

    #[error("{name} = {value} outside the domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("detuning {name} = {value} meV must be positive (off-resonant, below band gap)")]
    DetuningDomain { name: &'static str, value: f64 },

    #[error("g-factor must be nonzero")]
    ZeroGFactor,

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}
