//! Exact pure-state simulation of up to three qubits.
//!
//! Qubit 0 is always the most significant bit of a basis index. States that
//! differ only by a global phase are compared through
//! [`PureState::phase_normalized`] or through their outcome distributions.

mod gates;
mod measure;
pub mod oracle;
mod state;

use thiserror::Error;

pub use gates::{apply_pauli, bell_state, BellKind, PauliCode};
pub use measure::{measure_bell_pair, measure_qubit, MeasBasis};
pub use oracle::{outcome_distribution, OutcomeDistribution, PlanStep};
pub use state::{Amplitude, PureState, MAX_QUBITS, NORM_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("qubit slot {slot} out of range for a {n_qubits}-qubit state")]
    InvalidSlot { slot: usize, n_qubits: usize },
    #[error("Bell basis requires a qubit pair")]
    InvalidBasis,
    #[error("invalid measurement plan: {0}")]
    InvalidPlan(String),
    #[error("unsupported qubit count {0}")]
    QubitCount(usize),
    #[error("expected {expected} amplitudes, got {got}")]
    AmplitudeCount { expected: usize, got: usize },
    #[error("amplitude is not finite")]
    NonFinite,
    #[error("state norm {0} is not 1")]
    NotNormalized(f64),
}
