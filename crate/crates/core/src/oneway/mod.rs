//! Two-step EPR-pair direct communication from Alice to Bob.
//!
//! Alice prepares ordered Bell pairs and sends one particle of each to Bob.
//! A random sample is checked in random Z/X bases. Alice then dense-codes two
//! bits per remaining pair on the particles she kept, sends those, and Bob
//! recovers the bits by Bell-state measurement. Decoy pairs with labels
//! revealed only after Bob's measurements audit the second transmission.

mod config;
mod protocol;

use thiserror::Error;

pub use config::{ConfigError, DecodeTable, EncodeTable, OnewayParams, RoleCounts, SessionConfig};
pub use protocol::{
    bell_decode, encode_message, prepare_pairs, run_check1, run_check2, run_oneway, BasisTally, CheckReport,
    CheckRound, OnewayOutcome, OnewayStatus, PairRecord, PairRole, HOME_SLOT, TRAVEL_SLOT,
};

use crate::adversary::AdversaryError;
use crate::quantum::QuantumError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OnewayError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("message must be {expected} bits, got {got}")]
    MessageLength { expected: usize, got: usize },
    #[error("{0:?} check round has no samples")]
    DegenerateCheck(CheckRound),
    #[error("decoy at position {0} was never decoded")]
    UndecodedDecoy(usize),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}
