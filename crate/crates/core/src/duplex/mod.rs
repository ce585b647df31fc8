//! Two-way communication from a single one-way device.
//!
//! Bits Alice delivers over the quantum link are known to both parties, so
//! they double as a one-time pad for Bob's reply, which then travels over the
//! public classical channel. [`KeyLedger`] enforces single use of every key
//! bit; an optional one-time MAC authenticates the reply.

mod ledger;
mod mac;
mod otp;
mod session;

use thiserror::Error;

pub use ledger::{ledger_from_delivery, KeyLedger, KeyRange};
pub use mac::{mac_key_demand, mac_tag, verify_tag, MacError, TagLength};
pub use otp::{otp_xor, AuthTag, CipherText};
pub use session::{reply_key_mode, run_duplex, DuplexConfig, DuplexOutcome, DuplexPlan, DuplexStatus, PaddingPolicy};

use crate::oneway::{ConfigError, OnewayError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DuplexError {
    #[error("delivery carried no key bits")]
    EmptyKey,
    #[error("key exhausted: {requested} bits requested, {remaining} remaining")]
    KeyExhausted { requested: usize, remaining: usize },
    #[error("key is {key} bits but message is {msg}")]
    LengthMismatch { key: usize, msg: usize },
    #[error("{which} must be {expected} bits, got {got}")]
    MessageLength {
        which: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("reply needs {needed} key bits but padding is forbidden and m_a has {available}")]
    PaddingForbidden { needed: usize, available: usize },
    #[error("both messages are empty")]
    NothingToSend,
    #[error(transparent)]
    Mac(#[from] MacError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Oneway(#[from] OnewayError),
}
