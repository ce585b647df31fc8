//! One-time-pad encryption.

use serde::Serialize;

use super::ledger::KeyRange;
use super::DuplexError;
use crate::bits::BitString;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CipherText {
    pub payload: BitString,
    pub key_range: KeyRange,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuthTag {
    pub tag: BitString,
    pub key_range: KeyRange,
}

pub fn otp_xor(key: &BitString, msg: &BitString) -> Result<BitString, DuplexError> {
    if key.len() != msg.len() {
        return Err(DuplexError::LengthMismatch {
            key: key.len(),
            msg: msg.len(),
        });
    }
    Ok(key.iter().zip(msg.iter()).map(|(k, m)| k ^ m).collect())
}
