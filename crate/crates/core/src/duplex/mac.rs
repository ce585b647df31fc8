//! One-time universal-hash MAC over GF(2^t).
//!
//! The message is split into `⌈L/t⌉` blocks `m_i` (last block zero-padded)
//! and the key into `⌈L/t⌉ + 1` blocks. The tag is
//! `m_1·k_1 + … + m_b·k_b + k_{b+1}` in GF(2^t): a multilinear hash masked by
//! the final key block. Any fixed change to the message shifts the tag by a
//! nonzero multiple of some uniform key block, so a forgery succeeds with
//! probability at most `2^-t`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MacError {
    #[error("tag length {0} unsupported (expected 8, 16, 32 or 64)")]
    TagLength(usize),
    #[error("MAC key must be {expected} bits, got {got}")]
    KeyLength { expected: usize, got: usize },
}

/// A supported tag length in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct TagLength(usize);

impl TagLength {
    pub const DEFAULT: TagLength = TagLength(32);

    pub fn new(bits: usize) -> Result<Self, MacError> {
        match bits {
            8 | 16 | 32 | 64 => Ok(Self(bits)),
            other => Err(MacError::TagLength(other)),
        }
    }

    pub fn bits(self) -> usize {
        self.0
    }

    /// Low-order terms of the reduction polynomial `x^t + …`.
    fn reduction(self) -> u64 {
        match self.0 {
            8 => 0x1b,  // x^8 + x^4 + x^3 + x + 1
            16 => 0x2b, // x^16 + x^5 + x^3 + x + 1
            32 => 0x8d, // x^32 + x^7 + x^3 + x^2 + 1
            64 => 0x1b, // x^64 + x^4 + x^3 + x + 1
            _ => unreachable!("validated in TagLength::new"),
        }
    }

    pub(crate) fn modulus(self) -> u128 {
        (1u128 << self.0) | u128::from(self.reduction())
    }
}

impl Default for TagLength {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl TryFrom<usize> for TagLength {
    type Error = MacError;

    fn try_from(bits: usize) -> Result<Self, Self::Error> {
        Self::new(bits)
    }
}

impl From<TagLength> for usize {
    fn from(t: TagLength) -> usize {
        t.0
    }
}

/// Carry-less product reduced modulo the field polynomial.
pub(crate) fn gf_mul(a: u64, b: u64, t: TagLength) -> u64 {
    let mut product: u128 = 0;
    for i in 0..64 {
        if (b >> i) & 1 == 1 {
            product ^= u128::from(a) << i;
        }
    }
    let modulus = t.modulus();
    let degree = t.bits();
    for bit in (degree..128).rev() {
        if (product >> bit) & 1 == 1 {
            product ^= modulus << (bit - degree);
        }
    }
    product as u64
}

/// Key bits consumed by one tag over an `msg_len`-bit message.
pub fn mac_key_demand(msg_len: usize, t: TagLength) -> usize {
    t.bits() * (msg_len.div_ceil(t.bits()) + 1)
}

fn block(bits: &BitString, i: usize, t: usize) -> u64 {
    let start = i * t;
    (0..t).fold(0u64, |acc, k| {
        (acc << 1) | u64::from(bits.get(start + k).unwrap_or(false))
    })
}

pub fn mac_tag(key: &BitString, msg: &BitString, t: TagLength) -> Result<BitString, MacError> {
    let expected = mac_key_demand(msg.len(), t);
    if key.len() != expected {
        return Err(MacError::KeyLength {
            expected,
            got: key.len(),
        });
    }
    let w = t.bits();
    let blocks = msg.len().div_ceil(w);
    let acc = (0..blocks).fold(0u64, |acc, i| acc ^ gf_mul(block(msg, i, w), block(key, i, w), t));
    let tag = acc ^ block(key, blocks, w);
    let mut out = BitString::with_capacity(w);
    out.push_uint(tag, w);
    Ok(out)
}

/// Recomputes the tag and compares.
pub fn verify_tag(key: &BitString, msg: &BitString, tag: &BitString, t: TagLength) -> Result<bool, MacError> {
    Ok(&mac_tag(key, msg, t)? == tag)
}
