//! Consume-once key store.

use serde::{Deserialize, Serialize};

use super::DuplexError;
use crate::bits::BitString;

/// Half-open cursor interval `[start, end)` of issued key bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct KeyRange {
    pub start: usize,
    pub end: usize,
}

impl KeyRange {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn overlaps(&self, other: &KeyRange) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Key bits shared between the two endpoints of one delivery.
///
/// Bits are issued strictly in order through [`KeyLedger::take`]; the cursor
/// only moves forward, so no interval can be handed out twice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KeyLedger {
    bits: BitString,
    consumed_upto: usize,
    provenance: u64,
    issued: Vec<KeyRange>,
}

impl KeyLedger {
    pub(crate) fn from_bits(bits: BitString, provenance: u64) -> Self {
        Self {
            bits,
            consumed_upto: 0,
            provenance,
            issued: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn consumed_upto(&self) -> usize {
        self.consumed_upto
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.consumed_upto
    }

    pub fn provenance(&self) -> u64 {
        self.provenance
    }

    pub fn issued(&self) -> &[KeyRange] {
        &self.issued
    }

    /// Raw key material, for comparing the two endpoints.
    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    /// Issues the next `n` bits.
    pub fn take(&mut self, n: usize) -> Result<(BitString, KeyRange), DuplexError> {
        if n > self.remaining() {
            return Err(DuplexError::KeyExhausted {
                requested: n,
                remaining: self.remaining(),
            });
        }
        let range = KeyRange {
            start: self.consumed_upto,
            end: self.consumed_upto + n,
        };
        self.consumed_upto = range.end;
        if n > 0 {
            self.issued.push(range);
        }
        Ok((self.bits.slice(range.start, range.end), range))
    }
}

/// Ledger over the bits of a delivered one-way session.
pub fn ledger_from_delivery(delivered: &BitString, session_id: u64) -> Result<KeyLedger, DuplexError> {
    if delivered.is_empty() {
        return Err(DuplexError::EmptyKey);
    }
    Ok(KeyLedger::from_bits(delivered.clone(), session_id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use proptest::prelude::*;

    #[test]
    fn construct() {
        let l = ledger_from_delivery(&bits("1011"), 9).unwrap();
        assert_eq!((l.len(), l.consumed_upto(), l.provenance()), (4, 0, 9));
        assert_eq!(ledger_from_delivery(&BitString::new(), 9), Err(DuplexError::EmptyKey));
    }

    #[test]
    fn take_sequence() {
        let mut l = ledger_from_delivery(&bits("1011"), 0).unwrap();
        let (k, r) = l.take(2).unwrap();
        assert_eq!((k, r), (bits("10"), KeyRange { start: 0, end: 2 }));
        assert_eq!(
            l.take(3),
            Err(DuplexError::KeyExhausted {
                requested: 3,
                remaining: 2
            })
        );
        assert_eq!(l.consumed_upto(), 2);
        let (k, _) = l.take(0).unwrap();
        assert!(k.is_empty());
        assert_eq!(l.consumed_upto(), 2);
        assert_eq!(l.take(2).unwrap().0, bits("11"));
        assert_eq!(l.issued().len(), 2);
    }

    proptest! {
        #[test]
        fn issued_ranges_disjoint(len in 1usize..200, demands in proptest::collection::vec(0usize..40, 0..30)) {
            let mut l = ledger_from_delivery(&BitString::zeros(len), 1).unwrap();
            let mut supplied = 0;
            for d in demands {
                let before = l.consumed_upto();
                match l.take(d) {
                    Ok((k, r)) => {
                        prop_assert!(supplied + d <= len);
                        prop_assert_eq!(k.len(), d);
                        prop_assert_eq!(r.start, before);
                        supplied += d;
                    }
                    Err(DuplexError::KeyExhausted { .. }) => {
                        prop_assert!(supplied + d > len);
                        prop_assert_eq!(l.consumed_upto(), before);
                    }
                    Err(e) => return Err(TestCaseError::fail(e.to_string())),
                }
            }
            let issued = l.issued();
            for (i, a) in issued.iter().enumerate() {
                for b in &issued[i + 1..] {
                    prop_assert!(!a.overlaps(b));
                }
            }
        }

        #[test]
        fn exhaustion_boundary(len in 1usize..500) {
            let mut exact = ledger_from_delivery(&BitString::zeros(len), 1).unwrap();
            prop_assert!(exact.take(len).is_ok());
            prop_assert_eq!(exact.remaining(), 0);
            let mut over = ledger_from_delivery(&BitString::zeros(len), 1).unwrap();
            prop_assert_eq!(
                over.take(len + 1),
                Err(DuplexError::KeyExhausted { requested: len + 1, remaining: len })
            );
        }
    }
}
