//! Simulated quantum and public classical channels.

use rand::Rng;
use serde::Serialize;

use crate::adversary::{
    attack_second_sequence, attack_travel, AdversaryError, EveEntry, EveRecord, EveStrategy, Observation,
};
use crate::bits::BitString;
use crate::cost::CostLedger;
use crate::oneway::PairRecord;

/// Which transmission of the two-step protocol a particle is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Leg {
    /// Bob's half of each pair, sent before the first check.
    Travel,
    /// Alice's half after encoding.
    Encoded,
    /// The public classical channel.
    Classical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitEntry {
    pub position: usize,
    pub leg: Leg,
    /// Computational-basis probabilities of the pair before and after transit.
    pub before: Vec<f64>,
    pub after: Vec<f64>,
}

/// Quantum channel with an optional eavesdropper hook.
#[derive(Debug, Clone, Default)]
pub struct QuantumChannel {
    eve: EveStrategy,
    log: Vec<TransitEntry>,
    record: EveRecord,
}

impl QuantumChannel {
    pub fn new(eve: EveStrategy) -> Self {
        Self { eve, ..Self::default() }
    }

    /// Sends qubit `slot` of every pair across the channel, in pair order.
    pub fn transmit<R: Rng + ?Sized>(
        &mut self,
        leg: Leg,
        pairs: &mut [PairRecord],
        slot: usize,
        costs: &mut CostLedger,
        rng: &mut R,
    ) -> Result<(), AdversaryError> {
        let before: Vec<Vec<f64>> = pairs.iter().map(|p| p.state.probabilities()).collect();
        if self.eve.targets(leg) {
            match leg {
                Leg::Travel => {
                    for pair in pairs.iter_mut() {
                        let (post, obs) = attack_travel(&self.eve, &pair.state, slot, rng)?;
                        pair.state = post;
                        if let Some(observation) = obs {
                            self.record.push(EveEntry {
                                position: pair.index,
                                leg,
                                observation,
                            });
                        }
                    }
                }
                Leg::Encoded => {
                    for entry in attack_second_sequence(&self.eve, pairs, slot, rng)? {
                        self.record.push(entry);
                    }
                }
                Leg::Classical => {}
            }
        }
        for (pair, before) in pairs.iter().zip(before) {
            self.log.push(TransitEntry {
                position: pair.index,
                leg,
                before,
                after: pair.state.probabilities(),
            });
        }
        costs.qubit_transits += pairs.len() as u64;
        Ok(())
    }

    pub fn log(&self) -> &[TransitEntry] {
        &self.log
    }

    pub fn record(&self) -> &EveRecord {
        &self.record
    }

    pub fn record_mut(&mut self) -> &mut EveRecord {
        &mut self.record
    }

    pub fn strategy(&self) -> &EveStrategy {
        &self.eve
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Party {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameKind {
    /// Bob's first-round positions, bases and outcomes.
    CheckAnnounce,
    /// Alice's first-round accept/abort bit.
    CheckVerdict,
    /// Alice's decoy positions and values.
    DecoyAnnounce,
    /// Bob's second-round accept/abort bit.
    DecoyVerdict,
    /// Bob's one-time-pad ciphertext, followed by the tag when authenticated.
    Ciphertext,
}

impl FrameKind {
    pub fn is_announcement(self) -> bool {
        !matches!(self, FrameKind::Ciphertext)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frame {
    pub sender: Party,
    pub kind: FrameKind,
    pub payload: BitString,
    pub tampered: bool,
}

/// Public, append-only, delivery-ordered classical channel.
#[derive(Debug, Clone, Default)]
pub struct ClassicalChannel {
    tamper: Option<usize>,
    transcript: Vec<Frame>,
}

impl ClassicalChannel {
    pub fn new(tamper: Option<usize>) -> Self {
        Self {
            tamper,
            transcript: Vec::new(),
        }
    }

    /// Sends a frame and returns the payload as delivered to the receiver.
    pub fn send(&mut self, sender: Party, kind: FrameKind, payload: BitString, costs: &mut CostLedger) -> BitString {
        let mut delivered = payload;
        let mut tampered = false;
        if kind == FrameKind::Ciphertext {
            if let Some(bit) = self.tamper.filter(|&b| b < delivered.len()) {
                delivered.flip(bit);
                tampered = true;
            }
        }
        let n = delivered.len() as u64;
        if kind.is_announcement() {
            costs.announcement_bits += n;
        } else {
            costs.classical_bits_sent += n;
        }
        self.transcript.push(Frame {
            sender,
            kind,
            payload: delivered.clone(),
            tampered,
        });
        delivered
    }

    pub fn transcript(&self) -> &[Frame] {
        &self.transcript
    }
}

/// Everything one session endpoint pair shares: both channels and the cost tally.
#[derive(Debug, Clone, Default)]
pub struct Link {
    pub quantum: QuantumChannel,
    pub classical: ClassicalChannel,
    pub costs: CostLedger,
}

impl Link {
    pub fn new(eve: EveStrategy) -> Self {
        Self {
            quantum: QuantumChannel::new(eve),
            classical: ClassicalChannel::new(eve.tamper_bit()),
            costs: CostLedger::default(),
        }
    }

    /// Eve's full record, including any classical tamper entry.
    pub fn eve_record(&self) -> EveRecord {
        let mut record = self.quantum.record().clone();
        if let Some(bit) = self.classical.tamper {
            if self.classical.transcript().iter().any(|f| f.tampered) {
                record.push(EveEntry {
                    position: bit,
                    leg: Leg::Classical,
                    observation: Observation::Tamper { bit },
                });
            }
        }
        record
    }
}

/// Bits needed to address a position among `n` pairs.
pub fn index_width(n: usize) -> usize {
    let bits = usize::BITS - n.saturating_sub(1).leading_zeros();
    (bits as usize).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tamper_flips_only_ciphertext() {
        let mut ch = ClassicalChannel::new(Some(1));
        let mut costs = CostLedger::default();
        let ann = ch.send(
            Party::Bob,
            FrameKind::CheckAnnounce,
            "0000".parse().unwrap(),
            &mut costs,
        );
        assert_eq!(ann.to_string(), "0000");
        let ct = ch.send(Party::Bob, FrameKind::Ciphertext, "0000".parse().unwrap(), &mut costs);
        assert_eq!(ct.to_string(), "0100");
        assert_eq!(costs.announcement_bits, 4);
        assert_eq!(costs.classical_bits_sent, 4);
        assert_eq!(ch.transcript().len(), 2);
        assert!(ch.transcript()[1].tampered);
    }

    #[test]
    fn tamper_past_end_is_noop() {
        let mut ch = ClassicalChannel::new(Some(9));
        let mut costs = CostLedger::default();
        let ct = ch.send(Party::Bob, FrameKind::Ciphertext, "0101".parse().unwrap(), &mut costs);
        assert_eq!(ct.to_string(), "0101");
        assert!(!ch.transcript()[0].tampered);
    }

    #[test]
    fn widths() {
        assert_eq!(index_width(1), 1);
        assert_eq!(index_width(2), 1);
        assert_eq!(index_width(3), 2);
        assert_eq!(index_width(86), 7);
        assert_eq!(index_width(128), 7);
        assert_eq!(index_width(129), 8);
    }
}
