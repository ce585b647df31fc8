use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ledger::{ledger_from_delivery, KeyLedger};
use super::mac::{mac_key_demand, mac_tag, TagLength};
use super::otp::{otp_xor, AuthTag, CipherText};
use super::DuplexError;
use crate::adversary::{EveRecord, EveStrategy};
use crate::bits::BitString;
use crate::channel::{Frame, FrameKind, Link, Party};
use crate::cost::{duplex_payload_bits, reply_key_demand, CostLedger};
use crate::oneway::{run_oneway, EncodeTable, OnewayOutcome, OnewayParams, SessionConfig};
use crate::quantum::{BellKind, PauliCode};

/// What to do when the reply needs more key than Alice's message provides.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PaddingPolicy {
    /// Extend Alice's payload with random bits.
    #[default]
    RandomFill,
    /// Reject the configuration.
    Forbid,
}

fn default_tag() -> TagLength {
    TagLength::DEFAULT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DuplexConfig {
    pub len_a: usize,
    pub len_b: usize,
    #[serde(default)]
    pub auth: bool,
    #[serde(default = "default_tag")]
    pub tag_bits: TagLength,
    #[serde(default)]
    pub padding: PaddingPolicy,
    #[serde(default)]
    pub oneway: OnewayParams,
}

/// Session sizing derived from a [`DuplexConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DuplexPlan {
    /// Key bits the reply consumes, payload and MAC key together.
    pub reply_key_bits: usize,
    pub n_pairs: usize,
    /// Bits the one-way session carries: two per message pair.
    pub capacity_bits: usize,
    /// Random bits appended to Alice's message.
    pub padding_bits: usize,
}

impl DuplexConfig {
    pub fn new(len_a: usize, len_b: usize, oneway: OnewayParams) -> Self {
        Self {
            len_a,
            len_b,
            auth: false,
            tag_bits: TagLength::DEFAULT,
            padding: PaddingPolicy::RandomFill,
            oneway,
        }
    }

    pub fn with_auth(mut self, tag_bits: TagLength) -> Self {
        self.auth = true;
        self.tag_bits = tag_bits;
        self
    }

    pub fn auth_tag(&self) -> Option<TagLength> {
        self.auth.then_some(self.tag_bits)
    }

    pub fn plan(&self) -> Result<DuplexPlan, DuplexError> {
        let reply_key_bits = reply_key_demand(self.len_b, self.auth_tag());
        if self.padding == PaddingPolicy::Forbid && reply_key_bits > self.len_a {
            return Err(DuplexError::PaddingForbidden {
                needed: reply_key_bits,
                available: self.len_a,
            });
        }
        let payload = duplex_payload_bits(self.len_a, self.len_b, self.auth_tag());
        let n_pairs = self.oneway.pairs_for_bits(payload)?;
        if n_pairs == 0 {
            return Err(DuplexError::NothingToSend);
        }
        let capacity_bits = 2 * self.oneway.role_counts(n_pairs)?.message;
        Ok(DuplexPlan {
            reply_key_bits,
            n_pairs,
            capacity_bits,
            padding_bits: capacity_bits - self.len_a,
        })
    }

    pub fn session(&self) -> Result<SessionConfig, DuplexError> {
        Ok(SessionConfig::new(self.plan()?.n_pairs, self.oneway.clone(), 0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DuplexStatus {
    Completed,
    AbortedQuantum,
    AuthFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DuplexOutcome {
    pub status: DuplexStatus,
    pub session_id: u64,
    pub plan: DuplexPlan,
    /// Bob's reply as decrypted by Alice.
    pub alice_received: BitString,
    /// Alice's message as decoded by Bob.
    pub bob_received: BitString,
    pub alice_ledger: Option<KeyLedger>,
    pub bob_ledger: Option<KeyLedger>,
    pub ciphertext: Option<CipherText>,
    pub tag: Option<AuthTag>,
    pub oneway: OnewayOutcome,
    /// Alice's full quantum payload, message followed by padding.
    #[serde(skip)]
    pub payload: BitString,
    pub costs: CostLedger,
    pub eve: EveRecord,
    pub transcript: Vec<Frame>,
}

fn check_len(which: &'static str, expected: usize, msg: &BitString) -> Result<(), DuplexError> {
    if msg.len() == expected {
        Ok(())
    } else {
        Err(DuplexError::MessageLength {
            which,
            expected,
            got: msg.len(),
        })
    }
}

/// Full two-way exchange: Alice's message over the one-way quantum protocol,
/// then Bob's reply one-time-padded with the delivered bits over the public
/// channel.
///
/// Key is issued payload first, MAC key second, from both ledgers in the
/// same order, so the two endpoints stay aligned by construction.
pub fn run_duplex<R: Rng + ?Sized>(
    config: &DuplexConfig,
    m_a: &BitString,
    m_b: &BitString,
    eve: EveStrategy,
    rng: &mut R,
) -> Result<DuplexOutcome, DuplexError> {
    check_len("m_a", config.len_a, m_a)?;
    check_len("m_b", config.len_b, m_b)?;
    let plan = config.plan()?;
    let session = config.session()?;
    let session_id: u64 = rng.random();

    let mut payload = m_a.clone();
    payload.extend_from(&BitString::random(plan.padding_bits, rng));

    let mut link = Link::new(eve);
    let oneway = run_oneway(&session, &payload, &mut link, rng)?;

    let mut outcome = DuplexOutcome {
        status: DuplexStatus::AbortedQuantum,
        session_id,
        plan,
        alice_received: BitString::new(),
        bob_received: BitString::new(),
        alice_ledger: None,
        bob_ledger: None,
        ciphertext: None,
        tag: None,
        oneway,
        payload,
        costs: CostLedger::default(),
        eve: EveRecord::default(),
        transcript: Vec::new(),
    };
    if !outcome.oneway.delivered() {
        outcome.costs = link.costs;
        outcome.eve = link.eve_record();
        outcome.transcript = link.classical.transcript().to_vec();
        return Ok(outcome);
    }

    let delivered = &outcome.oneway.delivered_bits;
    outcome.bob_received = delivered.slice(0, config.len_a);
    let mut bob_ledger = ledger_from_delivery(delivered, session_id)?;
    let mut alice_ledger = ledger_from_delivery(&outcome.payload, session_id)?;
    outcome.status = DuplexStatus::Completed;

    if config.len_b > 0 {
        let (pad, range) = bob_ledger.take(config.len_b)?;
        let ct = CipherText {
            payload: otp_xor(&pad, m_b)?,
            key_range: range,
        };
        let mut frame = ct.payload.clone();
        let tag = match config.auth_tag() {
            Some(t) => {
                let (key, range) = bob_ledger.take(mac_key_demand(config.len_b, t))?;
                let tag = AuthTag {
                    tag: mac_tag(&key, &ct.payload, t)?,
                    key_range: range,
                };
                frame.extend_from(&tag.tag);
                Some(tag)
            }
            None => None,
        };
        let received = link
            .classical
            .send(Party::Bob, FrameKind::Ciphertext, frame, &mut link.costs);

        let received_ct = received.slice(0, config.len_b);
        let (pad, _) = alice_ledger.take(config.len_b)?;
        let accepted = match config.auth_tag() {
            Some(t) => {
                let (key, _) = alice_ledger.take(mac_key_demand(config.len_b, t))?;
                let received_tag = received.slice(config.len_b, received.len());
                mac_tag(&key, &received_ct, t)? == received_tag
            }
            None => true,
        };
        if accepted {
            outcome.alice_received = otp_xor(&pad, &received_ct)?;
        } else {
            outcome.status = DuplexStatus::AuthFailed;
        }
        outcome.ciphertext = Some(ct);
        outcome.tag = tag;
    }

    outcome.alice_ledger = Some(alice_ledger);
    outcome.bob_ledger = Some(bob_ledger);
    outcome.costs = link.costs;
    outcome.eve = link.eve_record();
    outcome.transcript = link.classical.transcript().to_vec();
    Ok(outcome)
}

/// Bob's ledger read straight off his Bell outcomes.
///
/// Each outcome differs from the prepared state by one Pauli frame; that
/// frame names the code Alice applied, and the encoding table names the
/// bits. No corrective unitary is ever applied.
pub fn reply_key_mode(outcomes: &[BellKind], initial: BellKind, table: &EncodeTable, session_id: u64) -> KeyLedger {
    let (ix, iz) = initial.frame();
    let mut bits = BitString::with_capacity(2 * outcomes.len());
    for kind in outcomes {
        let (x, z) = kind.frame();
        let code = PauliCode::from_frame(x ^ ix, z ^ iz);
        let label = table.label_of(code).expect("encode table is a bijection");
        bits.push_uint(u64::from(label), 2);
    }
    KeyLedger::from_bits(bits, session_id)
}
