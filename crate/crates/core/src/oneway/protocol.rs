use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use super::config::{DecodeTable, EncodeTable, SessionConfig};
use super::OnewayError;
use crate::bits::BitString;
use crate::channel::{index_width, ClassicalChannel, FrameKind, Leg, Link, Party};
use crate::cost::CostLedger;
use crate::quantum::{
    apply_pauli, bell_state, measure_bell_pair, measure_qubit, BellKind, MeasBasis, PauliCode, PureState,
};

/// Alice keeps slot 0 of every pair; slot 1 travels to Bob first.
pub const HOME_SLOT: usize = 0;
pub const TRAVEL_SLOT: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairRole {
    Check1,
    Decoy2,
    Message,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    pub index: usize,
    pub role: PairRole,
    pub state: PureState,
    pub encoded: Option<PauliCode>,
    pub decoded: Option<BellKind>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BasisTally {
    pub sampled: usize,
    pub mismatches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub sampled: usize,
    pub mismatches: usize,
    pub error_rate: f64,
    pub per_basis: BTreeMap<MeasBasis, BasisTally>,
}

impl CheckReport {
    fn from_tallies(per_basis: BTreeMap<MeasBasis, BasisTally>) -> Self {
        let sampled: usize = per_basis.values().map(|t| t.sampled).sum();
        let mismatches: usize = per_basis.values().map(|t| t.mismatches).sum();
        Self {
            sampled,
            mismatches,
            error_rate: if sampled == 0 {
                0.0
            } else {
                mismatches as f64 / sampled as f64
            },
            per_basis,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckRound {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OnewayStatus {
    Delivered,
    Aborted(CheckRound),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OnewayOutcome {
    pub status: OnewayStatus,
    /// Bob's decoded message, two bits per message pair; empty on abort.
    pub delivered_bits: BitString,
    pub check1: CheckReport,
    pub check2: Option<CheckReport>,
    pub pairs_consumed: usize,
    /// Bob's Bell outcomes on the message pairs, in message order; empty on abort.
    pub bell_outcomes: Vec<BellKind>,
    /// Pair indices that carried message bits.
    pub message_positions: Vec<usize>,
}

impl OnewayOutcome {
    pub fn delivered(&self) -> bool {
        self.status == OnewayStatus::Delivered
    }
}

/// Fresh pairs with roles drawn by sampling without replacement.
pub fn prepare_pairs<R: Rng + ?Sized>(config: &SessionConfig, rng: &mut R) -> Result<Vec<PairRecord>, OnewayError> {
    let counts = config.role_counts()?;
    let n = config.n_pairs;
    let mut roles = vec![PairRole::Message; n];
    let picked = rand::seq::index::sample(rng, n, counts.check1 + counts.decoy2);
    for (k, i) in picked.iter().enumerate() {
        roles[i] = if k < counts.check1 {
            PairRole::Check1
        } else {
            PairRole::Decoy2
        };
    }
    Ok(roles
        .into_iter()
        .enumerate()
        .map(|(index, role)| PairRecord {
            index,
            role,
            state: bell_state(config.params.initial_bell),
            encoded: None,
            decoded: None,
        })
        .collect())
}

fn basis_bit(basis: MeasBasis) -> u64 {
    u64::from(basis == MeasBasis::X)
}

fn anticorrelated(initial: BellKind, basis: MeasBasis) -> bool {
    match basis {
        MeasBasis::X => initial.x_anticorrelated(),
        _ => initial.z_anticorrelated(),
    }
}

/// First check: Bob measures each sampled travel particle in a random basis
/// and announces position, basis and outcome; Alice measures her partner in
/// the announced basis and counts correlation violations.
pub fn run_check1<R: Rng + ?Sized>(
    pairs: &mut [PairRecord],
    initial: BellKind,
    classical: &mut ClassicalChannel,
    costs: &mut CostLedger,
    rng: &mut R,
) -> Result<CheckReport, OnewayError> {
    let samples: Vec<usize> = pairs
        .iter()
        .filter(|p| p.role == PairRole::Check1)
        .map(|p| p.index)
        .collect();
    if samples.is_empty() {
        return Err(OnewayError::DegenerateCheck(CheckRound::First));
    }
    let width = index_width(pairs.len());

    let mut frame = BitString::with_capacity(samples.len() * (width + 2));
    for &i in &samples {
        let basis = if rng.random_bool(0.5) {
            MeasBasis::X
        } else {
            MeasBasis::Z
        };
        let (bit, post) = measure_qubit(&pairs[i].state, TRAVEL_SLOT, basis, rng.random())?;
        pairs[i].state = post;
        frame.push_uint(i as u64, width);
        frame.push_uint(basis_bit(basis), 1);
        frame.push_uint(u64::from(bit), 1);
    }
    costs.single_qubit_measurements += samples.len() as u64;
    let received = classical.send(Party::Bob, FrameKind::CheckAnnounce, frame, costs);

    let mut tallies = BTreeMap::new();
    for k in 0..samples.len() {
        let off = k * (width + 2);
        let field = |o, w| received.read_uint(off + o, w).expect("announcement frame length");
        let pos = field(0, width) as usize;
        let basis = if field(width, 1) == 1 {
            MeasBasis::X
        } else {
            MeasBasis::Z
        };
        let bob_bit = field(width + 1, 1) as u8;
        let (alice_bit, post) = measure_qubit(&pairs[pos].state, HOME_SLOT, basis, rng.random())?;
        pairs[pos].state = post;
        let tally: &mut BasisTally = tallies.entry(basis).or_default();
        tally.sampled += 1;
        if (alice_bit != bob_bit) != anticorrelated(initial, basis) {
            tally.mismatches += 1;
        }
    }
    costs.single_qubit_measurements += samples.len() as u64;
    Ok(CheckReport::from_tallies(tallies))
}

/// Applies the dense-coding unitaries to Alice's retained particles.
///
/// Message pairs carry `bits` in pair order; decoy pairs get random labels,
/// returned as `(position, label)` for the second check.
pub fn encode_message<R: Rng + ?Sized>(
    pairs: &mut [PairRecord],
    bits: &BitString,
    table: &EncodeTable,
    rng: &mut R,
) -> Result<Vec<(usize, u8)>, OnewayError> {
    let message_pairs = pairs.iter().filter(|p| p.role == PairRole::Message).count();
    if bits.len() != 2 * message_pairs {
        return Err(OnewayError::MessageLength {
            expected: 2 * message_pairs,
            got: bits.len(),
        });
    }
    let mut decoys = Vec::new();
    let mut k = 0;
    for pair in pairs.iter_mut() {
        let label = match pair.role {
            PairRole::Check1 => continue,
            PairRole::Message => {
                let l = bits.pair_label(k).expect("length checked above");
                k += 1;
                l
            }
            PairRole::Decoy2 => {
                let l = rng.random_range(0..4u8);
                decoys.push((pair.index, l));
                l
            }
        };
        let code = table.code(label);
        pair.state = apply_pauli(&pair.state, HOME_SLOT, code)?;
        pair.encoded = Some(code);
    }
    Ok(decoys)
}

/// Bell-measures every non-check pair and returns the decoded labels in pair order.
pub fn bell_decode<R: Rng + ?Sized>(
    pairs: &mut [PairRecord],
    decode: &DecodeTable,
    costs: &mut CostLedger,
    rng: &mut R,
) -> Result<BitString, OnewayError> {
    let mut out = BitString::new();
    for pair in pairs.iter_mut().filter(|p| p.role != PairRole::Check1) {
        let (kind, post) = measure_bell_pair(&pair.state, (HOME_SLOT, TRAVEL_SLOT), rng.random())?;
        pair.state = post;
        pair.decoded = Some(kind);
        out.push_uint(u64::from(decode.label(kind)), 2);
        costs.bell_measurements += 1;
    }
    Ok(out)
}

/// Second check: fraction of announced decoys Bob decoded differently.
pub fn run_check2(
    pairs: &[PairRecord],
    announced: &[(usize, u8)],
    decode: &DecodeTable,
) -> Result<CheckReport, OnewayError> {
    if announced.is_empty() {
        return Err(OnewayError::DegenerateCheck(CheckRound::Second));
    }
    let mut tally = BasisTally::default();
    for &(pos, label) in announced {
        let decoded = pairs
            .get(pos)
            .and_then(|p| p.decoded)
            .ok_or(OnewayError::UndecodedDecoy(pos))?;
        tally.sampled += 1;
        if decode.label(decoded) != label {
            tally.mismatches += 1;
        }
    }
    Ok(CheckReport::from_tallies(BTreeMap::from([(MeasBasis::Bell, tally)])))
}

fn verdict(abort: bool) -> BitString {
    std::iter::once(abort).collect()
}

/// Runs one complete one-way session over `link`.
///
/// Message length must be exactly two bits per message pair. An abort is
/// reported through the status and discards every bit of the session.
pub fn run_oneway<R: Rng + ?Sized>(
    config: &SessionConfig,
    message: &BitString,
    link: &mut Link,
    rng: &mut R,
) -> Result<OnewayOutcome, OnewayError> {
    let counts = config.role_counts()?;
    if message.len() != 2 * counts.message {
        return Err(OnewayError::MessageLength {
            expected: 2 * counts.message,
            got: message.len(),
        });
    }
    let params = &config.params;
    let decode = DecodeTable::new(params.initial_bell, &params.encode_table)?;

    let mut pairs = prepare_pairs(config, rng)?;
    link.costs.epr_pairs_prepared += pairs.len() as u64;
    link.quantum
        .transmit(Leg::Travel, &mut pairs, TRAVEL_SLOT, &mut link.costs, rng)?;

    let check1 = run_check1(
        &mut pairs,
        params.initial_bell,
        &mut link.classical,
        &mut link.costs,
        rng,
    )?;
    let abort1 = check1.error_rate > params.qber_threshold;
    link.classical
        .send(Party::Alice, FrameKind::CheckVerdict, verdict(abort1), &mut link.costs);
    if abort1 {
        return Ok(OnewayOutcome {
            status: OnewayStatus::Aborted(CheckRound::First),
            delivered_bits: BitString::new(),
            check1,
            check2: None,
            pairs_consumed: pairs.len(),
            bell_outcomes: Vec::new(),
            message_positions: Vec::new(),
        });
    }

    let decoys = encode_message(&mut pairs, message, &params.encode_table, rng)?;
    // The whole home sequence travels, measured check particles included, so
    // positions on the second leg reveal nothing.
    link.quantum
        .transmit(Leg::Encoded, &mut pairs, HOME_SLOT, &mut link.costs, rng)?;
    let decoded = bell_decode(&mut pairs, &decode, &mut link.costs, rng)?;

    let width = index_width(pairs.len());
    let mut frame = BitString::with_capacity(decoys.len() * (width + 2));
    for &(pos, label) in &decoys {
        frame.push_uint(pos as u64, width);
        frame.push_uint(u64::from(label), 2);
    }
    let received = link
        .classical
        .send(Party::Alice, FrameKind::DecoyAnnounce, frame, &mut link.costs);
    let announced: Vec<(usize, u8)> = (0..decoys.len())
        .map(|k| {
            let off = k * (width + 2);
            let pos = received.read_uint(off, width).expect("decoy frame length") as usize;
            let label = received.read_uint(off + width, 2).expect("decoy frame length") as u8;
            (pos, label)
        })
        .collect();
    let check2 = run_check2(&pairs, &announced, &decode)?;
    let abort2 = check2.error_rate > params.qber_threshold;
    link.classical
        .send(Party::Bob, FrameKind::DecoyVerdict, verdict(abort2), &mut link.costs);
    if abort2 {
        return Ok(OnewayOutcome {
            status: OnewayStatus::Aborted(CheckRound::Second),
            delivered_bits: BitString::new(),
            check1,
            check2: Some(check2),
            pairs_consumed: pairs.len(),
            bell_outcomes: Vec::new(),
            message_positions: Vec::new(),
        });
    }

    let mut delivered_bits = BitString::with_capacity(message.len());
    let mut bell_outcomes = Vec::with_capacity(counts.message);
    let mut message_positions = Vec::with_capacity(counts.message);
    let decodable = pairs.iter().filter(|p| p.role != PairRole::Check1);
    for (k, pair) in decodable.enumerate() {
        if pair.role == PairRole::Message {
            delivered_bits.push_uint(decoded.read_uint(2 * k, 2).expect("one label per pair"), 2);
            bell_outcomes.push(pair.decoded.expect("decoded above"));
            message_positions.push(pair.index);
        }
    }
    link.quantum.record_mut().guess_message(&message_positions);

    Ok(OnewayOutcome {
        status: OnewayStatus::Delivered,
        delivered_bits,
        check1,
        check2: Some(check2),
        pairs_consumed: pairs.len(),
        bell_outcomes,
        message_positions,
    })
}
