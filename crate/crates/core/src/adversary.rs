//! Eavesdropper strategies and what they learn.
//!
//! Eve acts position-independently: a quantum strategy touches every particle
//! on the leg it targets, and the classical tamper flips one fixed bit of the
//! encrypted reply frame.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::channel::Leg;
use crate::oneway::{EncodeTable, PairRecord};
use crate::quantum::{
    apply_pauli, bell_state, measure_qubit, oracle, outcome_distribution, BellKind, MeasBasis, OutcomeDistribution,
    PlanStep, PureState, QuantumError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdversaryError {
    #[error("strategy {strategy} cannot act on the {leg}")]
    StrategyMismatch { strategy: EveStrategy, leg: &'static str },
    #[error("guess covers {guessed} bits but the message has {actual}")]
    Alignment { guessed: usize, actual: usize },
    #[error("no guessed bits to score")]
    NoGuess,
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EveStrategy {
    #[default]
    None,
    /// Measure each travelling particle in Z and resend the collapsed state.
    InterceptResendZ,
    /// As above with a fair coin choosing Z or X per particle.
    InterceptResendRandom,
    /// Measure each encoded particle of the second transmission in Z.
    InterceptSecondSequence,
    /// Flip bit `bit` of the ciphertext frame (ciphertext followed by tag).
    ClassicalTamper { bit: usize },
}

impl EveStrategy {
    pub fn name(&self) -> String {
        match self {
            EveStrategy::None => "none".into(),
            EveStrategy::InterceptResendZ => "intercept-resend-z".into(),
            EveStrategy::InterceptResendRandom => "intercept-resend-random".into(),
            EveStrategy::InterceptSecondSequence => "intercept-second-sequence".into(),
            EveStrategy::ClassicalTamper { bit } => format!("classical-tamper:{bit}"),
        }
    }

    /// Whether this strategy acts on particles of `leg`.
    pub fn targets(&self, leg: Leg) -> bool {
        matches!(
            (self, leg),
            (
                EveStrategy::InterceptResendZ | EveStrategy::InterceptResendRandom,
                Leg::Travel
            ) | (EveStrategy::InterceptSecondSequence, Leg::Encoded)
        )
    }

    pub fn tamper_bit(&self) -> Option<usize> {
        match *self {
            EveStrategy::ClassicalTamper { bit } => Some(bit),
            _ => None,
        }
    }
}

impl fmt::Display for EveStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for EveStrategy {
    type Err = AdversaryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(EveStrategy::None),
            "intercept-resend-z" => Ok(EveStrategy::InterceptResendZ),
            "intercept-resend-random" => Ok(EveStrategy::InterceptResendRandom),
            "intercept-second-sequence" => Ok(EveStrategy::InterceptSecondSequence),
            other => other
                .strip_prefix("classical-tamper:")
                .and_then(|b| b.parse().ok())
                .map(|bit| EveStrategy::ClassicalTamper { bit })
                .ok_or_else(|| AdversaryError::UnknownStrategy(other.to_string())),
        }
    }
}

/// What Eve saw at one position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observation {
    Single { basis: MeasBasis, bit: u8 },
    Pair { kind: BellKind },
    Tamper { bit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EveEntry {
    pub position: usize,
    pub leg: Leg,
    pub observation: Observation,
}

/// Append-only log of Eve's interceptions for one session.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EveRecord {
    pub entries: Vec<EveEntry>,
    pub guessed: Option<BitString>,
}

impl EveRecord {
    pub fn push(&mut self, entry: EveEntry) {
        self.entries.push(entry);
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Forms Eve's best guess of the message once pair roles are public.
    ///
    /// Each message pair is guessed as its latest observed bit repeated twice;
    /// untouched positions are guessed as `00`. Nothing is guessed when Eve
    /// never touched a quantum particle.
    pub fn guess_message(&mut self, message_positions: &[usize]) {
        let quantum = |e: &&EveEntry| matches!(e.observation, Observation::Single { .. });
        if !self.entries.iter().any(|e| quantum(&e)) {
            return;
        }
        let mut guess = BitString::with_capacity(2 * message_positions.len());
        for &pos in message_positions {
            let seen = self
                .entries
                .iter()
                .filter(quantum)
                .rfind(|e| e.position == pos)
                .map(|e| match e.observation {
                    Observation::Single { bit, .. } => bit == 1,
                    _ => false,
                })
                .unwrap_or(false);
            guess.push(seen);
            guess.push(seen);
        }
        self.guessed = Some(guess);
    }
}

/// Intercepts one travelling particle on the first leg.
pub fn attack_travel<R: Rng + ?Sized>(
    strategy: &EveStrategy,
    state: &PureState,
    slot: usize,
    rng: &mut R,
) -> Result<(PureState, Option<Observation>), AdversaryError> {
    let basis = match strategy {
        EveStrategy::None => return Ok((state.clone(), None)),
        EveStrategy::InterceptResendZ => MeasBasis::Z,
        EveStrategy::InterceptResendRandom => {
            if rng.random_bool(0.5) {
                MeasBasis::X
            } else {
                MeasBasis::Z
            }
        }
        other => {
            return Err(AdversaryError::StrategyMismatch {
                strategy: *other,
                leg: "travel leg",
            })
        }
    };
    let (bit, post) = measure_qubit(state, slot, basis, rng.random())?;
    Ok((post, Some(Observation::Single { basis, bit })))
}

/// Intercepts every encoded particle (slot `slot`) of the second leg.
pub fn attack_second_sequence<R: Rng + ?Sized>(
    strategy: &EveStrategy,
    pairs: &mut [PairRecord],
    slot: usize,
    rng: &mut R,
) -> Result<Vec<EveEntry>, AdversaryError> {
    match strategy {
        EveStrategy::None => Ok(Vec::new()),
        EveStrategy::InterceptSecondSequence => pairs
            .iter_mut()
            .map(|pair| {
                let (bit, post) = measure_qubit(&pair.state, slot, MeasBasis::Z, rng.random())?;
                pair.state = post;
                Ok(EveEntry {
                    position: pair.index,
                    leg: Leg::Encoded,
                    observation: Observation::Single {
                        basis: MeasBasis::Z,
                        bit,
                    },
                })
            })
            .collect(),
        other => Err(AdversaryError::StrategyMismatch {
            strategy: *other,
            leg: "encoded leg",
        }),
    }
}

/// Fraction of message bits Eve guessed correctly.
pub fn eve_advantage(record: &EveRecord, message: &BitString) -> Result<f64, AdversaryError> {
    let guess = record.guessed.as_ref().ok_or(AdversaryError::NoGuess)?;
    if guess.len() != message.len() {
        return Err(AdversaryError::Alignment {
            guessed: guess.len(),
            actual: message.len(),
        });
    }
    if message.is_empty() {
        return Err(AdversaryError::NoGuess);
    }
    let hits = guess.iter().zip(message.iter()).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / message.len() as f64)
}

/// Exact post-attack distribution of `plan`, mixing over Eve's outcomes.
///
/// Strategies that do not touch the first leg leave the state as is.
pub fn post_attack_distribution(
    strategy: &EveStrategy,
    state: &PureState,
    slot: usize,
    plan: &[PlanStep],
) -> Result<OutcomeDistribution, AdversaryError> {
    let bases: &[(MeasBasis, f64)] = match strategy {
        EveStrategy::InterceptResendZ => &[(MeasBasis::Z, 1.0)],
        EveStrategy::InterceptResendRandom => &[(MeasBasis::Z, 0.5), (MeasBasis::X, 0.5)],
        _ => return Ok(outcome_distribution(state, plan)?),
    };
    let mut mixture = OutcomeDistribution::default();
    for &(basis, weight) in bases {
        for branch in oracle::branches(state, PlanStep::qubit(slot, basis))? {
            let d = outcome_distribution(&branch.state, plan)?;
            mixture.accumulate(&d, weight * branch.probability);
        }
    }
    Ok(mixture)
}

/// Exact probability that one first-round check sample shows a mismatch.
///
/// The check basis is a fair coin over Z and X, Bob holds slot 1 and Alice
/// slot 0 of a pair prepared in `initial`.
pub fn check_error_probability(strategy: &EveStrategy, initial: BellKind) -> Result<f64, AdversaryError> {
    let state = bell_state(initial);
    let mut p = 0.0;
    for (basis, anti) in [
        (MeasBasis::Z, initial.z_anticorrelated()),
        (MeasBasis::X, initial.x_anticorrelated()),
    ] {
        let plan = [PlanStep::qubit(0, basis), PlanStep::qubit(1, basis)];
        let d = post_attack_distribution(strategy, &state, 1, &plan)?;
        let mismatch = if anti {
            d.get("00") + d.get("11")
        } else {
            d.get("01") + d.get("10")
        };
        p += 0.5 * mismatch;
    }
    Ok(p)
}

/// Branches of the state after Eve's action on `leg`, as (weight, state).
fn attacked_branches(
    strategy: &EveStrategy,
    leg: Leg,
    slot: usize,
    weighted: Vec<(f64, PureState)>,
) -> Result<Vec<(f64, PureState)>, AdversaryError> {
    let bases: &[(MeasBasis, f64)] = match (strategy, leg) {
        (EveStrategy::InterceptResendZ, Leg::Travel) => &[(MeasBasis::Z, 1.0)],
        (EveStrategy::InterceptResendRandom, Leg::Travel) => &[(MeasBasis::Z, 0.5), (MeasBasis::X, 0.5)],
        (EveStrategy::InterceptSecondSequence, Leg::Encoded) => &[(MeasBasis::Z, 1.0)],
        _ => return Ok(weighted),
    };
    let mut out = Vec::new();
    for (w, state) in weighted {
        for &(basis, bw) in bases {
            for b in oracle::branches(&state, PlanStep::qubit(slot, basis))? {
                out.push((w * bw * b.probability, b.state));
            }
        }
    }
    Ok(out)
}

/// Exact probability that one decoy is decoded with the wrong label.
///
/// The decoy label is uniform over the four codes of `table`; Eve acts on
/// slot 1 during the first leg and slot 0 during the second, as configured.
pub fn decoy_error_probability(
    strategy: &EveStrategy,
    initial: BellKind,
    table: &EncodeTable,
) -> Result<f64, AdversaryError> {
    let mut p = 0.0;
    for label in 0..4u8 {
        let code = table.code(label);
        let expected = oracle::identify_bell(&apply_pauli(&bell_state(initial), 0, code)?, 0, 1)?
            .expect("Pauli images of Bell states are Bell states");
        let first = attacked_branches(strategy, Leg::Travel, 1, vec![(1.0, bell_state(initial))])?;
        let encoded = first
            .into_iter()
            .map(|(w, s)| Ok((w, apply_pauli(&s, 0, code)?)))
            .collect::<Result<Vec<_>, AdversaryError>>()?;
        for (w, state) in attacked_branches(strategy, Leg::Encoded, 0, encoded)? {
            let d = outcome_distribution(&state, &[PlanStep::bell(0, 1)])?;
            p += 0.25 * w * (1.0 - d.get(expected.symbol()));
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::PauliCode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-12;

    fn zz() -> [PlanStep; 2] {
        [PlanStep::qubit(0, MeasBasis::Z), PlanStep::qubit(1, MeasBasis::Z)]
    }

    fn xx() -> [PlanStep; 2] {
        [PlanStep::qubit(0, MeasBasis::X), PlanStep::qubit(1, MeasBasis::X)]
    }

    #[test]
    fn none_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = bell_state(BellKind::PsiMinus);
        let (post, obs) = attack_travel(&EveStrategy::None, &s, 1, &mut rng).unwrap();
        assert_eq!(post, s);
        assert!(obs.is_none());
        let mut pairs = Vec::new();
        assert!(attack_second_sequence(&EveStrategy::None, &mut pairs, 0, &mut rng)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn intercept_resend_z_destroys_x_correlation() {
        let phi = bell_state(BellKind::PhiPlus);
        let z = post_attack_distribution(&EveStrategy::InterceptResendZ, &phi, 1, &zz()).unwrap();
        assert!((z.get("00") - 0.5).abs() < TOL && (z.get("11") - 0.5).abs() < TOL);
        let x = post_attack_distribution(&EveStrategy::InterceptResendZ, &phi, 1, &xx()).unwrap();
        for label in ["00", "01", "10", "11"] {
            assert!((x.get(label) - 0.25).abs() < TOL);
        }
    }

    #[test]
    fn detection_probabilities() {
        for initial in BellKind::ALL {
            let p_none = check_error_probability(&EveStrategy::None, initial).unwrap();
            let p_z = check_error_probability(&EveStrategy::InterceptResendZ, initial).unwrap();
            let p_r = check_error_probability(&EveStrategy::InterceptResendRandom, initial).unwrap();
            assert!(p_none.abs() < TOL);
            assert!((p_z - 0.25).abs() < TOL, "{initial}");
            assert!((p_r - 0.25).abs() < TOL, "{initial}");
        }
    }

    #[test]
    fn no_signalling_on_alice_marginal() {
        let strategies = [
            EveStrategy::None,
            EveStrategy::InterceptResendZ,
            EveStrategy::InterceptResendRandom,
        ];
        for initial in BellKind::ALL {
            let s = bell_state(initial);
            for basis in [MeasBasis::Z, MeasBasis::X] {
                let plan = [PlanStep::qubit(0, basis)];
                let before = outcome_distribution(&s, &plan).unwrap();
                for strat in &strategies {
                    let after = post_attack_distribution(strat, &s, 1, &plan).unwrap();
                    assert!(before.max_abs_diff(&after) < TOL);
                }
            }
        }
    }

    #[test]
    fn second_sequence_outcomes_are_encoding_blind() {
        for code in PauliCode::ALL {
            let s = apply_pauli(&bell_state(BellKind::PhiPlus), 0, code).unwrap();
            let d = outcome_distribution(&s, &[PlanStep::qubit(0, MeasBasis::Z)]).unwrap();
            assert!((d.get("0") - 0.5).abs() < TOL && (d.get("1") - 0.5).abs() < TOL);
        }
    }

    #[test]
    fn mismatched_strategies_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = bell_state(BellKind::PhiPlus);
        for strat in [
            EveStrategy::ClassicalTamper { bit: 0 },
            EveStrategy::InterceptSecondSequence,
        ] {
            assert!(matches!(
                attack_travel(&strat, &s, 1, &mut rng),
                Err(AdversaryError::StrategyMismatch { .. })
            ));
        }
        let mut pairs = Vec::new();
        assert!(matches!(
            attack_second_sequence(&EveStrategy::InterceptResendZ, &mut pairs, 0, &mut rng),
            Err(AdversaryError::StrategyMismatch { .. })
        ));
    }

    #[test]
    fn advantage_scoring() {
        let msg: BitString = "1100".parse().unwrap();
        let mut rec = EveRecord::default();
        assert_eq!(eve_advantage(&rec, &msg), Err(AdversaryError::NoGuess));
        rec.guessed = Some(msg.clone());
        assert_eq!(eve_advantage(&rec, &msg), Ok(1.0));
        rec.guessed = Some("1111".parse().unwrap());
        assert_eq!(eve_advantage(&rec, &msg), Ok(0.5));
        rec.guessed = Some("11".parse().unwrap());
        assert!(matches!(
            eve_advantage(&rec, &msg),
            Err(AdversaryError::Alignment { .. })
        ));
    }

    #[test]
    fn random_guessing_scores_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let msg = BitString::random(10_000, &mut rng);
        let rec = EveRecord {
            entries: Vec::new(),
            guessed: Some(BitString::random(10_000, &mut rng)),
        };
        let acc = eve_advantage(&rec, &msg).unwrap();
        // σ = 0.005 for 10^4 fair bits.
        assert!((acc - 0.5).abs() < 0.015, "{acc}");
    }

    #[test]
    fn strategy_names_roundtrip() {
        for s in [
            EveStrategy::None,
            EveStrategy::InterceptResendZ,
            EveStrategy::InterceptResendRandom,
            EveStrategy::InterceptSecondSequence,
            EveStrategy::ClassicalTamper { bit: 7 },
        ] {
            assert_eq!(s.name().parse::<EveStrategy>().unwrap(), s);
        }
        assert!("eve".parse::<EveStrategy>().is_err());
    }

    #[test]
    fn decoy_error_oracle() {
        let table = EncodeTable::standard();
        for initial in BellKind::ALL {
            let p = |s: EveStrategy| decoy_error_probability(&s, initial, &table).unwrap();
            assert!(p(EveStrategy::None).abs() < TOL);
            assert!((p(EveStrategy::InterceptSecondSequence) - 0.5).abs() < TOL);
            assert!((p(EveStrategy::InterceptResendZ) - 0.5).abs() < TOL);
            assert!((p(EveStrategy::InterceptResendRandom) - 0.5).abs() < TOL);
            assert!(p(EveStrategy::ClassicalTamper { bit: 0 }).abs() < TOL);
        }
    }
}
