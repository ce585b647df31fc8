use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::{apply_pauli, bell_state, oracle, BellKind, PauliCode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("n_pairs must be positive")]
    NoPairs,
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("check fractions sum to {0}, leaving no message pairs")]
    FractionsTooLarge(f64),
    #[error("{n_pairs} pairs leave {check1} check, {decoy2} decoy and no message pairs")]
    NoMessagePairs {
        n_pairs: usize,
        check1: usize,
        decoy2: usize,
    },
    #[error("{n_pairs} pairs give an empty {round} check round")]
    EmptyCheckRound { n_pairs: usize, round: &'static str },
    #[error("encode table is not a bijection: {0}")]
    EncodeTable(String),
}

/// Bijection from 2-bit labels to dense-coding unitaries; index is the label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodeTable {
    codes: [PauliCode; 4],
}

impl EncodeTable {
    pub fn new(codes: [PauliCode; 4]) -> Result<Self, ConfigError> {
        for code in PauliCode::ALL {
            let uses = codes.iter().filter(|&&c| c == code).count();
            if uses != 1 {
                return Err(ConfigError::EncodeTable(format!("{code} used {uses} times")));
            }
        }
        Ok(Self { codes })
    }

    /// Skips the bijection check. Only for negative-control fixtures.
    #[doc(hidden)]
    pub fn new_unchecked(codes: [PauliCode; 4]) -> Self {
        Self { codes }
    }

    /// `00→I, 01→Z, 10→X, 11→iY`.
    pub fn standard() -> Self {
        Self {
            codes: [PauliCode::I, PauliCode::Z, PauliCode::X, PauliCode::IY],
        }
    }

    pub fn code(&self, label: u8) -> PauliCode {
        self.codes[usize::from(label & 0b11)]
    }

    pub fn label_of(&self, code: PauliCode) -> Option<u8> {
        self.codes.iter().position(|&c| c == code).map(|i| i as u8)
    }

    pub fn codes(&self) -> [PauliCode; 4] {
        self.codes
    }
}

impl Default for EncodeTable {
    fn default() -> Self {
        Self::standard()
    }
}

fn label_key(label: u8) -> String {
    format!("{:02b}", label)
}

impl Serialize for EncodeTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let map: BTreeMap<String, PauliCode> = (0u8..4).map(|l| (label_key(l), self.code(l))).collect();
        map.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for EncodeTable {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let map = BTreeMap::<String, PauliCode>::deserialize(deserializer)?;
        let mut codes = [PauliCode::I; 4];
        for label in 0u8..4 {
            let key = label_key(label);
            codes[usize::from(label)] = *map
                .get(&key)
                .ok_or_else(|| D::Error::custom(format!("encode table missing label {key}")))?;
        }
        if map.len() != 4 {
            return Err(D::Error::custom("encode table keys must be exactly 00, 01, 10, 11"));
        }
        EncodeTable::new(codes).map_err(D::Error::custom)
    }
}

/// Bob's map from measured Bell kind back to the 2-bit label.
///
/// Built by simulating each encoding on the initial state and identifying the
/// result with the exact oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeTable {
    labels: [u8; 4],
}

impl DecodeTable {
    pub fn new(initial: BellKind, table: &EncodeTable) -> Result<Self, ConfigError> {
        let mut labels = [None; 4];
        for label in 0u8..4 {
            let encoded =
                apply_pauli(&bell_state(initial), 0, table.code(label)).expect("slot 0 exists on a Bell pair");
            let kind = oracle::identify_bell(&encoded, 0, 1)
                .expect("pair slots are valid")
                .ok_or_else(|| ConfigError::EncodeTable("encoding left the Bell basis".into()))?;
            let slot = &mut labels[kind as usize];
            if slot.is_some() {
                return Err(ConfigError::EncodeTable(format!(
                    "two labels decode to {kind} from {initial}"
                )));
            }
            *slot = Some(label);
        }
        Ok(Self {
            labels: labels.map(|l| l.expect("four distinct kinds fill all slots")),
        })
    }

    pub fn label(&self, kind: BellKind) -> u8 {
        self.labels[kind as usize]
    }
}

/// Protocol parameters independent of session size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnewayParams {
    #[serde(default = "default_check_fraction")]
    pub check_fraction_1: f64,
    #[serde(default = "default_check_fraction")]
    pub check_fraction_2: f64,
    #[serde(default = "default_threshold")]
    pub qber_threshold: f64,
    #[serde(default = "default_bell")]
    pub initial_bell: BellKind,
    #[serde(default)]
    pub encode_table: EncodeTable,
}

fn default_check_fraction() -> f64 {
    0.125
}

fn default_threshold() -> f64 {
    0.05
}

fn default_bell() -> BellKind {
    BellKind::PhiPlus
}

impl Default for OnewayParams {
    fn default() -> Self {
        Self {
            check_fraction_1: default_check_fraction(),
            check_fraction_2: default_check_fraction(),
            qber_threshold: default_threshold(),
            initial_bell: default_bell(),
            encode_table: EncodeTable::standard(),
        }
    }
}

/// How many pairs of an `n_pairs` session fall in each role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoleCounts {
    pub check1: usize,
    pub decoy2: usize,
    pub message: usize,
}

impl RoleCounts {
    pub fn total(&self) -> usize {
        self.check1 + self.decoy2 + self.message
    }
}

fn in_open_unit(name: &'static str, value: f64) -> Result<(), ConfigError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(ConfigError::OutOfRange {
            name,
            value,
            range: "(0, 1)",
        })
    }
}

impl OnewayParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        in_open_unit("check_fraction_1", self.check_fraction_1)?;
        in_open_unit("check_fraction_2", self.check_fraction_2)?;
        let sum = self.check_fraction_1 + self.check_fraction_2;
        if sum >= 1.0 {
            return Err(ConfigError::FractionsTooLarge(sum));
        }
        if !(self.qber_threshold >= 0.0 && self.qber_threshold < 0.5) {
            return Err(ConfigError::OutOfRange {
                name: "qber_threshold",
                value: self.qber_threshold,
                range: "[0, 0.5)",
            });
        }
        EncodeTable::new(self.encode_table.codes())?;
        Ok(())
    }

    /// Role split for `n_pairs`: each check count is `round(n · fraction)`.
    pub fn role_counts(&self, n_pairs: usize) -> Result<RoleCounts, ConfigError> {
        self.validate()?;
        if n_pairs == 0 {
            return Err(ConfigError::NoPairs);
        }
        let n = n_pairs as f64;
        let check1 = (n * self.check_fraction_1).round() as usize;
        let decoy2 = (n * self.check_fraction_2).round() as usize;
        if check1 + decoy2 >= n_pairs {
            return Err(ConfigError::NoMessagePairs {
                n_pairs,
                check1,
                decoy2,
            });
        }
        if check1 == 0 {
            return Err(ConfigError::EmptyCheckRound {
                n_pairs,
                round: "first",
            });
        }
        if decoy2 == 0 {
            return Err(ConfigError::EmptyCheckRound {
                n_pairs,
                round: "second",
            });
        }
        Ok(RoleCounts {
            check1,
            decoy2,
            message: n_pairs - check1 - decoy2,
        })
    }

    /// Smallest valid session carrying at least `message_pairs` message pairs.
    ///
    /// Zero message pairs need no session and give zero.
    pub fn pairs_for(&self, message_pairs: usize) -> Result<usize, ConfigError> {
        self.validate()?;
        if message_pairs == 0 {
            return Ok(0);
        }
        let mut n = message_pairs;
        loop {
            if let Ok(c) = self.role_counts(n) {
                if c.message >= message_pairs {
                    return Ok(n);
                }
            }
            n += 1;
        }
    }

    /// Session size for a payload of `bits` message bits (two per pair).
    pub fn pairs_for_bits(&self, bits: usize) -> Result<usize, ConfigError> {
        self.pairs_for(bits.div_ceil(2))
    }
}

/// A fully sized one-way session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub n_pairs: usize,
    #[serde(flatten)]
    pub params: OnewayParams,
    #[serde(default)]
    pub seed: u64,
}

impl SessionConfig {
    pub fn new(n_pairs: usize, params: OnewayParams, seed: u64) -> Self {
        Self { n_pairs, params, seed }
    }

    pub fn role_counts(&self) -> Result<RoleCounts, ConfigError> {
        self.params.role_counts(self.n_pairs)
    }

    /// Required message length in bits.
    pub fn message_bits(&self) -> Result<usize, ConfigError> {
        Ok(2 * self.role_counts()?.message)
    }

    /// Generator seeded from the config seed.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}
