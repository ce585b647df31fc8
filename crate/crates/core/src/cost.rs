//! Resource accounting and the one-device versus two-device comparison.
//!
//! Counts are physical events, not prices. An optional weight table turns a
//! ledger into a single number for users who want one.

use std::collections::BTreeMap;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::index_width;
use crate::duplex::{mac_key_demand, TagLength};
use crate::oneway::{ConfigError, OnewayParams};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostLedger {
    pub epr_pairs_prepared: u64,
    pub qubit_transits: u64,
    pub bell_measurements: u64,
    pub single_qubit_measurements: u64,
    /// Message-bearing classical bits: ciphertext and tag.
    pub classical_bits_sent: u64,
    /// Check-round announcements and verdicts.
    pub announcement_bits: u64,
}

impl CostLedger {
    pub fn get(&self, resource: Resource) -> u64 {
        match resource {
            Resource::EprPairs => self.epr_pairs_prepared,
            Resource::QubitTransits => self.qubit_transits,
            Resource::BellMeasurements => self.bell_measurements,
            Resource::SingleQubitMeasurements => self.single_qubit_measurements,
            Resource::ClassicalBits => self.classical_bits_sent,
            Resource::AnnouncementBits => self.announcement_bits,
        }
    }

    /// All classical traffic, message-bearing or not.
    pub fn classical_total(&self) -> u64 {
        self.classical_bits_sent + self.announcement_bits
    }
}

impl Add for CostLedger {
    type Output = CostLedger;

    fn add(mut self, rhs: CostLedger) -> CostLedger {
        self += rhs;
        self
    }
}

impl AddAssign for CostLedger {
    fn add_assign(&mut self, rhs: CostLedger) {
        self.epr_pairs_prepared += rhs.epr_pairs_prepared;
        self.qubit_transits += rhs.qubit_transits;
        self.bell_measurements += rhs.bell_measurements;
        self.single_qubit_measurements += rhs.single_qubit_measurements;
        self.classical_bits_sent += rhs.classical_bits_sent;
        self.announcement_bits += rhs.announcement_bits;
    }
}

impl Sum for CostLedger {
    fn sum<I: Iterator<Item = CostLedger>>(iter: I) -> CostLedger {
        iter.fold(CostLedger::default(), Add::add)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resource {
    EprPairs,
    QubitTransits,
    BellMeasurements,
    SingleQubitMeasurements,
    ClassicalBits,
    AnnouncementBits,
}

impl Resource {
    pub const ALL: [Resource; 6] = [
        Resource::EprPairs,
        Resource::QubitTransits,
        Resource::BellMeasurements,
        Resource::SingleQubitMeasurements,
        Resource::ClassicalBits,
        Resource::AnnouncementBits,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Resource::EprPairs => "epr_pairs",
            Resource::QubitTransits => "qubit_transits",
            Resource::BellMeasurements => "bell_measurements",
            Resource::SingleQubitMeasurements => "single_qubit_measurements",
            Resource::ClassicalBits => "classical_bits",
            Resource::AnnouncementBits => "announcement_bits",
        }
    }
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown resource {0:?}")]
pub struct UnknownResource(pub String);

impl FromStr for Resource {
    type Err = UnknownResource;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Resource::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| UnknownResource(s.to_string()))
    }
}

/// Per-unit prices. Resources without a weight cost nothing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CostWeights(pub BTreeMap<Resource, f64>);

impl CostWeights {
    pub fn total(&self, ledger: &CostLedger) -> f64 {
        self.0.iter().map(|(&r, &w)| w * ledger.get(r) as f64).sum()
    }
}

/// Check-round traffic of an `n_pairs` session: position, basis and outcome
/// per first-round sample, position and label per decoy, one verdict bit each.
pub fn announcement_bits(n_pairs: usize, check1: usize, decoy2: usize) -> u64 {
    let w = index_width(n_pairs);
    (check1 * (w + 2) + 1 + decoy2 * (w + 2) + 1) as u64
}

/// Closed-form cost of one delivered session of `n_pairs` pairs.
pub fn cost_oneway(n_pairs: usize, params: &OnewayParams) -> Result<CostLedger, ConfigError> {
    if n_pairs == 0 {
        return Ok(CostLedger::default());
    }
    let c = params.role_counts(n_pairs)?;
    let n = n_pairs as u64;
    Ok(CostLedger {
        epr_pairs_prepared: n,
        qubit_transits: 2 * n,
        bell_measurements: n - c.check1 as u64,
        single_qubit_measurements: 2 * c.check1 as u64,
        classical_bits_sent: 0,
        announcement_bits: announcement_bits(n_pairs, c.check1, c.decoy2),
    })
}

/// One one-way device per direction.
pub fn cost_two_device(len_a: usize, len_b: usize, params: &OnewayParams) -> Result<CostLedger, ConfigError> {
    Ok(cost_oneway(params.pairs_for_bits(len_a)?, params)? + cost_oneway(params.pairs_for_bits(len_b)?, params)?)
}

/// Key bits the reply consumes: payload plus MAC key when authenticated.
pub fn reply_key_demand(len_b: usize, auth: Option<TagLength>) -> usize {
    match auth {
        Some(t) if len_b > 0 => len_b + mac_key_demand(len_b, t),
        _ => len_b,
    }
}

/// Bits Alice must deliver: her message, padded up to the reply key demand.
pub fn duplex_payload_bits(len_a: usize, len_b: usize, auth: Option<TagLength>) -> usize {
    len_a.max(reply_key_demand(len_b, auth))
}

/// One one-way session carrying Alice's (padded) message, plus Bob's public reply.
pub fn cost_duplex(
    len_a: usize,
    len_b: usize,
    params: &OnewayParams,
    auth: Option<TagLength>,
) -> Result<CostLedger, ConfigError> {
    let n = params.pairs_for_bits(duplex_payload_bits(len_a, len_b, auth))?;
    let mut ledger = cost_oneway(n, params)?;
    if len_b > 0 {
        ledger.classical_bits_sent = (len_b + auth.map_or(0, TagLength::bits)) as u64;
    }
    Ok(ledger)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub resource: String,
    pub two_device: u64,
    pub duplex: u64,
    /// `duplex / two_device`, absent when the two-device count is zero.
    pub ratio: Option<f64>,
}

impl ComparisonRow {
    fn new(resource: impl Into<String>, two_device: u64, duplex: u64) -> Self {
        Self {
            resource: resource.into(),
            two_device,
            duplex,
            ratio: (two_device != 0).then(|| duplex as f64 / two_device as f64),
        }
    }

    pub fn difference(&self) -> i64 {
        self.duplex as i64 - self.two_device as i64
    }
}

/// Row name for classical traffic with the check announcements of the
/// two-device strategy charged to both sides.
pub const SHARED_CHECKS_ROW: &str = "classical_total_shared_checks";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyComparison {
    pub len_a: usize,
    pub len_b: usize,
    pub auth_tag_bits: Option<usize>,
    pub two_device: CostLedger,
    pub duplex: CostLedger,
    pub rows: Vec<ComparisonRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weighted: Option<WeightedTotals>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedTotals {
    pub two_device: f64,
    pub duplex: f64,
}

impl StrategyComparison {
    pub fn row(&self, name: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.resource == name)
    }

    pub fn ratio(&self, resource: Resource) -> Option<f64> {
        self.row(resource.name()).and_then(|r| r.ratio)
    }
}

pub fn compare_strategies(
    len_a: usize,
    len_b: usize,
    params: &OnewayParams,
    auth: Option<TagLength>,
    weights: Option<&CostWeights>,
) -> Result<StrategyComparison, ConfigError> {
    let two_device = cost_two_device(len_a, len_b, params)?;
    let duplex = cost_duplex(len_a, len_b, params, auth)?;
    let mut rows: Vec<ComparisonRow> = Resource::ALL
        .into_iter()
        .map(|r| ComparisonRow::new(r.name(), two_device.get(r), duplex.get(r)))
        .collect();
    // Charging both sides the same check traffic isolates the payload cost.
    let shared = two_device.announcement_bits;
    rows.push(ComparisonRow::new(
        SHARED_CHECKS_ROW,
        shared + two_device.classical_bits_sent,
        shared + duplex.classical_bits_sent,
    ));
    Ok(StrategyComparison {
        len_a,
        len_b,
        auth_tag_bits: auth.map(TagLength::bits),
        two_device,
        duplex,
        rows,
        weighted: weights.map(|w| WeightedTotals {
            two_device: w.total(&two_device),
            duplex: w.total(&duplex),
        }),
    })
}
