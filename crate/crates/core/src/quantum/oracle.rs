//! Exact outcome distributions by projector enumeration.
//!
//! This is the ground truth the statistical tests are checked against. It
//! builds every projector as an explicit `2^n × 2^n` matrix and multiplies it
//! into the state vector; it shares no code with the samplers in `measure`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use super::gates::BellKind;
use super::measure::MeasBasis;
use super::state::PureState;
use super::QuantumError;

type Matrix = Vec<Vec<Complex64>>;

/// One measurement in a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanStep {
    Qubit { slot: usize, basis: MeasBasis },
    BellPair { first: usize, second: usize },
}

impl PlanStep {
    pub fn qubit(slot: usize, basis: MeasBasis) -> Self {
        PlanStep::Qubit { slot, basis }
    }

    pub fn bell(first: usize, second: usize) -> Self {
        PlanStep::BellPair { first, second }
    }

    fn slots(&self) -> Vec<usize> {
        match *self {
            PlanStep::Qubit { slot, .. } => vec![slot],
            PlanStep::BellPair { first, second } => vec![first, second],
        }
    }
}

impl From<(usize, MeasBasis)> for PlanStep {
    fn from((slot, basis): (usize, MeasBasis)) -> Self {
        PlanStep::qubit(slot, basis)
    }
}

/// Exact joint distribution keyed by concatenated outcome symbols.
///
/// Single-qubit outcomes contribute `0`/`1`; Bell outcomes contribute the
/// kind's symbol (`phi+`, `psi-`, ...). Zero-probability outcomes are omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    outcomes: BTreeMap<String, f64>,
}

impl OutcomeDistribution {
    pub fn get(&self, label: &str) -> f64 {
        self.outcomes.get(label).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.outcomes.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.outcomes.values().sum()
    }

    /// Adds `weight · other` into `self`; used to build mixtures of branches.
    pub fn accumulate(&mut self, other: &OutcomeDistribution, weight: f64) {
        for (k, &v) in &other.outcomes {
            *self.outcomes.entry(k.clone()).or_insert(0.0) += weight * v;
        }
    }

    /// Maximum absolute difference over the union of outcome labels.
    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> f64 {
        self.outcomes
            .keys()
            .chain(other.outcomes.keys())
            .map(|k| (self.get(k) - other.get(k)).abs())
            .fold(0.0, f64::max)
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        Self {
            outcomes: pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }
}

const ZERO_PROBABILITY: f64 = 1e-15;

/// A post-measurement branch: outcome symbol, probability, collapsed state.
#[derive(Debug, Clone)]
pub struct Branch {
    pub symbol: String,
    pub probability: f64,
    pub state: PureState,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn bit(index: usize, slot: usize, n: usize) -> usize {
    (index >> (n - 1 - slot)) & 1
}

/// Projector `|v⟩⟨v|` on `slot` with identity elsewhere, built elementwise.
fn single_projector(n: usize, slot: usize, v: [Complex64; 2]) -> Matrix {
    let dim = 1 << n;
    let others = |i: usize| i & !(1 << (n - 1 - slot));
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    if others(i) == others(j) {
                        v[bit(i, slot, n)] * v[bit(j, slot, n)].conj()
                    } else {
                        c(0.0)
                    }
                })
                .collect()
        })
        .collect()
}

fn bell_projector(n: usize, first: usize, second: usize, kind: BellKind) -> Matrix {
    let dim = 1 << n;
    let beta = kind.amplitudes();
    let pair_bits = (1 << (n - 1 - first)) | (1 << (n - 1 - second));
    let local = |i: usize| 2 * bit(i, first, n) + bit(i, second, n);
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    if i & !pair_bits == j & !pair_bits {
                        beta[local(i)] * beta[local(j)].conj()
                    } else {
                        c(0.0)
                    }
                })
                .collect()
        })
        .collect()
}

fn apply(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn step_projectors(n: usize, step: &PlanStep) -> Result<Vec<(String, Matrix)>, QuantumError> {
    match *step {
        PlanStep::Qubit { slot, basis } => {
            let h = FRAC_1_SQRT_2;
            let vectors = match basis {
                MeasBasis::Z => [[c(1.0), c(0.0)], [c(0.0), c(1.0)]],
                MeasBasis::X => [[c(h), c(h)], [c(h), c(-h)]],
                MeasBasis::Bell => return Err(QuantumError::InvalidPlan(format!("Bell basis on single slot {slot}"))),
            };
            Ok(vectors
                .iter()
                .enumerate()
                .map(|(b, &v)| (b.to_string(), single_projector(n, slot, v)))
                .collect())
        }
        PlanStep::BellPair { first, second } => Ok(BellKind::ALL
            .iter()
            .map(|&k| (k.symbol().to_string(), bell_projector(n, first, second, k)))
            .collect()),
    }
}

fn validate_plan(state: &PureState, plan: &[PlanStep]) -> Result<(), QuantumError> {
    let mut used = vec![false; state.n_qubits()];
    for step in plan {
        for slot in step.slots() {
            if slot >= state.n_qubits() {
                return Err(QuantumError::InvalidSlot {
                    slot,
                    n_qubits: state.n_qubits(),
                });
            }
            if used[slot] {
                return Err(QuantumError::InvalidPlan(format!("slot {slot} measured twice")));
            }
            used[slot] = true;
        }
    }
    Ok(())
}

/// All nonzero-probability branches of a single measurement step.
pub fn branches(state: &PureState, step: PlanStep) -> Result<Vec<Branch>, QuantumError> {
    validate_plan(state, &[step])?;
    let n = state.n_qubits();
    let mut out = Vec::new();
    for (symbol, proj) in step_projectors(n, &step)? {
        let v = apply(&proj, state.amplitudes());
        let p: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        if p > ZERO_PROBABILITY {
            out.push(Branch {
                symbol,
                probability: p,
                state: PureState::renormalized(n, v, p),
            });
        }
    }
    Ok(out)
}

/// Exact joint distribution of the plan's outcomes.
///
/// Every slot may appear at most once across the plan.
pub fn outcome_distribution(state: &PureState, plan: &[PlanStep]) -> Result<OutcomeDistribution, QuantumError> {
    validate_plan(state, plan)?;
    let n = state.n_qubits();
    let steps: Vec<Vec<(String, Matrix)>> = plan.iter().map(|s| step_projectors(n, s)).collect::<Result<_, _>>()?;

    let mut outcomes = BTreeMap::new();
    let mut frontier = vec![(String::new(), state.amplitudes().to_vec())];
    for projectors in &steps {
        let mut next = Vec::new();
        for (label, v) in &frontier {
            for (symbol, proj) in projectors {
                let w = apply(proj, v);
                let p: f64 = w.iter().map(|a| a.norm_sqr()).sum();
                if p > ZERO_PROBABILITY {
                    next.push((format!("{label}{symbol}"), w));
                }
            }
        }
        frontier = next;
    }
    for (label, v) in frontier {
        let p: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        *outcomes.entry(label).or_insert(0.0) += p;
    }
    Ok(OutcomeDistribution { outcomes })
}

/// The Bell kind the pair is in with certainty, if any.
pub fn identify_bell(state: &PureState, first: usize, second: usize) -> Result<Option<BellKind>, QuantumError> {
    let dist = outcome_distribution(state, &[PlanStep::bell(first, second)])?;
    Ok(BellKind::ALL.into_iter().find(|k| dist.get(k.symbol()) > 1.0 - 1e-12))
}
