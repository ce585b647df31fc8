//! Seeded Monte-Carlo trial runner.
//!
//! Trial `i` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `i`, so
//! trials can run in any order on any number of threads. Results are
//! collected in trial order and reduced sequentially; the same
//! `(config, seed)` always produces bit-identical statistics.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::adversary::{eve_advantage, EveStrategy};
use crate::bits::BitString;
use crate::channel::Link;
use crate::cost::CostLedger;
use crate::duplex::{run_duplex, DuplexConfig, DuplexError, DuplexStatus};
use crate::oneway::{
    run_oneway, BasisTally, CheckReport, CheckRound, OnewayError, OnewayOutcome, OnewayParams, OnewayStatus,
    SessionConfig,
};
use crate::quantum::MeasBasis;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrialError {
    #[error("at least one trial is required")]
    NoTrials,
    #[error(transparent)]
    Duplex(#[from] DuplexError),
    #[error(transparent)]
    Oneway(#[from] OnewayError),
}

/// Generator for trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Check samples pooled over all sessions that reached a round.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PooledCheck {
    pub sessions: u64,
    pub sampled: u64,
    pub mismatches: u64,
    pub mismatch_rate: f64,
    /// Standard error of `mismatch_rate` under a binomial model.
    pub std_error: f64,
    /// Mean over sessions of the per-session error rate.
    pub mean_session_error: f64,
    pub per_basis: BTreeMap<MeasBasis, BasisTally>,
}

impl PooledCheck {
    fn add(&mut self, report: &CheckReport, session_error_sum: &mut f64) {
        self.sessions += 1;
        self.sampled += report.sampled as u64;
        self.mismatches += report.mismatches as u64;
        *session_error_sum += report.error_rate;
        for (&basis, tally) in &report.per_basis {
            let pooled = self.per_basis.entry(basis).or_default();
            pooled.sampled += tally.sampled;
            pooled.mismatches += tally.mismatches;
        }
    }

    fn finish(&mut self, session_error_sum: f64) {
        if self.sampled > 0 {
            let p = self.mismatches as f64 / self.sampled as f64;
            self.mismatch_rate = p;
            self.std_error = (p * (1.0 - p) / self.sampled as f64).sqrt();
        }
        if self.sessions > 0 {
            self.mean_session_error = session_error_sum / self.sessions as f64;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EveSummary {
    /// Sessions in which Eve formed a guess of a delivered message.
    pub sessions: u64,
    pub mean_accuracy: Option<f64>,
    pub min_accuracy: Option<f64>,
    pub max_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrialStats {
    pub trials: u64,
    pub seed: u64,
    pub completed: u64,
    pub aborted_check1: u64,
    pub aborted_check2: u64,
    pub auth_failed: u64,
    /// Fraction of sessions aborted by either quantum check.
    pub abort_rate: f64,
    pub abort_rate_check1: f64,
    pub abort_rate_check2: f64,
    pub auth_fail_rate: f64,
    pub check1: PooledCheck,
    pub check2: PooledCheck,
    /// Delivered quantum payload bits per prepared EPR pair.
    pub throughput_bits_per_pair: f64,
    pub eve: EveSummary,
    pub total_costs: CostLedger,
}

struct Sample {
    oneway: OnewayOutcome,
    auth_failed: bool,
    advantage: Option<f64>,
    costs: CostLedger,
}

fn reduce(samples: Vec<Sample>, seed: u64) -> TrialStats {
    let mut s = TrialStats {
        trials: samples.len() as u64,
        seed,
        ..TrialStats::default()
    };
    let (mut err1, mut err2) = (0.0, 0.0);
    let mut delivered_bits = 0u64;
    let mut accuracy = Vec::new();
    for sample in &samples {
        let o = &sample.oneway;
        s.check1.add(&o.check1, &mut err1);
        if let Some(c2) = &o.check2 {
            s.check2.add(c2, &mut err2);
        }
        match o.status {
            OnewayStatus::Aborted(CheckRound::First) => s.aborted_check1 += 1,
            OnewayStatus::Aborted(CheckRound::Second) => s.aborted_check2 += 1,
            OnewayStatus::Delivered if sample.auth_failed => s.auth_failed += 1,
            OnewayStatus::Delivered => s.completed += 1,
        }
        delivered_bits += o.delivered_bits.len() as u64;
        if let Some(a) = sample.advantage {
            accuracy.push(a);
        }
        s.total_costs += sample.costs;
    }
    s.check1.finish(err1);
    s.check2.finish(err2);
    let n = s.trials as f64;
    s.abort_rate = (s.aborted_check1 + s.aborted_check2) as f64 / n;
    s.abort_rate_check1 = s.aborted_check1 as f64 / n;
    s.abort_rate_check2 = s.aborted_check2 as f64 / n;
    s.auth_fail_rate = s.auth_failed as f64 / n;
    if s.total_costs.epr_pairs_prepared > 0 {
        s.throughput_bits_per_pair = delivered_bits as f64 / s.total_costs.epr_pairs_prepared as f64;
    }
    s.eve = EveSummary {
        sessions: accuracy.len() as u64,
        mean_accuracy: (!accuracy.is_empty()).then(|| accuracy.iter().sum::<f64>() / accuracy.len() as f64),
        min_accuracy: accuracy.iter().copied().reduce(f64::min),
        max_accuracy: accuracy.iter().copied().reduce(f64::max),
    };
    s
}

fn run_parallel<F>(trials: u64, seed: u64, run: F) -> Result<TrialStats, TrialError>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Sample, TrialError> + Sync,
{
    if trials == 0 {
        return Err(TrialError::NoTrials);
    }
    let samples = (0..trials)
        .into_par_iter()
        .map(|i| run(&mut trial_rng(seed, i)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(reduce(samples, seed))
}

/// Independent full duplex sessions with uniformly random messages.
pub fn simulate_trials(
    config: &DuplexConfig,
    eve: EveStrategy,
    trials: u64,
    seed: u64,
) -> Result<TrialStats, TrialError> {
    config.plan()?;
    run_parallel(trials, seed, |rng| {
        let m_a = BitString::random(config.len_a, rng);
        let m_b = BitString::random(config.len_b, rng);
        let out = run_duplex(config, &m_a, &m_b, eve, rng)?;
        let advantage = eve_advantage(&out.eve, &out.payload).ok();
        Ok(Sample {
            auth_failed: out.status == DuplexStatus::AuthFailed,
            oneway: out.oneway,
            advantage,
            costs: out.costs,
        })
    })
}

/// Independent one-way sessions of a fixed size, for calibration sweeps.
pub fn simulate_oneway_trials(
    config: &SessionConfig,
    eve: EveStrategy,
    trials: u64,
    seed: u64,
) -> Result<TrialStats, TrialError> {
    let bits = config.message_bits().map_err(OnewayError::from)?;
    run_parallel(trials, seed, |rng| {
        let message = BitString::random(bits, rng);
        let mut link = Link::new(eve);
        let oneway = run_oneway(config, &message, &mut link, rng)?;
        let advantage = eve_advantage(&link.eve_record(), &message).ok();
        Ok(Sample {
            oneway,
            auth_failed: false,
            advantage,
            costs: link.costs,
        })
    })
}

/// Session with exactly `check1` first-round samples, `decoy2` decoys and
/// `message` message pairs.
pub fn session_with_counts(
    check1: usize,
    decoy2: usize,
    message: usize,
    base: &OnewayParams,
) -> Result<SessionConfig, OnewayError> {
    let n = check1 + decoy2 + message;
    let params = OnewayParams {
        check_fraction_1: check1 as f64 / n as f64,
        check_fraction_2: decoy2 as f64 / n as f64,
        ..base.clone()
    };
    let config = SessionConfig::new(n, params, 0);
    let counts = config.role_counts()?;
    debug_assert_eq!(
        (counts.check1, counts.decoy2, counts.message),
        (check1, decoy2, message)
    );
    Ok(config)
}

/// `P(X ≤ k)` for `X ~ Binomial(n, p)`.
pub fn binomial_cdf(n: u64, k: u64, p: f64) -> f64 {
    if k >= n {
        return 1.0;
    }
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut ln_choose = 0.0;
    let mut total = 0.0;
    for i in 0..=k {
        if i > 0 {
            ln_choose += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        total += (ln_choose + i as f64 * lp + (n - i) as f64 * lq).exp();
    }
    total.min(1.0)
}

/// Largest mismatch count a `k`-sample round tolerates at `threshold`.
pub fn tolerated_mismatches(k: u64, threshold: f64) -> u64 {
    (0..=k)
        .take_while(|&m| m as f64 / k as f64 <= threshold)
        .last()
        .unwrap_or(0)
}

/// Probability a `k`-sample round aborts when each sample errs with
/// probability `p`.
pub fn analytic_abort_rate(k: u64, p: f64, threshold: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    1.0 - binomial_cdf(k, tolerated_mismatches(k, threshold), p)
}

/// Three-standard-error agreement between an observed rate and a model value.
pub fn within_three_se(observed: f64, expected: f64, samples: u64) -> bool {
    let se = (expected * (1.0 - expected) / samples as f64).sqrt();
    // A degenerate model (p = 0 or 1) demands an exact match.
    if se == 0.0 {
        return observed == expected;
    }
    (observed - expected).abs() <= 3.0 * se
}
