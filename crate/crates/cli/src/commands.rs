//! The four subcommands as pure functions from configuration to report.

use qsdc_core::adversary::{check_error_probability, EveStrategy};
use qsdc_core::bits::BitString;
use qsdc_core::cost::compare_strategies;
use qsdc_core::duplex::run_duplex;
use qsdc_core::oneway::{EncodeTable, OnewayParams};
use qsdc_core::quantum::BellKind;
use qsdc_core::selfcheck;
use qsdc_core::trials::{analytic_abort_rate, session_with_counts, simulate_oneway_trials, simulate_trials, trial_rng};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{CostBody, OracleBody, Report, RunBody, SessionSample, SweepBody, SweepCell};

/// Monte-Carlo trials of the configured duplex session.
pub fn cmd_run(config: &RunConfig) -> Result<Report<RunBody>, CliError> {
    config.validate()?;
    let eve = config.strategy.0;
    let stats = simulate_trials(&config.duplex, eve, config.trials, config.seed).map_err(CliError::invalid)?;

    // Trial 0 again, keeping its transcript.
    let mut rng = trial_rng(config.seed, 0);
    let m_a = BitString::random(config.duplex.len_a, &mut rng);
    let m_b = BitString::random(config.duplex.len_b, &mut rng);
    let out = run_duplex(&config.duplex, &m_a, &m_b, eve, &mut rng).map_err(CliError::invalid)?;
    let sample = SessionSample {
        status: out.status,
        session_id: out.session_id,
        plan: out.plan,
        costs: out.costs,
        frames: out.transcript,
    };
    Ok(Report::new("run", config, RunBody { stats, sample }))
}

fn cell_seed(seed: u64, cell: usize) -> u64 {
    seed.wrapping_add((cell as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Abort rate per (strategy, first-round sample count) against the
/// binomial model built from the oracle's per-sample error.
pub fn cmd_attack_sweep(config: &RunConfig) -> Result<Report<SweepBody>, CliError> {
    config.validate()?;
    let sweep = &config.sweep;
    let base = OnewayParams {
        qber_threshold: sweep.qber_threshold,
        ..config.duplex.oneway.clone()
    };
    let mut cells = Vec::new();
    for strategy in &sweep.strategies {
        let p = check_error_probability(&strategy.0, base.initial_bell).map_err(CliError::invalid)?;
        for &k in &sweep.check_samples {
            let session =
                session_with_counts(k, sweep.decoys, sweep.message_pairs, &base).map_err(CliError::invalid)?;
            let seed = cell_seed(config.seed, cells.len());
            let stats = simulate_oneway_trials(&session, strategy.0, config.trials, seed).map_err(CliError::invalid)?;
            let analytic_abort = analytic_abort_rate(k as u64, p, base.qber_threshold);
            cells.push(SweepCell {
                strategy: strategy.to_string(),
                k,
                n_pairs: session.n_pairs,
                trials: config.trials,
                per_check_error: p,
                analytic_detection: 1.0 - (1.0 - p).powi(k as i32),
                analytic_abort,
                abort_rate: stats.abort_rate,
                abort_rate_check1: stats.abort_rate_check1,
                abort_std_error: (analytic_abort * (1.0 - analytic_abort) / config.trials as f64).sqrt(),
                check1_mismatch_rate: stats.check1.mismatch_rate,
                eve_sessions: stats.eve.sessions,
                eve_advantage: stats.eve.mean_accuracy,
            });
        }
    }
    Ok(Report::new("attack-sweep", config, SweepBody { cells }))
}

/// Closed-form resource comparison of one duplex device against two
/// one-way devices.
pub fn cmd_cost_compare(config: &RunConfig) -> Result<Report<CostBody>, CliError> {
    config.duplex.oneway.validate().map_err(CliError::invalid)?;
    let d = &config.duplex;
    let weights = (!config.weights.0.is_empty()).then_some(&config.weights);
    let comparison =
        compare_strategies(d.len_a, d.len_b, &d.oneway, d.auth_tag(), weights).map_err(CliError::invalid)?;
    Ok(Report::new("cost-compare", config, CostBody { comparison }))
}

/// Exhaustive oracle suites for `table` and `initial`.
pub fn oracle_check_with(config: &RunConfig, table: &EncodeTable, initial: BellKind) -> Report<OracleBody> {
    let suites = selfcheck::run_all(table, initial);
    let passed = suites.iter().all(|s| s.passed());
    Report::new("oracle-check", config, OracleBody { passed, suites })
}

pub fn cmd_oracle_check(config: &RunConfig) -> Report<OracleBody> {
    let oneway = &config.duplex.oneway;
    oracle_check_with(config, &oneway.encode_table, oneway.initial_bell)
}

/// The strategy a plain `run` uses when given a list.
pub fn single_strategy(list: &[EveStrategy]) -> Result<EveStrategy, CliError> {
    match list {
        [one] => Ok(*one),
        [] => Err(CliError::Invalid("no strategy given".into())),
        _ => Err(CliError::Invalid(
            "run takes exactly one strategy; use attack-sweep for several".into(),
        )),
    }
}
