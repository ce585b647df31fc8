//! Report envelopes and their JSON/CSV renderings.
//!
//! Reports carry no timestamps or host details; the same configuration and
//! seed always render to the same bytes.

use qsdc_core::channel::Frame;
use qsdc_core::cost::{CostLedger, StrategyComparison};
use qsdc_core::duplex::{DuplexPlan, DuplexStatus};
use qsdc_core::selfcheck::SuiteResult;
use qsdc_core::trials::TrialStats;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub const TOOL: &str = "qsdc";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Report<B> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: RunConfig,
    #[serde(flatten)]
    pub body: B,
}

impl<B: Serialize> Report<B> {
    pub fn new(command: &'static str, config: &RunConfig, body: B) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command,
            seed: config.seed,
            config: config.clone(),
            body,
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self).map_err(CliError::invalid)?;
        s.push('\n');
        Ok(s)
    }
}

/// One session replayed on trial 0's generator stream.
#[derive(Debug, Clone, Serialize)]
pub struct SessionSample {
    pub status: DuplexStatus,
    pub session_id: u64,
    pub plan: DuplexPlan,
    pub costs: CostLedger,
    pub frames: Vec<Frame>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunBody {
    pub stats: TrialStats,
    pub sample: SessionSample,
}

impl RunBody {
    /// The statistics section alone, as it appears in the report.
    pub fn stats_json(&self) -> Result<String, CliError> {
        serde_json::to_string_pretty(&self.stats).map_err(CliError::invalid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub strategy: String,
    pub k: usize,
    pub n_pairs: usize,
    pub trials: u64,
    /// Oracle probability that one first-round sample mismatches.
    pub per_check_error: f64,
    /// `1 - (1 - p)^k`: probability at least one of `k` samples mismatches.
    pub analytic_detection: f64,
    /// First-round abort probability at the sweep threshold.
    pub analytic_abort: f64,
    pub abort_rate: f64,
    pub abort_rate_check1: f64,
    pub abort_std_error: f64,
    pub check1_mismatch_rate: f64,
    pub eve_sessions: u64,
    pub eve_advantage: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepBody {
    pub cells: Vec<SweepCell>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CostBody {
    pub comparison: StrategyComparison,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleBody {
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

fn csv_from_rows<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(CliError::invalid)?;
    }
    let bytes = w.into_inner().map_err(CliError::invalid)?;
    String::from_utf8(bytes).map_err(CliError::invalid)
}

#[derive(Serialize)]
struct StatsRow<'a> {
    strategy: &'a str,
    trials: u64,
    seed: u64,
    completed: u64,
    aborted_check1: u64,
    aborted_check2: u64,
    auth_failed: u64,
    abort_rate: f64,
    check1_mismatch_rate: f64,
    check2_mismatch_rate: f64,
    throughput_bits_per_pair: f64,
    eve_mean_accuracy: Option<f64>,
}

#[derive(Serialize)]
struct CostRow<'a> {
    resource: &'a str,
    two_device: u64,
    duplex: u64,
    ratio: Option<f64>,
}

#[derive(Serialize)]
struct SuiteRow<'a> {
    suite: &'a str,
    cases: usize,
    failures: usize,
    passed: bool,
}

/// A report with a flat tabular form.
pub trait Tabular {
    fn to_csv(&self) -> Result<String, CliError>;
}

impl Tabular for Report<RunBody> {
    fn to_csv(&self) -> Result<String, CliError> {
        let s = &self.body.stats;
        let strategy = self.config.strategy.to_string();
        csv_from_rows([StatsRow {
            strategy: &strategy,
            trials: s.trials,
            seed: s.seed,
            completed: s.completed,
            aborted_check1: s.aborted_check1,
            aborted_check2: s.aborted_check2,
            auth_failed: s.auth_failed,
            abort_rate: s.abort_rate,
            check1_mismatch_rate: s.check1.mismatch_rate,
            check2_mismatch_rate: s.check2.mismatch_rate,
            throughput_bits_per_pair: s.throughput_bits_per_pair,
            eve_mean_accuracy: s.eve.mean_accuracy,
        }])
    }
}

impl Tabular for Report<SweepBody> {
    fn to_csv(&self) -> Result<String, CliError> {
        csv_from_rows(&self.body.cells)
    }
}

impl Tabular for Report<CostBody> {
    fn to_csv(&self) -> Result<String, CliError> {
        csv_from_rows(self.body.comparison.rows.iter().map(|r| CostRow {
            resource: &r.resource,
            two_device: r.two_device,
            duplex: r.duplex,
            ratio: r.ratio,
        }))
    }
}

impl Tabular for Report<OracleBody> {
    fn to_csv(&self) -> Result<String, CliError> {
        csv_from_rows(self.body.suites.iter().map(|s| SuiteRow {
            suite: s.name,
            cases: s.cases,
            failures: s.failures.len(),
            passed: s.passed(),
        }))
    }
}
