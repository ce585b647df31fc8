//! Argument parsing, dispatch and output handling.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qsdc_core::adversary::EveStrategy;
use serde::Serialize;

use crate::commands::{cmd_attack_sweep, cmd_cost_compare, cmd_oracle_check, cmd_run, single_strategy};
use crate::config::{RunConfig, StrategyName};
use crate::error::CliError;
use crate::report::{CostBody, OracleBody, Report, RunBody, SweepBody, Tabular};

#[derive(Debug, Parser)]
#[command(name = "qsdc", version, about = "Two-way secure direct communication simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte-Carlo trials of one duplex configuration.
    Run(Common),
    /// Abort rate and Eve's accuracy per strategy and check-sample count.
    AttackSweep {
        #[command(flatten)]
        common: Common,
        /// First-round sample counts, comma separated.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
    },
    /// Resource counts of one duplex device against two one-way devices.
    CostCompare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        len_a: Option<usize>,
        #[arg(long)]
        len_b: Option<usize>,
        /// Authenticate the reply.
        #[arg(long)]
        auth: bool,
    },
    /// Exhaustive oracle suites; exits 4 if any fails.
    OracleCheck(Common),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Report path; the report goes to stdout when neither this nor the
    /// config names one.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub strategy: Option<Vec<String>>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

impl Common {
    fn strategies(&self) -> Result<Option<Vec<EveStrategy>>, CliError> {
        self.strategy
            .as_ref()
            .map(|names| {
                names
                    .iter()
                    .map(|n| n.parse::<EveStrategy>().map_err(CliError::invalid))
                    .collect()
            })
            .transpose()
    }

    fn load(&self) -> Result<RunConfig, CliError> {
        let mut config = RunConfig::load(self.config.as_deref())?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        if let Some(out) = &self.out {
            match self.format {
                Format::Json => config.output.report = Some(out.clone()),
                Format::Csv => config.output.csv = Some(out.clone()),
            }
        }
        Ok(config)
    }
}

/// Writes through a sibling temporary file so a failed write leaves nothing
/// behind at `path`.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let result = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(contents.as_bytes()).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io)
}

struct Rendered {
    summary: String,
    json: String,
    csv: String,
}

fn render<B: Serialize>(report: &Report<B>, summary: String) -> Result<Rendered, CliError>
where
    Report<B>: Tabular,
{
    Ok(Rendered {
        summary,
        json: report.to_json()?,
        csv: report.to_csv()?,
    })
}

fn emit(rendered: &Rendered, config: &RunConfig, format: Format) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    let mut wrote_file = false;
    let targets = [
        (config.output.report.as_ref(), &rendered.json),
        (config.output.csv.as_ref(), &rendered.csv),
    ];
    for (path, body) in targets {
        if let Some(path) = path {
            write_atomic(path, body)?;
            wrote_file = true;
        }
    }
    let console = |e| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    };
    if wrote_file {
        stdout.write_all(rendered.summary.as_bytes()).map_err(console)?;
    } else {
        let body = match format {
            Format::Json => &rendered.json,
            Format::Csv => &rendered.csv,
        };
        stdout.write_all(body.as_bytes()).map_err(console)?;
        eprint!("{}", rendered.summary);
    }
    Ok(())
}

fn summarize_run(r: &Report<RunBody>) -> String {
    let s = &r.body.stats;
    format!(
        "run: {} trials, seed {}, strategy {}\n  completed {}  aborted (check 1/2) {}/{}  auth failed {}\n  \
         abort rate {:.6}  check-1 mismatch {:.6}  check-2 mismatch {:.6}  throughput {:.6} bits/pair\n",
        s.trials,
        s.seed,
        r.config.strategy,
        s.completed,
        s.aborted_check1,
        s.aborted_check2,
        s.auth_failed,
        s.abort_rate,
        s.check1.mismatch_rate,
        s.check2.mismatch_rate,
        s.throughput_bits_per_pair
    )
}

fn summarize_sweep(r: &Report<SweepBody>) -> String {
    let mut out = format!(
        "{:<26} {:>4} {:>10} {:>10} {:>10}\n",
        "strategy", "k", "abort", "analytic", "3se"
    );
    for c in &r.body.cells {
        out.push_str(&format!(
            "{:<26} {:>4} {:>10.6} {:>10.6} {:>10.6}\n",
            c.strategy,
            c.k,
            c.abort_rate_check1,
            c.analytic_abort,
            3.0 * c.abort_std_error
        ));
    }
    out
}

fn summarize_cost(r: &Report<CostBody>) -> String {
    let c = &r.body.comparison;
    let mut out = format!("cost-compare: L_A = {}, L_B = {}\n", c.len_a, c.len_b);
    out.push_str(&format!(
        "{:<32} {:>10} {:>10} {:>8}\n",
        "resource", "two-device", "duplex", "ratio"
    ));
    for row in &c.rows {
        let ratio = row.ratio.map_or("-".to_string(), |x| format!("{x:.4}"));
        out.push_str(&format!(
            "{:<32} {:>10} {:>10} {:>8}\n",
            row.resource, row.two_device, row.duplex, ratio
        ));
    }
    if let Some(w) = c.weighted {
        out.push_str(&format!(
            "weighted total: two-device {} duplex {}\n",
            w.two_device, w.duplex
        ));
    }
    out
}

fn summarize_oracle(r: &Report<OracleBody>) -> String {
    let mut out = String::new();
    for s in &r.body.suites {
        let verdict = if s.passed() { "PASS" } else { "FAIL" };
        out.push_str(&format!("{verdict} {} ({} cases)\n", s.name, s.cases));
        for f in &s.failures {
            out.push_str(&format!("  {f}\n"));
        }
    }
    out
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(common) => {
            let mut config = common.load()?;
            if let Some(list) = common.strategies()? {
                config.strategy = StrategyName(single_strategy(&list)?);
            }
            let report = cmd_run(&config)?;
            emit(&render(&report, summarize_run(&report))?, &config, common.format)
        }
        Command::AttackSweep { common, grid } => {
            let mut config = common.load()?;
            if let Some(list) = common.strategies()? {
                config.sweep.strategies = list.into_iter().map(StrategyName).collect();
            }
            if let Some(grid) = grid {
                config.sweep.check_samples = grid;
            }
            let report = cmd_attack_sweep(&config)?;
            emit(&render(&report, summarize_sweep(&report))?, &config, common.format)
        }
        Command::CostCompare {
            common,
            len_a,
            len_b,
            auth,
        } => {
            let mut config = common.load()?;
            if let Some(l) = len_a {
                config.duplex.len_a = l;
            }
            if let Some(l) = len_b {
                config.duplex.len_b = l;
            }
            config.duplex.auth |= auth;
            let report = cmd_cost_compare(&config)?;
            emit(&render(&report, summarize_cost(&report))?, &config, common.format)
        }
        Command::OracleCheck(common) => {
            let config = common.load()?;
            let report = cmd_oracle_check(&config);
            emit(&render(&report, summarize_oracle(&report))?, &config, common.format)?;
            if report.body.passed {
                Ok(())
            } else {
                let failed: Vec<&str> = report
                    .body
                    .suites
                    .iter()
                    .filter(|s| !s.passed())
                    .map(|s| s.name)
                    .collect();
                Err(CliError::OracleFailed(failed.join(", ")))
            }
        }
    }
}

/// Parses `args` and runs; clap's own usage errors exit with 2.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
