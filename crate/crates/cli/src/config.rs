//! TOML run configuration.
//!
//! Every field has a default, and the fully resolved configuration is echoed
//! into each report, so a report alone is enough to regenerate it.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qsdc_core::adversary::EveStrategy;
use qsdc_core::cost::CostWeights;
use qsdc_core::duplex::DuplexConfig;
use qsdc_core::oneway::OnewayParams;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// An [`EveStrategy`] written by name, e.g. `"intercept-resend-z"`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct StrategyName(pub EveStrategy);

impl TryFrom<String> for StrategyName {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
            .map_err(|e: qsdc_core::adversary::AdversaryError| e.to_string())
    }
}

impl From<StrategyName> for String {
    fn from(s: StrategyName) -> String {
        s.0.name()
    }
}

impl FromStr for StrategyName {
    type Err = qsdc_core::adversary::AdversaryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim().parse().map(StrategyName)
    }
}

impl fmt::Display for StrategyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.name())
    }
}

fn default_trials() -> u64 {
    1000
}

fn default_duplex() -> DuplexConfig {
    DuplexConfig::new(128, 128, OnewayParams::default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub strategy: StrategyName,
    #[serde(default = "default_duplex")]
    pub duplex: DuplexConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub weights: CostWeights,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: default_trials(),
            strategy: StrategyName::default(),
            duplex: default_duplex(),
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
            weights: CostWeights::default(),
        }
    }
}

fn default_strategies() -> Vec<StrategyName> {
    vec![
        StrategyName(EveStrategy::None),
        StrategyName(EveStrategy::InterceptResendZ),
        StrategyName(EveStrategy::InterceptResendRandom),
    ]
}

fn default_grid() -> Vec<usize> {
    vec![1, 4, 16, 64]
}

fn default_sweep_pairs() -> usize {
    8
}

/// Parameters of `attack-sweep`. Each grid point `k` runs one-way sessions
/// with exactly `k` first-round samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_strategies")]
    pub strategies: Vec<StrategyName>,
    #[serde(default = "default_grid")]
    pub check_samples: Vec<usize>,
    #[serde(default = "default_sweep_pairs")]
    pub decoys: usize,
    #[serde(default = "default_sweep_pairs")]
    pub message_pairs: usize,
    /// Abort threshold of the sweep sessions; zero aborts on any mismatch.
    #[serde(default)]
    pub qber_threshold: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            strategies: default_strategies(),
            check_samples: default_grid(),
            decoys: default_sweep_pairs(),
            message_pairs: default_sweep_pairs(),
            qber_threshold: 0.0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.strategies.is_empty() {
            return Err(CliError::Invalid("sweep needs at least one strategy".into()));
        }
        if self.check_samples.is_empty() {
            return Err(CliError::Invalid("sweep grid is empty".into()));
        }
        if self.check_samples.contains(&0) {
            return Err(CliError::Invalid(
                "sweep grid contains k = 0 (no first-round samples)".into(),
            ));
        }
        if self.decoys == 0 || self.message_pairs == 0 {
            return Err(CliError::Invalid(
                "sweep sessions need at least one decoy and one message pair".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Reads `path`, or returns the defaults when no path is given.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| CliError::Io {
                    path: p.to_path_buf(),
                    source,
                })?;
                Self::parse(&text, p)
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.trials == 0 {
            return Err(CliError::Invalid("trials must be at least 1".into()));
        }
        self.duplex.plan().map_err(CliError::invalid)?;
        self.sweep.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<RunConfig, CliError> {
        RunConfig::parse(s, Path::new("test.toml"))
    }

    #[test]
    fn empty_is_default() {
        assert_eq!(parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn nested_fields() {
        let cfg = parse(
            r#"
            seed = 9
            strategy = "classical-tamper:3"
            [duplex]
            len_a = 16
            len_b = 8
            auth = true
            [duplex.oneway]
            qber_threshold = 0.1
            initial_bell = "PsiMinus"
            [weights]
            epr_pairs = 2.5
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.strategy.0, EveStrategy::ClassicalTamper { bit: 3 });
        assert_eq!(cfg.duplex.len_b, 8);
        assert_eq!(cfg.duplex.oneway.qber_threshold, 0.1);
        assert_eq!(cfg.weights.0.len(), 1);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        for bad in [
            "sed = 1",
            "[duplex]\nlen_a = 1\nlen_b = 1\ncolour = 2",
            "[duplex]\nlen_a = 1\nlen_b = 1\n[duplex.oneway]\nfraction = 0.1",
            "[weights]\nqubits = 1.0",
            "strategy = \"photon-splitting\"",
            "[sweep]\nk = [1]",
        ] {
            assert!(matches!(parse(bad), Err(CliError::Parse { .. })), "{bad}");
        }
    }

    #[test]
    fn validation() {
        let cfg = RunConfig {
            trials: 0,
            ..RunConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(CliError::Invalid(_))));
        let mut cfg = RunConfig::default();
        cfg.sweep.check_samples = vec![1, 0];
        assert!(matches!(cfg.validate(), Err(CliError::Invalid(_))));
        let mut cfg = RunConfig::default();
        cfg.sweep.strategies.clear();
        assert!(matches!(cfg.validate(), Err(CliError::Invalid(_))));
        let cfg =
            parse("[duplex]\nlen_a = 8\nlen_b = 8\n[duplex.oneway]\ncheck_fraction_1 = 0.7\ncheck_fraction_2 = 0.4")
                .unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Invalid(_))));
    }

    #[test]
    fn echo_round_trips() {
        let cfg = parse("seed = 3\n[sweep]\ncheck_samples = [2, 8]").unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }
}
