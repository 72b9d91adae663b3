use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::ConfigError;

pub const SEED_ENV: &str = "PARABOLIC_SEED";
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Parser)]
#[command(name = "polymax", version, about = "Experiments for the maximal function along the moment curve")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandKind,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    /// Evaluates the homogeneous norm at a point.
    NormEval,
    /// Vinogradov and van der Corput ratios over random polynomial corpora.
    OscCorpus,
    /// Fourier transforms of the shell and ball curve measures at a frequency.
    SigmaHat,
    /// Poisson kernel certification: characteristic function, Gram matrices, semigroup, subordination.
    KernelVerify,
    /// Supremum search for the dyadic multiplier profile in one dimension.
    MultiplierSup,
    /// Supremum search over a list of dimensions with the log fit.
    LogGrowth,
    /// Sandwich and split checks for the grid maximal operators.
    MaxopCheck,
    /// Runs the acceptance suite.
    Accept,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::NormEval => "norm-eval",
            CommandKind::OscCorpus => "osc-corpus",
            CommandKind::SigmaHat => "sigma-hat",
            CommandKind::KernelVerify => "kernel-verify",
            CommandKind::MultiplierSup => "multiplier-sup",
            CommandKind::LogGrowth => "log-growth",
            CommandKind::MaxopCheck => "maxop-check",
            CommandKind::Accept => "accept",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Ambient dimension (or polynomial degree for osc-corpus).
    #[arg(long, global = true)]
    pub d: Option<usize>,
    /// Comma-separated list of dimensions.
    #[arg(long, global = true, value_delimiter = ',')]
    pub d_list: Option<Vec<usize>>,
    /// Evaluation or sample budget; its meaning depends on the command.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Master seed; falls back to PARABOLIC_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file for the machine-readable results (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Reduced sample sizes.
    #[arg(long, global = true)]
    pub quick: bool,
    /// Comma-separated coordinates of a point or frequency.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub point: Option<Vec<f64>>,
    /// JSON file with defaults for any of the flags above.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub command: Option<CommandKind>,
    pub d: Option<usize>,
    pub d_list: Option<Vec<usize>>,
    pub budget: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub quick: Option<bool>,
    pub point: Option<Vec<f64>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("bad config file {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub d: Option<usize>,
    pub d_list: Option<Vec<usize>>,
    pub budget: Option<usize>,
    pub tol: Option<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub quick: bool,
    pub point: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn new(command: CommandKind) -> Self {
        ExperimentConfig {
            command,
            d: None,
            d_list: None,
            budget: None,
            tol: None,
            seed: DEFAULT_SEED,
            out: None,
            format: Format::Csv,
            quick: false,
            point: None,
        }
    }

    /// Flags over the config file over `PARABOLIC_SEED` over the defaults.
    pub fn resolve(command: CommandKind, flags: Flags, file: FileConfig, env_seed: Option<String>) -> Result<Self, ConfigError> {
        if let Some(c) = file.command {
            if c != command {
                return Err(ConfigError(format!("config file is for `{}`, not `{}`", c.name(), command.name())));
            }
        }
        let env_seed = match env_seed {
            Some(s) => {
                Some(s.trim().parse::<u64>().map_err(|_| ConfigError(format!("{SEED_ENV} must be a 64-bit unsigned integer, got {s:?}")))?)
            }
            None => None,
        };
        let cfg = ExperimentConfig {
            command,
            d: flags.d.or(file.d),
            d_list: flags.d_list.or(file.d_list),
            budget: flags.budget.or(file.budget),
            tol: flags.tol.or(file.tol),
            seed: flags.seed.or(file.seed).or(env_seed).unwrap_or(DEFAULT_SEED),
            out: flags.out.or(file.out),
            format: flags.format.or(file.format).unwrap_or_default(),
            quick: flags.quick || file.quick.unwrap_or(false),
            point: flags.point.or(file.point),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_cli(cli: Cli) -> Result<Self, ConfigError> {
        let file = match &cli.flags.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        ExperimentConfig::resolve(cli.command, cli.flags, file, std::env::var(SEED_ENV).ok())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(ConfigError(format!("tolerance must be positive and finite, got {t}")));
            }
        }
        if self.d == Some(0) {
            return Err(ConfigError("dimension must be at least 1".into()));
        }
        if let Some(list) = &self.d_list {
            if list.is_empty() || list.contains(&0) {
                return Err(ConfigError("d-list must be nonempty with entries >= 1".into()));
            }
        }
        if self.budget == Some(0) {
            return Err(ConfigError("budget must be positive".into()));
        }
        if let Some(p) = &self.point {
            if p.iter().any(|x| !x.is_finite()) {
                return Err(ConfigError("point coordinates must be finite".into()));
            }
        }
        Ok(())
    }

    /// Dimensions from `--d-list`, else `--d`, else `default`.
    pub fn dims(&self, default: &[usize]) -> Vec<usize> {
        match (&self.d_list, self.d) {
            (Some(list), _) => list.clone(),
            (None, Some(d)) => vec![d],
            _ => default.to_vec(),
        }
    }
}

/// Seed of task `task` under `master`: one splitmix64 step of `master ^ task`.
pub fn task_seed(master: u64, task: u64) -> u64 {
    let mut z = (master ^ task).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn seed_note() -> String {
    format!("task seed = splitmix64(master ^ task id); inside a task, {}", polymax::rng::derivation_note())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_and_env() {
        let file = FileConfig { seed: Some(3), budget: Some(50), tol: Some(1e-3), ..Default::default() };
        let flags = Flags { seed: Some(9), ..Default::default() };
        let c = ExperimentConfig::resolve(CommandKind::LogGrowth, flags, file.clone(), Some("11".into())).unwrap();
        assert_eq!((c.seed, c.budget, c.tol), (9, Some(50), Some(1e-3)));
        let c = ExperimentConfig::resolve(CommandKind::LogGrowth, Flags::default(), FileConfig::default(), Some("11".into())).unwrap();
        assert_eq!(c.seed, 11);
        let c = ExperimentConfig::resolve(CommandKind::LogGrowth, Flags::default(), file, Some("11".into())).unwrap();
        assert_eq!(c.seed, 3);
    }

    #[test]
    fn invalid_configs() {
        let bad_tol = Flags { tol: Some(-1.0), ..Default::default() };
        assert!(ExperimentConfig::resolve(CommandKind::SigmaHat, bad_tol, FileConfig::default(), None).is_err());
        assert!(ExperimentConfig::resolve(CommandKind::SigmaHat, Flags::default(), FileConfig::default(), Some("-4".into())).is_err());
        let other = FileConfig { command: Some(CommandKind::Accept), ..Default::default() };
        assert!(ExperimentConfig::resolve(CommandKind::SigmaHat, Flags::default(), other, None).is_err());
        assert!(serde_json::from_str::<FileConfig>(r#"{"sede": 4}"#).is_err());
        let parsed: FileConfig = serde_json::from_str(r#"{"command": "log-growth", "d_list": [1, 2], "format": "json"}"#).unwrap();
        assert_eq!(parsed.command, Some(CommandKind::LogGrowth));
        assert_eq!(parsed.format, Some(Format::Json));
    }

    #[test]
    fn task_seeds_differ() {
        assert_ne!(task_seed(7, 1), task_seed(7, 2));
        assert_eq!(task_seed(7, 1), task_seed(7, 1));
    }
}
