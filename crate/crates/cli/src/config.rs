//! Experiment configuration: a flat `key = value` text format mirroring
//! [`ExperimentConfig`], with `#` comments and sensible defaults.
//!
//! Recognized keys:
//!
//! ```text
//! dataset = synthetic | <path>      # data source (default synthetic)
//! delimiter = tab|comma|space|<c>   # triple-file delimiter (default tab)
//! has_header = true|false           # skip the first line (default false)
//! rating_scale = 5                  # declared scale [1, R]
//! synth_classes = 4                 # synthetic generator settings
//! synth_users = 300
//! synth_items = 50
//! synth_ratings_per_user = 30
//! synth_noise_sigma = 0.3
//! train_users = 200                 # first N users train the model
//! k = 4                             # latent classes
//! em_max_iter = 200
//! em_tol = 1e-6
//! sigma_floor = 0.05
//! seed_items = 3                    # revealed at session start
//! holdout_items = 20                # reserved for MAE evaluation
//! rounds = 5                        # queries per session
//! strategies = random,model_entropy,prediction_entropy,bayesian
//! seed = 42                         # master seed
//! out = out                         # output directory
//! dump_losses = false               # also write per-candidate losses
//! ```

use std::path::PathBuf;
use std::str::FromStr;

use elicit_core::dataset::SynthConfig;
use elicit_core::strategies::StrategyKind;
use thiserror::Error;

/// Delimited-file settings for the loader.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FileFormat {
    pub delimiter: char,
    pub has_header: bool,
}

impl Default for FileFormat {
    fn default() -> Self {
        FileFormat { delimiter: '\t', has_header: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic,
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub format: FileFormat,
    pub rating_scale: u32,
    pub synth: SynthConfig,
    pub train_users: usize,
    pub k: usize,
    pub em_max_iter: usize,
    pub em_tol: f64,
    pub sigma_floor: f64,
    pub seed_count: usize,
    pub holdout_count: usize,
    pub rounds: usize,
    pub strategies: Vec<StrategyKind>,
    pub seed: u64,
    pub out: PathBuf,
    pub dump_losses: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            source: DataSource::Synthetic,
            format: FileFormat::default(),
            rating_scale: 5,
            synth: SynthConfig::default(),
            train_users: 200,
            k: 4,
            em_max_iter: 200,
            em_tol: 1e-6,
            sigma_floor: 0.05,
            seed_count: 3,
            holdout_count: 20,
            rounds: 5,
            strategies: StrategyKind::ALL.to_vec(),
            seed: 42,
            out: PathBuf::from("out"),
            dump_losses: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected 'key = value', got '{text}'")]
    NotKeyValue { line: usize, text: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value for '{key}': {reason}")]
    BadValue { line: usize, key: String, reason: String },
    #[error("rounds must be >= 1")]
    NoRounds,
    #[error("strategies must be non-empty")]
    NoStrategies,
}

fn parse_delimiter(value: &str) -> Option<char> {
    match value {
        "tab" => Some('\t'),
        "comma" => Some(','),
        "space" => Some(' '),
        "semicolon" => Some(';'),
        v if v.chars().count() == 1 => v.chars().next(),
        _ => None,
    }
}

impl ExperimentConfig {
    /// Parse the flat `key = value` format on top of the defaults.
    pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::NotKeyValue { line: line_no, text: line.into() })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |reason: String| ConfigError::BadValue {
                line: line_no,
                key: key.to_string(),
                reason,
            };
            macro_rules! parse_into {
                ($target:expr) => {
                    $target = value.parse().map_err(|e| bad(format!("{e}")))?
                };
            }
            match key {
                "dataset" => {
                    cfg.source = if value == "synthetic" {
                        DataSource::Synthetic
                    } else {
                        DataSource::File { path: PathBuf::from(value) }
                    };
                }
                "delimiter" => {
                    cfg.format.delimiter = parse_delimiter(value)
                        .ok_or_else(|| bad("expected tab, comma, space, semicolon, or one character".into()))?;
                }
                "has_header" => parse_into!(cfg.format.has_header),
                "rating_scale" => {
                    parse_into!(cfg.rating_scale);
                    cfg.synth.rating_scale = cfg.rating_scale;
                }
                "synth_classes" => parse_into!(cfg.synth.classes),
                "synth_users" => parse_into!(cfg.synth.users),
                "synth_items" => parse_into!(cfg.synth.items),
                "synth_ratings_per_user" => parse_into!(cfg.synth.ratings_per_user),
                "synth_noise_sigma" => parse_into!(cfg.synth.noise_sigma),
                "train_users" => parse_into!(cfg.train_users),
                "k" => parse_into!(cfg.k),
                "em_max_iter" => parse_into!(cfg.em_max_iter),
                "em_tol" => parse_into!(cfg.em_tol),
                "sigma_floor" => parse_into!(cfg.sigma_floor),
                "seed_items" => parse_into!(cfg.seed_count),
                "holdout_items" => parse_into!(cfg.holdout_count),
                "rounds" => parse_into!(cfg.rounds),
                "strategies" => {
                    let mut strategies = Vec::new();
                    for part in value.split(',') {
                        strategies.push(
                            StrategyKind::from_str(part).map_err(|e| bad(e.to_string()))?,
                        );
                    }
                    cfg.strategies = strategies;
                }
                "seed" => parse_into!(cfg.seed),
                "out" => cfg.out = PathBuf::from(value),
                "dump_losses" => parse_into!(cfg.dump_losses),
                _ => return Err(ConfigError::UnknownKey { line: line_no, key: key.into() }),
            }
        }
        if cfg.rounds < 1 {
            return Err(ConfigError::NoRounds);
        }
        if cfg.strategies.is_empty() {
            return Err(ConfigError::NoStrategies);
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_protocol_constants() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.seed_count, 3);
        assert_eq!(cfg.holdout_count, 20);
        assert_eq!(cfg.rounds, 5);
        assert_eq!(cfg.strategies.len(), 4);
    }

    #[test]
    fn parses_a_full_config() {
        let text = "\
# comment
dataset = ratings.tsv
delimiter = comma
has_header = true
rating_scale = 6
train_users = 400
k = 10
strategies = random, bayesian
seed = 7
out = results
dump_losses = true
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.source, DataSource::File { path: PathBuf::from("ratings.tsv") });
        assert_eq!(cfg.format.delimiter, ',');
        assert!(cfg.format.has_header);
        assert_eq!(cfg.rating_scale, 6);
        assert_eq!(cfg.train_users, 400);
        assert_eq!(cfg.k, 10);
        assert_eq!(cfg.strategies, vec![StrategyKind::Random, StrategyKind::Bayesian]);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.out, PathBuf::from("results"));
        assert!(cfg.dump_losses);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(
            ExperimentConfig::parse("no_such_key = 1").unwrap_err(),
            ConfigError::UnknownKey { .. }
        ));
        assert!(matches!(
            ExperimentConfig::parse("rounds = soon").unwrap_err(),
            ConfigError::BadValue { .. }
        ));
        assert!(matches!(
            ExperimentConfig::parse("strategies = telepathy").unwrap_err(),
            ConfigError::BadValue { .. }
        ));
        assert!(matches!(
            ExperimentConfig::parse("rounds = 0").unwrap_err(),
            ConfigError::NoRounds
        ));
    }
}
