//! Experiment configuration: a flat `key = value` text file.
//!
//! Recognized keys (defaults in parentheses):
//!
//! ```text
//! q          field size, power of two            (required)
//! n_symbols  source block length in symbols      (1002 / log2 q)
//! rate       code rate N/M as a fraction `1/3`   (1/3)
//! col_weight nonzeros per column of A            (3)
//! channel    bsc | bec | biawgn                  (required)
//! noise      flip / erasure rate or sigma        (required)
//! source     markov2s | markov4s | iid | <path>  (required)
//! schedules  pus | sus | both                    (both)
//! trials     Monte-Carlo trials                  (300)
//! max_iters  iteration cap per decode            (200)
//! base_seed  64-bit experiment seed              (1)
//! workers    trial-level threads, 0 = all cores  (0)
//! ```
//!
//! Lines starting with `#` and blank lines are ignored.

use std::path::{Path, PathBuf};

use crate::channel::ChannelSpec;
use crate::source::MarkovModel;
use crate::{Error, Result};

/// Which schedules an experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleSelection {
    Pus,
    Sus,
    Both,
}

impl ScheduleSelection {
    pub fn runs_pus(self) -> bool {
        matches!(self, ScheduleSelection::Pus | ScheduleSelection::Both)
    }

    pub fn runs_sus(self) -> bool {
        matches!(self, ScheduleSelection::Sus | ScheduleSelection::Both)
    }
}

/// Source model selection: a built-in name or a transition-matrix file.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    Builtin(String),
    File(PathBuf),
}

impl SourceSpec {
    /// Display name used in CSV output.
    pub fn name(&self) -> String {
        match self {
            SourceSpec::Builtin(name) => name.clone(),
            SourceSpec::File(path) => path.display().to_string(),
        }
    }

    /// Instantiates the model; `q` is the code's field size (used by the
    /// built-in i.i.d. model and to validate the alphabet fits the field).
    pub fn model(&self, q: usize) -> Result<MarkovModel> {
        let model = match self {
            SourceSpec::Builtin(name) => MarkovModel::builtin(name, q)?,
            SourceSpec::File(path) => MarkovModel::load(path)?,
        };
        if model.alphabet() > q {
            return Err(Error::Config(format!(
                "source alphabet {} does not fit in GF({q})",
                model.alphabet()
            )));
        }
        Ok(model)
    }
}

/// Full description of one Monte-Carlo experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub q: usize,
    pub n_symbols: usize,
    /// Code rate N/M as an exact fraction.
    pub rate: (usize, usize),
    pub col_weight: usize,
    pub channel: ChannelSpec,
    pub source: SourceSpec,
    pub schedules: ScheduleSelection,
    pub trials: usize,
    pub max_iters: usize,
    pub base_seed: u64,
    /// Trial-level worker threads; 0 means one per core, 1 forces the
    /// sequential path.
    pub workers: usize,
}

impl ExperimentConfig {
    /// Reads a config file.
    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        ExperimentConfig::parse(&text)
    }

    /// Parses the `key = value` format.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut q = None;
        let mut n_symbols = None;
        let mut rate = None;
        let mut col_weight = None;
        let mut channel_kind: Option<String> = None;
        let mut noise = None;
        let mut source = None;
        let mut schedules = None;
        let mut trials = None;
        let mut max_iters = None;
        let mut base_seed = None;
        let mut workers = None;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| {
                Error::Config(format!("line {}: bad {what} `{value}`", lineno + 1))
            };
            match key {
                "q" => q = Some(value.parse::<usize>().map_err(|_| bad("field size"))?),
                "n_symbols" => {
                    n_symbols = Some(value.parse::<usize>().map_err(|_| bad("block length"))?)
                }
                "rate" => rate = Some(parse_rate(value).ok_or_else(|| bad("rate"))?),
                "col_weight" => {
                    col_weight = Some(value.parse::<usize>().map_err(|_| bad("column weight"))?)
                }
                "channel" => channel_kind = Some(value.to_ascii_lowercase()),
                "noise" => noise = Some(value.parse::<f64>().map_err(|_| bad("noise level"))?),
                "source" => {
                    source = Some(match value {
                        "markov2s" | "markov4s" | "iid" => SourceSpec::Builtin(value.into()),
                        path => SourceSpec::File(PathBuf::from(path)),
                    })
                }
                "schedules" => {
                    schedules = Some(match value.to_ascii_lowercase().as_str() {
                        "pus" => ScheduleSelection::Pus,
                        "sus" => ScheduleSelection::Sus,
                        "both" => ScheduleSelection::Both,
                        _ => return Err(bad("schedule selection")),
                    })
                }
                "trials" => trials = Some(value.parse::<usize>().map_err(|_| bad("trial count"))?),
                "max_iters" => {
                    max_iters = Some(value.parse::<usize>().map_err(|_| bad("iteration cap"))?)
                }
                "base_seed" => base_seed = Some(value.parse::<u64>().map_err(|_| bad("seed"))?),
                "workers" => workers = Some(value.parse::<usize>().map_err(|_| bad("worker count"))?),
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }

        let q = q.ok_or_else(|| Error::Config("missing required key `q`".into()))?;
        if !(2..=256).contains(&q) || !q.is_power_of_two() {
            return Err(Error::Config(format!("unsupported field size q = {q}")));
        }
        let m_bits = q.trailing_zeros() as usize;
        let kind = channel_kind
            .ok_or_else(|| Error::Config("missing required key `channel`".into()))?;
        let noise = noise.ok_or_else(|| Error::Config("missing required key `noise`".into()))?;
        let channel = match kind.as_str() {
            "bsc" => ChannelSpec::Bsc { flip_prob: noise },
            "bec" => ChannelSpec::Bec {
                erasure_prob: noise,
            },
            "biawgn" | "awgn" => ChannelSpec::BiAwgn { sigma: noise },
            other => return Err(Error::Config(format!("unknown channel `{other}`"))),
        };
        let config = ExperimentConfig {
            q,
            n_symbols: n_symbols.unwrap_or_else(|| (1002 / m_bits).max(1)),
            rate: rate.unwrap_or((1, 3)),
            col_weight: col_weight.unwrap_or(3),
            channel,
            source: source.ok_or_else(|| Error::Config("missing required key `source`".into()))?,
            schedules: schedules.unwrap_or(ScheduleSelection::Both),
            trials: trials.unwrap_or(300),
            max_iters: max_iters.unwrap_or(200),
            base_seed: base_seed.unwrap_or(1),
            workers: workers.unwrap_or(0),
        };
        config.validate()?;
        Ok(config)
    }

    /// Cross-field validation.
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n_symbols < 1 {
            return Err(Error::Config("n_symbols must be at least 1".into()));
        }
        self.channel.validate()?;
        Ok(())
    }
}

/// Parses a rate as `num/den`, an integer, or a decimal approximated by
/// the smallest fraction with denominator <= 64 within 1e-9.
pub fn parse_rate(s: &str) -> Option<(usize, usize)> {
    if let Some((num, den)) = s.split_once('/') {
        let num = num.trim().parse::<usize>().ok()?;
        let den = den.trim().parse::<usize>().ok()?;
        if num == 0 || den == 0 {
            return None;
        }
        return Some((num, den));
    }
    if let Ok(n) = s.parse::<usize>() {
        if n == 0 {
            return None;
        }
        return Some((n, 1));
    }
    let value = s.parse::<f64>().ok()?;
    if !(value > 0.0) || !value.is_finite() {
        return None;
    }
    for den in 1..=64usize {
        let num = (value * den as f64).round();
        if num >= 1.0 && (num / den as f64 - value).abs() < 1e-9 {
            return Some((num as usize, den));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_complete_config() {
        let text = "\
# comment line
q = 8
n_symbols = 334
rate = 1/3
col_weight = 3
channel = bsc
noise = 0.08
source = markov2s
schedules = both
trials = 50
max_iters = 100
base_seed = 7
workers = 2
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.q, 8);
        assert_eq!(cfg.n_symbols, 334);
        assert_eq!(cfg.rate, (1, 3));
        assert_eq!(cfg.channel, ChannelSpec::Bsc { flip_prob: 0.08 });
        assert_eq!(cfg.source, SourceSpec::Builtin("markov2s".into()));
        assert_eq!(cfg.schedules, ScheduleSelection::Both);
        assert_eq!(cfg.trials, 50);
        assert_eq!(cfg.base_seed, 7);
        assert_eq!(cfg.workers, 2);
    }

    #[test]
    fn defaults_fill_in() {
        let cfg =
            ExperimentConfig::parse("q = 4\nchannel = bec\nnoise = 0.3\nsource = iid\n").unwrap();
        assert_eq!(cfg.n_symbols, 501);
        assert_eq!(cfg.rate, (1, 3));
        assert_eq!(cfg.col_weight, 3);
        assert_eq!(cfg.trials, 300);
        assert_eq!(cfg.max_iters, 200);
        assert_eq!(cfg.base_seed, 1);
        assert_eq!(cfg.workers, 0);
        assert_eq!(cfg.schedules, ScheduleSelection::Both);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::parse("q = 8\nbogus = 1\n").is_err());
        assert!(ExperimentConfig::parse("q = 7\nchannel = bsc\nnoise = 0.1\nsource = iid\n")
            .is_err());
        assert!(
            ExperimentConfig::parse("q = 2\nchannel = bsc\nnoise = 0.7\nsource = iid\n").is_err(),
            "BSC flip rate above 1/2 must be rejected"
        );
        assert!(ExperimentConfig::parse("q = 2\nchannel = bsc\nnoise = 0.1\n").is_err());
        assert!(ExperimentConfig::parse("q = 2\nchannel = laplace\nnoise = 0.1\nsource = iid\n")
            .is_err());
    }

    #[test]
    fn rate_forms() {
        assert_eq!(parse_rate("1/3"), Some((1, 3)));
        assert_eq!(parse_rate("2/4"), Some((2, 4)));
        assert_eq!(parse_rate("0.5"), Some((1, 2)));
        assert_eq!(parse_rate("0.25"), Some((1, 4)));
        assert_eq!(parse_rate("1"), Some((1, 1)));
        assert_eq!(parse_rate("0"), None);
        assert_eq!(parse_rate("x"), None);
    }

    #[test]
    fn source_model_alphabet_must_fit() {
        let spec = SourceSpec::Builtin("markov4s".into());
        assert!(spec.model(2).is_err());
        assert!(spec.model(4).is_ok());
        assert!(spec.model(8).is_ok());
    }
}
