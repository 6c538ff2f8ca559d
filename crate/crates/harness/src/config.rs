use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::synth::SyntheticSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Range-quota offline solver.
    Ours,
    /// Exact quotas from the Minor allocation.
    Minor,
    /// Exact quotas from the Major allocation.
    Major,
    /// Exact quotas proportional to group sizes.
    Equality,
    /// One-pass streaming solver.
    Stream,
    /// Exhaustive search (small instances only).
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Ours,
        Algorithm::Minor,
        Algorithm::Major,
        Algorithm::Equality,
        Algorithm::Stream,
        Algorithm::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ours => "ours",
            Algorithm::Minor => "minor",
            Algorithm::Major => "major",
            Algorithm::Equality => "equality",
            Algorithm::Stream => "stream",
            Algorithm::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| HarnessError::Parse(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DataSource {
    Csv {
        path: PathBuf,
        group_col: String,
        #[serde(default = "yes")]
        normalize: bool,
    },
    Synthetic(SyntheticSpec),
}

fn yes() -> bool {
    true
}

fn default_k_fraction() -> f64 {
    0.05
}

fn default_runs() -> usize {
    20
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Ours, Algorithm::Minor, Algorithm::Major]
}

fn default_stream_eps() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: DataSource,
    /// `k = max(1, floor(k_fraction * n))`.
    #[serde(default = "default_k_fraction")]
    pub k_fraction: f64,
    /// Quota slack values; each gives `l_i = floor((1-ε)|S_i|k/n)`,
    /// `u_i = ceil((1+ε)|S_i|k/n)`.
    pub eps_list: Vec<f64>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    /// Ladder resolution of the streaming solver.
    #[serde(default = "default_stream_eps")]
    pub stream_eps: f64,
}

impl ExperimentConfig {
    pub fn synthetic(spec: SyntheticSpec, eps_list: Vec<f64>) -> Self {
        Self {
            source: DataSource::Synthetic(spec),
            k_fraction: default_k_fraction(),
            eps_list,
            runs: default_runs(),
            seed: 0,
            algorithms: default_algorithms(),
            stream_eps: default_stream_eps(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.eps_list.is_empty() {
            return bad("eps_list is empty".into());
        }
        if let Some(e) = self.eps_list.iter().find(|e| !(0.0..1.0).contains(*e)) {
            return bad(format!("eps {e} outside [0, 1)"));
        }
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if !(self.k_fraction > 0.0 && self.k_fraction <= 1.0) {
            return bad(format!("k_fraction {} outside (0, 1]", self.k_fraction));
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms selected".into());
        }
        if !(self.stream_eps > 0.0 && self.stream_eps <= 1.0) {
            return bad(format!("stream_eps {} outside (0, 1]", self.stream_eps));
        }
        if let DataSource::Synthetic(spec) = &self.source {
            spec.validate()?;
        }
        Ok(())
    }

    /// Switches a synthetic source to 5000 points per blob.
    pub fn full_scale(mut self) -> Self {
        if let DataSource::Synthetic(spec) = self.source {
            self.source = DataSource::Synthetic(spec.full_scale());
        }
        self
    }
}

/// Parses JSON when the extension is `.json`, TOML otherwise.
pub fn load_from<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(&text).map_err(|e| HarnessError::Parse(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(&text).map_err(|e| HarnessError::Parse(format!("{}: {e}", path.display())))
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = load_from(path)?;
    config.validate()?;
    Ok(config)
}
