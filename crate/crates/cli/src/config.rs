//! Flag set shared by the subcommands, plus the key = value config file
//! that mirrors every flag. Precedence: command line, then config file,
//! then built-in defaults.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use haarthin_core::{GreedyConvention, RectSpec, StrategyConfig, StrategyKind};

#[derive(Args, Debug, Clone, Default)]
pub struct CommonOpts {
    /// Config file with `key = value` lines mirroring these flags.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Dimension of the point space [default: 1].
    #[arg(long)]
    pub dim: Option<usize>,

    /// Maximal rejection probability in (0,1] [default: 1].
    #[arg(long)]
    pub beta: Option<f64>,

    /// monte_carlo | haar | greedy; simulate accepts a comma-separated
    /// list [default: greedy].
    #[arg(long)]
    pub strategy: Option<String>,

    /// Outputs per run; shorthand for a single checkpoint.
    #[arg(long)]
    pub n: Option<u64>,

    /// Comma-separated output sizes at which metrics are recorded.
    #[arg(long)]
    pub checkpoints: Option<String>,

    /// Replications per strategy [default: 20].
    #[arg(long)]
    pub reps: Option<u64>,

    /// Master seed; run r derives its streams from (seed, r) [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,

    /// Lattice order for d >= 2 discrepancy [default: min(log2 n, 10)].
    #[arg(long)]
    pub lattice_order: Option<u32>,

    /// Rectangle "lo1,hi1;lo2,hi2;..." for the bias metric.
    #[arg(long)]
    pub rect: Option<String>,

    /// disc | bias [default: disc].
    #[arg(long)]
    pub metric: Option<String>,

    /// Candidate point file (one point per line); synthetic uniform
    /// stream when absent.
    #[arg(long, value_name = "FILE")]
    pub candidates: Option<PathBuf>,

    /// Output file (table presets: output directory) [default: stdout].
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Greedy sign convention: balance | inverted [default: balance].
    #[arg(long)]
    pub convention: Option<String>,

    /// Record wall-clock seconds in result rows; off by default so output
    /// bytes are reproducible.
    #[arg(long)]
    pub timing: bool,

    /// Echo kept points to this file (thin).
    #[arg(long, value_name = "FILE")]
    pub kept_out: Option<PathBuf>,

    /// Resume the coefficient table from a snapshot (thin).
    #[arg(long, value_name = "FILE")]
    pub state_in: Option<PathBuf>,

    /// Save the final coefficient table to a snapshot (thin).
    #[arg(long, value_name = "FILE")]
    pub state_out: Option<PathBuf>,
}

/// Parses `key = value` lines; `#` starts a comment, blank lines ignored.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`", idx + 1))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            bail!("line {}: empty key or value", idx + 1);
        }
        if map.insert(key.clone(), value).is_some() {
            bail!("line {}: duplicate key {key:?}", idx + 1);
        }
    }
    Ok(map)
}

impl CommonOpts {
    /// Fills unset flags from the config file, if one was given.
    pub fn apply_config_file(mut self) -> Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        let mut map =
            parse_config_text(&text).with_context(|| format!("parsing {}", path.display()))?;
        let mut take = |key: &str| map.remove(key);
        macro_rules! fill {
            ($field:ident, $key:literal) => {
                if self.$field.is_none() {
                    if let Some(v) = take($key) {
                        self.$field =
                            Some(v.parse().map_err(|_| {
                                anyhow!("config key {} has invalid value {v:?}", $key)
                            })?);
                    }
                } else {
                    take($key);
                }
            };
        }
        fill!(dim, "dim");
        fill!(beta, "beta");
        fill!(strategy, "strategy");
        fill!(n, "n");
        fill!(checkpoints, "checkpoints");
        fill!(reps, "reps");
        fill!(seed, "seed");
        fill!(lattice_order, "lattice-order");
        fill!(rect, "rect");
        fill!(metric, "metric");
        fill!(candidates, "candidates");
        fill!(out, "out");
        fill!(convention, "convention");
        fill!(kept_out, "kept-out");
        fill!(state_in, "state-in");
        fill!(state_out, "state-out");
        if !self.timing {
            if let Some(v) = take("timing") {
                self.timing = v
                    .parse()
                    .map_err(|_| anyhow!("config key timing must be true or false"))?;
            }
        } else {
            take("timing");
        }
        if let Some(stray) = map.keys().next() {
            bail!("unknown config key {stray:?}");
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim.unwrap_or(1)
    }

    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or(1.0)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn reps(&self) -> u64 {
        self.reps.unwrap_or(20)
    }

    pub fn convention(&self) -> Result<GreedyConvention> {
        match self.convention.as_deref() {
            None | Some("balance") => Ok(GreedyConvention::Balance),
            Some("inverted") => Ok(GreedyConvention::Inverted),
            Some(other) => bail!("unknown convention {other:?} (expected balance | inverted)"),
        }
    }

    /// Strategy list for simulate; single strategy for thin.
    pub fn strategies(&self) -> Result<Vec<StrategyKind>> {
        let text = self.strategy.as_deref().unwrap_or("greedy");
        text.split(',')
            .map(|name| match name.trim() {
                "monte_carlo" => Ok(StrategyKind::MonteCarlo),
                "haar" => Ok(StrategyKind::Haar),
                "greedy" => Ok(StrategyKind::Greedy),
                other => {
                    bail!("unknown strategy {other:?} (expected monte_carlo | haar | greedy)")
                }
            })
            .collect()
    }

    pub fn single_strategy(&self) -> Result<StrategyConfig> {
        let kinds = self.strategies()?;
        if kinds.len() != 1 {
            bail!("this command takes exactly one strategy");
        }
        let config = StrategyConfig::new(kinds[0], self.dim(), self.beta())
            .map_err(|e| anyhow!("{e}"))?
            .with_convention(self.convention()?);
        Ok(config)
    }

    pub fn rect(&self) -> Result<Option<RectSpec>> {
        match &self.rect {
            None => Ok(None),
            Some(text) => {
                let rect = RectSpec::parse(text).map_err(|e| anyhow!("--rect {text:?}: {e}"))?;
                Ok(Some(rect))
            }
        }
    }

    /// Checkpoint schedule: --checkpoints wins, --n is shorthand for one.
    pub fn checkpoints(&self) -> Result<Vec<u64>> {
        let list: Vec<u64> = match (&self.checkpoints, self.n) {
            (Some(text), _) => text
                .split(',')
                .map(|f| {
                    f.trim()
                        .parse::<u64>()
                        .map_err(|_| anyhow!("bad checkpoint {f:?}"))
                })
                .collect::<Result<_>>()?,
            (None, Some(n)) => vec![n],
            (None, None) => bail!("need --n or --checkpoints"),
        };
        if list.is_empty() || list[0] == 0 {
            bail!("checkpoints must be positive");
        }
        if !list.windows(2).all(|w| w[0] < w[1]) {
            bail!("checkpoints must be strictly increasing");
        }
        Ok(list)
    }
}
