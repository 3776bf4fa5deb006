use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use sdnn_core::Metric;

use crate::UsageError;

/// Largest `p` accepted without `--allow-large-p`.
pub const MAX_P: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricArg {
    L1,
    L2,
    Lp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileArg {
    Hp,
    Expected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyArg {
    Scan,
    Tournament,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorArg {
    Gaussian,
    BooleanCube,
    UnitVectors,
    PlantedNn,
    Grid,
    FromFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum FormatArg {
    #[default]
    Json,
    Csv,
}

/// Flags shared by every subcommand. Unset values fall back to the
/// defaults of the experiment being run.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Multiplier for the number of sampling rounds or comparator draws.
    #[arg(long)]
    pub ct: Option<f64>,
    /// Multiplier for the number of sketch rows.
    #[arg(long)]
    pub cm: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub profile: Option<ProfileArg>,
    /// Coordinate bound for the expected-constant profile and grid instances.
    #[arg(long = "delta-grid")]
    pub delta_grid: Option<u32>,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
    /// Runner-up to nearest distance ratio for planted instances.
    #[arg(long)]
    pub gap: Option<f64>,
    #[arg(long, value_enum)]
    pub generator: Option<GeneratorArg>,
    /// Point-set file for `--generator from-file`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Instance count for experiments that are not query trials.
    #[arg(long)]
    pub instances: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: FormatArg,
    /// Record wall-clock times; such reports are no longer bit-reproducible.
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub allow_large_p: bool,
}

/// Fully resolved configuration, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub n: usize,
    pub d: usize,
    pub metric: MetricArg,
    pub p: f64,
    pub eps: f64,
    pub delta: f64,
    pub ct: f64,
    pub cm: f64,
    pub trials: usize,
    pub seed: u64,
    pub profile: ProfileArg,
    pub delta_grid: u32,
    pub strategy: StrategyArg,
    pub gap: f64,
    pub generator: GeneratorArg,
    pub instances: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            n: 10,
            d: 1000,
            metric: MetricArg::L1,
            p: 1.0,
            eps: 0.25,
            delta: 0.1,
            ct: 1.0,
            cm: 1.0,
            trials: 100,
            seed: 1,
            profile: ProfileArg::Hp,
            delta_grid: 100,
            strategy: StrategyArg::Both,
            gap: 2.0,
            generator: GeneratorArg::Gaussian,
            instances: 100,
        }
    }
}

impl Settings {
    /// Overrides `self` with every flag that was given.
    pub fn with_flags(mut self, f: &Flags) -> Result<Self, UsageError> {
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = f.$field { self.$field = v; } )* };
        }
        take!(n, d, metric, p, eps, delta, ct, cm, trials, seed, profile, delta_grid, strategy, gap, generator, instances);
        if f.p.is_some() && f.metric.is_none() {
            self.metric = MetricArg::Lp;
        }
        if self.metric == MetricArg::Lp && self.p > MAX_P && !f.allow_large_p {
            return Err(UsageError(format!("p = {} exceeds {MAX_P}; pass --allow-large-p", self.p)));
        }
        if self.trials == 0 || self.instances == 0 {
            return Err(UsageError("trials and instances must be >= 1".into()));
        }
        Ok(self)
    }

    pub fn metric(&self) -> Result<Metric, UsageError> {
        match self.metric {
            MetricArg::L1 => Ok(Metric::L1),
            MetricArg::L2 => Ok(Metric::L2),
            MetricArg::Lp => Metric::lp(self.p).map_err(|e| UsageError(e.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_defaults() {
        let f = Flags {
            n: Some(7),
            eps: Some(0.1),
            ..Flags::default()
        };
        let s = Settings::default().with_flags(&f).unwrap();
        assert_eq!((s.n, s.eps, s.d), (7, 0.1, Settings::default().d));
    }

    #[test]
    fn p_implies_lp_and_is_capped() {
        let f = Flags {
            p: Some(3.0),
            ..Flags::default()
        };
        let s = Settings::default().with_flags(&f).unwrap();
        assert_eq!(s.metric, MetricArg::Lp);
        assert_eq!(s.metric().unwrap(), Metric::Lp(3.0));

        let big = Flags {
            p: Some(8.5),
            ..Flags::default()
        };
        assert!(Settings::default().with_flags(&big).is_err());
        let allowed = Flags {
            allow_large_p: true,
            ..big
        };
        assert!(Settings::default().with_flags(&allowed).is_ok());
    }

    #[test]
    fn zero_trials_rejected() {
        let f = Flags {
            trials: Some(0),
            ..Flags::default()
        };
        assert!(Settings::default().with_flags(&f).is_err());
    }
}
