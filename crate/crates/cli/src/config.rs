//! Experiment configuration: a flat JSON document whose every field has a
//! default and can be overridden from the command line.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use brochette::nearcritical::SweepAxis;
use brochette::EventSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnMode {
    /// A fresh column set per sample.
    Annealed,
    /// One column set, drawn once from the experiment's `lambda` stream.
    Quenched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    P,
    Q,
    Rho,
    N,
}

impl From<Axis> for SweepAxis {
    fn from(a: Axis) -> Self {
        match a {
            Axis::P => SweepAxis::P,
            Axis::Q => SweepAxis::Q,
            Axis::Rho => SweepAxis::Rho,
            Axis::N => SweepAxis::Scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RenormCheck {
    /// Frequency of bad columns against `1/n`.
    BadColumns,
    /// Conditional lower bound on `W(0)` given its four neighbours.
    Conditional,
    /// Correlations of the block field between sites.
    Dependence,
    /// Parameters handed to the oriented model.
    Theorem,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub seed: u64,
    /// Worker threads; `0` lets rayon decide.
    pub workers: usize,
    /// CSV destination; standard output when absent.
    pub out: Option<PathBuf>,
    /// Record wall-clock time per row. Off by default because it makes
    /// output differ between runs.
    pub timing: bool,

    pub event: String,
    /// Rescales `event` when set.
    pub n: Option<u32>,
    pub p: f64,
    pub q: f64,
    pub rho: f64,
    pub columns: ColumnMode,
    pub samples: u64,

    pub axis: Axis,
    pub grid: Vec<f64>,

    pub epsilon: f64,
    pub n_max: u32,

    pub eta: f64,
    pub check: RenormCheck,
    pub window_radius: i64,
    pub pc_oriented: f64,
    pub inf_lower_bound: f64,

    pub rho_prime: f64,
    pub p_g: f64,
    pub p_b: f64,
    pub depths: Vec<u32>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment_id: "default".into(),
            seed: 1,
            workers: 0,
            out: None,
            timing: false,
            event: "square:n=16".into(),
            n: None,
            p: 0.5,
            q: 0.5,
            rho: 0.0,
            columns: ColumnMode::Annealed,
            samples: 1000,
            axis: Axis::P,
            grid: vec![0.45, 0.5, 0.55],
            epsilon: 0.1,
            n_max: 256,
            eta: 0.3,
            check: RenormCheck::BadColumns,
            window_radius: 2,
            pc_oriented: 0.7055,
            inf_lower_bound: 0.5,
            rho_prime: 1.0,
            p_g: 0.75,
            p_b: 0.75,
            depths: vec![0, 64, 128, 256, 512],
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("invalid experiment config")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The event, rescaled to `n` when that is set.
    pub fn event_spec(&self) -> Result<EventSpec> {
        let spec: EventSpec = self.event.parse().context("field `event`")?;
        match self.n {
            Some(n) => spec.rescaled(n).context("field `n`"),
            None => Ok(spec),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment_id.is_empty() || self.experiment_id.contains(['\n', '\r']) {
            bail!("field `experiment_id` must be a nonempty single line");
        }
        for (name, v) in [
            ("p", self.p),
            ("q", self.q),
            ("rho", self.rho),
            ("rho_prime", self.rho_prime),
            ("p_g", self.p_g),
            ("p_b", self.p_b),
        ] {
            if !(0.0..=1.0).contains(&v) {
                bail!("field `{name}` must lie in [0, 1], got {v}");
            }
        }
        Ok(())
    }
}

/// Command-line overrides shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON experiment config; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub experiment_id: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fill the wall_time_ms column.
    #[arg(long)]
    pub timing: bool,
    /// Event spec, for example `square:n=64` or `annulus:n=8`.
    #[arg(long)]
    pub event: Option<String>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, value_enum)]
    pub columns: Option<ColumnMode>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, value_enum)]
    pub axis: Option<Axis>,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub n_max: Option<u32>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, value_enum)]
    pub check: Option<RenormCheck>,
    #[arg(long)]
    pub window_radius: Option<i64>,
    #[arg(long)]
    pub pc_oriented: Option<f64>,
    #[arg(long)]
    pub inf_lower_bound: Option<f64>,
    #[arg(long)]
    pub rho_prime: Option<f64>,
    #[arg(long)]
    pub p_g: Option<f64>,
    #[arg(long)]
    pub p_b: Option<f64>,
    /// Comma-separated survival depths.
    #[arg(long, value_delimiter = ',')]
    pub depths: Option<Vec<u32>>,
}

impl Overrides {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { c.$field = v.clone(); })*
            };
        }
        set!(
            experiment_id,
            seed,
            workers,
            event,
            p,
            q,
            rho,
            columns,
            samples,
            axis,
            grid,
            epsilon,
            n_max,
            eta,
            check,
            window_radius,
            pc_oriented,
            inf_lower_bound,
            rho_prime,
            p_g,
            p_b,
            depths
        );
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        if self.n.is_some() {
            c.n = self.n;
        }
        c.timing |= self.timing;
        c.validate()?;
        Ok(c)
    }
}
