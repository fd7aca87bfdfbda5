//! Run configuration shared by the `bench` and `ideal` commands.

use std::path::{Path, PathBuf};

use chebhmc::potential::{LabeledDataset, PotentialSpec};
use chebhmc::sampler::{check_schedule, KickMode};
use chebhmc::schedule::{IntegrationSchedule, PermMode, ScheduleKind};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// How the Chebyshev times are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PermChoice {
    Random,
    Identity,
    Reversed,
}

impl PermChoice {
    pub fn mode(self, seed: u64) -> PermMode {
        match self {
            PermChoice::Random => PermMode::Random { seed },
            PermChoice::Identity => PermMode::Identity,
            PermChoice::Reversed => PermMode::Reversed,
        }
    }
}

/// Parameters of a seeded synthetic logistic-regression dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticData {
    pub n: usize,
    pub d: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_alpha() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

fn default_kappa() -> f64 {
    50.0
}

fn default_hard_dim() -> usize {
    10
}

fn default_mixture_dim() -> usize {
    10
}

/// Target selection. `name` picks the family; the other keys are its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    /// `f(x) = sum_j eigenvalues[j] x_j^2`.
    QuadraticDiag { eigenvalues: Vec<f64> },
    Gaussian { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    /// Two-component mixture with means `+-1/2` and identity covariance.
    Mixture {
        #[serde(default = "default_mixture_dim")]
        d: usize,
    },
    /// Bayesian logistic regression on a CSV file or a synthetic dataset.
    Logistic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dataset: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        synthetic: Option<SyntheticData>,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_true")]
        standardize: bool,
    },
    /// Sinusoidally perturbed quadratic with curvature in `[1, kappa]`; `h`
    /// defaults to the leapfrog step.
    Hard {
        #[serde(default = "default_kappa")]
        kappa: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h: Option<f64>,
        #[serde(default = "default_hard_dim")]
        d: usize,
    },
}

impl PotentialConfig {
    /// The correlated two-dimensional Gaussian used by the leapfrog benchmark.
    pub fn correlated_gaussian() -> Self {
        PotentialConfig::Gaussian { mean: vec![0.0, 1.0], cov: vec![vec![1.0, 0.5], vec![0.5, 100.0]] }
    }

    /// `N(0, diag(1, 100))`, the ideal-flow benchmark target.
    pub fn axis_gaussian() -> Self {
        PotentialConfig::Gaussian { mean: vec![0.0, 0.0], cov: vec![vec![1.0, 0.0], vec![0.0, 100.0]] }
    }

    /// Whether the target depends on the leapfrog step.
    pub fn depends_on_theta(&self) -> bool {
        matches!(self, PotentialConfig::Hard { h: None, .. })
    }

    /// Files read when building the target.
    pub fn input_files(&self) -> Vec<&Path> {
        match self {
            PotentialConfig::Logistic { dataset: Some(p), .. } => vec![p.as_path()],
            _ => Vec::new(),
        }
    }

    pub fn build(&self, theta: f64) -> Result<PotentialSpec, HarnessError> {
        let spec = match self {
            PotentialConfig::QuadraticDiag { eigenvalues } => PotentialSpec::quadratic_diag(eigenvalues)?,
            PotentialConfig::Gaussian { mean, cov } => {
                let d = mean.len();
                if cov.len() != d || cov.iter().any(|row| row.len() != d) {
                    return Err(HarnessError::Config(format!("covariance must be {d} x {d}")));
                }
                let flat: Vec<f64> = cov.iter().flatten().copied().collect();
                PotentialSpec::gaussian(mean, &DMatrix::from_row_slice(d, d, &flat))?
            }
            PotentialConfig::Mixture { d } => PotentialSpec::paper_mixture(*d)?,
            PotentialConfig::Logistic { dataset, synthetic, alpha, standardize } => {
                let data = match (dataset, synthetic) {
                    (Some(path), None) => LabeledDataset::from_csv_path(path, *standardize)?,
                    (None, Some(s)) => LabeledDataset::synthetic(s.n, s.d, s.seed)?,
                    _ => {
                        return Err(HarnessError::Config(
                            "logistic needs exactly one of `dataset` and `synthetic`".into(),
                        ))
                    }
                };
                PotentialSpec::logistic_regression(&data, *alpha)?
            }
            PotentialConfig::Hard { kappa, h, d } => PotentialSpec::hard(*kappa, h.unwrap_or(theta), *d)?,
        };
        Ok(spec)
    }
}

/// Which per-run metrics to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricToggles {
    /// Per-chain ESS tables.
    pub ess: bool,
    /// Per-iteration covariance error and binned TV across an ensemble of chains.
    pub series: bool,
}

impl Default for MetricToggles {
    fn default() -> Self {
        MetricToggles { ess: true, series: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialConfig,
    pub schedules: Vec<ScheduleKind>,
    pub k: usize,
    pub perm: PermChoice,
    pub seed: u64,
    pub thetas: Vec<f64>,
    pub repeats: usize,
    /// Ensemble size for series metrics; `None` picks the command default.
    pub chains: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub metrics: MetricToggles,
    pub threads: Option<usize>,
    /// Starting point of every chain; the origin when absent.
    pub initial_point: Option<Vec<f64>>,
    pub kick: KickMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            potential: PotentialConfig::correlated_gaussian(),
            schedules: vec![ScheduleKind::Chebyshev, ScheduleKind::Constant],
            k: 2000,
            perm: PermChoice::Random,
            seed: 0,
            thetas: vec![0.05],
            repeats: 3,
            chains: None,
            out_dir: None,
            metrics: MetricToggles::default(),
            threads: None,
            initial_point: None,
            kick: KickMode::Literal,
        }
    }
}

pub const DEFAULT_IDEAL_CHAINS: usize = 10_000;
pub const DEFAULT_LEAPFROG_CHAINS: usize = 100;

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    /// Seed of repeat `r`; it seeds both the velocity streams and the permutation.
    pub fn repeat_seed(&self, repeat: usize) -> u64 {
        self.seed.wrapping_add(repeat as u64)
    }

    pub fn schedule(&self, kind: ScheduleKind, bounds: chebhmc::chebyshev::SpectralBounds, repeat: usize)
        -> Result<IntegrationSchedule, HarnessError> {
        Ok(IntegrationSchedule::new(kind, self.k, bounds, self.perm.mode(self.repeat_seed(repeat)))?)
    }

    pub fn initial_point(&self, dim: usize) -> Result<Vec<f64>, HarnessError> {
        match &self.initial_point {
            Some(x) if x.len() != dim => {
                Err(HarnessError::Config(format!("initial_point has {} entries, target has dimension {dim}", x.len())))
            }
            Some(x) => Ok(x.clone()),
            None => Ok(vec![0.0; dim]),
        }
    }

    fn validate_common(&self) -> Result<(), HarnessError> {
        if self.k == 0 {
            return Err(HarnessError::Config("k must be at least 1".into()));
        }
        if self.repeats == 0 {
            return Err(HarnessError::Config("repeats must be at least 1".into()));
        }
        if self.schedules.is_empty() {
            return Err(HarnessError::Config("no schedules selected".into()));
        }
        if self.chains == Some(0) {
            return Err(HarnessError::Config("chains must be at least 1".into()));
        }
        if self.metrics.ess && self.k < 4 {
            return Err(HarnessError::Config("ESS needs k >= 4".into()));
        }
        Ok(())
    }

    /// Checks everything the leapfrog benchmark needs before any chain starts.
    pub fn validate_bench(&self) -> Result<(), HarnessError> {
        self.validate_common()?;
        if self.thetas.is_empty() {
            return Err(HarnessError::Config("no step sizes given".into()));
        }
        for &theta in &self.thetas {
            let spec = self.potential.build(theta)?;
            self.initial_point(spec.dim())?;
            for &kind in &self.schedules {
                for r in 0..self.repeats {
                    check_schedule(&self.schedule(kind, spec.bounds(), r)?, theta)?;
                }
            }
        }
        Ok(())
    }

    /// Checks the ideal-flow command preconditions.
    pub fn validate_ideal(&self) -> Result<PotentialSpec, HarnessError> {
        self.validate_common()?;
        let spec = self.potential.build(self.thetas.first().copied().unwrap_or(1.0))?;
        if spec.exact_flow_frame().is_none() {
            return Err(HarnessError::Config(format!(
                "ideal HMC needs a quadratic target; `{}` has no closed-form flow",
                spec.name()
            )));
        }
        self.initial_point(spec.dim())?;
        Ok(spec)
    }
}
