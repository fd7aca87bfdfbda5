//! Ideal (exact-flow) HMC benchmark on quadratic targets: ESS for three
//! orderings of the integration times and per-iteration ensemble metrics.

use chebhmc::diagnostics::{
    cov_frobenius_error, discrete_tv, ess_report, gaussian_w2, sample_covariance, sample_mean, TV_BINS,
};
use chebhmc::flow::{ideal_hmc_in_frame, IdealEnsemble};
use chebhmc::potential::{ExactFlowFrame, PotentialSpec};
use chebhmc::rng::{chain_rng, REFERENCE_STREAM};
use chebhmc::schedule::{IntegrationSchedule, PermMode, ScheduleKind};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, DEFAULT_IDEAL_CHAINS};
use crate::output::{num, OutputDir};
use crate::stats::{draw_gaussian, MeanStd};
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdealVariant {
    ChebyshevRandom,
    ChebyshevIdentity,
    Constant,
}

impl IdealVariant {
    pub const ALL: [IdealVariant; 3] = [IdealVariant::ChebyshevRandom, IdealVariant::ChebyshevIdentity, IdealVariant::Constant];

    pub fn label(self) -> &'static str {
        match self {
            IdealVariant::ChebyshevRandom => "chebyshev_random",
            IdealVariant::ChebyshevIdentity => "chebyshev_identity",
            IdealVariant::Constant => "constant",
        }
    }

    pub fn schedule(self, k: usize, spec: &PotentialSpec, seed: u64) -> Result<IntegrationSchedule, HarnessError> {
        let b = spec.bounds();
        Ok(match self {
            IdealVariant::ChebyshevRandom => IntegrationSchedule::chebyshev(k, b, PermMode::Random { seed })?,
            IdealVariant::ChebyshevIdentity => IntegrationSchedule::chebyshev(k, b, PermMode::Identity)?,
            IdealVariant::Constant => IntegrationSchedule::new(ScheduleKind::Constant, k, b, PermMode::Identity)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdealRun {
    pub variant: IdealVariant,
    pub repeat: usize,
    pub seed: u64,
    pub mean_ess: f64,
    pub min_ess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdealRow {
    pub variant: IdealVariant,
    pub mean_ess: MeanStd,
    pub min_ess: MeanStd,
}

/// Ensemble metrics at iterations `0..=K` for one variant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdealSeries {
    pub variant: IdealVariant,
    pub chains: usize,
    pub cov_error: Vec<f64>,
    pub tv: Vec<f64>,
    /// `W2` between the Gaussian fitted to the ensemble and the target.
    pub gaussian_w2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdealReport {
    pub potential: String,
    pub runs: Vec<IdealRun>,
    pub table: Vec<IdealRow>,
    pub series: Vec<IdealSeries>,
}

fn frame(spec: &PotentialSpec) -> &ExactFlowFrame {
    spec.exact_flow_frame().expect("validated quadratic target")
}

pub fn run_ideal(config: &RunConfig) -> Result<IdealReport, HarnessError> {
    let spec = config.validate_ideal()?;
    let x0 = config.initial_point(spec.dim())?;
    let jobs: Vec<(usize, IdealVariant)> =
        (0..config.repeats).flat_map(|r| IdealVariant::ALL.into_iter().map(move |v| (r, v))).collect();

    let runs = if config.metrics.ess {
        jobs.par_iter()
            .map(|&(repeat, variant)| {
                let seed = config.repeat_seed(repeat);
                let schedule = variant.schedule(config.k, &spec, seed)?;
                let trace = ideal_hmc_in_frame(frame(&spec), &schedule, &x0, seed, 0)?;
                let report = ess_report(trace.samples())?;
                Ok(IdealRun { variant, repeat, seed, mean_ess: report.mean_ess, min_ess: report.min_ess })
            })
            .collect::<Result<Vec<_>, HarnessError>>()?
    } else {
        Vec::new()
    };

    let table = if runs.is_empty() {
        Vec::new()
    } else {
        IdealVariant::ALL
            .iter()
            .map(|&variant| {
                let rs: Vec<&IdealRun> = runs.iter().filter(|r| r.variant == variant).collect();
                IdealRow {
                    variant,
                    mean_ess: MeanStd::of(&rs.iter().map(|r| r.mean_ess).collect::<Vec<_>>()),
                    min_ess: MeanStd::of(&rs.iter().map(|r| r.min_ess).collect::<Vec<_>>()),
                }
            })
            .collect()
    };

    let series = if config.metrics.series {
        IdealVariant::ALL.iter().map(|&v| ensemble_series(config, &spec, &x0, v)).collect::<Result<Vec<_>, _>>()?
    } else {
        Vec::new()
    };

    Ok(IdealReport { potential: spec.name().to_string(), runs, table, series })
}

fn ensemble_series(
    config: &RunConfig,
    spec: &PotentialSpec,
    x0: &[f64],
    variant: IdealVariant,
) -> Result<IdealSeries, HarnessError> {
    let truth = spec.truth().expect("quadratic targets carry their moments");
    let frame = frame(spec);
    let chains = config.chains.unwrap_or(DEFAULT_IDEAL_CHAINS);
    let seed = config.repeat_seed(0);
    let schedule = variant.schedule(config.k, spec, seed)?;
    let reference = draw_gaussian(truth, chains, &mut chain_rng(seed, REFERENCE_STREAM))?;
    let mut ensemble = IdealEnsemble::new(frame.eigenvalues(), vec![frame.to_frame(x0); chains], seed)?;

    let score = |ensemble: &IdealEnsemble| -> Result<(f64, f64, f64), HarnessError> {
        let at: Vec<Vec<f64>> = ensemble.positions().par_iter().map(|y| frame.to_original(y)).collect();
        let tv = discrete_tv(&at, &reference, TV_BINS)?;
        if chains < 2 {
            return Ok((f64::NAN, tv, f64::NAN));
        }
        let cov = cov_frobenius_error(&at, &truth.cov)?;
        let w2 = gaussian_w2(&sample_mean(&at)?, &sample_covariance(&at)?, &truth.mean, &truth.cov)?;
        Ok((cov, tv, w2))
    };

    let mut out = IdealSeries { variant, chains, cov_error: Vec::new(), tv: Vec::new(), gaussian_w2: Vec::new() };
    let mut push = |(c, t, w): (f64, f64, f64)| {
        out.cov_error.push(c);
        out.tv.push(t);
        out.gaussian_w2.push(w);
    };
    push(score(&ensemble)?);
    for &t in schedule.times() {
        ensemble.step(t);
        push(score(&ensemble)?);
    }
    Ok(out)
}

pub fn write_ideal(report: &IdealReport, out: &mut OutputDir) -> Result<(), HarnessError> {
    if !report.runs.is_empty() {
        let rows = report.runs.iter().map(|r| {
            vec![r.variant.label().to_string(), r.repeat.to_string(), r.seed.to_string(), num(r.mean_ess), num(r.min_ess)]
        });
        out.write_csv("ideal_runs.csv", &["variant", "repeat", "seed", "mean_ess", "min_ess"], rows)?;
        let rows = report.table.iter().map(|r| {
            vec![
                r.variant.label().to_string(),
                num(r.mean_ess.mean),
                num(r.mean_ess.std),
                num(r.min_ess.mean),
                num(r.min_ess.std),
            ]
        });
        out.write_csv("ideal_table.csv", &["variant", "mean_ess", "mean_ess_std", "min_ess", "min_ess_std"], rows)?;
    }
    if let Some(first) = report.series.first() {
        let mut header = vec!["k".to_string()];
        for s in &report.series {
            for metric in ["cov_error", "tv", "gaussian_w2"] {
                header.push(format!("{}_{metric}", s.variant.label()));
            }
        }
        let rows = (0..first.tv.len()).map(|k| {
            let mut row = vec![k.to_string()];
            for s in &report.series {
                row.extend([num(s.cov_error[k]), num(s.tv[k]), num(s.gaussian_w2[k])]);
            }
            row
        });
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        out.write_csv("ideal_series.csv", &header, rows)?;
    }
    out.write_json("ideal_summary.json", &serde_json::json!({ "potential": report.potential, "table": report.table }))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{MetricToggles, PotentialConfig};

    #[test]
    fn small_run_shapes_and_stationary_tail() {
        let c = RunConfig {
            potential: PotentialConfig::axis_gaussian(),
            k: 40,
            repeats: 2,
            chains: Some(4000),
            metrics: MetricToggles { ess: true, series: true },
            ..Default::default()
        };
        let r = run_ideal(&c).unwrap();
        assert_eq!(r.runs.len(), 6);
        assert_eq!(r.table.len(), 3);
        assert_eq!(r.series.len(), 3);
        let s = &r.series[0];
        assert_eq!(s.tv.len(), 41);
        // starts far from the target and ends near it
        assert!(s.tv[0] > 0.4);
        assert!(s.gaussian_w2[40] < 0.1 * s.gaussian_w2[0]);
    }

    #[test]
    fn rejects_targets_without_exact_flow() {
        let c = RunConfig { potential: PotentialConfig::Hard { kappa: 10.0, h: Some(0.1), d: 2 }, ..Default::default() };
        assert!(run_ideal(&c).is_err());
    }
}
