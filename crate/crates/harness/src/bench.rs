//! Leapfrog HMC benchmark: repeated chains per (schedule, step size) cell.

use std::time::Instant;

use chebhmc::diagnostics::{cov_frobenius_error, discrete_tv, ess_report, TV_BINS};
use chebhmc::potential::PotentialSpec;
use chebhmc::rng::{chain_rng, REFERENCE_STREAM};
use chebhmc::sampler::{run_chain_stream, SamplerOptions};
use chebhmc::schedule::ScheduleKind;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, DEFAULT_LEAPFROG_CHAINS};
use crate::output::{num, OutputDir};
use crate::stats::{draw_gaussian, MeanStd};
use crate::HarnessError;

/// One chain of one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRun {
    pub theta: f64,
    pub schedule: ScheduleKind,
    pub repeat: usize,
    pub seed: u64,
    pub mean_ess: f64,
    pub min_ess: f64,
    /// Mean Metropolis acceptance probability over the chain.
    pub acc_prob: f64,
    /// Fraction of accepted proposals.
    pub accept_rate: f64,
    pub grad_evals: u64,
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchCell {
    pub theta: f64,
    pub schedule: ScheduleKind,
    pub mean_ess: MeanStd,
    pub min_ess: MeanStd,
    pub mean_ess_per_grad: MeanStd,
    pub min_ess_per_grad: MeanStd,
    pub acc_prob: MeanStd,
    #[serde(skip)]
    pub mean_ess_per_sec: MeanStd,
    #[serde(skip)]
    pub min_ess_per_sec: MeanStd,
}

/// Per-iteration ensemble metrics for one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSeries {
    pub theta: f64,
    pub schedule: ScheduleKind,
    pub chains: usize,
    pub cov_error: Vec<f64>,
    pub tv: Vec<f64>,
}

/// Mean-ESS ratio of the Chebyshev to the constant schedule for one step size and repeat.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EssRatio {
    pub theta: f64,
    pub repeat: usize,
    pub seed: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub potential: String,
    pub bounds: (f64, f64),
    pub runs: Vec<BenchRun>,
    pub cells: Vec<BenchCell>,
    pub ratios: Vec<EssRatio>,
    pub series: Vec<BenchSeries>,
}

struct Job {
    theta: f64,
    kind: ScheduleKind,
    repeat: usize,
}

fn build_for(config: &RunConfig, theta: f64, cache: &PotentialSpec) -> Result<PotentialSpec, HarnessError> {
    if config.potential.depends_on_theta() {
        config.potential.build(theta)
    } else {
        Ok(cache.clone())
    }
}

pub fn run_bench(config: &RunConfig) -> Result<BenchReport, HarnessError> {
    config.validate_bench()?;
    let base = config.potential.build(config.thetas[0])?;
    let options = SamplerOptions { kick: config.kick, ..Default::default() };

    let jobs: Vec<Job> = config
        .thetas
        .iter()
        .flat_map(|&theta| {
            config.schedules.iter().flat_map(move |&kind| (0..config.repeats).map(move |repeat| Job { theta, kind, repeat }))
        })
        .collect();

    let runs = jobs
        .par_iter()
        .map(|job| {
            let spec = build_for(config, job.theta, &base)?;
            let schedule = config.schedule(job.kind, spec.bounds(), job.repeat)?;
            let x0 = config.initial_point(spec.dim())?;
            let seed = config.repeat_seed(job.repeat);
            let start = Instant::now();
            let trace = run_chain_stream(spec.model(), &schedule, job.theta, &x0, seed, 0, &options)?;
            let seconds = start.elapsed().as_secs_f64();
            let (mean_ess, min_ess) = if config.metrics.ess {
                let report = ess_report(&trace.samples)?;
                (report.mean_ess, report.min_ess)
            } else {
                (f64::NAN, f64::NAN)
            };
            Ok(BenchRun {
                theta: job.theta,
                schedule: job.kind,
                repeat: job.repeat,
                seed,
                mean_ess,
                min_ess,
                acc_prob: trace.mean_acceptance_ratio(),
                accept_rate: trace.acceptance_rate(),
                grad_evals: trace.grad_evals,
                seconds,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let mut cells = Vec::new();
    for &theta in &config.thetas {
        for &kind in &config.schedules {
            let rs: Vec<&BenchRun> = runs.iter().filter(|r| r.theta == theta && r.schedule == kind).collect();
            let col = |f: &dyn Fn(&BenchRun) -> f64| MeanStd::of(&rs.iter().map(|r| f(r)).collect::<Vec<_>>());
            cells.push(BenchCell {
                theta,
                schedule: kind,
                mean_ess: col(&|r| r.mean_ess),
                min_ess: col(&|r| r.min_ess),
                mean_ess_per_grad: col(&|r| r.mean_ess / r.grad_evals as f64),
                min_ess_per_grad: col(&|r| r.min_ess / r.grad_evals as f64),
                acc_prob: col(&|r| r.acc_prob),
                mean_ess_per_sec: col(&|r| r.mean_ess / r.seconds),
                min_ess_per_sec: col(&|r| r.min_ess / r.seconds),
            });
        }
    }

    let mut ratios = Vec::new();
    for &theta in &config.thetas {
        for repeat in 0..config.repeats {
            let find = |kind| runs.iter().find(|r| r.theta == theta && r.repeat == repeat && r.schedule == kind);
            if let (Some(c), Some(s)) = (find(ScheduleKind::Chebyshev), find(ScheduleKind::Constant)) {
                ratios.push(EssRatio { theta, repeat, seed: c.seed, ratio: c.mean_ess / s.mean_ess });
            }
        }
    }

    let mut series = Vec::new();
    if config.metrics.series {
        for &theta in &config.thetas {
            let spec = build_for(config, theta, &base)?;
            if spec.truth().is_none() {
                continue;
            }
            for &kind in &config.schedules {
                series.push(ensemble_series(config, &spec, theta, kind, &options)?);
            }
        }
    }

    let b = base.bounds();
    Ok(BenchReport { potential: base.name().to_string(), bounds: (b.m(), b.l()), runs, cells, ratios, series })
}

/// Runs `chains` chains of repeat 0 and scores the ensemble at every iteration
/// against exact draws from the target.
fn ensemble_series(
    config: &RunConfig,
    spec: &PotentialSpec,
    theta: f64,
    kind: ScheduleKind,
    options: &SamplerOptions,
) -> Result<BenchSeries, HarnessError> {
    let truth = spec.truth().expect("caller checks for ground truth");
    let chains = config.chains.unwrap_or(DEFAULT_LEAPFROG_CHAINS);
    let schedule = config.schedule(kind, spec.bounds(), 0)?;
    let x0 = config.initial_point(spec.dim())?;
    let seed = config.repeat_seed(0);
    let traces = (0..chains as u64)
        .into_par_iter()
        .map(|c| run_chain_stream(spec.model(), &schedule, theta, &x0, seed, c, options).map(|t| t.samples))
        .collect::<Result<Vec<_>, _>>()?;
    let reference = draw_gaussian(truth, chains, &mut chain_rng(seed, REFERENCE_STREAM))?;
    let (cov_error, tv): (Vec<f64>, Vec<f64>) = (0..=config.k)
        .into_par_iter()
        .map(|k| {
            let at: Vec<Vec<f64>> =
                traces.iter().map(|t| if k == 0 { x0.clone() } else { t[k - 1].clone() }).collect();
            let cov = if chains >= 2 { cov_frobenius_error(&at, &truth.cov)? } else { f64::NAN };
            Ok((cov, discrete_tv(&at, &reference, TV_BINS)?))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?
        .into_iter()
        .unzip();
    Ok(BenchSeries { theta, schedule: kind, chains, cov_error, tv })
}

fn ms(m: &MeanStd) -> [String; 2] {
    [num(m.mean), num(m.std)]
}

/// Writes the deterministic tables, the wall-clock table and the summary JSON.
pub fn write_bench(report: &BenchReport, out: &mut OutputDir) -> Result<(), HarnessError> {
    let rows = report.runs.iter().map(|r| {
        vec![
            num(r.theta),
            r.schedule.to_string(),
            r.repeat.to_string(),
            r.seed.to_string(),
            num(r.mean_ess),
            num(r.min_ess),
            num(r.acc_prob),
            num(r.accept_rate),
            r.grad_evals.to_string(),
        ]
    });
    out.write_csv(
        "bench_runs.csv",
        &["theta", "schedule", "repeat", "seed", "mean_ess", "min_ess", "acc_prob", "accept_rate", "grad_evals"],
        rows,
    )?;

    let rows = report.cells.iter().map(|c| {
        let mut row = vec![num(c.theta), c.schedule.to_string()];
        for m in [&c.mean_ess, &c.min_ess, &c.mean_ess_per_grad, &c.min_ess_per_grad, &c.acc_prob] {
            row.extend(ms(m));
        }
        row
    });
    out.write_csv(
        "bench_table.csv",
        &[
            "theta",
            "schedule",
            "mean_ess",
            "mean_ess_std",
            "min_ess",
            "min_ess_std",
            "mean_ess_per_grad",
            "mean_ess_per_grad_std",
            "min_ess_per_grad",
            "min_ess_per_grad_std",
            "acc_prob",
            "acc_prob_std",
        ],
        rows,
    )?;

    let rows = report.cells.iter().map(|c| {
        let secs = MeanStd::of(
            &report
                .runs
                .iter()
                .filter(|r| r.theta == c.theta && r.schedule == c.schedule)
                .map(|r| r.seconds)
                .collect::<Vec<_>>(),
        );
        let mut row = vec![num(c.theta), c.schedule.to_string()];
        for m in [&secs, &c.mean_ess_per_sec, &c.min_ess_per_sec] {
            row.extend(ms(m));
        }
        row
    });
    out.write_csv(
        "bench_timing.csv",
        &[
            "theta",
            "schedule",
            "seconds",
            "seconds_std",
            "mean_ess_per_sec",
            "mean_ess_per_sec_std",
            "min_ess_per_sec",
            "min_ess_per_sec_std",
        ],
        rows,
    )?;

    for s in &report.series {
        let rows = s
            .cov_error
            .iter()
            .zip(&s.tv)
            .enumerate()
            .map(|(k, (c, t))| vec![k.to_string(), num(*c), num(*t)]);
        out.write_csv(&format!("bench_series_{}_theta{}.csv", s.schedule, s.theta), &["k", "cov_error", "tv"], rows)?;
    }

    #[derive(Serialize)]
    struct Summary<'a> {
        potential: &'a str,
        bounds: (f64, f64),
        cells: &'a [BenchCell],
        ratios: &'a [EssRatio],
    }
    out.write_json(
        "bench_summary.json",
        &Summary { potential: &report.potential, bounds: report.bounds, cells: &report.cells, ratios: &report.ratios },
    )?;
    Ok(())
}
