use std::path::Path;

use chebhmc::schedule::ScheduleKind;
use chebhmc_harness::bench::run_bench;
use chebhmc_harness::config::{MetricToggles, PotentialConfig, RunConfig};

fn chebyshev_over_constant(potential: PotentialConfig, theta: f64) -> (f64, f64) {
    let config = RunConfig {
        potential,
        k: 2000,
        thetas: vec![theta],
        repeats: 3,
        metrics: MetricToggles { ess: true, series: false },
        ..Default::default()
    };
    let r = run_bench(&config).unwrap();
    let mean = |kind| r.cells.iter().find(|c| c.schedule == kind).unwrap().mean_ess.mean;
    (mean(ScheduleKind::Chebyshev), mean(ScheduleKind::Constant))
}

#[test]
fn mixture_prefers_chebyshev() {
    let (cheb, cons) = chebyshev_over_constant(PotentialConfig::Mixture { d: 10 }, 0.01);
    assert!(cheb > cons, "{cheb} vs {cons}");
}

#[test]
fn hard_target_prefers_chebyshev() {
    let (cheb, cons) = chebyshev_over_constant(PotentialConfig::Hard { kappa: 50.0, h: None, d: 10 }, 0.01);
    assert!(cheb > cons, "{cheb} vs {cons}");
}

#[test]
fn gaussian_acceptance_stays_high() {
    let config = RunConfig {
        k: 2000,
        thetas: vec![0.001, 0.05],
        repeats: 1,
        schedules: vec![ScheduleKind::Chebyshev],
        metrics: MetricToggles { ess: true, series: false },
        ..Default::default()
    };
    let r = run_bench(&config).unwrap();
    for run in &r.runs {
        let floor = if run.theta == 0.001 { 0.999 } else { 0.95 };
        assert!(run.acc_prob >= floor, "theta {}: {}", run.theta, run.acc_prob);
    }
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let c = RunConfig::from_path(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            if path.file_stem().is_some_and(|s| s == "ideal") {
                c.validate_ideal().unwrap();
            } else {
                c.validate_bench().unwrap();
            }
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
