use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chebhmc::schedule::ScheduleKind;
use chebhmc_harness::bench::{run_bench, write_bench};
use chebhmc_harness::config::{PermChoice, RunConfig};
use chebhmc_harness::figure::{figure1, write_figure1, Figure1Params};
use chebhmc_harness::ideal::{run_ideal, write_ideal};
use chebhmc_harness::output::{OutputDir, Provenance};
use chebhmc_harness::verify::{registry, run_checks, FaultInjection};
use chebhmc_harness::HarnessError;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

const OUT_ENV: &str = "CHEBHMC_OUT";
const DEFAULT_OUT: &str = "chebhmc-out";

#[derive(Parser)]
#[command(name = "chebhmc", version, about = "HMC with Chebyshev integration times: checks, figures and benchmarks")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every invariant check and print a pass/fail table.
    Verify(VerifyArgs),
    /// Contraction curves of both schedules and the psi profile.
    Figure1(FigureArgs),
    /// Leapfrog HMC benchmark table.
    Bench(RunArgs),
    /// Ideal (exact-flow) HMC benchmark on a quadratic target.
    Ideal(RunArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Only run checks whose id starts with this prefix.
    #[arg(long)]
    only: Option<String>,
    /// List check ids and exit.
    #[arg(long)]
    list: bool,
    /// Perturb one Chebyshev root by 1% before the cosine-product check.
    #[arg(long)]
    inject_fault: bool,
    /// Also write verify_report.csv to this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(long, default_value_t = 400)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    #[arg(long = "l", default_value_t = 100.0)]
    l: f64,
    /// Spacing of the eigenvalue grid.
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    #[arg(long, value_enum, default_value_t = PermChoice::Random)]
    perm: PermChoice,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100.0)]
    psi_max: f64,
    #[arg(long, default_value_t = 10_000)]
    psi_points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of HMC iterations.
    #[arg(long)]
    k: Option<usize>,
    /// Leapfrog step size; repeat for several.
    #[arg(long)]
    theta: Vec<f64>,
    /// Schedule kind (chebyshev or constant); repeat for several.
    #[arg(long)]
    schedule: Vec<ScheduleKind>,
    #[arg(long, value_enum)]
    perm: Option<PermChoice>,
    #[arg(long)]
    repeats: Option<usize>,
    /// Ensemble size for per-iteration metrics.
    #[arg(long)]
    chains: Option<usize>,
}

impl RunArgs {
    fn resolve(&self, base: RunConfig, threads: Option<usize>) -> Result<RunConfig, HarnessError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_path(path)?,
            None => base,
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(k) = self.k {
            c.k = k;
        }
        if !self.theta.is_empty() {
            c.thetas = self.theta.clone();
        }
        if !self.schedule.is_empty() {
            c.schedules = self.schedule.clone();
        }
        if let Some(p) = self.perm {
            c.perm = p;
        }
        if let Some(r) = self.repeats {
            c.repeats = r;
        }
        if let Some(n) = self.chains {
            c.chains = Some(n);
        }
        if threads.is_some() {
            c.threads = threads;
        }
        if let Some(o) = &self.out {
            c.out_dir = Some(o.clone());
        }
        Ok(c)
    }
}

fn out_dir(flag: Option<&Path>, config: Option<&Path>) -> PathBuf {
    flag.or(config)
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn init_threads(threads: Option<usize>) -> Result<(), HarnessError> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn report_written(out: &OutputDir) {
    for p in out.written() {
        println!("wrote {}", p.display());
    }
}

fn verify(args: &VerifyArgs) -> Result<ExitCode, HarnessError> {
    if args.list {
        for c in registry() {
            println!("{:<16} {:<48} {}", c.module, c.id, c.description);
        }
        return Ok(ExitCode::SUCCESS);
    }
    let fault = FaultInjection { root_perturbation: args.inject_fault.then_some(0.01) };
    let results = run_checks(args.only.as_deref(), &fault);
    if results.is_empty() {
        return Err(HarnessError::Config(format!("no check matches `{}`", args.only.as_deref().unwrap_or(""))));
    }
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status}  {:<48} {:>7.2}s  {}", r.id, r.seconds, r.detail);
    }
    let failures = results.iter().filter(|r| !r.passed).count();
    println!("{} checks, {} passed, {} failed", results.len(), results.len() - failures, failures);
    if let Some(dir) = &args.out {
        let prov = Provenance::new(
            "verify",
            &json!({ "only": args.only, "inject_fault": args.inject_fault }),
            json!({ "fixed": true }),
            &[],
        )?;
        let mut out = OutputDir::create(dir, prov)?;
        let rows = results.iter().map(|r| {
            vec![r.id.to_string(), r.module.to_string(), r.passed.to_string(), r.detail.clone()]
        });
        out.write_csv("verify_report.csv", &["id", "module", "passed", "detail"], rows)?;
        report_written(&out);
    }
    Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn figure(args: &FigureArgs) -> Result<ExitCode, HarnessError> {
    let params = Figure1Params {
        k: args.k,
        m: args.m,
        l: args.l,
        step: args.step,
        perm: args.perm,
        seed: args.seed,
        psi_max: args.psi_max,
        psi_points: args.psi_points,
    };
    let data = figure1(&params)?;
    let prov = Provenance::new("figure1", &params, json!({ "permutation": args.seed }), &[])?;
    let mut out = OutputDir::create(out_dir(args.out.as_deref(), None), prov)?;
    write_figure1(&data, &mut out)?;
    println!(
        "K={}: chebyshev {:.6e}, constant {:.6e}",
        params.k,
        data.chebyshev.last().copied().unwrap_or(1.0),
        data.constant.last().copied().unwrap_or(1.0)
    );
    report_written(&out);
    Ok(ExitCode::SUCCESS)
}

fn seeds(c: &RunConfig) -> serde_json::Value {
    json!({ "base": c.seed, "repeats": (0..c.repeats).map(|r| c.repeat_seed(r)).collect::<Vec<_>>() })
}

fn bench(args: &RunArgs, threads: Option<usize>) -> Result<ExitCode, HarnessError> {
    let c = args.resolve(RunConfig::default(), threads)?;
    init_threads(c.threads)?;
    let report = run_bench(&c)?;
    let prov = Provenance::new("bench", &c, seeds(&c), &c.potential.input_files())?;
    let mut out = OutputDir::create(out_dir(args.out.as_deref(), c.out_dir.as_deref()), prov)?;
    write_bench(&report, &mut out)?;
    println!("{} bounds m={:.6} L={:.6}", report.potential, report.bounds.0, report.bounds.1);
    for cell in &report.cells {
        println!(
            "theta={:<8} {:<10} mean ESS {:>10.2} +- {:<8.2} min ESS {:>10.2} +- {:<8.2} acc {:.3}",
            cell.theta,
            cell.schedule.to_string(),
            cell.mean_ess.mean,
            cell.mean_ess.std,
            cell.min_ess.mean,
            cell.min_ess.std,
            cell.acc_prob.mean
        );
    }
    report_written(&out);
    Ok(ExitCode::SUCCESS)
}

fn ideal(args: &RunArgs, threads: Option<usize>) -> Result<ExitCode, HarnessError> {
    let base = RunConfig { potential: chebhmc_harness::config::PotentialConfig::axis_gaussian(), ..Default::default() };
    let c = args.resolve(base, threads)?;
    init_threads(c.threads)?;
    let report = run_ideal(&c)?;
    let prov = Provenance::new("ideal", &c, seeds(&c), &c.potential.input_files())?;
    let mut out = OutputDir::create(out_dir(args.out.as_deref(), c.out_dir.as_deref()), prov)?;
    write_ideal(&report, &mut out)?;
    for row in &report.table {
        println!(
            "{:<20} mean ESS {:>10.2} +- {:<8.2} min ESS {:>10.2} +- {:.2}",
            row.variant.label(),
            row.mean_ess.mean,
            row.mean_ess.std,
            row.min_ess.mean,
            row.min_ess.std
        );
    }
    report_written(&out);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify(a) => init_threads(cli.threads).and_then(|_| verify(a)),
        Command::Figure1(a) => init_threads(cli.threads).and_then(|_| figure(a)),
        Command::Bench(a) => bench(a, cli.threads),
        Command::Ideal(a) => ideal(a, cli.threads),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
