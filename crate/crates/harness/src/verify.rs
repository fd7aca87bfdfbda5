//! Registry of invariant checks run by `chebhmc verify`.
//!
//! Each check is deterministic (fixed seeds) and reports a one-line detail with
//! the worst value it saw.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use chebhmc::chebyshev::{
    cheb_first_kind, cheb_roots, cosine_product, gd_chebyshev_contraction, phi_bar, psi, rate_bound, root_product,
    SpectralBounds,
};
use chebhmc::diagnostics::{cov_frobenius_error, discrete_tv, ess, gaussian_w2, sample_covariance, sample_mean, TV_BINS};
use chebhmc::flow::{
    contraction_factor, coupled_deviation, coupled_ideal_gap, exact_flow, quadratic_hamiltonian, PhaseState,
};
use chebhmc::potential::{LabeledDataset, PotentialSpec};
use chebhmc::rng::{chain_rng, ChainRng};
use chebhmc::sampler::{hamiltonian, leapfrog, run_chain, run_chain_stream, SamplerOptions};
use chebhmc::schedule::{pair_time_sum, IntegrationSchedule, PermMode};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::stats::{draw_gaussian, median};

/// Deliberate defects for exercising the checks.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FaultInjection {
    /// Relative perturbation applied to root `floor(K/2)` of every root set fed to
    /// the cosine product in the polynomial-domination check.
    pub root_perturbation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn failed(e: impl std::fmt::Display) -> Outcome {
    outcome(false, format!("error: {e}"))
}

pub struct Check {
    pub id: &'static str,
    pub module: &'static str,
    pub description: &'static str,
    run: fn(&FaultInjection) -> Outcome,
}

impl Check {
    pub fn run(&self, fault: &FaultInjection) -> Outcome {
        (self.run)(fault)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: &'static str,
    pub module: &'static str,
    pub description: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(skip)]
    pub seconds: f64,
}

pub fn registry() -> Vec<Check> {
    macro_rules! check {
        ($id:literal, $module:literal, $desc:literal, $f:expr) => {
            Check { id: $id, module: $module, description: $desc, run: $f }
        };
    }
    vec![
        check!("chebyshev.cosine_product_below_polynomial", "chebyshev_core",
            "|cosine product| <= |scaled Chebyshev polynomial| + 1e-12, K = 1..64, 512-point grid on [1, 100]",
            cosine_below_polynomial),
        check!("chebyshev.polynomial_within_rate_bound", "chebyshev_core",
            "max over grid of |scaled Chebyshev polynomial| <= 2((sqrt L - sqrt m)/(sqrt L + sqrt m))^K + 1e-12",
            polynomial_within_rate),
        check!("chebyshev.psi_bounded_by_one", "chebyshev_core",
            "|psi| <= 1 on 10,000 points of [0, 100], equal to 1 only at 0, psi(1) = pi/4",
            psi_bounded),
        check!("chebyshev.polynomial_equals_root_product", "chebyshev_core",
            "closed-form polynomial equals prod(1 - lambda/r_k) to 1e-9 relative (1e-15 absolute floor), K <= 64",
            polynomial_equals_root_product),
        check!("chebyshev.closed_form_matches_recurrence", "chebyshev_core",
            "T_K closed form equals the three-term recurrence to 1e-10 relative, |x| <= 10, K <= 64",
            closed_form_matches_recurrence),
        check!("chebyshev.gradient_descent_matches_polynomial", "chebyshev_core",
            "gradient descent with steps 1/r_k contracts each coordinate by the polynomial value, 1e-10 relative",
            gd_matches_polynomial),
        check!("schedules.pair_sums_nondecreasing", "schedules",
            "eta_k + eta_{K+1-k} nondecreasing in k for K in {4, 10, 100, 400}, m = 1, L = 100",
            pair_sums_nondecreasing),
        check!("schedules.permutation_invariant_product", "schedules",
            "cosine product over the schedule is the same for any two orderings",
            permutation_invariant_product),
        check!("schedules.average_time_near_midpoint", "schedules",
            "average Chebyshev time at K = 400 within 15% of (pi/2)/sqrt(L + m)",
            average_time_near_midpoint),
        check!("potentials.gradient_matches_finite_differences", "potentials",
            "analytic gradients match central differences at 100 points for all five targets",
            gradients_match),
        check!("potentials.mixture_convexity_gate", "potentials",
            "mixture constructor rejects a^T Sigma^-1 a >= 1",
            mixture_gate),
        check!("potentials.hard_curvature_in_range", "potentials",
            "numerical curvature of the hard target is 1 on the first axis and in [kappa/3, kappa] elsewhere",
            hard_curvature),
        check!("potentials.logistic_curvature_floor", "potentials",
            "smallest Hessian eigenvalue of the logistic posterior is at least the prior precision",
            logistic_floor),
        check!("ideal_flow.energy_conserved", "ideal_flow",
            "exact flow conserves H to 1e-10 relative over 1,000 random instances",
            energy_conserved),
        check!("ideal_flow.coupling_identity", "ideal_flow",
            "shared-velocity position gap equals cos(sqrt(2 lambda) t)(x0 - y0) to 1e-12",
            coupling_identity),
        check!("ideal_flow.contraction_within_rate_bound", "ideal_flow",
            "contraction factor of the Chebyshev schedule <= rate bound, K = 1..64, 512-point grid",
            contraction_within_rate),
        check!("ideal_flow.coupled_gap_equals_contraction", "ideal_flow",
            "coupled ideal chains end with gap = contraction factor x initial gap, to 1e-10",
            coupled_gap),
        check!("hmc_sampler.reversible", "hmc_sampler",
            "leapfrog with a velocity flip returns to the start within 1e-8, 100 instances per target",
            reversible),
        check!("hmc_sampler.volume_preserving", "hmc_sampler",
            "finite-difference Jacobian determinant of one leapfrog step is 1 within 1e-4 (d = 1)",
            volume_preserving),
        check!("hmc_sampler.energy_error_second_order", "hmc_sampler",
            "halving the step at fixed time divides median |dH| by a factor in [3.5, 4.5]",
            energy_second_order),
        check!("hmc_sampler.rejection_repeats_position", "hmc_sampler",
            "rejected iterations copy the previous position bit for bit",
            rejection_repeats),
        check!("hmc_sampler.stationary_under_target", "hmc_sampler",
            "10,000 chains started at the target keep mean and covariance within 5% after 50 iterations",
            stationary),
        check!("diagnostics.iid_ess_near_n", "diagnostics",
            "ESS of 10,000 independent draws is in [8,000, 12,000] for three seeds",
            iid_ess),
        check!("diagnostics.tv_symmetric_and_bounded", "diagnostics",
            "binned TV is symmetric and lies in [0, 1]",
            tv_symmetric),
        check!("diagnostics.w2_triangle_inequality", "diagnostics",
            "Gaussian W2 satisfies the triangle inequality on 100 random triples within 1e-8",
            w2_triangle),
        check!("diagnostics.cov_error_order_invariant", "diagnostics",
            "covariance error does not depend on sample order",
            cov_order_invariant),
    ]
}

/// Runs the checks whose id starts with `filter` (all when `None`).
pub fn run_checks(filter: Option<&str>, fault: &FaultInjection) -> Vec<CheckResult> {
    registry()
        .into_par_iter()
        .filter(|c| filter.is_none_or(|f| c.id.starts_with(f)))
        .map(|c| {
            let start = Instant::now();
            let o = c.run(fault);
            CheckResult {
                id: c.id,
                module: c.module,
                description: c.description,
                passed: o.passed,
                detail: o.detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

fn unit_bounds() -> SpectralBounds {
    SpectralBounds::new(1.0, 100.0).expect("valid bounds")
}

fn cosine_below_polynomial(fault: &FaultInjection) -> Outcome {
    let b = unit_bounds();
    let grid = b.uniform_grid(512);
    let mut worst = (f64::NEG_INFINITY, 0, 0.0);
    for k in 1..=64usize {
        let mut roots = cheb_roots(k, b).roots().to_vec();
        if let Some(rel) = fault.root_perturbation {
            roots[k / 2] *= 1.0 + rel;
        }
        for &lambda in &grid {
            let poly = match phi_bar(k as u32, lambda, b) {
                Ok(v) => v,
                Err(e) => return failed(e),
            };
            let excess = cosine_product(lambda, &roots).abs() - poly.abs();
            if excess > worst.0 {
                worst = (excess, k, lambda);
            }
        }
    }
    outcome(worst.0 <= 1e-12, format!("max excess {:.3e} at K={} lambda={:.4}", worst.0, worst.1, worst.2))
}

fn polynomial_within_rate(_: &FaultInjection) -> Outcome {
    let b = unit_bounds();
    let grid = b.uniform_grid(512);
    let mut worst = (f64::NEG_INFINITY, 0);
    for k in 1..=64u32 {
        let mut top: f64 = 0.0;
        for &lambda in &grid {
            match phi_bar(k, lambda, b) {
                Ok(v) => top = top.max(v.abs()),
                Err(e) => return failed(e),
            }
        }
        let excess = top - rate_bound(k, b);
        if excess > worst.0 {
            worst = (excess, k);
        }
    }
    outcome(worst.0 <= 1e-12, format!("max(poly - bound) {:.3e} at K={}", worst.0, worst.1))
}

fn psi_bounded(_: &FaultInjection) -> Outcome {
    let mut top = (0.0f64, 0.0);
    for i in 1..10_000 {
        let x = 100.0 * i as f64 / 9_999.0;
        match psi(x) {
            Ok(v) if v.abs() > top.0 => top = (v.abs(), x),
            Ok(_) => {}
            Err(e) => return failed(e),
        }
    }
    let (at_zero, at_one) = match (psi(0.0), psi(1.0)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return failed(e),
    };
    let passed = top.0 < 1.0 && (at_zero - 1.0).abs() <= 1e-12 && (at_one - std::f64::consts::FRAC_PI_4).abs() <= 1e-9;
    outcome(passed, format!("psi(0)={at_zero}, psi(1)={at_one:.12}, max |psi| off zero {:.6} at x={:.4}", top.0, top.1))
}

fn polynomial_equals_root_product(_: &FaultInjection) -> Outcome {
    let b = unit_bounds();
    let grid = b.uniform_grid(512);
    let mut worst = 0.0f64;
    for k in 1..=64u32 {
        let roots = cheb_roots(k as usize, b);
        for &lambda in &grid {
            let direct = match phi_bar(k, lambda, b) {
                Ok(v) => v,
                Err(e) => return failed(e),
            };
            let product = root_product(lambda, roots.roots());
            let scale = direct.abs().max(product.abs());
            if scale > 0.0 {
                worst = worst.max(((direct - product).abs() - 1e-15).max(0.0) / scale);
            }
        }
    }
    outcome(worst <= 1e-9, format!("max relative gap {worst:.3e}"))
}

fn recurrence(degree: u32, x: f64) -> f64 {
    if degree == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, x);
    for _ in 1..degree {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn closed_form_matches_recurrence(_: &FaultInjection) -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..=64u32 {
        for i in 0..=400 {
            let x = -10.0 + 20.0 * i as f64 / 400.0;
            let oracle = recurrence(k, x);
            worst = worst.max((cheb_first_kind(k, x) - oracle).abs() / oracle.abs().max(1.0));
        }
    }
    outcome(worst <= 1e-10, format!("max relative gap {worst:.3e}"))
}

fn gd_matches_polynomial(_: &FaultInjection) -> Outcome {
    let b = unit_bounds();
    let mut rng = chain_rng(5, 0);
    let eig: Vec<f64> = (0..64).map(|_| rng.random_range(1.0..=100.0)).collect();
    let mut worst = 0.0f64;
    for k in 1..=64u32 {
        let roots = cheb_roots(k as usize, b);
        let w = match gd_chebyshev_contraction(&eig, roots.roots(), &vec![1.0; eig.len()]) {
            Ok(w) => w,
            Err(e) => return failed(e),
        };
        for (wj, &lambda) in w.iter().zip(&eig) {
            let p = match phi_bar(k, lambda, b) {
                Ok(v) => v,
                Err(e) => return failed(e),
            };
            worst = worst.max((wj - p).abs() / p.abs().max(wj.abs()));
        }
    }
    outcome(worst <= 1e-10, format!("max relative gap {worst:.3e}"))
}

fn pair_sums_nondecreasing(_: &FaultInjection) -> Outcome {
    let b = unit_bounds();
    let mut violations = 0usize;
    let mut first = None;
    for degree in [4usize, 10, 100, 400] {
        let sums: Result<Vec<f64>, _> = (1..=degree / 2).map(|k| pair_time_sum(k, degree, b)).collect();
        let sums = match sums {
            Ok(s) => s,
            Err(e) => return failed(e),
        };
        for (k, w) in sums.windows(2).enumerate() {
            if w[1] < w[0] {
                violations += 1;
                first.get_or_insert((degree, k + 1, w[0], w[1]));
            }
        }
    }
    match first {
        None => outcome(true, "all pair sums nondecreasing"),
        Some((d, k, a, c)) => outcome(
            false,
            format!("{violations} decreasing steps; first at K={d}: sum(k={k})={a:.6} > sum(k={})={c:.6}", k + 1),
        ),
    }
}

fn permutation_invariant_product(_: &FaultInjection) -> Outcome {
    let b = unit_bounds();
    let grid = b.uniform_grid(128);
    let mut worst = 0.0f64;
    for (k, s1, s2) in [(5usize, 1u64, 2u64), (17, 3, 4), (64, 5, 6), (400, 7, 8)] {
        let a = IntegrationSchedule::chebyshev(k, b, PermMode::Random { seed: s1 });
        let c = IntegrationSchedule::chebyshev(k, b, PermMode::Random { seed: s2 });
        let (a, c) = match (a, c) {
            (Ok(a), Ok(c)) => (a, c),
            (Err(e), _) | (_, Err(e)) => return failed(e),
        };
        for &lambda in &grid {
            let pa = chebhmc::flow::cosine_product_over_times(lambda, a.times());
            let pc = chebhmc::flow::cosine_product_over_times(lambda, c.times());
            let scale = pa.abs().max(pc.abs());
            if scale > 0.0 {
                worst = worst.max((pa - pc).abs() / scale);
            }
        }
    }
    outcome(worst <= 1e-12, format!("max relative gap {worst:.3e}"))
}

fn average_time_near_midpoint(_: &FaultInjection) -> Outcome {
    let b = unit_bounds();
    let s = match IntegrationSchedule::chebyshev(400, b, PermMode::Identity) {
        Ok(s) => s,
        Err(e) => return failed(e),
    };
    let (_, avg) = s.total_and_average_time();
    let target = FRAC_PI_2 / (b.l() + b.m()).sqrt();
    let rel = (avg - target).abs() / target;
    outcome(rel <= 0.15, format!("average {avg:.6} vs {target:.6}: relative gap {rel:.4}"))
}

fn correlated_gaussian() -> PotentialSpec {
    PotentialSpec::gaussian(&[0.0, 1.0], &DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 100.0]))
        .expect("valid covariance")
}

fn five_targets() -> chebhmc::Result<Vec<PotentialSpec>> {
    Ok(vec![
        PotentialSpec::quadratic_diag(&[0.5, 3.0, 20.0])?,
        correlated_gaussian(),
        PotentialSpec::paper_mixture(10)?,
        PotentialSpec::logistic_regression(&LabeledDataset::synthetic(60, 4, 17)?, 1.0)?,
        PotentialSpec::hard(50.0, 0.01, 10)?,
    ])
}

fn gradients_match(_: &FaultInjection) -> Outcome {
    let targets = match five_targets() {
        Ok(t) => t,
        Err(e) => return failed(e),
    };
    let h = 1e-5;
    let mut worst = (0.0f64, String::new());
    for (i, p) in targets.iter().enumerate() {
        let mut rng = chain_rng(300 + i as u64, 0);
        for _ in 0..100 {
            let x: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(-3.0..3.0)).collect();
            let g = p.gradient(&x);
            for j in 0..p.dim() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fd = (p.value(&xp) - p.value(&xm)) / (2.0 * h);
                let err = (fd - g[j]).abs() / (1.0 + g[j].abs());
                if err > worst.0 {
                    worst = (err, p.name().to_string());
                }
            }
        }
    }
    outcome(worst.0 <= 1e-5, format!("max scaled gap {:.3e} ({})", worst.0, worst.1))
}

fn mixture_gate(_: &FaultInjection) -> Outcome {
    let id = DMatrix::<f64>::identity(2, 2);
    let at_one = PotentialSpec::gaussian_mixture(&[1.0, 0.0], &id).is_err();
    let above = PotentialSpec::gaussian_mixture(&[0.0, 1.3], &id).is_err();
    let scaled = PotentialSpec::gaussian_mixture(&[1.0, 0.0], &(id.clone() * 0.9)).is_err();
    let below = PotentialSpec::gaussian_mixture(&[0.5, 0.0], &id).is_ok();
    let standard = PotentialSpec::paper_mixture(10).is_ok();
    outcome(
        at_one && above && scaled && below && standard,
        format!("reject at 1: {at_one}, above 1: {above}, 1/0.9: {scaled}; accept 0.25: {below}, standard: {standard}"),
    )
}

fn hard_curvature(_: &FaultInjection) -> Outcome {
    let kappa = 50.0;
    let p = match PotentialSpec::hard(kappa, 0.05, 3) {
        Ok(p) => p,
        Err(e) => return failed(e),
    };
    let delta = 1e-6;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut first_axis = 0.0f64;
    for i in 0..=400 {
        let t = -2.0 + 4.0 * i as f64 / 400.0;
        for j in 0..3 {
            let mut xp = vec![0.3; 3];
            let mut xm = vec![0.3; 3];
            xp[j] = t + delta;
            xm[j] = t - delta;
            let curv = (p.gradient(&xp)[j] - p.gradient(&xm)[j]) / (2.0 * delta);
            if j == 0 {
                first_axis = first_axis.max((curv - 1.0).abs());
            } else {
                lo = lo.min(curv);
                hi = hi.max(curv);
            }
        }
    }
    let tol = 1e-4 * kappa;
    let passed = first_axis <= 1e-6 && lo >= kappa / 3.0 - tol && hi <= kappa + tol;
    outcome(passed, format!("first axis off by {first_axis:.2e}; other axes in [{lo:.4}, {hi:.4}]"))
}

fn logistic_floor(_: &FaultInjection) -> Outcome {
    let mut worst = f64::INFINITY;
    for (alpha, seed) in [(1.0, 1u64), (0.25, 2)] {
        let data = match LabeledDataset::synthetic(100, 4, seed) {
            Ok(d) => d,
            Err(e) => return failed(e),
        };
        let p = match PotentialSpec::logistic_regression(&data, alpha) {
            Ok(p) => p,
            Err(e) => return failed(e),
        };
        worst = worst.min(p.bounds().m() / alpha);
        let mut rng = chain_rng(seed, 1);
        for _ in 0..100 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let Some(h) = p.hessian(&x) else {
                return outcome(false, "logistic target has no Hessian");
            };
            let min = h.symmetric_eigenvalues().min();
            worst = worst.min(min / alpha);
        }
    }
    outcome(worst >= 1.0 - 1e-12, format!("min eigenvalue / alpha = {worst:.6}"))
}

fn random_instance(rng: &mut ChainRng) -> (Vec<f64>, PhaseState, f64) {
    let d = rng.random_range(1..=5);
    let lambda: Vec<f64> = (0..d).map(|_| 10f64.powf(rng.random_range(-2.0..2.0))).collect();
    let x: Vec<f64> = (0..d).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
    let v: Vec<f64> = (0..d).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
    (lambda, PhaseState { x, v }, rng.random_range(0.0..10.0))
}

fn energy_conserved(_: &FaultInjection) -> Outcome {
    let mut rng = chain_rng(21, 0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (lambda, s, t) = random_instance(&mut rng);
        let h0 = quadratic_hamiltonian(&lambda, &s);
        let h1 = quadratic_hamiltonian(&lambda, &exact_flow(&lambda, &s, t));
        worst = worst.max((h1 - h0).abs() / h0);
    }
    outcome(worst <= 1e-10, format!("max relative drift {worst:.3e}"))
}

fn coupling_identity(_: &FaultInjection) -> Outcome {
    let mut rng = chain_rng(22, 0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (lambda, s, t) = random_instance(&mut rng);
        let y0: Vec<f64> = (0..lambda.len()).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
        let predicted = coupled_deviation(&lambda, &s.x, &y0, t);
        let a = exact_flow(&lambda, &s, t);
        let b = exact_flow(&lambda, &PhaseState { x: y0.clone(), v: s.v.clone() }, t);
        for j in 0..lambda.len() {
            let scale = 1.0 + s.x[j].abs().max(y0[j].abs());
            worst = worst.max(((a.x[j] - b.x[j]) - predicted[j]).abs() / scale);
        }
    }
    outcome(worst <= 1e-12, format!("max scaled gap {worst:.3e}"))
}

fn contraction_within_rate(_: &FaultInjection) -> Outcome {
    let b = unit_bounds();
    let grid = b.uniform_grid(512);
    let mut worst = (f64::NEG_INFINITY, 0);
    for k in 1..=64usize {
        let s = match IntegrationSchedule::chebyshev(k, b, PermMode::Random { seed: k as u64 }) {
            Ok(s) => s,
            Err(e) => return failed(e),
        };
        let excess = contraction_factor(&grid, &s) - rate_bound(k as u32, b);
        if excess > worst.0 {
            worst = (excess, k);
        }
    }
    outcome(worst.0 <= 1e-12, format!("max(factor - bound) {:.3e} at K={}", worst.0, worst.1))
}

fn coupled_gap(_: &FaultInjection) -> Outcome {
    let b = unit_bounds();
    let mut rng = chain_rng(23, 0);
    let mut worst = 0.0f64;
    for k in [1usize, 5, 20, 64] {
        let s = match IntegrationSchedule::chebyshev(k, b, PermMode::Random { seed: k as u64 }) {
            Ok(s) => s,
            Err(e) => return failed(e),
        };
        for trial in 0..25 {
            let lambda = [rng.random_range(1.0..100.0)];
            let x0 = [rng.random_range(-5.0..5.0)];
            let y0 = [rng.random_range(-5.0..5.0)];
            let gap = match coupled_ideal_gap(&lambda, &s, &x0, &y0, 9, trial) {
                Ok(g) => g[0].abs(),
                Err(e) => return failed(e),
            };
            let expected = contraction_factor(&lambda, &s) * (x0[0] - y0[0]).abs();
            worst = worst.max((gap - expected).abs() / (1.0 + expected));
        }
    }
    outcome(worst <= 1e-10, format!("max gap error {worst:.3e}"))
}

fn reversible(_: &FaultInjection) -> Outcome {
    let targets = match five_targets() {
        Ok(t) => t,
        Err(e) => return failed(e),
    };
    let mut worst = (0.0f64, String::new());
    for (i, p) in targets.iter().enumerate() {
        let mut rng = chain_rng(100 + i as u64, 0);
        let d = p.dim();
        for _ in 0..100 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let theta = rng.random_range(0.05..0.5) / p.bounds().l().sqrt();
            let steps = rng.random_range(1..30usize);
            let s = PhaseState { x, v };
            let round_trip = leapfrog(p.model(), &s, theta, steps).and_then(|f| {
                leapfrog(p.model(), &PhaseState { x: f.x, v: f.v.iter().map(|v| -v).collect() }, theta, steps)
            });
            let back = match round_trip {
                Ok(b) => b,
                Err(e) => return failed(e),
            };
            for j in 0..d {
                let err = (back.x[j] - s.x[j]).abs().max((back.v[j] + s.v[j]).abs());
                if err > worst.0 {
                    worst = (err, p.name().to_string());
                }
            }
        }
    }
    outcome(worst.0 <= 1e-8, format!("max round-trip error {:.3e} ({})", worst.0, worst.1))
}

fn volume_preserving(_: &FaultInjection) -> Outcome {
    let targets = [
        PotentialSpec::quadratic_diag(&[4.0]),
        PotentialSpec::paper_mixture(1),
        PotentialSpec::hard(50.0, 0.05, 1),
    ];
    let mut rng = chain_rng(24, 0);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for p in targets {
        let p = match p {
            Ok(p) => p,
            Err(e) => return failed(e),
        };
        let step = |x: f64, v: f64| {
            leapfrog(p.model(), &PhaseState { x: vec![x], v: vec![v] }, 0.05, 1).map(|o| (o.x[0], o.v[0]))
        };
        for _ in 0..50 {
            let (x, v) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let cols = (|| -> chebhmc::Result<_> {
                Ok((step(x + h, v)?, step(x - h, v)?, step(x, v + h)?, step(x, v - h)?))
            })();
            let ((xp, vp), (xm, vm), (xq, vq), (xr, vr)) = match cols {
                Ok(c) => c,
                Err(e) => return failed(e),
            };
            let det = ((xp - xm) * (vq - vr) - (xq - xr) * (vp - vm)) / (4.0 * h * h);
            worst = worst.max((det - 1.0).abs());
        }
    }
    outcome(worst <= 1e-4, format!("max |det - 1| {worst:.3e}"))
}

/// Median `|dH|` at step sizes `theta` and `theta / 2` over 1,000 target draws,
/// integration time 1.
pub fn energy_error_ratio(theta: f64) -> chebhmc::Result<f64> {
    let p = correlated_gaussian();
    let truth = p.truth().expect("gaussian carries its moments");
    let mut rng = chain_rng(11, 0);
    let starts = draw_gaussian(truth, 1000, &mut rng).map_err(|_| chebhmc::Error::NotPositiveDefinite)?;
    let mut coarse = Vec::with_capacity(starts.len());
    let mut fine = Vec::with_capacity(starts.len());
    for x in starts {
        let v: Vec<f64> = (0..2).map(|_| rng.sample(StandardNormal)).collect();
        let s = PhaseState { x, v };
        let h0 = hamiltonian(p.model(), &s);
        for (step, out) in [(theta, &mut coarse), (theta / 2.0, &mut fine)] {
            let n = (1.0 / step).floor() as usize;
            let end = leapfrog(p.model(), &s, step, n)?;
            out.push((hamiltonian(p.model(), &end) - h0).abs());
        }
    }
    Ok(median(&coarse) / median(&fine))
}

fn energy_second_order(_: &FaultInjection) -> Outcome {
    match energy_error_ratio(0.05) {
        Ok(r) => outcome((3.5..=4.5).contains(&r), format!("median |dH| ratio {r:.4}")),
        Err(e) => failed(e),
    }
}

fn rejection_repeats(_: &FaultInjection) -> Outcome {
    let run = || -> chebhmc::Result<(usize, bool, bool)> {
        let p = PotentialSpec::hard(50.0, 0.2, 10)?;
        let s = IntegrationSchedule::constant(300, p.bounds())?;
        let trace = run_chain(p.model(), &s, 0.12, &[0.0; 10], 3, &SamplerOptions::default())?;
        let mut prev = vec![0.0_f64; 10];
        let mut rejected = 0;
        let mut exact = true;
        for (x, &acc) in trace.samples.iter().zip(&trace.accepted) {
            if !acc {
                rejected += 1;
                exact &= x.iter().zip(&prev).all(|(a, b)| a.to_bits() == b.to_bits());
            }
            prev = x.clone();
        }
        let g = correlated_gaussian();
        let sched = IntegrationSchedule::chebyshev(20, g.bounds(), PermMode::Random { seed: 1 })?;
        let forced = SamplerOptions { zeta_override: Some(1.0), ..Default::default() };
        let t = run_chain(g.model(), &sched, 0.05, &[0.2, -0.3], 4, &forced)?;
        let constant = t.samples.iter().all(|x| x == &vec![0.2, -0.3]) && t.accepted.iter().all(|a| !a);
        Ok((rejected, exact, constant))
    };
    match run() {
        Ok((rejected, exact, constant)) => outcome(
            rejected > 0 && exact && constant,
            format!("{rejected} natural rejections copied exactly: {exact}; forced rejection constant: {constant}"),
        ),
        Err(e) => failed(e),
    }
}

/// Pooled moments of `chains` leapfrog chains started from exact target draws
/// after `k` iterations on the correlated Gaussian. Returns the largest mean
/// error in units of the marginal standard deviation and the relative
/// Frobenius covariance error.
pub fn stationarity_errors(chains: u64, k: usize, seed: u64) -> chebhmc::Result<(f64, f64)> {
    let p = correlated_gaussian();
    let truth = p.truth().expect("gaussian carries its moments").clone();
    let chol = truth.cov.clone().cholesky().ok_or(chebhmc::Error::NotPositiveDefinite)?.unpack();
    let schedule = IntegrationSchedule::chebyshev(k, p.bounds(), PermMode::Random { seed })?;
    let finals = (0..chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = chain_rng(seed, c + chains);
            let z = DVector::from_fn(2, |_, _| rng.sample::<f64, _>(StandardNormal));
            let x0 = (&truth.mean + &chol * z).as_slice().to_vec();
            let t = run_chain_stream(p.model(), &schedule, 0.05, &x0, seed, c, &SamplerOptions::default())?;
            Ok(t.samples.last().expect("k >= 1").clone())
        })
        .collect::<chebhmc::Result<Vec<_>>>()?;
    let mean = sample_mean(&finals)?;
    let cov = sample_covariance(&finals)?;
    let mean_err = (0..2).map(|j| (mean[j] - truth.mean[j]).abs() / truth.cov[(j, j)].sqrt()).fold(0.0, f64::max);
    Ok((mean_err, (&cov - &truth.cov).norm() / truth.cov.norm()))
}

fn stationary(_: &FaultInjection) -> Outcome {
    match stationarity_errors(10_000, 50, 2024) {
        Ok((m, c)) => {
            outcome(m <= 0.05 && c <= 0.05, format!("mean error {m:.4} sd, relative covariance error {c:.4}"))
        }
        Err(e) => failed(e),
    }
}

fn normal_series(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = chain_rng(seed, 0);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn iid_ess(_: &FaultInjection) -> Outcome {
    let mut values = Vec::new();
    for seed in [1u64, 2, 3] {
        match ess(&normal_series(10_000, seed)) {
            Ok(e) => values.push(e),
            Err(e) => return failed(e),
        }
    }
    let passed = values.iter().all(|e| (8_000.0..=12_000.0).contains(e));
    outcome(passed, format!("ESS {:?}", values.iter().map(|e| e.round()).collect::<Vec<_>>()))
}

fn tv_symmetric(_: &FaultInjection) -> Outcome {
    let mut rng = chain_rng(25, 0);
    for _ in 0..50 {
        let shift = rng.random_range(0.0..4.0);
        let a: Vec<Vec<f64>> =
            (0..500).map(|_| (0..2).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).collect();
        let b: Vec<Vec<f64>> =
            (0..500).map(|_| (0..2).map(|_| shift + rng.sample::<f64, _>(StandardNormal)).collect()).collect();
        let (ab, ba) = match (discrete_tv(&a, &b, TV_BINS), discrete_tv(&b, &a, TV_BINS)) {
            (Ok(x), Ok(y)) => (x, y),
            (Err(e), _) | (_, Err(e)) => return failed(e),
        };
        if ab != ba || !(0.0..=1.0).contains(&ab) {
            return outcome(false, format!("tv(a,b)={ab}, tv(b,a)={ba}"));
        }
    }
    outcome(true, "50 random pairs symmetric and within [0, 1]")
}

fn random_gaussian(rng: &mut ChainRng) -> (DVector<f64>, DMatrix<f64>) {
    let d = 3;
    let mean = DVector::from_fn(d, |_, _| rng.random_range(-3.0..3.0));
    let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.5..1.5));
    (mean, &a * a.transpose())
}

fn w2_triangle(_: &FaultInjection) -> Outcome {
    let mut rng = chain_rng(26, 0);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let (m1, s1) = random_gaussian(&mut rng);
        let (m2, s2) = random_gaussian(&mut rng);
        let (m3, s3) = random_gaussian(&mut rng);
        let d = |ma, sa, mb, sb| gaussian_w2(ma, sa, mb, sb);
        let (d13, d12, d23) = match (d(&m1, &s1, &m3, &s3), d(&m1, &s1, &m2, &s2), d(&m2, &s2, &m3, &s3)) {
            (Ok(a), Ok(b), Ok(c)) => (a, b, c),
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return failed(e),
        };
        worst = worst.max(d13 - d12 - d23);
    }
    outcome(worst <= 1e-8, format!("max violation {worst:.3e}"))
}

fn cov_order_invariant(_: &FaultInjection) -> Outcome {
    let mut rng = chain_rng(27, 0);
    let truth = DMatrix::identity(2, 2);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let mut s: Vec<Vec<f64>> =
            (0..200).map(|_| (0..2).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).collect();
        let a = match cov_frobenius_error(&s, &truth) {
            Ok(v) => v,
            Err(e) => return failed(e),
        };
        s.shuffle(&mut rng);
        let b = match cov_frobenius_error(&s, &truth) {
            Ok(v) => v,
            Err(e) => return failed(e),
        };
        worst = worst.max((a - b).abs() / a.max(1e-300));
    }
    outcome(worst <= 1e-12, format!("max relative change {worst:.3e}"))
}

