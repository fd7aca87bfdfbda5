//! Leapfrog HMC with a Metropolis filter, driven by an integration-time schedule.
//!
//! Iteration `k` draws `xi ~ N(0, I)`, runs `S_k = floor(eta_k / theta)` leapfrog
//! steps from `(x_{k-1}, xi)` and accepts the endpoint with probability
//! `min(1, exp(H_start - H_end))`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::PhaseState;
use crate::potential::Potential;
use crate::rng::{chain_rng, ChainRng};
use crate::schedule::IntegrationSchedule;

/// How consecutive half-kicks are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KickMode {
    /// Half-kick, drift, half-kick per step; two gradient evaluations per step.
    #[default]
    Literal,
    /// Adjacent half-kicks merged; `S + 1` gradient evaluations per trajectory.
    Fused,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SamplerOptions {
    pub kick: KickMode,
    /// Test hook: use this value for the uniform acceptance draw instead of sampling it.
    #[doc(hidden)]
    pub zeta_override: Option<f64>,
}

/// `H(x, v) = f(x) + |v|^2 / 2`.
pub fn hamiltonian(p: &dyn Potential, s: &PhaseState) -> f64 {
    p.value(&s.x) + 0.5 * s.v.iter().map(|v| v * v).sum::<f64>()
}

/// Scratch space for one trajectory.
struct Workspace {
    grad: Vec<f64>,
}

fn half_kick(v: &mut [f64], grad: &[f64], theta: f64) {
    for (vi, g) in v.iter_mut().zip(grad) {
        *vi -= 0.5 * theta * g;
    }
}

fn drift(x: &mut [f64], v: &[f64], theta: f64) {
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi += theta * vi;
    }
}

fn all_finite(x: &[f64], v: &[f64]) -> bool {
    x.iter().chain(v).all(|c| c.is_finite())
}

/// Runs `steps` leapfrog steps in place; returns the gradient evaluation count.
fn integrate(
    p: &dyn Potential,
    x: &mut [f64],
    v: &mut [f64],
    theta: f64,
    steps: usize,
    kick: KickMode,
    ws: &mut Workspace,
) -> Result<u64> {
    let grad = &mut ws.grad;
    match kick {
        KickMode::Literal => {
            for step in 0..steps {
                p.gradient(x, grad);
                half_kick(v, grad, theta);
                drift(x, v, theta);
                p.gradient(x, grad);
                half_kick(v, grad, theta);
                if !all_finite(x, v) {
                    return Err(Error::NonFiniteState { step });
                }
            }
            Ok(2 * steps as u64)
        }
        KickMode::Fused => {
            if steps == 0 {
                return Ok(0);
            }
            p.gradient(x, grad);
            half_kick(v, grad, theta);
            for step in 0..steps {
                drift(x, v, theta);
                p.gradient(x, grad);
                if step + 1 < steps {
                    for (vi, g) in v.iter_mut().zip(grad.iter()) {
                        *vi -= theta * g;
                    }
                } else {
                    half_kick(v, grad, theta);
                }
                if !all_finite(x, v) {
                    return Err(Error::NonFiniteState { step });
                }
            }
            Ok(steps as u64 + 1)
        }
    }
}

/// `S` leapfrog steps of size `theta` from `s`, without fusing half-kicks.
pub fn leapfrog(p: &dyn Potential, s: &PhaseState, theta: f64, steps: usize) -> Result<PhaseState> {
    leapfrog_with(p, s, theta, steps, KickMode::Literal)
}

pub fn leapfrog_with(p: &dyn Potential, s: &PhaseState, theta: f64, steps: usize, kick: KickMode) -> Result<PhaseState> {
    if s.x.len() != p.dim() || s.v.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: s.x.len() });
    }
    let mut out = s.clone();
    let mut ws = Workspace { grad: vec![0.0; p.dim()] };
    integrate(p, &mut out.x, &mut out.v, theta, steps, kick, &mut ws)?;
    Ok(out)
}

/// `floor(eta / theta)`.
pub fn leapfrog_steps(eta: f64, theta: f64) -> usize {
    (eta / theta).floor() as usize
}

/// Result of one Metropolis-adjusted HMC iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub position: Vec<f64>,
    pub accepted: bool,
    /// `min(1, exp(-delta_h))`, floored at the smallest positive double.
    pub acceptance_ratio: f64,
    /// `H_end - H_start`.
    pub energy_error: f64,
    pub leapfrog_steps: usize,
    pub grad_evals: u64,
}

/// One iteration of HMC with integration time `eta` and leapfrog step `theta`.
pub fn hmc_step(
    p: &dyn Potential,
    x: &[f64],
    eta: f64,
    theta: f64,
    rng: &mut ChainRng,
    options: &SamplerOptions,
) -> Result<StepOutcome> {
    let mut ws = Workspace { grad: vec![0.0; p.dim()] };
    hmc_step_with(p, x, eta, theta, rng, options, &mut ws)
}

fn hmc_step_with(
    p: &dyn Potential,
    x: &[f64],
    eta: f64,
    theta: f64,
    rng: &mut ChainRng,
    options: &SamplerOptions,
    ws: &mut Workspace,
) -> Result<StepOutcome> {
    let steps = leapfrog_steps(eta, theta);
    if steps == 0 {
        return Err(Error::StepTooLarge { iteration: 0, time: eta, theta });
    }
    let xi: Vec<f64> = (0..x.len()).map(|_| rng.sample(StandardNormal)).collect();
    let start = PhaseState { x: x.to_vec(), v: xi };
    let h_start = hamiltonian(p, &start);

    let mut end = start.clone();
    let grad_evals = integrate(p, &mut end.x, &mut end.v, theta, steps, options.kick, ws)?;
    let h_end = hamiltonian(p, &end);

    let energy_error = h_end - h_start;
    let log_ratio = if energy_error.is_nan() { f64::NEG_INFINITY } else { (-energy_error).min(0.0) };
    let zeta: f64 = match options.zeta_override {
        Some(z) => z,
        None => rng.random(),
    };
    let accepted = zeta.ln() < log_ratio;
    Ok(StepOutcome {
        position: if accepted { end.x } else { start.x },
        accepted,
        acceptance_ratio: log_ratio.exp().max(f64::MIN_POSITIVE),
        energy_error,
        leapfrog_steps: steps,
        grad_evals,
    })
}

/// Record of one leapfrog HMC chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    /// `K` positions, one per iteration.
    pub samples: Vec<Vec<f64>>,
    pub accepted: Vec<bool>,
    pub acceptance_ratios: Vec<f64>,
    pub energy_errors: Vec<f64>,
    pub steps_per_iter: Vec<usize>,
    pub grad_evals: u64,
    pub schedule: IntegrationSchedule,
    pub theta: f64,
    pub seed: u64,
    pub chain: u64,
}

impl ChainTrace {
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted.iter().filter(|&&a| a).count() as f64 / self.accepted.len() as f64
    }

    pub fn mean_acceptance_ratio(&self) -> f64 {
        self.acceptance_ratios.iter().sum::<f64>() / self.acceptance_ratios.len() as f64
    }
}

/// Checks that every schedule entry yields at least one leapfrog step.
pub fn check_schedule(schedule: &IntegrationSchedule, theta: f64) -> Result<()> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::NonPositive { what: "theta", value: theta });
    }
    match schedule.times().iter().position(|&t| leapfrog_steps(t, theta) == 0) {
        Some(iteration) => Err(Error::StepTooLarge { iteration, time: schedule.times()[iteration], theta }),
        None => Ok(()),
    }
}

/// Runs the schedule from `x0` on stream 0 of `seed`.
pub fn run_chain(
    p: &dyn Potential,
    schedule: &IntegrationSchedule,
    theta: f64,
    x0: &[f64],
    seed: u64,
    options: &SamplerOptions,
) -> Result<ChainTrace> {
    run_chain_stream(p, schedule, theta, x0, seed, 0, options)
}

/// Runs the schedule from `x0` on stream `chain` of `seed`.
pub fn run_chain_stream(
    p: &dyn Potential,
    schedule: &IntegrationSchedule,
    theta: f64,
    x0: &[f64],
    seed: u64,
    chain: u64,
    options: &SamplerOptions,
) -> Result<ChainTrace> {
    if x0.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: x0.len() });
    }
    check_schedule(schedule, theta)?;
    let k = schedule.len();
    let mut rng = chain_rng(seed, chain);
    let mut ws = Workspace { grad: vec![0.0; p.dim()] };
    let mut trace = ChainTrace {
        samples: Vec::with_capacity(k),
        accepted: Vec::with_capacity(k),
        acceptance_ratios: Vec::with_capacity(k),
        energy_errors: Vec::with_capacity(k),
        steps_per_iter: Vec::with_capacity(k),
        grad_evals: 0,
        schedule: schedule.clone(),
        theta,
        seed,
        chain,
    };
    let mut x = x0.to_vec();
    for &eta in schedule.times() {
        let out = hmc_step_with(p, &x, eta, theta, &mut rng, options, &mut ws)?;
        x = out.position;
        trace.samples.push(x.clone());
        trace.accepted.push(out.accepted);
        trace.acceptance_ratios.push(out.acceptance_ratio);
        trace.energy_errors.push(out.energy_error);
        trace.steps_per_iter.push(out.leapfrog_steps);
        trace.grad_evals += out.grad_evals;
    }
    Ok(trace)
}
