//! Exact Hamiltonian flow for separable quadratics and ideal HMC.
//!
//! For `f(x) = sum_j lambda_j x_j^2` each coordinate is a harmonic oscillator
//! with angular frequency `sqrt(2 lambda_j)`, so the flow is available in closed
//! form and ideal HMC can be simulated without discretization error.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::chebyshev::signed_product;
use crate::error::{Error, Result};
use crate::potential::ExactFlowFrame;
use crate::rng::{chain_rng, ChainRng};
use crate::schedule::IntegrationSchedule;

/// Position and velocity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl PhaseState {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if x.len() != v.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), found: v.len() });
        }
        Ok(PhaseState { x, v })
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.v).all(|c| c.is_finite())
    }
}

/// `H(x, v) = sum_j lambda_j x_j^2 + |v|^2 / 2`.
pub fn quadratic_hamiltonian(eigenvalues: &[f64], s: &PhaseState) -> f64 {
    let f: f64 = eigenvalues.iter().zip(&s.x).map(|(l, x)| l * x * x).sum();
    f + 0.5 * s.v.iter().map(|v| v * v).sum::<f64>()
}

/// Advances `(x, v)` by time `t` under the exact flow, coordinate by coordinate.
pub fn exact_flow(eigenvalues: &[f64], s0: &PhaseState, t: f64) -> PhaseState {
    let mut s = s0.clone();
    exact_flow_in_place(eigenvalues, &mut s.x, &mut s.v, t);
    s
}

fn exact_flow_in_place(eigenvalues: &[f64], x: &mut [f64], v: &mut [f64], t: f64) {
    for ((xj, vj), &lambda) in x.iter_mut().zip(v.iter_mut()).zip(eigenvalues) {
        let omega = (2.0 * lambda).sqrt();
        let (sin, cos) = (omega * t).sin_cos();
        let (x0, v0) = (*xj, *vj);
        *xj = cos * x0 + sin / omega * v0;
        *vj = -omega * sin * x0 + cos * v0;
    }
}

/// One ideal HMC iteration in place: fresh `N(0, I)` velocity, then the exact flow.
fn ideal_step(eigenvalues: &[f64], x: &mut [f64], v: &mut [f64], t: f64, rng: &mut ChainRng) {
    for vj in v.iter_mut() {
        *vj = rng.sample(StandardNormal);
    }
    exact_flow_in_place(eigenvalues, x, v, t);
}

/// Positions `x_0..x_K` of one ideal HMC chain.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealTrace {
    pub states: Vec<Vec<f64>>,
    pub schedule: IntegrationSchedule,
    pub seed: u64,
    pub chain: u64,
}

impl IdealTrace {
    /// The `K` samples after the initial point.
    pub fn samples(&self) -> &[Vec<f64>] {
        &self.states[1..]
    }
}

/// Ideal HMC on the separable quadratic with the given eigenvalues; stream 0 of `seed`.
pub fn ideal_hmc_run(
    eigenvalues: &[f64],
    schedule: &IntegrationSchedule,
    x0: &[f64],
    seed: u64,
) -> Result<IdealTrace> {
    ideal_hmc_chain(eigenvalues, schedule, x0, seed, 0)
}

/// Ideal HMC drawing velocities from stream `chain` of `seed`.
pub fn ideal_hmc_chain(
    eigenvalues: &[f64],
    schedule: &IntegrationSchedule,
    x0: &[f64],
    seed: u64,
    chain: u64,
) -> Result<IdealTrace> {
    if x0.len() != eigenvalues.len() {
        return Err(Error::DimensionMismatch { expected: eigenvalues.len(), found: x0.len() });
    }
    let mut rng = chain_rng(seed, chain);
    let mut x = x0.to_vec();
    let mut v = vec![0.0; x.len()];
    let mut states = Vec::with_capacity(schedule.len() + 1);
    states.push(x.clone());
    for &t in schedule.times() {
        ideal_step(eigenvalues, &mut x, &mut v, t, &mut rng);
        states.push(x.clone());
    }
    Ok(IdealTrace { states, schedule: schedule.clone(), seed, chain })
}

/// Ideal HMC on a rotated/shifted quadratic: runs in the separating frame and
/// maps samples back to the original coordinates.
pub fn ideal_hmc_in_frame(
    frame: &ExactFlowFrame,
    schedule: &IntegrationSchedule,
    x0: &[f64],
    seed: u64,
    chain: u64,
) -> Result<IdealTrace> {
    let mut trace = ideal_hmc_chain(frame.eigenvalues(), schedule, &frame.to_frame(x0), seed, chain)?;
    for s in trace.states.iter_mut() {
        *s = frame.to_original(s);
    }
    Ok(trace)
}

/// Runs two ideal chains from `x0` and `y0` that share every velocity draw and
/// returns their final position gap `x_K - y_K`.
pub fn coupled_ideal_gap(
    eigenvalues: &[f64],
    schedule: &IntegrationSchedule,
    x0: &[f64],
    y0: &[f64],
    seed: u64,
    chain: u64,
) -> Result<Vec<f64>> {
    for start in [x0, y0] {
        if start.len() != eigenvalues.len() {
            return Err(Error::DimensionMismatch { expected: eigenvalues.len(), found: start.len() });
        }
    }
    let mut rng = chain_rng(seed, chain);
    let (mut x, mut y) = (x0.to_vec(), y0.to_vec());
    let mut xi = vec![0.0; x.len()];
    for &t in schedule.times() {
        for v in xi.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let mut vx = xi.clone();
        exact_flow_in_place(eigenvalues, &mut x, &mut vx, t);
        let mut vy = xi.clone();
        exact_flow_in_place(eigenvalues, &mut y, &mut vy, t);
    }
    Ok(x.iter().zip(&y).map(|(a, b)| a - b).collect())
}

/// `cos(sqrt(2 lambda_j) t) (x0_j - y0_j)`: the gap between two chains that share
/// their initial velocity.
pub fn coupled_deviation(eigenvalues: &[f64], x0: &[f64], y0: &[f64], t: f64) -> Vec<f64> {
    eigenvalues
        .iter()
        .zip(x0.iter().zip(y0))
        .map(|(&lambda, (x, y))| ((2.0 * lambda).sqrt() * t).cos() * (x - y))
        .collect()
}

/// `|prod_k cos(sqrt(2 lambda) eta_k)|` for a single eigenvalue.
pub fn cosine_product_over_times(lambda: f64, times: &[f64]) -> f64 {
    let omega = (2.0 * lambda).sqrt();
    signed_product(times.iter().map(|t| (omega * t).cos())).abs()
}

/// `max_j |prod_k cos(sqrt(2 lambda_j) eta_k)|`, the W2 contraction coefficient of
/// ideal HMC after the whole schedule.
pub fn contraction_factor(eigenvalues: &[f64], schedule: &IntegrationSchedule) -> f64 {
    eigenvalues
        .iter()
        .map(|&lambda| cosine_product_over_times(lambda, schedule.times()))
        .fold(0.0, f64::max)
}

/// `max over lambda` of `|prod_{s<=k} cos(sqrt(2 lambda) eta_s)|` for every prefix
/// length `k = 0..=K`; element 0 is the empty product.
pub fn contraction_curve(eigenvalues: &[f64], schedule: &IntegrationSchedule) -> Vec<f64> {
    let per_lambda: Vec<Vec<f64>> = eigenvalues
        .par_iter()
        .map(|&lambda| {
            let omega = (2.0 * lambda).sqrt();
            let mut ln_magnitude = 0.0;
            schedule
                .times()
                .iter()
                .map(|&t| {
                    ln_magnitude += (omega * t).cos().abs().ln();
                    ln_magnitude.exp()
                })
                .collect()
        })
        .collect();
    let mut curve = vec![0.0; schedule.len() + 1];
    curve[0] = 1.0;
    for values in &per_lambda {
        for (slot, &v) in curve[1..].iter_mut().zip(values) {
            *slot = f64::max(*slot, v);
        }
    }
    curve
}

/// Many independent ideal HMC chains advanced in lockstep, for ensemble metrics
/// at every iteration. Chain `c` uses stream `c` of the seed, so its path equals
/// [`ideal_hmc_chain`] with the same arguments.
#[derive(Debug, Clone)]
pub struct IdealEnsemble {
    eigenvalues: Vec<f64>,
    positions: Vec<Vec<f64>>,
    velocities: Vec<Vec<f64>>,
    rngs: Vec<ChainRng>,
}

impl IdealEnsemble {
    pub fn new(eigenvalues: &[f64], initial: Vec<Vec<f64>>, seed: u64) -> Result<Self> {
        let d = eigenvalues.len();
        if let Some(bad) = initial.iter().find(|x| x.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: bad.len() });
        }
        let n = initial.len();
        Ok(IdealEnsemble {
            eigenvalues: eigenvalues.to_vec(),
            velocities: vec![vec![0.0; d]; n],
            positions: initial,
            rngs: (0..n as u64).map(|c| chain_rng(seed, c)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }

    /// One ideal HMC iteration with integration time `t` on every chain.
    pub fn step(&mut self, t: f64) {
        let eigenvalues = &self.eigenvalues;
        self.positions
            .par_iter_mut()
            .zip(self.velocities.par_iter_mut())
            .zip(self.rngs.par_iter_mut())
            .for_each(|((x, v), rng)| ideal_step(eigenvalues, x, v, t, rng));
    }
}
