//! Contraction curves of both schedules over an eigenvalue grid, and the
//! `psi` profile used to compare cosine and linear factors.

use chebhmc::chebyshev::{psi, SpectralBounds};
use chebhmc::flow::contraction_curve;
use chebhmc::schedule::{IntegrationSchedule, ScheduleKind};
use serde::Serialize;

use crate::config::PermChoice;
use crate::output::{num, OutputDir};
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure1Params {
    pub k: usize,
    pub m: f64,
    pub l: f64,
    /// Spacing of the eigenvalue grid `{m, m + step, ..., L}`.
    pub step: f64,
    pub perm: PermChoice,
    pub seed: u64,
    /// `psi` is tabulated on `psi_points` equally spaced points of `[0, psi_max]`.
    pub psi_max: f64,
    pub psi_points: usize,
}

impl Default for Figure1Params {
    fn default() -> Self {
        Figure1Params { k: 400, m: 1.0, l: 100.0, step: 0.1, perm: PermChoice::Random, seed: 0, psi_max: 100.0, psi_points: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure1Data {
    /// Entry `k` is the worst-case `|prod_{s<=k} cos(sqrt(2 lambda) eta_s)|`.
    pub chebyshev: Vec<f64>,
    pub constant: Vec<f64>,
    pub psi: Vec<(f64, f64)>,
}

pub fn figure1(p: &Figure1Params) -> Result<Figure1Data, HarnessError> {
    if !(p.step > 0.0) {
        return Err(HarnessError::Config("grid step must be positive".into()));
    }
    if p.psi_points < 2 || !(p.psi_max > 0.0) {
        return Err(HarnessError::Config("psi grid needs at least two points and a positive range".into()));
    }
    let bounds = SpectralBounds::new(p.m, p.l)?;
    let grid = bounds.stepped_grid(p.step);
    let cheb = IntegrationSchedule::new(ScheduleKind::Chebyshev, p.k, bounds, p.perm.mode(p.seed))?;
    let cons = IntegrationSchedule::constant(p.k, bounds)?;
    let psi_grid = (0..p.psi_points)
        .map(|i| {
            let x = p.psi_max * i as f64 / (p.psi_points - 1) as f64;
            Ok((x, psi(x)?))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(Figure1Data { chebyshev: contraction_curve(&grid, &cheb), constant: contraction_curve(&grid, &cons), psi: psi_grid })
}

pub fn write_figure1(data: &Figure1Data, out: &mut OutputDir) -> Result<(), HarnessError> {
    let rows = data
        .chebyshev
        .iter()
        .zip(&data.constant)
        .enumerate()
        .map(|(k, (c, s))| vec![k.to_string(), num(*c), num(*s)]);
    out.write_csv("figure1_contraction.csv", &["k", "chebyshev", "constant"], rows)?;
    let rows = data.psi.iter().map(|(x, v)| vec![num(*x), num(*v)]);
    out.write_csv("figure1_psi.csv", &["x", "psi"], rows)?;
    Ok(())
}
