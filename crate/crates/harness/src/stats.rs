//! Small aggregation helpers.

use chebhmc::potential::GaussianMoments;
use chebhmc::rng::ChainRng;
use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::HarnessError;

/// Mean and sample standard deviation (`n - 1`); the deviation is 0 for one value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MeanStd { mean, std }
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `n` independent draws from `N(mean, cov)`.
pub fn draw_gaussian(truth: &GaussianMoments, n: usize, rng: &mut ChainRng) -> Result<Vec<Vec<f64>>, HarnessError> {
    let d = truth.mean.len();
    let chol = truth.cov.clone().cholesky().ok_or(chebhmc::Error::NotPositiveDefinite)?.unpack();
    Ok((0..n)
        .map(|_| {
            let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
            (&truth.mean + &chol * z).as_slice().to_vec()
        })
        .collect())
}
