//! Integration-time schedules.
//!
//! A schedule fixes the `K` integration times before sampling starts. The
//! constant schedule uses `(pi/2) / sqrt(2 L)` at every iteration; the Chebyshev
//! schedule uses `(pi/2) / sqrt(2 r_sigma(k))` where `r` are the Chebyshev roots
//! on `[m, L]` and `sigma` is a permutation of the root indices.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::chebyshev::{cheb_roots, SpectralBounds};
use crate::error::{Error, Result};
use crate::rng::{chain_rng, PERMUTATION_STREAM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Constant,
    Chebyshev,
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScheduleKind::Constant => "constant",
            ScheduleKind::Chebyshev => "chebyshev",
        })
    }
}

impl FromStr for ScheduleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "constant" => Ok(ScheduleKind::Constant),
            "chebyshev" => Ok(ScheduleKind::Chebyshev),
            other => Err(format!("unknown schedule kind `{other}`")),
        }
    }
}

/// How the Chebyshev root indices are ordered into execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum PermMode {
    /// Ascending roots, i.e. descending integration times.
    Identity,
    Reversed,
    /// Uniformly random permutation drawn from the given seed.
    Random { seed: u64 },
}

/// An immutable list of `K` integration times in execution order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRecord", into = "ScheduleRecord")]
pub struct IntegrationSchedule {
    kind: ScheduleKind,
    times: Vec<f64>,
    permutation: Vec<usize>,
    bounds: SpectralBounds,
    seed: Option<u64>,
}

/// Provenance form: `kind, K, m, L, seed, permutation, times`.
///
/// `permutation[k]` is the zero-based index of the ascending root used at iteration `k`.
#[derive(Serialize, Deserialize)]
struct ScheduleRecord {
    kind: ScheduleKind,
    #[serde(rename = "K")]
    k: usize,
    m: f64,
    #[serde(rename = "L")]
    l: f64,
    seed: Option<u64>,
    permutation: Vec<usize>,
    times: Vec<f64>,
}

impl From<IntegrationSchedule> for ScheduleRecord {
    fn from(s: IntegrationSchedule) -> Self {
        ScheduleRecord {
            kind: s.kind,
            k: s.times.len(),
            m: s.bounds.m(),
            l: s.bounds.l(),
            seed: s.seed,
            permutation: s.permutation,
            times: s.times,
        }
    }
}

impl TryFrom<ScheduleRecord> for IntegrationSchedule {
    type Error = Error;

    fn try_from(rec: ScheduleRecord) -> Result<Self> {
        let bounds = SpectralBounds::new(rec.m, rec.l)?;
        if rec.k == 0 || rec.times.len() != rec.k || rec.permutation.len() != rec.k {
            return Err(Error::InvalidSchedule(format!(
                "K = {} with {} times and {} permutation entries",
                rec.k,
                rec.times.len(),
                rec.permutation.len()
            )));
        }
        if !is_permutation(&rec.permutation) {
            return Err(Error::InvalidSchedule("permutation is not a bijection".into()));
        }
        if rec.times.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidSchedule("integration times must be positive".into()));
        }
        Ok(IntegrationSchedule {
            kind: rec.kind,
            times: rec.times,
            permutation: rec.permutation,
            bounds,
            seed: rec.seed,
        })
    }
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&i| i < p.len() && !std::mem::replace(&mut seen[i], true))
}

/// `(pi/2) / sqrt(2 lambda)`: a quarter period of the coordinate with eigenvalue `lambda`.
pub fn quarter_period(lambda: f64) -> f64 {
    FRAC_PI_2 / (2.0 * lambda).sqrt()
}

impl IntegrationSchedule {
    /// `K` copies of `(pi/2) / sqrt(2 L)`.
    pub fn constant(k: usize, bounds: SpectralBounds) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidSchedule("K must be at least 1".into()));
        }
        Ok(IntegrationSchedule {
            kind: ScheduleKind::Constant,
            times: vec![quarter_period(bounds.l()); k],
            permutation: (0..k).collect(),
            bounds,
            seed: None,
        })
    }

    /// Chebyshev integration times, `times[k] = (pi/2) / sqrt(2 r_sigma(k))`.
    pub fn chebyshev(k: usize, bounds: SpectralBounds, perm: PermMode) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidSchedule("K must be at least 1".into()));
        }
        let roots = cheb_roots(k, bounds);
        let mut permutation: Vec<usize> = (0..k).collect();
        let seed = match perm {
            PermMode::Identity => None,
            PermMode::Reversed => {
                permutation.reverse();
                None
            }
            PermMode::Random { seed } => {
                permutation.shuffle(&mut chain_rng(seed, PERMUTATION_STREAM));
                Some(seed)
            }
        };
        let times = permutation.iter().map(|&i| quarter_period(roots.roots()[i])).collect();
        Ok(IntegrationSchedule { kind: ScheduleKind::Chebyshev, times, permutation, bounds, seed })
    }

    pub fn new(kind: ScheduleKind, k: usize, bounds: SpectralBounds, perm: PermMode) -> Result<Self> {
        match kind {
            ScheduleKind::Constant => Self::constant(k, bounds),
            ScheduleKind::Chebyshev => Self::chebyshev(k, bounds, perm),
        }
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn bounds(&self) -> SpectralBounds {
        self.bounds
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// The roots `r` with `times[k] = (pi/2) / sqrt(2 r[k])`, in execution order.
    pub fn effective_roots(&self) -> Vec<f64> {
        self.times.iter().map(|t| (FRAC_PI_2 / t).powi(2) / 2.0).collect()
    }

    /// `(sum of times, sum / K)`.
    pub fn total_and_average_time(&self) -> (f64, f64) {
        let total: f64 = self.times.iter().sum();
        (total, total / self.times.len() as f64)
    }
}

/// `1/sqrt(r_k) + 1/sqrt(r_{K+1-k})` for `1 <= k <= floor(K/2)`.
pub fn pair_time_sum(k: usize, degree: usize, bounds: SpectralBounds) -> Result<f64> {
    let half = degree / 2;
    if k == 0 || k > half {
        return Err(Error::OutOfRange { index: k, max: half });
    }
    let roots = cheb_roots(degree, bounds);
    Ok(1.0 / roots.root(k)?.sqrt() + 1.0 / roots.root(degree + 1 - k)?.sqrt())
}
