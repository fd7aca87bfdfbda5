//! Sample-quality metrics: effective sample size, moment errors, histogram TV
//! distance and the Gaussian 2-Wasserstein distance.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

fn check_series<T>(x: &[T], needed: usize) -> Result<()> {
    if x.len() < needed {
        return Err(Error::TooFewSamples { needed, found: x.len() });
    }
    Ok(())
}

fn centered(x: &[f64]) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let var = c.iter().map(|v| v * v).sum::<f64>() / n;
    (c, var)
}

fn autocov_at(c: &[f64], lag: usize) -> f64 {
    let n = c.len();
    c[..n - lag].iter().zip(&c[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64
}

/// Biased sample autocorrelation `rho_0..=rho_max_lag`.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    check_series(x, 4)?;
    let (c, var) = centered(x);
    if var == 0.0 {
        return Err(Error::ConstantSeries);
    }
    let max_lag = max_lag.min(x.len() - 1);
    Ok((0..=max_lag).map(|k| autocov_at(&c, k) / var).collect())
}

/// ESS of one series together with the number of lags summed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EssEstimate {
    pub ess: f64,
    pub tau: f64,
    pub lag_cutoff: usize,
}

/// Initial-positive-sequence ESS: pairs `rho_2j + rho_2j+1` are summed until the
/// first non-positive pair. Clamped to `2N`.
pub fn ess_with_cutoff(x: &[f64]) -> Result<EssEstimate> {
    check_series(x, 4)?;
    let n = x.len();
    let (c, var) = centered(x);
    if var == 0.0 {
        return Err(Error::ConstantSeries);
    }
    let rho = |k: usize| autocov_at(&c, k) / var;
    let mut sum = 0.0;
    let mut j = 0;
    while 2 * j + 1 < n {
        let pair = rho(2 * j) + rho(2 * j + 1);
        if pair <= 0.0 {
            break;
        }
        sum += pair;
        j += 1;
    }
    let tau = -1.0 + 2.0 * sum;
    let cap = 2.0 * n as f64;
    let ess = if tau <= 0.0 { cap } else { (n as f64 / tau).min(cap) };
    Ok(EssEstimate { ess, tau, lag_cutoff: 2 * j })
}

pub fn ess(x: &[f64]) -> Result<f64> {
    Ok(ess_with_cutoff(x)?.ess)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EssReport {
    pub per_dim_ess: Vec<f64>,
    pub mean_ess: f64,
    pub min_ess: f64,
    pub n: usize,
    pub lag_cutoffs: Vec<usize>,
}

/// Per-coordinate ESS of a chain given as a list of samples.
pub fn ess_report(samples: &[Vec<f64>]) -> Result<EssReport> {
    check_series(samples, 4)?;
    let d = samples[0].len();
    let mut per_dim_ess = Vec::with_capacity(d);
    let mut lag_cutoffs = Vec::with_capacity(d);
    for j in 0..d {
        let col: Vec<f64> = samples.iter().map(|s| s[j]).collect();
        let e = ess_with_cutoff(&col)?;
        per_dim_ess.push(e.ess);
        lag_cutoffs.push(e.lag_cutoff);
    }
    let mean_ess = per_dim_ess.iter().sum::<f64>() / d as f64;
    let min_ess = per_dim_ess.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(EssReport { per_dim_ess, mean_ess, min_ess, n: samples.len(), lag_cutoffs })
}

pub fn sample_mean(samples: &[Vec<f64>]) -> Result<DVector<f64>> {
    check_series(samples, 1)?;
    let d = samples[0].len();
    let mut m = DVector::zeros(d);
    for s in samples {
        if s.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: s.len() });
        }
        m += DVector::from_column_slice(s);
    }
    Ok(m / samples.len() as f64)
}

/// Unbiased sample covariance (`1/(n-1)`).
pub fn sample_covariance(samples: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    check_series(samples, 2)?;
    let mean = sample_mean(samples)?;
    let d = mean.len();
    let mut cov = DMatrix::zeros(d, d);
    for s in samples {
        let c = DVector::from_column_slice(s) - &mean;
        cov.ger(1.0, &c, &c, 1.0);
    }
    Ok(cov / (samples.len() - 1) as f64)
}

/// Frobenius norm of the gap between the sample covariance and `truth`.
pub fn cov_frobenius_error(samples: &[Vec<f64>], truth: &DMatrix<f64>) -> Result<f64> {
    let cov = sample_covariance(samples)?;
    if cov.shape() != truth.shape() {
        return Err(Error::DimensionMismatch { expected: truth.nrows(), found: cov.nrows() });
    }
    Ok((cov - truth).norm())
}

pub const TV_BINS: usize = 30;

fn histogram(x: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins];
    let width = (hi - lo) / bins as f64;
    for &v in x {
        let b = if width > 0.0 { (((v - lo) / width) as usize).min(bins - 1) } else { 0 };
        h[b] += 1.0;
    }
    let n = x.len() as f64;
    h.iter_mut().for_each(|c| *c /= n);
    h
}

/// Binned total-variation distance between two 1-D samples on their pooled range.
pub fn discrete_tv_1d(a: &[f64], b: &[f64], bins: usize) -> Result<f64> {
    check_series(a, 1)?;
    if b.len() != a.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    if bins < 2 {
        return Err(Error::NonPositive { what: "bins - 1", value: bins as f64 - 1.0 });
    }
    let (lo, hi) = a
        .iter()
        .chain(b)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let ha = histogram(a, lo, hi, bins);
    let hb = histogram(b, lo, hi, bins);
    Ok(0.5 * ha.iter().zip(&hb).map(|(p, q)| (p - q).abs()).sum::<f64>())
}

/// Coordinate-averaged binned TV distance between two equally sized sample sets.
pub fn discrete_tv(a: &[Vec<f64>], b: &[Vec<f64>], bins: usize) -> Result<f64> {
    check_series(a, 1)?;
    if b.len() != a.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    let d = a[0].len();
    if b[0].len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: b[0].len() });
    }
    let mut total = 0.0;
    for j in 0..d {
        let ca: Vec<f64> = a.iter().map(|s| s[j]).collect();
        let cb: Vec<f64> = b.iter().map(|s| s[j]).collect();
        total += discrete_tv_1d(&ca, &cb, bins)?;
    }
    Ok(total / d as f64)
}

fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let scale = eig.eigenvalues.amax().max(1.0);
    if eig.eigenvalues.iter().any(|&l| l < -1e-10 * scale) {
        return Err(Error::NotPositiveDefinite);
    }
    let root = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&root) * eig.eigenvectors.transpose())
}

/// `W2` between `N(m1, s1)` and `N(m2, s2)`; both covariances must be positive semidefinite.
pub fn gaussian_w2(m1: &DVector<f64>, s1: &DMatrix<f64>, m2: &DVector<f64>, s2: &DMatrix<f64>) -> Result<f64> {
    let d = m1.len();
    for (r, c) in [(m2.len(), 1), (s1.nrows(), s1.ncols()), (s2.nrows(), s2.ncols())] {
        if r != d || (c != 1 && c != d) {
            return Err(Error::DimensionMismatch { expected: d, found: r });
        }
    }
    psd_sqrt(s1)?;
    let r2 = psd_sqrt(s2)?;
    let cross = psd_sqrt(&(&r2 * s1 * &r2))?;
    let bures = (s1.trace() + s2.trace() - 2.0 * cross.trace()).max(0.0);
    Ok(((m1 - m2).norm_squared() + bures).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::chain_rng;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn ar1(phi: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = chain_rng(seed, 0);
        let mut x = 0.0;
        (0..n)
            .map(|_| {
                let e: f64 = rng.sample(StandardNormal);
                x = phi * x + (1.0 - phi * phi).sqrt() * e;
                x
            })
            .collect()
    }

    #[test]
    fn ar1_ess_matches_theory() {
        let x = ar1(0.5, 200_000, 1);
        let e = ess(&x).unwrap();
        let expected = 200_000.0 / 3.0;
        assert!((e - expected).abs() / expected < 0.1, "{e}");
    }

    #[test]
    fn iid_ess_is_near_n() {
        for seed in [2, 3, 4] {
            let e = ess(&ar1(0.0, 10_000, seed)).unwrap();
            assert!((8_000.0..=12_000.0).contains(&e), "seed {seed}: {e}");
        }
    }

    #[test]
    fn alternating_series_hits_the_cap() {
        let x: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(ess(&x).unwrap(), 200.0);
    }

    #[test]
    fn autocorrelation_starts_at_one() {
        let r = autocorrelation(&[1.0, 2.0, 4.0, 3.0], 10).unwrap();
        assert_eq!(r.len(), 4);
        assert_relative_eq!(r[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn alternating_series_is_anticorrelated() {
        let x: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = autocorrelation(&x, 1).unwrap();
        assert!((r[1] + 1.0).abs() < 1e-2);
    }

    #[test]
    fn ar1_autocorrelation_decays_geometrically() {
        let x = ar1(0.5, 100_000, 3);
        let r = autocorrelation(&x, 5).unwrap();
        for (k, rk) in r.iter().enumerate() {
            assert!((rk - 0.5f64.powi(k as i32)).abs() < 0.02, "lag {k}: {rk}");
        }
    }

    #[test]
    fn ar1_strong_correlation_ess() {
        let x = ar1(0.9, 100_000, 4);
        let expected = 100_000.0 * 0.1 / 1.9;
        let e = ess(&x).unwrap();
        assert!((e - expected).abs() / expected < 0.2, "{e}");
    }

    #[test]
    fn report_on_identical_columns() {
        let x = ar1(0.3, 500, 8);
        let s: Vec<Vec<f64>> = x.iter().map(|&v| vec![v, v]).collect();
        let r = ess_report(&s).unwrap();
        assert_eq!(r.per_dim_ess[0], r.per_dim_ess[1]);
        let one: Vec<Vec<f64>> = x.iter().map(|&v| vec![v]).collect();
        let r = ess_report(&one).unwrap();
        assert_eq!(r.mean_ess, r.min_ess);
    }

    #[test]
    fn constant_and_short_series_are_rejected() {
        assert!(matches!(ess(&[1.0; 10]), Err(Error::ConstantSeries)));
        assert!(matches!(ess(&[1.0, 2.0]), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn covariance_hand_example() {
        let s = vec![vec![0.0, 0.0], vec![2.0, 2.0], vec![4.0, -2.0]];
        let c = sample_covariance(&s).unwrap();
        assert_relative_eq!(c[(0, 0)], 4.0, epsilon = 1e-14);
        assert_relative_eq!(c[(1, 1)], 4.0, epsilon = 1e-14);
        assert_relative_eq!(c[(0, 1)], -2.0, epsilon = 1e-14);
        assert_relative_eq!(cov_frobenius_error(&s, &c).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn covariance_of_two_scaled_basis_rows() {
        // rows (sqrt2, 0) and (0, sqrt2): centered covariance [[1, -1], [-1, 1]]
        let r2 = 2.0f64.sqrt();
        let s = vec![vec![r2, 0.0], vec![0.0, r2]];
        let err = cov_frobenius_error(&s, &DMatrix::identity(2, 2)).unwrap();
        assert_relative_eq!(err, 2.0f64.sqrt(), epsilon = 1e-14);
        assert!(matches!(cov_frobenius_error(&s[..1], &DMatrix::identity(2, 2)), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn tv_examples() {
        let a = vec![vec![0.0], vec![1.0]];
        assert_eq!(discrete_tv(&a, &a, TV_BINS).unwrap(), 0.0);
        let lo: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 0.01]).collect();
        let hi: Vec<Vec<f64>> = (0..10).map(|i| vec![10.0 + i as f64 * 0.01]).collect();
        assert_relative_eq!(discrete_tv(&lo, &hi, TV_BINS).unwrap(), 1.0, epsilon = 1e-14);
        assert!(discrete_tv(&lo, &hi[..5], TV_BINS).is_err());
        assert!(discrete_tv(&lo, &hi, 1).is_err());
    }

    #[test]
    fn tv_of_two_normal_draws_is_small() {
        let a: Vec<Vec<f64>> = ar1(0.0, 10_000, 11).into_iter().map(|v| vec![v]).collect();
        let b: Vec<Vec<f64>> = ar1(0.0, 10_000, 12).into_iter().map(|v| vec![v]).collect();
        assert!(discrete_tv(&a, &b, TV_BINS).unwrap() <= 0.05);
    }

    #[test]
    fn w2_examples() {
        let z = DVector::zeros(2);
        let i = DMatrix::identity(2, 2);
        assert_relative_eq!(gaussian_w2(&z, &i, &z, &i).unwrap(), 0.0, epsilon = 1e-12);
        let m = DVector::from_vec(vec![3.0, 4.0]);
        assert_relative_eq!(gaussian_w2(&z, &i, &m, &i).unwrap(), 5.0, epsilon = 1e-12);
        let s4 = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]));
        assert_relative_eq!(gaussian_w2(&z, &i, &z, &s4).unwrap(), 5.0_f64.sqrt(), epsilon = 1e-12);
        let z1 = DVector::zeros(1);
        let one = DMatrix::from_element(1, 1, 1.0);
        let four = DMatrix::from_element(1, 1, 4.0);
        assert_relative_eq!(gaussian_w2(&z1, &one, &z1, &four).unwrap(), 1.0, epsilon = 1e-12);
        let bad = DMatrix::from_element(1, 1, -1.0);
        assert!(matches!(gaussian_w2(&z1, &one, &z1, &bad), Err(Error::NotPositiveDefinite)));
    }

    fn spd(a: f64, b: f64, c: f64) -> DMatrix<f64> {
        let l = DMatrix::from_row_slice(2, 2, &[a.abs() + 0.1, 0.0, b, c.abs() + 0.1]);
        &l * l.transpose()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn w2_is_symmetric_and_satisfies_triangle(
            v in proptest::collection::vec(-3.0f64..3.0, 15)
        ) {
            let g = |o: usize| (DVector::from_vec(vec![v[o], v[o + 1]]), spd(v[o + 2], v[o + 3], v[o + 4]));
            let (m1, s1) = g(0);
            let (m2, s2) = g(5);
            let (m3, s3) = g(10);
            let d12 = gaussian_w2(&m1, &s1, &m2, &s2).unwrap();
            let d21 = gaussian_w2(&m2, &s2, &m1, &s1).unwrap();
            let d13 = gaussian_w2(&m1, &s1, &m3, &s3).unwrap();
            let d23 = gaussian_w2(&m2, &s2, &m3, &s3).unwrap();
            prop_assert!((d12 - d21).abs() < 1e-6 * (1.0 + d12));
            prop_assert!(d13 <= d12 + d23 + 1e-8);
        }

        #[test]
        fn ess_is_bounded(seed in 0u64..1000, phi in -0.9f64..0.95) {
            let x = ar1(phi, 500, seed);
            let e = ess(&x).unwrap();
            prop_assert!(e > 0.0 && e <= 1000.0);
        }

        #[test]
        fn tv_ignores_sample_order(seed in 0u64..1000) {
            let a: Vec<Vec<f64>> = ar1(0.3, 200, seed).into_iter().map(|v| vec![v]).collect();
            let b: Vec<Vec<f64>> = ar1(0.3, 200, seed + 1).into_iter().map(|v| vec![v]).collect();
            let mut r = a.clone();
            r.reverse();
            let t1 = discrete_tv(&a, &b, TV_BINS).unwrap();
            let t2 = discrete_tv(&r, &b, TV_BINS).unwrap();
            prop_assert!((t1 - t2).abs() < 1e-12);
            prop_assert_eq!(t1, discrete_tv(&b, &a, TV_BINS).unwrap());
            prop_assert!((0.0..=1.0).contains(&t1));
        }

        #[test]
        fn covariance_error_ignores_order(seed in 0u64..1000) {
            let x = ar1(0.2, 101, seed);
            let s: Vec<Vec<f64>> = x.windows(2).map(|w| w.to_vec()).collect();
            let mut r = s.clone();
            r.reverse();
            let truth = DMatrix::identity(2, 2);
            let e1 = cov_frobenius_error(&s, &truth).unwrap();
            let e2 = cov_frobenius_error(&r, &truth).unwrap();
            prop_assert!((e1 - e2).abs() < 1e-12);
        }
    }
}
