//! Target potentials `f` with `pi(x) ∝ exp(-f(x))`.

mod dataset;
mod newton;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::chebyshev::SpectralBounds;
use crate::error::{Error, Result};

pub use dataset::LabeledDataset;
pub use newton::{hessian_extreme_eigs, newton_map};

/// A twice-differentiable potential.
pub trait Potential: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Writes `grad f(x)` into `out`.
    fn gradient(&self, x: &[f64], out: &mut [f64]);

    /// Analytic Hessian, when the model has one.
    fn hessian(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        None
    }
}

/// Mean and covariance of a target, used as ground truth by diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMoments {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

/// Orthogonal change of variables `x = center + basis * y` in which a quadratic
/// potential separates as `sum_j eigenvalues[j] * y_j^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactFlowFrame {
    eigenvalues: Vec<f64>,
    center: DVector<f64>,
    /// `None` means the identity.
    basis: Option<DMatrix<f64>>,
}

impl ExactFlowFrame {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn is_diagonal(&self) -> bool {
        self.basis.is_none() && self.center.iter().all(|&c| c == 0.0)
    }

    pub fn to_frame(&self, x: &[f64]) -> Vec<f64> {
        let shifted = DVector::from_column_slice(x) - &self.center;
        match &self.basis {
            Some(q) => (q.transpose() * shifted).as_slice().to_vec(),
            None => shifted.as_slice().to_vec(),
        }
    }

    pub fn to_original(&self, y: &[f64]) -> Vec<f64> {
        let y = DVector::from_column_slice(y);
        let x = match &self.basis {
            Some(q) => q * y + &self.center,
            None => y + &self.center,
        };
        x.as_slice().to_vec()
    }
}

/// A potential together with its spectral bounds and optional ground truth.
#[derive(Debug, Clone)]
pub struct PotentialSpec {
    name: String,
    model: Arc<dyn Potential>,
    bounds: SpectralBounds,
    exact_flow: Option<ExactFlowFrame>,
    truth: Option<GaussianMoments>,
}

impl PotentialSpec {
    /// Wraps a user-supplied potential.
    pub fn custom(name: impl Into<String>, model: Arc<dyn Potential>, bounds: SpectralBounds) -> Self {
        PotentialSpec { name: name.into(), model, bounds, exact_flow: None, truth: None }
    }

    pub fn with_truth(mut self, truth: GaussianMoments) -> Self {
        self.truth = Some(truth);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn model(&self) -> &dyn Potential {
        self.model.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.model.value(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.model.gradient(x, &mut g);
        g
    }

    pub fn hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        self.model.hessian(x)
    }

    pub fn bounds(&self) -> SpectralBounds {
        self.bounds
    }

    /// The eigenvalues `lambda_j` with `grad f(x)_j = 2 lambda_j x_j`; only for
    /// diagonal quadratics.
    pub fn exact_flow_eigenvalues(&self) -> Option<&[f64]> {
        self.exact_flow.as_ref().filter(|f| f.is_diagonal()).map(|f| f.eigenvalues())
    }

    /// Separating frame for any quadratic potential (diagonal or rotated).
    pub fn exact_flow_frame(&self) -> Option<&ExactFlowFrame> {
        self.exact_flow.as_ref()
    }

    pub fn truth(&self) -> Option<&GaussianMoments> {
        self.truth.as_ref()
    }

    /// `f(x) = sum_j lambda_j x_j^2`.
    ///
    /// The density `exp(-f)` has covariance `diag(1 / (2 lambda_j))`; that is the
    /// recorded ground truth. Bounds are `(min lambda, max lambda)`.
    pub fn quadratic_diag(eigenvalues: &[f64]) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        for (index, &value) in eigenvalues.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveEigenvalue { index, value });
            }
        }
        let d = eigenvalues.len();
        let (lo, hi) = min_max(eigenvalues);
        let truth = GaussianMoments {
            mean: DVector::zeros(d),
            cov: DMatrix::from_diagonal(&DVector::from_iterator(d, eigenvalues.iter().map(|l| 0.5 / l))),
        };
        Ok(PotentialSpec {
            name: "quadratic_diag".into(),
            model: Arc::new(QuadraticDiag { eigenvalues: eigenvalues.to_vec() }),
            bounds: SpectralBounds::new(lo, hi)?,
            exact_flow: Some(ExactFlowFrame {
                eigenvalues: eigenvalues.to_vec(),
                center: DVector::zeros(d),
                basis: None,
            }),
            truth: Some(truth),
        })
    }

    /// `f(x) = 1/2 (x - mu)' inv(Sigma) (x - mu)`, bounds from the extreme
    /// eigenvalues of `inv(Sigma)`.
    pub fn gaussian(mean: &[f64], cov: &DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        check_square(cov, d)?;
        let precision = spd_inverse(cov)?;
        let eig = SymmetricEigen::new(precision.clone());
        let (lo, hi) = min_max(eig.eigenvalues.as_slice());
        let frame = ExactFlowFrame {
            eigenvalues: eig.eigenvalues.iter().map(|p| 0.5 * p).collect(),
            center: DVector::from_column_slice(mean),
            basis: Some(eig.eigenvectors),
        };
        Ok(PotentialSpec {
            name: "gaussian".into(),
            model: Arc::new(Gaussian { mean: DVector::from_column_slice(mean), precision }),
            bounds: SpectralBounds::new(lo, hi)?,
            exact_flow: Some(frame),
            truth: Some(GaussianMoments { mean: DVector::from_column_slice(mean), cov: cov.clone() }),
        })
    }

    /// Equal-weight mixture of `N(a, Sigma)` and `N(-a, Sigma)`:
    /// `f(x) = 1/2 |x - a|^2_Lambda - log(1 + exp(-2 x'b))` with `Lambda = inv(Sigma)`,
    /// `b = Lambda a`. Requires `a' inv(Sigma) a < 1` for strong convexity.
    pub fn gaussian_mixture(a: &[f64], cov: &DMatrix<f64>) -> Result<Self> {
        let d = a.len();
        check_square(cov, d)?;
        let precision = spd_inverse(cov)?;
        let a_vec = DVector::from_column_slice(a);
        let b = &precision * &a_vec;
        let gate = a_vec.dot(&b);
        if gate >= 1.0 {
            return Err(Error::MixtureNotStronglyConvex { value: gate });
        }
        let eig = SymmetricEigen::new(precision.clone());
        let (lo, hi) = min_max(eig.eigenvalues.as_slice());
        let truth = GaussianMoments { mean: DVector::zeros(d), cov: cov + &a_vec * a_vec.transpose() };
        Ok(PotentialSpec {
            name: "mixture".into(),
            model: Arc::new(GaussianMixture { a: a_vec, precision, b }),
            bounds: SpectralBounds::new(lo, hi)?,
            exact_flow: None,
            truth: Some(truth),
        })
    }

    /// The `d`-dimensional mixture with `a[i] = sqrt(i) / (2d)` and `Sigma = diag(i/d)`.
    pub fn paper_mixture(d: usize) -> Result<Self> {
        let a: Vec<f64> = (1..=d).map(|i| (i as f64).sqrt() / (2.0 * d as f64)).collect();
        let cov = DMatrix::from_diagonal(&DVector::from_iterator(d, (1..=d).map(|i| i as f64 / d as f64)));
        Self::gaussian_mixture(&a, &cov)
    }

    /// Bayesian logistic regression with a `N(0, I/alpha)` prior:
    /// `f(w) = sum_i log(1 + exp(-y_i w'z_i)) + alpha |w|^2 / 2`.
    ///
    /// Bounds are the extreme Hessian eigenvalues at the MAP point found by Newton's method.
    pub fn logistic_regression(data: &LabeledDataset, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::NonPositive { what: "alpha", value: alpha });
        }
        data.validate()?;
        let model = LogisticRegression {
            features: data.features().clone(),
            labels: data.labels().to_vec(),
            alpha,
        };
        let x0 = vec![0.0; model.dim()];
        let map = newton_map(&model, &x0, 1e-10, 100)?;
        let bounds = hessian_extreme_eigs(&model, &map)?;
        Ok(PotentialSpec {
            name: "logistic".into(),
            model: Arc::new(model),
            bounds,
            exact_flow: None,
            truth: None,
        })
    }

    /// Step-size dependent potential: `1/2 x_1^2` on the first coordinate and
    /// `kappa/3 x_i^2 - kappa h / 3 cos(x_i / sqrt(h))` on the others. It is
    /// 1-strongly convex and `kappa`-smooth.
    pub fn hard(kappa: f64, h: f64, d: usize) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 1.0) {
            return Err(Error::NonPositive { what: "kappa - 1", value: kappa - 1.0 });
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::NonPositive { what: "h", value: h });
        }
        if d == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        Ok(PotentialSpec {
            name: "hard".into(),
            model: Arc::new(Hard { kappa, h, dim: d }),
            bounds: SpectralBounds::new(1.0, kappa)?,
            exact_flow: None,
            truth: None,
        })
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

fn check_square(m: &DMatrix<f64>, d: usize) -> Result<()> {
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: m.nrows() });
    }
    Ok(())
}

fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let asym = (m - m.transpose()).amax();
    if asym > 1e-12 * m.amax().max(1.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let inv = m.clone().cholesky().ok_or(Error::NotPositiveDefinite)?.inverse();
    Ok((&inv + inv.transpose()) * 0.5)
}

#[derive(Debug)]
struct QuadraticDiag {
    eigenvalues: Vec<f64>,
}

impl Potential for QuadraticDiag {
    fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.eigenvalues.iter().zip(x).map(|(l, xi)| l * xi * xi).sum()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for ((o, l), xi) in out.iter_mut().zip(&self.eigenvalues).zip(x) {
            *o = 2.0 * l * xi;
        }
    }

    fn hessian(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        let d = self.eigenvalues.len();
        Some(DMatrix::from_diagonal(&DVector::from_iterator(d, self.eigenvalues.iter().map(|l| 2.0 * l))))
    }
}

#[derive(Debug)]
struct Gaussian {
    mean: DVector<f64>,
    precision: DMatrix<f64>,
}

impl Gaussian {
    fn precision_times_offset(&self, x: &[f64]) -> (DVector<f64>, DVector<f64>) {
        let offset = DVector::from_column_slice(x) - &self.mean;
        let p = &self.precision * &offset;
        (offset, p)
    }
}

impl Potential for Gaussian {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (offset, p) = self.precision_times_offset(x);
        0.5 * offset.dot(&p)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let (_, p) = self.precision_times_offset(x);
        out.copy_from_slice(p.as_slice());
    }

    fn hessian(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        Some(self.precision.clone())
    }
}

#[derive(Debug)]
struct GaussianMixture {
    a: DVector<f64>,
    precision: DMatrix<f64>,
    b: DVector<f64>,
}

/// `log(1 + exp(t))` without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// `1 / (1 + exp(-t))`.
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl Potential for GaussianMixture {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        let offset = &x - &self.a;
        0.5 * offset.dot(&(&self.precision * &offset)) - softplus(-2.0 * x.dot(&self.b))
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let xv = DVector::from_column_slice(x);
        let u = xv.dot(&self.b);
        // d/du [-log(1 + exp(-2u))] = 2 / (1 + exp(2u)) = 2 sigmoid(-2u)
        let g = &self.precision * xv - &self.b + &self.b * (2.0 * sigmoid(-2.0 * u));
        out.copy_from_slice(g.as_slice());
    }

    fn hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let u = DVector::from_column_slice(x).dot(&self.b);
        let s = sigmoid(2.0 * u);
        Some(&self.precision - &self.b * self.b.transpose() * (4.0 * s * (1.0 - s)))
    }
}

#[derive(Debug)]
struct LogisticRegression {
    /// n x d, one row per observation.
    features: DMatrix<f64>,
    /// +1 / -1
    labels: Vec<f64>,
    alpha: f64,
}

impl LogisticRegression {
    fn margins(&self, w: &[f64]) -> DVector<f64> {
        let t = &self.features * DVector::from_column_slice(w);
        t.component_mul(&DVector::from_column_slice(&self.labels))
    }
}

impl Potential for LogisticRegression {
    fn dim(&self) -> usize {
        self.features.ncols()
    }

    fn value(&self, w: &[f64]) -> f64 {
        let loss: f64 = self.margins(w).iter().map(|&t| softplus(-t)).sum();
        loss + 0.5 * self.alpha * w.iter().map(|x| x * x).sum::<f64>()
    }

    fn gradient(&self, w: &[f64], out: &mut [f64]) {
        let margins = self.margins(w);
        let weights =
            DVector::from_iterator(margins.len(), margins.iter().zip(&self.labels).map(|(&t, &y)| -y * sigmoid(-t)));
        let g = self.features.tr_mul(&weights);
        for ((o, gi), wi) in out.iter_mut().zip(g.iter()).zip(w) {
            *o = gi + self.alpha * wi;
        }
    }

    fn hessian(&self, w: &[f64]) -> Option<DMatrix<f64>> {
        let margins = self.margins(w);
        let mut weighted = self.features.clone();
        for (mut row, &t) in weighted.row_iter_mut().zip(margins.iter()) {
            let s = sigmoid(t);
            row *= s * (1.0 - s);
        }
        let mut h = self.features.tr_mul(&weighted);
        for i in 0..h.nrows() {
            h[(i, i)] += self.alpha;
        }
        Some((&h + h.transpose()) * 0.5)
    }
}

#[derive(Debug)]
struct Hard {
    kappa: f64,
    h: f64,
    dim: usize,
}

impl Potential for Hard {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        let root_h = self.h.sqrt();
        let rest: f64 = x[1..]
            .iter()
            .map(|&xi| self.kappa / 3.0 * xi * xi - self.kappa * self.h / 3.0 * (xi / root_h).cos())
            .sum();
        0.5 * x[0] * x[0] + rest
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let root_h = self.h.sqrt();
        out[0] = x[0];
        for (o, &xi) in out[1..].iter_mut().zip(&x[1..]) {
            *o = 2.0 * self.kappa / 3.0 * xi + self.kappa * root_h / 3.0 * (xi / root_h).sin();
        }
    }

    fn hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let root_h = self.h.sqrt();
        let diag = DVector::from_iterator(
            self.dim,
            x.iter().enumerate().map(|(i, &xi)| {
                if i == 0 {
                    1.0
                } else {
                    self.kappa / 3.0 * (2.0 + (xi / root_h).cos())
                }
            }),
        );
        Some(DMatrix::from_diagonal(&diag))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn paper_gaussian() -> PotentialSpec {
        PotentialSpec::gaussian(&[0.0, 1.0], &DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 100.0])).unwrap()
    }

    fn toy_dataset() -> LabeledDataset {
        let features = DMatrix::from_row_slice(6, 2, &[1.0, 0.3, -0.5, 1.2, 2.0, -0.7, 0.1, 0.4, -1.5, -0.2, 0.8, 0.9]);
        LabeledDataset::new(features, vec![1.0, -1.0, 1.0, 1.0, -1.0, -1.0]).unwrap()
    }

    fn all_potentials() -> Vec<PotentialSpec> {
        vec![
            PotentialSpec::quadratic_diag(&[1.0, 100.0, 3.5]).unwrap(),
            paper_gaussian(),
            PotentialSpec::paper_mixture(10).unwrap(),
            PotentialSpec::logistic_regression(&toy_dataset(), 1.0).unwrap(),
            PotentialSpec::hard(50.0, 0.01, 10).unwrap(),
        ]
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let step = 1e-5;
        for p in all_potentials() {
            for _ in 0..100 {
                let x: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(-3.0..3.0)).collect();
                let g = p.gradient(&x);
                let scale = g.iter().map(|v| v.abs()).fold(1.0, f64::max);
                for j in 0..p.dim() {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[j] += step;
                    xm[j] -= step;
                    let fd = (p.value(&xp) - p.value(&xm)) / (2.0 * step);
                    assert!((fd - g[j]).abs() <= 1e-5 * scale, "{} coord {j}: fd {fd} vs {}", p.name(), g[j]);
                }
            }
        }
    }

    #[test]
    fn hessians_match_gradient_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let step = 1e-6;
        for p in all_potentials() {
            let x: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
            let h = p.hessian(&x).expect("analytic Hessian");
            let scale = h.amax().max(1.0);
            for j in 0..p.dim() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += step;
                xm[j] -= step;
                let (gp, gm) = (p.gradient(&xp), p.gradient(&xm));
                for i in 0..p.dim() {
                    let fd = (gp[i] - gm[i]) / (2.0 * step);
                    assert!((fd - h[(i, j)]).abs() <= 1e-5 * scale, "{} H[{i},{j}]", p.name());
                }
            }
        }
    }

    #[test]
    fn quadratic_examples() {
        let p = PotentialSpec::quadratic_diag(&[1.0]).unwrap();
        assert_eq!(p.value(&[2.0]), 4.0);
        assert_eq!(p.gradient(&[2.0]), vec![4.0]);
        let p = PotentialSpec::quadratic_diag(&[1.0, 100.0]).unwrap();
        assert_eq!(p.value(&[0.0, 0.0]), 0.0);
        assert_eq!(p.gradient(&[0.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(p.exact_flow_eigenvalues(), Some(&[1.0, 100.0][..]));
        assert_eq!((p.bounds().m(), p.bounds().l()), (1.0, 100.0));
        let p = PotentialSpec::quadratic_diag(&[0.5]).unwrap();
        assert_eq!(p.truth().unwrap().cov[(0, 0)], 1.0);
        assert!(matches!(
            PotentialSpec::quadratic_diag(&[1.0, 0.0]),
            Err(Error::NonPositiveEigenvalue { index: 1, .. })
        ));
        // gradient is exactly 2 lambda x
        let p = PotentialSpec::quadratic_diag(&[0.3, 7.0]).unwrap();
        let x = [1.7, -0.2];
        assert_eq!(p.gradient(&x), vec![2.0 * 0.3 * 1.7, 2.0 * 7.0 * -0.2]);
    }

    #[test]
    fn gaussian_examples() {
        let p = paper_gaussian();
        // eigenvalues of inv([[1, .5], [.5, 100]])
        assert!((p.bounds().m() - 0.01).abs() < 1e-4, "{}", p.bounds().m());
        assert!((p.bounds().l() - 1.0).abs() < 3e-3, "{}", p.bounds().l());
        let p = PotentialSpec::gaussian(&[3.0, -1.0], &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(p.value(&[3.0, -1.0]), 0.0);
        assert_eq!(p.gradient(&[3.0, -1.0]), vec![0.0, 0.0]);
        let p = PotentialSpec::gaussian(&[0.0, 0.0], &DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 100.0])))
            .unwrap();
        assert_relative_eq!(p.bounds().m(), 0.01, max_relative = 1e-12);
        assert_relative_eq!(p.bounds().l(), 1.0, max_relative = 1e-12);
        assert!(p.exact_flow_eigenvalues().is_none());
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(PotentialSpec::gaussian(&[0.0, 0.0], &bad), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn gaussian_frame_separates_potential() {
        let p = paper_gaussian();
        let frame = p.exact_flow_frame().unwrap();
        let x = [0.4, -2.0];
        let y = frame.to_frame(&x);
        let separated: f64 = frame.eigenvalues().iter().zip(&y).map(|(l, yi)| l * yi * yi).sum();
        assert_relative_eq!(separated, p.value(&x), max_relative = 1e-12);
        let back = frame.to_original(&y);
        assert_relative_eq!(back[0], x[0], epsilon = 1e-12);
        assert_relative_eq!(back[1], x[1], epsilon = 1e-12);
    }

    #[test]
    fn mixture_examples() {
        let p = PotentialSpec::paper_mixture(10).unwrap();
        assert_relative_eq!(p.bounds().m(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(p.bounds().l(), 10.0, max_relative = 1e-12);
        let g = p.gradient(&[0.0; 10]);
        assert!(g.iter().all(|v| v.abs() < 1e-15));

        let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.5]));
        let p = PotentialSpec::gaussian_mixture(&[0.0, 0.0], &cov).unwrap();
        let x = [0.7, -1.1];
        let quad = 0.5 * (0.7f64 * 0.7 / 2.0 + 1.1 * 1.1 / 0.5);
        assert_relative_eq!(p.value(&x), quad - std::f64::consts::LN_2, max_relative = 1e-14);

        let err = PotentialSpec::gaussian_mixture(&[1.0], &DMatrix::identity(1, 1)).unwrap_err();
        assert!(matches!(err, Error::MixtureNotStronglyConvex { .. }));
    }

    #[test]
    fn mixture_truth_is_mixture_covariance() {
        let p = PotentialSpec::paper_mixture(3).unwrap();
        let t = p.truth().unwrap();
        let a1 = 1.0 / 6.0;
        assert_relative_eq!(t.cov[(0, 0)], 1.0 / 3.0 + a1 * a1, max_relative = 1e-14);
    }

    #[test]
    fn logistic_examples() {
        let data = toy_dataset();
        let p = PotentialSpec::logistic_regression(&data, 1.0).unwrap();
        assert_relative_eq!(p.value(&[0.0, 0.0]), 6.0 * std::f64::consts::LN_2, max_relative = 1e-14);
        let g = p.gradient(&[0.0, 0.0]);
        for j in 0..2 {
            let want: f64 = -0.5 * (0..6).map(|i| data.labels()[i] * data.features()[(i, j)]).sum::<f64>();
            assert_relative_eq!(g[j], want, max_relative = 1e-14);
        }

        let single = LabeledDataset::new(DMatrix::from_row_slice(1, 1, &[1.0]), vec![1.0]).unwrap();
        let p = PotentialSpec::logistic_regression(&single, 1.0).unwrap();
        assert_relative_eq!(p.value(&[0.0]), std::f64::consts::LN_2, max_relative = 1e-15);
        assert_relative_eq!(p.gradient(&[0.0])[0], -0.5, max_relative = 1e-15);
        assert!(p.bounds().m() >= 1.0);
    }

    #[test]
    fn logistic_strong_convexity_at_least_alpha() {
        let data = toy_dataset();
        let p = PotentialSpec::logistic_regression(&data, 0.7).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let w: Vec<f64> = (0..2).map(|_| rng.random_range(-3.0..3.0)).collect();
            let b = hessian_extreme_eigs(p.model(), &w).unwrap();
            assert!(b.m() >= 0.7 - 1e-12);
        }
        assert!(p.bounds().m() >= 0.7 - 1e-12);
    }

    #[test]
    fn hard_examples() {
        let p = PotentialSpec::hard(50.0, 0.01, 10).unwrap();
        let zero = vec![0.0; 10];
        assert_relative_eq!(p.value(&zero), -9.0 * 50.0 * 0.01 / 3.0, max_relative = 1e-14);
        assert!(p.gradient(&zero).iter().all(|&g| g == 0.0));
        let mut e2 = zero.clone();
        e2[1] = 1.0;
        // mpmath: 100/3 + (50 * 0.1 / 3) sin(10)
        assert_relative_eq!(p.gradient(&e2)[1], 32.42663148185105, max_relative = 1e-13);
        let p1 = PotentialSpec::hard(5.0, 0.3, 1).unwrap();
        assert_eq!(p1.value(&[2.0]), 2.0);
        assert_eq!(p1.gradient(&[2.0]), vec![2.0]);
        assert_eq!((p.bounds().m(), p.bounds().l()), (1.0, 50.0));
    }

    #[test]
    fn hard_curvature_within_bounds() {
        let p = PotentialSpec::hard(50.0, 0.01, 3).unwrap();
        for i in 0..=2000 {
            let xi = -5.0 + 10.0 * i as f64 / 2000.0;
            let h = p.hessian(&[xi, xi, xi]).unwrap();
            assert_eq!(h[(0, 0)], 1.0);
            for j in 1..3 {
                assert!(h[(j, j)] >= 50.0 / 3.0 - 1e-12 && h[(j, j)] <= 50.0 + 1e-12);
            }
        }
    }
}
