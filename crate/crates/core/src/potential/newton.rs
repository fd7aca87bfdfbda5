use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::Potential;
use crate::chebyshev::SpectralBounds;
use crate::error::{Error, Result};

const MAX_ASYMMETRY: f64 = 1e-8;

fn analytic_hessian(p: &dyn Potential, x: &[f64]) -> Result<DMatrix<f64>> {
    p.hessian(x).ok_or_else(|| Error::NoHessian(format!("{p:?}")))
}

/// Newton's method with backtracking on `f`. Stops when `|grad f(x)| <= tol` or
/// when the full Newton step is shorter than `tol * (1 + |x|)`.
pub fn newton_map(p: &dyn Potential, x0: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let d = p.dim();
    if x0.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: x0.len() });
    }
    let mut x = DVector::from_column_slice(x0);
    let mut grad = vec![0.0; d];
    let mut fx = p.value(x.as_slice());
    for _ in 0..max_iter {
        p.gradient(x.as_slice(), &mut grad);
        let g = DVector::from_column_slice(&grad);
        if g.norm() <= tol {
            return Ok(x.as_slice().to_vec());
        }
        let h = analytic_hessian(p, x.as_slice())?;
        let direction = match h.clone().cholesky() {
            Some(chol) => chol.solve(&g),
            None => h.lu().solve(&g).ok_or(Error::SingularHessian)?,
        };
        if direction.norm() <= tol * (1.0 + x.norm()) {
            return Ok((&x - &direction).as_slice().to_vec());
        }
        let mut step = 1.0;
        loop {
            let candidate = &x - &direction * step;
            let fc = p.value(candidate.as_slice());
            if fc <= fx + 1e-4 * step * g.dot(&-&direction) || step < 1e-12 {
                x = candidate;
                fx = fc;
                break;
            }
            step *= 0.5;
        }
    }
    p.gradient(x.as_slice(), &mut grad);
    let grad_norm = DVector::from_column_slice(&grad).norm();
    if grad_norm <= tol {
        Ok(x.as_slice().to_vec())
    } else {
        Err(Error::NoConvergence { iterations: max_iter, grad_norm })
    }
}

/// Smallest and largest eigenvalues of the analytic Hessian at `x`.
pub fn hessian_extreme_eigs(p: &dyn Potential, x: &[f64]) -> Result<SpectralBounds> {
    let h = analytic_hessian(p, x)?;
    let max_asymmetry = (&h - h.transpose()).amax();
    if max_asymmetry > MAX_ASYMMETRY {
        return Err(Error::AsymmetricHessian { max_asymmetry });
    }
    let eig = SymmetricEigen::new(h);
    SpectralBounds::new(eig.eigenvalues.min(), eig.eigenvalues.max())
}
