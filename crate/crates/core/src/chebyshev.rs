//! Chebyshev polynomials and the contraction quantities built from them.
//!
//! The scaled-and-shifted polynomial `phi_bar_K(lambda) = T_K(h(lambda)) / T_K(h(0))`
//! with `h(lambda) = (L + m - 2 lambda) / (L - m)` is the minimax degree-`K`
//! polynomial on `[m, L]` normalized to one at the origin. Its roots define the
//! Chebyshev integration times, and the cosine product
//! `prod_k cos((pi/2) sqrt(lambda / r_k))` is dominated by it pointwise on `[m, L]`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this degree products are accumulated as sign and log-magnitude.
const LOG_PRODUCT_DEGREE: usize = 64;

/// Half-width of the window around `x = 1` where `psi` returns its limit value.
const PSI_PATCH: f64 = 1e-6;

/// Strong convexity `m` and smoothness `L` of a potential, `0 < m <= L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBounds", into = "RawBounds")]
pub struct SpectralBounds {
    m: f64,
    l: f64,
}

#[derive(Serialize, Deserialize)]
struct RawBounds {
    m: f64,
    #[serde(rename = "L")]
    l: f64,
}

impl TryFrom<RawBounds> for SpectralBounds {
    type Error = Error;

    fn try_from(raw: RawBounds) -> Result<Self> {
        SpectralBounds::new(raw.m, raw.l)
    }
}

impl From<SpectralBounds> for RawBounds {
    fn from(b: SpectralBounds) -> Self {
        RawBounds { m: b.m, l: b.l }
    }
}

impl SpectralBounds {
    pub fn new(m: f64, l: f64) -> Result<Self> {
        if !(m.is_finite() && l.is_finite() && m > 0.0 && m <= l) {
            return Err(Error::InvalidBounds { m, l });
        }
        Ok(SpectralBounds { m, l })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// `kappa = L / m`.
    pub fn condition_number(&self) -> f64 {
        self.l / self.m
    }

    pub fn is_degenerate(&self) -> bool {
        self.m == self.l
    }

    pub fn contains(&self, lambda: f64) -> bool {
        (self.m..=self.l).contains(&lambda)
    }

    /// `n` equally spaced points from `m` to `L` inclusive.
    pub fn uniform_grid(&self, n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![self.m],
            _ => {
                let step = (self.l - self.m) / (n - 1) as f64;
                (0..n)
                    .map(|i| if i == n - 1 { self.l } else { self.m + step * i as f64 })
                    .collect()
            }
        }
    }

    /// Points `m, m + step, ...` up to and including `L` (within half a step).
    pub fn stepped_grid(&self, step: f64) -> Vec<f64> {
        assert!(step > 0.0, "grid step must be positive");
        let n = ((self.l - self.m) / step + 0.5).floor() as usize;
        let mut grid: Vec<f64> = (0..=n).map(|i| self.m + step * i as f64).collect();
        if let Some(last) = grid.last_mut() {
            if (*last - self.l).abs() < 0.5 * step {
                *last = self.l;
            }
        }
        grid
    }
}

/// The `K` roots of the scaled-and-shifted Chebyshev polynomial, ascending in `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevRootSet {
    roots: Vec<f64>,
    bounds: SpectralBounds,
}

impl ChebyshevRootSet {
    /// `r_k = (L + m)/2 - (L - m)/2 * cos((k - 1/2) pi / K)` for `k = 1..=K`.
    ///
    /// When `m = L` every root equals `m`.
    pub fn new(degree: usize, bounds: SpectralBounds) -> Self {
        let center = 0.5 * (bounds.l + bounds.m);
        let half_width = 0.5 * (bounds.l - bounds.m);
        let roots = (1..=degree)
            .map(|k| {
                let angle = (k as f64 - 0.5) * std::f64::consts::PI / degree as f64;
                center - half_width * angle.cos()
            })
            .collect();
        ChebyshevRootSet { roots, bounds }
    }

    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    pub fn bounds(&self) -> SpectralBounds {
        self.bounds
    }

    /// `r_k` with a one-based index, as in the root formula.
    pub fn root(&self, k: usize) -> Result<f64> {
        if k == 0 || k > self.roots.len() {
            return Err(Error::OutOfRange { index: k, max: self.roots.len() });
        }
        Ok(self.roots[k - 1])
    }
}

/// Roots of the degree-`K` scaled-and-shifted Chebyshev polynomial on `[m, L]`.
pub fn cheb_roots(degree: usize, bounds: SpectralBounds) -> ChebyshevRootSet {
    ChebyshevRootSet::new(degree, bounds)
}

/// Chebyshev polynomial of the first kind, `T_K(x)`, for any real `x`.
pub fn cheb_first_kind(degree: u32, x: f64) -> f64 {
    let k = degree as f64;
    if (-1.0..=1.0).contains(&x) {
        (k * x.acos()).cos()
    } else if x > 1.0 {
        (k * x.acosh()).cosh()
    } else {
        let magnitude = (k * (-x).acosh()).cosh();
        if degree.is_multiple_of(2) {
            magnitude
        } else {
            -magnitude
        }
    }
}

/// `ln cosh(y)` without overflow.
fn ln_cosh(y: f64) -> f64 {
    let y = y.abs();
    y + (-2.0 * y).exp().ln_1p() - LN_2
}

/// `ln |T_K(x)|` for `|x| >= 1`.
fn ln_abs_cheb_outside(degree: u32, x: f64) -> f64 {
    ln_cosh(degree as f64 * x.abs().acosh())
}

/// The affine map `h(lambda) = (L + m - 2 lambda) / (L - m)` sending `[m, L]` onto `[-1, 1]`.
pub fn h_map(lambda: f64, bounds: SpectralBounds) -> Result<f64> {
    if bounds.is_degenerate() {
        return Err(Error::DegenerateSpectrum { m: bounds.m });
    }
    Ok((bounds.l + bounds.m - 2.0 * lambda) / (bounds.l - bounds.m))
}

/// `phi_bar_K(lambda) = T_K(h(lambda)) / T_K(h(0))`.
///
/// The denominator is handled in log space, so large `K` neither overflows nor
/// underflows.
pub fn phi_bar(degree: u32, lambda: f64, bounds: SpectralBounds) -> Result<f64> {
    let h = h_map(lambda, bounds)?;
    let ln_den = ln_abs_cheb_outside(degree, h_map(0.0, bounds)?);
    if h.abs() <= 1.0 {
        Ok(cheb_first_kind(degree, h) * (-ln_den).exp())
    } else {
        let magnitude = (ln_abs_cheb_outside(degree, h) - ln_den).exp();
        let negative = h < -1.0 && degree % 2 == 1;
        Ok(if negative { -magnitude } else { magnitude })
    }
}

/// `prod_k (1 - lambda / r_k)`, the product form of `phi_bar` through its roots.
pub fn root_product(lambda: f64, roots: &[f64]) -> f64 {
    signed_product(roots.iter().map(|r| 1.0 - lambda / r))
}

/// Upper bound `2 (1 - 2 sqrt(m) / (sqrt(L) + sqrt(m)))^K` on `max |phi_bar_K|` over `[m, L]`.
pub fn rate_bound(degree: u32, bounds: SpectralBounds) -> f64 {
    if degree == 0 {
        return 2.0;
    }
    let (sm, sl) = (bounds.m.sqrt(), bounds.l.sqrt());
    let base = (sl - sm) / (sl + sm);
    if base <= 0.0 {
        return 0.0;
    }
    2.0 * (degree as f64 * base.ln()).exp()
}

/// `prod_k cos((pi/2) sqrt(lambda / r_k))` over the given roots.
///
/// Invariant under any reordering of `roots`.
pub fn cosine_product(lambda: f64, roots: &[f64]) -> f64 {
    signed_product(roots.iter().map(|r| (FRAC_PI_2 * (lambda / r).sqrt()).cos()))
}

/// Product of the factors, accumulated as sign and log-magnitude once the
/// factor count exceeds 64.
pub(crate) fn signed_product<I>(factors: I) -> f64
where
    I: ExactSizeIterator<Item = f64>,
{
    if factors.len() <= LOG_PRODUCT_DEGREE {
        return factors.product();
    }
    let mut negative = false;
    let mut ln_magnitude = 0.0;
    for f in factors {
        if f == 0.0 {
            return 0.0;
        }
        negative ^= f < 0.0;
        ln_magnitude += f.abs().ln();
    }
    let magnitude = ln_magnitude.exp();
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

/// `psi(x) = cos((pi/2) sqrt(x)) / (1 - x)`, extended continuously by `pi/4` at `x = 1`.
pub fn psi(x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::NegativeInput(x));
    }
    if (x - 1.0).abs() < PSI_PATCH {
        return Ok(FRAC_PI_4);
    }
    Ok((FRAC_PI_2 * x.sqrt()).cos() / (1.0 - x))
}

/// Gradient descent on `f(w) = 1/2 sum_j lambda_j w_j^2` with step sizes `1 / r_k`,
/// taken in the order the roots are given. Returns the final iterate.
pub fn gd_chebyshev_contraction(eigenvalues: &[f64], roots: &[f64], x0: &[f64]) -> Result<Vec<f64>> {
    if eigenvalues.len() != x0.len() {
        return Err(Error::DimensionMismatch { expected: eigenvalues.len(), found: x0.len() });
    }
    let mut w = x0.to_vec();
    for &r in roots {
        let step = 1.0 / r;
        for (wj, &lambda) in w.iter_mut().zip(eigenvalues) {
            let grad = lambda * *wj;
            *wj -= step * grad;
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn b(m: f64, l: f64) -> SpectralBounds {
        SpectralBounds::new(m, l).unwrap()
    }

    /// Three-term recurrence oracle for `T_K(x)`.
    fn recurrence(degree: u32, x: f64) -> f64 {
        let (mut prev, mut cur) = (1.0, x);
        if degree == 0 {
            return prev;
        }
        for _ in 1..degree {
            let next = 2.0 * x * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    }

    #[test]
    fn bounds_validation() {
        assert!(SpectralBounds::new(0.0, 1.0).is_err());
        assert!(SpectralBounds::new(2.0, 1.0).is_err());
        assert!(SpectralBounds::new(1.0, f64::INFINITY).is_err());
        assert_eq!(b(2.0, 50.0).condition_number(), 25.0);
        let json = serde_json::to_string(&b(1.0, 100.0)).unwrap();
        assert_eq!(json, r#"{"m":1.0,"L":100.0}"#);
        assert!(serde_json::from_str::<SpectralBounds>(r#"{"m":3.0,"L":1.0}"#).is_err());
    }

    #[test]
    fn first_kind_examples() {
        assert_eq!(cheb_first_kind(5, 1.0), 1.0);
        assert_relative_eq!(cheb_first_kind(2, 0.5), -0.5, epsilon = 1e-15);
        assert_relative_eq!(cheb_first_kind(3, 2.0), 26.0, max_relative = 1e-13);
        assert_relative_eq!(cheb_first_kind(3, -2.0), -26.0, max_relative = 1e-13);
        assert_eq!(cheb_first_kind(0, 7.0), 1.0);
    }

    #[test]
    fn first_kind_matches_recurrence_on_grid() {
        for degree in 0..=64u32 {
            for i in 0..=400 {
                let x = -10.0 + 20.0 * i as f64 / 400.0;
                let want = recurrence(degree, x);
                let got = cheb_first_kind(degree, x);
                let scale = want.abs().max(1.0);
                assert!((got - want).abs() <= 1e-10 * scale, "K={degree} x={x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn h_map_examples() {
        let bounds = b(1.0, 100.0);
        assert_eq!(h_map(1.0, bounds).unwrap(), 1.0);
        assert_eq!(h_map(100.0, bounds).unwrap(), -1.0);
        assert_relative_eq!(h_map(0.0, bounds).unwrap(), 101.0 / 99.0, max_relative = 1e-15);
        assert!(matches!(h_map(1.0, b(3.0, 3.0)), Err(Error::DegenerateSpectrum { .. })));
    }

    #[test]
    fn phi_bar_examples() {
        let bounds = b(1.0, 100.0);
        for k in [1, 2, 7, 64, 400] {
            assert_relative_eq!(phi_bar(k, 0.0, bounds).unwrap(), 1.0, max_relative = 1e-12);
        }
        // Phi_2(1) / Phi_2(101/99) = 9801 / 10601
        assert_relative_eq!(phi_bar(2, 1.0, bounds).unwrap(), 9801.0 / 10601.0, max_relative = 1e-12);
        let roots = cheb_roots(9, bounds);
        for &r in roots.roots() {
            assert!(phi_bar(9, r, bounds).unwrap().abs() < 1e-9);
        }
        assert!(phi_bar(2, 1.0, b(2.0, 2.0)).is_err());
    }

    #[test]
    fn phi_bar_large_degree_is_finite() {
        let bounds = b(1.0, 1e4);
        let v = phi_bar(5000, 50.0, bounds).unwrap();
        assert!(v.is_finite() && v.abs() < 1e-30);
        assert!(phi_bar(5000, -3.0, bounds).unwrap().is_finite());
    }

    #[test]
    fn phi_bar_equals_root_product() {
        let bounds = b(1.0, 100.0);
        let grid = bounds.uniform_grid(512);
        for k in 1..=64u32 {
            let roots = cheb_roots(k as usize, bounds);
            for &lambda in &grid {
                let direct = phi_bar(k, lambda, bounds).unwrap();
                let product = root_product(lambda, roots.roots());
                let scale = direct.abs().max(1e-300);
                assert!(
                    (direct - product).abs() <= 1e-9 * scale.max(product.abs()) + 1e-15,
                    "K={k} lambda={lambda}: {direct} vs {product}"
                );
            }
        }
    }

    #[test]
    fn root_examples() {
        let r = cheb_roots(1, b(1.0, 100.0));
        assert_eq!(r.roots(), &[50.5]);
        let r = cheb_roots(2, b(1.0, 100.0));
        // mpmath: 50.5 -/+ 49.5 cos(pi/4)
        assert_relative_eq!(r.roots()[0], 15.498214331265898, max_relative = 1e-14);
        assert_relative_eq!(r.roots()[1], 85.50178566873410, max_relative = 1e-14);
        assert_eq!(cheb_roots(3, b(4.0, 4.0)).roots(), &[4.0, 4.0, 4.0]);
        assert!(r.root(0).is_err());
        assert_eq!(r.root(2).unwrap(), r.roots()[1]);
    }

    #[test]
    fn roots_lie_strictly_inside() {
        let bounds = b(0.01, 1.0);
        for k in 1..200 {
            let r = cheb_roots(k, bounds);
            assert!(r.roots().windows(2).all(|w| w[0] < w[1]));
            assert!(r.roots().iter().all(|&x| x > 0.01 && x < 1.0));
        }
    }

    #[test]
    fn rate_bound_examples() {
        let bounds = b(1.0, 100.0);
        assert_eq!(rate_bound(0, bounds), 2.0);
        assert_eq!(rate_bound(5, b(3.0, 3.0)), 0.0);
        // mpmath: 2 (9/11)^400
        assert_relative_eq!(rate_bound(400, bounds), 2.760321754056372e-35, max_relative = 1e-12);
    }

    #[test]
    fn rate_bound_dominates_phi_bar() {
        let bounds = b(1.0, 100.0);
        let grid = bounds.uniform_grid(512);
        for k in 1..=64u32 {
            let worst = grid.iter().map(|&l| phi_bar(k, l, bounds).unwrap().abs()).fold(0.0, f64::max);
            assert!(worst <= rate_bound(k, bounds) + 1e-12, "K={k}");
        }
    }

    #[test]
    fn cosine_product_examples() {
        let bounds = b(1.0, 100.0);
        let roots = cheb_roots(6, bounds);
        for &r in roots.roots() {
            assert!(cosine_product(r, roots.roots()).abs() < 1e-15);
        }
        assert_eq!(cosine_product(0.0, roots.roots()), 1.0);
        let single = cheb_roots(1, bounds);
        // mpmath: cos((pi/2) sqrt(1/50.5))
        assert_relative_eq!(cosine_product(1.0, single.roots()), 0.9756695927646524, max_relative = 1e-14);
        assert!(cosine_product(1.0, single.roots()) <= phi_bar(1, 1.0, bounds).unwrap());
    }

    #[test]
    fn cosine_product_dominated_by_phi_bar() {
        let bounds = b(1.0, 100.0);
        let grid = bounds.uniform_grid(512);
        for k in 1..=64u32 {
            let roots = cheb_roots(k as usize, bounds);
            for &lambda in &grid {
                let lhs = cosine_product(lambda, roots.roots()).abs();
                let rhs = phi_bar(k, lambda, bounds).unwrap().abs();
                assert!(lhs <= rhs + 1e-12, "K={k} lambda={lambda}");
            }
        }
    }

    #[test]
    fn log_product_agrees_with_direct() {
        let roots = cheb_roots(200, b(1.0, 100.0));
        let direct: f64 = roots.roots().iter().map(|r| (FRAC_PI_2 * (3.3 / r).sqrt()).cos()).product();
        assert_relative_eq!(cosine_product(3.3, roots.roots()), direct, max_relative = 1e-10);
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(0.0).unwrap(), 1.0);
        assert_eq!(psi(1.0).unwrap(), FRAC_PI_4);
        assert_relative_eq!(psi(4.0).unwrap(), 1.0 / 3.0, max_relative = 1e-14);
        assert!(matches!(psi(-0.1), Err(Error::NegativeInput(_))));
        // continuous across the patched window
        assert!((psi(1.0 + 2e-6).unwrap() - FRAC_PI_4).abs() < 1e-5);
        assert!((psi(1.0 - 2e-6).unwrap() - FRAC_PI_4).abs() < 1e-5);
    }

    #[test]
    fn psi_bounded_by_one() {
        for i in 1..10_000 {
            let x = 100.0 * i as f64 / 9_999.0;
            assert!(psi(x).unwrap().abs() < 1.0, "x={x}");
        }
    }

    #[test]
    fn gd_examples() {
        let bounds = b(1.0, 100.0);
        let one = cheb_roots(1, bounds);
        let w = gd_chebyshev_contraction(&[one.roots()[0]], one.roots(), &[1.0]).unwrap();
        assert!(w[0].abs() < 1e-15);
        let two = cheb_roots(2, bounds);
        let w = gd_chebyshev_contraction(&[1.0, 100.0], two.roots(), &[0.0, 0.0]).unwrap();
        assert_eq!(w, vec![0.0, 0.0]);
        let w = gd_chebyshev_contraction(&[1.0, 100.0], two.roots(), &[1.0, 1.0]).unwrap();
        assert_relative_eq!(w[0], 9801.0 / 10601.0, max_relative = 1e-12);
        assert_relative_eq!(w[1], 9801.0 / 10601.0, max_relative = 1e-12);
        assert!(gd_chebyshev_contraction(&[1.0], two.roots(), &[1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn cosine_product_is_permutation_invariant(seed in any::<u64>(), lambda in 1.0f64..100.0) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let roots = cheb_roots(24, b(1.0, 100.0));
            let mut shuffled = roots.roots().to_vec();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = cosine_product(lambda, roots.roots());
            let c = cosine_product(lambda, &shuffled);
            prop_assert!((a - c).abs() <= 1e-14 * a.abs().max(1e-300));
        }

        #[test]
        fn h_map_is_affine_decreasing(m in 0.01f64..10.0, width in 0.1f64..100.0, t in 0.0f64..1.0) {
            let bounds = b(m, m + width);
            let lambda = m + t * width;
            let h = h_map(lambda, bounds).unwrap();
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&h));
            prop_assert!(h_map(lambda + 0.1, bounds).unwrap() < h);
        }
    }
}
