//! Hamiltonian Monte Carlo with Chebyshev-root integration times.
//!
//! The crate is split along the lines of the method:
//!
//! - [`chebyshev`]: Chebyshev polynomials of the first kind, the scaled-and-shifted
//!   polynomial on `[m, L]`, its roots, and the cosine-product / `psi` quantities that
//!   bound ideal HMC contraction.
//! - [`schedule`]: constant and Chebyshev integration-time schedules.
//! - [`potential`]: target potentials (quadratics, Gaussians, a Gaussian mixture,
//!   Bayesian logistic regression, and a step-size dependent "hard" potential).
//! - [`flow`]: exact Hamiltonian flow and ideal HMC for quadratic potentials.
//! - [`sampler`]: leapfrog HMC with a Metropolis filter driven by any schedule.
//! - [`diagnostics`]: effective sample size, covariance error, histogram TV and the
//!   closed-form Gaussian 2-Wasserstein distance.
//!
//! ```
//! use chebhmc::chebyshev::SpectralBounds;
//! use chebhmc::schedule::{IntegrationSchedule, PermMode};
//!
//! let bounds = SpectralBounds::new(1.0, 100.0).unwrap();
//! let schedule = IntegrationSchedule::chebyshev(8, bounds, PermMode::Random { seed: 7 }).unwrap();
//! assert_eq!(schedule.len(), 8);
//! ```

pub mod chebyshev;
pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod potential;
pub mod rng;
pub mod sampler;
pub mod schedule;
pub mod trace_io;

pub use error::{Error, Result};
