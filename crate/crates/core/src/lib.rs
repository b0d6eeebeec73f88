//! Numerical laboratory for Weyl laws of `−Δ + V` in three dimensions with
//! singular Kato-class potentials `V ~ γ d^{η−2}`.
//!
//! Modules, bottom-up:
//! - [`kernels`]: κ, the Jackson pair, Yukawa Green's functions.
//! - [`kato`]: potentials, Kato and L^q norms, Fourier coefficients.
//! - [`spectral`]: plane-wave and sine-basis Hamiltonians, spectra, densities.
//! - [`correction`]: the singular correction term, its scaling profile Ξ_η.
//! - [`tauberian`]: Stieltjes/Laplace transforms and the Tauberian check.
//! - [`fit`]: remainder-exponent fits used by the experiments.

pub mod error;
pub mod kato;
pub mod kernels;
pub mod correction;
pub mod fit;
pub mod quad;
pub mod spectral;
pub mod tauberian;

pub use error::{Result, WeylError};
