//! Self-contained numerical kernels.
//!
//! Nothing in this module knows about tori, spheres or finite elements; it is
//! the small toolbox the rest of the crate is built from:
//!
//! * [`fft`] — radix-2 complex FFT (with an O(n²) direct-summation fallback
//!   for non-power-of-two lengths) used for spectral differentiation.
//! * [`quad`] — composite 7-point Gauss–Legendre quadrature on caller-supplied
//!   panels, exact through polynomial degree 13 per panel.
//! * [`eigen`] — dense symmetric eigensolver: Householder tridiagonalization
//!   followed by the implicit-shift QL iteration, plus the bare tridiagonal
//!   variant used by the Lanczos driver.
//! * [`bisect`] — sign-change scanning and bisection for scalar roots.
//! * [`hash`] — splitmix64 bit mixing for deterministic seed vectors.
//!
//! All kernels are deterministic: same input bits, same output bits.

pub mod bisect;
pub mod eigen;
pub mod fft;
pub mod hash;
pub mod quad;
