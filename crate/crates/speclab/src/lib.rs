//! # speclab — a spectral-geometry laboratory
//!
//! This crate builds concrete geometries on which Laplace–Beltrami
//! eigenfunctions have controlled — and sometimes wildly rich — level-set
//! topology, and then audits those claims numerically:
//!
//! * **Flat-torus conformal metrics with a prescribed eigenfunction.**
//!   Weights of the form `Q(x) = 1 − F″(x)/(m²F(x))` make `Φ(x,y) = F(x)·cos(my)`
//!   an exact eigenfunction of the weighted Laplacian on `T²` with eigenvalue
//!   `m²`.  A smooth profile with infinitely many sign bands ([`torus::build_example1`])
//!   and an analytic trigonometric profile ([`torus::build_example2`]) are both
//!   constructed and checked.
//! * **1-D periodic generalized Sturm problems** `−u″ + k²u = σ·Q·u`
//!   ([`spectrum1d`]), solved by spectral collocation plus a dense symmetric
//!   eigensolver, with second-order perturbation coefficients for the analytic
//!   family cross-checked against closed forms.
//! * **Rotationally symmetric sphere metrics** ([`sphere`]) built by flattening
//!   `sinᵐθ` near the equator and adding a compactly supported oscillation with
//!   infinitely many sign changes, keeping the conformal factor uniformly close
//!   to the round metric.
//! * **P1 finite elements on polygons** ([`fem2d`]): Neumann/Dirichlet
//!   eigenpairs of subequilateral triangles, regular N-gons and reference disks,
//!   with level-set domain counting of the computed eigenfunctions.
//! * **Algebraic counting bounds** ([`algebraic`]): Hermite-function
//!   combinations of the quantum harmonic oscillator and polynomials restricted
//!   to the sphere, with seeded random trials audited against proved bounds.
//!
//! Everything funnels into [`nodal`], the level-set component counter: a
//! union-find flood fill over grid topologies (torus, sphere with pole caps,
//! masked planar boxes) with an independent breadth-first oracle used by the
//! test suite.
//!
//! The numerical kernels are deliberately self-contained — radix-2 FFT,
//! Householder tridiagonalization + implicit-shift QL, shift-invert Lanczos,
//! Bessel series — so that every figure this crate reports can be traced to
//! code in this repository.

pub mod algebraic;
pub mod contour;
pub mod fem2d;
pub mod fields;
pub mod nodal;
pub mod numerics;
pub mod report;
pub mod sphere;
pub mod spectrum1d;
pub mod torus;

mod error;

pub use error::{Error, Result};
