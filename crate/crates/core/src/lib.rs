//! Brownian loop measure on Riemann surfaces, computed from geodesic lengths.
//!
//! The loop measure of a free homotopy class is a closed-form function of the
//! length of the geodesic in that class: `1/(m (e^l - 1))` on hyperbolic
//! surfaces and `Area/(pi |tau|^2)` on flat tori. This crate evaluates those
//! masses, enumerates length spectra of free Fuchsian groups given by
//! generator matrices, evaluates the puncture identities that compare the
//! spectra of a surface and its punctured version, computes the
//! zeta-regularized log-determinant of the Laplacian from a length spectrum by
//! two independent routes, and cross-checks the flat-torus hit mass by Monte
//! Carlo sampling of Brownian bridges.
//!
//! Module map:
//!
//! | module | contents |
//! |--------|----------|
//! | [`hypgeom`] | Moebius matrices, heat kernels, quadrature, erf / li |
//! | [`spectrum`] | cyclic words, spectrum enumeration, Markov oracle, cache files |
//! | [`loopmass`] | closed-form masses and quadrature verifiers |
//! | [`identity`] | puncture identity partial sums and tail extrapolation |
//! | [`detlap`] | universal constants and both log-determinant routes |
//! | [`mcloop`] | Monte Carlo hit mass on flat tori |
//! | [`acceptance`] | acceptance criteria shared by the test suite and `selftest` |

// NaN inputs must fail validation, hence `!(x > 0.0)`; quadrature tables keep
// their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod acceptance;
pub mod detlap;
pub mod error;
pub mod hypgeom;
pub mod identity;
pub mod loopmass;
pub mod mcloop;
pub mod numfmt;
pub mod spectrum;

pub use error::{Error, Result};
