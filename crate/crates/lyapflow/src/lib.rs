//! Generalized Lyapunov exponents L(l) of products of random SL(d,R) matrices
//! arising from incompressible renewing flows.
//!
//! The moment growth rate L(l) = lim (1/n) ln E|x Pi_n|^l is computed three
//! independent ways and cross-validated:
//!
//! * [`flowsim`]: direct Monte Carlo simulation of the matrix products, with
//!   cumulant estimation and an independence diagnostic for the shear angles.
//! * [`spectral2d`] / [`spectral3d`]: leading eigenvalue of the truncated
//!   transfer operator in the continuum (weak-disorder) limit, reduced to a
//!   companion eigenproblem for the angular Laplacian perturbed by the
//!   squared strain generators.
//! * [`series`]: exact-rational perturbation series of that eigenvalue in
//!   powers of the strain parameter k^2, with polynomial-in-l coefficients,
//!   plus rate-function (Legendre transform) series and numerics.
//!
//! Closed-form anchors live in [`elliptic`] (complete elliptic integrals and
//! the d=2 small-l branch data) and [`polyrep`] (exact sl(d) generator
//! matrices on homogeneous polynomials, the Casimir identity, and the
//! quasi-solvable characteristic polynomials at even integer l).
//! [`exact`] supplies the arbitrary-precision substrate and [`eigen`] a dense
//! real nonsymmetric eigensolver. [`cli`] wires everything into the
//! `lyapflow` binary; [`validate`] holds the cross-validation suite.

pub mod cli;
pub mod eigen;
pub mod elliptic;
pub mod exact;
pub mod flowsim;
pub mod polyrep;
pub mod series;
pub mod spectral2d;
pub mod spectral3d;
pub mod stencil3d;
pub mod validate;
