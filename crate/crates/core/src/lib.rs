//! Equilibrium measures for the anisotropic logarithmic interaction energy
//!
//! ```text
//! I(mu) = ∬ W(z - w) dmu(z) dmu(w) + ∫ |z|^2 dmu(z),   W(z) = -log|z| + alpha x^2/|z|^2
//! ```
//!
//! For `-1 < alpha < 1` the minimiser is the normalised indicator of the ellipse with
//! semi-axes `sqrt(1 - alpha)` and `sqrt(1 + alpha)`. This crate provides
//!
//! - [`geometry`]: points, axis-aligned ellipses, boundary frames and uniform sampling,
//! - [`kernel`]: the interaction kernel, its gradient and Fourier density,
//! - [`analytic`]: closed-form Cauchy transforms and interior potentials of ellipses,
//! - [`numerics`]: brute-force quadrature oracles (ellipse convolutions, grid measures,
//!   Cauchy integrals, the Fourier energy identity),
//! - [`solver`]: the discrete N-particle energy and an Armijo gradient descent,
//! - [`verify`]: end-to-end Euler–Lagrange certification producing [`verify::VerificationReport`]s,
//! - [`cli`]: the command-line front end used by the `aniso-eq` binary.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod numerics;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{BoundaryPoint, Ellipse, Membership, PlanePoint};
pub use kernel::KernelParams;
pub use solver::{ParticleConfig, SolveParams, SolveResult};
