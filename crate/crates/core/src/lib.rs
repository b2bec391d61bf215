//! Planar Coulomb gas dynamics.
//!
//! `N` particles in the plane, confined by `V(z) = |z|^2` and repelling each
//! other through `W(z) = log(1/|z|^2)`, evolve by the overdamped Langevin
//! equation
//!
//! ```text
//! dX = sqrt(2 alpha / beta) dB - alpha grad H(X) dt,
//! H(x) = (1/N) sum_i |x_i|^2 + (1/(2N^2)) sum_{i != j} log(1/|x_i - x_j|^2).
//! ```
//!
//! The crate is organised around the quantities that can be checked exactly:
//!
//! * [`model`]: energy, gradient, and generator closed forms.
//! * [`dynamics`]: a collision-aware Euler-Maruyama integrator and ensembles.
//! * [`cir`]: the Cox-Ingersoll-Ross process followed by the second moment
//!   `H_V`, its Gamma stationary law, and exact transition sampling.
//! * [`ginibre`]: marginal densities of the invariant law at `beta = N^2`.
//! * [`stats`]: empirical Wasserstein, KS, and chi-square utilities.
//! * [`suite`]: the verification checks shared by the CLI and the tests.

// Guards of the form `!(x > 0.0)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cir;
pub mod dynamics;
pub mod error;
pub mod ginibre;
pub mod model;
pub mod rng;
pub mod special;
pub mod stats;
pub mod suite;

pub use error::{Error, Result};
pub use model::{Configuration, GradientField, ModelParams, Point2};
