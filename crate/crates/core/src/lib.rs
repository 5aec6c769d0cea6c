//! Numerical laboratory for self-adjoint extensions of second-order elliptic
//! operators parametrised by boundary Dirichlet forms.
//!
//! The minimal operator (Dirichlet realisation) is widened by a pair
//! `(Π, B)`: an orthogonal projection on the boundary trace space and a
//! symmetric operator acting on its range. Every such pair yields a
//! self-adjoint extension whose resolvent differs from the Dirichlet
//! resolvent by a finite-rank boundary correction built from the
//! Poisson operator and the Dirichlet-to-Neumann map. The crates' modules
//! construct these objects exactly on an interval, discretely on interval
//! and square-loop grids, classify which pairs generate Markov semigroups,
//! and verify the analytic predictions (positivity, heat-kernel sandwich,
//! recurrence vs. transience, Wentzell boundary conditions) numerically.

pub mod battery;
pub mod boundary;
pub mod classifier;
pub mod commands;
pub mod config;
pub mod elliptic;
pub mod error;
pub mod interval;
pub mod krein;
pub mod linalg;
pub mod parallel;
pub mod report;
pub mod semigroup;

pub use error::{Error, Result};
