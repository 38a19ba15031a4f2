//! Numerical laboratory for Gaussian beams, geodesic X-ray transforms and
//! boundary observability of wave equations with rough (Zygmund-class)
//! coefficients.
//!
//! The crate is organised around the pipeline
//!
//! ```text
//! geometry  ->  beams  ->  superposition  ->  wave
//!     \-> coefficients -/        |
//!            xray  <-------------/
//! ```
//!
//! * [`geometry`] — metrics, Hamiltonian/geodesic flow, exit times, Fermi frames.
//! * [`coefficients`] — coefficient fields, regularity seminorms and moduli,
//!   finite-difference surrogates, travel times.
//! * [`beams`] — single Gaussian beams: Riccati Hessian, deformation matrix,
//!   amplitude transport, cutoffs, residual diagnostics.
//! * [`superposition`] — beam families, the operator `Q`, normal and modified
//!   normal operators, stationary-phase diagnostics.
//! * [`xray`] — Euclidean and geodesic X-ray transforms, Riesz potentials,
//!   reconstruction and stability norms.
//! * [`wave`] — reference wave solver, boundary traces, observability
//!   experiments and the lifted wave Ansatz.

pub mod beams;
pub mod coefficients;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod registry;
pub mod superposition;
pub mod wave;
pub mod xray;

pub use error::{Error, Result};
