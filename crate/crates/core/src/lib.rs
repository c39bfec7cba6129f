//! Covariant convolution on chart-described Riemannian manifolds.
//!
//! The library provides the geometric primitives (metrics, Christoffel
//! symbols, geodesics, parallel transport, chart transitions), tensor
//! feature fields, tangent-ball quadrature kernels with transport-based
//! weight sharing, the covariant convolution itself, an SO(3) multiplicity
//! utility, and a configuration-driven check harness that turns the
//! covariance properties into executable pass/fail reports.
//!
//! All computation happens in chart coordinates with the coordinate basis;
//! angles and coordinates are radians and plain reals. Operations are pure
//! functions of immutable inputs and deterministic for a fixed input.

pub mod convolution;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod harness;
pub mod kernel;
pub mod rep;
pub mod tensor;

pub use error::{Error, Result};
