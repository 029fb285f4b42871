//! Spherical means on H-type groups.
//!
//! The crate builds H-type group structures from Clifford-module data, evaluates the
//! three spherical-mean operators (sphere in the complement of the centre, product of
//! spheres, and the Korányi sphere), the spectral-projection kernels of the
//! sublaplacian, and the counterexample fields that show the L^p range
//! `p <= 2m/(m-1)` is sharp. Every identity is checked by deterministic quadrature;
//! the [`verify`] module bundles those checks into named suites.

pub mod error;
pub mod group;
pub mod kernels;
pub mod lab;
pub mod means;
pub mod quadrature;
pub mod report;
pub mod special;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
pub use group::{build_htype, GroupPoint, HTypeGroup};
pub use num_complex::Complex64;
pub use report::{Check, VerificationReport};
