//! Numerical tools for harmonic Hopf constructions between spheres.
//!
//! The reduced problem is the singular two-point boundary-value problem
//!
//! ```text
//! α'' + (p cot t − q tan t) α' − (λ/sin²t + μ/cos²t) sin α cos α = 0,
//! α(0+) = 0,  α(π/2−) = π,
//! ```
//!
//! solved two independent ways: by gluing one-sided energy minimizers at a
//! junction `s` and driving the derivative jump `l(s)` to zero
//! ([`variational`], [`analysis`]), and by shooting from both singular
//! endpoints ([`shooting`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::excessive_precision)]

pub mod analysis;
pub mod banded;
pub mod closed_forms;
pub mod error;
pub mod fd;
pub mod grid;
pub mod hopf_map;
pub mod ode;
pub mod params;
pub mod profile;
pub mod quadrature;
pub mod rk;
pub mod shooting;
pub mod variational;

pub use error::{HopfError, Result};
pub use grid::{Grading, Grid};
pub use params::HopfParams;
pub use profile::Profile;
