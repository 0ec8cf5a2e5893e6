//! Harmonic analysis on the Heisenberg group: a projective Fourier
//! transform, Littlewood–Paley blocks, weighted Besov norms, heat flow,
//! paraproducts, fractional noise, and a mild-form solver for the
//! parabolic Anderson model driven by that noise.

pub mod error;
pub mod group_core;
pub mod heat_flow;
pub mod littlewood_paley;
pub mod pam_solver;
pub mod paraproduct;
pub mod quadrature;
pub(crate) mod serde_util;
pub mod special_functions;
pub mod spectral;
pub mod stochastics;

pub use error::{Error, Result};
