//! Projective Fourier analysis on a truncated frequency space.

pub mod field;
pub mod grid;
pub mod io;
pub mod operators;
pub mod transform;

pub use field::{SpatialField, SpatialGrid, SpectralField};
pub use grid::{plancherel_constant, FrequencyGrid, GridSpec, MultiIndexTable, Truncation};
pub use operators::*;
pub use transform::{boundary_warning, resolution_warning, forward_transform, inverse_at_points, inverse_transform, plancherel_norm};
