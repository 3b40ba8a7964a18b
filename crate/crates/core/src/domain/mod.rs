//! Rescaled domain, grid, physical parameters and the diffusion tensor.

mod grid;
mod params;
mod rescale;
mod tensor;

pub use grid::{Axis, Boundary, BoundaryFace, Grid, GridSpec};
pub use params::{CoriolisMode, PhysParams};
pub use rescale::{scale_state, unscale_state, PhysicalState};
pub use tensor::{
    coercivity_constant, scale_diffusion, symmetric_eigenvalues, DiffusionTensor, Matrix3, IDENTITY,
};

/// Builds the grid for `spec`, rejecting fewer than 4 cells per direction or
/// nonpositive extents.
pub fn build_grid(spec: GridSpec) -> crate::Result<Grid> {
    Grid::new(spec)
}
