use crate::domain::{DiffusionTensor, Grid};
use crate::fields::{BoundaryForcing, ScalarField, StaggeredVelocity};

use super::padded::{Padded, Side};

/// Which boundary-condition set to realize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcMode {
    /// `u = 0` on the top and lateral walls, `u3 = 0` on the ground.
    Anisotropic,
    /// As above, except `u3` gets no lateral condition and keeps its
    /// diagnosed top value.
    Hydrostatic,
}

/// Velocity components with ghost layers realizing the boundary conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostedVelocity {
    pub u1: Padded,
    pub u2: Padded,
    pub u3: Padded,
}

impl GhostedVelocity {
    pub fn interior(&self) -> StaggeredVelocity {
        StaggeredVelocity {
            u1: self.u1.interior().to_owned(),
            u2: self.u2.interior().to_owned(),
            u3: self.u3.interior().to_owned(),
        }
    }
}

const DIRICHLET: [Side; 2] = [Side::Dirichlet, Side::Dirichlet];
const NODE: [Side; 2] = [Side::Node, Side::Node];
const GROUND_TOP: [Side; 2] = [Side::Flux, Side::Dirichlet];

/// Zeroes wall-normal faces and fills ghosts so that horizontal velocity
/// vanishes on the top and lateral walls while `nu3 (u_int - u_ghost) / dz = theta`
/// holds on the ground.
pub fn apply_velocity_bcs(
    u: &StaggeredVelocity,
    theta: &BoundaryForcing,
    nu3: f64,
    grid: &Grid,
    mode: BcMode,
) -> GhostedVelocity {
    let dz = grid.spacing()[2];
    let mut u = u.clone();
    let nz = grid.nz();
    for i in [0, grid.nx()] {
        u.u1.index_axis_mut(ndarray::Axis(0), i).fill(0.0);
    }
    for j in [0, grid.ny()] {
        u.u2.index_axis_mut(ndarray::Axis(1), j).fill(0.0);
    }
    u.u3.index_axis_mut(ndarray::Axis(2), 0).fill(0.0);
    if mode == BcMode::Anisotropic {
        u.u3.index_axis_mut(ndarray::Axis(2), nz).fill(0.0);
    }

    let mut u1 = Padded::new(u.u1.view(), [NODE, DIRICHLET, GROUND_TOP]);
    let mut u2 = Padded::new(u.u2.view(), [DIRICHLET, NODE, GROUND_TOP]);
    let lateral3 = match mode {
        BcMode::Anisotropic => DIRICHLET,
        BcMode::Hydrostatic => [Side::Free, Side::Free],
    };
    let mut u3 = Padded::new(u.u3.view(), [lateral3, lateral3, NODE]);
    u1.fill_simple_ghosts();
    u2.fill_simple_ghosts();
    u3.fill_simple_ghosts();

    let scale = dz / nu3;
    let s1 = u1.shape();
    for i in 0..s1[0] {
        for j in 0..s1[1] {
            let inner = u1.at([i, j, 0], [0, 0, 0]);
            let g = u1.flat(i, j, 0) - 1;
            u1.data.as_slice_mut().unwrap()[g] = inner - theta.theta1_at_face(i, j) * scale;
        }
    }
    let s2 = u2.shape();
    for i in 0..s2[0] {
        for j in 0..s2[1] {
            let inner = u2.at([i, j, 0], [0, 0, 0]);
            let g = u2.flat(i, j, 0) - 1;
            u2.data.as_slice_mut().unwrap()[g] = inner - theta.theta2_at_face(i, j) * scale;
        }
    }
    GhostedVelocity { u1, u2, u3 }
}

/// Ghost-extended concentration: `C = 0` on the top and lateral walls
/// (`ghost = -interior`) and `(M grad C) . n = 0` on the ground, where the
/// ghost solves `M31 d1C + M32 d2C + M33 (C_int - C_ghost) / dz = 0` with the
/// horizontal derivatives taken from the bottom layer.
pub fn apply_concentration_bcs(c: &ScalarField, m: &DiffusionTensor, grid: &Grid) -> Padded {
    let mut p = Padded::new(c.values.view(), [DIRICHLET, DIRICHLET, GROUND_TOP]);
    p.fill_simple_ghosts();
    let [dx, dy, dz] = grid.spacing();
    let [nx, ny, _] = grid.cell_shape();
    for i in 0..nx {
        for j in 0..ny {
            let mm = m.at(i, j, 0);
            let inner = p.at([i, j, 0], [0, 0, 0]);
            let mut g = inner;
            if mm[2][0] != 0.0 || mm[2][1] != 0.0 {
                let d1 = (p.at([i, j, 0], [1, 0, 0]) - p.at([i, j, 0], [-1, 0, 0])) / (2.0 * dx);
                let d2 = (p.at([i, j, 0], [0, 1, 0]) - p.at([i, j, 0], [0, -1, 0])) / (2.0 * dy);
                g = inner + dz * (mm[2][0] * d1 + mm[2][1] * d2) / mm[2][2];
            }
            let idx = p.flat(i, j, 0) - 1;
            p.data.as_slice_mut().unwrap()[idx] = g;
        }
    }
    p
}
