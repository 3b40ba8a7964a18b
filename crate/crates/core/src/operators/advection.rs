use std::str::FromStr;

use ndarray::Array3;

use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::fields::{ScalarField, StaggeredVelocity};

/// Discretization of `u . grad q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdvectionScheme {
    /// First-order donor cell.
    #[default]
    Upwind1,
    /// Second-order centered.
    Centered2,
}

impl FromStr for AdvectionScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upwind1" => Ok(AdvectionScheme::Upwind1),
            "centered2" => Ok(AdvectionScheme::Centered2),
            other => Err(Error::InvalidParameter {
                name: "advection",
                reason: format!("unknown scheme `{other}` (expected upwind1 or centered2)"),
            }),
        }
    }
}

/// Adds the contribution of the control-volume face between nodes `a` and
/// `b = a + e` carrying transport velocity `vel` (positive from `a` to `b`).
///
/// Upwind puts the whole face term on the downstream node, centered splits it.
#[inline]
fn face(
    out: &mut Array3<f64>,
    q: &Array3<f64>,
    a: [usize; 3],
    b: [usize; 3],
    vel: f64,
    inv_h: f64,
    scheme: AdvectionScheme,
    active: impl Fn([usize; 3]) -> bool,
) {
    if vel == 0.0 {
        return;
    }
    let g = vel * (q[b] - q[a]) * inv_h;
    match scheme {
        AdvectionScheme::Upwind1 => {
            let t = if vel > 0.0 { b } else { a };
            if active(t) {
                out[t] += g;
            }
        }
        AdvectionScheme::Centered2 => {
            for t in [a, b] {
                if active(t) {
                    out[t] += 0.5 * g;
                }
            }
        }
    }
}

/// `u . grad C` at cell centers, as a sum over the faces of each cell.
///
/// For a discretely divergence-free `u` with zero wall-normal velocity,
/// `(C, advect_scalar(u, C)) >= 0` under `Upwind1` and `= 0` under `Centered2`.
pub fn advect_scalar(
    u: &StaggeredVelocity,
    c: &ScalarField,
    scheme: AdvectionScheme,
    grid: &Grid,
) -> Result<ScalarField> {
    u.check_shape(grid)?;
    c.check_shape(grid)?;
    let [nx, ny, nz] = grid.cell_shape();
    let h = grid.spacing();
    let q = &c.values;
    let mut out = Array3::zeros((nx, ny, nz));
    let all = |_: [usize; 3]| true;
    for i in 1..nx {
        for j in 0..ny {
            for k in 0..nz {
                face(
                    &mut out,
                    q,
                    [i - 1, j, k],
                    [i, j, k],
                    u.u1[[i, j, k]],
                    1.0 / h[0],
                    scheme,
                    all,
                );
            }
        }
    }
    for i in 0..nx {
        for j in 1..ny {
            for k in 0..nz {
                face(
                    &mut out,
                    q,
                    [i, j - 1, k],
                    [i, j, k],
                    u.u2[[i, j, k]],
                    1.0 / h[1],
                    scheme,
                    all,
                );
            }
        }
    }
    for i in 0..nx {
        for j in 0..ny {
            for k in 1..nz {
                face(
                    &mut out,
                    q,
                    [i, j, k - 1],
                    [i, j, k],
                    u.u3[[i, j, k]],
                    1.0 / h[2],
                    scheme,
                    all,
                );
            }
        }
    }
    Ok(ScalarField::from_array(out))
}

/// `u . grad u_d` on each component's own faces, with transport velocities
/// averaged onto the faces of the staggered control volumes. Wall nodes get 0.
pub fn advect_velocity(
    u: &StaggeredVelocity,
    scheme: AdvectionScheme,
    grid: &Grid,
) -> Result<StaggeredVelocity> {
    u.check_shape(grid)?;
    Ok(advect_velocity_impl(u, scheme, grid, true))
}

pub(crate) fn advect_velocity_impl(
    u: &StaggeredVelocity,
    scheme: AdvectionScheme,
    grid: &Grid,
    vertical: bool,
) -> StaggeredVelocity {
    let [nx, ny, nz] = grid.cell_shape();
    let inv = grid.spacing().map(|h| 1.0 / h);
    let (u1, u2, u3) = (&u.u1, &u.u2, &u.u3);
    let mut out = StaggeredVelocity::zeros(grid);

    // u1: nodes i in 1..nx are unknowns
    let act1 = |t: [usize; 3]| t[0] > 0 && t[0] < nx;
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let vel = 0.5 * (u1[[i, j, k]] + u1[[i + 1, j, k]]);
                face(
                    &mut out.u1,
                    u1,
                    [i, j, k],
                    [i + 1, j, k],
                    vel,
                    inv[0],
                    scheme,
                    act1,
                );
            }
        }
    }
    for i in 1..nx {
        for j in 0..ny - 1 {
            for k in 0..nz {
                let vel = 0.5 * (u2[[i - 1, j + 1, k]] + u2[[i, j + 1, k]]);
                face(
                    &mut out.u1,
                    u1,
                    [i, j, k],
                    [i, j + 1, k],
                    vel,
                    inv[1],
                    scheme,
                    act1,
                );
            }
        }
        for j in 0..ny {
            for k in 0..nz - 1 {
                let vel = 0.5 * (u3[[i - 1, j, k + 1]] + u3[[i, j, k + 1]]);
                face(
                    &mut out.u1,
                    u1,
                    [i, j, k],
                    [i, j, k + 1],
                    vel,
                    inv[2],
                    scheme,
                    act1,
                );
            }
        }
    }

    // u2: nodes j in 1..ny are unknowns
    let act2 = |t: [usize; 3]| t[1] > 0 && t[1] < ny;
    for i in 0..nx - 1 {
        for j in 1..ny {
            for k in 0..nz {
                let vel = 0.5 * (u1[[i + 1, j - 1, k]] + u1[[i + 1, j, k]]);
                face(
                    &mut out.u2,
                    u2,
                    [i, j, k],
                    [i + 1, j, k],
                    vel,
                    inv[0],
                    scheme,
                    act2,
                );
            }
        }
    }
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let vel = 0.5 * (u2[[i, j, k]] + u2[[i, j + 1, k]]);
                face(
                    &mut out.u2,
                    u2,
                    [i, j, k],
                    [i, j + 1, k],
                    vel,
                    inv[1],
                    scheme,
                    act2,
                );
            }
        }
        for j in 1..ny {
            for k in 0..nz - 1 {
                let vel = 0.5 * (u3[[i, j - 1, k + 1]] + u3[[i, j, k + 1]]);
                face(
                    &mut out.u2,
                    u2,
                    [i, j, k],
                    [i, j, k + 1],
                    vel,
                    inv[2],
                    scheme,
                    act2,
                );
            }
        }
    }

    if !vertical {
        return out;
    }
    // u3: nodes k in 1..nz are unknowns
    let act3 = |t: [usize; 3]| t[2] > 0 && t[2] < nz;
    for i in 0..nx - 1 {
        for j in 0..ny {
            for k in 1..nz {
                let vel = 0.5 * (u1[[i + 1, j, k - 1]] + u1[[i + 1, j, k]]);
                face(
                    &mut out.u3,
                    u3,
                    [i, j, k],
                    [i + 1, j, k],
                    vel,
                    inv[0],
                    scheme,
                    act3,
                );
            }
        }
    }
    for i in 0..nx {
        for j in 0..ny - 1 {
            for k in 1..nz {
                let vel = 0.5 * (u2[[i, j + 1, k - 1]] + u2[[i, j + 1, k]]);
                face(
                    &mut out.u3,
                    u3,
                    [i, j, k],
                    [i, j + 1, k],
                    vel,
                    inv[1],
                    scheme,
                    act3,
                );
            }
        }
        for j in 0..ny {
            for k in 0..nz {
                let vel = 0.5 * (u3[[i, j, k]] + u3[[i, j, k + 1]]);
                face(
                    &mut out.u3,
                    u3,
                    [i, j, k],
                    [i, j, k + 1],
                    vel,
                    inv[2],
                    scheme,
                    act3,
                );
            }
        }
    }
    out
}
