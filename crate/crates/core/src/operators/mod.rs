//! Discrete vector calculus on the MAC grid.
//!
//! Every operator is a pure function of its inputs. Boundary conditions enter
//! through [`Padded`] ghost layers built by [`apply_velocity_bcs`] and
//! [`apply_concentration_bcs`].

mod advection;
mod bcs;
mod coriolis;
mod diffusion;
mod padded;

use ndarray::Array3;

use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::fields::{ScalarField, StaggeredVelocity};

pub(crate) use advection::advect_velocity_impl;
pub use advection::{advect_scalar, advect_velocity, AdvectionScheme};
pub use bcs::{apply_concentration_bcs, apply_velocity_bcs, BcMode, GhostedVelocity};
pub use coriolis::{coriolis_tendency, CoriolisProfile};
pub(crate) use diffusion::cell_gradients;
pub use diffusion::{diffuse_concentration, tensor_diffusion};
pub use padded::{Padded, Side};

/// Cell-centered MAC divergence.
pub fn divergence(u: &StaggeredVelocity, grid: &Grid) -> Result<ScalarField> {
    u.check_shape(grid)?;
    let [dx, dy, dz] = grid.spacing();
    let (u1, u2, u3) = (&u.u1, &u.u2, &u.u3);
    let values = Array3::from_shape_fn(grid.cell_shape(), |(i, j, k)| {
        (u1[[i + 1, j, k]] - u1[[i, j, k]]) / dx
            + (u2[[i, j + 1, k]] - u2[[i, j, k]]) / dy
            + (u3[[i, j, k + 1]] - u3[[i, j, k]]) / dz
    });
    Ok(ScalarField::from_array(values))
}

/// Pressure gradient on faces. Wall-normal faces carry 0, which is the
/// homogeneous Neumann condition of the projection.
pub fn grad_pressure(p: &ScalarField, grid: &Grid) -> Result<StaggeredVelocity> {
    p.check_shape(grid)?;
    let [dx, dy, dz] = grid.spacing();
    let [nx, ny, nz] = grid.cell_shape();
    let v = &p.values;
    let mut g = StaggeredVelocity::zeros(grid);
    for i in 1..nx {
        for j in 0..ny {
            for k in 0..nz {
                g.u1[[i, j, k]] = (v[[i, j, k]] - v[[i - 1, j, k]]) / dx;
            }
        }
    }
    for i in 0..nx {
        for j in 1..ny {
            for k in 0..nz {
                g.u2[[i, j, k]] = (v[[i, j, k]] - v[[i, j - 1, k]]) / dy;
            }
        }
    }
    for i in 0..nx {
        for j in 0..ny {
            for k in 1..nz {
                g.u3[[i, j, k]] = (v[[i, j, k]] - v[[i, j, k - 1]]) / dz;
            }
        }
    }
    Ok(g)
}

/// `nu1 d11 f + nu2 d22 f + nu3 d33 f` on the unknowns of `f`, written as a
/// difference of face fluxes `nu_d (f_R - f_L) / h_d`. Entries outside the
/// active range (wall nodes) are 0.
pub fn anisotropic_laplacian(f: &Padded, nu: [f64; 3], grid: &Grid) -> Result<Array3<f64>> {
    if nu.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "nu",
            reason: format!("{nu:?} must be componentwise positive"),
        });
    }
    Ok(laplacian_unchecked(f, nu, grid))
}

pub(crate) fn laplacian_unchecked(f: &Padded, nu: [f64; 3], grid: &Grid) -> Array3<f64> {
    let h = grid.spacing();
    let inv = [1.0 / h[0], 1.0 / h[1], 1.0 / h[2]];
    let n = f.shape();
    let st = f.strides();
    let d = f.data.as_slice().expect("padded data is contiguous");
    let mut out = Array3::zeros(n);
    let (ia, ib) = f.active(0);
    let (ja, jb) = f.active(1);
    let (ka, kb) = f.active(2);
    let o = out.as_slice_mut().expect("fresh array is contiguous");
    for i in ia..ib {
        for j in ja..jb {
            let base = f.flat(i, j, 0);
            for k in ka..kb {
                let c = base + k;
                let fc = d[c];
                let mut acc = 0.0;
                for ax in 0..3 {
                    let fp = nu[ax] * ((d[c + st[ax]] - fc) * inv[ax]);
                    let fm = nu[ax] * ((fc - d[c - st[ax]]) * inv[ax]);
                    acc += (fp - fm) * inv[ax];
                }
                o[(i * n[1] + j) * n[2] + k] = acc;
            }
        }
    }
    out
}
