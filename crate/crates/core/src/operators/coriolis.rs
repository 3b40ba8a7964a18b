use crate::domain::{Grid, PhysParams};
use crate::fields::StaggeredVelocity;

/// Coriolis coefficients sampled where the staggered coupling needs them:
/// `alpha` on the `ny + 1` rows of `x2`-faces, `beta` on the `ny` cell rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CoriolisProfile {
    pub alpha_faces: Vec<f64>,
    pub beta_centers: Vec<f64>,
}

impl CoriolisProfile {
    pub fn new(params: &PhysParams, grid: &Grid) -> Self {
        let dy = grid.spacing()[1];
        let alpha_faces = (0..=grid.ny())
            .map(|j| params.coriolis_at(j as f64 * dy).0)
            .collect();
        let beta_centers = grid
            .x2_centers()
            .iter()
            .map(|&y| params.coriolis_at(y).1)
            .collect();
        CoriolisProfile {
            alpha_faces,
            beta_centers,
        }
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_faces.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    pub fn beta_max(&self) -> f64 {
        self.beta_centers.iter().fold(0.0, |m, b| m.max(b.abs()))
    }
}

/// Coriolis tendencies `(alpha u2 - eps beta u3, -alpha u1, (beta / eps) u1)`
/// with four-point averages between staggered locations.
///
/// `alpha` is taken at the `u2` faces and `beta` at cell-center rows, so the
/// pairing is exactly skew in the weighted product `(u_H, v_H) + eps^2 (u3, v3)`.
/// With `vertical = false` only the horizontal `alpha` coupling is returned.
pub fn coriolis_tendency(
    u: &StaggeredVelocity,
    profile: &CoriolisProfile,
    eps: f64,
    grid: &Grid,
    vertical: bool,
) -> StaggeredVelocity {
    let [nx, ny, nz] = grid.cell_shape();
    let (u1, u2, u3) = (&u.u1, &u.u2, &u.u3);
    let a = &profile.alpha_faces;
    let b = &profile.beta_centers;
    let mut out = StaggeredVelocity::zeros(grid);
    for i in 1..nx {
        for j in 0..ny {
            for k in 0..nz {
                let mut t = 0.25
                    * (a[j] * (u2[[i - 1, j, k]] + u2[[i, j, k]])
                        + a[j + 1] * (u2[[i - 1, j + 1, k]] + u2[[i, j + 1, k]]));
                if vertical {
                    let w = u3[[i - 1, j, k]]
                        + u3[[i, j, k]]
                        + u3[[i - 1, j, k + 1]]
                        + u3[[i, j, k + 1]];
                    t -= eps * b[j] * 0.25 * w;
                }
                out.u1[[i, j, k]] = t;
            }
        }
    }
    for i in 0..nx {
        for j in 1..ny {
            for k in 0..nz {
                let s =
                    u1[[i, j - 1, k]] + u1[[i + 1, j - 1, k]] + u1[[i, j, k]] + u1[[i + 1, j, k]];
                out.u2[[i, j, k]] = -a[j] * 0.25 * s;
            }
        }
    }
    if vertical {
        for i in 0..nx {
            for j in 0..ny {
                for k in 1..nz {
                    let s = u1[[i, j, k - 1]]
                        + u1[[i + 1, j, k - 1]]
                        + u1[[i, j, k]]
                        + u1[[i + 1, j, k]];
                    out.u3[[i, j, k]] = b[j] / eps * 0.25 * s;
                }
            }
        }
    }
    out
}
