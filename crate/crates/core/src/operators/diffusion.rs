use ndarray::Array3;

use crate::domain::{coercivity_constant, DiffusionTensor, Grid, Matrix3};
use crate::error::Result;
use crate::fields::ScalarField;

use super::bcs::apply_concentration_bcs;
use super::laplacian_unchecked;
use super::padded::Padded;

/// `div(M grad C)` with the boundary conditions of [`apply_concentration_bcs`].
pub fn diffuse_concentration(
    c: &ScalarField,
    m: &DiffusionTensor,
    grid: &Grid,
) -> Result<ScalarField> {
    c.check_shape(grid)?;
    m.check_shape(grid.cell_shape())?;
    coercivity_constant(m)?;
    let padded = apply_concentration_bcs(c, m, grid);
    Ok(tensor_diffusion(&padded, m, grid))
}

/// Centered cell differences `D_e C`, reaching into the ghost layers of `c`.
pub(crate) fn cell_gradients(c: &Padded, grid: &Grid) -> [Array3<f64>; 3] {
    let h = grid.spacing();
    let n = c.shape();
    let st = c.strides();
    let d = c.data.as_slice().expect("padded data is contiguous");
    let mk = |ax: usize| {
        let half = 0.5 / h[ax];
        let mut out = Array3::zeros(n);
        let o = out.as_slice_mut().unwrap();
        for i in 0..n[0] {
            for j in 0..n[1] {
                let base = c.flat(i, j, 0);
                for k in 0..n[2] {
                    let q = base + k;
                    o[(i * n[1] + j) * n[2] + k] = (d[q + st[ax]] - d[q - st[ax]]) * half;
                }
            }
        }
        out
    };
    [mk(0), mk(1), mk(2)]
}

#[inline]
fn face_tensor(m: &DiffusionTensor, a: [usize; 3], b: [usize; 3]) -> Matrix3 {
    match m {
        DiffusionTensor::Uniform(mm) => *mm,
        DiffusionTensor::PerCell { .. } => {
            let (x, y) = (m.at(a[0], a[1], a[2]), m.at(b[0], b[1], b[2]));
            let mut f = [[0.0; 3]; 3];
            for r in 0..3 {
                for s in 0..3 {
                    f[r][s] = 0.5 * (x[r][s] + y[r][s]);
                }
            }
            f
        }
    }
}

fn is_uniform_diagonal(m: &DiffusionTensor) -> Option<[f64; 3]> {
    match m {
        DiffusionTensor::Uniform(mm)
            if mm[0][1] == 0.0
                && mm[0][2] == 0.0
                && mm[1][2] == 0.0
                && mm[1][0] == 0.0
                && mm[2][0] == 0.0
                && mm[2][1] == 0.0 =>
        {
            Some([mm[0][0], mm[1][1], mm[2][2]])
        }
        _ => None,
    }
}

/// Face-flux divergence of `M grad C` on a ghost-extended field.
///
/// Interior face fluxes are `M_dd (C_R - C_L) / h_d` plus the off-diagonal
/// terms with cell differences averaged onto the face. Flux through the
/// ground is 0; on the top and lateral walls only the normal part survives.
pub fn tensor_diffusion(c: &Padded, m: &DiffusionTensor, grid: &Grid) -> ScalarField {
    if let Some(diag) = is_uniform_diagonal(m) {
        return ScalarField::from_array(laplacian_unchecked(c, diag, grid));
    }
    let h = grid.spacing();
    let inv = [1.0 / h[0], 1.0 / h[1], 1.0 / h[2]];
    let n = c.shape();
    let grad = cell_gradients(c, grid);
    let d = c.data.as_slice().expect("padded data is contiguous");
    let st = c.strides();

    // flux through the face on the low side of cell index `q` along `ax`
    let face_flux = |ax: usize, q: [usize; 3]| -> f64 {
        if ax == 2 && q[2] == 0 {
            return 0.0;
        }
        let flat_r = c.flat(q[0], q[1], q[2]);
        let jump = (d[flat_r] - d[flat_r - st[ax]]) * inv[ax];
        if q[ax] == 0 || q[ax] == n[ax] {
            let mut cell = q;
            if q[ax] == n[ax] {
                cell[ax] -= 1;
            }
            return m.at(cell[0], cell[1], cell[2])[ax][ax] * jump;
        }
        let mut lo = q;
        lo[ax] -= 1;
        let mm = face_tensor(m, lo, q);
        let li = (lo[0] * n[1] + lo[1]) * n[2] + lo[2];
        let ri = (q[0] * n[1] + q[1]) * n[2] + q[2];
        let mut f = mm[ax][ax] * jump;
        for e in 0..3 {
            if e == ax {
                continue;
            }
            let g = grad[e].as_slice().unwrap();
            f += mm[ax][e] * (0.5 * (g[li] + g[ri]));
        }
        f
    };

    let mut out = Array3::zeros(n);
    let mut flux = [
        Array3::<f64>::zeros((n[0] + 1, n[1], n[2])),
        Array3::<f64>::zeros((n[0], n[1] + 1, n[2])),
        Array3::<f64>::zeros((n[0], n[1], n[2] + 1)),
    ];
    for (ax, f) in flux.iter_mut().enumerate() {
        for ((i, j, k), v) in f.indexed_iter_mut() {
            *v = face_flux(ax, [i, j, k]);
        }
    }
    for ((i, j, k), v) in out.indexed_iter_mut() {
        let mut acc = 0.0;
        acc += (flux[0][[i + 1, j, k]] - flux[0][[i, j, k]]) * inv[0];
        acc += (flux[1][[i, j + 1, k]] - flux[1][[i, j, k]]) * inv[1];
        acc += (flux[2][[i, j, k + 1]] - flux[2][[i, j, k]]) * inv[2];
        *v = acc;
    }
    ScalarField::from_array(out)
}
