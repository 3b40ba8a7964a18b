use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Matrix3 = [[f64; 3]; 3];

pub const IDENTITY: Matrix3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

const SYMMETRY_TOL: f64 = 1e-12;

/// Pollutant diffusivity `M`, either uniform or given per cell.
#[derive(Debug, Clone, PartialEq)]
pub enum DiffusionTensor {
    Uniform(Matrix3),
    /// One matrix per cell, row-major in `(i, j, k)`.
    PerCell {
        shape: [usize; 3],
        cells: Vec<Matrix3>,
    },
}

impl Default for DiffusionTensor {
    fn default() -> Self {
        DiffusionTensor::Uniform(IDENTITY)
    }
}

impl DiffusionTensor {
    pub fn identity() -> Self {
        DiffusionTensor::Uniform(IDENTITY)
    }

    pub fn diagonal(d: [f64; 3]) -> Self {
        DiffusionTensor::Uniform([[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]])
    }

    /// Builds a symmetric tensor from its upper triangle `(m11, m12, m13, m22, m23, m33)`.
    pub fn from_upper(u: [f64; 6]) -> Self {
        DiffusionTensor::Uniform([[u[0], u[1], u[2]], [u[1], u[3], u[4]], [u[2], u[4], u[5]]])
    }

    pub fn per_cell(shape: [usize; 3], cells: Vec<Matrix3>) -> Result<Self> {
        if cells.len() != shape.iter().product::<usize>() {
            return Err(Error::InvalidParameter {
                name: "diffusion",
                reason: format!("{} matrices for a {:?} grid", cells.len(), shape),
            });
        }
        Ok(DiffusionTensor::PerCell { shape, cells })
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, DiffusionTensor::Uniform(_))
    }

    /// Tensor in cell `(i, j, k)`.
    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> &Matrix3 {
        match self {
            DiffusionTensor::Uniform(m) => m,
            DiffusionTensor::PerCell { shape, cells } => &cells[(i * shape[1] + j) * shape[2] + k],
        }
    }

    pub fn matrices(&self) -> &[Matrix3] {
        match self {
            DiffusionTensor::Uniform(m) => std::slice::from_ref(m),
            DiffusionTensor::PerCell { cells, .. } => cells,
        }
    }

    /// Largest `sum_d sum_e |M_de| / (h_d h_e)` over all cells.
    pub fn max_row_weight(&self, h: [f64; 3]) -> f64 {
        self.matrices()
            .iter()
            .map(|m| {
                let mut s = 0.0;
                for d in 0..3 {
                    for e in 0..3 {
                        s += m[d][e].abs() / (h[d] * h[e]);
                    }
                }
                s
            })
            .fold(0.0, f64::max)
    }

    pub fn check_shape(&self, shape: [usize; 3]) -> Result<()> {
        match self {
            DiffusionTensor::PerCell { shape: s, .. } if *s != shape => Err(Error::ShapeMismatch {
                expected: shape,
                found: *s,
            }),
            _ => Ok(()),
        }
    }
}

fn check_symmetric(m: &Matrix3) -> Result<()> {
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for (r, c) in [(0, 1), (0, 2), (1, 2)] {
        let gap = (m[r][c] - m[c][r]).abs();
        if gap > SYMMETRY_TOL * scale {
            return Err(Error::Asymmetric {
                row: r + 1,
                col: c + 1,
                gap,
            });
        }
    }
    Ok(())
}

/// Eigenvalues of a symmetric 3x3 matrix in ascending order (trigonometric closed form).
pub fn symmetric_eigenvalues(m: &Matrix3) -> [f64; 3] {
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    let diag_scale = m[0][0].abs().max(m[1][1].abs()).max(m[2][2].abs());
    if p1 <= (f64::EPSILON * diag_scale).powi(2) {
        let mut e = [m[0][0], m[1][1], m[2][2]];
        e.sort_by(f64::total_cmp);
        return e;
    }
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = |r: usize, c: usize| (m[r][c] - if r == c { q } else { 0.0 }) / p;
    let det_b = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
        - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let largest = q + 2.0 * p * phi.cos();
    let smallest = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let middle = 3.0 * q - largest - smallest;
    [smallest, middle, largest]
}

/// Coercivity constant `lambda`: the smallest eigenvalue of `M`, minimized over
/// cells for a spatially varying tensor.
pub fn coercivity_constant(m: &DiffusionTensor) -> Result<f64> {
    let mut lambda = f64::INFINITY;
    for cell in m.matrices() {
        check_symmetric(cell)?;
        lambda = lambda.min(symmetric_eigenvalues(cell)[0]);
    }
    if !(lambda > 0.0) {
        return Err(Error::NotCoercive { lambda });
    }
    Ok(lambda)
}

/// Physical diffusivity `K` recovered from the rescaled `M` at aspect ratio `eps`:
/// horizontal block unchanged, mixed vertical entries times `eps`, `K33 = eps^2 M33`.
pub fn scale_diffusion(m: &Matrix3, eps: f64) -> Matrix3 {
    let w = [1.0, 1.0, eps];
    let mut k = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            k[r][c] = w[r] * w[c] * m[r][c];
        }
    }
    k
}
