//! Cell-centered scalars and face-centered (MAC) velocities.

use ndarray::{Array2, Array3, Zip};

use crate::domain::{Axis, Grid};
use crate::error::{Error, Result};

/// Cell-centered scalar of shape `(nx, ny, nz)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub values: Array3<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        ScalarField {
            values: Array3::zeros(grid.cell_shape()),
        }
    }

    pub fn from_array(values: Array3<f64>) -> Self {
        ScalarField { values }
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut([f64; 3]) -> f64) -> Self {
        ScalarField {
            values: Array3::from_shape_fn(grid.cell_shape(), |(i, j, k)| {
                f(grid.cell_center(i, j, k))
            }),
        }
    }

    pub fn shape(&self) -> [usize; 3] {
        let s = self.values.shape();
        [s[0], s[1], s[2]]
    }

    pub fn check_shape(&self, grid: &Grid) -> Result<()> {
        check(grid.cell_shape(), self.shape())
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `||f||^2` by the midpoint rule.
    pub fn norm_sq(&self, grid: &Grid) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * grid.cell_volume()
    }

    pub fn dot(&self, other: &ScalarField, grid: &Grid) -> f64 {
        Zip::from(&self.values)
            .and(&other.values)
            .fold(0.0, |acc, a, b| acc + a * b)
            * grid.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.mean().unwrap_or(0.0)
    }
}

/// Staggered velocity: `u1` on `x1`-faces `(nx+1, ny, nz)`, `u2` on `x2`-faces
/// `(nx, ny+1, nz)`, `u3` on `x3`-faces `(nx, ny, nz+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredVelocity {
    pub u1: Array3<f64>,
    pub u2: Array3<f64>,
    pub u3: Array3<f64>,
}

impl StaggeredVelocity {
    pub fn zeros(grid: &Grid) -> Self {
        StaggeredVelocity {
            u1: Array3::zeros(grid.face_shape(Axis::X1)),
            u2: Array3::zeros(grid.face_shape(Axis::X2)),
            u3: Array3::zeros(grid.face_shape(Axis::X3)),
        }
    }

    /// Samples each component of `f` on its own faces.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut([f64; 3]) -> [f64; 3]) -> Self {
        let mut sample = |axis: Axis| {
            Array3::from_shape_fn(grid.face_shape(axis), |(i, j, k)| {
                f(grid.face_position(axis, [i, j, k]))[axis.index()]
            })
        };
        StaggeredVelocity {
            u1: sample(Axis::X1),
            u2: sample(Axis::X2),
            u3: sample(Axis::X3),
        }
    }

    pub fn component(&self, axis: Axis) -> &Array3<f64> {
        match axis {
            Axis::X1 => &self.u1,
            Axis::X2 => &self.u2,
            Axis::X3 => &self.u3,
        }
    }

    pub fn component_mut(&mut self, axis: Axis) -> &mut Array3<f64> {
        match axis {
            Axis::X1 => &mut self.u1,
            Axis::X2 => &mut self.u2,
            Axis::X3 => &mut self.u3,
        }
    }

    pub fn check_shape(&self, grid: &Grid) -> Result<()> {
        for axis in Axis::ALL {
            let s = self.component(axis).shape();
            check(grid.face_shape(axis), [s[0], s[1], s[2]])?;
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        Axis::ALL
            .iter()
            .all(|&a| self.component(a).iter().all(|v| v.is_finite()))
    }

    /// Zeroes every wall-normal face value (`u1` at `x1 = 0, lx`, `u2` at
    /// `x2 = 0, ly`, `u3` at `x3 = 0, h`).
    pub fn zero_normal_walls(&mut self) {
        let nx = self.u1.shape()[0] - 1;
        let ny = self.u2.shape()[1] - 1;
        let nz = self.u3.shape()[2] - 1;
        for i in [0, nx] {
            self.u1.index_axis_mut(ndarray::Axis(0), i).fill(0.0);
        }
        for j in [0, ny] {
            self.u2.index_axis_mut(ndarray::Axis(1), j).fill(0.0);
        }
        for k in [0, nz] {
            self.u3.index_axis_mut(ndarray::Axis(2), k).fill(0.0);
        }
    }

    /// `||u1||^2 + ||u2||^2` and `||u3||^2` with every face weighted by a cell volume.
    pub fn norms_sq(&self, grid: &Grid) -> (f64, f64) {
        let v = grid.cell_volume();
        let sq = |a: &Array3<f64>| a.iter().map(|x| x * x).sum::<f64>() * v;
        (sq(&self.u1) + sq(&self.u2), sq(&self.u3))
    }

    pub fn max_abs(&self) -> [f64; 3] {
        let m = |a: &Array3<f64>| a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        [m(&self.u1), m(&self.u2), m(&self.u3)]
    }

    /// Face values averaged to cell centers.
    pub fn cell_centered(&self) -> [Array3<f64>; 3] {
        let s = self.u3.shape();
        let (nx, ny, nz) = (s[0], s[1], s[2] - 1);
        [
            Array3::from_shape_fn((nx, ny, nz), |(i, j, k)| {
                0.5 * (self.u1[[i, j, k]] + self.u1[[i + 1, j, k]])
            }),
            Array3::from_shape_fn((nx, ny, nz), |(i, j, k)| {
                0.5 * (self.u2[[i, j, k]] + self.u2[[i, j + 1, k]])
            }),
            Array3::from_shape_fn((nx, ny, nz), |(i, j, k)| {
                0.5 * (self.u3[[i, j, k]] + self.u3[[i, j, k + 1]])
            }),
        ]
    }
}

/// Wind traction `theta_H = (theta1, theta2)` on the ground, one value per
/// ground cell `(nx, ny)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryForcing {
    pub theta1: Array2<f64>,
    pub theta2: Array2<f64>,
}

impl BoundaryForcing {
    pub fn zero(grid: &Grid) -> Self {
        BoundaryForcing::constant(grid, 0.0, 0.0)
    }

    pub fn constant(grid: &Grid, c1: f64, c2: f64) -> Self {
        let shape = (grid.nx(), grid.ny());
        BoundaryForcing {
            theta1: Array2::from_elem(shape, c1),
            theta2: Array2::from_elem(shape, c2),
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let shape = (grid.nx(), grid.ny());
        let at = |i: usize, j: usize| {
            let c = grid.cell_center(i, j, 0);
            f(c[0], c[1])
        };
        BoundaryForcing {
            theta1: Array2::from_shape_fn(shape, |(i, j)| at(i, j)[0]),
            theta2: Array2::from_shape_fn(shape, |(i, j)| at(i, j)[1]),
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        for t in [&self.theta1, &self.theta2] {
            if t.shape() != [grid.nx(), grid.ny()] {
                return Err(Error::ShapeMismatch {
                    expected: [grid.nx(), grid.ny(), 1],
                    found: [t.shape()[0], t.shape()[1], 1],
                });
            }
            if !t.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "theta",
                    reason: "wind traction must be finite".into(),
                });
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.theta1
            .iter()
            .chain(self.theta2.iter())
            .all(|v| *v == 0.0)
    }

    /// `theta1` interpolated to the ground edge of `x1`-face `i` (`0 <= i <= nx`).
    #[inline]
    pub fn theta1_at_face(&self, i: usize, j: usize) -> f64 {
        let nx = self.theta1.shape()[0];
        let lo = i.saturating_sub(1);
        let hi = i.min(nx - 1);
        0.5 * (self.theta1[[lo, j]] + self.theta1[[hi, j]])
    }

    #[inline]
    pub fn theta2_at_face(&self, i: usize, j: usize) -> f64 {
        let ny = self.theta2.shape()[1];
        let lo = j.saturating_sub(1);
        let hi = j.min(ny - 1);
        0.5 * (self.theta2[[i, lo]] + self.theta2[[i, hi]])
    }
}

fn check(expected: [usize; 3], found: [usize; 3]) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::ShapeMismatch { expected, found })
    }
}
