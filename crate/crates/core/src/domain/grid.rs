use crate::error::{Error, Result};

/// Cell counts and extents of the rescaled box `(0, lx) x (0, ly) x (0, h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub lx: f64,
    pub ly: f64,
    pub h: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            nx: 32,
            ny: 32,
            nz: 16,
            lx: 1.0,
            ly: 1.0,
            h: 1.0,
        }
    }
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, nz: usize, lx: f64, ly: f64, h: f64) -> Self {
        GridSpec {
            nx,
            ny,
            nz,
            lx,
            ly,
            h,
        }
    }

    pub fn cube(n: usize) -> Self {
        GridSpec::new(n, n, n, 1.0, 1.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X1,
    X2,
    X3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X1, Axis::X2, Axis::X3];

    pub fn index(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
            Axis::X3 => 2,
        }
    }
}

/// Part of the boundary a face belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Top lid `x3 = h` (the planetary boundary layer).
    Upper,
    /// Side walls.
    Lateral,
    /// Ground `x3 = 0`.
    Ground,
}

impl Boundary {
    /// `Upper` and `Lateral` together form the above-ground boundary.
    pub fn is_above_ground(self) -> bool {
        !matches!(self, Boundary::Ground)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFace {
    /// Normal direction of the face.
    pub axis: Axis,
    /// Face index in the staggered layout of that axis.
    pub index: [usize; 3],
    pub kind: Boundary,
}

/// Uniform MAC discretization of the rescaled domain.
///
/// Scalars live at cell centers `((i+1/2)dx, (j+1/2)dy, (k+1/2)dz)`. The
/// velocity component `u_d` lives on the faces normal to `x_d`, so `u1` has
/// shape `(nx+1, ny, nz)` and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    spec: GridSpec,
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Grid> {
        for (name, n) in [("nx", spec.nx), ("ny", spec.ny), ("nz", spec.nz)] {
            if n < 4 {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {n}, need at least 4 cells"
                )));
            }
        }
        for (name, l) in [("lx", spec.lx), ("ly", spec.ly), ("h", spec.h)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {l}, extents must be positive"
                )));
            }
        }
        let dx = spec.lx / spec.nx as f64;
        let dy = spec.ly / spec.ny as f64;
        let dz = spec.h / spec.nz as f64;
        if ![dx, dy, dz].iter().all(|d| d.is_finite() && *d > 0.0) {
            return Err(Error::InvalidGrid(
                "cell sizes must be finite and positive".into(),
            ));
        }
        Ok(Grid { spec, dx, dy, dz })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn nx(&self) -> usize {
        self.spec.nx
    }

    pub fn ny(&self) -> usize {
        self.spec.ny
    }

    pub fn nz(&self) -> usize {
        self.spec.nz
    }

    pub fn lx(&self) -> f64 {
        self.spec.lx
    }

    pub fn ly(&self) -> f64 {
        self.spec.ly
    }

    pub fn height(&self) -> f64 {
        self.spec.h
    }

    pub fn spacing(&self) -> [f64; 3] {
        [self.dx, self.dy, self.dz]
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx * self.dy * self.dz
    }

    pub fn n_cells(&self) -> usize {
        self.spec.nx * self.spec.ny * self.spec.nz
    }

    pub fn cell_shape(&self) -> [usize; 3] {
        [self.spec.nx, self.spec.ny, self.spec.nz]
    }

    /// Shape of the face array carrying the velocity component normal to `axis`.
    pub fn face_shape(&self, axis: Axis) -> [usize; 3] {
        let mut s = self.cell_shape();
        s[axis.index()] += 1;
        s
    }

    pub fn cell_center(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [
            (i as f64 + 0.5) * self.dx,
            (j as f64 + 0.5) * self.dy,
            (k as f64 + 0.5) * self.dz,
        ]
    }

    /// Position of face `index` in the staggered layout normal to `axis`.
    pub fn face_position(&self, axis: Axis, index: [usize; 3]) -> [f64; 3] {
        let mut x = self.cell_center(index[0], index[1], index[2]);
        let d = axis.index();
        x[d] = index[d] as f64 * self.spacing()[d];
        x
    }

    pub fn x1_centers(&self) -> Vec<f64> {
        (0..self.spec.nx)
            .map(|i| (i as f64 + 0.5) * self.dx)
            .collect()
    }

    pub fn x2_centers(&self) -> Vec<f64> {
        (0..self.spec.ny)
            .map(|j| (j as f64 + 0.5) * self.dy)
            .collect()
    }

    pub fn x3_centers(&self) -> Vec<f64> {
        (0..self.spec.nz)
            .map(|k| (k as f64 + 0.5) * self.dz)
            .collect()
    }

    /// Every cell face lying on the domain boundary, classified by boundary part.
    pub fn boundary_faces(&self) -> Vec<BoundaryFace> {
        let (nx, ny, nz) = (self.spec.nx, self.spec.ny, self.spec.nz);
        let mut out = Vec::with_capacity(2 * (nx * ny + ny * nz + nx * nz));
        for k in 0..nz {
            for j in 0..ny {
                for i in [0, nx] {
                    out.push(BoundaryFace {
                        axis: Axis::X1,
                        index: [i, j, k],
                        kind: Boundary::Lateral,
                    });
                }
            }
            for i in 0..nx {
                for j in [0, ny] {
                    out.push(BoundaryFace {
                        axis: Axis::X2,
                        index: [i, j, k],
                        kind: Boundary::Lateral,
                    });
                }
            }
        }
        for j in 0..ny {
            for i in 0..nx {
                out.push(BoundaryFace {
                    axis: Axis::X3,
                    index: [i, j, 0],
                    kind: Boundary::Ground,
                });
                out.push(BoundaryFace {
                    axis: Axis::X3,
                    index: [i, j, nz],
                    kind: Boundary::Upper,
                });
            }
        }
        out
    }

    pub fn count_boundary_faces(&self, kind: Boundary) -> usize {
        self.boundary_faces()
            .iter()
            .filter(|f| f.kind == kind)
            .count()
    }

    /// Index of the cell containing `x` (points on interior faces go to the upper cell).
    pub fn locate(&self, x: [f64; 3]) -> Option<[usize; 3]> {
        let n = self.cell_shape();
        let ext = [self.spec.lx, self.spec.ly, self.spec.h];
        let h = self.spacing();
        let mut idx = [0usize; 3];
        for d in 0..3 {
            if !(x[d] >= 0.0 && x[d] <= ext[d]) {
                return None;
            }
            idx[d] = ((x[d] / h[d]).floor() as usize).min(n[d] - 1);
        }
        Some(idx)
    }

    /// Every cell whose closure contains `x`: one cell for an interior point,
    /// two, four or eight when `x` lies on shared faces, edges or vertices.
    pub fn containing_cells(&self, x: [f64; 3]) -> Option<Vec<[usize; 3]>> {
        let base = self.locate(x)?;
        let n = self.cell_shape();
        let h = self.spacing();
        let mut per_axis: Vec<Vec<usize>> = Vec::with_capacity(3);
        for d in 0..3 {
            let s = x[d] / h[d];
            let r = s.round();
            let on_face =
                (s - r).abs() <= 1e-9 * s.abs().max(1.0) && r >= 1.0 && (r as usize) < n[d];
            per_axis.push(if on_face {
                vec![r as usize - 1, r as usize]
            } else {
                vec![base[d]]
            });
        }
        let mut out = Vec::new();
        for &i in &per_axis[0] {
            for &j in &per_axis[1] {
                for &k in &per_axis[2] {
                    out.push([i, j, k]);
                }
            }
        }
        Some(out)
    }
}
