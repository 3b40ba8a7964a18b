use ndarray::{s, Array3, ArrayView3};

use crate::domain::Grid;

/// How a padded array is closed at one end of one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// The boundary coincides with stored nodes (wall-normal velocity); no ghost layer.
    Node,
    /// Zero value on the wall half a cell away: `ghost = -interior`.
    Dirichlet,
    /// Ghost chosen to realize a prescribed boundary flux.
    Flux,
    /// No condition imposed: `ghost = interior`.
    Free,
}

/// A staggered component (or cell field) together with one ghost layer on
/// every axis whose ends are not [`Side::Node`].
#[derive(Debug, Clone, PartialEq)]
pub struct Padded {
    pub data: Array3<f64>,
    shape: [usize; 3],
    sides: [[Side; 2]; 3],
}

impl Padded {
    /// Copies `values` into a fresh padded array with zero ghosts.
    pub fn new(values: ArrayView3<f64>, sides: [[Side; 2]; 3]) -> Padded {
        let sh = values.shape();
        let shape = [sh[0], sh[1], sh[2]];
        let mut ext = [0usize; 3];
        for d in 0..3 {
            assert_eq!(
                sides[d][0] == Side::Node,
                sides[d][1] == Side::Node,
                "node walls come in pairs"
            );
            ext[d] = shape[d] + if sides[d][0] == Side::Node { 0 } else { 2 };
        }
        let mut data = Array3::zeros(ext);
        let o = Self::offset_of(&sides);
        data.slice_mut(s![
            o[0]..o[0] + shape[0],
            o[1]..o[1] + shape[1],
            o[2]..o[2] + shape[2]
        ])
        .assign(&values);
        Padded { data, shape, sides }
    }

    /// Cell-centered padded array sampled from `f` everywhere, ghosts included.
    /// Handy for checking stencils against analytic fields.
    pub fn sample_cells(grid: &Grid, f: impl Fn([f64; 3]) -> f64) -> Padded {
        let sides = [[Side::Dirichlet; 2]; 3];
        let n = grid.cell_shape();
        let h = grid.spacing();
        let data = Array3::from_shape_fn((n[0] + 2, n[1] + 2, n[2] + 2), |(i, j, k)| {
            f([
                (i as f64 - 0.5) * h[0],
                (j as f64 - 0.5) * h[1],
                (k as f64 - 0.5) * h[2],
            ])
        });
        Padded {
            data,
            shape: n,
            sides,
        }
    }

    fn offset_of(sides: &[[Side; 2]; 3]) -> [usize; 3] {
        let mut o = [0; 3];
        for d in 0..3 {
            o[d] = usize::from(sides[d][0] != Side::Node);
        }
        o
    }

    pub fn offset(&self) -> [usize; 3] {
        Self::offset_of(&self.sides)
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn sides(&self) -> [[Side; 2]; 3] {
        self.sides
    }

    /// Half-open index range of unknowns along `d` (component coordinates).
    pub fn active(&self, d: usize) -> (usize, usize) {
        if self.sides[d][0] == Side::Node {
            (1, self.shape[d] - 1)
        } else {
            (0, self.shape[d])
        }
    }

    /// Row-major strides of `data`.
    #[inline]
    pub fn strides(&self) -> [usize; 3] {
        let e = self.data.dim();
        [e.1 * e.2, e.2, 1]
    }

    /// Flat index into `data` of component index `(i, j, k)`.
    #[inline]
    pub fn flat(&self, i: usize, j: usize, k: usize) -> usize {
        let o = self.offset();
        let st = self.strides();
        (i + o[0]) * st[0] + (j + o[1]) * st[1] + (k + o[2]) * st[2]
    }

    pub fn interior(&self) -> ArrayView3<'_, f64> {
        let o = self.offset();
        let n = self.shape;
        self.data
            .slice(s![o[0]..o[0] + n[0], o[1]..o[1] + n[1], o[2]..o[2] + n[2]])
    }

    /// Value at component index `idx` displaced by `delta` (may reach a ghost).
    #[inline]
    pub fn at(&self, idx: [usize; 3], delta: [isize; 3]) -> f64 {
        let o = self.offset();
        self.data[[
            ((idx[0] + o[0]) as isize + delta[0]) as usize,
            ((idx[1] + o[1]) as isize + delta[1]) as usize,
            ((idx[2] + o[2]) as isize + delta[2]) as usize,
        ]]
    }

    /// Fills ghost layers of the `Dirichlet` and `Free` sides from the interior.
    /// `Flux` ghosts are left for the caller.
    pub fn fill_simple_ghosts(&mut self) {
        let n = self.shape;
        for d in 0..3 {
            for (end, side) in self.sides[d].iter().enumerate() {
                let sign = match side {
                    Side::Dirichlet => -1.0,
                    Side::Free => 1.0,
                    Side::Node | Side::Flux => continue,
                };
                let (ghost, inner) = if end == 0 { (0, 1) } else { (n[d] + 1, n[d]) };
                let src = self.data.index_axis(ndarray::Axis(d), inner).to_owned();
                let mut dst = self.data.index_axis_mut(ndarray::Axis(d), ghost);
                dst.zip_mut_with(&src, |g, v| *g = sign * v);
            }
        }
    }
}
