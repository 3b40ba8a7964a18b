//! Dense-matrix assembly of one explicit projection step of the anisotropic
//! scheme, written against the discretization's stencil definitions rather
//! than the library's loops. Only meant for tiny grids.

use nalgebra::{DMatrix, DVector};

/// Unknown numbering: interior faces of `u1`, `u2`, `u3`, then cells.
pub struct Layout {
    pub n: [usize; 3],
    pub h: [f64; 3],
}

impl Layout {
    /// Node counts of component `c` along each axis, walls included.
    fn nodes(&self, c: usize) -> [usize; 3] {
        let mut s = self.n;
        s[c] += 1;
        s
    }

    fn n_comp(&self, c: usize) -> usize {
        let s = self.nodes(c);
        let mut m = 1;
        for d in 0..3 {
            m *= if d == c { s[d] - 2 } else { s[d] };
        }
        m
    }

    pub fn n_vel(&self) -> usize {
        (0..3).map(|c| self.n_comp(c)).sum()
    }

    pub fn n_cells(&self) -> usize {
        self.n.iter().product()
    }

    /// Row of velocity node `q` of component `c`, `None` on walls.
    pub fn vel(&self, c: usize, q: [isize; 3]) -> Option<usize> {
        let s = self.nodes(c);
        for d in 0..3 {
            let lo = if d == c { 1 } else { 0 };
            let hi = if d == c {
                s[d] as isize - 2
            } else {
                s[d] as isize - 1
            };
            if q[d] < lo || q[d] > hi {
                return None;
            }
        }
        let off: usize = (0..c).map(|k| self.n_comp(k)).sum();
        let mut dims = s;
        dims[c] -= 2;
        let shift = |d: usize| {
            if d == c {
                q[d] as usize - 1
            } else {
                q[d] as usize
            }
        };
        Some(off + (shift(0) * dims[1] + shift(1)) * dims[2] + shift(2))
    }

    pub fn cell(&self, q: [isize; 3]) -> Option<usize> {
        for d in 0..3 {
            if q[d] < 0 || q[d] >= self.n[d] as isize {
                return None;
            }
        }
        Some((q[0] as usize * self.n[1] + q[1] as usize) * self.n[2] + q[2] as usize)
    }

    fn each_node(&self, c: usize) -> Vec<[isize; 3]> {
        let s = self.nodes(c);
        let mut out = Vec::new();
        for i in 0..s[0] {
            for j in 0..s[1] {
                for k in 0..s[2] {
                    let q = [i as isize, j as isize, k as isize];
                    if self.vel(c, q).is_some() {
                        out.push(q);
                    }
                }
            }
        }
        out
    }

    fn each_cell(&self) -> Vec<[isize; 3]> {
        let mut out = Vec::new();
        for i in 0..self.n[0] {
            for j in 0..self.n[1] {
                for k in 0..self.n[2] {
                    out.push([i as isize, j as isize, k as isize]);
                }
            }
        }
        out
    }
}

fn shift(q: [isize; 3], d: usize, by: isize) -> [isize; 3] {
    let mut r = q;
    r[d] += by;
    r
}

/// Data of the oracle problem.
pub struct OracleSetup {
    pub layout: Layout,
    pub nu: [f64; 3],
    pub eps: f64,
    pub alpha: f64,
    pub beta: f64,
    pub theta: [f64; 2],
    pub m_diag: [f64; 3],
    pub upwind: bool,
}

impl OracleSetup {
    /// `nu` Laplacian of the velocity with its boundary closures: walls carry
    /// zero, tangential components reflect oddly, and the ground ghost of
    /// `u_H` is `u - theta dz / nu3`. Returns the matrix and affine part.
    pub fn viscous(&self) -> (DMatrix<f64>, DVector<f64>) {
        let l = &self.layout;
        let n = l.n_vel();
        let mut a = DMatrix::zeros(n, n);
        let mut b = DVector::zeros(n);
        for c in 0..3 {
            for q in l.each_node(c) {
                let r = l.vel(c, q).unwrap();
                for d in 0..3 {
                    let w = self.nu[d] / (l.h[d] * l.h[d]);
                    a[(r, r)] -= 2.0 * w;
                    for side in [-1isize, 1] {
                        let nb = shift(q, d, side);
                        if let Some(col) = l.vel(c, nb) {
                            a[(r, col)] += w;
                        } else if d == c {
                            // wall node: zero
                        } else if d == 2 && side == -1 && c < 2 {
                            a[(r, r)] += w;
                            b[r] -= w * self.theta[c] * l.h[2] / self.nu[2];
                        } else {
                            a[(r, r)] -= w;
                        }
                    }
                }
            }
        }
        (a, b)
    }

    /// Four-point Coriolis coupling.
    pub fn coriolis(&self) -> DMatrix<f64> {
        let l = &self.layout;
        let n = l.n_vel();
        let mut k = DMatrix::zeros(n, n);
        let mut add = |r: usize, c: usize, q: [isize; 3], w: f64| {
            if let Some(col) = l.vel(c, q) {
                k[(r, col)] += w;
            }
        };
        for q in l.each_node(0) {
            let r = l.vel(0, q).unwrap();
            for (di, dj) in [(-1, 0), (0, 0), (-1, 1), (0, 1)] {
                add(r, 1, [q[0] + di, q[1] + dj, q[2]], 0.25 * self.alpha);
            }
            for (di, dk) in [(-1, 0), (0, 0), (-1, 1), (0, 1)] {
                add(
                    r,
                    2,
                    [q[0] + di, q[1], q[2] + dk],
                    -0.25 * self.eps * self.beta,
                );
            }
        }
        for q in l.each_node(1) {
            let r = l.vel(1, q).unwrap();
            for (di, dj) in [(0, -1), (1, -1), (0, 0), (1, 0)] {
                add(r, 0, [q[0] + di, q[1] + dj, q[2]], -0.25 * self.alpha);
            }
        }
        for q in l.each_node(2) {
            let r = l.vel(2, q).unwrap();
            for (di, dk) in [(0, -1), (1, -1), (0, 0), (1, 0)] {
                add(
                    r,
                    0,
                    [q[0] + di, q[1], q[2] + dk],
                    0.25 * self.beta / self.eps,
                );
            }
        }
        k
    }

    /// Value of component `d` at node `q` of the full face array (walls 0).
    fn face(&self, u: &DVector<f64>, d: usize, q: [isize; 3]) -> f64 {
        self.layout.vel(d, q).map_or(0.0, |r| u[r])
    }

    /// Adds `vel (q_b - q_a) / h` to the upwind (or both, halved) node rows.
    fn transport(
        &self,
        m: &mut DMatrix<f64>,
        a: Option<usize>,
        b: Option<usize>,
        vel: f64,
        inv_h: f64,
    ) {
        let targets: Vec<(Option<usize>, f64)> = if self.upwind {
            vec![(if vel > 0.0 { b } else { a }, 1.0)]
        } else {
            vec![(a, 0.5), (b, 0.5)]
        };
        for (t, w) in targets {
            let Some(t) = t else { continue };
            if let Some(b) = b {
                m[(t, b)] += w * vel * inv_h;
            }
            if let Some(a) = a {
                m[(t, a)] -= w * vel * inv_h;
            }
        }
    }

    /// Momentum advection matrix frozen at `u`.
    pub fn advection(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let l = &self.layout;
        let n = l.n_vel();
        let mut m = DMatrix::zeros(n, n);
        for c in 0..3 {
            let s = l.nodes(c);
            for d in 0..3 {
                // pairs of nodes (q, q + e_d) spanning the component's own
                // cells along c, and interior cell pairs across other axes
                let range = |ax: usize| -> (isize, isize) {
                    if ax == c {
                        if d == c {
                            (0, s[ax] as isize - 2)
                        } else {
                            (1, s[ax] as isize - 2)
                        }
                    } else if ax == d {
                        (0, s[ax] as isize - 2)
                    } else {
                        (0, s[ax] as isize - 1)
                    }
                };
                let (r0, r1, r2) = (range(0), range(1), range(2));
                for i in r0.0..=r0.1 {
                    for j in r1.0..=r1.1 {
                        for k in r2.0..=r2.1 {
                            let q = [i, j, k];
                            let nb = shift(q, d, 1);
                            let vel = if d == c {
                                0.5 * (self.face(u, c, q) + self.face(u, c, nb))
                            } else {
                                let base = shift(q, d, 1);
                                0.5 * (self.face(u, d, shift(base, c, -1)) + self.face(u, d, base))
                            };
                            if vel == 0.0 {
                                continue;
                            }
                            self.transport(&mut m, l.vel(c, q), l.vel(c, nb), vel, 1.0 / l.h[d]);
                        }
                    }
                }
            }
        }
        m
    }

    /// Cell divergence of face unknowns.
    pub fn divergence(&self) -> DMatrix<f64> {
        let l = &self.layout;
        let mut m = DMatrix::zeros(l.n_cells(), l.n_vel());
        for q in l.each_cell() {
            let r = l.cell(q).unwrap();
            for d in 0..3 {
                if let Some(c) = l.vel(d, shift(q, d, 1)) {
                    m[(r, c)] += 1.0 / l.h[d];
                }
                if let Some(c) = l.vel(d, q) {
                    m[(r, c)] -= 1.0 / l.h[d];
                }
            }
        }
        m
    }

    /// Scaled gradient onto interior faces, mobility `(1, 1, eps^-2)`.
    pub fn mobility_gradient(&self) -> DMatrix<f64> {
        let l = &self.layout;
        let mut m = DMatrix::zeros(l.n_vel(), l.n_cells());
        for c in 0..3 {
            let w = if c == 2 {
                1.0 / (self.eps * self.eps)
            } else {
                1.0
            };
            for q in l.each_node(c) {
                let r = l.vel(c, q).unwrap();
                m[(r, l.cell(q).unwrap())] += w / l.h[c];
                m[(r, l.cell(shift(q, c, -1)).unwrap())] -= w / l.h[c];
            }
        }
        m
    }

    /// Diagonal-tensor diffusion with `C = 0` on the top and lateral walls
    /// and zero flux through the ground.
    pub fn scalar_diffusion(&self) -> DMatrix<f64> {
        let l = &self.layout;
        let n = l.n_cells();
        let mut a = DMatrix::zeros(n, n);
        for q in l.each_cell() {
            let r = l.cell(q).unwrap();
            for d in 0..3 {
                let w = self.m_diag[d] / (l.h[d] * l.h[d]);
                a[(r, r)] -= 2.0 * w;
                for side in [-1isize, 1] {
                    match l.cell(shift(q, d, side)) {
                        Some(c) => a[(r, c)] += w,
                        None if d == 2 && side == -1 => a[(r, r)] += w,
                        None => a[(r, r)] -= w,
                    }
                }
            }
        }
        a
    }

    pub fn scalar_advection(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let l = &self.layout;
        let n = l.n_cells();
        let mut m = DMatrix::zeros(n, n);
        for q in l.each_cell() {
            for d in 0..3 {
                let nb = shift(q, d, 1);
                if l.cell(nb).is_none() {
                    continue;
                }
                let vel = self.face(u, d, nb);
                if vel != 0.0 {
                    self.transport(&mut m, l.cell(q), l.cell(nb), vel, 1.0 / l.h[d]);
                }
            }
        }
        m
    }

    /// One step: Euler predictor, exact projection, Euler concentration update
    /// with the projected velocity and source `s`.
    pub fn step(
        &self,
        u: &DVector<f64>,
        c: &DVector<f64>,
        s: &DVector<f64>,
        dt: f64,
    ) -> (DVector<f64>, DVector<f64>) {
        let (lap, b) = self.viscous();
        let tend = &lap * u + b - self.advection(u) * u + self.coriolis() * u;
        let u_star = u + tend * dt;
        let d = self.divergence();
        let wg = self.mobility_gradient();
        let n = self.layout.n_cells();
        // pin the constant mode with a rank-one term
        let a = &d * &wg + DMatrix::from_element(n, n, 1.0);
        let p = a.lu().solve(&(&d * &u_star / dt)).expect("regular");
        let u_new = u_star - wg * p * dt;
        let c_new = c + (self.scalar_diffusion() * c - self.scalar_advection(&u_new) * c + s) * dt;
        (u_new, c_new)
    }
}
