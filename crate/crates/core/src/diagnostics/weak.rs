//! Residuals of the integral identities defining weak solutions, evaluated on
//! a discrete history against smooth space-time test functions.

use std::f64::consts::PI;

use ndarray::Array3;

use crate::domain::{Axis, Grid};
use crate::error::{Error, Result};
use crate::fields::{ScalarField, StaggeredVelocity};
use crate::model::{Mode, Problem, SimState};
use crate::operators::{
    apply_concentration_bcs, apply_velocity_bcs, cell_gradients, BcMode, Padded,
};
use crate::sources::SourceKind;

use super::{for_each_pair, gradient_weight, trapezoid};

/// `sum_n coef s^a c^b` with `s = sin(k x)`, `c = cos(k x)`.
#[derive(Debug, Clone)]
struct Trig {
    k: f64,
    terms: Vec<(f64, i32, i32)>,
}

impl Trig {
    fn sin_pow(p: i32, k: f64) -> Trig {
        Trig {
            k,
            terms: vec![(1.0, p, 0)],
        }
    }

    fn cos_pow(p: i32, k: f64) -> Trig {
        Trig {
            k,
            terms: vec![(1.0, 0, p)],
        }
    }

    fn deriv(&self) -> Trig {
        let mut terms = Vec::new();
        for &(c, a, b) in &self.terms {
            if a > 0 {
                terms.push((c * a as f64 * self.k, a - 1, b + 1));
            }
            if b > 0 {
                terms.push((-c * b as f64 * self.k, a + 1, b - 1));
            }
        }
        Trig { k: self.k, terms }
    }

    fn eval(&self, x: f64) -> f64 {
        let (s, c) = (self.k * x).sin_cos();
        self.terms
            .iter()
            .map(|&(co, a, b)| co * s.powi(a) * c.powi(b))
            .sum()
    }

    /// `[f, f', f'', f''']` at `x`.
    fn jet(&self, x: f64) -> [f64; 4] {
        let d1 = self.deriv();
        let d2 = d1.deriv();
        let d3 = d2.deriv();
        [self.eval(x), d1.eval(x), d2.eval(x), d3.eval(x)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityShape {
    /// `u_H = tau grad_perp(psi) cos(pi x3 / 2h)`, `u3 = 0`, with
    /// `psi = sin^2(m pi x1 / lx) sin^2(m pi x2 / ly)`.
    Streamfunction,
    /// `u_H = tau grad(chi) G'(x3)`, `u3 = -tau lap_H(chi) G(x3)`, with
    /// `chi = sin^4 sin^4` and `G = sin^3(pi x3 / h)`.
    Antiderivative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConcentrationShape {
    /// `tau sin^2(m pi x1 / lx) sin^2(m pi x2 / ly) cos^2(pi x3 / 2h)`.
    Bump,
}

/// A space-time test function. The time factor is
/// `tau(t) = cos^2(pi t / 2 t_c)` on `[0, t_c]` and 0 afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    Velocity {
        shape: VelocityShape,
        m: f64,
        amplitude: f64,
        t_c: f64,
    },
    Concentration {
        shape: ConcentrationShape,
        m: f64,
        amplitude: f64,
        t_c: f64,
    },
}

/// Value, spatial gradient `g[a][d] = d_d v_a`, and time derivative.
#[derive(Debug, Clone, Copy, Default)]
struct Jet {
    v: [f64; 3],
    g: [[f64; 3]; 3],
    dt: [f64; 3],
}

fn tau(t: f64, t_c: f64) -> (f64, f64) {
    if t >= t_c {
        return (0.0, 0.0);
    }
    let a = PI * t / (2.0 * t_c);
    (a.cos().powi(2), -(PI / (2.0 * t_c)) * (2.0 * a).sin())
}

impl TestFunction {
    pub fn name(&self) -> String {
        match self {
            TestFunction::Velocity { shape, m, .. } => {
                format!("velocity_{shape:?}_m{m}").to_lowercase()
            }
            TestFunction::Concentration { shape, m, .. } => {
                format!("concentration_{shape:?}_m{m}").to_lowercase()
            }
        }
    }

    pub fn scaled(self, a: f64) -> Self {
        match self {
            TestFunction::Velocity {
                shape,
                m,
                amplitude,
                t_c,
            } => TestFunction::Velocity {
                shape,
                m,
                amplitude: amplitude * a,
                t_c,
            },
            TestFunction::Concentration {
                shape,
                m,
                amplitude,
                t_c,
            } => TestFunction::Concentration {
                shape,
                m,
                amplitude: amplitude * a,
                t_c,
            },
        }
    }

    fn t_c(&self) -> f64 {
        match self {
            TestFunction::Velocity { t_c, .. } | TestFunction::Concentration { t_c, .. } => *t_c,
        }
    }

    /// The 1D factors along `x1`, `x2`, `x3`.
    fn factors(&self, grid: &Grid) -> [Trig; 3] {
        let (lx, ly, h) = (grid.lx(), grid.ly(), grid.height());
        match *self {
            TestFunction::Velocity { shape, m, .. } => match shape {
                VelocityShape::Streamfunction => [
                    Trig::sin_pow(2, m * PI / lx),
                    Trig::sin_pow(2, m * PI / ly),
                    Trig::cos_pow(1, PI / (2.0 * h)),
                ],
                VelocityShape::Antiderivative => [
                    Trig::sin_pow(4, m * PI / lx),
                    Trig::sin_pow(4, m * PI / ly),
                    Trig::sin_pow(3, PI / h),
                ],
            },
            TestFunction::Concentration { shape, m, .. } => match shape {
                ConcentrationShape::Bump => [
                    Trig::sin_pow(2, m * PI / lx),
                    Trig::sin_pow(2, m * PI / ly),
                    Trig::cos_pow(2, PI / (2.0 * h)),
                ],
            },
        }
    }

    /// Spatial jet times `amplitude` from the jets of the 1D factors; only
    /// `v` and `g` are set.
    fn combine(&self, xf: [f64; 4], yf: [f64; 4], zf: [f64; 4]) -> Jet {
        let mut j = Jet::default();
        match *self {
            TestFunction::Velocity {
                shape,
                amplitude: a,
                ..
            } => match shape {
                VelocityShape::Streamfunction => {
                    j.v = [a * xf[0] * yf[1] * zf[0], -a * xf[1] * yf[0] * zf[0], 0.0];
                    j.g[0] = [
                        a * xf[1] * yf[1] * zf[0],
                        a * xf[0] * yf[2] * zf[0],
                        a * xf[0] * yf[1] * zf[1],
                    ];
                    j.g[1] = [
                        -a * xf[2] * yf[0] * zf[0],
                        -a * xf[1] * yf[1] * zf[0],
                        -a * xf[1] * yf[0] * zf[1],
                    ];
                }
                VelocityShape::Antiderivative => {
                    let lap = xf[2] * yf[0] + xf[0] * yf[2];
                    j.v = [
                        a * xf[1] * yf[0] * zf[1],
                        a * xf[0] * yf[1] * zf[1],
                        -a * lap * zf[0],
                    ];
                    j.g[0] = [
                        a * xf[2] * yf[0] * zf[1],
                        a * xf[1] * yf[1] * zf[1],
                        a * xf[1] * yf[0] * zf[2],
                    ];
                    j.g[1] = [
                        a * xf[1] * yf[1] * zf[1],
                        a * xf[0] * yf[2] * zf[1],
                        a * xf[0] * yf[1] * zf[2],
                    ];
                    j.g[2] = [
                        -a * (xf[3] * yf[0] + xf[1] * yf[2]) * zf[0],
                        -a * (xf[2] * yf[1] + xf[0] * yf[3]) * zf[0],
                        -a * lap * zf[1],
                    ];
                }
            },
            TestFunction::Concentration {
                shape,
                amplitude: a,
                ..
            } => match shape {
                ConcentrationShape::Bump => {
                    j.v[0] = a * xf[0] * yf[0] * zf[0];
                    j.g[0] = [
                        a * xf[1] * yf[0] * zf[0],
                        a * xf[0] * yf[1] * zf[0],
                        a * xf[0] * yf[0] * zf[1],
                    ];
                }
            },
        }
        j
    }

    fn spatial(&self, x: [f64; 3], grid: &Grid) -> Jet {
        let [fx, fy, fz] = self.factors(grid);
        self.combine(fx.jet(x[0]), fy.jet(x[1]), fz.jet(x[2]))
    }

    #[cfg(test)]
    fn at(&self, x: [f64; 3], t: f64, grid: &Grid) -> Jet {
        with_tau(self.spatial(x, grid), t, self.t_c())
    }

    /// Checks the constraints of the weak formulation numerically: vanishing
    /// trace at `t_end`, zero divergence, and the boundary values.
    fn check(&self, grid: &Grid, t_end: f64) -> Result<()> {
        let fail = |what: &str| {
            Err(Error::Diagnostics(format!(
                "test function {}: {what}",
                self.name()
            )))
        };
        if !(self.t_c() > 0.0 && self.t_c() <= t_end) {
            return fail("does not vanish at t = T");
        }
        let ext = [grid.lx(), grid.ly(), grid.height()];
        let scale = {
            let mut m: f64 = 0.0;
            for p in sample_points(ext, 7) {
                let s = self.spatial(p, grid);
                m = m.max(
                    s.v.iter()
                        .chain(s.g.iter().flatten())
                        .fold(0.0f64, |a, v| a.max(v.abs())),
                );
            }
            m.max(f64::MIN_POSITIVE)
        };
        let tol = 1e-10 * scale;
        let velocity = matches!(self, TestFunction::Velocity { .. });
        for p in sample_points(ext, 7) {
            let s = self.spatial(p, grid);
            if velocity && (s.g[0][0] + s.g[1][1] + s.g[2][2]).abs() > tol {
                return fail("is not divergence free");
            }
        }
        for p in boundary_points(ext, 6) {
            let s = self.spatial(p.0, grid);
            let ground = p.1;
            let bad = if velocity {
                if ground {
                    s.v[2].abs() > tol
                } else {
                    s.v.iter().any(|v| v.abs() > tol)
                }
            } else {
                !ground && s.v[0].abs() > tol
            };
            if bad {
                return fail("violates its boundary condition");
            }
        }
        Ok(())
    }
}

/// A test function prepared for repeated evaluation on one grid. Faces,
/// cell centers and pair midpoints all sit at multiples of half a cell, so
/// the 1D jets are tabulated there; other coordinates are evaluated directly.
struct Evaluator<'a> {
    test: &'a TestFunction,
    chains: [[Trig; 4]; 3],
    half: [f64; 3],
    tables: [Vec<[f64; 4]>; 3],
}

impl<'a> Evaluator<'a> {
    fn new(test: &'a TestFunction, grid: &Grid) -> Self {
        let chains = test.factors(grid).map(|f| {
            let d1 = f.deriv();
            let d2 = d1.deriv();
            let d3 = d2.deriv();
            [f, d1, d2, d3]
        });
        let n = grid.cell_shape();
        let half = grid.spacing().map(|h| 0.5 * h);
        let tables = std::array::from_fn(|ax| {
            (0..=2 * n[ax])
                .map(|m| chains[ax].each_ref().map(|t| t.eval(m as f64 * half[ax])))
                .collect()
        });
        Evaluator {
            test,
            chains,
            half,
            tables,
        }
    }

    fn jet1(&self, axis: usize, x: f64) -> [f64; 4] {
        let m = (x / self.half[axis]).round();
        if m >= 0.0
            && (m as usize) < self.tables[axis].len()
            && (m * self.half[axis] - x).abs() <= 1e-12 * self.half[axis]
        {
            return self.tables[axis][m as usize];
        }
        self.chains[axis].each_ref().map(|t| t.eval(x))
    }

    fn spatial(&self, x: [f64; 3]) -> Jet {
        self.test
            .combine(self.jet1(0, x[0]), self.jet1(1, x[1]), self.jet1(2, x[2]))
    }

    fn at(&self, x: [f64; 3], t: f64) -> Jet {
        with_tau(self.spatial(x), t, self.test.t_c())
    }
}

/// Multiplies a spatial jet by the time factor and fills in `dt`.
fn with_tau(s: Jet, t: f64, t_c: f64) -> Jet {
    let (tv, td) = tau(t, t_c);
    let mut j = Jet::default();
    for a in 0..3 {
        j.v[a] = tv * s.v[a];
        j.dt[a] = td * s.v[a];
        for d in 0..3 {
            j.g[a][d] = tv * s.g[a][d];
        }
    }
    j
}

fn sample_points(ext: [f64; 3], n: usize) -> Vec<[f64; 3]> {
    let f = |i: usize, e: f64| e * (i as f64 + 0.37) / n as f64;
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out.push([f(i, ext[0]), f(j, ext[1]), f(k, ext[2])]);
            }
        }
    }
    out
}

/// Points on every wall, tagged `true` on the ground.
fn boundary_points(ext: [f64; 3], n: usize) -> Vec<([f64; 3], bool)> {
    let f = |i: usize, e: f64| e * (i as f64 + 0.5) / n as f64;
    let mut out = Vec::new();
    for d in 0..3 {
        for end in [0.0, 1.0] {
            for i in 0..n {
                for j in 0..n {
                    let mut p = [0.0; 3];
                    let others: Vec<usize> = (0..3).filter(|&e| e != d).collect();
                    p[d] = end * ext[d];
                    p[others[0]] = f(i, ext[others[0]]);
                    p[others[1]] = f(j, ext[others[1]]);
                    out.push((p, d == 2 && end == 0.0));
                }
            }
        }
    }
    out
}

/// A few velocity and concentration tests vanishing from `t_end - dt_snap` on.
pub fn standard_test_family(t_end: f64, dt_snap: f64) -> Vec<TestFunction> {
    let t_c = (t_end - dt_snap).max(0.5 * t_end);
    vec![
        TestFunction::Velocity {
            shape: VelocityShape::Streamfunction,
            m: 1.0,
            amplitude: 1.0,
            t_c,
        },
        TestFunction::Velocity {
            shape: VelocityShape::Streamfunction,
            m: 2.0,
            amplitude: 1.0,
            t_c,
        },
        TestFunction::Velocity {
            shape: VelocityShape::Antiderivative,
            m: 1.0,
            amplitude: 1.0,
            t_c,
        },
        TestFunction::Concentration {
            shape: ConcentrationShape::Bump,
            m: 1.0,
            amplitude: 1.0,
            t_c,
        },
        TestFunction::Concentration {
            shape: ConcentrationShape::Bump,
            m: 2.0,
            amplitude: 1.0,
            t_c,
        },
    ]
}

/// Signed terms of one identity and the resulting residual `|LHS - RHS|`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakResidual {
    pub test: String,
    /// `(name, value)`; names starting with `rhs_` are right-hand-side terms.
    pub terms: Vec<(&'static str, f64)>,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl WeakResidual {
    fn from_terms(test: String, terms: Vec<(&'static str, f64)>) -> Self {
        let lhs: f64 = terms
            .iter()
            .filter(|t| !t.0.starts_with("rhs_"))
            .map(|t| t.1)
            .sum();
        let rhs: f64 = terms
            .iter()
            .filter(|t| t.0.starts_with("rhs_"))
            .map(|t| t.1)
            .sum();
        WeakResidual {
            test,
            terms,
            lhs,
            rhs,
            residual: (lhs - rhs).abs(),
        }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.0 == name).map(|t| t.1)
    }
}

/// `sum_faces u . w(x_face) V` for a vector field `w` sampled per face.
fn face_dot(
    u: &StaggeredVelocity,
    grid: &Grid,
    comps: usize,
    mut w: impl FnMut([f64; 3]) -> [f64; 3],
    weights: [f64; 3],
) -> f64 {
    let mut acc = 0.0;
    for (c, axis) in Axis::ALL.into_iter().enumerate().take(comps) {
        if weights[c] == 0.0 {
            continue;
        }
        let arr = u.component(axis);
        let mut part = 0.0;
        for ((i, j, k), v) in arr.indexed_iter() {
            if *v != 0.0 {
                part += v * w(grid.face_position(axis, [i, j, k]))[c];
            }
        }
        acc += weights[c] * part;
    }
    acc * grid.cell_volume()
}

/// `sum_pairs w nu_d slope d_d(test_a)(mid) V` for component `a`.
fn pair_dot(
    p: &Padded,
    grid: &Grid,
    nu: [f64; 3],
    a: usize,
    mut grad: impl FnMut([f64; 3]) -> [[f64; 3]; 3],
) -> f64 {
    let mut acc = 0.0;
    for_each_pair(p, grid, gradient_weight, |pr| {
        acc += pr.weight * nu[pr.axis] * pr.slope * grad(pr.mid)[a][pr.axis];
    });
    acc * grid.cell_volume()
}

/// Centered differences of a cell-centered array, with ghosts `parity * value`
/// per wall.
fn centered_gradient(f: &Array3<f64>, parity: [[f64; 2]; 3], grid: &Grid) -> [Array3<f64>; 3] {
    let h = grid.spacing();
    let s = f.shape();
    let n = [s[0], s[1], s[2]];
    std::array::from_fn(|ax| {
        Array3::from_shape_fn(n, |(i, j, k)| {
            let q = [i, j, k];
            let get = |d: isize| -> f64 {
                let mut r = q;
                let v = q[ax] as isize + d;
                if v < 0 {
                    return parity[ax][0] * f[q];
                }
                if v >= n[ax] as isize {
                    return parity[ax][1] * f[q];
                }
                r[ax] = v as usize;
                f[r]
            };
            (get(1) - get(-1)) / (2.0 * h[ax])
        })
    })
}

/// Forcing `(f_u, f_C)` at each snapshot, evaluated once for all tests.
type ForcingSeries = Option<Vec<(StaggeredVelocity, ScalarField)>>;

fn velocity_terms(
    history: &[SimState],
    problem: &Problem,
    forcing: &ForcingSeries,
    test: &TestFunction,
) -> Vec<(&'static str, f64)> {
    let g = &problem.grid;
    let nu = problem.params.nu;
    let eps = problem.params.eps;
    let aniso = problem.mode == Mode::Anisotropic;
    let e2 = if aniso { eps * eps } else { 0.0 };
    let comps = if aniso { 3 } else { 2 };
    let bc = if aniso {
        BcMode::Anisotropic
    } else {
        BcMode::Hydrostatic
    };
    let v = g.cell_volume();
    let [dx, dy, _] = g.spacing();
    let times: Vec<f64> = history.iter().map(|s| s.t).collect();
    let ev = Evaluator::new(test, g);
    let mut series: [Vec<f64>; 7] = Default::default();
    for (n, s) in history.iter().enumerate() {
        let t = s.t;
        let at = |x: [f64; 3]| ev.at(x, t);
        series[0].push(-face_dot(&s.u, g, comps, |x| at(x).dt, [1.0, 1.0, e2]));
        let gv = apply_velocity_bcs(&s.u, &problem.theta, nu[2], g, bc);
        let mut visc =
            pair_dot(&gv.u1, g, nu, 0, |x| at(x).g) + pair_dot(&gv.u2, g, nu, 1, |x| at(x).g);
        if aniso {
            visc += e2 * pair_dot(&gv.u3, g, nu, 2, |x| at(x).g);
        }
        series[1].push(visc);

        let uc = s.u.cell_centered();
        let w_par = if aniso { -1.0 } else { 1.0 };
        let du3 = centered_gradient(&uc[2], [[w_par, w_par], [w_par, w_par], [-1.0, -1.0]], g);
        let (mut adv, mut adv3, mut cor, mut cor_eps) = (0.0, 0.0, 0.0, 0.0);
        for ((i, j, k), _) in uc[0].indexed_iter() {
            let x = g.cell_center(i, j, k);
            let jt = at(x);
            let u = [uc[0][[i, j, k]], uc[1][[i, j, k]], uc[2][[i, j, k]]];
            for a in 0..2 {
                adv -= u[a] * (0..3).map(|d| u[d] * jt.g[a][d]).sum::<f64>();
            }
            let (alpha, beta) = problem.params.coriolis_at(x[1]);
            cor += alpha * (-u[1] * jt.v[0] + u[0] * jt.v[1]);
            if aniso {
                let grad3 = [
                    du3[0][[i, j, k]],
                    du3[1][[i, j, k]],
                    (s.u.u3[[i, j, k + 1]] - s.u.u3[[i, j, k]]) / g.spacing()[2],
                ];
                adv3 += (0..3).map(|d| u[d] * grad3[d]).sum::<f64>() * jt.v[2];
                cor_eps += beta * (u[2] * jt.v[0] - u[0] * jt.v[2]);
            }
        }
        series[2].push(adv * v + e2 * adv3 * v);
        series[3].push(cor * v);
        series[4].push(eps * cor_eps * v * f64::from(u8::from(aniso)));

        let mut work = 0.0;
        if !problem.theta.is_zero() {
            for i in 0..g.nx() {
                for j in 0..g.ny() {
                    let c = g.cell_center(i, j, 0);
                    let jt = at([c[0], c[1], 0.0]);
                    work += problem.theta.theta1[[i, j]] * jt.v[0]
                        + problem.theta.theta2[[i, j]] * jt.v[1];
                }
            }
        }
        series[5].push(-work * dx * dy);
        let work = forcing.as_ref().map_or(0.0, |f| {
            face_dot(&f[n].0, g, comps, |x| at(x).v, [1.0, 1.0, e2])
        });
        series[6].push(work);
    }
    let first = &history[0];
    let initial = face_dot(&first.u, g, comps, |x| ev.at(x, first.t).v, [1.0, 1.0, e2]);
    let int = |k: usize| trapezoid(&times, &series[k]);
    vec![
        ("time", int(0)),
        ("viscous", int(1)),
        ("advection", int(2)),
        ("coriolis", int(3)),
        ("coriolis_vertical", int(4)),
        ("rhs_initial", initial),
        ("rhs_boundary", int(5)),
        ("rhs_forcing", int(6)),
    ]
}

/// `int_a^b tau(t) dt` in closed form.
fn tau_integral(a: f64, b: f64, t_c: f64) -> f64 {
    let prim = |t: f64| {
        let t = t.min(t_c);
        0.5 * t + t_c / (2.0 * PI) * (PI * t / t_c).sin()
    };
    if b <= a {
        0.0
    } else {
        prim(b) - prim(a)
    }
}

fn concentration_terms(
    history: &[SimState],
    problem: &Problem,
    forcing: &ForcingSeries,
    test: &TestFunction,
) -> Vec<(&'static str, f64)> {
    let g = &problem.grid;
    let v = g.cell_volume();
    let m = &problem.diffusion;
    let times: Vec<f64> = history.iter().map(|s| s.t).collect();
    let t_end = *times.last().expect("nonempty history");
    let ev = Evaluator::new(test, g);
    let mut series: [Vec<f64>; 4] = Default::default();
    for (n, s) in history.iter().enumerate() {
        let t = s.t;
        let at = |x: [f64; 3]| ev.at(x, t);
        let uc = s.u.cell_centered();
        let pc = apply_concentration_bcs(&s.c, m, g);
        let grads = cell_gradients(&pc, g);
        let (mut time, mut adv, mut off) = (0.0, 0.0, 0.0);
        for ((i, j, k), c) in s.c.values.indexed_iter() {
            let jt = at(g.cell_center(i, j, k));
            time -= c * jt.dt[0];
            adv -= c * (0..3).map(|d| uc[d][[i, j, k]] * jt.g[0][d]).sum::<f64>();
            let mm = m.at(i, j, k);
            for d in 0..3 {
                for e in 0..3 {
                    if d != e && mm[d][e] != 0.0 {
                        off += mm[d][e] * grads[e][[i, j, k]] * jt.g[0][d];
                    }
                }
            }
        }
        let mut diag = 0.0;
        for_each_pair(&pc, g, gradient_weight, |pr| {
            let mm = m.at(pr.cell[0], pr.cell[1], pr.cell[2]);
            diag += pr.weight * mm[pr.axis][pr.axis] * pr.slope * at(pr.mid).g[0][pr.axis];
        });
        series[0].push(time * v);
        series[1].push(adv * v);
        series[2].push((diag + off) * v);
        let work = forcing.as_ref().map_or(0.0, |f| {
            f[n].1
                .values
                .indexed_iter()
                .map(|((i, j, k), x)| x * at(g.cell_center(i, j, k)).v[0])
                .sum::<f64>()
                * v
        });
        series[3].push(work);
    }
    let first = &history[0];
    let initial: f64 = first
        .c
        .values
        .indexed_iter()
        .map(|((i, j, k), c)| c * ev.at(g.cell_center(i, j, k), first.t).v[0])
        .sum::<f64>()
        * v;
    // the source is known in closed form in time: integrate it exactly
    let spec = problem.source.spec;
    let source = if spec.intensity == 0.0 {
        0.0
    } else {
        let space = match spec.kind {
            SourceKind::DeltaDeposit => spec.intensity * test.spatial(spec.x_s, g).v[0],
            _ => {
                problem
                    .source
                    .profile
                    .values
                    .indexed_iter()
                    .map(|((i, j, k), p)| p * ev.spatial(g.cell_center(i, j, k)).v[0])
                    .sum::<f64>()
                    * v
            }
        };
        space * tau_integral(spec.t_s.max(times[0]), t_end, test.t_c())
    };
    let int = |k: usize| trapezoid(&times, &series[k]);
    vec![
        ("time", int(0)),
        ("advection", int(1)),
        ("diffusion", int(2)),
        ("rhs_initial", initial),
        ("rhs_source", source),
        ("rhs_forcing", int(3)),
    ]
}

/// Evaluates the weak identities of the problem's mode on `history` (ordered
/// snapshots from the initial state to `T`) for each test function.
pub fn weak_residual(
    history: &[SimState],
    problem: &Problem,
    tests: &[TestFunction],
) -> Result<Vec<WeakResidual>> {
    let t_end = history.last().ok_or_else(super::empty_history)?.t;
    if history.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::Diagnostics("snapshot times must increase".into()));
    }
    for test in tests {
        test.check(&problem.grid, t_end)?;
    }
    let forcing: ForcingSeries = problem
        .forcing
        .as_ref()
        .map(|f| history.iter().map(|s| f(s.t)).collect());
    tests
        .iter()
        .map(|test| {
            let terms = match test {
                TestFunction::Velocity { .. } => velocity_terms(history, problem, &forcing, test),
                TestFunction::Concentration { .. } => {
                    concentration_terms(history, problem, &forcing, test)
                }
            };
            Ok(WeakResidual::from_terms(test.name(), terms))
        })
        .collect()
}
