use crate::domain::Grid;
use crate::error::Result;
use crate::fields::ScalarField;
use crate::model::{Mode, Problem, SimState};
use crate::operators::{apply_concentration_bcs, apply_velocity_bcs, BcMode};

use super::{empty_history, gradient_weight, pair_energy};

/// Names of the tabulated quantities, in table order.
pub const NORM_FIELDS: [&str; 4] = ["u1", "u2", "eps_u3", "C"];

/// A-priori norms of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormTable {
    /// `sup_t ||f||_{L2}` for `u1, u2, eps u3, C`.
    pub sup_l2: [f64; 4],
    /// `(int ||f||_{H1}^2 dt)^{1/2}` for `u1, u2, eps u3, C`.
    pub l2_h1: [f64; 4],
    /// `(int ||u3||^2 dt)^{1/2}`.
    pub l2_l2_u3: f64,
}

impl NormTable {
    /// `(name, value)` pairs in a fixed order, for tabulation.
    pub fn entries(&self) -> Vec<(String, f64)> {
        let mut out = Vec::with_capacity(9);
        for (i, n) in NORM_FIELDS.iter().enumerate() {
            out.push((format!("sup_l2_{n}"), self.sup_l2[i]));
        }
        for (i, n) in NORM_FIELDS.iter().enumerate() {
            out.push((format!("l2_h1_{n}"), self.l2_h1[i]));
        }
        out.push(("l2_l2_u3".into(), self.l2_l2_u3));
        out
    }
}

/// Per-state squared norms: `[L2^2 x4, H1^2 x4, ||u3||^2]`.
fn instant_norms(s: &SimState, problem: &Problem) -> [f64; 9] {
    let g = &problem.grid;
    let eps = problem.params.eps;
    let v = g.cell_volume();
    let sq = |a: &ndarray::Array3<f64>| a.iter().map(|x| x * x).sum::<f64>() * v;
    let bc = match problem.mode {
        Mode::Anisotropic => BcMode::Anisotropic,
        Mode::Hydrostatic => BcMode::Hydrostatic,
    };
    let gv = apply_velocity_bcs(&s.u, &problem.theta, problem.params.nu[2], g, bc);
    let pc = apply_concentration_bcs(&s.c, &problem.diffusion, g);
    let one = [1.0; 3];
    let l2 = [
        sq(&s.u.u1),
        sq(&s.u.u2),
        eps * eps * sq(&s.u.u3),
        s.c.norm_sq(g),
    ];
    let grad = [
        pair_energy(&gv.u1, g, one, gradient_weight),
        pair_energy(&gv.u2, g, one, gradient_weight),
        eps * eps * pair_energy(&gv.u3, g, one, gradient_weight),
        pair_energy(&pc, g, one, gradient_weight),
    ];
    [
        l2[0],
        l2[1],
        l2[2],
        l2[3],
        l2[0] + grad[0],
        l2[1] + grad[1],
        l2[2] + grad[2],
        l2[3] + grad[3],
        sq(&s.u.u3),
    ]
}

/// Incremental form of [`apriori_norms`].
#[derive(Debug, Clone)]
pub struct NormAccumulator<'a> {
    problem: &'a Problem,
    last: Option<(f64, [f64; 9])>,
    sup: [f64; 4],
    int: [f64; 5],
}

impl<'a> NormAccumulator<'a> {
    pub fn new(problem: &'a Problem) -> Self {
        NormAccumulator {
            problem,
            last: None,
            sup: [0.0; 4],
            int: [0.0; 5],
        }
    }

    pub fn push(&mut self, s: &SimState) {
        let now = instant_norms(s, self.problem);
        for i in 0..4 {
            self.sup[i] = self.sup[i].max(now[i]);
        }
        if let Some((t, prev)) = self.last {
            let dt = s.t - t;
            for i in 0..5 {
                self.int[i] += 0.5 * dt * (prev[4 + i] + now[4 + i]);
            }
        }
        self.last = Some((s.t, now));
    }

    pub fn finish(&self) -> Result<NormTable> {
        if self.last.is_none() {
            return Err(empty_history());
        }
        Ok(NormTable {
            sup_l2: self.sup.map(f64::sqrt),
            l2_h1: [self.int[0], self.int[1], self.int[2], self.int[3]].map(f64::sqrt),
            l2_l2_u3: self.int[4].sqrt(),
        })
    }
}

/// Sup-in-time `L2` norms and `L2`-in-time `H1` norms of `u1, u2, eps u3, C`,
/// plus `||u3||_{L2 L2}`. Gradients are pair differences on the boundary
/// ghost layers of the problem.
pub fn apriori_norms<'a>(
    history: impl IntoIterator<Item = &'a SimState>,
    problem: &Problem,
) -> Result<NormTable> {
    let mut acc = NormAccumulator::new(problem);
    for s in history {
        acc.push(s);
    }
    acc.finish()
}

/// `||C||_{L2}`, exposed for tabulations that only need the scalar.
pub fn l2_norm(c: &ScalarField, grid: &Grid) -> f64 {
    c.norm_sq(grid).sqrt()
}
