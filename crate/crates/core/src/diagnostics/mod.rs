//! Certificates computed from solution histories: the energy ledger,
//! a-priori norms, the time-translation modulus, weak-form residuals and
//! cross-aspect-ratio convergence metrics.
//!
//! Space integrals use the midpoint rule on cells and faces. Time integrals
//! use the trapezoid rule on the actual snapshot times.

mod convergence;
mod energy;
mod norms;
mod translation;
mod weak;

pub use convergence::{convergence_metrics, ConvergenceReport, ConvergenceRow};
pub use energy::{
    concentration_forms, energy_balance, velocity_dissipation, EnergyLedger, EnergyRecord,
    EnergyReport,
};
pub use norms::{apriori_norms, l2_norm, NormAccumulator, NormTable, NORM_FIELDS};
pub use translation::{helmholtz_smooth, translation_modulus, TranslationReport};
pub use weak::{
    standard_test_family, weak_residual, ConcentrationShape, TestFunction, VelocityShape,
    WeakResidual,
};

use crate::domain::Grid;
use crate::error::Error;
use crate::operators::{Padded, Side};

/// Trapezoid rule on possibly nonuniform nodes.
pub(crate) fn trapezoid(t: &[f64], f: &[f64]) -> f64 {
    t.windows(2)
        .zip(f.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .sum()
}

/// Least-squares slope of `log y` against `log x`. `None` unless at least two
/// points have positive, finite coordinates.
pub(crate) fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

pub(crate) fn empty_history() -> Error {
    Error::Diagnostics("empty history".into())
}

/// Physical coordinate of component index `q` (may be `-1` or `n` for a ghost).
pub(crate) fn node_coord(side: Side, q: isize, h: f64) -> f64 {
    if side == Side::Node {
        q as f64 * h
    } else {
        (q as f64 + 0.5) * h
    }
}

/// One nearest-neighbour pair of a padded component.
pub(crate) struct Pair {
    /// Midpoint of the two nodes.
    pub mid: [f64; 3],
    pub axis: usize,
    /// `(f_b - f_a) / h_axis`.
    pub slope: f64,
    /// Fraction of a cell volume the pair stands for.
    pub weight: f64,
    /// Component index of the interior endpoint nearest the low side.
    pub cell: [usize; 3],
}

/// Visits every pair of nodes adjacent along one axis that involves an
/// unknown. Pairs reaching a ghost get `ghost_weight(side)`; all others weight 1.
pub(crate) fn for_each_pair(
    p: &Padded,
    grid: &Grid,
    ghost_weight: impl Fn(Side) -> f64,
    mut visit: impl FnMut(Pair),
) {
    let n = p.shape();
    let sides = p.sides();
    let h = grid.spacing();
    let range = |d: usize| -> (isize, isize) {
        let (a, b) = p.active(d);
        (a as isize, b as isize)
    };
    for ax in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&d| d != ax).collect();
        let (o0, o1) = (others[0], others[1]);
        let (a0, b0) = range(o0);
        let (a1, b1) = range(o1);
        let node_axis = sides[ax][0] == Side::Node;
        let (lo, hi) = if node_axis {
            (0, n[ax] as isize - 1)
        } else {
            (-1, n[ax] as isize)
        };
        for q0 in a0..b0 {
            for q1 in a1..b1 {
                for q in lo..hi {
                    let weight = if q < 0 {
                        ghost_weight(sides[ax][0])
                    } else if q + 1 >= n[ax] as isize {
                        ghost_weight(sides[ax][1])
                    } else {
                        1.0
                    };
                    if weight == 0.0 {
                        continue;
                    }
                    let mut idx = [0usize; 3];
                    idx[o0] = q0 as usize;
                    idx[o1] = q1 as usize;
                    let base = q.max(0) as usize;
                    idx[ax] = base;
                    let mut da = [0isize; 3];
                    let mut db = [0isize; 3];
                    da[ax] = q - base as isize;
                    db[ax] = q + 1 - base as isize;
                    let fa = p.at(idx, da);
                    let fb = p.at(idx, db);
                    let mut mid = [0.0; 3];
                    for d in 0..3 {
                        let qd = if d == ax { q } else { idx[d] as isize };
                        mid[d] = node_coord(sides[d][0], qd, h[d]);
                    }
                    mid[ax] += 0.5 * h[ax];
                    let mut cell = idx;
                    cell[ax] = base.min(n[ax] - 1);
                    visit(Pair {
                        mid,
                        axis: ax,
                        slope: (fb - fa) / h[ax],
                        weight,
                        cell,
                    });
                }
            }
        }
    }
}

/// `sum_pairs w nu_d slope^2 V`: the discrete `||grad_nu f||^2`.
pub(crate) fn pair_energy(
    p: &Padded,
    grid: &Grid,
    nu: [f64; 3],
    ghost_weight: impl Fn(Side) -> f64,
) -> f64 {
    let mut acc = 0.0;
    for_each_pair(p, grid, ghost_weight, |pr| {
        acc += pr.weight * nu[pr.axis] * pr.slope * pr.slope
    });
    acc * grid.cell_volume()
}

/// Dirichlet ghosts stand for half a cell; flux and free ghosts are skipped.
pub(crate) fn dissipation_weight(side: Side) -> f64 {
    match side {
        Side::Dirichlet => 0.5,
        _ => 0.0,
    }
}

/// Every ghost stands for half a cell (gradient norms, weak forms).
pub(crate) fn gradient_weight(side: Side) -> f64 {
    match side {
        Side::Node => 1.0,
        _ => 0.5,
    }
}
