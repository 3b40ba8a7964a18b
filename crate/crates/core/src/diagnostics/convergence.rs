use ndarray::Array3;

use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::model::SimState;

use super::{loglog_slope, trapezoid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub eps: f64,
    /// `||u_H^eps - u_H||_{L2((0,T) x Omega)}`.
    pub err_uh: f64,
    pub err_u3: f64,
    pub err_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Sorted by decreasing `eps`.
    pub rows: Vec<ConvergenceRow>,
    /// Fitted exponents `p` in `err ~ eps^p` for `u_H`, `u3`, `C`.
    pub rate_uh: Option<f64>,
    pub rate_u3: Option<f64>,
    pub rate_c: Option<f64>,
}

impl ConvergenceReport {
    pub fn column(&self, f: impl Fn(&ConvergenceRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }
}

fn dist_sq(a: &Array3<f64>, b: &Array3<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Space-time distances of each history to the reference.
fn distances(run: &[SimState], reference: &[SimState], grid: &Grid) -> Result<[f64; 3]> {
    if run.len() != reference.len() || run.is_empty() {
        return Err(Error::Diagnostics(format!(
            "mismatched schedules: {} vs {} snapshots",
            run.len(),
            reference.len()
        )));
    }
    let v = grid.cell_volume();
    let mut t = Vec::with_capacity(run.len());
    let mut sq = [Vec::new(), Vec::new(), Vec::new()];
    for (a, b) in run.iter().zip(reference) {
        if (a.t - b.t).abs() > 1e-12 * a.t.abs().max(1.0) {
            return Err(Error::Diagnostics(format!(
                "mismatched schedules: t = {} vs {}",
                a.t, b.t
            )));
        }
        a.u.check_shape(grid)?;
        b.u.check_shape(grid)?;
        t.push(a.t);
        sq[0].push((dist_sq(&a.u.u1, &b.u.u1) + dist_sq(&a.u.u2, &b.u.u2)) * v);
        sq[1].push(dist_sq(&a.u.u3, &b.u.u3) * v);
        sq[2].push(dist_sq(&a.c.values, &b.c.values) * v);
    }
    if t.len() == 1 {
        return Ok([sq[0][0].sqrt(), sq[1][0].sqrt(), sq[2][0].sqrt()]);
    }
    Ok(sq.map(|s| trapezoid(&t, &s).sqrt()))
}

/// `L2((0,T) x Omega)` distances of each anisotropic history to the
/// hydrostatic reference, with log-log fitted rates in `eps`.
pub fn convergence_metrics(
    aniso_runs: &[(f64, &[SimState])],
    hydro_run: &[SimState],
    grid: &Grid,
) -> Result<ConvergenceReport> {
    let mut rows = Vec::with_capacity(aniso_runs.len());
    for (eps, run) in aniso_runs {
        let [err_uh, err_u3, err_c] = distances(run, hydro_run, grid)?;
        rows.push(ConvergenceRow {
            eps: *eps,
            err_uh,
            err_u3,
            err_c,
        });
    }
    rows.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let fit =
        |f: fn(&ConvergenceRow) -> f64| loglog_slope(&eps, &rows.iter().map(f).collect::<Vec<_>>());
    Ok(ConvergenceReport {
        rate_uh: fit(|r| r.err_uh),
        rate_u3: fit(|r| r.err_u3),
        rate_c: fit(|r| r.err_c),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::GridSpec;
    use crate::fields::{ScalarField, StaggeredVelocity};
    use crate::model::Mode;

    fn history(g: &Grid, amp: f64) -> Vec<SimState> {
        (0..=4)
            .map(|n| {
                let t = 0.25 * n as f64;
                SimState {
                    t,
                    u: StaggeredVelocity::from_fn(g, |x| [amp * x[1] * t, 0.0, amp * t]),
                    c: ScalarField::from_fn(g, |x| amp * x[0]),
                    ..SimState::zero(g, Mode::Anisotropic)
                }
            })
            .collect()
    }

    #[test]
    fn self_comparison_is_zero() {
        let g = Grid::new(GridSpec::cube(4)).unwrap();
        let h = history(&g, 1.0);
        let r = convergence_metrics(&[(0.5, &h)], &h, &g).unwrap();
        assert_eq!(r.rows[0].err_uh, 0.0);
        assert_eq!(r.rows[0].err_u3, 0.0);
        assert_eq!(r.rows[0].err_c, 0.0);
    }

    #[test]
    fn rows_sorted_and_rates_fitted() {
        let g = Grid::new(GridSpec::cube(4)).unwrap();
        let reference = history(&g, 0.0);
        let runs: Vec<(f64, Vec<SimState>)> = [0.125, 0.5, 0.25]
            .iter()
            .map(|&e| (e, history(&g, e * e)))
            .collect();
        let borrowed: Vec<(f64, &[SimState])> =
            runs.iter().map(|(e, h)| (*e, h.as_slice())).collect();
        let r = convergence_metrics(&borrowed, &reference, &g).unwrap();
        assert_eq!(r.column(|x| x.eps), vec![0.5, 0.25, 0.125]);
        assert!((r.rate_c.unwrap() - 2.0).abs() < 1e-12);
        assert!((r.rate_u3.unwrap() - 2.0).abs() < 1e-12);
        assert!(convergence_metrics(&[(0.5, &reference[..3])], &reference, &g).is_err());
    }
}
