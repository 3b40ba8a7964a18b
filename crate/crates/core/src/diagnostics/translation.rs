use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::linsolve::{pcg, Jacobi, LinearOperator, PcgOptions};
use crate::operators::{laplacian_unchecked, Padded, Side};

use super::{loglog_slope, trapezoid};

const SIDES: [[Side; 2]; 3] = [
    [Side::Dirichlet, Side::Dirichlet],
    [Side::Dirichlet, Side::Dirichlet],
    [Side::Free, Side::Dirichlet],
];

/// `I - Lap_h` with `C = 0` on the top and lateral walls and a zero-flux ground.
struct Helmholtz<'a> {
    grid: &'a Grid,
}

impl LinearOperator for Helmholtz<'_> {
    fn len(&self) -> usize {
        self.grid.n_cells()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let view =
            ndarray::ArrayView3::from_shape(self.grid.cell_shape(), x).expect("cell-shaped input");
        let mut p = Padded::new(view, SIDES);
        p.fill_simple_ghosts();
        let lap = laplacian_unchecked(&p, [1.0; 3], self.grid);
        for ((yi, xi), li) in y.iter_mut().zip(x).zip(lap.iter()) {
            *yi = xi - li;
        }
    }
}

fn helmholtz_diagonal(grid: &Grid) -> Vec<f64> {
    let [nx, ny, nz] = grid.cell_shape();
    let h = grid.spacing();
    let mut out = Vec::with_capacity(grid.n_cells());
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let mut d = 1.0;
                for (ax, (q, n)) in [(i, nx), (j, ny), (k, nz)].into_iter().enumerate() {
                    let w = 1.0 / (h[ax] * h[ax]);
                    // Dirichlet ghosts double the wall coupling; the ground drops it
                    let lo = if q == 0 {
                        if ax == 2 {
                            0.0
                        } else {
                            2.0
                        }
                    } else {
                        1.0
                    };
                    let hi = if q + 1 == n { 2.0 } else { 1.0 };
                    d += w * (lo + hi);
                }
                out.push(d);
            }
        }
    }
    out
}

/// Solves `(I - Lap_h) N = f`: the smoothing behind the negative-norm proxy.
pub fn helmholtz_smooth(f: &ScalarField, grid: &Grid) -> Result<ScalarField> {
    f.check_shape(grid)?;
    let op = Helmholtz { grid };
    let pc = Jacobi {
        inv_diag: helmholtz_diagonal(grid).iter().map(|d| 1.0 / d).collect(),
    };
    let b = f.values.as_slice().expect("contiguous");
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut x = vec![0.0; b.len()];
    if scale > 0.0 {
        pcg(
            &op,
            &pc,
            b,
            &mut x,
            PcgOptions {
                tol: 1e-12 * scale,
                max_iter: 10_000,
            },
        )?;
    }
    Ok(ScalarField::from_array(
        ndarray::Array3::from_shape_vec(grid.cell_shape(), x).expect("cell-shaped"),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslationReport {
    pub h: Vec<f64>,
    /// `||tau_h C - C||_{L2(0, T-h; proxy)}` per shift.
    pub modulus: Vec<f64>,
    /// Log-log slope of modulus against `h`; `None` when the modulus vanishes.
    pub exponent: Option<f64>,
}

/// Time-translation modulus of a concentration history in the proxy norm
/// `||(I - Lap_h)^{-1} f||_{L2}`. Snapshots must be uniformly spaced and every
/// shift a multiple of that spacing inside `(0, T/2)`.
pub fn translation_modulus(
    history: &[(f64, &ScalarField)],
    grid: &Grid,
    h_list: &[f64],
    t_end: f64,
) -> Result<TranslationReport> {
    let bad = |m: String| Err(Error::Diagnostics(m));
    if h_list.len() < 3 {
        return bad(format!("need at least 3 shifts, got {}", h_list.len()));
    }
    if history.len() < 2 {
        return bad("need at least 2 snapshots".into());
    }
    let dt = history[1].0 - history[0].0;
    if !(dt > 0.0)
        || history
            .windows(2)
            .any(|w| ((w[1].0 - w[0].0) - dt).abs() > 1e-9 * dt)
    {
        return bad("snapshots are not uniformly spaced".into());
    }
    let mut shifts = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let s = (h / dt).round();
        if !(h > 0.0 && h < 0.5 * t_end)
            || (s * dt - h).abs() > 1e-9 * dt
            || s as usize >= history.len()
        {
            return bad(format!(
                "shift {h} is not a multiple of {dt} inside (0, T/2)"
            ));
        }
        shifts.push(s as usize);
    }
    let smoothed: Vec<ScalarField> = history
        .iter()
        .map(|(_, c)| helmholtz_smooth(c, grid))
        .collect::<Result<_>>()?;
    let times: Vec<f64> = history.iter().map(|(t, _)| *t).collect();
    let mut modulus = Vec::with_capacity(shifts.len());
    for &s in &shifts {
        let m = smoothed.len() - s;
        let sq: Vec<f64> = (0..m)
            .map(|i| {
                let diff = &smoothed[i + s].values - &smoothed[i].values;
                diff.iter().map(|v| v * v).sum::<f64>() * grid.cell_volume()
            })
            .collect();
        modulus.push(trapezoid(&times[..m], &sq).sqrt());
    }
    let exponent = if modulus.iter().all(|m| *m > 0.0) {
        loglog_slope(h_list, &modulus)
    } else {
        None
    };
    Ok(TranslationReport {
        h: h_list.to_vec(),
        modulus,
        exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::GridSpec;

    fn grid() -> Grid {
        Grid::new(GridSpec::new(6, 5, 4, 1.0, 1.0, 1.0)).unwrap()
    }

    #[test]
    fn helmholtz_inverts_its_operator() {
        let g = grid();
        let n = ScalarField::from_fn(&g, |x| x[0] * x[1] + x[2].cos());
        let mut f = vec![0.0; g.n_cells()];
        Helmholtz { grid: &g }.apply(n.values.as_slice().unwrap(), &mut f);
        let f =
            ScalarField::from_array(ndarray::Array3::from_shape_vec(g.cell_shape(), f).unwrap());
        let back = helmholtz_smooth(&f, &g).unwrap();
        let err = (&back.values - &n.values)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-9);
        let d = helmholtz_diagonal(&g);
        let mut e = vec![0.0; g.n_cells()];
        let mut y = vec![0.0; g.n_cells()];
        for (c, dc) in d.iter().enumerate() {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[c] = 1.0;
            Helmholtz { grid: &g }.apply(&e, &mut y);
            assert!((y[c] - dc).abs() < 1e-9 * dc);
        }
    }

    #[test]
    fn constant_history_has_zero_modulus() {
        let g = grid();
        let c = ScalarField::from_fn(&g, |x| x[0]);
        let hist: Vec<(f64, &ScalarField)> = (0..=10).map(|i| (0.1 * i as f64, &c)).collect();
        let r = translation_modulus(&hist, &g, &[0.1, 0.2, 0.3], 1.0).unwrap();
        assert!(r.modulus.iter().all(|m| *m == 0.0));
        assert!(r.exponent.is_none());
    }

    #[test]
    fn linear_in_time_history() {
        let g = grid();
        let gx = ScalarField::from_fn(&g, |x| (x[0] * 3.0).sin() + x[2]);
        let ng = helmholtz_smooth(&gx, &g).unwrap().norm_sq(&g).sqrt();
        let fields: Vec<ScalarField> = (0..=20)
            .map(|i| ScalarField::from_array(&gx.values * (0.05 * i as f64)))
            .collect();
        let hist: Vec<(f64, &ScalarField)> = fields
            .iter()
            .enumerate()
            .map(|(i, f)| (0.05 * i as f64, f))
            .collect();
        let hs = [0.05, 0.1, 0.2, 0.4];
        let r = translation_modulus(&hist, &g, &hs, 1.0).unwrap();
        for (h, m) in hs.iter().zip(&r.modulus) {
            assert!((m - h * ng * (1.0 - h).sqrt()).abs() < 1e-9 * m);
        }
        // reversed history gives the same modulus
        let rev: Vec<(f64, &ScalarField)> = fields
            .iter()
            .rev()
            .enumerate()
            .map(|(i, f)| (0.05 * i as f64, f))
            .collect();
        let rr = translation_modulus(&rev, &g, &hs, 1.0).unwrap();
        for (a, b) in r.modulus.iter().zip(&rr.modulus) {
            assert!((a - b).abs() < 1e-12 * a);
        }
        assert!(translation_modulus(&hist, &g, &hs[..2], 1.0).is_err());
        assert!(translation_modulus(&hist, &g, &[0.05, 0.1, 0.07], 1.0).is_err());
    }
}
