//! Explicit projection scheme for the rescaled anisotropic system.
//!
//! The vertical momentum equation is divided by `eps^2`, so the projection
//! sees the mobility `diag(1, 1, eps^-2)` and the vertical coupling of the
//! pressure problem grows like `eps^-2`.

use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::fields::{ScalarField, StaggeredVelocity};
use crate::linsolve::{
    check_compatible, pcg_singular, LinePreconditioner, NeumannLaplacian, PcgOptions, PcgOutcome,
};
use crate::model::{
    advance_concentration, check_dt, check_finite, Mode, Pressure, Problem, SimState,
};
use crate::operators::{advect_velocity_impl, laplacian_unchecked};
use crate::operators::{apply_velocity_bcs, coriolis_tendency, divergence, BcMode};

fn aniso_operator(grid: &Grid, eps: f64) -> NeumannLaplacian {
    let [dx, dy, dz] = grid.spacing();
    NeumannLaplacian {
        n: grid.cell_shape(),
        w: [
            1.0 / (dx * dx),
            1.0 / (dy * dy),
            1.0 / (eps * eps * dz * dz),
        ],
    }
}

fn check_projection_args(eps: f64, dt: f64, tol: f64) -> Result<()> {
    for (name, v) in [("eps", eps), ("dt", dt), ("tol", tol)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("{v} must be positive"),
            });
        }
    }
    Ok(())
}

/// Right-hand side `-div(u) / dt` with its mean removed, checked for compatibility.
pub(crate) fn projection_rhs(div: &[f64], dt: f64) -> Result<Vec<f64>> {
    let mut b: Vec<f64> = div.iter().map(|d| -d / dt).collect();
    // div of a field with zero normal walls sums to 0 up to rounding
    let mean = b.iter().sum::<f64>() / b.len() as f64;
    b.iter_mut().for_each(|v| *v -= mean);
    check_compatible(&b)?;
    Ok(b)
}

/// Core of the anisotropic projection. `p` holds the warm start on entry.
#[allow(clippy::too_many_arguments)]
pub(crate) fn project_with(
    u_star: &StaggeredVelocity,
    eps: f64,
    dt: f64,
    grid: &Grid,
    op: &NeumannLaplacian,
    pc: &LinePreconditioner,
    p: &mut ScalarField,
    opts: PcgOptions,
) -> Result<(StaggeredVelocity, PcgOutcome)> {
    let mut u = u_star.clone();
    u.zero_normal_walls();
    let div = divergence(&u, grid)?;
    let b = projection_rhs(div.values.as_slice().expect("contiguous"), dt)?;
    let x = p.values.as_slice_mut().expect("contiguous");
    let outcome = pcg_singular(
        op,
        pc,
        &b,
        x,
        PcgOptions {
            tol: opts.tol / dt,
            ..opts
        },
    )?;
    let [nx, ny, nz] = grid.cell_shape();
    let [dx, dy, dz] = grid.spacing();
    let pv = &p.values;
    let c3 = dt / (eps * eps * dz);
    for i in 1..nx {
        for j in 0..ny {
            for k in 0..nz {
                u.u1[[i, j, k]] -= dt * (pv[[i, j, k]] - pv[[i - 1, j, k]]) / dx;
            }
        }
    }
    for i in 0..nx {
        for j in 1..ny {
            for k in 0..nz {
                u.u2[[i, j, k]] -= dt * (pv[[i, j, k]] - pv[[i, j - 1, k]]) / dy;
            }
        }
    }
    for i in 0..nx {
        for j in 0..ny {
            for k in 1..nz {
                u.u3[[i, j, k]] -= c3 * (pv[[i, j, k]] - pv[[i, j, k - 1]]);
            }
        }
    }
    Ok((u, outcome))
}

/// Projects `u_star` onto discretely divergence-free fields in the
/// `eps`-weighted inner product: solves `-div(A grad p) = -div(u*) / dt` with
/// `A = diag(1, 1, eps^-2)` and homogeneous Neumann walls, then
/// `u = u* - dt A grad p`. Returns `p` with zero mean.
///
/// After success `max |div u| <= tol`.
pub fn pressure_projection_anisotropic(
    u_star: &StaggeredVelocity,
    eps: f64,
    dt: f64,
    grid: &Grid,
    tol: f64,
    max_iter: usize,
) -> Result<(StaggeredVelocity, ScalarField)> {
    check_projection_args(eps, dt, tol)?;
    u_star.check_shape(grid)?;
    let op = aniso_operator(grid, eps);
    let pc = LinePreconditioner::new(&op);
    let mut p = ScalarField::zeros(grid);
    let (u, _) = project_with(
        u_star,
        eps,
        dt,
        grid,
        &op,
        &pc,
        &mut p,
        PcgOptions { tol, max_iter },
    )?;
    Ok((u, p))
}

pub(crate) fn require_mode(problem: &Problem, mode: Mode) -> Result<()> {
    if problem.mode != mode {
        return Err(Error::InvalidParameter {
            name: "mode",
            reason: format!("problem was built for {} mode", problem.mode.name()),
        });
    }
    Ok(())
}

/// Projects an initial velocity so that `div u0 = 0` and `u0 . n = 0`.
/// The pseudo time step is 1; the returned pressure is discarded by callers.
pub fn initial_state_anisotropic(
    u0: &StaggeredVelocity,
    c0: &ScalarField,
    problem: &Problem,
) -> Result<SimState> {
    require_mode(problem, Mode::Anisotropic)?;
    u0.check_shape(&problem.grid)?;
    c0.check_shape(&problem.grid)?;
    let mut p = ScalarField::zeros(&problem.grid);
    let (u, _) = project_with(
        u0,
        problem.params.eps,
        1.0,
        &problem.grid,
        &problem.pressure_op,
        &problem.pressure_pc,
        &mut p,
        PcgOptions {
            tol: problem.settings.tol,
            max_iter: problem.settings.max_iter,
        },
    )?;
    Ok(SimState {
        t: 0.0,
        step: 0,
        u,
        p: Pressure::Volume(ScalarField::zeros(&problem.grid)),
        c: c0.clone(),
    })
}

/// Explicit momentum tendency `-adv + lap_nu + coriolis` on every face;
/// wall-normal faces carry 0.
pub(crate) fn momentum_tendency(
    u: &StaggeredVelocity,
    problem: &Problem,
    mode: BcMode,
) -> StaggeredVelocity {
    let grid = &problem.grid;
    let nu = problem.params.nu;
    let g = apply_velocity_bcs(u, &problem.theta, nu[2], grid, mode);
    let ub = g.interior();
    let vertical = mode == BcMode::Anisotropic;
    let adv = advect_velocity_impl(&ub, problem.settings.advection, grid, vertical);
    let cor = coriolis_tendency(&ub, &problem.coriolis, problem.params.eps, grid, vertical);
    let mut out = StaggeredVelocity {
        u1: laplacian_unchecked(&g.u1, nu, grid),
        u2: laplacian_unchecked(&g.u2, nu, grid),
        u3: if vertical {
            laplacian_unchecked(&g.u3, nu, grid)
        } else {
            ndarray::Array3::zeros(ub.u3.raw_dim())
        },
    };
    for (o, (a, c)) in [
        (&mut out.u1, (&adv.u1, &cor.u1)),
        (&mut out.u2, (&adv.u2, &cor.u2)),
        (&mut out.u3, (&adv.u3, &cor.u3)),
    ] {
        ndarray::Zip::from(o)
            .and(a)
            .and(c)
            .for_each(|o, a, c| *o += c - a);
    }
    out.zero_normal_walls();
    out
}

/// `u + dt * (tendency + f_u)` for the components listed in `comps`.
pub(crate) fn euler_predict(
    u: &StaggeredVelocity,
    tend: &StaggeredVelocity,
    forcing: Option<&StaggeredVelocity>,
    dt: f64,
    comps: usize,
) -> StaggeredVelocity {
    let mut out = u.clone();
    let pairs = [
        (&mut out.u1, &tend.u1, forcing.map(|f| &f.u1)),
        (&mut out.u2, &tend.u2, forcing.map(|f| &f.u2)),
        (&mut out.u3, &tend.u3, forcing.map(|f| &f.u3)),
    ];
    for (o, t, f) in pairs.into_iter().take(comps) {
        o.zip_mut_with(t, |o, t| *o += dt * t);
        if let Some(f) = f {
            o.zip_mut_with(f, |o, f| *o += dt * f);
        }
    }
    out.zero_normal_walls();
    out
}

/// One step of the anisotropic scheme: forward-Euler momentum predictor,
/// anisotropic projection (warm-started from the stored pressure), then the
/// concentration update with the projected velocity.
pub fn step_anisotropic(state: &SimState, problem: &Problem, dt: f64) -> Result<SimState> {
    require_mode(problem, Mode::Anisotropic)?;
    check_dt(dt, &state.u, problem)?;
    let grid = &problem.grid;
    let forcing = problem.forcing.as_ref().map(|f| f(state.t));
    let tend = momentum_tendency(&state.u, problem, BcMode::Anisotropic);
    let u_star = euler_predict(&state.u, &tend, forcing.as_ref().map(|f| &f.0), dt, 3);
    let mut p = match &state.p {
        Pressure::Volume(p) => p.clone(),
        Pressure::Surface(_) => ScalarField::zeros(grid),
    };
    let (u, _) = project_with(
        &u_star,
        problem.params.eps,
        dt,
        grid,
        &problem.pressure_op,
        &problem.pressure_pc,
        &mut p,
        PcgOptions {
            tol: problem.settings.tol,
            max_iter: problem.settings.max_iter,
        },
    )?;
    let c = advance_concentration(
        &state.c,
        &u,
        state.t,
        dt,
        problem,
        forcing.as_ref().map(|f| &f.1),
    )?;
    let next = SimState {
        t: state.t + dt,
        step: state.step + 1,
        u,
        p: Pressure::Volume(p),
        c,
    };
    check_finite(&next)?;
    Ok(next)
}
