//! Explicit scheme for the hydrostatic limit: prognostic horizontal velocity,
//! a two-dimensional surface pressure, and a diagnosed vertical velocity.

use ndarray::{Array2, Array3};

use crate::aniso::{euler_predict, momentum_tendency, projection_rhs, require_mode};
use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::fields::{ScalarField, StaggeredVelocity};
use crate::linsolve::{
    pcg_singular, LinePreconditioner, NeumannLaplacian, PcgOptions, Preconditioner,
};
use crate::model::{
    advance_concentration, check_dt, check_finite, Mode, Pressure, Problem, SimState,
};
use crate::operators::BcMode;

fn surface_operator(grid: &Grid) -> NeumannLaplacian {
    let [dx, dy, _] = grid.spacing();
    let h = grid.height();
    NeumannLaplacian {
        n: [grid.nx(), grid.ny(), 1],
        w: [h / (dx * dx), h / (dy * dy), 0.0],
    }
}

/// `div_H (sum_k u_H dz)` per column.
pub fn depth_integrated_divergence(u: &StaggeredVelocity, grid: &Grid) -> Array2<f64> {
    let [nx, ny, nz] = grid.cell_shape();
    let [dx, dy, dz] = grid.spacing();
    Array2::from_shape_fn((nx, ny), |(i, j)| {
        let mut s = 0.0;
        for k in 0..nz {
            s += (u.u1[[i + 1, j, k]] - u.u1[[i, j, k]]) / dx
                + (u.u2[[i, j + 1, k]] - u.u2[[i, j, k]]) / dy;
        }
        s * dz
    })
}

pub(crate) fn surface_project_with<P: Preconditioner>(
    u_star: &StaggeredVelocity,
    dt: f64,
    grid: &Grid,
    op: &NeumannLaplacian,
    pc: &P,
    ps: &mut Array2<f64>,
    opts: PcgOptions,
) -> Result<StaggeredVelocity> {
    let mut u = u_star.clone();
    u.zero_normal_walls();
    let div = depth_integrated_divergence(&u, grid);
    let b = projection_rhs(div.as_slice().expect("contiguous"), dt)?;
    let x = ps.as_slice_mut().expect("contiguous");
    pcg_singular(
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
    let [dx, dy, _] = grid.spacing();
    for i in 1..nx {
        for j in 0..ny {
            let g = dt * (ps[[i, j]] - ps[[i - 1, j]]) / dx;
            for k in 0..nz {
                u.u1[[i, j, k]] -= g;
            }
        }
    }
    for i in 0..nx {
        for j in 1..ny {
            let g = dt * (ps[[i, j]] - ps[[i, j - 1]]) / dy;
            for k in 0..nz {
                u.u2[[i, j, k]] -= g;
            }
        }
    }
    Ok(u)
}

/// Enforces the barotropic constraint `div_H sum_k u_H dz = 0`: solves
/// `-div_H(h grad_H ps) = -div_H(sum u_H* dz) / dt` with Neumann walls and
/// subtracts `dt grad_H ps` on every level. `u3` passes through untouched.
///
/// After success the depth-integrated divergence is at most `tol` in max norm.
pub fn surface_pressure_projection(
    u_star: &StaggeredVelocity,
    dt: f64,
    grid: &Grid,
    tol: f64,
    max_iter: usize,
) -> Result<(StaggeredVelocity, Array2<f64>)> {
    for (name, v) in [("dt", dt), ("tol", tol)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("{v} must be positive"),
            });
        }
    }
    u_star.check_shape(grid)?;
    let op = surface_operator(grid);
    let pc = LinePreconditioner::new(&op);
    let mut ps = Array2::zeros((grid.nx(), grid.ny()));
    let u = surface_project_with(
        u_star,
        dt,
        grid,
        &op,
        &pc,
        &mut ps,
        PcgOptions { tol, max_iter },
    )?;
    Ok((u, ps))
}

/// Vertical velocity from incompressibility, integrated up from `u3 = 0` on
/// the ground: `u3[k + 1] = u3[k] - dz div_H(u_H)_k`. The 3D MAC divergence of
/// the result telescopes to zero in every cell.
pub fn diagnose_w(u: &StaggeredVelocity, grid: &Grid) -> Array3<f64> {
    let [nx, ny, nz] = grid.cell_shape();
    let [dx, dy, dz] = grid.spacing();
    let mut w = Array3::zeros((nx, ny, nz + 1));
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let dh = (u.u1[[i + 1, j, k]] - u.u1[[i, j, k]]) / dx
                    + (u.u2[[i, j + 1, k]] - u.u2[[i, j, k]]) / dy;
                w[[i, j, k + 1]] = w[[i, j, k]] - dz * dh;
            }
        }
    }
    w
}

/// Projects the horizontal part of `u0` onto the barotropic constraint and
/// diagnoses its vertical velocity.
pub fn initial_state_hydrostatic(
    u0: &StaggeredVelocity,
    c0: &ScalarField,
    problem: &Problem,
) -> Result<SimState> {
    require_mode(problem, Mode::Hydrostatic)?;
    u0.check_shape(&problem.grid)?;
    c0.check_shape(&problem.grid)?;
    let grid = &problem.grid;
    let mut ps = Array2::zeros((grid.nx(), grid.ny()));
    let mut u = surface_project_with(
        u0,
        1.0,
        grid,
        &problem.pressure_op,
        problem.pressure_pc.as_ref(),
        &mut ps,
        PcgOptions {
            tol: problem.settings.tol,
            max_iter: problem.settings.max_iter,
        },
    )?;
    u.u3 = diagnose_w(&u, grid);
    Ok(SimState {
        t: 0.0,
        step: 0,
        u,
        p: Pressure::Surface(Array2::zeros((grid.nx(), grid.ny()))),
        c: c0.clone(),
    })
}

/// One hydrostatic step: horizontal predictor advected by the full 3D
/// velocity, surface-pressure projection, diagnosis of `u3`, then the
/// concentration update.
pub fn step_hydrostatic(state: &SimState, problem: &Problem, dt: f64) -> Result<SimState> {
    require_mode(problem, Mode::Hydrostatic)?;
    check_dt(dt, &state.u, problem)?;
    let grid = &problem.grid;
    let forcing = problem.forcing.as_ref().map(|f| f(state.t));
    let tend = momentum_tendency(&state.u, problem, BcMode::Hydrostatic);
    let u_star = euler_predict(&state.u, &tend, forcing.as_ref().map(|f| &f.0), dt, 2);
    let mut ps = match &state.p {
        Pressure::Surface(ps) => ps.clone(),
        Pressure::Volume(_) => Array2::zeros((grid.nx(), grid.ny())),
    };
    let mut u = surface_project_with(
        &u_star,
        dt,
        grid,
        &problem.pressure_op,
        problem.pressure_pc.as_ref(),
        &mut ps,
        PcgOptions {
            tol: problem.settings.tol,
            max_iter: problem.settings.max_iter,
        },
    )?;
    u.u3 = diagnose_w(&u, grid);
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
        p: Pressure::Surface(ps),
        c,
    };
    check_finite(&next)?;
    Ok(next)
}
