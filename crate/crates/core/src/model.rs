//! Problem definition, simulation state and the shared pieces of both
//! time integrators: stability limits and the concentration update.

use std::fmt;
use std::sync::Arc;

use ndarray::Array2;

use crate::domain::{coercivity_constant, DiffusionTensor, Grid, PhysParams};
use crate::error::{Error, Result};
use crate::fields::{BoundaryForcing, ScalarField, StaggeredVelocity};
use crate::linsolve::{LinePreconditioner, NeumannLaplacian};
use crate::operators::{
    advect_scalar, apply_concentration_bcs, tensor_diffusion, AdvectionScheme, CoriolisProfile,
};
use crate::sources::{SampledSource, SourceSpec};

/// Which limit system a state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Anisotropic,
    Hydrostatic,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Anisotropic => "aniso",
            Mode::Hydrostatic => "hydro",
        }
    }
}

/// Pressure as stored by each solver: a volume field for the anisotropic
/// system, a surface field (`d3 p = 0`) for the hydrostatic one.
#[derive(Debug, Clone, PartialEq)]
pub enum Pressure {
    Volume(ScalarField),
    Surface(Array2<f64>),
}

impl Pressure {
    /// Cell-centered pressure; the surface field is repeated on every level.
    pub fn to_volume(&self, grid: &Grid) -> ScalarField {
        match self {
            Pressure::Volume(p) => p.clone(),
            Pressure::Surface(ps) => ScalarField::from_array(ndarray::Array3::from_shape_fn(
                grid.cell_shape(),
                |(i, j, _)| ps[[i, j]],
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub step: usize,
    pub u: StaggeredVelocity,
    pub p: Pressure,
    pub c: ScalarField,
}

impl SimState {
    pub fn zero(grid: &Grid, mode: Mode) -> Self {
        SimState {
            t: 0.0,
            step: 0,
            u: StaggeredVelocity::zeros(grid),
            p: match mode {
                Mode::Anisotropic => Pressure::Volume(ScalarField::zeros(grid)),
                Mode::Hydrostatic => Pressure::Surface(Array2::zeros((grid.nx(), grid.ny()))),
            },
            c: ScalarField::zeros(grid),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.u.all_finite()
            && self.c.all_finite()
            && match &self.p {
                Pressure::Volume(p) => p.all_finite(),
                Pressure::Surface(ps) => ps.iter().all(|v| v.is_finite()),
            }
    }
}

/// Extra right-hand sides `(f_u, f_C)` evaluated at the start of a step.
/// Used to inject manufactured-solution defects.
pub type ForcingFn = dyn Fn(f64) -> (StaggeredVelocity, ScalarField) + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Projection tolerance on `max |div u|`.
    pub tol: f64,
    pub max_iter: usize,
    pub advection: AdvectionScheme,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-8,
            max_iter: 2000,
            advection: AdvectionScheme::Upwind1,
        }
    }
}

/// Everything a step needs besides the state, validated once.
#[derive(Clone)]
pub struct Problem {
    pub grid: Grid,
    pub params: PhysParams,
    pub diffusion: DiffusionTensor,
    pub theta: BoundaryForcing,
    pub source: SampledSource,
    pub settings: SolverSettings,
    pub mode: Mode,
    pub forcing: Option<Arc<ForcingFn>>,
    pub(crate) coriolis: CoriolisProfile,
    pub(crate) lambda: f64,
    pub(crate) pressure_op: NeumannLaplacian,
    pub(crate) pressure_pc: Arc<LinePreconditioner>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("grid", &self.grid)
            .field("params", &self.params)
            .field("diffusion", &self.diffusion)
            .field("source", &self.source.spec)
            .field("settings", &self.settings)
            .field("mode", &self.mode)
            .field("forcing", &self.forcing.is_some())
            .finish()
    }
}

impl Problem {
    pub fn new(
        grid: Grid,
        params: PhysParams,
        diffusion: DiffusionTensor,
        theta: BoundaryForcing,
        source: SourceSpec,
        settings: SolverSettings,
        mode: Mode,
    ) -> Result<Self> {
        params.validate()?;
        diffusion.check_shape(grid.cell_shape())?;
        let lambda = coercivity_constant(&diffusion)?;
        theta.validate(&grid)?;
        if !(settings.tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tol",
                reason: format!("{} must be positive", settings.tol),
            });
        }
        let source = SampledSource::new(source, &grid)?;
        let coriolis = CoriolisProfile::new(&params, &grid);
        let [dx, dy, dz] = grid.spacing();
        let pressure_op = match mode {
            Mode::Anisotropic => NeumannLaplacian {
                n: grid.cell_shape(),
                w: [
                    1.0 / (dx * dx),
                    1.0 / (dy * dy),
                    1.0 / (params.eps * params.eps * dz * dz),
                ],
            },
            Mode::Hydrostatic => {
                let h = grid.height();
                NeumannLaplacian {
                    n: [grid.nx(), grid.ny(), 1],
                    w: [h / (dx * dx), h / (dy * dy), 0.0],
                }
            }
        };
        let pressure_pc = Arc::new(LinePreconditioner::new(&pressure_op));
        Ok(Problem {
            grid,
            params,
            diffusion,
            theta,
            source,
            settings,
            mode,
            forcing: None,
            coriolis,
            lambda,
            pressure_op,
            pressure_pc,
        })
    }

    pub fn with_forcing(mut self, forcing: Arc<ForcingFn>) -> Self {
        self.forcing = Some(forcing);
        self
    }

    /// Coercivity constant of the diffusion tensor.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn coriolis(&self) -> &CoriolisProfile {
        &self.coriolis
    }

    /// Explicit stability limits for the current velocity (`cfl = 1`).
    pub fn limits(&self, u: &StaggeredVelocity) -> StabilityLimits {
        stability_limits(u, self)
    }
}

/// Individual explicit time-step limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityLimits {
    /// `1 / sum_d (max |u_d| / h_d)`.
    pub advective: f64,
    /// `1 / (2 sum_d nu_d / h_d^2)`.
    pub viscous: f64,
    /// `1 / (2 max_cells sum_de |M_de| / (h_d h_e))`.
    pub concentration: f64,
    /// `1 / (|alpha|_max + eps |beta|_max)`; hydrostatic drops `beta`.
    pub coriolis: f64,
}

impl StabilityLimits {
    pub fn min(&self) -> f64 {
        self.advective
            .min(self.viscous)
            .min(self.concentration)
            .min(self.coriolis)
    }
}

fn stability_limits(u: &StaggeredVelocity, problem: &Problem) -> StabilityLimits {
    let h = problem.grid.spacing();
    let m = u.max_abs();
    let rate: f64 = (0..3).map(|d| m[d] / h[d]).sum();
    let nu = problem.params.nu;
    let visc: f64 = (0..3).map(|d| nu[d] / (h[d] * h[d])).sum();
    let cor = problem.coriolis.alpha_max()
        + match problem.mode {
            Mode::Anisotropic => problem.params.eps * problem.coriolis.beta_max(),
            Mode::Hydrostatic => 0.0,
        };
    let inv = |r: f64| if r > 0.0 { 1.0 / r } else { f64::INFINITY };
    StabilityLimits {
        advective: inv(rate),
        viscous: inv(2.0 * visc),
        concentration: inv(2.0 * problem.diffusion.max_row_weight(h)),
        coriolis: inv(cor),
    }
}

/// `cfl * min(limits)`, capped at `dt_max`.
pub fn stable_dt(state: &SimState, problem: &Problem, cfl: f64, dt_max: f64) -> Result<f64> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "cfl",
            reason: format!("{cfl} must lie in (0, 1]"),
        });
    }
    if problem.grid.n_cells() == 0 {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    let limit = problem.limits(&state.u).min();
    Ok((cfl * limit).min(dt_max))
}

/// Rejects `dt` above the explicit stability limit of `u`.
pub(crate) fn check_dt(dt: f64, u: &StaggeredVelocity, problem: &Problem) -> Result<()> {
    let limit = problem.limits(u).min();
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, limit });
    }
    Ok(())
}

/// `C + dt (-u . grad C + div(M grad C) + S(t) + f_C)`, with `u` the new velocity.
pub(crate) fn advance_concentration(
    c: &ScalarField,
    u_new: &StaggeredVelocity,
    t: f64,
    dt: f64,
    problem: &Problem,
    extra: Option<&ScalarField>,
) -> Result<ScalarField> {
    let grid = &problem.grid;
    let padded = apply_concentration_bcs(c, &problem.diffusion, grid);
    let diff = tensor_diffusion(&padded, &problem.diffusion, grid);
    let adv = advect_scalar(u_new, c, problem.settings.advection, grid)?;
    let mut next = c.values.clone();
    ndarray::Zip::from(&mut next)
        .and(&adv.values)
        .and(&diff.values)
        .for_each(|v, a, d| *v += dt * (d - a));
    if let Some(s) = problem.source.at(t) {
        next.zip_mut_with(&s.values, |v, s| *v += dt * s);
    }
    if let Some(f) = extra {
        next.zip_mut_with(&f.values, |v, s| *v += dt * s);
    }
    Ok(ScalarField::from_array(next))
}

pub(crate) fn check_finite(state: &SimState) -> Result<()> {
    if !state.u.all_finite() {
        return Err(Error::NonFinite {
            step: state.step,
            field: "u",
        });
    }
    if !state.c.all_finite() {
        return Err(Error::NonFinite {
            step: state.step,
            field: "C",
        });
    }
    if !state.all_finite() {
        return Err(Error::NonFinite {
            step: state.step,
            field: "p",
        });
    }
    Ok(())
}
