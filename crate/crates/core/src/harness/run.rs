use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aniso::{initial_state_anisotropic, step_anisotropic};
use crate::diagnostics::{
    convergence_metrics, translation_modulus, ConvergenceReport, EnergyLedger, EnergyReport,
    NormAccumulator, NormTable, TranslationReport,
};
use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::fields::{ScalarField, StaggeredVelocity};
use crate::hydro::{initial_state_hydrostatic, step_hydrostatic};
use crate::model::{stable_dt, Mode, Problem, SimState, SolverSettings};
use crate::sources::SourceKind;

use super::config::{ConcentrationInit, RunConfig, VelocityInit};
use super::output::{
    write_energy_csv, write_manifest, write_norms_csv, write_sweep_csv, write_sweep_norms_csv,
    write_translation_csv, write_vtk, SweepRecord,
};

/// Everything a finished run produced.
#[derive(Clone)]
pub struct RunArtifacts {
    pub run_id: String,
    pub mode: Mode,
    pub eps: f64,
    pub dir: PathBuf,
    pub dt: f64,
    pub steps: usize,
    /// Every `snapshot_every`-th state plus the final one.
    pub snapshots: Vec<SimState>,
    pub energy: EnergyReport,
    pub norms: NormTable,
    /// `None` when the uniform snapshots admit fewer than 3 shifts.
    pub translation: Option<TranslationReport>,
    /// Zero unless timing is enabled.
    pub runtime_s: f64,
    pub problem: Problem,
}

/// Knobs that are not part of the experiment itself.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Fixed step; by default `T / ceil(T / stable_dt(initial state))`.
    pub dt: Option<f64>,
    /// Run directory; by default `output_dir/run_id`.
    pub dir: Option<PathBuf>,
    /// Progress lines on stderr.
    pub verbose: bool,
}

pub fn run_id(mode: Mode, eps: f64) -> String {
    match mode {
        Mode::Anisotropic => format!("aniso_eps{eps}"),
        Mode::Hydrostatic => "hydro".to_string(),
    }
}

/// The problem a config describes at aspect ratio `eps`. Hydrostatic runs
/// always use the deposit realization of the point source; anisotropic runs
/// use the configured pulse with width `eps`.
pub fn build_problem(cfg: &RunConfig, eps: f64, mode: Mode) -> Result<Problem> {
    let source = match mode {
        Mode::Anisotropic => cfg.source.with_width(eps),
        Mode::Hydrostatic => cfg.source.with_kind(SourceKind::DeltaDeposit),
    };
    let settings = SolverSettings {
        tol: cfg.run.tol,
        max_iter: cfg.run.max_iter,
        advection: cfg.run.advection,
    };
    Problem::new(
        Grid::new(cfg.grid)?,
        cfg.phys.with_eps(eps),
        cfg.diffusion.clone(),
        cfg.theta.clone(),
        source,
        settings,
        mode,
    )
}

/// Unprojected initial velocity and initial concentration of a config.
pub fn initial_fields(cfg: &RunConfig, grid: &Grid) -> (StaggeredVelocity, ScalarField) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
    let (lx, ly, h) = (grid.lx(), grid.ly(), grid.height());
    let mut u = match cfg.velocity {
        VelocityInit::Zero => StaggeredVelocity::zeros(grid),
        VelocityInit::TaylorGreenH { amplitude: c } => StaggeredVelocity::from_fn(grid, |x| {
            let (s1, c1) = (PI * x[0] / lx).sin_cos();
            let (s2, c2) = (PI * x[1] / ly).sin_cos();
            let z = (PI * x[2] / h).sin();
            [c * s1 * c2 * z, -c * c1 * s2 * z, 0.0]
        }),
        VelocityInit::Random { amplitude: a } => StaggeredVelocity::from_fn(grid, |_| {
            [
                rng.gen_range(-a..=a),
                rng.gen_range(-a..=a),
                rng.gen_range(-a..=a),
            ]
        }),
    };
    u.zero_normal_walls();
    let c = match cfg.concentration {
        ConcentrationInit::Zero => ScalarField::zeros(grid),
        ConcentrationInit::GaussianBlob {
            center,
            width,
            amplitude,
        } => ScalarField::from_fn(grid, |x| {
            let r2: f64 = (0..3).map(|d| (x[d] - center[d]).powi(2)).sum();
            amplitude * (-r2 / (width * width)).exp()
        }),
        ConcentrationInit::Random { amplitude: a } => {
            ScalarField::from_fn(grid, |_| rng.gen_range(0.0..=a))
        }
    };
    (u, c)
}

/// Projected initial state.
pub fn initial_state(cfg: &RunConfig, problem: &Problem) -> Result<SimState> {
    let (u0, c0) = initial_fields(cfg, &problem.grid);
    match problem.mode {
        Mode::Anisotropic => initial_state_anisotropic(&u0, &c0, problem),
        Mode::Hydrostatic => initial_state_hydrostatic(&u0, &c0, problem),
    }
}

pub fn step(state: &SimState, problem: &Problem, dt: f64) -> Result<SimState> {
    match problem.mode {
        Mode::Anisotropic => step_anisotropic(state, problem, dt),
        Mode::Hydrostatic => step_hydrostatic(state, problem, dt),
    }
}

/// Largest `T / n` not above `dt`.
pub fn uniform_dt(t_end: f64, dt: f64) -> f64 {
    t_end / (t_end / dt - 1e-9).ceil().max(1.0)
}

fn snapshot_path(dir: &Path, step: usize) -> PathBuf {
    dir.join("snapshots").join(format!("step_{step:06}.vtk"))
}

/// Translation modulus over the uniformly spaced snapshots, with shifts of
/// 1, 2, 4, ... spacings below half the covered time.
fn translation_for(
    snapshots: &[SimState],
    every: usize,
    grid: &Grid,
) -> Result<Option<TranslationReport>> {
    let uniform: Vec<(f64, &ScalarField)> = snapshots
        .iter()
        .filter(|s| s.step % every == 0)
        .map(|s| (s.t, &s.c))
        .collect();
    if uniform.len() < 2 {
        return Ok(None);
    }
    let spacing = uniform[1].0 - uniform[0].0;
    let span = uniform[uniform.len() - 1].0 - uniform[0].0;
    let mut h_list = Vec::new();
    let mut k = 1usize;
    while (k as f64) * spacing < 0.5 * span * (1.0 - 1e-9) {
        h_list.push(k as f64 * spacing);
        k *= 2;
    }
    if h_list.len() < 3 {
        return Ok(None);
    }
    translation_modulus(&uniform, grid, &h_list, span).map(Some)
}

/// One run of the configured scenario at aspect ratio `eps` in `mode`.
pub fn run_simulation(cfg: &RunConfig, eps: f64, mode: Mode) -> Result<RunArtifacts> {
    run_simulation_with(cfg, eps, mode, &RunOptions::default())
}

pub fn run_simulation_with(
    cfg: &RunConfig,
    eps: f64,
    mode: Mode,
    opts: &RunOptions,
) -> Result<RunArtifacts> {
    let problem = build_problem(cfg, eps, mode)?;
    let init = initial_state(cfg, &problem)?;
    run_from(cfg, problem, init, opts)
}

fn run_from(
    cfg: &RunConfig,
    problem: Problem,
    init: SimState,
    opts: &RunOptions,
) -> Result<RunArtifacts> {
    let clock = Instant::now();
    let mode = problem.mode;
    let eps = problem.params.eps;
    let id = run_id(mode, eps);
    let dir = opts
        .dir
        .clone()
        .unwrap_or_else(|| cfg.run.output_dir.join(&id));
    let grid = problem.grid.clone();
    let t_end = cfg.time.t_end;
    let every = cfg.time.snapshot_every;
    let (cfl, dt_max) = (cfg.time.cfl, cfg.time.dt_max);
    let dt = match opts.dt {
        Some(dt) => dt,
        None => uniform_dt(t_end, stable_dt(&init, &problem, cfl, dt_max)?),
    };
    let n_steps = (t_end / dt).round().max(1.0) as usize;
    let uniform = (n_steps as f64 * dt - t_end).abs() <= 1e-9 * t_end;

    let mut ledger = EnergyLedger::new(&problem);
    let mut norms = NormAccumulator::new(&problem);
    let mut snapshots = Vec::new();
    let keep = |s: &SimState, snapshots: &mut Vec<SimState>| -> Result<()> {
        if cfg.run.vtk {
            write_vtk(s, &grid, &id, &snapshot_path(&dir, s.step))?;
        }
        snapshots.push(s.clone());
        Ok(())
    };
    ledger.push(&init);
    norms.push(&init);
    keep(&init, &mut snapshots)?;
    let mut state = init;
    if opts.verbose {
        eprintln!("{id}: dt = {dt:e}, {n_steps} steps");
    }
    let mut adaptive = !uniform;
    while state.t < t_end * (1.0 - 1e-12) {
        let limit = stable_dt(&state, &problem, cfl, dt_max)?;
        if dt > limit * (1.0 + 1e-12) && !adaptive {
            adaptive = true;
            if opts.verbose {
                eprintln!(
                    "{id}: step {} needs dt <= {limit:e}; switching to adaptive steps",
                    state.step
                );
            }
        }
        let this_dt = if adaptive {
            limit.min(t_end - state.t)
        } else {
            dt
        };
        let next = match step(&state, &problem, this_dt) {
            Ok(s) => s,
            Err(e) => {
                // keep the last good state for inspection
                let _ = write_vtk(&state, &grid, &id, &snapshot_path(&dir, state.step));
                return Err(e);
            }
        };
        state = next;
        if !adaptive && state.step == n_steps {
            state.t = t_end;
        }
        ledger.push(&state);
        norms.push(&state);
        if state.step % every == 0 || state.t >= t_end * (1.0 - 1e-12) {
            keep(&state, &mut snapshots)?;
        }
        if opts.verbose && state.step % (every * 8) == 0 {
            eprintln!("{id}: step {} t = {:.4}", state.step, state.t);
        }
    }
    let energy = ledger.finish()?;
    let norms = norms.finish()?;
    let translation = if adaptive {
        None
    } else {
        translation_for(&snapshots, every, &grid)?
    };
    let runtime_s = if cfg.run.timing {
        clock.elapsed().as_secs_f64()
    } else {
        0.0
    };

    write_energy_csv(&energy, &dir.join("energy.csv"))?;
    write_norms_csv(&norms, &dir.join("norms.csv"))?;
    if let Some(tr) = &translation {
        write_translation_csv(tr, &dir.join("translation.csv"))?;
    }
    let mut manifest: Vec<(&str, String)> = vec![
        ("run_id", id.clone()),
        ("mode", mode.name().to_string()),
        ("eps", eps.to_string()),
        ("grid", format!("{}x{}x{}", grid.nx(), grid.ny(), grid.nz())),
        (
            "extent",
            format!("{}x{}x{}", grid.lx(), grid.ly(), grid.height()),
        ),
        ("T", t_end.to_string()),
        (
            "dt",
            if adaptive {
                "adaptive".into()
            } else {
                format!("{dt:e}")
            },
        ),
        ("steps", state.step.to_string()),
        ("snapshot_every", every.to_string()),
        ("snapshots", snapshots.len().to_string()),
        ("seed", cfg.run.seed.to_string()),
        (
            "advection",
            format!("{:?}", cfg.run.advection).to_lowercase(),
        ),
        (
            "source_kind",
            format!("{:?}", problem.source.spec.kind).to_lowercase(),
        ),
        ("lambda", format!("{:e}", energy.lambda)),
        ("energy_slack_min", format!("{:e}", energy.min_slack())),
        ("tol_scheme", format!("{:e}", energy.tol_scheme())),
        (
            "translation_exponent",
            translation
                .as_ref()
                .and_then(|t| t.exponent)
                .map_or_else(|| "none".into(), |e| format!("{e:e}")),
        ),
    ];
    if cfg.run.timing {
        manifest.push(("runtime_s", format!("{runtime_s:.3}")));
    }
    write_manifest(&manifest, &dir.join("manifest.txt"))?;
    if opts.verbose {
        eprintln!("{id}: done, slack min {:e}", energy.min_slack());
    }
    Ok(RunArtifacts {
        run_id: id,
        mode,
        eps,
        dir,
        dt: if adaptive { f64::NAN } else { dt },
        steps: state.step,
        snapshots,
        energy,
        norms,
        translation,
        runtime_s,
        problem,
    })
}

/// Per-run summary kept by a sweep.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub run_id: String,
    pub eps: f64,
    pub mode: Mode,
    pub energy_slack_min: f64,
    pub tol_scheme: f64,
    pub norms: NormTable,
    pub translation: Option<TranslationReport>,
    pub runtime_s: f64,
}

impl SweepRun {
    fn of(a: &RunArtifacts) -> Self {
        SweepRun {
            run_id: a.run_id.clone(),
            eps: a.eps,
            mode: a.mode,
            energy_slack_min: a.energy.min_slack(),
            tol_scheme: a.energy.tol_scheme(),
            norms: a.norms,
            translation: a.translation.clone(),
            runtime_s: a.runtime_s,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub convergence: ConvergenceReport,
    /// `sweep.csv` rows, in `convergence.rows` order.
    pub records: Vec<SweepRecord>,
    /// The hydrostatic reference first, then the anisotropic runs in `eps_list` order.
    pub runs: Vec<SweepRun>,
    pub dt: f64,
}

impl SweepReport {
    pub fn aniso_runs(&self) -> impl Iterator<Item = &SweepRun> {
        self.runs.iter().filter(|r| r.mode == Mode::Anisotropic)
    }
}

/// Hydrostatic reference plus one anisotropic run per `eps`, all on one
/// shared step so the snapshot schedules match; writes `sweep.csv` after
/// each completed anisotropic run and `sweep_norms.csv` at the end.
pub fn epsilon_sweep(cfg: &RunConfig) -> Result<SweepReport> {
    epsilon_sweep_with(cfg, false)
}

pub fn epsilon_sweep_with(cfg: &RunConfig, verbose: bool) -> Result<SweepReport> {
    let out = &cfg.run.output_dir;
    let hydro_eps = cfg.run.eps_list[0];
    let mut setups = vec![(build_problem(cfg, hydro_eps, Mode::Hydrostatic)?, None)];
    for &eps in &cfg.run.eps_list {
        setups.push((build_problem(cfg, eps, Mode::Anisotropic)?, None));
    }
    let mut min_dt = f64::INFINITY;
    for (problem, init) in &mut setups {
        let s = initial_state(cfg, problem)?;
        min_dt = min_dt.min(stable_dt(&s, problem, cfg.time.cfl, cfg.time.dt_max)?);
        *init = Some(s);
    }
    let dt = uniform_dt(cfg.time.t_end, min_dt);
    let opts = RunOptions {
        dt: Some(dt),
        dir: None,
        verbose,
    };
    let mut setups = setups.into_iter();
    let (hp, hi) = setups.next().expect("hydro setup");
    let hydro = run_from(cfg, hp, hi.expect("initialized"), &opts)?;
    let mut runs = vec![SweepRun::of(&hydro)];
    let mut histories: Vec<(f64, Vec<SimState>)> = Vec::new();
    let mut slack = Vec::new();
    let mut report = None;
    for (problem, init) in setups {
        let a = run_from(cfg, problem, init.expect("initialized"), &opts)?;
        runs.push(SweepRun::of(&a));
        slack.push((a.eps, a.energy.min_slack(), a.runtime_s));
        histories.push((a.eps, a.snapshots));
        let borrowed: Vec<(f64, &[SimState])> =
            histories.iter().map(|(e, h)| (*e, h.as_slice())).collect();
        let conv = convergence_metrics(&borrowed, &hydro.snapshots, &hydro.problem.grid)?;
        let records: Vec<SweepRecord> = conv
            .rows
            .iter()
            .map(|row| {
                let (_, s, r) = slack
                    .iter()
                    .find(|x| x.0 == row.eps)
                    .copied()
                    .expect("run exists");
                SweepRecord {
                    row: *row,
                    energy_slack_min: s,
                    runtime_s: r,
                }
            })
            .collect();
        write_sweep_csv(&records, &out.join("sweep.csv"))?;
        report = Some((conv, records));
    }
    let (convergence, records) =
        report.ok_or_else(|| Error::Diagnostics("empty eps_list".into()))?;
    let table: Vec<(String, NormTable)> =
        runs.iter().map(|r| (r.run_id.clone(), r.norms)).collect();
    write_sweep_norms_csv(&table, &out.join("sweep_norms.csv"))?;
    Ok(SweepReport {
        convergence,
        records,
        runs,
        dt,
    })
}
