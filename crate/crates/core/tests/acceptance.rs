//! Acceptance suite. Each criterion prints one `criterion N PASS|FAIL` line
//! to stderr (bypassing the capture of the test harness) and the test fails
//! if any criterion outside `KNOWN_SHORTFALLS` fails.

#[path = "support/mms.rs"]
mod mms;
#[path = "support/oracle.rs"]
mod oracle;

use std::f64::consts::PI;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use airshed::aniso::{initial_state_anisotropic, step_anisotropic};
use airshed::diagnostics::{
    concentration_forms, l2_norm, weak_residual, ConcentrationShape, EnergyLedger, TestFunction,
    VelocityShape,
};
use airshed::domain::{
    coercivity_constant, CoriolisMode, DiffusionTensor, Grid, GridSpec, PhysParams,
};
use airshed::fields::{BoundaryForcing, ScalarField, StaggeredVelocity};
use airshed::harness::{
    build_problem, epsilon_sweep, initial_state, parse_config, step, uniform_dt, RunConfig,
};
use airshed::hydro::{depth_integrated_divergence, initial_state_hydrostatic};
use airshed::model::{stable_dt, Mode, Problem, SimState, SolverSettings};
use airshed::operators::{
    anisotropic_laplacian, divergence, tensor_diffusion, AdvectionScheme, Padded,
};
use airshed::sources::{SourceKind, SourceSpec};

/// Criteria allowed to fail; each is analysed in the decisions ledger.
const KNOWN_SHORTFALLS: &[usize] = &[8];

struct Outcome {
    id: usize,
    pass: bool,
    detail: String,
}

fn announce(o: &Outcome) {
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "criterion {:>2} {verdict} {}",
        o.id,
        o.detail
    );
}

fn config(text: &str) -> RunConfig {
    parse_config(text).expect("valid test config")
}

fn max_abs(a: &ndarray::Array3<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn rms(a: &ndarray::Array3<f64>) -> f64 {
    (a.iter().map(|v| v * v).sum::<f64>() / a.len() as f64).sqrt()
}

/// Least-squares slope of `log y` against `log x`.
fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn march(
    state: &SimState,
    problem: &Problem,
    steps: usize,
    cfl: f64,
    mut each: impl FnMut(&SimState),
) -> SimState {
    let mut s = state.clone();
    for _ in 0..steps {
        let dt = stable_dt(&s, problem, cfl, f64::INFINITY).expect("finite limits");
        s = step(&s, problem, dt).expect("step");
        each(&s);
    }
    s
}

fn criterion_1() -> Outcome {
    let cfg = config(
        "[grid]\nnx = 16\nny = 16\nnz = 8\n[source]\nkind = gaussian\nI = 5\nt_s = 0\n\
         [init]\nvelocity = random\nvelocity_amplitude = 0.5\n",
    );
    let tol = cfg.run.tol;
    let mut worst_div: f64 = 0.0;
    let mut worst_3d: f64 = 0.0;
    for (mode, eps) in [
        (Mode::Anisotropic, 1.0),
        (Mode::Anisotropic, 0.25),
        (Mode::Anisotropic, 0.0625),
        (Mode::Hydrostatic, 0.5),
    ] {
        let problem = build_problem(&cfg, eps, mode).unwrap();
        let s0 = initial_state(&cfg, &problem).unwrap();
        march(&s0, &problem, 25, 0.5, |s| {
            let g = &problem.grid;
            match mode {
                Mode::Anisotropic => {
                    worst_div = worst_div.max(divergence(&s.u, g).unwrap().max_abs())
                }
                Mode::Hydrostatic => {
                    let dh = depth_integrated_divergence(&s.u, g);
                    worst_div = worst_div.max(dh.iter().fold(0.0, |m, v| m.max(v.abs())));
                    worst_3d = worst_3d.max(divergence(&s.u, g).unwrap().max_abs());
                }
            }
        });
    }
    Outcome {
        id: 1,
        pass: worst_div <= 10.0 * tol && worst_3d <= 1e-12,
        detail: format!(
            "projection: max|div u| = {worst_div:.2e} (limit {:.0e}), hydrostatic 3D divergence {worst_3d:.2e} (limit 1e-12)",
            10.0 * tol
        ),
    }
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = f64::INFINITY;
    let mut floor_ok = true;
    for seed in 1..=3 {
        for (mode, eps) in [
            (Mode::Anisotropic, 1.0),
            (Mode::Anisotropic, 0.25),
            (Mode::Hydrostatic, 1.0),
            (Mode::Hydrostatic, 0.25),
        ] {
            let cfg = config(&format!(
                "[grid]\nnx = 16\nny = 16\nnz = 8\n[source]\nI = 0\n\
                 [init]\nvelocity = random\nconcentration = random\n[run]\nseed = {seed}\n"
            ));
            let problem = build_problem(&cfg, eps, mode).unwrap();
            let s0 = initial_state(&cfg, &problem).unwrap();
            let mut ledger = EnergyLedger::new(&problem);
            ledger.push(&s0);
            let mut s = s0;
            while s.t < 0.05 {
                let dt = stable_dt(&s, &problem, 0.5, f64::INFINITY).unwrap();
                s = step(&s, &problem, dt).unwrap();
                ledger.push(&s);
            }
            let report = ledger.finish().unwrap();
            let e0 = report.records[0].e;
            let min = report.min_slack();
            worst = worst.min(min / e0);
            // rounding in the accumulated sums is the only admissible deficit
            floor_ok &= min >= -1e-13 * e0;
        }
    }
    Outcome {
        id: 2,
        pass: floor_ok,
        detail: format!("energy inequality: min slack / E(0) = {worst:.3e} over 12 unforced runs"),
    }
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = Grid::new(GridSpec::cube(8)).unwrap();
    let mut worst: f64 = f64::INFINITY;
    for _ in 0..100 {
        let a: [[f64; 3]; 3] =
            std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        let mut m = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] = (0..3).map(|k| a[r][k] * a[c][k]).sum::<f64>()
                    + if r == c { 0.05 } else { 0.0 };
            }
        }
        let tensor =
            DiffusionTensor::from_upper([m[0][0], m[0][1], m[0][2], m[1][1], m[1][2], m[2][2]]);
        let lambda = coercivity_constant(&tensor).unwrap();
        let c = ScalarField::from_fn(&grid, |_| rng.gen_range(-1.0..1.0));
        let (qm, qi) = concentration_forms(&c, &tensor, &grid);
        worst = worst.min((qm - lambda * qi) / qm.abs());
    }
    Outcome {
        id: 3,
        pass: worst >= -1e-12,
        detail: format!(
            "coercivity: min (Q_M - lambda Q_I) / |Q_M| = {worst:.3e} over 100 tensors"
        ),
    }
}

fn criterion_4() -> Outcome {
    let grid = Grid::new(GridSpec::cube(64)).unwrap();
    let h = 1.0 / 64.0;
    // width eps/sqrt(2) of the pulse spans four cells at the finer eps
    let fine = 4.0 * h * 2f64.sqrt();
    let coarse = 2.0 * fine;
    let gaussian = |eps: f64| {
        SourceSpec::new(SourceKind::Gaussian, 1.0, 0.0, [0.5; 3], eps)
            .profile(&grid)
            .unwrap()
    };
    let (sf, sc) = (gaussian(fine), gaussian(coarse));
    let mass = |s: &ScalarField| s.values.sum() * grid.cell_volume();
    let mass_err = (mass(&sf) - 1.0).abs().max((mass(&sc) - 1.0).abs());
    let ratio = l2_norm(&sf, &grid) / l2_norm(&sc, &grid);
    let expected = 2f64.powf(1.5);
    let ratio_err = (ratio / expected - 1.0).abs();
    Outcome {
        id: 4,
        pass: mass_err <= 0.02 && ratio_err <= 0.10,
        detail: format!(
            "source scaling: mass error {mass_err:.2e} (limit 2e-2), L2 ratio {ratio:.4} vs {expected:.4} ({:.2}%)",
            100.0 * ratio_err
        ),
    }
}

fn criterion_5() -> Outcome {
    let nu = [1.0, 0.5, 0.25];
    let f = |x: [f64; 3]| (PI * x[0]).sin() * (2.0 * PI * x[1]).sin() * (PI * x[2]).cos();
    let lap_f = |x: [f64; 3]| -(nu[0] + 4.0 * nu[1] + nu[2]) * PI * PI * f(x);
    let m = [[0.8, 0.2, 0.1], [0.2, 0.6, -0.15], [0.1, -0.15, 0.5]];
    let tensor =
        DiffusionTensor::from_upper([m[0][0], m[0][1], m[0][2], m[1][1], m[1][2], m[2][2]]);
    let c = |x: [f64; 3]| (PI * x[0]).sin() * (PI * x[1]).sin() * (PI * x[2]).sin().powi(2);
    let div_m_grad_c = |x: [f64; 3]| {
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        let (s2z, c2z) = (2.0 * PI * x[2]).sin_cos();
        let z = (PI * x[2]).sin().powi(2);
        let (dz, dzz) = (PI * s2z, 2.0 * PI * PI * c2z);
        let hess = [
            [
                -PI * PI * sx * sy * z,
                PI * PI * cx * cy * z,
                PI * cx * sy * dz,
            ],
            [
                PI * PI * cx * cy * z,
                -PI * PI * sx * sy * z,
                PI * sx * cy * dz,
            ],
            [PI * cx * sy * dz, PI * sx * cy * dz, sx * sy * dzz],
        ];
        (0..3)
            .flat_map(|a| (0..3).map(move |b| (a, b)))
            .map(|(a, b)| m[a][b] * hess[a][b])
            .sum::<f64>()
    };
    let (mut hs, mut e_lap, mut e_div, mut m_lap, mut m_div) =
        (vec![], vec![], vec![], vec![], vec![]);
    for n in [8, 16, 32] {
        let grid = Grid::new(GridSpec::cube(n)).unwrap();
        let lap = anisotropic_laplacian(&Padded::sample_cells(&grid, f), nu, &grid).unwrap();
        let exact = ScalarField::from_fn(&grid, lap_f);
        let err = &lap - &exact.values;
        e_lap.push(rms(&err));
        m_lap.push(max_abs(&err));
        let td = tensor_diffusion(&Padded::sample_cells(&grid, c), &tensor, &grid);
        let exact = ScalarField::from_fn(&grid, div_m_grad_c);
        let err = &td.values - &exact.values;
        e_div.push(rms(&err));
        m_div.push(max_abs(&err));
        hs.push(1.0 / n as f64);
    }
    let (p_lap, p_div) = (loglog_slope(&hs, &e_lap), loglog_slope(&hs, &e_div));
    Outcome {
        id: 5,
        pass: (p_lap - 2.0).abs() <= 0.1 && (p_div - 2.0).abs() <= 0.1,
        detail: format!(
            "operator order (RMS error): anisotropic Laplacian {p_lap:.3}, tensor diffusion {p_div:.3} (2 +- 0.1); \
             max-norm orders {:.3}, {:.3}",
            loglog_slope(&hs, &m_lap),
            loglog_slope(&hs, &m_div)
        ),
    }
}

fn pack(
    u: &StaggeredVelocity,
    c: &ScalarField,
    l: &oracle::Layout,
) -> (DVector<f64>, DVector<f64>) {
    let mut v = DVector::zeros(l.n_vel());
    for (d, comp) in [&u.u1, &u.u2, &u.u3].into_iter().enumerate() {
        for ((i, j, k), x) in comp.indexed_iter() {
            if let Some(r) = l.vel(d, [i as isize, j as isize, k as isize]) {
                v[r] = *x;
            }
        }
    }
    let mut w = DVector::zeros(l.n_cells());
    for ((i, j, k), x) in c.values.indexed_iter() {
        w[l.cell([i as isize, j as isize, k as isize]).unwrap()] = *x;
    }
    (v, w)
}

fn rel_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1e-300)
}

fn criterion_6() -> Outcome {
    let spec = GridSpec::new(6, 6, 6, 1.2, 0.9, 0.6);
    let grid = Grid::new(spec).unwrap();
    let params = PhysParams {
        nu: [0.02, 0.03, 0.01],
        eps: 0.5,
        f0: 1.0,
        coriolis: CoriolisMode::FPlane,
        l0: PI / 4.0,
        l_slope: 0.0,
    };
    let (alpha, beta) = params.coriolis_at(0.0);
    let m_diag = [0.01, 0.02, 0.005];
    let theta = [0.05, -0.03];
    let (intensity, x_s, width) = (2.0, [0.6, 0.45, 0.3], 0.5);
    let mut worst: f64 = 0.0;
    for scheme in [AdvectionScheme::Upwind1, AdvectionScheme::Centered2] {
        let problem = Problem::new(
            grid.clone(),
            params,
            DiffusionTensor::diagonal(m_diag),
            BoundaryForcing::constant(&grid, theta[0], theta[1]),
            SourceSpec::new(SourceKind::Gaussian, intensity, 0.0, x_s, width),
            SolverSettings {
                tol: 1e-14,
                max_iter: 10_000,
                advection: scheme,
            },
            Mode::Anisotropic,
        )
        .unwrap();
        let setup = oracle::OracleSetup {
            layout: oracle::Layout {
                n: [6, 6, 6],
                h: grid.spacing(),
            },
            nu: params.nu,
            eps: params.eps,
            alpha,
            beta,
            theta,
            m_diag,
            upwind: scheme == AdvectionScheme::Upwind1,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut u0 = StaggeredVelocity::from_fn(&grid, |_| {
            std::array::from_fn(|_| rng.gen_range(-1.0..1.0))
        });
        u0.zero_normal_walls();
        let c0 = ScalarField::from_fn(&grid, |_| rng.gen_range(0.0..1.0));
        let gamma = PI.powf(-1.5);
        let source = ScalarField::from_fn(&grid, |x| {
            let r2: f64 = (0..3).map(|d| (x[d] - x_s[d]).powi(2)).sum();
            intensity * gamma / width.powi(3) * (-r2 / (width * width)).exp()
        });
        let (_, s_vec) = pack(&StaggeredVelocity::zeros(&grid), &source, &setup.layout);
        let mut s = initial_state_anisotropic(&u0, &c0, &problem).unwrap();
        for _ in 0..3 {
            let dt = stable_dt(&s, &problem, 0.5, 1.0).unwrap();
            let (u, c) = pack(&s.u, &s.c, &setup.layout);
            let (u_ref, c_ref) = setup.step(&u, &c, &s_vec, dt);
            s = step_anisotropic(&s, &problem, dt).unwrap();
            let (u_lib, c_lib) = pack(&s.u, &s.c, &setup.layout);
            worst = worst
                .max(rel_err(&u_lib, &u_ref))
                .max(rel_err(&c_lib, &c_ref));
        }
    }
    Outcome {
        id: 6,
        pass: worst <= 1e-12,
        detail: format!(
            "dense-matrix oracle on 6^3: max relative deviation {worst:.2e} (limit 1e-12)"
        ),
    }
}

fn criteria_7_to_9(dir: &Path) -> Vec<Outcome> {
    let mut cfg = RunConfig::default();
    cfg.run.output_dir = dir.to_path_buf();
    cfg.run.vtk = false;
    cfg.run.eps_list = vec![0.5, 0.25, 0.125, 0.0625];
    let report = epsilon_sweep(&cfg).unwrap();
    let rows = &report.convergence.rows;
    let uh: Vec<f64> = rows.iter().map(|r| r.err_uh).collect();
    let cc: Vec<f64> = rows.iter().map(|r| r.err_c).collect();
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let ratio = |v: &[f64]| v[v.len() - 1] / v[0];
    let c7 = Outcome {
        id: 7,
        pass: decreasing(&uh) && decreasing(&cc) && ratio(&uh) <= 0.5 && ratio(&cc) <= 0.5,
        detail: format!(
            "hydrostatic limit: err_uH {:?}, err_C {:?}, ratios {:.3} / {:.3} (limit 0.5)",
            uh.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>(),
            cc.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>(),
            ratio(&uh),
            ratio(&cc)
        ),
    };

    let aniso: Vec<_> = report.aniso_runs().collect();
    let names: Vec<String> = aniso[0].norms.entries().into_iter().map(|e| e.0).collect();
    let mut spread_worst = (String::new(), 0.0f64);
    for (k, name) in names.iter().enumerate() {
        let vals: Vec<f64> = aniso.iter().map(|r| r.norms.entries()[k].1).collect();
        let max = vals.iter().cloned().fold(f64::MIN, f64::max);
        let min = vals.iter().cloned().fold(f64::MAX, f64::min);
        let spread = max / min;
        if !(spread <= spread_worst.1) {
            spread_worst = (name.clone(), spread);
        }
    }
    let c8 = Outcome {
        id: 8,
        pass: spread_worst.1 < 2.0,
        detail: format!(
            "uniform bounds: largest max/min across eps is {:.3} for {} (limit 2)",
            spread_worst.1, spread_worst.0
        ),
    };

    let exponents: Vec<(f64, Option<f64>)> = aniso
        .iter()
        .map(|r| (r.eps, r.translation.as_ref().and_then(|t| t.exponent)))
        .collect();
    let default_exp = exponents.iter().find(|e| e.0 == 0.5).and_then(|e| e.1);
    let c9 = Outcome {
        id: 9,
        pass: default_exp.is_some_and(|p| p >= 0.20),
        detail: format!(
            "time translation: exponent {} at eps 0.5 (limit 0.20); all runs {:?}",
            default_exp.map_or("n/a".into(), |p| format!("{p:.3}")),
            exponents
                .iter()
                .map(|(e, p)| format!("{e}: {}", p.map_or("n/a".into(), |p| format!("{p:.3}"))))
                .collect::<Vec<_>>()
        ),
    };
    vec![c7, c8, c9]
}

fn mms_problem(n: usize) -> Problem {
    let grid = Grid::new(GridSpec::cube(n)).unwrap();
    let params = PhysParams {
        nu: [mms::NU; 3],
        ..PhysParams::default()
    };
    let (alpha, _) = params.coriolis_at(0.0);
    let forcing_grid = grid.clone();
    let forcing = move |t: f64| {
        let fu = StaggeredVelocity::from_fn(&forcing_grid, |x| {
            [
                mms::momentum_defect(x, t, 0, alpha),
                mms::momentum_defect(x, t, 1, alpha),
                0.0,
            ]
        });
        let fc = ScalarField::from_fn(&forcing_grid, |x| mms::concentration_defect(x, t));
        (fu, fc)
    };
    Problem::new(
        grid.clone(),
        params,
        DiffusionTensor::diagonal([mms::NU; 3]),
        BoundaryForcing::zero(&grid),
        SourceSpec::none(),
        SolverSettings {
            advection: AdvectionScheme::Centered2,
            ..SolverSettings::default()
        },
        Mode::Hydrostatic,
    )
    .unwrap()
    .with_forcing(Arc::new(forcing))
}

fn weak_tests(t_c: f64) -> Vec<TestFunction> {
    let v = |shape, m| TestFunction::Velocity {
        shape,
        m,
        amplitude: 1.0,
        t_c,
    };
    let c = |m| TestFunction::Concentration {
        shape: ConcentrationShape::Bump,
        m,
        amplitude: 1.0,
        t_c,
    };
    vec![
        v(VelocityShape::Streamfunction, 1.0),
        v(VelocityShape::Streamfunction, 2.0),
        v(VelocityShape::Antiderivative, 1.0),
        c(1.0),
        c(2.0),
    ]
}

fn criterion_10() -> Outcome {
    let tests = weak_tests(0.15);
    // the zero solution satisfies every weak identity exactly
    let mut zero_worst: f64 = 0.0;
    for mode in [Mode::Anisotropic, Mode::Hydrostatic] {
        let cfg =
            config("[grid]\nnx = 8\nny = 8\nnz = 8\n[source]\nI = 0\n[init]\nvelocity = zero\n");
        let problem = build_problem(&cfg, 0.5, mode).unwrap();
        let mut history = vec![initial_state(&cfg, &problem).unwrap()];
        let dt = 0.2 / 100.0;
        for _ in 0..100 {
            history.push(step(history.last().unwrap(), &problem, dt).unwrap());
        }
        for r in weak_residual(&history, &problem, &tests).unwrap() {
            zero_worst = r
                .terms
                .iter()
                .fold(zero_worst.max(r.residual.abs()), |m, t| m.max(t.1.abs()));
        }
    }

    let t_end = 0.2;
    let mut hs = Vec::new();
    let mut residuals: Vec<Vec<f64>> = vec![Vec::new(); tests.len()];
    for n in [8, 16, 32] {
        let problem = mms_problem(n);
        let grid = &problem.grid;
        let u0 = StaggeredVelocity::from_fn(grid, |x| mms::velocity(x, 0.0));
        let c0 = ScalarField::from_fn(grid, |x| mms::concentration(x, 0.0));
        let s0 = initial_state_hydrostatic(&u0, &c0, &problem).unwrap();
        let dt = uniform_dt(t_end, stable_dt(&s0, &problem, 0.5, f64::INFINITY).unwrap());
        let steps = (t_end / dt).round() as usize;
        let mut history = vec![s0];
        for _ in 0..steps {
            history.push(step(history.last().unwrap(), &problem, dt).unwrap());
        }
        for (k, r) in weak_residual(&history, &problem, &tests)
            .unwrap()
            .into_iter()
            .enumerate()
        {
            residuals[k].push(r.residual.abs());
        }
        hs.push(1.0 / n as f64);
    }
    let slopes: Vec<f64> = residuals.iter().map(|r| loglog_slope(&hs, r)).collect();
    let min_slope = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    Outcome {
        id: 10,
        pass: zero_worst <= 1e-14 && min_slope >= 1.0,
        detail: format!(
            "weak residual: zero-solution terms <= {zero_worst:.1e}; manufactured slopes {:?} (limit 1)",
            slopes.iter().map(|s| format!("{s:.2}")).collect::<Vec<_>>()
        ),
    }
}

fn collect_csv(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|e| e == "csv") {
                let rel = p.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn criterion_11(a: &Path, b: &Path) -> Outcome {
    for dir in [a, b] {
        let mut cfg = config(
            "[grid]\nnx = 16\nny = 16\nnz = 8\n[time]\nT = 0.05\nsnapshot_every = 8\n\
             [init]\nvelocity = random\nconcentration = random\n\
             [run]\nmode = sweep\neps_list = 0.5, 0.25\nvtk = false\ntiming = false\nseed = 11\n",
        );
        cfg.run.output_dir = dir.to_path_buf();
        epsilon_sweep(&cfg).unwrap();
    }
    let (fa, fb) = (collect_csv(a), collect_csv(b));
    let identical = !fa.is_empty() && fa == fb;
    Outcome {
        id: 11,
        pass: identical,
        detail: format!(
            "reproducibility: {} CSV files, byte-identical across two runs: {identical}",
            fa.len()
        ),
    }
}

#[test]
fn acceptance() {
    let tmp = tempfile::tempdir().unwrap();
    // `ACCEPTANCE_ONLY=2,6` restricts a local run to some criteria
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let wanted = |id: usize| only.as_ref().map_or(true, |o| o.contains(&id));
    let mut outcomes = Vec::new();
    let mut record = |o: Outcome| {
        announce(&o);
        outcomes.push(o);
    };
    let single: [(usize, fn() -> Outcome); 7] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (10, criterion_10),
    ];
    for (id, f) in &single[..6] {
        if wanted(*id) {
            record(f());
        }
    }
    if (7..=9).any(wanted) {
        for o in criteria_7_to_9(&tmp.path().join("sweep")) {
            record(o);
        }
    }
    if wanted(10) {
        record(single[6].1());
    }
    if wanted(11) {
        record(criterion_11(
            &tmp.path().join("repro_a"),
            &tmp.path().join("repro_b"),
        ));
    }

    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    let unexpected: Vec<usize> = failed
        .iter()
        .copied()
        .filter(|id| !KNOWN_SHORTFALLS.contains(id))
        .collect();
    let _ = writeln!(
        std::io::stderr(),
        "acceptance: {} of {} criteria pass; failing {:?}",
        outcomes.len() - failed.len(),
        outcomes.len(),
        failed
    );
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}
