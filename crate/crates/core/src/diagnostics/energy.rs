use crate::domain::{coercivity_constant, DiffusionTensor, Grid};
use crate::error::Result;
use crate::fields::{BoundaryForcing, ScalarField, StaggeredVelocity};
use crate::model::{Mode, Problem, SimState};
use crate::operators::{apply_concentration_bcs, apply_velocity_bcs, BcMode};

use super::{dissipation_weight, empty_history, pair_energy};

/// One row of the ledger. `d`, `w` and `q` are cumulative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub t: f64,
    /// `1/2 (||u_H||^2 + eps^2 ||u3||^2 + ||C||^2)`; hydrostatic drops `u3`.
    pub e: f64,
    /// `int (||grad_nu u_H||^2 + eps^2 ||grad_nu u3||^2 + (M grad C, grad C))`.
    pub d: f64,
    /// `int |<theta_H, u_H>_ground|`.
    pub w: f64,
    /// `int (S, C)`.
    pub q: f64,
    /// `E(0) + W + Q - E - D`.
    pub slack: f64,
    /// Instantaneous `(M grad C, grad C)`.
    pub qm: f64,
    /// Instantaneous `lambda ||grad C||^2`, a lower bound for `qm`.
    pub coercive_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub records: Vec<EnergyRecord>,
    pub lambda: f64,
    /// Largest step between consecutive records.
    pub max_dt: f64,
}

impl EnergyReport {
    pub fn min_slack(&self) -> f64 {
        self.records
            .iter()
            .fold(f64::INFINITY, |m, r| m.min(r.slack))
    }

    /// Scheme tolerance `max_dt * D(T)`: the size of the first-order time
    /// discretization error the ledger can carry.
    pub fn tol_scheme(&self) -> f64 {
        self.max_dt * self.records.last().map_or(0.0, |r| r.d)
    }

    /// Whether `(M grad C, grad C) >= lambda ||grad C||^2` at every record,
    /// up to `rel` relative slack.
    pub fn coercivity_holds(&self, rel: f64) -> bool {
        self.records
            .iter()
            .all(|r| r.qm - r.coercive_bound >= -rel * r.qm.abs().max(f64::MIN_POSITIVE))
    }
}

/// `||grad_nu u_H||^2 + eps^2 ||grad_nu u3||^2` with the boundary conditions of
/// `mode`; the hydrostatic form drops `u3`. Ground-flux ghosts carry the
/// boundary work and are excluded.
pub fn velocity_dissipation(
    u: &StaggeredVelocity,
    theta: &BoundaryForcing,
    nu: [f64; 3],
    eps: f64,
    grid: &Grid,
    mode: Mode,
) -> f64 {
    let bc = match mode {
        Mode::Anisotropic => BcMode::Anisotropic,
        Mode::Hydrostatic => BcMode::Hydrostatic,
    };
    let g = apply_velocity_bcs(u, theta, nu[2], grid, bc);
    let mut d = pair_energy(&g.u1, grid, nu, dissipation_weight)
        + pair_energy(&g.u2, grid, nu, dissipation_weight);
    if mode == Mode::Anisotropic {
        d += eps * eps * pair_energy(&g.u3, grid, nu, dissipation_weight);
    }
    d
}

/// `(Q_M, Q_I)`: the discrete `(M grad C, grad C)` and `||grad C||^2`, both
/// on the ghost layers of `M`'s boundary conditions.
///
/// Per cell, `Q_M` is `1/2 sum_d M_dd (dm_d^2 + dp_d^2) + sum_{d != e} M_de D_d D_e`
/// with one-sided slopes `dm, dp` and centered `D = (dm + dp) / 2`. Since
/// `(dm^2 + dp^2) / 2 = D^2 + (dp - dm)^2 / 4`, this is at least `lambda Q_I`
/// cell by cell. For diagonal `M` it equals `-(C, div(M grad C))`.
pub fn concentration_forms(c: &ScalarField, m: &DiffusionTensor, grid: &Grid) -> (f64, f64) {
    let p = apply_concentration_bcs(c, m, grid);
    let h = grid.spacing();
    let [nx, ny, nz] = grid.cell_shape();
    let (mut qm, mut qi) = (0.0, 0.0);
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let idx = [i, j, k];
                let f = p.at(idx, [0, 0, 0]);
                let mut dm = [0.0; 3];
                let mut dp = [0.0; 3];
                for d in 0..3 {
                    let mut e = [0isize; 3];
                    e[d] = 1;
                    dp[d] = (p.at(idx, e) - f) / h[d];
                    e[d] = -1;
                    dm[d] = (f - p.at(idx, e)) / h[d];
                }
                let mm = m.at(i, j, k);
                for d in 0..3 {
                    let s = 0.5 * (dm[d] * dm[d] + dp[d] * dp[d]);
                    qi += s;
                    qm += mm[d][d] * s;
                    for e in 0..3 {
                        if e != d {
                            qm += mm[d][e] * 0.25 * (dm[d] + dp[d]) * (dm[e] + dp[e]);
                        }
                    }
                }
            }
        }
    }
    let v = grid.cell_volume();
    (qm * v, qi * v)
}

/// `sum_ground (theta_H . u_H) dx dy` over the bottom layer of faces.
fn boundary_work(u: &StaggeredVelocity, theta: &BoundaryForcing, grid: &Grid) -> f64 {
    if theta.is_zero() {
        return 0.0;
    }
    let [nx, ny, _] = grid.cell_shape();
    let [dx, dy, _] = grid.spacing();
    let mut acc = 0.0;
    for i in 1..nx {
        for j in 0..ny {
            acc += theta.theta1_at_face(i, j) * u.u1[[i, j, 0]];
        }
    }
    for i in 0..nx {
        for j in 1..ny {
            acc += theta.theta2_at_face(i, j) * u.u2[[i, j, 0]];
        }
    }
    acc * dx * dy
}

/// Instantaneous ledger quantities of one state.
#[derive(Debug, Clone, Copy)]
struct Instant {
    t: f64,
    e: f64,
    d: f64,
    w: f64,
    q: f64,
    qm: f64,
    qi: f64,
}

/// Incremental form of [`energy_balance`], fed one state at a time.
#[derive(Debug, Clone)]
pub struct EnergyLedger<'a> {
    problem: &'a Problem,
    last: Option<Instant>,
    e0: f64,
    cum: [f64; 3],
    max_dt: f64,
    records: Vec<EnergyRecord>,
}

impl<'a> EnergyLedger<'a> {
    pub fn new(problem: &'a Problem) -> Self {
        EnergyLedger {
            problem,
            last: None,
            e0: 0.0,
            cum: [0.0; 3],
            max_dt: 0.0,
            records: Vec::new(),
        }
    }

    fn instant(&self, s: &SimState) -> Instant {
        let pr = self.problem;
        let g = &pr.grid;
        let eps = pr.params.eps;
        let (uh, u3) = s.u.norms_sq(g);
        let vert = match pr.mode {
            Mode::Anisotropic => eps * eps * u3,
            Mode::Hydrostatic => 0.0,
        };
        let (qm, qi) = concentration_forms(&s.c, &pr.diffusion, g);
        let dv = velocity_dissipation(&s.u, &pr.theta, pr.params.nu, eps, g, pr.mode);
        let q = pr.source.at(s.t).map_or(0.0, |src| src.dot(&s.c, g));
        Instant {
            t: s.t,
            e: 0.5 * (uh + vert + s.c.norm_sq(g)),
            d: dv + qm,
            w: boundary_work(&s.u, &pr.theta, g).abs(),
            q,
            qm,
            qi,
        }
    }

    pub fn push(&mut self, s: &SimState) {
        let now = self.instant(s);
        match self.last {
            None => self.e0 = now.e,
            Some(prev) => {
                let dt = now.t - prev.t;
                self.max_dt = self.max_dt.max(dt);
                self.cum[0] += 0.5 * dt * (prev.d + now.d);
                self.cum[1] += 0.5 * dt * (prev.w + now.w);
                self.cum[2] += 0.5 * dt * (prev.q + now.q);
            }
        }
        let [d, w, q] = self.cum;
        self.records.push(EnergyRecord {
            t: now.t,
            e: now.e,
            d,
            w,
            q,
            slack: self.e0 + w + q - now.e - d,
            qm: now.qm,
            coercive_bound: self.problem.lambda() * now.qi,
        });
        self.last = Some(now);
    }

    pub fn records(&self) -> &[EnergyRecord] {
        &self.records
    }

    pub fn finish(self) -> Result<EnergyReport> {
        if self.records.is_empty() {
            return Err(empty_history());
        }
        Ok(EnergyReport {
            records: self.records,
            lambda: coercivity_constant(&self.problem.diffusion)?,
            max_dt: self.max_dt,
        })
    }
}

/// Energy ledger over a history sampled at every step.
pub fn energy_balance<'a>(
    history: impl IntoIterator<Item = &'a SimState>,
    problem: &Problem,
) -> Result<EnergyReport> {
    let mut ledger = EnergyLedger::new(problem);
    for s in history {
        ledger.push(s);
    }
    ledger.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{GridSpec, Matrix3, PhysParams};
    use crate::model::{stable_dt, SolverSettings};
    use crate::operators::diffuse_concentration;
    use crate::sources::SourceSpec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_c(g: &Grid, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ScalarField::from_fn(g, |_| rng.gen_range(-1.0..1.0))
    }

    fn random_spd(rng: &mut ChaCha8Rng) -> Matrix3 {
        let a: [[f64; 3]; 3] =
            std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        let mut m = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] = (0..3).map(|k| a[r][k] * a[c][k]).sum::<f64>()
                    + if r == c { 0.05 } else { 0.0 };
            }
        }
        m
    }

    #[test]
    fn diagonal_form_matches_operator() {
        let g = Grid::new(GridSpec::new(5, 6, 4, 1.0, 1.0, 1.0)).unwrap();
        let c = random_c(&g, 1);
        for m in [
            DiffusionTensor::identity(),
            DiffusionTensor::diagonal([0.5, 2.0, 3.0]),
        ] {
            let (qm, _) = concentration_forms(&c, &m, &g);
            let lhs = -c.dot(&diffuse_concentration(&c, &m, &g).unwrap(), &g);
            assert!((qm - lhs).abs() < 1e-11 * qm);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cells: Vec<Matrix3> = (0..g.n_cells())
            .map(|_| {
                let d: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.2..2.0));
                [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]]
            })
            .collect();
        let m = DiffusionTensor::per_cell(g.cell_shape(), cells).unwrap();
        let (qm, _) = concentration_forms(&c, &m, &g);
        let lhs = -c.dot(&diffuse_concentration(&c, &m, &g).unwrap(), &g);
        assert!((qm - lhs).abs() < 1e-11 * qm);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn coercivity_lower_bound(seed in 0u64..10_000) {
            let g = Grid::new(GridSpec::cube(4)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = DiffusionTensor::Uniform(random_spd(&mut rng));
            let lambda = coercivity_constant(&m).unwrap();
            let c = random_c(&g, seed + 1);
            let (qm, qi) = concentration_forms(&c, &m, &g);
            prop_assert!(qm - lambda * qi >= -1e-12 * qm.abs());
        }
    }

    fn problem(g: &Grid, mode: Mode) -> Problem {
        Problem::new(
            g.clone(),
            PhysParams::default().with_eps(0.25),
            DiffusionTensor::identity(),
            BoundaryForcing::zero(g),
            SourceSpec::none(),
            SolverSettings::default(),
            mode,
        )
        .unwrap()
    }

    #[test]
    fn zero_history_has_zero_ledger() {
        let g = Grid::new(GridSpec::cube(4)).unwrap();
        let pr = problem(&g, Mode::Anisotropic);
        let mut s = SimState::zero(&g, Mode::Anisotropic);
        let mut hist = vec![s.clone()];
        for _ in 0..3 {
            s.t += 0.1;
            hist.push(s.clone());
        }
        let rep = energy_balance(&hist, &pr).unwrap();
        assert!(rep.records.iter().all(|r| r.e == 0.0
            && r.d == 0.0
            && r.w == 0.0
            && r.q == 0.0
            && r.slack == 0.0));
        assert!(energy_balance(&[], &pr).is_err());
    }

    #[test]
    fn increments_telescope_and_slack_is_nonnegative() {
        let g = Grid::new(GridSpec::new(8, 8, 4, 1.0, 1.0, 1.0)).unwrap();
        for mode in [Mode::Anisotropic, Mode::Hydrostatic] {
            let pr = problem(&g, mode);
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let u0 = StaggeredVelocity::from_fn(&g, |_| {
                [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ]
            });
            let c0 = random_c(&g, 8);
            let mut s = match mode {
                Mode::Anisotropic => {
                    crate::aniso::initial_state_anisotropic(&u0, &c0, &pr).unwrap()
                }
                Mode::Hydrostatic => {
                    crate::hydro::initial_state_hydrostatic(&u0, &c0, &pr).unwrap()
                }
            };
            let mut ledger = EnergyLedger::new(&pr);
            ledger.push(&s);
            for _ in 0..30 {
                let dt = stable_dt(&s, &pr, 0.5, 1.0).unwrap();
                s = match mode {
                    Mode::Anisotropic => crate::aniso::step_anisotropic(&s, &pr, dt).unwrap(),
                    Mode::Hydrostatic => crate::hydro::step_hydrostatic(&s, &pr, dt).unwrap(),
                };
                ledger.push(&s);
            }
            let rep = ledger.finish().unwrap();
            let r = &rep.records;
            let inc: f64 = r.windows(2).map(|w| w[1].e - w[0].e).sum();
            let total = r.last().unwrap().e - r[0].e;
            assert!((inc - total).abs() <= 1e-12 * r[0].e);
            assert!(rep.min_slack() >= -1e-12, "{mode:?}: {}", rep.min_slack());
            assert!(rep.coercivity_holds(1e-12));
        }
    }
}
