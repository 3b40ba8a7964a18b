//! Switched-on point emission: smoothed pulses around `x_s` and the
//! single-cell deposit standing in for the Dirac limit.

use std::f64::consts::PI;
use std::str::FromStr;

use ndarray::Array3;

use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::fields::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    /// `gamma eps^-3 exp(-|x - x_s|^2 / eps^2)` with `gamma = pi^(-3/2)`.
    Gaussian,
    /// `eps / 2` inside the ball of radius `1 / eps`.
    UnitImpulse,
    /// `eps / (1 + pi^2 eps^2 |x - x_s|^2)`, rescaled to unit mass over the domain.
    Lorentzian,
    /// `1 / V` in the cell containing `x_s`, shared equally when `x_s` sits
    /// on a face, edge or vertex common to several cells.
    DeltaDeposit,
}

impl FromStr for SourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gaussian" => SourceKind::Gaussian,
            "unit_impulse" => SourceKind::UnitImpulse,
            "lorentzian" => SourceKind::Lorentzian,
            "delta_deposit" => SourceKind::DeltaDeposit,
            other => {
                return Err(Error::InvalidParameter {
                    name: "kind",
                    reason: format!("unknown source kind `{other}`"),
                })
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    pub kind: SourceKind,
    /// Emission intensity `I >= 0`.
    pub intensity: f64,
    /// Switch-on time `t_s >= 0`; the source is on for `t >= t_s`.
    pub t_s: f64,
    pub x_s: [f64; 3],
    /// Pulse width parameter (the aspect ratio for the smoothed kinds).
    pub width: f64,
}

/// `pi^(-3/2)`, making the Gaussian pulse integrate to one over all of space.
pub const GAUSSIAN_GAMMA: f64 = 0.179_587_122_125_166_56;

impl SourceSpec {
    pub fn new(kind: SourceKind, intensity: f64, t_s: f64, x_s: [f64; 3], width: f64) -> Self {
        SourceSpec {
            kind,
            intensity,
            t_s,
            x_s,
            width,
        }
    }

    /// A source that never emits.
    pub fn none() -> Self {
        SourceSpec::new(SourceKind::DeltaDeposit, 0.0, 0.0, [0.5, 0.5, 0.5], 1.0)
    }

    pub fn with_kind(mut self, kind: SourceKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_width(mut self, width: f64) -> Self {
        self.width = width;
        self
    }

    pub fn is_on(&self, t: f64) -> bool {
        self.intensity != 0.0 && t >= self.t_s
    }

    /// Checks the parameters and that `x_s` lies at least two cells inside
    /// every boundary.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.intensity >= 0.0 && self.intensity.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "I",
                reason: format!("{} must be finite and nonnegative", self.intensity),
            });
        }
        if !(self.t_s >= 0.0 && self.t_s.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "t_s",
                reason: format!("{} must be finite and nonnegative", self.t_s),
            });
        }
        if self.kind != SourceKind::DeltaDeposit && !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "eps",
                reason: format!("pulse width {} must be positive", self.width),
            });
        }
        let h = grid.spacing();
        let ext = [grid.lx(), grid.ly(), grid.height()];
        for d in 0..3 {
            let x = self.x_s[d];
            if !(x >= 2.0 * h[d] - 1e-12 && x <= ext[d] - 2.0 * h[d] + 1e-12) {
                return Err(Error::SourceOutsideDomain { location: self.x_s });
            }
        }
        Ok(())
    }

    /// Spatial profile times `I`, i.e. the source while switched on.
    pub fn profile(&self, grid: &Grid) -> Result<ScalarField> {
        self.validate(grid)?;
        let i = self.intensity;
        let eps = self.width;
        let xs = self.x_s;
        let r2 = move |x: [f64; 3]| (0..3).map(|d| (x[d] - xs[d]).powi(2)).sum::<f64>();
        Ok(match self.kind {
            SourceKind::Gaussian => {
                let scale = i * GAUSSIAN_GAMMA / (eps * eps * eps);
                ScalarField::from_fn(grid, |x| scale * (-r2(x) / (eps * eps)).exp())
            }
            SourceKind::UnitImpulse => ScalarField::from_fn(grid, |x| {
                if r2(x) < 1.0 / (eps * eps) {
                    i * eps / 2.0
                } else {
                    0.0
                }
            }),
            SourceKind::Lorentzian => {
                let pulse = move |x: [f64; 3]| eps / (1.0 + PI * PI * eps * eps * r2(x));
                let mass = integrate_box(&pulse, [grid.lx(), grid.ly(), grid.height()]);
                ScalarField::from_fn(grid, |x| i * pulse(x) / mass)
            }
            SourceKind::DeltaDeposit => {
                let mut values = Array3::zeros(grid.cell_shape());
                let cells = grid
                    .containing_cells(xs)
                    .ok_or(Error::SourceOutsideDomain { location: xs })?;
                let share = i / (grid.cell_volume() * cells.len() as f64);
                for cell in cells {
                    values[cell] = share;
                }
                ScalarField::from_array(values)
            }
        })
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite tensor Gauss-Legendre quadrature of `f` over `[0, ext]`.
fn integrate_box(f: &impl Fn([f64; 3]) -> f64, ext: [f64; 3]) -> f64 {
    const PANELS: usize = 12;
    let gl = gauss_legendre(6);
    let axis = |len: f64| -> Vec<(f64, f64)> {
        let h = len / PANELS as f64;
        (0..PANELS)
            .flat_map(|p| {
                gl.iter()
                    .map(move |&(x, w)| ((p as f64 + 0.5 * (x + 1.0)) * h, 0.5 * h * w))
            })
            .collect()
    };
    let (a, b, c) = (axis(ext[0]), axis(ext[1]), axis(ext[2]));
    let mut total = 0.0;
    for &(x, wx) in &a {
        for &(y, wy) in &b {
            let mut col = 0.0;
            for &(z, wz) in &c {
                col += wz * f([x, y, z]);
            }
            total += wx * wy * col;
        }
    }
    total
}

/// `S(t)` at cell centers: the profile times `H(t - t_s)` with `H(0) = 1`.
pub fn evaluate_source(spec: &SourceSpec, t: f64, grid: &Grid) -> Result<ScalarField> {
    let profile = spec.profile(grid)?;
    if spec.is_on(t) {
        Ok(profile)
    } else {
        Ok(ScalarField::zeros(grid))
    }
}

/// Discrete `L^2((0, T) x Omega)` norm of the source.
pub fn source_norm_bound(spec: &SourceSpec, grid: &Grid, t_end: f64) -> Result<f64> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidParameter {
            name: "T",
            reason: format!("{t_end} must be positive"),
        });
    }
    let on = (t_end - spec.t_s).max(0.0);
    Ok((on * spec.profile(grid)?.norm_sq(grid)).sqrt())
}

/// Profile sampled once per run, switched on in time.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSource {
    pub spec: SourceSpec,
    pub profile: ScalarField,
}

impl SampledSource {
    pub fn new(spec: SourceSpec, grid: &Grid) -> Result<Self> {
        Ok(SampledSource {
            profile: spec.profile(grid)?,
            spec,
        })
    }

    /// `None` while switched off.
    pub fn at(&self, t: f64) -> Option<&ScalarField> {
        self.spec.is_on(t).then_some(&self.profile)
    }
}
