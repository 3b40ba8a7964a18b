use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoriolisMode {
    /// Constant latitude `l(x2) = l0`.
    FPlane,
    /// Affine latitude `l(x2) = l0 + l_slope * x2`.
    BetaPlane,
}

/// Rescaled physical parameters shared by both solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    /// Rescaled viscosities `(nu1, nu2, nu3)`; `nu3` already absorbs the `eps^2`.
    pub nu: [f64; 3],
    /// Aspect ratio, in `(0, 1]`.
    pub eps: f64,
    /// Rotation magnitude.
    pub f0: f64,
    pub coriolis: CoriolisMode,
    pub l0: f64,
    pub l_slope: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        PhysParams {
            nu: [1e-2; 3],
            eps: 0.5,
            f0: 1.0,
            coriolis: CoriolisMode::FPlane,
            l0: FRAC_PI_4,
            l_slope: 0.0,
        }
    }
}

impl PhysParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("nu1", self.nu[0]),
            ("nu2", self.nu[1]),
            ("nu3", self.nu[2]),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{v} must be positive"),
                });
            }
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "eps",
                reason: format!("{} must lie in (0, 1]", self.eps),
            });
        }
        for (name, v) in [("f0", self.f0), ("l0", self.l0), ("l_slope", self.l_slope)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must be finite".into(),
                });
            }
        }
        Ok(())
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn latitude(&self, x2: f64) -> f64 {
        match self.coriolis {
            CoriolisMode::FPlane => self.l0,
            CoriolisMode::BetaPlane => self.l0 + self.l_slope * x2,
        }
    }

    /// `(alpha, beta) = (2 f0 sin l(x2), 2 f0 cos l(x2))`.
    pub fn coriolis_at(&self, x2: f64) -> (f64, f64) {
        let l = self.latitude(x2);
        (2.0 * self.f0 * l.sin(), 2.0 * self.f0 * l.cos())
    }

    /// Largest `|alpha|` and `|beta|` over the given `x2` samples.
    pub fn coriolis_bounds(&self, x2: &[f64]) -> (f64, f64) {
        x2.iter().fold((0.0f64, 0.0f64), |(a, b), &y| {
            let (al, be) = self.coriolis_at(y);
            (a.max(al.abs()), b.max(be.abs()))
        })
    }
}
