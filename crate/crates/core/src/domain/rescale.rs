use ndarray::Array3;

use crate::error::{Error, Result};
use crate::fields::{ScalarField, StaggeredVelocity};

/// Fields in the original thin-domain variables.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalState {
    /// `(v_x, v_y, v_z)` on the same faces as the rescaled velocity.
    pub velocity: StaggeredVelocity,
    /// Pollutant concentration `P = C / eps`.
    pub concentration: Array3<f64>,
    /// Physical heights `z = eps * x3` of the cell centers.
    pub z_centers: Vec<f64>,
    pub eps: f64,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("{eps} must be positive to invert the vertical scaling"),
        })
    }
}

/// Maps rescaled `(u, C)` back to physical `(v, P)`: `v_z = eps u3`, `P = C / eps`.
pub fn unscale_state(
    u: &StaggeredVelocity,
    c: &ScalarField,
    x3_centers: &[f64],
    eps: f64,
) -> Result<PhysicalState> {
    check_eps(eps)?;
    let mut velocity = u.clone();
    velocity.u3.mapv_inplace(|w| eps * w);
    Ok(PhysicalState {
        velocity,
        concentration: c.values.mapv(|v| v / eps),
        z_centers: x3_centers.iter().map(|x3| eps * x3).collect(),
        eps,
    })
}

/// Inverse of [`unscale_state`].
pub fn scale_state(phys: &PhysicalState) -> Result<(StaggeredVelocity, ScalarField)> {
    let eps = phys.eps;
    check_eps(eps)?;
    let mut u = phys.velocity.clone();
    u.u3.mapv_inplace(|w| w / eps);
    Ok((
        u,
        ScalarField::from_array(phys.concentration.mapv(|p| eps * p)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Grid, GridSpec};

    #[test]
    fn vertical_velocity_and_concentration_maps() {
        let g = Grid::new(GridSpec::cube(4)).unwrap();
        let u = StaggeredVelocity::from_fn(&g, |_| [0.0, 0.0, 1.0]);
        let c = ScalarField::zeros(&g);
        let p = unscale_state(&u, &c, &g.x3_centers(), 0.1).unwrap();
        assert!(p.velocity.u3.iter().all(|&w| w == 0.1));
        assert!(p.concentration.iter().all(|&v| v == 0.0));
        assert!((p.z_centers[0] - 0.0125).abs() < 1e-17);
        assert!(unscale_state(&u, &c, &g.x3_centers(), 0.0).is_err());
    }
}
