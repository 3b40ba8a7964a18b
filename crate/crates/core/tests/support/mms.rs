//! Manufactured hydrostatic solution on the unit cube. Derivatives of the
//! closed forms are taken with fourth-order central differences, so the
//! defect never sees the discretization being tested.

use std::f64::consts::PI;

/// Shared diffusion coefficient of velocity and concentration.
pub const NU: f64 = 0.05;

const H_FD: f64 = 1e-3;

/// `u_H = (1 + t) grad_perp(psi) cos(pi z / 2)` with
/// `psi = sin^2(pi x) sin^2(pi y) / pi`; `u3 = 0`.
pub fn velocity(x: [f64; 3], t: f64) -> [f64; 3] {
    let (sx, cx) = (PI * x[0]).sin_cos();
    let (sy, cy) = (PI * x[1]).sin_cos();
    let z = (0.5 * PI * x[2]).cos();
    let a = 1.0 + t;
    let psi_x = 2.0 * sx * cx * sy * sy;
    let psi_y = 2.0 * sx * sx * sy * cy;
    [a * psi_y * z, -a * psi_x * z, 0.0]
}

pub fn concentration(x: [f64; 3], t: f64) -> f64 {
    (1.0 + t) * (PI * x[0]).sin() * (PI * x[1]).sin() * (0.5 * PI * x[2]).cos()
}

fn shifted(x: [f64; 3], d: usize, by: f64) -> [f64; 3] {
    let mut y = x;
    y[d] += by;
    y
}

fn d1(f: &impl Fn([f64; 3]) -> f64, x: [f64; 3], d: usize) -> f64 {
    let h = H_FD;
    (-f(shifted(x, d, 2.0 * h)) + 8.0 * f(shifted(x, d, h)) - 8.0 * f(shifted(x, d, -h))
        + f(shifted(x, d, -2.0 * h)))
        / (12.0 * h)
}

fn d2(f: &impl Fn([f64; 3]) -> f64, x: [f64; 3], d: usize) -> f64 {
    let h = H_FD;
    (-f(shifted(x, d, 2.0 * h)) + 16.0 * f(shifted(x, d, h)) - 30.0 * f(x)
        + 16.0 * f(shifted(x, d, -h))
        - f(shifted(x, d, -2.0 * h)))
        / (12.0 * h * h)
}

fn dt(f: &impl Fn(f64) -> f64, t: f64) -> f64 {
    let h = H_FD;
    (-f(t + 2.0 * h) + 8.0 * f(t + h) - 8.0 * f(t - h) + f(t - 2.0 * h)) / (12.0 * h)
}

/// Momentum defect `d_t u + (u . grad) u - nu lap u -+ alpha u_perp` of
/// component `c < 2`.
pub fn momentum_defect(x: [f64; 3], t: f64, c: usize, alpha: f64) -> f64 {
    let u = velocity(x, t);
    let comp = |y: [f64; 3]| velocity(y, t)[c];
    let time = dt(&|s| velocity(x, s)[c], t);
    let adv: f64 = (0..3).map(|d| u[d] * d1(&comp, x, d)).sum();
    let lap: f64 = (0..3).map(|d| d2(&comp, x, d)).sum();
    let cor = if c == 0 { alpha * u[1] } else { -alpha * u[0] };
    time + adv - NU * lap - cor
}

/// `d_t C + u . grad C - nu lap C`.
pub fn concentration_defect(x: [f64; 3], t: f64) -> f64 {
    let u = velocity(x, t);
    let f = |y: [f64; 3]| concentration(y, t);
    let time = dt(&|s| concentration(x, s), t);
    let adv: f64 = (0..3).map(|d| u[d] * d1(&f, x, d)).sum();
    let lap: f64 = (0..3).map(|d| d2(&f, x, d)).sum();
    time + adv - NU * lap
}
