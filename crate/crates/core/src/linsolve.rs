//! Preconditioned conjugate gradients for the pressure problems.
//!
//! Both pressure operators are symmetric positive semidefinite with the
//! constants as their only null vectors (pure Neumann). Iterates are kept in
//! the mean-zero subspace.

use crate::error::{Error, Result};

pub trait LinearOperator {
    fn len(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

pub trait Preconditioner {
    /// `z ~ A^{-1} r`.
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

/// Identity preconditioner.
pub struct NoPreconditioner;

impl Preconditioner for NoPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

/// Diagonal (Jacobi) preconditioner.
pub struct Jacobi {
    pub inv_diag: Vec<f64>,
}

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), d) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * d;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcgOptions {
    /// Stop once `max |b - A x| <= tol`.
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcgOutcome {
    pub iterations: usize,
    /// Final `max |b - A x|`, recomputed from scratch.
    pub residual: f64,
}

fn remove_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Checks the Neumann compatibility condition `sum b = 0`, up to `1e-10`
/// relative to `||b||`.
pub fn check_compatible(b: &[f64]) -> Result<()> {
    let mean = b.iter().sum::<f64>() / b.len() as f64;
    let norm = (dot(b, b) / b.len() as f64).sqrt();
    if mean.abs() > 1e-10 * norm.max(f64::MIN_POSITIVE) && mean.abs() > 1e-300 {
        return Err(Error::IncompatibleRhs { mean, norm });
    }
    Ok(())
}

/// Solves the singular Neumann system `A x = b` for mean-zero `x`, starting
/// from the current contents of `x`. The mean of `b` must already be removed.
pub fn pcg_singular<A: LinearOperator, M: Preconditioner>(
    a: &A,
    m: &M,
    b: &[f64],
    x: &mut [f64],
    opts: PcgOptions,
) -> Result<PcgOutcome> {
    pcg_impl(a, m, b, x, opts, remove_mean)
}

/// Preconditioned CG for a symmetric positive definite `A`, warm-started from `x`.
pub fn pcg<A: LinearOperator, M: Preconditioner>(
    a: &A,
    m: &M,
    b: &[f64],
    x: &mut [f64],
    opts: PcgOptions,
) -> Result<PcgOutcome> {
    pcg_impl(a, m, b, x, opts, |_| {})
}

fn pcg_impl<A: LinearOperator, M: Preconditioner>(
    a: &A,
    m: &M,
    b: &[f64],
    x: &mut [f64],
    opts: PcgOptions,
    remove_mean: impl Fn(&mut [f64]),
) -> Result<PcgOutcome> {
    let n = a.len();
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);
    remove_mean(x);
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut q = vec![0.0; n];
    let residual = |x: &[f64], r: &mut [f64], q: &mut [f64]| {
        a.apply(x, q);
        for i in 0..n {
            r[i] = b[i] - q[i];
        }
    };
    residual(x, &mut r, &mut q);
    let mut iterations = 0;
    // restart loop: a converged recurrence is confirmed against the true residual
    loop {
        if max_abs(&r) <= opts.tol {
            return Ok(PcgOutcome {
                iterations,
                residual: max_abs(&r),
            });
        }
        m.apply(&r, &mut z);
        remove_mean(&mut z);
        let mut d = z.clone();
        let mut rz = dot(&r, &z);
        loop {
            if iterations >= opts.max_iter {
                residual(x, &mut r, &mut q);
                let res = max_abs(&r);
                if res <= opts.tol {
                    return Ok(PcgOutcome {
                        iterations,
                        residual: res,
                    });
                }
                return Err(Error::NonConvergence {
                    iterations,
                    residual: res,
                });
            }
            iterations += 1;
            a.apply(&d, &mut q);
            let dq = dot(&d, &q);
            if dq <= 0.0 {
                break;
            }
            let alpha = rz / dq;
            for i in 0..n {
                x[i] += alpha * d[i];
                r[i] -= alpha * q[i];
            }
            if max_abs(&r) <= opts.tol {
                break;
            }
            m.apply(&r, &mut z);
            remove_mean(&mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                d[i] = z[i] + beta * d[i];
            }
        }
        remove_mean(x);
        residual(x, &mut r, &mut q);
        if iterations >= opts.max_iter && max_abs(&r) > opts.tol {
            return Err(Error::NonConvergence {
                iterations,
                residual: max_abs(&r),
            });
        }
    }
}

/// Cell-centered operator `-div(W grad p)` with homogeneous Neumann walls on
/// an `(n0, n1, n2)` grid, where `w[d] = a_d / h_d^2`. Rank-2 grids use `n2 = 1`
/// and `w[2] = 0`.
#[derive(Debug, Clone)]
pub struct NeumannLaplacian {
    pub n: [usize; 3],
    pub w: [f64; 3],
}

impl NeumannLaplacian {
    pub fn diagonal(&self) -> Vec<f64> {
        let [n0, n1, n2] = self.n;
        let mut out = Vec::with_capacity(n0 * n1 * n2);
        for i in 0..n0 {
            for j in 0..n1 {
                let horiz = self.w[0] * f64::from(u8::from(i > 0) + u8::from(i + 1 < n0))
                    + self.w[1] * f64::from(u8::from(j > 0) + u8::from(j + 1 < n1));
                for k in 0..n2 {
                    out.push(horiz + self.w[2] * f64::from(u8::from(k > 0) + u8::from(k + 1 < n2)));
                }
            }
        }
        out
    }
}

impl LinearOperator for NeumannLaplacian {
    fn len(&self) -> usize {
        self.n.iter().product()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let [n0, n1, n2] = self.n;
        let [w0, w1, w2] = self.w;
        let (s0, s1) = (n1 * n2, n2);
        for i in 0..n0 {
            for j in 0..n1 {
                let base = i * s0 + j * s1;
                for k in 0..n2 {
                    let c = base + k;
                    let xc = x[c];
                    let mut acc = 0.0;
                    if i > 0 {
                        acc += w0 * (xc - x[c - s0]);
                    }
                    if i + 1 < n0 {
                        acc += w0 * (xc - x[c + s0]);
                    }
                    if j > 0 {
                        acc += w1 * (xc - x[c - s1]);
                    }
                    if j + 1 < n1 {
                        acc += w1 * (xc - x[c + s1]);
                    }
                    if k > 0 {
                        acc += w2 * (xc - x[c - 1]);
                    }
                    if k + 1 < n2 {
                        acc += w2 * (xc - x[c + 1]);
                    }
                    y[c] = acc;
                }
            }
        }
    }
}

/// Exact inverse of the vertical (last-axis) tridiagonal part of a
/// [`NeumannLaplacian`], horizontal diagonal included: one Thomas solve per column.
#[derive(Debug, Clone)]
pub struct LinePreconditioner {
    n: [usize; 3],
    off: f64,
    /// Per column and level: `1 / (b_k - off * c'_{k-1})`.
    inv_pivot: Vec<f64>,
    /// Per column and level: modified super-diagonal `c'_k`.
    c_prime: Vec<f64>,
}

impl LinePreconditioner {
    pub fn new(op: &NeumannLaplacian) -> Self {
        let diag = op.diagonal();
        let n2 = op.n[2];
        let off = -op.w[2];
        let mut inv_pivot = vec![0.0; diag.len()];
        let mut c_prime = vec![0.0; diag.len()];
        for col in 0..op.n[0] * op.n[1] {
            let base = col * n2;
            let mut prev = 0.0;
            for k in 0..n2 {
                let pivot = diag[base + k] - if k > 0 { off * prev } else { 0.0 };
                inv_pivot[base + k] = 1.0 / pivot;
                prev = if k + 1 < n2 { off / pivot } else { 0.0 };
                c_prime[base + k] = prev;
            }
        }
        LinePreconditioner {
            n: op.n,
            off,
            inv_pivot,
            c_prime,
        }
    }
}

impl Preconditioner for LinePreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n2 = self.n[2];
        for col in 0..self.n[0] * self.n[1] {
            let base = col * n2;
            let mut prev = 0.0;
            for k in 0..n2 {
                let c = base + k;
                prev = (r[c] - self.off * prev) * self.inv_pivot[c];
                z[c] = prev;
            }
            for k in (0..n2.saturating_sub(1)).rev() {
                let c = base + k;
                z[c] -= self.c_prime[c] * z[c + 1];
            }
        }
    }
}
