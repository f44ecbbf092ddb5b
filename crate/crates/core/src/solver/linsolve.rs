//! Conjugate gradients for the backward-Euler diffusion system
//! `(I - tau L) v = u`, with `L` the Neumann Laplacian of the grid.

use crate::error::{Error, Result};
use crate::grid::{laplacian_into, Grid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Applies `v - tau * L v` into `out`, using `scratch` for `L v`.
fn apply(v: &[f64], tau: f64, grid: &Grid, scratch: &mut [f64], out: &mut [f64]) {
    laplacian_into(v, grid, scratch);
    for ((o, x), l) in out.iter_mut().zip(v).zip(scratch.iter()) {
        *o = x - tau * l;
    }
}

/// Solves `(I - tau L) v = rhs` starting from `v = rhs`.
///
/// Every residual and search direction has zero sum (the operator maps
/// zero-sum vectors to zero-sum vectors and the initial residual is
/// `tau L rhs`), so the iterate keeps the mass of `rhs` up to rounding.
pub fn solve_implicit_diffusion(
    rhs: &[f64],
    tau: f64,
    grid: &Grid,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, CgOutcome)> {
    let n = rhs.len();
    let mut x = rhs.to_vec();
    let mut scratch = vec![0.0; n];
    let mut ap = vec![0.0; n];
    apply(&x, tau, grid, &mut scratch, &mut ap);
    let mut r: Vec<f64> = rhs.iter().zip(&ap).map(|(b, y)| b - y).collect();
    let norm_b = dot(rhs, rhs).sqrt();
    if norm_b == 0.0 {
        return Ok((x, CgOutcome { iterations: 0, relative_residual: 0.0 }));
    }
    let mut rr = dot(&r, &r);
    let mut p = r.clone();
    let mut iterations = 0;
    while rr.sqrt() > tol * norm_b {
        if iterations == max_iter {
            return Err(Error::LinSolveFailure {
                iterations,
                residual: rr.sqrt() / norm_b,
                tol,
            });
        }
        apply(&p, tau, grid, &mut scratch, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
        iterations += 1;
    }
    Ok((
        x,
        CgOutcome {
            iterations,
            relative_residual: rr.sqrt() / norm_b,
        },
    ))
}
