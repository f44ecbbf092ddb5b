//! Reference computations used to cross-check the solver and the
//! functionals. Nothing here calls into `grid`, `functionals` or `solver`
//! numerics; the arithmetic is duplicated on purpose with naive summation.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::functionals::{diag, FunctionalSample};
use crate::grid::{Grid, SpeciesFields};
use crate::model::{DomainSpec, EquilibriumState, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeState {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub t: f64,
}

fn rhs(a: f64, b: f64, c: f64) -> f64 {
    c - a * b
}

/// Classical RK4 for `a' = b' = c - ab`, `c' = ab - c` with `substeps`
/// equal steps up to `t_end`.
pub fn homogeneous_ode(a0: f64, b0: f64, c0: f64, t_end: f64, substeps: usize) -> Result<OdeState> {
    if !(a0 > 0.0 && b0 > 0.0 && c0 > 0.0) {
        return Err(Error::InvalidArgument("oracle needs a positive initial state".into()));
    }
    if substeps == 0 || !(t_end >= 0.0) {
        return Err(Error::InvalidArgument("oracle needs substeps >= 1 and t_end >= 0".into()));
    }
    let h = t_end / substeps as f64;
    let (mut a, mut b, mut c) = (a0, b0, c0);
    for k in 0..substeps {
        // a and b share the same right-hand side, c has its negative
        let k1 = rhs(a, b, c);
        let k2 = rhs(a + 0.5 * h * k1, b + 0.5 * h * k1, c - 0.5 * h * k1);
        let k3 = rhs(a + 0.5 * h * k2, b + 0.5 * h * k2, c - 0.5 * h * k2);
        let k4 = rhs(a + h * k3, b + h * k3, c - h * k3);
        let inc = h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        a += inc;
        b += inc;
        c -= inc;
        if a < -1e-12 || b < -1e-12 || c < -1e-12 {
            return Err(Error::StepTooLarge { t: (k + 1) as f64 * h });
        }
    }
    Ok(OdeState { a, b, c, t: t_end })
}

/// Riccati closed form: with `u = (c - r1)/(c - r2)`, `u(t) = u0 e^{(r1 - r2) t}`
/// and `c = (r1 - r2 u)/(1 - u)`.
pub fn homogeneous_closed_form(a0: f64, b0: f64, c0: f64, t: f64) -> OdeState {
    let m1 = a0 + c0;
    let m2 = b0 + c0;
    let s = 1.0 + m1 + m2;
    let disc = s * s - 4.0 * m1 * m2;
    let r2 = 0.5 * (s + disc.sqrt());
    let r1 = m1 * m2 / r2;
    let u0 = (c0 - r1) / (c0 - r2);
    let u = u0 * ((r1 - r2) * t).exp();
    let c = (r1 - r2 * u) / (1.0 - u);
    OdeState {
        a: m1 - c,
        b: m2 - c,
        c,
        t,
    }
}

/// Naive re-evaluation of `functionals::sample` for a single snapshot with
/// no history (running time integrals are zero).
pub fn brute_force_sample(
    fields: &SpeciesFields,
    t: f64,
    eq: &EquilibriumState,
    params: &ModelParams,
    domain: &DomainSpec,
    grid: &Grid,
) -> Result<FunctionalSample> {
    fields.check_positive()?;
    if !eq.is_strictly_positive() {
        return Err(Error::DegenerateEquilibrium);
    }
    let n = fields.a.len();
    let cells = grid.cells().to_vec();
    let h = grid.spacing().to_vec();
    let vol: f64 = h.iter().product();
    let omega: f64 = domain.lengths().iter().product();
    let dim = cells.len();

    let species = [&fields.a, &fields.b, &fields.c];
    let eqv = [eq.a_inf, eq.b_inf, eq.c_inf];

    let mut entropy = 0.0;
    let mut rel = 0.0;
    let mut l1 = [0.0; 3];
    for s in 0..3 {
        for i in 0..n {
            let u = species[s][i];
            entropy += (u * u.ln() - u + 1.0) * vol;
            rel += (u * (u / eqv[s]).ln() - u + eqv[s]) * vol;
            l1[s] += (u - eqv[s]).abs() * vol;
        }
    }

    // multi-index of every cell, last axis fastest
    let index_of = |idx: &[usize]| -> usize {
        let mut k = 0;
        for ax in 0..dim {
            k = k * cells[ax] + idx[ax];
        }
        k
    };
    let mut multi = vec![0usize; dim];
    let mut grad = [0.0; 3];
    for _ in 0..n {
        let here = index_of(&multi);
        for ax in 0..dim {
            if multi[ax] + 1 < cells[ax] {
                let mut nb = multi.clone();
                nb[ax] += 1;
                let there = index_of(&nb);
                for s in 0..3 {
                    let g = (species[s][there].sqrt() - species[s][here].sqrt()) / h[ax];
                    grad[s] += g * g * vol;
                }
            }
        }
        for ax in (0..dim).rev() {
            multi[ax] += 1;
            if multi[ax] < cells[ax] {
                break;
            }
            multi[ax] = 0;
        }
    }

    let mut react = 0.0;
    let mut defect = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for i in 0..n {
        let (a, b, c) = (fields.a[i], fields.b[i], fields.c[i]);
        let x = a * b;
        if x != c {
            react += (x - c) * (x.ln() - c.ln()) * vol;
        }
        defect += (x.sqrt() - c.sqrt()).powi(2) * vol;
        m1 += (a + c) * vol;
        m2 += (b + c) * vol;
    }
    let ds = [params.d_a, params.d_b, params.d_c];
    let dissipation = 4.0 * (ds[0] * grad[0] + ds[1] * grad[1] + ds[2] * grad[2]) + react;

    let mut dev = [0.0; 3];
    for s in 0..3 {
        let mean: f64 = species[s].iter().map(|u| u.sqrt() * vol).sum::<f64>() / omega;
        dev[s] = species[s].iter().map(|u| (u.sqrt() - mean).powi(2) * vol).sum();
    }

    let kappa = (3.0 + 2.0 * 2f64.sqrt()) / (9.0 + 2.0 * 2f64.sqrt());
    let ckp = kappa * omega * l1[0] * l1[0] / (2.0 * eq.m1)
        + kappa * omega * l1[1] * l1[1] / (2.0 * eq.m2)
        + kappa * omega * l1[2] * l1[2] / (eq.m1 + eq.m2);

    let norm = |u: &[f64], p: f64| -> f64 { u.iter().map(|v| v.powf(p) * vol).sum::<f64>().powf(1.0 / p) };
    let mut diag_norms = BTreeMap::new();
    diag_norms.insert(diag::B_L32.to_string(), norm(&fields.b, 1.5));
    diag_norms.insert(diag::A_L32.to_string(), norm(&fields.a, 1.5));
    diag_norms.insert(diag::B_LN2.to_string(), norm(&fields.b, dim as f64 / 2.0));
    diag_norms.insert(diag::C_L3.to_string(), norm(&fields.c, 3.0));
    diag_norms.insert(diag::INT_A2AC.to_string(), 0.0);
    diag_norms.insert(diag::INT_B2BC.to_string(), 0.0);

    Ok(FunctionalSample {
        t,
        entropy,
        rel_entropy: rel,
        dissipation,
        m1: m1 / omega,
        m2: m2 / omega,
        l1_dist: l1,
        dev_sq: dev,
        abc_defect: defect,
        ckp_lhs: ckp,
        diag_norms,
    })
}
