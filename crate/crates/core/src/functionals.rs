//! Entropy, relative entropy, entropy dissipation and the deviation
//! quantities they are compared against, evaluated on one snapshot.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::grid::{self, check_positive, Grid, SpeciesFields};
use crate::model::{conserved_masses, entropy_density, DomainSpec, EquilibriumState, ModelParams};

/// `(3 + 2 sqrt 2) / (9 + 2 sqrt 2)`.
pub fn ckp_kappa() -> f64 {
    let r2 = std::f64::consts::SQRT_2;
    (3.0 + 2.0 * r2) / (9.0 + 2.0 * r2)
}

/// Labels of the L^p growth diagnostics, in CSV column order.
pub mod diag {
    pub const B_L32: &str = "b_l32";
    pub const A_L32: &str = "a_l32";
    pub const B_LN2: &str = "b_lN2";
    pub const C_L3: &str = "c_l3";
    pub const INT_A2AC: &str = "int_a2ac";
    pub const INT_B2BC: &str = "int_b2bc";

    pub const ALL: [&str; 6] = [B_L32, A_L32, B_LN2, C_L3, INT_A2AC, INT_B2BC];
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSample {
    pub t: f64,
    pub entropy: f64,
    pub rel_entropy: f64,
    pub dissipation: f64,
    pub m1: f64,
    pub m2: f64,
    /// `||a - a_inf||_1`, `||b - b_inf||_1`, `||c - c_inf||_1`.
    pub l1_dist: [f64; 3],
    /// `||delta_A||_2^2`, `||delta_B||_2^2`, `||delta_C||_2^2` for the square
    /// roots `A = sqrt a` etc.
    pub dev_sq: [f64; 3],
    /// `||AB - C||_2^2`.
    pub abc_defect: f64,
    pub ckp_lhs: f64,
    pub diag_norms: BTreeMap<String, f64>,
}

impl FunctionalSample {
    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.entropy,
            self.rel_entropy,
            self.dissipation,
            self.m1,
            self.m2,
            self.abc_defect,
            self.ckp_lhs,
        ]
        .iter()
        .chain(&self.l1_dist)
        .chain(&self.dev_sq)
        .chain(self.diag_norms.values())
        .all(|v| v.is_finite())
    }

    pub fn diag(&self, label: &str) -> Result<f64> {
        self.diag_norms
            .get(label)
            .copied()
            .ok_or_else(|| Error::MissingDiagnostic(label.to_string()))
    }
}

/// Trapezoid accumulation of `int_0^t int (a^2 + ac)` and `int_0^t int (b^2 + bc)`
/// over the sample times.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunningIntegrals {
    last: Option<(f64, f64, f64)>,
    pub a2ac: f64,
    pub b2bc: f64,
}

impl RunningIntegrals {
    pub fn update(&mut self, t: f64, fa: f64, fb: f64) {
        if let Some((t0, fa0, fb0)) = self.last {
            let dt = t - t0;
            self.a2ac += 0.5 * dt * (fa0 + fa);
            self.b2bc += 0.5 * dt * (fb0 + fb);
        }
        self.last = Some((t, fa, fb));
    }
}

/// `int sum_u (u ln u - u + 1)`.
pub fn entropy(fields: &SpeciesFields, grid: &Grid) -> Result<f64> {
    let mut s = 0.0;
    for u in fields.species() {
        check_positive(u)?;
        s += u.iter().map(|&v| entropy_density(v)).sum::<f64>();
    }
    Ok(grid.cell_volume() * s)
}

/// `sum_u int (u ln(u / u_inf) - u + u_inf)`.
pub fn relative_entropy(fields: &SpeciesFields, eq: &EquilibriumState, grid: &Grid) -> Result<f64> {
    if !eq.is_strictly_positive() {
        return Err(Error::DegenerateEquilibrium);
    }
    let mut s = 0.0;
    for (u, u_inf) in fields.species().into_iter().zip(eq.components()) {
        check_positive(u)?;
        s += u_inf * u.iter().map(|&v| entropy_density(v / u_inf)).sum::<f64>();
    }
    Ok(grid.cell_volume() * s)
}

/// `(x - y) ln(x / y)`, zero when `x` and `y` agree to rounding.
pub fn reaction_term(x: f64, y: f64) -> f64 {
    let diff = x - y;
    if diff.abs() < 1e-15 * x.max(y) {
        0.0
    } else {
        diff * (diff / y).ln_1p()
    }
}

/// Unweighted reaction part `int (ab - c) ln(ab / c)`.
pub fn reaction_dissipation(fields: &SpeciesFields, grid: &Grid) -> f64 {
    let s: f64 = (0..fields.len())
        .map(|i| reaction_term(fields.a[i] * fields.b[i], fields.c[i]))
        .sum();
    grid.cell_volume() * s
}

/// `4 d_a int |grad sqrt a|^2 + 4 d_b int |grad sqrt b|^2 + 4 d_c int |grad sqrt c|^2
///  + int (ab - c) ln(ab / c)`.
pub fn dissipation(fields: &SpeciesFields, params: &ModelParams, grid: &Grid) -> Result<f64> {
    let mut d = 0.0;
    for (u, coef) in fields.species().into_iter().zip(params.diffusivities()) {
        let e = grid::sqrt_gradient_energy(u, grid)?;
        if coef > 0.0 {
            d += 4.0 * coef * e;
        }
    }
    Ok(d + reaction_dissipation(fields, grid))
}

fn l1_distance(u: &[f64], target: f64, grid: &Grid) -> f64 {
    grid.cell_volume() * u.iter().map(|v| (v - target).abs()).sum::<f64>()
}

/// Lower bound on the relative entropy in terms of squared L1 distances:
/// `kappa |Omega| (||a - a_inf||^2 / 2M1 + ||b - b_inf||^2 / 2M2 + ||c - c_inf||^2 / (M1 + M2))`.
pub fn ckp_lower_bound(fields: &SpeciesFields, eq: &EquilibriumState, grid: &Grid) -> Result<f64> {
    if !(eq.m1 > 0.0 && eq.m2 > 0.0) {
        return Err(Error::InvalidMass(format!(
            "CKP bound needs positive masses (M1 = {}, M2 = {})",
            eq.m1, eq.m2
        )));
    }
    let la = l1_distance(&fields.a, eq.a_inf, grid);
    let lb = l1_distance(&fields.b, eq.b_inf, grid);
    let lc = l1_distance(&fields.c, eq.c_inf, grid);
    Ok(ckp_from_distances([la, lb, lc], eq.m1, eq.m2, grid.volume()))
}

fn ckp_from_distances(l1: [f64; 3], m1: f64, m2: f64, volume: f64) -> f64 {
    ckp_kappa()
        * volume
        * (l1[0] * l1[0] / (2.0 * m1) + l1[1] * l1[1] / (2.0 * m2) + l1[2] * l1[2] / (m1 + m2))
}

fn sqrt_field(u: &[f64]) -> Vec<f64> {
    u.iter().map(|v| v.sqrt()).collect()
}

/// `||sqrt(ab) - sqrt(c)||_2^2`.
pub fn abc_defect(fields: &SpeciesFields, grid: &Grid) -> f64 {
    let s: f64 = (0..fields.len())
        .map(|i| {
            let d = (fields.a[i] * fields.b[i]).sqrt() - fields.c[i].sqrt();
            d * d
        })
        .sum();
    grid.cell_volume() * s
}

/// Squared L2 deviations of `sqrt a`, `sqrt b`, `sqrt c` from their means.
pub fn sqrt_deviations(fields: &SpeciesFields, grid: &Grid) -> [f64; 3] {
    fields
        .species()
        .map(|u| grid::deviation_l2(&sqrt_field(u), grid).powi(2))
}

/// `(D, sum_{u: d_u > 0} 4 d_u / P ||delta_U||^2 + 4 ||AB - C||^2)`.
pub fn dissipation_deviation_bound(
    fields: &SpeciesFields,
    params: &ModelParams,
    domain: &DomainSpec,
    grid: &Grid,
) -> Result<(f64, f64)> {
    let lhs = dissipation(fields, params, grid)?;
    let dev = sqrt_deviations(fields, grid);
    Ok((lhs, deviation_bound_rhs(dev, abc_defect(fields, grid), params, domain.poincare_constant())))
}

pub fn deviation_bound_rhs(dev_sq: [f64; 3], abc_defect: f64, params: &ModelParams, poincare: f64) -> f64 {
    let gradient: f64 = params
        .diffusivities()
        .iter()
        .zip(dev_sq)
        .filter(|(d, _)| **d > 0.0)
        .map(|(d, dev)| 4.0 * d / poincare * dev)
        .sum();
    gradient + 4.0 * abc_defect
}

/// `(cell_volume sum |u|^p)^(1/p)` for any `p > 0` (a quasi-norm below 1).
fn lp_any(u: &[f64], p: f64, grid: &Grid) -> f64 {
    grid::lp_sum(u, p, grid).powf(1.0 / p)
}

/// Evaluates every functional at time `t` and advances the running
/// time integrals.
pub fn sample(
    fields: &SpeciesFields,
    t: f64,
    eq: &EquilibriumState,
    params: &ModelParams,
    domain: &DomainSpec,
    grid: &Grid,
    running: &mut RunningIntegrals,
) -> Result<FunctionalSample> {
    fields.check_positive()?;
    let (m1, m2) = conserved_masses(fields, grid)?;
    let entropy = entropy(fields, grid)?;
    let rel_entropy = relative_entropy(fields, eq, grid)?;
    let dissipation = dissipation(fields, params, grid)?;
    let l1_dist = [
        l1_distance(&fields.a, eq.a_inf, grid),
        l1_distance(&fields.b, eq.b_inf, grid),
        l1_distance(&fields.c, eq.c_inf, grid),
    ];
    if !(eq.m1 > 0.0 && eq.m2 > 0.0) {
        return Err(Error::InvalidMass("equilibrium masses must be positive".into()));
    }
    let ckp_lhs = ckp_from_distances(l1_dist, eq.m1, eq.m2, grid.volume());

    let vol = grid.cell_volume();
    let (mut fa, mut fb) = (0.0, 0.0);
    for i in 0..fields.len() {
        let (a, b, c) = (fields.a[i], fields.b[i], fields.c[i]);
        fa += a * a + a * c;
        fb += b * b + b * c;
    }
    running.update(t, vol * fa, vol * fb);

    let n = domain.dimension() as f64;
    let mut diag_norms = BTreeMap::new();
    diag_norms.insert(diag::B_L32.to_string(), lp_any(&fields.b, 1.5, grid));
    diag_norms.insert(diag::A_L32.to_string(), lp_any(&fields.a, 1.5, grid));
    diag_norms.insert(diag::B_LN2.to_string(), lp_any(&fields.b, n / 2.0, grid));
    diag_norms.insert(diag::C_L3.to_string(), lp_any(&fields.c, 3.0, grid));
    diag_norms.insert(diag::INT_A2AC.to_string(), running.a2ac);
    diag_norms.insert(diag::INT_B2BC.to_string(), running.b2bc);

    Ok(FunctionalSample {
        t,
        entropy,
        rel_entropy,
        dissipation,
        m1,
        m2,
        l1_dist,
        dev_sq: sqrt_deviations(fields, grid),
        abc_defect: abc_defect(fields, grid),
        ckp_lhs,
        diag_norms,
    })
}
