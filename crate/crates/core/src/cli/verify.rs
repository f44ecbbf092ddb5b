//! Built-in property suites behind the `verify` command.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::functionals::{self, RunningIntegrals};
use crate::grid::{self, Grid, SpeciesFields};
use crate::model::{conserved_masses, equilibrium_state, DomainSpec, ModelParams};
use crate::oracle;
use crate::solver::{self, reaction_substep, SolverConfig};

/// Deliberate faults used to confirm that the suites can fail.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Mutation {
    /// Negates the reaction term `(ab - c) ln(ab / c)` in the dissipation
    /// under test.
    pub flip_reaction_sign: bool,
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

fn rel_err(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).abs() / scale
    }
}

fn dissipation_under_test(fields: &SpeciesFields, params: &ModelParams, grid: &Grid, m: Mutation) -> Result<f64> {
    let d = functionals::dissipation(fields, params, grid)?;
    Ok(if m.flip_reaction_sign {
        d - 2.0 * functionals::reaction_dissipation(fields, grid)
    } else {
        d
    })
}

pub fn equilibrium_suite() -> SuiteResult {
    let mut s = SuiteResult::new("equilibrium algebra");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let m1 = 10.0 * (1.0 - rng.random::<f64>());
        let m2 = 10.0 * (1.0 - rng.random::<f64>());
        match equilibrium_state(m1, m2) {
            Ok(eq) => {
                let e = rel_err(eq.a_inf + eq.c_inf, m1)
                    .max(rel_err(eq.b_inf + eq.c_inf, m2))
                    .max(rel_err(eq.a_inf * eq.b_inf, eq.c_inf));
                s.check(e <= 1e-12 && eq.is_strictly_positive(), || {
                    format!("(M1, M2) = ({m1}, {m2}): relative defect {e:e}")
                });
            }
            Err(e) => s.check(false, || format!("(M1, M2) = ({m1}, {m2}): {e}")),
        }
    }
    for (m1, m2, c) in [(1.0, 1.0, (3.0 - 5f64.sqrt()) / 2.0), (2.0, 1.0, 2.0 - 2f64.sqrt())] {
        let got = equilibrium_state(m1, m2).map(|e| e.c_inf).unwrap_or(f64::NAN);
        s.check(rel_err(got, c) <= 1e-12, || format!("c_inf({m1}, {m2}) = {got}, expected {c}"));
    }
    s
}

fn random_fields(rng: &mut ChaCha8Rng, n: usize, floor: f64, amp: f64) -> SpeciesFields {
    let mut draw = || (0..n).map(|_| floor + amp * rng.random::<f64>()).collect::<Vec<f64>>();
    let (a, b, c) = (draw(), draw(), draw());
    SpeciesFields::new(a, b, c).expect("positive draw")
}

pub fn oracle_suite(m: Mutation) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("oracle equivalence");
    let mut rng = ChaCha8Rng::seed_from_u64(12);

    for _ in 0..100 {
        let (a, b, c) = (
            0.01 + 3.0 * rng.random::<f64>(),
            0.01 + 3.0 * rng.random::<f64>(),
            0.01 + 3.0 * rng.random::<f64>(),
        );
        let f = SpeciesFields::new(vec![a], vec![b], vec![c])?;
        let r = reaction_substep(&f, 0.1);
        let o = oracle::homogeneous_ode(a, b, c, 0.1, 10_000)?;
        let e = (r.a[0] - o.a).abs().max((r.b[0] - o.b).abs()).max((r.c[0] - o.c).abs());
        s.check(e <= 1e-10, || format!("reaction step from ({a}, {b}, {c}): {e:e}"));
    }

    let domain = DomainSpec::new(&[1.0, 1.0])?;
    let grid = Grid::new(&domain, &[4, 3])?;
    let params = ModelParams::new(0.3, 0.0, 1.0)?;
    let init = SpeciesFields::uniform(&grid, 2.0, 1.0, 0.01)?;
    let traj = solver::run(&init, &params, &grid, &domain, &SolverConfig::new(0.01, 5.0, 10)?)?;
    let mut worst: f64 = 0.0;
    for sm in &traj.samples {
        let o = oracle::homogeneous_ode(2.0, 1.0, 0.01, sm.t.max(1e-300), 20_000)?;
        let eq = equilibrium_state(o.a + o.c, o.b + o.c)?;
        // E_rel of the uniform state equals the oracle's relative entropy.
        let f = SpeciesFields::uniform(&grid, o.a, o.b, o.c)?;
        let e_oracle = functionals::relative_entropy(&f, &eq, &grid)?;
        worst = worst.max((sm.rel_entropy - e_oracle).abs());
    }
    let last = oracle::homogeneous_ode(2.0, 1.0, 0.01, 5.0, 20_000)?;
    let sup = (0..grid.n_cells())
        .map(|i| {
            (traj.final_fields.a[i] - last.a)
                .abs()
                .max((traj.final_fields.b[i] - last.b).abs())
                .max((traj.final_fields.c[i] - last.c).abs())
        })
        .fold(0.0, f64::max);
    s.check(sup <= 1e-6, || format!("uniform run at t = 5 deviates from the ODE by {sup:e}"));
    s.check(worst <= 1e-6, || format!("uniform run E_rel deviates from the ODE by {worst:e}"));

    for k in 0..100 {
        let (dims, cells): (&[f64], &[usize]) = match k % 3 {
            0 => (&[1.0], &[24]),
            1 => (&[1.0, 1.0], &[6, 5]),
            _ => (&[1.0, 1.0, 1.0], &[3, 4, 2]),
        };
        let domain = DomainSpec::new(dims)?;
        let grid = Grid::new(&domain, cells)?;
        let f = random_fields(&mut rng, grid.n_cells(), 0.05, 2.0);
        let (m1, m2) = conserved_masses(&f, &grid)?;
        let eq = equilibrium_state(m1, m2)?;
        let params = ModelParams::new(rng.random(), if k % 2 == 0 { 0.0 } else { 0.5 }, rng.random())?;
        let mut running = RunningIntegrals::default();
        let fast = functionals::sample(&f, 0.0, &eq, &params, &domain, &grid, &mut running)?;
        let slow = oracle::brute_force_sample(&f, 0.0, &eq, &params, &domain, &grid)?;
        let d = dissipation_under_test(&f, &params, &grid, m)?;
        let e = rel_err(fast.entropy, slow.entropy)
            .max(rel_err(fast.rel_entropy, slow.rel_entropy))
            .max(rel_err(d, slow.dissipation))
            .max(rel_err(fast.ckp_lhs, slow.ckp_lhs))
            .max(rel_err(fast.abc_defect, slow.abc_defect));
        s.check(e <= 1e-12, || format!("functionals vs brute force on ensemble {k}: {e:e}"));
    }
    Ok(s)
}

pub fn operator_suite() -> Result<SuiteResult> {
    let mut s = SuiteResult::new("operator properties");
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (lengths, cells) in [
        (vec![1.0], vec![17]),
        (vec![2.0, 0.5], vec![7, 5]),
        (vec![1.0, 1.0, 3.0], vec![4, 3, 5]),
    ] {
        let domain = DomainSpec::new(&lengths)?;
        let grid = Grid::new(&domain, &cells)?;
        let n = grid.n_cells();
        for _ in 0..20 {
            let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let lu = grid::laplacian_neumann(&u, &grid);
            let lv = grid::laplacian_neumann(&v, &grid);
            let scale = grid::inner(&u, &u, &grid) / grid.spacing().iter().map(|h| h * h).fold(f64::INFINITY, f64::min);
            let total = grid::integrate(&lu, &grid);
            s.check(total.abs() <= 1e-12 * scale, || format!("sum of Lu = {total:e} on {cells:?}"));
            let sym = grid::inner(&lu, &v, &grid) - grid::inner(&u, &lv, &grid);
            s.check(sym.abs() <= 1e-12 * scale, || format!("<Lu, v> - <u, Lv> = {sym:e} on {cells:?}"));
            let semi = grid::inner(&u, &lu, &grid);
            s.check(semi <= 1e-12 * scale, || format!("<u, Lu> = {semi:e} on {cells:?}"));
        }
    }

    let err = |n: usize| -> Result<f64> {
        let domain = DomainSpec::new(&[1.0])?;
        let grid = Grid::new(&domain, &[n])?;
        let x = grid.centers(0);
        let u: Vec<f64> = x.iter().map(|x| (PI * x).cos()).collect();
        let lu = grid::laplacian_neumann(&u, &grid);
        Ok(lu
            .iter()
            .zip(&u)
            .map(|(l, u)| (l + PI * PI * u).abs())
            .fold(0.0, f64::max))
    };
    let (e1, e2) = (err(32)?, err(64)?);
    let order = (e1 / e2).log2();
    s.check(order >= 1.9, || format!("cosine eigenmode order {order:.3}"));
    Ok(s)
}

pub fn inequality_suite(m: Mutation) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("inequality ensembles");
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for k in 0..1000 {
        let (dims, cells): (&[f64], &[usize]) = match k % 3 {
            0 => (&[1.0], &[32]),
            1 => (&[1.0, 1.0], &[8, 6]),
            _ => (&[1.0, 1.0, 1.0], &[4, 3, 3]),
        };
        let domain = DomainSpec::new(dims)?;
        let grid = Grid::new(&domain, cells)?;
        let floor = 10f64.powf(-3.0 * rng.random::<f64>());
        let amp = 5.0 * rng.random::<f64>();
        let f = random_fields(&mut rng, grid.n_cells(), floor, amp);
        let (m1, m2) = conserved_masses(&f, &grid)?;
        let eq = equilibrium_state(m1, m2)?;
        let params = match k % 4 {
            0 => ModelParams::new(1.0, 1.0, 1.0)?,
            1 => ModelParams::new(0.7, 0.0, 1.3)?,
            2 => ModelParams::new(1.2, 0.4, 0.0)?,
            _ => ModelParams::new(rng.random::<f64>() + 0.01, rng.random(), rng.random::<f64>() + 0.01)?,
        };
        let e_rel = functionals::relative_entropy(&f, &eq, &grid)?;
        let ckp = functionals::ckp_lower_bound(&f, &eq, &grid)?;
        s.check(ckp - e_rel <= 1e-10 * e_rel.abs().max(ckp), || {
            format!("CKP on ensemble {k}: {ckp:e} > {e_rel:e}")
        });
        let d = dissipation_under_test(&f, &params, &grid, m)?;
        let rhs = functionals::deviation_bound_rhs(
            functionals::sqrt_deviations(&f, &grid),
            functionals::abc_defect(&f, &grid),
            &params,
            domain.poincare_constant(),
        );
        s.check(d >= 0.0, || format!("negative dissipation {d:e} on ensemble {k}"));
        s.check(rhs - d <= 1e-10 * d.abs().max(rhs), || {
            format!("dissipation bound on ensemble {k}: D = {d:e} < {rhs:e}")
        });
    }
    Ok(s)
}

/// Runs every suite, returning the results and a printable summary.
pub fn run_all(m: Mutation) -> Result<(Vec<SuiteResult>, String)> {
    let suites = vec![
        equilibrium_suite(),
        oracle_suite(m)?,
        operator_suite()?,
        inequality_suite(m)?,
    ];
    let mut out = String::new();
    for r in &suites {
        let _ = writeln!(
            out,
            "[{}] {}: {} cases, {} failures",
            if r.pass() { "PASS" } else { "FAIL" },
            r.name,
            r.cases,
            r.failures.len()
        );
        for f in r.failures.iter().take(5) {
            let _ = writeln!(out, "    {f}");
        }
    }
    let all = suites.iter().all(SuiteResult::pass);
    let _ = writeln!(out, "overall: {}", if all { "PASS" } else { "FAIL" });
    Ok((suites, out))
}

/// `verify`: true iff every suite passes.
pub fn cmd_verify(m: Mutation) -> Result<(bool, String)> {
    let (suites, text) = run_all(m)?;
    Ok((suites.iter().all(SuiteResult::pass), text))
}
