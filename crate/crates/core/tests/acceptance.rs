//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rdentropy::analysis::{self, INEQUALITY_SLACK, MASS_TOLERANCE};
use rdentropy::cli::{self, commands, io, presets, RunConfig, RunStatus};
use rdentropy::functionals::{self, FunctionalSample};
use rdentropy::grid::{self, Grid, SpeciesFields};
use rdentropy::model::{conserved_masses, equilibrium_state, DomainSpec, ModelParams, Mode};
use rdentropy::oracle;
use rdentropy::solver::{self, reaction_substep, SolverConfig, Stepper};

/// Criteria that cannot hold as stated; see the project notes. They are
/// still evaluated and reported, and the attainable parts are asserted.
const KNOWN_INFEASIBLE: &[usize] = &[5];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

struct PresetRun {
    config: RunConfig,
    samples: Vec<FunctionalSample>,
    seconds: f64,
}

fn run_preset(name: &str) -> PresetRun {
    let config = presets::preset(name).expect("preset");
    let (domain, grid) = config.grid().unwrap();
    let start = Instant::now();
    let traj = solver::run(
        &config.initial_fields(&grid).unwrap(),
        &config.params().unwrap(),
        &grid,
        &domain,
        &config.solver_config().unwrap(),
    )
    .unwrap();
    PresetRun {
        config,
        samples: traj.samples,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn rel_err(x: f64, y: f64) -> f64 {
    let s = x.abs().max(y.abs());
    if s == 0.0 {
        0.0
    } else {
        (x - y).abs() / s
    }
}

fn c1_equilibrium() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let m1 = 10.0 * (1.0 - rng.random::<f64>());
        let m2 = 10.0 * (1.0 - rng.random::<f64>());
        let e = equilibrium_state(m1, m2).unwrap();
        worst = worst
            .max(rel_err(e.a_inf + e.c_inf, m1))
            .max(rel_err(e.b_inf + e.c_inf, m2))
            .max(rel_err(e.a_inf * e.b_inf, e.c_inf));
    }
    let s1 = rel_err(equilibrium_state(1.0, 1.0).unwrap().c_inf, (3.0 - 5f64.sqrt()) / 2.0);
    let s2 = rel_err(equilibrium_state(2.0, 1.0).unwrap().c_inf, 2.0 - 2f64.sqrt());
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        worst <= 1e-12 && s1 <= 1e-12 && s2 <= 1e-12 && secs < 1.0,
        format!("max relative defect {worst:.2e}, specific values {s1:.1e}/{s2:.1e}, {secs:.3} s"),
    )
}

fn c2_mass(runs: &BTreeMap<&str, PresetRun>) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["full_1d", "db0_1d", "dc0_1d"] {
        let r = &runs[name];
        let drift = analysis::max_mass_drift(&r.samples);
        let ok = drift <= MASS_TOLERANCE && r.seconds <= 30.0 && r.config.cells == [128] && r.config.dt == 1e-3;
        pass &= ok;
        parts.push(format!("{name}: drift {drift:.2e} in {:.1} s", r.seconds));
    }
    Outcome::new(pass, parts.join("; "))
}

fn c3_oracle() -> Outcome {
    let domain = DomainSpec::new(&[1.0, 1.0]).unwrap();
    let grid = Grid::new(&domain, &[6, 5]).unwrap();
    let params = ModelParams::new(0.7, 0.0, 1.3).unwrap();
    let dt = 0.01;
    let cfg = SolverConfig::new(dt, 5.0, 10).unwrap();
    let mut stepper = Stepper::new(&grid, params, dt, &cfg);
    let mut f = SpeciesFields::uniform(&grid, 2.0, 1.0, 0.01).unwrap();
    let mut pde_worst: f64 = 0.0;
    for k in 1..=500 {
        f = stepper.step(&f).unwrap();
        if k % 10 == 0 {
            let o = oracle::homogeneous_ode(2.0, 1.0, 0.01, k as f64 * dt, 20_000).unwrap();
            for i in 0..grid.n_cells() {
                pde_worst = pde_worst
                    .max((f.a[i] - o.a).abs())
                    .max((f.b[i] - o.b).abs())
                    .max((f.c[i] - o.c).abs());
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut step_worst: f64 = 0.0;
    for _ in 0..100 {
        let (a, b, c) = (
            0.01 + 5.0 * rng.random::<f64>(),
            0.01 + 5.0 * rng.random::<f64>(),
            0.01 + 5.0 * rng.random::<f64>(),
        );
        let r = reaction_substep(&SpeciesFields::new(vec![a], vec![b], vec![c]).unwrap(), 0.1);
        let o = oracle::homogeneous_ode(a, b, c, 0.1, 10_000).unwrap();
        step_worst = step_worst
            .max((r.a[0] - o.a).abs())
            .max((r.b[0] - o.b).abs())
            .max((r.c[0] - o.c).abs());
    }
    Outcome::new(
        pde_worst <= 1e-6 && step_worst <= 1e-10,
        format!("uniform PDE vs ODE {pde_worst:.2e} (<= 1e-6), reaction step vs RK4 {step_worst:.2e} (<= 1e-10)"),
    )
}

fn balance_of(config: &RunConfig) -> f64 {
    let (domain, grid) = config.grid().unwrap();
    let traj = solver::run(
        &config.initial_fields(&grid).unwrap(),
        &config.params().unwrap(),
        &grid,
        &domain,
        &config.solver_config().unwrap(),
    )
    .unwrap();
    analysis::entropy_balance_audit(&traj).unwrap()
}

fn c4_entropy(runs: &BTreeMap<&str, PresetRun>) -> Outcome {
    let mono: usize = runs.values().map(|r| analysis::monotonicity_violations(&r.samples)).sum();
    let base = presets::preset("full_1d").unwrap();
    let coarse = analysis::entropy_balance_samples(&runs["full_1d"].samples).unwrap();
    let mut fine_cfg = base.clone();
    fine_cfg.dt = base.dt / 2.0;
    fine_cfg.t_end = 10.0;
    let mut short = base.clone();
    short.t_end = 10.0;
    // the halved run keeps record_every, so the record spacing halves too
    let short_res = balance_of(&short);
    let fine_res = balance_of(&fine_cfg);
    let ratio = short_res / fine_res;
    Outcome::new(
        mono == 0 && coarse <= 0.01 && ratio >= 3.0,
        format!(
            "{mono} monotonicity violations over {} presets; balance residual {coarse:.2e}; halved dt and spacing {short_res:.2e} -> {fine_res:.2e} ({ratio:.2}x)",
            runs.len()
        ),
    )
}

fn c5_inequalities(runs: &BTreeMap<&str, PresetRun>) -> (Outcome, bool) {
    let mut ckp = 0;
    let mut analytic = 0;
    let mut discrete = 0;
    let mut worst_rel: f64 = 0.0;
    for r in runs.values() {
        let (domain, grid) = r.config.grid().unwrap();
        let params = r.config.params().unwrap();
        ckp += analysis::ckp_violations(&r.samples);
        analytic += analysis::bound_violations(&r.samples, Some((&params, domain.poincare_constant())));
        discrete += analysis::bound_violations(&r.samples, Some((&params, 1.0 / grid.spectral_gap())));
        for s in &r.samples {
            let rhs = functionals::deviation_bound_rhs(s.dev_sq, s.abc_defect, &params, domain.poincare_constant());
            worst_rel = worst_rel.max((rhs - s.dissipation) / s.dissipation.max(rhs));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut ens_ckp, mut ens_bound) = (0, 0);
    for k in 0..1000 {
        let (lengths, cells): (&[f64], &[usize]) = match k % 3 {
            0 => (&[1.0], &[40]),
            1 => (&[1.0, 1.0], &[9, 7]),
            _ => (&[1.0, 1.0, 1.0], &[4, 4, 3]),
        };
        let domain = DomainSpec::new(lengths).unwrap();
        let grid = Grid::new(&domain, cells).unwrap();
        let n = grid.n_cells();
        let floor = 10f64.powf(-4.0 * rng.random::<f64>());
        let amp = 10.0 * rng.random::<f64>();
        let mut draw = || (0..n).map(|_| floor + amp * rng.random::<f64>()).collect::<Vec<f64>>();
        let f = SpeciesFields::new(draw(), draw(), draw()).unwrap();
        let params = match k % 3 {
            0 => ModelParams::new(1.0, 1.0, 1.0),
            1 => ModelParams::new(0.3, 0.0, 2.0),
            _ => ModelParams::new(2.0, 0.5, 0.0),
        }
        .unwrap();
        let (m1, m2) = conserved_masses(&f, &grid).unwrap();
        let eq = equilibrium_state(m1, m2).unwrap();
        let e = functionals::relative_entropy(&f, &eq, &grid).unwrap();
        let lhs = functionals::ckp_lower_bound(&f, &eq, &grid).unwrap();
        if lhs - e > INEQUALITY_SLACK * e.max(lhs) {
            ens_ckp += 1;
        }
        let (d, rhs) = functionals::dissipation_deviation_bound(&f, &params, &domain, &grid).unwrap();
        if rhs - d > INEQUALITY_SLACK * d.max(rhs) {
            ens_bound += 1;
        }
    }
    let attainable = ckp == 0 && discrete == 0 && ens_ckp == 0 && ens_bound == 0;
    (
        Outcome::new(
            attainable && analytic == 0,
            format!(
                "presets: CKP {ckp}, bound with analytic P {analytic} (worst relative shortfall {worst_rel:.2e}), with discrete P {discrete}; random ensembles: CKP {ens_ckp}, bound {ens_bound}"
            ),
        ),
        attainable,
    )
}

fn c6_decay(runs: &BTreeMap<&str, PresetRun>) -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, mode, dim) in [
        ("db0_1d", Mode::Db0, 1),
        ("dc0_1d", Mode::Dc0, 1),
        ("dc0_2d", Mode::Dc0, 2),
        ("full_1d", Mode::Full, 1),
    ] {
        let s = &runs[name].samples;
        let t: Vec<f64> = s.iter().map(|s| s.t).collect();
        let e: Vec<f64> = s.iter().map(|s| s.rel_entropy).collect();
        let fit = analysis::fit_subexponential(&t, &e).unwrap();
        let env = analysis::check_theorem_envelope(&fit, mode, dim).unwrap();
        pass &= env.pass;
        parts.push(format!("{name}: alpha {:.2} >= {:.3}", fit.alpha, env.theoretical_alpha));
    }
    let seconds: f64 = ["db0_1d", "dc0_1d", "dc0_2d", "full_1d"].iter().map(|n| runs[n].seconds).sum::<f64>()
        + start.elapsed().as_secs_f64();
    pass &= seconds <= 120.0;
    Outcome::new(pass, format!("{}; {seconds:.1} s", parts.join(", ")))
}

fn c7_growth(runs: &BTreeMap<&str, PresetRun>) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    let dc = analysis::growth_diagnostics(&runs["dc0_1d"].samples, Mode::Dc0, 1).unwrap();
    for label in ["a_l32", "c_l3", "int_a2ac"] {
        match dc.iter().find(|g| g.label == label) {
            Some(g) => {
                pass &= g.fitted_constant.is_finite();
                parts.push(format!("{label} K={:.3} at t={}", g.fitted_constant, g.max_ratio_time));
            }
            None => pass = false,
        }
    }
    let db = analysis::growth_diagnostics(&runs["db0_1d"].samples, Mode::Db0, 1).unwrap();
    match db.iter().find(|g| g.label == "b_l32") {
        Some(g) => {
            pass &= g.fitted_constant.is_finite() && (g.exponent_target - 5.0 / 6.0).abs() < 1e-15;
            parts.push(format!("b_l32 K={:.3} at t={}", g.fitted_constant, g.max_ratio_time));
        }
        None => pass = false,
    }
    Outcome::new(pass, parts.join(", "))
}

fn strang_error(dt: f64, reference: &SpeciesFields, t_end: f64) -> f64 {
    let cfg_text = presets::preset("full_1d").unwrap();
    let (_, grid) = cfg_text.grid().unwrap();
    let params = cfg_text.params().unwrap();
    let cfg = SolverConfig::new(dt, t_end, 1).unwrap();
    let mut stepper = Stepper::new(&grid, params, dt, &cfg);
    let mut f = cfg_text.initial_fields(&grid).unwrap();
    for _ in 0..cfg.n_steps().unwrap() {
        f = stepper.step(&f).unwrap();
    }
    f.max_abs_diff(reference)
}

fn c8_discretization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    let mut semidef = true;
    for (lengths, cells) in [(vec![1.0], vec![33]), (vec![1.0, 2.0], vec![8, 9]), (vec![1.0, 1.0, 0.5], vec![5, 4, 3])] {
        let domain = DomainSpec::new(&lengths).unwrap();
        let grid = Grid::new(&domain, &cells).unwrap();
        let n = grid.n_cells();
        for _ in 0..20 {
            let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let lu = grid::laplacian_neumann(&u, &grid);
            let lv = grid::laplacian_neumann(&v, &grid);
            let scale = grid::inner(&lu, &lu, &grid).sqrt() * grid::inner(&v, &v, &grid).sqrt();
            worst = worst
                .max(grid::integrate(&lu, &grid).abs() / grid::integrate(&lu.iter().map(|x| x.abs()).collect::<Vec<_>>(), &grid))
                .max((grid::inner(&lu, &v, &grid) - grid::inner(&u, &lv, &grid)).abs() / scale);
            semidef &= grid::inner(&u, &lu, &grid) <= 1e-12 * scale;
        }
    }
    let mode_err = |n: usize| {
        let grid = Grid::new(&DomainSpec::new(&[1.0]).unwrap(), &[n]).unwrap();
        let u: Vec<f64> = grid.centers(0).iter().map(|x| (PI * x).cos()).collect();
        grid::laplacian_neumann(&u, &grid)
            .iter()
            .zip(&u)
            .map(|(l, u)| (l + PI * PI * u).abs())
            .fold(0.0, f64::max)
    };
    let space_order = (mode_err(64) / mode_err(128)).log2();

    let t_end = 1.0;
    let base = presets::preset("full_1d").unwrap();
    let (_, grid) = base.grid().unwrap();
    let ref_dt = 0.1 / 256.0;
    let cfg = SolverConfig::new(ref_dt, t_end, 1).unwrap();
    let mut st = Stepper::new(&grid, base.params().unwrap(), ref_dt, &cfg);
    let mut reference = base.initial_fields(&grid).unwrap();
    for _ in 0..cfg.n_steps().unwrap() {
        reference = st.step(&reference).unwrap();
    }
    let errs: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&dt| strang_error(dt, &reference, t_end)).collect();
    let time_order = (errs[1] / errs[2]).log2().min((errs[0] / errs[1]).log2());
    Outcome::new(
        worst <= 1e-12 && semidef && space_order >= 1.9 && time_order >= 1.9,
        format!(
            "conservation/symmetry defect {worst:.1e}, semidefinite {semidef}, eigenmode order {space_order:.3}, Strang order {time_order:.3}"
        ),
    )
}

fn c9_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = presets::preset("dc0_1d").unwrap();
    cfg.t_end = 5.0;
    let mut bytes = Vec::new();
    for k in 0..2 {
        cfg.out_dir = dir.path().join(format!("run{k}"));
        match cli::cmd_run(&cfg).unwrap() {
            RunStatus::Completed { .. } => {}
            RunStatus::BlewUp { error, .. } => panic!("run failed: {error}"),
        }
        bytes.push(fs::read(cfg.out_dir.join(io::TIMESERIES_FILE)).unwrap());
    }
    let same = bytes[0] == bytes[1];
    let rows = String::from_utf8(bytes[0].clone()).unwrap().lines().count();
    let report = commands::cmd_analyze(&dir.path().join("run0").join(io::TIMESERIES_FILE), Mode::Dc0, 1);
    Outcome::new(
        same && rows > 1 && report.is_ok(),
        format!("two runs of {} bytes, identical: {same}", bytes[0].len()),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let runs: BTreeMap<&str, PresetRun> = presets::NAMES.iter().map(|&n| (n, run_preset(n))).collect();
    let (c5, c5_attainable) = c5_inequalities(&runs);
    let results = [
        (1, "equilibrium algebra", c1_equilibrium()),
        (2, "mass conservation", c2_mass(&runs)),
        (3, "oracle equivalence", c3_oracle()),
        (4, "entropy monotonicity and balance", c4_entropy(&runs)),
        (5, "inequality suites", c5),
        (6, "decay envelopes", c6_decay(&runs)),
        (7, "growth diagnostics", c7_growth(&runs)),
        (8, "discretization properties", c8_discretization()),
        (9, "determinism", c9_determinism()),
    ];
    let mut ok = c5_attainable;
    for (k, name, o) in &results {
        let known = KNOWN_INFEASIBLE.contains(k);
        let tag = match (o.pass, known) {
            (true, false) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (known infeasible)",
            (true, true) => "PASS (expected failure did not occur)",
        };
        println!("criterion {k} [{tag}] {name}: {}", o.detail);
        ok &= o.pass != known;
    }
    println!("acceptance finished in {:.1} s", start.elapsed().as_secs_f64());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
