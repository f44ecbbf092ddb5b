use proptest::prelude::*;

use rdentropy::grid::{Grid, SpeciesFields};
use rdentropy::model::{conserved_masses, DomainSpec, ModelParams};
use rdentropy::solver::{DiffusionScheme, SolverConfig, Stepper};
use rdentropy::{cli, functionals};

fn integrate(scheme: DiffusionScheme, dt: f64, t_end: f64) -> SpeciesFields {
    let cfg_file = cli::preset("full_1d").unwrap();
    let (_, grid) = cfg_file.grid().unwrap();
    let mut cfg = SolverConfig::new(dt, t_end, 1).unwrap();
    cfg.diffusion = scheme;
    let mut st = Stepper::new(&grid, cfg_file.params().unwrap(), dt, &cfg);
    let mut f = cfg_file.initial_fields(&grid).unwrap();
    for _ in 0..cfg.n_steps().unwrap() {
        f = st.step(&f).unwrap();
    }
    f
}

fn observed_order(scheme: DiffusionScheme) -> f64 {
    let reference = integrate(scheme, 1e-3, 1.0);
    let e1 = integrate(scheme, 0.1, 1.0).max_abs_diff(&reference);
    let e2 = integrate(scheme, 0.05, 1.0).max_abs_diff(&reference);
    (e1 / e2).log2()
}

#[test]
fn exact_diffusion_strang_is_second_order() {
    let p = observed_order(DiffusionScheme::Exact);
    println!("exact-diffusion Strang order {p:.3}");
    assert!(p > 1.9);
}

#[test]
fn backward_euler_strang_is_first_order() {
    let p = observed_order(DiffusionScheme::BackwardEuler);
    println!("backward-Euler Strang order {p:.3}");
    assert!((0.8..1.3).contains(&p), "order {p}");
}

#[test]
fn schemes_agree_as_dt_shrinks() {
    let a = integrate(DiffusionScheme::Exact, 1e-3, 0.5);
    let b = integrate(DiffusionScheme::BackwardEuler, 1e-3, 0.5);
    assert!(a.max_abs_diff(&b) < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn step_keeps_positivity_mass_and_entropy_order(
        vals in proptest::collection::vec(1e-6f64..5.0, 3 * 24),
        dt in 1e-3f64..0.5,
        d in (0.0f64..2.0, 0.0f64..2.0, 0.0f64..2.0),
        be in any::<bool>(),
    ) {
        prop_assume!(d.0 > 0.0 && (d.1 > 0.0 || d.2 > 0.0));
        let domain = DomainSpec::new(&[1.0, 2.0]).unwrap();
        let grid = Grid::new(&domain, &[4, 6]).unwrap();
        let f = SpeciesFields::new(vals[..24].to_vec(), vals[24..48].to_vec(), vals[48..].to_vec()).unwrap();
        let params = ModelParams::new(d.0, d.1, d.2).unwrap();
        let mut cfg = SolverConfig::new(dt, 10.0 * dt, 1).unwrap();
        if be {
            cfg.diffusion = DiffusionScheme::BackwardEuler;
        }
        let g = Stepper::new(&grid, params, dt, &cfg).step(&f).unwrap();
        prop_assert!(g.check_positive().is_ok());
        let (m1, m2) = conserved_masses(&f, &grid).unwrap();
        let (n1, n2) = conserved_masses(&g, &grid).unwrap();
        prop_assert!((m1 - n1).abs() <= 1e-12 * m1);
        prop_assert!((m2 - n2).abs() <= 1e-12 * m2);
        let eq = rdentropy::equilibrium_state(m1, m2).unwrap();
        let e0 = functionals::relative_entropy(&f, &eq, &grid).unwrap();
        let e1 = functionals::relative_entropy(&g, &eq, &grid).unwrap();
        prop_assert!(e1 <= e0 + 1e-12 * e0.max(1.0));
    }
}
