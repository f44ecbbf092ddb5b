use std::fs;

use rdentropy::cli::{self, commands, io, parse_config, InitSpec};
use rdentropy::Error;

#[test]
fn meta_echo_reparses_to_the_same_config() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = cli::preset("db0_2d").unwrap();
    cfg.t_end = 0.5;
    cfg.init = InitSpec::RandomPositive { floor: 0.1, amp: 1.0 };
    cfg.out_dir = dir.path().join("o");
    assert!(cli::cmd_run(&cfg).unwrap().success());
    let meta = fs::read_to_string(cfg.out_dir.join(io::META_FILE)).unwrap();
    assert_eq!(commands::parse_meta_config(&meta).unwrap(), cfg);
}

#[test]
fn snapshot_file_round_trips_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = cli::preset("dc0_3d").unwrap();
    cfg.t_end = 0.2;
    cfg.out_dir = dir.path().join("o");
    assert!(cli::cmd_run(&cfg).unwrap().success());
    let path = cfg.out_dir.join(io::SNAPSHOT_FILE);
    let text = fs::read_to_string(&path).unwrap();
    let snap = io::read_snapshot(&path).unwrap();
    assert_eq!(snap.cells, vec![10, 10, 10]);
    let domain = rdentropy::DomainSpec::new(&snap.lengths).unwrap();
    let grid = rdentropy::Grid::new(&domain, &snap.cells).unwrap();
    let again = dir.path().join("again.snap");
    io::write_snapshot(&again, &grid, &snap.fields).unwrap();
    assert_eq!(fs::read_to_string(again).unwrap(), text);
}

#[test]
fn timeseries_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = cli::preset("full_1d").unwrap();
    cfg.t_end = 1.0;
    cfg.out_dir = dir.path().join("o");
    let status = cli::cmd_run(&cfg).unwrap();
    let cli::RunStatus::Completed { trajectory, .. } = status else { panic!("run failed") };
    let back = io::read_timeseries(&cfg.out_dir.join(io::TIMESERIES_FILE)).unwrap();
    assert_eq!(back, trajectory.samples);
}

#[test]
fn config_grammar() {
    let text = "# comment\ndim=2\ncells=16,8\nlengths=1,0.5\nd_a=1\nd_b=1\nd_c=0\ninit=random_positive 0.01 2\ndt=0.01\nt_end=1\nrecord_every=5\n";
    let cfg = parse_config(text).unwrap();
    assert_eq!(cfg.cells, vec![16, 8]);
    assert_eq!(cfg.linsolve_tol, 1e-12);
    assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg);
    assert!(matches!(parse_config(&text.replace("dim=2", "dim=2\ndim=2")), Err(Error::Config { line: 3, .. })));
    assert!(matches!(parse_config(&text.replace("cells=16,8", "cells=16")), Err(Error::Config { .. })));
    assert!(matches!(parse_config(&text.replace("t_end=1", "t_end=1.005")), Err(Error::Config { .. })));
}
