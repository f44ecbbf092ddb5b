//! Built-in run configurations on unit boxes.

use std::path::PathBuf;

use super::config::{InitSpec, RunConfig};

pub const NAMES: [&str; 6] = ["full_1d", "db0_1d", "db0_2d", "dc0_1d", "dc0_2d", "dc0_3d"];

const D: f64 = 0.05;

fn base(dim: usize, n: usize, dt: f64, t_end: f64, record_every: usize, ds: [f64; 3], name: &str) -> RunConfig {
    RunConfig {
        dim,
        cells: vec![n; dim],
        lengths: vec![1.0; dim],
        d_a: ds[0],
        d_b: ds[1],
        d_c: ds[2],
        init: InitSpec::CosineBump { amp: 0.5 },
        dt,
        t_end,
        record_every,
        linsolve_tol: 1e-12,
        out_dir: PathBuf::from(format!("out/{name}")),
        seed: 7,
    }
}

pub fn preset(name: &str) -> Option<RunConfig> {
    let cfg = match name {
        "full_1d" => base(1, 128, 1e-3, 50.0, 100, [D, D, D], name),
        "db0_1d" => base(1, 128, 1e-3, 50.0, 100, [D, 0.0, D], name),
        "dc0_1d" => base(1, 128, 1e-3, 50.0, 100, [D, D, 0.0], name),
        "db0_2d" => base(2, 32, 1e-2, 50.0, 10, [D, 0.0, D], name),
        "dc0_2d" => base(2, 32, 1e-2, 50.0, 10, [D, D, 0.0], name),
        "dc0_3d" => base(3, 10, 1e-2, 30.0, 10, [D, D, 0.0], name),
        _ => return None,
    };
    Some(cfg)
}
