//! `key=value` run configuration.

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Grid, SpeciesFields};
use crate::model::{equilibrium_state, DomainSpec, ModelParams};
use crate::solver::SolverConfig;

/// Initial-condition recipe.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    /// Constant fields.
    Uniform { a: f64, b: f64, c: f64 },
    /// Perturbation of the equilibrium for masses `(2, 1)` by the cosine
    /// profile `phi = mean_i cos(pi x_i / L_i)`:
    /// `a = a_inf (1 + amp phi)`, `b = b_inf (1 + amp phi)`, `c = ab`.
    CosineBump { amp: f64 },
    /// Independent `floor + amp * U(0, 1)` per cell and species, drawn
    /// from the run seed.
    RandomPositive { floor: f64, amp: f64 },
}

impl InitSpec {
    fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut it = text.split_whitespace();
        let name = it.next().ok_or("empty init spec")?;
        let nums: Vec<f64> = it
            .map(|t| t.parse::<f64>().map_err(|_| format!("malformed number `{t}` in init")))
            .collect::<std::result::Result<_, _>>()?;
        let want = |n: usize| {
            if nums.len() == n {
                Ok(())
            } else {
                Err(format!("init `{name}` takes {n} numbers, got {}", nums.len()))
            }
        };
        let spec = match name {
            "uniform" => {
                want(3)?;
                InitSpec::Uniform {
                    a: nums[0],
                    b: nums[1],
                    c: nums[2],
                }
            }
            "cosine_bump" => {
                want(1)?;
                InitSpec::CosineBump { amp: nums[0] }
            }
            "random_positive" => {
                want(2)?;
                InitSpec::RandomPositive {
                    floor: nums[0],
                    amp: nums[1],
                }
            }
            other => return Err(format!("unknown init preset `{other}`")),
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let ok = match *self {
            InitSpec::Uniform { a, b, c } => [a, b, c].iter().all(|v| v.is_finite() && *v > 0.0),
            InitSpec::CosineBump { amp } => amp.is_finite() && amp.abs() < 1.0,
            InitSpec::RandomPositive { floor, amp } => {
                floor.is_finite() && floor > 0.0 && amp.is_finite() && amp >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(format!("init `{}` has out-of-range parameters", self.to_text()))
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            InitSpec::Uniform { a, b, c } => format!("uniform {a} {b} {c}"),
            InitSpec::CosineBump { amp } => format!("cosine_bump {amp}"),
            InitSpec::RandomPositive { floor, amp } => format!("random_positive {floor} {amp}"),
        }
    }

    pub fn build(&self, grid: &Grid, seed: u64) -> Result<SpeciesFields> {
        let n = grid.n_cells();
        match *self {
            InitSpec::Uniform { a, b, c } => SpeciesFields::uniform(grid, a, b, c),
            InitSpec::CosineBump { amp } => {
                let eq = equilibrium_state(2.0, 1.0)?;
                let mut phi = vec![0.0; n];
                let dim = grid.dimension();
                for axis in 0..dim {
                    let l = grid.lengths()[axis];
                    for (p, x) in phi.iter_mut().zip(grid.centers(axis)) {
                        *p += (std::f64::consts::PI * x / l).cos() / dim as f64;
                    }
                }
                let a: Vec<f64> = phi.iter().map(|p| eq.a_inf * (1.0 + amp * p)).collect();
                let b: Vec<f64> = phi.iter().map(|p| eq.b_inf * (1.0 + amp * p)).collect();
                let c: Vec<f64> = a.iter().zip(&b).map(|(a, b)| a * b).collect();
                SpeciesFields::new(a, b, c)
            }
            InitSpec::RandomPositive { floor, amp } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut draw = || -> Vec<f64> { (0..n).map(|_| floor + amp * rng.random::<f64>()).collect() };
                let a = draw();
                let b = draw();
                let c = draw();
                SpeciesFields::new(a, b, c)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub cells: Vec<usize>,
    pub lengths: Vec<f64>,
    pub d_a: f64,
    pub d_b: f64,
    pub d_c: f64,
    pub init: InitSpec,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub linsolve_tol: f64,
    pub out_dir: PathBuf,
    pub seed: u64,
}

pub const KEYS: [&str; 13] = [
    "dim",
    "cells",
    "lengths",
    "d_a",
    "d_b",
    "d_c",
    "init",
    "dt",
    "t_end",
    "record_every",
    "linsolve_tol",
    "out_dir",
    "seed",
];

fn list<T: std::str::FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| format!("malformed number `{t}`")))
        .collect()
}

fn num(v: &str) -> std::result::Result<f64, String> {
    v.trim().parse::<f64>().map_err(|_| format!("malformed number `{v}`"))
}

fn positive(v: &str) -> std::result::Result<f64, String> {
    let x = num(v)?;
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(format!("`{v}` must be positive"))
    }
}

fn nonnegative(v: &str) -> std::result::Result<f64, String> {
    let x = num(v)?;
    if x.is_finite() && x >= 0.0 {
        Ok(x)
    } else {
        Err(format!("`{v}` must be nonnegative"))
    }
}

#[derive(Default)]
struct Partial {
    dim: Option<usize>,
    cells: Option<Vec<usize>>,
    lengths: Option<Vec<f64>>,
    d_a: Option<f64>,
    d_b: Option<f64>,
    d_c: Option<f64>,
    init: Option<InitSpec>,
    dt: Option<f64>,
    t_end: Option<f64>,
    record_every: Option<usize>,
    linsolve_tol: Option<f64>,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
}

fn missing(key: &str, line: usize) -> Error {
    Error::Config {
        line,
        msg: format!("missing required key `{key}`"),
    }
}

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// ignored. `linsolve_tol`, `out_dir` and `seed` default to `1e-12`, `out`
/// and `0`; every other key is required.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut p = Partial::default();
    let mut seen = std::collections::HashSet::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Config { line: line_no, msg };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key=value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(err(format!("unknown key `{key}`")));
        }
        if !seen.insert(key.to_string()) {
            return Err(err(format!("duplicate key `{key}`")));
        }
        match key {
            "dim" => {
                let d: usize = value.parse().map_err(|_| err(format!("malformed integer `{value}`")))?;
                if !(1..=3).contains(&d) {
                    return Err(err(format!("dim must be 1, 2 or 3 (got {d})")));
                }
                p.dim = Some(d);
            }
            "cells" => {
                let c: Vec<usize> = list(value).map_err(err)?;
                if c.is_empty() || c.contains(&0) {
                    return Err(err("cells must be positive integers".into()));
                }
                p.cells = Some(c);
            }
            "lengths" => {
                let l: Vec<f64> = list(value).map_err(err)?;
                if l.is_empty() || l.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    return Err(err("lengths must be positive".into()));
                }
                p.lengths = Some(l);
            }
            "d_a" => p.d_a = Some(positive(value).map_err(err)?),
            "d_b" => p.d_b = Some(nonnegative(value).map_err(err)?),
            "d_c" => p.d_c = Some(nonnegative(value).map_err(err)?),
            "init" => p.init = Some(InitSpec::parse(value).map_err(err)?),
            "dt" => p.dt = Some(positive(value).map_err(err)?),
            "t_end" => p.t_end = Some(positive(value).map_err(err)?),
            "record_every" => {
                let r: usize = value.parse().map_err(|_| err(format!("malformed integer `{value}`")))?;
                if r == 0 {
                    return Err(err("record_every must be positive".into()));
                }
                p.record_every = Some(r);
            }
            "linsolve_tol" => {
                let t = positive(value).map_err(err)?;
                if t >= 1e-6 {
                    return Err(err("linsolve_tol must be below 1e-6".into()));
                }
                p.linsolve_tol = Some(t);
            }
            "out_dir" => {
                if value.is_empty() {
                    return Err(err("out_dir is empty".into()));
                }
                p.out_dir = Some(PathBuf::from(value));
            }
            "seed" => p.seed = Some(value.parse().map_err(|_| err(format!("malformed integer `{value}`")))?),
            _ => unreachable!(),
        }
    }
    let end = last_line + 1;
    let dim = p.dim.ok_or_else(|| missing("dim", end))?;
    let cells = p.cells.ok_or_else(|| missing("cells", end))?;
    let lengths = p.lengths.ok_or_else(|| missing("lengths", end))?;
    if cells.len() != dim || lengths.len() != dim {
        return Err(Error::Config {
            line: end,
            msg: format!("cells and lengths need {dim} entries each"),
        });
    }
    let cfg = RunConfig {
        dim,
        cells,
        lengths,
        d_a: p.d_a.ok_or_else(|| missing("d_a", end))?,
        d_b: p.d_b.ok_or_else(|| missing("d_b", end))?,
        d_c: p.d_c.ok_or_else(|| missing("d_c", end))?,
        init: p.init.ok_or_else(|| missing("init", end))?,
        dt: p.dt.ok_or_else(|| missing("dt", end))?,
        t_end: p.t_end.ok_or_else(|| missing("t_end", end))?,
        record_every: p.record_every.ok_or_else(|| missing("record_every", end))?,
        linsolve_tol: p.linsolve_tol.unwrap_or(1e-12),
        out_dir: p.out_dir.unwrap_or_else(|| PathBuf::from("out")),
        seed: p.seed.unwrap_or(0),
    };
    cfg.params().map_err(|e| Error::Config { line: end, msg: e.to_string() })?;
    cfg.solver_config().map_err(|e| Error::Config { line: end, msg: e.to_string() })?;
    Ok(cfg)
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Inverse of [`parse_config`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dim={}", self.dim);
        let _ = writeln!(s, "cells={}", join(&self.cells));
        let _ = writeln!(s, "lengths={}", join(&self.lengths));
        let _ = writeln!(s, "d_a={}", self.d_a);
        let _ = writeln!(s, "d_b={}", self.d_b);
        let _ = writeln!(s, "d_c={}", self.d_c);
        let _ = writeln!(s, "init={}", self.init.to_text());
        let _ = writeln!(s, "dt={}", self.dt);
        let _ = writeln!(s, "t_end={}", self.t_end);
        let _ = writeln!(s, "record_every={}", self.record_every);
        let _ = writeln!(s, "linsolve_tol={}", self.linsolve_tol);
        let _ = writeln!(s, "out_dir={}", self.out_dir.display());
        let _ = writeln!(s, "seed={}", self.seed);
        s
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        DomainSpec::new(&self.lengths)
    }

    pub fn grid(&self) -> Result<(DomainSpec, Grid)> {
        let d = self.domain()?;
        let g = Grid::new(&d, &self.cells)?;
        Ok((d, g))
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.d_a, self.d_b, self.d_c)
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let mut s = SolverConfig::new(self.dt, self.t_end, self.record_every)?;
        s.linsolve_tol = self.linsolve_tol;
        s.validate()?;
        s.n_steps()?;
        Ok(s)
    }

    pub fn initial_fields(&self, grid: &Grid) -> Result<SpeciesFields> {
        self.init.build(grid, self.seed)
    }
}
