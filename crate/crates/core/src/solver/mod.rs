//! Strang splitting: half diffusion, exact reaction, half diffusion.

mod linsolve;
mod reaction;
mod spectral;

pub use linsolve::{solve_implicit_diffusion, CgOutcome};
pub use reaction::{reaction_cell, reaction_substep, riccati_roots};
pub use spectral::{neumann_eigenvalue, neumann_mode, HeatPropagator};

use crate::error::{Error, Result};
use crate::functionals::{self, FunctionalSample, RunningIntegrals};
use crate::grid::{check_positive, Grid, SpeciesFields};
use crate::model::{conserved_masses, equilibrium_state, DomainSpec, ModelParams};

/// How the diffusion half-steps are advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffusionScheme {
    /// `exp(tau d L)` applied through the cosine eigenbasis of `L`.
    #[default]
    Exact,
    /// One backward-Euler step `(I - tau d L) v = u` solved by conjugate
    /// gradients. Positive and conservative but first order in time.
    BackwardEuler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub linsolve_tol: f64,
    pub linsolve_max_iter: usize,
    pub diffusion: DiffusionScheme,
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64, record_every: usize) -> Result<Self> {
        let cfg = Self {
            dt,
            t_end,
            record_every,
            linsolve_tol: 1e-12,
            linsolve_max_iter: 10_000,
            diffusion: DiffusionScheme::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end.is_finite() && self.dt < self.t_end) {
            return Err(Error::InvalidArgument(format!(
                "t_end = {} must exceed dt = {}",
                self.t_end, self.dt
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument("record_every must be positive".into()));
        }
        if !(self.linsolve_tol > 0.0 && self.linsolve_tol < 1e-6) {
            return Err(Error::InvalidArgument(format!(
                "linsolve_tol = {} must lie in (0, 1e-6)",
                self.linsolve_tol
            )));
        }
        if self.linsolve_max_iter == 0 {
            return Err(Error::InvalidArgument("linsolve_max_iter must be positive".into()));
        }
        Ok(())
    }

    /// Number of steps; `t_end` must be an integer multiple of `dt`.
    pub fn n_steps(&self) -> Result<usize> {
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end {
            return Err(Error::InvalidArgument(format!(
                "t_end = {} is not a multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(n as usize)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverStats {
    pub steps: usize,
    pub linear_solves: usize,
    pub cg_iterations: usize,
    pub max_cg_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub samples: Vec<FunctionalSample>,
    pub final_fields: SpeciesFields,
    pub stats: SolverStats,
}

/// Backward-Euler diffusion over `dt`: solves `(I - dt d L) v = u`.
pub fn diffusion_substep(u: &[f64], d: f64, dt: f64, grid: &Grid, cfg: &SolverConfig) -> Result<Vec<f64>> {
    check_positive(u)?;
    if d == 0.0 {
        return Ok(u.to_vec());
    }
    let (v, _) = solve_implicit_diffusion(u, dt * d, grid, cfg.linsolve_tol, cfg.linsolve_max_iter)?;
    Ok(v)
}

/// Exact diffusion over `dt`: `v = exp(dt d L) u`.
pub fn exact_diffusion_substep(u: &[f64], d: f64, dt: f64, grid: &Grid) -> Result<Vec<f64>> {
    check_positive(u)?;
    if d == 0.0 {
        return Ok(u.to_vec());
    }
    Ok(HeatPropagator::new(grid, d, dt).apply(u))
}

/// Advances fields by fixed Strang steps, caching the half-step
/// propagators for one `(grid, params, dt)` combination.
pub struct Stepper {
    grid: Grid,
    params: ModelParams,
    dt: f64,
    cfg: SolverConfig,
    half: [Option<HeatPropagator>; 3],
    stats: SolverStats,
}

impl Stepper {
    pub fn new(grid: &Grid, params: ModelParams, dt: f64, cfg: &SolverConfig) -> Self {
        let half = params.diffusivities().map(|d| {
            (cfg.diffusion == DiffusionScheme::Exact && d > 0.0)
                .then(|| HeatPropagator::new(grid, d, 0.5 * dt))
        });
        Self {
            grid: grid.clone(),
            params,
            dt,
            cfg: cfg.clone(),
            half,
            stats: SolverStats::default(),
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn stats(&self) -> &SolverStats {
        &self.stats
    }

    fn diffuse_half(&mut self, fields: &mut SpeciesFields) -> Result<()> {
        let ds = self.params.diffusivities();
        for (s, u) in fields.species_mut().into_iter().enumerate() {
            if ds[s] == 0.0 {
                continue;
            }
            match (&self.half[s], self.cfg.diffusion) {
                (Some(p), _) => *u = p.apply(u),
                (None, _) => {
                    let (v, out) = solve_implicit_diffusion(
                        u,
                        0.5 * self.dt * ds[s],
                        &self.grid,
                        self.cfg.linsolve_tol,
                        self.cfg.linsolve_max_iter,
                    )?;
                    self.stats.linear_solves += 1;
                    self.stats.cg_iterations += out.iterations;
                    self.stats.max_cg_residual = self.stats.max_cg_residual.max(out.relative_residual);
                    *u = v;
                }
            }
        }
        Ok(())
    }

    pub fn step(&mut self, fields: &SpeciesFields) -> Result<SpeciesFields> {
        let mut f = fields.clone();
        self.diffuse_half(&mut f)?;
        let mut f = reaction_substep(&f, self.dt);
        self.diffuse_half(&mut f)?;
        self.stats.steps += 1;
        Ok(f)
    }
}

/// One Strang step `D(dt/2) R(dt) D(dt/2)`.
pub fn strang_step(
    fields: &SpeciesFields,
    params: &ModelParams,
    dt: f64,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<SpeciesFields> {
    fields.check_positive()?;
    Stepper::new(grid, *params, dt, cfg).step(fields)
}

/// Integrates from `t = 0` to `cfg.t_end`, sampling the functionals at
/// `t = 0` and every `cfg.record_every` steps.
pub fn run(
    initial: &SpeciesFields,
    params: &ModelParams,
    grid: &Grid,
    domain: &DomainSpec,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    initial.check_positive()?;
    let n_steps = cfg.n_steps()?;
    let (m1, m2) = conserved_masses(initial, grid)?;
    let eq = equilibrium_state(m1, m2)?;
    let mut running = RunningIntegrals::default();
    let mut stepper = Stepper::new(grid, *params, cfg.dt, cfg);

    let mut times = Vec::with_capacity(n_steps / cfg.record_every + 1);
    let mut samples = Vec::with_capacity(times.capacity());
    let mut fields = initial.clone();
    let mut record = |fields: &SpeciesFields, t: f64| -> Result<()> {
        if fields.check_positive().is_err() {
            return Err(Error::NumericalBlowup {
                t,
                what: "field left the positive cone".into(),
            });
        }
        let s = functionals::sample(fields, t, &eq, params, domain, grid, &mut running)?;
        if !s.is_finite() {
            return Err(Error::NumericalBlowup {
                t,
                what: "non-finite functional".into(),
            });
        }
        times.push(t);
        samples.push(s);
        Ok(())
    };
    record(&fields, 0.0)?;
    for k in 1..=n_steps {
        fields = stepper.step(&fields)?;
        if k % cfg.record_every == 0 {
            record(&fields, k as f64 * cfg.dt)?;
        }
    }
    Ok(Trajectory {
        times,
        samples,
        final_fields: fields,
        stats: stepper.stats().clone(),
    })
}
