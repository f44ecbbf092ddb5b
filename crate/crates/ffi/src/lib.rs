//! C interface to `rdentropy`.
//!
//! Every function returns an [`RdStatus`]; results are written through
//! out-pointers. The message for the most recent failure on the calling
//! thread is available from [`rd_last_error`]. Simulations are opaque
//! handles created by [`rd_simulation_new`] and released with
//! [`rd_simulation_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use rdentropy::cli::{commands, parse_config, RunConfig};
use rdentropy::functionals::{self, RunningIntegrals};
use rdentropy::model::{conserved_masses, gamma_ratio};
use rdentropy::solver::Stepper;
use rdentropy::{equilibrium_state, DomainSpec, EquilibriumState, Error, Grid, ModelParams, Mode, SpeciesFields};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Io = 5,
    Parse = 6,
    Utf8 = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> RdStatus {
    match e {
        Error::Config { .. } => RdStatus::Config,
        Error::Parse { .. } => RdStatus::Parse,
        Error::Io { .. } => RdStatus::Io,
        Error::NumericalBlowup { .. }
        | Error::LinSolveFailure { .. }
        | Error::StepTooLarge { .. }
        | Error::NotPositive { .. }
        | Error::DegenerateEquilibrium => RdStatus::Numerical,
        _ => RdStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), RdStatus>) -> RdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RdStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            RdStatus::Panic
        }
    }
}

fn fail(e: Error) -> RdStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> RdStatus {
    set_error(format!("{what} is null"));
    RdStatus::NullPointer
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, RdStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        RdStatus::Utf8
    })
}

/// Copies the last error message on this thread into `buf` as a
/// NUL-terminated string. `*needed` receives the required size including
/// the terminator.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null with `len == 0`; `needed`
/// may be null.
#[no_mangle]
pub unsafe extern "C" fn rd_last_error(buf: *mut c_char, len: usize, needed: *mut usize) -> RdStatus {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !needed.is_null() {
            *needed = bytes.len() + 1;
        }
        if buf.is_null() || len < bytes.len() + 1 {
            return RdStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), bytes.len());
        *buf.add(bytes.len()) = 0;
        RdStatus::Ok
    })
}

/// Homogeneous equilibrium for the conserved masses.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RdEquilibrium {
    pub a_inf: f64,
    pub b_inf: f64,
    pub c_inf: f64,
}

/// Computes the equilibrium `(a_inf, b_inf, c_inf)` for masses `(m1, m2)`.
///
/// # Safety
/// `out` must be a valid pointer or null.
#[no_mangle]
pub unsafe extern "C" fn rd_equilibrium(m1: f64, m2: f64, out: *mut RdEquilibrium) -> RdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let eq = equilibrium_state(m1, m2).map_err(fail)?;
        *out = RdEquilibrium {
            a_inf: eq.a_inf,
            b_inf: eq.b_inf,
            c_inf: eq.c_inf,
        };
        Ok(())
    })
}

/// `Gamma(x, y) = y phi(x / y) / (sqrt x - sqrt y)^2`.
///
/// # Safety
/// `out` must be a valid pointer or null.
#[no_mangle]
pub unsafe extern "C" fn rd_gamma_ratio(x: f64, y: f64, out: *mut f64) -> RdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = gamma_ratio(x, y).map_err(fail)?;
        Ok(())
    })
}

/// Scalar functionals at the current simulation time.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RdSample {
    pub t: f64,
    pub entropy: f64,
    pub rel_entropy: f64,
    pub dissipation: f64,
    pub m1: f64,
    pub m2: f64,
    pub ckp_lhs: f64,
    pub abc_defect: f64,
}

/// Opaque simulation handle.
pub struct RdSimulation {
    config: RunConfig,
    domain: DomainSpec,
    grid: Grid,
    params: ModelParams,
    eq: EquilibriumState,
    stepper: Stepper,
    fields: SpeciesFields,
    steps: u64,
    running: RunningIntegrals,
}

impl RdSimulation {
    fn new(config: RunConfig) -> Result<Self, Error> {
        let (domain, grid) = config.grid()?;
        let params = config.params()?;
        let solver = config.solver_config()?;
        let fields = config.initial_fields(&grid)?;
        let (m1, m2) = conserved_masses(&fields, &grid)?;
        let eq = equilibrium_state(m1, m2)?;
        let stepper = Stepper::new(&grid, params, solver.dt, &solver);
        Ok(Self {
            config,
            domain,
            grid,
            params,
            eq,
            stepper,
            fields,
            steps: 0,
            running: RunningIntegrals::default(),
        })
    }

    fn time(&self) -> f64 {
        self.steps as f64 * self.stepper.dt()
    }
}

/// Builds a simulation from configuration text in the `key=value` format
/// used by the command-line `run` command.
///
/// # Safety
/// `config` must be a NUL-terminated string or null; `out` must be valid
/// or null.
#[no_mangle]
pub unsafe extern "C" fn rd_simulation_new(config: *const c_char, out: *mut *mut RdSimulation) -> RdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = read_str(config, "config")?;
        let cfg = parse_config(text).map_err(fail)?;
        let sim = RdSimulation::new(cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(sim));
        Ok(())
    })
}

/// Releases a simulation. Null is ignored.
///
/// # Safety
/// `sim` must come from [`rd_simulation_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rd_simulation_free(sim: *mut RdSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

unsafe fn sim_mut<'a>(sim: *mut RdSimulation) -> Result<&'a mut RdSimulation, RdStatus> {
    sim.as_mut().ok_or_else(|| null("sim"))
}

unsafe fn sim_ref<'a>(sim: *const RdSimulation) -> Result<&'a RdSimulation, RdStatus> {
    sim.as_ref().ok_or_else(|| null("sim"))
}

/// Advances `n` Strang steps. On failure the state is left at the last
/// successful step.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rd_simulation_step(sim: *mut RdSimulation, n: u64) -> RdStatus {
    guard(|| {
        let s = sim_mut(sim)?;
        for _ in 0..n {
            let next = s.stepper.step(&s.fields).map_err(fail)?;
            if next.check_positive().is_err() {
                return Err(fail(Error::NumericalBlowup {
                    t: s.time(),
                    what: "field left the positive cone".into(),
                }));
            }
            s.fields = next;
            s.steps += 1;
        }
        Ok(())
    })
}

/// Current simulation time.
///
/// # Safety
/// `sim` must be a live handle; `t` valid or null.
#[no_mangle]
pub unsafe extern "C" fn rd_simulation_time(sim: *const RdSimulation, t: *mut f64) -> RdStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        if t.is_null() {
            return Err(null("t"));
        }
        *t = s.time();
        Ok(())
    })
}

/// Number of grid cells (length of each field).
///
/// # Safety
/// `sim` must be a live handle; `n` valid or null.
#[no_mangle]
pub unsafe extern "C" fn rd_simulation_cells(sim: *const RdSimulation, n: *mut usize) -> RdStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        if n.is_null() {
            return Err(null("n"));
        }
        *n = s.grid.n_cells();
        Ok(())
    })
}

/// Equilibrium that the simulation relaxes towards.
///
/// # Safety
/// `sim` must be a live handle; `out` valid or null.
#[no_mangle]
pub unsafe extern "C" fn rd_simulation_equilibrium(sim: *const RdSimulation, out: *mut RdEquilibrium) -> RdStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = RdEquilibrium {
            a_inf: s.eq.a_inf,
            b_inf: s.eq.b_inf,
            c_inf: s.eq.c_inf,
        };
        Ok(())
    })
}

/// Evaluates the functionals at the current state.
///
/// # Safety
/// `sim` must be a live handle; `out` valid or null.
#[no_mangle]
pub unsafe extern "C" fn rd_simulation_sample(sim: *mut RdSimulation, out: *mut RdSample) -> RdStatus {
    guard(|| {
        let s = sim_mut(sim)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let t = s.time();
        let smp = functionals::sample(&s.fields, t, &s.eq, &s.params, &s.domain, &s.grid, &mut s.running)
            .map_err(fail)?;
        if !smp.is_finite() {
            return Err(fail(Error::NumericalBlowup {
                t,
                what: "non-finite functional".into(),
            }));
        }
        *out = RdSample {
            t,
            entropy: smp.entropy,
            rel_entropy: smp.rel_entropy,
            dissipation: smp.dissipation,
            m1: smp.m1,
            m2: smp.m2,
            ckp_lhs: smp.ckp_lhs,
            abc_defect: smp.abc_defect,
        };
        Ok(())
    })
}

/// Copies the fields into caller buffers of `len` cells each. Any of
/// `a`, `b`, `c` may be null to skip that species.
///
/// # Safety
/// `sim` must be a live handle; non-null buffers must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rd_simulation_fields(
    sim: *const RdSimulation,
    a: *mut f64,
    b: *mut f64,
    c: *mut f64,
    len: usize,
) -> RdStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        let n = s.grid.n_cells();
        if len < n {
            set_error(format!("buffer holds {len} cells, need {n}"));
            return Err(RdStatus::BufferTooSmall);
        }
        for (dst, src) in [(a, &s.fields.a), (b, &s.fields.b), (c, &s.fields.c)] {
            if !dst.is_null() {
                ptr::copy_nonoverlapping(src.as_ptr(), dst, n);
            }
        }
        Ok(())
    })
}

/// Echo of the configuration in file format. Same buffer protocol as
/// [`rd_last_error`].
///
/// # Safety
/// `sim` must be a live handle; `buf` valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn rd_simulation_config(
    sim: *const RdSimulation,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> RdStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        let text = s.config.to_text();
        if !needed.is_null() {
            *needed = text.len() + 1;
        }
        if buf.is_null() || len < text.len() + 1 {
            return Err(RdStatus::BufferTooSmall);
        }
        ptr::copy_nonoverlapping(text.as_ptr(), buf.cast::<u8>(), text.len());
        *buf.add(text.len()) = 0;
        Ok(())
    })
}

/// Analyzes a time-series CSV (writing `report.txt` and `summary.txt`
/// beside it). `mode` is `"full"`, `"db0"` or `"dc0"`; `*all_pass` is set
/// to 1 when every check passes and 0 otherwise.
///
/// # Safety
/// `path` and `mode` must be NUL-terminated strings; `all_pass` valid or
/// null.
#[no_mangle]
pub unsafe extern "C" fn rd_analyze_csv(
    path: *const c_char,
    mode: *const c_char,
    dimension: usize,
    all_pass: *mut i32,
) -> RdStatus {
    guard(|| {
        if all_pass.is_null() {
            return Err(null("all_pass"));
        }
        let path = read_str(path, "path")?;
        let mode: Mode = read_str(mode, "mode")?.parse().map_err(fail)?;
        let report = commands::cmd_analyze(Path::new(path), mode, dimension).map_err(fail)?;
        *all_pass = i32::from(report.all_pass());
        Ok(())
    })
}
