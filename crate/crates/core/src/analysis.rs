//! Post-run verification: decay-envelope fits against the theorem
//! exponents, the entropy balance `dE/dt = -D`, inequality audits and
//! growth-rate fits for the L^p diagnostics.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::functionals::{diag, FunctionalSample};
use crate::model::{ModelParams, Mode};
use crate::solver::Trajectory;

/// `epsilon` in the theorem exponents.
pub const THEOREM_EPSILON: f64 = 0.01;
/// Relative entropies at or below this value are rounding noise.
pub const FIT_FLOOR: f64 = 1e-14;
/// Exponent required of the non-degenerate system (exponential decay).
pub const EXPONENTIAL_ALPHA: f64 = 0.95;
/// Largest relative residual of the entropy balance accepted by `analyze`.
pub const BALANCE_TOLERANCE: f64 = 0.01;
/// Relative slack for the CKP and dissipation-bound audits.
pub const INEQUALITY_SLACK: f64 = 1e-10;
/// Absolute slack per recorded interval for entropy monotonicity.
pub const MONOTONE_SLACK: f64 = 1e-12;
/// Relative drift of the conserved masses accepted by `analyze`.
pub const MASS_TOLERANCE: f64 = 1e-9;

const ALPHA_MIN_CENTI: usize = 5;
const ALPHA_MAX_CENTI: usize = 150;
const MIN_FIT_SAMPLES: usize = 10;

/// `E_rel(t) <= S1 exp(-S2 (1 + t)^alpha)` fitted to a run.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub alpha: f64,
    pub s1: f64,
    /// `ln S1`; kept separately because `S1` overflows for fast decay.
    pub ln_s1: f64,
    pub s2: f64,
    /// RMS residual of `ln E_rel` at the chosen `alpha`.
    pub rms_residual: f64,
    pub samples_used: usize,
    pub window: (f64, f64),
    pub envelope_holds: bool,
}

impl DecayFit {
    pub fn ln_envelope(&self, t: f64) -> f64 {
        self.ln_s1 - self.s2 * (1.0 + t).powf(self.alpha)
    }
}

fn fit_points(times: &[f64], values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if times.len() != values.len() {
        return Err(Error::InvalidSampling("times and values differ in length".into()));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(_, v)| v.is_finite() && **v > FIT_FLOOR)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.is_empty() {
        return Err(Error::AlreadyConverged);
    }
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::InvalidSampling(format!(
            "{} samples above the floor, need at least {MIN_FIT_SAMPLES}",
            pts.len()
        )));
    }
    Ok(pts)
}

/// Least-squares line `y = p + q x`; returns `(p, q, rms)`.
fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let q = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let p = my - q * mx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - p - q * x).powi(2)).sum();
    (p, q, (ss / n).sqrt())
}

/// Grid search over `alpha in [0.05, 1.5]` (step 0.01) with a linear fit of
/// `ln E_rel` against `(1 + t)^alpha` at each `alpha`. `S1` is then raised
/// until the envelope covers every sample.
pub fn fit_subexponential(times: &[f64], e_rel: &[f64]) -> Result<DecayFit> {
    let pts = fit_points(times, e_rel)?;
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let mut best: Option<(f64, f64, f64, f64)> = None;
    let mut xs = vec![0.0; pts.len()];
    for centi in ALPHA_MIN_CENTI..=ALPHA_MAX_CENTI {
        let alpha = centi as f64 / 100.0;
        for (x, (t, _)) in xs.iter_mut().zip(&pts) {
            *x = (1.0 + t).powf(alpha);
        }
        let (p, q, rms) = line_fit(&xs, &ys);
        let span = xs[xs.len() - 1] - xs[0];
        // a total log-decrease below rounding is not decay
        if -q * span.abs() <= 1e-12 {
            continue;
        }
        if best.is_none_or(|b| rms < b.3) {
            best = Some((alpha, p, -q, rms));
        }
    }
    let (alpha, p, s2, rms) = best.ok_or(Error::NonDecaying)?;
    let ln_s1 = pts
        .iter()
        .map(|(t, y)| y + s2 * (1.0 + t).powf(alpha))
        .fold(p, f64::max);
    let mut fit = DecayFit {
        alpha,
        s1: ln_s1.exp(),
        ln_s1,
        s2,
        rms_residual: rms,
        samples_used: pts.len(),
        window: (pts[0].0, pts[pts.len() - 1].0),
        envelope_holds: false,
    };
    fit.envelope_holds = pts
        .iter()
        .all(|(t, y)| *y <= fit.ln_envelope(*t) + (1e-9f64).ln_1p());
    Ok(fit)
}

/// [`fit_subexponential`] restricted to the later half of the resolved
/// decay: samples above [`FIT_FLOOR`] whose time lies in the second half
/// of the span those samples cover.
pub fn fit_tail(times: &[f64], e_rel: &[f64]) -> Result<DecayFit> {
    let pts = fit_points(times, e_rel)?;
    let mid = 0.5 * (pts[0].0 + pts[pts.len() - 1].0);
    let (t, v): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(e_rel)
        .filter(|(t, _)| **t >= mid)
        .map(|(t, v)| (*t, *v))
        .unzip();
    fit_subexponential(&t, &v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    pub mode: Mode,
    pub dimension: usize,
    pub theoretical_alpha: f64,
    pub fitted_alpha: f64,
    pub envelope_holds: bool,
    pub pass: bool,
}

/// Exponent the decay must reach: `(1-eps)/(N-1)` (`d_b = 0`, `N >= 4`),
/// `(1-eps)/6` (`d_b = 0`, `N < 4`), `(2-eps)/3` (`d_c = 0`, `N <= 3`), and
/// the exponential target for the non-degenerate system.
pub fn theoretical_alpha(mode: Mode, dimension: usize) -> Result<f64> {
    if dimension == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    match mode {
        Mode::Db0 if dimension >= 4 => Ok((1.0 - THEOREM_EPSILON) / (dimension as f64 - 1.0)),
        Mode::Db0 => Ok((1.0 - THEOREM_EPSILON) / 6.0),
        Mode::Dc0 if dimension <= 3 => Ok((2.0 - THEOREM_EPSILON) / 3.0),
        Mode::Dc0 => Err(Error::Unsupported(format!(
            "no decay theorem for d_c = 0 in dimension {dimension}"
        ))),
        Mode::Full => Ok(EXPONENTIAL_ALPHA),
    }
}

pub fn check_theorem_envelope(fit: &DecayFit, mode: Mode, dimension: usize) -> Result<EnvelopeReport> {
    let target = theoretical_alpha(mode, dimension)?;
    let pass = fit.alpha >= target - 1e-12 && fit.envelope_holds;
    Ok(EnvelopeReport {
        mode,
        dimension,
        theoretical_alpha: target,
        fitted_alpha: fit.alpha,
        envelope_holds: fit.envelope_holds,
        pass,
    })
}

/// Max over interior samples of `|dE/dt + D| / max(D, 1e-14)` with a
/// central difference for `dE/dt`. Stencils touching a sample at or below
/// [`FIT_FLOOR`] are skipped.
pub fn entropy_balance_residual(times: &[f64], e_rel: &[f64], dissipation: &[f64]) -> Result<f64> {
    let n = times.len();
    if n < 3 || e_rel.len() != n || dissipation.len() != n {
        return Err(Error::InvalidSampling("need at least 3 aligned samples".into()));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(Error::InvalidSampling("times must increase".into()));
    }
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(w[1].abs()) {
            return Err(Error::InvalidSampling(format!(
                "non-uniform record spacing near t = {}",
                w[0]
            )));
        }
    }
    let mut worst = 0.0_f64;
    for k in 1..n - 1 {
        if e_rel[k - 1..=k + 1].iter().any(|&e| e <= FIT_FLOOR) {
            continue;
        }
        let slope = (e_rel[k + 1] - e_rel[k - 1]) / (times[k + 1] - times[k - 1]);
        let r = (slope + dissipation[k]).abs() / dissipation[k].max(1e-14);
        worst = worst.max(r);
    }
    Ok(worst)
}

pub fn entropy_balance_samples(samples: &[FunctionalSample]) -> Result<f64> {
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let e: Vec<f64> = samples.iter().map(|s| s.rel_entropy).collect();
    let d: Vec<f64> = samples.iter().map(|s| s.dissipation).collect();
    entropy_balance_residual(&t, &e, &d)
}

pub fn entropy_balance_audit(trajectory: &Trajectory) -> Result<f64> {
    entropy_balance_samples(&trajectory.samples)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthDiagnostic {
    pub label: String,
    pub exponent_target: f64,
    /// Smallest `K` with `value(t) <= K (1 + t)^exponent_target` on the samples.
    pub fitted_constant: f64,
    pub max_ratio_time: f64,
}

/// `(label, exponent)` pairs monitored for a mode and dimension.
pub fn growth_targets(mode: Mode, dimension: usize) -> Vec<(&'static str, f64)> {
    let n = dimension as f64;
    match mode {
        Mode::Db0 => {
            let mut v = Vec::new();
            if dimension <= 3 {
                v.push((diag::B_L32, 5.0 / 6.0));
            }
            if dimension >= 2 {
                v.push((diag::B_LN2, (n - 2.0) / (n - 1.0)));
            }
            v
        }
        Mode::Dc0 => vec![
            (diag::A_L32, 1.0 / 3.0),
            (diag::B_L32, 1.0 / 3.0),
            (diag::C_L3, 1.0),
            (diag::INT_A2AC, 1.0),
            (diag::INT_B2BC, 1.0),
        ],
        Mode::Full => Vec::new(),
    }
}

pub fn fit_growth(label: &str, exponent: f64, times: &[f64], values: &[f64]) -> GrowthDiagnostic {
    let mut best = (f64::NEG_INFINITY, times.first().copied().unwrap_or(0.0));
    for (t, v) in times.iter().zip(values) {
        let r = v / (1.0 + t).powf(exponent);
        if r > best.0 {
            best = (r, *t);
        }
    }
    GrowthDiagnostic {
        label: label.to_string(),
        exponent_target: exponent,
        fitted_constant: best.0,
        max_ratio_time: best.1,
    }
}

pub fn growth_diagnostics(
    samples: &[FunctionalSample],
    mode: Mode,
    dimension: usize,
) -> Result<Vec<GrowthDiagnostic>> {
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    growth_targets(mode, dimension)
        .into_iter()
        .map(|(label, exponent)| {
            let values = samples.iter().map(|s| s.diag(label)).collect::<Result<Vec<_>>>()?;
            Ok(fit_growth(label, exponent, &times, &values))
        })
        .collect()
}

/// Empirical constant in `D >= K (1 + t)^(-beta) (||dA||^2 + ||dB||^2 + ||dC||^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationFit {
    pub beta: f64,
    pub constant: f64,
    pub binding_time: f64,
}

pub fn deviation_exponent(mode: Mode, dimension: usize) -> f64 {
    let n = dimension as f64;
    match mode {
        Mode::Db0 if dimension >= 4 => (n - 2.0) / (n - 1.0),
        Mode::Db0 => 5.0 / 6.0,
        Mode::Dc0 => 1.0 / 3.0,
        Mode::Full => 0.0,
    }
}

pub fn fit_dissipation_deviation(samples: &[FunctionalSample], mode: Mode, dimension: usize) -> Option<DeviationFit> {
    let beta = deviation_exponent(mode, dimension);
    samples
        .iter()
        .filter(|s| s.rel_entropy > FIT_FLOOR)
        .filter_map(|s| {
            let dev: f64 = s.dev_sq.iter().sum();
            (dev > 0.0).then(|| (s.dissipation * (1.0 + s.t).powf(beta) / dev, s.t))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(constant, binding_time)| DeviationFit {
            beta,
            constant,
            binding_time,
        })
}

/// Samples where `ckp_lhs` exceeds `E_rel` beyond the relative slack.
pub fn ckp_violations(samples: &[FunctionalSample]) -> usize {
    samples
        .iter()
        .filter(|s| s.ckp_lhs - s.rel_entropy > INEQUALITY_SLACK * s.rel_entropy.abs().max(s.ckp_lhs.abs()))
        .count()
}

/// Samples where `D` falls below the deviation lower bound. Without
/// parameters only the reaction part `D >= 4 ||AB - C||^2` is checked.
pub fn bound_violations(samples: &[FunctionalSample], bound: Option<(&ModelParams, f64)>) -> usize {
    samples
        .iter()
        .filter(|s| {
            let rhs = match bound {
                Some((p, poincare)) => {
                    crate::functionals::deviation_bound_rhs(s.dev_sq, s.abc_defect, p, poincare)
                }
                None => 4.0 * s.abc_defect,
            };
            rhs - s.dissipation > INEQUALITY_SLACK * s.dissipation.abs().max(rhs.abs())
        })
        .count()
}

/// Consecutive samples where `E_rel` increases by more than the slack.
pub fn monotonicity_violations(samples: &[FunctionalSample]) -> usize {
    samples
        .windows(2)
        .filter(|w| w[1].rel_entropy > w[0].rel_entropy + MONOTONE_SLACK)
        .count()
}

/// Largest `|M_i(t) - M_i(0)| / M_i(0)` over samples and both masses.
pub fn max_mass_drift(samples: &[FunctionalSample]) -> f64 {
    let Some(first) = samples.first() else { return 0.0 };
    samples
        .iter()
        .map(|s| ((s.m1 - first.m1).abs() / first.m1).max((s.m2 - first.m2).abs() / first.m2))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub mode: Mode,
    pub dimension: usize,
    pub checks: Vec<Check>,
    pub fit: Option<DecayFit>,
    /// Fit over the later half of the decay, reported only.
    pub tail_fit: Option<DecayFit>,
    pub envelope: Option<EnvelopeReport>,
    pub balance_residual: Option<f64>,
    pub growth: Vec<GrowthDiagnostic>,
    pub deviation_fit: Option<DeviationFit>,
    pub ckp_violations: usize,
    pub bound_violations: usize,
    /// Violations of the dissipation bound with the grid's discrete
    /// Poincare constant in place of the analytic one, when known.
    pub discrete_bound_violations: Option<usize>,
    pub monotonicity_violations: usize,
    pub mass_drift: f64,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn verdict(pass: bool) -> &'static str {
        if pass { "PASS" } else { "FAIL" }
    }

    /// Human-readable report, one line per check.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "verification report: mode = {}, N = {}", self.mode, self.dimension);
        for (name, fit) in [("decay fit", &self.fit), ("tail fit (reported only)", &self.tail_fit)] {
            if let Some(fit) = fit {
                let _ = writeln!(
                    out,
                    "  {name} over t in [{}, {}] ({} samples): alpha = {:.2}, S1 = {:.6e}, S2 = {:.6e}, rms = {:.3e}",
                    fit.window.0, fit.window.1, fit.samples_used, fit.alpha, fit.s1, fit.s2, fit.rms_residual
                );
            }
        }
        for g in &self.growth {
            let _ = writeln!(
                out,
                "  growth {} vs (1+t)^{:.4}: K = {:.6e} (binding at t = {})",
                g.label, g.exponent_target, g.fitted_constant, g.max_ratio_time
            );
        }
        if let Some(d) = &self.deviation_fit {
            let _ = writeln!(
                out,
                "  D >= K (1+t)^-{:.4} sum ||delta||^2: K = {:.6e} (binding at t = {})",
                d.beta, d.constant, d.binding_time
            );
        }
        if let Some(n) = self.discrete_bound_violations {
            let _ = writeln!(out, "  dissipation bound with the discrete Poincare constant: {n} violations");
        }
        for c in &self.checks {
            let _ = writeln!(out, "[{}] {}: {}", Self::verdict(c.pass), c.name, c.detail);
        }
        let _ = writeln!(out, "overall: {}", Self::verdict(self.all_pass()));
        out
    }

    /// Machine-readable `key=value` summary.
    pub fn to_summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mode={}", self.mode);
        let _ = writeln!(out, "dim={}", self.dimension);
        let _ = writeln!(out, "overall={}", Self::verdict(self.all_pass()));
        if let Some(fit) = &self.fit {
            let _ = writeln!(out, "fit_alpha={}", fit.alpha);
            let _ = writeln!(out, "fit_ln_s1={}", fit.ln_s1);
            let _ = writeln!(out, "fit_s2={}", fit.s2);
            let _ = writeln!(out, "fit_rms={}", fit.rms_residual);
            let _ = writeln!(out, "fit_window={},{}", fit.window.0, fit.window.1);
        }
        if let Some(fit) = &self.tail_fit {
            let _ = writeln!(out, "tail_fit_alpha={}", fit.alpha);
        }
        if let Some(n) = self.discrete_bound_violations {
            let _ = writeln!(out, "discrete_bound_violations={n}");
        }
        if let Some(env) = &self.envelope {
            let _ = writeln!(out, "theoretical_alpha={}", env.theoretical_alpha);
        }
        if let Some(r) = self.balance_residual {
            let _ = writeln!(out, "balance_residual={r}");
        }
        let _ = writeln!(out, "ckp_violations={}", self.ckp_violations);
        let _ = writeln!(out, "bound_violations={}", self.bound_violations);
        let _ = writeln!(out, "monotonicity_violations={}", self.monotonicity_violations);
        let _ = writeln!(out, "mass_drift={}", self.mass_drift);
        for g in &self.growth {
            let _ = writeln!(out, "growth_{}={},{}", g.label, g.fitted_constant, g.max_ratio_time);
        }
        for c in &self.checks {
            let _ = writeln!(out, "check_{}={}", c.name, Self::verdict(c.pass));
        }
        out
    }
}

/// Runs every post-run check on a recorded series. `bound` supplies the
/// diffusivities and Poincare constant for the full dissipation bound.
pub fn analyze(
    samples: &[FunctionalSample],
    mode: Mode,
    dimension: usize,
    bound: Option<(&ModelParams, f64)>,
) -> Result<VerificationReport> {
    let mut checks = Vec::new();
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let e_rel: Vec<f64> = samples.iter().map(|s| s.rel_entropy).collect();

    let target = theoretical_alpha(mode, dimension)?;
    let tail_fit = fit_tail(&times, &e_rel).ok();
    let (fit, envelope) = match fit_subexponential(&times, &e_rel) {
        Ok(fit) => {
            let env = check_theorem_envelope(&fit, mode, dimension)?;
            checks.push(Check {
                name: "decay_envelope".into(),
                pass: env.pass,
                detail: format!(
                    "fitted alpha {:.2} vs required {:.4}; envelope {}",
                    fit.alpha,
                    target,
                    if fit.envelope_holds { "holds" } else { "violated" }
                ),
            });
            (Some(fit), Some(env))
        }
        Err(e) => {
            checks.push(Check {
                name: "decay_envelope".into(),
                pass: false,
                detail: format!("fit failed: {e}"),
            });
            (None, None)
        }
    };

    let balance_residual = match entropy_balance_samples(samples) {
        Ok(r) => {
            checks.push(Check {
                name: "entropy_balance".into(),
                pass: r <= BALANCE_TOLERANCE,
                detail: format!("max relative residual {r:.3e} (tolerance {BALANCE_TOLERANCE})"),
            });
            Some(r)
        }
        Err(e) => {
            checks.push(Check {
                name: "entropy_balance".into(),
                pass: false,
                detail: e.to_string(),
            });
            None
        }
    };

    let mono = monotonicity_violations(samples);
    checks.push(Check {
        name: "entropy_monotone".into(),
        pass: mono == 0,
        detail: format!("{mono} increases beyond {MONOTONE_SLACK:e}"),
    });

    let ckp = ckp_violations(samples);
    checks.push(Check {
        name: "ckp_inequality".into(),
        pass: ckp == 0,
        detail: format!("{ckp} violations"),
    });

    let bv = bound_violations(samples, bound);
    checks.push(Check {
        name: "dissipation_bound".into(),
        pass: bv == 0,
        detail: format!(
            "{bv} violations ({})",
            if bound.is_some() { "full bound" } else { "reaction part only" }
        ),
    });

    let mass_drift = max_mass_drift(samples);
    checks.push(Check {
        name: "mass_conservation".into(),
        pass: mass_drift <= MASS_TOLERANCE,
        detail: format!("max relative drift {mass_drift:.3e}"),
    });

    let growth = growth_diagnostics(samples, mode, dimension)?;
    let growth_ok = growth.iter().all(|g| g.fitted_constant.is_finite());
    checks.push(Check {
        name: "growth_diagnostics".into(),
        pass: growth_ok,
        detail: format!("{} bounds, all constants finite: {growth_ok}", growth.len()),
    });

    Ok(VerificationReport {
        mode,
        dimension,
        checks,
        fit,
        tail_fit,
        envelope,
        balance_residual,
        growth,
        deviation_fit: fit_dissipation_deviation(samples, mode, dimension),
        ckp_violations: ckp,
        bound_violations: bv,
        discrete_bound_violations: None,
        monotonicity_violations: mono,
        mass_drift,
    })
}
