//! Domain geometry, model parameters, the homogeneous equilibrium and the
//! entropy ratio function used to compare a concentration with its
//! equilibrium value.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Grid, SpeciesFields};

/// Box domain `[0, L_1] x ... x [0, L_N]` with `N <= 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    lengths: Vec<f64>,
    volume: f64,
    poincare_constant: f64,
}

impl DomainSpec {
    pub fn new(lengths: &[f64]) -> Result<Self> {
        if lengths.is_empty() || lengths.len() > 3 {
            return Err(Error::InvalidArgument(format!(
                "dimension must be 1, 2 or 3 (got {})",
                lengths.len()
            )));
        }
        if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::InvalidArgument(format!("box length {l} is not positive")));
        }
        let volume = lengths.iter().product();
        let l_max = lengths.iter().copied().fold(0.0_f64, f64::max);
        Ok(Self {
            lengths: lengths.to_vec(),
            volume,
            poincare_constant: (l_max / PI).powi(2),
        })
    }

    pub fn dimension(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// `|Omega|`.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Neumann Poincare-Wirtinger constant of the box for the L2 deviation
    /// norm: `||f - mean f||^2 <= P ||grad f||^2` with `P = (L_max / pi)^2`.
    pub fn poincare_constant(&self) -> f64 {
        self.poincare_constant
    }
}

/// Which diffusivity, if any, vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// All three species diffuse.
    Full,
    /// `d_b = 0`.
    Db0,
    /// `d_c = 0`.
    Dc0,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Db0 => "db0",
            Mode::Dc0 => "dc0",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Mode::Full),
            "db0" => Ok(Mode::Db0),
            "dc0" => Ok(Mode::Dc0),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode `{other}` (expected full, db0 or dc0)"
            ))),
        }
    }
}

/// Diffusion coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub d_a: f64,
    pub d_b: f64,
    pub d_c: f64,
}

impl ModelParams {
    pub fn new(d_a: f64, d_b: f64, d_c: f64) -> Result<Self> {
        for (name, d) in [("d_a", d_a), ("d_b", d_b), ("d_c", d_c)] {
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::InvalidArgument(format!("{name} = {d} must be finite and >= 0")));
            }
        }
        if d_a == 0.0 {
            return Err(Error::InvalidArgument("d_a must be positive".into()));
        }
        if d_b == 0.0 && d_c == 0.0 {
            return Err(Error::InvalidArgument(
                "at most one of d_b, d_c may vanish".into(),
            ));
        }
        Ok(Self { d_a, d_b, d_c })
    }

    pub fn mode(&self) -> Mode {
        if self.d_b == 0.0 {
            Mode::Db0
        } else if self.d_c == 0.0 {
            Mode::Dc0
        } else {
            Mode::Full
        }
    }

    pub fn diffusivities(&self) -> [f64; 3] {
        [self.d_a, self.d_b, self.d_c]
    }
}

/// Homogeneous equilibrium together with the conserved averages it was
/// computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumState {
    pub a_inf: f64,
    pub b_inf: f64,
    pub c_inf: f64,
    pub m1: f64,
    pub m2: f64,
}

impl EquilibriumState {
    pub fn components(&self) -> [f64; 3] {
        [self.a_inf, self.b_inf, self.c_inf]
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.a_inf > 0.0 && self.b_inf > 0.0 && self.c_inf > 0.0
    }
}

/// Average densities `M1 = mean(a + c)` and `M2 = mean(b + c)`.
pub fn conserved_masses(fields: &SpeciesFields, grid: &Grid) -> Result<(f64, f64)> {
    fields.check_finite()?;
    let vol = grid.cell_volume();
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for i in 0..fields.len() {
        s1 += fields.a[i] + fields.c[i];
        s2 += fields.b[i] + fields.c[i];
    }
    let omega = grid.volume();
    Ok((vol * s1 / omega, vol * s2 / omega))
}

/// `(1 + M1 + M2)^2 - 4 M1 M2`, written in the form that is manifestly
/// positive for nonnegative masses.
pub fn equilibrium_discriminant(m1: f64, m2: f64) -> f64 {
    1.0 + 2.0 * (m1 + m2) + (m1 - m2) * (m1 - m2)
}

/// Nonnegative root of `x^2 + p x - q = 0` for `q >= 0`, evaluated without
/// cancellation given `sqrt_disc = sqrt(p^2 + 4q)`.
fn nonnegative_root(p: f64, q: f64, sqrt_disc: f64) -> f64 {
    if p >= 0.0 {
        if q == 0.0 {
            0.0
        } else {
            2.0 * q / (p + sqrt_disc)
        }
    } else {
        0.5 * (sqrt_disc - p)
    }
}

/// Unique nonnegative equilibrium with `a + c = M1`, `b + c = M2`, `ab = c`.
///
/// Each component is the nonnegative root of its own quadratic; all three
/// share the same discriminant, so no component is obtained by subtracting
/// nearly equal numbers.
pub fn equilibrium_state(m1: f64, m2: f64) -> Result<EquilibriumState> {
    if !(m1.is_finite() && m2.is_finite()) || m1 < 0.0 || m2 < 0.0 {
        return Err(Error::InvalidMass(format!(
            "masses must be finite and nonnegative (got M1 = {m1}, M2 = {m2})"
        )));
    }
    let sqrt_disc = equilibrium_discriminant(m1, m2).sqrt();
    let s = 1.0 + m1 + m2;
    let c_inf = if m1 == 0.0 || m2 == 0.0 {
        0.0
    } else {
        2.0 * m1 * m2 / (s + sqrt_disc)
    };
    let a_inf = nonnegative_root(1.0 + m2 - m1, m1, sqrt_disc);
    let b_inf = nonnegative_root(1.0 + m1 - m2, m2, sqrt_disc);
    Ok(EquilibriumState {
        a_inf,
        b_inf,
        c_inf,
        m1,
        m2,
    })
}

/// `r ln r - r + 1` for `r >= 0`, accurate to a few ulps relative to the
/// result also when `r` is close to 1.
pub fn entropy_density(r: f64) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    let s = r - 1.0;
    if s.abs() < 1e-3 {
        // sum_{k>=2} (-1)^k s^k / (k (k - 1))
        let mut term = s * s;
        let mut acc = 0.0;
        for k in 2..10 {
            let kf = k as f64;
            acc += term / (kf * (kf - 1.0));
            term *= -s;
        }
        acc
    } else {
        r * s.ln_1p() - s
    }
}

const GAMMA_SWITCH: f64 = 1e-7;

/// `(x ln(x/y) - x + y) / (sqrt x - sqrt y)^2`, extended by 2 on the
/// diagonal and by 1 at `x = 0`.
pub fn gamma_ratio(x: f64, y: f64) -> Result<f64> {
    if !(y.is_finite() && y > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma_ratio needs y > 0 (got {y})")));
    }
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::InvalidArgument(format!("gamma_ratio needs x >= 0 (got {x})")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let (sx, sy) = (x.sqrt(), y.sqrt());
    let root_gap = (x - y) / (sx + sy);
    if root_gap.abs() < GAMMA_SWITCH * sy {
        let w = root_gap / sy;
        return Ok(2.0 + (2.0 / 3.0) * w - w * w / 6.0);
    }
    let num = y * entropy_density(x / y);
    Ok(num / (root_gap * root_gap))
}

/// Smallest `C` with `gamma_ratio(x, y) <= C max(1, ln(x / y))` over the
/// given sample pairs.
pub fn fit_gamma_constant(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<f64> {
    let mut c = 0.0_f64;
    for (x, y) in pairs {
        let g = gamma_ratio(x, y)?;
        c = c.max(g / (x / y).ln().max(1.0));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn domain_volume_and_poincare() {
        let d = DomainSpec::new(&[2.0, 0.5]).unwrap();
        assert_eq!(d.dimension(), 2);
        assert_eq!(d.volume(), 1.0);
        assert!(rel(d.poincare_constant(), 4.0 / (PI * PI)) < 1e-15);
        assert!(DomainSpec::new(&[]).is_err());
        assert!(DomainSpec::new(&[1.0, 1.0, 1.0, 1.0]).is_err());
        assert!(DomainSpec::new(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn params_reject_double_degeneracy() {
        assert!(ModelParams::new(1.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, -1.0, 1.0).is_err());
        assert_eq!(ModelParams::new(1.0, 0.0, 1.0).unwrap().mode(), Mode::Db0);
        assert_eq!(ModelParams::new(1.0, 1.0, 0.0).unwrap().mode(), Mode::Dc0);
        assert_eq!(ModelParams::new(1.0, 1.0, 1.0).unwrap().mode(), Mode::Full);
    }

    #[test]
    fn mode_round_trips_through_text() {
        for m in [Mode::Full, Mode::Db0, Mode::Dc0] {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
        }
        assert!("db1".parse::<Mode>().is_err());
    }

    #[test]
    fn equilibrium_unit_masses() {
        let eq = equilibrium_state(1.0, 1.0).unwrap();
        let s5 = 5.0_f64.sqrt();
        assert!(rel(eq.c_inf, (3.0 - s5) / 2.0) < 1e-12);
        assert!(rel(eq.a_inf, (s5 - 1.0) / 2.0) < 1e-12);
        assert!(rel(eq.b_inf, (s5 - 1.0) / 2.0) < 1e-12);
        assert!(rel(eq.a_inf * eq.b_inf, eq.c_inf) < 1e-12);
    }

    #[test]
    fn equilibrium_two_one() {
        let eq = equilibrium_state(2.0, 1.0).unwrap();
        let r2 = 2.0_f64.sqrt();
        assert!(rel(eq.c_inf, 2.0 - r2) < 1e-12);
        assert!(rel(eq.a_inf, r2) < 1e-12);
        assert!(rel(eq.b_inf, r2 - 1.0) < 1e-12);
    }

    #[test]
    fn equilibrium_zero_mass_branch() {
        let eq = equilibrium_state(0.0, 5.0).unwrap();
        assert_eq!(eq.components(), [0.0, 5.0, 0.0]);
        let eq = equilibrium_state(3.0, 0.0).unwrap();
        assert_eq!(eq.components(), [3.0, 0.0, 0.0]);
    }

    #[test]
    fn equilibrium_rejects_negative_mass() {
        assert!(matches!(equilibrium_state(-1.0, 1.0), Err(Error::InvalidMass(_))));
        assert!(matches!(equilibrium_state(1.0, f64::NAN), Err(Error::InvalidMass(_))));
    }

    #[test]
    fn discriminant_identity() {
        for &(m1, m2) in &[(0.0, 0.0), (1.0, 2.0), (10.0, 0.1), (3.5, 3.5)] {
            let direct: f64 = (1.0 + m1 + m2) * (1.0 + m1 + m2) - 4.0 * m1 * m2;
            assert!(rel(equilibrium_discriminant(m1, m2), direct) < 1e-14);
        }
    }

    #[test]
    fn gamma_on_diagonal_is_two() {
        for x in [1e-6, 0.3, 1.0, 7.5, 1e3] {
            assert_eq!(gamma_ratio(x, x).unwrap(), 2.0);
        }
    }

    #[test]
    fn gamma_off_diagonal() {
        let g = gamma_ratio(4.0, 1.0).unwrap();
        let expected = 4.0 * 4.0_f64.ln() - 3.0;
        assert!(rel(g, expected) < 1e-14);
        assert!((expected - 2.5451774).abs() < 1e-7);
        assert_eq!(gamma_ratio(0.0, 1.0).unwrap(), 1.0);
        assert!(gamma_ratio(1.0, 0.0).is_err());
        assert!(gamma_ratio(-1.0, 1.0).is_err());
    }

    #[test]
    fn gamma_approaches_one_at_zero() {
        let g = gamma_ratio(1e-12, 1.0).unwrap();
        assert!((g - 1.0).abs() < 1e-4);
    }

    #[test]
    fn gamma_continuous_across_switch() {
        for y in [1e-6f64, 0.5, 1.0, 3.0, 1e3] {
            let sy: f64 = y.sqrt();
            for sign in [-1.0, 1.0] {
                let inside = (sy * (1.0 + sign * GAMMA_SWITCH * (1.0 - 1e-6))).powi(2);
                let outside = (sy * (1.0 + sign * GAMMA_SWITCH * (1.0 + 1e-6))).powi(2);
                let gi = gamma_ratio(inside, y).unwrap();
                let go = gamma_ratio(outside, y).unwrap();
                assert!((gi - go).abs() < 1e-6, "jump {} at y = {y}", (gi - go).abs());
            }
        }
    }

    #[test]
    fn entropy_density_branches_agree() {
        for r in [0.5f64, 0.99, 0.999, 0.9995, 1.0005, 1.001, 1.01, 2.0] {
            let naive: f64 = r * r.ln() - r + 1.0;
            assert!(rel(entropy_density(r), naive) < 1e-9, "r = {r}");
        }
        assert_eq!(entropy_density(1.0), 0.0);
        assert_eq!(entropy_density(0.0), 1.0);
        // series branch keeps relative accuracy where the naive form has none
        let s = 1e-9;
        assert!(rel(entropy_density(1.0 + s), s * s / 2.0) < 1e-6);
    }

    #[test]
    fn conserved_masses_of_constants() {
        let domain = DomainSpec::new(&[2.0]).unwrap();
        let grid = Grid::new(&domain, &[8]).unwrap();
        let f = SpeciesFields::uniform(&grid, 1.0, 3.0, 1.0).unwrap();
        let (m1, _) = conserved_masses(&f, &grid).unwrap();
        assert!(rel(m1, 2.0) < 1e-15);
        let f = SpeciesFields::uniform(&grid, 2.0, 1.0, 0.5).unwrap();
        let (m1, m2) = conserved_masses(&f, &grid).unwrap();
        assert!(rel(m1, 2.5) < 1e-15 && rel(m2, 1.5) < 1e-15);
    }

    #[test]
    fn conserved_masses_of_cosine_pair() {
        // a + c = 2 pointwise up to rounding; also the cosine integrates to
        // zero on its own, which the fine-grid sum checks independently.
        let l = 3.0;
        let domain = DomainSpec::new(&[l]).unwrap();
        for n in [16, 256, 4096] {
            let grid = Grid::new(&domain, &[n]).unwrap();
            let x = grid.centers(0);
            let a: Vec<f64> = x.iter().map(|x| 1.0 + 0.5 * (PI * x / l).cos()).collect();
            let c: Vec<f64> = x.iter().map(|x| 1.0 - 0.5 * (PI * x / l).cos()).collect();
            let b = vec![1.0; n];
            let f = SpeciesFields::new(a.clone(), b, c).unwrap();
            let (m1, _) = conserved_masses(&f, &grid).unwrap();
            assert!((m1 - 2.0).abs() < 1e-13);
            let mean_a: f64 = a.iter().sum::<f64>() / n as f64;
            assert!((mean_a - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn gamma_constant_is_finite() {
        let pts: Vec<f64> = (0..40).map(|k| 1e-6 * 10f64.powf(k as f64 * 9.0 / 39.0)).collect();
        let pairs = pts.iter().flat_map(|&x| pts.iter().map(move |&y| (x, y)));
        let c = fit_gamma_constant(pairs).unwrap();
        assert!(c.is_finite() && c >= 2.0);
    }
}
