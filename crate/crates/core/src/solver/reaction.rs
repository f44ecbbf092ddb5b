//! Closed-form integration of the pointwise mass-action kinetics
//! `a' = b' = c - ab`, `c' = ab - c`.
//!
//! With `m1 = a + c` and `m2 = b + c` frozen, `c' = (c - r1)(c - r2)` where
//! `r1 < r2` are the roots of `c^2 - (1 + m1 + m2) c + m1 m2`. This is a
//! Riccati equation whose flow is known in closed form.

use crate::grid::SpeciesFields;
use crate::model::equilibrium_discriminant;

/// Roots `(r1, r2)`, `r1 < r2`, of `c^2 - (1 + m1 + m2) c + m1 m2`.
pub fn riccati_roots(m1: f64, m2: f64) -> (f64, f64) {
    let sq = equilibrium_discriminant(m1, m2).sqrt();
    let r2 = 0.5 * (1.0 + m1 + m2 + sq);
    (m1 * m2 / r2, r2)
}

/// Advances one cell by `dt`; returns `(a, b, c)`.
///
/// The update is written as an increment `dc` applied to all three species
/// so that `a + c` and `b + c` are preserved up to a single rounding each.
pub fn reaction_cell(a: f64, b: f64, c: f64, dt: f64) -> (f64, f64, f64) {
    let (r1, r2) = riccati_roots(a + c, b + c);
    if (c - r1).abs() < 1e-15 * r2 {
        return (a, b, c);
    }
    let decay = (-(r2 - r1) * dt).exp();
    let one_minus = -(-(r2 - r1) * dt).exp_m1();
    let dc = (r1 - c) * (r2 - c) * one_minus / ((r2 - c) + (c - r1) * decay);
    (a - dc, b - dc, c + dc)
}

/// Exact reaction flow over `dt`, cell by cell.
pub fn reaction_substep(fields: &SpeciesFields, dt: f64) -> SpeciesFields {
    let n = fields.len();
    let mut out = SpeciesFields {
        a: Vec::with_capacity(n),
        b: Vec::with_capacity(n),
        c: Vec::with_capacity(n),
    };
    for i in 0..n {
        let (a, b, c) = reaction_cell(fields.a[i], fields.b[i], fields.c[i], dt);
        out.a.push(a);
        out.b.push(b);
        out.c.push(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::equilibrium_state;
    use proptest::prelude::*;

    #[test]
    fn local_equilibrium_is_fixed() {
        let r2 = 2.0_f64.sqrt();
        for dt in [1e-3, 1.0, 1e3] {
            let (a, b, c) = reaction_cell(r2, r2 - 1.0, 2.0 - r2, dt);
            assert!((a - r2).abs() < 1e-15);
            assert!((b - (r2 - 1.0)).abs() < 1e-15);
            assert!((c - (2.0 - r2)).abs() < 1e-15);
        }
        let eq = equilibrium_state(2.0, 1.0).unwrap();
        assert!((riccati_roots(2.0, 1.0).0 - eq.c_inf).abs() < 1e-15);
    }

    #[test]
    fn long_time_limit_is_r1() {
        let eps = 1e-300;
        let (a, b, c) = reaction_cell(2.0, 1.0, eps, 1e4);
        let r2 = 2.0_f64.sqrt();
        assert!((a - r2).abs() < 1e-14);
        assert!((b - (r2 - 1.0)).abs() < 1e-14);
        assert!((c - (2.0 - r2)).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn roots_bracket_the_masses(m1 in 1e-6f64..1e3, m2 in 1e-6f64..1e3) {
            let (r1, r2) = riccati_roots(m1, m2);
            prop_assert!(r1 <= m1.min(m2));
            prop_assert!(m1.min(m2) < r2);
            prop_assert!(r1 > 0.0);
        }

        #[test]
        fn local_masses_and_positivity(
            a in 1e-4f64..10.0, b in 1e-4f64..10.0, c in 1e-4f64..10.0, dt in 1e-4f64..100.0
        ) {
            let (na, nb, nc) = reaction_cell(a, b, c, dt);
            prop_assert!(na > 0.0 && nb > 0.0 && nc > 0.0);
            prop_assert!(((na + nc) - (a + c)).abs() <= 4.0 * f64::EPSILON * (a + c));
            prop_assert!(((nb + nc) - (b + c)).abs() <= 4.0 * f64::EPSILON * (b + c));
            let (r1, _) = riccati_roots(a + c, b + c);
            let (lo, hi) = if c < r1 { (c, r1) } else { (r1, c) };
            prop_assert!(nc >= lo * (1.0 - 1e-14) && nc <= hi * (1.0 + 1e-14));
        }
    }
}
