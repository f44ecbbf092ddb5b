//! Exact time propagator `exp(tau L)` of the discrete Neumann Laplacian.
//!
//! `L` is a sum of one-dimensional second-difference operators acting on
//! separate axes, each diagonalized by the DCT-II basis, so the propagator
//! factors into one dense `n x n` matrix per axis.

use std::f64::consts::PI;

use crate::grid::Grid;

#[derive(Debug, Clone)]
pub struct HeatPropagator {
    /// One row-major `n x n` matrix per axis, `None` for single-cell axes.
    axes: Vec<Option<Vec<f64>>>,
    cells: Vec<usize>,
}

/// Eigenvalues of the 1D Neumann second difference: `-(4/h^2) sin^2(pi k / 2n)`.
pub fn neumann_eigenvalue(k: usize, n: usize, h: f64) -> f64 {
    let s = (PI * k as f64 / (2.0 * n as f64)).sin();
    -4.0 * s * s / (h * h)
}

/// Orthonormal DCT-II basis vector `k` evaluated at cell `i`.
pub fn neumann_mode(k: usize, i: usize, n: usize) -> f64 {
    let scale = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
    scale * (PI * k as f64 * (i as f64 + 0.5) / n as f64).cos()
}

const NOISE_FLOOR: f64 = 1e-15;

fn axis_matrix(n: usize, h: f64, tau: f64) -> Vec<f64> {
    let decay: Vec<f64> = (0..n).map(|k| (tau * neumann_eigenvalue(k, n, h)).exp()).collect();
    let modes: Vec<f64> = (0..n)
        .flat_map(|k| (0..n).map(move |i| neumann_mode(k, i, n)))
        .collect();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for k in 0..n {
                s += modes[k * n + i] * decay[k] * modes[k * n + j];
            }
            // exact entries are positive, but far off the diagonal they
            // drown in rounding noise of either sign
            let s = if s < NOISE_FLOOR { 0.0 } else { s };
            m[i * n + j] = s;
            m[j * n + i] = s;
        }
    }
    // unit column sums, so the cell total is conserved up to the
    // rounding of one matrix-vector product
    for j in 0..n {
        let off: f64 = (0..n).filter(|&i| i != j).map(|i| m[i * n + j]).sum();
        m[j * n + j] = 1.0 - off;
    }
    m
}

impl HeatPropagator {
    /// Propagator for `du/dt = d L u` over a time `tau`.
    pub fn new(grid: &Grid, d: f64, tau: f64) -> Self {
        let axes = grid
            .cells()
            .iter()
            .zip(grid.spacing())
            .map(|(&n, &h)| (n > 1).then(|| axis_matrix(n, h, d * tau)))
            .collect();
        Self {
            axes,
            cells: grid.cells().to_vec(),
        }
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut cur = u.to_vec();
        let mut line = Vec::new();
        let total = u.len();
        for (axis, mat) in self.axes.iter().enumerate() {
            let Some(mat) = mat else { continue };
            let n = self.cells[axis];
            let stride: usize = self.cells[axis + 1..].iter().product();
            let outer = total / (n * stride);
            line.resize(n, 0.0);
            let mut next = vec![0.0; total];
            for o in 0..outer {
                for s in 0..stride {
                    let base = o * n * stride + s;
                    for (k, v) in line.iter_mut().enumerate() {
                        *v = cur[base + k * stride];
                    }
                    for i in 0..n {
                        let row = &mat[i * n..(i + 1) * n];
                        let acc: f64 = row.iter().zip(&line).map(|(a, b)| a * b).sum();
                        next[base + i * stride] = acc;
                    }
                }
            }
            cur = next;
        }
        cur
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::laplacian_neumann;
    use crate::model::DomainSpec;

    #[test]
    fn modes_are_eigenvectors() {
        let d = DomainSpec::new(&[2.0]).unwrap();
        let n = 10;
        let g = Grid::new(&d, &[n]).unwrap();
        let h = g.spacing()[0];
        for k in 0..n {
            let v: Vec<f64> = (0..n).map(|i| neumann_mode(k, i, n)).collect();
            let lv = laplacian_neumann(&v, &g);
            let lam = neumann_eigenvalue(k, n, h);
            for i in 0..n {
                assert!((lv[i] - lam * v[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constants_are_fixed_and_mass_is_kept() {
        let d = DomainSpec::new(&[1.0, 2.0]).unwrap();
        let g = Grid::new(&d, &[6, 5]).unwrap();
        let p = HeatPropagator::new(&g, 0.7, 0.3);
        let out = p.apply(&vec![2.5; g.n_cells()]);
        assert!(out.iter().all(|v| (v - 2.5).abs() < 1e-14));
        let u: Vec<f64> = (0..g.n_cells()).map(|i| 1.0 + (i % 7) as f64).collect();
        let v = p.apply(&u);
        let (s0, s1): (f64, f64) = (u.iter().sum(), v.iter().sum());
        assert!((s0 - s1).abs() < 1e-13 * s0);
        assert!(v.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn propagator_semigroup() {
        let d = DomainSpec::new(&[1.0]).unwrap();
        let g = Grid::new(&d, &[16]).unwrap();
        let u: Vec<f64> = (0..16).map(|i| if i < 4 { 3.0 } else { 1.0 }).collect();
        let once = HeatPropagator::new(&g, 1.0, 0.02).apply(&u);
        let half = HeatPropagator::new(&g, 1.0, 0.01);
        let twice = half.apply(&half.apply(&u));
        for (x, y) in once.iter().zip(&twice) {
            assert!((x - y).abs() < 1e-13);
        }
    }
}
