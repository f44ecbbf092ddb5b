//! Cell-centered finite volumes on a uniform box grid.
//!
//! Cells are stored in row-major order (last axis fastest). All reductions
//! run sequentially in storage order so results are bit-reproducible.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::DomainSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    cells: Vec<usize>,
    lengths: Vec<f64>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
    cell_volume: f64,
    volume: f64,
    n_cells: usize,
}

impl Grid {
    pub fn new(domain: &DomainSpec, cells: &[usize]) -> Result<Self> {
        if cells.len() != domain.dimension() {
            return Err(Error::InvalidArgument(format!(
                "{} cell counts given for a {}-dimensional domain",
                cells.len(),
                domain.dimension()
            )));
        }
        if cells.contains(&0) {
            return Err(Error::InvalidArgument("cell counts must be positive".into()));
        }
        let lengths = domain.lengths().to_vec();
        let spacing: Vec<f64> = lengths
            .iter()
            .zip(cells)
            .map(|(l, &n)| l / n as f64)
            .collect();
        let mut strides = vec![1; cells.len()];
        for ax in (0..cells.len().saturating_sub(1)).rev() {
            strides[ax] = strides[ax + 1] * cells[ax + 1];
        }
        Ok(Self {
            n_cells: cells.iter().product(),
            cell_volume: spacing.iter().product(),
            volume: domain.volume(),
            cells: cells.to_vec(),
            lengths,
            spacing,
            strides,
        })
    }

    pub fn dimension(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub(crate) fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// Index of cell `idx` along `axis`.
    pub fn coord(&self, idx: usize, axis: usize) -> usize {
        (idx / self.strides[axis]) % self.cells[axis]
    }

    /// Cell-center coordinate along `axis` for every cell, in storage order.
    pub fn centers(&self, axis: usize) -> Vec<f64> {
        let h = self.spacing[axis];
        (0..self.n_cells)
            .map(|i| (self.coord(i, axis) as f64 + 0.5) * h)
            .collect()
    }

    /// Smallest nonzero eigenvalue of `-laplacian_neumann` on this grid,
    /// `min_axis (4 / h^2) sin^2(pi h / (2 L))`.
    pub fn spectral_gap(&self) -> f64 {
        self.cells
            .iter()
            .zip(&self.spacing)
            .filter(|(&n, _)| n > 1)
            .map(|(&n, &h)| (2.0 / h * (PI / (2.0 * n as f64)).sin()).powi(2))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Cell averages of the three concentrations.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesFields {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl SpeciesFields {
    /// Builds fields after checking every entry is finite and strictly
    /// positive.
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() || a.len() != c.len() {
            return Err(Error::InvalidField(format!(
                "species arrays differ in length ({}, {}, {})",
                a.len(),
                b.len(),
                c.len()
            )));
        }
        let f = Self { a, b, c };
        f.check_positive()?;
        Ok(f)
    }

    pub fn uniform(grid: &Grid, a: f64, b: f64, c: f64) -> Result<Self> {
        let n = grid.n_cells();
        Self::new(vec![a; n], vec![b; n], vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn species(&self) -> [&[f64]; 3] {
        [&self.a, &self.b, &self.c]
    }

    pub fn species_mut(&mut self) -> [&mut Vec<f64>; 3] {
        [&mut self.a, &mut self.b, &mut self.c]
    }

    pub fn check_finite(&self) -> Result<()> {
        for (name, u) in [("a", &self.a), ("b", &self.b), ("c", &self.c)] {
            if let Some(i) = u.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidField(format!("{name}[{i}] = {} is not finite", u[i])));
            }
        }
        Ok(())
    }

    pub fn check_positive(&self) -> Result<()> {
        self.check_finite()?;
        for u in [&self.a, &self.b, &self.c] {
            check_positive(u)?;
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &SpeciesFields) -> f64 {
        self.species()
            .iter()
            .zip(other.species())
            .flat_map(|(u, v)| u.iter().zip(v).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn check_positive(u: &[f64]) -> Result<()> {
    match u.iter().position(|&v| !(v > 0.0)) {
        Some(index) => Err(Error::NotPositive {
            index,
            value: u[index],
        }),
        None => Ok(()),
    }
}

/// Conservative Neumann Laplacian: per cell, the sum over faces of
/// `(neighbor - self) / h^2`, with boundary faces carrying no flux.
pub fn laplacian_neumann(u: &[f64], grid: &Grid) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    laplacian_into(u, grid, &mut out);
    out
}

pub(crate) fn laplacian_into(u: &[f64], grid: &Grid, out: &mut [f64]) {
    debug_assert_eq!(u.len(), grid.n_cells());
    out.iter_mut().for_each(|v| *v = 0.0);
    for axis in 0..grid.dimension() {
        let n = grid.cells()[axis];
        let stride = grid.stride(axis);
        let inv_h2 = 1.0 / (grid.spacing()[axis] * grid.spacing()[axis]);
        for i in 0..u.len() {
            let k = grid.coord(i, axis);
            let mut acc = 0.0;
            if k > 0 {
                acc += u[i - stride] - u[i];
            }
            if k + 1 < n {
                acc += u[i + stride] - u[i];
            }
            out[i] += acc * inv_h2;
        }
    }
}

/// Midpoint quadrature `cell_volume * sum(u)`.
pub fn integrate(u: &[f64], grid: &Grid) -> f64 {
    grid.cell_volume() * u.iter().sum::<f64>()
}

pub fn mean(u: &[f64], grid: &Grid) -> f64 {
    integrate(u, grid) / grid.volume()
}

/// `(cell_volume * sum |u|^p)^(1/p)`, or `max |u|` for `p = inf`.
pub fn lp_norm(u: &[f64], p: f64, grid: &Grid) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if p.is_infinite() {
        return Ok(u.iter().fold(0.0, |m, v| f64::max(m, v.abs())));
    }
    Ok(lp_sum(u, p, grid).powf(1.0 / p))
}

/// `cell_volume * sum |u|^p`, for any `p > 0`.
pub(crate) fn lp_sum(u: &[f64], p: f64, grid: &Grid) -> f64 {
    let s: f64 = if p == 1.0 {
        u.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        u.iter().map(|v| v * v).sum()
    } else {
        u.iter().map(|v| v.abs().powf(p)).sum()
    };
    grid.cell_volume() * s
}

/// Face-based discrete Dirichlet energy `sum_faces cell_volume ((u_R - u_L)/h)^2`.
pub fn dirichlet_energy(u: &[f64], grid: &Grid) -> f64 {
    let mut total = 0.0;
    for axis in 0..grid.dimension() {
        let n = grid.cells()[axis];
        let stride = grid.stride(axis);
        let h = grid.spacing()[axis];
        let mut s = 0.0;
        for i in 0..u.len() {
            if grid.coord(i, axis) + 1 < n {
                let g = (u[i + stride] - u[i]) / h;
                s += g * g;
            }
        }
        total += grid.cell_volume() * s;
    }
    total
}

/// Discrete `int |grad sqrt(u)|^2`, differencing `sqrt` of the cell values.
pub fn sqrt_gradient_energy(u: &[f64], grid: &Grid) -> Result<f64> {
    check_positive(u)?;
    let roots: Vec<f64> = u.iter().map(|v| v.sqrt()).collect();
    Ok(dirichlet_energy(&roots, grid))
}

/// `|| u - mean(u) ||_{L^2}`.
pub fn deviation_l2(u: &[f64], grid: &Grid) -> f64 {
    let m = mean(u, grid);
    let s: f64 = u.iter().map(|v| (v - m) * (v - m)).sum();
    (grid.cell_volume() * s).sqrt()
}

/// Volume-weighted inner product.
pub fn inner(u: &[f64], v: &[f64], grid: &Grid) -> f64 {
    grid.cell_volume() * u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>()
}
