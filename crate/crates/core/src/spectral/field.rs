//! Spatial grids and fields on `H^n`, and spectral fields on a [`FrequencyGrid`].

use super::grid::FrequencyGrid;
use crate::error::{invalid, Error, Result};
use crate::group_core::GroupPoint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Uniform grid on `[−L, L]^{2n} × [−L_z, L_z]` with `N` points per
/// horizontal axis and `N_z` in `z`, endpoints included, so every axis is
/// symmetric about 0. Node `j` sits at `−L + jh`, `h = 2L/(N−1)`, and
/// carries weight `h`; fields are expected to vanish on the faces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub n: usize,
    pub half_width: f64,
    pub points: usize,
    pub z_half_width: f64,
    pub z_points: usize,
}

impl SpatialGrid {
    pub fn new(n: usize, half_width: f64, points: usize, z_half_width: f64, z_points: usize) -> Result<Self> {
        let g = Self {
            n,
            half_width,
            points,
            z_half_width,
            z_points,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        if !(self.half_width > 0.0 && self.z_half_width > 0.0) {
            return Err(invalid("half_width", "grid extents must be positive"));
        }
        if self.points < 2 || self.z_points < 2 {
            return Err(invalid("points", "need at least two points per axis"));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn hz(&self) -> f64 {
        2.0 * self.z_half_width / (self.z_points - 1) as f64
    }

    pub fn axis(&self) -> Vec<f64> {
        (0..self.points)
            .map(|j| -self.half_width + j as f64 * self.h())
            .collect()
    }

    pub fn z_axis(&self) -> Vec<f64> {
        (0..self.z_points)
            .map(|j| -self.z_half_width + j as f64 * self.hz())
            .collect()
    }

    /// Number of horizontal points `N^{2n}`.
    pub fn horizontal_count(&self) -> usize {
        self.points.pow(2 * self.n as u32)
    }

    pub fn len(&self) -> usize {
        self.horizontal_count() * self.z_points
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lebesgue (Haar) weight of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(2 * self.n as i32) * self.hz()
    }

    pub fn horizontal_cell(&self) -> f64 {
        self.h().powi(2 * self.n as i32)
    }

    /// Axis indices of horizontal point `v`, ordered `x_1..x_n, y_1..y_n`.
    pub fn horizontal_indices(&self, v: usize) -> Vec<usize> {
        let mut idx = vec![0; 2 * self.n];
        let mut r = v;
        for slot in idx.iter_mut().rev() {
            *slot = r % self.points;
            r /= self.points;
        }
        idx
    }

    /// Coordinates `(x, y)` of horizontal point `v`.
    pub fn horizontal_point(&self, v: usize) -> (Vec<f64>, Vec<f64>) {
        let h = self.h();
        let c: Vec<f64> = self
            .horizontal_indices(v)
            .into_iter()
            .map(|i| -self.half_width + i as f64 * h)
            .collect();
        (c[..self.n].to_vec(), c[self.n..].to_vec())
    }

    pub fn point(&self, idx: usize) -> GroupPoint {
        let v = idx / self.z_points;
        let iz = idx % self.z_points;
        let (x, y) = self.horizontal_point(v);
        GroupPoint {
            x,
            y,
            z: -self.z_half_width + iz as f64 * self.hz(),
        }
    }

    /// Whether flat index `idx` lies on the first or last layer of some axis.
    pub fn on_boundary(&self, idx: usize) -> bool {
        let v = idx / self.z_points;
        let iz = idx % self.z_points;
        iz == 0
            || iz + 1 == self.z_points
            || self
                .horizontal_indices(v)
                .iter()
                .any(|&i| i == 0 || i + 1 == self.points)
    }
}

/// Complex values on a [`SpatialGrid`], stored `[horizontal point][z]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialField {
    pub grid: Arc<SpatialGrid>,
    pub values: Vec<Complex64>,
}

impl SpatialField {
    pub fn zeros(grid: Arc<SpatialGrid>) -> Self {
        let len = grid.len();
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn from_fn<F: Fn(&GroupPoint) -> f64 + Sync>(grid: Arc<SpatialGrid>, f: F) -> Self {
        use rayon::prelude::*;
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| Complex64::new(f(&grid.point(i)), 0.0))
            .collect();
        Self { grid, values }
    }

    pub fn from_complex_fn<F: Fn(&GroupPoint) -> Complex64 + Sync>(grid: Arc<SpatialGrid>, f: F) -> Self {
        use rayon::prelude::*;
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(&grid.point(i)))
            .collect();
        Self { grid, values }
    }

    pub fn from_values(grid: Arc<SpatialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("spatial field values".into()));
        }
        Ok(Self { grid, values })
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && *self.grid != *other.grid {
            return Err(Error::GridMismatch("spatial grids differ".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.cell_volume()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |f − g| / max |g|`.
    pub fn sup_relative_error(&self, reference: &Self) -> Result<f64> {
        self.check_same(reference)?;
        let d = self
            .values
            .iter()
            .zip(&reference.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        Ok(d / reference.sup_norm().max(f64::MIN_POSITIVE))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn map<F: Fn(&GroupPoint, Complex64) -> Complex64>(&self, f: F) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| f(&self.grid.point(i), *v))
                .collect(),
        }
    }

    /// Drops imaginary parts.
    pub fn real_part(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| Complex64::new(v.re, 0.0)).collect(),
        }
    }

    pub fn max_imaginary(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Largest `|f|` on the faces of the box relative to `max |f|`.
    pub fn boundary_ratio(&self) -> f64 {
        let max = self.sup_norm();
        if max == 0.0 {
            return 0.0;
        }
        let b = self
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.on_boundary(*i))
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max);
        b / max
    }
}

/// Coefficients `f̂(m, ℓ, λ)` on a [`FrequencyGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: Arc<FrequencyGrid>,
    pub coeff: Vec<Complex64>,
    /// Set when only `m = ℓ` entries can be nonzero.
    pub diagonal: bool,
}

impl SpectralField {
    pub fn zeros(grid: Arc<FrequencyGrid>) -> Self {
        let len = grid.total_slots();
        Self {
            grid,
            coeff: vec![Complex64::new(0.0, 0.0); len],
            diagonal: false,
        }
    }

    /// Field with `F(m, ℓ, λ) = f(m, ℓ, λ)` on every kept slot.
    pub fn from_fn<F: Fn(&[usize], &[usize], f64) -> Complex64>(grid: Arc<FrequencyGrid>, f: F) -> Self {
        let mut out = Self::zeros(grid.clone());
        let multi = grid.multi();
        for s in 0..grid.num_nodes() {
            let lam = grid.lambda(s);
            let base = grid.node_range(s).start;
            for mi in 0..grid.multi_count(s) {
                for di in 0..grid.band_count() {
                    if let Some(li) = grid.partner(s, mi, di) {
                        out.coeff[base + grid.local_slot(mi, di)] = f(multi.get(mi), multi.get(li), lam);
                    }
                }
            }
        }
        out
    }

    /// Diagonal field `F(m, m, λ) = f(m, λ)`.
    pub fn diagonal_from_fn<F: Fn(&[usize], f64) -> Complex64>(grid: Arc<FrequencyGrid>, f: F) -> Self {
        let mut out = Self::zeros(grid.clone());
        let multi = grid.multi();
        let d0 = grid.diagonal_offset();
        for s in 0..grid.num_nodes() {
            let lam = grid.lambda(s);
            let base = grid.node_range(s).start;
            for mi in 0..grid.multi_count(s) {
                out.coeff[base + grid.local_slot(mi, d0)] = f(multi.get(mi), lam);
            }
        }
        out.diagonal = true;
        out
    }

    pub fn check_same(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && *self.grid != *other.grid {
            return Err(Error::GridMismatch("frequency grids differ".into()));
        }
        Ok(())
    }

    pub fn get(&self, s: usize, mi: usize, li: usize) -> Complex64 {
        self.grid
            .slot(s, mi, li)
            .map(|i| self.coeff[i])
            .unwrap_or_default()
    }

    /// `c_n Σ_{m,ℓ} ∫ |F|² |λ|^n dλ` by the grid quadrature.
    pub fn plancherel_norm(&self) -> f64 {
        (0..self.grid.num_nodes())
            .map(|s| {
                let w = self.grid.weight(s);
                w * self.coeff[self.grid.node_range(s)]
                    .iter()
                    .map(|c| c.norm_sqr())
                    .sum::<f64>()
            })
            .sum()
    }

    /// Plancherel pairing `c_n Σ ∫ F conj(G) |λ|^n dλ`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same(other)?;
        Ok((0..self.grid.num_nodes())
            .map(|s| {
                let r = self.grid.node_range(s);
                self.coeff[r.clone()]
                    .iter()
                    .zip(&other.coeff[r])
                    .map(|(a, b)| a * b.conj())
                    .sum::<Complex64>()
                    * self.grid.weight(s)
            })
            .sum())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            coeff: self.coeff.iter().map(|v| v * c).collect(),
            diagonal: self.diagonal,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            coeff: self.coeff.iter().zip(&other.coeff).map(|(a, b)| a + b).collect(),
            diagonal: self.diagonal && other.diagonal,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            coeff: self.coeff.iter().zip(&other.coeff).map(|(a, b)| a - b).collect(),
            diagonal: self.diagonal && other.diagonal,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.coeff.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `max |F(m,ℓ,−λ) − conj F(m,ℓ,λ)|`; zero for transforms of real fields.
    pub fn hermitian_defect(&self) -> f64 {
        let p = self.grid.positive_nodes();
        let mut worst: f64 = 0.0;
        for s in 0..p {
            let a = &self.coeff[self.grid.node_range(s)];
            let b = &self.coeff[self.grid.node_range(s + p)];
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x.conj() - y).norm());
            }
        }
        worst
    }

    /// Largest off-diagonal coefficient magnitude.
    pub fn off_diagonal_max(&self) -> f64 {
        let d0 = self.grid.diagonal_offset();
        let nb = self.grid.band_count();
        let mut worst: f64 = 0.0;
        for s in 0..self.grid.num_nodes() {
            let r = self.grid.node_range(s);
            for (k, c) in self.coeff[r].iter().enumerate() {
                if k % nb != d0 {
                    worst = worst.max(c.norm());
                }
            }
        }
        worst
    }

    /// Plancherel mass carried by the top Hermite level of each node,
    /// relative to the total: a truncation diagnostic.
    pub fn truncation_tail(&self) -> f64 {
        let total = self.plancherel_norm();
        if total == 0.0 {
            return 0.0;
        }
        let g = &self.grid;
        let multi = g.multi();
        let nb = g.band_count();
        let mut tail = 0.0;
        for s in 0..g.num_nodes() {
            let m = g.truncation(s);
            let base = g.node_range(s).start;
            for mi in 0..g.multi_count(s) {
                if multi.degree(mi) == m {
                    for di in 0..nb {
                        tail += g.weight(s) * self.coeff[base + mi * nb + di].norm_sqr();
                    }
                }
            }
        }
        tail / total
    }
}
