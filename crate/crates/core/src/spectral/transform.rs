//! Forward and inverse projective Fourier transform by grid quadrature.
//!
//! In one dimension `K_{m,ℓ,λ}(x, y) = e^{±ikθ} ℒ(2|λ|r²)` with `k = |m − ℓ|`,
//! so horizontal points are grouped by radius: Laguerre tables are built once
//! per radius and the angle enters through `2D + 1` moments per group.

use super::field::{SpatialField, SpatialGrid, SpectralField};
use super::grid::FrequencyGrid;
use crate::error::{Error, Result};
use crate::group_core::GroupPoint;
use crate::special_functions::{laguerre_functions_into, KernelTable1d};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Boundary values above this fraction of the maximum trigger a warning.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Kernels `K_{m,ℓ,λ}(x, y)` at one horizontal point and one node.
struct PointKernels {
    tables: Vec<KernelTable1d>,
}

impl PointKernels {
    fn new(lambda: f64, x: &[f64], y: &[f64], m_max: usize, band: usize) -> Self {
        Self {
            tables: x
                .iter()
                .zip(y)
                .map(|(&xj, &yj)| KernelTable1d::new(lambda, xj, yj, m_max, band))
                .collect(),
        }
    }

    #[inline]
    fn get(&self, m: &[usize], l: &[usize]) -> Complex64 {
        let mut k = self.tables[0].get(m[0], l[0]);
        for j in 1..self.tables.len() {
            k *= self.tables[j].get(m[j], l[j]);
        }
        k
    }
}

/// Horizontal points of a one-dimensional grid grouped by `r²`, with
/// `e^{−iθ}` for each member.
struct RadialClasses {
    classes: Vec<(f64, Vec<(usize, Complex64)>)>,
}

impl RadialClasses {
    fn new(sg: &SpatialGrid) -> Self {
        let mut map: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        let c = sg.points as i64 - 1;
        for v in 0..sg.horizontal_count() {
            let idx = sg.horizontal_indices(v);
            let a = 2 * idx[0] as i64 - c;
            let b = 2 * idx[1] as i64 - c;
            map.entry((a * a + b * b) as u64).or_default().push(v);
        }
        let classes = map
            .into_values()
            .map(|members| {
                let (x, y) = sg.horizontal_point(members[0]);
                let r2 = x[0] * x[0] + y[0] * y[0];
                let list = members
                    .into_iter()
                    .map(|v| {
                        let (x, y) = sg.horizontal_point(v);
                        (v, Complex64::from_polar(1.0, -y[0].atan2(x[0])))
                    })
                    .collect();
                (r2, list)
            })
            .collect();
        Self { classes }
    }
}

/// `lag[k][j] = ℒ_j^{(k)}(X)` for `k ≤ band`, `j ≤ m_max − k`, reusing buffers.
fn fill_laguerre(lag: &mut [Vec<f64>], big_x: f64, m_max: usize, band: usize) {
    for (k, row) in lag.iter_mut().enumerate().take(band.min(m_max) + 1) {
        let len = m_max - k + 1;
        if row.len() < len {
            row.resize(len, 0.0);
        }
        laguerre_functions_into(k, big_x, m_max - k, row);
    }
}

fn check_dims(spatial: &SpatialGrid, grid: &FrequencyGrid) -> Result<()> {
    if spatial.n != grid.n() {
        return Err(Error::DimensionMismatch {
            expected: grid.n(),
            got: spatial.n,
        });
    }
    Ok(())
}

/// Warning text when `f` carries mass on the faces of its box.
pub fn boundary_warning(f: &SpatialField) -> Option<String> {
    let r = f.boundary_ratio();
    (r > BOUNDARY_TOLERANCE).then(|| {
        format!("field reaches {r:.3e} of its maximum on the grid boundary; the transform truncates it")
    })
}

/// Warning text when the frequency grid keeps kernels the spatial grid cannot sample.
pub fn resolution_warning(sg: &SpatialGrid, grid: &FrequencyGrid) -> Option<String> {
    let n = grid.n() as f64;
    let nyquist = 2.0 * std::f64::consts::PI / sg.h();
    let worst = (0..grid.positive_nodes())
        .map(|s| (4.0 * grid.lambda(s) * (2.0 * grid.truncation(s) as f64 + n)).sqrt())
        .fold(0.0, f64::max);
    (worst > nyquist).then(|| {
        format!("kernel frequency {worst:.2} exceeds the sampling limit {nyquist:.2} of the spatial grid")
    })
}

/// `F_z(v, λ_s) = Σ_z e^{−iλ_s z} f(v, z) h_z · h^{2n}` for every horizontal point.
fn z_integrals(f: &SpatialField, lam: f64) -> Vec<Complex64> {
    let sg = &*f.grid;
    let nz = sg.z_points;
    let w = sg.hz() * sg.horizontal_cell();
    let phases: Vec<Complex64> = sg
        .z_axis()
        .iter()
        .map(|&z| Complex64::from_polar(w, -lam * z))
        .collect();
    f.values
        .chunks(nz)
        .map(|row| row.iter().zip(&phases).map(|(a, b)| a * b).sum())
        .collect()
}

fn forward_node_radial(
    grid: &FrequencyGrid,
    s: usize,
    fz: &[Complex64],
    classes: &RadialClasses,
) -> Vec<Complex64> {
    let lam = grid.lambda(s);
    let mm = grid.truncation(s);
    let d = grid.band().min(mm);
    let nb = grid.band_count();
    let dd = grid.band() as i64;
    let mut block = vec![ZERO; grid.multi_count(s) * nb];
    let mut lag = vec![Vec::new(); d + 1];
    let mut moments = vec![ZERO; 2 * d + 1];
    for (r2, members) in &classes.classes {
        // A[k] = Σ e^{−i sgn(λ) k θ} F_z for k = −d..d
        moments.iter_mut().for_each(|a| *a = ZERO);
        let mut any = false;
        for &(v, u) in members {
            let val = fz[v];
            if val == ZERO {
                continue;
            }
            any = true;
            let u = if lam > 0.0 { u } else { u.conj() };
            moments[d] += val;
            let mut pp = Complex64::new(1.0, 0.0);
            for k in 1..=d {
                pp *= u;
                moments[d + k] += pp * val;
                moments[d - k] += pp.conj() * val;
            }
        }
        if !any {
            continue;
        }
        fill_laguerre(&mut lag, 2.0 * lam.abs() * r2, mm, d);
        for k in 0..=d {
            let row = &lag[k];
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let a_pos = moments[d + k];
            let a_neg = moments[d - k] * sign;
            for (j, &lv) in row.iter().enumerate().take(mm - k + 1) {
                // m = j + k, ℓ = j   (offset ℓ − m = −k)
                block[(j + k) * nb + (dd - k as i64) as usize] += a_pos * lv;
                if k > 0 {
                    // m = j, ℓ = j + k   (offset +k)
                    block[j * nb + (dd + k as i64) as usize] += a_neg * lv;
                }
            }
        }
    }
    block
}

fn forward_node_general(
    grid: &FrequencyGrid,
    s: usize,
    fz: &[Complex64],
    points: &[(Vec<f64>, Vec<f64>)],
) -> Vec<Complex64> {
    let lam = grid.lambda(s);
    let multi = grid.multi();
    let nb = grid.band_count();
    let pairs = node_pairs(grid, s);
    let mut block = vec![ZERO; grid.multi_count(s) * nb];
    for (v, (x, y)) in points.iter().enumerate() {
        if fz[v] == ZERO {
            continue;
        }
        let k = PointKernels::new(lam, x, y, grid.truncation(s), grid.band());
        for &(slot, mi, li) in &pairs {
            block[slot] += k.get(multi.get(mi), multi.get(li)).conj() * fz[v];
        }
    }
    block
}

/// `(local slot, m index, ℓ index)` of every kept pair at node `s`.
fn node_pairs(grid: &FrequencyGrid, s: usize) -> Vec<(usize, usize, usize)> {
    let nb = grid.band_count();
    let mut out = Vec::new();
    for mi in 0..grid.multi_count(s) {
        for di in 0..nb {
            if let Some(li) = grid.partner(s, mi, di) {
                out.push((mi * nb + di, mi, li));
            }
        }
    }
    out
}

/// `f̂(m, ℓ, λ) = ∫ conj(e^{iλz} K_{m,ℓ,λ}(q)) f(q) dμ(q)` on every slot of `grid`.
///
/// For real `f` only `λ > 0` is computed and the negative nodes are filled
/// by conjugation.
pub fn forward_transform(f: &SpatialField, grid: &Arc<FrequencyGrid>) -> Result<SpectralField> {
    let sg = &*f.grid;
    check_dims(sg, grid)?;
    let real = f.max_imaginary() == 0.0;
    let p = grid.positive_nodes();
    let nodes: Vec<usize> = if real { (0..p).collect() } else { (0..2 * p).collect() };
    let radial = (sg.n == 1).then(|| RadialClasses::new(sg));
    let points: Vec<(Vec<f64>, Vec<f64>)> = if radial.is_none() {
        (0..sg.horizontal_count()).map(|v| sg.horizontal_point(v)).collect()
    } else {
        Vec::new()
    };
    let blocks: Vec<Vec<Complex64>> = nodes
        .par_iter()
        .map(|&s| {
            let fz = z_integrals(f, grid.lambda(s));
            match &radial {
                Some(c) => forward_node_radial(grid, s, &fz, c),
                None => forward_node_general(grid, s, &fz, &points),
            }
        })
        .collect();
    let mut out = SpectralField::zeros(grid.clone());
    for (&s, block) in nodes.iter().zip(&blocks) {
        let r = grid.node_range(s);
        // slots outside the truncation stay zero
        for (local, v) in block.iter().enumerate() {
            let (mi, di) = (local / grid.band_count(), local % grid.band_count());
            if grid.partner(s, mi, di).is_some() {
                out.coeff[r.start + local] = *v;
            }
        }
        if real {
            let ms = grid.mirror(s);
            let (a, b) = (grid.node_range(s), grid.node_range(ms));
            let src: Vec<Complex64> = out.coeff[a].to_vec();
            for (dst, v) in out.coeff[b].iter_mut().zip(src) {
                *dst = v.conj();
            }
        }
    }
    Ok(out)
}

/// `B[k]` moments of node `s` at radius `r²`: `S(θ) = Σ_k e^{i sgn(λ) kθ} B[k]`.
fn inverse_moments(
    field: &SpectralField,
    s: usize,
    r2: f64,
    lag: &mut [Vec<f64>],
    out: &mut [Complex64],
) {
    let grid = &field.grid;
    let lam = grid.lambda(s);
    let mm = grid.truncation(s);
    let d = if field.diagonal { 0 } else { grid.band().min(mm) };
    let nb = grid.band_count();
    let dd = grid.band() as i64;
    let base = grid.node_range(s).start;
    let c = &field.coeff[base..base + grid.multi_count(s) * nb];
    fill_laguerre(lag, 2.0 * lam.abs() * r2, mm, d);
    out.iter_mut().for_each(|v| *v = ZERO);
    let dc = out.len() / 2;
    for k in 0..=d {
        let row = &lag[k];
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut pos = ZERO;
        let mut neg = ZERO;
        for (j, &lv) in row.iter().enumerate().take(mm - k + 1) {
            pos += c[(j + k) * nb + (dd - k as i64) as usize] * lv;
            if k > 0 {
                neg += c[j * nb + (dd + k as i64) as usize] * lv;
            }
        }
        out[dc + k] += pos;
        if k > 0 {
            out[dc - k] += neg * sign;
        }
    }
}

/// `S_s(x, y) = Σ_{m,ℓ} K_{m,ℓ,λ_s}(x, y) F(m, ℓ, λ_s)` for the first `count` nodes.
fn node_sums_at(field: &SpectralField, x: &[f64], y: &[f64], count: usize) -> Vec<Complex64> {
    let grid = &field.grid;
    if grid.n() == 1 {
        let d = grid.band();
        let mut lag = vec![Vec::new(); d + 1];
        let mut mom = vec![ZERO; 2 * d + 1];
        let r2 = x[0] * x[0] + y[0] * y[0];
        let u = Complex64::from_polar(1.0, y[0].atan2(x[0]));
        return (0..count)
            .map(|s| {
                inverse_moments(field, s, r2, &mut lag, &mut mom);
                let u = if grid.lambda(s) > 0.0 { u } else { u.conj() };
                angular_sum(&mom, u)
            })
            .collect();
    }
    let multi = grid.multi();
    (0..count)
        .map(|s| {
            let band = if field.diagonal { 0 } else { grid.band() };
            let k = PointKernels::new(grid.lambda(s), x, y, grid.truncation(s), band);
            let base = grid.node_range(s).start;
            node_pairs(grid, s)
                .into_iter()
                .filter(|&(_, mi, li)| !field.diagonal || mi == li)
                .map(|(slot, mi, li)| k.get(multi.get(mi), multi.get(li)) * field.coeff[base + slot])
                .sum()
        })
        .collect()
}

/// `Σ_k u^k B[k]` with `B` centered at its middle entry.
fn angular_sum(mom: &[Complex64], u: Complex64) -> Complex64 {
    let d = mom.len() / 2;
    let mut acc = mom[d];
    let mut pp = Complex64::new(1.0, 0.0);
    for k in 1..=d {
        pp *= u;
        acc += pp * mom[d + k] + pp.conj() * mom[d - k];
    }
    acc
}

/// `f(q) = c_n Σ_{m,ℓ} ∫ e^{iλz} K_{m,ℓ,λ}(q) F(m,ℓ,λ) |λ|^n dλ` on `target`.
pub fn inverse_transform(field: &SpectralField, target: &Arc<SpatialGrid>) -> Result<SpatialField> {
    check_dims(target, &field.grid)?;
    let grid = &field.grid;
    let hermitian = field.hermitian_defect() == 0.0;
    let count = if hermitian { grid.positive_nodes() } else { grid.num_nodes() };
    let nv = target.horizontal_count();
    // S_s(v) for every node and horizontal point
    let sums: Vec<Vec<Complex64>> = if target.n == 1 {
        let classes = RadialClasses::new(target);
        (0..count)
            .into_par_iter()
            .map(|s| {
                let d = grid.band();
                let mut lag = vec![Vec::new(); d + 1];
                let mut mom = vec![ZERO; 2 * d + 1];
                let mut out = vec![ZERO; nv];
                let flip = grid.lambda(s) < 0.0;
                for (r2, members) in &classes.classes {
                    inverse_moments(field, s, *r2, &mut lag, &mut mom);
                    for &(v, u) in members {
                        // members store e^{−iθ}
                        let u = if flip { u } else { u.conj() };
                        out[v] = angular_sum(&mom, u);
                    }
                }
                out
            })
            .collect()
    } else {
        let per_point: Vec<Vec<Complex64>> = (0..nv)
            .into_par_iter()
            .map(|v| {
                let (x, y) = target.horizontal_point(v);
                node_sums_at(field, &x, &y, count)
            })
            .collect();
        (0..count)
            .map(|s| per_point.iter().map(|row| row[s]).collect())
            .collect()
    };
    let zs = target.z_axis();
    let factor = if hermitian { 2.0 } else { 1.0 };
    let phases: Vec<Vec<Complex64>> = (0..count)
        .map(|s| {
            zs.iter()
                .map(|&z| Complex64::from_polar(factor * grid.weight(s), grid.lambda(s) * z))
                .collect()
        })
        .collect();
    let rows: Vec<Vec<Complex64>> = (0..nv)
        .into_par_iter()
        .map(|v| {
            (0..zs.len())
                .map(|iz| {
                    let c: Complex64 = (0..count).map(|s| sums[s][v] * phases[s][iz]).sum();
                    if hermitian {
                        Complex64::new(c.re, 0.0)
                    } else {
                        c
                    }
                })
                .collect()
        })
        .collect();
    Ok(SpatialField {
        grid: target.clone(),
        values: rows.into_iter().flatten().collect(),
    })
}

/// Inverse transform evaluated at arbitrary points.
pub fn inverse_at_points(field: &SpectralField, points: &[GroupPoint]) -> Result<Vec<Complex64>> {
    let n = field.grid.n();
    if let Some(p) = points.iter().find(|p| p.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.dim(),
        });
    }
    let grid = &field.grid;
    let hermitian = field.hermitian_defect() == 0.0;
    let count = if hermitian { grid.positive_nodes() } else { grid.num_nodes() };
    Ok(points
        .par_iter()
        .map(|q| {
            let sums = node_sums_at(field, &q.x, &q.y, count);
            let c: Complex64 = sums
                .iter()
                .enumerate()
                .map(|(s, v)| grid.weight(s) * Complex64::from_polar(1.0, grid.lambda(s) * q.z) * v)
                .sum();
            if hermitian {
                Complex64::new(2.0 * c.re, 0.0)
            } else {
                c
            }
        })
        .collect())
}

/// Plancherel norm `c_n Σ ∫ |F|² |λ|^n dλ`.
pub fn plancherel_norm(field: &SpectralField) -> f64 {
    field.plancherel_norm()
}
