//! Dyadic partition of unity on the diagonal of the frequency space,
//! Littlewood–Paley blocks `σ_k`, partial sums `S_k` and weighted Besov norms.
//!
//! The profiles are built from one smooth step `ψ` (equal to 1 on `[0, 3/4]`,
//! 0 from `4/3` on): `χ̃ = ψ`, `χ(x) = ψ(x/2) − ψ(x)`, `χ_k = χ(·/2^k)`.
//! The sum over `k < K` telescopes to `ψ(·/2^K)`; the top block
//! `1 − ψ(·/2^{K_max})` closes the partition on a finite grid.

use crate::error::{Error, Result};
use crate::group_core::{weight_eval, Weight};
use crate::spectral::{
    apply_column_multiplier, forward_transform, inverse_transform, laplacian_power, theta_multiplier,
    FrequencyGrid, SpatialField, SpatialGrid, SpectralField,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub(crate) const INNER: f64 = 0.75;
pub(crate) const OUTER: f64 = 4.0 / 3.0;

fn mollifier_tail(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth nonincreasing step: 1 on `[0, 3/4]`, 0 on `[4/3, ∞)`.
pub fn smooth_step(x: f64) -> f64 {
    let x = x.abs();
    if x <= INNER {
        return 1.0;
    }
    if x >= OUTER {
        return 0.0;
    }
    let s = (x - INNER) / (OUTER - INNER);
    let a = mollifier_tail(1.0 - s);
    let b = mollifier_tail(s);
    a / (a + b)
}

/// `χ̃`, supported in `|x| < 4/3`.
pub fn chi_tilde(x: f64) -> f64 {
    smooth_step(x)
}

/// `χ`, supported in `3/4 ≤ |x| < 8/3`.
pub fn chi(x: f64) -> f64 {
    smooth_step(x / 2.0) - smooth_step(x)
}

/// `χ_k`: `χ̃` for `k = −1`, `χ(·/2^k)` for `k ≥ 0`.
pub fn chi_k(k: i32, x: f64) -> f64 {
    if k < 0 {
        chi_tilde(x)
    } else {
        chi(x / 2f64.powi(k))
    }
}

/// Profile of block `k` in a partition closed at `k_max`.
pub fn block_profile(k: i32, k_max: i32, x: f64) -> f64 {
    if k == k_max {
        1.0 - smooth_step(x / 2f64.powi(k_max))
    } else {
        chi_k(k, x)
    }
}

/// Dyadic interval `[lo, hi)` of the gauge on which block `k` can be nonzero.
pub fn block_support(k: i32, k_max: i32) -> (f64, f64) {
    if k < 0 {
        return (0.0, OUTER);
    }
    let s = 2f64.powi(k);
    if k == k_max {
        (INNER * s, f64::INFINITY)
    } else {
        (INNER * s, 2.0 * OUTER * s)
    }
}

/// Partition of unity `{φ_k}` as diagonal multiplier fields on a frequency grid.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    k_max: i32,
    grid: Arc<FrequencyGrid>,
    fields: Vec<SpectralField>,
}

impl PartitionOfUnity {
    /// Builds `φ_{−1}, …, φ_{K_max}`; the profile argument is `|λ|(2|m|+n)`.
    pub fn build(grid: &Arc<FrequencyGrid>, k_max: i32) -> Result<Self> {
        if k_max < 0 {
            return Err(crate::error::invalid("k_max", "must be nonnegative"));
        }
        let top = (0..grid.num_nodes())
            .map(|s| grid.lambda(s).abs() * (2.0 * grid.truncation(s) as f64 + grid.n() as f64))
            .fold(0.0, f64::max);
        if top < INNER * 2f64.powi(k_max) {
            return Err(Error::GridTooCoarse(format!(
                "largest gauge {top:.4} does not reach block {k_max} (needs {:.4})",
                INNER * 2f64.powi(k_max)
            )));
        }
        let fields = (-1..=k_max)
            .map(|k| theta_multiplier(|v: &[f64]| block_profile(k, k_max, v.iter().sum()), grid))
            .collect();
        Ok(PartitionOfUnity { k_max, grid: grid.clone(), fields })
    }

    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        &self.grid
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<i32> {
        -1..=self.k_max
    }

    /// The diagonal field `φ_k`.
    pub fn phi(&self, k: i32) -> Result<&SpectralField> {
        self.check_level(k)?;
        Ok(&self.fields[(k + 1) as usize])
    }

    fn check_level(&self, k: i32) -> Result<()> {
        if k < -1 || k > self.k_max {
            return Err(Error::LevelTooFine { level: k as i64, max: self.k_max as i64 });
        }
        Ok(())
    }

    /// Largest `|Σ_k φ_k − 1|` over the diagonal nodes of the grid.
    pub fn completeness_defect(&self) -> f64 {
        let g = &self.grid;
        let d0 = g.diagonal_offset();
        let nb = g.band_count();
        let mut worst: f64 = 0.0;
        for s in 0..g.num_nodes() {
            let base = g.node_range(s).start;
            for mi in 0..g.multi_count(s) {
                let slot = base + mi * nb + d0;
                let total: f64 = self.fields.iter().map(|f| f.coeff[slot].re).sum();
                worst = worst.max((total - 1.0).abs());
            }
        }
        worst
    }

    /// `σ_k` in the spectral domain: `f̂ · φ_k`.
    pub fn block_spectral(&self, f: &SpectralField, k: i32) -> Result<SpectralField> {
        self.check_level(k)?;
        f.check_same(&self.fields[0])?;
        let k_max = self.k_max;
        Ok(apply_column_multiplier(f, |l, lam| {
            block_profile(k, k_max, crate::spectral::gauge(lam, l))
        }))
    }

    /// `S_k f̂ = Σ_{i<k} σ_i f̂`.
    pub fn partial_sum_spectral(&self, f: &SpectralField, k: i32) -> Result<SpectralField> {
        let k_max = self.k_max;
        if k > k_max + 1 {
            return Err(Error::LevelTooFine { level: k as i64, max: (k_max + 1) as i64 });
        }
        Ok(apply_column_multiplier(f, |l, lam| {
            let x = crate::spectral::gauge(lam, l);
            (-1..k).map(|i| block_profile(i, k_max, x)).sum()
        }))
    }

    /// All blocks of a spectral field, inverted onto `target`.
    pub fn decompose_spectral(&self, f: &SpectralField, target: &Arc<SpatialGrid>) -> Result<BlockDecomposition> {
        let levels: Vec<i32> = self.levels().collect();
        let blocks = levels
            .par_iter()
            .map(|&k| inverse_transform(&self.block_spectral(f, k)?, target))
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockDecomposition { k_min: -1, blocks })
    }

    /// All blocks of a spatial field.
    pub fn decompose(&self, f: &SpatialField) -> Result<BlockDecomposition> {
        let fh = forward_transform(f, &self.grid)?;
        self.decompose_spectral(&fh, &f.grid)
    }
}

/// Block sequence `σ_{−1} f, …, σ_{K_max} f` on a common spatial grid.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub k_min: i32,
    pub blocks: Vec<SpatialField>,
}

impl BlockDecomposition {
    pub fn levels(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.blocks.len()).map(move |i| self.k_min + i as i32)
    }

    pub fn get(&self, k: i32) -> Option<&SpatialField> {
        let i = k - self.k_min;
        if i < 0 {
            return None;
        }
        self.blocks.get(i as usize)
    }

    /// `Σ_k σ_k f`.
    pub fn sum(&self) -> Result<SpatialField> {
        let mut it = self.blocks.iter();
        let first = it.next().ok_or_else(|| crate::error::invalid("blocks", "empty decomposition"))?;
        it.try_fold(first.clone(), |acc, b| acc.add(b))
    }

    /// `S_k f = Σ_{i<k} σ_i f`; zero for `k ≤ k_min`.
    pub fn partial_sum(&self, k: i32) -> Result<SpatialField> {
        let grid = self.blocks[0].grid.clone();
        let mut acc = SpatialField::zeros(grid);
        for i in self.k_min..k {
            if let Some(b) = self.get(i) {
                acc = acc.add(b)?;
            }
        }
        Ok(acc)
    }
}

/// Parameters of `𝔅^{γ,w}_{α,β}`. `α` and `β` may be `∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub gamma: f64,
    #[serde(with = "crate::serde_util::unbounded_as_null")]
    pub alpha: f64,
    #[serde(with = "crate::serde_util::unbounded_as_null")]
    pub beta: f64,
    pub weight: Weight,
}

impl BesovParams {
    pub fn new(gamma: f64, alpha: f64, beta: f64, weight: Weight) -> Result<Self> {
        let p = BesovParams { gamma, alpha, beta, weight };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() {
            return Err(crate::error::invalid("gamma", "must be finite"));
        }
        if !(self.alpha >= 1.0) {
            return Err(crate::error::invalid("alpha", "must be at least 1"));
        }
        if !(self.beta >= 1.0) {
            return Err(crate::error::invalid("beta", "must be at least 1"));
        }
        self.weight.validate()
    }
}

/// `‖g‖_{L^α_w} = (∫ |g|^α w^α dμ)^{1/α}`; for `α = ∞` the grid max of `|g| w`.
pub fn weighted_lp_norm(f: &SpatialField, alpha: f64, weight: &Weight) -> f64 {
    let grid = &f.grid;
    let weights: Vec<f64> = (0..f.len()).map(|i| weight_eval(weight, &grid.point(i))).collect();
    weighted_lp_norm_with(f, alpha, &weights)
}

/// As [`weighted_lp_norm`] with precomputed weight values per grid point.
pub fn weighted_lp_norm_with(f: &SpatialField, alpha: f64, weights: &[f64]) -> f64 {
    if alpha.is_infinite() {
        return f.values.iter().zip(weights).map(|(v, w)| v.norm() * w).fold(0.0, f64::max);
    }
    let vol = f.grid.cell_volume();
    let sum = pairwise_sum(&f.values.iter().zip(weights).map(|(v, w)| (v.norm() * w).powf(alpha)).collect::<Vec<_>>());
    (sum * vol).powf(1.0 / alpha)
}

/// Order-fixed pairwise summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// `ℓ^β` combination of a sequence.
pub fn lbeta(values: &[f64], beta: f64) -> f64 {
    if beta.is_infinite() {
        values.iter().copied().fold(0.0, f64::max)
    } else {
        values.iter().map(|v| v.powf(beta)).sum::<f64>().powf(1.0 / beta)
    }
}

/// Per-block rows `(k, 2^{γk}, ‖σ_k f‖_{L^α_w})`.
pub fn besov_block_norms(blocks: &BlockDecomposition, params: &BesovParams) -> Result<Vec<(i32, f64, f64)>> {
    params.validate()?;
    let grid = &blocks.blocks[0].grid;
    let weights: Vec<f64> = (0..grid.len()).map(|i| weight_eval(&params.weight, &grid.point(i))).collect();
    let rows: Vec<(i32, f64, f64)> = blocks
        .levels()
        .zip(&blocks.blocks)
        .map(|(k, b)| (k, 2f64.powf(params.gamma * k as f64), weighted_lp_norm_with(b, params.alpha, &weights)))
        .collect();
    if rows.iter().any(|r| !r.2.is_finite()) {
        return Err(Error::NonFinite("block norm".into()));
    }
    Ok(rows)
}

/// `‖f‖_{𝔅^{γ,w}_{α,β}}` from a block decomposition.
pub fn besov_norm(blocks: &BlockDecomposition, params: &BesovParams) -> Result<f64> {
    let rows = besov_block_norms(blocks, params)?;
    let scaled: Vec<f64> = rows.iter().map(|(_, s, v)| s * v).collect();
    let out = lbeta(&scaled, params.beta);
    if !out.is_finite() {
        return Err(Error::NonFinite("Besov norm".into()));
    }
    Ok(out)
}

/// Diagonal field whose unweighted `L²` block norms are flat after the
/// `2^{κk}` scaling, for blocks `−1..=top`: the borderline element of
/// `𝔅^κ_{2,∞}` cut off above `top`.
pub fn critical_field(grid: &Arc<FrequencyGrid>, kappa: f64, top: i32, k_max: i32) -> SpectralField {
    let decay = (grid.n() as f64 + 1.0) / 2.0 + kappa;
    theta_multiplier(
        |v: &[f64]| {
            let x: f64 = v.iter().sum();
            (-1..=top.min(k_max)).map(|k| 2f64.powf(-decay * k as f64) * block_profile(k, k_max, x)).sum()
        },
        grid,
    )
}

/// How block norms are evaluated.
#[derive(Debug, Clone)]
pub enum BesovEvaluator {
    /// Blocks inverted onto a spatial grid, weighted `L^α` there.
    Spatial { target: Arc<SpatialGrid>, alpha: f64, beta: f64, weight: Weight },
    /// Unweighted `L²` block norms by the Plancherel identity; no spatial grid.
    Plancherel { beta: f64 },
}

impl BesovEvaluator {
    /// Per-block rows `(k, 2^{γk}, ‖σ_k f‖)`.
    pub fn block_norms(&self, f: &SpectralField, partition: &PartitionOfUnity, gamma: f64) -> Result<Vec<(i32, f64, f64)>> {
        match self {
            BesovEvaluator::Spatial { target, alpha, beta, weight } => {
                let params = BesovParams::new(gamma, *alpha, *beta, weight.clone())?;
                besov_block_norms(&partition.decompose_spectral(f, target)?, &params)
            }
            BesovEvaluator::Plancherel { .. } => partition
                .levels()
                .map(|k| {
                    let b = partition.block_spectral(f, k)?;
                    Ok((k, 2f64.powf(gamma * k as f64), b.plancherel_norm().sqrt()))
                })
                .collect(),
        }
    }

    pub fn beta(&self) -> f64 {
        match self {
            BesovEvaluator::Spatial { beta, .. } | BesovEvaluator::Plancherel { beta } => *beta,
        }
    }

    /// `‖f‖_{𝔅^γ}` under this evaluator.
    pub fn norm(&self, f: &SpectralField, partition: &PartitionOfUnity, gamma: f64) -> Result<f64> {
        let rows = self.block_norms(f, partition, gamma)?;
        let out = lbeta(&rows.iter().map(|(_, s, v)| s * v).collect::<Vec<_>>(), self.beta());
        if !out.is_finite() {
            return Err(Error::NonFinite("Besov norm".into()));
        }
        Ok(out)
    }
}

/// Largest column gauge `|λ|(2|ℓ|+n)` carrying a coefficient above `tol · max|F|`.
pub fn spectral_extent(f: &SpectralField, tol: f64) -> f64 {
    let g = &f.grid;
    let cut = tol * f.max_abs();
    let nb = g.band_count();
    let multi = g.multi();
    let mut top: f64 = 0.0;
    for s in 0..g.num_nodes() {
        let base = g.node_range(s).start;
        for mi in 0..g.multi_count(s) {
            for di in 0..nb {
                if f.coeff[base + mi * nb + di].norm() > cut {
                    if let Some(li) = g.partner(s, mi, di) {
                        top = top.max(crate::spectral::gauge(g.lambda(s), multi.get(li)));
                    }
                }
            }
        }
    }
    top
}

/// Parameters of a Bernstein ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinParams {
    pub tau: f64,
    pub k: i32,
    pub alpha: f64,
    pub beta: f64,
    pub weight: Weight,
}

/// `‖Δ^k f‖_{L^α_w} / (τ^{k+(n+1)(1/β−1/α)} ‖f‖_{L^β_w})` for `f̂` supported in `{|λ|(2|ℓ|+n) < τ}`.
pub fn bernstein_check(f: &SpectralField, target: &Arc<SpatialGrid>, p: &BernsteinParams) -> Result<f64> {
    if p.alpha < p.beta {
        return Err(crate::error::invalid("alpha", "Bernstein ratio needs alpha >= beta"));
    }
    let extent = spectral_extent(f, 1e-14);
    if extent >= p.tau {
        return Err(Error::SupportViolation(format!("spectral extent {extent:.4} reaches tau = {}", p.tau)));
    }
    let n = f.grid.n() as f64;
    let base = inverse_transform(f, target)?;
    let lifted = if p.k == 0 { base.clone() } else { inverse_transform(&laplacian_power(f, p.k), target)? };
    let weights: Vec<f64> = (0..target.len()).map(|i| weight_eval(&p.weight, &target.point(i))).collect();
    let inv = |a: f64| if a.is_infinite() { 0.0 } else { 1.0 / a };
    let scale = p.tau.powf(p.k as f64 + (n + 1.0) * (inv(p.beta) - inv(p.alpha)));
    let num = weighted_lp_norm_with(&lifted, p.alpha, &weights);
    let den = weighted_lp_norm_with(&base, p.beta, &weights);
    if den == 0.0 {
        return Err(Error::NonFinite("zero denominator in Bernstein ratio".into()));
    }
    Ok(num / (scale * den))
}
