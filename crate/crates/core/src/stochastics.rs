//! The Gaussian noise `W^{ζ,α}`: time covariance `Γ(t) = c_Γ|t|^{−ζ}`,
//! spatial covariance `(−Δ)^{−2α}`, synthesized cell by cell on a
//! [`FrequencyGrid`].
//!
//! Every positive-λ slot of the grid is a cell carrying a complex process
//! `X(t)` with `E|δX_{st}|² = R(t−s)`, `R(h) = 2c_Γ h^{2−ζ}/((1−ζ)(2−ζ))`.
//! The noise coefficient is `X(t) (4|λ|(2|ℓ|+n))^{−α} / √w`, with `w` the
//! Plancherel weight of the node, and the negative-λ half is the complex
//! conjugate so spatial fields are real. Each cell draws from its own ChaCha
//! stream, so paths do not depend on how work is scheduled.

use crate::error::{invalid, Error, Result};
use crate::group_core::Weight;
use crate::littlewood_paley::{BesovEvaluator, PartitionOfUnity};
use crate::spectral::{gauge, inverse_transform, io, FrequencyGrid, SpatialField, SpatialGrid, SpectralField};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// `ζ ∈ (0,1)` and `(n+1)/2 − (1−ζ) < α < (n+1)/2`.
pub fn admissible(zeta: f64, alpha: f64, n: usize) -> bool {
    let h = (n as f64 + 1.0) / 2.0;
    zeta > 0.0 && zeta < 1.0 && alpha > h - (1.0 - zeta) && alpha < h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub zeta: f64,
    pub alpha: f64,
    #[serde(default = "one")]
    pub c_gamma: f64,
    pub seed: u64,
    /// Strictly increasing, starting at 0.
    pub times: Vec<f64>,
    /// Amplitude of a space-constant scalar component with the same time law.
    #[serde(default)]
    pub constant: f64,
    /// Amplitude of the spatial component.
    #[serde(default = "one")]
    pub spatial: f64,
    /// Sample outside the admissibility window.
    #[serde(default)]
    pub research_mode: bool,
}

fn one() -> f64 {
    1.0
}

impl NoiseParams {
    pub fn new(zeta: f64, alpha: f64, seed: u64, times: Vec<f64>) -> Self {
        NoiseParams { zeta, alpha, c_gamma: 1.0, seed, times, constant: 0.0, spatial: 1.0, research_mode: false }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.zeta > 0.0 && self.zeta < 1.0) {
            return Err(invalid("zeta", "must lie in (0, 1)"));
        }
        if !(self.alpha > 0.0 && self.alpha < (n as f64 + 1.0) / 2.0) {
            return Err(invalid("alpha", "must lie in (0, (n+1)/2)"));
        }
        if !self.research_mode && !admissible(self.zeta, self.alpha, n) {
            return Err(invalid("alpha", "outside the admissibility window; set research_mode to override"));
        }
        if !(self.c_gamma > 0.0) {
            return Err(invalid("c_gamma", "must be positive"));
        }
        if !(self.constant.is_finite() && self.spatial.is_finite()) {
            return Err(invalid("amplitude", "must be finite"));
        }
        if self.times.len() < 2 || self.times[0] != 0.0 {
            return Err(invalid("times", "need at least two nodes starting at 0"));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("times", "must be strictly increasing"));
        }
        if self.times.len() > 2049 {
            return Err(invalid("times", "at most 2048 steps"));
        }
        Ok(())
    }

    /// `∫∫_{[s,t]²} Γ(u−v) du dv` for `h = t − s`.
    pub fn increment_variance(&self, h: f64) -> f64 {
        let z = self.zeta;
        2.0 * self.c_gamma * h.abs().powf(2.0 - z) / ((1.0 - z) * (2.0 - z))
    }

    /// `E[X_s X_t]` for the integrated process started at 0.
    pub fn time_covariance(&self, s: f64, t: f64) -> f64 {
        0.5 * (self.increment_variance(s) + self.increment_variance(t) - self.increment_variance(t - s))
    }

    /// Dyadic grid `{jT/2^level}`.
    pub fn dyadic_times(horizon: f64, level: u32) -> Vec<f64> {
        let n = 1usize << level;
        (0..=n).map(|j| horizon * j as f64 / n as f64).collect()
    }
}

/// Lower Cholesky factor of the covariance of `(X_{t_1}, …, X_{t_N})`.
fn time_factor(params: &NoiseParams) -> Result<DMatrix<f64>> {
    let ts = &params.times[1..];
    let n = ts.len();
    let cov = DMatrix::from_fn(n, n, |i, j| params.time_covariance(ts[i], ts[j]));
    let chol = cov
        .cholesky()
        .ok_or_else(|| Error::NonFinite("time covariance is not positive definite".into()))?;
    Ok(chol.l())
}

/// Values `X_{t_1..t_N}` of one cell; `X_{t_0} = 0` is implicit.
fn cell_path(seed: u64, cell: u64, l: &DMatrix<f64>, out: &mut [Complex64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cell);
    let n = l.nrows();
    let mut xi = vec![Complex64::new(0.0, 0.0); n];
    for v in xi.iter_mut() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *v = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
    }
    for i in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..=i {
            acc += xi[j] * l[(i, j)];
        }
        out[i] = acc;
    }
}

/// Stream reserved for the scalar component.
const SCALAR_STREAM: u64 = u64::MAX;

/// Per-slot colour `(4·gauge)^{−α}/√w` on the positive-λ half; zero on
/// slots outside the band.
fn colour(grid: &FrequencyGrid, alpha: f64) -> Vec<f64> {
    let multi = grid.multi();
    let mut out = vec![0.0; grid.node_range(grid.positive_nodes().saturating_sub(1)).end];
    for s in 0..grid.positive_nodes() {
        let lam = grid.lambda(s);
        let w = grid.weight(s);
        for mi in 0..grid.multi_count(s) {
            for di in 0..grid.band_count() {
                if let Some(li) = grid.partner(s, mi, di) {
                    let g = 4.0 * gauge(lam, multi.get(li));
                    out[grid.node_range(s).start + grid.local_slot(mi, di)] = g.powf(-alpha) / w.sqrt();
                }
            }
        }
    }
    out
}

const PATH_MAGIC: &[u8; 4] = b"HBNP";

/// One sample of the integrated noise on a time grid.
#[derive(Debug, Clone)]
pub struct NoisePath {
    pub params: NoiseParams,
    pub grid: Arc<FrequencyGrid>,
    /// `δV_{t_i t_{i+1}}`, one spectral field per step.
    pub increments: Vec<SpectralField>,
    /// Scalar component `w(t_i)`, including `w(0) = 0`.
    pub scalar: Vec<f64>,
}

pub fn sample_noise(params: &NoiseParams, grid: &Arc<FrequencyGrid>) -> Result<NoisePath> {
    params.validate(grid.n())?;
    let l = time_factor(params)?;
    let steps = params.times.len() - 1;
    let col = colour(grid, params.alpha);
    let half = col.len();
    let amp = params.spatial;
    let paths: Vec<Vec<Complex64>> = (0..half)
        .into_par_iter()
        .map(|cell| {
            let mut x = vec![Complex64::new(0.0, 0.0); steps];
            if col[cell] != 0.0 {
                cell_path(params.seed, cell as u64, &l, &mut x);
                for v in x.iter_mut() {
                    *v *= col[cell] * amp;
                }
            }
            x
        })
        .collect();
    let p = grid.positive_nodes();
    let mirror_start = grid.node_range(p).start;
    let increments = (0..steps)
        .map(|i| {
            let mut f = SpectralField::zeros(grid.clone());
            f.diagonal = grid.band() == 0;
            for cell in 0..half {
                let prev = if i == 0 { Complex64::new(0.0, 0.0) } else { paths[cell][i - 1] };
                let d = paths[cell][i] - prev;
                f.coeff[cell] = d;
                f.coeff[mirror_start + cell] = d.conj();
            }
            f
        })
        .collect();
    let mut scalar = vec![0.0];
    if params.constant != 0.0 {
        let mut x = vec![Complex64::new(0.0, 0.0); steps];
        cell_path(params.seed, SCALAR_STREAM, &l, &mut x);
        // the real part of a circular cell has half the variance
        scalar.extend(x.iter().map(|v| params.constant * v.re * std::f64::consts::SQRT_2));
    } else {
        scalar.extend(std::iter::repeat_n(0.0, steps));
    }
    Ok(NoisePath { params: params.clone(), grid: grid.clone(), increments, scalar })
}

impl NoisePath {
    pub fn steps(&self) -> usize {
        self.increments.len()
    }

    /// `δV_{t_i t_j}` of the spatial component, `i ≤ j`.
    pub fn increment(&self, i: usize, j: usize) -> Result<SpectralField> {
        if i > j || j > self.steps() {
            return Err(invalid("indices", "need i <= j <= steps"));
        }
        let mut acc = SpectralField::zeros(self.grid.clone());
        acc.diagonal = self.grid.band() == 0;
        for d in &self.increments[i..j] {
            acc = acc.add(d)?;
        }
        Ok(acc)
    }

    /// `V_{t_i}`.
    pub fn value(&self, i: usize) -> Result<SpectralField> {
        self.increment(0, i)
    }

    /// `w_{t_j} − w_{t_i}` of the scalar component.
    pub fn scalar_increment(&self, i: usize, j: usize) -> f64 {
        self.scalar[j] - self.scalar[i]
    }

    /// Binary form: `"HBNP"`, `u32` version, `u64` length + JSON parameters,
    /// `u64` count + scalar values, then per step `u64` length + an `HBSF`
    /// spectral field. Little-endian throughout.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(PATH_MAGIC);
        out.extend_from_slice(&1u32.to_le_bytes());
        let params = serde_json::to_vec(&self.params).map_err(|e| Error::Format(e.to_string()))?;
        out.extend_from_slice(&(params.len() as u64).to_le_bytes());
        out.extend_from_slice(&params);
        out.extend_from_slice(&(self.scalar.len() as u64).to_le_bytes());
        for w in &self.scalar {
            out.extend_from_slice(&w.to_le_bytes());
        }
        for d in &self.increments {
            let b = io::spectral_to_bytes(d);
            out.extend_from_slice(&(b.len() as u64).to_le_bytes());
            out.extend_from_slice(&b);
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let mut take = |k: usize| -> Result<&[u8]> {
            let s = bytes.get(pos..pos + k).ok_or_else(|| Error::Format("truncated noise path".into()))?;
            pos += k;
            Ok(s)
        };
        if take(4)? != PATH_MAGIC {
            return Err(Error::Format("missing HBNP magic".into()));
        }
        if take(4)? != 1u32.to_le_bytes() {
            return Err(Error::Format("unsupported noise path version".into()));
        }
        let len = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
        let params: NoiseParams = serde_json::from_slice(take(len)?).map_err(|e| Error::Format(e.to_string()))?;
        let count = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
        if count != params.times.len() {
            return Err(Error::Format("scalar channel does not match the time grid".into()));
        }
        let scalar = (0..count)
            .map(|_| Ok(f64::from_le_bytes(take(8)?.try_into().unwrap())))
            .collect::<Result<Vec<f64>>>()?;
        let mut increments: Vec<SpectralField> = Vec::with_capacity(count - 1);
        for _ in 1..count {
            let len = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
            let mut f = io::spectral_from_bytes(take(len)?)?;
            if let Some(first) = increments.first() {
                f.check_same(first)?;
                f.grid = first.grid.clone();
            }
            increments.push(f);
        }
        let grid = increments
            .first()
            .map(|f| f.grid.clone())
            .ok_or_else(|| Error::Format("noise path without steps".into()))?;
        Ok(NoisePath { params, grid, increments, scalar })
    }

    /// `⟨V_{t_i}, φ⟩` for a real test function given by its transform.
    pub fn pair(&self, i: usize, phi: &SpectralField) -> Result<f64> {
        Ok(self.value(i)?.inner(phi)?.re)
    }
}

/// Samples of `⟨V_{t_i}, φ_j⟩` over independent replicates, without building
/// full paths: `out[r][i][j]`. Replicate `r` uses the seed `params.seed + r`
/// and agrees with [`sample_noise`] under that seed.
pub fn sample_pairings(
    params: &NoiseParams,
    tests: &[SpectralField],
    replicates: usize,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let grid = tests.first().ok_or_else(|| invalid("tests", "need at least one test field"))?.grid.clone();
    for t in tests {
        t.check_same(&tests[0])?;
    }
    params.validate(grid.n())?;
    let l = time_factor(params)?;
    let steps = params.times.len() - 1;
    let col = colour(&grid, params.alpha);
    // ⟨V, φ⟩ = 2 Re Σ_{λ>0} w V̂ conj φ̂ for Hermitian fields
    let mut weights = vec![0.0; col.len()];
    for s in 0..grid.positive_nodes() {
        for c in grid.node_range(s) {
            weights[c] = 2.0 * grid.weight(s) * col[c] * params.spatial;
        }
    }
    let live: Vec<usize> = (0..col.len())
        .filter(|&c| col[c] != 0.0 && tests.iter().any(|t| t.coeff[c] != Complex64::new(0.0, 0.0)))
        .collect();
    let out = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let seed = params.seed.wrapping_add(r);
            let mut acc = vec![vec![0.0; tests.len()]; steps + 1];
            let mut x = vec![Complex64::new(0.0, 0.0); steps];
            for &c in &live {
                cell_path(seed, c as u64, &l, &mut x);
                for (j, t) in tests.iter().enumerate() {
                    let tc = t.coeff[c].conj() * weights[c];
                    for i in 0..steps {
                        acc[i + 1][j] += (x[i] * tc).re;
                    }
                }
            }
            acc
        })
        .collect();
    Ok(out)
}

/// `σ_k` of `V_{t_i}` on a spatial grid.
pub fn block_noise(
    path: &NoisePath,
    partition: &PartitionOfUnity,
    k: i32,
    i: usize,
    target: &Arc<SpatialGrid>,
) -> Result<SpatialField> {
    inverse_transform(&partition.block_spectral(&path.value(i)?, k)?, target)
}

/// `‖δV_{t_i t_j}‖` in `𝔅^{−γ, ρ_b}_{2a, 2a}`.
pub fn noise_besov_norm(
    path: &NoisePath,
    partition: &PartitionOfUnity,
    i: usize,
    j: usize,
    a: f64,
    gamma: f64,
    rho: &Weight,
    target: &Arc<SpatialGrid>,
) -> Result<f64> {
    if !(a >= 1.0) {
        return Err(invalid("a", "must be at least 1"));
    }
    let eval = BesovEvaluator::Spatial { target: target.clone(), alpha: 2.0 * a, beta: 2.0 * a, weight: rho.clone() };
    eval.norm(&path.increment(i, j)?, partition, -gamma)
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
