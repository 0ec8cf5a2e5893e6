//! Mild form of the parabolic Anderson model `∂_t u = ½Δu + u Ẇ`:
//!
//! `u_t = P_t u_0 + ∫_0^t P_{t−s}(u_s dV_s)`,
//!
//! with the Young integral taken as a limit of Riemann sums over the noise
//! path's time grid, solved by Picard iteration in the space of `θ`-Hölder
//! paths with values in `𝔅^{κ, w_t}`, `w_t = e^{−(ν+bt)|q|_*^η}`.
//!
//! Fields are carried as transforms; products go through the spatial grid.

use crate::error::{invalid, Error, Result};
use crate::group_core::{PolynomialForm, Weight};
use crate::littlewood_paley::{BesovEvaluator, BlockDecomposition, PartitionOfUnity};
use crate::paraproduct::{localized_product, ProductMode, SupportRule};
use crate::spectral::{forward_transform, heat_multiplier, inverse_transform, GeneratorScale, SpatialField, SpatialGrid, SpectralField};
use crate::stochastics::{admissible, NoisePath};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Largest dyadic sub-refinement of a macro step.
pub const MAX_SUB_LEVEL: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    /// Time regularity of the solution.
    pub theta: f64,
    /// Time regularity of the noise.
    pub vartheta: f64,
    /// Spatial irregularity of the noise.
    pub gamma: f64,
    /// Spatial regularity of the solution.
    pub kappa: f64,
}

impl Exponents {
    pub fn validate(&self) -> Result<()> {
        let Exponents { theta, vartheta, gamma, kappa } = *self;
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Infeasible(format!("need 0 < gamma < 1, got {gamma}")));
        }
        if !(vartheta > (1.0 + gamma) / 2.0 && vartheta < 1.0) {
            return Err(Error::Infeasible(format!("need (1+gamma)/2 < vartheta < 1, got {vartheta}")));
        }
        if !(theta > 0.0 && theta <= 1.0 && theta + vartheta > 1.0) {
            return Err(Error::Infeasible(format!("need theta in (0,1] with theta + vartheta > 1, got {theta}")));
        }
        if !(kappa > gamma && kappa < 1.0) {
            return Err(Error::Infeasible(format!("need gamma < kappa < 1, got {kappa}")));
        }
        Ok(())
    }
}

/// `w_t = e^{−(ν + bt)|q|_*^η}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSchedule {
    pub nu: f64,
    pub b: f64,
    pub eta: f64,
}

impl WeightSchedule {
    pub fn at(&self, t: f64) -> Result<Weight> {
        Weight::exponential(self.nu + self.b * t, self.eta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.0 && self.b >= 0.0) {
            return Err(invalid("schedule", "need nu >= 0 and b >= 0"));
        }
        self.at(0.0).map(|_| ())
    }
}

/// Evaluation point of the integrand on each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiemannRule {
    /// `v_{r_j}`: the sums `I^n`.
    Left,
    /// Mean of the left and right sums; implicit in the newest node.
    #[default]
    Trapezoid,
}

/// Sub-horizon `τ = (C‖Ẇ‖/2)^{−1/(ε+δ)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauRule {
    pub c: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// Decay `b` of the noise weight `ρ = |q|_*^{−b}`.
    pub rho_decay: f64,
    /// Use this `τ` instead of the measured one.
    #[serde(default)]
    pub fixed: Option<f64>,
}

impl Default for TauRule {
    fn default() -> Self {
        TauRule { c: 1.0, epsilon: 0.05, delta: 0.05, rho_decay: 3.0, fixed: None }
    }
}

impl TauRule {
    pub fn tau(&self, noise_norm: f64) -> f64 {
        if let Some(t) = self.fixed {
            return t;
        }
        (0.5 * self.c * noise_norm).powf(-1.0 / (self.epsilon + self.delta))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub horizon: f64,
    /// Macro steps; norms are taken over their nodes.
    pub steps: usize,
    /// Each macro step is split into `2^sub_level` noise steps.
    pub sub_level: u32,
    pub exponents: Exponents,
    pub schedule: WeightSchedule,
    /// Integrability of the `𝔅^{κ,w_t}` norm.
    #[serde(default = "two")]
    pub alpha: f64,
    #[serde(default = "two")]
    pub beta: f64,
    #[serde(default = "picard_max")]
    pub picard_max: usize,
    #[serde(default = "picard_tol")]
    pub picard_tol: f64,
    #[serde(default)]
    pub product: ProductMode,
    #[serde(default)]
    pub rule: RiemannRule,
    #[serde(default)]
    pub tau: TauRule,
    #[serde(default = "half")]
    pub scale: GeneratorScale,
}

fn two() -> f64 {
    2.0
}

fn picard_max() -> usize {
    40
}

fn picard_tol() -> f64 {
    1e-7
}

fn half() -> GeneratorScale {
    GeneratorScale::Half
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid("horizon", "must be positive"));
        }
        if self.steps == 0 {
            return Err(invalid("steps", "need at least one step"));
        }
        if self.sub_level > MAX_SUB_LEVEL {
            return Err(invalid("sub_level", format!("at most {MAX_SUB_LEVEL}")));
        }
        if !(self.alpha >= 1.0 && self.beta >= 1.0) {
            return Err(invalid("alpha", "need alpha, beta >= 1"));
        }
        if !(self.picard_tol > 0.0) || self.picard_max == 0 {
            return Err(invalid("picard", "need a positive tolerance and iteration cap"));
        }
        let t = self.tau;
        if !(t.c > 0.0 && t.epsilon > 0.0 && t.delta > 0.0) || t.fixed.is_some_and(|f| !(f > 0.0)) {
            return Err(invalid("tau", "constants must be positive"));
        }
        self.exponents.validate()?;
        self.schedule.validate()
    }

    pub fn fine_steps(&self) -> usize {
        self.steps << self.sub_level
    }

    pub fn stride(&self) -> usize {
        1 << self.sub_level
    }

    /// Times of the noise grid.
    pub fn times(&self) -> Vec<f64> {
        let n = self.fine_steps();
        (0..=n).map(|i| self.horizon * i as f64 / n as f64).collect()
    }

    pub fn dspace_evaluator(&self, t: f64, space: &Arc<SpatialGrid>) -> Result<BesovEvaluator> {
        Ok(BesovEvaluator::Spatial { target: space.clone(), alpha: self.alpha, beta: self.beta, weight: self.schedule.at(t)? })
    }
}

/// `max_{s<t} ‖u_t − u_s‖_{𝔅^{κ,w_t}} / (t−s)^θ` over the given nodes.
pub fn dspace_norm(
    fields: &[SpectralField],
    times: &[f64],
    partition: &PartitionOfUnity,
    space: &Arc<SpatialGrid>,
    config: &SolverConfig,
) -> Result<f64> {
    if fields.len() != times.len() {
        return Err(invalid("fields", "one field per time"));
    }
    let pairs: Vec<(usize, usize)> = (0..times.len()).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    let vals = pairs
        .par_iter()
        .map(|&(i, j)| {
            let d = fields[j].sub(&fields[i])?;
            if d.max_abs() == 0.0 {
                return Ok(0.0);
            }
            let eval = config.dspace_evaluator(times[j], space)?;
            Ok(eval.norm(&d, partition, config.exponents.kappa)? / (times[j] - times[i]).powf(config.exponents.theta))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// `‖Ẇ‖`: `max ‖δV_{st}‖_{𝔅^{−γ,ρ}_{∞,∞}} / (t−s)^ϑ` over macro nodes, the
/// scalar channel counted with the norm of the constant 1.
pub fn noise_holder_norm(
    path: &NoisePath,
    partition: &PartitionOfUnity,
    space: &Arc<SpatialGrid>,
    config: &SolverConfig,
    nodes: &[usize],
) -> Result<f64> {
    let rho = Weight::polynomial(config.tau.rho_decay, 1.0, PolynomialForm::Decaying)?;
    let eval = BesovEvaluator::Spatial { target: space.clone(), alpha: f64::INFINITY, beta: f64::INFINITY, weight: rho };
    let times = &path.params.times;
    let pairs: Vec<(usize, usize)> = (0..nodes.len()).flat_map(|j| (0..j).map(move |i| (nodes[i], nodes[j]))).collect();
    let gamma = config.exponents.gamma;
    let vals = pairs
        .par_iter()
        .map(|&(i, j)| {
            let d = path.increment(i, j)?;
            let spatial = if d.max_abs() == 0.0 { 0.0 } else { eval.norm(&d, partition, -gamma)? };
            let total = spatial + path.scalar_increment(i, j).abs();
            Ok(total / (times[j] - times[i]).powf(config.exponents.vartheta))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// A factor made ready for repeated products.
enum Prepared {
    Zero,
    Field(SpatialField),
    Blocks(BlockDecomposition),
}

fn prepare(f: &SpectralField, partition: &PartitionOfUnity, space: &Arc<SpatialGrid>, mode: ProductMode) -> Result<Prepared> {
    if f.max_abs() == 0.0 {
        return Ok(Prepared::Zero);
    }
    Ok(match mode {
        ProductMode::Pointwise => Prepared::Field(inverse_transform(f, space)?),
        ProductMode::Paraproduct => Prepared::Blocks(partition.decompose_spectral(f, space)?),
    })
}

/// `v · δV` for one step, as a transform: spatial part through the product
/// mode, scalar part `v δw` exactly.
fn step_product(
    v: &SpectralField,
    pv: &Prepared,
    pdv: &Prepared,
    dw: f64,
    partition: &PartitionOfUnity,
) -> Result<SpectralField> {
    let out = v.scale(Complex64::new(dw, 0.0));
    let spatial = match (pv, pdv) {
        (Prepared::Field(a), Prepared::Field(b)) => forward_transform(&a.mul(b)?, partition.grid())?,
        (Prepared::Blocks(a), Prepared::Blocks(b)) => localized_product(partition, a, b, &SupportRule::default())?,
        _ => return Ok(out),
    };
    out.add(&spatial)
}

fn product_once(
    v: &SpectralField,
    dv: &SpectralField,
    dw: f64,
    partition: &PartitionOfUnity,
    space: &Arc<SpatialGrid>,
    mode: ProductMode,
) -> Result<SpectralField> {
    let (pv, pdv) = rayon::join(|| prepare(v, partition, space, mode), || prepare(dv, partition, space, mode));
    step_product(v, &pv?, &pdv?, dw, partition)
}

fn check_path(path: &NoisePath, partition: &PartitionOfUnity, config: &SolverConfig) -> Result<()> {
    if !Arc::ptr_eq(&path.grid, partition.grid()) && *path.grid != **partition.grid() {
        return Err(Error::GridMismatch("noise path and partition use different frequency grids".into()));
    }
    let times = config.times();
    let ok = path.params.times.len() == times.len()
        && path.params.times.iter().zip(&times).all(|(a, b)| (a - b).abs() <= 1e-12 * config.horizon);
    if !ok {
        return Err(Error::GridMismatch(format!(
            "noise path needs {} equal steps on [0, {}]",
            config.fine_steps(),
            config.horizon
        )));
    }
    Ok(())
}

/// The map `Φ` restricted to the noise nodes `a..=b`:
/// `Φ(v)_{t_i} = P_{t_i − t_a} u_a + Σ_{a≤j<i} (Riemann term on [t_j, t_{j+1}])`,
/// with `u_a = v[0]`.
pub fn phi_map(
    v: &[SpectralField],
    a: usize,
    path: &NoisePath,
    partition: &PartitionOfUnity,
    space: &Arc<SpatialGrid>,
    config: &SolverConfig,
) -> Result<Vec<SpectralField>> {
    let b = a + v.len() - 1;
    if b > path.steps() {
        return Err(invalid("v", "segment runs past the noise path"));
    }
    let times = &path.params.times;
    let scale = config.scale;
    let mode = config.product;
    let trapezoid = config.rule == RiemannRule::Trapezoid;
    let pdv = (a..b).into_par_iter().map(|j| prepare(&path.increments[j], partition, space, mode)).collect::<Result<Vec<_>>>()?;
    let live = |j: usize| !matches!(pdv[j - a], Prepared::Zero);
    let pv = (a..=b)
        .into_par_iter()
        .map(|j| {
            let needed = (j < b && live(j)) || (trapezoid && j > a && live(j - 1));
            if needed { prepare(&v[j - a], partition, space, mode) } else { Ok(Prepared::Zero) }
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs = (a..b)
        .into_par_iter()
        .map(|j| {
            let dw = path.scalar_increment(j, j + 1);
            let l = step_product(&v[j - a], &pv[j - a], &pdv[j - a], dw, partition)?;
            let r = if trapezoid { Some(step_product(&v[j + 1 - a], &pv[j + 1 - a], &pdv[j - a], dw, partition)?) } else { None };
            Ok((l, r))
        })
        .collect::<Result<Vec<_>>>()?;
    let half = Complex64::new(0.5, 0.0);
    let mut out = Vec::with_capacity(v.len());
    out.push(v[0].clone());
    // running Riemann sum, propagated by the heat flow one step at a time
    let mut acc = SpectralField::zeros(partition.grid().clone());
    acc.diagonal = v[0].diagonal;
    for j in a..b {
        let h = times[j + 1] - times[j];
        acc = match &pairs[j - a] {
            (l, None) => heat_multiplier(&acc.add(l)?, h, scale),
            (l, Some(r)) => heat_multiplier(&acc.add(&l.scale(half))?, h, scale).add(&r.scale(half))?,
        };
        out.push(heat_multiplier(&v[0], times[j + 1] - times[a], scale).add(&acc)?);
    }
    Ok(out)
}

/// Left Riemann sum `I^n = Σ_j P_{t−r_j}(v_{r_j} δV_{r_j r_{j+1}})` over the
/// level-`n` dyadic partition of `[0, t_i]`, as a transform. `v` holds the
/// integrand at every noise node up to `t_i`.
pub fn young_integral_spectral(
    v: &[SpectralField],
    path: &NoisePath,
    i: usize,
    level: u32,
    partition: &PartitionOfUnity,
    space: &Arc<SpatialGrid>,
    config: &SolverConfig,
) -> Result<SpectralField> {
    let step = dyadic_step(i, level, v.len())?;
    let times = &path.params.times;
    let terms = (0..1usize << level)
        .into_par_iter()
        .map(|j| {
            let (r0, r1) = (j * step, (j + 1) * step);
            let p = product_once(&v[r0], &path.increment(r0, r1)?, path.scalar_increment(r0, r1), partition, space, config.product)?;
            Ok(heat_multiplier(&p, times[i] - times[r0], config.scale))
        })
        .collect::<Result<Vec<_>>>()?;
    sum_fields(partition, &terms)
}

pub fn young_integral(
    v: &[SpectralField],
    path: &NoisePath,
    i: usize,
    level: u32,
    partition: &PartitionOfUnity,
    space: &Arc<SpatialGrid>,
    config: &SolverConfig,
) -> Result<SpatialField> {
    inverse_transform(&young_integral_spectral(v, path, i, level, partition, space, config)?, space)
}

fn dyadic_step(i: usize, level: u32, available: usize) -> Result<usize> {
    if i == 0 || i >= available {
        return Err(invalid("i", "need 0 < i and the integrand at t_i"));
    }
    let max = i.trailing_zeros();
    if level > max {
        return Err(Error::LevelTooFine { level: level as i64, max: max as i64 });
    }
    Ok(i >> level)
}

fn sum_fields(partition: &PartitionOfUnity, terms: &[SpectralField]) -> Result<SpectralField> {
    let mut acc = SpectralField::zeros(partition.grid().clone());
    if let Some(f) = terms.first() {
        acc.diagonal = f.diagonal;
    }
    for t in terms {
        acc = acc.add(t)?;
    }
    Ok(acc)
}

/// One refinement step of the dyadic sums at `t_i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelRow {
    pub level: u32,
    /// `t_i / 2^n`.
    pub mesh: f64,
    /// `‖I^n − I^{n−1}‖_{𝔅^{κ,w_t}}`.
    pub difference: f64,
    /// Largest `‖P_{t−r_{2j+1}}(v_{r_{2j+1}} δV) − P_{t−r_{2j}}(v_{r_{2j}} δV)‖`,
    /// `δV = δV_{r_{2j+1} r_{2j+2}}`: one term of `I^n − I^{n−1}`.
    pub max_term: f64,
    /// Largest term norm times `(t − r_{2j+1})^{1−δ}`, the singular factor
    /// in the per-term bound `C (t/2^n)^{1+ε}`.
    pub max_scaled: f64,
    pub mean_scaled: f64,
}

/// `I^n − I^{n−1}` at `t_i` for `n = 1..=max_level`.
pub fn level_differences(
    v: &[SpectralField],
    path: &NoisePath,
    i: usize,
    max_level: u32,
    partition: &PartitionOfUnity,
    space: &Arc<SpatialGrid>,
    config: &SolverConfig,
) -> Result<Vec<LevelRow>> {
    dyadic_step(i, max_level, v.len())?;
    let times = &path.params.times;
    let t = times[i];
    let eval = config.dspace_evaluator(t, space)?;
    let kappa = config.exponents.kappa;
    let mut rows = vec![];
    for level in 1..=max_level {
        let step = i >> level;
        let terms = (0..1usize << (level - 1))
            .into_par_iter()
            .map(|j| {
                let (r0, r1, r2) = (2 * j * step, (2 * j + 1) * step, (2 * j + 2) * step);
                let dv = path.increment(r1, r2)?;
                let dw = path.scalar_increment(r1, r2);
                let mode = config.product;
                let pdv = prepare(&dv, partition, space, mode)?;
                let fine = step_product(&v[r1], &prepare(&v[r1], partition, space, mode)?, &pdv, dw, partition)?;
                let coarse = step_product(&v[r0], &prepare(&v[r0], partition, space, mode)?, &pdv, dw, partition)?;
                let term = heat_multiplier(&fine, t - times[r1], config.scale).sub(&heat_multiplier(&coarse, t - times[r0], config.scale))?;
                Ok((term, (t - times[r1]).powf(1.0 - config.tau.delta)))
            })
            .collect::<Result<Vec<_>>>()?;
        let norms = terms
            .par_iter()
            .map(|(d, _)| if d.max_abs() == 0.0 { Ok(0.0) } else { eval.norm(d, partition, kappa) })
            .collect::<Result<Vec<f64>>>()?;
        let scaled: Vec<f64> = norms.iter().zip(&terms).map(|(n, (_, w))| n * w).collect();
        let max_scaled = scaled.iter().copied().fold(0.0, f64::max);
        let mean_scaled = scaled.iter().sum::<f64>() / scaled.len() as f64;
        let terms: Vec<SpectralField> = terms.into_iter().map(|(d, _)| d).collect();
        let total = sum_fields(partition, &terms)?;
        let difference = if total.max_abs() == 0.0 { 0.0 } else { eval.norm(&total, partition, kappa)? };
        rows.push(LevelRow {
            level,
            mesh: t / (1u64 << level) as f64,
            difference,
            max_term: norms.into_iter().fold(0.0, f64::max),
            max_scaled,
            mean_scaled,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub segment: usize,
    /// `p` of `u^{(p+1)} − u^{(p)}`.
    pub iterate: usize,
    /// `D`-norm of `u^{(p+1)} − u^{(p)}` on the segment.
    pub increment_norm: f64,
    /// Ratio to the previous increment norm.
    pub factor: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub times: Vec<f64>,
    /// `u_{t_i}` at every noise node, as transforms.
    pub fields: Vec<SpectralField>,
    /// Noise-node indices where segments start and end.
    pub segments: Vec<(usize, usize)>,
    pub records: Vec<IterationRecord>,
    pub noise_norm: f64,
    pub tau: f64,
    pub converged: bool,
}

impl SolverState {
    /// Final iterate count on the longest-running segment.
    pub fn iterations(&self) -> usize {
        self.records.iter().map(|r| r.iterate + 1).max().unwrap_or(0)
    }

    /// Largest contraction factor observed on `segment`.
    pub fn contraction(&self, segment: usize) -> Option<f64> {
        self.records
            .iter()
            .filter(|r| r.segment == segment)
            .filter_map(|r| r.factor)
            .fold(None, |m, f| Some(m.map_or(f, |m: f64| m.max(f))))
    }

    pub fn spatial(&self, i: usize, space: &Arc<SpatialGrid>) -> Result<SpatialField> {
        inverse_transform(&self.fields[i], space)
    }
}

/// Picard iteration of `Φ` on sub-horizons of length `τ`, patched together.
pub fn picard_solve(
    u0: &SpatialField,
    path: &NoisePath,
    partition: &PartitionOfUnity,
    config: &SolverConfig,
) -> Result<SolverState> {
    config.validate()?;
    check_path(path, partition, config)?;
    let space = u0.grid.clone();
    let stride = config.stride();
    let macro_nodes: Vec<usize> = (0..=config.steps).map(|k| k * stride).collect();
    let noise_norm = if config.tau.fixed.is_some() {
        f64::NAN
    } else {
        noise_holder_norm(path, partition, &space, config, &macro_nodes)?
    };
    let tau = config.tau.tau(noise_norm);
    let dt = config.horizon / config.steps as f64;
    let seg_steps = if tau >= config.horizon { config.steps } else { (tau / dt * (1.0 + 1e-12)).floor() as usize };
    if seg_steps == 0 {
        return Err(Error::HorizonTooShort { tau, step: dt });
    }
    let times = config.times();
    let mut fields = vec![forward_transform(u0, partition.grid())?];
    let mut segments = vec![];
    let mut records = vec![];
    let mut converged = true;
    let mut start = 0;
    while start < config.steps {
        let end = (start + seg_steps).min(config.steps);
        let (a, b) = (start * stride, end * stride);
        let seg = segments.len();
        segments.push((a, b));
        let ua = fields[a].clone();
        let mut v: Vec<SpectralField> =
            (a..=b).map(|j| heat_multiplier(&ua, times[j] - times[a], config.scale)).collect();
        let norm_idx: Vec<usize> = (start..=end).map(|k| k * stride - a).collect();
        let norm_times: Vec<f64> = norm_idx.iter().map(|&i| times[a + i]).collect();
        let mut prev: Option<f64> = None;
        let mut done = false;
        for p in 0..config.picard_max {
            let next = phi_map(&v, a, path, partition, &space, config)?;
            let diff: Vec<SpectralField> =
                norm_idx.iter().map(|&i| next[i].sub(&v[i])).collect::<Result<_>>()?;
            let d = dspace_norm(&diff, &norm_times, partition, &space, config)?;
            let factor = prev.filter(|&q| q > 0.0).map(|q| d / q);
            records.push(IterationRecord { segment: seg, iterate: p, increment_norm: d, factor });
            v = next;
            if d <= config.picard_tol {
                done = true;
                break;
            }
            if let Some(f) = factor {
                if f >= 1.0 {
                    return Err(Error::NonContraction { factor: f });
                }
            }
            prev = Some(d);
        }
        converged &= done;
        fields.extend(v.into_iter().skip(1));
        start = end;
    }
    Ok(SolverState { times, fields, segments, records, noise_norm, tau, converged })
}

/// The exponent chain behind the solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub vartheta: f64,
    pub gamma: f64,
    pub zeta: f64,
    pub alpha: f64,
    pub n: usize,
    pub noise_admissible: bool,
    /// `ϑ < 1 − ζ/2`: the noise is `ϑ`-Hölder.
    pub holder: bool,
    /// `γ > (n+1)/2 − α`: the noise lives in `𝔅^{−γ}`.
    pub regularity: bool,
    /// `2ϑ > 1 + γ`.
    pub young: bool,
    pub gamma_in_unit: bool,
    /// Open `γ` interval for which some `ϑ` satisfies the chain.
    pub window: Option<(f64, f64)>,
    /// Window narrower than [`TINY_WINDOW`].
    pub tiny: bool,
    pub feasible: bool,
}

pub const TINY_WINDOW: f64 = 0.05;

pub fn hypothesis_check(vartheta: f64, gamma: f64, zeta: f64, alpha: f64, n: usize) -> HypothesisReport {
    let noise_admissible = admissible(zeta, alpha, n);
    let holder = vartheta < 1.0 - zeta / 2.0;
    let regularity = gamma > (n as f64 + 1.0) / 2.0 - alpha;
    let young = 2.0 * vartheta > 1.0 + gamma;
    let gamma_in_unit = gamma > 0.0 && gamma < 1.0;
    let lo = ((n as f64 + 1.0) / 2.0 - alpha).max(0.0);
    let hi = (1.0 - zeta).min(1.0);
    let window = (noise_admissible && lo < hi).then_some((lo, hi));
    let tiny = window.is_none_or(|(l, h)| h - l < TINY_WINDOW);
    HypothesisReport {
        vartheta,
        gamma,
        zeta,
        alpha,
        n,
        noise_admissible,
        holder,
        regularity,
        young,
        gamma_in_unit,
        window,
        tiny,
        feasible: noise_admissible && holder && regularity && young && gamma_in_unit,
    }
}
