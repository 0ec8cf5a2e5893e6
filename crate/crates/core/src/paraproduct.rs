//! Bony splitting `fg = f⋖g + f⊙g + f⋗g` over Littlewood–Paley blocks,
//! with block retention by frequency window and product-estimate ratios.
//!
//! Block sequences used here are *complete*: the top block is
//! `f − Σ_{k<K_max} σ_k f` on the grid, so the blocks re-sum to `f` exactly
//! and the three-way split of index pairs re-sums to the pointwise product
//! up to rounding.

use crate::error::{invalid, Error, Result};
use crate::group_core::Weight;
use crate::littlewood_paley::{BesovEvaluator, BlockDecomposition, PartitionOfUnity, INNER, OUTER};
use crate::spectral::{apply_column_multiplier, forward_transform, gauge, inverse_transform, SpatialField, SpectralField};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// The three parts of a product.
#[derive(Debug, Clone)]
pub struct ParaproductResult {
    /// `f⋖g = Σ_k S_{k−1}f · σ_k g`.
    pub low_high: SpatialField,
    /// `f⊙g = Σ_{|j−k|≤1} σ_j f · σ_k g`.
    pub resonant: SpatialField,
    /// `f⋗g = Σ_k σ_k f · S_{k−1}g`.
    pub high_low: SpatialField,
}

impl ParaproductResult {
    pub fn sum(&self) -> Result<SpatialField> {
        self.low_high.add(&self.resonant)?.add(&self.high_low)
    }

    pub fn scale(&self, c: f64) -> Self {
        let c = c.into();
        ParaproductResult {
            low_high: self.low_high.scale(c),
            resonant: self.resonant.scale(c),
            high_low: self.high_low.scale(c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    LowHigh,
    Resonant,
    HighLow,
}

/// Level-`k` summand of one part.
#[derive(Debug, Clone)]
pub struct Summand {
    pub part: Part,
    pub k: i32,
    pub field: SpatialField,
}

/// Blocks of `f` that re-sum to `f` on the grid.
pub fn complete_blocks(partition: &PartitionOfUnity, f: &SpatialField) -> Result<BlockDecomposition> {
    let mut dec = partition.decompose(f)?;
    let top = dec.blocks.len() - 1;
    let mut rest = f.clone();
    for b in &dec.blocks[..top] {
        rest = rest.sub(b)?;
    }
    dec.blocks[top] = rest;
    Ok(dec)
}

fn same_levels(fb: &BlockDecomposition, gb: &BlockDecomposition) -> Result<()> {
    if fb.k_min != gb.k_min || fb.blocks.len() != gb.blocks.len() {
        return Err(invalid("blocks", "decompositions cover different levels"));
    }
    if fb.blocks.is_empty() {
        return Err(invalid("blocks", "empty decomposition"));
    }
    Ok(())
}

/// Per-level summands of all three parts.
pub fn summands(fb: &BlockDecomposition, gb: &BlockDecomposition) -> Result<Vec<Summand>> {
    same_levels(fb, gb)?;
    let levels: Vec<i32> = fb.levels().collect();
    let grid = fb.blocks[0].grid.clone();
    let jobs: Vec<(Part, i32)> = [Part::LowHigh, Part::Resonant, Part::HighLow]
        .iter()
        .flat_map(|&p| levels.iter().map(move |&k| (p, k)))
        .collect();
    jobs.par_iter()
        .map(|&(part, k)| {
            let mut acc = SpatialField::zeros(grid.clone());
            for &j in &levels {
                let (a, b) = match part {
                    Part::LowHigh if j < k - 1 => (fb.get(j), gb.get(k)),
                    Part::HighLow if j < k - 1 => (fb.get(k), gb.get(j)),
                    Part::Resonant if (j - k).abs() <= 1 => (fb.get(j), gb.get(k)),
                    _ => continue,
                };
                if let (Some(a), Some(b)) = (a, b) {
                    acc = acc.add(&a.mul(b)?)?;
                }
            }
            Ok(Summand { part, k, field: acc })
        })
        .collect()
}

fn assemble(summands: &[Summand]) -> Result<ParaproductResult> {
    let grid = summands
        .first()
        .ok_or_else(|| invalid("summands", "nothing to assemble"))?
        .field
        .grid
        .clone();
    let total = |p: Part| {
        summands
            .iter()
            .filter(|s| s.part == p)
            .try_fold(SpatialField::zeros(grid.clone()), |acc, s| acc.add(&s.field))
    };
    Ok(ParaproductResult {
        low_high: total(Part::LowHigh)?,
        resonant: total(Part::Resonant)?,
        high_low: total(Part::HighLow)?,
    })
}

/// Exact split from two block sequences.
pub fn split(fb: &BlockDecomposition, gb: &BlockDecomposition) -> Result<ParaproductResult> {
    assemble(&summands(fb, gb)?)
}

/// Exact split of `f·g`, no frequency truncation.
pub fn decompose(partition: &PartitionOfUnity, f: &SpatialField, g: &SpatialField) -> Result<ParaproductResult> {
    if f.grid != g.grid {
        return Err(invalid("fields", "f and g live on different grids"));
    }
    let (fb, gb) = rayon::join(|| complete_blocks(partition, f), || complete_blocks(partition, g));
    split(&fb?, &gb?)
}

/// Gauge windows for the level-`k` summand of each part, as multiples of
/// `2^k`: the annulus `[1/4, 4]·[3/4, 8/3]` for the paraproducts and the
/// ball of the same outer radius for the resonant part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportRule {
    pub annulus: (f64, f64),
    pub ball: f64,
}

impl Default for SupportRule {
    fn default() -> Self {
        SupportRule { annulus: (0.25 * INNER, 8.0 * OUTER), ball: 8.0 * OUTER }
    }
}

impl SupportRule {
    /// Gauge interval predicted for a level-`k` summand.
    pub fn window(&self, part: Part, k: i32) -> (f64, f64) {
        let s = 2f64.powi(k);
        match part {
            Part::Resonant => (0.0, self.ball * s),
            _ if k <= 0 => (0.0, self.annulus.1 * s),
            _ => (self.annulus.0 * s, self.annulus.1 * s),
        }
    }

    /// Output blocks whose support meets the window. The top input block is
    /// unbounded above, and so is the window of its summand.
    pub fn retained(&self, partition: &PartitionOfUnity, part: Part, k: i32) -> Vec<i32> {
        let (lo, mut hi) = self.window(part, k);
        if k >= partition.k_max() {
            hi = f64::INFINITY;
        }
        partition
            .levels()
            .filter(|&m| {
                let (a, b) = crate::littlewood_paley::block_support(m, partition.k_max());
                a < hi && b > lo
            })
            .collect()
    }
}

/// Spectral support of one summand against its window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupportRow {
    pub part: Part,
    pub k: i32,
    pub retained: Vec<i32>,
    /// Plancherel energy of the summand in the dropped blocks.
    pub dropped: f64,
    /// `dropped` over the summand's own energy.
    pub leakage: f64,
}

/// Split of `f·g` in which each summand keeps only the output blocks allowed
/// by `rule`; also reports what was dropped.
pub fn decompose_localized(
    partition: &PartitionOfUnity,
    f: &SpatialField,
    g: &SpatialField,
    rule: &SupportRule,
) -> Result<(ParaproductResult, Vec<SupportRow>)> {
    if f.grid != g.grid {
        return Err(invalid("fields", "f and g live on different grids"));
    }
    let (fb, gb) = rayon::join(|| complete_blocks(partition, f), || complete_blocks(partition, g));
    let raw = summands(&fb?, &gb?)?;
    let k_max = partition.k_max();
    let out: Vec<(Summand, SupportRow)> = raw
        .par_iter()
        .map(|s| {
            let retained = rule.retained(partition, s.part, s.k);
            let spec = forward_transform(&s.field, partition.grid())?;
            let keep = |l: &[usize], lam: f64| {
                let x = gauge(lam, l);
                retained.iter().map(|&m| crate::littlewood_paley::block_profile(m, k_max, x)).sum::<f64>()
            };
            let kept = apply_column_multiplier(&spec, keep);
            let total = spec.plancherel_norm();
            let dropped = spec.sub(&kept)?.plancherel_norm();
            let leakage = if total > 0.0 { dropped / total } else { 0.0 };
            let field = inverse_transform(&kept, &s.field.grid)?;
            Ok((
                Summand { part: s.part, k: s.k, field },
                SupportRow { part: s.part, k: s.k, retained, dropped, leakage },
            ))
        })
        .collect::<Result<_>>()?;
    let (kept, rows): (Vec<_>, Vec<_>) = out.into_iter().unzip();
    Ok((assemble(&kept)?, rows))
}

/// Transform of the localized product from two block sequences: summands
/// are pooled by output block, so the cost is one transform per level.
pub fn localized_product(
    partition: &PartitionOfUnity,
    fb: &BlockDecomposition,
    gb: &BlockDecomposition,
    rule: &SupportRule,
) -> Result<SpectralField> {
    let raw = summands(fb, gb)?;
    let retained: Vec<Vec<i32>> = raw.iter().map(|s| rule.retained(partition, s.part, s.k)).collect();
    let levels: Vec<i32> = partition.levels().collect();
    let parts = levels
        .par_iter()
        .map(|&m| {
            let mut pool: Option<SpatialField> = None;
            for (s, r) in raw.iter().zip(&retained) {
                if r.contains(&m) {
                    pool = Some(match pool {
                        None => s.field.clone(),
                        Some(acc) => acc.add(&s.field)?,
                    });
                }
            }
            match pool {
                None => Ok(None),
                Some(f) => Ok(Some(partition.block_spectral(&forward_transform(&f, partition.grid())?, m)?)),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc = SpectralField::zeros(partition.grid().clone());
    for p in parts.iter().flatten() {
        acc = acc.add(p)?;
    }
    Ok(acc)
}

/// How products are formed inside solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductMode {
    /// Paraproduct split with block retention.
    #[default]
    Paraproduct,
    /// Plain grid product, for cross-checks.
    Pointwise,
}

pub fn product(partition: &PartitionOfUnity, f: &SpatialField, g: &SpatialField, mode: ProductMode) -> Result<SpatialField> {
    match mode {
        ProductMode::Pointwise => f.mul(g),
        ProductMode::Paraproduct => decompose_localized(partition, f, g, &SupportRule::default())?.0.sum(),
    }
}

/// Regularity pair for [`product_estimate_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductParams {
    pub kappa1: f64,
    pub kappa2: f64,
    pub w1: Weight,
    pub w2: Weight,
    pub alpha: f64,
    pub beta: f64,
}

impl ProductParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa1 > 0.0 && self.kappa2 < 0.0 && self.kappa1 > self.kappa2.abs()) {
            return Err(invalid("kappa", "need kappa1 > 0 > kappa2 and kappa1 > |kappa2|"));
        }
        self.w1.validate()?;
        self.w2.validate()
    }
}

/// Measured product constants, each `‖·‖ / (‖f‖_{κ₁,w₁} ‖g‖_{κ₂,w₂})`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductRatios {
    /// `fg` in `𝔅^{κ₂, w₁w₂}`.
    pub product: f64,
    pub low_high: f64,
    pub high_low: f64,
    /// `f⊙g` in `𝔅^{κ₁+κ₂, w₁w₂}`.
    pub resonant: f64,
}

pub fn product_estimate_check(
    partition: &PartitionOfUnity,
    f: &SpatialField,
    g: &SpatialField,
    p: &ProductParams,
) -> Result<ProductRatios> {
    p.validate()?;
    let target = f.grid.clone();
    let eval = |w: &Weight| BesovEvaluator::Spatial { target: target.clone(), alpha: p.alpha, beta: p.beta, weight: w.clone() };
    let w12 = Weight::Product { factors: vec![p.w1.clone(), p.w2.clone()] };
    let norm = |h: &SpatialField, w: &Weight, gamma: f64| {
        eval(w).norm(&forward_transform(h, partition.grid())?, partition, gamma)
    };
    let denom = norm(f, &p.w1, p.kappa1)? * norm(g, &p.w2, p.kappa2)?;
    if !(denom > 0.0) {
        return Err(Error::NonFinite("zero factor norm".into()));
    }
    let parts = decompose(partition, f, g)?;
    Ok(ProductRatios {
        product: norm(&parts.sum()?, &w12, p.kappa2)? / denom,
        low_high: norm(&parts.low_high, &w12, p.kappa2)? / denom,
        high_low: norm(&parts.high_low, &w12, p.kappa2)? / denom,
        resonant: norm(&parts.resonant, &w12, p.kappa1 + p.kappa2)? / denom,
    })
}
