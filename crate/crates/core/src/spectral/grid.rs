//! Truncated frequency space: λ nodes with Plancherel-weighted quadrature,
//! per-node Hermite truncation and an off-diagonal band.

use crate::error::{invalid, Result};
use crate::quadrature::gauss_legendre_on;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Multi-indices in `ℕ^n` listed by degree, then lexicographically, so that
/// the indices of degree `≤ M` form a prefix of length `C(M+n, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiIndexTable {
    n: usize,
    entries: Vec<Vec<usize>>,
    degree: Vec<usize>,
    lookup: HashMap<Vec<usize>, usize>,
}

fn compositions(n: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if prefix.len() + 1 == n {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        compositions(n, total - first, prefix, out);
        prefix.pop();
    }
}

impl MultiIndexTable {
    pub fn new(n: usize, max_degree: usize) -> Self {
        let mut entries = Vec::new();
        let mut degree = Vec::new();
        for d in 0..=max_degree {
            let mut level = Vec::new();
            compositions(n, d, &mut Vec::new(), &mut level);
            degree.extend(std::iter::repeat_n(d, level.len()));
            entries.extend(level);
        }
        let lookup = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        Self {
            n,
            entries,
            degree,
            lookup,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> &[usize] {
        &self.entries[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degree[i]
    }

    pub fn index_of(&self, m: &[usize]) -> Option<usize> {
        if m.len() == 1 {
            return (m[0] < self.entries.len()).then_some(m[0]);
        }
        self.lookup.get(m).copied()
    }

    /// Number of multi-indices with degree at most `m`.
    pub fn count_up_to(&self, m: usize) -> usize {
        let mut c: usize = 1;
        for j in 1..=self.n {
            c = c * (m + j) / j;
        }
        c
    }
}

/// How many Hermite levels are kept at each λ node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Truncation {
    /// Same `M` at every node.
    Fixed { m: usize },
    /// `M(λ) = λR²/2 + Ξ²/(8λ) + 8`, clamped to `[floor, cap]`: the
    /// phase-space extent of a field living in `|(x,y)| ≤ R` with horizontal
    /// frequencies below `Ξ`. Levels with `4|λ|(2M+n)` above `eigen_max`
    /// are dropped; a spatial grid of step `h` only resolves kernels with
    /// `4|λ|(2m+n) ≲ (2π/h − Ξ)²`.
    PhaseSpace {
        radius: f64,
        bandwidth: f64,
        floor: usize,
        cap: usize,
        eigen_max: f64,
    },
}

impl Truncation {
    pub fn at(&self, lambda: f64, n: usize) -> usize {
        match *self {
            Truncation::Fixed { m } => m,
            Truncation::PhaseSpace {
                radius,
                bandwidth,
                floor,
                cap,
                eigen_max,
            } => {
                let l = lambda.abs();
                let est = l * radius * radius / 2.0 + bandwidth * bandwidth / (8.0 * l) + 8.0;
                let m = (est.ceil() as usize).clamp(floor, cap);
                let resolvable = ((eigen_max / (4.0 * l) - n as f64) / 2.0).floor();
                if resolvable < 0.0 {
                    0
                } else {
                    m.min(resolvable as usize)
                }
            }
        }
    }
}

/// Parameters for building a [`FrequencyGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    /// First breakpoint of the geometric panels; one extra panel covers `[0, λ_min]`.
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
    /// Ratio between consecutive breakpoints.
    pub ratio: f64,
    /// Panels wider than this are split; `e^{iλz}` over `|z| ≤ L_z` needs
    /// roughly `max_panel · L_z ≲ order`.
    #[serde(default = "unbounded", with = "crate::serde_util::unbounded_as_null")]
    pub max_panel: f64,
    pub truncation: Truncation,
    /// Largest kept `|m_j − ℓ_j|`.
    pub band: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        if !(self.lambda_min > 0.0 && self.lambda_max > self.lambda_min) {
            return Err(invalid("lambda", "need 0 < lambda_min < lambda_max"));
        }
        if self.order == 0 {
            return Err(invalid("order", "must be positive"));
        }
        if !(self.max_panel > 0.0) {
            return Err(invalid("max_panel", "must be positive"));
        }
        if self.ratio <= 1.0 {
            return Err(invalid("ratio", "must exceed 1"));
        }
        Ok(())
    }
}

fn unbounded() -> f64 {
    f64::INFINITY
}

/// Plancherel constant `2^{n−1}/π^{n+1}`.
pub fn plancherel_constant(n: usize) -> f64 {
    2f64.powi(n as i32 - 1) / PI.powi(n as i32 + 1)
}

/// Frequency nodes `λ_i > 0` and their mirrors `−λ_i`. Node `s < P` is
/// `λ_s`, node `P + s` is `−λ_s`. Quadrature weights include the Plancherel
/// density `c_n|λ|^n`. Coefficients of a node are stored as
/// `[multi-index m][band offset d]` with `ℓ = m + d`.
#[derive(Debug, Clone)]
pub struct FrequencyGrid {
    spec: GridSpec,
    lambdas: Vec<f64>,
    weights: Vec<f64>,
    truncation: Vec<usize>,
    multi: MultiIndexTable,
    offsets_band: Vec<Vec<i64>>,
    /// Index of `ℓ = m + d` for each `(m, d)` slot, or `u32::MAX` if negative.
    pair_l: Vec<u32>,
    offsets: Vec<usize>,
}

impl PartialEq for FrequencyGrid {
    fn eq(&self, other: &Self) -> bool {
        self.lambdas == other.lambdas
            && self.weights == other.weights
            && self.truncation == other.truncation
            && self.spec.n == other.spec.n
            && self.spec.band == other.spec.band
    }
}

impl FrequencyGrid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let mut breaks = vec![0.0, spec.lambda_min];
        let mut b = spec.lambda_min;
        while b < spec.lambda_max * (1.0 - 1e-12) {
            b = (b * spec.ratio).min(spec.lambda_max);
            breaks.push(b);
        }
        let cn = plancherel_constant(spec.n);
        let mut lambdas = Vec::new();
        let mut weights = Vec::new();
        for w in breaks.windows(2) {
            let pieces = ((w[1] - w[0]) / spec.max_panel).ceil().max(1.0) as usize;
            let width = (w[1] - w[0]) / pieces as f64;
            for p in 0..pieces {
                let a = w[0] + p as f64 * width;
                let (x, wt) = gauss_legendre_on(spec.order, a, a + width);
                for (l, q) in x.into_iter().zip(wt) {
                    weights.push(q * cn * l.powi(spec.n as i32));
                    lambdas.push(l);
                }
            }
        }
        Self::from_nodes(spec, lambdas, weights)
    }

    /// Grid with explicitly given positive nodes and full weights
    /// (Plancherel density already included).
    pub fn from_nodes(spec: GridSpec, lambdas: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() || lambdas.len() != weights.len() {
            return Err(invalid("lambdas", "need matching nonempty nodes and weights"));
        }
        if lambdas.iter().any(|&l| !(l > 0.0)) || weights.iter().any(|&w| !(w > 0.0)) {
            return Err(invalid("lambdas", "nodes and weights must be positive"));
        }
        let truncation: Vec<usize> = lambdas.iter().map(|&l| spec.truncation.at(l, spec.n)).collect();
        Self::from_parts(spec, lambdas, weights, truncation)
    }

    /// Grid with explicit nodes, weights and per-node truncation.
    pub fn from_parts(
        spec: GridSpec,
        lambdas: Vec<f64>,
        weights: Vec<f64>,
        truncation: Vec<usize>,
    ) -> Result<Self> {
        if lambdas.is_empty() || lambdas.len() != weights.len() || lambdas.len() != truncation.len() {
            return Err(invalid("lambdas", "need matching nonempty nodes, weights and truncations"));
        }
        if lambdas.iter().any(|&l| !(l > 0.0)) || weights.iter().any(|&w| !(w > 0.0)) {
            return Err(invalid("lambdas", "nodes and weights must be positive"));
        }
        let n = spec.n;
        let mmax = *truncation.iter().max().unwrap();
        let multi = MultiIndexTable::new(n, mmax);
        let d = spec.band as i64;
        let mut offsets_band: Vec<Vec<i64>> = vec![vec![]];
        for _ in 0..n {
            offsets_band = offsets_band
                .into_iter()
                .flat_map(|p| {
                    (-d..=d).map(move |v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        let nb = offsets_band.len();
        let mut pair_l = vec![u32::MAX; multi.len() * nb];
        let mut buf = vec![0usize; n];
        for mi in 0..multi.len() {
            let m = multi.get(mi);
            'band: for (di, off) in offsets_band.iter().enumerate() {
                for j in 0..n {
                    let v = m[j] as i64 + off[j];
                    if v < 0 {
                        continue 'band;
                    }
                    buf[j] = v as usize;
                }
                if buf.iter().sum::<usize>() > mmax {
                    continue;
                }
                pair_l[mi * nb + di] = multi.index_of(&buf).unwrap() as u32;
            }
        }
        let p = lambdas.len();
        let mut offsets = Vec::with_capacity(2 * p + 1);
        let mut acc = 0;
        for s in 0..2 * p {
            offsets.push(acc);
            acc += multi.count_up_to(truncation[s % p]) * nb;
        }
        offsets.push(acc);
        Ok(Self {
            spec,
            lambdas,
            weights,
            truncation,
            multi,
            offsets_band,
            pair_l,
            offsets,
        })
    }

    /// Same layout with every node moved from `λ` to `τλ`.
    pub fn scaled(&self, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(invalid("tau", "must be positive"));
        }
        let mut g = self.clone();
        g.spec.lambda_min *= tau;
        g.spec.lambda_max *= tau;
        g.lambdas.iter_mut().for_each(|l| *l *= tau);
        let f = tau.powi(self.spec.n as i32 + 1);
        g.weights.iter_mut().for_each(|w| *w *= f);
        Ok(g)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn truncations(&self) -> &[usize] {
        &self.truncation
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn band(&self) -> usize {
        self.spec.band
    }

    /// Number of positive nodes `P`; there are `2P` nodes in total.
    pub fn positive_nodes(&self) -> usize {
        self.lambdas.len()
    }

    pub fn num_nodes(&self) -> usize {
        2 * self.lambdas.len()
    }

    /// Signed λ of node `s`.
    pub fn lambda(&self, s: usize) -> f64 {
        let p = self.lambdas.len();
        if s < p {
            self.lambdas[s]
        } else {
            -self.lambdas[s - p]
        }
    }

    /// Node of the opposite sign.
    pub fn mirror(&self, s: usize) -> usize {
        let p = self.lambdas.len();
        if s < p {
            s + p
        } else {
            s - p
        }
    }

    pub fn weight(&self, s: usize) -> f64 {
        self.weights[s % self.lambdas.len()]
    }

    pub fn truncation(&self, s: usize) -> usize {
        self.truncation[s % self.lambdas.len()]
    }

    pub fn max_truncation(&self) -> usize {
        *self.truncation.iter().max().unwrap()
    }

    pub fn multi(&self) -> &MultiIndexTable {
        &self.multi
    }

    pub fn band_offsets(&self) -> &[Vec<i64>] {
        &self.offsets_band
    }

    pub fn band_count(&self) -> usize {
        self.offsets_band.len()
    }

    /// Index of the band offset `0` (the diagonal).
    pub fn diagonal_offset(&self) -> usize {
        (self.offsets_band.len() - 1) / 2
    }

    /// Number of multi-indices kept at node `s`.
    pub fn multi_count(&self, s: usize) -> usize {
        self.multi.count_up_to(self.truncation(s))
    }

    /// Range of coefficient slots belonging to node `s`.
    pub fn node_range(&self, s: usize) -> std::ops::Range<usize> {
        self.offsets[s]..self.offsets[s + 1]
    }

    pub fn total_slots(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// The multi-index `ℓ` of slot `(m_index, band offset)` at node `s`, if kept.
    pub fn partner(&self, s: usize, mi: usize, di: usize) -> Option<usize> {
        let l = self.pair_l[mi * self.band_count() + di];
        (l != u32::MAX && (l as usize) < self.multi_count(s)).then_some(l as usize)
    }

    /// Slot of `(m, ℓ)` at node `s`.
    pub fn slot(&self, s: usize, mi: usize, li: usize) -> Option<usize> {
        if mi >= self.multi_count(s) || li >= self.multi_count(s) {
            return None;
        }
        let m = self.multi.get(mi);
        let l = self.multi.get(li);
        let d = self.spec.band as i64;
        let mut di = 0usize;
        for j in 0..self.spec.n {
            let off = l[j] as i64 - m[j] as i64;
            if off.abs() > d {
                return None;
            }
            di = di * (2 * self.spec.band + 1) + (off + d) as usize;
        }
        Some(self.offsets[s] + mi * self.band_count() + di)
    }

    /// Position of `(m, ℓ)` within a node block, ignoring truncation.
    pub fn local_slot(&self, mi: usize, di: usize) -> usize {
        mi * self.band_count() + di
    }

    /// Smallest resolved value of `|λ|(2|m|+n)` at the truncation edge,
    /// over all nodes: the diagonal gauge is fully represented below it.
    pub fn resolved_gauge(&self) -> f64 {
        let n = self.spec.n as f64;
        self.lambdas
            .iter()
            .zip(&self.truncation)
            .map(|(l, &m)| l * (2.0 * m as f64 + 2.0 + n))
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> GridSpec {
        GridSpec {
            n: 1,
            lambda_min: 0.05,
            lambda_max: 20.0,
            order: 6,
            ratio: 2.0,
            max_panel: f64::INFINITY,
            truncation: Truncation::Fixed { m: 10 },
            band: 2,
        }
    }

    #[test]
    fn weights_integrate_plancherel_density() {
        let g = FrequencyGrid::new(spec()).unwrap();
        // ∫_0^20 c_1 λ·λ³ dλ is exact at this order
        let s: f64 = (0..g.positive_nodes()).map(|i| g.weight(i) * g.lambda(i).powi(3)).sum();
        let want = plancherel_constant(1) * 20.0f64.powi(5) / 5.0;
        assert!((s / want - 1.0).abs() < 1e-13);
        // ∫_0^20 c_1 λ e^{-λ} dλ; the last panel [12.8, 20] limits this one
        let s: f64 = (0..g.positive_nodes())
            .map(|i| g.weight(i) * (-g.lambda(i)).exp())
            .sum();
        let want = plancherel_constant(1) * (1.0 - 21.0 * (-20.0f64).exp());
        assert!((s / want - 1.0).abs() < 1e-8);
        assert_eq!(g.lambda(g.mirror(3)), -g.lambda(3));
    }

    #[test]
    fn multi_index_prefix() {
        let t = MultiIndexTable::new(2, 4);
        assert_eq!(t.len(), 15);
        assert_eq!(t.count_up_to(2), 6);
        for i in 0..6 {
            assert!(t.degree(i) <= 2);
        }
        assert_eq!(t.index_of(t.get(9)), Some(9));
    }

    #[test]
    fn slots_roundtrip() {
        let g = FrequencyGrid::new(spec()).unwrap();
        let s = 4;
        let base = g.node_range(s).start;
        for mi in 0..g.multi_count(s) {
            for di in 0..g.band_count() {
                if let Some(li) = g.partner(s, mi, di) {
                    assert_eq!(g.slot(s, mi, li), Some(base + g.local_slot(mi, di)));
                }
            }
        }
        assert_eq!(g.slot(s, 0, 3), None);
        assert!(g.partner(s, 0, 0).is_none());
        assert_eq!(g.partner(s, 10, 4), None);
    }

    #[test]
    fn phase_space_truncation() {
        let t = Truncation::PhaseSpace {
            radius: 4.0,
            bandwidth: 4.0,
            floor: 16,
            cap: 200,
            eigen_max: f64::INFINITY,
        };
        // 2 + 2 + 8
        assert_eq!(t.at(1.0, 1), 18);
        assert_eq!(t.at(0.01, 1), 200);
        assert!(t.at(10.0, 1) > 80);
        let t = Truncation::PhaseSpace {
            radius: 4.0,
            bandwidth: 4.0,
            floor: 16,
            cap: 200,
            eigen_max: 400.0,
        };
        // 4·10·(2M+1) ≤ 400
        assert_eq!(t.at(10.0, 1), 4);
    }
}
