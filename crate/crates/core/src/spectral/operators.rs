//! Multiplier calculus on spectral fields: products, powers of the
//! sub-Laplacian, heat multipliers, `Θ` fields, the metrics `d̂`, `d̂₀`
//! and the difference operators `Δ̂`, `D̂_λ`.
//!
//! With the kernel `K_{m,ℓ,λ}` of the transform, the sub-Laplacian acts on
//! the second index: `(Δf)^(m,ℓ,λ) = −4|λ|(2|ℓ|+n) f̂(m,ℓ,λ)`. Every diagonal
//! multiplier is therefore applied as a right factor `f̂·Θ`, which matches
//! the convolution identity `(f ⋆ g)^ = f̂·ĝ` with `P_t f = f ⋆ p_t`.

use super::field::SpectralField;
use super::grid::FrequencyGrid;
use crate::error::Result;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Which generator the heat semigroup uses: `Δ` (rate 4) or `½Δ` (rate 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorScale {
    Full,
    Half,
}

impl GeneratorScale {
    /// `c` in the heat multiplier `e^{−c t|λ|(2|m|+n)}`.
    pub fn rate(self) -> f64 {
        match self {
            GeneratorScale::Full => 4.0,
            GeneratorScale::Half => 2.0,
        }
    }
}

/// `|λ|(2|m|+n)` for a multi-index.
pub fn gauge(lambda: f64, m: &[usize]) -> f64 {
    lambda.abs() * (2.0 * m.iter().sum::<usize>() as f64 + m.len() as f64)
}

/// Multiplies `F(m, ℓ, λ)` by `mult(ℓ, λ)`.
pub fn apply_column_multiplier<M: Fn(&[usize], f64) -> f64>(f: &SpectralField, mult: M) -> SpectralField {
    let grid = &f.grid;
    let multi = grid.multi();
    let nb = grid.band_count();
    let mut out = f.clone();
    for s in 0..grid.num_nodes() {
        let lam = grid.lambda(s);
        let base = grid.node_range(s).start;
        for mi in 0..grid.multi_count(s) {
            for di in 0..nb {
                let slot = base + mi * nb + di;
                if out.coeff[slot] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                if let Some(li) = grid.partner(s, mi, di) {
                    out.coeff[slot] *= mult(multi.get(li), lam);
                }
            }
        }
    }
    out
}

/// `(−Δ)^power`: coefficients scaled by `(4|λ|(2|ℓ|+n))^power`.
pub fn laplacian_multiplier(f: &SpectralField, power: f64) -> SpectralField {
    if power == 0.0 {
        return f.clone();
    }
    apply_column_multiplier(f, |l, lam| (4.0 * gauge(lam, l)).powf(power))
}

/// `Δ^N` for integer `N`: scaled by `(−4|λ|(2|ℓ|+n))^N`.
pub fn laplacian_power(f: &SpectralField, power: i32) -> SpectralField {
    apply_column_multiplier(f, |l, lam| (-4.0 * gauge(lam, l)).powi(power))
}

/// Heat multiplier `e^{−c t|λ|(2|ℓ|+n)}` with `c` from the generator scale.
pub fn heat_multiplier(f: &SpectralField, t: f64, scale: GeneratorScale) -> SpectralField {
    let c = scale.rate() * t;
    apply_column_multiplier(f, |l, lam| (-c * gauge(lam, l)).exp())
}

/// Diagonal field `p̂_t(m, m, λ) = e^{−c t|λ|(2|m|+n)}`.
pub fn heat_kernel_field(grid: &Arc<FrequencyGrid>, t: f64, scale: GeneratorScale) -> SpectralField {
    let c = scale.rate() * t;
    SpectralField::diagonal_from_fn(grid.clone(), |m, lam| Complex64::new((-c * gauge(lam, m)).exp(), 0.0))
}

/// Transform of the Dirac mass at `e`: the diagonal identity.
pub fn dirac_field(grid: &Arc<FrequencyGrid>) -> SpectralField {
    SpectralField::diagonal_from_fn(grid.clone(), |_, _| Complex64::new(1.0, 0.0))
}

/// `(F·G)(m, ℓ, λ) = Σ_j F(m, j, λ) G(j, ℓ, λ)`, kept within the grid band.
pub fn spectral_multiply(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.check_same(g)?;
    let grid = &f.grid;
    if g.diagonal {
        let d0 = grid.diagonal_offset();
        let nb = grid.band_count();
        let mut out = f.clone();
        for s in 0..grid.num_nodes() {
            let base = grid.node_range(s).start;
            for mi in 0..grid.multi_count(s) {
                for di in 0..nb {
                    if let Some(li) = grid.partner(s, mi, di) {
                        out.coeff[base + mi * nb + di] *= g.coeff[base + li * nb + d0];
                    }
                }
            }
        }
        out.diagonal = f.diagonal;
        return Ok(out);
    }
    let nb = grid.band_count();
    let mut out = SpectralField::zeros(grid.clone());
    for s in 0..grid.num_nodes() {
        let base = grid.node_range(s).start;
        for mi in 0..grid.multi_count(s) {
            for d1 in 0..nb {
                let a = f.coeff[base + mi * nb + d1];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let Some(ji) = grid.partner(s, mi, d1) else { continue };
                for d2 in 0..nb {
                    let Some(li) = grid.partner(s, ji, d2) else { continue };
                    if let Some(slot) = grid.slot(s, mi, li) {
                        out.coeff[slot] += a * g.coeff[base + ji * nb + d2];
                    }
                }
            }
        }
    }
    out.diagonal = f.diagonal && g.diagonal;
    Ok(out)
}

/// Diagonal field `Θ(m, m, λ) = profile(|λ|R(m))`, `R(m) = (2m_j + 1)_j`.
pub fn theta_multiplier<P: Fn(&[f64]) -> f64>(profile: P, grid: &Arc<FrequencyGrid>) -> SpectralField {
    SpectralField::diagonal_from_fn(grid.clone(), |m, lam| {
        let r: Vec<f64> = m.iter().map(|&mj| lam.abs() * (2.0 * mj as f64 + 1.0)).collect();
        Complex64::new(profile(&r), 0.0)
    })
}

/// A point `(m, ℓ, λ)` of the frequency space.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqPoint {
    pub m: Vec<usize>,
    pub l: Vec<usize>,
    pub lambda: f64,
}

/// `d̂(ŵ, ŵ') = |λ(m+ℓ) − λ'(m'+ℓ')|₁ + |(m−ℓ) − (m'−ℓ')| + n|λ − λ'|`.
pub fn dhat(a: &FreqPoint, b: &FreqPoint) -> f64 {
    let n = a.m.len();
    let mut first = 0.0;
    let mut second = 0.0;
    for j in 0..n {
        first += (a.lambda * (a.m[j] + a.l[j]) as f64 - b.lambda * (b.m[j] + b.l[j]) as f64).abs();
        let da = a.m[j] as f64 - a.l[j] as f64;
        let db = b.m[j] as f64 - b.l[j] as f64;
        second += (da - db).abs();
    }
    first + second + n as f64 * (a.lambda - b.lambda).abs()
}

/// `d̂₀(ŵ) = |λ|(|m+ℓ| + n) + |m − ℓ|`.
pub fn dhat0(a: &FreqPoint) -> f64 {
    let n = a.m.len() as f64;
    let sum: usize = a.m.iter().zip(&a.l).map(|(x, y)| x + y).sum();
    let diff: f64 = a
        .m
        .iter()
        .zip(&a.l)
        .map(|(x, y)| (*x as f64 - *y as f64).abs())
        .sum();
    a.lambda.abs() * (sum as f64 + n) + diff
}

/// Value of `F` at `(m ± e_j, ℓ ± e_j)` on node `s`; zero outside the grid.
fn shifted(f: &SpectralField, s: usize, m: &[usize], l: &[usize], j: usize, up: bool) -> Complex64 {
    let grid = &f.grid;
    let multi = grid.multi();
    let mut mm = m.to_vec();
    let mut ll = l.to_vec();
    if up {
        mm[j] += 1;
        ll[j] += 1;
    } else {
        if mm[j] == 0 || ll[j] == 0 {
            return Complex64::new(0.0, 0.0);
        }
        mm[j] -= 1;
        ll[j] -= 1;
    }
    match (multi.index_of(&mm), multi.index_of(&ll)) {
        (Some(a), Some(b)) => f.get(s, a, b),
        _ => Complex64::new(0.0, 0.0),
    }
}

/// `Δ̂g = −(|m+ℓ|+n) g/(2|λ|) + (1/(2|λ|)) Σ_j [√((m_j+1)(ℓ_j+1)) g(ŵ_j⁺) + √(m_jℓ_j) g(ŵ_j⁻)]`.
pub fn delta_hat(f: &SpectralField) -> SpectralField {
    let grid = &f.grid;
    let n = grid.n();
    let multi = grid.multi();
    let nb = grid.band_count();
    let mut out = SpectralField::zeros(grid.clone());
    for s in 0..grid.num_nodes() {
        let lam = grid.lambda(s).abs();
        let base = grid.node_range(s).start;
        for mi in 0..grid.multi_count(s) {
            let m = multi.get(mi);
            for di in 0..nb {
                let Some(li) = grid.partner(s, mi, di) else { continue };
                let l = multi.get(li);
                let g = f.coeff[base + mi * nb + di];
                let deg: usize = m.iter().sum::<usize>() + l.iter().sum::<usize>();
                let mut acc = -(deg as f64 + n as f64) * g;
                for j in 0..n {
                    let up = ((m[j] + 1) as f64 * (l[j] + 1) as f64).sqrt();
                    let dn = (m[j] as f64 * l[j] as f64).sqrt();
                    acc += up * shifted(f, s, m, l, j, true) + dn * shifted(f, s, m, l, j, false);
                }
                out.coeff[base + mi * nb + di] = acc / (2.0 * lam);
            }
        }
    }
    out.diagonal = f.diagonal;
    out
}

/// Derivative weights at `x[i]` from Lagrange interpolation through `x[lo..lo+k]`.
fn lagrange_derivative_weights(x: &[f64], lo: usize, k: usize, i: usize) -> Vec<f64> {
    let xi = x[i];
    (lo..lo + k)
        .map(|a| {
            // d/dx of ℓ_a at xi
            let mut total = 0.0;
            for b in lo..lo + k {
                if b == a {
                    continue;
                }
                let mut term = 1.0 / (x[a] - x[b]);
                for c in lo..lo + k {
                    if c != a && c != b {
                        term *= (xi - x[c]) / (x[a] - x[c]);
                    }
                }
                total += term;
            }
            total
        })
        .collect()
}

/// `∂_λ F` by five-point Lagrange differences along the nodes of each sign.
pub fn dlambda(f: &SpectralField) -> SpectralField {
    let grid = &f.grid;
    let p = grid.positive_nodes();
    let abs_l: Vec<f64> = (0..p).map(|s| grid.lambda(s)).collect();
    let k = 5.min(p);
    let nb = grid.band_count();
    let mut out = SpectralField::zeros(grid.clone());
    for sign_block in 0..2 {
        let sign = if sign_block == 0 { 1.0 } else { -1.0 };
        for i in 0..p {
            let lo = i.saturating_sub(k / 2).min(p - k);
            let w = lagrange_derivative_weights(&abs_l, lo, k, i);
            let s = sign_block * p + i;
            let base = grid.node_range(s).start;
            for mi in 0..grid.multi_count(s) {
                for di in 0..nb {
                    let Some(li) = grid.partner(s, mi, di) else { continue };
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (o, wt) in w.iter().enumerate() {
                        acc += *wt * f.get(sign_block * p + lo + o, mi, li);
                    }
                    // d/dλ = sign · d/d|λ|
                    out.coeff[base + mi * nb + di] = acc * sign;
                }
            }
        }
    }
    out.diagonal = f.diagonal;
    out
}

/// `D̂_λ g = ∂_λ g + (n/(2λ)) g + (1/(2λ)) Σ_j [√(m_jℓ_j) g(ŵ_j⁻) − √((m_j+1)(ℓ_j+1)) g(ŵ_j⁺)]`.
pub fn dlambda_hat(f: &SpectralField) -> SpectralField {
    let grid = &f.grid;
    let n = grid.n();
    let multi = grid.multi();
    let nb = grid.band_count();
    let mut out = dlambda(f);
    for s in 0..grid.num_nodes() {
        let lam = grid.lambda(s);
        let base = grid.node_range(s).start;
        for mi in 0..grid.multi_count(s) {
            let m = multi.get(mi);
            for di in 0..nb {
                let Some(li) = grid.partner(s, mi, di) else { continue };
                let l = multi.get(li);
                let g = f.coeff[base + mi * nb + di];
                let mut acc = n as f64 * g;
                for j in 0..n {
                    let up = ((m[j] + 1) as f64 * (l[j] + 1) as f64).sqrt();
                    let dn = (m[j] as f64 * l[j] as f64).sqrt();
                    acc += dn * shifted(f, s, m, l, j, false) - up * shifted(f, s, m, l, j, true);
                }
                out.coeff[base + mi * nb + di] += acc / (2.0 * lam);
            }
        }
    }
    out
}
