//! Heat kernel by the closed oscillatory integral and by Laguerre synthesis,
//! the heat semigroup, Green kernels `G_α`, and smoothing / time-regularity
//! ratio tables.
//!
//! The closed integral
//! `p_t(q) = 2/(2πt)^{n+1} ∫_0^∞ cos(λz/t) (2λ/sinh 2λ)^n e^{−λ r² coth(2λ)/t} dλ`
//! is the kernel of `e^{tΔ/2}` (`p_t(e) = 1/(16t²)` for `n = 1`); the kernel
//! of `e^{tΔ}` is its value at `2t`. [`GeneratorScale`] picks between them.

use crate::error::{invalid, Error, Result};
use crate::group_core::{homogeneous_norm, multiply, GroupPoint};
use crate::littlewood_paley::{BesovEvaluator, PartitionOfUnity};
use crate::quadrature::gauss_legendre;
use crate::special_functions::laguerre_functions;
use crate::spectral::{
    forward_transform, heat_multiplier, inverse_transform, plancherel_constant, GeneratorScale, SpatialField,
    SpectralField,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};
use std::sync::{Arc, OnceLock};

fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

/// `∫_0^upper g(λ) dλ` with panels no wider than `width`, 20 points each.
fn panel_integral<G: Fn(f64) -> f64>(g: G, upper: f64, width: f64) -> f64 {
    let (x, w) = gl20();
    let panels = (upper / width).ceil().max(1.0) as usize;
    let h = upper / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let c = (p as f64 + 0.5) * h;
        let s: f64 = x.iter().zip(w).map(|(t, wt)| wt * g(c + 0.5 * h * t)).sum();
        total += s * 0.5 * h;
    }
    total
}

/// `λ coth(2λ)`, finite at 0.
fn lambda_coth2(l: f64) -> f64 {
    if l < 1e-6 {
        0.5 + 2.0 * l * l / 3.0
    } else {
        l / (2.0 * l).tanh()
    }
}

/// `2λ / sinh(2λ)`, finite at 0.
fn sinh_ratio(l: f64) -> f64 {
    if l < 1e-6 {
        1.0 - 2.0 * l * l / 3.0
    } else {
        2.0 * l / (2.0 * l).sinh()
    }
}

/// The closed oscillatory integral for the kernel of `e^{tΔ/2}`.
pub fn gaveau_kernel(t: f64, q: &GroupPoint) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid("t", format!("need t > 0, got {t}")));
    }
    let n = q.dim() as f64;
    let r2 = q.horizontal_norm_sq();
    let z = q.z;
    let rate = 2.0 * n + r2 / t;
    let upper = (45.0 + n * (1.0 + 45.0 / rate).ln()) / rate;
    let freq = (z / t).abs();
    let width = if freq > 0.0 { (2.0 * std::f64::consts::PI / freq).min(0.5) } else { 0.5 };
    let integral = panel_integral(
        |l| (l * z / t).cos() * sinh_ratio(l).powf(n) * (-lambda_coth2(l) * r2 / t).exp(),
        upper,
        width,
    );
    Ok(2.0 / (2.0 * std::f64::consts::PI * t).powf(n + 1.0) * integral)
}

/// Heat kernel of the chosen generator at `q`.
pub fn heat_kernel(t: f64, q: &GroupPoint, scale: GeneratorScale) -> Result<f64> {
    match scale {
        GeneratorScale::Half => gaveau_kernel(t, q),
        GeneratorScale::Full => gaveau_kernel(2.0 * t, q),
    }
}

/// `Σ_k e^{−|λ|r²} L_k^{(n−1)}(2|λ|r²) e^{−c t|λ|(2k+n)}`.
///
/// Summed term by term down to `e^{−40}`; below `|λ| = 10^{−3}` the number of
/// terms explodes and the Laguerre generating function is used instead.
pub fn radial_heat_sum(n: usize, lambda: f64, r2: f64, rate_t: f64) -> f64 {
    let l = lambda.abs();
    let nf = n as f64;
    if l < 1e-3 {
        let w = (-2.0 * rate_t * l).exp();
        let one_minus = -(-2.0 * rate_t * l).exp_m1();
        return (-l * r2 - rate_t * l * nf).exp() * one_minus.powf(-nf) * (-2.0 * l * r2 * w / one_minus).exp();
    }
    let kmax = ((40.0 + nf * 10.0) / (2.0 * rate_t * l)).ceil() as usize + 2;
    let x = 2.0 * l * r2;
    let a = n - 1;
    let vals = laguerre_functions(a, x, kmax);
    let decay = (-2.0 * rate_t * l).exp();
    let mut factor = (-rate_t * l * nf).exp();
    let mut total = 0.0;
    for (k, v) in vals.iter().enumerate() {
        let norm = if a == 0 {
            1.0
        } else if x == 0.0 {
            // L_k^{(a)}(0) = C(k+a, a); ℒ vanishes at 0 for a > 0
            (ln_gamma((k + a + 1) as f64) - ln_gamma((k + 1) as f64) - ln_gamma((a + 1) as f64)).exp()
        } else {
            (0.5 * (ln_gamma((k + a + 1) as f64) - ln_gamma((k + 1) as f64)) - 0.5 * a as f64 * x.ln()).exp()
        };
        let term = if a > 0 && x == 0.0 { norm } else { v * norm };
        total += term * factor;
        factor *= decay;
    }
    total
}

/// Heat kernel by spectral synthesis: `2c_n ∫_0^∞ cos(λz) S(λ) λ^n dλ` with
/// `S` the Laguerre sum of the diagonal multiplier `e^{−c t|λ|(2|m|+n)}`.
pub fn heat_kernel_spectral(t: f64, q: &GroupPoint, scale: GeneratorScale) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid("t", format!("need t > 0, got {t}")));
    }
    let n = q.dim();
    let nf = n as f64;
    let rate_t = scale.rate() * t;
    let r2 = q.horizontal_norm_sq();
    let z = q.z;
    let upper = (45.0 + nf * (2.0 + 45.0 / (rate_t * nf)).ln()) / (rate_t * nf);
    let width = (0.25 / rate_t).min(if z != 0.0 { 2.0 * std::f64::consts::PI / z.abs() } else { f64::INFINITY });
    let integral = panel_integral(|l| (l * z).cos() * radial_heat_sum(n, l, r2, rate_t) * l.powf(nf), upper, width);
    Ok(2.0 * plancherel_constant(n) * integral)
}

/// `P_t f` by the spectral multiplier.
pub fn semigroup_apply(
    f: &SpatialField,
    grid: &Arc<crate::spectral::FrequencyGrid>,
    t: f64,
    scale: GeneratorScale,
) -> Result<SpatialField> {
    if !(t >= 0.0) {
        return Err(invalid("t", format!("need t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    let fh = forward_transform(f, grid)?;
    inverse_transform(&heat_multiplier(&fh, t, scale), &f.grid)
}

/// Tabulated heat kernel on `(r, |z|)` with four-point Lagrange interpolation.
#[derive(Debug, Clone)]
pub struct HeatKernelTable {
    n: usize,
    r_max: f64,
    z_max: f64,
    nr: usize,
    nz: usize,
    values: Vec<f64>,
}

impl HeatKernelTable {
    pub fn new(n: usize, t: f64, scale: GeneratorScale, r_max: f64, z_max: f64, nr: usize, nz: usize) -> Result<Self> {
        if nr < 4 || nz < 4 {
            return Err(invalid("nr", "tables need at least 4 nodes per axis"));
        }
        let dr = r_max / (nr - 1) as f64;
        let dz = z_max / (nz - 1) as f64;
        let values = (0..nr * nz)
            .into_par_iter()
            .map(|i| {
                let (ir, iz) = (i / nz, i % nz);
                let mut x = vec![0.0; n];
                x[0] = ir as f64 * dr;
                heat_kernel(t, &GroupPoint { x, y: vec![0.0; n], z: iz as f64 * dz }, scale)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(HeatKernelTable { n, r_max, z_max, nr, nz, values })
    }

    fn axis_weights(u: f64, count: usize) -> (usize, [f64; 4]) {
        // reflect-symmetric data: index −1 mirrors index 1
        let i = (u.floor() as isize).clamp(0, count as isize - 2) as usize;
        let s = u - i as f64;
        let w = [
            -s * (s - 1.0) * (s - 2.0) / 6.0,
            (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
            -(s + 1.0) * s * (s - 2.0) / 2.0,
            (s + 1.0) * s * (s - 1.0) / 6.0,
        ];
        (i, w)
    }

    fn at(&self, ir: isize, iz: isize) -> f64 {
        let ir = ir.unsigned_abs().min(self.nr - 1);
        let iz = iz.unsigned_abs().min(self.nz - 1);
        self.values[ir * self.nz + iz]
    }

    /// Interpolated kernel value; zero outside the table.
    pub fn eval(&self, q: &GroupPoint) -> f64 {
        debug_assert_eq!(q.dim(), self.n);
        let r = q.horizontal_norm_sq().sqrt();
        let z = q.z.abs();
        if r > self.r_max || z > self.z_max {
            return 0.0;
        }
        let (ir, wr) = Self::axis_weights(r / self.r_max * (self.nr - 1) as f64, self.nr);
        let (iz, wz) = Self::axis_weights(z / self.z_max * (self.nz - 1) as f64, self.nz);
        let mut acc = 0.0;
        for (a, wa) in wr.iter().enumerate() {
            for (b, wb) in wz.iter().enumerate() {
                acc += wa * wb * self.at(ir as isize + a as isize - 1, iz as isize + b as isize - 1);
            }
        }
        acc
    }
}

/// `(f ⋆ p_t)(p)` by quadrature on the kernel side, for `n = 1`.
///
/// With `x = δ_{√t} y`, `(f ⋆ p_t)(p) = ∫ p_1(y) f(p · (δ_{√t} y)^{−1}) dy`, so
/// one table of `p_1` and one tensor Gauss–Legendre rule in `y` serve every `t`.
#[derive(Debug, Clone)]
pub struct HeatConvolution {
    table: HeatKernelTable,
    horizontal: (Vec<f64>, Vec<f64>),
    vertical: (Vec<f64>, Vec<f64>),
}

impl HeatConvolution {
    pub fn new(scale: GeneratorScale) -> Result<Self> {
        let (r_max, z_max) = (8.0, 32.0);
        let table = HeatKernelTable::new(1, 1.0, scale, r_max * std::f64::consts::SQRT_2, z_max, 241, 641)?;
        Ok(HeatConvolution {
            table,
            horizontal: crate::quadrature::gauss_legendre_on(56, -r_max, r_max),
            vertical: crate::quadrature::gauss_legendre_on(192, -z_max, z_max),
        })
    }

    pub fn apply_at<F: Fn(&GroupPoint) -> f64 + Sync>(&self, f: F, t: f64, points: &[GroupPoint]) -> Result<Vec<f64>> {
        if !(t > 0.0) {
            return Err(invalid("t", format!("need t > 0, got {t}")));
        }
        let (hx, hw) = &self.horizontal;
        let (zx, zw) = &self.vertical;
        let st = t.sqrt();
        points
            .par_iter()
            .map(|p| {
                if p.dim() != 1 {
                    return Err(Error::DimensionMismatch { expected: 1, got: p.dim() });
                }
                let mut acc = 0.0;
                for (a, wa) in hx.iter().zip(hw) {
                    for (b, wb) in hx.iter().zip(hw) {
                        for (c, wc) in zx.iter().zip(zw) {
                            let y = GroupPoint::h1(*a, *b, *c);
                            let k = self.table.eval(&y);
                            if k == 0.0 {
                                continue;
                            }
                            let x = GroupPoint::h1(st * a, st * b, t * c);
                            acc += wa * wb * wc * k * f(&multiply(p, &x.inverse())?);
                        }
                    }
                }
                Ok(acc)
            })
            .collect()
    }
}

/// `G_α(p, q) = Γ(α)^{−1} ∫_0^∞ t^{α−1} p_t(q^{−1}p) dt` for the kernel of `e^{tΔ}`.
///
/// The substitution `t = t* e^u` with `t* = |q^{−1}p|_h²` centers the
/// integrand; the large-`t` tail uses `p_t(x) ≈ p_t(e)`.
pub fn green_kernel(alpha: f64, p: &GroupPoint, q: &GroupPoint) -> Result<f64> {
    let n = p.dim() as f64;
    if !(alpha > 0.0 && alpha < n + 1.0) {
        return Err(invalid("alpha", format!("need 0 < alpha < {}, got {alpha}", n + 1.0)));
    }
    let x = multiply(&q.inverse(), p)?;
    let star = homogeneous_norm(&x).powi(2);
    if star == 0.0 {
        return Err(invalid("q", "Green kernel is singular on the diagonal p = q"));
    }
    let decay = n + 1.0 - alpha;
    let (lo, hi) = (-6.0, (36.0 / decay).max(8.0));
    let (nodes, weights) = gl20();
    let width = 0.25;
    let panels = ((hi - lo) / width).ceil() as usize;
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for pi in 0..panels {
        let c = lo + (pi as f64 + 0.5) * h;
        for (s, w) in nodes.iter().zip(weights) {
            let u = c + 0.5 * h * s;
            let t = star * u.exp();
            total += w * 0.5 * h * (alpha * u).exp() * gaveau_kernel(2.0 * t, &x)?;
        }
    }
    let t_hi = star * hi.exp();
    let p_e = gaveau_kernel(2.0, &GroupPoint::identity(p.dim()))?;
    let tail = p_e * t_hi.powf(-decay) / decay;
    Ok((star.powf(alpha) * total + tail) / gamma(alpha))
}

/// One row of a smoothing or time-regularity table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub t: f64,
    /// Norm ratio compensated by the stated power of `t`.
    pub stated: f64,
    /// Same ratio compensated by the power the dyadic gauge scaling predicts.
    pub gauge: f64,
}

/// `max/min` of a sequence of positive numbers.
pub fn spread(values: &[f64]) -> f64 {
    let mx = values.iter().cloned().fold(0.0, f64::max);
    let mn = values.iter().cloned().fold(f64::INFINITY, f64::min);
    mx / mn
}

/// Smoothing table: `t^{(κ'−κ)/2} ‖P_t f‖_{κ'} / ‖f‖_κ` (stated) and
/// `t^{κ'−κ} ‖P_t f‖_{κ'} / ‖f‖_κ` (gauge), for each `t`.
pub fn smoothing_check(
    f: &SpectralField,
    partition: &PartitionOfUnity,
    eval: &BesovEvaluator,
    kappa: f64,
    kappa_prime: f64,
    ts: &[f64],
    scale: GeneratorScale,
) -> Result<Vec<RatioRow>> {
    if kappa_prime < kappa {
        return Err(invalid("kappa_prime", "must be at least kappa"));
    }
    let denom = eval.norm(f, partition, kappa)?;
    if denom == 0.0 {
        return Err(Error::NonFinite("f has zero norm".into()));
    }
    let d = kappa_prime - kappa;
    ts.iter()
        .map(|&t| {
            let num = eval.norm(&heat_multiplier(f, t, scale), partition, kappa_prime)?;
            Ok(RatioRow { t, stated: t.powf(d / 2.0) * num / denom, gauge: t.powf(d) * num / denom })
        })
        .collect()
}

/// Time-regularity table: `t^{−γ} ‖(Id − P_t) f‖_{κ−2γ} / ‖f‖_κ` (stated)
/// and the same with `t^{−2γ}` (gauge).
pub fn time_regularity_check(
    f: &SpectralField,
    partition: &PartitionOfUnity,
    eval: &BesovEvaluator,
    kappa: f64,
    gamma_exp: f64,
    ts: &[f64],
    scale: GeneratorScale,
) -> Result<Vec<RatioRow>> {
    if !(gamma_exp > 0.0 && gamma_exp < 1.0) {
        return Err(invalid("gamma", "must lie in (0, 1)"));
    }
    let denom = eval.norm(f, partition, kappa)?;
    if denom == 0.0 {
        return Err(Error::NonFinite("f has zero norm".into()));
    }
    ts.iter()
        .map(|&t| {
            let diff = f.sub(&heat_multiplier(f, t, scale))?;
            let num = eval.norm(&diff, partition, kappa - 2.0 * gamma_exp)?;
            Ok(RatioRow {
                t,
                stated: t.powf(-gamma_exp) * num / denom,
                gauge: t.powf(-2.0 * gamma_exp) * num / denom,
            })
        })
        .collect()
}
