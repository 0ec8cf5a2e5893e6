//! Hermite functions, Laguerre polynomials and the Fourier kernels
//! `K_{m,ℓ,λ}` of the projective Fourier transform.

use crate::error::{Error, Result};
use crate::group_core::GroupPoint;
use crate::quadrature::gauss_hermite_full;
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

const RESCALE_HI: f64 = 1e150;
const LN_UNDERFLOW: f64 = -745.0;

/// Normalized Hermite functions `Φ_0(x), …, Φ_kmax(x)` in one variable.
///
/// Uses the orthonormal three-term recurrence with a running logarithmic
/// scale so that neither `e^{-x²/2}` nor large intermediate values spoil the
/// result.
pub fn hermite_functions(kmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    let mut log_scale = -0.5 * x * x - 0.25 * PI.ln();
    let mut prev = 0.0f64;
    let mut cur = 1.0f64;
    // scaled values are stored in `raw`, each with the scale in effect when computed
    let mut raw: Vec<(f64, f64)> = Vec::with_capacity(kmax + 1);
    raw.push((cur, log_scale));
    for k in 0..kmax {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_HI {
            let s = cur.abs().ln();
            cur /= cur.abs();
            prev /= s.exp();
            log_scale += s;
        }
        raw.push((cur, log_scale));
    }
    for (o, (v, ls)) in out.iter_mut().zip(raw) {
        *o = if v == 0.0 || ls < LN_UNDERFLOW - 50.0 {
            0.0
        } else {
            let mag = v.abs().ln() + ls;
            if mag < LN_UNDERFLOW {
                0.0
            } else {
                v.signum() * mag.exp()
            }
        };
    }
    out
}

pub fn hermite_function(k: usize, x: f64) -> f64 {
    hermite_functions(k, x)[k]
}

/// Hermite functions of a multi-index, with degree bounded by `m_max`.
#[derive(Debug, Clone)]
pub struct HermiteBasis {
    pub n: usize,
    pub m_max: usize,
}

impl HermiteBasis {
    pub fn new(n: usize, m_max: usize) -> Self {
        Self { n, m_max }
    }

    fn check(&self, k: &[usize], x: &[f64]) -> Result<()> {
        if k.len() != self.n || x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: k.len().max(x.len()),
            });
        }
        let deg: usize = k.iter().sum();
        if deg > self.m_max {
            return Err(Error::DegreeOverflow {
                degree: deg,
                max: self.m_max,
            });
        }
        Ok(())
    }

    /// `Φ_k(x) = Π_j Φ_{k_j}(x_j)`.
    pub fn hermite(&self, k: &[usize], x: &[f64]) -> Result<f64> {
        self.check(k, x)?;
        Ok(k.iter().zip(x).map(|(&kj, &xj)| hermite_function(kj, xj)).product())
    }

    /// `Φ_k^λ(x) = |λ|^{n/4} Φ_k(√|λ| x)`.
    pub fn hermite_rescaled(&self, k: &[usize], lambda: f64, x: &[f64]) -> Result<f64> {
        if lambda == 0.0 {
            return Err(Error::ZeroLambda);
        }
        self.check(k, x)?;
        let s = lambda.abs().sqrt();
        let xs: Vec<f64> = x.iter().map(|v| v * s).collect();
        Ok(lambda.abs().powf(self.n as f64 / 4.0) * self.hermite(k, &xs)?)
    }
}

/// Generalized Laguerre polynomial `L_k^{(a)}(x)` by the three-term recurrence.
pub fn laguerre(k: usize, a: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + a - x;
    for l in 1..k {
        let lf = l as f64;
        let next = ((2.0 * lf + a + 1.0 - x) * cur - (lf + a) * prev) / (lf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Double-double accumulator used to sum the explicit Laguerre series
/// without catastrophic cancellation.
#[derive(Clone, Copy, Debug)]
struct Dd(f64, f64);

impl Dd {
    fn from(v: f64) -> Self {
        Dd(v, 0.0)
    }
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }
    fn add(self, o: Dd) -> Dd {
        let (s, e) = Self::two_sum(self.0, o.0);
        let e = e + self.1 + o.1;
        let (hi, lo) = Self::two_sum(s, e);
        Dd(hi, lo)
    }
    fn mul_f(self, b: f64) -> Dd {
        let p = self.0 * b;
        let e = self.0.mul_add(b, -p);
        let e = e + self.1 * b;
        let (hi, lo) = Self::two_sum(p, e);
        Dd(hi, lo)
    }
    fn div_f(self, b: f64) -> Dd {
        let q1 = self.0 / b;
        let r = self.add(Dd::from(q1).mul_f(-b));
        let q2 = r.0 / b;
        let (hi, lo) = Self::two_sum(q1, q2);
        Dd(hi, lo)
    }
}

/// `L_k^{(a)}(x) = Σ_j (−1)^j C(k+a, k−j) x^j / j!` summed explicitly.
///
/// Terms are generated by exact ratios and accumulated in double-double
/// arithmetic; used as an independent check of [`laguerre`].
pub fn laguerre_direct(k: usize, a: f64, x: f64) -> f64 {
    // t_0 = C(k+a, k)
    let mut t0 = Dd::from(1.0);
    for i in 1..=k {
        t0 = t0.mul_f(a + i as f64).div_f(i as f64);
    }
    let mut term = t0;
    let mut sum = term;
    for j in 0..k {
        let jf = j as f64;
        term = term
            .mul_f(-x)
            .mul_f((k - j) as f64)
            .div_f((jf + 1.0) * (a + jf + 1.0));
        sum = sum.add(term);
    }
    sum.0 + sum.1
}

/// Normalized Laguerre functions
/// `ℒ_ℓ^{(k)}(X) = sqrt(ℓ!/(ℓ+k)!) X^{k/2} e^{−X/2} L_ℓ^{(k)}(X)` for
/// `ℓ = 0..=lmax`, written into `out`.
pub fn laguerre_functions_into(k: usize, big_x: f64, lmax: usize, out: &mut [f64]) {
    debug_assert!(out.len() > lmax);
    let kf = k as f64;
    let base = if big_x <= 0.0 {
        if k == 0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        0.5 * kf * big_x.ln()
    };
    let mut log_scale = base - 0.5 * big_x - 0.5 * ln_gamma(kf + 1.0);
    if !log_scale.is_finite() {
        out[..=lmax].iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let mut prev = 0.0f64;
    let mut cur = 1.0f64;
    let emit = |v: f64, ls: f64| -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        let mag = v.abs().ln() + ls;
        if mag < LN_UNDERFLOW {
            0.0
        } else {
            v.signum() * mag.exp()
        }
    };
    out[0] = emit(cur, log_scale);
    for l in 0..lmax {
        let lf = l as f64;
        let next = ((2.0 * lf + kf + 1.0 - big_x) * cur - (lf * (lf + kf)).sqrt() * prev)
            / ((lf + 1.0) * (lf + kf + 1.0)).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_HI {
            let s = cur.abs().ln();
            let f = cur.abs();
            cur /= f;
            prev /= f;
            log_scale += s;
        }
        out[l + 1] = emit(cur, log_scale);
    }
}

pub fn laguerre_functions(k: usize, big_x: f64, lmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; lmax + 1];
    laguerre_functions_into(k, big_x, lmax, &mut out);
    out
}

/// Table of one-dimensional kernels `K_{m,ℓ,λ}(x, y)` for `m, ℓ ≤ m_max`
/// and `|m − ℓ| ≤ band`, from the closed Laguerre form.
#[derive(Debug, Clone)]
pub struct KernelTable1d {
    m_max: usize,
    band: usize,
    /// `lag[k][j]` holds `ℒ_j^{(k)}(X)`, `X = 2|λ|(x² + y²)`.
    lag: Vec<Vec<f64>>,
    /// `e^{i s k θ}` for `k = 0..=band`, `s = sign λ`, `θ = arg(x + i y)`.
    phase: Vec<Complex64>,
}

impl KernelTable1d {
    pub fn new(lambda: f64, x: f64, y: f64, m_max: usize, band: usize) -> Self {
        let band = band.min(m_max);
        let r2 = x * x + y * y;
        let big_x = 2.0 * lambda.abs() * r2;
        let theta = y.atan2(x);
        let s = lambda.signum();
        let phase = (0..=band)
            .map(|k| Complex64::from_polar(1.0, s * theta * k as f64))
            .collect();
        let lag = (0..=band)
            .map(|k| laguerre_functions(k, big_x, m_max - k))
            .collect();
        Self {
            m_max,
            band,
            lag,
            phase,
        }
    }

    /// Kernel entry; zero outside the table's band.
    pub fn get(&self, m: usize, l: usize) -> Complex64 {
        if m > self.m_max || l > self.m_max {
            return Complex64::new(0.0, 0.0);
        }
        if m >= l {
            let k = m - l;
            if k > self.band {
                return Complex64::new(0.0, 0.0);
            }
            self.phase[k] * self.lag[k][l]
        } else {
            let k = l - m;
            if k > self.band {
                return Complex64::new(0.0, 0.0);
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            self.phase[k].conj() * (sign * self.lag[k][m])
        }
    }
}

/// `K_{m,ℓ,λ}(x, y)` for `n = 1` in closed form.
pub fn kernel_1d_closed(m: usize, l: usize, lambda: f64, x: f64, y: f64) -> Complex64 {
    KernelTable1d::new(lambda, x, y, m.max(l), m.abs_diff(l)).get(m, l)
}

/// `K_{m,ℓ,λ}(x, y)` for `n = 1` by Gauss–Hermite quadrature of the defining
/// integral `∫ e^{2iλyξ} Φ_m^λ(x+ξ) Φ_ℓ^λ(−x+ξ) dξ`.
pub fn kernel_1d_quadrature(m: usize, l: usize, lambda: f64, x: f64, y: f64) -> Complex64 {
    let s = lambda.abs().sqrt();
    let a = s * x;
    let b = 2.0 * lambda.signum() * s * y;
    let nodes = (40.0 + (m + l) as f64 + b * b + 2.0 * a * a).ceil().min(800.0) as usize;
    let (u, w) = gauss_hermite_full(nodes);
    let mut acc = Complex64::new(0.0, 0.0);
    for (ui, wi) in u.iter().zip(&w) {
        let f1 = hermite_function(m, ui + a);
        let f2 = hermite_function(l, ui - a);
        acc += Complex64::from_polar(wi * f1 * f2, b * ui);
    }
    acc
}

fn check_kernel_args(m: &[usize], l: &[usize], lambda: f64, q: &GroupPoint) -> Result<()> {
    if lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let n = q.dim();
    if m.len() != n || l.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.len().max(l.len()),
        });
    }
    Ok(())
}

/// `K_{m,ℓ,λ}(q)` by quadrature in `ξ`; the kernel factorizes over coordinates.
pub fn wigner_kernel(m: &[usize], l: &[usize], lambda: f64, q: &GroupPoint) -> Result<Complex64> {
    check_kernel_args(m, l, lambda, q)?;
    Ok((0..q.dim())
        .map(|j| kernel_1d_quadrature(m[j], l[j], lambda, q.x[j], q.y[j]))
        .product())
}

/// `K_{m,ℓ,λ}(q)` from the closed Laguerre form.
pub fn wigner_kernel_closed(
    m: &[usize],
    l: &[usize],
    lambda: f64,
    q: &GroupPoint,
) -> Result<Complex64> {
    check_kernel_args(m, l, lambda, q)?;
    Ok((0..q.dim())
        .map(|j| kernel_1d_closed(m[j], l[j], lambda, q.x[j], q.y[j]))
        .product())
}

/// `e^{−|λ| r²} L_k^{(n−1)}(2|λ| r²)`, the sum of diagonal kernels over `|m| = k`.
pub fn radial_kernel_sum(k: usize, n: usize, lambda: f64, r2: f64) -> f64 {
    let x = 2.0 * lambda.abs() * r2;
    // ℒ_k^{(a)}(x) sqrt((k+a)!/k!) x^{-a/2} = e^{-x/2} L_k^{(a)}(x)
    let a = n - 1;
    if a == 0 {
        return laguerre_functions(0, x, k)[k];
    }
    if x == 0.0 {
        return laguerre(k, a as f64, 0.0);
    }
    let v = laguerre_functions(a, x, k)[k];
    let af = a as f64;
    let kf = k as f64;
    let log_fac = 0.5 * (ln_gamma(kf + af + 1.0) - ln_gamma(kf + 1.0)) - 0.5 * af * x.ln();
    v * log_fac.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_examples() {
        let p = PI.powf(-0.25);
        assert!((hermite_function(0, 0.0) - p).abs() < 1e-15);
        for &x in &[-2.0, -0.3, 0.0, 0.7, 3.1] {
            let want = 2f64.sqrt() * x * p * (-x * x / 2.0).exp();
            assert!((hermite_function(1, x) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn hermite_far_tail_is_finite() {
        let v = hermite_functions(700, 36.0);
        assert!(v.iter().all(|x| x.is_finite() && x.abs() < 1.0));
        assert!(v[650..].iter().any(|x| x.abs() > 1e-2));
        assert_eq!(hermite_function(0, 40.0), 0.0);
    }

    #[test]
    fn laguerre_examples() {
        for &x in &[0.0, 0.5, 3.0, 17.0] {
            assert_eq!(laguerre(0, 2.0, x), 1.0);
            assert!((laguerre(1, 0.0, x) - (1.0 - x)).abs() < 1e-14);
            for a in 0..4 {
                assert!((laguerre(1, a as f64, x) - (a as f64 + 1.0 - x)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn normalized_laguerre_matches_definition() {
        for k in 0..4usize {
            for &x in &[0.1, 1.0, 6.0, 20.0] {
                let t = laguerre_functions(k, x, 12);
                for (l, v) in t.iter().enumerate() {
                    let lf = l as f64;
                    let kf = k as f64;
                    let c = (0.5 * (ln_gamma(lf + 1.0) - ln_gamma(lf + kf + 1.0))).exp();
                    let want = c * x.powf(kf / 2.0) * (-x / 2.0).exp() * laguerre(l, kf, x);
                    assert!((v - want).abs() < 1e-12, "k={k} x={x} l={l}");
                }
            }
        }
    }

    #[test]
    fn closed_kernel_at_identity() {
        for &lam in &[0.3, -2.0] {
            let q = GroupPoint::identity(1);
            let k = wigner_kernel_closed(&[0], &[0], lam, &q).unwrap();
            assert!((k - Complex64::new(1.0, 0.0)).norm() < 1e-14);
            let k = wigner_kernel(&[0], &[0], lam, &q).unwrap();
            assert!((k - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            let k = wigner_kernel(&[3], &[1], lam, &q).unwrap();
            assert!(k.norm() < 1e-12);
        }
        assert!(wigner_kernel(&[0], &[0], 0.0, &GroupPoint::identity(1)).is_err());
    }
}
