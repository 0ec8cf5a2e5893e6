//! Gauss–Legendre and Gauss–Hermite rules and an adaptive integrator.

use nalgebra::DMatrix;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp;
        loop {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j as f64 + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    (
        x.iter().map(|t| c + h * t).collect(),
        w.iter().map(|v| v * h).collect(),
    )
}

/// Gauss–Hermite rule for `∫ F(u) du` over the real line.
///
/// Returns nodes `u_i` and weights `W_i = w_i e^{u_i²}`, so that
/// `∫ F ≈ Σ W_i F(u_i)` for `F = e^{-u²}·polynomial`.
pub fn gauss_hermite_full(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return hit.clone();
    }
    // Golub–Welsch: nodes are eigenvalues of the Jacobi matrix, then polished by Newton.
    let jac = DMatrix::from_fn(n, n, |i, j| {
        if i.abs_diff(j) == 1 {
            (0.5 * i.max(j) as f64).sqrt()
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = jac.symmetric_eigenvalues().iter().copied().collect();
    nodes.sort_by(|a, b| a.total_cmp(b));
    let nf = n as f64;
    for z in nodes.iter_mut() {
        for _ in 0..3 {
            let phis = crate::special_functions::hermite_functions(n, *z);
            // Φ_n' = sqrt(2n) Φ_{n-1} − z Φ_n
            let d = (2.0 * nf).sqrt() * phis[n - 1] - *z * phis[n];
            if d == 0.0 {
                break;
            }
            let step = phis[n] / d;
            if !step.is_finite() || step.abs() > 1e-3 {
                break;
            }
            *z -= step;
        }
    }
    if n % 2 == 1 {
        // middle root is exactly zero
        nodes[n / 2] = 0.0;
    }
    for i in 0..n / 2 {
        let v = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -v;
        nodes[n - 1 - i] = v;
    }
    let weights = nodes
        .iter()
        .map(|&u| {
            let phis = crate::special_functions::hermite_functions(n - 1, u);
            1.0 / phis.iter().map(|p| p * p).sum::<f64>()
        })
        .collect();
    let out = (nodes, weights);
    cache.lock().unwrap().insert(n, out.clone());
    out
}

/// Adaptive Gauss–Legendre integration of a real function on `[a, b]`.
///
/// Each panel is accepted when a 10-point rule and the sum over its two halves
/// agree within `tol` scaled by the panel length.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let (x, w) = gauss_legendre(10);
    let rule = |lo: f64, hi: f64| -> f64 {
        let h = 0.5 * (hi - lo);
        let c = 0.5 * (hi + lo);
        x.iter().zip(&w).map(|(t, wt)| wt * f(c + h * t)).sum::<f64>() * h
    };
    let total_len = (b - a).abs().max(f64::MIN_POSITIVE);
    let mut stack = vec![(a, b, rule(a, b), 0usize)];
    let mut acc = 0.0;
    let mut comp = 0.0;
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule(lo, mid);
        let right = rule(mid, hi);
        let err = (left + right - whole).abs();
        if err <= tol * (hi - lo).abs() / total_len || depth >= 40 {
            // Kahan summation keeps the result independent of panel count.
            let y = left + right - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    acc
}

/// Fixed composite Gauss–Legendre integration with `panels` equal panels.
pub fn composite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let c = lo + 0.5 * h;
        let s: f64 = x.iter().zip(&w).map(|(t, wt)| wt * f(c + 0.5 * h * t)).sum();
        total += s * 0.5 * h;
    }
    total
}
