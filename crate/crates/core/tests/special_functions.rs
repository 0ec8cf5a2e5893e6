use heis_besov::group_core::GroupPoint;
use heis_besov::quadrature::gauss_hermite_full;
use heis_besov::special_functions::*;
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn rescaled_orthonormality_on_512_points() {
    let basis = HermiteBasis::new(1, 32);
    for &lam in &[0.25, 1.0, 3.0] {
        // Gauss–Hermite nodes scaled to the dilated functions
        let (u, w) = gauss_hermite_full(512);
        let s = f64::sqrt(lam);
        let vals: Vec<Vec<f64>> = (0..=32)
            .map(|k| {
                u.iter()
                    .map(|&ui| basis.hermite_rescaled(&[k], lam, &[ui / s]).unwrap())
                    .collect()
            })
            .collect();
        let mut worst: f64 = 0.0;
        for j in 0..=32 {
            for k in 0..=32 {
                let ip: f64 = (0..u.len()).map(|i| w[i] / s * vals[j][i] * vals[k][i]).sum();
                let want = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((ip - want).abs());
            }
        }
        assert!(worst < 1e-8, "λ={lam} deviation {worst}");
    }
}

#[test]
fn odd_even_orthogonality() {
    let (u, w) = gauss_hermite_full(64);
    let ip: f64 = u
        .iter()
        .zip(&w)
        .map(|(x, wi)| wi * hermite_function(0, *x) * hermite_function(1, *x))
        .sum();
    assert!(ip.abs() < 1e-14);
}

#[test]
fn oscillator_eigenrelation_by_finite_differences() {
    let basis = HermiteBasis::new(1, 8);
    let lam = 1.7;
    let h = 1e-3;
    for k in 0..6usize {
        for &x in &[-1.3, -0.2, 0.4, 1.1] {
            let f = |x: f64| basis.hermite_rescaled(&[k], lam, &[x]).unwrap();
            let second = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            let osc = second - lam * lam * x * x * f(x);
            let want = -(2.0 * k as f64 + 1.0) * lam * f(x);
            assert!((osc - want).abs() < 1e-4, "k={k} x={x} {osc} {want}");
        }
    }
}

#[test]
fn degree_and_dimension_errors() {
    let basis = HermiteBasis::new(2, 4);
    assert!(basis.hermite(&[3, 2], &[0.0, 0.0]).is_err());
    assert!(basis.hermite(&[1], &[0.0, 0.0]).is_err());
    assert!(basis.hermite_rescaled(&[1, 1], 0.0, &[0.0, 0.0]).is_err());
    let v = basis.hermite(&[1, 2], &[0.3, -0.4]).unwrap();
    let want = hermite_function(1, 0.3) * hermite_function(2, -0.4);
    assert!((v - want).abs() < 1e-15);
}

#[test]
fn laguerre_recurrence_matches_direct_sum() {
    let mut worst: f64 = 0.0;
    for k in 0..=30usize {
        for a in 0..4usize {
            for i in 0..=100 {
                let x = 0.5 * i as f64;
                let r = laguerre(k, a as f64, x);
                let d = laguerre_direct(k, a as f64, x);
                worst = worst.max((r - d).abs() / d.abs().max(1.0));
            }
        }
    }
    assert!(worst < 1e-10, "worst relative deviation {worst}");
}

#[test]
fn closed_form_kernel_matches_quadrature() {
    let pts = [(0.3, -0.2), (1.1, 0.7), (-0.8, 1.4), (0.0, 2.0), (-1.5, -0.5)];
    for &lam in &[0.5, 1.0, -1.3, 3.0] {
        for &(x, y) in &pts {
            for m in 0..6usize {
                for l in 0..6usize {
                    let a = kernel_1d_closed(m, l, lam, x, y);
                    let b = kernel_1d_quadrature(m, l, lam, x, y);
                    assert!((a - b).norm() < 1e-10, "m={m} l={l} λ={lam} ({x},{y}) {a} {b}");
                }
            }
        }
    }
}

#[test]
fn kernel_symmetry_in_lambda() {
    let q = GroupPoint::h1(0.4, -0.9, 0.3);
    for (m, l) in [(0usize, 0usize), (2, 1), (1, 4)] {
        let a = wigner_kernel_closed(&[m], &[l], 0.8, &q).unwrap();
        let b = wigner_kernel_closed(&[m], &[l], -0.8, &q).unwrap();
        assert!((a.conj() - b).norm() < 1e-14);
    }
}

#[test]
fn two_dimensional_kernel_factorizes() {
    let q = GroupPoint::new(vec![0.3, -0.5], vec![0.2, 0.6], 1.0).unwrap();
    let k = wigner_kernel(&[1, 0], &[0, 2], 0.7, &q).unwrap();
    let c = wigner_kernel_closed(&[1, 0], &[0, 2], 0.7, &q).unwrap();
    assert!((k - c).norm() < 1e-10);
    let k1 = kernel_1d_closed(1, 0, 0.7, 0.3, 0.2) * kernel_1d_closed(0, 2, 0.7, -0.5, 0.6);
    assert!((k1 - c).norm() < 1e-14);
}

#[test]
fn radial_sum_identity() {
    for n in 1..=2usize {
        for &lam in &[0.4, -1.2] {
            for &(x1, y1, x2, y2) in &[(0.3, 0.1, -0.2, 0.5), (1.0, -0.4, 0.2, 0.0)] {
                let (xs, ys) = if n == 1 { (vec![x1], vec![y1]) } else { (vec![x1, x2], vec![y1, y2]) };
                let r2: f64 = xs.iter().chain(&ys).map(|v| v * v).sum();
                let q = GroupPoint::new(xs, ys, 0.0).unwrap();
                for k in 0..=10usize {
                    let mut sum = Complex64::new(0.0, 0.0);
                    let idx: Vec<Vec<usize>> = if n == 1 {
                        vec![vec![k]]
                    } else {
                        (0..=k).map(|a| vec![a, k - a]).collect()
                    };
                    for m in &idx {
                        sum += wigner_kernel(m, m, lam, &q).unwrap();
                    }
                    let want = radial_kernel_sum(k, n, lam, r2);
                    let direct = (-lam.abs() * r2).exp() * laguerre(k, (n - 1) as f64, 2.0 * lam.abs() * r2);
                    assert!((want - direct).abs() < 1e-12);
                    assert!((sum.re - want).abs() < 1e-6 && sum.im.abs() < 1e-6, "n={n} k={k}");
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn kernel_is_bounded(m in 0usize..20, l in 0usize..20, lam in 0.05f64..6.0, sgn in any::<bool>(),
                         x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let lam = if sgn { lam } else { -lam };
        let k = kernel_1d_closed(m, l, lam, x, y);
        prop_assert!(k.norm() <= 1.0 + 1e-12);
    }
}
