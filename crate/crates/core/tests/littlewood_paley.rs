use heis_besov::group_core::{PolynomialForm, Weight};
use heis_besov::littlewood_paley::*;
use heis_besov::spectral::*;
use heis_besov::Error;
use num_complex::Complex64;
use std::sync::Arc;

fn spatial() -> Arc<SpatialGrid> {
    Arc::new(SpatialGrid::new(1, 7.5, 65, 30.0, 64).unwrap())
}

fn freq() -> Arc<FrequencyGrid> {
    let tol: f64 = 14.0;
    Arc::new(
        FrequencyGrid::new(GridSpec {
            n: 1,
            lambda_min: 1.0 / 64.0,
            lambda_max: (2.0 * tol).sqrt() / 4.0,
            order: 6,
            ratio: 2.0,
            max_panel: 0.2,
            truncation: Truncation::PhaseSpace {
                radius: (2.0 * tol).sqrt(),
                bandwidth: (2.0 * tol).sqrt(),
                floor: 8,
                cap: 8192,
                eigen_max: 400.0,
            },
            band: 0,
        })
        .unwrap(),
    )
}

fn gaussian(q: &heis_besov::group_core::GroupPoint) -> f64 {
    (-q.horizontal_norm_sq() / 2.0 - q.z * q.z / 32.0).exp()
}

#[test]
fn profiles_have_the_stated_supports() {
    for i in 0..=4000 {
        let x = i as f64 * 1e-3;
        let (a, b) = (chi_tilde(x), chi(x));
        assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        if x >= 4.0 / 3.0 {
            assert_eq!(a, 0.0);
        }
        if x < 0.75 || x >= 8.0 / 3.0 {
            assert_eq!(b, 0.0);
        }
    }
}

#[test]
fn dyadic_profiles_sum_to_one() {
    for i in 0..2000 {
        let x = 0.5 * (2f64.powi(7)).powf(i as f64 / 1999.0);
        let total: f64 = (-1..60).map(|k| chi_k(k, x)).sum();
        assert!((total - 1.0).abs() < 1e-14, "x {x} total {total}");
        let closed: f64 = (-1..=6).map(|k| block_profile(k, 6, x)).sum();
        assert!((closed - 1.0).abs() < 1e-14);
    }
}

#[test]
fn partition_is_complete_and_diagonal() {
    let fg = freq();
    let p = PartitionOfUnity::build(&fg, 6).unwrap();
    assert!(p.completeness_defect() < 1e-12);
    for k in p.levels() {
        let phi = p.phi(k).unwrap();
        assert!(phi.diagonal);
        assert_eq!(phi.off_diagonal_max(), 0.0);
    }
    assert!(matches!(p.phi(7), Err(Error::LevelTooFine { .. })));
    assert!(matches!(PartitionOfUnity::build(&fg, 12), Err(Error::GridTooCoarse(_))));
}

#[test]
fn blocks_reconstruct_the_field() {
    let sg = spatial();
    let fg = freq();
    let p = PartitionOfUnity::build(&fg, 6).unwrap();
    let f = SpatialField::from_fn(sg, gaussian);
    let blocks = p.decompose(&f).unwrap();
    assert_eq!(blocks.blocks.len(), 8);
    let err = blocks.sum().unwrap().sup_relative_error(&f).unwrap();
    assert!(err < 1e-3, "reconstruction {err:e}");
    let s_top = blocks.partial_sum(7).unwrap();
    assert!(s_top.sub(&blocks.sum().unwrap()).unwrap().sup_norm() < 1e-12);
    assert_eq!(blocks.partial_sum(-1).unwrap().sup_norm(), 0.0);
}

#[test]
fn separated_blocks_do_not_interact() {
    let fg = freq();
    let p = PartitionOfUnity::build(&fg, 6).unwrap();
    let j = 3;
    let f = theta_multiplier(|v: &[f64]| chi_k(j, v[0]), &fg);
    for k in p.levels() {
        let b = p.block_spectral(&f, k).unwrap();
        if (k - j).abs() >= 2 {
            assert_eq!(b.max_abs(), 0.0, "block {k}");
        }
    }
    let partial = p.partial_sum_spectral(&f, j - 1).unwrap();
    assert_eq!(partial.max_abs(), 0.0);
}

#[test]
fn heat_kernel_blocks_decay() {
    let fg = freq();
    let p = PartitionOfUnity::build(&fg, 6).unwrap();
    let t = 0.05;
    let heat = heat_kernel_field(&fg, t, GeneratorScale::Full);
    for k in 0..6 {
        let b = p.block_spectral(&heat, k).unwrap();
        let bound = (-4.0 * t * 0.75 * 2f64.powi(k)).exp();
        assert!(b.max_abs() <= bound * (1.0 + 1e-12), "k {k}: {} > {bound}", b.max_abs());
    }
}

#[test]
fn besov_norm_basic_properties() {
    let sg = spatial();
    let fg = freq();
    let p = PartitionOfUnity::build(&fg, 6).unwrap();
    let zero = p.decompose(&SpatialField::zeros(sg.clone())).unwrap();
    let params = BesovParams::new(0.5, 2.0, 2.0, Weight::exponential(0.3, 0.5).unwrap()).unwrap();
    assert_eq!(besov_norm(&zero, &params).unwrap(), 0.0);
    let f = SpatialField::from_fn(sg, gaussian);
    let blocks = p.decompose(&f).unwrap();
    let base = besov_norm(&blocks, &params).unwrap();
    // 2^{γk} is increasing in γ only for k ≥ 0; the k = −1 factor goes the other way
    let low = besov_block_norms(&blocks, &BesovParams { gamma: 0.2, ..params.clone() }).unwrap();
    let high = besov_block_norms(&blocks, &params).unwrap();
    for (a, b) in low.iter().zip(&high).filter(|(a, _)| a.0 >= 0) {
        assert!(a.1 * a.2 <= b.1 * b.2);
    }
    let scaled = p.decompose(&f.scale(Complex64::new(-2.5, 0.0))).unwrap();
    let rel = (besov_norm(&scaled, &params).unwrap() - 2.5 * base).abs() / base;
    assert!(rel < 1e-12, "rel {rel:e}");
    let sup = besov_norm(&blocks, &BesovParams { alpha: f64::INFINITY, beta: f64::INFINITY, ..params.clone() }).unwrap();
    let rows = besov_block_norms(&blocks, &BesovParams { alpha: f64::INFINITY, ..params.clone() }).unwrap();
    let direct = rows.iter().map(|(_, s, v)| s * v).fold(0.0, f64::max);
    assert_eq!(sup, direct);
    assert!(BesovParams::new(0.0, 0.5, 1.0, Weight::unit()).is_err());
}

#[test]
fn besov_embedding_shift_is_stable_under_dilation() {
    // ‖f‖_{γ − 2(1/α₁ − 1/α₂), α₂, β₂} ≲ ‖f‖_{γ, α₁, β₁} with α₁ = 1 ≤ α₂ = ∞
    let sg = spatial();
    let fg = freq();
    let p = PartitionOfUnity::build(&fg, 6).unwrap();
    let mut ratios = vec![];
    for width in [0.8, 1.0, 1.3] {
        let f = SpatialField::from_fn(sg.clone(), move |q| {
            (-q.horizontal_norm_sq() / (2.0 * width * width) - q.z * q.z / (32.0 * width.powi(4))).exp()
        });
        let blocks = p.decompose(&f).unwrap();
        let big = besov_norm(&blocks, &BesovParams::new(0.5, 1.0, 1.0, Weight::unit()).unwrap()).unwrap();
        let small = besov_norm(&blocks, &BesovParams::new(0.5 - 2.0, f64::INFINITY, 2.0, Weight::unit()).unwrap()).unwrap();
        ratios.push(small / big);
    }
    let mx = ratios.iter().cloned().fold(0.0, f64::max);
    let mn = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(mx <= 1.0 && mx / mn < 4.0, "{ratios:?}");
}

fn bernstein_row(k: i32, alpha: f64, beta: f64, weight: &Weight) -> Vec<f64> {
    let spec = GridSpec {
        n: 1,
        lambda_min: 1.0 / 64.0,
        lambda_max: 1.0,
        order: 8,
        ratio: 2.0,
        max_panel: 0.25,
        truncation: Truncation::PhaseSpace { radius: 1.0, bandwidth: 1.0, floor: 0, cap: 8192, eigen_max: 4.0 },
        band: 0,
    };
    let base = FrequencyGrid::new(spec).unwrap();
    [1.0f64, 4.0, 16.0]
        .iter()
        .map(|&tau| {
            let fg = Arc::new(base.scaled(tau).unwrap());
            let sg = Arc::new(SpatialGrid::new(1, 8.0 / tau.sqrt(), 41, 24.0 / tau, 41).unwrap());
            let f = theta_multiplier(|v: &[f64]| smooth_step(4.0 * v[0] / (3.0 * tau)), &fg);
            bernstein_check(&f, &sg, &BernsteinParams { tau, k, alpha, beta, weight: weight.clone() }).unwrap()
        })
        .collect()
}

#[test]
fn bernstein_ratios_are_scale_free() {
    let unit = bernstein_row(1, f64::INFINITY, 1.0, &Weight::unit());
    for r in &unit {
        assert!((r / unit[0] - 1.0).abs() < 1e-8, "{unit:?}");
    }
    let w = Weight::polynomial(1.0, 1.0, PolynomialForm::Decaying).unwrap();
    let row = bernstein_row(2, 2.0, 2.0, &w);
    let mx = row.iter().cloned().fold(0.0, f64::max);
    let mn = row.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(mx / mn < 4.0, "{row:?}");
}

#[test]
fn bernstein_rejects_wide_support() {
    let fg = freq();
    let sg = Arc::new(SpatialGrid::new(1, 4.0, 9, 4.0, 9).unwrap());
    let f = theta_multiplier(|v: &[f64]| chi_k(2, v[0]), &fg);
    let p = BernsteinParams { tau: 2.0, k: 0, alpha: 2.0, beta: 2.0, weight: Weight::unit() };
    assert!(matches!(bernstein_check(&f, &sg, &p), Err(Error::SupportViolation(_))));
}
