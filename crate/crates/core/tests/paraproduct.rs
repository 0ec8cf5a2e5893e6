use heis_besov::group_core::{GroupPoint, PolynomialForm, Weight};
use heis_besov::littlewood_paley::*;
use heis_besov::paraproduct::*;
use heis_besov::spectral::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

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

fn radial(s: f64, c: f64) -> impl Fn(&GroupPoint) -> f64 {
    move |q: &GroupPoint| {
        let r2 = q.horizontal_norm_sq() / (s * s);
        (1.0 + r2 / 4.0) * (-r2 / 2.0 - (q.z - c).powi(2) / 32.0).exp() * (q.z / 3.0).cos()
    }
}

fn bump(c: (f64, f64, f64), s: f64) -> impl Fn(&GroupPoint) -> f64 {
    move |q: &GroupPoint| {
        let (dx, dy) = (q.x[0] - c.0, q.y[0] - c.1);
        (-(dx * dx + dy * dy) / (2.0 * s * s) - (q.z - c.2).powi(2) / (32.0 * s.powi(4))).exp()
    }
}

fn max_abs_diff(a: &SpatialField, b: &SpatialField) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn brute_force_resum_on_small_grid() {
    let sg = Arc::new(SpatialGrid::new(1, 3.0, 8, 8.0, 8).unwrap());
    let part = PartitionOfUnity::build(&freq(), 6).unwrap();
    let f = SpatialField::from_fn(sg.clone(), bump((0.3, -0.2, 0.5), 1.0));
    let g = SpatialField::from_fn(sg.clone(), |q: &GroupPoint| (q.x[0] - 0.5 * q.y[0]).cos() * (-q.z * q.z / 20.0).exp());
    let parts = decompose(&part, &f, &g).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..sg.len() {
        let direct = f.values[i] * g.values[i];
        worst = worst.max((parts.low_high.values[i] + parts.resonant.values[i] + parts.high_low.values[i] - direct).norm());
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn single_block_factors_land_in_low_high() {
    let sg = Arc::new(SpatialGrid::new(1, 7.5, 33, 30.0, 32).unwrap());
    let levels = 6;
    let blank = || SpatialField::zeros(sg.clone());
    let mut fb = BlockDecomposition { k_min: -1, blocks: (0..=levels + 1).map(|_| blank()).collect() };
    let mut gb = fb.clone();
    fb.blocks[1] = SpatialField::from_fn(sg.clone(), bump((0.0, 0.0, 0.0), 1.0));
    gb.blocks[4] = SpatialField::from_fn(sg.clone(), bump((0.5, 0.0, 1.0), 0.7));
    let parts = split(&fb, &gb).unwrap();
    let direct = fb.blocks[1].mul(&gb.blocks[4]).unwrap();
    assert_eq!(parts.resonant.sup_norm(), 0.0);
    assert_eq!(parts.high_low.sup_norm(), 0.0);
    assert!(max_abs_diff(&parts.low_high, &direct) < 1e-15);

    // adjacent levels are resonant
    let mut gb2 = fb.clone();
    gb2.blocks[2] = gb.blocks[4].clone();
    gb2.blocks[1] = blank();
    let parts = split(&fb, &gb2).unwrap();
    assert_eq!(parts.low_high.sup_norm(), 0.0);
    assert_eq!(parts.high_low.sup_norm(), 0.0);
}

#[test]
fn split_is_bilinear_and_rejects_mismatch() {
    let sg = Arc::new(SpatialGrid::new(1, 7.5, 33, 30.0, 32).unwrap());
    let part = PartitionOfUnity::build(&freq(), 6).unwrap();
    let f = SpatialField::from_fn(sg.clone(), bump((0.0, 0.0, 0.0), 1.0));
    let g = SpatialField::from_fn(sg.clone(), bump((1.0, -0.5, 2.0), 0.6));
    let a = decompose(&part, &f, &g).unwrap();
    let b = decompose(&part, &f.scale(Complex64::new(2.0, 0.0)), &g).unwrap();
    let twice = a.scale(2.0);
    for (x, y) in [(&b.low_high, &twice.low_high), (&b.resonant, &twice.resonant), (&b.high_low, &twice.high_low)] {
        assert!(max_abs_diff(x, y) < 1e-12 * (1.0 + y.sup_norm()));
    }
    let other = Arc::new(SpatialGrid::new(1, 7.5, 33, 30.0, 30).unwrap());
    let h = SpatialField::from_fn(other, bump((0.0, 0.0, 0.0), 1.0));
    assert!(decompose(&part, &f, &h).is_err());
}

#[test]
fn localized_split_respects_support_windows() {
    let sg = Arc::new(SpatialGrid::new(1, 7.5, 65, 30.0, 64).unwrap());
    let part = PartitionOfUnity::build(&freq(), 6).unwrap();
    let f = SpatialField::from_fn(sg.clone(), bump((0.0, 0.0, 0.0), 1.0));
    let g = SpatialField::from_fn(sg.clone(), radial(1.2, 0.5));
    let exact = decompose(&part, &f, &g).unwrap().sum().unwrap();
    let (loc, rows) = decompose_localized(&part, &f, &g, &SupportRule::default()).unwrap();
    let energy = plancherel_norm(&forward_transform(&exact, part.grid()).unwrap());
    let worst = rows.iter().map(|r| r.dropped).fold(0.0, f64::max) / energy;
    assert!(worst < 1e-6, "{worst:e}");
    for r in &rows {
        for &m in &r.retained {
            let (a, b) = block_support(m, 6);
            let (lo, hi) = SupportRule::default().window(r.part, r.k);
            assert!(a < hi && b > lo || r.k == 6);
        }
    }
    // what remains is the transform roundtrip of each summand
    let err = max_abs_diff(&loc.sum().unwrap(), &exact) / exact.sup_norm();
    assert!(err < 1e-2, "{err:e}");

    // pooling summands by output block is the same linear map
    let (fb, gb) = (complete_blocks(&part, &f).unwrap(), complete_blocks(&part, &g).unwrap());
    let pooled = inverse_transform(&localized_product(&part, &fb, &gb, &SupportRule::default()).unwrap(), &sg).unwrap();
    let err = max_abs_diff(&pooled, &loc.sum().unwrap()) / exact.sup_norm();
    assert!(err < 1e-10, "{err:e}");
}

#[test]
fn product_ratios_stay_bounded() {
    let sg = Arc::new(SpatialGrid::new(1, 7.5, 65, 30.0, 64).unwrap());
    let part = PartitionOfUnity::build(&freq(), 6).unwrap();
    let params = ProductParams {
        kappa1: 0.5,
        kappa2: -0.25,
        w1: Weight::polynomial(1.0, 0.5, PolynomialForm::Decaying).unwrap(),
        w2: Weight::exponential(0.25, 0.5).unwrap(),
        alpha: 2.0,
        beta: 2.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut products = vec![];
    for _ in 0..10 {
        let (s1, s2) = (rng.random_range(0.9..1.3), rng.random_range(0.9..1.3));
        let (c1, c2) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let f = SpatialField::from_fn(sg.clone(), radial(s1, c1));
        let g = SpatialField::from_fn(sg.clone(), radial(s2, c2));
        let r = product_estimate_check(&part, &f, &g, &params).unwrap();
        assert!(r.product.is_finite() && r.resonant.is_finite());
        products.push(r.product);
    }
    let (lo, hi) = products.iter().fold((f64::INFINITY, 0.0f64), |a, &x| (a.0.min(x), a.1.max(x)));
    assert!(hi / lo <= 10.0);
    let bad = ProductParams { kappa1: 0.2, ..params };
    let f = SpatialField::from_fn(sg.clone(), radial(1.0, 0.0));
    assert!(product_estimate_check(&part, &f, &f, &bad).is_err());
}
