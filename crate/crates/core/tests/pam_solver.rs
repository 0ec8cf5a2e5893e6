use heis_besov::group_core::GroupPoint;
use heis_besov::heat_flow::semigroup_apply;
use heis_besov::littlewood_paley::PartitionOfUnity;
use heis_besov::pam_solver::*;
use heis_besov::paraproduct::ProductMode;
use heis_besov::spectral::*;
use heis_besov::stochastics::*;
use heis_besov::Error;
use num_complex::Complex64;
use std::sync::{Arc, OnceLock};

struct Setup {
    part: PartitionOfUnity,
    space: Arc<SpatialGrid>,
    u0: SpatialField,
}

fn setup() -> &'static Setup {
    static S: OnceLock<Setup> = OnceLock::new();
    S.get_or_init(|| {
        let tol: f64 = 14.0;
        let g = Arc::new(
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
        );
        let space = Arc::new(SpatialGrid::new(1, 6.0, 33, 24.0, 32).unwrap());
        let u0 = SpatialField::from_fn(space.clone(), |q: &GroupPoint| (-q.horizontal_norm_sq() / 2.0 - q.z * q.z / 32.0).exp());
        Setup { part: PartitionOfUnity::build(&g, 6).unwrap(), space, u0 }
    })
}

fn config(horizon: f64, steps: usize, sub_level: u32, product: ProductMode) -> SolverConfig {
    SolverConfig {
        horizon,
        steps,
        sub_level,
        exponents: Exponents { theta: 0.35, vartheta: 0.7, gamma: 0.3, kappa: 0.4 },
        schedule: WeightSchedule { nu: 0.1, b: 1.0, eta: 0.5 },
        alpha: 2.0,
        beta: 2.0,
        picard_max: 40,
        picard_tol: 1e-7,
        product,
        rule: RiemannRule::Trapezoid,
        tau: TauRule::default(),
        scale: GeneratorScale::Half,
    }
}

fn path(cfg: &SolverConfig, seed: u64, spatial: f64, constant: f64) -> NoisePath {
    let mut np = NoiseParams::new(0.5, 0.75, seed, cfg.times());
    np.spatial = spatial;
    np.constant = constant;
    sample_noise(&np, setup().part.grid()).unwrap()
}

#[test]
fn hypothesis_windows() {
    let r = hypothesis_check(0.7, 0.3, 0.5, 0.75, 1);
    assert!(r.feasible && r.noise_admissible);
    let (lo, hi) = r.window.unwrap();
    assert!((lo - 0.25).abs() < 1e-15 && (hi - 0.5).abs() < 1e-15);
    assert!(!r.tiny);

    let r = hypothesis_check(0.7, 0.45, 0.5, 0.75, 1);
    assert!(!r.young && !r.feasible);
    let r = hypothesis_check(0.8, 0.3, 0.5, 0.75, 1);
    assert!(!r.holder && !r.feasible);
    let r = hypothesis_check(0.7, 0.2, 0.5, 0.75, 1);
    assert!(!r.regularity && !r.feasible);

    let r = hypothesis_check(0.5, 0.009, 0.99, 0.995, 1);
    assert!(r.noise_admissible && r.tiny);
    let r = hypothesis_check(0.5, 0.009, 0.99, 1.0, 1);
    assert!(!r.noise_admissible && !r.feasible && r.window.is_none() && r.tiny);
}

#[test]
fn config_invariants() {
    let ok = config(0.25, 4, 1, ProductMode::Pointwise);
    ok.validate().unwrap();
    let e = |f: fn(&mut Exponents)| {
        let mut c = ok.clone();
        f(&mut c.exponents);
        c.validate()
    };
    assert!(matches!(e(|x| x.vartheta = 0.6), Err(Error::Infeasible(_))));
    assert!(matches!(e(|x| x.theta = 0.25), Err(Error::Infeasible(_))));
    assert!(matches!(e(|x| x.kappa = 0.3), Err(Error::Infeasible(_))));
    assert!(matches!(e(|x| x.gamma = 0.0), Err(Error::Infeasible(_))));
    let mut c = ok.clone();
    c.sub_level = MAX_SUB_LEVEL + 1;
    assert!(c.validate().is_err());
    let mut c = ok.clone();
    c.schedule.eta = 1.0;
    assert!(c.validate().is_err());
}

#[test]
fn dspace_norm_examples() {
    let s = setup();
    let mut cfg = config(1.0, 4, 0, ProductMode::Pointwise);
    let f = forward_transform(&s.u0, s.part.grid()).unwrap();
    let times = [0.0, 0.25, 0.5, 1.0];
    let constant = vec![f.clone(); 4];
    assert_eq!(dspace_norm(&constant, &times, &s.part, &s.space, &cfg).unwrap(), 0.0);

    // frozen weight: ‖u_t − u_s‖ = (t−s)‖f‖
    cfg.schedule.b = 0.0;
    let linear: Vec<SpectralField> = times.iter().map(|&t| f.scale(Complex64::new(t, 0.0))).collect();
    let fnorm = cfg.dspace_evaluator(0.0, &s.space).unwrap().norm(&f, &s.part, cfg.exponents.kappa).unwrap();
    let expected = fnorm * 1f64.powf(1.0 - cfg.exponents.theta);
    let got = dspace_norm(&linear, &times, &s.part, &s.space, &cfg).unwrap();
    assert!((got - expected).abs() < 1e-12 * expected, "{got} vs {expected}");

    cfg.schedule.b = 1.0;
    let norms: Vec<f64> = [0.0, 0.5, 1.0, 2.0]
        .iter()
        .map(|&t| cfg.dspace_evaluator(t, &s.space).unwrap().norm(&f, &s.part, 0.4).unwrap())
        .collect();
    assert!(norms.windows(2).all(|w| w[1] <= w[0]), "{norms:?}");
}

#[test]
fn zero_noise_gives_the_heat_flow() {
    let s = setup();
    let cfg = config(0.5, 4, 1, ProductMode::Paraproduct);
    let p = path(&cfg, 3, 0.0, 0.0);
    let st = picard_solve(&s.u0, &p, &s.part, &cfg).unwrap();
    assert_eq!(st.iterations(), 1);
    assert!(st.converged);
    let mut worst: f64 = 0.0;
    for (i, &t) in st.times.iter().enumerate() {
        let exact = semigroup_apply(&s.u0, s.part.grid(), t, GeneratorScale::Half).unwrap();
        let got = if i == 0 { s.u0.clone() } else { st.spatial(i, &s.space).unwrap() };
        worst = worst.max(got.sup_relative_error(&exact).unwrap());
    }
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn constant_noise_gives_exponential_factor() {
    let s = setup();
    let cfg = config(1.0, 4, 6, ProductMode::Paraproduct);
    let p = path(&cfg, 11, 0.0, 1.0);
    let st = picard_solve(&s.u0, &p, &s.part, &cfg).unwrap();
    assert!(st.converged);
    let mut worst: f64 = 0.0;
    for k in 1..=cfg.steps {
        let i = k * cfg.stride();
        let heat = semigroup_apply(&s.u0, s.part.grid(), st.times[i], GeneratorScale::Half).unwrap();
        let exact = heat.scale(Complex64::new(p.scalar[i].exp(), 0.0));
        worst = worst.max(st.spatial(i, &s.space).unwrap().sup_relative_error(&exact).unwrap());
    }
    assert!(worst < 1e-3, "{worst}");
    assert!(p.scalar.iter().any(|w| w.abs() > 0.1));
}

#[test]
fn young_sums_with_scalar_noise_are_exact() {
    let s = setup();
    let cfg = config(1.0, 1, 4, ProductMode::Pointwise);
    let p = path(&cfg, 5, 0.0, 1.0);
    let f = forward_transform(&s.u0, s.part.grid()).unwrap();
    let v: Vec<SpectralField> = cfg.times().iter().map(|&t| heat_multiplier(&f, t, cfg.scale)).collect();
    // Σ P_{t−r}(P_r u0 δw) = w_t P_t u0 at every level
    let exact = inverse_transform(&v[16].scale(Complex64::new(p.scalar[16], 0.0)), &s.space).unwrap();
    for level in 0..=4 {
        let got = young_integral(&v, &p, 16, level, &s.part, &s.space, &cfg).unwrap();
        assert!(got.sup_relative_error(&exact).unwrap() < 1e-10);
    }
    assert!(matches!(
        young_integral(&v, &p, 12, 3, &s.part, &s.space, &cfg),
        Err(Error::LevelTooFine { level: 3, max: 2 })
    ));
    let zero = path(&cfg, 5, 0.0, 0.0);
    let got = young_integral(&v, &zero, 16, 2, &s.part, &s.space, &cfg).unwrap();
    assert_eq!(got.sup_norm(), 0.0);
}

#[test]
fn phi_is_affine() {
    let s = setup();
    for mode in [ProductMode::Pointwise, ProductMode::Paraproduct] {
        let cfg = config(0.25, 2, 0, mode);
        let p = path(&cfg, 9, 1.0, 0.5);
        let f = forward_transform(&s.u0, s.part.grid()).unwrap();
        let v1: Vec<SpectralField> = cfg.times().iter().map(|&t| heat_multiplier(&f, t, cfg.scale)).collect();
        let v2: Vec<SpectralField> = cfg.times().iter().map(|&t| heat_multiplier(&f, 2.0 * t, cfg.scale)).collect();
        let diff: Vec<SpectralField> = v1.iter().zip(&v2).map(|(a, b)| a.sub(b).unwrap()).collect();
        let a = phi_map(&v1, 0, &p, &s.part, &s.space, &cfg).unwrap();
        let b = phi_map(&v2, 0, &p, &s.part, &s.space, &cfg).unwrap();
        let c = phi_map(&diff, 0, &p, &s.part, &s.space, &cfg).unwrap();
        for i in 1..a.len() {
            let lhs = a[i].sub(&b[i]).unwrap();
            let err = lhs.sub(&c[i]).unwrap().max_abs();
            assert!(err <= 1e-12 * lhs.max_abs().max(1e-300), "{mode:?} {i}: {err}");
            assert!(lhs.max_abs() > 0.0);
        }
    }
}

#[test]
fn picard_contracts_and_is_deterministic() {
    let s = setup();
    let cfg = config(0.25, 2, 1, ProductMode::Pointwise);
    let p = path(&cfg, 7, 1.0, 0.0);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| picard_solve(&s.u0, &p, &s.part, &cfg).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert!(a.converged && a.iterations() > 1);
    let factor = a.contraction(0).unwrap();
    assert!(factor < 0.5, "{factor}");
    assert!(a.noise_norm.is_finite() && a.tau >= cfg.horizon);
    for (x, y) in a.fields.iter().zip(&b.fields) {
        assert!(x.coeff.iter().zip(&y.coeff).all(|(p, q)| p.re.to_bits() == q.re.to_bits() && p.im.to_bits() == q.im.to_bits()));
    }
}

#[test]
fn sub_horizons_are_patched() {
    let s = setup();
    let mut cfg = config(0.25, 4, 0, ProductMode::Pointwise);
    let p = path(&cfg, 7, 1.0, 0.0);
    cfg.tau.fixed = Some(0.1);
    let st = picard_solve(&s.u0, &p, &s.part, &cfg).unwrap();
    assert_eq!(st.segments, vec![(0, 1), (1, 2), (2, 3), (3, 4)]);
    assert_eq!(st.fields.len(), 5);
    let mut whole = cfg.clone();
    whole.tau.fixed = None;
    let one = picard_solve(&s.u0, &p, &s.part, &whole).unwrap();
    let d = inverse_transform(&st.fields[4].sub(&one.fields[4]).unwrap(), &s.space).unwrap();
    assert!(d.sup_norm() < 1e-6, "{}", d.sup_norm());

    cfg.tau.fixed = Some(0.01);
    assert!(matches!(picard_solve(&s.u0, &p, &s.part, &cfg), Err(Error::HorizonTooShort { .. })));
    let short = config(0.5, 4, 0, ProductMode::Pointwise);
    assert!(matches!(picard_solve(&s.u0, &p, &s.part, &short), Err(Error::GridMismatch(_))));
}

#[test]
fn level_differences_shrink() {
    let s = setup();
    let cfg = config(0.25, 1, 3, ProductMode::Pointwise);
    let p = path(&cfg, 2, 1.0, 0.0);
    let st = picard_solve(&s.u0, &p, &s.part, &cfg).unwrap();
    let rows = level_differences(&st.fields, &p, 8, 3, &s.part, &s.space, &cfg).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.windows(2).all(|w| w[1].mean_scaled < w[0].mean_scaled), "{rows:?}");
    assert!((rows[0].difference - rows[0].max_term).abs() <= 1e-12 * rows[0].difference);
    assert!(level_differences(&st.fields, &p, 8, 4, &s.part, &s.space, &cfg).is_err());
}
