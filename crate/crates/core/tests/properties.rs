//! Property tests over randomly generated inputs.

use cpflow::ambient::{
    apply_j, curvature, distance, metric, normalize_point, project_to_tangent, retract, sectional_curvature,
    CpPoint, CVec, Tangent, C64,
};
use cpflow::cli::RunConfig;
use cpflow::flow::FlowConfig;
use cpflow::oracles::richardson::{richardson, ObservedOrder};
use cpflow::oracles::sampling::{random_complex_structure, random_orthogonal, random_sff, random_symmetric_tensor};
use cpflow::pinching::{PhiParams, PsiParams};
use cpflow::tensor::{reaction_terms, sff_invariants, skew_normal_form, symmetrization_slack};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> CVec {
    CVec::from_fn(len, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

fn random_point(rng: &mut ChaCha8Rng, m: usize) -> CpPoint {
    normalize_point(random_vec(rng, m + 1)).unwrap()
}

fn random_unit_tangent(rng: &mut ChaCha8Rng, base: &CpPoint) -> Tangent {
    let t = project_to_tangent(base, &random_vec(rng, base.coords().len())).unwrap();
    t.scale(1.0 / t.norm())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phase_of_representative_does_not_matter(seed in any::<u64>(), m in 1usize..5, theta in 0.0..std::f64::consts::TAU) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_vec(&mut rng, m + 1);
        let r = random_point(&mut rng, m);
        let phase = C64::from_polar(1.0, theta);
        let p = normalize_point(v.clone()).unwrap();
        let q = normalize_point(v * phase).unwrap();
        prop_assert!((p.coords() - q.coords()).norm() <= 1e-12);
        prop_assert!((distance(&p, &r).unwrap() - distance(&q, &r).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn distance_is_a_metric(seed in any::<u64>(), m in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (random_point(&mut rng, m), random_point(&mut rng, m), random_point(&mut rng, m));
        let ab = distance(&a, &b).unwrap();
        prop_assert!((ab - distance(&b, &a).unwrap()).abs() <= 1e-14);
        prop_assert!(distance(&a, &a).unwrap() <= 1e-14);
        prop_assert!((0.0..=std::f64::consts::FRAC_PI_2 + 1e-15).contains(&ab));
        prop_assert!(ab <= distance(&a, &c).unwrap() + distance(&c, &b).unwrap() + 1e-12);
    }

    #[test]
    fn geodesics_realize_distance(seed in any::<u64>(), m in 1usize..5, s in 0.0..1.5f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_point(&mut rng, m);
        let v = random_unit_tangent(&mut rng, &p);
        let r = retract(&p, &v, s).unwrap();
        prop_assert!((distance(&p, &r).unwrap() - s).abs() <= 1e-12);
    }

    #[test]
    fn first_bianchi_identity(seed in any::<u64>(), m in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_point(&mut rng, m);
        let [x, y, z, w] = std::array::from_fn(|_| random_unit_tangent(&mut rng, &p));
        let sum = curvature(&x, &y, &z, &w) + curvature(&y, &z, &x, &w) + curvature(&z, &x, &y, &w);
        prop_assert!(sum.abs() <= 1e-13, "cyclic sum {sum:e}");
    }

    #[test]
    fn sectional_curvature_lies_between_one_and_four(seed in any::<u64>(), m in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_point(&mut rng, m);
        let x = random_unit_tangent(&mut rng, &p);
        let y0 = random_unit_tangent(&mut rng, &p);
        let y = y0.add(&x.scale(-metric(&x, &y0)));
        let y = y.scale(1.0 / y.norm());
        let k = sectional_curvature(&x, &y).unwrap();
        let expected = 1.0 + 3.0 * metric(&x, &apply_j(&y)).powi(2);
        prop_assert!((k - expected).abs() <= 1e-12);
        prop_assert!((1.0 - 1e-12..=4.0 + 1e-12).contains(&k));
    }

    #[test]
    fn scalar_outputs_are_frame_covariant(seed in any::<u64>(), dims in prop::sample::select(vec![(3usize, 1usize), (2, 2), (4, 2), (3, 3), (5, 1), (4, 4)]), scale in prop::sample::select(vec![0.1, 1.0, 10.0])) {
        let (n, q) = dims;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = random_complex_structure(&mut rng, n, q);
        let h = random_sff(&mut rng, n, q, scale);
        let o = random_orthogonal(&mut rng, n);
        let r = random_orthogonal(&mut rng, q);
        let h2 = h.rotate_tangent(&o).rotate_normal(&r);
        let j2 = j.rotate_tangent(&o).rotate_normal(&r);
        let a = reaction_terms(&h, &j).unwrap();
        let b = reaction_terms(&h2, &j2).unwrap();
        for (x, y) in [(a.r1, b.r1), (a.r2, b.r2), (a.s1, b.s1), (a.s2, b.s2), (a.r3, b.r3), (a.s3, b.s3)] {
            prop_assert!(rel(x, y) <= 1e-9, "{x} vs {y}");
        }
        let a = sff_invariants(&h, &j).unwrap();
        let b = sff_invariants(&h2, &j2).unwrap();
        for (x, y) in [(a.h2, b.h2), (a.mean2, b.mean2), (a.traceless2, b.traceless2), (a.p2, b.p2)] {
            prop_assert!(rel(x, y) <= 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn traceless_norm_relation(seed in any::<u64>(), n in 2usize..7, q in 1usize..5, scale in 0.1..10.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_sff(&mut rng, n, q, scale);
        let direct = h.traceless().norm2();
        let relation = h.norm2() - h.mean_norm2() / n as f64;
        prop_assert!((direct - relation).abs() <= 1e-10 * (1.0 + h.norm2()));
    }

    #[test]
    fn p_norm_is_bounded_by_codimension_and_dimension(seed in any::<u64>(), dims in prop::sample::select(vec![(3usize, 1usize), (5, 1), (2, 2), (4, 2), (3, 3), (4, 4), (6, 2)])) {
        let (n, q) = dims;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = random_complex_structure(&mut rng, n, q);
        let p2 = j.p_norm2();
        prop_assert!(p2 <= (q.min(n)) as f64 + 1e-12);
        if q == 1 {
            prop_assert!((p2 - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn symmetrization_inequality(seed in any::<u64>(), n in 2usize..7, q in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_symmetric_tensor(&mut rng, n, q, 1.0);
        let mut norm2 = 0.0;
        let mut traces = 0.0;
        for a in 0..q {
            for i in 0..n {
                let mut t = 0.0;
                for k in 0..n {
                    t += s.get(a, i, k, k);
                    for l in 0..n {
                        norm2 += s.get(a, i, k, l).powi(2);
                    }
                }
                traces += t * t;
            }
        }
        let slack = norm2 - 3.0 / (n as f64 + 2.0) * traces;
        prop_assert!(slack >= -1e-12 * (1.0 + norm2));
        prop_assert!((slack - symmetrization_slack(&s)).abs() <= 1e-10 * (1.0 + norm2));
    }

    #[test]
    fn skew_normal_form_reconstructs_the_matrix(seed in any::<u64>(), k in 1usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = DMatrix::<f64>::from_fn(k, k, |_, _| rng.sample(StandardNormal));
        let a = &raw - raw.transpose();
        let form = skew_normal_form(&a).unwrap();
        let c = &form.c;
        prop_assert!((c.transpose() * c - DMatrix::identity(k, k)).amax() <= 1e-10);
        prop_assert!((c.transpose() * &a * c - form.block_matrix(k)).amax() <= 1e-10 * (1.0 + a.amax()));
        prop_assert!(form.lambdas.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(form.lambdas.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn phi_sandwich_and_floor(n in 3usize..40, x in 0.0..1e4f64) {
        let p = PhiParams::new(n, 0.0).unwrap();
        let phi = p.phi(x).unwrap();
        let lin = x / (n as f64 - 1.0);
        if n == 3 {
            prop_assert!((phi - (x / 2.0 + 2.0)).abs() <= 1e-12 * (1.0 + phi));
        } else if n >= 5 {
            prop_assert!(phi > lin + 2.0, "phi {phi} below x/(n-1) + 2");
            prop_assert!(phi < lin + n as f64, "phi {phi} above x/(n-1) + n");
        }
        prop_assert!(phi > (2.0 * (n as f64 - 3.0)).sqrt());
    }

    #[test]
    fn psi_bounds(n in 6usize..40, x in 0.0..1e4f64) {
        let p = PsiParams::new(n).unwrap();
        let psi = p.psi(x).unwrap();
        let nf = n as f64;
        if x == 0.0 {
            prop_assert_eq!(psi, 0.0);
        } else {
            prop_assert!(psi > x / nf && psi < x / (nf - 1.0), "psi({x}) = {psi}");
        }
        let d = x * p.psi_prime(x).unwrap() - psi;
        prop_assert!(d >= -1e-12 * (1.0 + psi) && d < 2.0, "x psi' - psi = {d}");
    }

    #[test]
    fn richardson_recovers_power_law_limits(limit in -10.0..10.0f64, c in prop::sample::select(vec![-3.0, -0.5, 0.5, 3.0]), p in 1.0..4.0f64, s in 0.05..0.5f64) {
        let v = |h: f64| limit + c * h.powf(p);
        let e = richardson(v(s), v(s / 2.0), v(s / 4.0));
        prop_assert!((e.value - limit).abs() <= 1e-9 * (1.0 + limit.abs()));
        match e.order {
            ObservedOrder::Order(o) => prop_assert!((o - p).abs() <= 1e-6),
            other => prop_assert!(false, "order {other:?}"),
        }
    }

    #[test]
    fn run_config_json_round_trip(seed in proptest::option::of(any::<u64>()), threads in 0usize..8, dt_safety in 0.01..1.0f64, max_steps in 1usize..100_000, max_time in proptest::option::of(0.01..10.0f64), monitor_every in 1usize..50) {
        let mut cfg = RunConfig::default();
        cfg.seed = seed;
        cfg.threads = threads;
        cfg.flow.params = FlowConfig { dt_safety, max_steps, max_time, monitor_every, ..FlowConfig::default() };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        cfg.write_json(&path).unwrap();
        let back = RunConfig::load(&path).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
