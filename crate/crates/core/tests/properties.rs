use std::f64::consts::TAU;

use proptest::prelude::*;
use stable_abc::linalg::Matrix as Mat;
use stable_abc::rng::stream;
use stable_abc::smc::{ess, kernel_weight, normalize_log_weights, KdeMutation, MixtureKernel, Mutation};
use stable_abc::stable_model::{
    canonicalize_theta, cartesian_to_spherical, char_fn_multivariate, char_fn_univariate, sample_multivariate, sample_univariate,
    satisfies_ordering, spherical_to_cartesian,
};
use stable_abc::summaries::{
    ks_statistic, mcculloch_quantile, s1_mcculloch, s3_press, s6_projected, SummaryFamily, SummaryStatus, SummaryVector,
};
use stable_abc::{Bandwidth, BaseFamily, ParamLayout, Particle, Population, ProjectionSet, SpectralStableModel, StableParams};

fn data(min: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, min..60)
}

fn stable_params() -> impl Strategy<Value = StableParams> {
    (0.2f64..2.0, -1.0f64..1.0, 0.01f64..50.0, -50.0f64..50.0).prop_map(|(a, b, g, d)| StableParams::new(a, b, g, d).unwrap())
}

fn spectral_model(dim: usize) -> impl Strategy<Value = SpectralStableModel> {
    (1usize..4).prop_flat_map(move |k| {
        (
            0.2f64..2.0,
            prop::collection::vec(0.01f64..1.0, k),
            prop::collection::vec(prop::collection::vec(0.0f64..TAU, dim - 1), k),
            prop::collection::vec(-5.0f64..5.0, dim),
        )
            .prop_map(|(a, w, ang, mu)| {
                let s: f64 = w.iter().sum();
                SpectralStableModel::new(a, w.iter().map(|x| x / s).collect(), ang, mu).unwrap()
            })
    })
}

fn unit_vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, dim)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / n).collect()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cf_is_bounded_and_hermitian(p in stable_params(), t in -20.0f64..20.0) {
        let c = char_fn_univariate(&p, t);
        prop_assert!(c.norm() <= 1.0 + 1e-12);
        prop_assert_eq!(char_fn_univariate(&p, 0.0).re, 1.0);
        let sym = StableParams::new(p.alpha, 0.0, p.gamma, 0.0).unwrap();
        let (a, b) = (char_fn_univariate(&sym, t), char_fn_univariate(&sym, -t));
        prop_assert!((a - b.conj()).norm() < 1e-12);
    }

    #[test]
    fn multivariate_cf_is_bounded(m in spectral_model(3), t in prop::collection::vec(-5.0f64..5.0, 3)) {
        prop_assert!(char_fn_multivariate(&m, &t).unwrap().norm() <= 1.0 + 1e-12);
        let z = char_fn_multivariate(&m, &[0.0; 3]).unwrap();
        prop_assert_eq!((z.re, z.im), (1.0, 0.0));
    }

    #[test]
    fn sphere_round_trip(s in (2usize..5).prop_flat_map(unit_vector)) {
        let back = spherical_to_cartesian(&cartesian_to_spherical(&s).unwrap());
        for (a, b) in s.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!(cartesian_to_spherical(&s).unwrap().iter().all(|&a| (0.0..TAU).contains(&a)));
    }

    #[test]
    fn quantile_monotone_in_p(x in data(2), p in 0.001f64..0.999, q in 0.001f64..0.999) {
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        prop_assert!(mcculloch_quantile(&x, lo).unwrap() <= mcculloch_quantile(&x, hi).unwrap());
    }

    #[test]
    fn quantile_monotone_in_data(x in data(2), bump in prop::collection::vec(0.0f64..10.0, 60), p in 0.001f64..0.999) {
        let y: Vec<f64> = x.iter().zip(&bump).map(|(a, b)| a + b).collect();
        prop_assert!(mcculloch_quantile(&x, p).unwrap() <= mcculloch_quantile(&y, p).unwrap() + 1e-9);
    }

    #[test]
    fn ks_bounds_and_symmetry(x in data(1), y in data(1)) {
        let k = ks_statistic(&x, &y);
        prop_assert!((0.0..=1.0).contains(&k));
        prop_assert_eq!(k, ks_statistic(&y, &x));
        prop_assert_eq!(ks_statistic(&x, &x), 0.0);
        let mut rev = x.clone();
        rev.reverse();
        prop_assert_eq!(ks_statistic(&x, &rev), 0.0);
        let mut shifted = x.clone();
        shifted[0] += 1e4;
        prop_assert!(ks_statistic(&x, &shifted) > 0.0);
    }

    #[test]
    fn s1_affine_equivariance(x in data(5), a in 0.01f64..100.0, b in -100.0f64..100.0) {
        let s = s1_mcculloch(&x);
        prop_assume!(s.status == SummaryStatus::Ok);
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let t = s1_mcculloch(&y);
        let close = |u: f64, v: f64| (u - v).abs() <= 1e-7 * (1.0 + u.abs().max(v.abs()));
        prop_assert!(close(s.values[0], t.values[0]));
        prop_assert!(close(s.values[1], t.values[1]));
        prop_assert!(close(a * s.values[2], t.values[2]));
        prop_assert!(close(a * s.values[3] + b, t.values[3]));
    }

    #[test]
    fn s3_alpha_gamma_location_invariant(seed in any::<u64>(), shift in -3.0f64..3.0) {
        let p = StableParams::new(1.5, 0.3, 1.0, 0.0).unwrap();
        let x = sample_univariate(&p, 400, seed).unwrap();
        let y: Vec<f64> = x.iter().map(|v| v + shift).collect();
        let t = [0.2, 0.8, 0.1, 0.4];
        let (a, b) = (s3_press(&x, t), s3_press(&y, t));
        prop_assume!(!a.is_degenerate());
        prop_assert!((a.values[0] - b.values[0]).abs() < 1e-9);
        prop_assert!((a.values[2] - b.values[2]).abs() < 1e-9 * a.values[2].abs().max(1.0));
    }

    #[test]
    fn s6_shift_touches_only_means(seed in any::<u64>(), c in prop::collection::vec(-10.0f64..10.0, 2)) {
        let m = SpectralStableModel::new(1.7, vec![0.6, 0.4], vec![vec![0.7], vec![3.1]], vec![0.0, 0.0]).unwrap();
        let x = sample_multivariate(&m, 100, seed).unwrap();
        let shifted = Mat::from_rows(&x.iter_rows().map(|r| vec![r[0] + c[0], r[1] + c[1]]).collect::<Vec<_>>()).unwrap();
        let proj = ProjectionSet::generate(2, 5, 3).unwrap();
        let a = s6_projected(&x, &proj, BaseFamily::S1).unwrap();
        let b = s6_projected(&shifted, &proj, BaseFamily::S1).unwrap();
        prop_assert_eq!(a.len(), 2 + 5 * 3);
        for j in 0..2 {
            prop_assert!((b.values[j] - a.values[j] - c[j]).abs() < 1e-9);
        }
        for j in 2..a.len() {
            prop_assert!((a.values[j] - b.values[j]).abs() < 1e-6 * (1.0 + a.values[j].abs()));
        }
        prop_assert_eq!(s6_projected(&x, &proj, BaseFamily::S1).unwrap(), a);
    }

    #[test]
    fn samplers_are_deterministic(p in stable_params(), seed in any::<u64>()) {
        prop_assert_eq!(sample_univariate(&p, 5, seed).unwrap(), sample_univariate(&p, 5, seed).unwrap());
    }

    #[test]
    fn projections_are_unit_and_reproducible(d in 2usize..6, tau in 1usize..30, seed in any::<u64>()) {
        let a = ProjectionSet::generate(d, tau, seed).unwrap();
        prop_assert_eq!(a.clone(), ProjectionSet::generate(d, tau, seed).unwrap());
        for v in a.vectors() {
            prop_assert!((v.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn normalized_weights_and_ess(logs in prop::collection::vec(-700.0f64..700.0, 1..200)) {
        let w = normalize_log_weights(&logs).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let e = ess(&w);
        prop_assert!(e >= 1.0 - 1e-9 && e <= logs.len() as f64 + 1e-9);
    }

    #[test]
    fn kernel_symmetric_and_decreasing_along_rays(
        d in prop::collection::vec(-3.0f64..3.0, 3),
        s1 in 0.0f64..2.0,
        s2 in 0.0f64..2.0,
        eps in 0.1f64..10.0,
    ) {
        let sigma = Mat::from_rows(&[vec![2.0, 0.3, 0.0], vec![0.3, 1.0, 0.1], vec![0.0, 0.1, 0.5]]).unwrap();
        let o = SummaryVector::new(SummaryFamily::S1, vec![0.0; 3], SummaryStatus::Ok);
        let at = |s: f64| SummaryVector::new(SummaryFamily::S1, d.iter().map(|x| x * s).collect(), SummaryStatus::Ok);
        let (near, far) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let kn = kernel_weight(&o, &at(near), eps, &sigma).unwrap();
        let kf = kernel_weight(&o, &at(far), eps, &sigma).unwrap();
        prop_assert!(kn >= kf);
        prop_assert_eq!(kn, kernel_weight(&at(near), &o, eps, &sigma).unwrap());
    }

    #[test]
    fn canonicalization_orders_masses(
        w in prop::collection::vec(0.01f64..1.0, 3),
        ang in prop::collection::vec(-10.0f64..10.0, 6),
    ) {
        let s: f64 = w.iter().sum();
        let mut theta: Vec<f64> = w.iter().map(|x| x / s).collect();
        theta.extend(ang);
        theta.extend([0.0, 0.0, 0.0, 1.5]);
        let before: f64 = theta[..3].iter().sum();
        canonicalize_theta(3, 3, &mut theta);
        prop_assert!(satisfies_ordering(3, 3, &theta));
        prop_assert!((theta[..3].iter().sum::<f64>() - before).abs() < 1e-12);
        prop_assert!(theta[3..9].iter().all(|&a| (0.0..TAU).contains(&a)));
    }

    #[test]
    fn kde_proposals_keep_simplex_and_ordering(seed in any::<u64>(), scaled in any::<bool>()) {
        let layout = ParamLayout::Spectral { dim: 2, masses: 3 };
        let mut rng = stream(seed, &[1]);
        let prior = stable_abc::PriorSpec::default();
        let particles: Vec<Particle> = (0..20)
            .map(|_| Particle { theta: prior.sample(layout_kind(), &mut rng), weight: 1.0 / 20.0, summary: None })
            .collect();
        let pop = Population { particles, epsilon: 1.0, stage: 1, ess: 20.0 };
        let bw = if scaled { Bandwidth::PopulationScaled { scale: 2.0, floor: 1e-8 } } else { Bandwidth::Fixed(vec![1.0, 1.0, 1.0, 1.0, 1.0, 0.25]) };
        let mix = KdeMutation::new(layout, bw, 100.0).unwrap().mixture(&pop).unwrap();
        for _ in 0..50 {
            let t = mix.propose(&mut rng);
            prop_assert!(t[..3].iter().all(|&w| w >= 0.0));
            prop_assert!((t[..3].iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(satisfies_ordering(2, 3, &t));
            prop_assert!(mix.log_density(&t).is_finite());
        }
    }
}

fn layout_kind() -> stable_abc::ModelKind {
    stable_abc::ModelKind::Multivariate { dim: 2, masses: 3 }
}

#[test]
fn projection_angles_are_uniform() {
    let set = ProjectionSet::generate(2, 10_000, 42).unwrap();
    let mut bins = [0usize; 20];
    for v in set.vectors() {
        let a = v[1].atan2(v[0]).rem_euclid(TAU);
        bins[((a / TAU * 20.0) as usize).min(19)] += 1;
    }
    let expected = 10_000.0 / 20.0;
    let chi2: f64 = bins.iter().map(|&b| (b as f64 - expected).powi(2) / expected).sum();
    // upper 0.001 point of chi-square with 19 degrees of freedom
    assert!(chi2 < 43.82, "chi2 {chi2}");
}

#[test]
fn sphere_round_trip_bulk() {
    for d in 2..=4 {
        let set = ProjectionSet::generate(d, 1000, d as u64).unwrap();
        for s in set.vectors() {
            let back = spherical_to_cartesian(&cartesian_to_spherical(s).unwrap());
            assert!(s.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-12));
        }
    }
}
