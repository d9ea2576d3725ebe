use caccioppoli::functional::{builtin, integrate_facets, BUILTIN_NAMES};
use caccioppoli::labels::embed_field;
use caccioppoli::lifting::{fiber_identity_check, lifting_abs_integrate};
use caccioppoli::partition::io::PartitionFile;
use caccioppoli::random::{random_partition, relabelled, RandomSpec};
use caccioppoli::{
    evaluate_functional, CutoffProfile, FDelta, LabelSet, LiftingMeasure, Partition, QuadratureSpec, SurfaceIntegrand,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn field(seed: u64, dim: usize) -> (LabelSet, Partition) {
    random_partition(seed, &RandomSpec { dim, ..RandomSpec::default() })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_identities(seed in any::<u64>(), dim in 1usize..=2) {
        let (z, u) = field(seed, dim);
        prop_assert!(close(u.perimeter().unwrap(), u.perimeter_half_sum(&z).unwrap(), 1e-12));
        prop_assert!(close(u.total_variation(&z).unwrap(), u.total_variation_pairwise(&z).unwrap(), 1e-12));
    }

    #[test]
    fn total_variation_between_separation_and_diameter(seed in any::<u64>()) {
        let (z, u) = field(seed, 2);
        let (per, tv) = (u.perimeter().unwrap(), u.total_variation(&z).unwrap());
        prop_assert!(tv >= z.min_separation() * per * (1.0 - 1e-12));
        prop_assert!(tv <= z.diameter() * per * (1.0 + 1e-12));
    }

    #[test]
    fn embedded_mass(seed in any::<u64>(), dim in 1usize..=2) {
        let (z, u) = field(seed, dim);
        let (tz, tu) = embed_field(&z, &u).unwrap();
        let per = u.perimeter().unwrap();
        prop_assert!(close(tu.total_variation(&tz).unwrap(), 2f64.sqrt() * per, 1e-12));
        let lift = LiftingMeasure::of_embedded(&u, &z).unwrap();
        let one = |_: &[f64], _: &[f64]| 1.0;
        let mass = lifting_abs_integrate(&lift, &one, &QuadratureSpec::default()).unwrap();
        prop_assert!(close(mass, tu.total_variation(&tz).unwrap(), 1e-12));
    }

    #[test]
    fn l1_is_a_metric(seed in any::<u64>(), s1 in any::<u64>(), s2 in any::<u64>(), dim in 1usize..=2) {
        let (z, u) = field(seed, dim);
        let v = relabelled(&u, z.len(), s1);
        let w = relabelled(&u, z.len(), s2).refined();
        let d = |a: &Partition, b: &Partition| a.l1_distance(b, &z).unwrap();
        prop_assert!(d(&u, &u).abs() < 1e-12);
        prop_assert!(close(d(&u, &v), d(&v, &u), 1e-12));
        prop_assert!(d(&u, &w) <= d(&u, &v) + d(&v, &w) + 1e-12);
        prop_assert!(d(&u, &v) >= 0.0);
    }

    #[test]
    fn refinement_changes_nothing(seed in any::<u64>(), dim in 1usize..=2) {
        let (z, u) = field(seed, dim);
        let r = u.refined();
        prop_assert!(r.validate(z.len()).is_ok());
        prop_assert!(close(u.perimeter().unwrap(), r.perimeter().unwrap(), 1e-12));
        prop_assert!(close(u.total_variation(&z).unwrap(), r.total_variation(&z).unwrap(), 1e-12));
        prop_assert!(u.l1_distance(&r, &z).unwrap() < 1e-12);
        let region = u.bounding_box();
        let g = builtin("smooth-x", &z, &region).unwrap();
        let quad = QuadratureSpec::default();
        prop_assert!(close(evaluate_functional(&u, &z, &g, &quad).unwrap(), evaluate_functional(&r, &z, &g, &quad).unwrap(), 1e-12));
    }

    #[test]
    fn facet_orientation_is_irrelevant(seed in any::<u64>(), dim in 1usize..=2) {
        let (z, u) = field(seed, dim);
        let region = u.bounding_box();
        let rule = QuadratureSpec::default().rule().unwrap();
        let facets = u.jump_set().unwrap();
        let flipped: Vec<_> = facets.iter().map(|f| f.flipped()).collect();
        for name in BUILTIN_NAMES {
            let g = builtin(name, &z, &region).unwrap();
            let a = integrate_facets(&facets, &z, &g, &rule).unwrap();
            let b = integrate_facets(&flipped, &z, &g, &rule).unwrap();
            prop_assert!(close(a, b, 1e-12), "{name}: {a} vs {b}");
        }
    }

    #[test]
    fn energy_is_linear_in_the_integrand(seed in any::<u64>(), alpha in 0.0f64..3.0, beta in 0.0f64..3.0) {
        let (z, u) = field(seed, 2);
        let region = u.bounding_box();
        let quad = QuadratureSpec::default();
        let g1 = builtin("aniso-x", &z, &region).unwrap();
        let g2 = builtin("smooth-x", &z, &region).unwrap();
        let g = SurfaceIntegrand::linear_combination(alpha, &g1, beta, &g2).unwrap();
        let f = |g: &SurfaceIntegrand| evaluate_functional(&u, &z, g, &quad).unwrap();
        prop_assert!(close(f(&g), alpha * f(&g1) + beta * f(&g2), 1e-12));
    }

    #[test]
    fn cutoff_energy_decreases_with_delta(seed in any::<u64>()) {
        let (z, u) = field(seed, 2);
        let quad = QuadratureSpec::default();
        let g = builtin("one", &z, &u.bounding_box()).unwrap();
        let energy = evaluate_functional(&u, &z, &g, &quad).unwrap();
        let lift = LiftingMeasure::of_embedded(&u, &z).unwrap();
        let mut prev = f64::INFINITY;
        for delta in [CutoffProfile::MAX_DELTA, 0.1, 0.05, 0.01, 1e-4] {
            let f = FDelta::new(CutoffProfile::new(delta).unwrap(), g.clone(), z.clone());
            let (lhs, _) = fiber_identity_check(&lift, &f, &quad).unwrap();
            prop_assert!(lhs >= energy - 1e-12 && lhs <= prev + 1e-12);
            prev = lhs;
        }
    }

    #[test]
    fn cutoff_integrand_is_bounded(seed in any::<u64>(), delta in 1e-3f64..0.17, raw in proptest::collection::vec(-1.0f64..1.0, 12)) {
        let mut labels = random_partition(seed, &RandomSpec::default()).0;
        if labels.len() > 3 {
            labels = LabelSet::new(labels.labels()[..3].to_vec()).unwrap();
        }
        let q = labels.len();
        let g = SurfaceIntegrand::jump(&labels);
        let f = FDelta::new(CutoffProfile::new(delta).unwrap(), g.clone(), labels.clone());
        let mut xi = DMatrix::from_fn(q, 2, |r, c| raw[2 * r + c]);
        let n = xi.norm();
        prop_assume!(n > 1e-6);
        xi /= n;
        let y: Vec<f64> = raw[6..6 + q].iter().map(|v| (v + 1.0) / 2.0).collect();
        let value = f.eval(&[0.0, 0.0], &y, &xi).unwrap();
        prop_assert!(value >= 0.0 && value <= 2f64.sqrt() * g.declared_bound() * (1.0 + 1e-12));
    }

    #[test]
    fn file_round_trip(seed in any::<u64>(), dim in 1usize..=2) {
        let (z, u) = field(seed, dim);
        let text = PartitionFile::from_parts(&z, &u).to_json();
        let (z2, u2) = PartitionFile::parse(&text).unwrap().into_parts().unwrap();
        prop_assert_eq!(z, z2);
        prop_assert_eq!(u, u2);
    }
}
