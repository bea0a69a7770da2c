//! Structural invariants checked on generated inputs.

use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use zonal_bm::bodies::random_polytope;
use zonal_bm::inequalities::{margin, run_suite, ConvexPair, Family, Sense, SuiteConfig};
use zonal_bm::measures::surface_area_measure;
use zonal_bm::minkowski_solver::{blaschke_sum, solve_minkowski, MinkowskiProblem};
use zonal_bm::operators::apply_bm;
use zonal_bm::volumes::{mixed_volume, quermassintegral};
use zonal_bm::{build_grid, BMHomomorphism, SphericalGrid};

fn grid() -> &'static Arc<SphericalGrid> {
    static GRID: OnceLock<Arc<SphericalGrid>> = OnceLock::new();
    GRID.get_or_init(|| Arc::new(build_grid(3, 12).unwrap()))
}

fn polytope() -> impl Strategy<Value = zonal_bm::Polytope> {
    (any::<u64>(), 6usize..=14).prop_map(|(seed, k)| random_polytope(seed, k).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn margins_are_scale_free(lhs in 1e-3f64..1e3, rhs in 1e-3f64..1e3, s in 1e-3f64..1e3) {
        for sense in [Sense::AtLeast, Sense::AtMost, Sense::Equal] {
            prop_assert!((margin(lhs, rhs, sense) - margin(s * lhs, s * rhs, sense)).abs() <= 1e-12);
        }
        prop_assert!(margin(lhs, rhs, Sense::AtLeast) == -margin(lhs, rhs, Sense::AtMost));
        prop_assert!(margin(lhs, rhs, Sense::Equal) <= 0.0);
    }

    #[test]
    fn inequality_margins_are_invariant_under_dilation(k in polytope(), l in polytope(), lambda in 0.3f64..3.0) {
        let phi = BMHomomorphism::projection();
        let a = ConvexPair::new(&phi, &k, &l, grid());
        let (ks, ls) = (k.dilate(lambda).unwrap(), l.dilate(lambda).unwrap());
        let b = ConvexPair::new(&phi, &ks, &ls, grid());
        for f in [Family::MinkowskiType, Family::BrunnMinkowskiType, Family::PolarMinkowski] {
            for (x, y) in a.family(f).unwrap().iter().zip(b.family(f).unwrap()) {
                prop_assert!((x.margin - y.margin).abs() <= 1e-8, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn images_are_steiner_centered_and_translation_invariant(k in polytope(), t in prop::array::uniform3(-0.5f64..0.5)) {
        for phi in [BMHomomorphism::projection(), BMHomomorphism::theta()] {
            let a = apply_bm(&phi, &k, grid()).unwrap();
            let b = apply_bm(&phi, &k.translate(t).unwrap(), grid()).unwrap();
            let scale = a.samples().iter().fold(0.0f64, |m, x| m.max(*x));
            let p = a.steiner_point();
            prop_assert!((p[0].abs() + p[1].abs() + p[2].abs()) <= 1e-8 * scale);
            for (x, y) in a.samples().iter().zip(b.samples()) {
                prop_assert!((x - y).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn solver_recovers_translates(k in polytope()) {
        let q = solve_minkowski(&MinkowskiProblem::new(surface_area_measure(&k))).unwrap();
        let target = k.steiner_centered().unwrap();
        for u in grid().nodes3().step_by(7) {
            prop_assert!((q.support(u) - target.support(u)).abs() <= 1e-6);
        }
    }

    #[test]
    fn blaschke_sum_adds_surface_area(k in polytope(), l in polytope()) {
        let s = blaschke_sum(&k, &l, 1.0, 1.0).unwrap();
        let area = |p: &zonal_bm::Polytope| 3.0 * quermassintegral(p, 1).unwrap();
        prop_assert!((area(&s) - area(&k) - area(&l)).abs() <= 1e-6 * area(&s));
    }

    #[test]
    fn mixed_volumes_are_symmetric_and_monotone(k in polytope(), l in polytope()) {
        let kl = mixed_volume(&k, &k, &l).unwrap();
        prop_assert!(kl > 0.0);
        let big = l.dilate(1.5).unwrap();
        prop_assert!(mixed_volume(&k, &k, &big).unwrap() >= kl);
        prop_assert!((mixed_volume(&k, &k, &k).unwrap() - k.volume()).abs() <= 1e-10 * k.volume());
    }
}

#[test]
fn reports_do_not_depend_on_the_thread_count_or_trial_split() {
    let base = SuiteConfig {
        trials: 4,
        grid_resolution: 12,
        families: vec![Family::MinkowskiType, Family::DualBrunnMinkowski, Family::ClassicalMinkowski],
        ..SuiteConfig::default()
    };
    let one = run_suite(&SuiteConfig { threads: Some(1), ..base.clone() }).unwrap();
    let two = run_suite(&SuiteConfig { threads: Some(2), ..base.clone() }).unwrap();
    assert_eq!(one.report.to_json().unwrap(), two.report.to_json().unwrap());
    assert_eq!(one.to_csv().unwrap(), two.to_csv().unwrap());

    // trial 3 alone sees the same inputs as trial 3 of the full run
    let tail = run_suite(&SuiteConfig { trials: 1, first_trial: 3, ..base }).unwrap();
    let pick = |rows: &str| rows.lines().filter(|r| r.split(',').nth(2) == Some("3")).map(String::from).collect::<Vec<_>>();
    assert_eq!(pick(&one.to_csv().unwrap()), pick(&tail.to_csv().unwrap()));
    assert!(!pick(&tail.to_csv().unwrap()).is_empty());
}
