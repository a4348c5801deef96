//! Cross-module checks through the public API.

use posric_core::chartop::{pontryagin, torus_euler_class};
use posric_core::nilalg::{catalog_by_name, catalog_names, check_commutation_condition, validate, NilpotentAlgebra};
use posric_core::oracle::{compare_point, random_point, Chart, ChartModel, EQUIVALENCE_TOL, FD_STEP};
use posric_core::quotient::{base_ricci, certify_positivity, CertMode, Verdict};
use posric_core::totalspace::{find_k0, threshold_k, DiagMode, SubmersionParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn catalog_round_trips_and_validates() {
    for name in catalog_names() {
        let a = catalog_by_name(&name).unwrap();
        assert!(validate(&a).passed, "{name}");
        let back = NilpotentAlgebra::from_json(&&a.to_json()).unwrap();
        assert_eq!(back, a);
    }
}

#[test]
fn threshold_is_positive_and_k0_minus_one_is_not() {
    let a = catalog_by_name("heisenberg3").unwrap();
    assert!(check_commutation_condition(&a).unwrap());
    let k0 = find_k0(&a, DiagMode::Bound).unwrap();
    let k_star = threshold_k(k0, a.dim);
    assert!(k_star >= k0);
    let p = SubmersionParams::new(a.clone(), k_star, 3).unwrap();
    let c = certify_positivity(&p, CertMode::Sturm, DiagMode::Bound).unwrap();
    assert_eq!(c.verdict, Verdict::Positive);
    assert!(c.rigorous);
    let low = SubmersionParams::new(a, 1, 3).unwrap();
    let c = certify_positivity(&low, CertMode::Sturm, DiagMode::Bound).unwrap();
    assert_eq!(c.verdict, Verdict::NotPositive);
    assert!(c.witness_r.is_some());
}

#[test]
fn formula_matches_charts_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (model, k) in [(ChartModel::Abelian(1), 1), (ChartModel::Abelian(1), 2), (ChartModel::Heisenberg3, 1)] {
        let chart = Chart::new(model, k).unwrap();
        for _ in 0..3 {
            let x = random_point(&chart, &mut rng, 0.1, 3.0);
            let cmp = compare_point(&chart, &x, FD_STEP).unwrap();
            assert!(cmp.rel_err < EQUIVALENCE_TOL, "{model:?} k={k}: {}", cmp.rel_err);
        }
    }
}

#[test]
fn base_form_is_symmetric_in_m() {
    let a = catalog_by_name("twisted4").unwrap();
    let p = SubmersionParams::new(a, 2697, 2).unwrap();
    let q = p.with_m(-2);
    for r in [0.0, 0.7, 4.0, 31.0] {
        let x = base_ricci(&p, r, DiagMode::Bound);
        let y = base_ricci(&q, r, DiagMode::Bound);
        assert_eq!(x.diagonal, y.diagonal);
        assert!(x.gershgorin_min > 0.0, "r={r}");
    }
}

#[test]
fn pontryagin_of_torus_bundle_is_nonzero() {
    let e = torus_euler_class();
    let b = pontryagin(&e, 3, 2).unwrap();
    assert!(!b.p1.is_zero());
    assert_eq!(b.p1, e.wedge(&e).scale(&(-12).into()));
}
