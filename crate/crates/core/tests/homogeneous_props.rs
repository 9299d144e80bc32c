mod common;

use geoprod::homogeneous::{check_bracket_condition, check_lem2, check_natural_reductivity};
use geoprod::liealgebra::{bracket, AlgebraVector};
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn catalog_chains_satisfy_all_chain_relations() {
    for cm in common::catalog_metrics() {
        let (defect, sum, dim_m) = cm.decomposition_defect();
        assert!(defect <= 1e-12);
        assert_eq!(sum, dim_m);
        assert!(cm.isotropy_violation() <= 1e-11);
        assert!(check_bracket_condition(&cm).max_violation <= 1e-11);
        assert!(cm.split().isotropy_violation() <= 1e-11);
        assert!(cm.split().ad_h_skew_violation() <= 1e-11);
        assert!(cm.equivariance_violation() <= 1e-11);
        let mut rng = common::rng(42);
        assert!(check_natural_reductivity(cm.split(), &mut rng).max_violation <= 1e-11);
    }
}

#[test]
fn projectors_are_complementary() {
    for cm in common::catalog_metrics() {
        let s = cm.split();
        let d = s.algebra().dim();
        let sum = s.proj_m() + s.proj_h();
        assert!((sum - DMatrix::<f64>::identity(d, d)).amax() <= 1e-12);
        assert!((s.proj_m() * s.proj_m() - s.proj_m()).amax() <= 1e-12);
    }
}

#[test]
fn eigenspace_dimensions_follow_the_chain() {
    assert_eq!(common::metric(4, &[0, 2, 3], &[1.0, 2.0, 3.0]).eigenspace_dims(), vec![3, 2, 1]);
    assert_eq!(common::metric(3, &[0, 2], &[1.0, 2.0]).eigenspace_dims(), vec![2, 1]);
    assert_eq!(common::metric(4, &[2, 3], &[1.0, 2.0]).eigenspace_dims(), vec![3, 2]);
    assert_eq!(common::metric(5, &[2, 4], &[1.0, 2.0]).eigenspace_dims(), vec![4, 5]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn metric_operator_is_symmetric_and_invertible(which in 0usize..7, seed in any::<u64>()) {
        let cm = &common::catalog_metrics()[which];
        let mut rng = common::rng(seed);
        let v = common::unit_m_vector(cm, &mut rng);
        let w = common::unit_m_vector(cm, &mut rng);
        let s = cm.split();
        let av_w = s.base_inner(&cm.apply_a(&v).unwrap(), &w).unwrap();
        let v_aw = s.base_inner(&v, &cm.apply_a(&w).unwrap()).unwrap();
        prop_assert!((av_w - v_aw).abs() <= 1e-12);
        prop_assert!((cm.metric_inner(&v, &w).unwrap() - av_w).abs() <= 1e-12);
        let back = cm.apply_a_inv(&cm.apply_a(&v).unwrap()).unwrap();
        prop_assert!((back.coeffs() - v.coeffs()).amax() <= 1e-12);
    }

    #[test]
    fn eigen_projections_partition_m(which in 0usize..7, seed in any::<u64>()) {
        let cm = &common::catalog_metrics()[which];
        let mut rng = common::rng(seed);
        let v = common::unit_m_vector(cm, &mut rng);
        let mut sum = AlgebraVector::zero(cm.algebra());
        let mut av = AlgebraVector::zero(cm.algebra());
        for i in 0..cm.steps() {
            let p = cm.project_i(i, &v).unwrap();
            let pp = cm.project_i(i, &p).unwrap();
            prop_assert!((pp.coeffs() - p.coeffs()).amax() <= 1e-12);
            sum = sum.add(&p).unwrap();
            av = av.add(&p.scale(cm.lambdas()[i])).unwrap();
        }
        prop_assert!((sum.coeffs() - v.coeffs()).amax() <= 1e-12);
        prop_assert!((cm.apply_a(&v).unwrap().coeffs() - av.coeffs()).amax() <= 1e-12);
    }

    #[test]
    fn lem2_holds(which in 0usize..7, seed in any::<u64>()) {
        let cm = &common::catalog_metrics()[which];
        let mut rng = common::rng(seed);
        let x = common::random_vector(cm.algebra(), &mut rng);
        let w = common::random_vector(cm.algebra(), &mut rng);
        prop_assert!(check_lem2(cm, &x, &w).unwrap() <= 1e-11);
    }

    #[test]
    fn ad_h_is_skew_on_m(which in 0usize..7, seed in any::<u64>()) {
        let cm = &common::catalog_metrics()[which];
        let s = cm.split();
        let mut rng = common::rng(seed);
        let hb = s.h_basis();
        if hb.ncols() > 0 {
            let c = nalgebra::DVector::from_fn(hb.ncols(), |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
            let a = AlgebraVector::new(s.algebra(), &hb * c).unwrap();
            let x = common::unit_m_vector(cm, &mut rng);
            let y = common::unit_m_vector(cm, &mut rng);
            let ax = bracket(&a, &x).unwrap();
            let ay = bracket(&a, &y).unwrap();
            let lhs = s.base_inner(&ax, &y).unwrap() + s.base_inner(&x, &ay).unwrap();
            prop_assert!(lhs.abs() <= 1e-11);
        }
    }
}
