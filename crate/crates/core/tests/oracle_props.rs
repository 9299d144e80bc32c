mod common;

use geoprod::geodesic::{generators_from_velocity, ProductCurve};
use geoprod::oracle::{compare_paths, integrate_horizontal, OdeConfig, OrbitMap};
use nalgebra::DMatrix;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ode_path_agrees_with_closed_form(which in 0usize..7, seed in any::<u64>()) {
        let cm = &common::catalog_metrics()[which];
        prop_assume!(cm.lambdas().iter().all(|l| *l > 0.0));
        let mut rng = common::rng(seed);
        let v = common::unit_m_vector(cm, &mut rng);
        let path = integrate_horizontal(cm, &v, &OdeConfig::new(1e-3, 2.0).with_record_every(50)).unwrap();
        prop_assert!(path.orthogonality_defect() <= 1e-8);
        prop_assert!(path.energy_drift(cm) <= 1e-8);
        let pc = ProductCurve::new(generators_from_velocity(cm, &v).unwrap());
        let om = OrbitMap::from_split(cm.split()).unwrap();
        prop_assert!(compare_paths(&pc, &path, &om).unwrap().max_deviation <= 1e-6);

        // Ad(α)ω_m does not depend on the lift, so it must agree between both.
        let split = cm.split();
        for (k, t) in path.ts.iter().enumerate() {
            let a = path.alphas[k].matrix().inner();
            let w = cm.algebra().combine(&split.from_m_coords(&path.omegas[k]));
            let ode = a * w * a.transpose();
            let s = pc.maurer_cartan(*t).unwrap();
            let g = pc.eval(*t).unwrap();
            let gm = g.matrix().inner();
            let wm = cm.algebra().combine(&split.from_m_coords(&split.to_m_coords(s.omega.coeffs())));
            let cf = gm * wm * gm.transpose();
            prop_assert!((ode - cf).amax() <= 1e-6);
        }
    }

    #[test]
    fn anchored_columns_are_fixed_by_isotropy(which in 0usize..7, seed in any::<u64>()) {
        let cm = &common::catalog_metrics()[which];
        let om = OrbitMap::from_split(cm.split()).unwrap();
        let mut rng = common::rng(seed);
        prop_assert!(om.soundness_violation(cm.split(), &mut rng, 20).unwrap() <= 1e-11);
    }
}

#[test]
fn trivial_metric_ode_is_exact_orbit() {
    let cm = common::metric(4, &[2], &[1.0]);
    let mut rng = common::rng(7);
    let v = common::unit_m_vector(&cm, &mut rng);
    let path = integrate_horizontal(&cm, &v, &OdeConfig::new(1e-3, 2.0).with_record_every(100)).unwrap();
    for w in &path.omegas {
        assert!((w - &path.omegas[0]).amax() == 0.0);
    }
    let pc = ProductCurve::new(generators_from_velocity(&cm, &v).unwrap());
    let om = OrbitMap::from_split(cm.split()).unwrap();
    assert!(compare_paths(&pc, &path, &om).unwrap().max_deviation <= 1e-8);
}

#[test]
fn orbit_map_width() {
    let cm = common::metric(4, &[2, 3], &[1.0, 2.0]);
    let om = OrbitMap::from_split(cm.split()).unwrap();
    assert_eq!(om.width(), 8);
    let g = DMatrix::<f64>::from_fn(4, 4, |r, c| (10 * r + c) as f64);
    assert_eq!(om.project(&g), vec![0.0, 10.0, 20.0, 30.0, 1.0, 11.0, 21.0, 31.0]);
}
