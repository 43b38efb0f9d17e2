//! Independent routes to the same numbers.

use ellmeasure_core::bounds::parallel_volume;
use ellmeasure_core::geometry::Cuboid;
use ellmeasure_core::measures::steiner_fit;
use ellmeasure_core::rng::{random_rotation, stream};
use ellmeasure_core::*;
use ellmeasure_oracles as oracle;
use proptest::prelude::*;

#[test]
fn steiner_fit_on_a_box() {
    let b = Cuboid::centered(vec![2.0, 1.0, 0.5]).unwrap();
    let exact = box_mean_curvatures(&b);
    let fit = steiner_fit(&b, 800_000, 11, None).unwrap();
    let se = fit.mean_curvatures.error_estimate.as_ref().unwrap();
    for i in 0..3 {
        let z = (fit.mean_curvatures.values[i] - exact.values[i]) / se[i];
        assert!(
            z.abs() < 4.0,
            "M_{i}: {} vs {} (z = {z})",
            fit.mean_curvatures.values[i],
            exact.values[i]
        );
    }
    assert!((fit.volume - 1.0).abs() < 4.0 * fit.volume_error);
}

#[test]
fn steiner_fit_on_a_rotated_ellipse() {
    let e = Ellipsoid::axis_aligned(vec![2.0, 1.0]).unwrap();
    let e = e
        .rotated(&random_rotation(2, &mut stream(4, 0)))
        .unwrap()
        .translated(&[0.3, -1.2])
        .unwrap();
    let exact = ellipsoid_mean_curvatures_quadrature(&e, 1e-10).unwrap();
    let fit = steiner_fit(&e, 400_000, 2, None).unwrap();
    let se = fit.mean_curvatures.error_estimate.as_ref().unwrap();
    let z = (fit.mean_curvatures.values[0] - oracle::ellipse_perimeter(2.0, 1.0)) / se[0];
    assert!(z.abs() < 4.0, "z = {z}");
    assert!((exact.values[0] / oracle::ellipse_perimeter(2.0, 1.0) - 1.0).abs() < 1e-10);
}

#[test]
fn parallel_area_against_hit_or_miss() {
    let e = Ellipsoid::axis_aligned(vec![2.0, 1.0]).unwrap();
    let m = ellipsoid_mean_curvatures_quadrature(&e, 1e-10).unwrap();
    let rho = 0.7;
    let (area, se) = oracle::ellipse_parallel_area_mc(2.0, 1.0, rho, 400_000, 5);
    let v = parallel_volume(e.volume(), &m, rho).unwrap();
    assert!((v - area).abs() < 4.0 * se, "{v} vs {area} ± {se}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parallel_box_volume_matches_decomposition(l in prop::collection::vec(0.1f64..5.0, 3), rho in 0.0f64..3.0) {
        let b = Cuboid::centered(l.clone()).unwrap();
        let v = parallel_volume(b.volume(), &box_mean_curvatures(&b), rho).unwrap();
        let exact = oracle::rounded_box_volume_3d([l[0], l[1], l[2]], rho);
        prop_assert!((v - exact).abs() <= 1e-12 * exact);
    }

    #[test]
    fn lattice_count_matches_brute_force(
        axes in prop::collection::vec(0.3f64..4.0, 3),
        center in prop::collection::vec(-1.0f64..1.0, 3),
        seed in 0u64..1000,
    ) {
        let q = random_rotation(3, &mut stream(seed, 0));
        let e = Ellipsoid::new(center.clone(), q, axes).unwrap();
        let f = e.frame();
        let row_major: Vec<f64> = (0..3).flat_map(|r| (0..3).map(move |c| (r, c))).map(|(r, c)| f[(r, c)]).collect();
        prop_assert_eq!(lattice_count(&e).unwrap(), oracle::brute_lattice_count(&center, &row_major, e.semi_axes()));
    }
}
