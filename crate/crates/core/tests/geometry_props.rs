mod common;

use common::complex;
use minvset::geometry::{convex_hull, dist_to_polygon, hausdorff};
use minvset::{Complex64, PointCloud};
use proptest::prelude::*;

fn cloud() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(complex(5.0), 1..40)
}

fn brute_hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let directed = |a: &[Complex64], b: &[Complex64]| {
        a.iter()
            .map(|p| {
                b.iter()
                    .map(|q| (p - q).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hausdorff_is_a_metric(a in cloud(), b in cloud(), c in cloud()) {
        let eps = 1e-3;
        let (a, b, c) = (PointCloud::new(a, eps), PointCloud::new(b, eps), PointCloud::new(c, eps));
        let ab = hausdorff(&a, &b).unwrap();
        prop_assert!((ab - hausdorff(&b, &a).unwrap()).abs() <= 1e-12);
        prop_assert!(hausdorff(&a, &a).unwrap() == 0.0);
        let ac = hausdorff(&a, &c).unwrap();
        let cb = hausdorff(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-12);
        prop_assert!((ab - brute_hausdorff(a.points(), b.points())).abs() <= 1e-12);
    }

    #[test]
    fn hull_ignores_order_and_duplicates(pts in cloud(), rot in 0usize..40, dup in 0usize..40) {
        let base = convex_hull(&pts);
        let mut shuffled = pts.clone();
        shuffled.rotate_left(rot % pts.len());
        shuffled.reverse();
        shuffled.push(pts[dup % pts.len()]);
        prop_assert_eq!(convex_hull(&shuffled), base);
    }

    #[test]
    fn hull_contains_its_input(pts in cloud()) {
        let hull = convex_hull(&pts);
        for p in &pts {
            prop_assert!(hull.distance(*p) <= 1e-9);
        }
    }

    #[test]
    fn polygon_distance_vanishes_exactly_on_covering_subsets(
        pts in prop::collection::vec(complex(5.0), 3..20),
        weights in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 3), 1..20),
        outside in 0.1..3.0f64,
    ) {
        let hull = convex_hull(&pts);
        prop_assume!(hull.vertices.len() >= 3);
        let v = &hull.vertices;
        // convex combinations of three vertices stay inside
        let mut inner: Vec<Complex64> = weights
            .iter()
            .map(|w| {
                let s: f64 = w.iter().sum::<f64>().max(1e-9);
                (v[0] * w[0] + v[1] * w[1] + v[2] * w[2]) / s
            })
            .collect();
        inner.extend(v.iter().copied());
        let eps = 1e-9;
        let (sup_out, coverage) = dist_to_polygon(&PointCloud::new(inner.clone(), eps), &hull).unwrap();
        prop_assert!(sup_out <= 1e-9 && coverage <= 1e-8);

        let centroid = v.iter().sum::<Complex64>() / v.len() as f64;
        let dir = (v[0] - centroid) / (v[0] - centroid).norm();
        inner.push(v[0] + dir * outside);
        let (sup_out, _) = dist_to_polygon(&PointCloud::new(inner, eps), &hull).unwrap();
        prop_assert!(sup_out > 0.0);
    }
}
