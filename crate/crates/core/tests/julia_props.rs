mod common;

use common::c;
use minvset::correspondence::extract_pinned_rational;
use minvset::dynamics::minimal_invariant_set;
use minvset::geometry::{directed_hausdorff, GridIndex};
use minvset::julia::{julia_backward, quadratic_map, rational_from_operator};
use minvset::{
    ComplexPoly, DiffOperator, IterationConfig, IterationStatus, Mode, RationalMap, SpherePoint,
};

const CELL_DIAGONAL: f64 = std::f64::consts::SQRT_2;

fn dendrite() -> DiffOperator {
    DiffOperator::new(vec![
        ComplexPoly::from_real(&[1.0]),
        ComplexPoly::new(vec![c(0.0, 1.0), c(-1.0, 0.0), c(1.0, 0.0)]),
    ])
}

fn levy() -> DiffOperator {
    DiffOperator::new(vec![
        ComplexPoly::from_real(&[2.0]),
        ComplexPoly::constant(c(0.0, 1.0)),
        ComplexPoly::from_real(&[0.0, 1.0, 1.0]),
    ])
}

/// Largest distance from a preimage or image of a cloud point back to the
/// cloud. Cells hold one representative each, so the cloud resolves J only
/// up to a cell diagonal.
fn invariance_defect(r: &RationalMap, eps: f64) -> (f64, f64) {
    let cfg = IterationConfig {
        eps,
        ..Default::default()
    };
    let run = julia_backward(r, &cfg).unwrap();
    assert!(run.converged);
    let index = GridIndex::new(run.cloud.points());
    let mut back: f64 = 0.0;
    let mut forward: f64 = 0.0;
    for &p in run.cloud.points() {
        for q in r.finite_preimages(p) {
            back = back.max(index.nearest_distance(q));
        }
        if let SpherePoint::Finite(w) = r.eval(p) {
            forward = forward.max(index.nearest_distance(w));
        }
    }
    (back, forward)
}

#[test]
fn dendrite_cloud_is_completely_invariant() {
    let eps = 5e-3;
    let r = rational_from_operator(&dendrite()).unwrap();
    let (back, forward) = invariance_defect(&r, eps);
    assert!(back <= CELL_DIAGONAL * eps, "preimages off by {back:e}");
    assert!(forward <= CELL_DIAGONAL * eps, "images off by {forward:e}");
}

#[test]
fn basilica_cloud_is_completely_invariant() {
    let eps = 5e-3;
    let (back, forward) = invariance_defect(&quadratic_map(c(-1.0, 0.0)), eps);
    assert!(back <= CELL_DIAGONAL * eps, "preimages off by {back:e}");
    assert!(forward <= CELL_DIAGONAL * eps, "images off by {forward:e}");
}

#[test]
fn seeded_runs_repeat() {
    let cfg = IterationConfig {
        eps: 1e-2,
        rng_seed: 5,
        ..Default::default()
    };
    let r = quadratic_map(c(0.0, 1.0));
    let pool = |n| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
    };
    let a = pool(1).install(|| julia_backward(&r, &cfg).unwrap());
    let b = pool(4).install(|| julia_backward(&r, &cfg).unwrap());
    assert_eq!(a, b);
}

#[test]
fn pinned_julia_sets_lie_in_the_full_set() {
    let eps = 1e-2;
    let cfg = IterationConfig {
        eps,
        tau_samples: 512,
        ..Default::default()
    };
    let m = minimal_invariant_set(&levy(), 2, Mode::Full, &cfg).unwrap();
    assert_eq!(m.status, IterationStatus::Converged);
    let pts = m.cloud.points();
    for alpha in [pts[0], pts[pts.len() / 2], pts[pts.len() - 1]] {
        let (u, v) = extract_pinned_rational(&levy(), 2, alpha).unwrap();
        let r = RationalMap::new(v, u).unwrap();
        let j = julia_backward(&r, &cfg).unwrap();
        let d = directed_hausdorff(j.cloud.points(), pts).unwrap();
        assert!(d <= 3.0 * eps, "alpha = {alpha}: {d:e}");
    }
}
