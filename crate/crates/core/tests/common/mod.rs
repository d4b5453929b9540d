#![allow(dead_code)]

pub mod exact;

use minvset::{Complex64, ComplexPoly, DiffOperator};
use proptest::prelude::*;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn complex(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| Complex64::new(a, b))
}

/// Exactly solvable operators of order `1..=max_order`: `deg Q_j <= j`,
/// with a leading coefficient bounded away from zero.
pub fn exactly_solvable(max_order: usize) -> impl Strategy<Value = DiffOperator> {
    (1..=max_order).prop_flat_map(|k| {
        let coeffs: Vec<_> = (0..=k)
            .map(|j| prop::collection::vec(complex(2.0), j + 1))
            .collect();
        coeffs.prop_map(move |mut cs| {
            let lead = &mut cs[k][k];
            if lead.norm() < 0.5 {
                *lead += Complex64::new(1.0, 0.0);
            }
            DiffOperator::new(cs.into_iter().map(ComplexPoly::new).collect())
        })
    })
}
