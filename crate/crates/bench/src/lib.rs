//! Shared fixtures for the criterion benches.

use minvset::{Complex64, ComplexPoly, DiffOperator, IterationConfig, Mode, PointCloud};

/// x(x+1)d^2 + i d + 2, whose degree-2 invariant set is the Lévy curve.
pub fn levy() -> DiffOperator {
    DiffOperator::new(vec![
        ComplexPoly::from_real(&[2.0]),
        ComplexPoly::constant(Complex64::new(0.0, 1.0)),
        ComplexPoly::from_real(&[0.0, 1.0, 1.0]),
    ])
}

/// Converged Lévy cloud at resolution `eps`.
pub fn levy_cloud(eps: f64) -> PointCloud {
    let cfg = IterationConfig {
        eps,
        ..Default::default()
    };
    minvset::dynamics::minimal_invariant_set(&levy(), 2, Mode::Hutchinson, &cfg)
        .expect("valid config")
        .cloud
}

/// Degree-`n` polynomial with roots spread on the unit circle.
pub fn spread_poly(n: usize) -> ComplexPoly {
    let mut p = ComplexPoly::constant(Complex64::new(1.0, 0.0));
    for j in 0..n {
        let angle = 2.0 * std::f64::consts::PI * (j as f64 + 0.3) / n as f64;
        p = &p * &ComplexPoly::linear_root(Complex64::from_polar(1.0 + 0.1 * j as f64, angle));
    }
    p
}
