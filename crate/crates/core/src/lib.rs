//! Invariant sets of linear differential operators with polynomial
//! coefficients acting on polynomials of a fixed degree.

pub mod correspondence;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod julia;
pub mod operator;
pub mod poly;

pub use correspondence::{AffineMap, LinearSplit, OnePoint, OnePointKind, OnePointReport};
pub use dynamics::{
    ConvergenceRow, ExistenceReport, IterationConfig, IterationReport, IterationStatus, Mode,
};
pub use error::{Error, Result};
pub use geometry::{ConvexPolygon, PointCloud};
pub use julia::{CrossValidation, ExceptionalityReport, JuliaRun, RationalMap, SpherePoint};
pub use num_complex::Complex64;
pub use operator::{operator_from_eigenpairs, DiffOperator, OperatorMatrix, SpectrumSlice};
pub use poly::{falling_factorial, poly_roots, BiPoly, ComplexPoly, RootSet};
