use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{binomial_f64, ComplexPoly, ONE, TRIM_REL, ZERO};

/// Bivariate polynomial `sum c[i][j] x^i z^j`.
///
/// Rows index powers of `x`, columns powers of `z`. Trailing rows and
/// columns whose entries are all below [`TRIM_REL`] times the largest entry
/// are removed; the zero polynomial is the empty matrix.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BiPoly {
    coeffs: Vec<Vec<Complex64>>,
}

impl BiPoly {
    pub fn new(rows: Vec<Vec<Complex64>>) -> Self {
        let width = rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut coeffs: Vec<Vec<Complex64>> = rows
            .into_iter()
            .map(|mut r| {
                r.resize(width, ZERO);
                r
            })
            .collect();
        let max = coeffs
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        let cut = TRIM_REL * max;
        while coeffs
            .last()
            .is_some_and(|r| r.iter().all(|c| c.norm() <= cut))
        {
            coeffs.pop();
        }
        let mut width = coeffs.first().map_or(0, Vec::len);
        while width > 0 && coeffs.iter().all(|r| r[width - 1].norm() <= cut) {
            width -= 1;
        }
        for r in &mut coeffs {
            r.truncate(width);
        }
        if width == 0 {
            coeffs.clear();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![vec![c]])
    }

    /// Embeds a univariate polynomial in `x`.
    pub fn from_poly_x(p: &ComplexPoly) -> Self {
        Self::new(p.coeffs().iter().map(|&c| vec![c]).collect())
    }

    /// Embeds a univariate polynomial in `z`.
    pub fn from_poly_z(p: &ComplexPoly) -> Self {
        Self::new(vec![p.coeffs().to_vec()])
    }

    /// `(x - z)^n` by the binomial theorem.
    pub fn diagonal_power(n: usize) -> Self {
        let mut rows = vec![vec![ZERO; n + 1]; n + 1];
        for i in 0..=n {
            let j = n - i;
            let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
            rows[i][j] = Complex64::new(sign * binomial_f64(n, i), 0.0);
        }
        Self::new(rows)
    }

    /// `x - (a z + b)`.
    pub fn affine_branch(a: Complex64, b: Complex64) -> Self {
        Self::new(vec![vec![-b, -a], vec![ONE, ZERO]])
    }

    pub fn coeffs(&self) -> &[Vec<Complex64>] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize) -> Complex64 {
        self.coeffs
            .get(i)
            .and_then(|r| r.get(j))
            .copied()
            .unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Degree in `x` (`None` for zero).
    pub fn deg_x(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree in `z` (`None` for zero).
    pub fn deg_z(&self) -> Option<usize> {
        self.coeffs.first().and_then(|r| r.len().checked_sub(1))
    }

    /// `max { i + j : c[i][j] != 0 }`, treating entries under the trim
    /// threshold as zero.
    pub fn total_degree(&self) -> Option<usize> {
        let cut = TRIM_REL * self.max_abs_coeff();
        let mut best = None;
        for (i, r) in self.coeffs.iter().enumerate() {
            for (j, c) in r.iter().enumerate() {
                if c.norm() > cut {
                    best = Some(best.map_or(i + j, |b: usize| b.max(i + j)));
                }
            }
        }
        best
    }

    /// True when no entry depends on `x` or `z`.
    pub fn is_constant(&self) -> bool {
        self.total_degree().is_none_or(|d| d == 0)
    }

    pub fn eval(&self, x: Complex64, z: Complex64) -> Complex64 {
        self.slice_x(z).eval(x)
    }

    /// Substitutes `z = z0`, leaving a polynomial in `x`.
    pub fn slice_x(&self, z0: Complex64) -> ComplexPoly {
        ComplexPoly::new(
            self.coeffs
                .iter()
                .map(|r| r.iter().rev().fold(ZERO, |acc, &c| acc * z0 + c))
                .collect(),
        )
    }

    /// Substitutes `x = x0`, leaving a polynomial in `z`.
    pub fn slice_z(&self, x0: Complex64) -> ComplexPoly {
        let width = self.deg_z().map_or(0, |d| d + 1);
        ComplexPoly::new(
            (0..width)
                .map(|j| {
                    self.coeffs
                        .iter()
                        .rev()
                        .fold(ZERO, |acc, r| acc * x0 + r[j])
                })
                .collect(),
        )
    }

    /// Column `j` as a polynomial in `x` (coefficient of `z^j`).
    pub fn column(&self, j: usize) -> ComplexPoly {
        ComplexPoly::new(
            self.coeffs
                .iter()
                .map(|r| r.get(j).copied().unwrap_or(ZERO))
                .collect(),
        )
    }

    /// Row `i` as a polynomial in `z` (coefficient of `x^i`).
    pub fn row(&self, i: usize) -> ComplexPoly {
        ComplexPoly::new(self.coeffs.get(i).cloned().unwrap_or_default())
    }

    /// The restriction to the diagonal `x = z`.
    pub fn diagonal(&self) -> ComplexPoly {
        let total = self.deg_x().unwrap_or(0) + self.deg_z().unwrap_or(0);
        let mut out = vec![ZERO; total + 1];
        for (i, r) in self.coeffs.iter().enumerate() {
            for (j, &c) in r.iter().enumerate() {
                out[i + j] += c;
            }
        }
        ComplexPoly::new(out)
    }

    /// Re-expresses the polynomial in the shifted variable `t = x - z`:
    /// returns `K` with `K[m][j]` the coefficient of `t^m z^j` in
    /// `Psi(z + t, z)`.
    pub fn in_offset_coordinates(&self) -> BiPoly {
        let dx = self.deg_x().unwrap_or(0);
        let dz = self.deg_z().unwrap_or(0);
        let mut out = vec![vec![ZERO; dx + dz + 1]; dx + 1];
        for (i, r) in self.coeffs.iter().enumerate() {
            for (j, &c) in r.iter().enumerate() {
                if c == ZERO {
                    continue;
                }
                // x^i = (z + t)^i = sum_m C(i, m) t^m z^{i-m}
                for (m, row) in out.iter_mut().enumerate().take(i + 1) {
                    row[i - m + j] += c * binomial_f64(i, m);
                }
            }
        }
        BiPoly::new(out)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .map(|r| r.iter().map(|&a| a * c).collect())
                .collect(),
        )
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let rows = self.coeffs.len().max(other.coeffs.len());
        let cols = self.deg_z().max(other.deg_z()).map_or(0, |d| d + 1);
        let mut worst: f64 = 0.0;
        for i in 0..rows {
            for j in 0..cols {
                worst = worst.max((self.coeff(i, j) - other.coeff(i, j)).norm());
            }
        }
        worst
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let rows = self.coeffs.len().max(other.coeffs.len());
        let cols = self.deg_z().max(other.deg_z()).map_or(0, |d| d + 1);
        Self::new(
            (0..rows)
                .map(|i| {
                    (0..cols)
                        .map(|j| f(self.coeff(i, j), other.coeff(i, j)))
                        .collect()
                })
                .collect(),
        )
    }
}

impl Add for &BiPoly {
    type Output = BiPoly;
    fn add(self, rhs: &BiPoly) -> BiPoly {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &BiPoly {
    type Output = BiPoly;
    fn sub(self, rhs: &BiPoly) -> BiPoly {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &BiPoly {
    type Output = BiPoly;
    fn mul(self, rhs: &BiPoly) -> BiPoly {
        if self.is_zero() || rhs.is_zero() {
            return BiPoly::zero();
        }
        let rows = self.coeffs.len() + rhs.coeffs.len() - 1;
        let cols = self.coeffs[0].len() + rhs.coeffs[0].len() - 1;
        let mut out = vec![vec![ZERO; cols]; rows];
        for (i, ra) in self.coeffs.iter().enumerate() {
            for (j, &a) in ra.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for (k, rb) in rhs.coeffs.iter().enumerate() {
                    for (l, &b) in rb.iter().enumerate() {
                        out[i + k][j + l] += a * b;
                    }
                }
            }
        }
        BiPoly::new(out)
    }
}

/// Substitutes `z = z0` into `b`, leaving a polynomial in `x`.
pub fn bipoly_slice_x(b: &BiPoly, z0: Complex64) -> ComplexPoly {
    b.slice_x(z0)
}
