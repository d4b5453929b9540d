//! Dense univariate and bivariate polynomials over the complex numbers.
//!
//! Coefficients are stored in ascending order. Every constructor and
//! arithmetic operation re-normalizes, dropping trailing coefficients whose
//! modulus falls below [`TRIM_REL`] times the largest coefficient modulus, so
//! that the degree stays meaningful under floating-point cancellation.

mod bipoly;
mod roots;

pub use bipoly::{bipoly_slice_x, BiPoly};
pub(crate) use roots::lex_cmp;
pub use roots::{poly_roots, RootSet, DEFAULT_ROOT_TOL};

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold below which trailing coefficients are treated as zero.
pub const TRIM_REL: f64 = 1e-13;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexPoly {
    coeffs: Vec<Complex64>,
}

impl ComplexPoly {
    /// Builds a polynomial from ascending coefficients, trimming with the
    /// default relative threshold.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self::with_threshold(coeffs, TRIM_REL)
    }

    pub fn with_threshold(mut coeffs: Vec<Complex64>, rel: f64) -> Self {
        debug_assert!(
            coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()),
            "non-finite polynomial coefficient"
        );
        let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let cut = rel * max;
        while let Some(last) = coeffs.last() {
            if last.norm() <= cut {
                coeffs.pop();
            } else {
                break;
            }
        }
        Self { coeffs }
    }

    /// Like [`ComplexPoly::new`] but rejects NaN and infinities.
    pub fn try_new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::NonFinite);
        }
        Ok(Self::new(coeffs))
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Self::new(vec![ZERO, ONE])
    }

    pub fn monomial(degree: usize, c: Complex64) -> Self {
        let mut coeffs = vec![ZERO; degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    /// `x - a`.
    pub fn linear_root(a: Complex64) -> Self {
        Self::new(vec![-a, ONE])
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of `x^i`, zero past the degree.
    pub fn coeff(&self, i: usize) -> Complex64 {
        self.coeffs.get(i).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * x + c)
    }

    /// Value and first derivative in a single Horner pass.
    pub fn eval_with_derivative(&self, x: Complex64) -> (Complex64, Complex64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &c in self.coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    /// `order`-fold formal derivative.
    pub fn derive(&self, order: usize) -> Self {
        if order == 0 {
            return self.clone();
        }
        if self.coeffs.len() <= order {
            return Self::zero();
        }
        let coeffs = (order..self.coeffs.len())
            .map(|i| self.coeffs[i] * falling_factorial_f64(i, order))
            .collect();
        Self::new(coeffs)
    }

    /// `leading * prod (x - r)`.
    pub fn from_roots(roots: &[Complex64], leading: Complex64) -> Result<Self> {
        if leading == ZERO {
            return Err(Error::ZeroLeading);
        }
        let mut coeffs = vec![leading];
        for &r in roots {
            let mut next = vec![ZERO; coeffs.len() + 1];
            for (i, &a) in coeffs.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= r * a;
            }
            coeffs = next;
        }
        Ok(Self { coeffs })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut out = Self::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// `p(x + a)`.
    pub fn shift(&self, a: Complex64) -> Self {
        let mut out = Self::zero();
        let lin = Self::new(vec![a, ONE]);
        for &c in self.coeffs.iter().rev() {
            out = &(&out * &lin) + &Self::constant(c);
        }
        out
    }

    /// Roots with the given tolerance; see [`poly_roots`].
    pub fn roots(&self, tol: f64) -> Result<RootSet> {
        poly_roots(self, tol)
    }

    /// Largest coefficient-wise modulus of `self - other`.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|i| (self.coeff(i) - other.coeff(i)).norm())
            .fold(0.0, f64::max)
    }

    /// Division by a monic-or-not divisor; returns (quotient, remainder).
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = match divisor.degree() {
            Some(d) => d,
            None => panic!("division by the zero polynomial"),
        };
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![ZERO; rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let q = rem[i + dd] / lead;
            quot[i] = q;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= q * dc;
            }
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }
}

impl fmt::Debug for ComplexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}{:+}i)", c.re, c.im)?;
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add for &ComplexPoly {
    type Output = ComplexPoly;
    fn add(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &ComplexPoly {
    type Output = ComplexPoly;
    fn sub(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &ComplexPoly {
    type Output = ComplexPoly;
    fn mul(self, rhs: &ComplexPoly) -> ComplexPoly {
        if self.is_zero() || rhs.is_zero() {
            return ComplexPoly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ComplexPoly::new(out)
    }
}

impl Neg for &ComplexPoly {
    type Output = ComplexPoly;
    fn neg(self) -> ComplexPoly {
        ComplexPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for ComplexPoly {
            type Output = ComplexPoly;
            fn $m(self, rhs: ComplexPoly) -> ComplexPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Exact falling factorial `n (n-1) ... (n-m+1)`.
pub fn falling_factorial(n: u64, m: u64) -> Result<u128> {
    if m > n {
        return Err(Error::DomainError(format!(
            "falling factorial ({n})_{m} needs m <= n"
        )));
    }
    let mut acc: u128 = 1;
    for k in 0..m {
        acc = acc
            .checked_mul((n - k) as u128)
            .ok_or_else(|| Error::DomainError(format!("falling factorial ({n})_{m} overflows")))?;
    }
    Ok(acc)
}

/// Floating-point falling factorial, zero when `m > n`.
pub(crate) fn falling_factorial_f64(n: usize, m: usize) -> f64 {
    if m > n {
        return 0.0;
    }
    ((n - m + 1)..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub(crate) fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k)
        .fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        .round()
}
