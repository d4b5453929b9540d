//! Linear differential operators `T = sum_j Q_j(x) d^j/dx^j` with polynomial
//! coefficients: classification, action on polynomials, spectra,
//! eigenpolynomials, composition and the matrix of `T` on polynomials of
//! bounded degree.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, ConvexPolygon};
use crate::poly::{binomial_f64, falling_factorial_f64, ComplexPoly, DEFAULT_ROOT_TOL, ONE, ZERO};

/// Relative tolerance under which two eigenvalues count as equal.
pub const RESONANCE_REL_TOL: f64 = 1e-9;

/// `sum_j Q_j(x) d^j/dx^j`; the zero operator has no coefficients.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DiffOperator {
    coeffs: Vec<ComplexPoly>,
}

/// Diagonal of `T` in the monomial basis: `T(x^i) = lambda_i x^i + ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSlice {
    pub lambdas: Vec<Complex64>,
    pub n: usize,
}

/// Matrix of `T` on polynomials of degree at most `n`; column `j` holds the
/// monomial coordinates of `T(x^j)`. `overflow` records that some `T(x^j)`
/// had terms above degree `n` which were cut off.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub entries: DMatrix<Complex64>,
    pub overflow: bool,
}

impl DiffOperator {
    pub fn new(mut coeffs: Vec<ComplexPoly>) -> Self {
        while coeffs.last().is_some_and(ComplexPoly::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn identity() -> Self {
        Self::multiplication(ComplexPoly::one())
    }

    /// Multiplication by `q` (order zero).
    pub fn multiplication(q: ComplexPoly) -> Self {
        Self::new(vec![q])
    }

    /// `d/dx`.
    pub fn derivative() -> Self {
        Self::new(vec![ComplexPoly::zero(), ComplexPoly::one()])
    }

    /// `q(x) d^j/dx^j`.
    pub fn term(q: ComplexPoly, j: usize) -> Self {
        let mut coeffs = vec![ComplexPoly::zero(); j + 1];
        coeffs[j] = q;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[ComplexPoly] {
        &self.coeffs
    }

    /// `Q_j`, zero past the order.
    pub fn coeff(&self, j: usize) -> ComplexPoly {
        self.coeffs.get(j).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest `j` with `Q_j != 0`.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Leading coefficient `Q_k`.
    pub fn leading(&self) -> Option<&ComplexPoly> {
        self.coeffs.last()
    }

    /// Terms of order at most `n` only.
    pub fn truncate(&self, n: usize) -> Self {
        Self::new(self.coeffs.iter().take(n + 1).cloned().collect())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|q| q.scale(c)).collect())
    }

    /// `max_j (deg Q_j - j)` over nonzero coefficients.
    pub fn fuchs_index(&self) -> Result<i64> {
        self.coeffs
            .iter()
            .enumerate()
            .filter_map(|(j, q)| q.degree().map(|d| d as i64 - j as i64))
            .max()
            .ok_or(Error::ZeroOperator)
    }

    pub fn is_exactly_solvable(&self) -> Result<bool> {
        Ok(self.fuchs_index()? == 0)
    }

    /// The Fuchs index is attained by the leading coefficient.
    pub fn is_nondegenerate(&self) -> Result<bool> {
        let rho = self.fuchs_index()?;
        let k = self.coeffs.len() - 1;
        let dk = self.coeffs[k].degree().expect("trimmed") as i64;
        Ok(dk - k as i64 == rho)
    }

    fn require_exactly_solvable(&self) -> Result<()> {
        let rho = self.fuchs_index()?;
        if rho != 0 {
            return Err(Error::NotExactlySolvable(rho));
        }
        Ok(())
    }

    /// `sum_j Q_j p^{(j)}`.
    pub fn apply(&self, p: &ComplexPoly) -> ComplexPoly {
        let mut out = ComplexPoly::zero();
        for (j, q) in self.coeffs.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            let dp = p.derive(j);
            if dp.is_zero() {
                break;
            }
            out = &out + &(q * &dp);
        }
        out
    }

    /// `lambda_0..lambda_n`, read off `T(x^i)`.
    pub fn symbol_eigenvalues(&self, n: usize) -> Result<SpectrumSlice> {
        self.require_exactly_solvable()?;
        let lambdas = (0..=n)
            .map(|i| self.apply(&ComplexPoly::monomial(i, ONE)).coeff(i))
            .collect();
        Ok(SpectrumSlice { lambdas, n })
    }

    /// Monic degree-`n` eigenpolynomial by back-substitution down the
    /// triangular matrix of `T`.
    pub fn eigenpolynomial(&self, n: usize) -> Result<ComplexPoly> {
        self.require_exactly_solvable()?;
        let m = self.matrix_on_cn(n).entries;
        let ln = m[(n, n)];
        let mut c = vec![ZERO; n + 1];
        c[n] = ONE;
        for i in (0..n).rev() {
            let li = m[(i, i)];
            let scale = li.norm().max(ln.norm());
            if (li - ln).norm() <= RESONANCE_REL_TOL * scale || scale == 0.0 {
                return Err(Error::ResonantSpectrum { n, index: i });
            }
            let s: Complex64 = ((i + 1)..=n).map(|j| m[(i, j)] * c[j]).sum();
            c[i] = -s / (li - ln);
        }
        Ok(ComplexPoly::new(c))
    }

    /// `self ∘ other` via `(Q d^a)(R d^b) = Q sum_i C(a,i) R^{(i)} d^{a+b-i}`.
    pub fn compose(&self, other: &DiffOperator) -> DiffOperator {
        if self.is_zero() || other.is_zero() {
            return DiffOperator::zero();
        }
        let order = self.coeffs.len() + other.coeffs.len() - 2;
        let mut out = vec![ComplexPoly::zero(); order + 1];
        for (a, q) in self.coeffs.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            for (b, r) in other.coeffs.iter().enumerate() {
                if r.is_zero() {
                    continue;
                }
                for i in 0..=a {
                    let dr = r.derive(i);
                    if dr.is_zero() {
                        break;
                    }
                    let term = (q * &dr).scale(Complex64::new(binomial_f64(a, i), 0.0));
                    out[a + b - i] = &out[a + b - i] + &term;
                }
            }
        }
        DiffOperator::new(out)
    }

    /// `n`-th operator power by repeated composition.
    pub fn power(&self, n: usize) -> DiffOperator {
        (0..n).fold(DiffOperator::identity(), |acc, _| self.compose(&acc))
    }

    /// Convex hull of the zeros of the leading coefficient.
    pub fn fundamental_polygon(&self) -> Result<ConvexPolygon> {
        let lead = self.leading().ok_or(Error::ZeroOperator)?;
        if lead.degree().unwrap_or(0) == 0 {
            return Err(Error::ConstantLeadingCoefficient);
        }
        let roots = lead.roots(DEFAULT_ROOT_TOL)?;
        Ok(convex_hull(&roots.roots))
    }

    pub fn matrix_on_cn(&self, n: usize) -> OperatorMatrix {
        let mut entries = DMatrix::<Complex64>::zeros(n + 1, n + 1);
        let mut overflow = false;
        for j in 0..=n {
            let image = self.apply(&ComplexPoly::monomial(j, ONE));
            for (i, &c) in image.coeffs().iter().enumerate() {
                if i <= n {
                    entries[(i, j)] = c;
                } else if c != ZERO {
                    overflow = true;
                }
            }
        }
        OperatorMatrix { entries, overflow }
    }

    /// Smallest `k <= k_max` with `T^k = alpha^k` on polynomials of degree
    /// at most `n`, `alpha` being the coefficient of `x^n` in `T(x^n)`.
    pub fn detect_scalar_power(
        &self,
        n: usize,
        k_max: usize,
        tol: f64,
    ) -> Result<Option<(usize, Complex64)>> {
        let m = self.matrix_on_cn(n);
        if m.overflow {
            return Err(Error::SingularRestriction(n));
        }
        let det = m.entries.clone().lu().determinant();
        let diag_scale = (0..=n)
            .map(|i| m.entries[(i, i)].norm())
            .fold(1.0, f64::max);
        if det.norm() <= 1e-12 * diag_scale.powi(n as i32 + 1) {
            return Err(Error::SingularRestriction(n));
        }
        let alpha = m.entries[(n, n)];
        let mut power = m.entries.clone();
        let mut alpha_k = alpha;
        for k in 1..=k_max {
            let mut worst: f64 = 0.0;
            for i in 0..=n {
                for j in 0..=n {
                    let target = if i == j { alpha_k } else { ZERO };
                    worst = worst.max((power[(i, j)] - target).norm());
                }
            }
            if worst <= tol {
                return Ok(Some((k, alpha)));
            }
            power = &power * &m.entries;
            alpha_k *= alpha;
        }
        Ok(None)
    }
}

impl std::ops::Add for &DiffOperator {
    type Output = DiffOperator;
    fn add(self, rhs: &DiffOperator) -> DiffOperator {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        DiffOperator::new((0..len).map(|j| &self.coeff(j) + &rhs.coeff(j)).collect())
    }
}

impl std::ops::Sub for &DiffOperator {
    type Output = DiffOperator;
    fn sub(self, rhs: &DiffOperator) -> DiffOperator {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        DiffOperator::new((0..len).map(|j| &self.coeff(j) - &rhs.coeff(j)).collect())
    }
}

/// The unique exactly solvable operator of order at most `k` with monic
/// eigenpolynomials `polys[j]` (degree `j`) and eigenvalues `lambdas[j]`.
///
/// Built recursively: `T(p_l) = l! Q_l + sum_{j<l} Q_j p_l^{(j)}` determines
/// `Q_l` once `Q_0..Q_{l-1}` are known.
pub fn operator_from_eigenpairs(
    polys: &[ComplexPoly],
    lambdas: &[Complex64],
) -> Result<DiffOperator> {
    if polys.len() != lambdas.len() {
        return Err(Error::Precondition(format!(
            "{} polynomials but {} eigenvalues",
            polys.len(),
            lambdas.len()
        )));
    }
    for (j, p) in polys.iter().enumerate() {
        if p.degree() != Some(j) || (p.leading() - ONE).norm() > 1e-12 {
            return Err(Error::DegreeViolation(format!(
                "eigenpolynomial {j} must be monic of degree {j}"
            )));
        }
    }
    let mut coeffs: Vec<ComplexPoly> = Vec::with_capacity(polys.len());
    for (l, (p, &lambda)) in polys.iter().zip(lambdas).enumerate() {
        let mut rhs = p.scale(lambda);
        for (j, q) in coeffs.iter().enumerate() {
            rhs = &rhs - &(q * &p.derive(j));
        }
        let fact = falling_factorial_f64(l, l);
        coeffs.push(rhs.scale(Complex64::new(1.0 / fact, 0.0)));
    }
    Ok(DiffOperator::new(coeffs))
}
