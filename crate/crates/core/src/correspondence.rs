//! The bridge between operators and bivariate polynomials:
//! `Psi_{T,n}(x, z) = T[(x - z)^n]` and its inverse `Phi_k`, the families
//! `F_{m,n}`, one-point invariant sets and structural extraction of
//! linear and affine forms.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::DiffOperator;
use crate::poly::{binomial_f64, falling_factorial_f64, BiPoly, ComplexPoly, ONE, ZERO};

/// `z -> a z + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub a: Complex64,
    pub b: Complex64,
}

impl AffineMap {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        Self { a, b }
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        self.a * z + self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OnePointKind {
    /// The slice `Psi(x, z0)` vanishes only at `x = z0`.
    SoleIntersection,
    /// `Psi(x, z0)` is identically zero.
    FullFiber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnePoint {
    pub z0: Complex64,
    pub kind: OnePointKind,
    /// Relative distance of the slice from `c (x - z0)^d`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnePointReport {
    pub points: Vec<OnePoint>,
    pub infinite_family: bool,
    /// `(l, Phi)` with `Psi = Phi(z) (x - z)^l`.
    pub family_data: Option<(usize, ComplexPoly)>,
}

/// `B = z U(x) - V(x)` (or the same with `x` and `z` swapped), together
/// with the common zeros of `U` and `V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSplit {
    pub u: ComplexPoly,
    pub v: ComplexPoly,
    pub common_roots: Vec<Complex64>,
}

/// Root-matching tolerance for common zeros of `U` and `V`.
const COMMON_ROOT_TOL: f64 = 1e-7;

/// `sum_{j <= n} (n)_j Q_j(x) (x - z)^{n - j}`.
pub fn psi(t: &DiffOperator, n: usize) -> BiPoly {
    let mut out = BiPoly::zero();
    for (j, q) in t.coeffs().iter().enumerate().take(n + 1) {
        if q.is_zero() {
            continue;
        }
        let scaled = q.scale(Complex64::new(falling_factorial_f64(n, j), 0.0));
        let term = &BiPoly::from_poly_x(&scaled) * &BiPoly::diagonal_power(n - j);
        out = &out + &term;
    }
    out
}

/// The exactly solvable operator of order at most `k` with
/// `psi(phi(B, k), k) = B`.
///
/// Substituting `z = x - tau` gives `B(x, x - tau) = sum_j W_j(x) tau^{k-j}`
/// and `Q_j = W_j / (k)_j`.
pub fn phi(b: &BiPoly, k: usize) -> Result<DiffOperator> {
    let degree = b.total_degree().unwrap_or(0);
    if degree > k {
        return Err(Error::DegreeTooHigh { degree, k });
    }
    // w[m] = coefficient polynomial (in x) of tau^m
    let mut w = vec![vec![ZERO; k + 1]; k + 1];
    for (i, row) in b.coeffs().iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == ZERO {
                continue;
            }
            // x^i (x - tau)^j = sum_m C(j, m) (-1)^m x^{i+j-m} tau^m
            for m in 0..=j {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let deg = i + j - m;
                if deg <= k {
                    w[m][deg] += c * (sign * binomial_f64(j, m));
                }
            }
        }
    }
    let coeffs = (0..=k)
        .map(|jj| {
            let scale = 1.0 / falling_factorial_f64(k, jj);
            ComplexPoly::new(w[k - jj].iter().map(|c| c * scale).collect())
        })
        .collect();
    Ok(DiffOperator::new(coeffs))
}

/// `F_{m,n}`: `sum_j (-1)^{m-j} C(n-j, n-m) Q_m^{(m-j)}(x) d^j`, the operator
/// with `Psi_n = (n)_m Q_m(z) (x - z)^{n-m}`.
pub fn family_operator(m: usize, n: usize, qm: &ComplexPoly) -> Result<DiffOperator> {
    if m >= n {
        return Err(Error::DegreeViolation(format!(
            "need m < n, got m = {m}, n = {n}"
        )));
    }
    if qm.degree().is_some_and(|d| d > m) {
        return Err(Error::DegreeViolation(format!(
            "deg Q_m = {} exceeds m = {m}",
            qm.degree().unwrap()
        )));
    }
    let coeffs = (0..=m)
        .map(|j| {
            let sign = if (m - j).is_multiple_of(2) { 1.0 } else { -1.0 };
            qm.derive(m - j)
                .scale(Complex64::new(sign * binomial_f64(n - j, n - m), 0.0))
        })
        .collect();
    Ok(DiffOperator::new(coeffs))
}

/// Rows of `K` (offset coordinates) that are structurally nonzero.
fn nonzero_rows(k: &BiPoly, tol: f64) -> Vec<usize> {
    let cut = tol * k.max_abs_coeff();
    k.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, r)| r.iter().any(|c| c.norm() > cut))
        .map(|(m, _)| m)
        .collect()
}

/// One-point invariant sets `{z0}` of `T` acting on degree-`n` polynomials.
pub fn one_point_sets(t: &DiffOperator, n: usize, tol: f64) -> Result<OnePointReport> {
    let b = psi(t, n);
    if b.is_constant() {
        return Err(Error::ConstantPsi);
    }
    let k = b.in_offset_coordinates();
    let rows = nonzero_rows(&k, tol);
    if let [l] = rows[..] {
        if l >= 1 {
            let phi_z = k.row(l);
            return Ok(OnePointReport {
                points: Vec::new(),
                infinite_family: true,
                family_data: Some((l, phi_z)),
            });
        }
    }

    // Psi = (x - z)^s G with G(z, z) not identically zero; the diagonal of
    // G carries the candidates.
    let shift = rows.first().copied().unwrap_or(0);
    let deflated = BiPoly::new(k.coeffs()[shift..].to_vec());
    let diag = deflated.row(0);
    let mut candidates = if diag.degree().unwrap_or(0) == 0 {
        Vec::new()
    } else {
        diag.roots(tol.min(1e-10))?.roots
    };
    candidates.dedup_by(|a, b| (*a - *b).norm() <= 1e-9 * (1.0 + b.norm()));

    let scale = b.max_abs_coeff();
    let mut points = Vec::new();
    for z0 in candidates {
        let slice = b.slice_x(z0);
        if slice.max_abs_coeff() <= tol * scale {
            points.push(OnePoint {
                z0,
                kind: OnePointKind::FullFiber,
                residual: slice.max_abs_coeff() / scale,
            });
            continue;
        }
        let d = slice.degree().unwrap_or(0);
        let model = ComplexPoly::linear_root(z0).pow(d).scale(slice.leading());
        let residual = slice.max_diff(&model) / slice.max_abs_coeff();
        if residual <= tol {
            points.push(OnePoint {
                z0,
                kind: OnePointKind::SoleIntersection,
                residual,
            });
        }
    }
    Ok(OnePointReport {
        points,
        infinite_family: false,
        family_data: None,
    })
}

/// The order-`k` operator realizing `scale * prod_j (x - (a_j z + b_j))`.
pub fn operator_from_affine_ifs(maps: &[AffineMap], scale: Complex64) -> Result<DiffOperator> {
    if scale == ZERO {
        return Err(Error::ZeroScale);
    }
    if maps.is_empty() {
        return Err(Error::EmptyInput);
    }
    let product = maps.iter().fold(BiPoly::constant(scale), |acc, m| {
        &acc * &BiPoly::affine_branch(m.a, m.b)
    });
    phi(&product, maps.len())
}

fn common_roots(u: &ComplexPoly, v: &ComplexPoly) -> Result<Vec<Complex64>> {
    if u.is_zero() || v.is_zero() {
        return Ok(Vec::new());
    }
    if u.degree() == Some(0) || v.degree() == Some(0) {
        return Ok(Vec::new());
    }
    let ru = u.roots(1e-12)?.roots;
    let rv = v.roots(1e-12)?.roots;
    let mut out: Vec<Complex64> = ru
        .into_iter()
        .filter(|a| {
            rv.iter()
                .any(|b| (a - b).norm() <= COMMON_ROOT_TOL * (1.0 + a.norm()))
        })
        .collect();
    out.dedup_by(|a, b| (*a - *b).norm() <= COMMON_ROOT_TOL * (1.0 + b.norm()));
    Ok(out)
}

/// `B = z U(x) - V(x)` when `B` has degree one in `z`.
pub fn extract_linear_in_z(b: &BiPoly) -> Result<Option<LinearSplit>> {
    if b.deg_z() != Some(1) {
        return Ok(None);
    }
    let u = b.column(1);
    let v = -&b.column(0);
    let common_roots = common_roots(&u, &v)?;
    Ok(Some(LinearSplit { u, v, common_roots }))
}

/// `B = x U(z) - V(z)` when `B` has degree one in `x`.
pub fn extract_linear_in_x(b: &BiPoly) -> Result<Option<LinearSplit>> {
    if b.deg_x() != Some(1) {
        return Ok(None);
    }
    let u = b.row(1);
    let v = -&b.row(0);
    let common_roots = common_roots(&u, &v)?;
    Ok(Some(LinearSplit { u, v, common_roots }))
}

/// Substeps used to continue branches between consecutive samples.
const TRACK_SUBSTEPS: usize = 32;

/// Numerically splits `B` into `n` affine branches `x = a z + b`.
///
/// Samples `n + 2` points on an arc of `|z| = 1 + 1/golden`, continues the
/// `n` slice roots between them by nearest-neighbour matching on a finer
/// subdivision, and fits each branch by least squares. The maps come back
/// sorted by `(|a|, arg a)`.
pub fn detect_affine_ifs(b: &BiPoly, n: usize, tol: f64) -> Option<Vec<AffineMap>> {
    if n == 0 || b.deg_x() != Some(n) {
        return None;
    }
    let radius = 1.0 + 2.0 / (1.0 + 5f64.sqrt());
    let samples = n + 2;
    let arc = PI / 2.0;
    let start = 0.1;
    let steps = (samples - 1) * TRACK_SUBSTEPS;
    let mut zs = Vec::with_capacity(samples);
    let mut branches: Vec<Vec<Complex64>> = vec![Vec::with_capacity(samples); n];
    let mut current: Option<Vec<Complex64>> = None;
    for s in 0..=steps {
        let z = Complex64::from_polar(radius, start + arc * s as f64 / steps as f64);
        let slice = b.slice_x(z);
        if slice.degree() != Some(n) {
            return None;
        }
        let roots = slice.roots(1e-12).ok()?.roots;
        let next = match current {
            None => roots,
            Some(prev) => match_nearest(&prev, roots),
        };
        if s % TRACK_SUBSTEPS == 0 {
            zs.push(z);
            for (branch, &x) in branches.iter_mut().zip(&next) {
                branch.push(x);
            }
        }
        current = Some(next);
    }

    let mut maps = Vec::with_capacity(n);
    for branch in &branches {
        let (map, residual) = fit_affine(&zs, branch);
        let scale = branch.iter().map(|x| x.norm()).fold(1.0, f64::max);
        if residual > tol * scale {
            return None;
        }
        maps.push(map);
    }
    maps.sort_by(|p, q| {
        let key = |m: &AffineMap| ((m.a.norm() * 1e9).round(), m.a.arg());
        let (kp, kq) = (key(p), key(q));
        kp.0.total_cmp(&kq.0).then(kp.1.total_cmp(&kq.1))
    });
    Some(maps)
}

/// Reorders `next` so that entry `i` is the root closest to `prev[i]`,
/// greedily by increasing distance.
fn match_nearest(prev: &[Complex64], next: Vec<Complex64>) -> Vec<Complex64> {
    let n = prev.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, p) in prev.iter().enumerate() {
        for (j, q) in next.iter().enumerate() {
            pairs.push(((p - q).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = vec![None; n];
    let mut used = vec![false; next.len()];
    for (_, i, j) in pairs {
        if out[i].is_none() && !used[j] {
            out[i] = Some(next[j]);
            used[j] = true;
        }
    }
    out.into_iter().map(|x| x.unwrap_or(ZERO)).collect()
}

/// Complex least squares `x ~ a z + b`; returns the max residual.
fn fit_affine(zs: &[Complex64], xs: &[Complex64]) -> (AffineMap, f64) {
    let m = zs.len() as f64;
    let zbar = zs.iter().sum::<Complex64>() / m;
    let xbar = xs.iter().sum::<Complex64>() / m;
    let mut sxz = ZERO;
    let mut szz = 0.0;
    for (z, x) in zs.iter().zip(xs) {
        let dz = z - zbar;
        sxz += (x - xbar) * dz.conj();
        szz += dz.norm_sqr();
    }
    let a = if szz > 0.0 { sxz / szz } else { ZERO };
    let b = xbar - a * zbar;
    let map = AffineMap::new(a, b);
    let residual = zs
        .iter()
        .zip(xs)
        .map(|(&z, &x)| (x - map.apply(z)).norm())
        .fold(0.0, f64::max);
    (map, residual)
}

/// `(U_alpha, V_alpha)` with `T((x - alpha)^{n-1} (x - z)) = z U_alpha - V_alpha`.
pub fn extract_pinned_rational(
    t: &DiffOperator,
    n: usize,
    alpha: Complex64,
) -> Result<(ComplexPoly, ComplexPoly)> {
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    let base = ComplexPoly::linear_root(alpha).pow(n - 1);
    let u = -&t.apply(&base);
    let v = -&t.apply(&(&ComplexPoly::x() * &base));
    Ok((u, v))
}

/// The operator of [`one_point_sets`]' sharpness example:
/// `Phi_n((x - z)^2 - prod_{j=1}^n (z - j))`.
pub fn hyp_operator(n: usize) -> Result<DiffOperator> {
    let roots: Vec<Complex64> = (1..=n).map(|j| Complex64::new(j as f64, 0.0)).collect();
    let prod = ComplexPoly::from_roots(&roots, ONE)?;
    let b = &BiPoly::diagonal_power(2) - &BiPoly::from_poly_z(&prod);
    phi(&b, n.max(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(coeffs: &[f64]) -> ComplexPoly {
        ComplexPoly::from_real(coeffs)
    }

    fn levy() -> DiffOperator {
        DiffOperator::new(vec![
            poly(&[2.0]),
            ComplexPoly::constant(c(0.0, 1.0)),
            poly(&[0.0, 1.0, 1.0]),
        ])
    }

    fn example_74() -> DiffOperator {
        DiffOperator::new(vec![
            poly(&[-27.0 / 32.0]),
            poly(&[15.0 / 16.0, -3.0 / 32.0]),
            poly(&[0.5, -31.0 / 16.0, 65.0 / 64.0]),
        ])
    }

    fn linear_ops(q1: &[Complex64], q0: Complex64) -> DiffOperator {
        DiffOperator::new(vec![
            ComplexPoly::constant(q0),
            ComplexPoly::new(q1.to_vec()),
        ])
    }

    #[test]
    fn psi_levy_expansion() {
        let b = psi(&levy(), 2);
        // 4x^2 + (2 + 2i - 4z) x + 2z^2 - 2iz
        let want = BiPoly::new(vec![
            vec![ZERO, c(0.0, -2.0), c(2.0, 0.0)],
            vec![c(2.0, 2.0), c(-4.0, 0.0)],
            vec![c(4.0, 0.0)],
        ]);
        assert!(b.max_diff(&want) < 1e-14);
    }

    #[test]
    fn psi_example_74_factorizes() {
        let b = psi(&example_74(), 2);
        let want =
            &BiPoly::affine_branch(c(-2.25, 0.0), ONE) * &BiPoly::affine_branch(c(0.375, 0.0), ONE);
        assert!(b.max_diff(&want) < 1e-14);
        // Q(x) d^n / n! has Psi = Q(x)
        let q = poly(&[1.0, -2.0, 0.5, 3.0]);
        let t = DiffOperator::term(q.scale(c(1.0 / 6.0, 0.0)), 3);
        assert!(psi(&t, 3).max_diff(&BiPoly::from_poly_x(&q)) < 1e-14);
    }

    #[test]
    fn phi_inverts_psi() {
        for t in [levy(), example_74()] {
            let back = phi(&psi(&t, 2), 2).unwrap();
            for j in 0..3 {
                assert!(back.coeff(j).max_diff(&t.coeff(j)) < 1e-13);
            }
        }
        assert_eq!(
            phi(&BiPoly::diagonal_power(3), 2),
            Err(Error::DegreeTooHigh { degree: 3, k: 2 })
        );
    }

    #[test]
    fn phi_of_z_polynomial() {
        // Q(z) with deg Q <= k gives (1/k!) sum (-1)^j Q^{(j)} d^{k-j}
        let q = poly(&[2.0, -1.0, 3.0]);
        let k = 3;
        let t = phi(&BiPoly::from_poly_z(&q), k).unwrap();
        for j in 0..=k {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let want = q.derive(j).scale(c(sign / 6.0, 0.0));
            assert!(t.coeff(k - j).max_diff(&want) < 1e-14, "j = {j}");
        }
    }

    #[test]
    fn families() {
        let a = c(1.5, -0.5);
        let b = c(-2.0, 1.0);
        let cc = c(0.25, 0.0);
        assert_eq!(
            family_operator(0, 1, &ComplexPoly::constant(a)).unwrap(),
            DiffOperator::multiplication(ComplexPoly::constant(a))
        );
        let f12 = family_operator(1, 2, &ComplexPoly::new(vec![b, a])).unwrap();
        assert!(f12.coeff(1).max_diff(&ComplexPoly::new(vec![b, a])) < 1e-15);
        assert!(f12.coeff(0).max_diff(&ComplexPoly::constant(-2.0 * a)) < 1e-15);
        let f23 = family_operator(2, 3, &ComplexPoly::new(vec![cc, b, a])).unwrap();
        assert!(f23.coeff(2).max_diff(&ComplexPoly::new(vec![cc, b, a])) < 1e-15);
        assert!(
            f23.coeff(1)
                .max_diff(&ComplexPoly::new(vec![-2.0 * b, -4.0 * a]))
                < 1e-15
        );
        assert!(f23.coeff(0).max_diff(&ComplexPoly::constant(6.0 * a)) < 1e-15);
        let q = ComplexPoly::new(vec![b, a]);
        let want = &BiPoly::from_poly_z(&q.scale(c(2.0, 0.0))) * &BiPoly::diagonal_power(1);
        assert!(psi(&f12, 2).max_diff(&want) < 1e-14);
        assert!(matches!(
            family_operator(2, 2, &q),
            Err(Error::DegreeViolation(_))
        ));
        assert!(matches!(
            family_operator(0, 2, &q),
            Err(Error::DegreeViolation(_))
        ));
    }

    #[test]
    fn one_point_hyp3() {
        let t = hyp_operator(3).unwrap();
        let report = one_point_sets(&t, 3, 1e-8).unwrap();
        assert!(!report.infinite_family);
        let zs: Vec<f64> = report.points.iter().map(|p| p.z0.re).collect();
        assert_eq!(zs.len(), 3);
        for (z, want) in zs.iter().zip([1.0, 2.0, 3.0]) {
            assert!((z - want).abs() < 1e-9);
        }
        assert!(report
            .points
            .iter()
            .all(|p| p.kind == OnePointKind::SoleIntersection));
    }

    #[test]
    fn one_point_family_and_negative() {
        let f = family_operator(1, 2, &poly(&[1.0, 1.0])).unwrap();
        let report = one_point_sets(&f, 2, 1e-10).unwrap();
        assert!(report.infinite_family);
        let (l, phi_z) = report.family_data.unwrap();
        assert_eq!(l, 1);
        assert!(phi_z.max_diff(&poly(&[2.0, 2.0])) < 1e-14);

        let t = linear_ops(&[c(0.25, 0.0), c(-1.0, 0.0), ONE], ONE);
        let report = one_point_sets(&t, 1, 1e-8).unwrap();
        assert!(!report.infinite_family);
        assert!(report.points.is_empty());

        assert_eq!(
            one_point_sets(&DiffOperator::identity(), 0, 1e-8),
            Err(Error::ConstantPsi)
        );
    }

    #[test]
    fn affine_ifs_round_trip() {
        let maps = [
            AffineMap::new(c(-2.25, 0.0), ONE),
            AffineMap::new(c(0.375, 0.0), ONE),
        ];
        let t = operator_from_affine_ifs(&maps, ONE).unwrap();
        for j in 0..3 {
            assert!(t.coeff(j).max_diff(&example_74().coeff(j)) < 1e-14);
        }
        let lmaps = [
            AffineMap::new(c(0.5, 0.5), ZERO),
            AffineMap::new(c(0.5, -0.5), c(-0.5, -0.5)),
        ];
        let t = operator_from_affine_ifs(&lmaps, c(4.0, 0.0)).unwrap();
        for j in 0..3 {
            assert!(t.coeff(j).max_diff(&levy().coeff(j)) < 1e-14);
        }
        let single = operator_from_affine_ifs(&[AffineMap::new(ZERO, c(2.0, 1.0))], ONE).unwrap();
        let want = BiPoly::new(vec![vec![c(-2.0, -1.0)], vec![ONE]]);
        assert!(psi(&single, 1).max_diff(&want) < 1e-15);
        assert_eq!(operator_from_affine_ifs(&maps, ZERO), Err(Error::ZeroScale));
    }

    #[test]
    fn order_two_closed_form() {
        let (a1, b1, a2, b2) = (c(0.3, 0.1), c(-1.0, 0.5), c(-0.2, 0.6), c(0.7, 0.0));
        let t = operator_from_affine_ifs(&[AffineMap::new(a1, b1), AffineMap::new(a2, b2)], ONE)
            .unwrap();
        let q0 = a1 * a2;
        let q1 = ComplexPoly::new(vec![
            -(a1 * b2 + a2 * b1) / 2.0,
            -(2.0 * a1 * a2 - a1 - a2) / 2.0,
        ]);
        let q2 = ComplexPoly::new(vec![
            b1 * b2 / 2.0,
            (a1 * b2 + a2 * b1 - b1 - b2) / 2.0,
            (a1 - ONE) * (a2 - ONE) / 2.0,
        ]);
        assert!(t.coeff(0).max_diff(&ComplexPoly::constant(q0)) < 1e-15);
        assert!(t.coeff(1).max_diff(&q1) < 1e-15);
        assert!(t.coeff(2).max_diff(&q2) < 1e-15);
    }

    #[test]
    fn detect_maps() {
        let got = detect_affine_ifs(&psi(&example_74(), 2), 2, 1e-9).unwrap();
        assert!((got[0].a - c(0.375, 0.0)).norm() < 1e-10);
        assert!((got[0].b - ONE).norm() < 1e-10);
        assert!((got[1].a - c(-2.25, 0.0)).norm() < 1e-10);
        assert!((got[1].b - ONE).norm() < 1e-10);
        let got = detect_affine_ifs(&psi(&levy(), 2), 2, 1e-9).unwrap();
        assert!((got[0].a - c(0.5, -0.5)).norm() < 1e-10);
        assert!((got[0].b - c(-0.5, -0.5)).norm() < 1e-10);
        assert!((got[1].a - c(0.5, 0.5)).norm() < 1e-10);
        assert!(got[1].b.norm() < 1e-10);
        let julia = linear_ops(&[c(0.0, 1.0), c(-1.0, 0.0), ONE], ONE);
        assert!(detect_affine_ifs(&psi(&julia, 1), 1, 1e-9).is_none());
    }

    #[test]
    fn linear_extractions() {
        let cases = [
            (
                linear_ops(&[c(0.25, 0.0), c(-1.0, 0.0), ONE], ONE),
                c(0.25, 0.0),
            ),
            (linear_ops(&[ZERO, c(-1.0, 0.0), ONE], ONE), ZERO),
            (
                linear_ops(&[c(0.0, 1.0), c(-1.0, 0.0), ONE], ONE),
                c(0.0, 1.0),
            ),
        ];
        for (t, constant) in cases {
            let split = extract_linear_in_z(&psi(&t, 1)).unwrap().unwrap();
            let (q, r) = split.v.div_rem(&split.u);
            assert!(r.is_zero() || r.max_abs_coeff() < 1e-14);
            assert!(q.max_diff(&ComplexPoly::new(vec![constant, ZERO, ONE])) < 1e-14);
            assert!(split.common_roots.is_empty());
        }
        let b = BiPoly::new(vec![vec![ZERO, ZERO, c(-1.0, 0.0)], vec![ONE]]);
        let s = extract_linear_in_x(&b).unwrap().unwrap();
        assert_eq!(s.u, ComplexPoly::one());
        assert_eq!(s.v, poly(&[0.0, 0.0, 1.0]));
        let b = BiPoly::new(vec![
            vec![ZERO, ZERO, ZERO, c(-1.0, 0.0)],
            vec![ONE, ZERO, ONE],
        ]);
        let s = extract_linear_in_x(&b).unwrap().unwrap();
        assert_eq!(s.u, poly(&[1.0, 0.0, 1.0]));
        assert_eq!(s.v, poly(&[0.0, 0.0, 0.0, 1.0]));
        assert!(extract_linear_in_x(&BiPoly::diagonal_power(2))
            .unwrap()
            .is_none());
    }

    #[test]
    fn pinned_rational() {
        let t = linear_ops(&[c(0.0, 1.0), c(-1.0, 0.0), ONE], ONE);
        let (u, v) = extract_pinned_rational(&t, 1, c(3.0, 2.0)).unwrap();
        let split = extract_linear_in_z(&psi(&t, 1)).unwrap().unwrap();
        assert_eq!((u, v), (split.u, split.v));

        // T2 [(x - alpha)^2] = (x - alpha) T1 [(x - alpha)]
        let q1 = ComplexPoly::new(vec![c(0.0, 1.0), c(-1.0, 0.0), ONE]);
        let t1 = DiffOperator::new(vec![ComplexPoly::one(), q1.clone()]);
        let t2 = DiffOperator::new(vec![ComplexPoly::one(), q1.scale(c(0.5, 0.0))]);
        let alpha = c(-0.4, 0.9);
        let lin = ComplexPoly::linear_root(alpha);
        let lhs = t2.apply(&lin.pow(2));
        let rhs = &lin * &t1.apply(&lin);
        assert!(lhs.max_diff(&rhs) < 1e-14);

        let (u2, v2) = extract_pinned_rational(&t2, 2, alpha).unwrap();
        let z = c(0.3, 0.3);
        let x = c(1.1, -0.2);
        let direct = t2.apply(&(&lin * &ComplexPoly::linear_root(z))).eval(x);
        assert!((direct - (z * u2.eval(x) - v2.eval(x))).norm() < 1e-13);
    }
}
