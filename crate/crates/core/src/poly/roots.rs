use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ComplexPoly, ZERO};
use crate::error::{Error, Result};

pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

const MAX_ABERTH_ITER: usize = 400;

/// All roots of a polynomial, sorted lexicographically by (re, im).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    /// Max `|p(r)| / |lead|` over the returned roots.
    pub residual: f64,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

pub(crate) fn lex_cmp(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Roots of `p` by Aberth–Ehrlich iteration, with a companion-matrix
/// eigenvalue fallback when the iteration stalls.
///
/// Roots closer than `sqrt(tol)` are merged into their mean (repeated by the
/// cluster size) when that lowers the residual, which recovers multiple
/// roots to far better accuracy than the raw iterates.
pub fn poly_roots(p: &ComplexPoly, tol: f64) -> Result<RootSet> {
    let deg = match p.degree() {
        None => return Err(Error::ZeroPolynomial),
        Some(d) => d,
    };
    if p.coeffs()
        .iter()
        .any(|c| !(c.re.is_finite() && c.im.is_finite()))
    {
        return Err(Error::NonFinite);
    }
    if deg == 0 {
        return Ok(RootSet {
            roots: Vec::new(),
            residual: 0.0,
        });
    }

    // exact zero roots from vanishing low-order coefficients
    let zeros = p.coeffs().iter().take_while(|c| **c == ZERO).count();
    let reduced: Vec<Complex64> = p.coeffs()[zeros..].to_vec();
    let mut roots = vec![ZERO; zeros];
    let rdeg = reduced.len() - 1;

    if rdeg == 1 {
        roots.push(-reduced[0] / reduced[1]);
    } else if rdeg == 2 {
        roots.extend(quadratic(reduced[2], reduced[1], reduced[0]));
    } else if rdeg > 2 {
        let lead = reduced[rdeg];
        let monic: Vec<Complex64> = reduced.iter().map(|c| c / lead).collect();
        let found = match aberth(&monic, initial_guesses(&monic)) {
            Some(r) => r,
            None => {
                let start = companion_eigenvalues(&monic);
                match aberth(&monic, start.clone()) {
                    Some(r) => r,
                    None => {
                        let refined = start;
                        let residual = max_residual(p, &refined);
                        if !acceptable(p, &refined, tol) {
                            let mut best = roots.clone();
                            best.extend(refined);
                            best.sort_by(lex_cmp);
                            return Err(Error::NonConvergence { best, residual });
                        }
                        refined
                    }
                }
            }
        };
        roots.extend(found);
    }

    let roots = merge_clusters(p, roots, tol.sqrt());
    let residual = max_residual(p, &roots);
    if !acceptable(p, &roots, tol) {
        return Err(Error::NonConvergence {
            best: roots,
            residual,
        });
    }
    Ok(RootSet { roots, residual })
}

/// Roots of `a x^2 + b x + c` (`a, c != 0`) without cancellation: the larger
/// root comes from `b + sign * sqrt(disc)`, the other from Vieta.
fn quadratic(a: Complex64, b: Complex64, c: Complex64) -> [Complex64; 2] {
    let sq = (b * b - 4.0 * a * c).sqrt();
    let plus = b + sq;
    let minus = b - sq;
    let q = -0.5
        * if plus.norm() >= minus.norm() {
            plus
        } else {
            minus
        };
    if q == ZERO {
        return [ZERO, ZERO];
    }
    [q / a, c / q]
}

fn max_residual(p: &ComplexPoly, roots: &[Complex64]) -> f64 {
    let lead = p.leading().norm();
    roots
        .iter()
        .map(|&r| p.eval(r).norm() / lead)
        .fold(0.0, f64::max)
}

/// Running error bound for Horner evaluation: `sum |a_i| |z|^i`.
fn abs_eval(coeffs: &[Complex64], z: Complex64) -> f64 {
    let az = z.norm();
    coeffs.iter().rev().fold(0.0, |acc, c| acc * az + c.norm())
}

fn acceptable(p: &ComplexPoly, roots: &[Complex64], tol: f64) -> bool {
    let deg = p.degree().unwrap_or(0) as i32;
    let lead = p.leading().norm();
    roots.iter().all(|&r| {
        let v = p.eval(r).norm();
        let scaled = tol * (1.0 + lead) * r.norm().max(1.0).powi(deg);
        let backward = 64.0 * f64::EPSILON * abs_eval(p.coeffs(), r);
        v.is_finite() && (v <= scaled || v <= backward)
    })
}

/// Starting points on a circle whose radius is the geometric mean of the
/// root moduli, with an irrational angular offset and a small radial
/// perturbation so no two starts are symmetric.
fn initial_guesses(monic: &[Complex64]) -> Vec<Complex64> {
    let n = monic.len() - 1;
    let radius = monic[0].norm().powf(1.0 / n as f64).max(1e-3);
    let offset = 0.4;
    (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + offset;
            let r = radius * (1.0 + 0.01 * k as f64 / n as f64);
            Complex64::from_polar(r, theta)
        })
        .collect()
}

/// Gauss–Seidel Aberth iteration on a monic polynomial. A root is frozen
/// once its residual sits at the Horner rounding level.
fn aberth(monic: &[Complex64], mut z: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let n = z.len();
    let mut frozen = vec![false; n];
    for _ in 0..MAX_ABERTH_ITER {
        let mut active = false;
        for k in 0..n {
            if frozen[k] {
                continue;
            }
            let (p, dp) = eval_pd(monic, z[k]);
            let bound = 4.0 * f64::EPSILON * abs_eval(monic, z[k]);
            if p.norm() <= bound {
                frozen[k] = true;
                continue;
            }
            let mut s = ZERO;
            for j in 0..n {
                if j != k {
                    let d = z[k] - z[j];
                    if d != ZERO {
                        s += d.inv();
                    }
                }
            }
            let w = if dp == ZERO {
                // nudge off a critical point
                Complex64::new(1e-8, 1e-8) * (1.0 + z[k].norm())
            } else {
                let ratio = p / dp;
                ratio / (Complex64::new(1.0, 0.0) - ratio * s)
            };
            if !(w.re.is_finite() && w.im.is_finite()) {
                return None;
            }
            z[k] -= w;
            if w.norm() <= 2.0 * f64::EPSILON * z[k].norm() {
                frozen[k] = true;
            } else {
                active = true;
            }
        }
        if !active {
            return Some(z);
        }
    }
    None
}

fn eval_pd(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn companion_eigenvalues(monic: &[Complex64]) -> Vec<Complex64> {
    let n = monic.len() - 1;
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -monic[i];
    }
    match m.clone().schur().eigenvalues() {
        Some(ev) => ev.iter().copied().collect(),
        None => initial_guesses(monic),
    }
}

/// Single-linkage clustering at `radius`; a cluster is replaced by copies of
/// its mean when that does not worsen the worst residual in the cluster.
fn merge_clusters(p: &ComplexPoly, mut roots: Vec<Complex64>, radius: f64) -> Vec<Complex64> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        let mut j = i;
        while label[j] != r {
            let next = label[j];
            label[j] = r;
            j = next;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (roots[i] - roots[j]).norm() < radius {
                let a = find(&mut label, i);
                let b = find(&mut label, j);
                if a != b {
                    label[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut label, i);
        groups[r].push(i);
    }
    for g in groups.iter().filter(|g| g.len() > 1) {
        let mean = g.iter().map(|&i| roots[i]).sum::<Complex64>() / g.len() as f64;
        let worst = g
            .iter()
            .map(|&i| p.eval(roots[i]).norm())
            .fold(0.0, f64::max);
        if p.eval(mean).norm() <= worst {
            for &i in g {
                roots[i] = mean;
            }
        }
    }
    roots.sort_by(lex_cmp);
    roots
}
