//! Degree-one specialization: the rational map `R = V / U` read off
//! `T(x - z) = z U - V`, its exceptional set, plane Julia sets by random
//! inverse iteration, and the comparison with the Hutchinson engine at
//! `n = 1`.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correspondence::{extract_linear_in_z, psi};
use crate::dynamics::{minimal_invariant_set, IterationConfig, IterationStatus, Mode};
use crate::error::{Error, Result};
use crate::geometry::{cell_of, hausdorff, CellKey, PointCloud};
use crate::operator::DiffOperator;
use crate::poly::{lex_cmp, ComplexPoly, ONE, ZERO};

/// Distance under which two points of a preimage set are the same.
const POINT_TOL: f64 = 1e-6;

/// `V / U` with no common zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalMap {
    pub num: ComplexPoly,
    pub den: ComplexPoly,
    /// Common zeros of the raw `V` and `U` that were divided out.
    pub cancelled: Vec<Complex64>,
}

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    fn close(&self, other: &SpherePoint) -> bool {
        match (self, other) {
            (SpherePoint::Infinity, SpherePoint::Infinity) => true,
            (SpherePoint::Finite(a), SpherePoint::Finite(b)) => {
                (a - b).norm() <= POINT_TOL * (1.0 + a.norm())
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalityReport {
    pub nonexceptional: bool,
    pub exceptional_points: Vec<SpherePoint>,
    /// Short machine-readable reason code.
    pub reason: String,
    /// `deg V = deg U`, where `R(inf)` is a finite nonzero value and the
    /// second clause of the definition is evaluated literally.
    pub boundary_case: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JuliaRun {
    pub cloud: PointCloud,
    pub start: Complex64,
    /// False when no repelling fixed point exists and the walkers started
    /// from a pseudo-random point instead.
    pub repelling_start: bool,
    pub rounds: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub hausdorff: f64,
    pub threshold: f64,
    pub passed: bool,
    pub exceptional: bool,
    pub engine_status: IterationStatus,
    pub engine: PointCloud,
    pub julia: JuliaRun,
    pub report: String,
}

/// Inverse-iteration walkers run concurrently.
pub const WALKERS: usize = 8;
/// Steps per walker per round.
pub const ROUND_LEN: usize = 4096;
/// Discarded initial steps of every walker.
pub const BURN_IN: usize = 64;

impl RationalMap {
    /// Builds `V / U`, dividing out common zeros found by root matching.
    pub fn new(num: ComplexPoly, den: ComplexPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DegenerateImage);
        }
        let mut num = num;
        let mut den = den;
        let mut cancelled = Vec::new();
        loop {
            if num.degree().unwrap_or(0) == 0 || den.degree().unwrap_or(0) == 0 {
                break;
            }
            let rn = num.roots(1e-12)?.roots;
            let rd = den.roots(1e-12)?.roots;
            let common = rn.iter().find(|a| {
                rd.iter()
                    .any(|b| (*a - b).norm() <= POINT_TOL * (1.0 + a.norm()))
            });
            let Some(&r) = common else { break };
            let lin = ComplexPoly::linear_root(r);
            num = num.div_rem(&lin).0;
            den = den.div_rem(&lin).0;
            cancelled.push(r);
        }
        Ok(Self {
            num,
            den,
            cancelled,
        })
    }

    pub fn degree(&self) -> usize {
        self.num
            .degree()
            .unwrap_or(0)
            .max(self.den.degree().unwrap_or(0))
    }

    pub fn eval(&self, x: Complex64) -> SpherePoint {
        let d = self.den.eval(x);
        if d == ZERO {
            SpherePoint::Infinity
        } else {
            SpherePoint::Finite(self.num.eval(x) / d)
        }
    }

    /// `R'(x) = (V' U - V U') / U^2`.
    pub fn derivative(&self, x: Complex64) -> Complex64 {
        let (v, dv) = self.num.eval_with_derivative(x);
        let (u, du) = self.den.eval_with_derivative(x);
        (dv * u - v * du) / (u * u)
    }

    /// `R(inf)`.
    pub fn at_infinity(&self) -> SpherePoint {
        let dv = self.num.degree().map_or(-1, |d| d as i64);
        let du = self.den.degree().unwrap_or(0) as i64;
        if dv > du {
            SpherePoint::Infinity
        } else if dv == du {
            SpherePoint::Finite(self.num.leading() / self.den.leading())
        } else {
            SpherePoint::Finite(ZERO)
        }
    }

    /// Finite solutions of `R(x) = c`, i.e. zeros of `V - c U`.
    pub fn finite_preimages(&self, c: Complex64) -> Vec<Complex64> {
        let p = &self.num - &self.den.scale(c);
        if p.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        p.roots(1e-12).map(|r| r.roots).unwrap_or_else(|e| match e {
            Error::NonConvergence { best, .. } => best,
            _ => Vec::new(),
        })
    }

    /// Distinct points of `R^{-1}(c)` on the sphere.
    pub fn preimages(&self, c: SpherePoint) -> Vec<SpherePoint> {
        let d = self.degree();
        let mut out: Vec<SpherePoint> = match c {
            SpherePoint::Finite(w) => {
                let mut pts: Vec<SpherePoint> = self
                    .finite_preimages(w)
                    .into_iter()
                    .map(SpherePoint::Finite)
                    .collect();
                let p = &self.num - &self.den.scale(w);
                if p.degree().map_or(0, |k| k) < d || p.is_zero() {
                    pts.push(SpherePoint::Infinity);
                }
                pts
            }
            SpherePoint::Infinity => {
                let mut pts: Vec<SpherePoint> = if self.den.degree().unwrap_or(0) == 0 {
                    Vec::new()
                } else {
                    self.den
                        .roots(1e-12)
                        .map(|r| r.roots)
                        .unwrap_or_default()
                        .into_iter()
                        .map(SpherePoint::Finite)
                        .collect()
                };
                if self.num.degree().unwrap_or(0) > self.den.degree().unwrap_or(0) {
                    pts.push(SpherePoint::Infinity);
                }
                pts
            }
        };
        let mut distinct: Vec<SpherePoint> = Vec::new();
        for p in out.drain(..) {
            if !distinct.iter().any(|q| q.close(&p)) {
                distinct.push(p);
            }
        }
        distinct
    }

    /// Fixed points `V(x) = x U(x)`.
    pub fn fixed_points(&self) -> Vec<Complex64> {
        let p = &self.num - &(&ComplexPoly::x() * &self.den);
        if p.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        p.roots(1e-12).map(|r| r.roots).unwrap_or_default()
    }
}

/// The rational map of `T` acting on linear polynomials:
/// `U = -Q_0`, `V = -(Q_1 + x Q_0)`.
pub fn rational_from_operator(t: &DiffOperator) -> Result<RationalMap> {
    let b = psi(t, 1);
    let split = extract_linear_in_z(&b)?.ok_or(Error::DegenerateImage)?;
    RationalMap::new(split.v, split.u)
}

/// Totally ramified values: `c` with a single preimage, paired with that
/// preimage.
fn totally_ramified(r: &RationalMap) -> Vec<(SpherePoint, SpherePoint)> {
    let mut values = vec![SpherePoint::Infinity, r.at_infinity()];
    // critical points: zeros of V'U - VU'
    let w = &(&r.num.derive(1) * &r.den) - &(&r.num * &r.den.derive(1));
    if w.degree().unwrap_or(0) > 0 {
        if let Ok(roots) = w.roots(1e-12) {
            values.extend(roots.roots.into_iter().map(|x| r.eval(x)));
        }
    }
    let mut out: Vec<(SpherePoint, SpherePoint)> = Vec::new();
    for c in values {
        if out.iter().any(|(v, _)| v.close(&c)) {
            continue;
        }
        if let [p] = r.preimages(c)[..] {
            out.push((c, p));
        }
    }
    out
}

/// Exceptional points (finite backward orbit) and the non-exceptionality
/// test: `E ⊆ {inf}`, and either `R(inf) = inf` or
/// `R^{-1}(R(inf)) \ {inf} != {R(inf)}`.
pub fn is_nonexceptional(r: &RationalMap) -> Result<ExceptionalityReport> {
    let d = r.degree();
    if d < 2 {
        return Err(Error::DegreeTooLow(d));
    }
    let ramified = totally_ramified(r);
    let single_preimage =
        |c: &SpherePoint| ramified.iter().find(|(v, _)| v.close(c)).map(|(_, p)| *p);
    let mut exceptional: Vec<SpherePoint> = Vec::new();
    for (c, p) in &ramified {
        let is_exc = p.close(c) || single_preimage(p).is_some_and(|q| q.close(c));
        if is_exc && !exceptional.iter().any(|e| e.close(c)) {
            exceptional.push(*c);
        }
    }
    let finite_exceptional = exceptional
        .iter()
        .any(|e| matches!(e, SpherePoint::Finite(_)));
    let r_inf = r.at_infinity();
    let boundary_case = r.num.degree() == r.den.degree();
    let second_clause = match r_inf {
        SpherePoint::Infinity => true,
        SpherePoint::Finite(w) => {
            let finite: Vec<SpherePoint> = r
                .preimages(r_inf)
                .into_iter()
                .filter(|p| *p != SpherePoint::Infinity)
                .collect();
            !(finite.len() == 1 && finite[0].close(&SpherePoint::Finite(w)))
        }
    };
    let (nonexceptional, reason) = match (finite_exceptional, second_clause) {
        (true, _) => (false, "finite_exceptional_point"),
        (false, false) => (false, "preimage_of_r_infinity"),
        (false, true) => (true, "ok"),
    };
    Ok(ExceptionalityReport {
        nonexceptional,
        exceptional_points: exceptional,
        reason: reason.to_string(),
        boundary_case,
    })
}

fn walker_rng(seed: u64, walker: usize, round: usize) -> ChaCha8Rng {
    let mut s = seed ^ 0x6a09_e667_f3bc_c908;
    s = s.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (walker as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    s ^= (round as u64).wrapping_mul(0x94d0_49bb_1331_11eb);
    ChaCha8Rng::seed_from_u64(s)
}

/// Plane Julia set of `R` by random inverse iteration.
///
/// [`WALKERS`] walkers start at a repelling fixed point (or, lacking one,
/// at a seeded pseudo-random point), pick one preimage uniformly at random
/// per step, discard a [`BURN_IN`], and record snapped positions in rounds
/// of [`ROUND_LEN`] steps until `stall_window` rounds add no new cell or
/// `max_iter` rounds have run.
pub fn julia_backward(r: &RationalMap, cfg: &IterationConfig) -> Result<JuliaRun> {
    let d = r.degree();
    if d < 2 {
        return Err(Error::DegreeTooLow(d));
    }
    let repelling = r
        .fixed_points()
        .into_iter()
        .filter(|&x| r.den.eval(x) != ZERO && r.derivative(x).norm() > 1.0 + 1e-9)
        .min_by(lex_cmp);
    let (start, repelling_start) = match repelling {
        Some(x) => (x, true),
        None => {
            let mut rng = walker_rng(cfg.rng_seed, usize::MAX, 0);
            (
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                false,
            )
        }
    };

    let step = |x: Complex64, rng: &mut ChaCha8Rng| -> Complex64 {
        let pre = r.finite_preimages(x);
        if pre.is_empty() {
            x
        } else {
            pre[rng.gen_range(0..pre.len())]
        }
    };

    let mut positions: Vec<Complex64> = (0..WALKERS)
        .into_par_iter()
        .map(|w| {
            let mut rng = walker_rng(cfg.rng_seed, w, 0);
            let mut x = start;
            for _ in 0..BURN_IN {
                x = step(x, &mut rng);
            }
            x
        })
        .collect();

    let mut cells: HashMap<CellKey, Complex64> = HashMap::new();
    let mut quiet = 0;
    let mut rounds = 0;
    let mut converged = false;
    while rounds < cfg.max_iter {
        rounds += 1;
        let batches: Vec<(Complex64, Vec<Complex64>)> = positions
            .par_iter()
            .enumerate()
            .map(|(w, &x0)| {
                let mut rng = walker_rng(cfg.rng_seed, w, rounds);
                let mut x = x0;
                let mut seen = Vec::with_capacity(ROUND_LEN);
                for _ in 0..ROUND_LEN {
                    x = step(x, &mut rng);
                    if x.re.is_finite() && x.im.is_finite() {
                        seen.push(x);
                    }
                }
                (x, seen)
            })
            .collect();
        let mut fresh = 0;
        let mut batch_points: Vec<Complex64> = Vec::new();
        for (w, (x, seen)) in batches.into_iter().enumerate() {
            positions[w] = x;
            batch_points.extend(seen);
        }
        batch_points.par_sort_unstable_by(lex_cmp);
        for p in batch_points {
            let key = cell_of(p, cfg.eps);
            let slot = cells.entry(key).or_insert_with(|| {
                fresh += 1;
                p
            });
            if lex_cmp(&p, slot).is_lt() {
                *slot = p;
            }
        }
        if fresh == 0 {
            quiet += 1;
            if quiet >= cfg.stall_window {
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    Ok(JuliaRun {
        cloud: PointCloud::new(cells.into_values().collect(), cfg.eps),
        start,
        repelling_start,
        rounds,
        converged,
    })
}

/// Hausdorff distance between the `n = 1` Hutchinson cloud of `T` and the
/// inverse-iteration Julia set of its rational map; passes at `3 eps`.
pub fn cross_validate_m1(t: &DiffOperator, cfg: &IterationConfig) -> Result<CrossValidation> {
    let r = rational_from_operator(t)?;
    let exc = is_nonexceptional(&r)?;
    let engine = minimal_invariant_set(t, 1, Mode::Hutchinson, cfg)?;
    let julia = julia_backward(&r, cfg)?;
    let threshold = 3.0 * cfg.eps;
    let distance = if engine.cloud.is_empty() || julia.cloud.is_empty() {
        f64::INFINITY
    } else {
        hausdorff(&engine.cloud, &julia.cloud)?
    };
    let passed = exc.nonexceptional && distance <= threshold;
    let report = if exc.nonexceptional {
        format!(
            "R = V/U of degree {}; Hausdorff(M_1 cloud, Julia cloud) = {distance:.3e} vs threshold {threshold:.3e}: {}",
            r.degree(),
            if passed { "coincide" } else { "MISMATCH" }
        )
    } else {
        let points: Vec<String> = exc
            .exceptional_points
            .iter()
            .map(|p| match p {
                SpherePoint::Infinity => "inf".to_string(),
                SpherePoint::Finite(z) => format!("{z}"),
            })
            .collect();
        format!(
            "R is exceptional (E = {{{}}}); coincidence with the Julia set is not guaranteed. \
             Minimal candidates: each finite exceptional point, and the Julia cloud; \
             Hausdorff(M_1 cloud, Julia cloud) = {distance:.3e}",
            points.join(", ")
        )
    };
    Ok(CrossValidation {
        hausdorff: distance,
        threshold,
        passed,
        exceptional: !exc.nonexceptional,
        engine_status: engine.status,
        engine: engine.cloud,
        julia,
        report,
    })
}

/// `R(x) = x^2 + c` as a map, for fixtures and tests.
pub fn quadratic_map(c: Complex64) -> RationalMap {
    RationalMap {
        num: ComplexPoly::new(vec![c, ZERO, ONE]),
        den: ComplexPoly::one(),
        cancelled: Vec::new(),
    }
}
