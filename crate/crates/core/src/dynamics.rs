//! Point-cloud iteration of the multivalued map `Theta_{T,n}` (Hutchinson
//! invariance) and a stochastic under-approximation of `tau_n` (full
//! invariance), with seeding, escape detection and the spectral existence
//! diagnostics.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correspondence::{one_point_sets, psi};
use crate::error::{Error, Result};
use crate::geometry::{cell_of, convex_hull, dist_to_polygon, CellKey, GridIndex, PointCloud};
use crate::operator::{DiffOperator, RESONANCE_REL_TOL};
use crate::poly::{lex_cmp, poly_roots, BiPoly, ComplexPoly, ONE, ZERO};

/// Which invariance the iteration targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `T[(x - z)^n]` only: the minimal Hutchinson-invariant set.
    Hutchinson,
    /// All degree-`n` polynomials rooted in the set (sampled).
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationConfig {
    pub max_iter: usize,
    /// Escape radius; `None` picks `10 (1 + max|root of Q_k| + max|seed|)`.
    pub r_max: Option<f64>,
    pub eps: f64,
    pub stall_window: usize,
    /// Random root multisets (and random pairs) drawn per full-mode step.
    pub tau_samples: usize,
    pub rng_seed: u64,
    pub root_tol: f64,
    /// How many points landing in one grid cell are propagated further.
    /// Values above one let slowly converging backward chains advance
    /// below the grid scale.
    pub cell_visits: u32,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            r_max: None,
            eps: 1e-3,
            stall_window: 3,
            tau_samples: 512,
            rng_seed: 0,
            root_tol: 1e-10,
            cell_visits: 32,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::Precondition("eps must be positive".into()));
        }
        if self.r_max.is_some_and(|r| !(r > 0.0)) {
            return Err(Error::Precondition("r_max must be positive".into()));
        }
        if self.stall_window == 0 || self.max_iter == 0 || self.cell_visits == 0 {
            return Err(Error::Precondition(
                "max_iter, stall_window and cell_visits must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IterationStatus {
    Converged,
    Unbounded,
    Empty,
    MaxIterReached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub status: IterationStatus,
    pub cloud: PointCloud,
    /// Hausdorff distance between consecutive clouds.
    pub deltas: Vec<f64>,
    /// Share of the last step's previously unseen candidates that escaped.
    pub escaped_fraction: f64,
    pub steps: usize,
    /// The escape radius actually used.
    pub r_max: f64,
}

/// One application of `Theta` or `tau` with its escape bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub cloud: PointCloud,
    /// Candidate roots produced (before the escape filter).
    pub generated: usize,
    pub escaped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceReport {
    pub spectrum: Vec<Complex64>,
    /// A unique eigenvalue of largest modulus exists, at an index `>= 1`.
    pub unique_dominant: bool,
    /// Index of the unique eigenvalue of largest modulus, if unique.
    pub dominant_index: Option<usize>,
    pub one_point_free: bool,
    pub unbounded_hint: bool,
    pub infinite_hint: bool,
}

/// Relative size under which a slice counts as identically zero.
const ZERO_SLICE_REL: f64 = 1e-12;

/// Cap on hull vertices used to form structured pairs in a full step.
const HULL_PAIR_CAP: usize = 48;

enum Slice {
    Zero,
    Roots(Vec<Complex64>),
}

fn roots_or_best(p: &ComplexPoly, tol: f64) -> Vec<Complex64> {
    match poly_roots(p, tol) {
        Ok(r) => r.roots,
        Err(Error::NonConvergence { best, .. }) => best,
        Err(_) => Vec::new(),
    }
}

/// Roots in `x` of `B(x, z)`, distinguishing the identically-zero slice.
fn slice_roots(b: &BiPoly, z: Complex64, tol: f64) -> Slice {
    let slice = b.slice_x(z);
    let az = z.norm();
    let bound = b
        .coeffs()
        .iter()
        .flat_map(|r| {
            r.iter()
                .rev()
                .scan(0.0, move |acc, c| {
                    *acc = *acc * az + c.norm();
                    Some(*acc)
                })
                .last()
        })
        .fold(0.0, f64::max);
    if slice.max_abs_coeff() <= ZERO_SLICE_REL * bound {
        return Slice::Zero;
    }
    Slice::Roots(roots_or_best(&slice, tol))
}

/// Roots of `T(p)` for `p` with the given roots; all-equal multisets go
/// through the `Psi` slice so they agree bit for bit with `Theta`.
fn multiset_roots(t: &DiffOperator, b: &BiPoly, roots: &[Complex64], tol: f64) -> Vec<Complex64> {
    if roots.iter().all(|r| *r == roots[0]) {
        return match slice_roots(b, roots[0], tol) {
            Slice::Zero => Vec::new(),
            Slice::Roots(r) => r,
        };
    }
    let p = match ComplexPoly::from_roots(roots, ONE) {
        Ok(p) => p,
        Err(_) => return Vec::new(),
    };
    let image = t.apply(&p);
    let scale = t
        .coeffs()
        .iter()
        .map(ComplexPoly::max_abs_coeff)
        .fold(0.0, f64::max)
        * p.max_abs_coeff();
    if image.max_abs_coeff() <= ZERO_SLICE_REL * scale {
        return Vec::new();
    }
    roots_or_best(&image, tol)
}

/// `Psi_{T,n}` with any factor `(x - z)^s` divided out. The trivial roots
/// `x = z` would only re-add the source point; dropping them keeps the
/// diagonal meaningful as the fixed-point locus.
fn theta_kernel(t: &DiffOperator, n: usize) -> BiPoly {
    let b = psi(t, n);
    let k = b.in_offset_coordinates();
    let floor = 1e-12 * k.max_abs_coeff();
    let rows = k.coeffs().len();
    match (0..rows).find(|&m| k.row(m).max_abs_coeff() > floor) {
        None | Some(0) => b,
        Some(s) => {
            let step = BiPoly::affine_branch(ONE, ZERO);
            let mut power = BiPoly::constant(ONE);
            let mut g = BiPoly::zero();
            for m in s..rows {
                g = &g + &(&BiPoly::from_poly_z(&k.row(m)) * &power);
                power = &power * &step;
            }
            g
        }
    }
}

fn escapes(x: Complex64, r_max: f64) -> bool {
    !(x.re.is_finite() && x.im.is_finite()) || x.norm() > r_max
}

/// `10 (1 + max |root of Q_k| + max |seed|)`.
pub fn default_r_max(t: &DiffOperator, seed: &PointCloud) -> f64 {
    let lead_radius = t
        .leading()
        .filter(|q| q.degree().unwrap_or(0) > 0)
        .and_then(|q| q.roots(1e-10).ok())
        .map(|r| r.roots.iter().map(|z| z.norm()).fold(0.0, f64::max))
        .unwrap_or(0.0);
    10.0 * (1.0 + lead_radius + seed.max_modulus())
}

/// `cloud ∪ Theta(cloud)`, snapped, with escaped roots dropped.
///
/// Identically zero slices keep `z` and add nothing; nonzero constant
/// slices add nothing.
pub fn theta_step(
    t: &DiffOperator,
    n: usize,
    cloud: &PointCloud,
    r_max: f64,
    root_tol: f64,
) -> StepOutput {
    let b = theta_kernel(t, n);
    let images: Vec<Vec<Complex64>> = cloud
        .points()
        .par_iter()
        .map(|&z| match slice_roots(&b, z, root_tol) {
            Slice::Zero => Vec::new(),
            Slice::Roots(r) => r,
        })
        .collect();
    collect_step(cloud, images, r_max)
}

fn collect_step(cloud: &PointCloud, images: Vec<Vec<Complex64>>, r_max: f64) -> StepOutput {
    let generated = images.iter().map(Vec::len).sum();
    let mut points = cloud.points().to_vec();
    let mut escaped = 0;
    for x in images.into_iter().flatten() {
        if escapes(x, r_max) {
            escaped += 1;
        } else {
            points.push(x);
        }
    }
    StepOutput {
        cloud: PointCloud::new(points, cloud.resolution()),
        generated,
        escaped,
    }
}

/// SplitMix64 finalizer, used to derive independent RNG streams.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn stream(seed: u64, step: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(mix(mix(seed) ^ step) ^ index))
}

/// Root multisets evaluated by one full-mode step: pure powers at the
/// `frontier`, the mixed basis `(x-u)^j (x-v)^{n-j}` over pairs of hull
/// vertices and random pairs, and random multisets drawn from `cloud`.
fn tau_multisets(
    n: usize,
    cloud: &[Complex64],
    frontier: &[Complex64],
    cfg: &IterationConfig,
    step: u64,
) -> Vec<Vec<Complex64>> {
    let mut sets: Vec<Vec<Complex64>> = frontier.iter().map(|&z| vec![z; n]).collect();
    if cloud.len() < 2 {
        return sets;
    }
    let hull = convex_hull(cloud).vertices;
    let stride = hull.len().div_ceil(HULL_PAIR_CAP).max(1);
    let anchors: Vec<Complex64> = hull.iter().step_by(stride).copied().collect();
    let mut pairs = Vec::new();
    for (i, &u) in anchors.iter().enumerate() {
        for &v in &anchors[i + 1..] {
            pairs.push((u, v));
        }
    }
    let mut rng = stream(cfg.rng_seed, step, u64::MAX);
    for _ in 0..cfg.tau_samples {
        let u = cloud[rng.gen_range(0..cloud.len())];
        let v = cloud[rng.gen_range(0..cloud.len())];
        if u != v {
            pairs.push((u, v));
        }
    }
    for (u, v) in pairs {
        for j in 1..n {
            let mut s = vec![u; j];
            s.extend(std::iter::repeat_n(v, n - j));
            sets.push(s);
        }
    }
    let random: Vec<Vec<Complex64>> = (0..cfg.tau_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(cfg.rng_seed, step, i as u64);
            (0..n)
                .map(|_| cloud[rng.gen_range(0..cloud.len())])
                .collect()
        })
        .collect();
    sets.extend(random);
    sets
}

/// One stochastic step of `tau_n`, deterministic in `cfg.rng_seed`.
/// For `n = 1` this is exactly [`theta_step`].
pub fn tau_step(
    t: &DiffOperator,
    n: usize,
    cloud: &PointCloud,
    cfg: &IterationConfig,
    r_max: f64,
) -> Result<StepOutput> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if n == 1 {
        return Ok(theta_step(t, n, cloud, r_max, cfg.root_tol));
    }
    let b = theta_kernel(t, n);
    let sets = tau_multisets(n, cloud.points(), cloud.points(), cfg, 0);
    let images = sets
        .par_iter()
        .map(|s| multiset_roots(t, &b, s, cfg.root_tol))
        .collect();
    Ok(collect_step(cloud, images, r_max))
}

/// Starting cloud: zeros of `p_n^T` (full mode) or the diagonal
/// `Psi(z, z)`, i.e. the fixed points of `Theta` (Hutchinson mode). A
/// diagonal that vanishes identically is replaced by that of `Psi / (x - z)^s`.
/// The Hutchinson seed falls back to `p_n^T` when the diagonal has no zeros.
pub fn seed_points(t: &DiffOperator, n: usize, mode: Mode, eps: f64) -> Result<PointCloud> {
    let eigen_roots = || -> Result<Vec<Complex64>> {
        let p = t.eigenpolynomial(n)?;
        Ok(p.roots(1e-12).map(|r| r.roots).unwrap_or_default())
    };
    let points = match mode {
        Mode::Full => eigen_roots()?,
        Mode::Hutchinson => {
            let diag = theta_kernel(t, n).diagonal();
            if diag.degree().unwrap_or(0) == 0 {
                eigen_roots()?
            } else {
                roots_or_best(&diag, 1e-12)
            }
        }
    };
    Ok(PointCloud::new(points, eps))
}

/// Iterates from [`seed_points`] until the cloud stops moving, escapes or
/// empties.
pub fn minimal_invariant_set(
    t: &DiffOperator,
    n: usize,
    mode: Mode,
    cfg: &IterationConfig,
) -> Result<IterationReport> {
    cfg.validate()?;
    let seed = seed_points(t, n, mode, cfg.eps)?;
    minimal_invariant_set_from(t, n, mode, &seed, cfg)
}

/// Cells seen so far. Each keeps its first representative, so clouds only
/// ever grow, and counts how many points reaching it were propagated.
struct CellMap {
    cells: HashMap<CellKey, (Complex64, u32)>,
    eps: f64,
    visits: u32,
}

impl CellMap {
    fn new(eps: f64, visits: u32) -> Self {
        Self {
            cells: HashMap::new(),
            eps,
            visits,
        }
    }

    /// Inserts candidates in canonical order. Returns the points that
    /// opened new cells and the points to propagate (new cells plus
    /// revisits within the allowance), both sorted.
    fn absorb(&mut self, mut candidates: Vec<Complex64>) -> (Vec<Complex64>, Vec<Complex64>) {
        candidates.par_sort_unstable_by(lex_cmp);
        let mut fresh = Vec::new();
        let mut propagate = Vec::new();
        for p in candidates {
            match self.cells.entry(cell_of(p, self.eps)) {
                Entry::Vacant(e) => {
                    e.insert((p, 1));
                    fresh.push(p);
                    propagate.push(p);
                }
                Entry::Occupied(mut e) => {
                    let slot = e.get_mut();
                    if slot.1 < self.visits && slot.0 != p {
                        slot.1 += 1;
                        propagate.push(p);
                    }
                }
            }
        }
        (fresh, propagate)
    }

    fn points(&self) -> Vec<Complex64> {
        let mut pts: Vec<Complex64> = self.cells.values().map(|v| v.0).collect();
        pts.par_sort_unstable_by(lex_cmp);
        pts
    }
}

/// [`minimal_invariant_set`] from an explicit starting cloud.
pub fn minimal_invariant_set_from(
    t: &DiffOperator,
    n: usize,
    mode: Mode,
    seed: &PointCloud,
    cfg: &IterationConfig,
) -> Result<IterationReport> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    let r_max = cfg.r_max.unwrap_or_else(|| default_r_max(t, seed));
    let b = theta_kernel(t, n);
    let mut map = CellMap::new(cfg.eps, cfg.cell_visits);
    let (_, mut frontier) = map.absorb(
        seed.points()
            .iter()
            .copied()
            .filter(|&z| !escapes(z, r_max))
            .collect(),
    );
    let mut points = map.points();
    let mut deltas = Vec::new();
    let mut escaped_fraction = 0.0;
    let full = mode == Mode::Full && n > 1;

    let finish =
        |status, points: Vec<Complex64>, deltas, escaped_fraction, steps| IterationReport {
            status,
            cloud: PointCloud::from_snapped(points, cfg.eps),
            deltas,
            escaped_fraction,
            steps,
            r_max,
        };

    if points.is_empty() {
        return Ok(finish(IterationStatus::Empty, points, deltas, 0.0, 0));
    }

    for step in 1..=cfg.max_iter {
        let images: Vec<Vec<Complex64>> = if full {
            let sets = tau_multisets(n, &points, &frontier, cfg, step as u64);
            sets.par_iter()
                .map(|s| multiset_roots(t, &b, s, cfg.root_tol))
                .collect()
        } else {
            frontier
                .par_iter()
                .map(|&z| match slice_roots(&b, z, cfg.root_tol) {
                    Slice::Zero => Vec::new(),
                    Slice::Roots(r) => r,
                })
                .collect()
        };

        let mut escaped = 0usize;
        let mut candidates = Vec::new();
        for x in images.into_iter().flatten() {
            if escapes(x, r_max) {
                escaped += 1;
            } else {
                candidates.push(x);
            }
        }
        let previous = points;
        let (fresh, propagate) = map.absorb(candidates);
        frontier = propagate;
        let unseen = escaped + fresh.len();
        escaped_fraction = if unseen == 0 {
            0.0
        } else {
            escaped as f64 / unseen as f64
        };

        let delta = if fresh.is_empty() {
            0.0
        } else {
            let index = GridIndex::new(&previous);
            fresh
                .par_iter()
                .map(|&p| index.nearest_distance(p))
                .reduce(|| 0.0, f64::max)
        };
        deltas.push(delta);
        points = if fresh.is_empty() {
            previous
        } else {
            map.points()
        };

        if escaped_fraction > 0.5 {
            return Ok(finish(
                IterationStatus::Unbounded,
                points,
                deltas,
                escaped_fraction,
                step,
            ));
        }
        let w = cfg.stall_window;
        if deltas.len() >= w && deltas[deltas.len() - w..].iter().all(|&d| d < cfg.eps) {
            return Ok(finish(
                IterationStatus::Converged,
                points,
                deltas,
                escaped_fraction,
                step,
            ));
        }
    }
    let steps = cfg.max_iter;
    Ok(finish(
        IterationStatus::MaxIterReached,
        points,
        deltas,
        escaped_fraction,
        steps,
    ))
}

fn is_root_of_unity(w: Complex64, max_q: u32, tol: f64) -> bool {
    if (w.norm() - 1.0).abs() > tol {
        return false;
    }
    let turns = w.arg() / (2.0 * std::f64::consts::PI);
    (1..=max_q).any(|q| {
        let k = (turns * q as f64).round();
        let target = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k / q as f64);
        (w - target).norm() <= tol
    })
}

/// Spectral and one-point hypotheses for existence and (un)boundedness of
/// the minimal invariant set.
pub fn existence_check(t: &DiffOperator, n: usize) -> Result<ExistenceReport> {
    let spectrum = t.symbol_eigenvalues(n)?.lambdas;
    let moduli: Vec<f64> = spectrum.iter().map(|l| l.norm()).collect();
    let top = moduli.iter().copied().fold(0.0, f64::max);
    let close = |a: f64| (a - top).abs() <= RESONANCE_REL_TOL * top.max(f64::MIN_POSITIVE);
    let at_top: Vec<usize> = (0..moduli.len()).filter(|&i| close(moduli[i])).collect();
    let dominant_index = match at_top[..] {
        [i] if top > 0.0 => Some(i),
        _ => None,
    };
    let unique_dominant = dominant_index.is_some_and(|i| i >= 1);
    let unbounded_hint = dominant_index.is_some_and(|i| i < n);

    let lambda_n = spectrum[n];
    let infinite_hint = lambda_n.norm() > 0.0
        && spectrum[..n].iter().any(|&l| {
            l.norm() > RESONANCE_REL_TOL * lambda_n.norm()
                && !is_root_of_unity(l / lambda_n, 64, RESONANCE_REL_TOL)
        });

    let one_point_free = match one_point_sets(t, n, 1e-8) {
        Ok(r) => !r.infinite_family && r.points.is_empty(),
        Err(Error::ConstantPsi) => false,
        Err(e) => return Err(e),
    };
    Ok(ExistenceReport {
        spectrum,
        unique_dominant,
        dominant_index,
        one_point_free,
        unbounded_hint,
        infinite_hint,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// Largest distance from the cloud to the filled fundamental polygon.
    pub sup_out: f64,
    /// Largest distance from a polygon vertex to the cloud.
    pub coverage: f64,
    pub report: IterationReport,
}

/// Full-mode runs for each `n` measured against the fundamental polygon.
///
/// Operators that are not exactly solvable have no eigenpolynomial to
/// seed from; their runs start from the Hutchinson seed instead.
pub fn convergence_study(
    t: &DiffOperator,
    ns: &[usize],
    cfg: &IterationConfig,
) -> Result<Vec<ConvergenceRow>> {
    if !t.is_nondegenerate()? {
        return Err(Error::Precondition("operator is degenerate".into()));
    }
    let polygon = t.fundamental_polygon()?;
    ns.iter()
        .map(|&n| {
            let seed = match seed_points(t, n, Mode::Full, cfg.eps) {
                Ok(s) => s,
                Err(Error::NotExactlySolvable(_)) => seed_points(t, n, Mode::Hutchinson, cfg.eps)?,
                Err(e) => return Err(e),
            };
            let report = minimal_invariant_set_from(t, n, Mode::Full, &seed, cfg)?;
            let (sup_out, coverage) = if report.cloud.is_empty() {
                (f64::INFINITY, f64::INFINITY)
            } else {
                dist_to_polygon(&report.cloud, &polygon)?
            };
            Ok(ConvergenceRow {
                n,
                sup_out,
                coverage,
                report,
            })
        })
        .collect()
}
