//! Planar geometry on point clouds: snapping, convex hulls, Hausdorff
//! distance and distance to a filled convex polygon.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::lex_cmp;

/// Finite point set with at most one point per `resolution`-sized grid cell,
/// sorted lexicographically by (re, im).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<Complex64>,
    resolution: f64,
}

pub(crate) type CellKey = (i64, i64);

pub(crate) fn cell_of(p: Complex64, eps: f64) -> CellKey {
    ((p.re / eps).floor() as i64, (p.im / eps).floor() as i64)
}

impl PointCloud {
    /// Snaps `points` onto the `eps` grid.
    pub fn new(points: Vec<Complex64>, eps: f64) -> Self {
        assert!(eps > 0.0, "grid resolution must be positive");
        Self {
            points: snap_points(points, eps),
            resolution: eps,
        }
    }

    pub fn empty(eps: f64) -> Self {
        Self::new(Vec::new(), eps)
    }

    /// Caller guarantees `points` is already snapped at `eps` and sorted.
    pub(crate) fn from_snapped(points: Vec<Complex64>, eps: f64) -> Self {
        debug_assert!(points.windows(2).all(|w| lex_cmp(&w[0], &w[1]).is_lt()));
        Self {
            points,
            resolution: eps,
        }
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Complex64> {
        self.points
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Union with another cloud, re-snapped at this cloud's resolution.
    pub fn union(&self, other: &PointCloud) -> PointCloud {
        let mut pts = self.points.clone();
        pts.extend_from_slice(&other.points);
        PointCloud::new(pts, self.resolution)
    }

    pub fn max_modulus(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }
}

/// One representative per `eps` cell (the lexicographically smallest),
/// sorted lexicographically. Idempotent and independent of input order.
pub fn snap_points(mut points: Vec<Complex64>, eps: f64) -> Vec<Complex64> {
    points.retain(|p| p.re.is_finite() && p.im.is_finite());
    points.sort_by(lex_cmp);
    let mut seen: HashMap<CellKey, ()> = HashMap::with_capacity(points.len());
    points.retain(|&p| seen.insert(cell_of(p, eps), ()).is_none());
    points
}

/// Re-snaps a cloud at `eps`.
pub fn grid_snap(cloud: &PointCloud, eps: f64) -> PointCloud {
    PointCloud::new(cloud.points.clone(), eps)
}

/// Convex polygon with counter-clockwise vertices; one vertex is a point and
/// two vertices a segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    pub vertices: Vec<Complex64>,
}

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Andrew's monotone chain. Collinear and duplicate points are dropped
/// with a tolerance of `1e-12` relative to the input extent.
pub fn convex_hull(points: &[Complex64]) -> ConvexPolygon {
    let mut pts: Vec<Complex64> = points.to_vec();
    pts.sort_by(lex_cmp);
    let extent = pts
        .iter()
        .map(|p| p.re.abs().max(p.im.abs()))
        .fold(0.0, f64::max)
        .max(1.0);
    let tol = 1e-12 * extent;
    pts.dedup_by(|a, b| (*a - *b).norm() <= tol);
    if pts.len() <= 2 {
        return ConvexPolygon { vertices: pts };
    }
    let area_tol = tol * extent;
    let mut hull: Vec<Complex64> = Vec::with_capacity(2 * pts.len());
    for &p in pts.iter() {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= area_tol {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower
            && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= area_tol
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    ConvexPolygon { vertices: hull }
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

impl ConvexPolygon {
    pub fn contains(&self, p: Complex64) -> bool {
        let v = &self.vertices;
        match v.len() {
            0 => false,
            1 | 2 => self.distance(p) <= 1e-12,
            n => (0..n).all(|i| cross(v[i], v[(i + 1) % n], p) >= -1e-12),
        }
    }

    /// Distance to the filled polygon (zero inside).
    pub fn distance(&self, p: Complex64) -> f64 {
        let v = &self.vertices;
        match v.len() {
            0 => f64::INFINITY,
            1 => (p - v[0]).norm(),
            2 => segment_distance(p, v[0], v[1]),
            n => {
                if (0..n).all(|i| cross(v[i], v[(i + 1) % n], p) >= 0.0) {
                    0.0
                } else {
                    (0..n)
                        .map(|i| segment_distance(p, v[i], v[(i + 1) % n]))
                        .fold(f64::INFINITY, f64::min)
                }
            }
        }
    }
}

/// Uniform-grid bucket index for nearest-neighbor distance queries.
pub struct GridIndex {
    cell: f64,
    buckets: HashMap<CellKey, Vec<Complex64>>,
    lo: CellKey,
    hi: CellKey,
}

impl GridIndex {
    pub fn new(points: &[Complex64]) -> Self {
        assert!(!points.is_empty(), "grid index needs at least one point");
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in points {
            xmin = xmin.min(p.re);
            xmax = xmax.max(p.re);
            ymin = ymin.min(p.im);
            ymax = ymax.max(p.im);
        }
        let extent = (xmax - xmin).max(ymax - ymin);
        let cell = if extent > 0.0 {
            extent / (points.len() as f64).sqrt().max(1.0)
        } else {
            1.0
        };
        let mut buckets: HashMap<CellKey, Vec<Complex64>> = HashMap::new();
        for &p in points {
            buckets.entry(cell_of(p, cell)).or_default().push(p);
        }
        let lo = cell_of(Complex64::new(xmin, ymin), cell);
        let hi = cell_of(Complex64::new(xmax, ymax), cell);
        Self {
            cell,
            buckets,
            lo,
            hi,
        }
    }

    /// Distance from `p` to the nearest indexed point.
    pub fn nearest_distance(&self, p: Complex64) -> f64 {
        let (cx, cy) = cell_of(p, self.cell);
        let dx = (self.lo.0 - cx).max(cx - self.hi.0).max(0);
        let dy = (self.lo.1 - cy).max(cy - self.hi.1).max(0);
        let r_start = dx.max(dy);
        let r_end = (cx - self.lo.0)
            .abs()
            .max((cx - self.hi.0).abs())
            .max((cy - self.lo.1).abs())
            .max((cy - self.hi.1).abs());
        let mut best = f64::INFINITY;
        let mut r = r_start;
        while r <= r_end {
            self.visit_ring(cx, cy, r, |q| {
                let d = (p - q).norm();
                if d < best {
                    best = d;
                }
            });
            if best <= r as f64 * self.cell {
                break;
            }
            r += 1;
        }
        best
    }

    fn visit_ring(&self, cx: i64, cy: i64, r: i64, mut f: impl FnMut(Complex64)) {
        let mut visit = |x: i64, y: i64| {
            if x < self.lo.0 || x > self.hi.0 || y < self.lo.1 || y > self.hi.1 {
                return;
            }
            if let Some(b) = self.buckets.get(&(x, y)) {
                for &q in b {
                    f(q);
                }
            }
        };
        if r == 0 {
            visit(cx, cy);
            return;
        }
        let x0 = (cx - r).max(self.lo.0);
        let x1 = (cx + r).min(self.hi.0);
        for x in x0..=x1 {
            visit(x, cy - r);
            visit(x, cy + r);
        }
        let y0 = (cy - r + 1).max(self.lo.1);
        let y1 = (cy + r - 1).min(self.hi.1);
        for y in y0..=y1 {
            visit(cx - r, y);
            visit(cx + r, y);
        }
    }
}

/// `max_{a in A} min_{b in B} |a - b|`.
pub fn directed_hausdorff(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    let index = GridIndex::new(b);
    Ok(a.par_iter()
        .map(|&p| index.nearest_distance(p))
        .reduce(|| 0.0, f64::max))
}

/// Symmetric Hausdorff distance between two finite clouds.
pub fn hausdorff(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    hausdorff_points(a.points(), b.points())
}

pub fn hausdorff_points(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

/// `(sup_out, coverage)`: the largest distance from a cloud point to the
/// filled polygon, and the largest distance from a polygon vertex to the
/// cloud.
pub fn dist_to_polygon(cloud: &PointCloud, polygon: &ConvexPolygon) -> Result<(f64, f64)> {
    if cloud.is_empty() || polygon.vertices.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sup_out = cloud
        .points()
        .par_iter()
        .map(|&p| polygon.distance(p))
        .reduce(|| 0.0, f64::max);
    let coverage = directed_hausdorff(&polygon.vertices, cloud.points())?;
    Ok((sup_out, coverage))
}
