//! Convex cells in two and three dimensions, overlap volumes, and the two
//! concrete domain families: the star-shaped two-piece domain and the
//! snowflake tree of triangles.

pub mod complex;
pub mod hull3;
pub mod snowflake;
pub mod star;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use hull3::{convex_hull, Hull3, P3};

pub use complex::{union_volume, WhitneyChain, WhitneyTriple};
pub use snowflake::{build_snowflake_tree, FractalTree, FractalTreeSpec, LevelInfo, TreeCell};
pub use star::{build_star_domain, StarDomain, StarDomainSpec};

/// Cells with volume at or below this are rejected.
pub const VOLUME_TOLERANCE: f64 = 1e-12;

/// Relative tolerance used to decide whether a point is on a cell boundary.
const BOUNDARY_REL_EPS: f64 = 1e-10;

pub type P2 = [f64; 2];

#[derive(Debug, Clone)]
enum Shape {
    /// Counter-clockwise hull vertices without collinear points.
    Polygon(Vec<P2>),
    Polytope(Hull3),
}

/// A bounded convex polytope in dimension 2 or 3.
#[derive(Debug, Clone)]
pub struct ConvexCell {
    n: usize,
    vertices: Vec<Vec<f64>>,
    shape: Shape,
    volume: f64,
    diameter: f64,
}

fn cross2(o: P2, a: P2, b: P2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn bbox_scale(points: &[Vec<f64>]) -> f64 {
    let n = points[0].len();
    (0..n)
        .map(|k| {
            let lo = points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
            (hi - lo).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Andrew's monotone chain; returns the strict hull counter-clockwise.
pub fn hull_2d(points: &[P2]) -> Vec<P2> {
    let mut pts: Vec<P2> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<P2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross2(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<P2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross2(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Shoelace area; positive for counter-clockwise polygons.
pub fn polygon_area(poly: &[P2]) -> f64 {
    let m = poly.len();
    if m < 3 {
        return 0.0;
    }
    0.5 * (0..m)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % m];
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
}

/// Sutherland–Hodgman clipping of `subject` by the convex counter-clockwise
/// polygon `clip`.
pub fn clip_convex(subject: &[P2], clip: &[P2]) -> Vec<P2> {
    let mut output = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % m];
        let input = std::mem::take(&mut output);
        let k = input.len();
        for j in 0..k {
            let cur = input[j];
            let prev = input[(j + k - 1) % k];
            let dc = cross2(a, b, cur);
            let dp = cross2(a, b, prev);
            if dc >= 0.0 {
                if dp < 0.0 {
                    output.push(segment_point(prev, cur, dp, dc));
                }
                output.push(cur);
            } else if dp >= 0.0 {
                output.push(segment_point(prev, cur, dp, dc));
            }
        }
    }
    output
}

fn segment_point(p: P2, q: P2, dp: f64, dq: f64) -> P2 {
    let t = dp / (dp - dq);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

fn max_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d2: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b).powi(2)).sum();
            best = best.max(d2);
        }
    }
    best.sqrt()
}

impl ConvexCell {
    /// Builds a cell from its vertex list. Every input point must lie on the
    /// boundary of the convex hull of the list.
    pub fn from_vertices(vertices: Vec<Vec<f64>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidCell("empty vertex list".into()));
        }
        let n = vertices[0].len();
        if n != 2 && n != 3 {
            return Err(Error::UnsupportedDimension(n));
        }
        for v in &vertices {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: v.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidCell("non-finite coordinate".into()));
            }
        }
        match n {
            2 => Self::from_points_2d(&vertices.iter().map(|v| [v[0], v[1]]).collect::<Vec<_>>()),
            _ => Self::from_points_3d(&vertices.iter().map(|v| [v[0], v[1], v[2]]).collect::<Vec<_>>()),
        }
    }

    pub fn from_points_2d(points: &[P2]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidCell("empty vertex list".into()));
        }
        let hull = hull_2d(points);
        let area = polygon_area(&hull);
        if !(area > VOLUME_TOLERANCE) {
            return Err(Error::DegenerateCell { volume: area.max(0.0) });
        }
        let vertices: Vec<Vec<f64>> = points.iter().map(|p| p.to_vec()).collect();
        let eps = BOUNDARY_REL_EPS * bbox_scale(&vertices);
        let m = hull.len();
        for p in points {
            let depth = (0..m)
                .map(|i| {
                    let a = hull[i];
                    let b = hull[(i + 1) % m];
                    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                    cross2(a, b, *p) / len
                })
                .fold(f64::INFINITY, f64::min);
            if depth > eps {
                return Err(Error::InvalidCell(format!(
                    "vertex ({}, {}) lies strictly inside the hull",
                    p[0], p[1]
                )));
            }
        }
        let hull_vertices: Vec<Vec<f64>> = hull.iter().map(|p| p.to_vec()).collect();
        let diameter = max_pairwise_distance(&hull_vertices);
        Ok(Self { n: 2, vertices, shape: Shape::Polygon(hull), volume: area, diameter })
    }

    pub fn from_points_3d(points: &[P3]) -> Result<Self> {
        let full = convex_hull(points)?;
        let volume = full.volume();
        if !(volume > VOLUME_TOLERANCE) {
            return Err(Error::DegenerateCell { volume: volume.max(0.0) });
        }
        for p in points {
            if full.max_signed_distance(*p) < -full.eps {
                return Err(Error::InvalidCell(format!(
                    "vertex ({}, {}, {}) lies strictly inside the hull",
                    p[0], p[1], p[2]
                )));
            }
        }
        // Rebuild over the extreme points only so the stored hull is compact.
        let extreme: Vec<P3> = full.vertex_indices().into_iter().map(|i| points[i]).collect();
        let hull = convex_hull(&extreme)?;
        let hull_vertices: Vec<Vec<f64>> = extreme.iter().map(|p| p.to_vec()).collect();
        let diameter = max_pairwise_distance(&hull_vertices);
        Ok(Self {
            n: 3,
            vertices: points.iter().map(|p| p.to_vec()).collect(),
            shape: Shape::Polytope(hull),
            volume,
            diameter,
        })
    }

    /// Axis-aligned box `[lo, hi]` in two or three dimensions.
    pub fn aabb(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), found: hi.len() });
        }
        match lo.len() {
            2 => Self::from_points_2d(&[[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]]),
            3 => {
                let mut pts = Vec::with_capacity(8);
                for &x in &[lo[0], hi[0]] {
                    for &y in &[lo[1], hi[1]] {
                        for &z in &[lo[2], hi[2]] {
                            pts.push([x, y, z]);
                        }
                    }
                }
                Self::from_points_3d(&pts)
            }
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// The vertex list as supplied at construction.
    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Extreme points of the cell (counter-clockwise in 2D).
    pub fn hull_vertices(&self) -> Vec<Vec<f64>> {
        match &self.shape {
            Shape::Polygon(h) => h.iter().map(|p| p.to_vec()).collect(),
            Shape::Polytope(h) => h.points.iter().map(|p| p.to_vec()).collect(),
        }
    }

    /// Counter-clockwise polygon, for 2D cells.
    pub fn polygon(&self) -> Option<&[P2]> {
        match &self.shape {
            Shape::Polygon(h) => Some(h),
            Shape::Polytope(_) => None,
        }
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    fn eps(&self) -> f64 {
        BOUNDARY_REL_EPS * self.diameter
    }

    /// Closed-set membership with a small boundary tolerance.
    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.shape {
            Shape::Polygon(h) => {
                let m = h.len();
                let p = [x[0], x[1]];
                (0..m).all(|i| {
                    let a = h[i];
                    let b = h[(i + 1) % m];
                    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                    cross2(a, b, p) / len >= -self.eps()
                })
            }
            Shape::Polytope(h) => h.max_signed_distance([x[0], x[1], x[2]]) <= h.eps,
        }
    }

    /// Image under `x -> lambda * x`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::from_vertices(
            self.vertices.iter().map(|v| v.iter().map(|c| c * lambda).collect()).collect(),
        )
    }

    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: shift.len() });
        }
        Self::from_vertices(
            self.vertices
                .iter()
                .map(|v| v.iter().zip(shift).map(|(c, s)| c + s).collect())
                .collect(),
        )
    }

    /// Bounding box as `(lo, hi)`.
    pub fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        let hv = self.hull_vertices();
        let lo = (0..self.n).map(|k| hv.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min)).collect();
        let hi = (0..self.n).map(|k| hv.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
        (lo, hi)
    }

    /// True if the cell is an axis-aligned rectangle; returns its corners.
    pub fn as_rectangle(&self) -> Option<(P2, P2)> {
        let h = self.polygon()?;
        if h.len() != 4 {
            return None;
        }
        let (lo, hi) = self.bbox();
        let area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
        if (area - self.volume).abs() <= 1e-12 * area {
            Some(([lo[0], lo[1]], [hi[0], hi[1]]))
        } else {
            None
        }
    }
}

pub fn cell_volume(cell: &ConvexCell) -> f64 {
    cell.volume()
}

pub fn cell_diameter(cell: &ConvexCell) -> f64 {
    cell.diameter()
}

fn check_same_dim(c1: &ConvexCell, c2: &ConvexCell) -> Result<()> {
    if c1.n != c2.n {
        return Err(Error::DimensionMismatch { expected: c1.n, found: c2.n });
    }
    Ok(())
}

/// The intersection cell, or `None` when the overlap has no volume.
pub fn intersect_cells(c1: &ConvexCell, c2: &ConvexCell) -> Result<Option<ConvexCell>> {
    check_same_dim(c1, c2)?;
    match (&c1.shape, &c2.shape) {
        (Shape::Polygon(a), Shape::Polygon(b)) => {
            let clipped = clip_convex(a, b);
            if polygon_area(&clipped) <= VOLUME_TOLERANCE {
                return Ok(None);
            }
            Ok(ConvexCell::from_points_2d(&hull_2d(&clipped)).ok())
        }
        (Shape::Polytope(a), Shape::Polytope(b)) => {
            let pts = polytope_intersection_points(a, b);
            if pts.len() < 4 {
                return Ok(None);
            }
            match convex_hull(&pts) {
                Ok(h) if h.volume() > VOLUME_TOLERANCE => {
                    let extreme: Vec<P3> = h.vertex_indices().into_iter().map(|i| pts[i]).collect();
                    Ok(ConvexCell::from_points_3d(&extreme).ok())
                }
                _ => Ok(None),
            }
        }
        _ => unreachable!("dimensions checked"),
    }
}

/// Candidate vertices of `a ∩ b`: vertices of each inside the other and
/// crossings of each boundary edge with the other's facet planes.
fn polytope_intersection_points(a: &Hull3, b: &Hull3) -> Vec<P3> {
    let mut out = Vec::new();
    for (x, y) in [(a, b), (b, a)] {
        for &p in &x.points {
            if y.max_signed_distance(p) <= y.eps {
                out.push(p);
            }
        }
        for (i, j) in x.edges() {
            let (p, q) = (x.points[i], x.points[j]);
            for plane in &y.planes {
                let dp = plane.signed_distance(p);
                let dq = plane.signed_distance(q);
                if (dp > 0.0) == (dq > 0.0) || dp == dq {
                    continue;
                }
                let t = dp / (dp - dq);
                let r = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]), p[2] + t * (q[2] - p[2])];
                if y.max_signed_distance(r) <= y.eps && x.max_signed_distance(r) <= x.eps {
                    out.push(r);
                }
            }
        }
    }
    out
}

/// Exact overlap volume. Both 2D and 3D cells carry their half-space
/// description, so clipping is always available.
pub fn intersection_volume(c1: &ConvexCell, c2: &ConvexCell) -> Result<f64> {
    Ok(intersect_cells(c1, c2)?.map_or(0.0, |c| c.volume()))
}

/// Sampled estimate with its one-sigma standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Monte-Carlo estimate of `|c1 ∩ c2|` by uniform sampling in the bounding
/// box of `c1`.
pub fn monte_carlo_intersection(
    c1: &ConvexCell,
    c2: &ConvexCell,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_same_dim(c1, c2)?;
    monte_carlo_volume(c1.n, c1.bbox(), samples, seed, |x| c1.contains(x) && c2.contains(x))
}

/// Monte-Carlo volume of `{x in box : inside(x)}`.
pub fn monte_carlo_volume<F: Fn(&[f64]) -> bool>(
    n: usize,
    bbox: (Vec<f64>, Vec<f64>),
    samples: usize,
    seed: u64,
    inside: F,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameter("Monte-Carlo needs at least one sample".into()));
    }
    let (lo, hi) = bbox;
    let box_volume: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; n];
    let mut hits = 0usize;
    for _ in 0..samples {
        for k in 0..n {
            x[k] = lo[k] + (hi[k] - lo[k]) * rng.random::<f64>();
        }
        if inside(&x) {
            hits += 1;
        }
    }
    let frac = hits as f64 / samples as f64;
    Ok(McEstimate {
        value: box_volume * frac,
        std_error: box_volume * (frac * (1.0 - frac) / samples as f64).sqrt(),
    })
}
