//! Incremental convex hull in three dimensions.
//!
//! Facets are triangles with outward normals. Points within `eps` of a facet
//! plane are treated as not visible, so coplanar points extend faces instead
//! of creating slivers.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub type P3 = [f64; 3];

pub(crate) fn sub(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: P3, b: P3) -> P3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: P3) -> f64 {
    dot(a, a).sqrt()
}

/// Outward half-space `normal · x <= offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: P3,
    pub offset: f64,
}

impl Plane {
    pub fn signed_distance(&self, x: P3) -> f64 {
        dot(self.normal, x) - self.offset
    }
}

#[derive(Debug, Clone)]
struct Face {
    v: [usize; 3],
    plane: Plane,
    alive: bool,
}

/// Result of a hull computation: the points referenced by `facets` are the
/// original input indices.
#[derive(Debug, Clone)]
pub struct Hull3 {
    pub points: Vec<P3>,
    pub facets: Vec<[usize; 3]>,
    pub planes: Vec<Plane>,
    pub eps: f64,
}

fn plane_through(points: &[P3], v: [usize; 3]) -> Option<Plane> {
    let n = cross(sub(points[v[1]], points[v[0]]), sub(points[v[2]], points[v[0]]));
    let len = norm(n);
    if len == 0.0 || !len.is_finite() {
        return None;
    }
    let normal = [n[0] / len, n[1] / len, n[2] / len];
    Some(Plane { normal, offset: dot(normal, points[v[0]]) })
}

fn bbox_diagonal(points: &[P3]) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    norm(sub(hi, lo))
}

pub fn convex_hull(points: &[P3]) -> Result<Hull3> {
    if points.len() < 4 {
        return Err(Error::DegenerateCell { volume: 0.0 });
    }
    let scale = bbox_diagonal(points);
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::DegenerateCell { volume: 0.0 });
    }
    let eps = 1e-10 * scale;

    // Initial simplex from extreme points.
    let i0 = (0..points.len())
        .min_by(|&a, &b| points[a][0].total_cmp(&points[b][0]))
        .unwrap();
    let i1 = (0..points.len())
        .max_by(|&a, &b| {
            norm(sub(points[a], points[i0])).total_cmp(&norm(sub(points[b], points[i0])))
        })
        .unwrap();
    let axis = sub(points[i1], points[i0]);
    let line_dist = |k: usize| norm(cross(axis, sub(points[k], points[i0])));
    let i2 = (0..points.len())
        .max_by(|&a, &b| line_dist(a).total_cmp(&line_dist(b)))
        .unwrap();
    if line_dist(i2) <= eps * norm(axis) {
        return Err(Error::DegenerateCell { volume: 0.0 });
    }
    let base = plane_through(points, [i0, i1, i2]).ok_or(Error::DegenerateCell { volume: 0.0 })?;
    let i3 = (0..points.len())
        .max_by(|&a, &b| {
            base.signed_distance(points[a])
                .abs()
                .total_cmp(&base.signed_distance(points[b]).abs())
        })
        .unwrap();
    if base.signed_distance(points[i3]).abs() <= eps {
        return Err(Error::DegenerateCell { volume: 0.0 });
    }

    let simplex = [i0, i1, i2, i3];
    let centroid = {
        let mut c = [0.0; 3];
        for &i in &simplex {
            for k in 0..3 {
                c[k] += 0.25 * points[i][k];
            }
        }
        c
    };
    let mut faces: Vec<Face> = Vec::new();
    for tri in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        let mut v = tri;
        let mut plane = plane_through(points, v).ok_or(Error::DegenerateCell { volume: 0.0 })?;
        if plane.signed_distance(centroid) > 0.0 {
            v.swap(1, 2);
            plane = plane_through(points, v).ok_or(Error::DegenerateCell { volume: 0.0 })?;
        }
        faces.push(Face { v, plane, alive: true });
    }

    for (idx, &p) in points.iter().enumerate() {
        if simplex.contains(&idx) {
            continue;
        }
        let visible: Vec<usize> = faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.alive && f.plane.signed_distance(p) > eps)
            .map(|(i, _)| i)
            .collect();
        if visible.is_empty() {
            continue;
        }
        // Directed edge -> owning face, over live faces.
        let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
        for (fi, f) in faces.iter().enumerate().filter(|(_, f)| f.alive) {
            for e in 0..3 {
                owner.insert((f.v[e], f.v[(e + 1) % 3]), fi);
            }
        }
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        for &fi in &visible {
            let v = faces[fi].v;
            for e in 0..3 {
                let (a, b) = (v[e], v[(e + 1) % 3]);
                match owner.get(&(b, a)) {
                    Some(&other) if !visible.contains(&other) => horizon.push((a, b)),
                    Some(_) => {}
                    None => return Err(Error::InvalidCell("hull lost closure".into())),
                }
            }
        }
        for &fi in &visible {
            faces[fi].alive = false;
        }
        for (a, b) in horizon {
            let v = [a, b, idx];
            let plane = plane_through(points, v)
                .ok_or_else(|| Error::InvalidCell("degenerate hull facet".into()))?;
            faces.push(Face { v, plane, alive: true });
        }
    }

    let live: Vec<&Face> = faces.iter().filter(|f| f.alive).collect();
    Ok(Hull3 {
        points: points.to_vec(),
        facets: live.iter().map(|f| f.v).collect(),
        planes: live.iter().map(|f| f.plane).collect(),
        eps,
    })
}

impl Hull3 {
    pub fn volume(&self) -> f64 {
        let o = self.points[self.facets[0][0]];
        self.facets
            .iter()
            .map(|f| {
                let a = sub(self.points[f[0]], o);
                let b = sub(self.points[f[1]], o);
                let c = sub(self.points[f[2]], o);
                dot(a, cross(b, c)) / 6.0
            })
            .sum()
    }

    /// Indices of points that are hull vertices (sorted, deduplicated).
    pub fn vertex_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.facets.iter().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Largest signed plane distance; `<= eps` means inside or on the boundary.
    pub fn max_signed_distance(&self, x: P3) -> f64 {
        self.planes
            .iter()
            .map(|pl| pl.signed_distance(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Undirected edges of the triangulated boundary.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .facets
            .iter()
            .flat_map(|f| (0..3).map(move |k| (f[k].min(f[(k + 1) % 3]), f[k].max(f[(k + 1) % 3]))))
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }
}
