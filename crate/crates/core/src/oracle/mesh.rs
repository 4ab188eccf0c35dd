//! Conforming triangle meshes of planar domains.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_star_domain, ConvexCell, StarDomainSpec, P2};

/// A conforming triangulation with pure Neumann boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMesh", into = "RawMesh")]
pub struct TriangleMesh {
    nodes: Vec<P2>,
    elements: Vec<[usize; 3]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    nodes: Vec<P2>,
    elements: Vec<[usize; 3]>,
}

impl TryFrom<RawMesh> for TriangleMesh {
    type Error = Error;
    fn try_from(raw: RawMesh) -> Result<Self> {
        TriangleMesh::new(raw.nodes, raw.elements)
    }
}

impl From<TriangleMesh> for RawMesh {
    fn from(m: TriangleMesh) -> Self {
        RawMesh { nodes: m.nodes, elements: m.elements }
    }
}

fn signed_area(a: P2, b: P2, c: P2) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn dist(a: P2, b: P2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl TriangleMesh {
    /// Validates positive element areas, edge manifoldness, absence of
    /// hanging nodes and connectedness.
    pub fn new(nodes: Vec<P2>, elements: Vec<[usize; 3]>) -> Result<Self> {
        let mesh = Self { nodes, elements };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn nodes(&self) -> &[P2] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn element_points(&self, e: usize) -> [P2; 3] {
        let [a, b, c] = self.elements[e];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn element_area(&self, e: usize) -> f64 {
        let [a, b, c] = self.element_points(e);
        signed_area(a, b, c)
    }

    pub fn area(&self) -> f64 {
        (0..self.elements.len()).map(|e| self.element_area(e)).sum()
    }

    pub fn max_edge(&self) -> f64 {
        (0..self.elements.len())
            .flat_map(|e| {
                let [a, b, c] = self.element_points(e);
                [dist(a, b), dist(b, c), dist(c, a)]
            })
            .fold(0.0, f64::max)
    }

    pub fn bbox(&self) -> (P2, P2) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.nodes {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Edges with their element counts, keyed by sorted node pair.
    fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut counts = HashMap::new();
        for el in &self.elements {
            for k in 0..3 {
                let (a, b) = (el[k], el[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Edges that belong to exactly one element, sorted.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = self.edge_counts().into_iter().filter(|(_, c)| *c == 1).map(|(e, _)| e).collect();
        v.sort_unstable();
        v
    }

    fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if n < 3 || self.elements.is_empty() {
            return Err(Error::InvalidMesh("mesh needs at least one element".into()));
        }
        if self.nodes.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::InvalidMesh("non-finite node coordinate".into()));
        }
        let mut used = vec![false; n];
        for (e, el) in self.elements.iter().enumerate() {
            if el.iter().any(|&i| i >= n) {
                return Err(Error::InvalidMesh(format!("element {e} references a missing node")));
            }
            if el[0] == el[1] || el[1] == el[2] || el[0] == el[2] {
                return Err(Error::InvalidMesh(format!("element {e} repeats a node")));
            }
            let area = self.element_area(e);
            if !(area > 0.0) {
                return Err(Error::InvalidMesh(format!("element {e} has non-positive signed area {area:e}")));
            }
            for &i in el {
                used[i] = true;
            }
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(Error::InvalidMesh(format!("node {i} belongs to no element")));
        }
        let counts = self.edge_counts();
        if let Some(((a, b), _)) = counts.iter().find(|(_, c)| **c > 2) {
            return Err(Error::InvalidMesh(format!("edge ({a}, {b}) is shared by more than two elements")));
        }
        self.check_hanging_nodes(&counts)?;
        self.check_connected()
    }

    /// A boundary node lying inside another boundary edge is a hanging node.
    fn check_hanging_nodes(&self, counts: &HashMap<(usize, usize), usize>) -> Result<()> {
        let edges: Vec<(usize, usize)> = counts.iter().filter(|(_, c)| **c == 1).map(|(e, _)| *e).collect();
        let mut nodes: Vec<usize> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        nodes.sort_unstable();
        nodes.dedup();
        let scale = {
            let (lo, hi) = self.bbox();
            dist(lo, hi)
        };
        let tol = 1e-12 * scale;
        for &(a, b) in &edges {
            let (pa, pb) = (self.nodes[a], self.nodes[b]);
            let len = dist(pa, pb);
            let (xlo, xhi) = (pa[0].min(pb[0]) - tol, pa[0].max(pb[0]) + tol);
            let (ylo, yhi) = (pa[1].min(pb[1]) - tol, pa[1].max(pb[1]) + tol);
            for &m in &nodes {
                if m == a || m == b {
                    continue;
                }
                let pm = self.nodes[m];
                if pm[0] < xlo || pm[0] > xhi || pm[1] < ylo || pm[1] > yhi {
                    continue;
                }
                let off = (2.0 * signed_area(pa, pb, pm)).abs() / len;
                if off <= tol {
                    return Err(Error::InvalidMesh(format!("hanging node {m} on edge ({a}, {b})")));
                }
            }
        }
        Ok(())
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.nodes.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for el in &self.elements {
            for k in 1..3 {
                let (ra, rb) = (find(&mut parent, el[0]), find(&mut parent, el[k]));
                parent[ra] = rb;
            }
        }
        let root = find(&mut parent, 0);
        if (1..n).any(|i| find(&mut parent, i) != root) {
            return Err(Error::InvalidMesh("mesh is not connected".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("mesh serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidMesh(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lo: P2,
    pub hi: P2,
}

/// Planar domains the mesher understands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Rectangle { lo: P2, hi: P2 },
    RectangleUnion { rectangles: Vec<Rect> },
    ConvexPolygon { vertices: Vec<P2> },
    /// Polygon star-shaped with respect to `center`.
    StarPolygon { vertices: Vec<P2>, center: P2 },
    /// The planar two-trapezoid star domain with parameter `delta`.
    Star { delta: f64 },
    Disk {
        radius: f64,
        #[serde(default)]
        center: P2,
    },
}

impl DomainSpec {
    /// The union of the given planar cells: a rectangle union when every
    /// cell is an axis-aligned rectangle, the polygon itself for one cell.
    pub fn from_cells(cells: &[ConvexCell]) -> Result<Self> {
        if cells.iter().any(|c| c.dim() != 2) {
            return Err(Error::UnsupportedMeshSpec("only planar cells can be meshed".into()));
        }
        if let Some(rects) = cells.iter().map(|c| c.as_rectangle()).collect::<Option<Vec<_>>>() {
            if rects.len() == 1 {
                return Ok(Self::Rectangle { lo: rects[0].0, hi: rects[0].1 });
            }
            return Ok(Self::RectangleUnion { rectangles: rects.into_iter().map(|(lo, hi)| Rect { lo, hi }).collect() });
        }
        if let [cell] = cells {
            return Ok(Self::ConvexPolygon { vertices: cell.polygon().expect("planar cell").to_vec() });
        }
        Err(Error::UnsupportedMeshSpec("union of non-rectangular cells".into()))
    }

    /// Exact area of the described domain.
    pub fn area(&self) -> Result<f64> {
        Ok(match self {
            Self::Rectangle { lo, hi } => (hi[0] - lo[0]) * (hi[1] - lo[1]),
            Self::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
            Self::Star { delta } => build_star_domain(StarDomainSpec::new(*delta, 2))?.exact_union_volume(),
            Self::ConvexPolygon { vertices } | Self::StarPolygon { vertices, .. } => {
                signed_polygon_area(vertices).abs()
            }
            Self::RectangleUnion { .. } => mesh_domain(self, f64::INFINITY)?.area(),
        })
    }
}

/// Builds a conforming mesh with every edge at most `1.5 h`.
pub fn mesh_domain(spec: &DomainSpec, h: f64) -> Result<TriangleMesh> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("mesh size must be positive, got {h}")));
    }
    match spec {
        DomainSpec::Rectangle { lo, hi } => rectangle_union(&[Rect { lo: *lo, hi: *hi }], h),
        DomainSpec::RectangleUnion { rectangles } => rectangle_union(rectangles, h),
        DomainSpec::ConvexPolygon { vertices } => {
            let hull = crate::geometry::hull_2d(vertices);
            if hull.len() != vertices.len() {
                return Err(Error::UnsupportedMeshSpec("polygon is not strictly convex".into()));
            }
            let c = centroid(&hull);
            fan_mesh(&hull, c, h)
        }
        DomainSpec::StarPolygon { vertices, center } => fan_mesh(&ccw(vertices), *center, h),
        DomainSpec::Star { delta } => {
            let star = build_star_domain(StarDomainSpec::new(*delta, 2))?;
            fan_mesh(&star.union_outline().expect("planar star"), [0.0, 0.0], h)
        }
        DomainSpec::Disk { radius, center } => disk_mesh(*radius, *center, h),
    }
}


fn ccw(vertices: &[P2]) -> Vec<P2> {
    let mut v = vertices.to_vec();
    if signed_polygon_area(&v) < 0.0 {
        v.reverse();
    }
    v
}

fn signed_polygon_area(v: &[P2]) -> f64 {
    let m = v.len();
    (0..m).map(|i| v[i][0] * v[(i + 1) % m][1] - v[(i + 1) % m][0] * v[i][1]).sum::<f64>() / 2.0
}

fn centroid(v: &[P2]) -> P2 {
    let m = v.len() as f64;
    [v.iter().map(|p| p[0]).sum::<f64>() / m, v.iter().map(|p| p[1]).sum::<f64>() / m]
}

/// Pushes a triangle, reordering its nodes counter-clockwise.
fn push_ccw(nodes: &[P2], elements: &mut Vec<[usize; 3]>, t: [usize; 3]) {
    if signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]) > 0.0 {
        elements.push(t);
    } else {
        elements.push([t[0], t[2], t[1]]);
    }
}

fn breakpoints(mut cuts: Vec<f64>, h: f64) -> Vec<f64> {
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = vec![cuts[0]];
    for w in cuts.windows(2) {
        let pieces = if h.is_finite() { ((w[1] - w[0]) / h).ceil().max(1.0) as usize } else { 1 };
        for k in 1..=pieces {
            out.push(if k == pieces { w[1] } else { w[0] + (w[1] - w[0]) * k as f64 / pieces as f64 });
        }
    }
    out
}

/// Tensor grid through every rectangle side, keeping the cells inside the
/// union. Conforming by construction.
fn rectangle_union(rects: &[Rect], h: f64) -> Result<TriangleMesh> {
    if rects.is_empty() || rects.iter().any(|r| !(r.hi[0] > r.lo[0] && r.hi[1] > r.lo[1])) {
        return Err(Error::UnsupportedMeshSpec("rectangles must have positive extent".into()));
    }
    let xs = breakpoints(rects.iter().flat_map(|r| [r.lo[0], r.hi[0]]).collect(), h);
    let ys = breakpoints(rects.iter().flat_map(|r| [r.lo[1], r.hi[1]]).collect(), h);
    let (nx, ny) = (xs.len(), ys.len());
    let inside = |i: usize, j: usize| {
        let c = [(xs[i] + xs[i + 1]) / 2.0, (ys[j] + ys[j + 1]) / 2.0];
        rects.iter().any(|r| r.lo[0] < c[0] && c[0] < r.hi[0] && r.lo[1] < c[1] && c[1] < r.hi[1])
    };
    let mut index = vec![usize::MAX; nx * ny];
    let mut nodes = Vec::new();
    let mut elements = Vec::new();
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            if !inside(i, j) {
                continue;
            }
            for (a, b) in [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
                index[a * ny + b] = 0;
            }
        }
    }
    for i in 0..nx {
        for j in 0..ny {
            if index[i * ny + j] == 0 {
                index[i * ny + j] = nodes.len();
                nodes.push([xs[i], ys[j]]);
            }
        }
    }
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            if !inside(i, j) {
                continue;
            }
            let v00 = index[i * ny + j];
            let v10 = index[(i + 1) * ny + j];
            let v01 = index[i * ny + j + 1];
            let v11 = index[(i + 1) * ny + j + 1];
            elements.push([v00, v10, v11]);
            elements.push([v00, v11, v01]);
        }
    }
    TriangleMesh::new(nodes, elements)
}

/// Uniform subdivision of the fan of triangles `(center, v_i, v_{i+1})`,
/// with the same number of layers in every fan triangle.
fn fan_mesh(vertices: &[P2], center: P2, h: f64) -> Result<TriangleMesh> {
    let m = vertices.len();
    if m < 3 {
        return Err(Error::UnsupportedMeshSpec("polygon needs at least three vertices".into()));
    }
    for i in 0..m {
        if !(signed_area(center, vertices[i], vertices[(i + 1) % m]) > 0.0) {
            return Err(Error::UnsupportedMeshSpec("polygon is not star-shaped with respect to its center".into()));
        }
    }
    let longest = (0..m)
        .flat_map(|i| [dist(center, vertices[i]), dist(vertices[i], vertices[(i + 1) % m])])
        .fold(0.0, f64::max);
    let k = if h.is_finite() { (longest / h).ceil().max(1.0) as usize } else { 1 };
    let offset = |t: usize| if t == 0 { 0 } else { 1 + m * (t - 1) * t / 2 };
    // Node of layer t, fan triangle i, position s in 0..=t (s = t is the next
    // triangle's s = 0).
    let idx = |t: usize, i: usize, s: usize| if t == 0 { 0 } else { offset(t) + (i * t + s) % (m * t) };
    let mut nodes = vec![center];
    for t in 1..=k {
        let f = t as f64 / k as f64;
        for i in 0..m {
            let a = vertices[i];
            let b = vertices[(i + 1) % m];
            for s in 0..t {
                let g = s as f64 / t as f64;
                let p = [a[0] + g * (b[0] - a[0]), a[1] + g * (b[1] - a[1])];
                nodes.push([center[0] + f * (p[0] - center[0]), center[1] + f * (p[1] - center[1])]);
            }
        }
    }
    let mut elements = Vec::new();
    for t in 1..=k {
        for i in 0..m {
            for s in 0..t {
                push_ccw(&nodes, &mut elements, [idx(t, i, s), idx(t, i, s + 1), idx(t - 1, i, s)]);
                if s + 1 < t {
                    push_ccw(&nodes, &mut elements, [idx(t - 1, i, s), idx(t, i, s + 1), idx(t - 1, i, s + 1)]);
                }
            }
        }
    }
    TriangleMesh::new(nodes, elements)
}

/// Polar mesh: ring `t` has `6t` nodes on the circle of radius `tR/k`.
fn disk_mesh(radius: f64, center: P2, h: f64) -> Result<TriangleMesh> {
    if !(radius > 0.0) {
        return Err(Error::UnsupportedMeshSpec("disk radius must be positive".into()));
    }
    let m = 6;
    let k = if h.is_finite() { (radius / h).ceil().max(1.0) as usize } else { 1 };
    let offset = |t: usize| if t == 0 { 0 } else { 1 + m * (t - 1) * t / 2 };
    let idx = |t: usize, i: usize, s: usize| if t == 0 { 0 } else { offset(t) + (i * t + s) % (m * t) };
    let mut nodes = vec![center];
    for t in 1..=k {
        let r = radius * t as f64 / k as f64;
        for j in 0..m * t {
            let th = 2.0 * std::f64::consts::PI * j as f64 / (m * t) as f64;
            nodes.push([center[0] + r * th.cos(), center[1] + r * th.sin()]);
        }
    }
    let mut elements = Vec::new();
    for t in 1..=k {
        for i in 0..m {
            for s in 0..t {
                push_ccw(&nodes, &mut elements, [idx(t, i, s), idx(t, i, s + 1), idx(t - 1, i, s)]);
                if s + 1 < t {
                    push_ccw(&nodes, &mut elements, [idx(t - 1, i, s), idx(t, i, s + 1), idx(t - 1, i, s + 1)]);
                }
            }
        }
    }
    TriangleMesh::new(nodes, elements)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_mesh() {
        let m = mesh_domain(&DomainSpec::Rectangle { lo: [0.0, 0.0], hi: [1.0, 1.0] }, 0.1).unwrap();
        assert_eq!(m.elements().len(), 200);
        assert!((m.area() - 1.0).abs() < 1e-14);
        assert!(m.max_edge() <= 1.5 * 0.1);
    }

    #[test]
    fn disk_boundary_close_to_circle() {
        let h = 0.05;
        let m = mesh_domain(&DomainSpec::Disk { radius: 1.0, center: [0.0, 0.0] }, h).unwrap();
        assert!(m.max_edge() <= 1.5 * h);
        let edges = m.boundary_edges();
        for (a, b) in edges {
            let (pa, pb) = (m.nodes()[a], m.nodes()[b]);
            assert!(((pa[0].hypot(pa[1])) - 1.0).abs() < 1e-12);
            let mid = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
            assert!(1.0 - mid[0].hypot(mid[1]) < 1e-3);
        }
    }

    #[test]
    fn rectangle_union_is_conforming() {
        let spec = DomainSpec::RectangleUnion {
            rectangles: vec![Rect { lo: [0.0, 0.0], hi: [1.0, 1.0] }, Rect { lo: [0.6, 0.3], hi: [1.7, 0.9] }],
        };
        let m = mesh_domain(&spec, 0.1).unwrap();
        assert!((m.area() - (1.0 + 0.7 * 0.6)).abs() < 1e-12);
        assert!(m.max_edge() <= 0.15);
        // Interior edges are shared by two elements; validation already
        // rejects anything else, so count boundary length instead.
        let perimeter: f64 = m.boundary_edges().iter().map(|&(a, b)| dist(m.nodes()[a], m.nodes()[b])).sum();
        assert!((perimeter - (4.0 + 2.0 * 0.7)).abs() < 1e-12);
    }

    #[test]
    fn star_and_polygon_meshes() {
        let m = mesh_domain(&DomainSpec::Star { delta: 1.0 }, 0.1).unwrap();
        let exact = DomainSpec::Star { delta: 1.0 }.area().unwrap();
        assert!((m.area() - exact).abs() < 1e-12);
        assert!(m.max_edge() <= 0.15);
        let tri = DomainSpec::ConvexPolygon { vertices: vec![[0.0, 0.0], [2.0, 0.0], [0.5, 1.0]] };
        let m = mesh_domain(&tri, 0.2).unwrap();
        assert!((m.area() - 1.0).abs() < 1e-12);
        assert!(m.max_edge() <= 0.3);
    }

    #[test]
    fn validation_rejects_bad_meshes() {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        assert!(TriangleMesh::new(nodes.clone(), vec![[0, 2, 1]]).is_err());
        assert!(TriangleMesh::new(nodes.clone(), vec![[0, 1, 2]]).is_err()); // node 3 unused
        let far = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 5.0], [6.0, 5.0], [5.0, 6.0]];
        assert!(TriangleMesh::new(far, vec![[0, 1, 2], [3, 4, 5]]).is_err());
        // Hanging node: midpoint of the square's diagonal used on one side only.
        let hang = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
        assert!(TriangleMesh::new(hang, vec![[0, 1, 2], [0, 4, 3], [4, 2, 3]]).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = mesh_domain(&DomainSpec::Disk { radius: 0.7, center: [0.1, -0.3] }, 0.13).unwrap();
        let back = TriangleMesh::from_json(&m.to_json()).unwrap();
        assert_eq!(m, back);
        let err = TriangleMesh::from_json("{\"nodes\": [[0,0],\n [1,0]], \"elements\": [[0,1,2]]}").unwrap_err();
        assert!(matches!(err, Error::InvalidMesh(_)));
    }
}
