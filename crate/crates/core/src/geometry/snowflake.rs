//! Snowflake tree of equilateral triangles.
//!
//! The root `Δ0` has side `a`. Level 1 places a triangle of side `a/3` on the
//! middle third of each root edge; every later triangle carries children on
//! the middle thirds of its two free edges. Level `j ≥ 1` therefore has
//! `3·2^{j−1}` triangles of side `a/3^j`.
//!
//! Each non-root triangle `Δ_j` is paired with an extended copy `Δ_j*`, the
//! homothety about its outer apex with ratio `√(1 + f)`, which reaches back
//! into its parent so that `|Δ_{j−1} ∩ Δ_j*| = f·|Δ_j|`.

use serde::{Deserialize, Serialize};

use super::{ConvexCell, P2};
use crate::error::{Error, Result};

pub const DEFAULT_OVERLAP_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractalTreeSpec {
    pub a: f64,
    pub depth: usize,
    #[serde(default = "default_overlap")]
    pub overlap_fraction: f64,
    /// Levels up to this one are built as explicit polygons.
    #[serde(default)]
    pub materialize_depth: usize,
}

fn default_overlap() -> f64 {
    DEFAULT_OVERLAP_FRACTION
}

impl FractalTreeSpec {
    pub fn new(a: f64, depth: usize) -> Self {
        Self { a, depth, overlap_fraction: DEFAULT_OVERLAP_FRACTION, materialize_depth: 0 }
    }

    pub const SCALE: f64 = 1.0 / 3.0;

    pub fn branching(level: usize) -> usize {
        if level == 1 {
            3
        } else {
            2
        }
    }

    /// Homothety ratio producing the extended cells.
    pub fn extension_ratio(&self) -> f64 {
        (1.0 + self.overlap_fraction).sqrt()
    }

    fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(Error::InvalidParameter(format!("side length must be positive, got {}", self.a)));
        }
        if !(self.overlap_fraction > 0.0 && self.overlap_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "overlap fraction must lie in (0, 1), got {}",
                self.overlap_fraction
            )));
        }
        Ok(())
    }
}

/// Analytic data for one level of the tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelInfo {
    pub level: usize,
    pub count: u64,
    pub side: f64,
    pub area: f64,
    pub diameter: f64,
    /// Area of the extended cell `Δ_j*` (equal to `area` at the root).
    pub extended_area: f64,
    /// Diameter of `Δ_j*`.
    pub extended_diameter: f64,
    /// `|Δ_{j−1} ∩ Δ_j*|`; zero at the root.
    pub link_volume: f64,
}

/// Number of triangles at `level`, or `None` on overflow.
pub fn level_count(level: usize) -> Option<u64> {
    if level == 0 {
        return Some(1);
    }
    let shift = u32::try_from(level - 1).ok()?;
    3u64.checked_mul(1u64.checked_shl(shift).filter(|_| shift < 64)?)
}

pub fn level_info(spec: &FractalTreeSpec, level: usize) -> Result<LevelInfo> {
    let count = level_count(level).ok_or(Error::CountOverflow(level))?;
    let side = spec.a * FractalTreeSpec::SCALE.powi(level as i32);
    let area = 3f64.sqrt() * spec.a * spec.a / (4.0 * 9f64.powi(level as i32));
    let (extended_area, extended_diameter, link_volume) = if level == 0 {
        (area, side, 0.0)
    } else {
        let f = spec.overlap_fraction;
        ((1.0 + f) * area, spec.extension_ratio() * side, f * area)
    };
    Ok(LevelInfo { level, count, side, area, diameter: side, extended_area, extended_diameter, link_volume })
}

/// One explicitly built triangle.
#[derive(Debug, Clone)]
pub struct TreeCell {
    pub level: usize,
    pub parent: Option<usize>,
    /// Counter-clockwise vertices; for non-root cells the last one is the
    /// outer apex.
    pub triangle: [P2; 3],
}

impl TreeCell {
    pub fn cell(&self) -> Result<ConvexCell> {
        ConvexCell::from_points_2d(&self.triangle)
    }

    /// The extended cell `Δ*`; the root is returned unchanged.
    pub fn extended(&self, ratio: f64) -> Result<ConvexCell> {
        if self.parent.is_none() {
            return self.cell();
        }
        let apex = self.triangle[2];
        let grow = |p: P2| [apex[0] + ratio * (p[0] - apex[0]), apex[1] + ratio * (p[1] - apex[1])];
        ConvexCell::from_points_2d(&[grow(self.triangle[0]), grow(self.triangle[1]), apex])
    }

    /// Free edges (directed, counter-clockwise) that carry children.
    fn free_edges(&self) -> Vec<(P2, P2)> {
        let t = self.triangle;
        match self.parent {
            None => vec![(t[0], t[1]), (t[1], t[2]), (t[2], t[0])],
            // Child ccw order is [B2, B1, apex]; B1 → apex and apex → B2 are free.
            Some(_) => vec![(t[1], t[2]), (t[2], t[0])],
        }
    }
}

/// Child triangle on the middle third of the directed edge `p → q` of a
/// counter-clockwise parent, pointing outward.
fn child_on_edge(p: P2, q: P2) -> [P2; 3] {
    let b1 = [p[0] + (q[0] - p[0]) / 3.0, p[1] + (q[1] - p[1]) / 3.0];
    let b2 = [p[0] + 2.0 * (q[0] - p[0]) / 3.0, p[1] + 2.0 * (q[1] - p[1]) / 3.0];
    let mid = [0.5 * (b1[0] + b2[0]), 0.5 * (b1[1] + b2[1])];
    let (dx, dy) = (b2[0] - b1[0], b2[1] - b1[1]);
    // Outward normal of a ccw edge is (dy, -dx).
    let h = 3f64.sqrt() / 2.0;
    let apex = [mid[0] + h * dy, mid[1] - h * dx];
    [b2, b1, apex]
}

#[derive(Debug, Clone)]
pub struct FractalTree {
    pub spec: FractalTreeSpec,
    pub levels: Vec<LevelInfo>,
    /// Cells of levels `0..=min(materialize_depth, depth)`, level by level.
    pub cells: Vec<TreeCell>,
    /// Upper bound on how many extended cells contain any point.
    pub multiplicity: usize,
}

impl FractalTree {
    pub fn depth(&self) -> usize {
        self.spec.depth
    }
}

pub fn build_snowflake_tree(spec: FractalTreeSpec) -> Result<FractalTree> {
    spec.validate()?;
    let levels = (0..=spec.depth).map(|j| level_info(&spec, j)).collect::<Result<Vec<_>>>()?;
    let a = spec.a;
    let root = TreeCell {
        level: 0,
        parent: None,
        triangle: [[0.0, 0.0], [a, 0.0], [0.5 * a, 0.5 * a * 3f64.sqrt()]],
    };
    let mut cells = vec![root];
    let mut frontier = vec![0usize];
    for level in 1..=spec.materialize_depth.min(spec.depth) {
        let mut next = Vec::new();
        for &idx in &frontier {
            for (p, q) in cells[idx].free_edges() {
                cells.push(TreeCell { level, parent: Some(idx), triangle: child_on_edge(p, q) });
                next.push(cells.len() - 1);
            }
        }
        frontier = next;
    }
    let multiplicity = if spec.depth == 0 { 1 } else { 2 };
    Ok(FractalTree { spec, levels, cells, multiplicity })
}
