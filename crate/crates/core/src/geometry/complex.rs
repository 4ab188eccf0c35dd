//! Whitney triples `Q1 ∪ R2 ∪ Q3` and chains of overlapping triples.

use super::{intersect_cells, intersection_volume, ConvexCell};
use crate::error::{Error, Result};

/// Relative tolerance under which `|Q1 ∩ Q3|` counts as zero.
pub const DISJOINT_REL_TOL: f64 = 1e-9;

/// Volume of a finite union of convex cells by inclusion–exclusion. Branches
/// whose running intersection is empty are pruned, so sparse overlap
/// patterns stay cheap.
pub fn union_volume(cells: &[ConvexCell]) -> Result<f64> {
    fn walk(cells: &[ConvexCell], start: usize, current: &ConvexCell, sign: f64, acc: &mut f64) -> Result<()> {
        for j in start..cells.len() {
            if let Some(next) = intersect_cells(current, &cells[j])? {
                *acc -= sign * next.volume();
                walk(cells, j + 1, &next, -sign, acc)?;
            }
        }
        Ok(())
    }
    let mut acc = 0.0;
    for (i, c) in cells.iter().enumerate() {
        acc += c.volume();
        walk(cells, i + 1, c, 1.0, &mut acc)?;
    }
    Ok(acc)
}

/// Three convex cells where `Q1` and `Q3` are disjoint and each overlaps `R2`.
#[derive(Debug, Clone)]
pub struct WhitneyTriple {
    q1: ConvexCell,
    r2: ConvexCell,
    q3: ConvexCell,
    v_q1r2: f64,
    v_r2q3: f64,
}

impl WhitneyTriple {
    /// Computes both overlap volumes from the cells.
    pub fn new(q1: ConvexCell, r2: ConvexCell, q3: ConvexCell) -> Result<Self> {
        let v12 = intersection_volume(&q1, &r2)?;
        let v23 = intersection_volume(&r2, &q3)?;
        Self::with_overlaps(q1, r2, q3, v12, v23)
    }

    /// Uses caller-supplied overlap volumes; disjointness of `Q1` and `Q3` is
    /// still checked geometrically.
    pub fn with_overlaps(q1: ConvexCell, r2: ConvexCell, q3: ConvexCell, v_q1r2: f64, v_r2q3: f64) -> Result<Self> {
        for v in [v_q1r2, v_r2q3] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NonPositiveOverlap(v));
            }
        }
        let v13 = intersection_volume(&q1, &q3)?;
        if v13 >= DISJOINT_REL_TOL * q1.volume().min(q3.volume()) {
            return Err(Error::TripleNotDisjoint(v13));
        }
        Ok(Self { q1, r2, q3, v_q1r2, v_r2q3 })
    }

    pub fn q1(&self) -> &ConvexCell {
        &self.q1
    }

    pub fn r2(&self) -> &ConvexCell {
        &self.r2
    }

    pub fn q3(&self) -> &ConvexCell {
        &self.q3
    }

    pub fn cells(&self) -> [&ConvexCell; 3] {
        [&self.q1, &self.r2, &self.q3]
    }

    pub fn v_q1r2(&self) -> f64 {
        self.v_q1r2
    }

    pub fn v_r2q3(&self) -> f64 {
        self.v_r2q3
    }

    pub fn dim(&self) -> usize {
        self.q1.dim()
    }

    /// `|Q1 ∪ R2 ∪ Q3|`, using that `Q1` and `Q3` are disjoint.
    pub fn volume(&self) -> f64 {
        self.q1.volume() + self.r2.volume() + self.q3.volume() - self.v_q1r2 - self.v_r2q3
    }
}

/// Volume of `A ∩ B` for two triples, as the union of the pairwise cell
/// intersections.
pub fn triple_overlap_volume(a: &WhitneyTriple, b: &WhitneyTriple) -> Result<f64> {
    let mut pieces = Vec::new();
    for x in a.cells() {
        for y in b.cells() {
            if let Some(c) = intersect_cells(x, y)? {
                pieces.push(c);
            }
        }
    }
    union_volume(&pieces)
}

/// Ordered triples `A_1, ..., A_J` with consecutive overlaps.
#[derive(Debug, Clone)]
pub struct WhitneyChain {
    triples: Vec<WhitneyTriple>,
    link_volumes: Vec<f64>,
    multiplicity: usize,
}

impl WhitneyChain {
    pub fn new(triples: Vec<WhitneyTriple>, link_volumes: Vec<f64>, multiplicity: usize) -> Result<Self> {
        if triples.is_empty() {
            return Err(Error::InvalidParameter("chain has no triples".into()));
        }
        if link_volumes.len() != triples.len() - 1 {
            return Err(Error::LengthMismatch { expected: triples.len() - 1, found: link_volumes.len() });
        }
        if let Some(&bad) = link_volumes.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::NonPositiveOverlap(bad));
        }
        if multiplicity < 1 || multiplicity > triples.len() {
            return Err(Error::InvalidParameter(format!(
                "multiplicity {multiplicity} outside [1, {}]",
                triples.len()
            )));
        }
        let n = triples[0].dim();
        if let Some(t) = triples.iter().find(|t| t.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: t.dim() });
        }
        Ok(Self { triples, link_volumes, multiplicity })
    }

    /// Computes link volumes geometrically. The multiplicity defaults to the
    /// largest number of triples meeting any single triple in positive
    /// volume (counting itself), which bounds the pointwise overlap count.
    pub fn from_triples(triples: Vec<WhitneyTriple>, multiplicity: Option<usize>) -> Result<Self> {
        let mut links = Vec::with_capacity(triples.len().saturating_sub(1));
        for w in triples.windows(2) {
            links.push(triple_overlap_volume(&w[0], &w[1])?);
        }
        let m = match multiplicity {
            Some(m) => m,
            None => {
                let mut best = 1;
                for (j, a) in triples.iter().enumerate() {
                    let mut count = 1;
                    for (i, b) in triples.iter().enumerate() {
                        if i != j && triple_overlap_volume(a, b)? > DISJOINT_REL_TOL * a.volume().min(b.volume()) {
                            count += 1;
                        }
                    }
                    best = best.max(count);
                }
                best
            }
        };
        Self::new(triples, links, m)
    }

    pub fn triples(&self) -> &[WhitneyTriple] {
        &self.triples
    }

    pub fn link_volumes(&self) -> &[f64] {
        &self.link_volumes
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn volumes(&self) -> Vec<f64> {
        self.triples.iter().map(WhitneyTriple::volume).collect()
    }

    /// Every cell of every triple, in chain order.
    pub fn cells(&self) -> Vec<ConvexCell> {
        self.triples.iter().flat_map(|t| t.cells().into_iter().cloned()).collect()
    }
}
