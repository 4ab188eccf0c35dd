//! Constants for trees of cells and the level series of the snowflake tree.
//!
//! Cells are the extended triangles `Δ*`; the reference constant is the
//! average over the root. For a level-`j` cell the weight is `C_j B^p(Δ_j*)`
//! where `S_j = Σ_{Δ below Δ_j} steps(Δ)^{p−1} |Δ*|` and `C_j` is the larger
//! of
//!
//! * `2^{p−1} + 2^{p−1} S_j / |Δ_j*|` (weights relative to the cell volume),
//! * `2^{p−1} + 2^{2p−2} (S_j / L_j + b_j S_{j+1} / L_{j+1})` with `L_j` the
//!   link to the parent and `b_j` the number of children (link-by-link).
//!
//! The level series collects, per level `i`, all `3·2^{i−1}` cells:
//! `T_i = 2^{p−1} N_i [B_i^p + i^{p−1} V_i Σ_{j≤i} B_j^p / V_j]`. Beyond the
//! last explicitly known level the cells are similar copies at scale 1/3, so
//! `B_j` shrinks by 1/3 and `V_j` by 1/9 per level. The term ratio then obeys
//! `T_{i+1}/T_i ≤ r_i = 2 max(3^{−p}, ((i+1)/i)^{p−1} (1 + φ)/9)` with
//! `φ = 1/Σ_{k=1}^{i+1−J} θ^{−k}` and `θ = 3^{2−p}`. Since `r_i` is
//! nonincreasing, once `r_N < 1` the remainder after level `N` is at most
//! `T_N r_N/(1 − r_N)`.

use serde::{Deserialize, Serialize};

use super::{diameter_constant, TAG_TREE};
use crate::certificate::{BoundForm, PoincareBound, Term, FLAG_MAGNITUDE};
use crate::error::{require_p, Error, Result};
use crate::geometry::snowflake::{level_info, FractalTree, FractalTreeSpec};
use crate::numeric::MagnitudeGuard;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailOptions {
    /// Largest number of levels summed explicitly while waiting for the ratio
    /// bound to drop below one.
    pub max_levels: usize,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self { max_levels: 1000 }
    }
}

/// Certified bound for `Σ_{i > start_level} T_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesTail {
    pub start_level: usize,
    /// Terms `start_level+1 ..= summed_through` were added exactly.
    pub summed_through: usize,
    /// Ratio bound used for the geometric remainder.
    pub ratio: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesCertificate {
    pub p: f64,
    pub level_terms: Vec<f64>,
    /// `Σ_{i ≤ depth} T_i`.
    pub finite_part: f64,
    pub tail: SeriesTail,
}

impl SeriesCertificate {
    pub fn relative_tail(&self) -> f64 {
        self.tail.bound / self.finite_part
    }
}

/// Per-level model of the series: explicit data up to `anchor`, similarity
/// scaling after it.
#[derive(Debug, Clone)]
pub struct LevelSeries {
    p: f64,
    anchor: usize,
    vol: Vec<f64>,
    bpow: Vec<f64>,
}

fn count(i: usize) -> f64 {
    if i == 0 {
        1.0
    } else {
        3.0 * 2f64.powi(i as i32 - 1)
    }
}

impl LevelSeries {
    fn new(p: f64, vol: Vec<f64>, bpow: Vec<f64>) -> Result<Self> {
        require_p(p)?;
        if vol.len() != bpow.len() || vol.len() < 2 {
            return Err(Error::InvalidParameter("series needs data for at least two levels".into()));
        }
        Ok(Self { p, anchor: vol.len() - 1, vol, bpow })
    }

    fn vol(&self, i: usize) -> f64 {
        if i <= self.anchor {
            self.vol[i]
        } else {
            self.vol[self.anchor] * 9f64.powi(-((i - self.anchor) as i32))
        }
    }

    fn bpow(&self, i: usize) -> f64 {
        if i <= self.anchor {
            self.bpow[i]
        } else {
            self.bpow[self.anchor] * 3f64.powf(-self.p * (i - self.anchor) as f64)
        }
    }

    /// `T_0 ..= T_last`.
    pub fn terms(&self, last: usize) -> Vec<f64> {
        let pre = 2f64.powf(self.p - 1.0);
        let mut running = 0.0;
        (0..=last)
            .map(|i| {
                running += self.bpow(i) / self.vol(i);
                let iw = if i == 0 { 0.0 } else { (i as f64).powf(self.p - 1.0) };
                pre * count(i) * (self.bpow(i) + iw * self.vol(i) * running)
            })
            .collect()
    }

    /// Upper bound on `T_{i+1}/T_i`, valid for `i ≥ max(1, anchor)`.
    pub fn ratio_bound(&self, i: usize) -> f64 {
        let i = i.max(self.anchor).max(1);
        let theta_inv = 3f64.powf(self.p - 2.0);
        let m = i + 1 - self.anchor;
        let mut denom = 0.0;
        let mut t = 1.0;
        for _ in 0..m {
            t *= theta_inv;
            denom += t;
            if !denom.is_finite() {
                break;
            }
        }
        let phi = if denom.is_finite() { 1.0 / denom } else { 0.0 };
        let growth = ((i as f64 + 1.0) / i as f64).powf(self.p - 1.0) * (1.0 + phi) / 9.0;
        2.0 * 3f64.powf(-self.p).max(growth)
    }

    pub fn tail(&self, start_level: usize, opts: TailOptions) -> Result<SeriesTail> {
        let first = start_level.max(self.anchor).max(1);
        let mut partial = 0.0;
        let mut n = first;
        loop {
            if n - start_level > opts.max_levels {
                return Err(Error::SeriesNotSummable { last_level: n - 1 });
            }
            let terms = self.terms(n);
            let t_n = terms[n];
            if n > start_level {
                partial = terms[start_level + 1..=n].iter().sum();
            }
            let r = self.ratio_bound(n);
            if r < 1.0 {
                let bound = partial + t_n * r / (1.0 - r);
                if !bound.is_finite() {
                    return Err(Error::SeriesNotSummable { last_level: n });
                }
                return Ok(SeriesTail { start_level, summed_through: n, ratio: r, bound });
            }
            n += 1;
        }
    }

    pub fn certificate(&self, depth: usize, opts: TailOptions) -> Result<SeriesCertificate> {
        let level_terms = self.terms(depth);
        let finite_part = level_terms.iter().sum();
        let tail = self.tail(depth, opts)?;
        Ok(SeriesCertificate { p: self.p, level_terms, finite_part, tail })
    }
}

fn snowflake_model(spec: &FractalTreeSpec, p: f64) -> Result<LevelSeries> {
    let mut vol = Vec::with_capacity(2);
    let mut bpow = Vec::with_capacity(2);
    for j in 0..=1 {
        let l = level_info(spec, j)?;
        vol.push(l.extended_area);
        bpow.push(diameter_constant(l.extended_diameter, p)?.pow_p());
    }
    LevelSeries::new(p, vol, bpow)
}

/// Level series of the snowflake tree with diameter-rule cell constants.
pub fn snowflake_series(spec: &FractalTreeSpec, p: f64, opts: TailOptions) -> Result<SeriesCertificate> {
    snowflake_model(spec, p)?.certificate(spec.depth, opts)
}

/// Certified bound for the series tail beyond `start_level`.
pub fn snowflake_tail(spec: &FractalTreeSpec, p: f64, start_level: usize, opts: TailOptions) -> Result<SeriesTail> {
    snowflake_model(spec, p)?.tail(start_level, opts)
}

/// Series built from explicit per-level constants of a tree of depth ≥ 1.
pub fn level_series(tree: &FractalTree, cell_bounds: &[PoincareBound], p: f64) -> Result<LevelSeries> {
    let vol = tree.levels.iter().map(|l| l.extended_area).collect();
    let bpow = cell_bounds.iter().map(PoincareBound::pow_p).collect();
    LevelSeries::new(p, vol, bpow)
}

/// Diameter-rule constants for the extended cells of every level.
pub fn snowflake_cell_bounds(tree: &FractalTree, p: f64) -> Result<Vec<PoincareBound>> {
    tree.levels
        .iter()
        .map(|l| Ok(diameter_constant(l.extended_diameter, p)?.with_volume(l.extended_area)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeBound {
    /// Constant for the tree truncated at its depth.
    pub bound: PoincareBound,
    /// Level series with certified tail; absent for a root-only tree.
    pub series: Option<SeriesCertificate>,
}

pub fn tree_constant(tree: &FractalTree, cell_bounds: &[PoincareBound], p: f64) -> Result<TreeBound> {
    tree_constant_with(tree, cell_bounds, p, TailOptions::default())
}

pub fn tree_constant_with(
    tree: &FractalTree,
    cell_bounds: &[PoincareBound],
    p: f64,
    opts: TailOptions,
) -> Result<TreeBound> {
    require_p(p)?;
    let depth = tree.depth();
    if tree.levels.is_empty() {
        return Err(Error::InvalidParameter("tree has no cells".into()));
    }
    if cell_bounds.len() != depth + 1 {
        return Err(Error::LengthMismatch { expected: depth + 1, found: cell_bounds.len() });
    }
    for (j, b) in cell_bounds.iter().enumerate() {
        if b.p != p || !(b.value > 0.0) {
            return Err(Error::InvalidParameter(format!("bound for level {j} is not a valid p = {p} constant")));
        }
    }

    let levels = &tree.levels;
    let weight = |i: usize| {
        let steps = if i == 0 { 0.0 } else { (i as f64).powf(p - 1.0) };
        steps * levels[i].extended_area
    };
    // Subtree sums per single cell of each level.
    let mut s = vec![0.0; depth + 2];
    for j in (1..=depth).rev() {
        s[j] = weight(j) + 2.0 * s[j + 1];
    }
    s[0] = if depth >= 1 { 3.0 * s[1] } else { 0.0 };

    let base = 2f64.powf(p - 1.0);
    let quarter = 2f64.powf(2.0 * p - 2.0);
    let mut guard = MagnitudeGuard::default();
    let mut coeff = Vec::with_capacity(depth + 1);
    for j in 0..=depth {
        let relative = base + base * s[j] / levels[j].extended_area;
        let mut linked = base;
        if j > 0 {
            linked += quarter * s[j] / levels[j].link_volume;
        }
        if j < depth {
            let children = if j == 0 { 3.0 } else { 2.0 };
            linked += quarter * children * s[j + 1] / levels[j + 1].link_volume;
        }
        coeff.push((relative, linked, guard.see(relative.max(linked))));
    }
    let weighted: Vec<f64> = (0..=depth).map(|j| guard.see(coeff[j].2 * cell_bounds[j].pow_p())).collect();
    let star = (0..=depth).fold(0, |best, j| if weighted[j] > weighted[best] { j } else { best });

    let m = tree.multiplicity as f64;
    let bp = cell_bounds[star].pow_p();
    let terms: Vec<Term> = vec![
        Term::new(format!("level {star}: m * 2^(p-1) B^p"), TAG_TREE, m * base * bp),
        Term::new(format!("level {star}: m * (C - 2^(p-1)) B^p (descendant terms)"), TAG_TREE, m * (coeff[star].2 - base) * bp),
    ]
    .into_iter()
    .filter(|t| t.value > 0.0)
    .collect();
    let mut bound = PoincareBound::from_terms(p, BoundForm::InfOverConstants, tree.multiplicity, terms)?;
    let union: f64 = levels.iter().map(|l| l.count as f64 * l.area).sum();
    bound = bound.with_volume(union);
    bound.notes.push(format!("multiplicity m = {}; B^p = m * max_j C_j B^p(level j)", tree.multiplicity));
    bound.notes.push(format!("tree truncated at depth {depth}; reference constant is the average over the root"));
    for j in 0..=depth {
        bound.notes.push(format!(
            "level {j}: relative C = {}, link-by-link C = {}, C * B^p = {}",
            coeff[j].0, coeff[j].1, weighted[j]
        ));
    }

    let series = if depth >= 1 {
        let model = level_series(tree, cell_bounds, p)?;
        let cert = model.certificate(depth, opts)?;
        guard.see(cert.finite_part);
        Some(cert)
    } else {
        None
    };
    if guard.tripped() {
        bound.flag(FLAG_MAGNITUDE);
    }
    Ok(TreeBound { bound, series })
}
