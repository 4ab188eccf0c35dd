//! Poincaré constants of convex cells and the rules that combine them over
//! unions of overlapping cells.
//!
//! Every constant is returned as a [`PoincareBound`] whose terms add up to
//! `B^p`. Inputs are treated as infimum-over-constants bounds; at `p = 2`
//! that form coincides with the deviation-from-mean form.

mod chain;
mod tree;

pub use chain::{chain_constant, chain_constant_from_parts, ChainCoefficients};
pub use tree::{
    level_series, snowflake_cell_bounds, snowflake_series, snowflake_tail, tree_constant, LevelSeries,
    SeriesCertificate, SeriesTail, TailOptions, TreeBound,
};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::certificate::{BoundForm, PoincareBound, Term};
use crate::error::{require_p, Error, Result};
use crate::geometry::{ConvexCell, WhitneyTriple};

pub const TAG_CONVEX: &str = "convex-diameter";
pub const TAG_SUBSET: &str = "subset-average";
pub const TAG_PAIR: &str = "two-cell-union";
pub const TAG_TRIPLE: &str = "whitney-triple";
pub const TAG_CHAIN: &str = "chain-sum";
pub const TAG_TREE: &str = "tree-sum";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    pub p: f64,
    pub n: usize,
}

impl SpectralParams {
    pub fn new(p: f64, n: usize) -> Result<Self> {
        require_p(p)?;
        if n != 2 && n != 3 {
            return Err(Error::UnsupportedDimension(n));
        }
        Ok(Self { p, n })
    }
}

/// Generalised π: `2π (p−1)^{1/p} / (p sin(π/p))`.
pub fn pi_p(p: f64) -> Result<f64> {
    require_p(p)?;
    Ok(2.0 * PI * (p - 1.0).powf(1.0 / p) / (p * (PI / p).sin()))
}

/// `π_p` from its integral definition
/// `2 ∫_0^{(p−1)^{1/p}} dt / (1 − t^p/(p−1))^{1/p}`.
///
/// After `t = (p−1)^{1/p}(1 − v)` the singularity sits at `v = 0`, where
/// `1 − (1 − v)^p` can be evaluated without cancellation. The further change
/// `v = w^q` with `q = p/(p−1)` makes the integrand bounded at `w = 0`.
pub fn pi_p_quadrature(p: f64) -> Result<f64> {
    require_p(p)?;
    let b = (p - 1.0).powf(1.0 / p);
    let q = p / (p - 1.0);
    let integrand = |w: f64| {
        if w <= 0.0 {
            return q * p.powf(-1.0 / p);
        }
        let v = w.powf(q);
        let gap = -(p * (-v).ln_1p()).exp_m1();
        q * w.powf(q - 1.0) * gap.powf(-1.0 / p)
    };
    let out = quadrature::double_exponential::integrate(integrand, 0.0, 1.0, 1e-14);
    if !out.integral.is_finite() {
        return Err(Error::QuadratureDiverged);
    }
    Ok(2.0 * b * out.integral)
}

/// `B = d/π_p` for a convex set of diameter `d`.
pub fn diameter_constant(diameter: f64, p: f64) -> Result<PoincareBound> {
    if !(diameter > 0.0) || !diameter.is_finite() {
        return Err(Error::InvalidParameter(format!("diameter must be positive, got {diameter}")));
    }
    let pp = pi_p(p)?;
    let form = if p == 2.0 { BoundForm::DeviationFromMean } else { BoundForm::InfOverConstants };
    let b = PoincareBound::from_terms(
        p,
        form,
        1,
        vec![Term::new(format!("(diam / pi_p)^p with diam = {diameter}, pi_p = {pp}"), TAG_CONVEX, (diameter / pp).powf(p))],
    )?;
    Ok(b.with_note("convex-set eigenvalue lower bound (pi_p / diam)^p"))
}

pub fn convex_cell_constant(cell: &ConvexCell, params: SpectralParams) -> Result<PoincareBound> {
    if cell.dim() != params.n {
        return Err(Error::DimensionMismatch { expected: params.n, found: cell.dim() });
    }
    Ok(diameter_constant(cell.diameter(), params.p)?.with_volume(cell.volume()))
}

/// Factor `2 (|Ω|/|A|)^{1/p}` comparing the deviation from the average over
/// a subset `A` with the deviation from any constant. Ratios within `1e-12`
/// below one (rounding in `|Ω|/|A|` for `A = Ω`) are treated as one.
pub fn subset_average_factor(volume_ratio: f64, p: f64) -> Result<f64> {
    require_p_or_one(p)?;
    if !(volume_ratio >= 1.0 - 1e-12) || !volume_ratio.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "volume ratio |Omega|/|A| must be >= 1, got {volume_ratio}"
        )));
    }
    Ok(2.0 * volume_ratio.max(1.0).powf(1.0 / p))
}

fn require_p_or_one(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")))
    }
}

fn check_input(b: &PoincareBound, p: f64, what: &str) -> Result<()> {
    if b.p != p {
        return Err(Error::InvalidParameter(format!("{what} has p = {}, expected {p}", b.p)));
    }
    if !(b.value > 0.0) || !b.value.is_finite() {
        return Err(Error::InvalidParameter(format!("{what} is not a positive constant")));
    }
    Ok(())
}

fn combined_form(p: f64) -> BoundForm {
    if p == 2.0 {
        BoundForm::DeviationFromMean
    } else {
        BoundForm::InfOverConstants
    }
}

/// Constant for `Q1 ∪ Q2`:
/// `B^p = 2^{2p−1}/|Q1 ∩ Q2| · (|Q1| b1^p + |Q2| b2^p)`.
pub fn pair_constant(
    q1: &ConvexCell,
    q2: &ConvexCell,
    overlap: f64,
    b1: &PoincareBound,
    b2: &PoincareBound,
    p: f64,
) -> Result<PoincareBound> {
    require_p(p)?;
    if !(overlap > 0.0) || !overlap.is_finite() {
        return Err(Error::NonPositiveOverlap(overlap));
    }
    check_input(b1, p, "b1")?;
    check_input(b2, p, "b2")?;
    let pre = 2f64.powf(2.0 * p - 1.0) / overlap;
    let terms = vec![
        Term::new("Q1: 2^{2p-1} |Q1| b1^p / |Q1 n Q2|", TAG_PAIR, pre * q1.volume() * b1.pow_p()),
        Term::new("Q2: 2^{2p-1} |Q2| b2^p / |Q1 n Q2|", TAG_PAIR, pre * q2.volume() * b2.pow_p()),
    ];
    let b = PoincareBound::from_terms(p, combined_form(p), 1, terms)?;
    Ok(b.with_volume(q1.volume() + q2.volume() - overlap))
}

/// Constant for a Whitney triple `A = Q1 ∪ R2 ∪ Q3`.
pub fn triple_constant(
    t: &WhitneyTriple,
    b1: &PoincareBound,
    b2: &PoincareBound,
    b3: &PoincareBound,
    p: f64,
) -> Result<PoincareBound> {
    require_p(p)?;
    check_input(b1, p, "b1")?;
    check_input(b2, p, "b2")?;
    check_input(b3, p, "b3")?;
    let (v12, v23) = (t.v_q1r2(), t.v_r2q3());
    let (q1, r2, q3) = (t.q1().volume(), t.r2().volume(), t.q3().volume());
    let u12 = q1 + r2 - v12;
    let u23 = q3 + r2 - v23;
    let pre = 2f64.powf(4.0 * p - 1.0);
    let terms = vec![
        Term::new("Q1: (|Q1 u R2|/|R2|)(|Q1|/|Q1 n R2|) b1^p", TAG_TRIPLE, pre * (u12 / r2) * (q1 / v12) * b1.pow_p()),
        Term::new("R2: (|Q1 u R2|/|Q1 n R2| + |Q3 u R2|/|Q3 n R2|) b2^p", TAG_TRIPLE, pre * (u12 / v12 + u23 / v23) * b2.pow_p()),
        Term::new("Q3: (|Q3 u R2|/|R2|)(|Q3|/|Q3 n R2|) b3^p", TAG_TRIPLE, pre * (u23 / r2) * (q3 / v23) * b3.pow_p()),
    ];
    let b = PoincareBound::from_terms(p, combined_form(p), 1, terms)?;
    Ok(b.with_volume(t.volume()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_p_closed_form_values() {
        assert!((pi_p(2.0).unwrap() - PI).abs() < 1e-15);
        // Frozen from the quadrature route.
        assert!((pi_p(4.0).unwrap() - 2.9235813887501207).abs() < 1e-13);
        assert!((pi_p(1.5).unwrap() - 3.0469919990461723).abs() < 1e-13);
        assert!((pi_p(3.0).unwrap() - 3.0469919990461723).abs() < 1e-13);
        assert!((pi_p(10.0).unwrap() - 2.5329216447539823).abs() < 1e-13);
        let big = pi_p(100.0).unwrap();
        assert!((big - 2.0943911233367640).abs() < 1e-12);
        assert!((big - 2.0).abs() < 0.05 * 2.0);
        assert!(pi_p(1.0).is_err());
        assert!(pi_p(0.5).is_err());
    }

    #[test]
    fn pi_p_routes_agree() {
        for p in [1.5, 2.0, 3.0, 4.0, 10.0, 1.1, 25.0] {
            let a = pi_p(p).unwrap();
            let b = pi_p_quadrature(p).unwrap();
            assert!((a - b).abs() <= 1e-8 * a, "p={p}: {a} vs {b}");
        }
    }

    #[test]
    fn convex_constants() {
        let sq = ConvexCell::aabb(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let b = convex_cell_constant(&sq, SpectralParams::new(2.0, 2).unwrap()).unwrap();
        assert!((b.value - 2f64.sqrt() / PI).abs() < 1e-15);
        assert_eq!(b.form, BoundForm::DeviationFromMean);
        let ball = diameter_constant(2.0, 2.0).unwrap();
        assert!((ball.value - 2.0 / PI).abs() < 1e-15);
        let big = sq.scaled(3.0).unwrap();
        let b3 = convex_cell_constant(&big, SpectralParams::new(2.0, 2).unwrap()).unwrap();
        assert!((b3.value - 3.0 * b.value).abs() < 1e-14);
        assert!(convex_cell_constant(&sq, SpectralParams::new(2.0, 3).unwrap()).is_err());
    }

    #[test]
    fn subset_average_factor_values() {
        assert_eq!(subset_average_factor(1.0, 2.7).unwrap(), 2.0);
        assert!((subset_average_factor(8.0, 3.0).unwrap() - 4.0).abs() < 1e-15);
        assert!((subset_average_factor(2.0, 2.0).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        assert!(subset_average_factor(0.5, 2.0).is_err());
    }

    fn unit(x: f64) -> ConvexCell {
        ConvexCell::aabb(&[x, 0.0], &[x + 1.0, 1.0]).unwrap()
    }

    #[test]
    fn pair_of_squares() {
        let p = 2.0;
        let (a, b) = (unit(0.0), unit(0.5));
        let params = SpectralParams::new(p, 2).unwrap();
        let ba = convex_cell_constant(&a, params).unwrap();
        let bb = convex_cell_constant(&b, params).unwrap();
        let pair = pair_constant(&a, &b, 0.5, &ba, &bb, p).unwrap();
        assert!((pair.pow_p() - 64.0 / (PI * PI)).abs() < 1e-12);
        assert!((pair.value - 2.5464790894703255).abs() < 1e-12);
        pair.check(1e-12).unwrap();
        // Identical cells collapse to 2^{2p} b^p.
        let same = pair_constant(&a, &a, 1.0, &ba, &ba, p).unwrap();
        assert!((same.pow_p() - 16.0 * ba.pow_p()).abs() < 1e-12);
        assert!(matches!(pair_constant(&a, &b, 0.0, &ba, &bb, p), Err(Error::NonPositiveOverlap(_))));
    }

    #[test]
    fn triple_of_squares() {
        let p = 2.0;
        let t = WhitneyTriple::new(unit(0.0), unit(0.5), unit(1.0)).unwrap();
        let params = SpectralParams::new(p, 2).unwrap();
        let b = convex_cell_constant(&unit(0.0), params).unwrap();
        let tr = triple_constant(&t, &b, &b, &b, p).unwrap();
        assert!((tr.pow_p() - 3072.0 / (PI * PI)).abs() < 1e-10);
        assert!((tr.value - 17.643).abs() < 1e-3);
        assert!((tr.terms[0].value - tr.terms[2].value).abs() <= 1e-12 * tr.terms[0].value);
        tr.check(1e-12).unwrap();
    }
}
