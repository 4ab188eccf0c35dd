//! Transfer of Sobolev–Poincaré constants and eigenvalue bounds from a
//! domain `Ω` to its image `Ω̃ = φ(Ω)`.

use serde::{Deserialize, Serialize};

use super::map::{q_p_sup_norm, q_pq_norm, QCMapData};
use crate::certificate::{inputs, ChainFactor, EigenBound, PoincareBound, TransferResult};
use crate::error::{require_p, Error, Result};
use crate::geometry::ConvexCell;
use crate::numeric::{geometric_interior, rel_close};

/// Number of interior points of the q-grid.
pub const Q_GRID_INTERIOR: usize = 64;
/// Gap between the top of the q-grid and `p`.
pub const Q_GRID_TOP_GAP: f64 = 1e-6;

pub const TAG_QC_COEFFICIENT: &str = "qc-coefficient-root";
pub const TAG_Q_PQ: &str = "derivative-weighted-norm";
pub const TAG_DERIVATIVE_NORM: &str = "derivative-l-alpha-norm-power";
pub const TAG_BASE: &str = "sobolev-poincare-base";
pub const TAG_INV_K: &str = "inverse-qc-coefficient";
pub const TAG_INV_QP: &str = "inverse-sup-derivative-norm-power";
pub const TAG_INV_LN: &str = "inverse-lipschitz-n-th-power";
pub const TAG_INV_MIN_Q: &str = "inverse-min-over-q";

/// A `(r, q)` Sobolev–Poincaré constant `B_{r,q}(Ω)` for the source domain,
/// available over a range of `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SobolevPoincareBase {
    /// A single known constant `B_{r,q0}`. For `q ≥ q0` Hölder's inequality
    /// on the gradient gives `B_{r,q} ≤ B_{r,q0} |Ω|^{1/q0 − 1/q}`.
    Fixed { r: f64, q: f64, value: f64, volume: f64 },
    /// Potential estimate on a convex domain of diameter `d`:
    /// `|u − u_Ω| ≤ d^n/(n|Ω|) ∫ |x−y|^{1−n} |Du(y)| dy` followed by the
    /// Riesz-potential bound `L_q → L_r`, valid for `δ = 1/q − 1/r < 1/n`.
    ConvexPotential { n: usize, r: f64, diameter: f64, volume: f64 },
}

impl SobolevPoincareBase {
    pub fn convex(cell: &ConvexCell, r: f64) -> Self {
        Self::ConvexPotential { n: cell.dim(), r, diameter: cell.diameter(), volume: cell.volume() }
    }

    pub fn r(&self) -> f64 {
        match self {
            Self::Fixed { r, .. } | Self::ConvexPotential { r, .. } => *r,
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Self::Fixed { volume, .. } | Self::ConvexPotential { volume, .. } => *volume,
        }
    }

    fn validate(&self) -> Result<()> {
        let (r, volume) = (self.r(), self.volume());
        if !(r > 1.0) || !r.is_finite() {
            return Err(Error::InvalidParameter(format!("base exponent r must be finite and > 1, got {r}")));
        }
        if !(volume > 0.0) || !volume.is_finite() {
            return Err(Error::InvalidParameter(format!("base volume must be positive, got {volume}")));
        }
        match self {
            Self::Fixed { q, value, .. } => {
                if !(*q >= 1.0 && *q <= r) || !(*value > 0.0) || !value.is_finite() {
                    return Err(Error::InvalidParameter(format!("invalid fixed base: q = {q}, B = {value}")));
                }
            }
            Self::ConvexPotential { n, diameter, .. } => {
                if *n != 2 && *n != 3 {
                    return Err(Error::UnsupportedDimension(*n));
                }
                if !(*diameter > 0.0) || !diameter.is_finite() {
                    return Err(Error::InvalidParameter(format!("diameter must be positive, got {diameter}")));
                }
            }
        }
        Ok(())
    }

    /// Smallest admissible `q` and whether that end point is excluded.
    pub fn q_lower(&self) -> (f64, bool) {
        match self {
            Self::Fixed { q, .. } => (*q, false),
            Self::ConvexPotential { n, r, .. } => {
                let n = *n as f64;
                (n * r / (n + r), true)
            }
        }
    }

    /// `B_{r,q}(Ω)`.
    pub fn constant(&self, q: f64) -> Result<f64> {
        self.validate()?;
        let r = self.r();
        if q > r {
            return Err(Error::InvalidParameter(format!("q = {q} exceeds r = {r}")));
        }
        match self {
            Self::Fixed { q: q0, value, volume, .. } => {
                if q < *q0 {
                    return Err(Error::InvalidParameter(format!("q = {q} below the base exponent {q0}")));
                }
                Ok(value * volume.powf(1.0 / q0 - 1.0 / q))
            }
            Self::ConvexPotential { n, diameter, volume, .. } => {
                let nf = *n as f64;
                let delta = 1.0 / q - 1.0 / r;
                let mu = 1.0 / nf;
                if !(delta < mu) {
                    return Err(Error::InvalidParameter(format!(
                        "potential estimate needs 1/q - 1/r < 1/n, got q = {q}, r = {r}"
                    )));
                }
                let unit_ball = match n {
                    2 => std::f64::consts::PI,
                    _ => 4.0 * std::f64::consts::PI / 3.0,
                };
                let kernel = diameter.powi(*n as i32) / (nf * volume);
                let riesz = ((1.0 - delta) / (mu - delta)).powf(1.0 - delta)
                    * unit_ball.powf(1.0 - mu)
                    * volume.powf(mu - delta);
                Ok(kernel * riesz)
            }
        }
    }
}

/// The q-grid on `[lo, hi]`: both end points and geometrically spaced
/// interior points.
pub fn q_grid(lo: f64, hi: f64) -> Result<Vec<f64>> {
    if !(lo < hi) || !(lo >= 1.0) {
        return Err(Error::EmptyQGrid { lo, hi });
    }
    let mut grid = vec![lo];
    grid.extend(geometric_interior(lo, hi, Q_GRID_INTERIOR));
    grid.push(hi);
    Ok(grid)
}

fn grid_for(base: &SobolevPoincareBase, p: f64) -> Result<Vec<f64>> {
    let (q_lo, exclusive) = base.q_lower();
    let mut lo = q_lo.max(1.0);
    if exclusive && lo == q_lo {
        lo *= 1.0 + 1e-9;
    }
    q_grid(lo, p - Q_GRID_TOP_GAP)
}

/// Target exponent `s = (α − n) r / α`, with `s = r` for `α = ∞`.
pub fn target_exponent(alpha: Option<f64>, n: usize, r: f64) -> f64 {
    match alpha {
        None => r,
        Some(a) => (a - n as f64) * r / a,
    }
}

fn check_base_vs_p(base: &SobolevPoincareBase, p: f64) -> Result<()> {
    require_p(p)?;
    base.validate()?;
    let r = base.r();
    if !(p < r) {
        return Err(Error::InvalidParameter(format!("need p < r, got p = {p}, r = {r}")));
    }
    Ok(())
}

/// Bound on `B_{s,p}(Ω̃)` through `φ: Ω → Ω̃`:
/// `K^{1/p} min_q (Q_{p,q} ‖Dφ | L_α‖^{n/s}) B_{r,q}` over the q-grid.
pub fn poincare_transfer(map: &QCMapData, base: &SobolevPoincareBase, p: f64) -> Result<TransferResult> {
    check_base_vs_p(base, p)?;
    let n = map.n;
    let r = base.r();
    let s = target_exponent(map.alpha, n, r);
    if !(s >= 1.0) {
        return Err(Error::AlphaTooSmall { s });
    }
    let dnorm = map.derivative_norm(map.alpha)?;
    let dpow = dnorm.powf(n as f64 / s);
    let grid = grid_for(base, p)?;
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for &q in &grid {
        let qn = q_pq_norm(map, p, q)?;
        let b = base.constant(q)?;
        let v = qn * b;
        if best.is_none_or(|(bv, ..)| v < bv) {
            best = Some((v, q, qn, b));
        }
    }
    let (_, q_star, qn, b) = best.expect("grid is non-empty");
    let alpha_in = map.alpha.unwrap_or(f64::INFINITY);
    let chain = vec![
        ChainFactor::new(TAG_QC_COEFFICIENT, inputs([("K", map.k), ("p", p)]), map.k.powf(1.0 / p)),
        ChainFactor::new(TAG_Q_PQ, inputs([("p", p), ("q", q_star)]), qn),
        ChainFactor::new(TAG_DERIVATIVE_NORM, inputs([("alpha", alpha_in), ("norm", dnorm), ("s", s)]), dpow),
        ChainFactor::new(TAG_BASE, inputs([("r", r), ("q", q_star)]), b),
    ];
    let mut out = TransferResult::from_chain(chain, Some(q_star), s);
    if map.alpha.is_none() {
        out.notes.push("alpha = infinity: derivative factor is L^(n/s) with |Omega|^0".into());
    }
    Ok(out)
}

/// The `s = p` case evaluated at one `q`: returns `(Q_{p,q}^p ‖Dφ‖_α^n, B_{r,q}^p)`.
fn eigen_parts(map: &QCMapData, base: &SobolevPoincareBase, p: f64, q: f64, alpha: f64) -> Result<(f64, f64)> {
    let dn = map.derivative_norm(Some(alpha))?.powi(map.n as i32);
    let qn = q_pq_norm(map, p, q)?.powf(p);
    Ok((qn * dn, base.constant(q)?.powf(p)))
}

fn eigen_alpha(map: &QCMapData, base: &SobolevPoincareBase, p: f64) -> Result<f64> {
    check_base_vs_p(base, p)?;
    let r = base.r();
    let alpha = map.n as f64 * r / (r - p);
    if let Some(a) = map.alpha {
        if a < alpha {
            return Err(Error::InvalidParameter(format!(
                "|Dphi| is only known to be in L_{a}; the eigenvalue transfer needs L_{alpha}"
            )));
        }
    }
    Ok(alpha)
}

fn eigen_from_parts(map: &QCMapData, p: f64, q: f64, alpha: f64, r: f64, part: f64, b: f64) -> Result<EigenBound> {
    let provenance = vec![
        ChainFactor::new(TAG_INV_K, inputs([("K", map.k)]), 1.0 / map.k),
        ChainFactor::new(TAG_INV_MIN_Q, inputs([("p", p), ("q", q), ("alpha", alpha)]), 1.0 / part),
        ChainFactor::new(TAG_BASE, inputs([("r", r), ("q", q), ("p", p)]), 1.0 / b),
    ];
    EigenBound::from_chain(p, provenance)
}

/// `μ_p(Ω̃) ≥ 1 / [K min_q (Q_{p,q}^p ‖Dφ | L_α‖^n) B_{r,q}^p]` with
/// `α = n r / (r − p)`.
pub fn eigen_transfer(map: &QCMapData, base: &SobolevPoincareBase, p: f64) -> Result<EigenBound> {
    let alpha = eigen_alpha(map, base, p)?;
    let grid = grid_for(base, p)?;
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for &q in &grid {
        let (part, b) = eigen_parts(map, base, p, q, alpha)?;
        if best.is_none_or(|(v, ..)| part * b < v) {
            best = Some((part * b, q, part, b));
        }
    }
    let (_, q, part, b) = best.expect("grid is non-empty");
    let mut out = eigen_from_parts(map, p, q, alpha, base.r(), part, b)?;
    out.notes.push(format!("q* = {q} on a {}-point grid", grid.len()));
    Ok(out)
}

/// [`eigen_transfer`] evaluated at a single `q`, without minimisation.
pub fn eigen_transfer_at_q(map: &QCMapData, base: &SobolevPoincareBase, p: f64, q: f64) -> Result<EigenBound> {
    let alpha = eigen_alpha(map, base, p)?;
    let (part, b) = eigen_parts(map, base, p, q, alpha)?;
    eigen_from_parts(map, p, q, alpha, base.r(), part, b)
}

/// `μ_p(Ω̃) ≥ μ_p(Ω) / (K Q_p^p L^n)` for a Lipschitz map with
/// `L = ess sup |Dφ|`.
pub fn eigen_transfer_lipschitz(map: &QCMapData, base_mu: &EigenBound, p: f64) -> Result<EigenBound> {
    require_p(p)?;
    if base_mu.p != p {
        return Err(Error::InvalidParameter(format!("base bound is for p = {}, requested p = {p}", base_mu.p)));
    }
    let l = map.derivative_norm(None)?;
    let n = map.n as i32;
    let qpp = q_p_sup_norm(map, p)?.powf(p);
    let ln = l.powi(n);
    let lp = l.powf(p);
    if !rel_close(qpp * ln, lp, 1e-12) {
        return Err(Error::InvalidParameter(format!("Q_p^p L^n = {} differs from L^p = {lp}", qpp * ln)));
    }
    let mut provenance = base_mu.provenance.clone();
    provenance.push(ChainFactor::new(TAG_INV_K, inputs([("K", map.k)]), 1.0 / map.k));
    provenance.push(ChainFactor::new(TAG_INV_QP, inputs([("L", l), ("p", p), ("n", n as f64)]), 1.0 / qpp));
    provenance.push(ChainFactor::new(TAG_INV_LN, inputs([("L", l), ("n", n as f64)]), 1.0 / ln));
    let mut out = EigenBound::from_chain(p, provenance)?;
    out.notes = base_mu.notes.clone();
    out.notes.push(format!("checked Q_p^p * L^n = L^p = {lp:e} to 1e-12"));
    Ok(out)
}

/// Eigenvalue bound on the image of a cell complex: `μ_p(W) ≥ B^{−p}` from
/// the combined constant, then the Lipschitz transfer.
pub fn whitney_qc_bound(chain_bound: &PoincareBound, map: &QCMapData, p: f64) -> Result<EigenBound> {
    if chain_bound.p != p {
        return Err(Error::InvalidParameter(format!(
            "constant is for p = {}, requested p = {p}",
            chain_bound.p
        )));
    }
    eigen_transfer_lipschitz(map, &chain_bound.to_eigen_bound(), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::BoundForm;
    use crate::certificate::Term;
    use proptest::prelude::*;

    fn unit_square() -> ConvexCell {
        ConvexCell::aabb(&[0.0, 0.0], &[1.0, 1.0]).unwrap()
    }

    fn diag(a: f64, b: f64) -> Vec<Vec<f64>> {
        vec![vec![a, 0.0], vec![0.0, b]]
    }

    #[test]
    fn target_exponent_examples() {
        assert_eq!(target_exponent(Some(4.0), 2, 4.0), 2.0);
        assert_eq!(target_exponent(None, 3, 5.0), 5.0);
    }

    #[test]
    fn grid_shape() {
        let g = q_grid(1.0, 2.0 - Q_GRID_TOP_GAP).unwrap();
        assert_eq!(g.len(), Q_GRID_INTERIOR + 2);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(matches!(q_grid(2.0, 1.5), Err(Error::EmptyQGrid { .. })));
    }

    #[test]
    fn fixed_base_extension() {
        let b = SobolevPoincareBase::Fixed { r: 4.0, q: 2.0, value: 0.5, volume: 4.0 };
        assert_eq!(b.constant(2.0).unwrap(), 0.5);
        assert!((b.constant(4.0).unwrap() - 0.5 * 4f64.powf(0.25)).abs() < 1e-15);
        assert!(b.constant(1.5).is_err());
    }

    #[test]
    fn convex_potential_dominates_known_constant() {
        // On the unit square with r = q = 2 the sharp constant is 1/π.
        let base = SobolevPoincareBase::convex(&unit_square(), 2.0);
        let v = base.constant(2.0).unwrap();
        assert!(v >= 1.0 / std::f64::consts::PI);
        assert!(base.constant(1.0).is_err());
    }

    #[test]
    fn alpha_too_small_and_empty_grid() {
        let mut m = QCMapData::identity(2, 1.0).unwrap();
        m.alpha = Some(2.1);
        let base = SobolevPoincareBase::Fixed { r: 4.0, q: 1.0, value: 1.0, volume: 1.0 };
        assert!(matches!(poincare_transfer(&m, &base, 2.0), Err(Error::AlphaTooSmall { .. })));
        let m = QCMapData::identity(2, 1.0).unwrap();
        let late = SobolevPoincareBase::Fixed { r: 4.0, q: 3.0, value: 1.0, volume: 1.0 };
        assert!(matches!(poincare_transfer(&m, &late, 2.0), Err(Error::EmptyQGrid { .. })));
        assert!(poincare_transfer(&m, &base, 4.0).is_err());
    }

    #[test]
    fn identity_transfer_closed_form() {
        let vol = 2.5;
        let mut m = QCMapData::identity(2, vol).unwrap();
        m.alpha = Some(8.0);
        let base = SobolevPoincareBase::Fixed { r: 4.0, q: 1.0, value: 0.7, volume: vol };
        let p = 2.0;
        let res = poincare_transfer(&m, &base, p).unwrap();
        assert!(res.check(1e-12));
        let s = res.s;
        assert_eq!(s, 3.0);
        let grid = q_grid(1.0, p - Q_GRID_TOP_GAP).unwrap();
        let closed = grid
            .iter()
            .map(|&q| {
                vol.powf((p - q) / (p * q)) * vol.powf(2.0 / (8.0 * s)) * 0.7 * vol.powf(1.0 - 1.0 / q)
            })
            .fold(f64::INFINITY, f64::min);
        assert!(rel_close(res.bound, closed, 1e-12));
    }

    #[test]
    fn eigen_transfer_identity_below_true_value() {
        let m = QCMapData::identity(2, 1.0).unwrap();
        let base = SobolevPoincareBase::convex(&unit_square(), 4.0);
        let e = eigen_transfer(&m, &base, 2.0).unwrap();
        e.check(1e-12).unwrap();
        assert!(e.mu_lower > 0.0 && e.mu_lower <= std::f64::consts::PI.powi(2));
        let mut doubled = m.clone();
        doubled.k = 2.0;
        let e2 = eigen_transfer(&doubled, &base, 2.0).unwrap();
        assert!(rel_close(e2.mu_lower, e.mu_lower / 2.0, 1e-12));
        assert!(eigen_transfer(&m, &SobolevPoincareBase::convex(&unit_square(), 2.0), 2.0).is_err());
    }

    #[test]
    fn lipschitz_stretched_rectangle() {
        for a in [1.0, 1.5, 2.0, 3.7] {
            let m = QCMapData::linear(&diag(a, 1.0), 1.0, None).unwrap();
            let pi2 = std::f64::consts::PI.powi(2);
            let base = EigenBound::given(pi2, 2.0, "unit-square").unwrap();
            let e = eigen_transfer_lipschitz(&m, &base, 2.0).unwrap();
            assert!(rel_close(e.mu_lower, pi2 / a.powi(3), 1e-12));
            assert!(e.mu_lower <= pi2 / (a * a) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn lipschitz_identity_and_homogeneity() {
        let base = EigenBound::given(3.0, 3.0, "given").unwrap();
        let id = QCMapData::identity(3, 1.0).unwrap();
        assert_eq!(eigen_transfer_lipschitz(&id, &base, 3.0).unwrap().mu_lower, 3.0);
        let m1 = QCMapData::from_bounds(3, 2.0, 1.3, 1.0).unwrap();
        let m2 = QCMapData::from_bounds(3, 2.0, 2.6, 1.0).unwrap();
        let a = eigen_transfer_lipschitz(&m1, &base, 3.0).unwrap().mu_lower;
        let b = eigen_transfer_lipschitz(&m2, &base, 3.0).unwrap().mu_lower;
        assert!(rel_close(a / b, 8.0, 1e-12));
        let mut non = id.clone();
        non.lipschitz = false;
        assert!(matches!(eigen_transfer_lipschitz(&non, &base, 3.0), Err(Error::NotLipschitz)));
    }

    #[test]
    fn whitney_identity_and_monotonicity() {
        let mk = |v: f64| {
            PoincareBound::from_terms(2.0, BoundForm::DeviationFromMean, 1, vec![Term::new("t", "x", v * v)]).unwrap()
        };
        let id = QCMapData::identity(2, 1.0).unwrap();
        let e = whitney_qc_bound(&mk(0.5), &id, 2.0).unwrap();
        assert!(rel_close(e.mu_lower, 4.0, 1e-12));
        let m = QCMapData::linear(&diag(2.0, 1.0), 1.0, None).unwrap();
        let a = whitney_qc_bound(&mk(0.5), &m, 2.0).unwrap().mu_lower;
        let b = whitney_qc_bound(&mk(0.6), &m, 2.0).unwrap().mu_lower;
        assert!(b < a);
        assert!(whitney_qc_bound(&mk(0.5), &m, 3.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn eigen_min_over_q_beats_every_grid_point(
            a in 1.0f64..3.0, b in 0.5f64..2.0, p in 1.3f64..3.0, dr in 0.3f64..3.0,
        ) {
            let m = QCMapData::linear(&diag(a, b), 1.0, None).unwrap();
            let base = SobolevPoincareBase::convex(&unit_square(), p + dr);
            let best = eigen_transfer(&m, &base, p).unwrap();
            let (lo, _) = base.q_lower();
            let grid = grid_for(&base, p).unwrap();
            prop_assert!(grid[0] >= lo.max(1.0));
            for &q in &grid {
                let at = eigen_transfer_at_q(&m, &base, p, q).unwrap();
                prop_assert!(best.mu_lower >= at.mu_lower * (1.0 - 1e-12));
            }
        }

        #[test]
        fn transfer_chain_product_matches(a in 1.0f64..3.0, p in 1.2f64..3.0, alpha in 5.0f64..40.0) {
            let mut m = QCMapData::linear(&diag(a, 1.0), 1.0, None).unwrap();
            m.alpha = Some(alpha);
            let base = SobolevPoincareBase::Fixed { r: p + 2.0, q: 1.0, value: 0.4, volume: 1.0 };
            let res = poincare_transfer(&m, &base, p).unwrap();
            prop_assert!(res.check(1e-12));
            prop_assert!(res.q_star.unwrap() < p);
        }
    }
}
