//! Eigenvalue bounds on the unit ball and the star-shaped two-piece domain
//! obtained from it by a quasiconformal map.

use super::map::QCMapData;
use super::transfer::eigen_transfer_lipschitz;
use crate::certificate::{inputs, ChainFactor, EigenBound};
use crate::error::{require_p, Error, Result};
use crate::numeric::bisect;
use crate::poincare::pi_p;

/// First positive zero of `J_1'`, to the stored precision.
pub const BESSEL_J1_PRIME_ZERO: f64 = 1.84118;

pub const TAG_BALL_EXACT: &str = "ball-neumann-exact-p2";
pub const TAG_BALL_ENT: &str = "ball-half-pi-p-power";

/// First positive zero of `(t^{-1/2} J_{3/2}(t))'`, i.e. of
/// `2t cos t − 2 sin t + t² sin t`.
pub fn ball3_neumann_root() -> f64 {
    let f = |t: f64| 2.0 * t * t.cos() - 2.0 * t.sin() + t * t * t.sin();
    bisect(f, 1.0, 3.0, 1e-15).expect("sign change on [1, 3]")
}

/// `(π_p / 2)^p`, a lower bound for `μ_p` on any convex domain of diameter 2.
pub fn half_pi_p_bound(p: f64) -> Result<EigenBound> {
    let v = (pi_p(p)? / 2.0).powf(p);
    EigenBound::from_chain(p, vec![ChainFactor::new(TAG_BALL_ENT, inputs([("p", p)]), v)])
}

/// Lower bound for `μ_p(B^n(0,1))`.
pub fn ball_lower_bound(n: usize, p: f64) -> Result<EigenBound> {
    require_p(p)?;
    if p < 2.0 {
        return Err(Error::NoBoundImplemented(format!("ball bound for p = {p} < 2")));
    }
    if p > 2.0 {
        return half_pi_p_bound(p);
    }
    let zero = match n {
        2 => BESSEL_J1_PRIME_ZERO,
        3 => ball3_neumann_root(),
        _ => {
            let mut b = half_pi_p_bound(p)?;
            b.notes.push(format!("no exact value stored for n = {n}; diameter bound used"));
            return Ok(b);
        }
    };
    let v = zero * zero;
    EigenBound::from_chain(p, vec![ChainFactor::new(TAG_BALL_EXACT, inputs([("n", n as f64), ("zero", zero)]), v)])
}

/// Quasiconformality coefficient of the radial map from the unit ball onto
/// the star domain: `K = [2 √(4+√6+√2) / (4−√6−√2)]^{1/2}`.
pub fn star_map_k() -> f64 {
    let (s6, s2) = (6f64.sqrt(), 2f64.sqrt());
    (2.0 * (4.0 + s6 + s2).sqrt() / (4.0 - s6 - s2)).sqrt()
}

/// Lipschitz constant of the same map:
/// `L = 2δ (√(4+√6−√2) + √(4−√6+√2)) / (√6−√2)`.
pub fn star_map_lipschitz(delta: f64) -> f64 {
    let (s6, s2) = (6f64.sqrt(), 2f64.sqrt());
    2.0 * delta * ((4.0 + s6 - s2).sqrt() + (4.0 - s6 + s2).sqrt()) / (s6 - s2)
}

/// Lower bound for `μ_p` on the three-dimensional star domain with parameter
/// `δ`, transferred from a lower bound on the unit ball.
pub fn star_domain_3d_bound(delta: f64, p: f64, base_mu: &EigenBound) -> Result<EigenBound> {
    if !(p > 3.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("star-domain transfer needs p > 3, got {p}")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let ball_volume = 4.0 * std::f64::consts::PI / 3.0;
    let map = QCMapData::from_bounds(3, star_map_k(), star_map_lipschitz(delta), ball_volume)?;
    let mut out = eigen_transfer_lipschitz(&map, base_mu, p)?;
    out.notes.push(
        "K and L are the radical bounds for the radial map; the closed-form displays of the final \
         estimate differ in radical signs and in the power of delta, so the value is recomputed \
         from K and L"
            .into(),
    );
    Ok(out)
}
