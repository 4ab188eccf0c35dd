//! The two-piece star-shaped domain `Ω_δ = Ω1 ∪ Ω2`.
//!
//! With `α = δ(√3 − 1)/2`, the pieces are
//! `Ω1 = {max(|x'| − δ, −α) < x_n < α}` and
//! `Ω2 = {−α < x_n < min(δ − |x'|, α)}`.
//! In the plane both are trapezoids. In space they are frustums of cones,
//! replaced here by frustums over inscribed regular `M`-gons.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ConvexCell;
use crate::error::{Error, Result};

pub const DEFAULT_SEGMENTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarDomainSpec {
    pub delta: f64,
    pub n: usize,
    /// Polygon resolution of the cross-sections in 3D.
    #[serde(default = "default_segments")]
    pub segments: usize,
}

fn default_segments() -> usize {
    DEFAULT_SEGMENTS
}

impl StarDomainSpec {
    pub fn new(delta: f64, n: usize) -> Self {
        Self { delta, n, segments: DEFAULT_SEGMENTS }
    }

    /// Always recomputed from `delta`.
    pub fn alpha(&self) -> f64 {
        self.delta * (3f64.sqrt() - 1.0) / 2.0
    }
}

#[derive(Debug, Clone)]
pub struct StarDomain {
    pub spec: StarDomainSpec,
    pub omega1: ConvexCell,
    pub omega2: ConvexCell,
    /// Relative volume deficit of the polytopal pieces against the exact
    /// frustums; zero in the plane.
    pub discretization_rel_error: f64,
}

impl StarDomain {
    /// Exact volume of each piece.
    pub fn exact_piece_volume(&self) -> f64 {
        let (d, a) = (self.spec.delta, self.spec.alpha());
        match self.spec.n {
            2 => 4.0 * a * d,
            // Frustum of height 2α with radii δ − α and δ + α.
            _ => PI * 2.0 * a / 3.0 * ((d - a).powi(2) + (d - a) * (d + a) + (d + a).powi(2)),
        }
    }

    /// Exact volume of `Ω1 ∩ Ω2` (the open pieces share the slab; the
    /// literal set intersection is used).
    pub fn exact_intersection_volume(&self) -> f64 {
        let (d, a) = (self.spec.delta, self.spec.alpha());
        match self.spec.n {
            2 => 4.0 * a * d - 2.0 * a * a,
            // Double frustum with radius δ − |x_n|.
            _ => 2.0 * PI * a / 3.0 * (d * d + d * (d - a) + (d - a).powi(2)),
        }
    }

    pub fn exact_union_volume(&self) -> f64 {
        2.0 * self.exact_piece_volume() - self.exact_intersection_volume()
    }

    /// Outline of the planar union, counter-clockwise; star-shaped with
    /// respect to the origin.
    pub fn union_outline(&self) -> Option<Vec<[f64; 2]>> {
        if self.spec.n != 2 {
            return None;
        }
        let (d, a) = (self.spec.delta, self.spec.alpha());
        Some(vec![[d, 0.0], [d + a, a], [-d - a, a], [-d, 0.0], [-d - a, -a], [d + a, -a]])
    }

    /// Membership in the exact (open) domain.
    pub fn contains_exact(&self, x: &[f64]) -> bool {
        let (d, a) = (self.spec.delta, self.spec.alpha());
        let xn = x[self.spec.n - 1];
        let r = x[..self.spec.n - 1].iter().map(|c| c * c).sum::<f64>().sqrt();
        let in1 = (r - d).max(-a) < xn && xn < a;
        let in2 = -a < xn && xn < (d - r).min(a);
        in1 || in2
    }
}

fn frustum(r_bottom: f64, r_top: f64, z0: f64, z1: f64, m: usize) -> Result<ConvexCell> {
    let mut pts = Vec::with_capacity(2 * m);
    for (r, z) in [(r_bottom, z0), (r_top, z1)] {
        for k in 0..m {
            let t = 2.0 * PI * k as f64 / m as f64;
            pts.push([r * t.cos(), r * t.sin(), z]);
        }
    }
    ConvexCell::from_points_3d(&pts)
}

pub fn build_star_domain(spec: StarDomainSpec) -> Result<StarDomain> {
    if !(spec.delta > 0.0) || !spec.delta.is_finite() {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {}", spec.delta)));
    }
    let (d, a) = (spec.delta, spec.alpha());
    match spec.n {
        2 => {
            let omega1 = ConvexCell::from_points_2d(&[[-(d - a), -a], [d - a, -a], [d + a, a], [-(d + a), a]])?;
            let omega2 = ConvexCell::from_points_2d(&[[-(d + a), -a], [d + a, -a], [d - a, a], [-(d - a), a]])?;
            Ok(StarDomain { spec, omega1, omega2, discretization_rel_error: 0.0 })
        }
        3 => {
            if spec.segments < 3 {
                return Err(Error::InvalidParameter("need at least 3 segments".into()));
            }
            let m = spec.segments;
            let omega1 = frustum(d - a, d + a, -a, a, m)?;
            let omega2 = frustum(d + a, d - a, -a, a, m)?;
            let ratio = m as f64 / (2.0 * PI) * (2.0 * PI / m as f64).sin();
            Ok(StarDomain { spec, omega1, omega2, discretization_rel_error: 1.0 - ratio })
        }
        n => Err(Error::UnsupportedDimension(n)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{intersection_volume, union_volume};

    #[test]
    fn planar_pieces() {
        let s = build_star_domain(StarDomainSpec::new(1.0, 2)).unwrap();
        let a = s.spec.alpha();
        assert!((a - (3f64.sqrt() - 1.0) / 2.0).abs() < 1e-16);
        assert!((s.omega1.volume() - 2.0 * (3f64.sqrt() - 1.0)).abs() < 1e-14);
        let (lo, hi) = s.omega1.bbox();
        assert!((hi[1] - lo[1] - (3f64.sqrt() - 1.0)).abs() < 1e-15);
        let inter = intersection_volume(&s.omega1, &s.omega2).unwrap();
        assert!((inter - s.exact_intersection_volume()).abs() < 1e-14);
        let union = union_volume(&[s.omega1.clone(), s.omega2.clone()]).unwrap();
        assert!((union - 3f64.sqrt()).abs() < 1e-14);
        let outline = crate::geometry::polygon_area(&s.union_outline().unwrap());
        assert!((outline - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn planar_scaling_by_delta() {
        let s1 = build_star_domain(StarDomainSpec::new(1.0, 2)).unwrap();
        let s2 = build_star_domain(StarDomainSpec::new(2.0, 2)).unwrap();
        assert!((s2.omega1.volume() - 4.0 * s1.omega1.volume()).abs() < 1e-13);
        assert!((s2.exact_union_volume() - 4.0 * s1.exact_union_volume()).abs() < 1e-13);
    }

    #[test]
    fn spatial_pieces_track_discretization_error() {
        let s = build_star_domain(StarDomainSpec::new(1.0, 3)).unwrap();
        let exact = s.exact_piece_volume();
        let rel = (exact - s.omega1.volume()) / exact;
        assert!((rel - s.discretization_rel_error).abs() < 1e-12);
        assert!(s.discretization_rel_error < 2e-3);
        let inter = intersection_volume(&s.omega1, &s.omega2).unwrap();
        let rel_i = (s.exact_intersection_volume() - inter) / s.exact_intersection_volume();
        assert!((rel_i - s.discretization_rel_error).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(build_star_domain(StarDomainSpec::new(1.0, 4)), Err(Error::UnsupportedDimension(4))));
        assert!(build_star_domain(StarDomainSpec::new(-1.0, 2)).is_err());
    }
}
