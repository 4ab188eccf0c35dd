//! Direction checks: an emitted bound must sit on the safe side of the
//! oracle value.

use serde::{Deserialize, Serialize};

use super::fem::neumann_mu2;
use super::mesh::TriangleMesh;
use super::rayleigh::{minimize_rayleigh_p, ESTIMATE_LABEL};
use crate::certificate::{EigenBound, PoincareBound};
use crate::error::{Error, Result};

/// Largest relative gap between a bound's recorded volume and the mesh area.
pub const VOLUME_MATCH_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy)]
pub enum CheckedBound<'a> {
    Poincare(&'a PoincareBound),
    Eigen(&'a EigenBound),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DominationOptions {
    pub iterations: usize,
    pub seed: u64,
}

impl Default for DominationOptions {
    fn default() -> Self {
        Self { iterations: 300, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    /// `poincare` or `eigen`.
    pub kind: String,
    pub p: f64,
    pub bound: f64,
    pub oracle_value: f64,
    /// Distance to the oracle in the safe direction; negative on failure.
    pub margin: f64,
    pub pass: bool,
    pub oracle: String,
    pub dof: usize,
}

/// PASS iff a Poincaré bound is at least the oracle constant, or an
/// eigenvalue bound is at most the oracle eigenvalue. At `p = 2` the oracle
/// is the P1 eigenvalue; otherwise a Rayleigh-descent estimate.
pub fn check_domination(bound: CheckedBound<'_>, mesh: &TriangleMesh, opts: DominationOptions) -> Result<DominationReport> {
    let p = match bound {
        CheckedBound::Poincare(b) => b.p,
        CheckedBound::Eigen(b) => b.p,
    };
    if let CheckedBound::Poincare(PoincareBound { volume: Some(v), .. }) = bound {
        let area = mesh.area();
        if (v - area).abs() > VOLUME_MATCH_TOL * area {
            return Err(Error::MeshMismatch(format!("bound volume {v} vs mesh area {area}")));
        }
    }
    let (mu, oracle) = if p == 2.0 {
        (neumann_mu2(mesh)?.mu2, "fem-p1".to_string())
    } else {
        let est = minimize_rayleigh_p(mesh, p, opts.iterations, opts.seed)?;
        (est.estimate, format!("rayleigh-descent ({ESTIMATE_LABEL})"))
    };
    let dof = mesh.nodes().len();
    Ok(match bound {
        CheckedBound::Poincare(b) => {
            let oracle_value = mu.powf(-1.0 / p);
            let margin = b.value - oracle_value;
            DominationReport { kind: "poincare".into(), p, bound: b.value, oracle_value, margin, pass: margin >= 0.0, oracle, dof }
        }
        CheckedBound::Eigen(b) => {
            let margin = mu - b.mu_lower;
            DominationReport { kind: "eigen".into(), p, bound: b.mu_lower, oracle_value: mu, margin, pass: margin >= 0.0, oracle, dof }
        }
    })
}
