//! Reference values for checking bounds: P1 finite-element Neumann
//! eigenvalues on planar meshes, discrete Rayleigh quotients for general
//! `p`, and the domination report that compares a bound with them.
//!
//! The finite-element eigenvalue converges from above, so a certified lower
//! bound for `μ₂` that exceeds it is certainly wrong. For `p ≠ 2` the
//! descent minimizer only yields an estimate and is labelled as such.

mod domination;
mod fem;
mod mesh;
mod rayleigh;

use serde::{Deserialize, Serialize};

pub use domination::{check_domination, CheckedBound, DominationOptions, DominationReport, VOLUME_MATCH_TOL};
pub use fem::{
    assemble, eigen_residual, neumann_mu2, neumann_mu2_dense, neumann_mu2_sparse, poincare_constant_p2, EigenResult,
    SolveMethod, DENSE_NODE_LIMIT, RESIDUAL_TARGET,
};
pub use mesh::{mesh_domain, DomainSpec, Rect, TriangleMesh};
pub use rayleigh::{
    constraint_value, minimize_rayleigh_p, project_constraint, quadrature_points, rayleigh_quotient,
    MinimizerResult, CONSTRAINT_TOL, ESTIMATE_LABEL, RANDOM_STARTS,
};

/// Nodal values of a P1 function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn from_fn(mesh: &TriangleMesh, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self { values: mesh.nodes().iter().map(|&x| f(x)).collect() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
