//! Composition operators induced by quasiconformal maps.
//!
//! A `K`-quasiconformal homeomorphism `φ: Ω → Ω̃` pulls `L^1_p(Ω̃)` back into
//! `L^1_q(Ω)` with norm at most `K^{1/p} Q_{p,q}`, where `Q_{p,q}` integrates a
//! power of `|Dφ|`. Combined with a Sobolev–Poincaré inequality on `Ω` this
//! gives a Poincaré constant on `Ω̃` and, for `s = p`, a lower bound for the
//! Neumann eigenvalue `μ_p(Ω̃)`. Derivative data is always an input: the
//! crate never differentiates a map itself.

mod ball;
mod map;
mod spec;
mod transfer;

pub use ball::{
    ball3_neumann_root, ball_lower_bound, star_domain_3d_bound, half_pi_p_bound, star_map_k, star_map_lipschitz,
    BESSEL_J1_PRIME_ZERO,
};
pub use map::{
    lebesgue_comp_norm, q_p_sup_norm, q_pq_norm, sobolev_comp_norm, DerivativeField, JacobianSamples, QCMapData,
    SampledField, QC_SLACK,
};
pub use spec::MapSpec;
pub use transfer::{
    eigen_transfer, eigen_transfer_at_q, eigen_transfer_lipschitz, poincare_transfer, q_grid, target_exponent,
    whitney_qc_bound, SobolevPoincareBase, Q_GRID_INTERIOR, Q_GRID_TOP_GAP,
};
