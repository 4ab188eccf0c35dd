//! Analytic data of a quasiconformal map and the norms built from it.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{require_p, Error, Result};

/// Additive slack in the pointwise check `|Dφ|^n ≤ K |J|`.
pub const QC_SLACK: f64 = 1e-9;

/// Values of `|Dφ|` and `|J(x, φ)|` at quadrature nodes of the source domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledField {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub dphi: Vec<f64>,
    pub jac: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DerivativeField {
    /// Constant operator norm and Jacobian (affine maps, or envelopes).
    ClosedForm { norm: f64, jacobian: f64 },
    Sampled(SampledField),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QCMapData {
    pub n: usize,
    pub k: f64,
    pub domain_volume: f64,
    pub derivative: DerivativeField,
    /// Integrability exponent of `|Dφ|`; `None` means `α = ∞`.
    pub alpha: Option<f64>,
    pub lipschitz: bool,
}

impl QCMapData {
    /// Validates `K ≥ 1`, positive Jacobians and `|Dφ|^n ≤ K |J|` at every
    /// sample.
    pub fn new(
        n: usize,
        k: f64,
        domain_volume: f64,
        derivative: DerivativeField,
        alpha: Option<f64>,
        lipschitz: bool,
    ) -> Result<Self> {
        if n != 2 && n != 3 {
            return Err(Error::UnsupportedDimension(n));
        }
        if !(k >= 1.0) || !k.is_finite() {
            return Err(Error::InvalidParameter(format!("K must be >= 1, got {k}")));
        }
        if !(domain_volume > 0.0) || !domain_volume.is_finite() {
            return Err(Error::InvalidParameter(format!("domain volume must be positive, got {domain_volume}")));
        }
        if let Some(a) = alpha {
            if !(a > n as f64) {
                return Err(Error::InvalidParameter(format!("alpha must exceed n = {n}, got {a}")));
            }
        }
        let check = |index: usize, d: f64, j: f64| -> Result<()> {
            if !(j > 0.0) || !j.is_finite() {
                return Err(Error::InvalidParameter(format!("Jacobian at sample {index} must be positive, got {j}")));
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::InvalidParameter(format!("|Dphi| at sample {index} must be positive, got {d}")));
            }
            let lhs = d.powi(n as i32);
            let rhs = k * j;
            if lhs > rhs * (1.0 + 1e-12) + QC_SLACK {
                return Err(Error::QuasiconformalityViolated { index, lhs, rhs });
            }
            Ok(())
        };
        match &derivative {
            DerivativeField::ClosedForm { norm, jacobian } => check(0, *norm, *jacobian)?,
            DerivativeField::Sampled(s) => {
                let m = s.weights.len();
                for len in [s.dphi.len(), s.jac.len()] {
                    if len != m {
                        return Err(Error::LengthMismatch { expected: m, found: len });
                    }
                }
                if !s.nodes.is_empty() && s.nodes.len() != m {
                    return Err(Error::LengthMismatch { expected: m, found: s.nodes.len() });
                }
                if m == 0 {
                    return Err(Error::InvalidParameter("sampled field has no samples".into()));
                }
                if s.weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
                    return Err(Error::InvalidParameter("quadrature weights must be non-negative".into()));
                }
                for i in 0..m {
                    check(i, s.dphi[i], s.jac[i])?;
                }
            }
        }
        Ok(Self { n, k, domain_volume, derivative, alpha, lipschitz })
    }

    /// Affine map `x ↦ A x + b` on a domain of the given volume. `K` defaults
    /// to the smallest admissible value `σ_max^n / |det A|`.
    pub fn linear(matrix: &[Vec<f64>], domain_volume: f64, k_override: Option<f64>) -> Result<Self> {
        let n = matrix.len();
        if matrix.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidParameter("matrix must be square".into()));
        }
        if n != 2 && n != 3 {
            return Err(Error::UnsupportedDimension(n));
        }
        let a = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
        let det = a.determinant().abs();
        if !(det > 0.0) {
            return Err(Error::InvalidParameter("matrix is singular".into()));
        }
        let norm = a.singular_values().max();
        let k_min = norm.powi(n as i32) / det;
        let k = k_override.unwrap_or(k_min.max(1.0));
        Self::new(n, k, domain_volume, DerivativeField::ClosedForm { norm, jacobian: det }, None, true)
    }

    pub fn identity(n: usize, domain_volume: f64) -> Result<Self> {
        Self::new(n, 1.0, domain_volume, DerivativeField::ClosedForm { norm: 1.0, jacobian: 1.0 }, None, true)
    }

    /// Lipschitz map known only through `K` and `L = ess sup |Dφ|`; the
    /// Jacobian envelope `L^n / K` is the smallest value consistent with both.
    pub fn from_bounds(n: usize, k: f64, l: f64, domain_volume: f64) -> Result<Self> {
        let jacobian = l.powi(n as i32) / k;
        Self::new(n, k, domain_volume, DerivativeField::ClosedForm { norm: l, jacobian }, None, true)
    }

    /// `ess sup |Dφ|`.
    pub fn sup_norm(&self) -> f64 {
        match &self.derivative {
            DerivativeField::ClosedForm { norm, .. } => *norm,
            DerivativeField::Sampled(s) => s.dphi.iter().copied().fold(0.0, f64::max),
        }
    }

    /// `ln ∫ |Dφ|^e dx` by the closed form or the supplied quadrature,
    /// evaluated in log space so that large exponents near `q → p` stay finite.
    pub fn log_integrate_power(&self, e: f64) -> f64 {
        match &self.derivative {
            DerivativeField::ClosedForm { norm, .. } => e * norm.ln() + self.domain_volume.ln(),
            DerivativeField::Sampled(s) => {
                let logs: Vec<f64> = s.dphi.iter().map(|d| e * d.ln()).collect();
                let top = s
                    .weights
                    .iter()
                    .zip(&logs)
                    .filter(|(w, _)| **w > 0.0)
                    .map(|(_, l)| *l)
                    .fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = s.weights.iter().zip(&logs).map(|(w, l)| w * (l - top).exp()).sum();
                top + sum.ln()
            }
        }
    }

    /// `‖Dφ | L_α‖`; for `α = ∞` the ess sup.
    pub fn derivative_norm(&self, alpha: Option<f64>) -> Result<f64> {
        match alpha {
            None => {
                if !self.lipschitz {
                    return Err(Error::NotLipschitz);
                }
                Ok(self.sup_norm())
            }
            Some(a) => {
                let v = (self.log_integrate_power(a) / a).exp();
                if v.is_finite() && v > 0.0 {
                    Ok(v)
                } else {
                    Err(Error::QuadratureDiverged)
                }
            }
        }
    }
}

/// `Q_{p,q} = (∫ |Dφ|^{(p−n)q/(p−q)})^{(p−q)/(pq)}`.
pub fn q_pq_norm(map: &QCMapData, p: f64, q: f64) -> Result<f64> {
    require_p(p)?;
    if !(q >= 1.0) || !(q < p) {
        return Err(Error::InvalidParameter(format!("need 1 <= q < p, got q = {q}, p = {p}")));
    }
    let n = map.n as f64;
    let outer = (p - q) / (p * q);
    let log_integral = if p == n {
        match &map.derivative {
            DerivativeField::ClosedForm { .. } => map.domain_volume.ln(),
            DerivativeField::Sampled(s) => s.weights.iter().sum::<f64>().ln(),
        }
    } else {
        map.log_integrate_power((p - n) * q / (p - q))
    };
    let v = (outer * log_integral).exp();
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::QuadratureDiverged)
    }
}

/// `Q_p = ess sup |Dφ|^{(p−n)/p}` for Lipschitz maps.
pub fn q_p_sup_norm(map: &QCMapData, p: f64) -> Result<f64> {
    require_p(p)?;
    if !map.lipschitz {
        return Err(Error::NotLipschitz);
    }
    Ok(map.sup_norm().powf((p - map.n as f64) / p))
}

/// Samples of `|J(y, φ^{−1})|` on the target domain with quadrature weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianSamples {
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

/// Norm of `φ*: L_r → L_s`:
/// `(∫ |J(y, φ^{−1})|^{r/(r−s)} dy)^{(r−s)/(rs)}`, or `ess sup |J|^{1/s}` when
/// `s = r`.
pub fn lebesgue_comp_norm(samples: &JacobianSamples, r: f64, s: f64) -> Result<f64> {
    if !(s >= 1.0) || !(s <= r) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("need 1 <= s <= r, got s = {s}, r = {r}")));
    }
    if samples.weights.len() != samples.values.len() {
        return Err(Error::LengthMismatch { expected: samples.weights.len(), found: samples.values.len() });
    }
    if samples.values.is_empty() || samples.values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("Jacobian samples must be positive".into()));
    }
    if s == r {
        let m = samples.values.iter().copied().fold(0.0, f64::max);
        return Ok(m.powf(1.0 / s));
    }
    let e = r / (r - s);
    let integral: f64 = samples.weights.iter().zip(&samples.values).map(|(w, v)| w * v.powf(e)).sum();
    let v = integral.powf((r - s) / (r * s));
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::QuadratureDiverged)
    }
}

/// Norm bound `K^{1/p} Q_{p,q}` of `φ*: L^1_p → L^1_q`.
pub fn sobolev_comp_norm(map: &QCMapData, p: f64, q: f64) -> Result<f64> {
    Ok(map.k.powf(1.0 / p) * q_pq_norm(map, p, q)?)
}
