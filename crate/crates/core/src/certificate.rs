//! Bound values together with the term-by-term record needed to recompute
//! them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{rel_close, OVERFLOW_WATERMARK};

/// Flag attached when an intermediate value exceeded the overflow watermark.
pub const FLAG_MAGNITUDE: &str = "intermediate-exceeds-1e300";

/// One additive contribution to `B^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub label: String,
    /// Which combination rule produced the term.
    pub formula: String,
    pub value: f64,
}

impl Term {
    pub fn new(label: impl Into<String>, formula: impl Into<String>, value: f64) -> Self {
        Self { label: label.into(), formula: formula.into(), value }
    }
}

/// Which Poincaré inequality the constant certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundForm {
    /// `inf_c ‖f − c‖_p ≤ B ‖∇f‖_p`.
    InfOverConstants,
    /// `‖f − f_Ω‖_p ≤ B ‖∇f‖_p`.
    DeviationFromMean,
}

/// A constant `B` with `B^p` equal to the sum of its terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareBound {
    #[serde(rename = "bound")]
    pub value: f64,
    pub p: f64,
    pub form: BoundForm,
    pub multiplicity: usize,
    pub terms: Vec<Term>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Volume of the set the constant belongs to, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl PoincareBound {
    /// Sets `value = (Σ terms)^{1/p}`.
    pub fn from_terms(p: f64, form: BoundForm, multiplicity: usize, terms: Vec<Term>) -> Result<Self> {
        crate::error::require_p(p)?;
        let total: f64 = terms.iter().map(|t| t.value).sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidParameter(format!("certificate terms sum to {total}")));
        }
        let mut flags = Vec::new();
        if terms.iter().any(|t| t.value.abs() > OVERFLOW_WATERMARK) || total > OVERFLOW_WATERMARK {
            flags.push(FLAG_MAGNITUDE.to_string());
        }
        Ok(Self {
            value: total.powf(1.0 / p),
            p,
            form,
            multiplicity,
            terms,
            notes: Vec::new(),
            volume: None,
            flags,
        })
    }

    /// `B^p` as the sum of the certificate terms.
    pub fn pow_p(&self) -> f64 {
        self.terms.iter().map(|t| t.value).sum()
    }

    /// Checks that `value^p` reproduces the term sum.
    pub fn check(&self, tol: f64) -> Result<()> {
        let lhs = self.value.powf(self.p);
        if rel_close(lhs, self.pow_p(), tol) && self.value > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "bound {} does not match its certificate: value^p = {lhs}, terms sum = {}",
                self.value,
                self.pow_p()
            )))
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn with_volume(mut self, volume: f64) -> Self {
        self.volume = Some(volume);
        self
    }

    pub fn flag(&mut self, flag: &str) {
        if !self.flags.iter().any(|f| f == flag) {
            self.flags.push(flag.to_string());
        }
    }

    /// The eigenvalue lower bound `μ_p ≥ B^{−p}` implied by the constant.
    pub fn to_eigen_bound(&self) -> EigenBound {
        let mu = 1.0 / self.pow_p();
        let mut inputs = BTreeMap::new();
        inputs.insert("B".to_string(), self.value);
        inputs.insert("p".to_string(), self.p);
        EigenBound {
            mu_lower: mu,
            p: self.p,
            provenance: vec![ChainFactor::new("inverse-p-th-power-of-constant", inputs, mu)],
            notes: Vec::new(),
        }
    }
}

/// A single multiplicative factor of a composed bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainFactor {
    pub tag: String,
    pub inputs: BTreeMap<String, f64>,
    pub value: f64,
}

impl ChainFactor {
    pub fn new(tag: impl Into<String>, inputs: BTreeMap<String, f64>, value: f64) -> Self {
        Self { tag: tag.into(), inputs, value }
    }
}

/// Builds an input map from name/value pairs.
pub fn inputs<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn product(chain: &[ChainFactor]) -> f64 {
    chain.iter().map(|f| f.value).product()
}

/// Certified lower bound for `μ_p`; the product of the provenance factors
/// equals `mu_lower`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenBound {
    pub mu_lower: f64,
    pub p: f64,
    pub provenance: Vec<ChainFactor>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl EigenBound {
    pub fn from_chain(p: f64, provenance: Vec<ChainFactor>) -> Result<Self> {
        let mu = product(&provenance);
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("eigenvalue bound must be positive, got {mu}")));
        }
        Ok(Self { mu_lower: mu, p, provenance, notes: Vec::new() })
    }

    /// A bare value with a single provenance entry.
    pub fn given(mu_lower: f64, p: f64, tag: &str) -> Result<Self> {
        Self::from_chain(p, vec![ChainFactor::new(tag, inputs([("mu", mu_lower)]), mu_lower)])
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        if rel_close(self.mu_lower, product(&self.provenance), tol) && self.mu_lower > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "eigen bound {} does not match its provenance product {}",
                self.mu_lower,
                product(&self.provenance)
            )))
        }
    }

    /// The Poincaré constant `μ^{−1/p}` this bound implies.
    pub fn poincare_constant(&self) -> f64 {
        self.mu_lower.powf(-1.0 / self.p)
    }
}

/// Result of transferring a constant through a map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    pub bound: f64,
    pub chain: Vec<ChainFactor>,
    /// The grid `q` attaining the minimum, when a minimum over `q` is taken.
    pub q_star: Option<f64>,
    /// Target exponent of the transferred inequality.
    pub s: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl TransferResult {
    pub fn from_chain(chain: Vec<ChainFactor>, q_star: Option<f64>, s: f64) -> Self {
        Self { bound: product(&chain), chain, q_star, s, notes: Vec::new() }
    }

    pub fn check(&self, tol: f64) -> bool {
        rel_close(self.bound, product(&self.chain), tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_value_is_pth_root_of_terms() {
        let b = PoincareBound::from_terms(
            2.0,
            BoundForm::DeviationFromMean,
            1,
            vec![Term::new("a", "x", 3.0), Term::new("b", "y", 6.0)],
        )
        .unwrap();
        assert!((b.value - 3.0).abs() < 1e-15);
        b.check(1e-12).unwrap();
        let e = b.to_eigen_bound();
        assert!((e.mu_lower - 1.0 / 9.0).abs() < 1e-16);
        e.check(1e-12).unwrap();
        assert!((e.poincare_constant() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn serialized_shape() {
        let b = PoincareBound::from_terms(2.0, BoundForm::InfOverConstants, 2, vec![Term::new("a", "x", 4.0)]).unwrap();
        let v: serde_json::Value = serde_json::to_value(&b).unwrap();
        assert_eq!(v["bound"], 2.0);
        assert_eq!(v["form"], "inf-over-constants");
        assert_eq!(v["terms"][0]["formula"], "x");
        assert_eq!(v["multiplicity"], 2);
        let back: PoincareBound = serde_json::from_value(v).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn rejects_empty_or_nonpositive_terms() {
        assert!(PoincareBound::from_terms(2.0, BoundForm::InfOverConstants, 1, vec![]).is_err());
        assert!(PoincareBound::from_terms(1.0, BoundForm::InfOverConstants, 1, vec![Term::new("a", "x", 1.0)]).is_err());
        assert!(EigenBound::given(0.0, 2.0, "x").is_err());
    }

    #[test]
    fn magnitude_flag() {
        let b = PoincareBound::from_terms(2.0, BoundForm::InfOverConstants, 1, vec![Term::new("a", "x", 1e301)]).unwrap();
        assert!(b.flags.iter().any(|f| f == FLAG_MAGNITUDE));
    }
}
