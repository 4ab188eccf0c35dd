//! JSON description of a map, as read from configuration files.

use serde::{Deserialize, Serialize};

use super::map::{DerivativeField, QCMapData, SampledField};
use crate::error::{Error, Result};

/// `{"kind":"linear","matrix":[[..]]}` or
/// `{"kind":"sampled","nodes":[..],"weights":[..],"dphi":[..],"jac":[..]}`,
/// each with an optional `"K"` override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Linear {
        matrix: Vec<Vec<f64>>,
        #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
        k: Option<f64>,
    },
    Sampled {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        nodes: Vec<Vec<f64>>,
        weights: Vec<f64>,
        dphi: Vec<f64>,
        jac: Vec<f64>,
        #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
        k: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
        #[serde(default = "default_true")]
        lipschitz: bool,
    },
}

fn default_true() -> bool {
    true
}

impl MapSpec {
    pub fn identity(n: usize) -> Self {
        let matrix = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Self::Linear { matrix, k: None }
    }

    /// Map data on a source domain of the given volume. Sampled maps take
    /// their volume from the quadrature weights and, without an override,
    /// the smallest `K` consistent with the samples.
    pub fn to_map_data(&self, domain_volume: f64) -> Result<QCMapData> {
        match self {
            Self::Linear { matrix, k } => QCMapData::linear(matrix, domain_volume, *k),
            Self::Sampled { n, nodes, weights, dphi, jac, k, alpha, lipschitz } => {
                let dim = match (n, nodes.first()) {
                    (Some(n), _) => *n,
                    (None, Some(x)) => x.len(),
                    (None, None) => {
                        return Err(Error::InvalidParameter("sampled map needs \"n\" or nodes".into()))
                    }
                };
                let k = match k {
                    Some(k) => *k,
                    None => dphi
                        .iter()
                        .zip(jac)
                        .map(|(d, j)| d.powi(dim as i32) / j)
                        .fold(1.0, f64::max),
                };
                let volume: f64 = weights.iter().sum();
                let field = SampledField {
                    nodes: nodes.clone(),
                    weights: weights.clone(),
                    dphi: dphi.clone(),
                    jac: jac.clone(),
                };
                QCMapData::new(dim, k, volume, DerivativeField::Sampled(field), *alpha, *lipschitz)
            }
        }
    }
}
