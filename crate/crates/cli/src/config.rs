//! Configuration files for each command.

use std::path::Path;

use anyhow::{Context, Result};
use qcbound_core::geometry::ConvexCell;
use qcbound_core::oracle::DomainSpec;
use qcbound_core::qc_transfer::{MapSpec, SobolevPoincareBase};
use qcbound_core::{EigenBound, PoincareBound};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Reads and parses a JSON file; syntax errors carry line and column.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{}: malformed configuration", path.display()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellSpec {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Vertices { vertices: Vec<Vec<f64>> },
}

impl CellSpec {
    pub fn build(&self) -> Result<ConvexCell> {
        Ok(match self {
            Self::Box { lo, hi } => ConvexCell::aabb(lo, hi)?,
            Self::Vertices { vertices } => ConvexCell::from_vertices(vertices.clone())?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combine {
    Convex,
    Pair,
    Triple,
    Chain,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellsConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub p: Option<f64>,
    pub cells: Vec<CellSpec>,
    pub combine: Combine,
    /// Cell indices of each triple, for `chain`.
    #[serde(default)]
    pub triples: Vec<[usize; 3]>,
    #[serde(default)]
    pub multiplicity: Option<usize>,
    #[serde(default = "default_true")]
    pub verify: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnowflakeConfig {
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default)]
    pub overlap_fraction: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl Default for SnowflakeConfig {
    fn default() -> Self {
        Self { p: None, a: 1.0, depth: None, overlap_fraction: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarConfig {
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default = "one")]
    pub delta: f64,
    #[serde(default = "two")]
    pub n: usize,
    #[serde(default)]
    pub segments: Option<usize>,
    #[serde(default = "default_true")]
    pub verify: bool,
}

fn two() -> usize {
    2
}

impl Default for StarConfig {
    fn default() -> Self {
        Self { p: None, delta: 1.0, n: 2, segments: None, verify: true }
    }
}

/// What is being transferred.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseSpec {
    /// A known lower bound for `μ_p` of the source domain.
    Eigen { mu: f64 },
    /// The unit-ball bound in dimension `n`.
    Ball { n: usize },
    /// A Poincaré certificate of the source domain.
    Certificate { bound: PoincareBound },
    /// A Sobolev–Poincaré constant; `eigen` selects the `s = p` route.
    Sobolev {
        base: SobolevPoincareBase,
        #[serde(default)]
        eigen: bool,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub p: Option<f64>,
    pub map: MapSpec,
    pub base: BaseSpec,
    /// Source domain; enables the oracle check on its image for linear maps.
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub domain_volume: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnyCertificate {
    Poincare(PoincareBound),
    Eigen(EigenBound),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default)]
    pub name: Option<String>,
    /// Inline certificate.
    #[serde(default)]
    pub certificate: Option<AnyCertificate>,
    /// A certificate or report file, relative to the configuration file.
    #[serde(default)]
    pub certificate_file: Option<String>,
    pub domain: DomainSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunEntry {
    pub command: String,
    #[serde(default)]
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    pub runs: Vec<RunEntry>,
}
