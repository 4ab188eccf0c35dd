//! Report assembly and rendering.

use anyhow::Result;
use qcbound_core::oracle::DominationReport;
use qcbound_core::poincare::SeriesCertificate;
use qcbound_core::{EigenBound, PoincareBound, TransferResult};
use serde::{Deserialize, Serialize};

use crate::args::Format;

pub const TOOL: &str = "qcbound";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Certificate {
    Poincare(PoincareBound),
    Eigen(EigenBound),
    Series(SeriesCertificate),
    Transfer(TransferResult),
}

/// The headline number of a report and the formula tags it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Primary {
    pub kind: String,
    pub value: f64,
    pub formula_chain: Vec<String>,
}

impl Primary {
    pub fn poincare(b: &PoincareBound) -> Self {
        let mut chain: Vec<String> = Vec::new();
        for t in &b.terms {
            if !chain.contains(&t.formula) {
                chain.push(t.formula.clone());
            }
        }
        Self { kind: "poincare-constant".into(), value: b.value, formula_chain: chain }
    }

    pub fn eigen(b: &EigenBound) -> Self {
        Self {
            kind: "eigenvalue-lower-bound".into(),
            value: b.mu_lower,
            formula_chain: b.provenance.iter().map(|f| f.tag.clone()).collect(),
        }
    }

    pub fn transfer(t: &TransferResult) -> Self {
        Self {
            kind: "transferred-constant".into(),
            value: t.bound,
            formula_chain: t.chain.iter().map(|f| f.tag.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub domain: String,
    pub p: f64,
    pub primary: Primary,
    pub certificates: Vec<Certificate>,
    pub checks: Vec<DominationReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl BoundReport {
    pub fn new(command: &str, domain: String, p: f64, primary: Primary) -> Self {
        Self {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            domain,
            p,
            primary,
            certificates: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            timing_ms: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| !c.pass)
    }
}

pub const CSV_HEADER: [&str; 6] = ["domain", "p", "bound", "oracle_value", "margin", "formula_chain"];

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders reports: a JSON object for one report (or an array when `list`
/// is set), or a CSV table with one row per report in input order.
pub fn emit_table(reports: &[BoundReport], format: Format, list: bool) -> Result<String> {
    anyhow::ensure!(!reports.is_empty(), "no reports to emit");
    match format {
        Format::Json => {
            let mut s = if list || reports.len() > 1 {
                serde_json::to_string_pretty(reports)?
            } else {
                serde_json::to_string_pretty(&reports[0])?
            };
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER)?;
            for r in reports {
                let check = r.checks.first();
                w.write_record([
                    r.domain.clone(),
                    num(r.p),
                    num(r.primary.value),
                    check.map(|c| num(c.oracle_value)).unwrap_or_default(),
                    check.map(|c| num(c.margin)).unwrap_or_default(),
                    r.primary.formula_chain.join(";"),
                ])?;
            }
            Ok(String::from_utf8(w.into_inner()?)?)
        }
    }
}
