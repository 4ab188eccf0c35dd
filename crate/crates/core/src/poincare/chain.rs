//! Constants for chains of overlapping triples `W = A_1 ∪ ... ∪ A_J`.
//!
//! The deviation of `f` from a single constant on `W` is bounded by a
//! weighted sum of the gradient integrals over the `A_i`. The weight of
//! `A_i` is `C_i B^p(A_i)`; with `m` the overlap multiplicity of the cover,
//! `B^p(W) = m · max_i C_i B^p(A_i)`.
//!
//! Two coefficients are evaluated for every cell and the larger is used:
//!
//! * the suffix-sum coefficient
//!   `2^{p−1} + 2^{2p} (Σ_{k≥i} k^{p−1}|A_k|) / |A_i ∩ A_{i+1}|`, where the
//!   last cell reuses the link `|A_{J−1} ∩ A_J|` and a single-cell chain has
//!   no second term;
//! * the link-by-link coefficient
//!   `2^{p−1} + 2^{2p−2} (S_i/|A_{i−1} ∩ A_i| + S_{i+1}/|A_i ∩ A_{i+1}|)`
//!   with `S_i = Σ_{k≥i} (k−1)^{p−1}|A_k|`, which accounts for both links a
//!   cell takes part in.

use crate::certificate::{BoundForm, PoincareBound, Term};
use crate::error::{require_p, Error, Result};
use crate::geometry::WhitneyChain;
use crate::numeric::{rel_close, MagnitudeGuard};

use super::TAG_CHAIN;

/// Per-cell coefficients of a chain bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainCoefficients {
    /// Suffix-sum coefficient of every cell.
    pub suffix: Vec<f64>,
    /// Same coefficient evaluated from the per-chain double sum.
    pub double_sum: Vec<f64>,
    /// Link-by-link coefficient of every cell.
    pub two_sided: Vec<f64>,
}

impl ChainCoefficients {
    pub fn compute(volumes: &[f64], links: &[f64], p: f64) -> Self {
        let j = volumes.len();
        let base = 2f64.powf(p - 1.0);
        let big = 2f64.powf(2.0 * p);
        let weighted: Vec<f64> = (0..j).map(|k| ((k + 1) as f64).powf(p - 1.0) * volumes[k]).collect();
        let link_of = |i: usize| -> f64 {
            if i + 1 < j {
                links[i]
            } else {
                links[j - 2]
            }
        };

        let mut suffix = vec![0.0; j];
        let mut acc = 0.0;
        for i in (0..j).rev() {
            acc += weighted[i];
            suffix[i] = if j == 1 { base } else { base + big * acc / link_of(i) };
        }

        // Outer sum over chain members, inner over the cells they reach.
        let mut double_sum = vec![base; j];
        if j > 1 {
            for outer in 0..j {
                for (inner, slot) in double_sum.iter_mut().enumerate().take(outer + 1) {
                    *slot += big * weighted[outer] / link_of(inner);
                }
            }
        }

        let shifted: Vec<f64> = (0..j).map(|k| (k as f64).powf(p - 1.0) * volumes[k]).collect();
        let mut s = vec![0.0; j + 1];
        for i in (0..j).rev() {
            s[i] = s[i + 1] + shifted[i];
        }
        let quarter = 2f64.powf(2.0 * p - 2.0);
        let two_sided = (0..j)
            .map(|i| {
                let mut c = base;
                if i > 0 {
                    c += quarter * s[i] / links[i - 1];
                }
                if i + 1 < j {
                    c += quarter * s[i + 1] / links[i];
                }
                c
            })
            .collect();
        Self { suffix, double_sum, two_sided }
    }

    pub fn effective(&self, i: usize) -> f64 {
        self.suffix[i].max(self.two_sided[i])
    }
}

/// Chain constant from raw data: triple volumes `|A_i|`, link volumes
/// `|A_i ∩ A_{i+1}|`, per-triple constants and the cover multiplicity.
pub fn chain_constant_from_parts(
    volumes: &[f64],
    links: &[f64],
    bounds: &[PoincareBound],
    multiplicity: usize,
    p: f64,
) -> Result<PoincareBound> {
    require_p(p)?;
    let j = volumes.len();
    if j == 0 {
        return Err(Error::InvalidParameter("chain has no triples".into()));
    }
    if bounds.len() != j {
        return Err(Error::LengthMismatch { expected: j, found: bounds.len() });
    }
    if links.len() != j - 1 {
        return Err(Error::LengthMismatch { expected: j - 1, found: links.len() });
    }
    if let Some(&bad) = links.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::NonPositiveOverlap(bad));
    }
    if multiplicity == 0 {
        return Err(Error::InvalidParameter("multiplicity must be at least 1".into()));
    }
    for (i, b) in bounds.iter().enumerate() {
        if b.p != p || !(b.value > 0.0) {
            return Err(Error::InvalidParameter(format!("bound for triple {} is not a valid p = {p} constant", i + 1)));
        }
    }

    let coeffs = ChainCoefficients::compute(volumes, links, p);
    let mut guard = MagnitudeGuard::default();
    let weighted: Vec<f64> = (0..j).map(|i| guard.see(coeffs.effective(i) * bounds[i].pow_p())).collect();
    let star = (0..j).fold(0, |best, i| if weighted[i] > weighted[best] { i } else { best });

    let m = multiplicity as f64;
    let bp = bounds[star].pow_p();
    let base = 2f64.powf(p - 1.0);
    let terms = vec![
        Term::new(format!("A_{}: m * 2^(p-1) B^p(A_{})", star + 1, star + 1), TAG_CHAIN, m * base * bp),
        Term::new(
            format!("A_{}: m * (C - 2^(p-1)) B^p(A_{}) (link terms)", star + 1, star + 1),
            TAG_CHAIN,
            m * (coeffs.effective(star) - base) * bp,
        ),
    ];
    let terms: Vec<Term> = terms.into_iter().filter(|t| t.value > 0.0).collect();
    let mut out = PoincareBound::from_terms(p, BoundForm::InfOverConstants, multiplicity, terms)?;
    if guard.tripped() {
        out.flag(crate::certificate::FLAG_MAGNITUDE);
    }
    out.notes.push(format!("multiplicity m = {multiplicity}; B^p = m * max_i C_i B^p(A_i)"));
    out.notes.push("reference constant is the average over A_1".into());
    if j == 1 {
        out.notes.push("single triple: no link term".into());
    } else {
        out.notes.push("last triple reuses the link |A_(J-1) n A_J|".into());
    }
    for i in 0..j {
        out.notes.push(format!(
            "A_{}: suffix C = {}, link-by-link C = {}, C * B^p = {}",
            i + 1,
            coeffs.suffix[i],
            coeffs.two_sided[i],
            weighted[i]
        ));
    }
    let mismatch = (0..j).filter(|&i| !rel_close(coeffs.suffix[i], coeffs.double_sum[i], 1e-12)).count();
    if mismatch > 0 {
        out.notes.push(format!("suffix-sum and double-sum coefficients differ on {mismatch} cells"));
        out.flag("coefficient-forms-disagree");
    }
    Ok(out)
}

pub fn chain_constant(chain: &WhitneyChain, triple_bounds: &[PoincareBound], p: f64) -> Result<PoincareBound> {
    let vols = chain.volumes();
    let b = chain_constant_from_parts(&vols, chain.link_volumes(), triple_bounds, chain.multiplicity(), p)?;
    let cells = chain.cells();
    let union = crate::geometry::union_volume(&cells)?;
    Ok(b.with_volume(union))
}
