//! Index of determinacy: the largest `n` for which polynomials stay dense
//! in `L2((1+t²)^n dμ)`.
//!
//! Density of polynomials in `L2(μ_{m+1})` is equivalent to determinacy of
//! `μ_m`, so `ind μ = 1 + max{m : μ_m determinate}`. The scan classifies
//! `μ_0 = μ, μ_1, μ_2, ...` in turn and stops at the first level that is
//! not determinate. Every answer is an estimate from finite data.

use std::cmp::Ordering;

use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::{self, ClassifyPolicy, DeterminacyVerdict, Verdict, VerdictJson};
use crate::measures::{self, Measure};
use crate::num::PrecisionConfig;

/// Maximum factor by which a scan raises the working precision.
const MAX_PRECISION_FACTOR: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Index {
    /// `μ` itself is indeterminate; the index is not defined.
    NotDeterminate,
    Finite(usize),
    /// Every scanned level was determinate (or the scan stopped early on an
    /// inconclusive level, see [`IndexReport::truncated`]).
    AtLeast(usize),
}

impl Index {
    pub fn to_json(&self) -> IndexJson {
        match self {
            Index::NotDeterminate => IndexJson { kind: "not_determinate".into(), n: None },
            Index::Finite(n) => IndexJson { kind: "finite".into(), n: Some(*n) },
            Index::AtLeast(n) => IndexJson { kind: "at_least".into(), n: Some(*n) },
        }
    }
}

#[derive(Debug, Clone)]
pub struct LevelReport {
    /// Power `m` of `(1+t²)^m`.
    pub level: usize,
    /// Recurrence coefficients resolved at this level.
    pub coefficients: usize,
    pub bits: u32,
    pub verdict: DeterminacyVerdict,
}

#[derive(Debug, Clone)]
pub struct IndexReport {
    pub index: Index,
    pub per_level: Vec<LevelReport>,
    /// Set when an inconclusive level ended the scan.
    pub truncated: bool,
}

impl IndexReport {
    pub fn to_json(&self) -> IndexReportJson {
        IndexReportJson {
            index: self.index.to_json(),
            truncated: self.truncated,
            per_level: self
                .per_level
                .iter()
                .map(|l| LevelJson {
                    level: l.level,
                    coefficients: l.coefficients,
                    bits: l.bits,
                    verdict: l.verdict.to_json(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelJson {
    pub level: usize,
    pub coefficients: usize,
    pub bits: u32,
    pub verdict: VerdictJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReportJson {
    pub index: IndexJson,
    pub truncated: bool,
    pub per_level: Vec<LevelJson>,
}

/// Scans `μ_m = (1+t²)^m dμ / C_m` for `m = 0..n_max`.
///
/// At each level the recurrence coefficients are computed from the measure
/// (up to `policy.n_max` of them, and no more than the number of atoms),
/// and only the prefix on which a `P`-bit and a `2P`-bit run agree is
/// classified. When that prefix falls short, `P` is doubled (up to four
/// times the measure's precision) and the higher precision is kept for the
/// remaining levels.
pub fn index_of_determinacy(mu: &Measure, n_max: usize, policy: &ClassifyPolicy) -> Result<IndexReport> {
    if n_max == 0 {
        return Err(Error::Malformed("n_max must be positive".into()));
    }
    let base = *mu.precision();
    let mut bits = base.bits();
    let mut per_level = Vec::new();
    for m in 0..n_max {
        let wanted = match mu.atom_count() {
            Some(s) => policy.n_max.min(s),
            None => policy.n_max,
        };
        let (resolved, level_bits) = loop {
            let cfg = base.with_bits(bits);
            let mu_m = measures::power_reweight(&mu.clone().with_precision(cfg), m as i32)?.0;
            let r = measures::measure_to_jacobi_resolved(&mu_m, wanted);
            let short = match &r {
                Ok(r) => r.jacobi.len() < wanted,
                Err(Error::PrecisionLoss { .. }) => true,
                Err(_) => false,
            };
            if short && bits < MAX_PRECISION_FACTOR * base.bits() {
                bits *= 2;
                log::info!("level {m}: raising precision to {bits} bits");
                continue;
            }
            break (r?, bits);
        };
        let j = resolved.jacobi;
        let level_policy = ClassifyPolicy { n_max: j.len(), ..policy.clone() };
        let verdict = jacobi::classify(&j, &level_policy)?;
        let kind = verdict.verdict;
        per_level.push(LevelReport { level: m, coefficients: j.len(), bits: level_bits, verdict });
        match kind {
            Verdict::Determinate => {}
            Verdict::Indeterminate => {
                let index = if m == 0 { Index::NotDeterminate } else { Index::Finite(m) };
                return Ok(IndexReport { index, per_level, truncated: false });
            }
            Verdict::Inconclusive => {
                return Ok(IndexReport { index: Index::AtLeast(m), per_level, truncated: true });
            }
        }
    }
    Ok(IndexReport { index: Index::AtLeast(n_max), per_level, truncated: false })
}

/// `index_of_determinacy(gauss_damp(mu_g, alpha), n_max)`; for `alpha > 0`
/// the damped measure has infinite index, so the expected answer is
/// `AtLeast(n_max)`.
pub fn infinite_index_probe(
    mu_g: &Measure,
    alpha: &Rational,
    n_max: usize,
    policy: &ClassifyPolicy,
) -> Result<IndexReport> {
    if alpha.cmp0() != Ordering::Greater {
        return Err(Error::Malformed("alpha must be positive".into()));
    }
    index_of_determinacy(&measures::gauss_damp(mu_g, alpha)?, n_max, policy)
}

/// Policy used by the index scan when none is given: the classifier
/// defaults with at most 64 coefficients per level.
pub fn default_policy() -> ClassifyPolicy {
    ClassifyPolicy::default().with_n_max(64)
}

/// Precision the scan starts from for quadrature proxies.
pub fn proxy_precision() -> PrecisionConfig {
    PrecisionConfig::bigfloat(jacobi::LOGNORMAL_MIN_BITS).expect("valid precision")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_alpha() {
        let mu = Measure::gaussian(PrecisionConfig::default());
        assert!(matches!(infinite_index_probe(&mu, &Rational::new(), 3, &default_policy()), Err(Error::Malformed(_))));
    }

    #[test]
    fn rejects_empty_scan() {
        let mu = Measure::gaussian(PrecisionConfig::default());
        assert!(matches!(index_of_determinacy(&mu, 0, &default_policy()), Err(Error::Malformed(_))));
    }
}
