//! Index-by-index comparison of two spectra, each with an error estimate.

use crate::bie::{solve_steklov_bie, NodeCount};
use crate::bounds::richardson_extrapolate;
use crate::fem::{solve_levels, BoundaryCondition, EigenProblemSpec, SpaceKind};
use crate::geometry::Domain;
use crate::{Error, Result};
use std::fmt;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ConsistentWithEqual,
    Distinct,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::ConsistentWithEqual => "consistent-with-equal",
            Verdict::Distinct => "distinct",
        })
    }
}

/// A limit estimate and its uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub delta: f64,
}

impl Estimate {
    /// Richardson limit with `δ = |v_finest − v*|`; with an undefined rate,
    /// the finest value with `δ` the last difference.
    pub fn from_sequence(values: &[f64], hs: &[f64]) -> Result<Estimate> {
        let e = richardson_extrapolate(values, hs)?;
        let n = values.len();
        let delta = if e.rate.is_some() { e.correction } else { (values[n - 1] - values[n - 2]).abs() };
        Ok(Estimate { value: e.limit, delta: delta.max(1e-12 * e.limit.abs()) })
    }

    /// Finest value with `δ` the change from the previous resolution.
    pub fn from_pair(coarse: f64, fine: f64) -> Estimate {
        Estimate { value: fine, delta: (fine - coarse).abs().max(1e-12 * fine.abs()) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexComparison {
    pub index: usize,
    pub a: Estimate,
    pub b: Estimate,
    pub verdict: Verdict,
}

impl IndexComparison {
    pub fn difference(&self) -> f64 {
        (self.a.value - self.b.value).abs()
    }

    pub fn combined_width(&self) -> f64 {
        self.a.delta + self.b.delta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub domain_a: String,
    pub domain_b: String,
    pub method: String,
    pub bc: BoundaryCondition,
    pub rows: Vec<IndexComparison>,
}

impl CompareReport {
    /// Distinct if any index is.
    pub fn verdict(&self) -> Verdict {
        if self.rows.iter().any(|r| r.verdict == Verdict::Distinct) {
            Verdict::Distinct
        } else {
            Verdict::ConsistentWithEqual
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,a,delta_a,b,delta_b,difference,verdict\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.15},{:.3e},{:.15},{:.3e},{:.3e},{}",
                r.index, r.a.value, r.a.delta, r.b.value, r.b.delta, r.difference(), r.verdict
            );
        }
        let _ = writeln!(out, "overall,{},{},{},{}", self.domain_a, self.domain_b, self.method, self.verdict());
        out
    }
}

/// Pairs estimates index by index (1-based indices).
pub fn compare_estimates(a: &[Estimate], b: &[Estimate]) -> Vec<IndexComparison> {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (&a, &b))| {
            let verdict = if (a.value - b.value).abs() <= a.delta + b.delta {
                Verdict::ConsistentWithEqual
            } else {
                Verdict::Distinct
            };
            IndexComparison { index: i + 1, a, b, verdict }
        })
        .collect()
}

/// Per-index extrapolated nonzero eigenvalues over a level schedule.
pub fn fem_estimates(
    domain: &Domain,
    bc: BoundaryCondition,
    kind: SpaceKind,
    count: usize,
    levels: &[u32],
) -> Result<Vec<Estimate>> {
    let mut spec = EigenProblemSpec::new(bc, kind, count, 0);
    spec.cr_midpoint = kind == SpaceKind::CR && bc == BoundaryCondition::Steklov;
    let runs = solve_levels(domain, &spec, levels)?;
    let hs: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let vals: Vec<Vec<f64>> = runs.iter().map(|r| r.1.nonzero_values()).collect();
    (0..count)
        .map(|i| {
            let seq: Vec<f64> = vals.iter().map(|v| v[i]).collect();
            if seq.len() >= 3 {
                Estimate::from_sequence(&seq, &hs)
            } else if seq.len() == 2 {
                Ok(Estimate::from_pair(seq[0], seq[1]))
            } else {
                Err(Error::InvalidInput("comparison needs at least two levels".into()))
            }
        })
        .collect()
}

/// Steklov estimates from the two finest node counts of a schedule.
pub fn bie_estimates(domain: &Domain, count: usize, schedule: &[NodeCount]) -> Result<Vec<Estimate>> {
    if schedule.len() < 2 {
        return Err(Error::InvalidInput("comparison needs at least two node counts".into()));
    }
    let n = schedule.len();
    let coarse = solve_steklov_bie(domain, schedule[n - 2], count)?.nonzero_values();
    let fine = solve_steklov_bie(domain, schedule[n - 1], count)?.nonzero_values();
    Ok(coarse.iter().zip(&fine).map(|(&c, &f)| Estimate::from_pair(c, f)).collect())
}

/// Compares two polygons with one FEM space over a level schedule.
pub fn compare_fem(
    a: &Domain,
    b: &Domain,
    bc: BoundaryCondition,
    kind: SpaceKind,
    count: usize,
    levels: &[u32],
) -> Result<CompareReport> {
    let pair = [a, b];
    let mut est = crate::par::try_map(&pair, |d| fem_estimates(d, bc, kind, count, levels))?;
    let eb = est.pop().expect("two domains");
    let ea = est.pop().expect("two domains");
    Ok(CompareReport {
        domain_a: a.name.clone(),
        domain_b: b.name.clone(),
        method: kind.tag().to_string(),
        bc,
        rows: compare_estimates(&ea, &eb),
    })
}

/// Compares two circle-bounded domains with the Steklov BIE.
pub fn compare_bie(a: &Domain, b: &Domain, count: usize, schedule: &[NodeCount]) -> Result<CompareReport> {
    let ea = bie_estimates(a, count, schedule)?;
    let eb = bie_estimates(b, count, schedule)?;
    Ok(CompareReport {
        domain_a: a.name.clone(),
        domain_b: b.name.clone(),
        method: "bie".into(),
        bc: BoundaryCondition::Steklov,
        rows: compare_estimates(&ea, &eb),
    })
}
