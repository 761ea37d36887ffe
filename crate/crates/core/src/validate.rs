//! Analytic-oracle self checks run by `spectra validate`.

use crate::bie::{solve_steklov_bie, NodeCount};
use crate::bounds::cr_lower_bound;
use crate::fem::{solve_fem, BoundaryCondition, EigenProblemSpec, SpaceKind};
use crate::geometry::{Domain, Marker};
use crate::mps::{CornerSelection, MpsBasis, MpsProblem, DEFAULT_BASIS_SIZE};
use crate::pencil::{solve_general, solve_symdef, Pencil};
use crate::reference::{concentric_annulus_steklov, disk_spectra, rectangle_spectra, DiskKind, RectangleSides};
use crate::specfun::{bessel_j, bessel_j_zero};
use crate::Result;
use nalgebra::DMatrix;
use std::f64::consts::PI;
use std::fmt;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    /// Measured error, `None` when the computation itself failed.
    pub error: Option<f64>,
    pub tolerance: f64,
    pub message: Option<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        matches!(self.error, Some(e) if e <= self.tolerance)
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        match (&self.error, &self.message) {
            (Some(e), _) => write!(f, "{status} {:<28} error {e:.3e} (tolerance {:.1e})", self.name, self.tolerance),
            (None, Some(m)) => write!(f, "{status} {:<28} {m}", self.name),
            (None, None) => write!(f, "{status} {:<28}", self.name),
        }
    }
}

type CheckFn = fn() -> Result<f64>;

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn builtin(name: &str) -> Result<Domain> {
    Domain::builtin(name).expect("known built-in")
}

fn bessel_values() -> Result<f64> {
    let refs = [
        (0.0, 1.0, 0.765_197_686_557_966_6),
        (1.0, 2.5, 0.497_094_102_464_274_4),
        (2.0, 30.0, 0.078_451_246_073_265_38),
        (0.5, 3.0, 0.065_008_182_877_375_8),
    ];
    let mut worst = 0.0f64;
    for (nu, x, v) in refs {
        worst = worst.max((bessel_j(nu, x)? - v).abs());
    }
    worst = worst.max((bessel_j_zero(0.0, 1)? - 2.404_825_557_695_773).abs());
    Ok(worst)
}

fn pencil_small() -> Result<f64> {
    let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
    let b = DMatrix::identity(2, 2);
    let s = solve_symdef(&Pencil::new(a.clone(), b.clone())?, false)?.real_values();
    let exact = [2.5 - 0.5 * 5f64.sqrt(), 2.5 + 0.5 * 5f64.sqrt()];
    let g = solve_general(&Pencil::new(a, b)?)?.real_values();
    Ok(max_abs_diff(&s, &exact).max(max_abs_diff(&g, &exact)))
}

fn disk_steklov_bie() -> Result<f64> {
    let s = solve_steklov_bie(&builtin("unit-disk")?, NodeCount::PerCurve(128), 12)?;
    let exact = disk_spectra(DiskKind::Steklov, 1.0, 13)?;
    Ok(max_abs_diff(&s.real_values(), &exact.values))
}

fn annulus_steklov_bie() -> Result<f64> {
    let s = solve_steklov_bie(&builtin("annulus:eps=0")?, NodeCount::PerCurve(256), 20)?;
    let exact = concentric_annulus_steklov(0.1, 1.0, 21)?;
    Ok(max_abs_diff(&s.real_values(), &exact.values))
}

fn fem_relative(domain: &str, bc: BoundaryCondition, exact: f64) -> Result<f64> {
    let spec = EigenProblemSpec::new(bc, SpaceKind::P2, 1, 4);
    let v = solve_fem(&builtin(domain)?, &spec)?.nonzero_values()[0];
    Ok((v - exact).abs() / exact)
}

fn square_dirichlet() -> Result<f64> {
    let exact = rectangle_spectra(1.0, 1.0, RectangleSides::uniform(Marker::Dirichlet), 1)?.values[0];
    fem_relative("unit-square", BoundaryCondition::Dirichlet, exact)
}

fn square_neumann() -> Result<f64> {
    let exact = rectangle_spectra(1.0, 1.0, RectangleSides::uniform(Marker::Neumann), 2)?.values[1];
    fem_relative("unit-square", BoundaryCondition::Neumann, exact)
}

fn square_mixed() -> Result<f64> {
    let sides = RectangleSides { top: Marker::Neumann, ..RectangleSides::uniform(Marker::Dirichlet) };
    let exact = rectangle_spectra(1.0, 1.0, sides, 1)?.values[0];
    fem_relative("dn-square", BoundaryCondition::Mixed, exact)
}

fn square_bracket() -> Result<f64> {
    let d = builtin("unit-square")?;
    let exact = 2.0 * PI * PI;
    let mut worst = 0.0f64;
    for kind in [SpaceKind::CR, SpaceKind::P1] {
        let spec = EigenProblemSpec::new(BoundaryCondition::Dirichlet, kind, 1, 3);
        let mesh_h = crate::geometry::triangulate(&d)?.refined(3).h;
        let v = solve_fem(&d, &spec)?.real_values()[0];
        let violation = match kind {
            SpaceKind::CR => cr_lower_bound(v, mesh_h)? - exact,
            _ => exact - v,
        };
        worst = worst.max(violation.max(0.0));
    }
    Ok(worst)
}

fn square_mps() -> Result<f64> {
    let d = builtin("unit-square")?;
    let p = MpsProblem::new(&d, MpsBasis::new(&d, CornerSelection::Single, DEFAULT_BASIS_SIZE)?)?;
    let c = p.refine_minimum(19.0, 21.0)?;
    Ok((c.lambda - 2.0 * PI * PI).abs())
}

fn disk_dirichlet_scaling() -> Result<f64> {
    let a = disk_spectra(DiskKind::Dirichlet, 1.0, 6)?;
    let b = disk_spectra(DiskKind::Dirichlet, 0.5, 6)?;
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| (4.0 * x - y).abs() / y).fold(0.0, f64::max))
}

const CHECKS: &[(&str, CheckFn, f64)] = &[
    ("bessel reference values", bessel_values, 1e-13),
    ("pencil 2x2 closed form", pencil_small, 1e-13),
    ("disk dirichlet scaling", disk_dirichlet_scaling, 1e-12),
    ("disk steklov bie", disk_steklov_bie, 1e-10),
    ("concentric annulus bie", annulus_steklov_bie, 1e-9),
    ("square dirichlet p2", square_dirichlet, 5e-5),
    ("square neumann p2", square_neumann, 5e-5),
    ("square mixed p2", square_mixed, 5e-5),
    ("square cr/p1 bracket", square_bracket, 0.0),
    ("square mps", square_mps, 1e-6),
];

/// Names of the available checks.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.0).collect()
}

/// Runs every check whose name contains `filter` (all when `None`).
pub fn run_checks(filter: Option<&str>) -> Vec<CheckResult> {
    let selected: Vec<&(&str, CheckFn, f64)> =
        CHECKS.iter().filter(|c| filter.is_none_or(|f| c.0.contains(f))).collect();
    crate::par::map(&selected, |&&(name, f, tolerance)| match f() {
        Ok(e) => CheckResult { name, error: Some(e), tolerance, message: None },
        Err(e) => CheckResult { name, error: None, tolerance, message: Some(e.to_string()) },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_suite_passes() {
        let results = run_checks(None);
        assert_eq!(results.len(), CHECKS.len());
        for r in &results {
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn filter_and_display() {
        let r = run_checks(Some("bessel"));
        assert_eq!(r.len(), 1);
        assert!(r[0].to_string().starts_with("PASS bessel"));
        let failed = CheckResult { name: "x", error: None, tolerance: 1.0, message: Some("boom".into()) };
        assert!(!failed.passed());
        assert!(failed.to_string().contains("boom"));
    }
}
