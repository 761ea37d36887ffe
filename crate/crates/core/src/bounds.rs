//! Eigenvalue bounds from nonconforming and conforming discretizations,
//! and Richardson extrapolation over mesh-halving schedules.

use crate::fem::{
    assemble_mass, assemble_stiffness, effective_markers, solve_on_mesh, BoundaryCondition, EigenProblemSpec,
    SpaceKind,
};
use crate::geometry::{triangulate, Domain, Marker, Weight};
use crate::specfun::bessel_j_zero;
use crate::{Error, Result};
use std::fmt::Write as _;

/// Relative agreement of successive rate estimates for the asymptotic flag.
pub const RATE_AGREEMENT: f64 = 0.1;

/// `κ² = 1/8 + 1/j₁,₁²`.
pub fn kappa_squared() -> f64 {
    let j = bessel_j_zero(1.0, 1).expect("first zero of J₁");
    0.125 + 1.0 / (j * j)
}

/// Guaranteed lower bound `λ/(1 + κ²h²λ)` from a Crouzeix–Raviart
/// Dirichlet eigenvalue on a mesh of size `h`.
pub fn cr_lower_bound(lambda_cr: f64, h: f64) -> Result<f64> {
    if !(lambda_cr > 0.0 && lambda_cr.is_finite() && h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("lower bound needs λ > 0 and h > 0, got λ = {lambda_cr}, h = {h}")));
    }
    Ok(lambda_cr / (1.0 + kappa_squared() * h * h * lambda_cr))
}

/// Limit estimate from a fit `v(h) = v* + C hʳ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolation {
    pub limit: f64,
    /// Rate from the finest window, if defined.
    pub rate: Option<f64>,
    /// Rates of every three-level window, coarsest first.
    pub window_rates: Vec<Option<f64>>,
    /// Successive rates agree within [`RATE_AGREEMENT`].
    pub asymptotic: bool,
    /// `|v(h_finest) − limit|`.
    pub correction: f64,
}

/// Extrapolates `values` observed at mesh sizes `hs` (coarsest first, a
/// constant refinement ratio). With undefined rate in the finest window the
/// finest value is returned unchanged and the flag is unset.
pub fn richardson_extrapolate(values: &[f64], hs: &[f64]) -> Result<Extrapolation> {
    if values.len() != hs.len() {
        return Err(Error::InvalidInput("values and mesh sizes differ in length".into()));
    }
    if values.len() < 3 {
        return Err(Error::InvalidInput(format!("extrapolation needs at least 3 levels, got {}", values.len())));
    }
    if values.iter().chain(hs).any(|v| !v.is_finite()) || hs.iter().any(|&h| h <= 0.0) {
        return Err(Error::InvalidInput("non-finite value or nonpositive mesh size".into()));
    }
    let q = hs[0] / hs[1];
    if !(q > 1.0) || hs.windows(2).any(|w| ((w[0] / w[1]) - q).abs() > 1e-6 * q) {
        return Err(Error::InvalidInput("mesh sizes must shrink by a constant ratio".into()));
    }
    let window = |v: &[f64]| -> Option<(f64, f64)> {
        let d1 = v[0] - v[1];
        let d2 = v[1] - v[2];
        if d1 == 0.0 || d2 == 0.0 || d1.signum() != d2.signum() || d2.abs() >= d1.abs() {
            return None;
        }
        let r = (d1 / d2).ln() / q.ln();
        Some((r, v[2] - d2 / (q.powf(r) - 1.0)))
    };
    let fits: Vec<Option<(f64, f64)>> = values.windows(3).map(window).collect();
    let window_rates: Vec<Option<f64>> = fits.iter().map(|f| f.map(|(r, _)| r)).collect();
    let last = *values.last().expect("nonempty");
    let (limit, rate) = match fits.last().copied().flatten() {
        Some((r, v)) => (v, Some(r)),
        None => (last, None),
    };
    let asymptotic = match window_rates.as_slice() {
        [.., Some(a), Some(b)] => (a - b).abs() <= RATE_AGREEMENT * b.abs(),
        _ => false,
    };
    Ok(Extrapolation { limit, rate, window_rates, asymptotic, correction: (last - limit).abs() })
}

/// One level of a bracket report.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketRow {
    pub level: u32,
    pub h: f64,
    pub cr: f64,
    /// Certified lower bound (pure Dirichlet only).
    pub cr_lower: Option<f64>,
    /// `‖(K − λM)x‖/(λ‖Mx‖)` of the CR eigenpair behind the bound.
    pub cr_residual: Option<f64>,
    pub p1: f64,
    pub p2: f64,
    /// Whether the CR value lies below the extrapolated limit (observation only).
    pub cr_below_limit: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BracketReport {
    /// 1-based index among the nonzero eigenvalues.
    pub index: usize,
    pub domain: String,
    pub bc: BoundaryCondition,
    pub rows: Vec<BracketRow>,
    /// Extrapolations of the `cr`, `p1`, `p2` columns (3 or more levels).
    pub extrapolated: Vec<(&'static str, Extrapolation)>,
    /// `[max lower, min conforming upper]` when the certified column applies.
    pub enclosure: Option<(f64, f64)>,
}

impl BracketReport {
    pub fn extrapolation(&self, column: &str) -> Option<&Extrapolation> {
        self.extrapolated.iter().find(|(c, _)| *c == column).map(|(_, e)| e)
    }

    /// `level,h,cr,cr_lower,p1,p2` rows and an `extrapolated` footer.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,h,cr,cr_lower,p1,p2\n");
        for r in &self.rows {
            let lower = r.cr_lower.map(|v| format!("{v:.15}")).unwrap_or_default();
            let _ = writeln!(out, "{},{:.6e},{:.15},{},{:.15},{:.15}", r.level, r.h, r.cr, lower, r.p1, r.p2);
        }
        for (col, e) in &self.extrapolated {
            let rate = e.rate.map(|r| format!("{r:.4}")).unwrap_or_default();
            let _ = writeln!(out, "extrapolated,{col},{:.15},{rate}", e.limit);
        }
        out
    }
}

fn certified_scope(domain: &Domain, bc: BoundaryCondition) -> Result<bool> {
    Ok(match bc {
        BoundaryCondition::Dirichlet => true,
        BoundaryCondition::Mixed => domain.as_polygon()?.markers.iter().all(|&m| m == Marker::Dirichlet),
        _ => false,
    })
}

/// Runs P1, P2 and CR over `levels` (ascending) and assembles the report
/// for the `index`-th nonzero eigenvalue.
pub fn bracket_report(domain: &Domain, bc: BoundaryCondition, index: usize, levels: &[u32]) -> Result<BracketReport> {
    if index == 0 {
        return Err(Error::InvalidInput("eigenvalue index is 1-based".into()));
    }
    if levels.is_empty() || levels.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::InvalidInput("levels must be consecutive and ascending".into()));
    }
    let certified = certified_scope(domain, bc)? && matches!(domain.weight, Weight::Unit);
    let base = triangulate(domain)?;
    let kinds = [SpaceKind::CR, SpaceKind::P1, SpaceKind::P2];
    let columns: Vec<Vec<(f64, f64, Option<f64>)>> = crate::par::try_map(&kinds, |&kind| {
        let mut mesh = base.clone();
        let mut out = Vec::with_capacity(levels.len());
        for &level in levels {
            while mesh.level < level {
                mesh = mesh.refine();
            }
            let mut spec = EigenProblemSpec::new(bc, kind, index, level).with_vectors(kind == SpaceKind::CR && certified);
            spec.cr_midpoint = kind == SpaceKind::CR && bc == BoundaryCondition::Steklov;
            let (s, space) = solve_on_mesh(domain, &mesh, &spec)?;
            let v = s.nonzero_values();
            let value = *v.get(index - 1).ok_or_else(|| {
                Error::InvalidInput(format!("level {level} resolves only {} nonzero eigenvalues", v.len()))
            })?;
            let residual = match &s.vectors {
                Some(x) => Some(cr_residual(&space, bc, value, &x.column(index - 1 + s.zero_modes).into_owned())?),
                None => None,
            };
            out.push((mesh.h, value, residual));
        }
        Ok::<_, Error>(out)
    })?;
    let col = |k: usize| -> Vec<f64> { columns[k].iter().map(|r| r.1).collect() };
    let hs: Vec<f64> = columns[0].iter().map(|r| r.0).collect();
    let mut extrapolated = Vec::new();
    if levels.len() >= 3 {
        for (k, name) in ["cr", "p1", "p2"].iter().enumerate() {
            extrapolated.push((*name, richardson_extrapolate(&col(k), &hs)?));
        }
    }
    let limit = extrapolated.iter().find(|(c, _)| *c == "p2").map(|(_, e)| e.limit);
    let mut rows = Vec::with_capacity(levels.len());
    for (i, &level) in levels.iter().enumerate() {
        let (h, cr, residual) = columns[0][i];
        let cr_lower = if certified { Some(cr_lower_bound(cr, h)?) } else { None };
        rows.push(BracketRow {
            level,
            h,
            cr,
            cr_lower,
            cr_residual: residual,
            p1: columns[1][i].1,
            p2: columns[2][i].1,
            cr_below_limit: limit.map(|l| cr < l),
        });
    }
    let enclosure = certified.then(|| {
        let lo = rows.iter().filter_map(|r| r.cr_lower).fold(f64::NEG_INFINITY, f64::max);
        let hi = rows.iter().map(|r| r.p1.min(r.p2)).fold(f64::INFINITY, f64::min);
        (lo, hi)
    });
    Ok(BracketReport { index, domain: domain.name.clone(), bc, rows, extrapolated, enclosure })
}

fn cr_residual(space: &crate::fem::FemSpace, bc: BoundaryCondition, lambda: f64, x: &nalgebra::DVector<f64>) -> Result<f64> {
    let markers = effective_markers(&space.mesh, bc)?;
    let mask = space.dirichlet_mask(&markers);
    let mut kx = vec![0.0; space.n_dofs];
    let mut mx = vec![0.0; space.n_dofs];
    assemble_stiffness(space).matvec(x.as_slice(), &mut kx);
    assemble_mass(space, Weight::Unit).matvec(x.as_slice(), &mut mx);
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for d in (0..space.n_dofs).filter(|&d| !mask[d]) {
        num += (kx[d] - lambda * mx[d]).powi(2);
        den += mx[d] * mx[d];
    }
    Ok(num.sqrt() / (lambda * den.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn kappa_matches_bisected_zero() {
        // independent bisection on J₁ over [3, 4.5]
        let (mut a, mut b) = (3.0f64, 4.5f64);
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if crate::specfun::bessel_j(1.0, a).unwrap() * crate::specfun::bessel_j(1.0, m).unwrap() <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        let j = 0.5 * (a + b);
        assert!((kappa_squared() - (0.125 + 1.0 / (j * j))).abs() < 1e-14);
        let expect = 19.0 / (1.0 + (0.125 + 1.0 / (j * j)) * 0.01 * 19.0);
        assert!((cr_lower_bound(19.0, 0.1).unwrap() - expect).abs() < 1e-13);
    }

    #[test]
    fn lower_bound_limits_and_errors() {
        let b = cr_lower_bound(7.0, 1e-9).unwrap();
        assert!((b - 7.0).abs() < 1e-15);
        assert!(cr_lower_bound(0.0, 0.1).is_err());
        assert!(cr_lower_bound(1.0, -0.1).is_err());
        assert!(cr_lower_bound(f64::NAN, 0.1).is_err());
    }

    proptest! {
        #[test]
        fn lower_bound_monotone(l in 0.1f64..1e4, h in 1e-3f64..1.0, f in 1.001f64..2.0) {
            let b = cr_lower_bound(l, h).unwrap();
            prop_assert!(cr_lower_bound(l * f, h).unwrap() > b);
            prop_assert!(cr_lower_bound(l, h * f).unwrap() < b);
        }

        #[test]
        fn flagged_extrapolation_reduces_error(
            v in -10.0f64..10.0,
            c in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
            r in 0.8f64..4.0,
            noise in 0.0f64..1e-9,
        ) {
            let hs: Vec<f64> = (0..5).map(|i| 0.5f64.powi(i)).collect();
            let vals: Vec<f64> = hs.iter().enumerate()
                .map(|(i, h)| v + c * h.powf(r) + if i % 2 == 0 { noise } else { -noise })
                .collect();
            let e = richardson_extrapolate(&vals, &hs).unwrap();
            if e.asymptotic {
                prop_assert!((vals[4] - e.limit).abs() <= (vals[0] - e.limit).abs());
            }
            prop_assert!((e.limit - v).abs() < 1e-6 * (1.0 + c.abs()));
        }
    }

    #[test]
    fn synthetic_sequences() {
        let e = richardson_extrapolate(&[5.16, 5.04, 5.01], &[0.4, 0.2, 0.1]).unwrap();
        assert!((e.limit - 5.0).abs() < 1e-12);
        assert!((e.rate.unwrap() - 2.0).abs() < 1e-9);
        assert!(!e.asymptotic);
        let c = richardson_extrapolate(&[3.0; 4], &[0.8, 0.4, 0.2, 0.1]).unwrap();
        assert_eq!((c.limit, c.rate, c.asymptotic), (3.0, None, false));
        let hs = [0.8, 0.4, 0.2, 0.1];
        let q: Vec<f64> = hs.iter().map(|h| 1.0 + h * h).collect();
        assert!(richardson_extrapolate(&q, &hs).unwrap().asymptotic);
        let wobble = richardson_extrapolate(&[1.0, 2.0, 1.5], &[0.4, 0.2, 0.1]).unwrap();
        assert_eq!((wobble.limit, wobble.rate), (1.5, None));
        assert!(richardson_extrapolate(&[1.0, 2.0], &[0.2, 0.1]).is_err());
        assert!(richardson_extrapolate(&[1.0, 2.0, 3.0], &[0.4, 0.3, 0.1]).is_err());
    }

    #[test]
    fn square_bracket_contains_two_pi_squared() {
        let d = Domain::builtin("unit-square").unwrap().unwrap();
        let exact = 2.0 * PI * PI;
        let rep = bracket_report(&d, BoundaryCondition::Dirichlet, 1, &[1, 2, 3, 4]).unwrap();
        for r in &rep.rows {
            assert!(r.cr_lower.unwrap() <= exact && exact <= r.p1, "{r:?}");
            assert!(r.cr_residual.unwrap() < 1e-4, "{r:?}");
        }
        let (lo, hi) = rep.enclosure.unwrap();
        assert!(lo <= exact && exact <= hi);
        let p1 = rep.extrapolation("p1").unwrap();
        assert!((p1.limit - exact).abs() < 1e-2);
        for (_, e) in &rep.extrapolated {
            if e.asymptotic {
                let r = rep.rows.last().unwrap();
                assert!(r.cr_lower.unwrap() <= e.limit && e.limit <= r.p1);
            }
        }
        let csv = rep.to_csv();
        assert!(csv.starts_with("level,h,cr,cr_lower,p1,p2\n"));
        assert_eq!(csv.lines().filter(|l| l.starts_with("extrapolated,")).count(), 3);
    }

    #[test]
    fn square_p1_extrapolates_at_rate_two() {
        let d = Domain::builtin("unit-square").unwrap().unwrap();
        let spec = EigenProblemSpec::new(BoundaryCondition::Dirichlet, SpaceKind::P1, 1, 0);
        let runs = crate::fem::solve_levels(&d, &spec, &[3, 4, 5, 6]).unwrap();
        let hs: Vec<f64> = runs.iter().map(|r| r.0).collect();
        let vs: Vec<f64> = runs.iter().map(|r| r.1.real_values()[0]).collect();
        let e = richardson_extrapolate(&vs, &hs).unwrap();
        assert!((e.limit - 2.0 * PI * PI).abs() < 1e-4, "{}", e.limit);
        assert!((e.rate.unwrap() - 2.0).abs() < 0.1);
    }

    #[test]
    fn steklov_has_no_certified_column() {
        let d = Domain::builtin("unit-square").unwrap().unwrap();
        let rep = bracket_report(&d, BoundaryCondition::Steklov, 1, &[2, 3]).unwrap();
        assert!(rep.enclosure.is_none() && rep.rows.iter().all(|r| r.cr_lower.is_none()));
        assert!(rep.extrapolated.is_empty());
        assert!(bracket_report(&d, BoundaryCondition::Dirichlet, 0, &[2]).is_err());
        assert!(bracket_report(&d, BoundaryCondition::Dirichlet, 1, &[2, 4]).is_err());
    }
}
