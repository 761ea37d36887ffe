//! End-to-end acceptance run: one PASS/FAIL/SKIP line per criterion.
//!
//! Set `SPECTRA_PARTITION_DOMAIN` to a domain file for the weighted mixed
//! problem; without it that criterion is skipped.

use spectra::bie::{solve_steklov_bie, sweep_annulus, NodeCount};
use spectra::bounds::{bracket_report, richardson_extrapolate};
use spectra::compare::{compare_estimates, Estimate, Verdict};
use spectra::fem::{solve_levels, BoundaryCondition, EigenProblemSpec, SpaceKind};
use spectra::geometry::{load_domain, Domain, Marker};
use spectra::mps::{local_minima, CornerSelection, MpsBasis, MpsProblem, DEFAULT_BASIS_SIZE};
use spectra::reference::{
    concentric_annulus_steklov, disk_spectra, rectangle_spectra, union_spectrum, DiskKind, RectangleSides,
};
use spectra::specfun::bessel_j_zero;
use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::Instant;

type Check = Result<(bool, String), Box<dyn std::error::Error>>;

fn builtin(name: &str) -> Domain {
    Domain::builtin(name).expect("built-in name").expect("valid built-in")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Per-level nonzero eigenvalues and the Richardson limit of each index.
struct LevelRun {
    levels: Vec<Vec<f64>>,
    limits: Vec<f64>,
    estimates: Vec<Estimate>,
}

fn fem_run(d: &Domain, bc: BoundaryCondition, kind: SpaceKind, count: usize, levels: &[u32]) -> spectra::Result<LevelRun> {
    let mut spec = EigenProblemSpec::new(bc, kind, count, 0);
    spec.cr_midpoint = kind == SpaceKind::CR && bc == BoundaryCondition::Steklov;
    let runs = solve_levels(d, &spec, levels)?;
    let hs: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let per_level: Vec<Vec<f64>> = runs.iter().map(|r| r.1.nonzero_values()).collect();
    let mut limits = Vec::with_capacity(count);
    let mut estimates = Vec::with_capacity(count);
    for i in 0..count {
        let seq: Vec<f64> = per_level.iter().map(|v| v[i]).collect();
        limits.push(richardson_extrapolate(&seq, &hs)?.limit);
        estimates.push(Estimate::from_sequence(&seq, &hs)?);
    }
    Ok(LevelRun { levels: per_level, limits, estimates })
}

fn annulus_reference_values() -> Check {
    let start = Instant::now();
    let d = Domain::eccentric_annulus(0.88, 0.1)?;
    let mut last = None;
    for n in [130, 260, 520, 780, 1040] {
        last = Some(solve_steklov_bie(&d, NodeCount::Total(n), 100)?.real_values());
    }
    let v = last.expect("schedule is nonempty");
    let secs = start.elapsed().as_secs_f64();
    let targets = [
        (1, 0.794597555472255, 1e-8),
        (2, 0.961791479149744, 1e-8),
        (10, 4.438646399422233, 1e-8),
        (100, 46.438543189337942, 1e-6),
    ];
    let mut ok = secs <= 300.0;
    let mut detail = String::new();
    for (k, t, tol) in targets {
        let e = rel(v[k], t);
        ok &= e <= tol;
        detail.push_str(&format!("sigma_{k} rel {e:.1e} (<= {tol:.0e}); "));
    }
    detail.push_str(&format!("total N schedule to 1040, {secs:.1} s"));
    Ok((ok, detail))
}

fn concentric_closed_form() -> Check {
    let d = builtin("annulus:eps=0");
    let s = solve_steklov_bie(&d, NodeCount::PerCurve(256), 23)?;
    let exact = concentric_annulus_steklov(0.1, 1.0, 24)?;
    let worst = (0..20).map(|i| (s.eigenvalues[i].re - exact.values[i]).abs()).fold(0.0, f64::max);
    let radial = exact.values.iter().position(|&v| (v - 4.777239300935770).abs() < 1e-12);
    let radial_ok = radial.is_some_and(|i| (s.eigenvalues[i].re - exact.values[i]).abs() <= 1e-9);
    let pattern_ok = (0..20).all(|i| s.multiplicities[i] == exact.multiplicities[i]);
    let simple = (0..20).filter(|&i| s.multiplicities[i] == 1).count();
    Ok((
        worst <= 1e-9 && radial_ok && pattern_ok,
        format!("max abs error {worst:.1e} over 20 values (<= 1e-9); 4.777239300935770 present: {radial_ok}; multiplicity pattern matches: {pattern_ok} ({simple} simple)"),
    ))
}

fn gww_steklov() -> Check {
    let levels = [3, 4, 5];
    let table_a = [0.2803, 0.7919, 1.0897, 1.7054];
    let table_b = [0.3096, 0.6130, 1.2375, 2.0244];
    let mut ok = true;
    let mut worst_table = 0.0f64;
    let mut ordering = true;
    let mut p2 = Vec::new();
    for (name, table) in [("gww-a", table_a), ("gww-b", table_b)] {
        let d = builtin(name);
        let runs: Vec<LevelRun> = [SpaceKind::CR, SpaceKind::P2, SpaceKind::P1]
            .iter()
            .map(|&k| fem_run(&d, BoundaryCondition::Steklov, k, 4, &levels))
            .collect::<spectra::Result<_>>()?;
        for (l, t) in runs[1].limits.iter().zip(table) {
            worst_table = worst_table.max((l - t).abs());
        }
        for lev in 0..levels.len() {
            for i in 0..4 {
                let (cr, q, p1) = (runs[0].levels[lev][i], runs[1].levels[lev][i], runs[2].levels[lev][i]);
                ordering &= cr <= q && q <= p1;
            }
        }
        p2.push(runs.into_iter().nth(1).expect("p2 run").estimates);
    }
    let rows = compare_estimates(&p2[0], &p2[1]);
    let distinct = rows.iter().any(|r| r.verdict == Verdict::Distinct);
    ok &= worst_table <= 5e-3 && ordering && distinct;
    Ok((
        ok,
        format!(
            "max |P2 extrapolated - reference| {worst_table:.1e} (<= 5e-3); CR <= P2 <= P1 at levels 3..5: {ordering}; verdict {}",
            if distinct { "distinct" } else { "consistent-with-equal" }
        ),
    ))
}

/// Returns the check and gww-a's extrapolated 10th Dirichlet eigenvalue.
fn gww_dirichlet_neumann() -> (Check, Option<f64>) {
    let run = || -> Result<(bool, String, f64), Box<dyn std::error::Error>> {
        let levels = [4, 5, 6];
        let a = builtin("gww-a:scale=2");
        let b = builtin("gww-b:scale=2");
        let da = fem_run(&a, BoundaryCondition::Dirichlet, SpaceKind::P2, 10, &levels)?;
        let db = fem_run(&b, BoundaryCondition::Dirichlet, SpaceKind::P2, 10, &levels)?;
        let na = fem_run(&a, BoundaryCondition::Neumann, SpaceKind::P2, 10, &levels)?;
        let nb = fem_run(&b, BoundaryCondition::Neumann, SpaceKind::P2, 10, &levels)?;
        let pair = |x: &LevelRun, y: &LevelRun| x.limits.iter().zip(&y.limits).map(|(p, q)| rel(*p, *q)).fold(0.0, f64::max);
        let (dpair, npair) = (pair(&da, &db), pair(&na, &nb));
        let d10 = da.limits[9];
        let n10 = na.limits[9];
        let ok = dpair <= 1e-3 && npair <= 1e-3 && (d10 - 26.08).abs() <= 0.05 && (n10 - 9.62165).abs() <= 0.01;
        let detail = format!(
            "scale 2, P2 levels 4..6: dirichlet pairwise rel {dpair:.1e}, lambda_10 {d10:.5} (26.08 +- 0.05); neumann pairwise rel {npair:.1e}, 10th nonzero {n10:.5} (9.62165 +- 0.01), nearest nonzero values {:.5} {:.5}",
            na.limits[8], na.limits[9]
        );
        Ok((ok, detail, d10))
    };
    match run() {
        Ok((ok, detail, d10)) => (Ok((ok, detail)), Some(d10)),
        Err(e) => (Err(e), None),
    }
}

fn mixed_pair() -> Check {
    let levels = [3, 4, 5];
    let s = fem_run(&builtin("dn-square"), BoundaryCondition::Mixed, SpaceKind::P2, 6, &levels)?;
    let t = fem_run(&builtin("dn-triangle"), BoundaryCondition::Mixed, SpaceKind::P2, 6, &levels)?;
    let pair = s.limits.iter().zip(&t.limits).map(|(a, b)| rel(*a, *b)).fold(0.0, f64::max);
    let exact = PI * PI * 1.25;
    let first = rel(s.limits[0], exact);
    Ok((
        pair <= 1e-3 && first <= 1e-4,
        format!("pairwise rel {pair:.1e} over 6 (<= 1e-3); dn-square lambda_1 rel {first:.1e} vs 5pi^2/4 (<= 1e-4)"),
    ))
}

fn square_bracket() -> Check {
    let exact = 2.0 * PI * PI;
    let r = bracket_report(&builtin("unit-square"), BoundaryCondition::Dirichlet, 1, &[1, 2, 3, 4, 5])?;
    let every = r.rows.iter().all(|row| row.cr_lower.is_some_and(|lo| lo <= exact) && exact <= row.p1);
    let (lo, hi) = r.enclosure.ok_or("no certified enclosure")?;
    let width = hi - lo;
    Ok((
        every && width <= 0.5 && lo <= exact && exact <= hi,
        format!("lower <= 2pi^2 <= P1 at all 5 levels: {every}; final enclosure [{lo:.5}, {hi:.5}] width {width:.3} (<= 0.5)"),
    ))
}

fn monotone_sweep() -> Check {
    let eps: Vec<f64> = (0..45).map(|i| 0.02 * i as f64).collect();
    let rows = sweep_annulus(&eps, NodeCount::Total(660), &[1])?;
    let sigma: Vec<f64> = rows.iter().map(|r| r.sigma).collect();
    let bad = sigma.windows(2).position(|w| w[1] >= w[0]);
    let min_drop = sigma.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    Ok((
        bad.is_none(),
        match bad {
            None => format!("sigma_1 strictly decreasing over 45 offsets at N=660 (smallest step {min_drop:.2e})"),
            Some(i) => format!("sigma_1 increases between eps={:.2} and {:.2}", eps[i], eps[i + 1]),
        },
    ))
}

fn quasimodes() -> Check {
    let d = Domain::eccentric_annulus(0.4, 0.1)?;
    let s = solve_steklov_bie(&d, NodeCount::Total(880), 200)?.real_values();
    let outer = disk_spectra(DiskKind::Steklov, 1.0, 402)?;
    let inner = disk_spectra(DiskKind::Steklov, 0.1, 402)?;
    let u = union_spectrum(&outer, &inner, 201);
    let (worst, at) = (50..=200)
        .map(|k| (rel(s[k], u.values[k]), k))
        .fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a });
    Ok((worst <= 1e-3, format!("max rel deviation {worst:.1e} at k={at} over k in 50..=200 (<= 1e-3)")))
}

fn mps_fhm(fem_lambda10: Option<f64>) -> Check {
    let sq = builtin("unit-square");
    let p = MpsProblem::new(&sq, MpsBasis::new(&sq, CornerSelection::Single, DEFAULT_BASIS_SIZE)?)?;
    let exact = rectangle_spectra(1.0, 1.0, RectangleSides::uniform(Marker::Dirichlet), 30)?.values;
    let grid: Vec<f64> = (0..=240).map(|i| 15.0 + 0.5 * i as f64).collect();
    let minima = local_minima(&p.sweep(&grid)?);
    let mut contained = 0;
    for &(a, b) in minima.iter().take(5) {
        let e = p.fhm_enclosure(&p.refine_minimum(a, b)?)?;
        if exact.iter().any(|&l| e.contains(l)) {
            contained += 1;
        }
    }
    let g = builtin("gww-a:scale=2");
    let gp = MpsProblem::new(&g, MpsBasis::new(&g, CornerSelection::All, 10)?)?;
    let enc = gp.fhm_enclosure(&gp.refine_minimum(25.0, 27.0)?)?;
    let fem = fem_lambda10.ok_or("FEM reference unavailable")?;
    let gap = (enc.lambda_h - fem).abs();
    Ok((
        contained == 5 && minima.len() >= 5 && gap <= enc.radius(),
        format!(
            "square: {contained}/5 intervals hold an exact eigenvalue; gww-a (scale 2, all corners, 10 terms): mps {:.6} radius {:.2e}, |mps - fem {fem:.6}| = {gap:.2e}",
            enc.lambda_h,
            enc.radius()
        ),
    ))
}

fn faber_krahn() -> Check {
    let disk = PI * bessel_j_zero(0.0, 1)?.powi(2);
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["gww-a", "gww-b", "unit-square", "dn-square"] {
        let d = builtin(name);
        let l1 = fem_run(&d, BoundaryCondition::Dirichlet, SpaceKind::P2, 1, &[2, 3, 4])?.limits[0];
        let v = l1 * d.area();
        ok &= v > disk;
        parts.push(format!("{name} {v:.4}"));
    }
    Ok((ok, format!("lambda_1 * area: {} vs disk {disk:.4}", parts.join(", "))))
}

fn weighted_mixed() -> Option<Check> {
    let path = std::env::var_os("SPECTRA_PARTITION_DOMAIN")?;
    Some((|| -> Check {
        let d = load_domain(&path)?;
        let r = bracket_report(&d, BoundaryCondition::Mixed, 1, &[1, 2, 3, 4, 5])?;
        let p1: Vec<f64> = r.rows.iter().map(|x| x.p1).collect();
        let cr: Vec<f64> = r.rows.iter().map(|x| x.cr).collect();
        let dec = p1.windows(2).all(|w| w[1] < w[0]);
        let inc = cr.windows(2).all(|w| w[1] > w[0]);
        let (fp, fc) = (p1[4], cr[4]);
        let inside = |v: f64| (2.2..=2.35).contains(&v);
        Ok((
            dec && inc && inside(fp) && inside(fc),
            format!("P1 decreasing {dec}, CR increasing {inc}; finest P1 {fp:.5}, CR {fc:.5} (within [2.2, 2.35])"),
        ))
    })())
}

fn property_suites() -> Check {
    let out = Command::new(env!("CARGO_BIN_EXE_spectra")).arg("validate").output()?;
    let text = String::from_utf8_lossy(&out.stdout);
    let failed: Vec<&str> = text.lines().filter(|l| l.starts_with("FAIL")).collect();
    Ok((
        out.status.success(),
        format!("validate exit {:?}, {} checks, failures: {:?}", out.status.code(), text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count(), failed),
    ))
}

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !filters.is_empty() && !filters.iter().any(|f| "acceptance".contains(f.as_str())) {
        return ExitCode::SUCCESS;
    }
    let (c4, lambda10) = gww_dirichlet_neumann();
    let criteria: Vec<(u8, &str, Option<Check>)> = vec![
        (1, "eccentric annulus eps=0.88 reference values", Some(annulus_reference_values())),
        (2, "concentric annulus closed form", Some(concentric_closed_form())),
        (3, "gww steklov non-isospectrality", Some(gww_steklov())),
        (4, "gww dirichlet/neumann isospectrality", Some(c4)),
        (5, "mixed dirichlet/neumann isospectral pair", Some(mixed_pair())),
        (6, "certified bracket on the square", Some(square_bracket())),
        (7, "monotonicity sweep", Some(monotone_sweep())),
        (8, "quasimode property", Some(quasimodes())),
        (9, "mps with fhm enclosures", Some(mps_fhm(lambda10))),
        (10, "faber-krahn sanity", Some(faber_krahn())),
        (11, "weighted mixed problem", weighted_mixed()),
        (12, "property suites and validate", Some(property_suites())),
    ];
    let mut failures = 0;
    for (id, name, check) in criteria {
        let line = match check {
            None => format!("SKIP [{id:2}] {name}: set SPECTRA_PARTITION_DOMAIN to the partition domain file to run it"),
            Some(Ok((true, d))) => format!("PASS [{id:2}] {name}: {d}"),
            Some(Ok((false, d))) => {
                failures += 1;
                format!("FAIL [{id:2}] {name}: {d}")
            }
            Some(Err(e)) => {
                failures += 1;
                format!("FAIL [{id:2}] {name}: error: {e}")
            }
        };
        println!("{line}");
    }
    println!("acceptance: {failures} failing criteria");
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
