//! Subcommand bodies.

use crate::args::{parse_grid, parse_interval, parse_levels, parse_linspace, parse_list, Method, Opts};
use crate::svg;
use anyhow::{bail, Context};
use spectra::bie::{self, NodeCount};
use spectra::bounds::{bracket_report, richardson_extrapolate};
use spectra::compare::{compare_bie, compare_fem};
use spectra::fem::{solve_levels, solve_on_mesh, BoundaryCondition, EigenProblemSpec, SpaceKind};
use spectra::geometry::{load_domain, triangulate, Domain};
use spectra::mps::{self, CornerSelection, Enclosure, MpsBasis, MpsProblem, DEFAULT_BASIS_SIZE, DEFAULT_OVERSAMPLING};
use spectra::pencil::Spectrum;
use spectra::validate::run_checks;
use spectra::VERSION;
use std::fmt::{self, Write as _};
use std::path::Path;

pub const SPECTRUM_HEADER: &str = "index,eigenvalue,multiplicity,method,param,domain,version";

const COMPATIBILITY: &str = "\
method   domain            boundary condition
fem-p1   polygon           dirichlet, neumann, mixed, steklov
fem-p2   polygon           dirichlet, neumann, mixed, steklov
fem-cr   polygon           dirichlet, neumann, mixed, steklov (with --cr-midpoint)
bie      circles           steklov
mps      polygon           dirichlet";

/// Bad flags or an unsupported combination; exit status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Failed self checks; exit status 3.
#[derive(Debug)]
pub struct ValidationFailed(pub Vec<String>);

impl fmt::Display for ValidationFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} validation check(s) failed: {}", self.0.len(), self.0.join("; "))
    }
}

impl std::error::Error for ValidationFailed {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn domain(spec: Option<&str>, flag: &str) -> anyhow::Result<Domain> {
    let spec = spec.ok_or_else(|| usage(format!("{flag} is required")))?;
    Ok(load_domain(spec)?)
}

fn default_method(d: &Domain) -> Method {
    if d.is_polygon() {
        Method::FemP2
    } else {
        Method::Bie
    }
}

fn default_bc(method: Method) -> BoundaryCondition {
    match method {
        Method::Bie => BoundaryCondition::Steklov,
        _ => BoundaryCondition::Dirichlet,
    }
}

/// Enforces the method/domain/boundary-condition matrix.
pub fn check_compatible(method: Method, d: &Domain, bc: BoundaryCondition, cr_midpoint: bool) -> anyhow::Result<()> {
    let problem = match method {
        Method::Bie if d.is_polygon() => Some("bie needs a domain bounded by circles"),
        Method::Bie if bc != BoundaryCondition::Steklov => Some("bie solves the steklov problem only"),
        Method::Mps if !d.is_polygon() => Some("mps needs a polygon"),
        Method::Mps if bc != BoundaryCondition::Dirichlet => Some("mps solves the dirichlet problem only"),
        Method::FemP1 | Method::FemP2 | Method::FemCr if !d.is_polygon() => Some("finite elements need a polygon"),
        Method::FemCr if bc == BoundaryCondition::Steklov && !cr_midpoint => {
            Some("fem-cr with steklov requires --cr-midpoint")
        }
        _ => None,
    };
    match problem {
        Some(p) => Err(usage(format!("{p}\n\nsupported combinations:\n{COMPATIBILITY}"))),
        None => Ok(()),
    }
}

fn write_file(dir: &Path, name: &str, content: &str) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn spectrum_row(out: &mut String, index: &str, value: f64, mult: usize, method: &str, param: &str, domain: &str) {
    let _ = writeln!(
        out,
        "{index},{value:.15},{mult},{},{},{},{VERSION}",
        csv_field(method),
        csv_field(param),
        csv_field(domain)
    );
}

/// Zero modes sit at index 0; otherwise indices start at 1.
fn display_index(s: &Spectrum, i: usize) -> usize {
    i + 1 - s.zero_modes.min(1)
}

fn print_spectrum(s: &Spectrum) {
    for (i, z) in s.eigenvalues.iter().enumerate() {
        println!("{:4}  {:.15}  (x{})", display_index(s, i), z.re, s.multiplicities[i]);
    }
}

fn spectrum_rows(out: &mut String, s: &Spectrum) {
    let p = &s.provenance;
    for (i, z) in s.eigenvalues.iter().enumerate() {
        spectrum_row(out, &display_index(s, i).to_string(), z.re, s.multiplicities[i], &p.method, &p.param, &p.domain);
    }
}

pub fn solve(o: &Opts) -> anyhow::Result<()> {
    let d = domain(o.domain.as_deref(), "--domain")?;
    let method = o.method.unwrap_or_else(|| default_method(&d));
    let bc = o.bc.unwrap_or_else(|| default_bc(method));
    check_compatible(method, &d, bc, o.cr_midpoint)?;
    match method {
        Method::Bie => solve_bie(o, &d),
        Method::Mps => solve_mps(o, &d),
        _ => solve_fem(o, &d, method.space().expect("fem method"), bc),
    }
}

fn solve_fem(o: &Opts, d: &Domain, kind: SpaceKind, bc: BoundaryCondition) -> anyhow::Result<()> {
    let levels = parse_levels(o.levels.as_deref().unwrap_or("4"))?;
    let mut spec = EigenProblemSpec::new(bc, kind, o.count.unwrap_or(10), 0);
    spec.cr_midpoint = o.cr_midpoint;
    if let Some(r) = o.cluster_radius {
        spec.cluster_radius = r;
    }
    let runs = solve_levels(d, &spec, &levels)?;
    let mut csv = String::from(SPECTRUM_HEADER);
    csv.push('\n');
    for (_, s) in &runs {
        spectrum_rows(&mut csv, s);
    }
    let (_, finest) = runs.last().expect("at least one level");
    if runs.len() >= 3 {
        let hs: Vec<f64> = runs.iter().map(|r| r.0).collect();
        let range = format!("levels={}:{}", levels[0], levels[levels.len() - 1]);
        for i in 0..finest.len() {
            let seq: Vec<f64> = runs.iter().map(|r| r.1.eigenvalues[i].re).collect();
            let e = richardson_extrapolate(&seq, &hs)?;
            let rate = e.rate.map(|r| format!("{r:.3}")).unwrap_or_else(|| "none".into());
            let param = format!("extrapolated;{range};rate={rate}");
            let idx = display_index(finest, i).to_string();
            spectrum_row(&mut csv, &idx, e.limit, finest.multiplicities[i], &finest.provenance.method, &param, &d.name);
        }
    }
    print_spectrum(finest);
    write_file(&o.out_dir(), "spectrum.csv", &csv)?;

    if o.svg {
        let level = *levels.last().expect("levels");
        let mesh = triangulate(d)?.refined(level);
        let mut vspec = spec.clone().with_vectors(true);
        vspec.level = level;
        let (s, space) = solve_on_mesh(d, &mesh, &vspec)?;
        let vectors = s.vectors.as_ref().context("solver returned no eigenvectors")?;
        let wanted: Vec<usize> = match &o.modes {
            Some(m) => parse_list(m, "--modes")?,
            None => vec![display_index(&s, s.zero_modes.min(s.len() - 1))],
        };
        let mut modes = Vec::new();
        for idx in wanted {
            let Some(col) = (0..s.len()).find(|&i| display_index(&s, i) == idx) else {
                bail!(usage(format!("--modes: index {idx} is outside the computed range")));
            };
            let caption = format!("{} #{idx} = {:.6}", symbol(bc), s.eigenvalues[col].re);
            modes.push((caption, vectors.column(col).iter().copied().collect()));
        }
        write_file(&o.out_dir(), "modes.svg", &svg::render(&space, &modes))?;
    }
    Ok(())
}

fn symbol(bc: BoundaryCondition) -> &'static str {
    match bc {
        BoundaryCondition::Steklov => "sigma",
        _ => "lambda",
    }
}

fn solve_bie(o: &Opts, d: &Domain) -> anyhow::Result<()> {
    let count = o.count.unwrap_or(10);
    let schedule = o.node_schedule("256")?;
    let mut csv = String::from(SPECTRUM_HEADER);
    csv.push('\n');
    let mut last = None;
    for &n in &schedule {
        let mut s = bie::solve_steklov_bie(d, n, count)?;
        if let Some(r) = o.cluster_radius {
            s.recluster(r);
        }
        spectrum_rows(&mut csv, &s);
        last = Some(s);
    }
    if let Some(s) = last {
        print_spectrum(&s);
    }
    write_file(&o.out_dir(), "spectrum.csv", &csv)
}

fn solve_mps(o: &Opts, d: &Domain) -> anyhow::Result<()> {
    let size = o.basis_size.unwrap_or(DEFAULT_BASIS_SIZE);
    let corners = o.corners.unwrap_or_default();
    let basis = MpsBasis::new(d, corners, size)?;
    let problem = MpsProblem::with_oversampling(d, basis, DEFAULT_OVERSAMPLING, o.seed)?;
    let mut brackets = Vec::new();
    if let Some(g) = &o.grid {
        let grid = parse_grid(g)?;
        let sweep = problem.sweep(&grid)?;
        write_file(&o.out_dir(), "mps_sweep.csv", &mps::sweep_csv(&sweep))?;
        if o.bracket.is_none() {
            brackets = mps::local_minima(&sweep);
        }
    }
    if let Some(b) = &o.bracket {
        brackets.push(parse_interval(b, "--bracket")?);
    }
    if brackets.is_empty() {
        bail!(usage("mps needs --bracket lo:hi or --grid lo:hi:step"));
    }
    let method = format!("mps/{}", Enclosure::METHOD);
    let corner_tag = match corners {
        CornerSelection::Single => "single",
        CornerSelection::Reentrant => "reentrant",
        CornerSelection::All => "all",
    };
    let mut csv = String::from(SPECTRUM_HEADER);
    csv.push('\n');
    let mut enc_csv = String::from(Enclosure::CSV_HEADER);
    enc_csv.push('\n');
    for (i, &(lo, hi)) in brackets.iter().enumerate() {
        let cand = problem.refine_minimum(lo, hi)?;
        let enc = problem.fhm_enclosure(&cand)?;
        println!(
            "lambda_h = {:.12}  enclosure [{:.12}, {:.12}]  eps = {:.3e}  smin = {:.3e}",
            enc.lambda_h, enc.lower, enc.upper, enc.epsilon, cand.smin
        );
        let param = format!(
            "bracket={lo}:{hi};K={size};corners={corner_tag};lower={:.15};upper={:.15}",
            enc.lower, enc.upper
        );
        spectrum_row(&mut csv, &(i + 1).to_string(), enc.lambda_h, 1, &method, &param, &d.name);
        enc_csv.push_str(&enc.csv_row());
        enc_csv.push('\n');
    }
    write_file(&o.out_dir(), "spectrum.csv", &csv)?;
    write_file(&o.out_dir(), "enclosure.csv", &enc_csv)
}

/// Indices `k` whose column fails to decrease strictly with `ε`.
pub fn monotonicity(rows: &[bie::SweepRow]) -> Vec<(usize, bool)> {
    let mut ks: Vec<usize> = rows.iter().map(|r| r.k).collect();
    ks.sort_unstable();
    ks.dedup();
    ks.into_iter()
        .map(|k| {
            let col: Vec<f64> = rows.iter().filter(|r| r.k == k).map(|r| r.sigma).collect();
            (k, col.windows(2).all(|w| w[1] < w[0]))
        })
        .collect()
}

pub fn sweep(o: &Opts) -> anyhow::Result<()> {
    let eps = parse_linspace(o.eps.as_deref().unwrap_or("0:0.88:45"))?;
    let ks: Vec<usize> = parse_list(o.k.as_deref().unwrap_or("1"), "--k")?;
    let schedule = o.node_schedule("660")?;
    let nodes: NodeCount = *schedule.last().expect("nonempty");
    let rows = bie::sweep_annulus(&eps, nodes, &ks)?;
    write_file(&o.out_dir(), "sweep.csv", &bie::sweep_csv(&rows))?;
    for (k, dec) in monotonicity(&rows) {
        let verdict = if dec { "strictly decreasing" } else { "NOT strictly decreasing" };
        println!("sigma_{k}: {verdict} over {} offsets in [{}, {}] at {nodes}", eps.len(), eps[0], eps[eps.len() - 1]);
    }
    Ok(())
}

pub fn compare(o: &Opts) -> anyhow::Result<()> {
    let a = domain(o.domain.as_deref(), "--domain")?;
    let b = domain(o.domain_b.as_deref(), "--domain-b")?;
    let method = o.method.unwrap_or_else(|| default_method(&a));
    let bc = o.bc.unwrap_or_else(|| default_bc(method));
    check_compatible(method, &a, bc, o.cr_midpoint)?;
    check_compatible(method, &b, bc, o.cr_midpoint)?;
    let count = o.count.unwrap_or(6);
    let report = match method {
        Method::Bie => {
            let mut schedule = o.node_schedule("256,512")?;
            if schedule.len() == 1 {
                let n = schedule[0];
                let half = match n {
                    NodeCount::PerCurve(n) => NodeCount::PerCurve(n / 2),
                    NodeCount::Total(n) => NodeCount::Total(n / 2),
                };
                schedule.insert(0, half);
            }
            compare_bie(&a, &b, count, &schedule)?
        }
        Method::Mps => bail!(usage(format!("compare supports fem and bie methods\n\n{COMPATIBILITY}"))),
        _ => {
            let levels = parse_levels(o.levels.as_deref().unwrap_or("2:4"))?;
            if levels.len() < 2 {
                bail!(usage("compare needs at least two levels"));
            }
            compare_fem(&a, &b, bc, method.space().expect("fem method"), count, &levels)?
        }
    };
    let csv = report.to_csv();
    print!("{csv}");
    write_file(&o.out_dir(), "compare.csv", &csv)
}

pub fn bounds(o: &Opts) -> anyhow::Result<()> {
    let d = domain(o.domain.as_deref(), "--domain")?;
    let bc = o.bc.unwrap_or(BoundaryCondition::Dirichlet);
    check_compatible(Method::FemCr, &d, bc, true)?;
    let levels = parse_levels(o.levels.as_deref().unwrap_or("4"))?;
    let report = bracket_report(&d, bc, o.index.unwrap_or(1), &levels)?;
    let csv = report.to_csv();
    print!("{csv}");
    match report.enclosure {
        Some((lo, hi)) => println!("enclosure [{lo:.12}, {hi:.12}] width {:.3e}", hi - lo),
        None => println!("no certified enclosure for {bc} on {}", d.name),
    }
    write_file(&o.out_dir(), "bounds.csv", &csv)
}

pub fn validate(o: &Opts) -> anyhow::Result<()> {
    let results = run_checks(o.filter.as_deref());
    if results.is_empty() {
        bail!(usage(format!("no validation check matches '{}'", o.filter.as_deref().unwrap_or(""))));
    }
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<String> = results.iter().filter(|r| !r.passed()).map(|r| r.name.to_string()).collect();
    if failed.is_empty() {
        println!("all {} checks passed", results.len());
        Ok(())
    } else {
        Err(ValidationFailed(failed).into())
    }
}
