//! Method of particular solutions for Dirichlet eigenvalues of polygons.
//!
//! Candidate eigenfunctions are combinations of corner Fourier–Bessel
//! functions `J_{αk}(√λ r) sin(αkθ)`, which satisfy `−Δu = λu` exactly and
//! vanish on the two edges at their corner. The indicator `s(λ)` is the
//! smallest singular value of the boundary rows of an orthonormal basis
//! for the span of the basis sampled at boundary and interior points. It
//! lies in `[0, 1]` and dips towards zero at eigenvalues.

use crate::fem::{basis_values, rule7, SpaceKind};
use crate::geometry::{triangulate, Domain, Point, Polygon};
use crate::specfun::{bessel_j_unchecked, MAX_ARGUMENT, MAX_ORDER};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

/// Default number of functions per corner.
pub const DEFAULT_BASIS_SIZE: usize = 20;
/// Boundary collocation points per basis function.
pub const DEFAULT_OVERSAMPLING: usize = 2;
/// Boundary samples per edge for the sup estimate.
pub const SUP_SAMPLES_PER_EDGE: usize = 1000;
/// Mesh level for the `L²` normalization.
pub const NORM_LEVEL: u32 = 3;

const RANK_TOL: f64 = 1e-14;
const SCAN_POINTS: usize = 33;

/// Fourier–Bessel functions anchored at one polygon corner.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerBasis {
    pub corner: usize,
    pub vertex: Point,
    /// Direction of the outgoing edge; `θ` is measured from it.
    pub direction: f64,
    /// Interior angle `π/α`.
    pub angle: f64,
    pub alpha: f64,
    pub size: usize,
}

impl CornerBasis {
    pub fn new(poly: &Polygon, corner: usize, size: usize) -> Result<CornerBasis> {
        if corner >= poly.len() || size == 0 {
            return Err(Error::InvalidInput(format!("corner {corner} with {size} functions")));
        }
        let v = poly.vertices[corner];
        let next = poly.vertices[(corner + 1) % poly.len()];
        let angle = poly.interior_angle(corner);
        let alpha = PI / angle;
        if alpha * size as f64 > MAX_ORDER {
            return Err(Error::OutOfDomain(format!(
                "corner {corner}: order {} exceeds the Bessel order limit {MAX_ORDER}",
                alpha * size as f64
            )));
        }
        Ok(CornerBasis {
            corner,
            vertex: v,
            direction: (next[1] - v[1]).atan2(next[0] - v[0]),
            angle,
            alpha,
            size,
        })
    }

    /// Local polar coordinates, with the branch cut bisecting the exterior
    /// wedge.
    pub fn polar(&self, p: Point) -> (f64, f64) {
        let dx = p[0] - self.vertex[0];
        let dy = p[1] - self.vertex[1];
        let r = dx.hypot(dy);
        let mut t = (dy.atan2(dx) - self.direction).rem_euclid(2.0 * PI);
        if t > 0.5 * (self.angle + 2.0 * PI) {
            t -= 2.0 * PI;
        }
        (r, t)
    }

    fn eval_into(&self, k: f64, p: Point, out: &mut [f64]) {
        let (r, t) = self.polar(p);
        for (j, o) in out.iter_mut().enumerate() {
            let nu = self.alpha * (j + 1) as f64;
            *o = bessel_j_unchecked(nu, k * r) * (nu * t).sin();
        }
    }
}

/// Which corners carry basis functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CornerSelection {
    /// The sharpest singularity (largest interior angle), lowest index on ties.
    #[default]
    Single,
    /// Every corner with interior angle above `π`.
    Reentrant,
    All,
}

impl std::str::FromStr for CornerSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(CornerSelection::Single),
            "reentrant" => Ok(CornerSelection::Reentrant),
            "all" => Ok(CornerSelection::All),
            _ => Err(Error::InvalidInput(format!("unknown corner selection '{s}' (single, reentrant, all)"))),
        }
    }
}

/// Union of corner bases.
#[derive(Debug, Clone, PartialEq)]
pub struct MpsBasis {
    pub corners: Vec<CornerBasis>,
}

impl MpsBasis {
    pub fn new(domain: &Domain, selection: CornerSelection, size: usize) -> Result<MpsBasis> {
        let poly = domain.as_polygon()?;
        let n = poly.len();
        let chosen: Vec<usize> = match selection {
            CornerSelection::Single => {
                let best = (0..n)
                    .max_by(|&a, &b| {
                        poly.interior_angle(a)
                            .total_cmp(&poly.interior_angle(b))
                            .then(b.cmp(&a))
                    })
                    .unwrap_or(0);
                vec![best]
            }
            CornerSelection::Reentrant => {
                let r: Vec<usize> = (0..n).filter(|&i| poly.interior_angle(i) > PI + 1e-12).collect();
                if r.is_empty() {
                    return Err(Error::InvalidInput(format!("domain '{}' has no re-entrant corner", domain.name)));
                }
                r
            }
            CornerSelection::All => (0..n).collect(),
        };
        let corners = chosen
            .into_iter()
            .map(|c| CornerBasis::new(poly, c, size))
            .collect::<Result<Vec<_>>>()?;
        Ok(MpsBasis { corners })
    }

    pub fn dim(&self) -> usize {
        self.corners.iter().map(|c| c.size).sum()
    }

    /// Basis values at `p` for wavenumber `k = √λ`.
    pub fn row(&self, k: f64, p: Point, out: &mut [f64]) {
        let mut off = 0;
        for c in &self.corners {
            c.eval_into(k, p, &mut out[off..off + c.size]);
            off += c.size;
        }
    }

    fn matrix(&self, k: f64, points: &[Point]) -> DMatrix<f64> {
        let n = self.dim();
        let rows = crate::par::map(points, |&p| {
            let mut r = vec![0.0; n];
            self.row(k, p, &mut r);
            r
        });
        DMatrix::from_fn(points.len(), n, |i, j| rows[i][j])
    }

    /// `u(p) = Σ c_j φ_j(p)` at each point.
    pub fn evaluate(&self, lambda: f64, coefficients: &DVector<f64>, points: &[Point]) -> Vec<f64> {
        let k = lambda.sqrt();
        crate::par::map(points, |&p| {
            let mut r = vec![0.0; self.dim()];
            self.row(k, p, &mut r);
            r.iter().zip(coefficients.iter()).map(|(a, b)| a * b).sum()
        })
    }

    fn check_argument(&self, poly: &Polygon, lambda: f64) -> Result<()> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidInput(format!("λ must be positive, got {lambda}")));
        }
        let (lo, hi) = poly.bounding_box();
        let diam = (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
        if lambda.sqrt() * diam > MAX_ARGUMENT {
            return Err(Error::OutOfDomain(format!("√λ·diam = {} exceeds the Bessel argument limit", lambda.sqrt() * diam)));
        }
        Ok(())
    }
}

/// Boundary and interior sample points.
#[derive(Debug, Clone)]
pub struct Collocation {
    pub boundary: Vec<Point>,
    pub interior: Vec<Point>,
}

impl Collocation {
    /// `oversampling·dim` Chebyshev-clustered boundary points split over
    /// the edges by length, and as many Halton points inside. `seed` skips
    /// into the Halton sequence.
    pub fn new(domain: &Domain, dim: usize, oversampling: usize, seed: u64) -> Result<Collocation> {
        let poly = domain.as_polygon()?;
        let total = (oversampling.max(1) * dim).max(poly.len() * 2);
        let perim = poly.perimeter();
        let mut boundary = Vec::with_capacity(total + poly.len());
        for i in 0..poly.len() {
            let (a, b) = poly.edge(i);
            let m = ((total as f64 * crate::geometry::dist(a, b) / perim).round() as usize).max(2);
            for j in 0..m {
                let t = 0.5 * (1.0 - (PI * (j as f64 + 0.5) / m as f64).cos());
                boundary.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        let (lo, hi) = poly.bounding_box();
        let mut interior = Vec::with_capacity(boundary.len());
        let mut idx = seed + 1;
        while interior.len() < boundary.len() {
            let p = [lo[0] + (hi[0] - lo[0]) * halton(idx, 2), lo[1] + (hi[1] - lo[1]) * halton(idx, 3)];
            if poly.contains(p) && poly.boundary_distance(p) > 1e-9 * perim {
                interior.push(p);
            }
            idx += 1;
            if idx > seed + 1000 * (boundary.len() as u64 + 10) {
                return Err(Error::InvalidDomain("could not place interior points".into()));
            }
        }
        Ok(Collocation { boundary, interior })
    }
}

fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// A polygon, a basis and its collocation points.
#[derive(Debug, Clone)]
pub struct MpsProblem {
    pub domain: Domain,
    pub basis: MpsBasis,
    pub points: Collocation,
}

/// Indicator value and the minimizing combination at one `λ`.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub lambda: f64,
    pub smin: f64,
    /// Coefficients of the basis functions.
    pub coefficients: DVector<f64>,
}

impl MpsProblem {
    pub fn new(domain: &Domain, basis: MpsBasis) -> Result<MpsProblem> {
        MpsProblem::with_oversampling(domain, basis, DEFAULT_OVERSAMPLING, 0)
    }

    pub fn with_oversampling(domain: &Domain, basis: MpsBasis, oversampling: usize, seed: u64) -> Result<MpsProblem> {
        let points = Collocation::new(domain, basis.dim(), oversampling, seed)?;
        Ok(MpsProblem { domain: domain.clone(), basis, points })
    }

    /// `s(λ)` together with the minimizing coefficient vector.
    pub fn candidate(&self, lambda: f64) -> Result<Candidate> {
        self.basis.check_argument(self.domain.as_polygon()?, lambda)?;
        self.candidate_scaled(lambda, None)
    }

    fn candidate_scaled(&self, lambda: f64, scale: Option<&[f64]>) -> Result<Candidate> {
        let k = lambda.sqrt();
        let nb = self.points.boundary.len();
        let all: Vec<Point> = self.points.boundary.iter().chain(&self.points.interior).copied().collect();
        let mut a = self.basis.matrix(k, &all);
        if let Some(s) = scale {
            for (j, sj) in s.iter().enumerate() {
                a.column_mut(j).scale_mut(*sj);
            }
        }
        let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
        for (j, n) in norms.iter().enumerate() {
            if *n > 0.0 {
                a.column_mut(j).scale_mut(1.0 / n);
            }
        }
        let svd = a.svd(true, true);
        let u = svd.u.as_ref().expect("requested U");
        let vt = svd.v_t.as_ref().expect("requested Vᵀ");
        let sv = &svd.singular_values;
        let smax = sv.max();
        if smax <= 0.0 {
            return Err(Error::Quality("basis vanishes at every collocation point".into()));
        }
        let rank = sv.iter().filter(|&&s| s > RANK_TOL * smax).count();
        let q = u.columns(0, rank);
        let qi = q.rows(nb, q.nrows() - nb);
        if qi.norm() < 1e-12 {
            return Err(Error::Quality("interior block has collapsed rank; the basis is ill-posed".into()));
        }
        let qb = q.rows(0, nb).into_owned();
        let b = qb.svd(false, true);
        let (imin, smin) = b
            .singular_values
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .map(|(i, s)| (i, *s))
            .unwrap_or((0, 1.0));
        let y = b.v_t.as_ref().expect("requested Vᵀ").row(imin).transpose();
        let mut c = DVector::zeros(self.basis.dim());
        for i in 0..rank {
            let w = y[i] / sv[i];
            for j in 0..c.len() {
                c[j] += vt[(i, j)] * w;
            }
        }
        for j in 0..c.len() {
            c[j] = if norms[j] > 0.0 { c[j] / norms[j] } else { 0.0 };
            if let Some(s) = scale {
                c[j] *= s[j];
            }
        }
        Ok(Candidate { lambda, smin: smin.clamp(0.0, 1.0), coefficients: c })
    }

    /// `s(λ)`.
    pub fn smin(&self, lambda: f64) -> Result<f64> {
        self.candidate(lambda).map(|c| c.smin)
    }

    /// `s(λ)` on a positive ascending grid.
    pub fn sweep(&self, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
        if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] <= 0.0 {
            return Err(Error::InvalidInput("λ grid must be positive and strictly ascending".into()));
        }
        let vals = crate::par::try_map(grid, |&l| self.smin(l))?;
        Ok(grid.iter().copied().zip(vals).collect())
    }

    /// Locates the minimum of `s` inside `[lo, hi]` to `1e−9·λ` and returns
    /// the candidate normalized to unit `L²` norm.
    pub fn refine_minimum(&self, lo: f64, hi: f64) -> Result<Candidate> {
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::InvalidInput(format!("bad bracket [{lo}, {hi}]")));
        }
        let grid: Vec<f64> = (0..SCAN_POINTS)
            .map(|i| lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64)
            .collect();
        let scan = self.sweep(&grid)?;
        let (imin, _) = scan
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .expect("non-empty scan");
        if imin == 0 || imin == SCAN_POINTS - 1 {
            return Err(Error::InvalidInput(format!("s(λ) has no interior minimum in [{lo}, {hi}]")));
        }
        let (mut a, mut b) = (grid[imin - 1], grid[imin + 1]);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let mut f1 = self.smin(x1)?;
        let mut f2 = self.smin(x2)?;
        while b - a > 1e-10 * b {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = self.smin(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = self.smin(x2)?;
            }
        }
        let mut cand = self.candidate(0.5 * (a + b))?;
        let norm = self.l2_norm(&cand)?;
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Quality("candidate eigenfunction has zero norm".into()));
        }
        cand.coefficients /= norm;
        Ok(cand)
    }

    /// `‖u‖_{L²(Ω)}` by the degree-5 rule on a refined mesh.
    pub fn l2_norm(&self, cand: &Candidate) -> Result<f64> {
        let mesh = triangulate(&self.domain)?.refined(NORM_LEVEL);
        let rule = rule7();
        let mut pts = Vec::with_capacity(mesh.triangles.len() * 7);
        let mut wts = Vec::with_capacity(mesh.triangles.len() * 7);
        for t in 0..mesh.triangles.len() {
            let c = mesh.corners(t);
            let area = mesh.signed_area(t);
            for (l, w) in rule.iter() {
                let mut phi = [0.0; 6];
                basis_values(SpaceKind::P1, *l, &mut phi);
                pts.push([
                    phi[0] * c[0][0] + phi[1] * c[1][0] + phi[2] * c[2][0],
                    phi[0] * c[0][1] + phi[1] * c[1][1] + phi[2] * c[2][1],
                ]);
                wts.push(w * area);
            }
        }
        let u = self.basis.evaluate(cand.lambda, &cand.coefficients, &pts);
        Ok(u.iter().zip(&wts).map(|(u, w)| u * u * w).sum::<f64>().sqrt())
    }

    /// Sup of `|u|` over `SUP_SAMPLES_PER_EDGE` points on every edge.
    pub fn boundary_sup(&self, cand: &Candidate) -> Result<f64> {
        let poly = self.domain.as_polygon()?;
        let m = SUP_SAMPLES_PER_EDGE;
        let mut pts = Vec::with_capacity(poly.len() * (m + 1));
        for i in 0..poly.len() {
            let (a, b) = poly.edge(i);
            for j in 0..=m {
                let t = j as f64 / m as f64;
                pts.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        let u = self.basis.evaluate(cand.lambda, &cand.coefficients, &pts);
        Ok(u.iter().fold(0.0, |m, v| m.max(v.abs())))
    }

    /// FHM interval around an `L²`-normalized candidate.
    pub fn fhm_enclosure(&self, cand: &Candidate) -> Result<Enclosure> {
        Enclosure::fhm(cand.lambda, self.boundary_sup(cand)?)
    }
}

/// `[λ_h − r, λ_h + r]` with `r = λ_h(√2ε + ε²)/(1 − ε²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enclosure {
    pub lambda_h: f64,
    pub lower: f64,
    pub upper: f64,
    pub epsilon: f64,
    /// The sup is sampled and the norm is a quadrature, so the interval is
    /// not a rigorous certificate. Always set.
    pub caveat: bool,
}

impl Enclosure {
    pub const METHOD: &'static str = "fhm";
    pub const CSV_HEADER: &'static str = "lambda_h,lower,upper,epsilon,caveat";

    pub fn fhm(lambda_h: f64, epsilon: f64) -> Result<Enclosure> {
        if !(epsilon >= 0.0 && epsilon < 1.0) {
            return Err(Error::Quality(format!(
                "boundary sup ε = {epsilon} ≥ 1: candidate not eigenfunction-like"
            )));
        }
        let r = fhm_radius(lambda_h, epsilon);
        Ok(Enclosure { lambda_h, lower: lambda_h - r, upper: lambda_h + r, epsilon, caveat: true })
    }

    pub fn radius(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }

    pub fn contains(&self, lambda: f64) -> bool {
        self.lower <= lambda && lambda <= self.upper
    }

    pub fn csv_row(&self) -> String {
        format!("{:.15},{:.15},{:.15},{:.6e},{}", self.lambda_h, self.lower, self.upper, self.epsilon, self.caveat)
    }
}

pub fn fhm_radius(lambda_h: f64, epsilon: f64) -> f64 {
    lambda_h * (2f64.sqrt() * epsilon + epsilon * epsilon) / (1.0 - epsilon * epsilon)
}

/// Grid points where `s` has a strict local minimum, as brackets
/// `(left neighbour, right neighbour)`.
pub fn local_minima(sweep: &[(f64, f64)]) -> Vec<(f64, f64)> {
    sweep
        .windows(3)
        .filter(|w| w[1].1 < w[0].1 && w[1].1 < w[2].1)
        .map(|w| (w[0].0, w[2].0))
        .collect()
}

/// `lambda,smin` CSV.
pub fn sweep_csv(sweep: &[(f64, f64)]) -> String {
    let mut out = String::from("lambda,smin\n");
    for (l, s) in sweep {
        out.push_str(&format!("{l:.12},{s:.6e}\n"));
    }
    out
}

/// `s(λ)` on a grid with the default basis.
pub fn sigma_min_sweep(domain: &Domain, basis: &MpsBasis, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    MpsProblem::new(domain, basis.clone())?.sweep(grid)
}

/// Refined and normalized candidate in `[lo, hi]`.
pub fn refine_minimum(domain: &Domain, basis: &MpsBasis, lo: f64, hi: f64) -> Result<Candidate> {
    MpsProblem::new(domain, basis.clone())?.refine_minimum(lo, hi)
}

/// FHM interval for a normalized candidate.
pub fn fhm_enclosure(domain: &Domain, basis: &MpsBasis, cand: &Candidate) -> Result<Enclosure> {
    MpsProblem::new(domain, basis.clone())?.fhm_enclosure(cand)
}
