//! Nyström discretization of the Steklov problem on domains bounded by
//! circles.
//!
//! Eigenfunctions are sought as `u = S[ψ] + c` with a mean-free density
//! `ψ` and a constant `c`, where `S` is the single layer with kernel
//! `Φ(x, y) = −(1/2π) log|x − y|`. With `W φ = φ̄` (arclength mean) and
//! `P = I − W`, the Steklov condition `∂u/∂n = σ u` becomes the pencil
//!
//! ```text
//!     P (½I + K′) P φ = σ (P S P + W) φ
//! ```
//!
//! whose `σ = 0` eigenvector is the constant density.

use crate::geometry::{BoundaryQuadrature, Domain, Point};
use crate::pencil::{self, Complex64, Pencil, Provenance, Spectrum, DEFAULT_CLUSTER_RADIUS};
use crate::reference::concentric_annulus_steklov;
use crate::{Error, Result};
use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Imaginary parts above this fraction of the modulus among the requested
/// eigenvalues signal under-resolution.
pub const COMPLEX_TOLERANCE: f64 = 1e-6;

/// Inner circle radius of the eccentric annulus family.
pub const ANNULUS_HOLE: f64 = 0.1;

/// How many quadrature nodes to place.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeCount {
    /// The same count on every curve.
    PerCurve(usize),
    /// A total split over the curves in proportion to circumference.
    Total(usize),
}

impl NodeCount {
    pub fn quadrature(self, domain: &Domain) -> Result<BoundaryQuadrature> {
        self.quadrature_with_phase(domain, 0.0)
    }

    pub fn quadrature_with_phase(self, domain: &Domain, phase: f64) -> Result<BoundaryQuadrature> {
        let counts = match self {
            NodeCount::PerCurve(n) => vec![n; domain.as_circles()?.len()],
            NodeCount::Total(n) => crate::geometry::proportional_counts(domain, n)?,
        };
        BoundaryQuadrature::with_counts(domain, &counts, phase)
    }

    fn halved(self) -> Option<NodeCount> {
        let half = |n: usize| {
            let h = n / 2;
            h + h % 2
        };
        match self {
            NodeCount::PerCurve(n) if n >= 16 => Some(NodeCount::PerCurve(half(n))),
            NodeCount::Total(n) if n >= 32 => Some(NodeCount::Total(half(n))),
            _ => None,
        }
    }
}

impl std::fmt::Display for NodeCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NodeCount::PerCurve(n) => write!(f, "N={n}/curve"),
            NodeCount::Total(n) => write!(f, "N={n}"),
        }
    }
}

/// Discrete boundary operators on one quadrature.
#[derive(Debug, Clone)]
pub struct KernelMatrices {
    /// Single layer `S` (no mean subtraction).
    pub single_layer: DMatrix<f64>,
    /// Adjoint double layer `K′` (no jump term).
    pub adjoint_double_layer: DMatrix<f64>,
    /// Arclength weights.
    pub weights: Vec<f64>,
    /// Boundary length.
    pub length: f64,
    /// Factor of the fundamental solution, `−1/2π`.
    pub normalization: f64,
}

impl KernelMatrices {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `W`: `(Wφ)_i = φ̄`.
    pub fn mean_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |_, j| self.weights[j] / self.length)
    }

    /// `P = I − W`.
    pub fn mean_free_projector(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dim(), self.dim()) - self.mean_matrix()
    }

    /// `S P`: single layer of the mean-subtracted density.
    pub fn s0(&self) -> DMatrix<f64> {
        project_right(&self.single_layer, &self.weights, self.length)
    }

    /// `(½I + K′) P`.
    pub fn khalf(&self) -> DMatrix<f64> {
        let mut k = self.adjoint_double_layer.clone();
        for i in 0..self.dim() {
            k[(i, i)] += 0.5;
        }
        project_right(&k, &self.weights, self.length)
    }

    /// The pencil `(P(½I + K′)P, P S P + W)`.
    pub fn steklov_pencil(&self) -> Result<Pencil> {
        let a = project_left(&self.khalf(), &self.weights, self.length);
        let mut b = project_left(&self.s0(), &self.weights, self.length);
        let n = self.dim();
        for j in 0..n {
            let w = self.weights[j] / self.length;
            for i in 0..n {
                b[(i, j)] += w;
            }
        }
        Pencil::new(a, b)
    }
}

/// `M (I − W)`.
fn project_right(m: &DMatrix<f64>, w: &[f64], len: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let mut out = m.clone();
    for i in 0..n {
        let mean: f64 = (0..n).map(|j| m[(i, j)]).sum::<f64>();
        for j in 0..n {
            out[(i, j)] -= mean * w[j] / len;
        }
    }
    out
}

/// `(I − W) M`.
fn project_left(m: &DMatrix<f64>, w: &[f64], len: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let mut out = m.clone();
    for j in 0..n {
        let mean: f64 = (0..n).map(|i| w[i] * m[(i, j)]).sum::<f64>() / len;
        for i in 0..n {
            out[(i, j)] -= mean;
        }
    }
    out
}

/// Kress weights `R_j(t_i)` for `∫₀^{2π} log(4 sin²((t−s)/2)) f(s) ds` on
/// `N = 2n` equispaced nodes, as a function of `i − j mod N`.
fn log_weights(n_nodes: usize) -> Vec<f64> {
    let n = n_nodes / 2;
    let nf = n as f64;
    (0..n_nodes)
        .map(|d| {
            let t = PI * d as f64 / nf;
            let s: f64 = (1..n).map(|m| (m as f64 * t).cos() / m as f64).sum();
            -2.0 * PI / nf * s - PI / (nf * nf) * (nf * t).cos()
        })
        .collect()
}

/// Assembles `S` and `K′` with log-splitting on each circle and the
/// trapezoid rule across circles.
pub fn assemble_kernels(quad: &BoundaryQuadrature) -> Result<KernelMatrices> {
    let n = quad.total_nodes();
    let pts: Vec<Point> = quad.points().copied().collect();
    let weights: Vec<f64> = quad.weights().collect();
    let mut curve_of = Vec::with_capacity(n);
    let mut local = Vec::with_capacity(n);
    for (c, curve) in quad.curves.iter().enumerate() {
        for j in 0..curve.len() {
            curve_of.push(c);
            local.push(j);
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if curve_of[i] != curve_of[j] && crate::geometry::dist(pts[i], pts[j]) == 0.0 {
                return Err(Error::InvalidDomain("boundary curves share a node".into()));
            }
        }
    }
    let log_w: Vec<Vec<f64>> = quad.curves.iter().map(|c| log_weights(c.len())).collect();
    let normals: Vec<Point> = quad.curves.iter().flat_map(|c| c.normals.iter().copied()).collect();
    let kappa: Vec<f64> = quad
        .curves
        .iter()
        .flat_map(|c| (0..c.len()).map(move |j| c.signed_curvature(j)))
        .collect();
    let inv2pi = 1.0 / (2.0 * PI);
    let rows: Vec<(Vec<f64>, Vec<f64>)> = crate::par::map_range(n, |i| {
        let mut s = vec![0.0; n];
        let mut k = vec![0.0; n];
        let x = pts[i];
        let nx = normals[i];
        let ci = curve_of[i];
        let curve = &quad.curves[ci];
        let nc = curve.len();
        let r = curve.circle.radius;
        for j in 0..n {
            let y = pts[j];
            let d = [x[0] - y[0], x[1] - y[1]];
            let d2 = d[0] * d[0] + d[1] * d[1];
            if curve_of[j] == ci {
                // log(|x−y|²/(4 sin²)) = log R² on a circle
                let lw = log_w[ci][(local[i] + nc - local[j]) % nc];
                let smooth = -r / (4.0 * PI) * (r * r).ln();
                s[j] = -r / (4.0 * PI) * lw + 2.0 * PI / nc as f64 * smooth;
                k[j] = if i == j {
                    -kappa[i] / (4.0 * PI) * weights[j]
                } else {
                    -inv2pi * (d[0] * nx[0] + d[1] * nx[1]) / d2 * weights[j]
                };
            } else {
                s[j] = -inv2pi * 0.5 * d2.ln() * weights[j];
                k[j] = -inv2pi * (d[0] * nx[0] + d[1] * nx[1]) / d2 * weights[j];
            }
        }
        (s, k)
    });
    let single_layer = DMatrix::from_fn(n, n, |i, j| rows[i].0[j]);
    let adjoint_double_layer = DMatrix::from_fn(n, n, |i, j| rows[i].1[j]);
    let length = weights.iter().sum();
    Ok(KernelMatrices { single_layer, adjoint_double_layer, weights, length, normalization: -inv2pi })
}

/// Steklov eigenvalues of a circle-bounded domain: `σ₀ = 0` (flagged as a
/// zero mode) followed by the `count` smallest nonzero values.
///
/// If the single-layer side is too ill-conditioned the node count is
/// halved (with a warning) and the solve retried.
pub fn solve_steklov_bie(domain: &Domain, nodes: NodeCount, count: usize) -> Result<Spectrum> {
    solve_steklov_bie_phase(domain, nodes, count, 0.0)
}

/// As [`solve_steklov_bie`] with the nodes rotated by `phase`.
pub fn solve_steklov_bie_phase(domain: &Domain, nodes: NodeCount, count: usize, phase: f64) -> Result<Spectrum> {
    let mut nodes = nodes;
    loop {
        let quad = nodes.quadrature_with_phase(domain, phase)?;
        match solve_on_quadrature(&quad, count) {
            Err(Error::IllConditioned { estimate }) => match nodes.halved() {
                Some(h) => {
                    log::warn!("single-layer side ill-conditioned ({estimate:e}) at {nodes}; retrying with {h}");
                    nodes = h;
                }
                None => return Err(Error::IllConditioned { estimate }),
            },
            other => {
                return other.map(|s| {
                    s.with_provenance(Provenance::new(
                        "bie",
                        format!("{nodes};counts={:?}", quad.counts()),
                        domain.name.clone(),
                    ))
                })
            }
        }
    }
}

/// Solves the Steklov pencil on a given quadrature.
pub fn solve_on_quadrature(quad: &BoundaryQuadrature, count: usize) -> Result<Spectrum> {
    let n = quad.total_nodes();
    if count + 1 > n {
        return Err(Error::InvalidInput(format!("{count} eigenvalues requested from {n} nodes")));
    }
    let kernels = assemble_kernels(quad)?;
    let raw = pencil::solve_general(&kernels.steklov_pencil()?)?;
    let mut values: Vec<Complex64> = raw.eigenvalues;
    values.sort_by(|a, b| a.re.total_cmp(&b.re));
    let wanted = count + 1;
    for (i, z) in values.iter().take(wanted).enumerate() {
        if z.im.abs() > COMPLEX_TOLERANCE * z.norm() {
            return Err(Error::Quality(format!(
                "eigenvalue {i} is complex ({} {:+}i) at N={n}; the boundary is under-resolved",
                z.re, z.im
            )));
        }
    }
    let mut reals: Vec<f64> = values.iter().take(wanted).map(|z| z.re).collect();
    // the constant density is exactly σ = 0
    reals[0] = reals[0].max(0.0);
    let mut s = Spectrum::from_real(reals, DEFAULT_CLUSTER_RADIUS);
    s.zero_modes = 1;
    Ok(s)
}

/// Single-layer potential of the mean-subtracted density at interior points.
pub fn evaluate_interior(domain: &Domain, quad: &BoundaryQuadrature, density: &[f64], points: &[Point]) -> Result<Vec<f64>> {
    let n = quad.total_nodes();
    if density.len() != n {
        return Err(Error::InvalidInput(format!("density has {} values for {n} nodes", density.len())));
    }
    let circles = domain.as_circles()?;
    let spacing = quad.min_spacing();
    let w: Vec<f64> = quad.weights().collect();
    let len: f64 = w.iter().sum();
    let mean = density.iter().zip(&w).map(|(d, w)| d * w).sum::<f64>() / len;
    let nodes: Vec<Point> = quad.points().copied().collect();
    points
        .iter()
        .map(|&x| {
            for c in circles {
                let r = crate::geometry::dist(x, c.center);
                let inside_outer = c.orientation == crate::geometry::Orientation::OuterCcw;
                let gap = if inside_outer { c.radius - r } else { r - c.radius };
                if gap < 3.0 * spacing {
                    return Err(Error::InvalidInput(format!(
                        "point ({}, {}) is within three node spacings of the boundary or outside",
                        x[0], x[1]
                    )));
                }
            }
            Ok(nodes
                .iter()
                .zip(&w)
                .zip(density)
                .map(|((y, wj), d)| -0.5 / PI * crate::geometry::dist(x, *y).ln() * (d - mean) * wj)
                .sum())
        })
        .collect()
}

/// One row of the annulus sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub k: usize,
    pub sigma: f64,
    pub ratio_to_concentric: f64,
    pub nodes: NodeCount,
}

/// `σ_k(Ω_ε)` over a grid of offsets, ordered by `ε` then by `k`.
/// Indices count from `σ₀ = 0`.
pub fn sweep_annulus(eps_grid: &[f64], nodes: NodeCount, k_list: &[usize]) -> Result<Vec<SweepRow>> {
    let kmax = k_list.iter().copied().max().unwrap_or(1).max(1);
    let concentric = concentric_annulus_steklov(ANNULUS_HOLE, 1.0, kmax + 1)?;
    for &e in eps_grid {
        if !(e.is_finite() && e.abs() + ANNULUS_HOLE < 1.0) {
            return Err(Error::InvalidDomain(format!("offset {e} makes the hole touch the outer circle")));
        }
    }
    let spectra = crate::par::try_map(eps_grid, |&eps| {
        let d = Domain::eccentric_annulus(eps, ANNULUS_HOLE)?;
        solve_steklov_bie(&d, nodes, kmax)
    })?;
    let mut rows = Vec::with_capacity(eps_grid.len() * k_list.len());
    for (&eps, s) in eps_grid.iter().zip(&spectra) {
        let v = s.real_values();
        for &k in k_list {
            let reference = concentric.values[k];
            rows.push(SweepRow {
                eps,
                k,
                sigma: v[k],
                ratio_to_concentric: if reference == 0.0 { 1.0 } else { v[k] / reference },
                nodes,
            });
        }
    }
    Ok(rows)
}

/// CSV rendering with header `eps,k,sigma,ratio_to_concentric,N`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("eps,k,sigma,ratio_to_concentric,N\n");
    for r in rows {
        let n = match r.nodes {
            NodeCount::PerCurve(n) => format!("{n}/curve"),
            NodeCount::Total(n) => n.to_string(),
        };
        out.push_str(&format!("{},{},{:.15},{:.15},{}\n", r.eps, r.k, r.sigma, r.ratio_to_concentric, n));
    }
    out
}
