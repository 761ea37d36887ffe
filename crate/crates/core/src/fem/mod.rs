//! Finite element discretizations: conforming P1 and P2, nonconforming
//! Crouzeix–Raviart, and the eigenvalue drivers built on them.

mod assemble;

pub use assemble::{assemble_boundary_mass, assemble_boundary_mass_on, assemble_mass, assemble_stiffness};
pub(crate) use assemble::{basis_values, rule7};

use crate::geometry::{triangulate, Domain, EdgeTable, Marker, Mesh, Point, Weight};
use crate::pencil::{
    self, subspace_iteration, CsrMatrix, Pencil, Provenance, Spectrum,
    DEFAULT_CLUSTER_RADIUS,
};
use crate::{Error, Result};
use nalgebra::DMatrix;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

/// Pencils up to this many free dofs are diagonalized densely.
pub const DEFAULT_DENSE_LIMIT: usize = 300;

const SUBSPACE_TOL: f64 = 1e-10;
const SUBSPACE_MAX_ITER: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    P1,
    P2,
    CR,
}

impl SpaceKind {
    pub fn local_dofs(self) -> usize {
        match self {
            SpaceKind::P2 => 6,
            _ => 3,
        }
    }

    /// Method tag used in provenance (`fem-p1`, `fem-p2`, `fem-cr`).
    pub fn tag(self) -> &'static str {
        match self {
            SpaceKind::P1 => "fem-p1",
            SpaceKind::P2 => "fem-p2",
            SpaceKind::CR => "fem-cr",
        }
    }
}

impl FromStr for SpaceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p1" | "fem-p1" => Ok(SpaceKind::P1),
            "p2" | "fem-p2" => Ok(SpaceKind::P2),
            "cr" | "p1nc" | "fem-cr" => Ok(SpaceKind::CR),
            _ => Err(Error::InvalidInput(format!("unknown finite element space '{s}'"))),
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpaceKind::P1 => "P1",
            SpaceKind::P2 => "P2",
            SpaceKind::CR => "CR",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    /// Per-edge Dirichlet/Neumann markers of the domain.
    Mixed,
    Steklov,
}

impl FromStr for BoundaryCondition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" => Ok(BoundaryCondition::Dirichlet),
            "neumann" => Ok(BoundaryCondition::Neumann),
            "mixed" => Ok(BoundaryCondition::Mixed),
            "steklov" => Ok(BoundaryCondition::Steklov),
            _ => Err(Error::InvalidInput(format!("unknown boundary condition '{s}'"))),
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::Mixed => "mixed",
            BoundaryCondition::Steklov => "steklov",
        })
    }
}

/// Degrees of freedom of one finite element space on one mesh.
#[derive(Debug, Clone)]
pub struct FemSpace {
    pub kind: SpaceKind,
    pub mesh: Mesh,
    pub edges: EdgeTable,
    /// Global dof of each local basis function, per triangle.
    pub local: Vec<[usize; 6]>,
    pub n_dofs: usize,
    /// Nodal point of each dof (vertex or edge midpoint).
    pub dof_points: Vec<Point>,
    edge_index: HashMap<(usize, usize), usize>,
}

impl FemSpace {
    pub fn new(mesh: Mesh, kind: SpaceKind) -> FemSpace {
        let edges = mesh.edge_table();
        let nv = mesh.vertices.len();
        let edge_index = edges.edges.iter().enumerate().map(|(i, e)| ((e[0], e[1]), i)).collect();
        let mid = |e: &[usize; 2]| {
            let (p, q) = (mesh.vertices[e[0]], mesh.vertices[e[1]]);
            [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
        };
        let (n_dofs, dof_points): (usize, Vec<Point>) = match kind {
            SpaceKind::P1 => (nv, mesh.vertices.clone()),
            SpaceKind::P2 => {
                let mut pts = mesh.vertices.clone();
                pts.extend(edges.edges.iter().map(mid));
                (nv + edges.edges.len(), pts)
            }
            SpaceKind::CR => (edges.edges.len(), edges.edges.iter().map(mid).collect()),
        };
        let local = mesh
            .triangles
            .iter()
            .zip(&edges.tri_edges)
            .map(|(t, te)| match kind {
                SpaceKind::P1 => [t[0], t[1], t[2], 0, 0, 0],
                SpaceKind::P2 => [t[0], t[1], t[2], nv + te[0], nv + te[1], nv + te[2]],
                SpaceKind::CR => [te[0], te[1], te[2], 0, 0, 0],
            })
            .collect();
        FemSpace { kind, mesh, edges, local, n_dofs, dof_points, edge_index }
    }

    /// Dof attached to the mesh edge `(a, b)` (P2 midpoint or CR edge dof).
    pub fn edge_dof(&self, a: usize, b: usize) -> usize {
        let e = self.edge_index[&(a.min(b), a.max(b))];
        match self.kind {
            SpaceKind::P2 => self.mesh.vertices.len() + e,
            _ => e,
        }
    }

    /// Dofs lying on mesh boundary edge `k`.
    pub fn boundary_edge_dofs(&self, k: usize) -> Vec<usize> {
        let [a, b] = self.mesh.boundary_edges[k].vertices;
        match self.kind {
            SpaceKind::P1 => vec![a, b],
            SpaceKind::P2 => vec![a, b, self.edge_dof(a, b)],
            SpaceKind::CR => vec![self.edge_dof(a, b)],
        }
    }

    /// Constrained-dof mask: dofs on an edge whose effective marker is
    /// Dirichlet. A vertex shared with a Neumann edge stays constrained.
    pub fn dirichlet_mask(&self, markers: &[Marker]) -> Vec<bool> {
        let mut mask = vec![false; self.n_dofs];
        for (k, &m) in markers.iter().enumerate() {
            if m == Marker::Dirichlet {
                for d in self.boundary_edge_dofs(k) {
                    mask[d] = true;
                }
            }
        }
        mask
    }

    /// Values of every dof's basis function at a point of triangle `t`
    /// with barycentric coordinates `l`, as (dof, value) pairs.
    pub fn eval_local(&self, t: usize, l: [f64; 3]) -> impl Iterator<Item = (usize, f64)> + '_ {
        let mut phi = [0.0; 6];
        basis_values(self.kind, l, &mut phi);
        let dofs = self.local[t];
        (0..self.kind.local_dofs()).map(move |i| (dofs[i], phi[i]))
    }
}

/// Effective marker of every mesh boundary edge under `bc`.
///
/// `dirichlet` and `neumann` override the domain markers; `mixed` uses the
/// domain's Dirichlet/Neumann markers; `steklov` uses the Steklov-marked
/// edges when there are any and the whole boundary otherwise.
pub fn effective_markers(mesh: &Mesh, bc: BoundaryCondition) -> Result<Vec<Marker>> {
    let raw: Vec<Marker> = mesh.boundary_edges.iter().map(|e| e.marker).collect();
    Ok(match bc {
        BoundaryCondition::Dirichlet => vec![Marker::Dirichlet; raw.len()],
        BoundaryCondition::Neumann => vec![Marker::Neumann; raw.len()],
        BoundaryCondition::Mixed => {
            if raw.contains(&Marker::Steklov) {
                return Err(Error::InvalidInput(
                    "mixed problem on a domain with Steklov-marked edges".into(),
                ));
            }
            raw
        }
        BoundaryCondition::Steklov => {
            if raw.contains(&Marker::Steklov) {
                raw
            } else {
                vec![Marker::Steklov; raw.len()]
            }
        }
    })
}

/// What to solve and how.
#[derive(Debug, Clone)]
pub struct EigenProblemSpec {
    pub bc: BoundaryCondition,
    /// Overrides the domain's weight when set.
    pub weight: Option<Weight>,
    /// Number of nonzero eigenvalues wanted.
    pub count: usize,
    pub space: SpaceKind,
    pub level: u32,
    /// Crouzeix–Raviart Steklov with midpoint-lumped boundary mass.
    pub cr_midpoint: bool,
    pub cluster_radius: f64,
    pub dense_limit: usize,
    pub want_vectors: bool,
}

impl EigenProblemSpec {
    pub fn new(bc: BoundaryCondition, space: SpaceKind, count: usize, level: u32) -> Self {
        EigenProblemSpec {
            bc,
            weight: None,
            count,
            space,
            level,
            cr_midpoint: space == SpaceKind::CR && bc == BoundaryCondition::Steklov,
            cluster_radius: DEFAULT_CLUSTER_RADIUS,
            dense_limit: DEFAULT_DENSE_LIMIT,
            want_vectors: false,
        }
    }

    pub fn with_vectors(mut self, yes: bool) -> Self {
        self.want_vectors = yes;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidInput("at least one eigenvalue must be requested".into()));
        }
        if self.space == SpaceKind::CR && self.bc == BoundaryCondition::Steklov && !self.cr_midpoint {
            return Err(Error::InvalidInput(
                "Crouzeix-Raviart Steklov needs the cr-midpoint variant".into(),
            ));
        }
        Ok(())
    }

    fn method_tag(&self) -> String {
        if self.space == SpaceKind::CR && self.bc == BoundaryCondition::Steklov {
            "fem-cr/cr-midpoint".into()
        } else {
            self.space.tag().into()
        }
    }
}

/// Eigenvalues of a polygonal domain at one refinement level.
pub fn solve_fem(domain: &Domain, spec: &EigenProblemSpec) -> Result<Spectrum> {
    let mesh = triangulate(domain)?.refined(spec.level);
    solve_on_mesh(domain, &mesh, spec).map(|(s, _)| s)
}

/// Solves at every level in `levels` (ascending), refining incrementally.
pub fn solve_levels(domain: &Domain, spec: &EigenProblemSpec, levels: &[u32]) -> Result<Vec<(f64, Spectrum)>> {
    let mut mesh = triangulate(domain)?;
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        while mesh.level < level {
            mesh = mesh.refine();
        }
        let mut s = spec.clone();
        s.level = level;
        let (spectrum, _) = solve_on_mesh(domain, &mesh, &s)?;
        out.push((mesh.h, spectrum));
    }
    Ok(out)
}

/// Solves on a given mesh and also returns the space (for plotting).
/// Eigenvectors, when requested, are expanded to all dofs of the space.
pub fn solve_on_mesh(domain: &Domain, mesh: &Mesh, spec: &EigenProblemSpec) -> Result<(Spectrum, FemSpace)> {
    spec.validate()?;
    let weight = spec.weight.unwrap_or(domain.weight);
    let markers = effective_markers(mesh, spec.bc)?;
    let space = FemSpace::new(mesh.clone(), spec.space);
    let mask = space.dirichlet_mask(&markers);
    let free: Vec<usize> = (0..space.n_dofs).filter(|&d| !mask[d]).collect();
    if free.is_empty() {
        return Err(Error::InvalidInput("every degree of freedom is constrained".into()));
    }
    let k = assemble_stiffness(&space).restrict(&free);
    let constrained = free.len() < space.n_dofs;

    let (mut values, vectors, zero_modes) = match spec.bc {
        BoundaryCondition::Steklov => {
            let on: Vec<bool> = markers.iter().map(|&m| m == Marker::Steklov).collect();
            let b = assemble_boundary_mass_on(&space, &on, spec.cr_midpoint)?.restrict(&free);
            let rank = (0..b.dim()).filter(|&i| b.get(i, i) > 0.0).count();
            let zero = usize::from(!constrained);
            let wanted = spec.count + zero;
            if wanted > rank {
                return Err(Error::InvalidInput(format!(
                    "{} finite Steklov eigenvalues requested but only {rank} boundary dofs",
                    spec.count
                )));
            }
            let g = k.add_scaled(&b, 1.0);
            let (mu, vecs) = largest_mu(&g, &b, wanted, rank, spec)?;
            let sigma = mu.iter().map(|&m| 1.0 / m - 1.0).collect::<Vec<_>>();
            (sigma, vecs, zero)
        }
        _ => {
            let m = assemble_mass(&space, weight).restrict(&free);
            if constrained {
                let (mu, vecs) = largest_mu(&k, &m, spec.count, free.len(), spec)?;
                (mu.iter().map(|&x| 1.0 / x).collect(), vecs, 0)
            } else {
                // no constraints: shift so the stiffness side is definite
                let wanted = spec.count + 1;
                let g = k.add_scaled(&m, 1.0);
                let (mu, vecs) = largest_mu(&g, &m, wanted, free.len(), spec)?;
                (mu.iter().map(|&x| 1.0 / x - 1.0).collect(), vecs, 1)
            }
        }
    };
    if zero_modes == 1 && !values.is_empty() {
        values[0] = values[0].max(0.0);
    }
    let n = values.len();
    let mut spectrum = Spectrum::from_real(values, spec.cluster_radius).with_provenance(Provenance::new(
        spec.method_tag(),
        format!("h={:.6e};level={}", mesh.h, mesh.level),
        domain.name.clone(),
    ));
    spectrum.zero_modes = zero_modes;
    if let Some(v) = vectors {
        let mut full = DMatrix::zeros(space.n_dofs, n);
        for (r, &d) in free.iter().enumerate() {
            for c in 0..n {
                full[(d, c)] = v[(r, c)];
            }
        }
        spectrum.vectors = Some(full);
    }
    Ok((spectrum, space))
}

/// The `m` largest `μ` of `H x = μ G x`, descending, with optional vectors.
/// `rank` bounds the number of nonzero `μ` (rank of `H`).
fn largest_mu(
    g: &CsrMatrix,
    h: &CsrMatrix,
    m: usize,
    rank: usize,
    spec: &EigenProblemSpec,
) -> Result<(Vec<f64>, Option<DMatrix<f64>>)> {
    let n = g.dim();
    if m > n {
        return Err(Error::InvalidInput(format!("{m} eigenvalues requested from {n} free dofs")));
    }
    if n <= spec.dense_limit {
        let p = Pencil::new(h.to_dense(), g.to_dense())?;
        let s = pencil::solve_symdef(&p, spec.want_vectors)?;
        let vals = s.real_values();
        let idx: Vec<usize> = (0..n).rev().take(m).collect();
        let mu = idx.iter().map(|&i| vals[i]).collect();
        let vecs = s.vectors.map(|v| DMatrix::from_fn(n, m, |r, c| v[(r, idx[c])]));
        return Ok((mu, vecs));
    }
    let block = (2 * m).min(rank).max(m);
    let res = subspace_iteration(g, h, m, block, SUBSPACE_TOL, SUBSPACE_MAX_ITER)?;
    log::debug!("subspace iteration: {} sweeps for {m} of {n}", res.iterations);
    let vecs = spec.want_vectors.then_some(res.vectors);
    Ok((res.values, vecs))
}
