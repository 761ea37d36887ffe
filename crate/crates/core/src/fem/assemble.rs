//! Element matrices and global assembly.

use super::{FemSpace, SpaceKind};
use crate::geometry::{Point, Weight};
use crate::pencil::{CsrMatrix, TripletBuilder};
use crate::{Error, Result};

/// Degree-5 seven-point rule on a triangle: barycentric point, weight
/// relative to the triangle area.
pub(crate) fn rule7() -> [([f64; 3], f64); 7] {
    let s = 15f64.sqrt();
    let a = (6.0 - s) / 21.0;
    let b = (9.0 + 2.0 * s) / 21.0;
    let c = (6.0 + s) / 21.0;
    let d = (9.0 - 2.0 * s) / 21.0;
    let wa = (155.0 - s) / 1200.0;
    let wc = (155.0 + s) / 1200.0;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 9.0 / 40.0),
        ([a, a, b], wa),
        ([a, b, a], wa),
        ([b, a, a], wa),
        ([c, c, d], wc),
        ([c, d, c], wc),
        ([d, c, c], wc),
    ]
}

/// Area and barycentric gradients of a triangle.
pub(crate) fn geometry(p: &[Point; 3]) -> (f64, [[f64; 2]; 3]) {
    let [p0, p1, p2] = *p;
    let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    let area = 0.5 * det;
    let g = [
        [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
        [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
        [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
    ];
    (area, g)
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Values of the local basis at barycentric point `l`.
pub(crate) fn basis_values(kind: SpaceKind, l: [f64; 3], out: &mut [f64; 6]) {
    match kind {
        SpaceKind::P1 => out[..3].copy_from_slice(&l),
        SpaceKind::P2 => {
            for i in 0..3 {
                out[i] = l[i] * (2.0 * l[i] - 1.0);
                out[3 + i] = 4.0 * l[i] * l[(i + 1) % 3];
            }
        }
        SpaceKind::CR => {
            for k in 0..3 {
                out[k] = 1.0 - 2.0 * l[(k + 2) % 3];
            }
        }
    }
}

fn basis_gradients(kind: SpaceKind, l: [f64; 3], g: &[[f64; 2]; 3], out: &mut [[f64; 2]; 6]) {
    match kind {
        SpaceKind::P1 => out[..3].copy_from_slice(g),
        SpaceKind::P2 => {
            for i in 0..3 {
                let f = 4.0 * l[i] - 1.0;
                out[i] = [f * g[i][0], f * g[i][1]];
                let j = (i + 1) % 3;
                out[3 + i] = [
                    4.0 * (l[j] * g[i][0] + l[i] * g[j][0]),
                    4.0 * (l[j] * g[i][1] + l[i] * g[j][1]),
                ];
            }
        }
        SpaceKind::CR => {
            for k in 0..3 {
                let o = g[(k + 2) % 3];
                out[k] = [-2.0 * o[0], -2.0 * o[1]];
            }
        }
    }
}

/// Local stiffness matrix, row-major `n × n` in a 6×6 buffer.
pub(crate) fn element_stiffness(kind: SpaceKind, p: &[Point; 3]) -> [f64; 36] {
    let n = kind.local_dofs();
    let (area, g) = geometry(p);
    let mut k = [0.0; 36];
    match kind {
        SpaceKind::P1 => {
            for i in 0..3 {
                for j in 0..3 {
                    k[i * 6 + j] = area * dot(g[i], g[j]);
                }
            }
        }
        SpaceKind::CR => {
            for i in 0..3 {
                for j in 0..3 {
                    k[i * 6 + j] = 4.0 * area * dot(g[(i + 2) % 3], g[(j + 2) % 3]);
                }
            }
        }
        SpaceKind::P2 => {
            let mut grads = [[0.0; 2]; 6];
            for (l, w) in rule7() {
                basis_gradients(kind, l, &g, &mut grads);
                for i in 0..n {
                    for j in 0..n {
                        k[i * 6 + j] += w * area * dot(grads[i], grads[j]);
                    }
                }
            }
        }
    }
    k
}

/// Local weighted mass matrix.
pub(crate) fn element_mass(kind: SpaceKind, p: &[Point; 3], weight: Weight) -> [f64; 36] {
    let n = kind.local_dofs();
    let (area, _) = geometry(p);
    let mut m = [0.0; 36];
    if weight == Weight::Unit {
        match kind {
            SpaceKind::P1 => {
                for i in 0..3 {
                    for j in 0..3 {
                        m[i * 6 + j] = area / 12.0 * if i == j { 2.0 } else { 1.0 };
                    }
                }
                return m;
            }
            SpaceKind::CR => {
                for i in 0..3 {
                    m[i * 6 + i] = area / 3.0;
                }
                return m;
            }
            SpaceKind::P2 => {}
        }
    }
    let mut phi = [0.0; 6];
    for (l, w) in rule7() {
        let x = [
            l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
            l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
        ];
        let f = w * area * weight.eval(x);
        basis_values(kind, l, &mut phi);
        for i in 0..n {
            for j in 0..n {
                m[i * 6 + j] += f * phi[i] * phi[j];
            }
        }
    }
    m
}

fn assemble(space: &FemSpace, local: impl Fn(&[Point; 3]) -> [f64; 36] + Sync + Send) -> CsrMatrix {
    let n = space.kind.local_dofs();
    let blocks = crate::par::map_range(space.mesh.triangles.len(), |t| local(&space.mesh.corners(t)));
    let mut trip = TripletBuilder::with_capacity(space.n_dofs, blocks.len() * n * n);
    for (t, block) in blocks.iter().enumerate() {
        let dofs = &space.local[t];
        for i in 0..n {
            for j in 0..n {
                trip.add(dofs[i], dofs[j], block[i * 6 + j]);
            }
        }
    }
    trip.build()
}

/// Stiffness matrix `∫ ∇φ_i·∇φ_j`.
pub fn assemble_stiffness(space: &FemSpace) -> CsrMatrix {
    assemble(space, |p| element_stiffness(space.kind, p))
}

/// Mass matrix `∫ w φ_i φ_j`.
pub fn assemble_mass(space: &FemSpace, weight: Weight) -> CsrMatrix {
    assemble(space, |p| element_mass(space.kind, p, weight))
}

/// Boundary mass `∫_{∂Ω} φ_i φ_j` over every boundary edge.
pub fn assemble_boundary_mass(space: &FemSpace) -> Result<CsrMatrix> {
    let all = vec![true; space.mesh.boundary_edges.len()];
    assemble_boundary_mass_on(space, &all, false)
}

/// Boundary mass over the mesh boundary edges selected by `on`.
///
/// Crouzeix–Raviart traces are discontinuous at boundary vertices, so the
/// CR space is rejected unless `cr_midpoint` asks for the midpoint-lumped
/// variant (`|e|` on the diagonal of each boundary edge dof).
pub fn assemble_boundary_mass_on(space: &FemSpace, on: &[bool], cr_midpoint: bool) -> Result<CsrMatrix> {
    if space.mesh.boundary_edges.is_empty() {
        return Err(Error::InvalidInput("mesh has no boundary edges".into()));
    }
    let mut trip = TripletBuilder::new(space.n_dofs);
    for (k, be) in space.mesh.boundary_edges.iter().enumerate() {
        if !on[k] {
            continue;
        }
        let [a, b] = be.vertices;
        let len = crate::geometry::dist(space.mesh.vertices[a], space.mesh.vertices[b]);
        match space.kind {
            SpaceKind::P1 => {
                let d = [a, b];
                for i in 0..2 {
                    for j in 0..2 {
                        trip.add(d[i], d[j], len / 6.0 * if i == j { 2.0 } else { 1.0 });
                    }
                }
            }
            SpaceKind::P2 => {
                let e = space.edge_dof(a, b);
                let d = [a, e, b];
                const M: [[f64; 3]; 3] = [[4.0, 2.0, -1.0], [2.0, 16.0, 2.0], [-1.0, 2.0, 4.0]];
                for i in 0..3 {
                    for j in 0..3 {
                        trip.add(d[i], d[j], len / 30.0 * M[i][j]);
                    }
                }
            }
            SpaceKind::CR => {
                if !cr_midpoint {
                    return Err(Error::InvalidInput(
                        "Crouzeix-Raviart boundary mass needs the cr-midpoint variant".into(),
                    ));
                }
                let e = space.edge_dof(a, b);
                trip.add(e, e, len);
            }
        }
    }
    Ok(trip.build())
}
