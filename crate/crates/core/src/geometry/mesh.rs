use super::{cross, dist, Domain, Marker, Point};
use crate::{Error, Result};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub marker: Marker,
}

/// Conforming triangulation of a polygon.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Longest edge length.
    pub h: f64,
    pub level: u32,
}

/// Unique edges of a mesh and the triangle-to-edge incidence.
#[derive(Debug, Clone)]
pub struct EdgeTable {
    /// Vertex pairs with `e[0] < e[1]`, in order of first appearance.
    pub edges: Vec<[usize; 2]>,
    /// `tri_edges[t][k]` joins local vertices `k` and `(k + 1) % 3`.
    pub tri_edges: Vec<[usize; 3]>,
    /// Marker of each edge on the boundary, `None` for interior edges.
    pub boundary: Vec<Option<Marker>>,
}

impl Mesh {
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        0.5 * cross(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    pub fn corners(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    fn max_edge(vertices: &[Point], triangles: &[[usize; 3]]) -> f64 {
        triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
            .map(|(a, b)| dist(vertices[a], vertices[b]))
            .fold(0.0, f64::max)
    }

    /// Red refinement: each triangle splits into four similar children
    /// through its edge midpoints.
    pub fn refine(&self) -> Mesh {
        let mut vertices = self.vertices.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::with_capacity(self.triangles.len() * 2);
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                let (p, q) = (vertices[a], vertices[b]);
                vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for e in &self.boundary_edges {
            let [a, b] = e.vertices;
            let m = midpoint(a, b, &mut vertices);
            boundary_edges.push(BoundaryEdge { vertices: [a, m], marker: e.marker });
            boundary_edges.push(BoundaryEdge { vertices: [m, b], marker: e.marker });
        }
        let h = Mesh::max_edge(&vertices, &triangles);
        Mesh { vertices, triangles, boundary_edges, h, level: self.level + 1 }
    }

    /// Applies [`Mesh::refine`] `levels` times.
    pub fn refined(&self, levels: u32) -> Mesh {
        let mut m = self.clone();
        for _ in 0..levels {
            m = m.refine();
        }
        m
    }

    pub fn edge_table(&self) -> EdgeTable {
        let mut index: HashMap<(usize, usize), usize> = HashMap::with_capacity(self.triangles.len() * 2);
        let mut edges = Vec::new();
        let mut tri_edges = Vec::with_capacity(self.triangles.len());
        for t in &self.triangles {
            let mut te = [0; 3];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                te[k] = *index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edges.len() - 1
                });
            }
            tri_edges.push(te);
        }
        let mut boundary = vec![None; edges.len()];
        for be in &self.boundary_edges {
            let [a, b] = be.vertices;
            if let Some(&e) = index.get(&(a.min(b), a.max(b))) {
                boundary[e] = Some(be.marker);
            }
        }
        EdgeTable { edges, tri_edges, boundary }
    }

    /// Scales vertex coordinates by `s`.
    pub fn scaled(&self, s: f64) -> Mesh {
        Mesh {
            vertices: self.vertices.iter().map(|v| [v[0] * s, v[1] * s]).collect(),
            h: self.h * s.abs(),
            ..self.clone()
        }
    }
}

/// Coarse triangulation of a polygonal domain by ear clipping.
///
/// Among the valid ears the best-shaped one is clipped first (ties go to the
/// lowest vertex index), so the result is deterministic.
pub fn triangulate(domain: &Domain) -> Result<Mesh> {
    let poly = domain.as_polygon()?;
    let vertices = poly.vertices.clone();
    let n = vertices.len();
    let scale = poly.perimeter();
    let area_tol = 1e-12 * scale * scale;

    let mut remaining: Vec<usize> = (0..n).collect();
    let mut triangles = Vec::with_capacity(n - 2);
    while remaining.len() > 3 {
        let m = remaining.len();
        let mut best: Option<(f64, usize)> = None;
        for k in 0..m {
            let (ip, ic, inx) = (remaining[(k + m - 1) % m], remaining[k], remaining[(k + 1) % m]);
            let (p, c, q) = (vertices[ip], vertices[ic], vertices[inx]);
            if cross(p, c, q) <= area_tol {
                continue;
            }
            let blocked = remaining.iter().any(|&j| {
                j != ip && j != ic && j != inx && vertices[j] != p && vertices[j] != c && vertices[j] != q
                    && in_closed_triangle(vertices[j], p, c, q, area_tol)
            });
            if blocked {
                continue;
            }
            let quality = shape_quality(p, c, q);
            if best.is_none_or(|(bq, _)| quality > bq * (1.0 + 1e-12)) {
                best = Some((quality, k));
            }
        }
        let Some((_, k)) = best else {
            return Err(Error::InvalidDomain(format!(
                "degenerate polygon '{}': no non-degenerate ear left to clip",
                domain.name
            )));
        };
        let m = remaining.len();
        triangles.push([remaining[(k + m - 1) % m], remaining[k], remaining[(k + 1) % m]]);
        remaining.remove(k);
    }
    let last = [remaining[0], remaining[1], remaining[2]];
    if cross(vertices[last[0]], vertices[last[1]], vertices[last[2]]) <= area_tol {
        return Err(Error::InvalidDomain(format!(
            "degenerate polygon '{}': collinear vertices produce a zero-area triangle",
            domain.name
        )));
    }
    triangles.push(last);

    let boundary_edges = (0..n)
        .map(|i| BoundaryEdge { vertices: [i, (i + 1) % n], marker: poly.markers[i] })
        .collect();
    let h = Mesh::max_edge(&vertices, &triangles);
    Ok(Mesh { vertices, triangles, boundary_edges, h, level: 0 })
}

fn in_closed_triangle(x: Point, a: Point, b: Point, c: Point, tol: f64) -> bool {
    cross(a, b, x) >= -tol && cross(b, c, x) >= -tol && cross(c, a, x) >= -tol
}

/// `4√3·area / Σ edge²`: 1 for equilateral, 0 for degenerate.
fn shape_quality(a: Point, b: Point, c: Point) -> f64 {
    let s = dist(a, b).powi(2) + dist(b, c).powi(2) + dist(c, a).powi(2);
    2.0 * 3f64.sqrt() * cross(a, b, c) / s
}
