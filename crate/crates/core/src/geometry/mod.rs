//! Domains, triangulations and boundary parametrizations.
//!
//! A [`Domain`] is either a simple counterclockwise polygon with a boundary
//! marker on every edge, or a union of circles (one outer circle and
//! disjoint holes). Polygons are triangulated by ear clipping and refined
//! by red refinement; circles are only ever sampled for boundary quadrature.

mod mesh;
mod parse;
mod quadrature;

pub use mesh::{triangulate, BoundaryEdge, EdgeTable, Mesh};
pub use parse::{load_domain, parse_domain};
pub use quadrature::{boundary_quadrature, proportional_counts, BoundaryQuadrature, CurveNodes};

use crate::{Error, Result};
use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

pub type Point = [f64; 2];

/// Boundary condition attached to a polygon edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Marker {
    Dirichlet,
    Neumann,
    Steklov,
}

impl FromStr for Marker {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" | "D" | "d" => Ok(Marker::Dirichlet),
            "neumann" | "N" | "n" => Ok(Marker::Neumann),
            "steklov" | "S" | "s" => Ok(Marker::Steklov),
            _ => Err(Error::InvalidInput(format!("unknown boundary marker '{s}'"))),
        }
    }
}

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Marker::Dirichlet => "dirichlet",
            Marker::Neumann => "neumann",
            Marker::Steklov => "steklov",
        })
    }
}

/// Mass coefficient of the eigenvalue problem `-Δu = λ w u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weight {
    #[default]
    Unit,
    /// `w(r) = 4 / (1 + r²)²`, the pulled-back round metric.
    Genus2,
}

impl Weight {
    pub fn eval(self, p: Point) -> f64 {
        match self {
            Weight::Unit => 1.0,
            Weight::Genus2 => {
                let r2 = p[0] * p[0] + p[1] * p[1];
                4.0 / ((1.0 + r2) * (1.0 + r2))
            }
        }
    }
}

impl FromStr for Weight {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(Weight::Unit),
            "genus2" => Ok(Weight::Genus2),
            _ => Err(Error::InvalidInput(format!("unknown weight '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Outer boundary, traversed counterclockwise.
    OuterCcw,
    /// Boundary of a hole, traversed clockwise.
    InnerCw,
}

impl FromStr for Orientation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "outer-ccw" | "outer" => Ok(Orientation::OuterCcw),
            "inner-cw" | "inner" => Ok(Orientation::InnerCw),
            _ => Err(Error::InvalidInput(format!("unknown circle orientation '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
    pub orientation: Orientation,
}

impl Circle {
    pub fn circumference(&self) -> f64 {
        2.0 * PI * self.radius
    }
}

/// Simple polygon; `markers[i]` belongs to the edge from vertex `i` to
/// vertex `i + 1` (cyclically).
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<Point>,
    pub markers: Vec<Marker>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>, markers: Vec<Marker>) -> Result<Self> {
        let poly = Polygon { vertices, markers };
        poly.validate()?;
        Ok(poly)
    }

    /// Polygon with the same marker on every edge.
    pub fn uniform(vertices: Vec<Point>, marker: Marker) -> Result<Self> {
        let markers = vec![marker; vertices.len()];
        Polygon::new(vertices, markers)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge(&self, i: usize) -> (Point, Point) {
        let n = self.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let (a, b) = self.edge(i);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<f64>()
            * 0.5
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let (a, b) = self.edge(i);
                dist(a, b)
            })
            .sum()
    }

    /// Interior angle at vertex `i`, in `(0, 2π)`.
    pub fn interior_angle(&self, i: usize) -> f64 {
        let n = self.len();
        let v = self.vertices[i];
        let next = self.vertices[(i + 1) % n];
        let prev = self.vertices[(i + n - 1) % n];
        let a_out = (next[1] - v[1]).atan2(next[0] - v[0]);
        let a_in = (prev[1] - v[1]).atan2(prev[0] - v[0]);
        let mut ang = a_in - a_out;
        while ang <= 0.0 {
            ang += 2.0 * PI;
        }
        while ang > 2.0 * PI {
            ang -= 2.0 * PI;
        }
        ang
    }

    /// Even-odd point-in-polygon test (boundary points are unspecified).
    pub fn contains(&self, p: Point) -> bool {
        let n = self.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (vi, vj) = (self.vertices[i], self.vertices[j]);
            if (vi[1] > p[1]) != (vj[1] > p[1]) {
                let x = vj[0] + (p[1] - vj[1]) * (vi[0] - vj[0]) / (vi[1] - vj[1]);
                if p[0] < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        (0..self.len())
            .map(|i| {
                let (a, b) = self.edge(i);
                segment_distance(p, a, b)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    pub fn scaled(&self, s: f64) -> Result<Polygon> {
        let vertices = self.vertices.iter().map(|v| [v[0] * s, v[1] * s]).collect();
        Polygon::new(vertices, self.markers.clone())
    }

    fn validate(&self) -> Result<()> {
        let n = self.len();
        if n < 3 {
            return Err(Error::InvalidDomain(format!("polygon needs at least 3 vertices, got {n}")));
        }
        if self.markers.len() != n {
            return Err(Error::InvalidDomain(format!(
                "polygon has {n} edges but {} markers",
                self.markers.len()
            )));
        }
        if self.vertices.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(Error::InvalidDomain("non-finite vertex coordinate".into()));
        }
        let scale = self.perimeter();
        for i in 0..n {
            let (a, b) = self.edge(i);
            if dist(a, b) <= 1e-12 * scale {
                return Err(Error::InvalidDomain(format!("edge {i} has zero length")));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (a, b) = self.edge(i);
                let (c, d) = self.edge(j);
                if segments_intersect(a, b, c, d) {
                    return Err(Error::InvalidDomain(format!(
                        "polygon is self-intersecting: edges {i} and {j} meet"
                    )));
                }
            }
        }
        // Adjacent edges folding back onto each other.
        for i in 0..n {
            let a = self.vertices[(i + n - 1) % n];
            let b = self.vertices[i];
            let c = self.vertices[(i + 1) % n];
            let u = [b[0] - a[0], b[1] - a[1]];
            let v = [c[0] - b[0], c[1] - b[1]];
            let cr = u[0] * v[1] - u[1] * v[0];
            let dt = u[0] * v[0] + u[1] * v[1];
            if cr.abs() <= 1e-14 * scale * scale && dt < 0.0 {
                return Err(Error::InvalidDomain(format!("polygon folds back at vertex {i}")));
            }
        }
        if self.signed_area() <= 0.0 {
            return Err(Error::InvalidDomain(
                "polygon vertices must be listed counterclockwise".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Polygon(Polygon),
    Curves(Vec<Circle>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub name: String,
    pub shape: Shape,
    pub weight: Weight,
}

impl Domain {
    pub fn polygon(name: impl Into<String>, polygon: Polygon) -> Domain {
        Domain { name: name.into(), shape: Shape::Polygon(polygon), weight: Weight::Unit }
    }

    pub fn circles(name: impl Into<String>, circles: Vec<Circle>) -> Result<Domain> {
        validate_circles(&circles)?;
        Ok(Domain { name: name.into(), shape: Shape::Curves(circles), weight: Weight::Unit })
    }

    pub fn with_weight(mut self, weight: Weight) -> Domain {
        self.weight = weight;
        self
    }

    /// Resolves a built-in domain name.
    ///
    /// Known names: `gww-a`, `gww-b`, `unit-square`, `unit-disk`,
    /// `annulus:eps=<v>`, `dn-square`, `dn-triangle`. Any name may carry a
    /// `:scale=<s>` suffix, e.g. `gww-a:scale=2`.
    pub fn builtin(name: &str) -> Option<Result<Domain>> {
        use Marker::*;
        if let Some((base, s)) = name.rsplit_once(":scale=") {
            let d = Domain::builtin(base)?;
            return Some(match s.parse::<f64>() {
                Ok(s) if s.is_finite() && s > 0.0 => {
                    d.and_then(|d| d.scaled(s)).map(|d| Domain { name: name.to_string(), ..d })
                }
                _ => Err(Error::InvalidInput(format!("bad scale factor '{s}'"))),
            });
        }
        let poly = |verts: &[(f64, f64)], markers: Vec<Marker>| -> Result<Domain> {
            let vertices = verts.iter().map(|&(x, y)| [x, y]).collect();
            Ok(Domain::polygon(name, Polygon::new(vertices, markers)?))
        };
        let d = match name {
            "gww-a" => poly(
                &[(0.0, 0.0), (1.0, 0.0), (1.5, 0.5), (2.0, 0.0), (2.0, 1.0), (1.5, 1.5), (0.5, 0.5), (0.0, 1.0)],
                vec![Dirichlet; 8],
            ),
            "gww-b" => poly(
                &[(0.0, 0.0), (0.5, -0.5), (1.0, 0.0), (0.5, 0.5), (1.0, 1.0), (1.0, 2.0), (0.5, 1.5), (0.0, 2.0)],
                vec![Dirichlet; 8],
            ),
            "unit-square" => poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)], vec![Dirichlet; 4]),
            // Neumann on the top edge, Dirichlet elsewhere.
            "dn-square" => poly(
                &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
                vec![Dirichlet, Dirichlet, Neumann, Dirichlet],
            ),
            // Neumann on the horizontal leg, Dirichlet elsewhere.
            "dn-triangle" => poly(
                &[(0.0, 0.0), (SQRT_2, 0.0), (0.0, SQRT_2)],
                vec![Neumann, Dirichlet, Dirichlet],
            ),
            "unit-disk" => Domain::circles(
                name,
                vec![Circle { center: [0.0, 0.0], radius: 1.0, orientation: Orientation::OuterCcw }],
            ),
            _ => {
                let eps = name.strip_prefix("annulus:eps=")?;
                return Some(
                    eps.parse::<f64>()
                        .map_err(|_| Error::InvalidInput(format!("bad annulus offset '{eps}'")))
                        .and_then(|e| Domain::eccentric_annulus(e, 0.1)),
                );
            }
        };
        Some(d)
    }

    /// Unit disk with a hole of radius `delta` centred at `(0, eps)`.
    pub fn eccentric_annulus(eps: f64, delta: f64) -> Result<Domain> {
        if !(eps.is_finite() && delta > 0.0) || eps.abs() + delta >= 1.0 {
            return Err(Error::InvalidDomain(format!(
                "inner circle (0,{eps}) radius {delta} does not fit strictly inside the unit circle"
            )));
        }
        Domain::circles(
            format!("annulus:eps={eps}"),
            vec![
                Circle { center: [0.0, 0.0], radius: 1.0, orientation: Orientation::OuterCcw },
                Circle { center: [0.0, eps], radius: delta, orientation: Orientation::InnerCw },
            ],
        )
    }

    pub fn as_polygon(&self) -> Result<&Polygon> {
        match &self.shape {
            Shape::Polygon(p) => Ok(p),
            Shape::Curves(_) => Err(Error::InvalidInput(format!(
                "domain '{}' is bounded by curves; a polygon is required",
                self.name
            ))),
        }
    }

    pub fn as_circles(&self) -> Result<&[Circle]> {
        match &self.shape {
            Shape::Curves(c) => Ok(c),
            Shape::Polygon(_) => Err(Error::InvalidInput(format!(
                "domain '{}' is a polygon; smooth boundary curves are required",
                self.name
            ))),
        }
    }

    pub fn is_polygon(&self) -> bool {
        matches!(self.shape, Shape::Polygon(_))
    }

    pub fn area(&self) -> f64 {
        match &self.shape {
            Shape::Polygon(p) => p.area(),
            Shape::Curves(c) => c
                .iter()
                .map(|c| match c.orientation {
                    Orientation::OuterCcw => PI * c.radius * c.radius,
                    Orientation::InnerCw => -PI * c.radius * c.radius,
                })
                .sum(),
        }
    }

    /// Scales the geometry by `s` about the origin.
    pub fn scaled(&self, s: f64) -> Result<Domain> {
        let shape = match &self.shape {
            Shape::Polygon(p) => Shape::Polygon(p.scaled(s)?),
            Shape::Curves(cs) => {
                let cs: Vec<Circle> = cs
                    .iter()
                    .map(|c| Circle { center: [c.center[0] * s, c.center[1] * s], radius: c.radius * s, ..*c })
                    .collect();
                validate_circles(&cs)?;
                Shape::Curves(cs)
            }
        };
        Ok(Domain { name: format!("{}*{s}", self.name), shape, weight: self.weight })
    }
}

fn validate_circles(circles: &[Circle]) -> Result<()> {
    let outer: Vec<&Circle> = circles.iter().filter(|c| c.orientation == Orientation::OuterCcw).collect();
    if outer.len() != 1 {
        return Err(Error::InvalidDomain(format!(
            "exactly one outer circle is required, got {}",
            outer.len()
        )));
    }
    let outer = outer[0];
    for (i, c) in circles.iter().enumerate() {
        if !(c.radius > 0.0 && c.radius.is_finite()) {
            return Err(Error::InvalidDomain(format!("circle {i} has non-positive radius")));
        }
        if c.orientation == Orientation::InnerCw
            && dist(c.center, outer.center) + c.radius >= outer.radius
        {
            return Err(Error::InvalidDomain(format!("inner circle {i} is not strictly inside the outer one")));
        }
    }
    for i in 0..circles.len() {
        for j in (i + 1)..circles.len() {
            let (a, b) = (&circles[i], &circles[j]);
            if a.orientation == Orientation::InnerCw
                && b.orientation == Orientation::InnerCw
                && dist(a.center, b.center) <= a.radius + b.radius
            {
                return Err(Error::InvalidDomain(format!("inner circles {i} and {j} overlap")));
            }
        }
    }
    Ok(())
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub(crate) fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

pub(crate) fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * d[0], a[1] + t * d[1]])
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Closed-segment intersection test (touching counts).
fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(a, c, d))
        || (d2 == 0.0 && on_segment(b, c, d))
        || (d3 == 0.0 && on_segment(c, a, b))
        || (d4 == 0.0 && on_segment(d, a, b))
}
