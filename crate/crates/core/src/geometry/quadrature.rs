use super::{Circle, Domain, Orientation, Point};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Equispaced periodic nodes on one boundary circle.
#[derive(Debug, Clone)]
pub struct CurveNodes {
    pub circle: Circle,
    /// Parameter values `t_j = phase + 2πj/N`.
    pub params: Vec<f64>,
    pub points: Vec<Point>,
    /// Unit normals pointing out of the domain (into the hole on inner curves).
    pub normals: Vec<Point>,
    /// Geometric curvature `1/R` (unsigned).
    pub curvature: Vec<f64>,
    /// Arclength weights `2πR/N`.
    pub weights: Vec<f64>,
    /// `|x'(t)|`, constant `R` on a circle.
    pub speed: f64,
}

impl CurveNodes {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Curvature signed so that the boundary is convex (positive) when it
    /// bends away from the outward normal, i.e. `+1/R` on the outer circle
    /// and `-1/R` on a hole.
    pub fn signed_curvature(&self, j: usize) -> f64 {
        match self.circle.orientation {
            Orientation::OuterCcw => self.curvature[j],
            Orientation::InnerCw => -self.curvature[j],
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryQuadrature {
    pub curves: Vec<CurveNodes>,
}

impl BoundaryQuadrature {
    /// Builds nodes with `counts[c]` points on curve `c`, shifted by `phase`
    /// in the parameter.
    pub fn with_counts(domain: &Domain, counts: &[usize], phase: f64) -> Result<Self> {
        let circles = domain.as_circles()?;
        if counts.len() != circles.len() {
            return Err(Error::InvalidInput(format!(
                "{} node counts given for {} curves",
                counts.len(),
                circles.len()
            )));
        }
        let curves = circles
            .iter()
            .zip(counts)
            .map(|(c, &n)| curve_nodes(c, n, phase))
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundaryQuadrature { curves })
    }

    /// Splits `total` nodes over the curves in proportion to circumference,
    /// each count rounded to an even number (at least 8).
    pub fn proportional(domain: &Domain, total: usize) -> Result<Self> {
        let counts = proportional_counts(domain, total)?;
        BoundaryQuadrature::with_counts(domain, &counts, 0.0)
    }

    pub fn total_nodes(&self) -> usize {
        self.curves.iter().map(|c| c.len()).sum()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.curves.iter().map(|c| c.len()).collect()
    }

    pub fn total_length(&self) -> f64 {
        self.weights().sum()
    }

    pub fn points(&self) -> impl Iterator<Item = &Point> + '_ {
        self.curves.iter().flat_map(|c| c.points.iter())
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.curves.iter().flat_map(|c| c.weights.iter().copied())
    }

    /// Offset of curve `c` in the flattened node numbering.
    pub fn offset(&self, c: usize) -> usize {
        self.curves[..c].iter().map(|c| c.len()).sum()
    }

    /// Smallest node spacing over all curves.
    pub fn min_spacing(&self) -> f64 {
        self.curves.iter().map(|c| c.weights[0]).fold(f64::INFINITY, f64::min)
    }
}

/// Same node count on every curve.
pub fn boundary_quadrature(domain: &Domain, n_per_curve: usize) -> Result<BoundaryQuadrature> {
    let k = domain.as_circles()?.len();
    BoundaryQuadrature::with_counts(domain, &vec![n_per_curve; k], 0.0)
}

pub fn proportional_counts(domain: &Domain, total: usize) -> Result<Vec<usize>> {
    let circles = domain.as_circles()?;
    let len: f64 = circles.iter().map(Circle::circumference).sum();
    let mut counts: Vec<usize> = circles
        .iter()
        .map(|c| {
            let share = total as f64 * c.circumference() / len;
            (2.0 * (share / 2.0).round()).max(8.0) as usize
        })
        .collect();
    // Keep the grand total when rounding allows it.
    let sum: usize = counts.iter().sum();
    if sum != total && total % 2 == 0 {
        let largest = (0..counts.len()).max_by_key(|&i| counts[i]).unwrap_or(0);
        let adjusted = counts[largest] as isize + total as isize - sum as isize;
        if adjusted >= 8 {
            counts[largest] = adjusted as usize;
        }
    }
    Ok(counts)
}

fn curve_nodes(c: &Circle, n: usize, phase: f64) -> Result<CurveNodes> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::InvalidInput(format!("node count per curve must be even and at least 4, got {n}")));
    }
    let r = c.radius;
    let sign = match c.orientation {
        Orientation::OuterCcw => 1.0,
        Orientation::InnerCw => -1.0,
    };
    let params: Vec<f64> = (0..n).map(|j| phase + 2.0 * PI * j as f64 / n as f64).collect();
    let points = params
        .iter()
        .map(|&t| [c.center[0] + r * t.cos(), c.center[1] + sign * r * t.sin()])
        .collect();
    let normals = params.iter().map(|&t| [sign * t.cos(), t.sin()]).collect();
    Ok(CurveNodes {
        circle: *c,
        params,
        points,
        normals,
        curvature: vec![1.0 / r; n],
        weights: vec![2.0 * PI * r / n as f64; n],
        speed: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builtin(name: &str) -> Domain {
        Domain::builtin(name).unwrap().unwrap()
    }

    #[test]
    fn unit_circle_eight_nodes() {
        let q = boundary_quadrature(&builtin("unit-disk"), 8).unwrap();
        let c = &q.curves[0];
        for (j, p) in c.points.iter().enumerate() {
            let t = j as f64 * PI / 4.0;
            assert!((p[0] - t.cos()).abs() < 1e-15 && (p[1] - t.sin()).abs() < 1e-15);
            assert!((c.weights[j] - PI / 4.0).abs() < 1e-15);
            assert_eq!(c.curvature[j], 1.0);
        }
    }

    #[test]
    fn annulus_normals_point_into_hole() {
        let q = boundary_quadrature(&builtin("annulus:eps=0"), 16).unwrap();
        assert_eq!(q.total_nodes(), 32);
        let inner = &q.curves[1];
        for (p, n) in inner.points.iter().zip(&inner.normals) {
            // outward from the annulus = towards the centre of the hole
            let radial = [p[0] / 0.1, p[1] / 0.1];
            assert!((n[0] + radial[0]).abs() < 1e-13 && (n[1] + radial[1]).abs() < 1e-13);
            assert!((n[0].hypot(n[1]) - 1.0).abs() < 1e-15);
        }
        let len = q.total_length();
        assert!((len - 2.0 * PI * 1.1).abs() / len < 1e-14);
    }

    #[test]
    fn odd_counts_rejected() {
        assert!(boundary_quadrature(&builtin("unit-disk"), 9).is_err());
        assert!(boundary_quadrature(&builtin("gww-a"), 8).is_err());
    }

    #[test]
    fn proportional_split() {
        let d = builtin("annulus:eps=0.88");
        assert_eq!(proportional_counts(&d, 1040).unwrap(), vec![946, 94]);
        assert_eq!(proportional_counts(&d, 130).unwrap().iter().sum::<usize>(), 130);
    }
}
