//! Line-oriented domain file format.
//!
//! ```text
//! # comment
//! name my-domain            (optional)
//! polygon
//! v 0 0
//! v 1 0
//! v 0 1
//! e 0 1 neumann
//! e 1 2 dirichlet
//! e 2 0 dirichlet
//! weight unit               (or genus2)
//! ```
//!
//! A `circles` section instead holds `c cx cy r outer-ccw|inner-cw` lines.
//! Vertex indices are zero-based and every polygon edge needs exactly one
//! `e` line.

use super::{Circle, Domain, Marker, Orientation, Polygon, Shape, Weight};
use crate::{Error, Result};
use std::path::Path;

/// Resolves a built-in domain name or reads a domain file.
pub fn load_domain(spec: impl AsRef<Path>) -> Result<Domain> {
    let path = spec.as_ref();
    if let Some(name) = path.to_str() {
        if let Some(d) = Domain::builtin(name) {
            return d;
        }
    }
    let text = std::fs::read_to_string(path)?;
    let default_name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("domain");
    parse_domain(&text, default_name)
}

#[derive(PartialEq)]
enum Section {
    None,
    Polygon,
    Circles,
}

pub fn parse_domain(text: &str, default_name: &str) -> Result<Domain> {
    let mut name = default_name.to_string();
    let mut section = Section::None;
    let mut saw_polygon = false;
    let mut saw_circles = false;
    let mut vertices = Vec::new();
    let mut edges: Vec<(usize, usize, usize, Marker)> = Vec::new();
    let mut circles = Vec::new();
    let mut weight = Weight::Unit;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let err = |msg: String| Error::Parse { line, msg };
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("expected a number, got '{s}'") })
        };
        let idx = |s: &str| -> Result<usize> {
            s.parse::<usize>().map_err(|_| Error::Parse { line, msg: format!("expected a vertex index, got '{s}'") })
        };
        match toks[0] {
            "polygon" if toks.len() == 1 => {
                section = Section::Polygon;
                saw_polygon = true;
            }
            "circles" if toks.len() == 1 => {
                section = Section::Circles;
                saw_circles = true;
            }
            "name" if toks.len() == 2 => name = toks[1].to_string(),
            "weight" if toks.len() == 2 => {
                weight = toks[1].parse().map_err(|e: Error| err(e.to_string()))?;
            }
            "v" => {
                if section != Section::Polygon {
                    return Err(err("'v' line outside a polygon section".into()));
                }
                if toks.len() != 3 {
                    return Err(err("expected 'v x y'".into()));
                }
                vertices.push([num(toks[1])?, num(toks[2])?]);
            }
            "e" => {
                if section != Section::Polygon {
                    return Err(err("'e' line outside a polygon section".into()));
                }
                if toks.len() != 4 {
                    return Err(err("expected 'e i j marker'".into()));
                }
                let marker: Marker = toks[3].parse().map_err(|e: Error| err(e.to_string()))?;
                edges.push((line, idx(toks[1])?, idx(toks[2])?, marker));
            }
            "c" => {
                if section != Section::Circles {
                    return Err(err("'c' line outside a circles section".into()));
                }
                if toks.len() != 5 {
                    return Err(err("expected 'c cx cy r orientation'".into()));
                }
                let orientation: Orientation = toks[4].parse().map_err(|e: Error| err(e.to_string()))?;
                circles.push(Circle { center: [num(toks[1])?, num(toks[2])?], radius: num(toks[3])?, orientation });
            }
            other => return Err(err(format!("unrecognized line starting with '{other}'"))),
        }
    }

    let shape = match (saw_polygon, saw_circles) {
        (true, true) => {
            return Err(Error::InvalidDomain("a domain file holds either a polygon or circles, not both".into()))
        }
        (false, false) => return Err(Error::InvalidDomain("no 'polygon' or 'circles' section".into())),
        (true, false) => {
            let n = vertices.len();
            let mut markers: Vec<Option<Marker>> = vec![None; n];
            for &(line, i, j, m) in &edges {
                if i >= n || j >= n {
                    return Err(Error::Parse { line, msg: format!("vertex index out of range (have {n} vertices)") });
                }
                let k = if j == (i + 1) % n {
                    i
                } else if i == (j + 1) % n {
                    j
                } else {
                    return Err(Error::Parse { line, msg: format!("{i}-{j} is not a polygon edge") });
                };
                if markers[k].replace(m).is_some() {
                    return Err(Error::Parse { line, msg: format!("edge {k} given twice") });
                }
            }
            let markers = markers
                .into_iter()
                .enumerate()
                .map(|(k, m)| m.ok_or_else(|| Error::InvalidDomain(format!("edge {k} has no marker line"))))
                .collect::<Result<Vec<_>>>()?;
            Shape::Polygon(Polygon::new(vertices, markers)?)
        }
        (false, true) => return Ok(Domain::circles(name, circles)?.with_weight(weight)),
    };
    Ok(Domain { name, shape, weight })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIANGLE: &str = "
        # right triangle
        name tri
        polygon
        v 0 0
        v 1 0
        v 0 1   # apex
        e 0 1 neumann
        e 1 2 dirichlet
        e 0 2 steklov
        weight genus2
    ";

    #[test]
    fn parses_polygon_file() {
        let d = parse_domain(TRIANGLE, "x").unwrap();
        assert_eq!(d.name, "tri");
        assert_eq!(d.weight, Weight::Genus2);
        let p = d.as_polygon().unwrap();
        assert_eq!(p.vertices.len(), 3);
        assert_eq!(p.markers, vec![Marker::Neumann, Marker::Dirichlet, Marker::Steklov]);
    }

    #[test]
    fn parses_circles_file() {
        let d = parse_domain("circles\nc 0 0 1 outer-ccw\nc 0 0.5 0.1 inner-cw\n", "ann").unwrap();
        assert_eq!(d.name, "ann");
        assert_eq!(d.as_circles().unwrap().len(), 2);
    }

    #[test]
    fn reports_line_numbers() {
        match parse_domain("polygon\nv 0 0\nv 1 zero\n", "x") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_domain("v 0 0\n", "x"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn rejects_missing_and_bogus_edges() {
        let missing = "polygon\nv 0 0\nv 1 0\nv 0 1\ne 0 1 dirichlet\ne 1 2 dirichlet\n";
        assert!(matches!(parse_domain(missing, "x"), Err(Error::InvalidDomain(_))));
        let diagonal = "polygon\nv 0 0\nv 1 0\nv 1 1\nv 0 1\ne 0 2 dirichlet\n";
        assert!(matches!(parse_domain(diagonal, "x"), Err(Error::Parse { line: 6, .. })));
    }

    #[test]
    fn rejects_self_intersection_from_file() {
        let bow = "polygon\nv 0 0\nv 1 1\nv 1 0\nv 0 1\ne 0 1 d\ne 1 2 d\ne 2 3 d\ne 3 0 d\n";
        assert!(matches!(parse_domain(bow, "x"), Err(Error::InvalidDomain(_))));
    }

    #[test]
    fn builtin_names_bypass_files() {
        assert!(load_domain("gww-b").is_ok());
        assert!(load_domain("annulus:eps=0").is_ok());
        assert!(matches!(load_domain("/nonexistent/file.dom"), Err(Error::Io(_))));
    }
}
