//! Closed-form spectra used as oracles.

use crate::geometry::Marker;
use crate::specfun::{bessel_j_zeros_below, bessel_jp_zeros_below};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Relative tolerance for treating two closed-form values as one eigenvalue.
const TIE: f64 = 1e-12;

/// Ascending eigenvalue list, one entry per eigenfunction, with the size
/// of each entry's multiplicity cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSpectrum {
    pub problem: String,
    pub params: Vec<(String, f64)>,
    pub values: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub generator: String,
}

impl AnalyticSpectrum {
    fn build(problem: &str, params: Vec<(String, f64)>, mut values: Vec<f64>, count: usize, generator: &str) -> Self {
        values.sort_by(f64::total_cmp);
        values.truncate(count);
        let multiplicities = tie_sizes(&values);
        AnalyticSpectrum { problem: problem.into(), params, values, multiplicities, generator: generator.into() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Distinct values with multiplicities. A cluster cut by truncation
    /// reports only the entries present.
    pub fn distinct(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        let mut i = 0;
        while i < self.values.len() {
            let m = self.multiplicities[i];
            out.push((self.values[i], m));
            i += m;
        }
        out
    }
}

fn tie_sizes(values: &[f64]) -> Vec<usize> {
    let mut sizes = vec![1; values.len()];
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && (values[end] - values[start]).abs() <= TIE * values[start].abs().max(1.0) {
            end += 1;
        }
        sizes[start..end].iter_mut().for_each(|s| *s = end - start);
        start = end;
    }
    sizes
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiskKind {
    Dirichlet,
    Neumann,
    Steklov,
}

/// Spectra of the disk of radius `radius`; `count` entries.
pub fn disk_spectra(kind: DiskKind, radius: f64, count: usize) -> Result<AnalyticSpectrum> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("disk radius must be positive, got {radius}")));
    }
    let params = vec![("radius".to_string(), radius)];
    if kind == DiskKind::Steklov {
        let mut v = vec![0.0];
        for n in 1..=count.div_ceil(2) {
            v.push(n as f64 / radius);
            v.push(n as f64 / radius);
        }
        return Ok(AnalyticSpectrum::build("disk-steklov", params, v, count, "0, then n/R twice"));
    }
    // Collect every Bessel zero below a cutoff, doubling until enough.
    let mut cutoff = 2.0 * (count as f64).sqrt() + 6.0;
    loop {
        let mut v = Vec::new();
        if kind == DiskKind::Neumann {
            v.push(0.0);
        }
        let mut n = 0usize;
        while (n as f64) < cutoff {
            let zeros = match kind {
                DiskKind::Dirichlet => bessel_j_zeros_below(n as f64, cutoff)?,
                _ => bessel_jp_zeros_below(n as f64, cutoff)?,
            };
            if zeros.is_empty() {
                break;
            }
            for z in zeros {
                let lam = (z / radius).powi(2);
                v.push(lam);
                if n > 0 {
                    v.push(lam);
                }
            }
            n += 1;
        }
        if v.len() >= count {
            let (problem, generator) = match kind {
                DiskKind::Dirichlet => ("disk-dirichlet", "(j_{n,k}/R)^2, doubled for n >= 1"),
                _ => ("disk-neumann", "0, then (j'_{n,k}/R)^2, doubled for n >= 1"),
            };
            return Ok(AnalyticSpectrum::build(problem, params, v, count, generator));
        }
        cutoff *= 2.0;
    }
}

/// Boundary condition on each side of an axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RectangleSides {
    pub bottom: Marker,
    pub right: Marker,
    pub top: Marker,
    pub left: Marker,
}

impl RectangleSides {
    pub fn uniform(m: Marker) -> Self {
        RectangleSides { bottom: m, right: m, top: m, left: m }
    }
}

/// Wavenumber family along one axis of length `len` with end conditions
/// `lo`, `hi`: `π(k + shift)/len`.
fn axis_modes(lo: Marker, hi: Marker, len: f64, upto: f64) -> Vec<f64> {
    let (first, shift) = match (lo, hi) {
        (Marker::Dirichlet, Marker::Dirichlet) => (1, 0.0),
        (Marker::Neumann, Marker::Neumann) => (0, 0.0),
        _ => (1, -0.5),
    };
    let mut out = Vec::new();
    let mut k = first;
    loop {
        let w = PI * (k as f64 + shift) / len;
        if w > upto {
            break;
        }
        out.push(w);
        k += 1;
    }
    out
}

/// Dirichlet/Neumann/mixed spectrum of the rectangle `[0,a]×[0,b]`.
pub fn rectangle_spectra(a: f64, b: f64, sides: RectangleSides, count: usize) -> Result<AnalyticSpectrum> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidInput(format!("rectangle sides must be positive, got {a} x {b}")));
    }
    if [sides.bottom, sides.right, sides.top, sides.left].contains(&Marker::Steklov) {
        return Err(Error::InvalidInput("rectangle oracle covers Dirichlet/Neumann sides only".into()));
    }
    let mut cutoff = PI * (count as f64).sqrt() * (1.0 / a).max(1.0 / b) + PI;
    loop {
        let kx = axis_modes(sides.left, sides.right, a, cutoff);
        let ky = axis_modes(sides.bottom, sides.top, b, cutoff);
        let mut v: Vec<f64> = Vec::new();
        for x in &kx {
            for y in &ky {
                let w2 = x * x + y * y;
                if w2 <= cutoff * cutoff {
                    v.push(w2);
                }
            }
        }
        if v.len() >= count {
            let params = vec![("a".into(), a), ("b".into(), b)];
            return Ok(AnalyticSpectrum::build("rectangle", params, v, count, "pi^2 (p^2/a^2 + q^2/b^2)"));
        }
        cutoff *= 2.0;
    }
}

/// The two Steklov eigenvalues of angular order `n ≥ 1` on the concentric
/// annulus `r_inner < r < r_outer`: roots of `σ² − c(p+q)σ + pq = 0` with
/// `p = n/R`, `q = n/ρ`, `c = (1+t²)/(1−t²)`, `t = (ρ/R)ⁿ`.
pub fn annulus_mode_pair(n: u32, r_inner: f64, r_outer: f64) -> (f64, f64) {
    let p = n as f64 / r_outer;
    let q = n as f64 / r_inner;
    let t2 = (r_inner / r_outer).powi(2 * n as i32);
    let c = (1.0 + t2) / (1.0 - t2);
    let s = c * (p + q);
    let big = 0.5 * (s + (s * s - 4.0 * p * q).max(0.0).sqrt());
    (p * q / big, big)
}

/// Simple nonzero radial Steklov eigenvalue of the concentric annulus.
pub fn annulus_radial_mode(r_inner: f64, r_outer: f64) -> f64 {
    (1.0 / r_outer + 1.0 / r_inner) / (r_outer / r_inner).ln()
}

/// Steklov spectrum of `{r_inner < |x| < r_outer}`, counting `σ₀ = 0`.
pub fn concentric_annulus_steklov(r_inner: f64, r_outer: f64, count: usize) -> Result<AnalyticSpectrum> {
    if !(r_inner > 0.0 && r_inner < r_outer) {
        return Err(Error::InvalidInput(format!("need 0 < r_inner < r_outer, got {r_inner}, {r_outer}")));
    }
    let mut v = vec![0.0, annulus_radial_mode(r_inner, r_outer)];
    for n in 1..=count.max(1) as u32 {
        let (a, b) = annulus_mode_pair(n, r_inner, r_outer);
        v.extend([a, a, b, b]);
    }
    let params = vec![("r_inner".into(), r_inner), ("r_outer".into(), r_outer)];
    Ok(AnalyticSpectrum::build("annulus-steklov", params, v, count, "radial pair and 2x2 angular systems"))
}

/// Merged list of two spectra (the quasimode list `S_k` for two disks).
pub fn union_spectrum(a: &AnalyticSpectrum, b: &AnalyticSpectrum, count: usize) -> AnalyticSpectrum {
    let v: Vec<f64> = a.values.iter().chain(&b.values).copied().collect();
    AnalyticSpectrum::build(
        "union",
        a.params.iter().chain(&b.params).cloned().collect(),
        v,
        count,
        &format!("union of {} and {}", a.problem, b.problem),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel_j_zero;

    #[test]
    fn disk_steklov() {
        assert_eq!(disk_spectra(DiskKind::Steklov, 1.0, 7).unwrap().values, vec![0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let s = disk_spectra(DiskKind::Steklov, 0.1, 5).unwrap();
        for (x, y) in s.values.iter().zip([0.0, 10.0, 10.0, 20.0, 20.0]) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(s.multiplicities, vec![1, 2, 2, 2, 2]);
    }

    #[test]
    fn disk_dirichlet_and_neumann() {
        let d = disk_spectra(DiskKind::Dirichlet, 1.0, 6).unwrap();
        let j01 = bessel_j_zero(0.0, 1).unwrap();
        let j11 = bessel_j_zero(1.0, 1).unwrap();
        let j21 = bessel_j_zero(2.0, 1).unwrap();
        let j02 = bessel_j_zero(0.0, 2).unwrap();
        let want = [j01 * j01, j11 * j11, j11 * j11, j21 * j21, j21 * j21, j02 * j02];
        for (x, y) in d.values.iter().zip(want) {
            assert!((x - y).abs() < 1e-10);
        }
        assert_eq!(d.multiplicities, vec![1, 2, 2, 2, 2, 1]);
        let n = disk_spectra(DiskKind::Neumann, 2.0, 3).unwrap();
        assert_eq!(n.values[0], 0.0);
        assert!((n.values[1] - (1.841_183_781_340_659_3f64 / 2.0).powi(2)).abs() < 1e-11);
    }

    #[test]
    fn rectangles() {
        let d = rectangle_spectra(1.0, 1.0, RectangleSides::uniform(Marker::Dirichlet), 3).unwrap();
        assert!((d.values[0] - 2.0 * PI * PI).abs() < 1e-12);
        assert_eq!(d.multiplicities[1], 2);
        let n = rectangle_spectra(1.0, 1.0, RectangleSides::uniform(Marker::Neumann), 3).unwrap();
        assert_eq!(n.values[0], 0.0);
        let mut sides = RectangleSides::uniform(Marker::Dirichlet);
        sides.top = Marker::Neumann;
        let m = rectangle_spectra(1.0, 1.0, sides, 3).unwrap();
        assert!((m.values[0] - 1.25 * PI * PI).abs() < 1e-12);
        assert!((m.values[1] - (1.0 + 2.25) * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn annulus_closed_form() {
        let s = concentric_annulus_steklov(0.1, 1.0, 20).unwrap();
        assert_eq!(s.values[0], 0.0);
        assert_eq!(s.multiplicities[0], 1);
        let radial = -11.0 / 0.1f64.ln();
        assert!((radial - 4.777_239_300_935_770).abs() < 1e-14);
        let i = s.values.iter().position(|v| (v - radial).abs() < 1e-12).unwrap();
        assert_eq!(s.multiplicities[i], 1);
        assert_eq!(i, 9);
        // mode n = 1 by a direct 2x2 solve of the boundary system
        for n in [1u32, 3, 8] {
            let (a, b) = annulus_mode_pair(n, 0.1, 1.0);
            for sigma in [a, b] {
                let (p, q) = (n as f64, n as f64 / 0.1);
                let t2 = 0.1f64.powi(2 * n as i32);
                let det = (p - sigma) * (q - sigma) - t2 * (p + sigma) * (q + sigma);
                assert!(det.abs() < 1e-9 * (p * q), "n={n}: {det}");
            }
        }
    }

    #[test]
    fn union_lists() {
        let a = disk_spectra(DiskKind::Steklov, 1.0, 40).unwrap();
        let b = disk_spectra(DiskKind::Steklov, 0.1, 40).unwrap();
        let u = union_spectrum(&a, &b, 24);
        assert_eq!(&u.values[..6], &[0.0, 0.0, 1.0, 1.0, 2.0, 2.0]);
        assert_eq!(u.multiplicities[0], 2);
        // ten appears twice from the big disk and twice from the small one
        let tens = u.values.iter().filter(|v| (**v - 10.0).abs() < 1e-12).count();
        assert_eq!(tens, 4);
        let empty = AnalyticSpectrum { values: vec![], multiplicities: vec![], ..a.clone() };
        assert_eq!(union_spectrum(&a, &empty, 40).values, a.values);
    }

    #[test]
    fn regeneration_with_larger_window_is_a_prefix() {
        let cases: Vec<Box<dyn Fn(usize) -> AnalyticSpectrum>> = vec![
            Box::new(|c| disk_spectra(DiskKind::Dirichlet, 1.3, c).unwrap()),
            Box::new(|c| disk_spectra(DiskKind::Neumann, 0.7, c).unwrap()),
            Box::new(|c| rectangle_spectra(1.0, 2.5, RectangleSides::uniform(Marker::Dirichlet), c).unwrap()),
            Box::new(|c| concentric_annulus_steklov(0.1, 1.0, c).unwrap()),
        ];
        for f in cases {
            let small = f(30);
            let big = f(120);
            assert_eq!(small.values.len(), 30);
            for w in big.values.windows(2) {
                assert!(w[0] <= w[1]);
            }
            for (x, y) in small.values.iter().zip(&big.values) {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn small_hole_approaches_disk() {
        // continuity diagnostic: low angular modes of the outer circle
        let s = concentric_annulus_steklov(1e-3, 1.0, 6).unwrap();
        log::info!("annulus r=1e-3: {:?}", s.values);
        let (a, _) = annulus_mode_pair(1, 1e-3, 1.0);
        assert!((a - 1.0).abs() < 1e-5);
    }
}
