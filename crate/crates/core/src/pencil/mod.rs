//! Matrix pencils `A v = λ B v` and their dense and sparse eigensolvers.

mod sparse;

pub use sparse::{
    reverse_cuthill_mckee, subspace_iteration, CsrMatrix, EnvelopeCholesky, SubspaceResult,
    TripletBuilder,
};

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::fmt;
use std::ops::Range;

pub type Complex64 = nalgebra::Complex<f64>;

/// Default relative radius for multiplicity clustering.
pub const DEFAULT_CLUSTER_RADIUS: f64 = 1e-6;

/// Condition-number gate for `solve_general`.
pub const CONDITION_GATE: f64 = 1e12;

/// Imaginary parts below this fraction of the modulus are dropped.
pub const REAL_TOLERANCE: f64 = 1e-8;

const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    PositiveDefinite,
    PositiveSemidefinite,
    Indefinite,
    Unknown,
}

/// A pair of dense square matrices.
#[derive(Debug, Clone)]
pub struct Pencil {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    a_symmetric: bool,
    b_symmetric: bool,
    b_definiteness: Definiteness,
}

impl Pencil {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Pencil> {
        if !a.is_square() || a.shape() != b.shape() {
            return Err(Error::InvalidInput(format!(
                "pencil matrices must be square and equal in size, got {:?} and {:?}",
                a.shape(),
                b.shape()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("pencil contains non-finite entries".into()));
        }
        let a_symmetric = is_symmetric(&a);
        let b_symmetric = is_symmetric(&b);
        Ok(Pencil { a, b, a_symmetric, b_symmetric, b_definiteness: Definiteness::Unknown })
    }

    /// Standard problem `A v = λ v`.
    pub fn standard(a: DMatrix<f64>) -> Result<Pencil> {
        let n = a.nrows();
        let mut p = Pencil::new(a, DMatrix::identity(n, n))?;
        p.b_definiteness = Definiteness::PositiveDefinite;
        Ok(p)
    }

    pub fn with_definiteness(mut self, d: Definiteness) -> Pencil {
        self.b_definiteness = d;
        self
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_symmetric(&self) -> bool {
        self.a_symmetric && self.b_symmetric
    }

    pub fn b_definiteness(&self) -> Definiteness {
        self.b_definiteness
    }
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    let norm = m.norm();
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOLERANCE * norm {
                return false;
            }
        }
    }
    true
}

/// Where a spectrum came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Provenance {
    pub method: String,
    pub param: String,
    pub domain: String,
}

impl Provenance {
    pub fn new(method: impl Into<String>, param: impl Into<String>, domain: impl Into<String>) -> Self {
        Provenance { method: method.into(), param: param.into(), domain: domain.into() }
    }
}

/// Ordered eigenvalues with multiplicity clusters.
///
/// Real spectra are ascending; spectra with complex entries are sorted by
/// modulus. `zero_modes` counts leading entries that represent the exact
/// kernel of the continuous problem (constants for Neumann and Steklov).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub multiplicities: Vec<usize>,
    pub cluster_radius: f64,
    pub vectors: Option<DMatrix<f64>>,
    pub provenance: Provenance,
    pub zero_modes: usize,
}

impl Spectrum {
    pub fn from_real(values: Vec<f64>, radius: f64) -> Spectrum {
        Spectrum::from_complex(values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(), radius)
    }

    /// Sorts and clusters; vectors are not attached.
    pub fn from_complex(mut values: Vec<Complex64>, radius: f64) -> Spectrum {
        sort_eigenvalues(&mut values);
        let multiplicities = cluster_sizes(&values, radius);
        Spectrum {
            eigenvalues: values,
            multiplicities,
            cluster_radius: radius,
            vectors: None,
            provenance: Provenance::default(),
            zero_modes: 0,
        }
    }

    pub fn with_provenance(mut self, p: Provenance) -> Spectrum {
        self.provenance = p;
        self
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.eigenvalues.iter().all(|z| z.im == 0.0)
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }

    /// Eigenvalues after the flagged zero modes.
    pub fn nonzero_values(&self) -> Vec<f64> {
        self.eigenvalues[self.zero_modes.min(self.len())..].iter().map(|z| z.re).collect()
    }

    /// Keeps the first `n` entries (and vector columns).
    pub fn truncate(&mut self, n: usize) {
        if n >= self.len() {
            return;
        }
        self.eigenvalues.truncate(n);
        if let Some(v) = self.vectors.take() {
            self.vectors = Some(v.columns(0, n).into_owned());
        }
        self.multiplicities = cluster_sizes(&self.eigenvalues, self.cluster_radius);
        self.zero_modes = self.zero_modes.min(n);
    }

    /// Re-clusters with a new radius.
    pub fn recluster(&mut self, radius: f64) {
        self.cluster_radius = radius;
        self.multiplicities = cluster_sizes(&self.eigenvalues, radius);
    }

    /// Index ranges of the multiplicity clusters.
    pub fn clusters(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.len() {
            let m = self.multiplicities[i].max(1);
            out.push(i..i + m);
            i += m;
        }
        out
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, z) in self.eigenvalues.iter().enumerate() {
            if z.im == 0.0 {
                writeln!(f, "{i:4}  {:.15}  (x{})", z.re, self.multiplicities[i])?;
            } else {
                writeln!(f, "{i:4}  {:.15} {:+.3e}i  (x{})", z.re, z.im, self.multiplicities[i])?;
            }
        }
        Ok(())
    }
}

fn sort_eigenvalues(values: &mut [Complex64]) {
    let all_real = values.iter().all(|z| z.im == 0.0);
    if all_real {
        values.sort_by(|a, b| a.re.total_cmp(&b.re));
    } else {
        values.sort_by(|a, b| {
            a.norm()
                .total_cmp(&b.norm())
                .then(a.re.total_cmp(&b.re))
                .then(a.im.total_cmp(&b.im))
        });
    }
}

/// Cluster size of each entry of a sorted list. A cluster is anchored at
/// its first member: `z` joins while `|z - first| <= radius * max(1, |first|, |z|)`.
pub fn cluster_sizes(values: &[Complex64], radius: f64) -> Vec<usize> {
    let mut sizes = vec![1; values.len()];
    let mut start = 0;
    while start < values.len() {
        let anchor = values[start];
        let mut end = start + 1;
        while end < values.len() {
            let z = values[end];
            let scale = 1f64.max(anchor.norm()).max(z.norm());
            if (z - anchor).norm() <= radius * scale {
                end += 1;
            } else {
                break;
            }
        }
        for s in &mut sizes[start..end] {
            *s = end - start;
        }
        start = end;
    }
    sizes
}

/// Lower Cholesky factor; failure names the first non-positive pivot.
pub fn cholesky(b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = b.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    let scale = (0..n).map(|i| b[(i, i)].abs()).fold(0.0, f64::max);
    for j in 0..n {
        let mut d = b[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > f64::EPSILON * scale * n as f64) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        // column j below the diagonal
        for i in (j + 1)..n {
            let mut s = b[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// All eigenpairs of a symmetric-definite pencil, ascending.
///
/// Reduces to `L⁻¹ A L⁻ᵀ y = λ y` with `B = L Lᵀ`, diagonalizes, and maps
/// back `v = L⁻ᵀ y`, so returned vectors are B-orthonormal.
pub fn solve_symdef(pencil: &Pencil, want_vectors: bool) -> Result<Spectrum> {
    if !pencil.is_symmetric() {
        return Err(Error::InvalidInput("solve_symdef requires symmetric A and B".into()));
    }
    let l = cholesky(&pencil.b)?;
    let x = l
        .solve_lower_triangular(&pencil.a)
        .ok_or_else(|| Error::Quality("singular Cholesky factor".into()))?;
    let mut c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::Quality("singular Cholesky factor".into()))?;
    let n = c.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let m = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = m;
            c[(j, i)] = m;
        }
    }
    if !want_vectors {
        let vals = c.symmetric_eigenvalues();
        return Ok(Spectrum::from_real(vals.iter().copied().collect(), DEFAULT_CLUSTER_RADIUS));
    }
    let eig = nalgebra::SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let v = l
        .tr_solve_lower_triangular(&y)
        .ok_or_else(|| Error::Quality("singular Cholesky factor".into()))?;
    let mut spec = Spectrum::from_real(values, DEFAULT_CLUSTER_RADIUS);
    spec.vectors = Some(v);
    Ok(spec)
}

/// Eigenvalues of a general pencil via `B⁻¹A`, Hessenberg reduction and
/// shifted QR. Near-real pairs (`|im| ≤ 1e-8·|λ|`) are reported as real.
pub fn solve_general(pencil: &Pencil) -> Result<Spectrum> {
    let n = pencil.dim();
    let lu = pencil.b.clone().lu();
    let binv = lu.try_inverse().ok_or(Error::IllConditioned { estimate: f64::INFINITY })?;
    let cond = one_norm(&pencil.b) * one_norm(&binv);
    if !cond.is_finite() || cond > CONDITION_GATE {
        return Err(Error::IllConditioned { estimate: cond });
    }
    let c = &binv * &pencil.a;
    let values = faer::Mat::from_fn(n, n, |i, j| c[(i, j)])
        .eigenvalues()
        .map_err(|e| Error::NoConvergence(format!("nonsymmetric eigensolver on a {n}x{n} pencil: {e:?}")))?
        .into_iter()
        .map(|z| {
            let z = Complex64::new(z.re, z.im);
            if z.im.abs() <= REAL_TOLERANCE * z.norm() {
                Complex64::new(z.re, 0.0)
            } else {
                z
            }
        })
        .collect();
    Ok(Spectrum::from_complex(values, DEFAULT_CLUSTER_RADIUS))
}

/// Condition estimate of `B` in the 1-norm (exact, from the explicit inverse).
pub fn condition_estimate(b: &DMatrix<f64>) -> f64 {
    match b.clone().try_inverse() {
        Some(inv) => one_norm(b) * one_norm(&inv),
        None => f64::INFINITY,
    }
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Symmetrized gap `max(δ(U,V), δ(V,U))` between the column spans of `u`
/// and `v`, measured in the inner product `⟨x, y⟩ = xᵀ G y` (`G = I` when
/// `gram` is `None`).
pub fn subspace_gap(u: &DMatrix<f64>, v: &DMatrix<f64>, gram: Option<&DMatrix<f64>>) -> Result<f64> {
    if u.nrows() != v.nrows() {
        return Err(Error::InvalidInput("subspace blocks live in different spaces".into()));
    }
    let (u, v) = match gram {
        Some(g) => {
            if g.shape() != (u.nrows(), u.nrows()) {
                return Err(Error::InvalidInput("Gram matrix has the wrong size".into()));
            }
            let l = cholesky(g)?;
            let lt = l.transpose();
            (&lt * u, &lt * v)
        }
        None => (u.clone(), v.clone()),
    };
    let qu = orthonormal_basis(&u)?;
    let qv = orthonormal_basis(&v)?;
    Ok(directed_gap(&qu, &qv).max(directed_gap(&qv, &qu)))
}

fn orthonormal_basis(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.ncols() == 0 || m.ncols() > m.nrows() {
        return Err(Error::InvalidInput("subspace block must have 1..=n columns".into()));
    }
    let svd = m.clone().svd(true, false);
    let s = &svd.singular_values;
    let smax = s.max();
    let smin = s.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::InvalidInput(format!(
            "rank-deficient subspace block (singular values {smax:e} .. {smin:e})"
        )));
    }
    Ok(svd.u.unwrap())
}

fn directed_gap(qu: &DMatrix<f64>, qv: &DMatrix<f64>) -> f64 {
    let r = qu - qv * (qv.transpose() * qu);
    let s = r.svd(false, false).singular_values;
    s.max().clamp(0.0, 1.0)
}

/// Residual `‖A v − λ B v‖` of one eigenpair.
pub fn residual(pencil: &Pencil, lambda: f64, v: &DVector<f64>) -> f64 {
    (&pencil.a * v - lambda * (&pencil.b * v)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn random_spd(n: usize, rng: &mut StdRng) -> DMatrix<f64> {
        let l = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                1.0 + rng.gen::<f64>()
            } else if i > j {
                rng.gen::<f64>() - 0.5
            } else {
                0.0
            }
        });
        &l * l.transpose()
    }

    fn random_sym(n: usize, rng: &mut StdRng) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() - 0.5);
        &m + m.transpose()
    }

    /// Determinant of A − λB by Gaussian elimination with partial pivoting,
    /// returned as its sign (magnitudes overflow for larger n).
    fn det_sign(a: &DMatrix<f64>, b: &DMatrix<f64>, lambda: f64) -> f64 {
        let mut m = a - lambda * b;
        let n = m.nrows();
        let mut sign = 1.0;
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| m[(i, k)].abs().total_cmp(&m[(j, k)].abs())).unwrap();
            if m[(p, k)] == 0.0 {
                return 0.0;
            }
            if p != k {
                m.swap_rows(p, k);
                sign = -sign;
            }
            sign *= m[(k, k)].signum();
            for i in (k + 1)..n {
                let f = m[(i, k)] / m[(k, k)];
                for j in k..n {
                    let t = m[(k, j)];
                    m[(i, j)] -= f * t;
                }
            }
        }
        sign
    }

    #[test]
    fn diagonal_pencils() {
        let p = Pencil::standard(DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]))).unwrap();
        assert_eq!(solve_symdef(&p, false).unwrap().real_values(), vec![1.0, 2.0, 3.0]);
        let p = Pencil::new(DMatrix::from_element(1, 1, 1.0), DMatrix::from_element(1, 1, 2.0)).unwrap();
        assert!((solve_symdef(&p, true).unwrap().real_values()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn symdef_matches_bisection_oracle() {
        let mut rng = StdRng::seed_from_u64(7);
        let n = 20;
        let a = random_sym(n, &mut rng);
        let b = random_spd(n, &mut rng);
        let p = Pencil::new(a.clone(), b.clone()).unwrap();
        let spec = solve_symdef(&p, true).unwrap();
        for (k, &lam) in spec.real_values().iter().enumerate() {
            // bracket λ between its neighbours and locate the sign change
            let lo_gap = if k > 0 { lam - spec.real_values()[k - 1] } else { 1.0 };
            let hi_gap = if k + 1 < n { spec.real_values()[k + 1] - lam } else { 1.0 };
            let (mut lo, mut hi) = (lam - 0.5 * lo_gap, lam + 0.5 * hi_gap);
            let slo = det_sign(&a, &b, lo);
            assert_ne!(slo, det_sign(&a, &b, hi), "no sign change around λ_{k}");
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if det_sign(&a, &b, mid) == slo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((0.5 * (lo + hi) - lam).abs() < 1e-8, "λ_{k}: {lam} vs {}", 0.5 * (lo + hi));
        }
    }

    #[test]
    fn symdef_residuals_and_b_orthonormality() {
        let mut rng = StdRng::seed_from_u64(11);
        let n = 30;
        let a = random_sym(n, &mut rng);
        let b = random_spd(n, &mut rng);
        let p = Pencil::new(a.clone(), b.clone()).unwrap();
        let spec = solve_symdef(&p, true).unwrap();
        let v = spec.vectors.as_ref().unwrap();
        let gram = v.transpose() * &b * v;
        let (na, nb) = (a.norm(), b.norm());
        for (k, lam) in spec.real_values().into_iter().enumerate() {
            let col = v.column(k).into_owned();
            assert!(residual(&p, lam, &col) <= 1e-9 * (na + lam.abs() * nb));
            for j in 0..n {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((gram[(k, j)] - want).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn cholesky_names_pivot() {
        let b = DMatrix::from_row_slice(3, 3, &[4.0, 2.0, 0.0, 2.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        match cholesky(&b) {
            Err(Error::NotPositiveDefinite { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("expected pivot failure, got {other:?}"),
        }
        let p = Pencil::new(DMatrix::identity(3, 3), b).unwrap();
        assert!(matches!(solve_symdef(&p, false), Err(Error::NotPositiveDefinite { pivot: 1, .. })));
    }

    #[test]
    fn general_rotation_and_diagonal() {
        let p = Pencil::standard(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])).unwrap();
        let s = solve_general(&p).unwrap();
        let mut ims: Vec<f64> = s.eigenvalues.iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] + 1.0).abs() < 1e-14 && (ims[1] - 1.0).abs() < 1e-14);
        assert!(s.eigenvalues.iter().all(|z| z.re.abs() < 1e-14));

        let p = Pencil::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 7.0])),
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])),
        )
        .unwrap();
        let s = solve_general(&p).unwrap();
        assert!(s.is_real());
        let v = s.real_values();
        assert!((v[0] - 3.0).abs() < 1e-14 && (v[1] - 3.5).abs() < 1e-14);
    }

    #[test]
    fn general_rejects_singular_b() {
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 + 1e-14]);
        let p = Pencil::new(DMatrix::identity(2, 2), b).unwrap();
        assert!(matches!(solve_general(&p), Err(Error::IllConditioned { .. })));
    }

    /// Characteristic polynomial of B⁻¹A (Faddeev–LeVerrier) and its roots
    /// via the companion matrix; independent of the Hessenberg path because
    /// the companion matrix is already Hessenberg with a different spectrum
    /// conditioning.
    #[test]
    fn general_matches_companion_oracle() {
        let mut rng = StdRng::seed_from_u64(3);
        let n = 12;
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() - 0.5);
        let b = DMatrix::identity(n, n) * 2.0 + DMatrix::from_fn(n, n, |_, _| 0.2 * (rng.gen::<f64>() - 0.5));
        let c = b.clone().try_inverse().unwrap() * &a;
        // Faddeev–LeVerrier: p(λ) = λⁿ + c_{1}λⁿ⁻¹ + … + c_n
        let mut coeffs = vec![1.0];
        let mut m = DMatrix::<f64>::zeros(n, n);
        for k in 1..=n {
            m = &c * &m + DMatrix::identity(n, n) * coeffs[k - 1];
            let ck = -(&c * &m).trace() / k as f64;
            coeffs.push(ck);
        }
        let mut comp = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            comp[(0, j)] = -coeffs[j + 1];
        }
        for i in 1..n {
            comp[(i, i - 1)] = 1.0;
        }
        let oracle = comp.complex_eigenvalues();
        let s = solve_general(&Pencil::new(a, b).unwrap()).unwrap();
        for z in &s.eigenvalues {
            let best = oracle.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-7, "eigenvalue {z} missing from oracle (distance {best})");
        }
    }

    #[test]
    fn clustering() {
        let s = Spectrum::from_real(vec![2.0, 1.0, 1.0 + 1e-9, 3.0, 2.0 + 5e-7, 2.0 + 2.5e-6], 1e-6);
        assert_eq!(s.multiplicities, vec![2, 2, 2, 2, 1, 1]);
        assert_eq!(s.clusters(), vec![0..2, 2..4, 4..5, 5..6]);
    }

    #[test]
    fn gap_examples() {
        let e1 = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let e2 = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        assert!(subspace_gap(&e1, &e1.scale(3.0), None).unwrap() < 1e-15);
        assert!((subspace_gap(&e1, &e2, None).unwrap() - 1.0).abs() < 1e-15);
        let th: f64 = 0.3;
        let v = DMatrix::from_column_slice(2, 1, &[th.cos(), th.sin()]);
        assert!((subspace_gap(&e1, &v, None).unwrap() - th.sin().abs()).abs() < 1e-14);
        let rank1 = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        assert!(subspace_gap(&rank1, &rank1, None).is_err());
    }

    #[test]
    fn gap_in_gram_norm() {
        // with G = diag(1, 4), e1 and e1+e2 make an angle with sin² = 4/5
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0]));
        let e1 = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let w = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        let gap = subspace_gap(&e1, &w, Some(&g)).unwrap();
        assert!((gap - (0.8f64).sqrt()).abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn congruence_invariance(seed in 0u64..1000) {
            let mut rng = StdRng::seed_from_u64(seed);
            let n = 8;
            let a = random_sym(n, &mut rng);
            let b = random_spd(n, &mut rng);
            let p = DMatrix::identity(n, n) + DMatrix::from_fn(n, n, |_, _| 0.3 * (rng.gen::<f64>() - 0.5));
            let s1 = solve_symdef(&Pencil::new(a.clone(), b.clone()).unwrap(), false).unwrap().real_values();
            let a2 = p.transpose() * &a * &p;
            let b2 = p.transpose() * &b * &p;
            let a2 = 0.5 * (&a2 + a2.transpose());
            let b2 = 0.5 * (&b2 + b2.transpose());
            let s2 = solve_symdef(&Pencil::new(a2, b2).unwrap(), false).unwrap().real_values();
            let scale = s1.iter().map(|v| v.abs()).fold(1.0, f64::max);
            for (x, y) in s1.iter().zip(&s2) {
                prop_assert!((x - y).abs() <= 1e-10 * scale, "{} vs {}", x, y);
            }
        }

        #[test]
        fn gap_symmetric_and_basis_independent(seed in 0u64..1000) {
            let mut rng = StdRng::seed_from_u64(seed);
            let n = 7;
            let u = DMatrix::from_fn(n, 3, |_, _| rng.gen::<f64>() - 0.5);
            let v = DMatrix::from_fn(n, 3, |_, _| rng.gen::<f64>() - 0.5);
            let r = DMatrix::identity(3, 3) + DMatrix::from_fn(3, 3, |_, _| 0.4 * (rng.gen::<f64>() - 0.5));
            let g1 = subspace_gap(&u, &v, None).unwrap();
            let g2 = subspace_gap(&v, &u, None).unwrap();
            let g3 = subspace_gap(&(&u * &r), &v, None).unwrap();
            prop_assert!((g1 - g2).abs() <= 1e-12);
            prop_assert!((g1 - g3).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&g1));
        }
    }
}
