//! Real-order Bessel functions of the first kind and their zeros.
//!
//! `J_ν(x)` is evaluated by one of three routes depending on `(ν, x)`:
//!
//! * the power series when `x ≤ 12` or `(x/2)² < ν + 1` (no cancellation
//!   beyond a factor ~10⁴ in the first case, none in the second),
//! * the Hankel asymptotic expansion when `x ≥ 40 + ν²`,
//! * Miller's backward recurrence normalized by the Neumann series
//!   `(x/2)^μ = Σ (μ+2i) Γ(μ+i)/i! J_{μ+2i}(x)` everywhere else.
//!
//! Arguments outside `0 ≤ ν ≤ 200`, `0 ≤ x ≤ 10⁴` are rejected.

use crate::{Error, Result};
use std::f64::consts::PI;

pub const MAX_ORDER: f64 = 200.0;
pub const MAX_ARGUMENT: f64 = 1.0e4;
pub const MAX_ZERO_INDEX: usize = 100;

/// Value and derivative of `J_ν` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub order: f64,
    pub x: f64,
    pub value: f64,
    pub derivative: f64,
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos approximation, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection keeps the Lanczos sum in its accurate range
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// `Γ(x)` for `x > 0`.
pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

fn check_domain(nu: f64, x: f64) -> Result<()> {
    if !(0.0..=MAX_ORDER).contains(&nu) || !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::OutOfDomain(format!(
            "J_ν(x) supported for 0 ≤ ν ≤ {MAX_ORDER}, 0 ≤ x ≤ {MAX_ARGUMENT}; got ν = {nu}, x = {x}"
        )));
    }
    Ok(())
}

/// `J_ν(x)` for real `ν ≥ 0`, `x ≥ 0`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    check_domain(nu, x)?;
    Ok(bessel_j_unchecked(nu, x))
}

/// `J_ν(x)` together with `J'_ν(x)`.
pub fn bessel_j_eval(nu: f64, x: f64) -> Result<BesselEval> {
    check_domain(nu, x)?;
    let value = bessel_j_unchecked(nu, x);
    let derivative = if x == 0.0 {
        if nu == 0.0 || nu > 1.0 {
            0.0
        } else if nu == 1.0 {
            0.5
        } else {
            f64::INFINITY
        }
    } else {
        nu / x * value - bessel_j_unchecked(nu + 1.0, x)
    };
    Ok(BesselEval { order: nu, x, value, derivative })
}

/// `J'_ν(x)`.
pub fn bessel_j_derivative(nu: f64, x: f64) -> Result<f64> {
    bessel_j_eval(nu, x).map(|e| e.derivative)
}

pub(crate) fn bessel_j_unchecked(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= 12.0 || 0.25 * x * x < nu + 1.0 {
        series(nu, x)
    } else if x >= 40.0 + nu * nu {
        hankel_asymptotic(nu, x)
    } else {
        miller(nu, x)
    }
}

/// Ascending power series.
pub(crate) fn series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = (nu * half.ln() - ln_gamma(nu + 1.0)).exp();
    let mut sum = term;
    let q = half * half;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -q / (k * (k + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k > half {
            break;
        }
        if term == 0.0 || k > 500.0 {
            break;
        }
    }
    sum
}

/// Hankel's large-argument expansion.
pub(crate) fn hankel_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    let mut k: f64 = 1.0;
    loop {
        term *= (mu - (2.0 * k - 1.0).powi(2)) / (k * 8.0 * x);
        if term.abs() >= prev || term.abs() < 1e-17 {
            break;
        }
        prev = term.abs();
        // terms alternate between Q (odd k) and P (even k) with signs + - - + + - ...
        match (k as u64) % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        k += 1.0;
        if k > 200.0 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Miller's backward recurrence for `J_{μ+n}`, `μ ∈ [0, 1)`.
pub(crate) fn miller(nu: f64, x: f64) -> f64 {
    let n = nu.floor() as usize;
    let mu = nu - n as f64;
    let reach = (n as f64).max(x);
    let mut m = (reach + 20.0 + 12.0 * reach.cbrt()).ceil() as usize;
    m += m % 2;
    let half_m = m / 2;
    // e_i = Γ(μ+i+1) / (Γ(μ+1) i!)
    let mut e = Vec::with_capacity(half_m + 1);
    e.push(1.0);
    for i in 1..=half_m {
        let prev = e[i - 1];
        e.push(prev * (mu + i as f64) / i as f64);
    }
    let weight = |i: usize| -> f64 {
        if i == 0 {
            1.0
        } else {
            let fi = i as f64;
            (mu + 2.0 * fi) / (mu + fi) * e[i]
        }
    };
    let mut f_next = 0.0; // f_{k+1}
    let mut f = 1e-300; // f_k, k = m
    let mut sum = if m % 2 == 0 { weight(half_m) * f } else { 0.0 };
    let mut target = if m == n { f } else { 0.0 };
    for k in (1..=m).rev() {
        let f_prev = 2.0 * (mu + k as f64) / x * f - f_next;
        f_next = f;
        f = f_prev;
        let idx = k - 1;
        if idx % 2 == 0 {
            sum += weight(idx / 2) * f;
        }
        if idx == n {
            target = f;
        }
        if f.abs() > 1e250 {
            f *= 1e-250;
            f_next *= 1e-250;
            sum *= 1e-250;
            target *= 1e-250;
        }
    }
    let norm = (mu * (0.5 * x).ln() - ln_gamma(mu + 1.0)).exp();
    target * norm / sum
}

/// Shared scan-and-bisect driver: `k`-th sign change of `f` beyond `start`.
fn kth_root(f: impl Fn(f64) -> f64, start: f64, k: usize, what: &str) -> Result<f64> {
    const STEP: f64 = 0.5;
    let mut a = start;
    let mut fa = f(a);
    let mut found = 0;
    let limit = start + (k as f64 + 2.0) * PI + start + 50.0;
    while a < limit {
        let b = a + STEP;
        let fb = f(b);
        if fb == 0.0 || fa.signum() != fb.signum() {
            found += 1;
            if found == k {
                return Ok(bisect(&f, a, b, fa));
            }
        }
        a = b;
        fa = fb;
    }
    Err(Error::Quality(format!("failed to bracket zero {k} of {what}")))
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || b - a <= 1e-15 * b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// `k`-th positive zero `j_{ν,k}` of `J_ν`, `k ≥ 1`.
pub fn bessel_j_zero(nu: f64, k: usize) -> Result<f64> {
    check_zero_args(nu, k)?;
    // J_ν > 0 on (0, j_{ν,1}) and j_{ν,1} > ν.
    let start = nu.max(1e-3);
    kth_root(|x| bessel_j_unchecked(nu, x), start, k, &format!("J_{nu}"))
}

/// `k`-th positive zero `j'_{ν,k}` of `J'_ν`, `k ≥ 1` (the trivial zero at
/// the origin for `ν = 0` or `ν > 1` is not counted).
pub fn bessel_jp_zero(nu: f64, k: usize) -> Result<f64> {
    check_zero_args(nu, k)?;
    let start = nu.max(1e-3);
    let deriv = |x: f64| nu / x * bessel_j_unchecked(nu, x) - bessel_j_unchecked(nu + 1.0, x);
    kth_root(deriv, start, k, &format!("J'_{nu}"))
}

/// All positive zeros of `J_ν` below `limit`, ascending.
pub fn bessel_j_zeros_below(nu: f64, limit: f64) -> Result<Vec<f64>> {
    check_domain(nu, limit)?;
    let f = |x: f64| bessel_j_unchecked(nu, x);
    Ok(roots_below(f, nu.max(1e-3), limit))
}

/// All positive zeros of `J'_ν` below `limit`, ascending (the origin is
/// never included).
pub fn bessel_jp_zeros_below(nu: f64, limit: f64) -> Result<Vec<f64>> {
    check_domain(nu, limit)?;
    let f = |x: f64| nu / x * bessel_j_unchecked(nu, x) - bessel_j_unchecked(nu + 1.0, x);
    Ok(roots_below(f, nu.max(1e-3), limit))
}

fn roots_below(f: impl Fn(f64) -> f64, start: f64, limit: f64) -> Vec<f64> {
    const STEP: f64 = 0.5;
    let mut out = Vec::new();
    let mut a = start;
    let mut fa = f(a);
    while a < limit {
        let b = (a + STEP).min(limit);
        let fb = f(b);
        if fb == 0.0 || fa.signum() != fb.signum() {
            let z = bisect(&f, a, b, fa);
            if z < limit {
                out.push(z);
            }
        }
        if b >= limit {
            break;
        }
        a = b;
        fa = fb;
    }
    out
}

fn check_zero_args(nu: f64, k: usize) -> Result<()> {
    if !(0.0..=MAX_ORDER).contains(&nu) || k == 0 || k > MAX_ZERO_INDEX {
        return Err(Error::OutOfDomain(format!(
            "zeros supported for 0 ≤ ν ≤ {MAX_ORDER}, 1 ≤ k ≤ {MAX_ZERO_INDEX}; got ν = {nu}, k = {k}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(2.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn half_order_closed_form() {
        for x in [1.0, 5.0, 20.0, 150.0, 2500.0] {
            let exact = (2.0 / (PI * x)).sqrt() * x.sin();
            let got = bessel_j(0.5, x).unwrap();
            let scale = (2.0 / (PI * x)).sqrt();
            assert!((got - exact).abs() <= 1e-12 * scale, "x={x}: {got} vs {exact}");
        }
        // J_{3/2}(x) = sqrt(2/(πx)) (sin x / x - cos x)
        for x in [0.3, 7.0, 33.0] {
            let exact = (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos());
            assert!((bessel_j(1.5, x).unwrap() - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn gamma_known_values() {
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((ln_gamma(101.0) - 363.739_375_555_563_5).abs() < 1e-10);
        assert!((gamma(1.0 / 3.0) - 2.678_938_534_707_747_6).abs() < 1e-13);
    }

    #[test]
    fn reference_values() {
        // scipy.special.jv
        let cases = [
            (0.0, 1.0, 0.765_197_686_557_966_6),
            (1.0, 1.0, 0.440_050_585_744_933_5),
            (0.0, 10.0, -0.245_935_764_451_348_3),
            (1.0, 10.0, 0.043_472_746_168_861_44),
            (5.0, 10.0, -0.234_061_528_186_793_7),
            (10.0, 10.0, 0.207_486_106_633_358_9),
            (0.0, 50.0, 0.055_812_327_669_251_6),
            (2.0, 30.0, 0.078_451_246_073_265_38),
        ];
        for (nu, x, want) in cases {
            let got = bessel_j(nu, x).unwrap();
            assert!((got - want).abs() < 1e-13, "J_{nu}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn routes_agree_in_overlap_bands() {
        // series vs recurrence just past the series cutoff
        for &nu in &[0.0, 2.0 / 3.0, 1.0, 4.0 / 3.0, 7.5] {
            for &x in &[6.0, 9.0, 10.5, 12.0] {
                let s = series(nu, x);
                let m = miller(nu, x);
                assert!((s - m).abs() < 5e-13, "ν={nu} x={x}: series {s} miller {m}");
            }
        }
        // recurrence vs Hankel expansion
        for &nu in &[0.0, 0.5, 2.0 / 3.0, 3.0] {
            for &x in &[60.0, 120.0, 700.0] {
                let h = hankel_asymptotic(nu, x);
                let m = miller(nu, x);
                assert!((h - m).abs() < 1e-13, "ν={nu} x={x}: hankel {h} miller {m}");
            }
        }
    }

    #[test]
    fn large_order_near_turning_point() {
        // J_100(100) = 0.09636667329586155 (DLMF tables)
        let got = bessel_j(100.0, 100.0).unwrap();
        assert!((got - 0.096_366_673_295_861_55).abs() < 1e-13, "{got}");
    }

    #[test]
    fn out_of_domain_rejected() {
        assert!(matches!(bessel_j(201.0, 1.0), Err(Error::OutOfDomain(_))));
        assert!(matches!(bessel_j(1.0, 1.0e5), Err(Error::OutOfDomain(_))));
        assert!(matches!(bessel_j(-0.5, 1.0), Err(Error::OutOfDomain(_))));
        assert!(bessel_j_zero(1.0, 0).is_err());
        assert!(bessel_j_zero(1.0, 101).is_err());
    }

    /// Independent bisection on the series alone.
    fn series_zero(nu: f64, lo: f64, hi: f64) -> f64 {
        let (mut a, mut b) = (lo, hi);
        let fa0 = series(nu, a);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if series(nu, m).signum() == fa0.signum() {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn first_zeros() {
        let j11 = bessel_j_zero(1.0, 1).unwrap();
        assert!((j11 - series_zero(1.0, 3.0, 4.5)).abs() < 1e-11);
        assert!((j11 - 3.831_705_970_207_512).abs() < 1e-11);
        let j01 = bessel_j_zero(0.0, 1).unwrap();
        assert!((j01 - series_zero(0.0, 2.0, 3.0)).abs() < 1e-11);
        assert!((j01 - 2.404_825_557_695_773).abs() < 1e-11);
        assert!((j01 * j01 - 5.783_185_962_946_784).abs() < 1e-10);
        // j_{0,10} and j'_{1,1}
        assert!((bessel_j_zero(0.0, 10).unwrap() - 30.634_606_468_431_975).abs() < 1e-10);
        assert!((bessel_jp_zero(1.0, 1).unwrap() - 1.841_183_781_340_659_3).abs() < 1e-11);
        assert!((bessel_jp_zero(0.0, 1).unwrap() - j11).abs() < 1e-11);
        assert!((bessel_j_zero(150.0, 100).unwrap() - 527.520_086_975_927).abs() < 1e-9);
    }

    #[test]
    fn zeros_increase_and_vanish() {
        for &nu in &[0.0, 2.0 / 3.0, 2.0, 12.5, 150.0] {
            let mut last = 0.0;
            for k in [1, 2, 3, 10, 40, 100] {
                let z = bessel_j_zero(nu, k).unwrap();
                assert!(z > last);
                last = z;
                assert!(bessel_j(nu, z).unwrap().abs() <= 1e-10, "ν={nu} k={k}");
            }
        }
    }

    #[test]
    fn zeros_below_agree_with_indexed_zeros() {
        for nu in [0.0, 1.0, 2.0 / 3.0, 7.0] {
            let zs = bessel_j_zeros_below(nu, 60.0).unwrap();
            for (k, z) in zs.iter().enumerate() {
                assert!((z - bessel_j_zero(nu, k + 1).unwrap()).abs() < 1e-12);
            }
            assert!(bessel_j_zero(nu, zs.len() + 1).unwrap() >= 60.0);
            let zp = bessel_jp_zeros_below(nu, 60.0).unwrap();
            for (k, z) in zp.iter().enumerate() {
                assert!((z - bessel_jp_zero(nu, k + 1).unwrap()).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn recurrence_consistency(nu in 1.0f64..150.0, x in 0.5f64..2000.0) {
            let a = bessel_j(nu - 1.0, x).unwrap();
            let b = bessel_j(nu, x).unwrap();
            let c = bessel_j(nu + 1.0, x).unwrap();
            let scale = a.abs().max(c.abs()).max(b.abs()).max(1e-300);
            prop_assert!((a + c - 2.0 * nu / x * b).abs() <= 1e-10 * scale * (1.0 + 2.0 * nu / x),
                "ν={} x={} residual {}", nu, x, a + c - 2.0 * nu / x * b);
        }

        #[test]
        fn derivative_matches_finite_difference(nu in 0.0f64..60.0, x in 0.5f64..200.0) {
            let h = 1e-5;
            let fd = (bessel_j(nu, x + h).unwrap() - bessel_j(nu, x - h).unwrap()) / (2.0 * h);
            let d = bessel_j_derivative(nu, x).unwrap();
            prop_assert!((fd - d).abs() <= 1e-6, "ν={} x={} fd={} d={}", nu, x, fd, d);
        }

        #[test]
        fn bounded_by_one(nu in 0.0f64..200.0, x in 0.0f64..10000.0) {
            prop_assert!(bessel_j(nu, x).unwrap().abs() <= 1.0);
        }
    }
}
