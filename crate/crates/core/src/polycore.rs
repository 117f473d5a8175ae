//! Monic root-form polynomials and their evaluation on `[-1, 1]`.
//!
//! A polynomial is never expanded into coefficients. Values and the first two
//! derivatives are accumulated factor by factor with the product rule, which
//! stays accurate for clustered and high-multiplicity zeros such as
//! `(1 - x^2)^n`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::NormSpec;

/// Absolute tolerance within which a root is snapped onto its class.
pub const SNAP_TOL: f64 = 1e-12;

/// Zero-location class of a polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolyClass {
    /// All zeros in the closed segment `[-1, 1]`.
    Segment,
    /// All zeros in the closed upper half-disk `{|z| <= 1, Im z >= 0}`.
    HalfDisk,
}

impl PolyClass {
    pub fn name(self) -> &'static str {
        match self {
            PolyClass::Segment => "segment",
            PolyClass::HalfDisk => "halfdisk",
        }
    }
}

impl fmt::Display for PolyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A monic polynomial `prod (x - z_k)` with validated zeros.
///
/// Roots are stored sorted by `(re, im)`, so two polynomials built from the
/// same multiset are identical regardless of the input order.
#[derive(Debug, Clone)]
pub struct RootPoly {
    roots: Vec<Complex64>,
    /// Real parts when every root is real; selects the real evaluation path.
    real_roots: Option<Vec<f64>>,
    class: PolyClass,
    /// Zeros of P' and P'' (real-rooted case only), computed on first use.
    deriv_roots: [OnceLock<Vec<f64>>; 2],
}

impl PartialEq for RootPoly {
    fn eq(&self, other: &Self) -> bool {
        self.class == other.class && self.roots == other.roots
    }
}

/// Value, first and second derivative at a point, plus `ln |value|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    /// `sum ln|x - z_k|`; `-inf` at a root. Finite where `value` over- or underflows.
    pub log_magnitude: f64,
}

fn cmp_roots(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// `-0.0` becomes `+0.0`, so sorting and digests do not depend on the sign of zero.
#[inline]
fn unsign_zero(x: f64) -> f64 {
    x + 0.0
}

fn snap(index: usize, z: Complex64, class: PolyClass) -> Result<Complex64> {
    let out = || Error::RootOutOfClass {
        index,
        root: z,
        class: class.name(),
    };
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(out());
    }
    match class {
        PolyClass::Segment => {
            if z.im.abs() > SNAP_TOL || z.re.abs() > 1.0 + SNAP_TOL {
                return Err(out());
            }
            Ok(Complex64::new(unsign_zero(z.re.clamp(-1.0, 1.0)), 0.0))
        }
        PolyClass::HalfDisk => {
            let r = z.norm();
            if z.im < -SNAP_TOL || r > 1.0 + SNAP_TOL {
                return Err(out());
            }
            let mut w = Complex64::new(z.re, z.im.max(0.0));
            let rw = w.norm();
            if rw > 1.0 {
                w /= rw;
                // rescaling can leave the modulus one ulp above 1
                if w.norm() > 1.0 {
                    w = Complex64::new(w.re * (1.0 - f64::EPSILON), w.im * (1.0 - f64::EPSILON));
                }
            }
            Ok(Complex64::new(unsign_zero(w.re), unsign_zero(w.im)))
        }
    }
}

/// Build a validated monic polynomial from its zeros.
///
/// Roots within [`SNAP_TOL`] of the class are snapped onto it; anything
/// farther away is rejected.
pub fn make_root_poly(roots: &[Complex64], class: PolyClass) -> Result<RootPoly> {
    if roots.is_empty() {
        return Err(Error::EmptyRoots);
    }
    let mut snapped = roots
        .iter()
        .enumerate()
        .map(|(i, &z)| snap(i, z, class))
        .collect::<Result<Vec<_>>>()?;
    snapped.sort_by(cmp_roots);
    let real_roots = if snapped.iter().all(|z| z.im == 0.0) {
        Some(snapped.iter().map(|z| z.re).collect())
    } else {
        None
    };
    Ok(RootPoly {
        roots: snapped,
        real_roots,
        class,
        deriv_roots: Default::default(),
    })
}

impl RootPoly {
    /// Convenience constructor for real zeros.
    pub fn from_real(roots: &[f64], class: PolyClass) -> Result<RootPoly> {
        let zs: Vec<Complex64> = roots.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        make_root_poly(&zs, class)
    }

    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn class(&self) -> PolyClass {
        self.class
    }

    /// The sorted real zeros, when all zeros are real.
    pub fn real_roots(&self) -> Option<&[f64]> {
        self.real_roots.as_deref()
    }

    /// Same zeros, different class tag (validated again).
    pub fn with_class(&self, class: PolyClass) -> Result<RootPoly> {
        make_root_poly(&self.roots, class)
    }

    /// Canonical textual form of the zero multiset, 17 significant digits.
    pub fn digest(&self) -> String {
        let parts: Vec<String> = self
            .roots
            .iter()
            .map(|z| {
                if z.im == 0.0 {
                    format!("{:.16e}", z.re)
                } else {
                    format!("{:.16e}{:+.16e}i", z.re, z.im)
                }
            })
            .collect();
        format!("[{}]", parts.join(";"))
    }

    /// Full evaluation including `ln |P(x)|`.
    pub fn eval(&self, x: f64) -> EvalResult {
        let [value, d1, d2] = self.derivs(x);
        let log_magnitude = match &self.real_roots {
            Some(rs) => rs.iter().map(|&r| (x - r).abs().ln()).sum(),
            None => self
                .roots
                .iter()
                .map(|&z| (Complex64::new(x - z.re, -z.im)).norm().ln())
                .sum(),
        };
        EvalResult {
            value,
            d1,
            d2,
            log_magnitude,
        }
    }

    /// `[P(x), P'(x), P''(x)]` without the logarithm.
    pub fn derivs(&self, x: f64) -> [Complex64; 3] {
        match &self.real_roots {
            Some(rs) => {
                let (v, d1, d2) = derivs_real(rs, x);
                [v.into(), d1.into(), d2.into()]
            }
            None => derivs_complex(&self.roots, x),
        }
    }

    /// `|P^(order)(x)|` for `order` in `0..=2`.
    pub fn abs_derivative(&self, x: f64, order: u8) -> f64 {
        match (&self.real_roots, order) {
            (Some(rs), 0) => value_real(rs, x).abs(),
            (Some(rs), 1) => derivs_real(rs, x).1.abs(),
            (Some(rs), _) => derivs_real(rs, x).2.abs(),
            (None, 0) => value_complex(&self.roots, x).norm(),
            (None, k) => derivs_complex(&self.roots, x)[k.min(2) as usize].norm(),
        }
    }

    /// Zeros of `P^(order)` (`order` 1 or 2), with multiplicity, when P is real-rooted.
    ///
    /// A real-rooted polynomial has real-rooted derivatives whose zeros
    /// interlace. Between two consecutive distinct zeros the logarithmic
    /// derivative decreases from `+inf` to `-inf`, so each interior critical
    /// point is found by plain bisection on it.
    pub fn derivative_roots(&self, order: u8) -> Option<&[f64]> {
        let rs = self.real_roots.as_deref()?;
        match order {
            0 => Some(rs),
            1 => Some(self.deriv_roots[0].get_or_init(|| critical_points(rs))),
            _ => {
                let d1 = self.derivative_roots(1)?;
                Some(self.deriv_roots[1].get_or_init(|| critical_points(d1)))
            }
        }
    }

    /// Logarithmic derivative `P'(x)/P(x) = sum 1/(x - z_k)`; infinite at a root.
    pub fn log_derivative(&self, x: f64) -> Complex64 {
        match &self.real_roots {
            Some(rs) => {
                let mut s = 0.0;
                for &r in rs {
                    let d = x - r;
                    if d == 0.0 {
                        return Complex64::new(f64::INFINITY, 0.0);
                    }
                    s += 1.0 / d;
                }
                Complex64::new(s, 0.0)
            }
            None => {
                let mut s = Complex64::new(0.0, 0.0);
                for &z in &self.roots {
                    let d = Complex64::new(x - z.re, -z.im);
                    if d.re == 0.0 && d.im == 0.0 {
                        return Complex64::new(f64::INFINITY, 0.0);
                    }
                    s += d.inv();
                }
                s
            }
        }
    }
}

/// Zeros of the derivative of the real-rooted polynomial with sorted zeros `rs`.
fn critical_points(rs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(rs.len().saturating_sub(1));
    let mut i = 0;
    while i < rs.len() {
        let mut j = i + 1;
        while j < rs.len() && rs[j] == rs[i] {
            j += 1;
        }
        // multiplicity m zero of P is an (m-1)-fold zero of P'
        out.extend(std::iter::repeat(rs[i]).take(j - i - 1));
        if j < rs.len() {
            out.push(bisect_log_derivative(rs, rs[i], rs[j]));
        }
        i = j;
    }
    out.sort_by(f64::total_cmp);
    out
}

fn bisect_log_derivative(rs: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s: f64 = rs.iter().map(|&r| 1.0 / (mid - r)).sum();
        if s > 0.0 {
            lo = mid;
        } else if s < 0.0 {
            hi = mid;
        } else {
            return mid;
        }
    }
    0.5 * (lo + hi)
}

// Factors are multiplied in mirrored pairs (first with last, moving inward).
// For a zero multiset symmetric about the origin every pair is (a, -a), and
// the pairwise products are exactly even in x, so P(-x) = ±P(x) bit for bit.

#[inline]
fn value_real(rs: &[f64], x: f64) -> f64 {
    let n = rs.len();
    let mut v = 1.0;
    for i in 0..n / 2 {
        v *= (x - rs[i]) * (x - rs[n - 1 - i]);
    }
    if n % 2 == 1 {
        v *= x - rs[n / 2];
    }
    v
}

#[inline]
fn derivs_real(rs: &[f64], x: f64) -> (f64, f64, f64) {
    let n = rs.len();
    let (mut v, mut d1, mut d2) = (1.0, 0.0, 0.0);
    for i in 0..n / 2 {
        let a = x - rs[i];
        let b = x - rs[n - 1 - i];
        let q = a * b;
        let q1 = a + b;
        d2 = 2.0 * v + 2.0 * q1 * d1 + q * d2;
        d1 = q1 * v + q * d1;
        v *= q;
    }
    if n % 2 == 1 {
        let t = x - rs[n / 2];
        d2 = 2.0 * d1 + t * d2;
        d1 = v + t * d1;
        v *= t;
    }
    (v, d1, d2)
}

#[inline]
fn value_complex(zs: &[Complex64], x: f64) -> Complex64 {
    let n = zs.len();
    let mut v = Complex64::new(1.0, 0.0);
    for i in 0..n / 2 {
        let a = Complex64::new(x - zs[i].re, -zs[i].im);
        let b = Complex64::new(x - zs[n - 1 - i].re, -zs[n - 1 - i].im);
        v *= a * b;
    }
    if n % 2 == 1 {
        v *= Complex64::new(x - zs[n / 2].re, -zs[n / 2].im);
    }
    v
}

#[inline]
fn derivs_complex(zs: &[Complex64], x: f64) -> [Complex64; 3] {
    let n = zs.len();
    let one = Complex64::new(1.0, 0.0);
    let (mut v, mut d1, mut d2) = (one, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for i in 0..n / 2 {
        let a = Complex64::new(x - zs[i].re, -zs[i].im);
        let b = Complex64::new(x - zs[n - 1 - i].re, -zs[n - 1 - i].im);
        let q = a * b;
        let q1 = a + b;
        d2 = v * 2.0 + q1 * d1 * 2.0 + q * d2;
        d1 = q1 * v + q * d1;
        v *= q;
    }
    if n % 2 == 1 {
        let t = Complex64::new(x - zs[n / 2].re, -zs[n / 2].im);
        d2 = d1 * 2.0 + t * d2;
        d1 = v + t * d1;
        v *= t;
    }
    [v, d1, d2]
}

/// Chebyshev–Lobatto points `cos(k pi / (m - 1))`, returned in increasing order.
///
/// Computed through `sin` of a symmetric argument so that the grid is exactly
/// antisymmetric about the origin.
pub fn cheb_points(m: usize) -> Vec<f64> {
    assert!(m >= 2, "need at least two Chebyshev points");
    let d = 2.0 * (m - 1) as f64;
    (0..m)
        .map(|k| {
            let j = 2 * k as i64 - (m as i64 - 1);
            (std::f64::consts::PI * j as f64 / d).sin()
        })
        .collect()
}

/// Sample `|P^(k)(x)| w(x)` (as selected by `spec`) at `m` Chebyshev points.
///
/// `spec.p` only matters for the Tyrygin weight.
pub fn cheb_sample(p: &RootPoly, m: usize, spec: &NormSpec) -> Result<Vec<(f64, f64)>> {
    if m < p.degree() + 1 {
        return Err(Error::ParamOutOfRange(format!(
            "Chebyshev sample needs m >= n + 1 = {}, got {m}",
            p.degree() + 1
        )));
    }
    Ok(cheb_points(m)
        .into_iter()
        .map(|x| (x, spec.pointwise(p, x)))
        .collect())
}
