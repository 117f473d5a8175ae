//! Weighted `L_p[-1,1]` and sup norms of a polynomial or its derivatives.
//!
//! Finite `p` goes through adaptive Gauss–Kronrod quadrature with the
//! interval pre-split wherever `|f|^p` can have a kink: at the real parts of
//! the zeros of P and, for real-rooted P, at the zeros of the differentiated
//! polynomial. `p = inf` is a dense Chebyshev scan followed by golden-section
//! refinement of every competitive local maximum.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::{cheb_points, RootPoly};
use crate::quadrature::{integrate, QuadOptions};

/// Weight multiplying the (differentiated) polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Weight {
    None,
    /// `sqrt(1 - x^2)`
    SqrtOneMinusX2,
    /// `1 - x^2`
    OneMinusX2,
    /// `(1 - x^2)^((p - 1) / (2p))`, tied to the norm exponent.
    Tyrygin,
}

impl Weight {
    #[inline]
    pub fn value(self, x: f64, p: f64) -> f64 {
        let s = ((1.0 - x) * (1.0 + x)).max(0.0);
        match self {
            Weight::None => 1.0,
            Weight::SqrtOneMinusX2 => s.sqrt(),
            Weight::OneMinusX2 => s,
            Weight::Tyrygin => {
                if p == 1.0 {
                    1.0
                } else {
                    s.powf((p - 1.0) / (2.0 * p))
                }
            }
        }
    }
}

/// Which norm to take: exponent, weight and derivative order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    /// In `(0, inf]`; `f64::INFINITY` selects the sup norm.
    pub p: f64,
    pub weight: Weight,
    pub deriv: u8,
}

impl NormSpec {
    pub fn new(p: f64, weight: Weight, deriv: u8) -> NormSpec {
        NormSpec { p, weight, deriv }
    }

    /// Unweighted `||P^(deriv)||_p`.
    pub fn plain(p: f64, deriv: u8) -> NormSpec {
        NormSpec::new(p, Weight::None, deriv)
    }

    pub fn sup(deriv: u8, weight: Weight) -> NormSpec {
        NormSpec::new(f64::INFINITY, weight, deriv)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0) {
            return Err(Error::ParamOutOfRange(format!("norm exponent must be > 0, got {}", self.p)));
        }
        if self.deriv > 2 {
            return Err(Error::ParamOutOfRange(format!(
                "derivative order must be 0, 1 or 2, got {}",
                self.deriv
            )));
        }
        if self.weight == Weight::Tyrygin && !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::ParamOutOfRange(format!(
                "Tyrygin weight needs finite p >= 1, got {}",
                self.p
            )));
        }
        Ok(())
    }

    /// `|P^(deriv)(x)| * w(x)`.
    #[inline]
    pub fn pointwise(&self, poly: &RootPoly, x: f64) -> f64 {
        let w = self.weight.value(x, self.p);
        if w == 0.0 {
            return 0.0;
        }
        poly.abs_derivative(x, self.deriv) * w
    }
}

/// A computed norm with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    pub abs_error_estimate: f64,
    /// Quadrature panels, or refined candidates for the sup norm.
    pub panels_used: usize,
}

fn breakpoints(poly: &RootPoly, deriv: u8) -> Vec<f64> {
    let mut pts = vec![-1.0, 1.0];
    pts.extend(poly.roots().iter().map(|z| z.re).filter(|&r| r > -1.0 && r < 1.0));
    if deriv > 0 {
        if let Some(cs) = poly.derivative_roots(deriv) {
            pts.extend(cs.iter().copied().filter(|&r| r > -1.0 && r < 1.0));
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `(int_{-1}^{1} |P^(k)(x) w(x)|^p dx)^(1/p)` for finite `p`.
pub fn lp_norm(poly: &RootPoly, spec: &NormSpec) -> Result<NormValue> {
    spec.validate()?;
    if !spec.p.is_finite() {
        return Err(Error::ParamOutOfRange("lp_norm needs finite p".into()));
    }
    let (integral, err, panels, scale) = lp_integral_scaled(poly, spec)?;
    if integral == 0.0 {
        return Ok(NormValue {
            value: 0.0,
            abs_error_estimate: 0.0,
            panels_used: panels,
        });
    }
    let value = scale * integral.powf(1.0 / spec.p);
    Ok(NormValue {
        value,
        abs_error_estimate: value * (err / integral) / spec.p,
        panels_used: panels,
    })
}

/// `int |f|^p`, without the `1/p` root.
pub fn lp_integral(poly: &RootPoly, spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    let (integral, _, _, scale) = lp_integral_scaled(poly, spec)?;
    Ok(integral * scale.powf(spec.p))
}

/// Returns `(I, err, panels, S)` with `int |f|^p = S^p * I`; `S` keeps the
/// integrand of order one so large degrees or exponents do not overflow.
fn lp_integral_scaled(poly: &RootPoly, spec: &NormSpec) -> Result<(f64, f64, usize, f64)> {
    let p = spec.p;
    let mut scale = cheb_points(33)
        .into_iter()
        .map(|x| spec.pointwise(poly, x))
        .fold(0.0, f64::max);
    if !(scale > 0.0 && scale.is_finite()) {
        scale = 1.0;
    }
    let inv = 1.0 / scale;
    let f = |x: f64| {
        let v = spec.pointwise(poly, x) * inv;
        if p == 1.0 {
            v
        } else if p == 2.0 {
            v * v
        } else {
            v.powf(p)
        }
    };
    let r = integrate(f, &breakpoints(poly, spec.deriv), QuadOptions::default())?;
    Ok((r.value, r.abs_error, r.panels, scale))
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const X_TOL: f64 = 1e-13;

/// Maximise `f` on `[lo, hi]`; returns `(x, f(x), spread)` where `spread`
/// bounds the variation of `f` over the final bracket.
fn golden_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> (f64, f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > X_TOL {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        }
    }
    let (x, v) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    (x, v, (f1 - f2).abs())
}

/// `max_{[-1,1]} |P^(k)(x)| w(x)`.
pub fn sup_norm(poly: &RootPoly, spec: &NormSpec) -> Result<NormValue> {
    spec.validate()?;
    if spec.p.is_finite() {
        return Err(Error::ParamOutOfRange("sup_norm needs p = inf".into()));
    }
    let m = (16 * poly.degree()).max(64);
    let xs = cheb_points(m);
    let f = |x: f64| spec.pointwise(poly, x);
    let vs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = vs.iter().copied().fold(0.0, f64::max);
    let cutoff = 0.5 * best;
    let mut spread = 0.0;
    let mut refined = 0;
    for i in 1..m - 1 {
        if vs[i] >= vs[i - 1] && vs[i] >= vs[i + 1] && vs[i] >= cutoff && vs[i] > 0.0 {
            let (_, v, s) = golden_max(&f, xs[i - 1], xs[i + 1]);
            refined += 1;
            if v > best {
                best = v;
                spread = s;
            }
        }
    }
    Ok(NormValue {
        value: best,
        abs_error_estimate: spread + 4.0 * f64::EPSILON * best,
        panels_used: refined,
    })
}

/// Dispatch on `spec.p`.
pub fn norm(poly: &RootPoly, spec: &NormSpec) -> Result<NormValue> {
    if spec.p.is_finite() {
        lp_norm(poly, spec)
    } else {
        sup_norm(poly, spec)
    }
}

/// Memoised norms of one polynomial, shared by the checkers of a sweep.
#[derive(Debug)]
pub struct NormCache<'a> {
    poly: &'a RootPoly,
    values: HashMap<(u64, Weight, u8), f64>,
}

impl<'a> NormCache<'a> {
    pub fn new(poly: &'a RootPoly) -> Self {
        NormCache {
            poly,
            values: HashMap::new(),
        }
    }

    pub fn poly(&self) -> &'a RootPoly {
        self.poly
    }

    pub fn get(&mut self, spec: NormSpec) -> Result<f64> {
        let key = (spec.p.to_bits(), spec.weight, spec.deriv);
        if let Some(&v) = self.values.get(&key) {
            return Ok(v);
        }
        let v = norm(self.poly, &spec)?.value;
        self.values.insert(key, v);
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::PolyClass;

    fn seg(rs: &[f64]) -> RootPoly {
        RootPoly::from_real(rs, PolyClass::Segment).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn lp_examples() {
        let q1 = seg(&[-1.0, 1.0]);
        let v = lp_norm(&q1, &NormSpec::plain(1.0, 0)).unwrap();
        assert!(rel(v.value, 4.0 / 3.0) < 1e-13);
        assert!(v.abs_error_estimate <= 1e-10 * v.value.max(1.0));
        let v = lp_norm(&q1, &NormSpec::plain(1.0, 1)).unwrap();
        assert!(rel(v.value, 2.0) < 1e-13);

        let x = seg(&[0.0]);
        let v = lp_norm(&x, &NormSpec::plain(2.0, 0)).unwrap();
        assert!(rel(v.value, (2.0f64 / 3.0).sqrt()) < 1e-13);
    }

    #[test]
    fn sup_examples() {
        let q3 = seg(&[-1.0, -1.0, -1.0, 1.0, 1.0, 1.0]);
        let v = sup_norm(&q3, &NormSpec::sup(0, Weight::None)).unwrap();
        assert!(rel(v.value, 1.0) < 1e-14);

        let q1 = seg(&[-1.0, 1.0]);
        assert!(rel(sup_norm(&q1, &NormSpec::sup(1, Weight::None)).unwrap().value, 2.0) < 1e-15);
        let v = norm(&q1, &NormSpec::sup(1, Weight::OneMinusX2)).unwrap();
        assert!(rel(v.value, 4.0 / (3.0 * 3f64.sqrt())) < 1e-13);

        let x = seg(&[0.0]);
        assert_eq!(norm(&x, &NormSpec::sup(0, Weight::None)).unwrap().value, 1.0);
        assert!(rel(norm(&x, &NormSpec::plain(1.0, 0)).unwrap().value, 1.0) < 1e-14);
    }

    #[test]
    fn sup_equality_case_of_weighted_derivative() {
        // max of n (1+x)^(n-1/2) (1-x)^(1/2) sits at x = (n-1)/n
        for n in [1usize, 2, 5, 12] {
            let p = seg(&vec![-1.0; n]);
            let v = sup_norm(&p, &NormSpec::sup(1, Weight::SqrtOneMinusX2)).unwrap().value;
            let nf = n as f64;
            let exact = nf.sqrt() * (2.0 - 1.0 / nf).powf(nf - 0.5);
            assert!(rel(v, exact) < 1e-13, "n={n}: {v} vs {exact}");
        }
    }

    #[test]
    fn spec_validation() {
        let x = seg(&[0.0]);
        assert!(lp_norm(&x, &NormSpec::plain(0.0, 0)).is_err());
        assert!(lp_norm(&x, &NormSpec::new(0.5, Weight::Tyrygin, 1)).is_err());
        assert!(lp_norm(&x, &NormSpec::plain(f64::INFINITY, 0)).is_err());
        assert!(sup_norm(&x, &NormSpec::plain(2.0, 0)).is_err());
        assert!(norm(&x, &NormSpec::plain(1.0, 3)).is_err());
    }

    #[test]
    fn tyrygin_weight_limits() {
        assert_eq!(Weight::Tyrygin.value(0.3, 1.0), 1.0);
        let w = Weight::Tyrygin.value(0.6, 2.0);
        assert!((w - 0.64f64.powf(0.25)).abs() < 1e-15);
        assert_eq!(Weight::OneMinusX2.value(1.0, 1.0), 0.0);
    }

    #[test]
    fn cache_reuses_values() {
        let p = seg(&[-0.5, 0.1, 0.7]);
        let mut cache = NormCache::new(&p);
        let a = cache.get(NormSpec::plain(2.0, 1)).unwrap();
        let b = cache.get(NormSpec::plain(2.0, 1)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, lp_norm(&p, &NormSpec::plain(2.0, 1)).unwrap().value);
    }
}
