//! Sublevel-set measures, the distribution function `h(δ)`, the layer-cake
//! identity and the Nikol'skii-type lemma checker.
//!
//! A continuous function on `[-1, 1]` is sampled on a grid that contains the
//! real zeros and critical points of the polynomial, split into runs on which
//! the samples are monotone, and every level crossing is located inside its
//! grid cell by a safeguarded secant iteration. Measures of `{φ <= level}`
//! are then sums of interval lengths, accurate to about `1e-12` per crossing.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constants::{k_halfdisk, K_SEGMENT};
use crate::error::{Error, Result};
use crate::inequalities::{InequalityId, InequalityReport, Params};
use crate::norms::{NormCache, NormSpec, Weight};
use crate::polycore::{PolyClass, RootPoly};
use crate::quadrature::{integrate, QuadOptions};

/// Slack on the measure bounds.
pub const MEASURE_TOL: f64 = 1e-6;
const CROSSING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub alpha_or_delta: f64,
    pub measure: f64,
    pub bound: f64,
    pub pass: bool,
    /// Number of grid points sampled.
    pub resolution: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LemmaVariant {
    /// Half-disk zeros, `||Q'||_∞ = 1`, `K = 70e`.
    HalfDiskK70e,
    /// Zeros in `[-1, 1]`, `||(1 - x^2) Q'||_∞ = 1`, `K = 2`.
    SegmentK2,
}

impl LemmaVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            LemmaVariant::HalfDiskK70e => "HalfDiskK70e",
            LemmaVariant::SegmentK2 => "SegmentK2",
        }
    }

    pub fn parse(s: &str) -> Option<LemmaVariant> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "halfdiskk70e" | "halfdisk" | "k70e" => Some(LemmaVariant::HalfDiskK70e),
            "segmentk2" | "segment" | "k2" => Some(LemmaVariant::SegmentK2),
            _ => None,
        }
    }

    pub fn k(self) -> f64 {
        match self {
            LemmaVariant::HalfDiskK70e => k_halfdisk(),
            LemmaVariant::SegmentK2 => K_SEGMENT,
        }
    }

    /// The derivative norm fixed to one by the hypothesis.
    pub fn normalizer(self) -> NormSpec {
        match self {
            LemmaVariant::HalfDiskK70e => NormSpec::sup(1, Weight::None),
            LemmaVariant::SegmentK2 => NormSpec::sup(1, Weight::OneMinusX2),
        }
    }
}

impl fmt::Display for LemmaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Initial grid size `10^4 max(1, ceil(n/10))`.
pub fn grid_size(n: usize) -> usize {
    10_000 * n.div_ceil(10).max(1)
}

fn grid(poly: &RootPoly) -> Vec<f64> {
    let m = grid_size(poly.degree());
    let mut xs: Vec<f64> = (0..=m).map(|i| -1.0 + 2.0 * i as f64 / m as f64).collect();
    if let Some(rs) = poly.real_roots() {
        xs.extend_from_slice(rs);
        xs.extend_from_slice(poly.derivative_roots(1).unwrap_or(&[]));
    } else {
        xs.extend(poly.roots().iter().map(|z| z.re));
    }
    xs.retain(|x| (-1.0..=1.0).contains(x));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// A sampled continuous function, split into monotone runs.
pub struct Profile<F> {
    f: F,
    xs: Vec<f64>,
    vs: Vec<f64>,
    /// `(start, end, increasing)`, inclusive indices; consecutive runs share an endpoint.
    runs: Vec<(usize, usize, bool)>,
}

impl<F: Fn(f64) -> f64> Profile<F> {
    /// `f` may return `+inf` (poles); NaN is read as `+inf`.
    pub fn new(f: F, xs: Vec<f64>) -> Profile<F> {
        let clean = |v: f64| if v.is_nan() { f64::INFINITY } else { v };
        let vs: Vec<f64> = xs.iter().map(|&x| clean(f(x))).collect();
        let mut runs = Vec::new();
        let mut s = 0;
        while s + 1 < xs.len() {
            let mut e = s;
            let mut dir: Option<bool> = None;
            while e + 1 < xs.len() {
                let (a, b) = (vs[e], vs[e + 1]);
                let step = if b > a { Some(true) } else if b < a { Some(false) } else { None };
                match (dir, step) {
                    (_, None) => {}
                    (None, Some(d)) => dir = Some(d),
                    (Some(d), Some(t)) if d != t => break,
                    _ => {}
                }
                e += 1;
            }
            runs.push((s, e, dir.unwrap_or(true)));
            s = e;
        }
        Profile { f, xs, vs, runs }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Largest finite sample.
    pub fn max_sample(&self) -> f64 {
        self.vs.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max)
    }

    /// Finite sample values at run endpoints (the sampled local extrema).
    pub fn extremum_values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .runs
            .iter()
            .flat_map(|&(s, e, _)| [self.vs[s], self.vs[e]])
            .filter(|v| v.is_finite())
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// `m{x : f(x) <= level}`.
    pub fn measure_le(&self, level: f64) -> f64 {
        let mut total = 0.0;
        for &(s, e, inc) in &self.runs {
            let vs = &self.vs[s..=e];
            let len = vs.len();
            if inc {
                let k = vs.partition_point(|&v| v <= level);
                if k == len {
                    total += self.xs[e] - self.xs[s];
                } else if k > 0 {
                    total += self.crossing(s + k - 1, level) - self.xs[s];
                }
            } else {
                let k = vs.partition_point(|&v| v > level);
                if k == 0 {
                    total += self.xs[e] - self.xs[s];
                } else if k < len {
                    total += self.xs[e] - self.crossing(s + k - 1, level);
                }
            }
        }
        total
    }

    /// Level crossing inside cell `[xs[i], xs[i+1]]` (Illinois iteration,
    /// bisecting whenever an endpoint value is infinite).
    fn crossing(&self, i: usize, level: f64) -> f64 {
        let g = |x: f64| {
            let v = (self.f)(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v - level
            }
        };
        let (mut a, mut b) = (self.xs[i], self.xs[i + 1]);
        let (mut fa, mut fb) = (self.vs[i] - level, self.vs[i + 1] - level);
        let mut kept = 0i8;
        for _ in 0..200 {
            if b - a <= CROSSING_TOL {
                break;
            }
            let mid = 0.5 * (a + b);
            let c = if fa.is_finite() && fb.is_finite() && fa != fb {
                let c = (a * fb - b * fa) / (fb - fa);
                if c > a && c < b {
                    c
                } else {
                    mid
                }
            } else {
                mid
            };
            let fc = g(c);
            if fc == 0.0 {
                return c;
            }
            if (fc > 0.0) == (fb > 0.0) {
                b = c;
                fb = fc;
                if kept == 1 {
                    fa *= 0.5;
                }
                kept = 1;
            } else {
                a = c;
                fa = fc;
                if kept == -1 {
                    fb *= 0.5;
                }
                kept = -1;
            }
        }
        0.5 * (a + b)
    }
}

/// `(1 - x^2)^[segment] |P'(x)| / (n |P(x)|)`, `+inf` at zeros of P.
pub fn g_value(poly: &RootPoly, weighted: bool, x: f64) -> f64 {
    let l = poly.log_derivative(x);
    if !(l.re.is_finite() && l.im.is_finite()) {
        return f64::INFINITY;
    }
    let w = if weighted { (1.0 - x) * (1.0 + x) } else { 1.0 };
    w * l.norm() / poly.degree() as f64
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::ParamOutOfRange(format!("alpha must be positive and finite, got {alpha}")));
    }
    Ok(())
}

/// Measures of `{g <= α}` for several `α`, sharing one sampled profile.
///
/// `kind` selects the function and bound: `Segment` uses the weighted `g`
/// and `2α`, `HalfDisk` the unweighted `g` and `70e α`.
pub fn sublevel_measures(poly: &RootPoly, kind: PolyClass, alphas: &[f64]) -> Result<Vec<MeasureEstimate>> {
    if kind == PolyClass::Segment && poly.class() != PolyClass::Segment {
        return Err(Error::ClassMismatch {
            id: "sublevel_measure_segment".into(),
            class: poly.class().name(),
        });
    }
    for &a in alphas {
        check_alpha(a)?;
    }
    let weighted = kind == PolyClass::Segment;
    let xs = grid(poly);
    let profile = Profile::new(|x| g_value(poly, weighted, x), xs);
    let k = if weighted { 2.0 } else { k_halfdisk() };
    Ok(alphas
        .iter()
        .map(|&alpha| {
            let measure = profile.measure_le(alpha).clamp(0.0, 2.0);
            let bound = k * alpha;
            MeasureEstimate {
                alpha_or_delta: alpha,
                measure,
                bound,
                pass: measure <= bound + MEASURE_TOL,
                resolution: profile.len(),
            }
        })
        .collect())
}

/// `m{x : (1 - x^2)|P'(x)|/(n|P(x)|) <= α}` against `2α`.
pub fn sublevel_measure_segment(poly: &RootPoly, alpha: f64) -> Result<MeasureEstimate> {
    Ok(sublevel_measures(poly, PolyClass::Segment, &[alpha])?[0])
}

/// `m{x : |P'(x)|/(n|P(x)|) <= α}` against `70e α`.
pub fn sublevel_measure_halfdisk(poly: &RootPoly, alpha: f64) -> Result<MeasureEstimate> {
    Ok(sublevel_measures(poly, PolyClass::HalfDisk, &[alpha])?[0])
}

/// The distribution function `h(δ) = m{x : n|Q(x)| > δ}`, sampled once.
pub struct Distribution<'a> {
    profile: Profile<Box<dyn Fn(f64) -> f64 + 'a>>,
    /// `T = n ||Q||_∞`
    pub t: f64,
}

impl<'a> Distribution<'a> {
    pub fn new(poly: &'a RootPoly, sup: f64) -> Distribution<'a> {
        let nf = poly.degree() as f64;
        let t = nf * sup;
        let f: Box<dyn Fn(f64) -> f64 + 'a> = Box::new(move |x| nf * poly.abs_derivative(x, 0) / t);
        Distribution {
            profile: Profile::new(f, grid(poly)),
            t,
        }
    }

    /// `h(δ)`
    pub fn h(&self, delta: f64) -> f64 {
        self.h_unit(delta / self.t)
    }

    fn h_unit(&self, u: f64) -> f64 {
        (2.0 - self.profile.measure_le(u)).clamp(0.0, 2.0)
    }

    pub fn resolution(&self) -> usize {
        self.profile.len()
    }

    /// `q ∫_0^∞ δ^(q-1) h(δ) dδ`, computed as `T^q q ∫_0^1 u^(q-1) h(Tu) du`.
    pub fn layer_cake_integral(&self, q: f64) -> Result<f64> {
        let top = self.profile.max_sample().max(1.0);
        let mut pts: Vec<f64> = (0..=40).map(|k| top * 0.5f64.powi(k)).collect();
        pts.push(0.0);
        pts.extend(self.profile.extremum_values().into_iter().filter(|&v| v > 0.0 && v < top));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let opts = QuadOptions {
            rel_tol: 1e-9,
            ..QuadOptions::default()
        };
        let r = integrate(|u| if u <= 0.0 { 0.0 } else { q * u.powf(q - 1.0) * self.h_unit(u) }, &pts, opts)?;
        Ok(self.t.powf(q) * r.value)
    }
}

/// Both sides of `∫(n|Q|)^q = q ∫_0^∞ δ^(q-1) h(δ) dδ`, as `(lhs, rhs)`.
pub fn layer_cake_check(poly: &RootPoly, q: f64) -> Result<(f64, f64)> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::ParamOutOfRange(format!("layer cake needs 1 < q < inf, got {q}")));
    }
    let nf = poly.degree() as f64;
    let mut cache = NormCache::new(poly);
    let sup = cache.get(NormSpec::sup(0, Weight::None))?;
    let lq = cache.get(NormSpec::plain(q, 0))?;
    let lhs = (nf * lq).powf(q);
    let rhs = Distribution::new(poly, sup).layer_cake_integral(q)?;
    Ok((lhs, rhs))
}

/// Lemma check `∫|Q|^q <= K (q/(q-1)) ||Q||_∞^(q-1) / n` after normalising
/// `Q = Q_raw / s` so that the variant's derivative norm is one.
pub fn lemma9_check(q_raw: &RootPoly, q: f64, variant: LemmaVariant) -> Result<InequalityReport> {
    lemma9_with_cache(&mut NormCache::new(q_raw), q, variant)
}

pub(crate) fn lemma9_with_cache(cache: &mut NormCache<'_>, q: f64, variant: LemmaVariant) -> Result<InequalityReport> {
    let poly = cache.poly();
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::ParamOutOfRange(format!("LEM-9 needs 1 < q < inf, got q={q}")));
    }
    if variant == LemmaVariant::SegmentK2 && poly.class() != PolyClass::Segment {
        return Err(Error::ClassMismatch {
            id: format!("LEM-9 {variant}"),
            class: poly.class().name(),
        });
    }
    let s = cache.get(variant.normalizer())?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::DegenerateInput(format!("normalising norm is {s}")));
    }
    let nf = poly.degree() as f64;
    let k = variant.k();
    let m = cache.get(NormSpec::sup(0, Weight::None))? / s;
    let integral = (cache.get(NormSpec::plain(q, 0))? / s).powf(q);
    let bound = k * q / (q - 1.0) * m.powf(q - 1.0) / nf;

    let params = Params {
        p: None,
        q: Some(q),
        variant: Some(variant),
    };
    let mut r = InequalityReport::build(InequalityId::Lem9, poly, &params, bound, integral);
    r.variant = Some(variant);
    let t = nf * m;
    r.notes.insert("scale".into(), s);
    r.notes.insert("sup_norm".into(), m);
    r.notes.insert("T".into(), t);
    if t <= 1.0 {
        // ∫|Q|^q <= 2 m^q <= (2/n) m^(q-1)
        r.notes.insert("trivial_branch".into(), 1.0);
        r.notes.insert("trivial_lhs".into(), 2.0 * m.powf(q));
        r.notes.insert("trivial_rhs".into(), 2.0 * m.powf(q - 1.0) / nf);
    } else {
        r.notes.insert("trivial_branch".into(), 0.0);
        r.notes.insert("chain_lhs".into(), nf.powf(q) * integral);
        r.notes.insert("chain_mid".into(), 2.0 + k * q * (t.powf(q - 1.0) - 1.0) / (q - 1.0));
        r.notes.insert("chain_rhs".into(), k * q * t.powf(q - 1.0) / (q - 1.0));
    }
    Ok(r)
}

/// Whether the proof's closing chain (or the trivial branch) holds in `r`.
pub fn lemma9_chain_holds(r: &InequalityReport) -> Option<bool> {
    let get = |k: &str| r.notes.get(k).copied();
    match get("trivial_branch")? {
        b if b == 1.0 => {
            let integral = r.rhs;
            Some(integral <= get("trivial_lhs")? * (1.0 + 1e-8) && get("trivial_lhs")? <= get("trivial_rhs")? * (1.0 + 1e-12))
        }
        _ => {
            let (l, mid, rr) = (get("chain_lhs")?, get("chain_mid")?, get("chain_rhs")?);
            Some(l <= mid * (1.0 + 1e-8) && mid < rr)
        }
    }
}
