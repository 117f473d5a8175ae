//! One checker per inequality: left side, right side, ratio and verdict.
//!
//! Every inequality is written as `lhs >= rhs` (or `>`), so `ratio = lhs/rhs`
//! and a verdict passes when `ratio >= 1 - tol`. Strictness cannot be
//! certified in floating point; it is recorded but the test is the same.

use std::collections::BTreeMap;
use std::f64::consts::E;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{a_halfdisk, a_inf, a_p, bp2, c_pq, c_q, inv};
use crate::error::{Error, Result};
use crate::families::{generate, FamilyKind, FamilySpec};
use crate::measure::{lemma9_with_cache, LemmaVariant};
use crate::norms::{NormCache, NormSpec, Weight};
use crate::polycore::{PolyClass, RootPoly};

/// Pass/fail slack applied to every ratio.
pub const RATIO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InequalityId {
    #[serde(rename = "INEQ-1")]
    Ineq1,
    #[serde(rename = "INEQ-2")]
    Ineq2,
    #[serde(rename = "INEQ-3")]
    Ineq3,
    #[serde(rename = "INEQ-4")]
    Ineq4,
    #[serde(rename = "INEQ-5")]
    Ineq5,
    #[serde(rename = "INEQ-6")]
    Ineq6,
    #[serde(rename = "INEQ-7")]
    Ineq7,
    #[serde(rename = "INEQ-8")]
    Ineq8,
    #[serde(rename = "INEQ-C1")]
    IneqC1,
    #[serde(rename = "INEQ-C2")]
    IneqC2,
    #[serde(rename = "INEQ-BP2")]
    IneqBp2,
    #[serde(rename = "INEQ-10")]
    Ineq10,
    #[serde(rename = "INEQ-R1")]
    IneqR1,
    #[serde(rename = "INEQ-QT")]
    IneqQt,
    #[serde(rename = "LEM-9")]
    Lem9,
}

use InequalityId::*;

impl InequalityId {
    pub const ALL: [InequalityId; 15] = [
        Ineq1, Ineq2, Ineq3, Ineq4, Ineq5, Ineq6, Ineq7, Ineq8, IneqC1, IneqC2, IneqBp2, Ineq10, IneqR1, IneqQt,
        Lem9,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Ineq1 => "INEQ-1",
            Ineq2 => "INEQ-2",
            Ineq3 => "INEQ-3",
            Ineq4 => "INEQ-4",
            Ineq5 => "INEQ-5",
            Ineq6 => "INEQ-6",
            Ineq7 => "INEQ-7",
            Ineq8 => "INEQ-8",
            IneqC1 => "INEQ-C1",
            IneqC2 => "INEQ-C2",
            IneqBp2 => "INEQ-BP2",
            Ineq10 => "INEQ-10",
            IneqR1 => "INEQ-R1",
            IneqQt => "INEQ-QT",
            Lem9 => "LEM-9",
        }
    }

    pub fn parse(s: &str) -> Option<InequalityId> {
        let s = s.trim().to_ascii_uppercase();
        Self::ALL.into_iter().find(|id| id.as_str() == s)
    }

    /// Strict (`>`) statements.
    pub fn strict(self) -> bool {
        matches!(self, Ineq1 | Ineq2 | Ineq3 | Ineq4 | Ineq7 | IneqC1 | IneqR1)
    }

    /// Existential-constant statements that report a statistic, not a verdict.
    pub fn is_statistic(self) -> bool {
        matches!(self, Ineq3 | Ineq4)
    }

    pub fn uses_p(self) -> bool {
        matches!(self, Ineq3 | Ineq4 | Ineq6 | IneqC2 | IneqQt)
    }

    pub fn uses_q(self) -> bool {
        matches!(self, Ineq4 | Ineq7 | Ineq8 | IneqC1 | IneqC2 | Ineq10 | IneqQt | Lem9)
    }

    /// Whether polynomials of `class` are admissible. Segment polynomials are
    /// also half-disk polynomials.
    pub fn accepts(self, class: PolyClass) -> bool {
        match self {
            Ineq1 | Ineq7 | IneqR1 | Lem9 => true,
            _ => class == PolyClass::Segment,
        }
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exponents for a check; `f64::INFINITY` stands for `∞`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub p: Option<f64>,
    pub q: Option<f64>,
    /// LEM-9 only; defaults from the polynomial's class.
    pub variant: Option<LemmaVariant>,
}

impl Params {
    pub fn new(p: Option<f64>, q: Option<f64>) -> Params {
        Params { p, q, variant: None }
    }

    pub fn p(p: f64) -> Params {
        Params::new(Some(p), None)
    }

    pub fn q(q: f64) -> Params {
        Params::new(None, Some(q))
    }

    pub fn pq(p: f64, q: f64) -> Params {
        Params::new(Some(p), Some(q))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub inequality_id: InequalityId,
    pub n: usize,
    #[serde(with = "crate::serde_float::option")]
    pub p: Option<f64>,
    #[serde(with = "crate::serde_float::option")]
    pub q: Option<f64>,
    #[serde(with = "crate::serde_float")]
    pub lhs: f64,
    #[serde(with = "crate::serde_float")]
    pub rhs: f64,
    #[serde(with = "crate::serde_float")]
    pub ratio: f64,
    pub strict: bool,
    /// `None` for the statistic-only ids.
    pub pass: Option<bool>,
    pub tol: f64,
    pub class: PolyClass,
    pub variant: Option<LemmaVariant>,
    pub seed: Option<u64>,
    pub poly_digest: String,
    /// Auxiliary quantities (e.g. the lemma's intermediate bounds).
    pub notes: BTreeMap<String, f64>,
}

impl InequalityReport {
    pub(crate) fn build(
        id: InequalityId,
        poly: &RootPoly,
        params: &Params,
        lhs: f64,
        rhs: f64,
    ) -> InequalityReport {
        let ratio = lhs / rhs;
        let pass = if id.is_statistic() {
            None
        } else if id.strict() {
            Some(ratio > 1.0 - RATIO_TOL)
        } else {
            Some(ratio >= 1.0 - RATIO_TOL)
        };
        InequalityReport {
            inequality_id: id,
            n: poly.degree(),
            p: if id.uses_p() { params.p } else { None },
            q: if id.uses_q() { params.q } else { None },
            lhs,
            rhs,
            ratio,
            strict: id.strict(),
            pass,
            tol: RATIO_TOL,
            class: poly.class(),
            variant: None,
            seed: None,
            poly_digest: poly.digest(),
            notes: BTreeMap::new(),
        }
    }

    /// Failed verdict (statistics never fail).
    pub fn violated(&self) -> bool {
        self.pass == Some(false)
    }
}

fn need(id: InequalityId, v: Option<f64>, name: &str) -> Result<f64> {
    let v = v.ok_or_else(|| Error::ParamOutOfRange(format!("{id} needs {name}")))?;
    if v.is_nan() {
        return Err(Error::ParamOutOfRange(format!("{id}: {name} is NaN")));
    }
    Ok(v)
}

fn range_err(id: InequalityId, what: impl fmt::Display) -> Error {
    Error::ParamOutOfRange(format!("{id}: {what}"))
}

fn q_gt_one(id: InequalityId, params: &Params) -> Result<f64> {
    let q = need(id, params.q, "q")?;
    if !(q > 1.0) {
        return Err(range_err(id, format!("needs 1 < q <= inf, got q={q}")));
    }
    Ok(q)
}

fn p_at_least_one(id: InequalityId, params: &Params, allow_inf: bool) -> Result<f64> {
    let p = need(id, params.p, "p")?;
    if !(p >= 1.0) || (!allow_inf && p.is_infinite()) {
        let upper = if allow_inf { "inf" } else { "finite" };
        return Err(range_err(id, format!("needs 1 <= p ({upper}), got p={p}")));
    }
    Ok(p)
}

/// Weighted second-derivative norm of the second-derivative corollary:
/// `(1-x^2)^((p-1)/(2p))` for finite `p`, `sqrt(1-x^2)` in the limit.
fn tyrygin_spec(p: f64, deriv: u8) -> NormSpec {
    if p.is_infinite() {
        NormSpec::sup(deriv, Weight::SqrtOneMinusX2)
    } else {
        NormSpec::new(p, Weight::Tyrygin, deriv)
    }
}

/// Check one inequality for one polynomial.
pub fn check(id: InequalityId, poly: &RootPoly, params: Params) -> Result<InequalityReport> {
    check_with_cache(id, &mut NormCache::new(poly), params)
}

/// [`check`] reusing norms already computed for the same polynomial.
pub fn check_with_cache(id: InequalityId, cache: &mut NormCache<'_>, params: Params) -> Result<InequalityReport> {
    let poly = cache.poly();
    if !id.accepts(poly.class()) {
        return Err(Error::ClassMismatch {
            id: id.to_string(),
            class: poly.class().name(),
        });
    }
    let n = poly.degree();
    let nf = n as f64;
    let sqrt_n = nf.sqrt();
    let sup = |c: &mut NormCache<'_>, deriv: u8, w: Weight| c.get(NormSpec::sup(deriv, w));
    let lp = |c: &mut NormCache<'_>, p: f64, deriv: u8| c.get(NormSpec::plain(p, deriv));

    let (lhs, rhs) = match id {
        Ineq1 => (
            sup(cache, 1, Weight::None)?,
            a_halfdisk() * sqrt_n * sup(cache, 0, Weight::None)?,
        ),
        Ineq2 => (sup(cache, 1, Weight::None)?, sqrt_n / 6.0 * sup(cache, 0, Weight::None)?),
        Ineq3 => {
            let p = need(id, params.p, "p")?;
            if !(p > 0.0 && p.is_finite()) {
                return Err(range_err(id, format!("needs 0 < p < inf, got p={p}")));
            }
            (lp(cache, p, 1)?, sqrt_n * lp(cache, p, 0)?)
        }
        Ineq4 => {
            let p = need(id, params.p, "p")?;
            let q = need(id, params.q, "q")?;
            let expo = 1.0 - inv(p) + inv(q);
            if !(p > 0.0 && p <= q) {
                return Err(range_err(id, format!("needs 0 < p <= q <= inf, got p={p}, q={q}")));
            }
            if expo < 0.0 {
                return Err(range_err(id, format!("needs 1 - 1/p + 1/q >= 0, got {expo}")));
            }
            let num = cache.get(NormSpec::plain(p, 1))?;
            let den = cache.get(NormSpec::plain(q, 0))?;
            (num, sqrt_n.powf(expo) * den)
        }
        Ineq5 => (
            sup(cache, 1, Weight::SqrtOneMinusX2)?,
            a_inf(n)? * sup(cache, 0, Weight::None)?,
        ),
        Ineq6 => {
            let p = p_at_least_one(id, &params, false)?;
            (
                cache.get(NormSpec::new(p, Weight::Tyrygin, 1))?,
                a_p(p, n)? * sup(cache, 0, Weight::None)?,
            )
        }
        Ineq7 => {
            let q = q_gt_one(id, &params)?;
            if q.is_infinite() {
                // reduces to the q = inf statement verbatim
                let base = check_with_cache(Ineq1, cache, params)?;
                (base.lhs, base.rhs)
            } else {
                let iq = 1.0 / q;
                let c = (6.0 * (1.0 - iq)).powf(iq) * (a_halfdisk() * sqrt_n).powf(1.0 + iq);
                (sup(cache, 1, Weight::None)?, c * cache.get(NormSpec::plain(q, 0))?)
            }
        }
        Ineq8 => {
            let q = q_gt_one(id, &params)?;
            if q.is_infinite() {
                let base = check_with_cache(Ineq5, cache, params)?;
                (base.lhs, base.rhs)
            } else {
                let iq = 1.0 / q;
                let l = sup(cache, 1, Weight::SqrtOneMinusX2)?.powf(1.0 - iq)
                    * sup(cache, 1, Weight::OneMinusX2)?.powf(iq);
                let c = c_q(q)? * nf.powf(iq) * a_inf(n)?.powf(1.0 - iq);
                (l, c * cache.get(NormSpec::plain(q, 0))?)
            }
        }
        IneqC1 => {
            let q = q_gt_one(id, &params)?;
            let iq = inv(q);
            let c = c_q(q)? * (2.0 * E).sqrt().powf(-1.0 + iq) * sqrt_n.powf(1.0 + iq);
            (sup(cache, 1, Weight::SqrtOneMinusX2)?, c * cache.get(NormSpec::plain(q, 0))?)
        }
        IneqC2 => {
            if n < 2 {
                return Err(range_err(id, "needs n >= 2"));
            }
            let p = p_at_least_one(id, &params, true)?;
            let q = q_gt_one(id, &params)?;
            (cache.get(tyrygin_spec(p, 2))?, c_pq(p, q, n)? * cache.get(NormSpec::plain(q, 0))?)
        }
        IneqBp2 => {
            if n < 2 {
                return Err(range_err(id, "needs n >= 2"));
            }
            (sup(cache, 2, Weight::None)?, bp2(n)? * sup(cache, 0, Weight::None)?)
        }
        Ineq10 => {
            let q = q_gt_one(id, &params)?;
            if q.is_infinite() {
                return Err(range_err(id, "needs finite q"));
            }
            let pmax = sup(cache, 0, Weight::None)?;
            let l = sup(cache, 1, Weight::OneMinusX2)? * pmax.powf(q - 1.0);
            let r = nf / 2.0 * (1.0 - 1.0 / q) * cache.get(NormSpec::plain(q, 0))?.powf(q);
            (l, r)
        }
        IneqR1 => {
            let c = nf / (30.0 * E * (9.0 + nf.ln()));
            (sup(cache, 1, Weight::None)?, c * cache.get(NormSpec::plain(1.0, 0))?)
        }
        IneqQt => {
            let p = p_at_least_one(id, &params, true)?;
            let q = q_gt_one(id, &params)?;
            let iq = inv(q);
            let l = sup(cache, 1, Weight::None)?.powf(iq) * cache.get(NormSpec::plain(p, 1))?.powf(1.0 - iq);
            let c = c_q(q)? * nf.powf(iq) * a_p(p, n)?.powf(1.0 - iq);
            (l, c * cache.get(NormSpec::plain(q, 0))?)
        }
        Lem9 => {
            let q = need(id, params.q, "q")?;
            let variant = params.variant.unwrap_or(match poly.class() {
                PolyClass::Segment => LemmaVariant::SegmentK2,
                PolyClass::HalfDisk => LemmaVariant::HalfDiskK70e,
            });
            return lemma9_with_cache(cache, q, variant);
        }
    };
    Ok(InequalityReport::build(id, poly, &params, lhs, rhs))
}

/// Parameter grid for a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub ids: Vec<InequalityId>,
    pub family: FamilyKind,
    /// Inclusive range of the family's `n`.
    pub n_range: (usize, usize),
    pub p_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
    /// Polynomials per `n` (random families only; fixed families use one).
    pub trials: usize,
    pub seed: u64,
}

/// A cell that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub inequality_id: InequalityId,
    pub n: usize,
    #[serde(with = "crate::serde_float::option")]
    pub p: Option<f64>,
    #[serde(with = "crate::serde_float::option")]
    pub q: Option<f64>,
    pub variant: Option<LemmaVariant>,
    pub seed: Option<u64>,
    pub error: String,
    pub numerical: bool,
}

/// Ratio statistics of one `(id, n, p, q)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub inequality_id: InequalityId,
    pub n: usize,
    #[serde(with = "crate::serde_float::option")]
    pub p: Option<f64>,
    #[serde(with = "crate::serde_float::option")]
    pub q: Option<f64>,
    pub variant: Option<LemmaVariant>,
    pub count: usize,
    #[serde(with = "crate::serde_float")]
    pub min_ratio: f64,
    #[serde(with = "crate::serde_float")]
    pub median_ratio: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub reports: Vec<InequalityReport>,
    pub errors: Vec<CellError>,
    pub summaries: Vec<CellSummary>,
}

impl SweepOutput {
    pub fn violations(&self) -> usize {
        self.reports.iter().filter(|r| r.violated()).count()
    }
}

/// Seed of trial `trial` at degree parameter `n`: a splitmix64 mix of the base.
pub fn derive_seed(base: u64, n: usize, trial: usize) -> u64 {
    let mut z = base
        .wrapping_add((n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((trial as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

type CellKey = (InequalityId, usize, Option<u64>, Option<u64>, Option<LemmaVariant>);

fn ord_bits(x: Option<f64>) -> Option<u64> {
    // order-preserving for non-negative floats, including inf
    x.map(f64::to_bits)
}

/// Every parameter combination `id` is checked at.
pub fn param_cells(id: InequalityId, class: PolyClass, p_grid: &[f64], q_grid: &[f64]) -> Vec<Params> {
    let ps: Vec<Option<f64>> = if id.uses_p() { p_grid.iter().map(|&p| Some(p)).collect() } else { vec![None] };
    let qs: Vec<Option<f64>> = if id.uses_q() { q_grid.iter().map(|&q| Some(q)).collect() } else { vec![None] };
    let variants: Vec<Option<LemmaVariant>> = match (id, class) {
        (Lem9, PolyClass::Segment) => vec![Some(LemmaVariant::SegmentK2), Some(LemmaVariant::HalfDiskK70e)],
        (Lem9, PolyClass::HalfDisk) => vec![Some(LemmaVariant::HalfDiskK70e)],
        _ => vec![None],
    };
    let mut out = Vec::new();
    for &p in &ps {
        for &q in &qs {
            for &variant in &variants {
                out.push(Params { p, q, variant });
            }
        }
    }
    out
}

/// All checks for one polynomial, sharing its norms.
pub fn check_all(
    poly: &RootPoly,
    ids: &[InequalityId],
    p_grid: &[f64],
    q_grid: &[f64],
    seed: Option<u64>,
) -> (Vec<InequalityReport>, Vec<CellError>) {
    let mut cache = NormCache::new(poly);
    let mut reports = Vec::new();
    let mut errors = Vec::new();
    for &id in ids {
        for params in param_cells(id, poly.class(), p_grid, q_grid) {
            match check_with_cache(id, &mut cache, params) {
                Ok(mut r) => {
                    r.seed = seed;
                    reports.push(r);
                }
                Err(e) => errors.push(CellError {
                    inequality_id: id,
                    n: poly.degree(),
                    p: if id.uses_p() { params.p } else { None },
                    q: if id.uses_q() { params.q } else { None },
                    variant: params.variant,
                    seed,
                    numerical: e.is_numerical(),
                    error: e.to_string(),
                }),
            }
        }
    }
    (reports, errors)
}

/// Run every id over a family and parameter grid.
///
/// Polynomials are generated from seeds derived deterministically from
/// `cfg.seed`, evaluated in parallel and reported in canonical cell order,
/// so the output does not depend on scheduling.
pub fn sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    let (lo, hi) = cfg.n_range;
    if lo == 0 || hi < lo {
        return Err(Error::ParamOutOfRange(format!("bad n range {lo}:{hi}")));
    }
    let trials = if cfg.family.is_random() { cfg.trials.max(1) } else { 1 };
    let tasks: Vec<(usize, usize)> = (lo..=hi).flat_map(|n| (0..trials).map(move |t| (n, t))).collect();

    let per_task: Vec<Result<(Vec<InequalityReport>, Vec<CellError>)>> = tasks
        .par_iter()
        .map(|&(n, t)| {
            let seed = cfg.family.is_random().then(|| derive_seed(cfg.seed, n, t));
            let poly = generate(&FamilySpec::seeded(cfg.family, n, seed.unwrap_or(0)))?;
            Ok(check_all(&poly, &cfg.ids, &cfg.p_grid, &cfg.q_grid, seed))
        })
        .collect();

    let mut out = SweepOutput::default();
    for r in per_task {
        let (reports, errors) = r?;
        out.reports.extend(reports);
        out.errors.extend(errors);
    }
    // stable sorts keep trial order inside each cell
    let report_key = |r: &InequalityReport| -> CellKey { (r.inequality_id, r.n, ord_bits(r.p), ord_bits(r.q), r.variant) };
    out.reports.sort_by_key(report_key);
    out.errors
        .sort_by_key(|e| (e.inequality_id, e.n, ord_bits(e.p), ord_bits(e.q), e.variant));

    let mut i = 0;
    while i < out.reports.len() {
        let key = report_key(&out.reports[i]);
        let mut j = i;
        while j < out.reports.len() && report_key(&out.reports[j]) == key {
            j += 1;
        }
        let cell = &out.reports[i..j];
        let mut ratios: Vec<f64> = cell.iter().map(|r| r.ratio).collect();
        ratios.sort_by(f64::total_cmp);
        let m = ratios.len();
        let median = if m % 2 == 1 { ratios[m / 2] } else { 0.5 * (ratios[m / 2 - 1] + ratios[m / 2]) };
        out.summaries.push(CellSummary {
            inequality_id: key.0,
            n: key.1,
            p: cell[0].p,
            q: cell[0].q,
            variant: key.4,
            count: m,
            min_ratio: ratios[0],
            median_ratio: median,
            violations: cell.iter().filter(|r| r.violated()).count(),
        });
        i = j;
    }
    Ok(out)
}
