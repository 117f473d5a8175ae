//! Structured polynomial families and seeded random samplers.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::beta;
use crate::error::{Error, Result};
use crate::norms::{lp_integral, NormSpec};
use crate::polycore::{make_root_poly, PolyClass, RootPoly};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    /// `(1 - x^2)^n`, degree `2n`.
    Qn,
    /// `(1 + x)^n`, the equality case of the weighted Turán inequalities.
    OnePlusXPowN,
    /// `x^n`
    Monomial,
    /// `n` zeros i.i.d. uniform on `[-1, 1]`.
    RandomSegment,
    /// `n` zeros i.i.d. uniform by area on the upper half-disk.
    RandomHalfDisk,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 5] = [
        FamilyKind::Qn,
        FamilyKind::OnePlusXPowN,
        FamilyKind::Monomial,
        FamilyKind::RandomSegment,
        FamilyKind::RandomHalfDisk,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyKind::Qn => "qn",
            FamilyKind::OnePlusXPowN => "one-plus-x-pow-n",
            FamilyKind::Monomial => "monomial",
            FamilyKind::RandomSegment => "random-segment",
            FamilyKind::RandomHalfDisk => "random-halfdisk",
        }
    }

    pub fn parse(s: &str) -> Option<FamilyKind> {
        FamilyKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    pub fn is_random(self) -> bool {
        matches!(self, FamilyKind::RandomSegment | FamilyKind::RandomHalfDisk)
    }

    pub fn class(self) -> PolyClass {
        match self {
            FamilyKind::RandomHalfDisk => PolyClass::HalfDisk,
            _ => PolyClass::Segment,
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub n: usize,
    /// Only read by the random kinds.
    pub seed: u64,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, n: usize) -> FamilySpec {
        FamilySpec { kind, n, seed: 0 }
    }

    pub fn seeded(kind: FamilyKind, n: usize, seed: u64) -> FamilySpec {
        FamilySpec { kind, n, seed }
    }
}

/// Independent, reproducible stream `task` derived from `seed`.
pub fn task_rng(seed: u64, task: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

/// `n` zeros uniform on `[-1, 1]`.
pub fn sample_segment_roots<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..=1.0), 0.0))
        .collect()
}

/// `n` zeros uniform by area on `D+`: `r = sqrt(u)`, `theta = pi v`.
pub fn sample_halfdisk_roots<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let r = rng.gen::<f64>().sqrt();
            let theta = PI * rng.gen::<f64>();
            Complex64::from_polar(r, theta)
        })
        .collect()
}

pub fn generate(spec: &FamilySpec) -> Result<RootPoly> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::ParamOutOfRange("family degree parameter must be >= 1".into()));
    }
    let real = |v: f64, k: usize| vec![Complex64::new(v, 0.0); k];
    let roots = match spec.kind {
        FamilyKind::Qn => {
            let mut r = real(-1.0, n);
            r.extend(real(1.0, n));
            r
        }
        FamilyKind::OnePlusXPowN => real(-1.0, n),
        FamilyKind::Monomial => real(0.0, n),
        FamilyKind::RandomSegment => sample_segment_roots(&mut ChaCha8Rng::seed_from_u64(spec.seed), n),
        FamilyKind::RandomHalfDisk => sample_halfdisk_roots(&mut ChaCha8Rng::seed_from_u64(spec.seed), n),
    };
    make_root_poly(&roots, spec.kind.class())
}

/// Closed form (an upper bound for k = 2) of `∫|Q_n^(k)|^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ClosedNorm {
    Exact(f64),
    UpperBound(f64),
}

impl ClosedNorm {
    pub fn value(self) -> f64 {
        match self {
            ClosedNorm::Exact(v) | ClosedNorm::UpperBound(v) => v,
        }
    }
}

/// `∫_{-1}^{1} |Q_n^(deriv)(x)|^p dx` for `Q_n = (1 - x^2)^n`.
///
/// * deriv 0: `B(1/2, np + 1)`
/// * deriv 1: `(2n)^p B((p+1)/2, (n-1)p + 1)`
/// * deriv 2: the bound `2^(1+p) n^(p-1/2) + 2^(1+2p) n^(2p) B(p + 1/2, (n-2)p + 1)/2`
pub fn qn_closed_norms(n: usize, p: f64, deriv: u8) -> Result<ClosedNorm> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::DomainError(format!("need 0 < p < inf, got {p}")));
    }
    let nf = n as f64;
    match deriv {
        0 if n >= 1 => Ok(ClosedNorm::Exact(beta(0.5, nf * p + 1.0)?)),
        1 if n >= 1 => Ok(ClosedNorm::Exact(
            (2.0 * nf).powf(p) * beta((p + 1.0) / 2.0, (nf - 1.0) * p + 1.0)?,
        )),
        2 if n >= 2 => {
            let head = 2f64.powf(1.0 + p) * nf.powf(p - 0.5);
            let tail = 2f64.powf(1.0 + 2.0 * p) * nf.powf(2.0 * p) * 0.5 * beta(p + 0.5, (nf - 2.0) * p + 1.0)?;
            Ok(ClosedNorm::UpperBound(head + tail))
        }
        _ => Err(Error::DomainError(format!("Q_n closed form needs n >= 1 (n >= 2 for deriv 2); got n={n}, deriv={deriv}"))),
    }
}

/// Least-squares line through `(ln x, ln y)`; returns `(slope, intercept)`.
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::DomainError("log-log fit needs two or more positive points".into()));
    }
    let m = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Allowed deviation of a fitted slope from its predicted exponent.
pub const SLOPE_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptotePoint {
    pub n: usize,
    /// `∫|Q_n^(deriv)|^p` by quadrature.
    pub value: f64,
    /// Closed form (deriv 0, 1) or the upper bound (deriv 2).
    pub closed_form: f64,
    /// `exp(intercept) n^slope`
    pub fit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteFit {
    pub deriv: u8,
    pub p: f64,
    pub points: Vec<AsymptotePoint>,
    pub slope: f64,
    pub intercept: f64,
    pub closed_form_slope: f64,
    /// Predicted exponent: `-1/2`, `(p-1)/2` or `p - 1/2`.
    pub target: f64,
    /// `true` when the prediction is an upper bound on the slope (deriv 2).
    pub upper_bound_only: bool,
    pub pass: bool,
}

/// Order of `∫|Q_n^(deriv)|^p` in `n`, fitted over `ns`.
pub fn qn_asymptote(deriv: u8, p: f64, ns: &[usize]) -> Result<AsymptoteFit> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::ParamOutOfRange(format!("need 0 < p < inf, got {p}")));
    }
    let target = match deriv {
        0 => -0.5,
        1 => (p - 1.0) / 2.0,
        2 => p - 0.5,
        _ => return Err(Error::ParamOutOfRange(format!("deriv must be 0, 1 or 2, got {deriv}"))),
    };
    let spec = NormSpec::plain(p, deriv);
    let mut raw = Vec::with_capacity(ns.len());
    for &n in ns {
        let q = generate(&FamilySpec::new(FamilyKind::Qn, n))?;
        raw.push((n, lp_integral(&q, &spec)?, qn_closed_norms(n, p, deriv)?.value()));
    }
    let pts: Vec<(f64, f64)> = raw.iter().map(|&(n, v, _)| (n as f64, v)).collect();
    let (slope, intercept) = loglog_fit(&pts)?;
    let cpts: Vec<(f64, f64)> = raw.iter().map(|&(n, _, c)| (n as f64, c)).collect();
    let (closed_form_slope, _) = loglog_fit(&cpts)?;
    let upper_bound_only = deriv == 2;
    let pass = if upper_bound_only {
        slope <= target + SLOPE_TOL
            && closed_form_slope <= target + SLOPE_TOL
            && raw.iter().all(|&(_, v, c)| v <= c * (1.0 + 1e-9))
    } else {
        (slope - target).abs() <= SLOPE_TOL
    };
    let points = raw
        .iter()
        .map(|&(n, value, closed_form)| AsymptotePoint {
            n,
            value,
            closed_form,
            fit: (intercept + slope * (n as f64).ln()).exp(),
        })
        .collect();
    Ok(AsymptoteFit {
        deriv,
        p,
        points,
        slope,
        intercept,
        closed_form_slope,
        target,
        upper_bound_only,
        pass,
    })
}
