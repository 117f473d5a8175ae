//! Empirical best constants: minimise a checker's ratio over root
//! configurations by multi-start Nelder–Mead.
//!
//! Zeros are reparametrised without constraints. Segment zeros are
//! `cos θ_k`; half-disk zeros are `|sin u_k| e^(iπσ(v_k))` with `σ` the
//! logistic map, and every fourth half-disk start searches over real zeros
//! only, which is the boundary `φ ∈ {0, π}` the logistic map never attains.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::task_rng;
use crate::inequalities::{check, InequalityId, Params};
use crate::measure::LemmaVariant;
use crate::polycore::{make_root_poly, PolyClass, RootPoly};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub inequality_id: InequalityId,
    pub n: usize,
    #[serde(with = "crate::serde_float::option")]
    pub p: Option<f64>,
    #[serde(with = "crate::serde_float::option")]
    pub q: Option<f64>,
    pub variant: Option<LemmaVariant>,
    pub class: PolyClass,
    pub starts: usize,
    pub max_iters_per_start: usize,
    pub seed: u64,
}

impl SearchConfig {
    pub fn new(inequality_id: InequalityId, n: usize, class: PolyClass) -> SearchConfig {
        SearchConfig {
            inequality_id,
            n,
            p: None,
            q: None,
            variant: None,
            class,
            starts: 50,
            max_iters_per_start: 2000,
            seed: 0,
        }
    }

    pub fn params(&self) -> Params {
        Params {
            p: self.p,
            q: self.q,
            variant: self.variant,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    /// `(re, im)` of each zero, in canonical order.
    pub best_roots: Vec<[f64; 2]>,
    pub best_digest: String,
    #[serde(with = "crate::serde_float")]
    pub best_ratio: f64,
    pub evaluations: usize,
    /// Best ratio of every start that finished, in start order.
    pub per_start_bests: Vec<f64>,
    pub converged_starts: usize,
    pub failed_starts: usize,
}

impl SearchResult {
    pub fn best_poly(&self, class: PolyClass) -> Result<RootPoly> {
        let zs: Vec<Complex64> = self.best_roots.iter().map(|&[a, b]| Complex64::new(a, b)).collect();
        make_root_poly(&zs, class)
    }
}

pub const X_TOL: f64 = 1e-10;
pub const F_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NmOutcome {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder–Mead with the standard coefficients (1, 2, 1/2, 1/2).
///
/// Stops when the simplex has both parameter spread `<= x_tol` and value
/// spread `<= f_tol (1 + |f_best|)`, or after `max_iters` iterations. NaN
/// values are read as `+inf`; an `Err` from `f` aborts the run.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], step: f64, max_iters: usize, x_tol: f64, f_tol: f64) -> Result<NmOutcome>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let d = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> Result<f64> {
        *evals += 1;
        let v = f(x)?;
        Ok(if v.is_nan() { f64::INFINITY } else { v })
    };
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += step;
        simplex.push(x);
    }
    let mut fs = Vec::with_capacity(d + 1);
    for x in &simplex {
        fs.push(eval(x, &mut evals)?);
    }
    let mut iterations = 0;
    let mut converged = false;
    let mut order: Vec<usize> = (0..=d).collect();
    loop {
        order.sort_by(|&a, &b| fs[a].total_cmp(&fs[b]).then(a.cmp(&b)));
        let best = order[0];
        let worst = order[d];
        let f_spread = fs[worst] - fs[best];
        let x_spread = simplex
            .iter()
            .flat_map(|x| x.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if x_spread <= x_tol && f_spread <= f_tol * (1.0 + fs[best].abs()) {
            converged = true;
            break;
        }
        if iterations >= max_iters {
            break;
        }
        iterations += 1;
        let second = order[d - 1];
        let mut centroid = vec![0.0; d];
        for &i in &order[..d] {
            for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                *c += v / d as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = along(1.0);
        let fr = eval(&xr, &mut evals)?;
        if fr < fs[best] {
            let xe = along(2.0);
            let fe = eval(&xe, &mut evals)?;
            if fe < fr {
                simplex[worst] = xe;
                fs[worst] = fe;
            } else {
                simplex[worst] = xr;
                fs[worst] = fr;
            }
            continue;
        }
        if fr < fs[second] {
            simplex[worst] = xr;
            fs[worst] = fr;
            continue;
        }
        let (xc, fc) = if fr < fs[worst] {
            let xc = along(0.5);
            let fc = eval(&xc, &mut evals)?;
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = eval(&xc, &mut evals)?;
            (xc, fc)
        };
        if fc < fs[worst].min(fr) {
            simplex[worst] = xc;
            fs[worst] = fc;
            continue;
        }
        // shrink toward the best vertex
        let xb = simplex[best].clone();
        for i in 0..=d {
            if i == best {
                continue;
            }
            for (v, b) in simplex[i].iter_mut().zip(&xb) {
                *v = b + 0.5 * (*v - b);
            }
            fs[i] = eval(&simplex[i], &mut evals)?;
        }
    }
    let best = order[0];
    Ok(NmOutcome {
        x: simplex[best].clone(),
        fx: fs[best],
        iterations,
        evaluations: evals,
        converged,
    })
}

fn logistic(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Param {
    Cos,
    Polar,
}

fn roots_from(param: Param, x: &[f64]) -> Vec<Complex64> {
    match param {
        Param::Cos => x.iter().map(|&t| Complex64::new(t.cos(), 0.0)).collect(),
        Param::Polar => x
            .chunks_exact(2)
            .map(|c| {
                let r = c[0].sin().abs().min(1.0);
                let phi = PI * logistic(c[1]);
                Complex64::from_polar(r, phi)
            })
            .collect(),
    }
}

fn build_poly(param: Param, x: &[f64], class: PolyClass) -> Result<RootPoly> {
    let mut zs = roots_from(param, x);
    if class == PolyClass::HalfDisk {
        // the polar map can land a hair outside the closed disk after rounding
        for z in &mut zs {
            let r = z.norm();
            if r > 1.0 {
                *z /= r;
            }
            z.im = z.im.max(0.0);
        }
    }
    make_root_poly(&zs, class)
}

struct StartOutcome {
    ratio: f64,
    poly: RootPoly,
    evaluations: usize,
    converged: bool,
}

fn run_start(cfg: &SearchConfig, start: usize) -> Result<StartOutcome> {
    let mut rng = task_rng(cfg.seed, start as u64);
    let param = if cfg.class == PolyClass::Segment || start % 4 == 3 {
        Param::Cos
    } else {
        Param::Polar
    };
    let x0: Vec<f64> = match param {
        Param::Cos => (0..cfg.n).map(|_| rng.gen_range(0.0..PI)).collect(),
        Param::Polar => (0..cfg.n)
            .flat_map(|_| [rng.gen_range(0.0..PI / 2.0), rng.gen_range(-4.0..4.0)])
            .collect(),
    };
    let params = cfg.params();
    let objective = |x: &[f64]| -> Result<f64> {
        let poly = build_poly(param, x, cfg.class)?;
        Ok(check(cfg.inequality_id, &poly, params)?.ratio)
    };
    let out = nelder_mead(objective, &x0, 0.3, cfg.max_iters_per_start, X_TOL, F_TOL)?;
    let poly = build_poly(param, &out.x, cfg.class)?;
    let ratio = check(cfg.inequality_id, &poly, params)?.ratio;
    Ok(StartOutcome {
        ratio,
        poly,
        evaluations: out.evaluations,
        converged: out.converged,
    })
}

fn validate(cfg: &SearchConfig) -> Result<()> {
    if cfg.starts == 0 {
        return Err(Error::ParamOutOfRange("starts must be >= 1".into()));
    }
    if cfg.n == 0 {
        return Err(Error::ParamOutOfRange("n must be >= 1".into()));
    }
    let probe = RootPoly::from_real(&vec![0.0; cfg.n], PolyClass::Segment)?.with_class(cfg.class)?;
    match check(cfg.inequality_id, &probe, cfg.params()) {
        Err(e) if !e.is_numerical() => Err(e),
        _ => Ok(()),
    }
}

/// Multi-start minimisation of `lhs/rhs` for `cfg.inequality_id`.
///
/// Starts run in parallel on independent seeded streams; the merge is the
/// minimum ratio, ties broken by the canonical root list, so the result does
/// not depend on scheduling. A start whose objective fails numerically is
/// discarded and counted in `failed_starts`.
pub fn minimize_ratio(cfg: &SearchConfig) -> Result<SearchResult> {
    validate(cfg)?;
    let outcomes: Vec<Result<StartOutcome>> = (0..cfg.starts).into_par_iter().map(|s| run_start(cfg, s)).collect();

    let mut per_start_bests = Vec::new();
    let mut evaluations = 0;
    let mut converged_starts = 0;
    let mut failed_starts = 0;
    let mut best: Option<(f64, String, &RootPoly)> = None;
    for o in &outcomes {
        match o {
            Ok(o) => {
                per_start_bests.push(o.ratio);
                evaluations += o.evaluations;
                converged_starts += o.converged as usize;
                let digest = o.poly.digest();
                let better = match &best {
                    None => true,
                    Some((r, d, _)) => o.ratio < *r || (o.ratio == *r && digest < *d),
                };
                if better {
                    best = Some((o.ratio, digest, &o.poly));
                }
            }
            Err(e) if e.is_numerical() => failed_starts += 1,
            Err(e) => return Err(e.clone()),
        }
    }
    let (best_ratio, best_digest, poly) =
        best.ok_or_else(|| Error::ObjectiveFailure(format!("all {} starts failed", cfg.starts)))?;
    Ok(SearchResult {
        best_roots: poly.roots().iter().map(|z| [z.re, z.im]).collect(),
        best_digest,
        best_ratio,
        evaluations,
        per_start_bests,
        converged_starts,
        failed_starts,
    })
}

/// Minimised statistic of an existential-constant inequality per `n`.
pub fn empirical_constant_table(
    id: InequalityId,
    ns: &[usize],
    p: Option<f64>,
    q: Option<f64>,
    base: &SearchConfig,
) -> Result<Vec<(usize, f64)>> {
    if !id.is_statistic() {
        return Err(Error::ParamOutOfRange(format!("{id} has a stated constant")));
    }
    ns.iter()
        .map(|&n| {
            let cfg = SearchConfig {
                inequality_id: id,
                n,
                p,
                q,
                class: PolyClass::Segment,
                ..*base
            };
            Ok((n, minimize_ratio(&cfg)?.best_ratio))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_rosenbrock() {
        let f = |x: &[f64]| Ok((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2));
        let out = nelder_mead(f, &[-1.2, 1.0], 0.5, 5000, 1e-10, 1e-14).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn nelder_mead_propagates_errors() {
        let f = |_: &[f64]| Err(Error::ObjectiveFailure("boom".into()));
        assert!(nelder_mead(f, &[0.0], 0.1, 10, 1e-10, 1e-12).is_err());
    }

    #[test]
    fn polar_map_stays_in_class() {
        let xs = [0.3, -50.0, 2.0, 50.0, 1.5707963, 0.0, -7.0, 3.0];
        for z in roots_from(Param::Polar, &xs) {
            assert!(z.norm() <= 1.0 + 1e-15 && z.im >= 0.0);
        }
        assert!(build_poly(Param::Polar, &xs, PolyClass::HalfDisk).is_ok());
    }

    #[test]
    fn turan_n1_optimum() {
        let mut cfg = SearchConfig::new(InequalityId::Ineq2, 1, PolyClass::Segment);
        cfg.starts = 4;
        cfg.max_iters_per_start = 200;
        let r = minimize_ratio(&cfg).unwrap();
        assert!((r.best_ratio - 3.0).abs() < 1e-6, "{}", r.best_ratio);
        assert!((r.best_roots[0][0].abs() - 1.0).abs() < 1e-6);
        assert_eq!(r.per_start_bests.len(), 4);
    }

    #[test]
    fn search_is_reproducible_and_sound() {
        let mut cfg = SearchConfig::new(InequalityId::Ineq1, 2, PolyClass::HalfDisk);
        cfg.starts = 4;
        cfg.max_iters_per_start = 150;
        cfg.seed = 11;
        let a = minimize_ratio(&cfg).unwrap();
        let b = minimize_ratio(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.best_ratio >= 1.0 - 1e-6);
        let poly = a.best_poly(PolyClass::HalfDisk).unwrap();
        let again = check(InequalityId::Ineq1, &poly, cfg.params()).unwrap().ratio;
        assert!((again - a.best_ratio).abs() <= 1e-9 * a.best_ratio);
        let min = a.per_start_bests.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(min, a.best_ratio);
    }

    #[test]
    fn bad_configs() {
        let mut cfg = SearchConfig::new(InequalityId::Ineq2, 3, PolyClass::HalfDisk);
        assert!(matches!(minimize_ratio(&cfg), Err(Error::ClassMismatch { .. })));
        cfg.class = PolyClass::Segment;
        cfg.starts = 0;
        assert!(matches!(minimize_ratio(&cfg), Err(Error::ParamOutOfRange(_))));
        let mut cfg = SearchConfig::new(InequalityId::Ineq7, 3, PolyClass::Segment);
        cfg.q = Some(0.5);
        assert!(matches!(minimize_ratio(&cfg), Err(Error::ParamOutOfRange(_))));
        let base = SearchConfig::new(InequalityId::Ineq3, 1, PolyClass::Segment);
        assert!(empirical_constant_table(InequalityId::Ineq2, &[2], None, None, &base).is_err());
    }
}
