//! Closed-form constants of the inequalities, built on the Euler beta function.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_406;

/// Stirling remainder `ln Γ(x) - [(x - 1/2) ln x - x + ln sqrt(2π)]` for `x >= 10`.
fn stirling_correction(x: f64) -> f64 {
    // Bernoulli series B_{2k} / (2k (2k-1) x^(2k-1)); seven terms reach
    // 1e-17 absolute at x = 10.
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let r = 1.0 / x;
    let r2 = r * r;
    let mut acc = 0.0;
    for &c in C.iter().rev() {
        acc = acc * r2 + c;
    }
    acc * r
}

/// `ln Γ(x)` for `x > 0`.
///
/// Arguments below 10 are shifted up with the recurrence so the Stirling
/// series is always used where it is accurate.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x >= 10.0 {
        return (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_correction(x);
    }
    let mut prod = 1.0;
    let mut y = x;
    while y < 10.0 {
        prod *= y;
        y += 1.0;
    }
    ln_gamma(y) - prod.ln()
}

/// `ln B(a, b)` with the large-argument cancellation handled analytically.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || a.is_nan() || b.is_nan() {
        return Err(Error::DomainError(format!("beta({a}, {b}) needs positive arguments")));
    }
    let (p, q) = if a < b { (a, b) } else { (b, a) };
    let s = p + q;
    Ok(if p >= 10.0 {
        let corr = stirling_correction(p) + stirling_correction(q) - stirling_correction(s);
        -0.5 * q.ln() + LN_SQRT_2PI + corr + (p - 0.5) * (p / s).ln() + q * (-p / s).ln_1p()
    } else if q >= 10.0 {
        let corr = stirling_correction(q) - stirling_correction(s);
        ln_gamma(p) + corr + p - p * s.ln() + (q - 0.5) * (-p / s).ln_1p()
    } else {
        ln_gamma(p) + ln_gamma(q) - ln_gamma(s)
    })
}

/// Euler beta function `B(x, y) = Γ(x)Γ(y)/Γ(x+y)`.
pub fn beta(x: f64, y: f64) -> Result<f64> {
    Ok(ln_beta(x, y)?.exp())
}

/// `A = 2 / (3 sqrt(210 e))`, the half-disk reverse Markov constant.
pub fn a_halfdisk() -> f64 {
    2.0 / (3.0 * (210.0 * E).sqrt())
}

/// `70 e`, the half-disk measure constant.
pub fn k_halfdisk() -> f64 {
    70.0 * E
}

pub const K_SEGMENT: f64 = 2.0;

/// `A_∞(n) = sqrt(n/2) (1 - 1/(2n))^(n - 1/2)`.
pub fn a_inf(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::DomainError("A_inf(n) needs n >= 1".into()));
    }
    let nf = n as f64;
    Ok((nf / 2.0).sqrt() * ((nf - 0.5) * (-0.5 / nf).ln_1p()).exp())
}

/// `A_p(n) = n B(((2n-1)p + 1)/2, (p+1)/2)^(1/p)`, `1 <= p < inf`; `p = inf`
/// gives the limit `A_∞(n)`.
pub fn a_p(p: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::DomainError("A_p(n) needs n >= 1".into()));
    }
    if p == f64::INFINITY {
        return a_inf(n);
    }
    if !(p >= 1.0) {
        return Err(Error::DomainError(format!("A_p(n) needs p >= 1, got {p}")));
    }
    let nf = n as f64;
    let lb = ln_beta(((2.0 * nf - 1.0) * p + 1.0) / 2.0, (p + 1.0) / 2.0)?;
    Ok(nf * (lb / p).exp())
}

/// `c_q = 2^(-1/q) (1 - 1/q)^(1/q)` for `q > 1`, with `c_∞ = 1`.
pub fn c_q(q: f64) -> Result<f64> {
    if q == f64::INFINITY {
        return Ok(1.0);
    }
    if !(q > 1.0) {
        return Err(Error::DomainError(format!("c_q needs q > 1, got {q}")));
    }
    Ok((0.5 * (1.0 - 1.0 / q)).powf(1.0 / q))
}

/// `C_{p,q}(n) = c_q n^(1/q) A_∞(n)^(1-1/q) A_p(n-1)`, `n >= 2`.
pub fn c_pq(p: f64, q: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::DomainError("C_pq(n) needs n >= 2".into()));
    }
    let iq = inv(q);
    Ok(c_q(q)? * (n as f64).powf(iq) * a_inf(n)?.powf(1.0 - iq) * a_p(p, n - 1)?)
}

/// Second-derivative constant `min{n, (n-1)n/4}`, `n >= 2`.
pub fn bp2(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::DomainError("BP2(n) needs n >= 2".into()));
    }
    let nf = n as f64;
    Ok(nf.min((nf - 1.0) * nf / 4.0))
}

/// `1/q` with `1/∞ = 0`.
#[inline]
pub fn inv(q: f64) -> f64 {
    if q.is_infinite() {
        0.0
    } else {
        1.0 / q
    }
}

/// Named constants reachable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstantName {
    A,
    AInf,
    Ap,
    Cq,
    Cpq,
    KHalfDisk,
    KSegment,
    Bp2,
}

impl ConstantName {
    pub const ALL: [ConstantName; 8] = [
        ConstantName::A,
        ConstantName::AInf,
        ConstantName::Ap,
        ConstantName::Cq,
        ConstantName::Cpq,
        ConstantName::KHalfDisk,
        ConstantName::KSegment,
        ConstantName::Bp2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConstantName::A => "A",
            ConstantName::AInf => "A_inf",
            ConstantName::Ap => "A_p",
            ConstantName::Cq => "c_q",
            ConstantName::Cpq => "C_pq",
            ConstantName::KHalfDisk => "K_halfdisk",
            ConstantName::KSegment => "K_segment",
            ConstantName::Bp2 => "BP2",
        }
    }

    pub fn parse(s: &str) -> Option<ConstantName> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        ConstantName::ALL
            .into_iter()
            .find(|c| c.as_str().to_ascii_lowercase().replace('_', "") == key)
    }
}

/// Parameters for [`eval_constant`]; unused ones are ignored.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConstantParams {
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub q: Option<f64>,
}

pub fn eval_constant(name: ConstantName, params: ConstantParams) -> Result<f64> {
    let need_n = || params.n.ok_or_else(|| Error::DomainError(format!("{} needs n", name.as_str())));
    let need_p = || params.p.ok_or_else(|| Error::DomainError(format!("{} needs p", name.as_str())));
    let need_q = || params.q.ok_or_else(|| Error::DomainError(format!("{} needs q", name.as_str())));
    match name {
        ConstantName::A => Ok(a_halfdisk()),
        ConstantName::AInf => a_inf(need_n()?),
        ConstantName::Ap => {
            let p = need_p()?;
            if p.is_infinite() {
                return Err(Error::DomainError("A_p needs finite p; use A_inf".into()));
            }
            a_p(p, need_n()?)
        }
        ConstantName::Cq => c_q(need_q()?),
        ConstantName::Cpq => {
            let p = need_p()?;
            if !(p >= 1.0) {
                return Err(Error::DomainError(format!("C_pq needs p >= 1, got {p}")));
            }
            c_pq(p, need_q()?, need_n()?)
        }
        ConstantName::KHalfDisk => Ok(k_halfdisk()),
        ConstantName::KSegment => Ok(K_SEGMENT),
        ConstantName::Bp2 => bp2(need_n()?),
    }
}

/// `|A_p(n) - A_∞(n)|` along an increasing grid of `p >= 1`.
pub fn limit_check_ap_to_ainf(n: usize, p_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if p_grid.windows(2).any(|w| !(w[1] > w[0])) || p_grid.iter().any(|&p| !(p >= 1.0)) {
        return Err(Error::DomainError("p grid must be increasing and >= 1".into()));
    }
    let target = a_inf(n)?;
    p_grid
        .iter()
        .map(|&p| Ok((p, (a_p(p, n)? - target).abs())))
        .collect()
}

/// `∫_{-1}^{1} (1 - x^2)^s dx = B(1/2, s + 1)`.
pub fn one_minus_x2_integral(s: f64) -> Result<f64> {
    beta(0.5, s + 1.0)
}
