//! χ² upper-tail probabilities and critical values.
//!
//! The tail is the regularized upper incomplete gamma function
//! `Q(dof/2, x/2)`, evaluated by its power series below `a + 1` and by a
//! Lentz continued fraction above. Critical values are found by bisection on
//! the tail; the Wilson–Hilferty cube-root approximation only seeds the
//! bracket.

use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAX_ITER: usize = 1_000_000;

/// A statistic judged against a χ² distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChiSquareAssessment {
    /// The observed statistic. Second differences may be negative.
    pub statistic: f64,
    /// Degrees of freedom.
    pub dof: u64,
    /// `P(χ²_dof > statistic)`; 1 for non-positive statistics.
    pub p_value: f64,
    /// Tail probability the critical value was computed for.
    pub alpha: f64,
    /// `x` with `P(χ²_dof > x) = alpha`.
    pub critical_value: f64,
    /// `statistic > critical_value`.
    pub significant: bool,
}

/// Returns `(P(a, x), Q(a, x))`.
fn regularized_gamma(a: f64, x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (0.0, 1.0);
    }
    let ln_prefactor = -x + a * libm::log(x) - libm::lgamma(a);
    if x < a + 1.0 {
        let mut ap = a;
        let mut term = 1.0 / a;
        let mut sum = term;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if libm::fabs(term) < libm::fabs(sum) * EPS {
                break;
            }
        }
        let p = (sum * libm::exp(ln_prefactor)).min(1.0);
        (p, 1.0 - p)
    } else {
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / FPMIN;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if libm::fabs(d) < FPMIN {
                d = FPMIN;
            }
            c = b + an / c;
            if libm::fabs(c) < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if libm::fabs(delta - 1.0) < EPS {
                break;
            }
        }
        let q = (libm::exp(ln_prefactor) * h).min(1.0);
        (1.0 - q, q)
    }
}

/// Upper-tail probability `P(χ²_dof > x)`.
pub fn chi2_sf(x: f64, dof: u64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain("chi-square statistic must be non-negative"));
    }
    if dof == 0 {
        return Err(Error::Domain("degrees of freedom must be at least 1"));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if dof == 2 {
        return Ok(libm::exp(-x / 2.0));
    }
    Ok(regularized_gamma(dof as f64 / 2.0, x / 2.0).1)
}

/// Standard normal quantile, Acklam's rational approximation.
fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383_577_518_672_69e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    const LOW: f64 = 0.02425;
    if p < LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}

fn wilson_hilferty(alpha: f64, dof: u64) -> f64 {
    let d = dof as f64;
    let z = normal_quantile(1.0 - alpha);
    let s = 2.0 / (9.0 * d);
    let t = 1.0 - s + z * libm::sqrt(s);
    d * t * t * t
}

/// Critical value `x` with `P(χ²_dof > x) = alpha`.
pub fn chi2_critical(alpha: f64, dof: u64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain("alpha must lie strictly between 0 and 1"));
    }
    if dof == 0 {
        return Err(Error::Domain("degrees of freedom must be at least 1"));
    }
    let seed = wilson_hilferty(alpha, dof);
    let seed = if seed > 0.0 { seed } else { 1e-3 };

    let mut lo = seed;
    while chi2_sf(lo, dof)? < alpha {
        lo *= 0.5;
    }
    let mut hi = seed;
    while chi2_sf(hi, dof)? > alpha {
        hi = hi * 1.5 + 1.0;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if chi2_sf(mid, dof)? > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bundles tail probability and critical value for one statistic.
pub fn assess(statistic: f64, dof: u64, alpha: f64) -> Result<ChiSquareAssessment> {
    if statistic.is_nan() {
        return Err(Error::Domain("statistic is NaN"));
    }
    let critical_value = chi2_critical(alpha, dof)?;
    let p_value = chi2_sf(statistic.max(0.0), dof)?;
    Ok(ChiSquareAssessment {
        statistic,
        dof,
        p_value,
        alpha,
        critical_value,
        significant: statistic > critical_value,
    })
}
