//! One-dimensional quadrature helpers.
//!
//! Finite panels go through the double-exponential rule of the `quadrature`
//! crate, with bisection whenever its error estimate misses the target.
//! Oscillatory half-line integrals are split at known zeros of the integrand
//! and the resulting alternating panel series is summed by iterated averaging
//! of partial sums (the Euler transform).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Result, WeylError};

const MAX_INTERVALS: usize = 2000;

/// Adaptive integral of `f` over `[a, b]` with absolute error target `tol`.
///
/// Endpoint singularities of integrable type are fine: the double-exponential
/// nodes never touch the endpoints.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (value, err) = integrate_with_error(&f, a, b, tol);
    if err > tol.max(1e-300) * 10.0 && err > 1e-13 * value.abs() {
        return Err(WeylError::Quadrature {
            what: "finite panel",
            achieved: err,
            requested: tol,
        });
    }
    Ok(value)
}

/// Like [`integrate`] but never fails; returns `(value, error_estimate)`.
///
/// Globally adaptive: the interval with the largest error estimate is
/// bisected until the summed estimate meets `tol` (or rounding level), or
/// the interval budget runs out.
pub fn integrate_with_error<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    let rule = |lo: f64, hi: f64| {
        let out = quadrature::double_exponential::integrate(f, lo, hi, tol);
        Piece {
            err: out.error_estimate,
            lo,
            hi,
            value: out.integral,
        }
    };
    let mut heap = BinaryHeap::new();
    heap.push(rule(a, b));
    loop {
        let (value, err, mag) = heap
            .iter()
            .fold((0.0, 0.0, 0.0), |(v, e, m), p| (v + p.value, e + p.err, m + p.value.abs()));
        let floor = 64.0 * f64::EPSILON * mag;
        if err <= tol.max(floor) || heap.len() >= MAX_INTERVALS {
            return (value, err);
        }
        let worst = heap.pop().unwrap();
        let m = 0.5 * (worst.lo + worst.hi);
        if !(m > worst.lo && m < worst.hi) {
            // Interval at machine resolution; keep it and stop refining.
            heap.push(worst);
            let (value, err) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err));
            return (value, err);
        }
        heap.push(rule(worst.lo, m));
        heap.push(rule(m, worst.hi));
    }
}

struct Piece {
    err: f64,
    lo: f64,
    hi: f64,
    value: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err).is_eq()
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Sum of an alternating series given its terms, accelerated by repeated
/// averaging of the partial sums. Returns `(value, error_estimate)`.
pub fn euler_sum(terms: &[f64]) -> (f64, f64) {
    if terms.is_empty() {
        return (0.0, 0.0);
    }
    let mut partial: Vec<f64> = terms
        .iter()
        .scan(0.0, |s, &t| {
            *s += t;
            Some(*s)
        })
        .collect();
    let mut prev_last = *partial.last().unwrap();
    let mut err = terms.last().unwrap().abs();
    while partial.len() > 1 {
        let next: Vec<f64> = partial.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let last = *next.last().unwrap();
        err = (last - prev_last).abs();
        prev_last = last;
        partial = next;
    }
    (partial[0], err)
}

/// Integral over `[a, ∞)` of an integrand whose sign alternates between the
/// consecutive breakpoints produced by `zero(k)`, `k = 0, 1, …` (all `> a`).
///
/// The piece `[a, zero(0)]` is integrated directly; the following `panels`
/// panels form an alternating series that is Euler-summed.
pub fn oscillatory_tail<F, Z>(f: F, a: f64, zero: Z, panels: usize, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    Z: Fn(usize) -> f64,
{
    let head = integrate(&f, a, zero(0), tol)?;
    let mut terms = Vec::with_capacity(panels);
    for k in 0..panels {
        let (lo, hi) = (zero(k), zero(k + 1));
        terms.push(integrate(&f, lo, hi, tol * 1e-2)?);
    }
    let (tail, err) = euler_sum(&terms);
    if err > tol.max(1e-15 * (head + tail).abs()) * 10.0 {
        return Err(WeylError::Quadrature {
            what: "oscillatory tail",
            achieved: err,
            requested: tol,
        });
    }
    Ok(head + tail)
}
