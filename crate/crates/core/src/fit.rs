//! Power-law fits of remainders.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WeylError};

/// Least-squares line through `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub stderr: f64,
    pub r2: f64,
    pub intercept: f64,
    pub points: usize,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return Err(WeylError::Fit(format!("need at least 3 paired points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(WeylError::Fit("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let stderr = (sse / (nf - 2.0) / sxx).sqrt();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(LineFit {
        slope,
        stderr,
        r2,
        intercept,
        points: n,
    })
}

/// Geometric windows `[t, ratio·t]` starting at `t[0]`, each reduced to
/// `(window start, mean of reduce(residual))`; windows with fewer than
/// `min_points` samples are dropped.
pub fn window_average<F: Fn(f64) -> f64>(
    t: &[f64],
    residual: &[f64],
    ratio: f64,
    min_points: usize,
    reduce: F,
) -> (Vec<f64>, Vec<f64>) {
    let (mut ts, mut ms) = (Vec::new(), Vec::new());
    if t.is_empty() {
        return (ts, ms);
    }
    let mut start = t[0];
    let end = *t.last().unwrap();
    while start * ratio <= end * (1.0 + 1e-12) {
        let hi = start * ratio;
        let vals: Vec<f64> = t
            .iter()
            .zip(residual)
            .filter(|(&x, _)| x >= start && x < hi)
            .map(|(_, &r)| reduce(r))
            .collect();
        if vals.len() >= min_points.max(1) {
            ts.push(start);
            ms.push(vals.iter().sum::<f64>() / vals.len() as f64);
        }
        start = hi;
    }
    (ts, ms)
}

/// Slope of `log|residual|` against `log t`. With `window = Some(r)` the
/// residual is first replaced by its mean absolute value over geometric
/// windows `[t, r·t]`. Points with `|residual| ≤ noise_floor` are dropped.
pub fn fit_remainder_exponent(t: &[f64], residuals: &[f64], window: Option<f64>, noise_floor: f64) -> Result<LineFit> {
    if t.len() != residuals.len() {
        return Err(WeylError::Fit("grid and residuals differ in length".into()));
    }
    if t.len() < 8 {
        return Err(WeylError::Fit(format!("need at least 8 points, got {}", t.len())));
    }
    if residuals.iter().all(|&r| r == 0.0) {
        return Err(WeylError::Fit("residuals are identically zero".into()));
    }
    let (ts, rs) = match window {
        Some(ratio) => window_average(t, residuals, ratio, 1, f64::abs),
        None => (t.to_vec(), residuals.iter().map(|r| r.abs()).collect()),
    };
    let (x, y): (Vec<f64>, Vec<f64>) = ts
        .iter()
        .zip(&rs)
        .filter(|(&tt, &r)| tt > 0.0 && r > noise_floor)
        .map(|(&tt, &r)| (tt.ln(), r.ln()))
        .unzip();
    if x.len() < 3 {
        return Err(WeylError::Fit(format!("only {} points above the noise floor", x.len())));
    }
    linear_fit(&x, &y)
}

/// Least-squares `c` in `residual ≈ c t^p`, comparing window means of the
/// signed residual with window means of `t^p` over the same samples.
pub fn fit_coefficient(t: &[f64], residuals: &[f64], exponent: f64, window: f64) -> Result<f64> {
    let (ts, ms) = window_average(t, residuals, window, 1, |r| r);
    let powers: Vec<f64> = t.iter().map(|x| x.powf(exponent)).collect();
    let (_, gs) = window_average(t, &powers, window, 1, |r| r);
    if ts.len() < 2 {
        return Err(WeylError::Fit("too few windows".into()));
    }
    let (num, den) = gs.iter().zip(&ms).fold((0.0, 0.0), |(n, d), (&g, &m)| (n + g * m, d + g * g));
    Ok(num / den)
}

/// Decay rate of a Yukawa-type residual `c·e^{−a√λ}/√λ`: the slope of
/// `log(√λ·|residual|)` against `√λ`, i.e. `−a`. Points at or below
/// `noise_floor` are dropped.
pub fn fit_exponential_rate(lambda: &[f64], residuals: &[f64], noise_floor: f64) -> Result<LineFit> {
    if lambda.len() != residuals.len() {
        return Err(WeylError::Fit("grid and residuals differ in length".into()));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = lambda
        .iter()
        .zip(residuals)
        .filter(|(&l, &r)| l > 0.0 && r.abs() > noise_floor)
        .map(|(&l, &r)| (l.sqrt(), (l.sqrt() * r.abs()).ln()))
        .unzip();
    linear_fit(&x, &y)
}
