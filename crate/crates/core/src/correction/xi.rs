//! The scaling profile
//!
//! ```text
//! Ξ_η(y) = (1/16π²) ∫ κ(2|z|) / (|z| |z+y|^{2−η}) dz
//! ```
//!
//! reduced to one dimension (s = |y|):
//!
//! ```text
//! Ξ_η(0) = (2^{−η}/4π) ∫₀^∞ κ(r) r^{η−1} dr
//! Ξ_η(s) = (2^{−η}/(16π η s)) ∫₀^∞ κ(r) ((r+2s)^η − |r−2s|^η) dr
//! ```

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{domain, Result};
use crate::kernels::{first_kappa_zero_after, kappa, kappa_zero, QuadratureSpec};
use crate::quad;

/// Ξ_η(s) by quadrature.
pub fn xi_eta(eta: f64, s: f64, q: &QuadratureSpec) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return domain(format!("eta must lie in (0,1), got {eta}"));
    }
    if !(s >= 0.0) {
        return domain(format!("s must be nonnegative, got {s}"));
    }
    if s == 0.0 {
        let f = |r: f64| kappa(r) * r.powf(eta - 1.0);
        let integral = kappa_integral(f, &[], q, 1e-3)?;
        return Ok(2f64.powf(-eta) / (4.0 * PI) * integral);
    }
    let two_s = 2.0 * s;
    let f = move |r: f64| kappa(r) * ((r + two_s).powf(eta) - (r - two_s).abs().powf(eta));
    let integral = kappa_integral(f, &[two_s], q, two_s.powf(eta) * 1e-3)?;
    Ok(2f64.powf(-eta) / (16.0 * PI * eta * s) * integral)
}

/// `(1/π²) · 2^{1−η}/(3−η) · cos(πη/2)/(1−η) · Γ(η)`.
pub fn xi_eta_origin_closed(eta: f64) -> f64 {
    2f64.powf(1.0 - eta) / (3.0 - eta) * (PI * eta / 2.0).cos() / (1.0 - eta) * gamma(eta) / (PI * PI)
}

/// ∫₀^∞ of an integrand that carries a factor κ(r): panels between zeros of
/// κ, extra breakpoints `knots`, Euler-summed tail past `q.r_max`.
fn kappa_integral<F: Fn(f64) -> f64>(f: F, knots: &[f64], q: &QuadratureSpec, scale: f64) -> Result<f64> {
    let last_knot = knots.iter().cloned().fold(0.0, f64::max);
    let k0 = first_kappa_zero_after(q.r_max.max(last_knot));
    let mut points = vec![0.0];
    points.extend((1..=k0).map(kappa_zero));
    points.extend(knots.iter().cloned().filter(|&k| k > 0.0));
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup();
    let tol = q.rel_tol * scale;
    let mut head = 0.0;
    for w in points.windows(2) {
        head += quad::integrate(&f, w[0], w[1], tol * 1e-2)?;
    }
    let tail = quad::oscillatory_tail(&f, kappa_zero(k0), |k| kappa_zero(k0 + 1 + k), q.panels, tol)?;
    Ok(head + tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn closed_form_values() {
        assert_relative_eq!(xi_eta_origin_closed(0.5), 0.1436697, max_relative = 1e-6);
        assert_relative_eq!(xi_eta_origin_closed(0.25), 0.2767, max_relative = 1e-3);
    }

    #[test]
    fn origin_matches_closed_form() {
        let q = QuadratureSpec::default();
        for eta in [0.25, 0.5, 0.75] {
            assert_relative_eq!(xi_eta(eta, 0.0, &q).unwrap(), xi_eta_origin_closed(eta), max_relative = 1e-7);
        }
    }

    #[test]
    fn continuous_at_origin() {
        let q = QuadratureSpec::default();
        // Ξ_η is Hölder-η at the origin: shrinking s by 100 shrinks the gap by 10.
        let a = xi_eta(0.5, 0.0, &q).unwrap();
        let d1 = (xi_eta(0.5, 1e-3, &q).unwrap() - a).abs();
        let d2 = (xi_eta(0.5, 1e-5, &q).unwrap() - a).abs();
        assert!(d1 < 0.1 * a, "{d1}");
        let ratio = d2 / d1;
        assert!(ratio > 0.05 && ratio < 0.2, "{ratio}");
    }
}
